//! Brute-force verification of the tradeoff algebra.
//!
//! Everything here is recomputed from dense matrices built straight from their
//! definitions: `M` from `sqrt(p(m|a))`, `U(k)` from its phases, `|b>` from the
//! Fourier kernel, `C_k` as `Tr(U(k)^dagger M) / d`. Only the quantities under
//! test come from [`crate::tradeoff`].
//!
//! Ensembles are driven by `ChaCha20Rng`. Each instance gets its own seed derived
//! from the ensemble seed with SplitMix64, so any failing instance can be
//! replayed alone and the sweep can run in parallel without changing results.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::{DenseMatrix, MAX_DENSE_DIMENSION};
use crate::error::{Error, Result};
use crate::qcore::{Dimension, MeasurementModel, OutcomeLikelihood, PHYSICS_TOL};
use crate::tradeoff::{
    evaluate_tradeoff, joint_output_probability, likelihood_from_spectrum,
    outcome_probability_fourier_input, phase_aligned_amplitude_bound, spectrum_from_likelihood,
    DisturbanceSpectrum,
};

/// Identity of the generator, recorded in every report.
pub const GENERATOR: &str = "ChaCha20Rng (rand_chacha 0.3, seed_from_u64); per-instance seeds via SplitMix64";

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of instance `index` of the ensemble `(seed, d)`.
pub fn instance_seed(seed: u64, d: Dimension, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ d.get() as u64) ^ index)
}

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    RandomLikelihood,
    RandomCompleteModel,
    RealNonnegativeSpectrum,
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_likelihood" => Ok(Self::RandomLikelihood),
            "random_complete_model" => Ok(Self::RandomCompleteModel),
            "real_nonnegative_spectrum" => Ok(Self::RealNonnegativeSpectrum),
            other => Err(Error::Malformed(format!("unknown ensemble kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub dimension: Dimension,
    pub count: u64,
    pub seed: u64,
    pub kind: EnsembleKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckFailure {
    pub check: String,
    pub instance_seed: u64,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub generator: String,
    pub tolerance: f64,
    pub instances: u64,
    pub checks_run: u64,
    pub failures: Vec<CheckFailure>,
    /// `None` until at least one bound has been checked.
    pub max_bound_slack: Option<f64>,
    pub min_bound_slack: Option<f64>,
}

impl VerificationReport {
    pub fn new(tolerance: f64) -> Self {
        Self {
            generator: GENERATOR.to_owned(),
            tolerance,
            instances: 0,
            checks_run: 0,
            failures: Vec::new(),
            max_bound_slack: None,
            min_bound_slack: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Fold another report into this one. Failures are kept sorted by instance
    /// seed so the merged result does not depend on evaluation order.
    pub fn merge(&mut self, other: VerificationReport) {
        self.instances += other.instances;
        self.checks_run += other.checks_run;
        self.failures.extend(other.failures);
        self.failures
            .sort_by(|a, b| a.instance_seed.cmp(&b.instance_seed).then_with(|| a.check.cmp(&b.check)));
        self.max_bound_slack = max_opt(self.max_bound_slack, other.max_bound_slack, f64::max);
        self.min_bound_slack = max_opt(self.min_bound_slack, other.min_bound_slack, f64::min);
    }

    fn record_slack(&mut self, slack: f64) {
        self.max_bound_slack = max_opt(self.max_bound_slack, Some(slack), f64::max);
        self.min_bound_slack = max_opt(self.min_bound_slack, Some(slack), f64::min);
    }
}

fn max_opt(a: Option<f64>, b: Option<f64>, pick: fn(f64, f64) -> f64) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(pick(x, y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Accumulates the worst deviation of one named check.
struct Check<'a> {
    name: &'static str,
    report: &'a mut VerificationReport,
    seed: u64,
    tol: f64,
    worst: Option<(f64, f64, f64)>,
}

impl<'a> Check<'a> {
    fn new(report: &'a mut VerificationReport, name: &'static str, seed: u64, tol: f64) -> Self {
        report.checks_run += 1;
        Self {
            name,
            report,
            seed,
            tol,
            worst: None,
        }
    }

    fn close(&mut self, observed: f64, expected: f64) {
        let dev = (observed - expected).abs();
        self.consider(dev, observed, expected);
    }

    /// `observed <= limit` up to the tolerance.
    fn at_most(&mut self, observed: f64, limit: f64) {
        self.consider(observed - limit, observed, limit);
    }

    fn consider(&mut self, excess: f64, observed: f64, expected: f64) {
        // NaN counts as a violation.
        let exceeds = |limit: f64| excess.is_nan() || excess > limit;
        if exceeds(self.tol) && self.worst.is_none_or(|(e, _, _)| exceeds(e)) {
            self.worst = Some((excess, observed, expected));
        }
    }
}

impl Drop for Check<'_> {
    fn drop(&mut self) {
        if let Some((_, observed, expected)) = self.worst {
            self.report.failures.push(CheckFailure {
                check: self.name.to_owned(),
                instance_seed: self.seed,
                observed,
                expected,
                tolerance: self.tol,
            });
        }
    }
}

/// `d` independent uniform draws on `[0, 1)`. Redraws in the measure-zero case
/// that every entry is zero.
pub fn random_likelihood<R: Rng + ?Sized>(d: Dimension, rng: &mut R) -> OutcomeLikelihood {
    loop {
        let probs: Vec<f64> = (0..d.get()).map(|_| rng.gen::<f64>()).collect();
        if let Ok(l) = OutcomeLikelihood::new("random", probs) {
            return l;
        }
    }
}

/// A complete model with `n_outcomes` outcomes: for each input `a` the
/// probabilities `p(m|a)` are positive draws normalized over `m`.
pub fn random_complete_model<R: Rng + ?Sized>(
    d: Dimension,
    n_outcomes: usize,
    rng: &mut R,
) -> Result<MeasurementModel> {
    if n_outcomes == 0 {
        return Err(Error::EmptyModel);
    }
    let mut columns = vec![vec![0.0; d.get()]; n_outcomes];
    for a in 0..d.get() {
        // 1 - U[0,1) lies in (0, 1], strictly positive.
        let draws: Vec<f64> = (0..n_outcomes).map(|_| 1.0 - rng.gen::<f64>()).collect();
        let total: f64 = draws.iter().sum();
        for (column, w) in columns.iter_mut().zip(draws) {
            column[a] = w / total;
        }
    }
    let outcomes = columns
        .into_iter()
        .enumerate()
        .map(|(m, probs)| OutcomeLikelihood::new(m.to_string(), probs))
        .collect::<Result<Vec<_>>>()?;
    MeasurementModel::new(outcomes)
}

/// Likelihood whose disturbance spectrum is real and nonnegative, which makes
/// the information bound an equality.
///
/// Draws symmetric `C_k = C_{d-k} >= 0` and sets `C_0` above `sum_{k != 0} C_k`,
/// so every reconstructed amplitude is real and nonnegative. That dominance is
/// sufficient, not necessary.
pub fn tightness_witness<R: Rng + ?Sized>(d: Dimension, rng: &mut R) -> OutcomeLikelihood {
    let n = d.get();
    let mut coeffs = vec![0.0f64; n];
    for k in 1..=n / 2 {
        let c = rng.gen::<f64>();
        coeffs[k] = c;
        coeffs[n - k] = c;
    }
    let tail: f64 = coeffs[1..].iter().sum();
    coeffs[0] = tail + rng.gen::<f64>();
    if coeffs[0] == 0.0 {
        coeffs[0] = 1.0;
    }
    // The largest amplitude sits at a = 0 and equals sum_k C_k.
    let peak: f64 = coeffs.iter().sum();
    let scale = (1.0 - rng.gen::<f64>()) / peak;
    let spectrum = DisturbanceSpectrum::from_coefficients(
        "witness",
        coeffs.iter().map(|c| C64::new(c * scale, 0.0)).collect(),
    )
    .expect("symmetric real coefficients");
    likelihood_from_spectrum(&spectrum).expect("dominant C_0 gives nonnegative amplitudes")
}

fn unit_phase(j: usize, n: usize) -> C64 {
    let theta = 2.0 * PI * ((j % n) as f64) / n as f64;
    C64::new(theta.cos(), theta.sin())
}

fn dense_shift(k: usize, n: usize) -> Result<DenseMatrix> {
    DenseMatrix::from_diagonal(&(0..n).map(|a| unit_phase(k * a, n)).collect::<Vec<_>>())
}

fn dense_operator(likelihood: &OutcomeLikelihood) -> Result<DenseMatrix> {
    DenseMatrix::from_diagonal(
        &likelihood
            .probs()
            .iter()
            .map(|p| C64::new(p.sqrt(), 0.0))
            .collect::<Vec<_>>(),
    )
}

/// `|b>` in a-basis coordinates.
fn dense_fourier_vector(b: usize, n: usize) -> Vec<C64> {
    let s = 1.0 / (n as f64).sqrt();
    (0..n).map(|a| unit_phase(a * b, n) * s).collect()
}

fn bra_ket(bra: &[C64], ket: &[C64]) -> C64 {
    bra.iter().zip(ket).map(|(x, y)| x.conj() * y).sum()
}

/// Values the dense path produces for one outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseEvaluation {
    /// `Tr(U(k)^dagger M) / d`.
    pub coeffs: Vec<C64>,
    /// `|<b+k|M|b>|^2`, indexed `[b][k]`.
    pub joint: Vec<Vec<f64>>,
    /// `||M|b>||^2` per `b`.
    pub outcome_probability: Vec<f64>,
    pub bound: f64,
    pub max_posterior: f64,
}

/// Evaluate every quantity of interest from dense matrices (`d <= 16`).
pub fn dense_evaluation(likelihood: &OutcomeLikelihood) -> Result<DenseEvaluation> {
    let n = likelihood.dimension().get();
    if n > MAX_DENSE_DIMENSION {
        return Err(Error::DenseTooLarge(n));
    }
    let m = dense_operator(likelihood)?;
    let coeffs = (0..n)
        .map(|k| Ok((&dense_shift(k, n)?.adjoint() * &m).trace() / n as f64))
        .collect::<Result<Vec<_>>>()?;

    let mut joint = Vec::with_capacity(n);
    let mut outcome_probability: Vec<f64> = Vec::with_capacity(n);
    for b in 0..n {
        let out = m.mul_vec(&dense_fourier_vector(b, n));
        outcome_probability.push(out.iter().map(|z| z.norm_sqr()).sum());
        joint.push(
            (0..n)
                .map(|k| bra_ket(&dense_fourier_vector((b + k) % n, n), &out).norm_sqr())
                .collect::<Vec<f64>>(),
        );
    }

    // Bound from the probe state b = 0 (b-independence is checked separately).
    let root_sum: f64 = joint[0]
        .iter()
        .map(|p| (p / outcome_probability[0]).sqrt())
        .sum();
    let bound = root_sum * root_sum / n as f64;

    let total: f64 = likelihood.probs().iter().sum();
    let max_posterior = likelihood.probs().iter().map(|p| p / total).fold(0.0, f64::max);

    Ok(DenseEvaluation {
        coeffs,
        joint,
        outcome_probability,
        bound,
        max_posterior,
    })
}

/// Run every brute-force sub-check on one likelihood (`d <= 16`). Sub-check
/// failures are recorded in the report, never raised.
pub fn brute_force_check(
    likelihood: &OutcomeLikelihood,
    tolerance: f64,
    seed: u64,
) -> Result<VerificationReport> {
    let n = likelihood.dimension().get();
    if n > MAX_DENSE_DIMENSION {
        return Err(Error::DenseTooLarge(n));
    }
    let mut report = VerificationReport::new(tolerance);
    report.instances = 1;

    let dense = dense_evaluation(likelihood)?;
    let spectrum = spectrum_from_likelihood(likelihood);
    let shifts = (0..n).map(|k| dense_shift(k, n)).collect::<Result<Vec<_>>>()?;

    {
        let mut c = Check::new(&mut report, "orthogonality", seed, tolerance);
        for (k, uk) in shifts.iter().enumerate() {
            let uk_dag = uk.adjoint();
            for (k2, uk2) in shifts.iter().enumerate() {
                let overlap = (&uk_dag * uk2).trace();
                let expected = if k == k2 { n as f64 } else { 0.0 };
                c.consider((overlap - C64::new(expected, 0.0)).norm(), overlap.re, expected);
            }
        }
    }
    {
        let mut c = Check::new(&mut report, "spectrum_vs_trace", seed, tolerance);
        for (core, oracle) in spectrum.coeffs().iter().zip(&dense.coeffs) {
            c.consider((core - oracle).norm(), core.norm(), oracle.norm());
        }
    }
    {
        let mut c = Check::new(&mut report, "expansion", seed, tolerance);
        let m = dense_operator(likelihood)?;
        let mut sum = DenseMatrix::zeros(n)?;
        for (ck, uk) in spectrum.coeffs().iter().zip(&shifts) {
            sum = &sum + &uk.scale(*ck);
        }
        let diff = m.max_abs_diff(&sum);
        c.close(diff, 0.0);
    }
    {
        let mut c = Check::new(&mut report, "observable_disturbance", seed, tolerance);
        for row in &dense.joint {
            for (k, &p) in row.iter().enumerate() {
                let core = joint_output_probability(&spectrum, k)?;
                c.close(core, p);
            }
        }
    }
    {
        let mut c = Check::new(&mut report, "parseval", seed, tolerance);
        let core = outcome_probability_fourier_input(likelihood);
        for &p in &dense.outcome_probability {
            c.close(core, p);
        }
        c.close(spectrum.total_weight(), core);
    }
    {
        let mut c = Check::new(&mut report, "phase_alignment", seed, tolerance);
        let max_amp = likelihood.amplitudes().into_iter().fold(0.0, f64::max);
        c.at_most(max_amp, phase_aligned_amplitude_bound(&spectrum));
    }

    let core_report = evaluate_tradeoff(likelihood);
    {
        let mut c = Check::new(&mut report, "main_bound", seed, tolerance);
        c.at_most(dense.max_posterior, dense.bound);
    }
    {
        let mut c = Check::new(&mut report, "oracle_vs_core", seed, tolerance);
        match &core_report {
            Ok(r) => {
                c.close(r.bound, dense.bound);
                c.close(r.max_posterior, dense.max_posterior);
            }
            Err(_) => c.close(f64::NAN, dense.bound),
        }
    }
    {
        let mut c = Check::new(&mut report, "roundtrip", seed, tolerance);
        match likelihood_from_spectrum(&spectrum) {
            Ok(back) => {
                for (x, y) in back.probs().iter().zip(likelihood.probs()) {
                    c.close(*x, *y);
                }
            }
            Err(_) => c.close(f64::NAN, 0.0),
        }
    }
    report.record_slack(dense.bound - dense.max_posterior);
    Ok(report)
}

/// Dense check of `sum_m M_m^dagger M_m = I`.
pub fn completeness_deviation(model: &MeasurementModel) -> Result<f64> {
    let n = model.dimension().get();
    let mut acc = DenseMatrix::zeros(n)?;
    for o in model.outcomes() {
        let m = dense_operator(o)?;
        acc = &acc + &(&m.adjoint() * &m);
    }
    Ok(acc.max_abs_diff(&DenseMatrix::identity(n)?))
}

fn run_instance(spec: &EnsembleSpec, index: u64, tolerance: f64) -> Result<VerificationReport> {
    let seed = instance_seed(spec.seed, spec.dimension, index);
    let mut rng = rng_from_seed(seed);
    match spec.kind {
        EnsembleKind::RandomLikelihood => {
            brute_force_check(&random_likelihood(spec.dimension, &mut rng), tolerance, seed)
        }
        EnsembleKind::RandomCompleteModel => {
            let n_outcomes = rng.gen_range(1..=4);
            let model = random_complete_model(spec.dimension, n_outcomes, &mut rng)?;
            let mut report = VerificationReport::new(tolerance);
            for o in model.outcomes() {
                report.merge(brute_force_check(o, tolerance, seed)?);
            }
            report.instances = 1;
            let dev = completeness_deviation(&model)?;
            Check::new(&mut report, "completeness", seed, tolerance).close(dev, 0.0);
            Ok(report)
        }
        EnsembleKind::RealNonnegativeSpectrum => {
            let witness = tightness_witness(spec.dimension, &mut rng);
            let mut report = brute_force_check(&witness, tolerance, seed)?;
            let slack = report.max_bound_slack.unwrap_or(f64::NAN);
            Check::new(&mut report, "tightness", seed, tolerance).close(slack, 0.0);
            Ok(report)
        }
    }
}

/// Run one ensemble. Instances are evaluated in parallel and merged in index
/// order, so the report is identical for identical specs.
pub fn run_ensemble(spec: &EnsembleSpec, tolerance: f64) -> Result<VerificationReport> {
    if spec.dimension.get() > MAX_DENSE_DIMENSION {
        return Err(Error::DenseTooLarge(spec.dimension.get()));
    }
    let parts = (0..spec.count)
        .into_par_iter()
        .map(|i| run_instance(spec, i, tolerance))
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerificationReport::new(tolerance);
    for part in parts {
        report.merge(part);
    }
    Ok(report)
}

pub fn run_ensembles(specs: &[EnsembleSpec], tolerance: f64) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(tolerance);
    for spec in specs {
        report.merge(run_ensemble(spec, tolerance)?);
    }
    Ok(report)
}

/// Default tolerance of [`brute_force_check`] and the ensemble runners.
pub const DEFAULT_TOLERANCE: f64 = PHYSICS_TOL;
