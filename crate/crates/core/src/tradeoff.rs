//! Disturbance spectra, observable disturbance statistics, uniform-prior
//! posteriors and the information bound derived from them.
//!
//! For one outcome `m` with amplitudes `s_a = sqrt(p(m|a))`:
//!
//! ```text
//! C_k        = (1/d) sum_a exp(-2 pi i k a / d) s_a        (forward)
//! s_a        =       sum_k exp(+2 pi i k a / d) C_k        (inverse, no 1/d)
//! p(m,b+k|b) = |C_k|^2
//! p(m|b)     = sum_k |C_k|^2 = (1/d) sum_a p(m|a)
//! p(a|m)    <= (1/d) (sum_k sqrt(p(b+k|b,m)))^2
//! ```

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{phase_table, Dimension, OutcomeLikelihood, ARITH_TOL, PHYSICS_TOL};

/// Above this dimension the transform goes through an FFT instead of direct
/// summation.
pub const FAST_DFT_THRESHOLD: usize = 256;

/// Reconstructed amplitudes below this are an error rather than roundoff.
const AMPLITUDE_REJECT: f64 = 1e-6;

/// `out_k = scale * sum_j exp(sign * 2 pi i j k / d) x_j`, summed directly with
/// exact integer phase indices.
pub fn dft_direct(input: &[C64], inverse: bool, scale: f64) -> Vec<C64> {
    let n = input.len();
    let Ok(d) = Dimension::new(n) else {
        return input.iter().map(|x| x * scale).collect();
    };
    let table = phase_table(d);
    (0..n)
        .map(|k| {
            let acc: C64 = input
                .iter()
                .enumerate()
                .map(|(j, x)| {
                    let idx = (j * k) % n;
                    let idx = if inverse { idx } else { (n - idx) % n };
                    table[idx] * x
                })
                .sum();
            acc * scale
        })
        .collect()
}

/// Same transform as [`dft_direct`] through `rustfft`.
pub fn dft_fast(input: &[C64], inverse: bool, scale: f64) -> Vec<C64> {
    let mut buf = input.to_vec();
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    fft.process(&mut buf);
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

fn dft(input: &[C64], inverse: bool, scale: f64) -> Vec<C64> {
    if input.len() > FAST_DFT_THRESHOLD {
        dft_fast(input, inverse, scale)
    } else {
        dft_direct(input, inverse, scale)
    }
}

/// Coefficients `C_k` of `M = sum_k C_k U(k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisturbanceSpectrum {
    label: String,
    coeffs: Vec<C64>,
    #[serde(skip)]
    dim: Dimension,
}

impl DisturbanceSpectrum {
    /// Accept externally supplied coefficients. They must satisfy
    /// `C_{d-k} = conj(C_k)`, which is what real amplitudes `sqrt(p(m|a))` require.
    pub fn from_coefficients(label: impl Into<String>, coeffs: Vec<C64>) -> Result<Self> {
        let dim = Dimension::new(coeffs.len())?;
        let n = coeffs.len();
        for k in 0..n {
            let partner = coeffs[(n - k) % n];
            let gap = (partner - coeffs[k].conj()).norm();
            if !gap.is_finite() || gap > PHYSICS_TOL {
                return Err(Error::NotMinimallyDisturbing(format!(
                    "C_{} != conj(C_{k}) (difference {gap:e})",
                    (n - k) % n
                )));
            }
        }
        Ok(Self {
            label: label.into(),
            coeffs,
            dim,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    /// `|C_k|^2` for each `k`.
    pub fn weights(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `sum_k |C_k|^2`, i.e. `p(m|b)`.
    pub fn total_weight(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Forward transform of the amplitudes `sqrt(p(m|a))`.
pub fn spectrum_from_likelihood(likelihood: &OutcomeLikelihood) -> DisturbanceSpectrum {
    let d = likelihood.dimension();
    let amps: Vec<C64> = likelihood
        .amplitudes()
        .into_iter()
        .map(|s| C64::new(s, 0.0))
        .collect();
    let mut coeffs = dft(&amps, false, 1.0 / d.get() as f64);
    // Real input: enforce the conjugate pairing exactly instead of to roundoff.
    let n = d.get();
    coeffs[0].im = 0.0;
    for k in 1..=n / 2 {
        let avg = (coeffs[k] + coeffs[n - k].conj()) * 0.5;
        coeffs[k] = avg;
        coeffs[n - k] = avg.conj();
    }
    if n.is_multiple_of(2) {
        coeffs[n / 2].im = 0.0;
    }
    DisturbanceSpectrum {
        label: likelihood.label().to_owned(),
        coeffs,
        dim: d,
    }
}

/// Inverse of [`spectrum_from_likelihood`]:
/// `p(m|a) = (sum_k exp(2 pi i k a / d) C_k)^2`.
pub fn likelihood_from_spectrum(spectrum: &DisturbanceSpectrum) -> Result<OutcomeLikelihood> {
    let amps = dft(&spectrum.coeffs, true, 1.0);
    let mut probs = Vec::with_capacity(amps.len());
    for (a, z) in amps.iter().enumerate() {
        if z.im.abs() > PHYSICS_TOL {
            return Err(Error::NotMinimallyDisturbing(format!(
                "amplitude at a={a} has imaginary part {:e}",
                z.im
            )));
        }
        let s = z.re;
        if !(-AMPLITUDE_REJECT..=1.0 + AMPLITUDE_REJECT).contains(&s) {
            return Err(Error::NotMinimallyDisturbing(format!(
                "amplitude at a={a} is {s}, outside [0, 1]"
            )));
        }
        let s = s.clamp(0.0, 1.0);
        probs.push(s * s);
    }
    OutcomeLikelihood::new(spectrum.label.clone(), probs)
        .map_err(|e| Error::NotMinimallyDisturbing(e.to_string()))
}

/// `p(m, b+k | b) = |C_k|^2`, the same for every probe state `b`.
pub fn joint_output_probability(spectrum: &DisturbanceSpectrum, k: usize) -> Result<f64> {
    spectrum.dim.check_index(k)?;
    Ok(spectrum.coeffs[k].norm_sqr())
}

/// `p(m|b) = (1/d) sum_a p(m|a)`.
pub fn outcome_probability_fourier_input(likelihood: &OutcomeLikelihood) -> f64 {
    likelihood.total() / likelihood.dimension().get() as f64
}

/// Uniform-prior Bayesian update `p(a|m)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Posterior {
    probs: Vec<f64>,
    argmax: usize,
    ties: Vec<usize>,
}

impl Posterior {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Smallest index attaining the maximum.
    pub fn argmax(&self) -> usize {
        self.argmax
    }

    pub fn max(&self) -> f64 {
        self.probs[self.argmax]
    }

    /// Other indices whose posterior lies within `1e-9` of the maximum.
    pub fn ties(&self) -> &[usize] {
        &self.ties
    }
}

pub fn posterior_uniform_prior(likelihood: &OutcomeLikelihood) -> Result<Posterior> {
    let total = likelihood.total();
    if total <= 0.0 {
        return Err(Error::OutcomeNeverOccurs(likelihood.label().to_owned()));
    }
    let probs: Vec<f64> = likelihood.probs().iter().map(|p| p / total).collect();
    let mut argmax = 0;
    for (a, &p) in probs.iter().enumerate() {
        if p > probs[argmax] {
            argmax = a;
        }
    }
    let max = probs[argmax];
    let ties = probs
        .iter()
        .enumerate()
        .filter(|&(a, &p)| a != argmax && max - p < PHYSICS_TOL)
        .map(|(a, _)| a)
        .collect();
    Ok(Posterior {
        probs,
        argmax,
        ties,
    })
}

/// Conditional shift distribution `p(b+k|b,m)` over `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisturbanceDistribution {
    label: String,
    probs: Vec<f64>,
    #[serde(skip)]
    dim: Dimension,
}

impl DisturbanceDistribution {
    pub fn new(label: impl Into<String>, probs: Vec<f64>) -> Result<Self> {
        let dim = Dimension::new(probs.len())?;
        if let Some((k, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < -ARITH_TOL)
        {
            return Err(Error::InvalidDistribution(format!("entry {k} is {p}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PHYSICS_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self {
            label: label.into(),
            probs: probs.into_iter().map(|p| p.max(0.0)).collect(),
            dim,
        })
    }

    /// Normalize nonnegative weights into a distribution.
    pub fn from_weights(label: impl Into<String>, weights: &[f64]) -> Result<Self> {
        let label = label.into();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::OutcomeNeverOccurs(label));
        }
        Self::new(label, weights.iter().map(|w| w / total).collect())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    /// `(1/d) (sum_k sqrt(p_k))^2`, in `[1/d, 1]`.
    pub fn information_bound(&self) -> f64 {
        let root_sum: f64 = self.probs.iter().map(|p| p.sqrt()).sum();
        root_sum * root_sum / self.dim.get() as f64
    }
}

pub fn disturbance_distribution(spectrum: &DisturbanceSpectrum) -> Result<DisturbanceDistribution> {
    DisturbanceDistribution::from_weights(spectrum.label.clone(), &spectrum.weights())
}

/// Upper bound on `p(a|m)` from the observable shift distribution.
pub fn information_bound(dist: &DisturbanceDistribution) -> f64 {
    dist.information_bound()
}

/// `sum_k |C_k|`, the value `max_a sqrt(p(m|a))` reaches when all phases align.
pub fn phase_aligned_amplitude_bound(spectrum: &DisturbanceSpectrum) -> f64 {
    spectrum.coeffs.iter().map(|c| c.norm()).sum()
}

/// Bound and posterior side by side for one outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub label: String,
    pub dimension: Dimension,
    pub bound: f64,
    pub max_posterior: f64,
    pub argmax: usize,
    pub ties: Vec<usize>,
    pub slack: f64,
    pub tight: bool,
}

pub fn evaluate_tradeoff(likelihood: &OutcomeLikelihood) -> Result<BoundReport> {
    let spectrum = spectrum_from_likelihood(likelihood);
    let dist = disturbance_distribution(&spectrum)?;
    let bound = dist.information_bound();
    let posterior = posterior_uniform_prior(likelihood)?;
    let max_posterior = posterior.max();
    let slack = bound - max_posterior;
    if slack < -PHYSICS_TOL {
        return Err(Error::BoundViolated {
            bound,
            max_posterior,
        });
    }
    Ok(BoundReport {
        label: likelihood.label().to_owned(),
        dimension: likelihood.dimension(),
        bound,
        max_posterior,
        argmax: posterior.argmax,
        ties: posterior.ties,
        slack,
        tight: slack < PHYSICS_TOL,
    })
}

/// Evaluate independent outcomes in parallel; results keep input order.
pub fn evaluate_batch(likelihoods: &[OutcomeLikelihood]) -> Vec<Result<BoundReport>> {
    likelihoods.par_iter().map(evaluate_tradeoff).collect()
}
