//! Hilbert-space primitives at dimension `d`: pure states tagged with their
//! basis, the computational (`a`) and Fourier (`b`) bases, the shift unitaries
//! `U(k)` and diagonal measurement operators.
//!
//! Operators are stored by their diagonal only. `U(k)` is diagonal in the
//! a-basis and a cyclic permutation in the b-basis; measurement operators are
//! diagonal in the a-basis. Dense matrices live in [`crate::dense`] and are only
//! meant for cross-checks.
//!
//! Conjugate basis convention:
//!
//! ```text
//! |b> = d^{-1/2} sum_a exp(+2 pi i a b / d) |a>
//! ```
//!
//! With `U(k) = sum_a exp(+2 pi i k a / d) |a><a|` this gives `U(k)|b> = |b+k>`
//! and `M|b> = sum_k C_k |b+k>` where `C_k` is the forward transform with the
//! negative exponent.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported Hilbert-space dimension.
pub const MAX_DIMENSION: usize = 4096;

/// Tolerance for physics-level assertions (normalization, completeness).
pub const PHYSICS_TOL: f64 = 1e-9;

/// Tolerance for pure arithmetic identities.
pub const ARITH_TOL: f64 = 1e-12;

/// Probability below which a measurement outcome counts as impossible.
pub const IMPOSSIBLE_PROB: f64 = 1e-15;

/// Hilbert-space dimension, `2 <= d <= 4096`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        if (2..=MAX_DIMENSION).contains(&d) {
            Ok(Self(d))
        } else {
            Err(Error::InvalidDimension(d))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Reduce a possibly negative index into `[0, d)`.
    #[inline]
    pub fn wrap(self, index: i64) -> usize {
        index.rem_euclid(self.0 as i64) as usize
    }

    pub fn check_index(self, index: usize) -> Result<usize> {
        if index < self.0 {
            Ok(index)
        } else {
            Err(Error::IndexOutOfRange {
                index,
                dimension: self.0,
            })
        }
    }

    fn expect(self, found: Dimension) -> Result<()> {
        if self == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.0,
                found: found.0,
            })
        }
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;
    fn try_from(d: usize) -> Result<Self> {
        Self::new(d)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `exp(2 pi i j / d)` with `j` reduced mod `d` first, so the phase table is
/// evaluated on exact integer indices.
#[inline]
pub fn root_of_unity(j: i64, d: Dimension) -> C64 {
    let j = d.wrap(j);
    C64::from_polar(1.0, 2.0 * PI * j as f64 / d.get() as f64)
}

/// Table of `exp(2 pi i j / d)` for `j = 0..d`.
pub fn phase_table(d: Dimension) -> Vec<C64> {
    (0..d.get() as i64).map(|j| root_of_unity(j, d)).collect()
}

/// Which basis a vector of amplitudes refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Eigenbasis `{|a>}` of the measurement operators.
    Computational,
    /// Conjugate basis `{|b>}`, the discrete Fourier transform of `{|a>}`.
    Fourier,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Computational => f.write_str("a-basis"),
            Basis::Fourier => f.write_str("b-basis"),
        }
    }
}

/// A normalized pure state. The basis tag travels with the amplitudes; nothing
/// silently reinterprets amplitudes from one basis as the other.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    basis: Basis,
    dim: Dimension,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, basis: Basis) -> Result<Self> {
        let dim = Dimension::new(amplitudes.len())?;
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > PHYSICS_TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self {
            amplitudes,
            basis,
            dim,
        })
    }

    /// Build from amplitudes of arbitrary nonzero norm, rescaling to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>, basis: Basis) -> Result<Self> {
        let dim = Dimension::new(amplitudes.len())?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm * norm));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Ok(Self {
            amplitudes,
            basis,
            dim,
        })
    }

    /// The basis vector `index` of `basis`, expressed in that same basis.
    pub fn basis_state(index: usize, dim: Dimension, basis: Basis) -> Result<Self> {
        dim.check_index(index)?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim.get()];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            basis,
            dim,
        })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Re-express the state in `target`.
    pub fn to_basis(&self, target: Basis) -> PureState {
        if target == self.basis {
            return self.clone();
        }
        let amplitudes = match target {
            Basis::Fourier => computational_to_fourier(&self.amplitudes, self.dim),
            Basis::Computational => fourier_to_computational(&self.amplitudes, self.dim),
        };
        PureState {
            amplitudes,
            basis: target,
            dim: self.dim,
        }
    }

    /// `<self|other>`. Both states must be written in the same basis.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        self.dim.expect(other.dim)?;
        if self.basis != other.basis {
            return Err(Error::BasisMismatch {
                expected: self.basis,
                found: other.basis,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| x.conj() * y)
            .sum())
    }
}

fn computational_to_fourier(alpha: &[C64], d: Dimension) -> Vec<C64> {
    // beta_b = <b|psi> = d^{-1/2} sum_a exp(-2 pi i a b / d) alpha_a
    let table = phase_table(d);
    let n = d.get();
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|b| {
            alpha
                .iter()
                .enumerate()
                .map(|(a, x)| table[(n - (a * b) % n) % n] * x)
                .sum::<C64>()
                * scale
        })
        .collect()
}

fn fourier_to_computational(beta: &[C64], d: Dimension) -> Vec<C64> {
    let table = phase_table(d);
    let n = d.get();
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|a| {
            beta.iter()
                .enumerate()
                .map(|(b, y)| table[(a * b) % n] * y)
                .sum::<C64>()
                * scale
        })
        .collect()
}

/// Conjugate-basis vector `|b>` written in the a-basis:
/// amplitude `d^{-1/2} exp(+2 pi i a b / d)` at index `a`.
pub fn fourier_state(b: usize, dim: Dimension) -> Result<PureState> {
    dim.check_index(b)?;
    let scale = 1.0 / (dim.get() as f64).sqrt();
    let amplitudes = (0..dim.get())
        .map(|a| root_of_unity((a * b) as i64, dim) * scale)
        .collect();
    Ok(PureState {
        amplitudes,
        basis: Basis::Computational,
        dim,
    })
}

/// Conditional probabilities `p(m|a)` over inputs `a` for one fixed outcome `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeLikelihood {
    label: String,
    probs: Vec<f64>,
    #[serde(skip)]
    dim: Dimension,
}

impl OutcomeLikelihood {
    /// Validate and build. Entries within `1e-12` outside `[0, 1]` are clamped;
    /// anything further out is rejected, as is an all-zero vector.
    pub fn new(label: impl Into<String>, probs: Vec<f64>) -> Result<Self> {
        let label = label.into();
        let dim = Dimension::new(probs.len())?;
        let invalid = |reason: String| Error::InvalidLikelihood {
            label: label.clone(),
            reason,
        };
        let mut clamped = Vec::with_capacity(probs.len());
        for (a, &p) in probs.iter().enumerate() {
            if !p.is_finite() || !(-ARITH_TOL..=1.0 + ARITH_TOL).contains(&p) {
                return Err(invalid(format!("p(m|a={a}) = {p} outside [0, 1]")));
            }
            clamped.push(p.clamp(0.0, 1.0));
        }
        if clamped.iter().all(|&p| p == 0.0) {
            return Err(invalid("all entries are zero; the outcome never occurs".into()));
        }
        Ok(Self {
            label,
            probs: clamped,
            dim,
        })
    }

    /// Build from the amplitudes `sqrt(p(m|a))`.
    pub fn from_amplitudes(label: impl Into<String>, amplitudes: &[f64]) -> Result<Self> {
        Self::new(label, amplitudes.iter().map(|s| s * s).collect())
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

    /// `sqrt(p(m|a))` for each `a`.
    pub fn amplitudes(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.sqrt()).collect()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// A complete set of outcomes: `sum_m p(m|a) = 1` for every `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel {
    outcomes: Vec<OutcomeLikelihood>,
    dim: Dimension,
}

impl MeasurementModel {
    pub fn new(outcomes: Vec<OutcomeLikelihood>) -> Result<Self> {
        let dim = outcomes.first().ok_or(Error::EmptyModel)?.dimension();
        for o in &outcomes {
            dim.expect(o.dimension())?;
        }
        for a in 0..dim.get() {
            let sum: f64 = outcomes.iter().map(|o| o.probs[a]).sum();
            if (sum - 1.0).abs() > PHYSICS_TOL {
                return Err(Error::IncompleteModel { a, sum });
            }
        }
        Ok(Self { outcomes, dim })
    }

    pub fn outcomes(&self) -> &[OutcomeLikelihood] {
        &self.outcomes
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn operators(&self) -> Vec<MeasurementOperator> {
        self.outcomes.iter().map(make_operator).collect()
    }
}

/// Positive self-adjoint operator `M = sum_a sqrt(p(m|a)) |a><a|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOperator {
    eigenvalues: Vec<f64>,
    dim: Dimension,
}

/// Build the minimally disturbing measurement operator for one outcome.
pub fn make_operator(likelihood: &OutcomeLikelihood) -> MeasurementOperator {
    MeasurementOperator {
        eigenvalues: likelihood.amplitudes(),
        dim: likelihood.dimension(),
    }
}

impl MeasurementOperator {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    /// `M|psi>` without renormalization, expressed in the input's basis.
    pub fn act(&self, state: &PureState) -> Result<Vec<C64>> {
        self.dim.expect(state.dim)?;
        let in_a = state.to_basis(Basis::Computational);
        let out: Vec<C64> = in_a
            .amplitudes
            .iter()
            .zip(&self.eigenvalues)
            .map(|(x, &s)| x * s)
            .collect();
        Ok(match state.basis {
            Basis::Computational => out,
            Basis::Fourier => computational_to_fourier(&out, self.dim),
        })
    }

    /// Apply the operator: returns `||M|psi>||^2` and the renormalized post-state
    /// in the same basis as the input.
    pub fn apply(&self, state: &PureState) -> Result<(f64, PureState)> {
        let out = self.act(state)?;
        let probability: f64 = out.iter().map(|z| z.norm_sqr()).sum();
        if probability < IMPOSSIBLE_PROB {
            return Err(Error::OutcomeImpossible(probability));
        }
        let scale = probability.sqrt();
        Ok((
            probability,
            PureState {
                amplitudes: out.into_iter().map(|z| z / scale).collect(),
                basis: state.basis,
                dim: self.dim,
            },
        ))
    }
}

/// Free-function form of [`MeasurementOperator::apply`].
pub fn apply_measurement(op: &MeasurementOperator, state: &PureState) -> Result<(f64, PureState)> {
    op.apply(state)
}

/// `U(k) = sum_a exp(2 pi i k a / d) |a><a|`, acting as `|b> -> |b+k>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ShiftUnitary {
    k: usize,
    dim: Dimension,
}

impl ShiftUnitary {
    pub fn new(k: usize, dim: Dimension) -> Result<Self> {
        dim.check_index(k)?;
        Ok(Self { k, dim })
    }

    pub fn shift(&self) -> usize {
        self.k
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn inverse(&self) -> Self {
        Self {
            k: self.dim.wrap(-(self.k as i64)),
            dim: self.dim,
        }
    }

    pub fn compose(&self, other: &ShiftUnitary) -> Result<Self> {
        self.dim.expect(other.dim)?;
        Ok(Self {
            k: (self.k + other.k) % self.dim.get(),
            dim: self.dim,
        })
    }

    /// Diagonal of `U(k)` in the a-basis.
    pub fn phases(&self) -> Vec<C64> {
        (0..self.dim.get())
            .map(|a| root_of_unity((self.k * a) as i64, self.dim))
            .collect()
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        self.dim.expect(state.dim)?;
        let n = self.dim.get();
        let amplitudes = match state.basis {
            Basis::Computational => state
                .amplitudes
                .iter()
                .zip(self.phases())
                .map(|(x, ph)| x * ph)
                .collect(),
            Basis::Fourier => {
                let mut out = vec![C64::new(0.0, 0.0); n];
                for (b, x) in state.amplitudes.iter().enumerate() {
                    out[(b + self.k) % n] = *x;
                }
                out
            }
        };
        Ok(PureState {
            amplitudes,
            basis: state.basis,
            dim: self.dim,
        })
    }
}

pub fn apply_shift(u: &ShiftUnitary, state: &PureState) -> Result<PureState> {
    u.apply(state)
}

/// `Tr(U(k)^dagger U(k'))`, which is `d` when `k == k'` and zero otherwise.
pub fn unitary_overlap(k: usize, k_prime: usize, dim: Dimension) -> Result<C64> {
    dim.check_index(k)?;
    dim.check_index(k_prime)?;
    let diff = k_prime as i64 - k as i64;
    Ok((0..dim.get() as i64)
        .map(|a| root_of_unity(diff * a, dim))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dimension_bounds() {
        assert!(Dimension::new(1).is_err());
        assert!(Dimension::new(0).is_err());
        assert!(Dimension::new(4097).is_err());
        assert_eq!(Dimension::new(4096).unwrap().get(), 4096);
        assert_eq!(dim(5).wrap(-1), 4);
        assert_eq!(dim(5).wrap(-11), 4);
    }

    #[test]
    fn make_operator_examples() {
        let op = make_operator(&OutcomeLikelihood::new("m", vec![1.0, 0.0]).unwrap());
        assert_eq!(op.eigenvalues(), &[1.0, 0.0]);

        let third = 1.0 / 3.0;
        let op = make_operator(&OutcomeLikelihood::new("m", vec![third; 3]).unwrap());
        for &e in op.eigenvalues() {
            assert_abs_diff_eq!(e, 0.5773502691896258, epsilon = 1e-12);
        }

        let lik = OutcomeLikelihood::new("m", vec![0.6, 0.4]).unwrap();
        let op = make_operator(&lik);
        assert_abs_diff_eq!(op.eigenvalues()[0], 0.774597, epsilon = 1e-6);
        assert_abs_diff_eq!(op.eigenvalues()[1], 0.632456, epsilon = 1e-6);
        for (e, p) in op.eigenvalues().iter().zip(lik.probs()) {
            assert_abs_diff_eq!(e * e, *p, epsilon = 1e-15);
        }
        assert_eq!(make_operator(&lik), op);
    }

    #[test]
    fn likelihood_validation() {
        assert!(matches!(
            OutcomeLikelihood::new("m", vec![0.0, 0.0]),
            Err(Error::InvalidLikelihood { .. })
        ));
        assert!(OutcomeLikelihood::new("m", vec![1.1, 0.0]).is_err());
        assert!(OutcomeLikelihood::new("m", vec![-0.01, 0.5]).is_err());
        assert!(OutcomeLikelihood::new("m", vec![f64::NAN, 0.5]).is_err());
        assert!(OutcomeLikelihood::new("m", vec![0.5]).is_err());
        let lik = OutcomeLikelihood::new("m", vec![1.0 + 5e-13, -5e-13]).unwrap();
        assert_eq!(lik.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn model_completeness() {
        let a = OutcomeLikelihood::new("0", vec![1.0, 0.0]).unwrap();
        let b = OutcomeLikelihood::new("1", vec![0.0, 1.0]).unwrap();
        assert!(MeasurementModel::new(vec![a.clone(), b]).is_ok());
        assert!(matches!(
            MeasurementModel::new(vec![a.clone()]),
            Err(Error::IncompleteModel { a: 1, .. })
        ));
        assert!(matches!(MeasurementModel::new(vec![]), Err(Error::EmptyModel)));
        let c3 = OutcomeLikelihood::new("2", vec![0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            MeasurementModel::new(vec![a, c3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fourier_state_examples() {
        let s = fourier_state(0, dim(2)).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[1].re, FRAC_1_SQRT_2, epsilon = 1e-12);
        let s = fourier_state(1, dim(2)).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[1].re, -FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[1].im, 0.0, epsilon = 1e-15);
        assert!(matches!(
            fourier_state(2, dim(2)),
            Err(Error::IndexOutOfRange { index: 2, dimension: 2 })
        ));
    }

    #[test]
    fn fourier_basis_orthonormal() {
        for d in [2, 3, 5, 8] {
            let dm = dim(d);
            for b in 0..d {
                for b2 in 0..d {
                    let ip = fourier_state(b, dm)
                        .unwrap()
                        .inner(&fourier_state(b2, dm).unwrap())
                        .unwrap();
                    let expected = if b == b2 { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(ip.re, expected, epsilon = 1e-12);
                    assert_abs_diff_eq!(ip.im, 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn fourier_state_matches_basis_change() {
        let dm = dim(7);
        for b in 0..7 {
            let direct = fourier_state(b, dm).unwrap();
            let via = PureState::basis_state(b, dm, Basis::Fourier)
                .unwrap()
                .to_basis(Basis::Computational);
            for (x, y) in direct.amplitudes().iter().zip(via.amplitudes()) {
                assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn shift_examples() {
        let dm = dim(2);
        let b0 = PureState::basis_state(0, dm, Basis::Fourier).unwrap();
        let out = ShiftUnitary::new(1, dm).unwrap().apply(&b0).unwrap();
        assert_eq!(out, PureState::basis_state(1, dm, Basis::Fourier).unwrap());

        // Same action computed through the a-basis phases.
        let dm = dim(5);
        let b2 = fourier_state(2, dm).unwrap();
        let shifted = ShiftUnitary::new(4, dm).unwrap().apply(&b2).unwrap();
        let expected = fourier_state(1, dm).unwrap();
        assert_abs_diff_eq!(shifted.inner(&expected).unwrap().norm(), 1.0, epsilon = 1e-12);

        let k0 = ShiftUnitary::new(0, dm).unwrap();
        assert_eq!(k0.apply(&b2).unwrap(), b2);
        assert_eq!(ShiftUnitary::new(3, dm).unwrap().inverse().shift(), 2);
        assert!(ShiftUnitary::new(5, dm).is_err());
    }

    #[test]
    fn shift_dimension_mismatch() {
        let u = ShiftUnitary::new(1, dim(3)).unwrap();
        let s = PureState::basis_state(0, dim(2), Basis::Computational).unwrap();
        assert!(matches!(u.apply(&s), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn inner_rejects_mixed_bases() {
        let dm = dim(3);
        let a = PureState::basis_state(0, dm, Basis::Computational).unwrap();
        let b = PureState::basis_state(0, dm, Basis::Fourier).unwrap();
        assert!(matches!(a.inner(&b), Err(Error::BasisMismatch { .. })));
    }

    #[test]
    fn overlap_examples() {
        let o = unitary_overlap(2, 2, dim(5)).unwrap();
        assert_abs_diff_eq!(o.re, 5.0, epsilon = 1e-12);
        let o = unitary_overlap(0, 1, dim(2)).unwrap();
        assert_abs_diff_eq!(o.norm(), 0.0, epsilon = 1e-12);
        // d = 7 against an inline summation with unreduced phases.
        let d = 7;
        for k in 0..d {
            for k2 in 0..d {
                let direct: C64 = (0..d)
                    .map(|a| {
                        let x = -(2.0 * PI * (k * a) as f64 / d as f64);
                        let y = 2.0 * PI * (k2 * a) as f64 / d as f64;
                        C64::from_polar(1.0, x) * C64::from_polar(1.0, y)
                    })
                    .sum();
                let o = unitary_overlap(k, k2, dim(d)).unwrap();
                assert_abs_diff_eq!((o - direct).norm(), 0.0, epsilon = 1e-9);
                let expected = if k == k2 { d as f64 } else { 0.0 };
                assert_abs_diff_eq!((o - c(expected, 0.0)).norm(), 0.0, epsilon = 1e-9);
            }
        }
        assert!(unitary_overlap(7, 0, dim(7)).is_err());
    }

    #[test]
    fn measurement_examples() {
        let dm = dim(2);
        let op = make_operator(&OutcomeLikelihood::new("m", vec![1.0, 0.0]).unwrap());
        let a0 = PureState::basis_state(0, dm, Basis::Computational).unwrap();
        let (p, post) = op.apply(&a0).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-15);
        assert_eq!(post, a0);

        let a1 = PureState::basis_state(1, dm, Basis::Computational).unwrap();
        assert!(matches!(op.apply(&a1), Err(Error::OutcomeImpossible(_))));

        let op = make_operator(&OutcomeLikelihood::new("m", vec![0.6, 0.4]).unwrap());
        let b0 = PureState::basis_state(0, dm, Basis::Fourier).unwrap();
        let (p, post) = op.apply(&b0).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-12);
        assert_eq!(post.basis(), Basis::Fourier);
    }

    #[test]
    fn measurement_eigenrelation() {
        let dm = dim(4);
        let lik = OutcomeLikelihood::new("m", vec![0.1, 0.9, 0.25, 0.0]).unwrap();
        let op = make_operator(&lik);
        for a in 0..4 {
            let s = PureState::basis_state(a, dm, Basis::Computational).unwrap();
            let out = op.act(&s).unwrap();
            for (i, z) in out.iter().enumerate() {
                let expected = if i == a { lik.probs()[a].sqrt() } else { 0.0 };
                assert_eq!(*z, c(expected, 0.0));
            }
        }
    }

    fn arb_state(d: usize) -> impl Strategy<Value = PureState> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d)
            .prop_filter("nonzero", |v| v.iter().any(|(x, y)| x.abs() + y.abs() > 1e-3))
            .prop_map(|v| {
                PureState::normalized(
                    v.into_iter().map(|(x, y)| C64::new(x, y)).collect(),
                    Basis::Computational,
                )
                .unwrap()
            })
    }

    fn arb_state_any_dim() -> impl Strategy<Value = PureState> {
        (2usize..=12).prop_flat_map(arb_state)
    }

    proptest! {
        #[test]
        fn overlap_orthogonality(d in 2usize..=32, k in 0usize..32, k2 in 0usize..32) {
            let (k, k2) = (k % d, k2 % d);
            let o = unitary_overlap(k, k2, dim(d)).unwrap();
            let expected = if k == k2 { d as f64 } else { 0.0 };
            prop_assert!((o - c(expected, 0.0)).norm() < 1e-9);
        }

        #[test]
        fn shift_preserves_norm(s in arb_state_any_dim(), k in 0usize..64, fourier in any::<bool>()) {
            let d = s.dimension();
            let s = if fourier { s.to_basis(Basis::Fourier) } else { s };
            let out = ShiftUnitary::new(k % d.get(), d).unwrap().apply(&s).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn shift_group_property(s in arb_state_any_dim(), k in 0usize..64, k2 in 0usize..64) {
            let d = s.dimension();
            let u = ShiftUnitary::new(k % d.get(), d).unwrap();
            let v = ShiftUnitary::new(k2 % d.get(), d).unwrap();
            let lhs = u.apply(&v.apply(&s).unwrap()).unwrap();
            let rhs = u.compose(&v).unwrap().apply(&s).unwrap();
            for (x, y) in lhs.amplitudes().iter().zip(rhs.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
            let back = u.inverse().apply(&u.apply(&s).unwrap()).unwrap();
            for (x, y) in back.amplitudes().iter().zip(s.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn shift_acts_consistently_in_both_bases(s in arb_state_any_dim(), k in 0usize..64) {
            let d = s.dimension();
            let u = ShiftUnitary::new(k % d.get(), d).unwrap();
            let via_a = u.apply(&s).unwrap().to_basis(Basis::Fourier);
            let via_b = u.apply(&s.to_basis(Basis::Fourier)).unwrap();
            for (x, y) in via_a.amplitudes().iter().zip(via_b.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn basis_roundtrip(s in arb_state_any_dim()) {
            let back = s.to_basis(Basis::Fourier).to_basis(Basis::Computational);
            for (x, y) in back.amplitudes().iter().zip(s.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }
}
