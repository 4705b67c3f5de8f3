//! Minimally disturbing measurements and the information they can extract.
//!
//! A measurement outcome `m` with conditional probabilities `p(m|a)` is
//! realized with the least possible disturbance by the diagonal operator
//! `M = sum_a sqrt(p(m|a)) |a><a|`. Expanding `M` over the shift unitaries
//! `U(k)` gives coefficients `C_k` whose squared moduli are directly observable
//! as shifts `b -> b+k` of the conjugate basis. Those shift statistics bound the
//! posterior `p(a|m)` from above, and the bound is attained whenever every `C_k`
//! is real and nonnegative.
//!
//! Modules:
//! - [`qcore`]: dimensions, tagged pure states, shift unitaries, measurement operators.
//! - [`tradeoff`]: disturbance spectrum, shift distribution, posterior, information bound.
//! - [`oracle`]: seeded ensembles and dense brute-force verification.
//! - [`channel`]: leak assessment from observed shift counts.
//! - [`dense`]: small dense matrices for cross-checks.

pub mod channel;
pub mod dense;
pub mod error;
pub mod oracle;
pub mod qcore;
pub mod tradeoff;

pub use error::{Error, Result};
pub use qcore::{
    apply_measurement, apply_shift, fourier_state, make_operator, unitary_overlap, Basis,
    Dimension, MeasurementModel, MeasurementOperator, OutcomeLikelihood, PureState, ShiftUnitary,
};
pub use tradeoff::{
    disturbance_distribution, evaluate_tradeoff, information_bound, joint_output_probability,
    likelihood_from_spectrum, outcome_probability_fourier_input, phase_aligned_amplitude_bound,
    posterior_uniform_prior, spectrum_from_likelihood, BoundReport, DisturbanceDistribution,
    DisturbanceSpectrum, Posterior,
};
