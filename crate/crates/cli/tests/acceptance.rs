//! Acceptance suite. Runs every criterion at its pinned tolerance, prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

use std::process::ExitCode;

use infodist::oracle::{
    dense_evaluation, random_likelihood, rng_from_seed, run_ensembles, EnsembleKind, EnsembleSpec,
    VerificationReport,
};
use infodist::qcore::root_of_unity;
use infodist::{
    evaluate_tradeoff, information_bound, posterior_uniform_prior, spectrum_from_likelihood,
    unitary_overlap, Dimension, DisturbanceDistribution, OutcomeLikelihood,
};
use infodist_cli::{assess_document, simulate_document};
use num_complex::Complex64 as C64;

const PHYSICS_TOL: f64 = 1e-9;
const EXACT_TOL: f64 = 1e-12;
const STAT_TOL: f64 = 5e-3;
/// Tolerance for the rounded figures quoted for the worked instance.
const QUOTED_TOL: f64 = 5e-5;
const SEED: u64 = 0x00AC_CE97;

type Verdict = Result<String, String>;

fn dim(d: usize) -> Dimension {
    Dimension::new(d).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn failures_of(report: &VerificationReport, check: &str) -> usize {
    report.failures.iter().filter(|f| f.check == check).count()
}

/// 1000 random likelihoods per d in 2..=16, checked by the dense oracle.
fn random_sweep() -> VerificationReport {
    let specs: Vec<EnsembleSpec> = (2..=16)
        .map(|d| EnsembleSpec {
            dimension: dim(d),
            count: 1000,
            seed: SEED,
            kind: EnsembleKind::RandomLikelihood,
        })
        .collect();
    run_ensembles(&specs, PHYSICS_TOL).expect("d <= 16")
}

fn c1_orthogonality() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for d in 2..=32 {
        for k in 0..d {
            for k2 in 0..d {
                let o = unitary_overlap(k, k2, dim(d)).map_err(|e| e.to_string())?;
                let expected = if k == k2 { d as f64 } else { 0.0 };
                worst = worst.max((o - C64::new(expected, 0.0)).norm());
                pairs += 1;
            }
        }
    }
    ensure(worst < PHYSICS_TOL, format!("max error {worst:e}"))?;
    Ok(format!("{pairs} pairs, max error {worst:.2e}"))
}

fn sweep_check(sweep: &VerificationReport, check: &str) -> Verdict {
    let n = failures_of(sweep, check);
    ensure(n == 0, format!("{n} instances failed '{check}'"))?;
    Ok(format!("{} instances, 0 failures", sweep.instances))
}

/// The inverse as printed with a 1/d prefactor.
fn printed_inverse(spectrum: &[C64]) -> Vec<f64> {
    let d = dim(spectrum.len());
    (0..spectrum.len())
        .map(|a| {
            let s: C64 = spectrum
                .iter()
                .enumerate()
                .map(|(k, c)| root_of_unity((k * a) as i64, d) * c)
                .sum::<C64>()
                / spectrum.len() as f64;
            s.re * s.re
        })
        .collect()
}

fn c3_roundtrip(sweep: &VerificationReport) -> Verdict {
    sweep_check(sweep, "roundtrip")?;
    // The printed prefactor must break the roundtrip in every dimension.
    let mut rng = rng_from_seed(SEED);
    for d in 2..=16 {
        for _ in 0..100 {
            let l = random_likelihood(dim(d), &mut rng);
            let wrong = printed_inverse(spectrum_from_likelihood(&l).coeffs());
            let err = wrong
                .iter()
                .zip(l.probs())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            ensure(err > PHYSICS_TOL, format!("1/d-prefactor inverse passed at d={d}"))?;
        }
    }
    Ok(format!(
        "{} instances exact to 1e-9; 1/d-prefactor variant fails on all 1500 probes",
        sweep.instances
    ))
}

fn c6_main_bound(sweep: &VerificationReport) -> Verdict {
    sweep_check(sweep, "main_bound")?;
    let min = sweep.min_bound_slack.unwrap_or(f64::NAN);
    ensure(min >= -PHYSICS_TOL, format!("min slack {min:e}"))?;
    ensure(sweep.instances >= 10_000, "fewer than 1e4 instances")?;
    Ok(format!("{} instances, min slack {min:.2e}", sweep.instances))
}

fn c7_tightness() -> Verdict {
    let specs: Vec<EnsembleSpec> = (2..=8)
        .map(|d| EnsembleSpec {
            dimension: dim(d),
            count: 1000,
            seed: SEED,
            kind: EnsembleKind::RealNonnegativeSpectrum,
        })
        .collect();
    let report = run_ensembles(&specs, PHYSICS_TOL).map_err(|e| e.to_string())?;
    ensure(report.passed(), format!("{} witness failures", report.failures.len()))?;
    let max = report.max_bound_slack.unwrap_or(f64::NAN);
    ensure(max < PHYSICS_TOL, format!("witness slack {max:e}"))?;

    let mut rng = rng_from_seed(SEED ^ 2);
    for _ in 0..10_000 {
        let l = random_likelihood(dim(2), &mut rng);
        let r = evaluate_tradeoff(&l).map_err(|e| e.to_string())?;
        ensure(r.tight, format!("d=2 instance not tight: slack {:e}", r.slack))?;
    }
    Ok(format!("{} witnesses, max slack {max:.2e}; 10000 d=2 instances tight", report.instances))
}

fn c8_limits() -> Verdict {
    for d in 2..=64 {
        let uniform = DisturbanceDistribution::new("u", vec![1.0 / d as f64; d]).map_err(|e| e.to_string())?;
        let b = information_bound(&uniform);
        ensure((b - 1.0).abs() < EXACT_TOL, format!("uniform bound {b} at d={d}"))?;

        let mut point = vec![0.0; d];
        point[0] = 1.0;
        let point = DisturbanceDistribution::new("p", point).map_err(|e| e.to_string())?;
        let b = information_bound(&point);
        ensure((b - 1.0 / d as f64).abs() < EXACT_TOL, format!("point-mass bound {b} at d={d}"))?;

        let l = OutcomeLikelihood::new("u", vec![0.37; d]).map_err(|e| e.to_string())?;
        let post = posterior_uniform_prior(&l).map_err(|e| e.to_string())?;
        ensure(
            (post.max() - 1.0 / d as f64).abs() < EXACT_TOL,
            format!("uniform posterior {} at d={d}", post.max()),
        )?;
    }
    Ok("d = 2..64".into())
}

fn c9_worked_instance() -> Verdict {
    let l = OutcomeLikelihood::from_amplitudes("m", &[0.2, 1.0, 0.3]).map_err(|e| e.to_string())?;
    let core = evaluate_tradeoff(&l).map_err(|e| e.to_string())?;
    let dense = dense_evaluation(&l).map_err(|e| e.to_string())?;
    ensure((core.bound - dense.bound).abs() < PHYSICS_TOL, "bound paths disagree")?;
    ensure(
        (core.max_posterior - dense.max_posterior).abs() < PHYSICS_TOL,
        "posterior paths disagree",
    )?;
    ensure((core.bound - 0.89086).abs() < QUOTED_TOL, format!("bound {}", core.bound))?;
    ensure(
        (core.max_posterior - 0.88496).abs() < QUOTED_TOL,
        format!("max posterior {}", core.max_posterior),
    )?;
    ensure((core.slack - 5.9e-3).abs() < QUOTED_TOL, format!("slack {}", core.slack))?;
    ensure(!core.tight, "reported tight")?;
    Ok(format!(
        "bound {:.7}, max posterior {:.7}, slack {:.3e}",
        core.bound, core.max_posterior, core.slack
    ))
}

fn pipeline_bounds(model: &str) -> Result<Vec<f64>, String> {
    let sim = simulate_document(model, 1_000_000, SEED).map_err(|e| e.to_string())?;
    let counts_json = infodist_cli::Render::json(&sim);
    let doc = assess_document(counts_json.as_bytes(), None).map_err(|e| e.to_string())?;
    Ok(doc.report.per_outcome.iter().map(|o| o.leak_bound).collect())
}

fn c10_pipeline() -> Verdict {
    let projective = r#"{"dimension": 2, "outcomes": [
        {"label": "0", "p_given_a": [1, 0]}, {"label": "1", "p_given_a": [0, 1]}]}"#;
    let identity = r#"{"dimension": 2, "outcomes": [{"label": "id", "p_given_a": [1, 1]}]}"#;
    let proj = pipeline_bounds(projective)?;
    ensure(proj.len() == 2, "expected two outcomes")?;
    for b in &proj {
        ensure((b - 1.0).abs() < STAT_TOL, format!("projective bound {b}"))?;
    }
    let id = pipeline_bounds(identity)?;
    for b in &id {
        ensure((b - 0.5).abs() < STAT_TOL, format!("identity bound {b}"))?;
    }
    Ok(format!("projective {proj:.6?}, identity {id:.6?}"))
}

fn main() -> ExitCode {
    let sweep = random_sweep();
    let criteria: Vec<(&str, Verdict)> = vec![
        ("1 orthogonality of shift unitaries", c1_orthogonality()),
        ("2 expansion M = sum_k C_k U(k)", sweep_check(&sweep, "expansion")),
        ("3 likelihood/spectrum roundtrip", c3_roundtrip(&sweep)),
        ("4 observable disturbance |<b+k|M|b>|^2 = |C_k|^2", sweep_check(&sweep, "observable_disturbance")),
        ("5 outcome probability on Fourier input", sweep_check(&sweep, "parseval")),
        ("6 information bound validity", c6_main_bound(&sweep)),
        ("7 tightness", c7_tightness()),
        ("8 limit cases", c8_limits()),
        ("9 worked non-tight instance", c9_worked_instance()),
        ("10 simulate -> assess closure", c10_pipeline()),
    ];
    let mut failed = 0;
    for (name, verdict) in &criteria {
        match verdict {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
