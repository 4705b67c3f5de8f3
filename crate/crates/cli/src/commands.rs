use infodist::channel::{self, DisturbanceCounts, LeakReport};
use infodist::oracle::{self, EnsembleKind, EnsembleSpec, VerificationReport};
use infodist::{
    disturbance_distribution, evaluate_tradeoff, outcome_probability_fourier_input,
    phase_aligned_amplitude_bound, spectrum_from_likelihood, BoundReport, Dimension,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::input::LikelihoodDocument;
use crate::{json, table_row, CliError, Render, TOOL_VERSION};

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn csv_string(rows: impl IntoIterator<Item = Vec<String>>, header: &[&str]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 cells")
}

/// Parse `2-8`, `2..8`, `3` and comma-separated mixtures of them.
pub fn parse_dims(spec: &str) -> Result<Vec<Dimension>, CliError> {
    let bad = || CliError::Usage(format!("invalid --dims value '{spec}'"));
    let mut dims = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (lo, hi) = match part.split_once("..").or_else(|| part.split_once('-')) {
            Some((a, b)) => (
                a.trim().parse::<usize>().map_err(|_| bad())?,
                b.trim().parse::<usize>().map_err(|_| bad())?,
            ),
            None => {
                let d = part.parse::<usize>().map_err(|_| bad())?;
                (d, d)
            }
        };
        if lo > hi {
            return Err(bad());
        }
        for d in lo..=hi {
            dims.push(Dimension::new(d)?);
        }
    }
    if dims.is_empty() {
        return Err(bad());
    }
    Ok(dims)
}

#[derive(Debug, Clone, Serialize)]
pub struct Coefficient {
    pub k: usize,
    pub re: f64,
    pub im: f64,
    pub abs_sq: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpandedOutcome {
    pub label: String,
    pub coefficients: Vec<Coefficient>,
    pub disturbance_distribution: Vec<f64>,
    pub outcome_probability_fourier_input: f64,
    pub phase_aligned_amplitude_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpandDocument {
    pub tool_version: &'static str,
    pub dimension: Dimension,
    pub outcomes: Vec<ExpandedOutcome>,
}

pub fn expand_document(text: &str) -> Result<ExpandDocument, CliError> {
    let doc = LikelihoodDocument::parse(text)?;
    let outcomes = doc
        .outcomes
        .iter()
        .map(|l| {
            let spectrum = spectrum_from_likelihood(l);
            let dist = disturbance_distribution(&spectrum)?;
            Ok(ExpandedOutcome {
                label: l.label().to_owned(),
                coefficients: spectrum
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(k, c)| Coefficient {
                        k,
                        re: c.re,
                        im: c.im,
                        abs_sq: c.norm_sqr(),
                    })
                    .collect(),
                disturbance_distribution: dist.probs().to_vec(),
                outcome_probability_fourier_input: outcome_probability_fourier_input(l),
                phase_aligned_amplitude_bound: phase_aligned_amplitude_bound(&spectrum),
            })
        })
        .collect::<Result<Vec<_>, infodist::Error>>()?;
    Ok(ExpandDocument {
        tool_version: TOOL_VERSION,
        dimension: doc.dimension,
        outcomes,
    })
}

impl Render for ExpandDocument {
    fn json(&self) -> String {
        json::to_string(self).expect("plain data serializes")
    }

    fn csv(&self) -> String {
        let rows = self.outcomes.iter().flat_map(|o| {
            o.coefficients.iter().map(move |c| {
                vec![
                    o.label.clone(),
                    c.k.to_string(),
                    format!("{:.16e}", c.re),
                    format!("{:.16e}", c.im),
                    format!("{:.16e}", c.abs_sq),
                    format!("{:.16e}", o.disturbance_distribution[c.k]),
                ]
            })
        });
        csv_string(rows, &["label", "k", "re", "im", "abs_sq", "shift_probability"])
    }

    fn table(&self) -> String {
        let widths = [12, 5, 12, 12, 12, 12];
        let mut out = String::new();
        table_row(
            &mut out,
            &["label", "k", "Re C_k", "Im C_k", "|C_k|^2", "p(k|m)"].map(String::from),
            &widths,
        );
        for o in &self.outcomes {
            for c in &o.coefficients {
                table_row(
                    &mut out,
                    &[
                        o.label.clone(),
                        c.k.to_string(),
                        fmt6(c.re),
                        fmt6(c.im),
                        fmt6(c.abs_sq),
                        fmt6(o.disturbance_distribution[c.k]),
                    ],
                    &widths,
                );
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundDocument {
    pub tool_version: &'static str,
    pub dimension: Dimension,
    pub reports: Vec<BoundReport>,
}

pub fn bound_document(text: &str) -> Result<BoundDocument, CliError> {
    let doc = LikelihoodDocument::parse(text)?;
    let reports = doc
        .outcomes
        .iter()
        .map(evaluate_tradeoff)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BoundDocument {
        tool_version: TOOL_VERSION,
        dimension: doc.dimension,
        reports,
    })
}

impl Render for BoundDocument {
    fn json(&self) -> String {
        json::to_string(self).expect("plain data serializes")
    }

    fn csv(&self) -> String {
        let rows = self.reports.iter().map(|r| {
            vec![
                r.label.clone(),
                format!("{:.16e}", r.bound),
                format!("{:.16e}", r.max_posterior),
                r.argmax.to_string(),
                format!("{:.16e}", r.slack),
                r.tight.to_string(),
            ]
        });
        csv_string(rows, &["label", "bound", "max_posterior", "argmax", "slack", "tight"])
    }

    fn table(&self) -> String {
        let widths = [12, 12, 14, 7, 12, 6];
        let mut out = String::new();
        table_row(
            &mut out,
            &["label", "bound", "max p(a|m)", "argmax", "slack", "tight"].map(String::from),
            &widths,
        );
        for r in &self.reports {
            table_row(
                &mut out,
                &[
                    r.label.clone(),
                    fmt6(r.bound),
                    fmt6(r.max_posterior),
                    r.argmax.to_string(),
                    format!("{:.3e}", r.slack),
                    r.tight.to_string(),
                ],
                &widths,
            );
        }
        out
    }
}

/// A counts document that `assess` accepts directly, plus provenance.
#[derive(Debug, Clone, Serialize)]
pub struct SimulateDocument {
    pub tool_version: &'static str,
    pub generator: &'static str,
    pub seed: u64,
    pub shots: u64,
    pub dimension: Dimension,
    pub outcomes: Vec<DisturbanceCounts>,
}

pub fn simulate_document(text: &str, shots: u64, seed: u64) -> Result<SimulateDocument, CliError> {
    let model = LikelihoodDocument::parse(text)?.into_model()?;
    let mut rng = oracle::rng_from_seed(seed);
    let counts = channel::simulate_counts(&model, shots, &mut rng)?;
    Ok(SimulateDocument {
        tool_version: TOOL_VERSION,
        generator: "ChaCha20Rng (rand_chacha 0.3, seed_from_u64)",
        seed,
        shots,
        dimension: counts.dimension,
        outcomes: counts.outcomes,
    })
}

impl Render for SimulateDocument {
    fn json(&self) -> String {
        json::to_string(self).expect("plain data serializes")
    }

    fn csv(&self) -> String {
        let rows = self.outcomes.iter().flat_map(|o| {
            o.counts()
                .iter()
                .enumerate()
                .map(|(k, n)| vec![o.label().to_owned(), k.to_string(), n.to_string()])
        });
        csv_string(rows, &["label", "k", "count"])
    }

    fn table(&self) -> String {
        let widths = [12, 5, 12];
        let mut out = String::new();
        table_row(&mut out, &["label", "k", "count"].map(String::from), &widths);
        for o in &self.outcomes {
            for (k, n) in o.counts().iter().enumerate() {
                table_row(&mut out, &[o.label().to_owned(), k.to_string(), n.to_string()], &widths);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AssessDocument {
    pub tool_version: &'static str,
    pub input_digest: String,
    #[serde(flatten)]
    pub report: LeakReport,
}

pub fn assess_document(bytes: &[u8], dimension: Option<Dimension>) -> Result<AssessDocument, CliError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| infodist::Error::Malformed(format!("input is not UTF-8: {e}")))?;
    let doc = channel::ingest_counts(text, dimension)?;
    let report = channel::assess_channel(&doc.outcomes, doc.dimension)?;
    Ok(AssessDocument {
        tool_version: TOOL_VERSION,
        input_digest: format!("sha256:{}", hex::encode(Sha256::digest(bytes))),
        report,
    })
}

impl Render for AssessDocument {
    fn json(&self) -> String {
        json::to_string(self).expect("plain data serializes")
    }

    fn csv(&self) -> String {
        let rows = self.report.per_outcome.iter().map(|o| {
            vec![
                o.label.clone(),
                o.total.to_string(),
                format!("{:.16e}", o.outcome_frequency),
                format!("{:.16e}", o.leak_bound),
                o.wilson_interval_high_bound
                    .map(|w| format!("{w:.16e}"))
                    .unwrap_or_default(),
            ]
        });
        csv_string(
            rows,
            &["label", "total", "outcome_frequency", "leak_bound", "wilson_interval_high_bound"],
        )
    }

    fn table(&self) -> String {
        let widths = [12, 10, 10, 10, 12];
        let mut out = String::new();
        table_row(
            &mut out,
            &["label", "shots", "freq", "bound", "wilson high"].map(String::from),
            &widths,
        );
        for o in &self.report.per_outcome {
            table_row(
                &mut out,
                &[
                    o.label.clone(),
                    o.total.to_string(),
                    fmt6(o.outcome_frequency),
                    fmt6(o.leak_bound),
                    o.wilson_interval_high_bound.map(fmt6).unwrap_or_else(|| "-".into()),
                ],
                &widths,
            );
        }
        out.push_str(&format!(
            "aggregate {:.6} (max {:.6}); {}\n",
            self.report.aggregate, self.report.max_outcome_bound, self.report.aggregate_note
        ));
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyDocument {
    pub tool_version: &'static str,
    pub ensembles: Vec<EnsembleSpec>,
    #[serde(flatten)]
    pub report: VerificationReport,
}

pub fn verify_document(
    dims: &[Dimension],
    count: u64,
    seed: u64,
    tolerance: f64,
    kind: EnsembleKind,
) -> Result<VerifyDocument, CliError> {
    if count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(CliError::Usage(format!("invalid --tolerance {tolerance}")));
    }
    let ensembles: Vec<EnsembleSpec> = dims
        .iter()
        .map(|&dimension| EnsembleSpec {
            dimension,
            count,
            seed,
            kind,
        })
        .collect();
    let report = oracle::run_ensembles(&ensembles, tolerance)?;
    Ok(VerifyDocument {
        tool_version: TOOL_VERSION,
        ensembles,
        report,
    })
}

impl Render for VerifyDocument {
    fn json(&self) -> String {
        json::to_string(self).expect("plain data serializes")
    }

    fn csv(&self) -> String {
        let rows = self.report.failures.iter().map(|f| {
            vec![
                f.check.clone(),
                f.instance_seed.to_string(),
                format!("{:.16e}", f.observed),
                format!("{:.16e}", f.expected),
                format!("{:.16e}", f.tolerance),
            ]
        });
        csv_string(rows, &["check", "instance_seed", "observed", "expected", "tolerance"])
    }

    fn table(&self) -> String {
        let r = &self.report;
        let slack = |s: Option<f64>| s.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
        let mut out = format!(
            "generator       {}\ninstances       {}\nchecks run      {}\nfailures        {}\nmin bound slack {}\nmax bound slack {}\n",
            r.generator,
            r.instances,
            r.checks_run,
            r.failures.len(),
            slack(r.min_bound_slack),
            slack(r.max_bound_slack),
        );
        for f in r.failures.iter().take(20) {
            out.push_str(&format!(
                "  {:<24} seed {:>20} observed {:.6e} expected {:.6e}\n",
                f.check, f.instance_seed, f.observed, f.expected
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_parsing() {
        let v: Vec<usize> = parse_dims("2-4,7, 9..10").unwrap().into_iter().map(|d| d.get()).collect();
        assert_eq!(v, [2, 3, 4, 7, 9, 10]);
        assert!(parse_dims("1").is_err());
        assert!(parse_dims("5-3").is_err());
        assert!(parse_dims("").is_err());
        assert!(parse_dims("x").is_err());
    }

    #[test]
    fn expand_example() {
        let doc = expand_document(
            r#"{"dimension": 2, "outcomes": [{"label": "m", "p_given_a": [0.6, 0.4]}]}"#,
        )
        .unwrap();
        let c = &doc.outcomes[0].coefficients;
        assert!((c[0].re - 0.703526).abs() < 1e-6);
        assert!((c[1].re - 0.071070).abs() < 1e-6);
        assert!(doc.csv().starts_with("label,k,re,im,abs_sq,shift_probability\n"));
        assert!(doc.table().contains("0.703526"));
    }
}
