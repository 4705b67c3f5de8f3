//! Leak assessment from observed conjugate-basis disturbance.
//!
//! A channel is probed with `|b>` inputs and the output is measured in the same
//! basis. For every outcome `m` of whatever process acted on the channel, the
//! shift `k = (b' - b) mod d` is tallied. The empirical shift distribution then
//! upper-bounds the probability of identifying the a-basis value from `m`.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{Dimension, MeasurementModel};
use crate::tradeoff::{spectrum_from_likelihood, DisturbanceDistribution};

/// Two-sided 95% normal quantile used for the Wilson upper limits.
pub const WILSON_Z_95: f64 = 1.959_963_984_540_054;

/// Label attached to the aggregate so nobody mistakes it for a per-outcome bound.
pub const AGGREGATE_NOTE: &str =
    "extension: frequency-weighted mean of per-outcome bounds; only the per-outcome values are bounds on p(a|m)";

/// Observed shift counts `n_k` for one outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisturbanceCounts {
    label: String,
    #[serde(rename = "shift_counts")]
    counts: Vec<u64>,
}

impl DisturbanceCounts {
    pub fn new(label: impl Into<String>, counts: Vec<u64>) -> Result<Self> {
        let label = label.into();
        if counts.is_empty() || counts.iter().all(|&n| n == 0) {
            return Err(Error::NoObservations(label));
        }
        Dimension::new(counts.len())?;
        Ok(Self { label, counts })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn dimension(&self) -> Dimension {
        Dimension::new(self.counts.len()).expect("validated on construction")
    }

    pub fn empirical_distribution(&self) -> Result<DisturbanceDistribution> {
        let weights: Vec<f64> = self.counts.iter().map(|&n| n as f64).collect();
        DisturbanceDistribution::from_weights(self.label.clone(), &weights)
    }
}

/// A validated counts document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountsDocument {
    pub dimension: Dimension,
    pub outcomes: Vec<DisturbanceCounts>,
}

#[derive(Deserialize)]
struct RawCountsDocument {
    dimension: usize,
    outcomes: Vec<RawOutcome>,
}

#[derive(Deserialize)]
struct RawOutcome {
    label: String,
    shift_counts: Vec<i64>,
}

impl CountsDocument {
    pub fn new(dimension: Dimension, outcomes: Vec<DisturbanceCounts>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::Malformed("document has no outcomes".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for o in &outcomes {
            if o.counts.len() != dimension.get() {
                return Err(Error::DimensionMismatch {
                    expected: dimension.get(),
                    found: o.counts.len(),
                });
            }
            if !seen.insert(o.label.as_str()) {
                return Err(Error::Malformed(format!("duplicate outcome label '{}'", o.label)));
            }
        }
        Ok(Self {
            dimension,
            outcomes,
        })
    }

    /// `label,k,count` rows, one per shift.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Malformed(e.to_string());
        w.write_record(["label", "k", "count"]).map_err(io)?;
        for o in &self.outcomes {
            for (k, n) in o.counts.iter().enumerate() {
                w.write_record([o.label.as_str(), &k.to_string(), &n.to_string()])
                    .map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Malformed(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Malformed(e.to_string()))
    }
}

fn checked_counts(label: &str, raw: &[i64]) -> Result<Vec<u64>> {
    raw.iter()
        .enumerate()
        .map(|(k, &n)| {
            u64::try_from(n).map_err(|_| Error::NegativeCount {
                label: label.to_owned(),
                k,
                count: n,
            })
        })
        .collect()
}

/// Parse `{ "dimension": d, "outcomes": [ { "label": .., "shift_counts": [..] } ] }`.
pub fn ingest_counts_json(text: &str) -> Result<CountsDocument> {
    let raw: RawCountsDocument =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    let dimension = Dimension::new(raw.dimension)?;
    let outcomes = raw
        .outcomes
        .into_iter()
        .map(|o| {
            if o.shift_counts.is_empty() {
                return Err(Error::NoObservations(o.label));
            }
            if o.shift_counts.len() != dimension.get() {
                return Err(Error::DimensionMismatch {
                    expected: dimension.get(),
                    found: o.shift_counts.len(),
                });
            }
            let counts = checked_counts(&o.label, &o.shift_counts)?;
            DisturbanceCounts::new(o.label, counts)
        })
        .collect::<Result<Vec<_>>>()?;
    CountsDocument::new(dimension, outcomes)
}

/// Parse CSV with header `label,k,count`. Repeated `(label, k)` rows are summed.
/// Without an explicit dimension, `d` is one more than the largest shift seen.
pub fn ingest_counts_csv(text: &str, dimension: Option<Dimension>) -> Result<CountsDocument> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Malformed(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["label", "k", "count"] {
        return Err(Error::Malformed(format!(
            "expected CSV header 'label,k,count', found '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut order: Vec<String> = Vec::new();
    let mut tallies: HashMap<String, HashMap<usize, u64>> = HashMap::new();
    let mut max_k = 0usize;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Malformed(e.to_string()))?;
        let bad = |what: &str| Error::Malformed(format!("row {}: invalid {what}", line + 2));
        let label = record.get(0).ok_or_else(|| bad("label"))?.to_owned();
        let k: usize = record.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| bad("k"))?;
        let count: i64 = record
            .get(2)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("count"))?;
        let count = u64::try_from(count).map_err(|_| Error::NegativeCount {
            label: label.clone(),
            k,
            count,
        })?;
        if let Some(d) = dimension {
            d.check_index(k)?;
        }
        max_k = max_k.max(k);
        if !tallies.contains_key(&label) {
            order.push(label.clone());
        }
        *tallies.entry(label).or_default().entry(k).or_default() += count;
    }
    if order.is_empty() {
        return Err(Error::Malformed("document has no outcomes".into()));
    }
    let dimension = match dimension {
        Some(d) => d,
        None => Dimension::new(max_k + 1)?,
    };
    let outcomes = order
        .into_iter()
        .map(|label| {
            let t = &tallies[&label];
            let counts = (0..dimension.get()).map(|k| t.get(&k).copied().unwrap_or(0)).collect();
            DisturbanceCounts::new(label, counts)
        })
        .collect::<Result<Vec<_>>>()?;
    CountsDocument::new(dimension, outcomes)
}

/// JSON if the document starts with `{`, CSV otherwise.
pub fn ingest_counts(text: &str, dimension: Option<Dimension>) -> Result<CountsDocument> {
    let trimmed = text.trim_start();
    if trimmed.is_empty() {
        return Err(Error::Malformed("empty document".into()));
    }
    if trimmed.starts_with('{') {
        let doc = ingest_counts_json(text)?;
        if let Some(d) = dimension {
            if d != doc.dimension {
                return Err(Error::DimensionMismatch {
                    expected: d.get(),
                    found: doc.dimension.get(),
                });
            }
        }
        Ok(doc)
    } else {
        ingest_counts_csv(text, dimension)
    }
}

fn check_dimension(counts: &DisturbanceCounts, d: Dimension) -> Result<()> {
    if counts.counts.len() != d.get() {
        return Err(Error::DimensionMismatch {
            expected: d.get(),
            found: counts.counts.len(),
        });
    }
    Ok(())
}

/// Plug-in bound `(1/d) (sum_k sqrt(n_k / N))^2`.
///
/// Evaluated as `sum_{k,k'} sqrt(n_k n_k') / (d N)` so that equal counts enter
/// as exact integers: uniform counts give exactly 1 and a point mass exactly 1/d.
pub fn leak_bound_from_counts(counts: &DisturbanceCounts, d: Dimension) -> Result<f64> {
    check_dimension(counts, d)?;
    let total = counts.total();
    if total == 0 {
        return Err(Error::NoObservations(counts.label.clone()));
    }
    let nonzero: Vec<u64> = counts.counts.iter().copied().filter(|&n| n > 0).collect();
    let mut cross = 0.0;
    for (i, &x) in nonzero.iter().enumerate() {
        cross += x as f64;
        for &y in &nonzero[i + 1..] {
            let root = if x == y {
                x as f64
            } else {
                ((x as u128 * y as u128) as f64).sqrt()
            };
            cross += 2.0 * root;
        }
    }
    Ok(cross / (d.get() as f64 * total as f64))
}

/// Wilson-score upper confidence limit for a binomial proportion.
pub fn wilson_upper(successes: u64, trials: u64, z: f64) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = p + z2 / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre + spread) / (1.0 + z2 / n)).min(1.0)
}

/// Conservative variant of [`leak_bound_from_counts`]: each `n_k / N` is
/// replaced by its Wilson upper limit (no renormalization), capped at 1.
pub fn wilson_leak_bound(counts: &DisturbanceCounts, d: Dimension, z: f64) -> Result<f64> {
    check_dimension(counts, d)?;
    let total = counts.total();
    let root_sum: f64 = counts
        .counts
        .iter()
        .map(|&n| wilson_upper(n, total, z).sqrt())
        .sum();
    Ok((root_sum * root_sum / d.get() as f64).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeLeak {
    pub label: String,
    pub total: u64,
    pub disturbance_distribution: Vec<f64>,
    pub leak_bound: f64,
    pub outcome_frequency: f64,
    /// `None` when the Wilson adjustment is disabled.
    pub wilson_interval_high_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakReport {
    pub dimension: Dimension,
    pub total_observations: u64,
    pub wilson_z: Option<f64>,
    pub per_outcome: Vec<OutcomeLeak>,
    pub aggregate: f64,
    pub aggregate_note: String,
    pub max_outcome_bound: f64,
}

/// Assess with the 95% Wilson adjustment enabled.
pub fn assess_channel(counts_set: &[DisturbanceCounts], d: Dimension) -> Result<LeakReport> {
    assess_channel_with(counts_set, d, Some(WILSON_Z_95))
}

pub fn assess_channel_with(
    counts_set: &[DisturbanceCounts],
    d: Dimension,
    wilson_z: Option<f64>,
) -> Result<LeakReport> {
    if counts_set.is_empty() {
        return Err(Error::Malformed("no outcomes to assess".into()));
    }
    let grand_total: u64 = counts_set.iter().map(DisturbanceCounts::total).sum();
    let per_outcome = counts_set
        .iter()
        .map(|c| {
            let leak_bound = leak_bound_from_counts(c, d)?;
            let wilson = wilson_z.map(|z| wilson_leak_bound(c, d, z)).transpose()?;
            Ok(OutcomeLeak {
                label: c.label.clone(),
                total: c.total(),
                disturbance_distribution: c.empirical_distribution()?.probs().to_vec(),
                leak_bound,
                outcome_frequency: c.total() as f64 / grand_total as f64,
                wilson_interval_high_bound: wilson.map(|w| w.max(leak_bound)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let aggregate = per_outcome
        .iter()
        .map(|o| o.outcome_frequency * o.leak_bound)
        .sum();
    let max_outcome_bound = per_outcome.iter().map(|o| o.leak_bound).fold(0.0, f64::max);
    Ok(LeakReport {
        dimension: d,
        total_observations: grand_total,
        wilson_z,
        per_outcome,
        aggregate,
        aggregate_note: AGGREGATE_NOTE.to_owned(),
        max_outcome_bound,
    })
}

/// Sample `shots` conjugate-basis probes of a channel that applies `model`.
///
/// Each shot draws `(m, k)` from the exact joint `p(m|b) p(b+k|b,m) = |C_k^{(m)}|^2`.
/// Outcomes that were never observed are left out of the result.
pub fn simulate_counts<R: Rng + ?Sized>(
    model: &MeasurementModel,
    shots: u64,
    rng: &mut R,
) -> Result<CountsDocument> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let d = model.dimension().get();
    let weights: Vec<f64> = model
        .outcomes()
        .iter()
        .flat_map(|o| spectrum_from_likelihood(o).weights())
        .collect();
    let sampler =
        WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut tallies = vec![0u64; weights.len()];
    for _ in 0..shots {
        tallies[sampler.sample(rng)] += 1;
    }
    let outcomes = model
        .outcomes()
        .iter()
        .zip(tallies.chunks(d))
        .filter(|(_, t)| t.iter().any(|&n| n > 0))
        .map(|(o, t)| DisturbanceCounts::new(o.label(), t.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    CountsDocument::new(model.dimension(), outcomes)
}
