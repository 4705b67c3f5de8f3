//! Likelihood documents:
//! `{ "dimension": d, "outcomes": [ { "label": "...", "p_given_a": [..] } ] }`.

use infodist::{Dimension, Error, MeasurementModel, OutcomeLikelihood};
use serde::{Deserialize, Serialize};

#[derive(Debug, Deserialize, Serialize)]
struct RawLikelihoodDocument {
    dimension: usize,
    outcomes: Vec<RawOutcome>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawOutcome {
    label: String,
    p_given_a: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodDocument {
    pub dimension: Dimension,
    pub outcomes: Vec<OutcomeLikelihood>,
}

impl LikelihoodDocument {
    pub fn parse(text: &str) -> Result<Self, Error> {
        if text.trim().is_empty() {
            return Err(Error::Malformed("empty document".into()));
        }
        let raw: RawLikelihoodDocument =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        let dimension = Dimension::new(raw.dimension)?;
        if raw.outcomes.is_empty() {
            return Err(Error::Malformed("document has no outcomes".into()));
        }
        let outcomes = raw
            .outcomes
            .into_iter()
            .map(|o| {
                if o.p_given_a.len() != dimension.get() {
                    return Err(Error::DimensionMismatch {
                        expected: dimension.get(),
                        found: o.p_given_a.len(),
                    });
                }
                OutcomeLikelihood::new(o.label, o.p_given_a)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            dimension,
            outcomes,
        })
    }

    pub fn into_model(self) -> Result<MeasurementModel, Error> {
        MeasurementModel::new(self.outcomes)
    }

    pub fn to_json(&self) -> String {
        let raw = RawLikelihoodDocument {
            dimension: self.dimension.get(),
            outcomes: self
                .outcomes
                .iter()
                .map(|o| RawOutcome {
                    label: o.label().to_owned(),
                    p_given_a: o.probs().to_vec(),
                })
                .collect(),
        };
        crate::json::to_string(&raw).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_reject() {
        let doc = LikelihoodDocument::parse(
            r#"{"dimension": 2, "outcomes": [{"label": "m", "p_given_a": [0.6, 0.4]}]}"#,
        )
        .unwrap();
        assert_eq!(doc.outcomes[0].probs(), &[0.6, 0.4]);
        assert_eq!(LikelihoodDocument::parse(&doc.to_json()).unwrap(), doc);

        for bad in [
            "",
            "{}",
            r#"{"dimension": 2, "outcomes": []}"#,
            r#"{"dimension": 1, "outcomes": [{"label": "m", "p_given_a": [1]}]}"#,
            r#"{"dimension": 3, "outcomes": [{"label": "m", "p_given_a": [0.6, 0.4]}]}"#,
            r#"{"dimension": 2, "outcomes": [{"label": "m", "p_given_a": [1.6, 0.4]}]}"#,
            r#"{"dimension": 2, "outcomes": [{"label": "m", "p_given_a": [0, 0]}]}"#,
        ] {
            assert!(LikelihoodDocument::parse(bad).is_err(), "{bad}");
        }
    }
}
