//! Batch experiment runner: repeated annealing runs over instance sets,
//! ground-state success probabilities, histogram data, and report
//! serialization.

pub mod experiment;
pub mod verify;

pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport, InstanceRecord};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Sa,
    Sqa,
    ExactQa,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Sa => "SA",
            Method::Sqa => "SQA",
            Method::ExactQa => "EXACT_QA",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SA" => Ok(Method::Sa),
            "SQA" => Ok(Method::Sqa),
            "EXACT_QA" | "EXACT-QA" | "EXACTQA" => Ok(Method::ExactQa),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// How the global minimum of each instance is resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GroundTruth {
    /// Exhaustive enumeration (requires small `b`).
    BruteForce,
    /// Repeated annealing: the minimum best-of-run energy over
    /// `repeats` runs for each sweep budget in `grid`.
    SaProtocol { grid: Vec<usize>, repeats: usize },
    /// Caller-supplied energies keyed by instance id.
    Provided(std::collections::HashMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges on `[0, max]`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Equal-width histogram on `[0, max(probs)]`; bins are right-open with
/// the last bin closed. A degenerate all-zero input lands in the final
/// bin, keeping the "a constant sample sits in the bin containing it"
/// convention.
pub fn histogram(probs: &[f64], bins: usize) -> Result<Histogram> {
    if probs.is_empty() {
        return Err(Error::Config("histogram needs at least one value".into()));
    }
    if bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::Domain("histogram values must be finite and nonnegative".into()));
    }
    let max = probs.iter().cloned().fold(0.0f64, f64::max);
    let mut counts = vec![0u64; bins];
    if max == 0.0 {
        counts[bins - 1] = probs.len() as u64;
    } else {
        let width = max / bins as f64;
        for &p in probs {
            let idx = ((p / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
    }
    let edges = (0..=bins).map(|i| max * i as f64 / bins as f64).collect();
    Ok(Histogram { edges, counts })
}

/// Extract the `success_prob` column from a report CSV.
pub fn success_probs_from_csv(text: &str) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            msg: format!("bad CSV header: {e}"),
        })?
        .clone();
    let col = headers
        .iter()
        .position(|h| h == "success_prob")
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing success_prob column".into(),
        })?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: i + 2,
            msg: format!("bad CSV record: {e}"),
        })?;
        let field = record.get(col).ok_or_else(|| Error::Parse {
            line: i + 2,
            msg: "row too short".into(),
        })?;
        out.push(field.parse::<f64>().map_err(|e| Error::Parse {
            line: i + 2,
            msg: format!("bad probability: {e}"),
        })?);
    }
    if out.is_empty() {
        return Err(Error::Config("CSV contains no data rows".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_examples() {
        let h = histogram(&[0.1, 0.1, 0.9], 2).unwrap();
        assert_eq!(h.counts, vec![2, 1]);
        assert_eq!(h.edges, vec![0.0, 0.45, 0.9]);

        // single repeated value: all mass in the final bin containing it
        let h = histogram(&[0.4; 5], 4).unwrap();
        assert_eq!(h.counts, vec![0, 0, 0, 5]);

        // conservation
        let probs: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        let h = histogram(&probs, 10).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 100);

        // all-zero batch
        let h = histogram(&[0.0, 0.0], 3).unwrap();
        assert_eq!(h.counts, vec![0, 0, 2]);

        assert!(histogram(&[], 3).is_err());
        assert!(histogram(&[0.5], 0).is_err());
        assert!(histogram(&[f64::NAN], 1).is_err());
    }

    #[test]
    fn csv_probability_extraction() {
        let text = "instance_id,method,b,tau,sweeps,runs,hits,success_prob,ground_energy\n\
                    a,SA,4,0,100,10,5,0.5,-3\n\
                    b,SA,4,0,100,10,10,1,-3\n";
        assert_eq!(success_probs_from_csv(text).unwrap(), vec![0.5, 1.0]);
        assert!(success_probs_from_csv("nonsense\n").is_err());
        assert!(success_probs_from_csv("").is_err());
    }

    #[test]
    fn method_labels_round_trip() {
        for m in [Method::Sa, Method::Sqa, Method::ExactQa] {
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
        }
        assert!("warp-drive".parse::<Method>().is_err());
    }
}
