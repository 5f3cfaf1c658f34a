use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DataAudit, EpochRecord, Recipe};
use crate::metrics::EvalReport;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub name: String,
    pub metric: String,
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub best_metric: Option<f64>,
}

/// A model's report on one dataset split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalEntry {
    pub dataset: String,
    pub dataset_sha256: String,
    pub report: EvalReport,
}

/// Everything needed to audit or replay a training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub recipe: Recipe,
    pub seed: u64,
    pub config: serde_json::Value,
    pub data_sha256: BTreeMap<String, String>,
    pub phases: Vec<PhaseRecord>,
    pub audit: DataAudit,
    pub checkpoint: Option<String>,
    pub checkpoint_sha256: Option<String>,
    #[serde(default)]
    pub evaluations: BTreeMap<String, EvalEntry>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Dev-metric curve of every phase, in order.
    pub fn dev_curve(&self) -> Vec<f64> {
        self.phases
            .iter()
            .flat_map(|p| p.epochs.iter().map(|e| e.dev_metric))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
