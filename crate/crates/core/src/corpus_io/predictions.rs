//! Prediction files: one response per line, aligned to a manifest.

use crate::error::{Error, Result};

use super::{decode_utf8, EvalManifest, RawFile};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionSet {
    pub responses: Vec<String>,
    pub manifest_digest: String,
}

impl PredictionSet {
    pub fn new(responses: Vec<String>, manifest: &EvalManifest) -> Result<PredictionSet> {
        if responses.len() != manifest.len() {
            return Err(Error::PredictionCount {
                expected: manifest.len(),
                got: responses.len(),
            });
        }
        Ok(PredictionSet {
            responses,
            manifest_digest: manifest.digest(),
        })
    }

    /// The gold responses themselves.
    pub fn oracle(manifest: &EvalManifest) -> PredictionSet {
        PredictionSet {
            responses: manifest
                .entries
                .iter()
                .map(|e| e.gold_text.clone())
                .collect(),
            manifest_digest: manifest.digest(),
        }
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

pub fn read_predictions(file: &RawFile, manifest: &EvalManifest) -> Result<PredictionSet> {
    let text = decode_utf8(&file.bytes)?.replace("\r\n", "\n");
    let responses: Vec<String> = if text.is_empty() {
        Vec::new()
    } else {
        let body = text.strip_suffix('\n').unwrap_or(&text);
        body.split('\n').map(String::from).collect()
    };
    PredictionSet::new(responses, manifest)
}

/// Inverse of [`read_predictions`].
pub fn write_predictions(preds: &PredictionSet) -> String {
    let mut out = String::new();
    for r in &preds.responses {
        out.push_str(&r.replace(['\r', '\n'], " "));
        out.push('\n');
    }
    out
}
