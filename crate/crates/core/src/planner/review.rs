//! Random samples of updated dialogs for manual checking.

use std::fmt::Write as _;

use rand::seq::index::sample;
use serde::Serialize;

use crate::dialog::{DialogCorpus, Origin};
use crate::digest::keyed_rng;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReviewSheet {
    pub fraction: f64,
    pub seed: u64,
    /// Number of updated dialogs the sample was drawn from.
    pub population: usize,
    /// Sampled dialog ids, in corpus order.
    pub sample: Vec<String>,
}

/// Draws `round(fraction × updated)` of the updated dialogs.
pub fn sample_review(updated: &DialogCorpus, fraction: f64, seed: u64) -> Result<ReviewSheet> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::BadFraction(fraction));
    }
    let pool: Vec<usize> = (0..updated.len())
        .filter(|&i| updated.dialogs[i].is_updated())
        .collect();
    if pool.is_empty() {
        return Err(Error::NoUpdatedDialogs);
    }
    let k = ((fraction * pool.len() as f64 + 0.5).floor() as usize).min(pool.len());
    let mut rng = keyed_rng(seed, &["review"]);
    let mut picked: Vec<usize> = sample(&mut rng, pool.len(), k)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    picked.sort_unstable();
    Ok(ReviewSheet {
        fraction,
        seed,
        population: pool.len(),
        sample: picked
            .into_iter()
            .map(|i| updated.dialogs[i].id.clone())
            .collect(),
    })
}

impl ReviewSheet {
    /// Markdown with one section per sampled dialog; injected turns are
    /// prefixed with `[+pattern]`.
    pub fn to_markdown(&self, corpus: &DialogCorpus) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# Review sample\n\n{} of {} updated dialogs (fraction {}, seed {}).\n",
            self.sample.len(),
            self.population,
            self.fraction,
            self.seed
        );
        for id in &self.sample {
            let Some(d) = corpus.get(id) else { continue };
            let patterns: Vec<String> =
                d.applied_patterns().iter().map(|p| p.to_string()).collect();
            let _ = writeln!(out, "## {id}\n\npatterns: {}\n", patterns.join(", "));
            for t in &d.turns {
                let mark = match t.origin {
                    Origin::Original => String::new(),
                    Origin::Injected(p) => format!("[+{p}] "),
                };
                let _ = writeln!(out, "- {mark}**{}**: {}", t.speaker.tag(), t.text);
            }
            out.push('\n');
        }
        out
    }
}
