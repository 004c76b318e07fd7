//! Corpus statistics: per-pattern counts, overlap histogram, utterance means.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::dialog::{DialogCorpus, SourceFormat};
use crate::patterns::PatternEngine;
use crate::planner::overlap_histogram;

pub const BABI_TURN_COUNT_NOTE: &str =
    "bAbI recipes add the same number of turns as their SMD counterparts (no bAbI-specific figures exist)";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub format: SourceFormat,
    pub dialogs: usize,
    pub updated_dialogs: usize,
    pub utterances: usize,
    pub injected_utterances: usize,
    pub mean_utterances: f64,
    /// Mean over the original turns only.
    pub original_mean_utterances: f64,
    /// Updated dialogs per recipe-bearing pattern applicable to the format,
    /// zeros included.
    pub pattern_counts: BTreeMap<String, usize>,
    /// `k → dialogs with at least k distinct patterns`.
    pub overlap: BTreeMap<usize, usize>,
    pub lexicon_size: usize,
    pub notes: Vec<String>,
}

pub fn corpus_stats(corpus: &DialogCorpus, engine: &PatternEngine) -> CorpusStats {
    let mut pattern_counts: BTreeMap<String, usize> = engine
        .recipes_for(corpus.source_format)
        .map(|r| (r.id.name().to_string(), 0))
        .collect();
    for d in &corpus.dialogs {
        for p in d.applied_patterns() {
            *pattern_counts.entry(p.name().to_string()).or_insert(0) += 1;
        }
    }
    let n = corpus.len();
    let original: usize = corpus
        .dialogs
        .iter()
        .map(|d| d.original_turns().count())
        .sum();
    let utterances = corpus.utterance_total();
    let mean = |total: usize| if n == 0 { 0.0 } else { total as f64 / n as f64 };
    CorpusStats {
        format: corpus.source_format,
        dialogs: n,
        updated_dialogs: corpus.dialogs.iter().filter(|d| d.is_updated()).count(),
        utterances,
        injected_utterances: utterances - original,
        mean_utterances: mean(utterances),
        original_mean_utterances: mean(original),
        pattern_counts,
        overlap: overlap_histogram(corpus),
        lexicon_size: corpus.global_entities.len(),
        notes: match corpus.source_format {
            SourceFormat::Babi => vec![BABI_TURN_COUNT_NOTE.to_string()],
            SourceFormat::Smd => Vec::new(),
        },
    }
}

impl CorpusStats {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format: {}", self.format);
        let _ = writeln!(out, "dialogs: {}", self.dialogs);
        let _ = writeln!(out, "updated_dialogs: {}", self.updated_dialogs);
        let _ = writeln!(out, "utterances: {}", self.utterances);
        let _ = writeln!(out, "injected_utterances: {}", self.injected_utterances);
        let _ = writeln!(out, "mean_utterances: {:.2}", self.mean_utterances);
        let _ = writeln!(
            out,
            "original_mean_utterances: {:.2}",
            self.original_mean_utterances
        );
        let _ = writeln!(out, "lexicon_size: {}", self.lexicon_size);
        for (p, c) in &self.pattern_counts {
            let _ = writeln!(out, "pattern.{p}: {c}");
        }
        for (k, c) in &self.overlap {
            let _ = writeln!(out, "overlap.at_least_{k}: {c}");
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialog::{Dialog, Domain, KbRecord, Speaker, Turn};
    use crate::patterns::PatternId;

    #[test]
    fn counts_and_means() {
        let p = PatternId::from_name("sequence_closer_repaired").unwrap();
        let base = vec![
            Turn::original(Speaker::User, "a"),
            Turn::original(Speaker::Agent, "b"),
        ];
        let mut updated = base.clone();
        updated.push(Turn::injected(Speaker::User, "ok", p));
        updated.push(Turn::injected(Speaker::Agent, "welcome", p));
        let c = DialogCorpus::new(
            SourceFormat::Smd,
            vec![
                Dialog::new("x", Domain::Weather, updated, KbRecord::default()),
                Dialog::new("y", Domain::Weather, base, KbRecord::default()),
            ],
        );
        let s = corpus_stats(&c, &PatternEngine::default());
        assert_eq!(s.mean_utterances, 3.0);
        assert_eq!(s.original_mean_utterances, 2.0);
        assert_eq!(s.pattern_counts["sequence_closer_repaired"], 1);
        assert_eq!(s.pattern_counts["capability_expansion"], 0);
        assert_eq!(s.pattern_counts.len(), 8);
        assert_eq!(s.overlap, BTreeMap::from([(1, 1), (2, 0)]));
        assert!(s.to_text().contains("mean_utterances: 3.00\n"));
        assert!(s.notes.is_empty());
    }

    #[test]
    fn babi_reports_the_turn_count_assumption() {
        let c = DialogCorpus::new(SourceFormat::Babi, vec![]);
        let s = corpus_stats(&c, &PatternEngine::default());
        assert_eq!(s.pattern_counts.len(), 7);
        assert!(s.pattern_counts.values().all(|&v| v == 0));
        assert_eq!(s.notes, [BABI_TURN_COUNT_NOTE]);
    }
}
