//! TF-IDF retrieval responder: picks the candidate closest to the dialog
//! history by cosine similarity.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;

use crate::corpus_io::{EvalManifest, PredictionSet};
use crate::dialog::{DialogCorpus, Speaker, Turn};
use crate::error::{Error, Result};

/// Candidate responses, deduplicated, first occurrence kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    responses: Vec<String>,
}

impl CandidateSet {
    pub fn new(responses: impl IntoIterator<Item = String>) -> Result<CandidateSet> {
        let mut seen = HashSet::new();
        let responses: Vec<String> = responses
            .into_iter()
            .filter(|r| !r.trim().is_empty())
            .filter(|r| seen.insert(r.clone()))
            .collect();
        if responses.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        Ok(CandidateSet { responses })
    }

    /// One response per line. A leading line number is dropped when every
    /// line carries one, as in the bAbI candidate files.
    pub fn parse(text: &str) -> Result<CandidateSet> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let numbered = !lines.is_empty()
            && lines.iter().all(|l| {
                l.split_once(' ').is_some_and(|(n, rest)| {
                    !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()) && !rest.is_empty()
                })
            });
        CandidateSet::new(lines.into_iter().map(|l| {
            if numbered {
                l.split_once(' ').map_or(l, |(_, rest)| rest).to_string()
            } else {
                l.to_string()
            }
        }))
    }

    /// Every original agent response of a corpus.
    pub fn from_corpus(corpus: &DialogCorpus) -> Result<CandidateSet> {
        CandidateSet::new(corpus.dialogs.iter().flat_map(|d| {
            d.original_turns()
                .filter(|(_, t)| t.speaker == Speaker::Agent)
                .map(|(_, t)| t.text.clone())
                .collect::<Vec<_>>()
        }))
    }

    pub fn responses(&self) -> &[String] {
        &self.responses
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

fn terms(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().map(str::to_lowercase)
}

#[derive(Debug, Clone)]
pub struct TfIdf {
    candidates: CandidateSet,
    vocab: HashMap<String, usize>,
    idf: Vec<f64>,
    /// Per term: `(candidate, weight)` pairs in candidate order.
    postings: Vec<Vec<(usize, f64)>>,
    norms: Vec<f64>,
    unseen_idf: f64,
}

impl TfIdf {
    /// Inverse document frequencies come from the candidate set:
    /// `ln((1 + N) / (1 + df)) + 1`.
    pub fn new(candidates: CandidateSet) -> TfIdf {
        let n = candidates.len() as f64;
        let mut vocab: HashMap<String, usize> = HashMap::new();
        let mut df: Vec<usize> = Vec::new();
        let tfs: Vec<BTreeMap<usize, f64>> = candidates
            .responses
            .iter()
            .map(|r| {
                let mut tf = BTreeMap::new();
                for t in terms(r) {
                    let next = vocab.len();
                    let id = *vocab.entry(t).or_insert(next);
                    if id == df.len() {
                        df.push(0);
                    }
                    *tf.entry(id).or_insert(0.0) += 1.0;
                }
                for id in tf.keys() {
                    df[*id] += 1;
                }
                tf
            })
            .collect();
        let idf: Vec<f64> = df
            .iter()
            .map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)
            .collect();
        let mut postings = vec![Vec::new(); idf.len()];
        let mut norms = Vec::with_capacity(tfs.len());
        for (c, tf) in tfs.iter().enumerate() {
            let mut sq = 0.0;
            for (&id, &f) in tf {
                let w = f * idf[id];
                postings[id].push((c, w));
                sq += w * w;
            }
            norms.push(sq.sqrt());
        }
        TfIdf {
            candidates,
            vocab,
            idf,
            postings,
            norms,
            unseen_idf: (1.0 + n).ln() + 1.0,
        }
    }

    pub fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }

    fn history_vector<'a>(
        &self,
        texts: impl IntoIterator<Item = &'a str>,
    ) -> (BTreeMap<usize, f64>, f64) {
        let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
        let mut unseen: BTreeMap<String, f64> = BTreeMap::new();
        for text in texts {
            for t in terms(text) {
                match self.vocab.get(&t) {
                    Some(&id) => *tf.entry(id).or_insert(0.0) += 1.0,
                    None => *unseen.entry(t).or_insert(0.0) += 1.0,
                }
            }
        }
        for (id, f) in tf.iter_mut() {
            *f *= self.idf[*id];
        }
        let sq: f64 = tf.values().map(|w| w * w).sum::<f64>()
            + unseen
                .values()
                .map(|f| (f * self.unseen_idf).powi(2))
                .sum::<f64>();
        (tf, sq.sqrt())
    }

    /// Cosine similarity between the history and candidate `index`.
    pub fn score_index(&self, history: &[Turn], index: usize) -> f64 {
        self.scores(history)[index]
    }

    fn idf_of(&self, term: &str) -> f64 {
        self.vocab
            .get(term)
            .map_or(self.unseen_idf, |&id| self.idf[id])
    }

    fn weights<'a>(&self, texts: impl IntoIterator<Item = &'a str>) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> = BTreeMap::new();
        for t in texts.into_iter().flat_map(terms) {
            *out.entry(t).or_insert(0.0) += 1.0;
        }
        for (t, w) in out.iter_mut() {
            *w *= self.idf_of(t);
        }
        out
    }

    /// Cosine similarity of the concatenated history with an arbitrary text,
    /// weighted with the candidate-set idf.
    pub fn score(&self, history: &[Turn], candidate: &str) -> f64 {
        let h = self.weights(history.iter().map(|t| t.text.as_str()));
        let c = self.weights([candidate]);
        let dot: f64 = c
            .iter()
            .filter_map(|(t, w)| h.get(t).map(|hw| w * hw))
            .sum();
        if dot == 0.0 {
            return 0.0;
        }
        let norm = |v: &BTreeMap<String, f64>| v.values().map(|w| w * w).sum::<f64>().sqrt();
        dot / (norm(&h) * norm(&c))
    }

    /// Scores of every candidate against the history.
    pub fn scores(&self, history: &[Turn]) -> Vec<f64> {
        let (h, h_norm) = self.history_vector(history.iter().map(|t| t.text.as_str()));
        let mut dots = vec![0.0; self.candidates.len()];
        for (id, w) in &h {
            for &(c, cw) in &self.postings[*id] {
                dots[c] += w * cw;
            }
        }
        dots.iter()
            .zip(&self.norms)
            .map(|(&d, &n)| {
                if d == 0.0 || n == 0.0 {
                    0.0
                } else {
                    d / (h_norm * n)
                }
            })
            .collect()
    }

    /// Index of the best candidate; ties go to the lowest index.
    pub fn best(&self, history: &[Turn]) -> usize {
        let scores = self.scores(history);
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = i;
            }
        }
        best
    }
}

/// Predicts every manifest entry from the turns that precede it.
pub fn predict(
    corpus: &DialogCorpus,
    manifest: &EvalManifest,
    candidates: &CandidateSet,
) -> Result<PredictionSet> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let model = TfIdf::new(candidates.clone());
    let responses: Vec<String> = manifest
        .entries
        .par_iter()
        .map(|e| {
            let d = corpus.get(&e.dialog_id).ok_or_else(|| {
                Error::Report(format!(
                    "manifest dialog {} is not in the corpus",
                    e.dialog_id
                ))
            })?;
            match d.turns.get(e.turn_index) {
                Some(t) if t.text == e.gold_text && t.origin.is_original() => {}
                _ => {
                    return Err(Error::Report(format!(
                        "manifest entry {}:{} does not match the corpus",
                        e.dialog_id, e.turn_index
                    )))
                }
            }
            Ok(model.candidates.responses[model.best(&d.turns[..e.turn_index])].clone())
        })
        .collect::<Result<_>>()?;
    PredictionSet::new(responses, manifest)
}
