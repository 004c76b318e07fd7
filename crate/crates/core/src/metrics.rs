//! Corpus BLEU, entity F1 and exact-match accuracy over the responses listed
//! in an evaluation manifest, plus original-vs-updated comparison tables.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::corpus_io::{write_predictions, EvalManifest, PredictionSet};
use crate::dialog::{DialogCorpus, Lexicon};
use crate::digest::sha256_hex;
use crate::error::{Error, Result};

pub const BLEU_VARIANT: &str = "corpus-bleu-4/moses/no-smoothing/lowercase-whitespace";
pub const MAX_ORDER: usize = 4;

/// Which entities count when extracting entities from responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityScope {
    /// Every entity known anywhere in the corpus.
    #[default]
    Global,
    /// Only the entities of the response's own dialog.
    Dialog,
}

impl EntityScope {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityScope::Global => "global",
            EntityScope::Dialog => "dialog",
        }
    }

    pub fn parse(s: &str) -> Option<EntityScope> {
        match s {
            "global" => Some(EntityScope::Global),
            "dialog" => Some(EntityScope::Dialog),
            _ => None,
        }
    }
}

impl fmt::Display for EntityScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_aligned(preds: &PredictionSet, manifest: &EvalManifest) -> Result<()> {
    if preds.len() != manifest.len() {
        return Err(Error::PredictionCount {
            expected: manifest.len(),
            got: preds.len(),
        });
    }
    if preds.manifest_digest != manifest.digest() {
        return Err(Error::DigestMismatch);
    }
    Ok(())
}

fn bleu_tokens(s: &str) -> Vec<String> {
    s.to_lowercase()
        .split_whitespace()
        .map(String::from)
        .collect()
}

fn ngrams(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut out = HashMap::new();
    for w in tokens.windows(n) {
        *out.entry(w).or_insert(0) += 1;
    }
    out
}

/// Corpus BLEU (percent) over aligned hypothesis/reference pairs. Returns 0
/// when some n-gram order has no match anywhere in the corpus.
pub fn bleu(hyps: &[&str], refs: &[&str]) -> f64 {
    assert_eq!(hyps.len(), refs.len(), "bleu needs aligned inputs");
    let mut matched = [0usize; MAX_ORDER];
    let mut total = [0usize; MAX_ORDER];
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);
    for (h, r) in hyps.iter().zip(refs) {
        let (h, r) = (bleu_tokens(h), bleu_tokens(r));
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=MAX_ORDER {
            let ref_counts = ngrams(&r, n);
            for (g, c) in ngrams(&h, n) {
                matched[n - 1] += c.min(ref_counts.get(g).copied().unwrap_or(0));
            }
            total[n - 1] += h.len().saturating_sub(n - 1);
        }
    }
    if hyp_len == 0 || matched.contains(&0) {
        return 0.0;
    }
    let log_p: f64 = (0..MAX_ORDER)
        .map(|i| (matched[i] as f64 / total[i] as f64).ln())
        .sum::<f64>()
        / MAX_ORDER as f64;
    let bp = if hyp_len < ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    };
    100.0 * bp * log_p.exp()
}

pub fn corpus_bleu(preds: &PredictionSet, manifest: &EvalManifest) -> Result<f64> {
    check_aligned(preds, manifest)?;
    let hyps: Vec<&str> = preds.responses.iter().map(String::as_str).collect();
    let refs: Vec<&str> = manifest
        .entries
        .iter()
        .map(|e| e.gold_text.as_str())
        .collect();
    Ok(bleu(&hyps, &refs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EntityCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl EntityCounts {
    /// `2TP / (2TP + FP + FN)`, or `None` when nothing was scoreable.
    pub fn f1(&self) -> Option<f64> {
        let denom = 2 * self.tp + self.fp + self.fn_;
        (denom > 0).then(|| 2.0 * self.tp as f64 / denom as f64)
    }

    /// Adds one response: `gold` and `pred` are entity sets.
    pub fn add<T: Ord>(
        &mut self,
        gold: &std::collections::BTreeSet<T>,
        pred: &std::collections::BTreeSet<T>,
    ) {
        let tp = gold.intersection(pred).count();
        self.tp += tp;
        self.fp += pred.len() - tp;
        self.fn_ += gold.len() - tp;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityF1 {
    pub f1: f64,
    pub counts: EntityCounts,
    pub warning: Option<String>,
}

pub const NO_ENTITIES_WARNING: &str = "no scoreable entities";

/// Micro-averaged entity F1 over all manifest entries.
pub fn entity_f1(
    preds: &PredictionSet,
    manifest: &EvalManifest,
    corpus: &DialogCorpus,
    scope: EntityScope,
) -> Result<EntityF1> {
    check_aligned(preds, manifest)?;
    let global = corpus.lexicon();
    if global.is_empty() {
        return Err(Error::EmptyLexicon);
    }
    let mut per_dialog: BTreeMap<&str, Lexicon> = BTreeMap::new();
    let mut counts = EntityCounts::default();
    for (entry, pred) in manifest.entries.iter().zip(&preds.responses) {
        let lexicon = match scope {
            EntityScope::Global => &global,
            EntityScope::Dialog => {
                if !per_dialog.contains_key(entry.dialog_id.as_str()) {
                    let d = corpus.get(&entry.dialog_id).ok_or_else(|| {
                        Error::Report(format!(
                            "manifest dialog {} is not in the corpus",
                            entry.dialog_id
                        ))
                    })?;
                    per_dialog.insert(&entry.dialog_id, Lexicon::new(corpus.dialog_entities(d)));
                }
                &per_dialog[entry.dialog_id.as_str()]
            }
        };
        counts.add(
            &lexicon.entities_in(&entry.gold_text),
            &lexicon.entities_in(pred),
        );
    }
    Ok(match counts.f1() {
        Some(f1) => EntityF1 {
            f1,
            counts,
            warning: None,
        },
        None => {
            log::warn!("{NO_ENTITIES_WARNING}");
            EntityF1 {
                f1: 0.0,
                counts,
                warning: Some(NO_ENTITIES_WARNING.to_string()),
            }
        }
    })
}

/// Lowercase and collapse whitespace runs.
pub fn normalize_response(s: &str) -> String {
    s.to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// `(per_response, per_dialog)` exact-match accuracy. Dialogs without
/// scoreable responses count as correct.
pub fn response_accuracy(preds: &PredictionSet, manifest: &EvalManifest) -> Result<(f64, f64)> {
    check_aligned(preds, manifest)?;
    let mut correct = 0;
    let mut dialog_ok: Vec<bool> = Vec::new();
    let mut last: Option<&str> = None;
    for (e, p) in manifest.entries.iter().zip(&preds.responses) {
        let ok = normalize_response(p) == normalize_response(&e.gold_text);
        correct += ok as usize;
        if last == Some(e.dialog_id.as_str()) {
            let cur = dialog_ok.last_mut().expect("a dialog is open");
            *cur &= ok;
        } else {
            dialog_ok.push(ok);
            last = Some(&e.dialog_id);
        }
    }
    let per_response = if manifest.is_empty() {
        1.0
    } else {
        correct as f64 / manifest.len() as f64
    };
    let n_dialogs = dialog_ok.len() + manifest.empty_dialogs.len();
    let per_dialog = if n_dialogs == 0 {
        1.0
    } else {
        (dialog_ok.iter().filter(|&&ok| ok).count() + manifest.empty_dialogs.len()) as f64
            / n_dialogs as f64
    };
    Ok((per_response, per_dialog))
}

/// Metric values and the inputs they were computed from. Metric fields are
/// optional so that reports holding only some published numbers can be
/// compared.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bleu_variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_scope: Option<EntityScope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_tag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictions_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_responses: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_dialogs: Option<usize>,
    /// Percent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bleu: Option<f64>,
    /// Ratio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_response_acc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_dialog_acc: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Runs every metric.
pub fn evaluate(
    preds: &PredictionSet,
    manifest: &EvalManifest,
    corpus: &DialogCorpus,
    scope: EntityScope,
) -> Result<EvalReport> {
    let bleu = corpus_bleu(preds, manifest)?;
    let ent = entity_f1(preds, manifest, corpus, scope)?;
    let (per_response, per_dialog) = response_accuracy(preds, manifest)?;
    Ok(EvalReport {
        label: None,
        bleu_variant: Some(BLEU_VARIANT.to_string()),
        entity_scope: Some(scope),
        corpus_tag: Some(manifest.corpus_tag.clone()),
        manifest_digest: Some(manifest.digest()),
        predictions_digest: Some(sha256_hex(write_predictions(preds).as_bytes())),
        n_responses: Some(manifest.len()),
        n_dialogs: Some(manifest.dialog_count()),
        bleu: Some(bleu),
        entity_f1: Some(ent.f1),
        per_response_acc: Some(per_response),
        per_dialog_acc: Some(per_dialog),
        warnings: ent.warning.into_iter().collect(),
    })
}

fn parse_number(key: &str, value: &str, line: usize, ratio: bool) -> Result<f64> {
    let bad = || Error::Report(format!("line {line}: bad value for {key}: {value:?}"));
    let (num, pct) = match value.strip_suffix('%') {
        Some(v) => (v.trim(), true),
        None => (value, false),
    };
    let x: f64 = num.parse().map_err(|_| bad())?;
    let x = if ratio && pct { x / 100.0 } else { x };
    let limit = if ratio { 1.0 } else { 100.0 };
    if !(0.0..=limit).contains(&x) {
        return Err(bad());
    }
    Ok(x)
}

impl EvalReport {
    /// `key: value` lines. Ratios are written as ratios; a value with a `%`
    /// suffix is read as a percentage.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# natvar eval report\n");
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                let _ = writeln!(out, "{k}: {v}");
            }
        };
        put("label", self.label.clone());
        put("bleu_variant", self.bleu_variant.clone());
        put("entity_scope", self.entity_scope.map(|s| s.to_string()));
        put("corpus_tag", self.corpus_tag.clone());
        put("manifest_digest", self.manifest_digest.clone());
        put("predictions_digest", self.predictions_digest.clone());
        put("n_responses", self.n_responses.map(|v| v.to_string()));
        put("n_dialogs", self.n_dialogs.map(|v| v.to_string()));
        put("bleu", self.bleu.map(|v| format!("{v:.4}")));
        put("entity_f1", self.entity_f1.map(|v| format!("{v:.6}")));
        put(
            "per_response_acc",
            self.per_response_acc.map(|v| format!("{v:.6}")),
        );
        put(
            "per_dialog_acc",
            self.per_dialog_acc.map(|v| format!("{v:.6}")),
        );
        for w in &self.warnings {
            put("warning", Some(w.clone()));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<EvalReport> {
        let mut r = EvalReport::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| Error::Report(format!("line {}: expected `key: value`", i + 1)))?;
            let (key, value) = (key.trim(), value.trim().to_string());
            let count = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| Error::Report(format!("line {}: bad count {v:?}", i + 1)))
            };
            match key {
                "label" => r.label = Some(value),
                "bleu_variant" => r.bleu_variant = Some(value),
                "entity_scope" => {
                    r.entity_scope = Some(EntityScope::parse(&value).ok_or_else(|| {
                        Error::Report(format!("line {}: unknown entity scope {value:?}", i + 1))
                    })?)
                }
                "corpus_tag" => r.corpus_tag = Some(value),
                "manifest_digest" => r.manifest_digest = Some(value),
                "predictions_digest" => r.predictions_digest = Some(value),
                "n_responses" => r.n_responses = Some(count(&value)?),
                "n_dialogs" => r.n_dialogs = Some(count(&value)?),
                "bleu" => {
                    r.bleu = Some(parse_number(
                        key,
                        value.trim_end_matches('%'),
                        i + 1,
                        false,
                    )?)
                }
                "entity_f1" => r.entity_f1 = Some(parse_number(key, &value, i + 1, true)?),
                "per_response_acc" => {
                    r.per_response_acc = Some(parse_number(key, &value, i + 1, true)?)
                }
                "per_dialog_acc" => {
                    r.per_dialog_acc = Some(parse_number(key, &value, i + 1, true)?)
                }
                "warning" => r.warnings.push(value),
                other => {
                    return Err(Error::Report(format!(
                        "line {}: unknown key `{other}`",
                        i + 1
                    )))
                }
            }
        }
        Ok(r)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Reads either form.
    pub fn parse(text: &str) -> Result<EvalReport> {
        if text.trim_start().starts_with('{') {
            Ok(serde_json::from_str(text)?)
        } else {
            EvalReport::from_text(text)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub metric: &'static str,
    /// Values on the 0 to 100 scale.
    pub original: f64,
    pub updated: f64,
    pub delta: f64,
    /// Relative change in percent of the original value.
    pub relative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub original_label: String,
    pub updated_label: String,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn row(&self, metric: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    pub fn render(&self) -> String {
        let header = [
            "metric",
            &self.original_label,
            &self.updated_label,
            "delta",
            "relative",
        ];
        let mut cells: Vec<[String; 5]> = vec![header.map(String::from)];
        for r in &self.rows {
            cells.push([
                r.metric.to_string(),
                format!("{:.2}", r.original),
                format!("{:.2}", r.updated),
                format!("{:+.2}", r.delta),
                r.relative
                    .map_or("n/a".to_string(), |v| format!("{v:+.2}%")),
            ]);
        }
        let widths: Vec<usize> = (0..5)
            .map(|c| {
                cells
                    .iter()
                    .map(|r| r[c].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        for (i, row) in cells.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, v)| {
                    if c == 0 {
                        format!("{v:<w$}", w = widths[c])
                    } else {
                        format!("{v:>w$}", w = widths[c])
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
            if i == 0 {
                let _ = writeln!(
                    out,
                    "{}",
                    "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1))
                );
            }
        }
        out
    }
}

/// Side-by-side values with absolute and relative deltas. Entity F1 and
/// the accuracies are shown ×100.
pub fn compare(original: &EvalReport, updated: &EvalReport) -> Result<Comparison> {
    let differs =
        |a: &Option<String>, b: &Option<String>| matches!((a, b), (Some(x), Some(y)) if x != y);
    if differs(&original.bleu_variant, &updated.bleu_variant) {
        return Err(Error::Report("reports use different BLEU variants".into()));
    }
    if matches!((original.entity_scope, updated.entity_scope), (Some(a), Some(b)) if a != b) {
        return Err(Error::Report("reports use different entity scopes".into()));
    }
    type Getter = fn(&EvalReport) -> Option<f64>;
    let metrics: [(&str, Getter, f64); 4] = [
        ("BLEU", |r| r.bleu, 1.0),
        ("Ent.F1", |r| r.entity_f1, 100.0),
        ("Per-resp.acc", |r| r.per_response_acc, 100.0),
        ("Per-dial.acc", |r| r.per_dialog_acc, 100.0),
    ];
    let rows = metrics
        .iter()
        .filter_map(|(name, get, scale)| {
            let (o, u) = (get(original)? * scale, get(updated)? * scale);
            Some(ComparisonRow {
                metric: name,
                original: o,
                updated: u,
                delta: u - o,
                relative: (o != 0.0).then(|| (u - o) / o * 100.0),
            })
        })
        .collect();
    Ok(Comparison {
        original_label: original.label.clone().unwrap_or_else(|| "original".into()),
        updated_label: updated.label.clone().unwrap_or_else(|| "updated".into()),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::{export_manifest, ManifestEntry};
    use crate::dialog::{Dialog, Domain, KbEntry, KbRecord, SourceFormat, Speaker, Turn};
    use proptest::prelude::*;

    /// Brute-force corpus BLEU: n-grams compared by scanning, no maps.
    fn oracle_bleu(hyps: &[&str], refs: &[&str]) -> f64 {
        let mut m = [0f64; 4];
        let mut t = [0f64; 4];
        let (mut c, mut r) = (0f64, 0f64);
        for (h, g) in hyps.iter().zip(refs) {
            let h: Vec<String> = h.split_whitespace().map(|w| w.to_lowercase()).collect();
            let g: Vec<String> = g.split_whitespace().map(|w| w.to_lowercase()).collect();
            c += h.len() as f64;
            r += g.len() as f64;
            for n in 1..=4 {
                if h.len() < n {
                    continue;
                }
                let mut used = vec![false; g.len().saturating_sub(n - 1)];
                for i in 0..=h.len() - n {
                    t[n - 1] += 1.0;
                    for (j, u) in used.iter_mut().enumerate() {
                        if !*u && g[j..j + n] == h[i..i + n] {
                            *u = true;
                            m[n - 1] += 1.0;
                            break;
                        }
                    }
                }
            }
        }
        if c == 0.0 || m.contains(&0.0) {
            return 0.0;
        }
        let geo = (0..4).map(|i| (m[i] / t[i]).ln()).sum::<f64>() / 4.0;
        let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
        100.0 * bp * geo.exp()
    }

    fn manifest(golds: &[(&str, &str)], empty: &[&str]) -> EvalManifest {
        EvalManifest {
            entries: golds
                .iter()
                .enumerate()
                .map(|(i, (d, g))| ManifestEntry {
                    dialog_id: d.to_string(),
                    turn_index: 2 * i + 1,
                    gold_text: g.to_string(),
                })
                .collect(),
            corpus_tag: "smd/0".into(),
            empty_dialogs: empty.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn preds(m: &EvalManifest, r: &[&str]) -> PredictionSet {
        PredictionSet::new(r.iter().map(|s| s.to_string()).collect(), m).unwrap()
    }

    #[test]
    fn bleu_examples() {
        let m = manifest(&[("a", "the cat sat down"), ("a", "a b c d")], &[]);
        assert_eq!(corpus_bleu(&PredictionSet::oracle(&m), &m).unwrap(), 100.0);
        assert_eq!(corpus_bleu(&preds(&m, &["", ""]), &m).unwrap(), 0.0);
        let got = corpus_bleu(&preds(&m, &["the cat sat", "a b c d"]), &m).unwrap();
        let want = oracle_bleu(
            &["the cat sat", "a b c d"],
            &["the cat sat down", "a b c d"],
        );
        assert!((got - want).abs() < 1e-6);
        // by hand: p = 7/7, 5/5, 3/3, 1/1; c = 7, r = 8
        assert!((got - 100.0 * (1.0f64 - 8.0 / 7.0).exp()).abs() < 1e-9);
    }

    #[test]
    fn bleu_is_case_insensitive_and_clips() {
        assert_eq!(bleu(&["The Cat Sat Down"], &["the cat sat down"]), 100.0);
        // "the the the the" against "the cat": unigram clipped to 1
        assert_eq!(bleu(&["the the the the"], &["the cat sat on"]), 0.0);
    }

    #[test]
    fn misaligned_predictions_are_rejected() {
        let m = manifest(&[("a", "x")], &[]);
        let other = manifest(&[("b", "x")], &[]);
        let p = PredictionSet::oracle(&other);
        assert!(matches!(corpus_bleu(&p, &m), Err(Error::DigestMismatch)));
        let short = PredictionSet {
            responses: vec![],
            manifest_digest: m.digest(),
        };
        assert_eq!(
            response_accuracy(&short, &m).unwrap_err().to_string(),
            "expected 1 predictions, got 0"
        );
    }

    #[test]
    fn per_dialog_can_exceed_per_response_with_unequal_lengths() {
        // one short correct dialog, one long wrong one
        let m = manifest(&[("a", "x"), ("b", "y"), ("b", "y"), ("b", "y")], &[]);
        assert_eq!(
            response_accuracy(&preds(&m, &["x", "n", "n", "n"]), &m).unwrap(),
            (0.25, 0.5)
        );
    }

    #[test]
    fn accuracy_examples() {
        let m = manifest(&[("a", "x y"), ("a", "z"), ("b", "p"), ("b", "q")], &[]);
        assert_eq!(
            response_accuracy(&PredictionSet::oracle(&m), &m).unwrap(),
            (1.0, 1.0)
        );
        assert_eq!(
            response_accuracy(&preds(&m, &["X  y", "z", "p", "nope"]), &m).unwrap(),
            (0.75, 0.5)
        );
        let with_empty = manifest(&[("a", "x")], &["e"]);
        assert_eq!(
            response_accuracy(&preds(&with_empty, &["no"]), &with_empty).unwrap(),
            (0.0, 0.5)
        );
    }

    fn entity_corpus() -> DialogCorpus {
        let kb = |pairs: &[(&str, &str, &str)]| KbRecord {
            entries: pairs
                .iter()
                .map(|(s, a, v)| KbEntry {
                    subject: s.to_string(),
                    attribute: a.to_string(),
                    value: v.to_string(),
                })
                .collect(),
            subject_attribute: None,
        };
        let d = |id: &str, k| {
            Dialog::new(
                id,
                Domain::Navigate,
                vec![
                    Turn::original(Speaker::User, "q"),
                    Turn::original(Speaker::Agent, "r"),
                ],
                k,
            )
        };
        DialogCorpus::new(
            SourceFormat::Smd,
            vec![
                d("a", kb(&[("chevron", "distance", "5_miles")])),
                d("b", kb(&[("valero", "distance", "3_miles")])),
            ],
        )
    }

    #[test]
    fn entity_f1_examples() {
        let c = entity_corpus();
        let m = manifest(&[("a", "chevron is 5 miles away")], &[]);
        let f = |p: &str, scope| entity_f1(&preds(&m, &[p]), &m, &c, scope).unwrap();
        assert_eq!(f("chevron is 5 miles away", EntityScope::Global).f1, 1.0);
        // G={chevron,5_miles}, P={chevron,valero}
        let half = f("chevron or valero", EntityScope::Global);
        assert_eq!(
            half.counts,
            EntityCounts {
                tp: 1,
                fp: 1,
                fn_: 1
            }
        );
        assert_eq!(half.f1, 0.5);
        // valero is not a dialog-a entity
        assert_eq!(
            f("chevron or valero", EntityScope::Dialog).counts,
            EntityCounts {
                tp: 1,
                fp: 0,
                fn_: 1
            }
        );
    }

    #[test]
    fn entity_f1_degenerate_and_empty_lexicon() {
        let c = entity_corpus();
        let m = manifest(&[("a", "hello")], &[]);
        let r = entity_f1(&preds(&m, &["hi"]), &m, &c, EntityScope::Global).unwrap();
        assert_eq!(r.f1, 0.0);
        assert_eq!(r.warning.as_deref(), Some("no scoreable entities"));
        // gold without entities still charges false positives
        let r = entity_f1(&preds(&m, &["chevron"]), &m, &c, EntityScope::Global).unwrap();
        assert_eq!(
            r.counts,
            EntityCounts {
                tp: 0,
                fp: 1,
                fn_: 0
            }
        );
        let bare = DialogCorpus::new(SourceFormat::Smd, vec![]);
        assert!(matches!(
            entity_f1(&preds(&m, &["x"]), &m, &bare, EntityScope::Global),
            Err(Error::EmptyLexicon)
        ));
    }

    #[test]
    fn report_round_trips() {
        let c = entity_corpus();
        let m = export_manifest(&c);
        let r = evaluate(&PredictionSet::oracle(&m), &m, &c, EntityScope::Global).unwrap();
        assert_eq!(r.per_dialog_acc, Some(1.0));
        assert_eq!(EvalReport::parse(&r.to_json()).unwrap(), r);
        let back = EvalReport::parse(&r.to_text()).unwrap();
        assert_eq!(back.to_text(), r.to_text());
        assert!(EvalReport::parse("bogus: 1\n").is_err());
        assert!(EvalReport::parse("entity_f1: 55.38\n").is_err());
        let pct = EvalReport::parse("entity_f1: 55.38%\n")
            .unwrap()
            .entity_f1
            .unwrap();
        assert!((pct - 0.5538).abs() < 1e-12);
    }

    fn published(bleu: f64, f1: &str) -> EvalReport {
        EvalReport::from_text(&format!("bleu: {bleu}\nentity_f1: {f1}\n")).unwrap()
    }

    #[test]
    fn compare_reproduces_relative_drops() {
        let cmp = compare(&published(14.22, "55.38%"), &published(4.73, "21.05%")).unwrap();
        let rel = cmp.row("Ent.F1").unwrap().relative.unwrap();
        assert!((rel + 61.99).abs() < 0.01, "{rel}");
        let same = compare(&published(14.22, "55.38%"), &published(14.22, "55.38%")).unwrap();
        assert!(same
            .rows
            .iter()
            .all(|r| r.delta == 0.0 && r.relative == Some(0.0)));
        let dial = compare(
            &EvalReport::from_text("per_dialog_acc: 88.5%").unwrap(),
            &EvalReport::from_text("per_dialog_acc: 12.7%").unwrap(),
        )
        .unwrap();
        assert!((dial.row("Per-dial.acc").unwrap().relative.unwrap() + 85.65).abs() < 0.01);
        assert!(cmp.render().contains("-61.99%"));
    }

    #[test]
    fn compare_refuses_mixed_configurations() {
        let mut a = published(1.0, "0.1");
        let mut b = published(1.0, "0.1");
        a.entity_scope = Some(EntityScope::Global);
        b.entity_scope = Some(EntityScope::Dialog);
        assert!(compare(&a, &b).is_err());
    }

    fn sentence() -> impl Strategy<Value = String> {
        prop::collection::vec(
            prop::sample::select(vec!["a", "b", "c", "d", "B", "e"]),
            0..9,
        )
        .prop_map(|w| w.join(" "))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn bleu_matches_oracle(pairs in prop::collection::vec((sentence(), sentence()), 1..6)) {
            let h: Vec<&str> = pairs.iter().map(|p| p.0.as_str()).collect();
            let r: Vec<&str> = pairs.iter().map(|p| p.1.as_str()).collect();
            let got = bleu(&h, &r);
            prop_assert!((got - oracle_bleu(&h, &r)).abs() < 1e-6);
            prop_assert!((0.0..=100.0).contains(&got));
        }

        #[test]
        fn bleu_identity(s in prop::collection::vec(sentence(), 1..5)) {
            let refs: Vec<&str> = s.iter().map(String::as_str).collect();
            let has_4gram = s.iter().any(|x| x.split_whitespace().count() >= 4);
            let expected = if has_4gram { 100.0 } else { 0.0 };
            prop_assert!((bleu(&refs, &refs) - expected).abs() < 1e-9);
        }

        #[test]
        fn per_dialog_bounded_when_dialogs_have_equal_length(
            outcomes in prop::collection::vec(prop::collection::vec(any::<bool>(), 3), 1..10),
        ) {
            let ids: Vec<String> = (0..outcomes.len()).map(|i| format!("d{i}")).collect();
            let golds: Vec<(&str, &str)> = ids
                .iter()
                .flat_map(|id| std::iter::repeat_n((id.as_str(), "gold"), 3))
                .collect();
            let m = manifest(&golds, &[]);
            let p: Vec<&str> = outcomes.iter().flatten().map(|&ok| if ok { "gold" } else { "x" }).collect();
            let (resp, dial) = response_accuracy(&preds(&m, &p), &m).unwrap();
            prop_assert!(dial <= resp + 1e-12);
        }

        #[test]
        fn f1_monotone_and_order_free(
            gold in prop::collection::btree_set(0u8..6, 0..4),
            pred in prop::collection::btree_set(0u8..6, 0..4),
            extra in 0u8..6,
        ) {
            let mut c = EntityCounts::default();
            c.add(&gold, &pred);
            let before = c.f1().unwrap_or(0.0);
            prop_assert!((0.0..=1.0).contains(&before));
            if gold.contains(&extra) {
                let mut more = pred.clone();
                more.insert(extra);
                let mut c2 = EntityCounts::default();
                c2.add(&gold, &more);
                prop_assert!(c2.f1().unwrap_or(0.0) >= before);
            }
        }
    }
}
