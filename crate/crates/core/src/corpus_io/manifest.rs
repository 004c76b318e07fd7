//! The evaluation manifest: the agent responses that were present in the
//! source corpus, in corpus order. Injected agent turns are never scored.

use std::fmt::Write as _;

use crate::dialog::{DialogCorpus, Speaker};
use crate::digest::sha256_hex;
use crate::error::{Error, Result};

use super::{corpus_checksum, decode_utf8};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub dialog_id: String,
    /// Index into the dialog's turns (after any injection).
    pub turn_index: usize,
    pub gold_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalManifest {
    pub entries: Vec<ManifestEntry>,
    /// `<format>/<first 12 hex digits of the original corpus checksum>`.
    pub corpus_tag: String,
    /// Dialogs with no scoreable response; they still count for per-dialog
    /// accuracy.
    pub empty_dialogs: Vec<String>,
}

impl EvalManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checksum over the `(dialog_id, gold_text)` sequence and the empty
    /// dialogs. Turn indices are left out so that predictions made on the
    /// original corpus align with the manifest of any updated version.
    pub fn digest(&self) -> String {
        let mut buf = Vec::new();
        for e in &self.entries {
            push_field(&mut buf, &e.dialog_id);
            push_field(&mut buf, &e.gold_text);
        }
        buf.push(0xff);
        for id in &self.empty_dialogs {
            push_field(&mut buf, id);
        }
        sha256_hex(&buf)
    }

    /// Number of dialogs the manifest covers.
    pub fn dialog_count(&self) -> usize {
        let mut n = self.empty_dialogs.len();
        let mut last: Option<&str> = None;
        for e in &self.entries {
            if last != Some(e.dialog_id.as_str()) {
                n += 1;
                last = Some(&e.dialog_id);
            }
        }
        n
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# corpus_tag: {}", self.corpus_tag);
        for id in &self.empty_dialogs {
            let _ = writeln!(out, "# empty: {}", escape(id));
        }
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                escape(&e.dialog_id),
                e.turn_index,
                escape(&e.gold_text)
            );
        }
        out
    }

    pub fn from_tsv(bytes: &[u8]) -> Result<EvalManifest> {
        let text = decode_utf8(bytes)?.replace("\r\n", "\n");
        let mut manifest = EvalManifest {
            entries: Vec::new(),
            corpus_tag: String::new(),
            empty_dialogs: Vec::new(),
        };
        for (i, line) in text.lines().enumerate() {
            let err = |msg: &str| Error::Manifest {
                line: i + 1,
                msg: msg.to_string(),
            };
            if let Some(tag) = line.strip_prefix("# corpus_tag: ") {
                manifest.corpus_tag = tag.to_string();
                continue;
            }
            if let Some(id) = line.strip_prefix("# empty: ") {
                manifest
                    .empty_dialogs
                    .push(unescape(id).map_err(|m| err(&m))?);
                continue;
            }
            if line.starts_with('#') || line.is_empty() {
                continue;
            }
            let mut cols = line.splitn(3, '\t');
            let (Some(id), Some(idx), Some(gold)) = (cols.next(), cols.next(), cols.next()) else {
                return Err(err("expected 3 tab-separated columns"));
            };
            let turn_index = idx
                .parse()
                .map_err(|_| err("turn index is not an integer"))?;
            manifest.entries.push(ManifestEntry {
                dialog_id: unescape(id).map_err(|m| err(&m))?,
                turn_index,
                gold_text: unescape(gold).map_err(|m| err(&m))?,
            });
        }
        Ok(manifest)
    }
}

fn push_field(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u64).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => {
                return Err(format!(
                    "bad escape sequence `\\{}`",
                    other.map(String::from).unwrap_or_default()
                ))
            }
        }
    }
    Ok(out)
}

/// Every Original agent turn, in corpus order.
pub fn export_manifest(corpus: &DialogCorpus) -> EvalManifest {
    let original = DialogCorpus {
        dialogs: corpus.dialogs.iter().map(|d| d.original_view()).collect(),
        ..corpus.clone()
    };
    let checksum = corpus_checksum(&original);
    let mut entries = Vec::new();
    let mut empty_dialogs = Vec::new();
    for d in &corpus.dialogs {
        let before = entries.len();
        for (i, t) in d.original_turns() {
            if t.speaker == Speaker::Agent {
                entries.push(ManifestEntry {
                    dialog_id: d.id.clone(),
                    turn_index: i,
                    gold_text: t.text.clone(),
                });
            }
        }
        if entries.len() == before {
            empty_dialogs.push(d.id.clone());
        }
    }
    EvalManifest {
        entries,
        corpus_tag: format!("{}/{}", corpus.source_format, &checksum[..12]),
        empty_dialogs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialog::{Dialog, Domain, KbRecord, SourceFormat, Turn};
    use crate::patterns::PatternId;

    fn corpus() -> DialogCorpus {
        let turns = vec![
            Turn::original(Speaker::User, "hi"),
            Turn::original(Speaker::Agent, "hello\twith tab"),
            Turn::original(Speaker::User, "find a place"),
            Turn::original(Speaker::Agent, "chevron is near"),
            Turn::original(Speaker::User, "thanks"),
            Turn::original(Speaker::Agent, "you're welcome"),
        ];
        DialogCorpus::new(
            SourceFormat::Smd,
            vec![
                Dialog::new("d0", Domain::Navigate, turns, KbRecord::default()),
                Dialog::new("d1", Domain::Weather, vec![], KbRecord::default()),
            ],
        )
    }

    #[test]
    fn three_agent_turns_three_entries() {
        let m = export_manifest(&corpus());
        assert_eq!(m.len(), 3);
        assert_eq!(m.empty_dialogs, vec!["d1"]);
        assert_eq!(m.dialog_count(), 2);
        assert!(m.corpus_tag.starts_with("smd/"));
    }

    #[test]
    fn injected_agent_turns_are_masked() {
        let c = corpus();
        let before = export_manifest(&c);
        let mut updated = c.clone();
        let pid = PatternId::from_name("open_request_screening").unwrap();
        updated.dialogs[0]
            .turns
            .insert(0, Turn::injected(Speaker::Agent, "go ahead", pid));
        updated.dialogs[0]
            .turns
            .insert(0, Turn::injected(Speaker::User, "can you help me?", pid));
        let after = export_manifest(&updated);
        assert_eq!(after.len(), 3);
        assert_eq!(after.entries[0].turn_index, 3);
        assert_eq!(after.digest(), before.digest());
        assert_eq!(after.corpus_tag, before.corpus_tag);
    }

    #[test]
    fn tsv_round_trip() {
        let m = export_manifest(&corpus());
        let tsv = m.to_tsv();
        assert!(tsv.contains("d0\t1\thello\\twith tab\n"));
        assert_eq!(EvalManifest::from_tsv(tsv.as_bytes()).unwrap(), m);
    }

    #[test]
    fn tsv_errors_carry_line_numbers() {
        let err = EvalManifest::from_tsv(b"# corpus_tag: x\nd0\tnope\thi\n").unwrap_err();
        assert!(matches!(err, Error::Manifest { line: 2, .. }));
    }
}
