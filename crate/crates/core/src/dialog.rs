//! The dialog model shared by every other module.
//!
//! One [`Turn`] is one utterance. bAbI lines that hold a user/agent pair are
//! split into two turns by the parser, and bAbI knowledge-base lines live in
//! the dialog's [`KbRecord`] rather than in the turn list.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus_io::JsonStyle;
use crate::error::{Error, Result};
use crate::patterns::PatternId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Speaker {
    User,
    Agent,
}

impl Speaker {
    pub fn other(self) -> Speaker {
        match self {
            Speaker::User => Speaker::Agent,
            Speaker::Agent => Speaker::User,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Speaker::User => "U",
            Speaker::Agent => "A",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Original,
    Injected(PatternId),
}

impl Origin {
    pub fn is_original(&self) -> bool {
        matches!(self, Origin::Original)
    }

    pub fn pattern(&self) -> Option<PatternId> {
        match self {
            Origin::Original => None,
            Origin::Injected(p) => Some(*p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub speaker: Speaker,
    pub text: String,
    pub origin: Origin,
    /// Free-form annotations. Parsers use `slot:<name>` for slot values,
    /// `requested` for requested attributes and `asks` for the slot an agent
    /// question elicits.
    pub annotations: BTreeMap<String, String>,
}

impl Turn {
    pub fn original(speaker: Speaker, text: impl Into<String>) -> Self {
        Turn {
            speaker,
            text: text.into(),
            origin: Origin::Original,
            annotations: BTreeMap::new(),
        }
    }

    pub fn injected(speaker: Speaker, text: impl Into<String>, pattern: PatternId) -> Self {
        Turn {
            speaker,
            text: text.into(),
            origin: Origin::Injected(pattern),
            annotations: BTreeMap::new(),
        }
    }

    pub fn with_annotation(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.annotations.insert(key.into(), value.into());
        self
    }

    /// `(slot name, value)` pairs carried by this turn.
    pub fn slots(&self) -> impl Iterator<Item = (&str, &str)> {
        self.annotations
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("slot:").map(|name| (name, v.as_str())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Schedule,
    Weather,
    Navigate,
    Restaurant,
}

impl Domain {
    pub const ALL: [Domain; 4] = [
        Domain::Schedule,
        Domain::Weather,
        Domain::Navigate,
        Domain::Restaurant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Schedule => "schedule",
            Domain::Weather => "weather",
            Domain::Navigate => "navigate",
            Domain::Restaurant => "restaurant",
        }
    }

    pub fn parse(s: &str) -> Option<Domain> {
        Domain::ALL.into_iter().find(|d| d.as_str() == s)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Babi,
    Smd,
}

impl SourceFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceFormat::Babi => "babi",
            SourceFormat::Smd => "smd",
        }
    }

    pub fn parse(s: &str) -> Option<SourceFormat> {
        match s {
            "babi" => Some(SourceFormat::Babi),
            "smd" => Some(SourceFormat::Smd),
            _ => None,
        }
    }
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One `(subject, attribute, value)` knowledge-base fact. Subject and value
/// are canonical entity strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KbEntry {
    pub subject: String,
    pub attribute: String,
    pub value: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KbRecord {
    pub entries: Vec<KbEntry>,
    /// Attribute name used for subjects (`poi`, `event`, `location`, ...).
    pub subject_attribute: Option<String>,
}

impl KbRecord {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct subjects in KB order.
    pub fn subjects(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.entries
            .iter()
            .map(|e| e.subject.as_str())
            .filter(|s| seen.insert(*s))
            .collect()
    }

    /// Distinct values of `attribute` in KB order.
    pub fn values_of(&self, attribute: &str) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.entries
            .iter()
            .filter(|e| e.attribute == attribute)
            .map(|e| e.value.as_str())
            .filter(|v| seen.insert(*v))
            .collect()
    }

    /// The attribute an entity plays in this KB, if it appears at all.
    /// Subjects report [`SUBJECT_ATTRIBUTE`].
    pub fn attribute_of(&self, entity: &str) -> Option<&str> {
        if let Some(e) = self.entries.iter().find(|e| e.value == entity) {
            return Some(e.attribute.as_str());
        }
        self.entries
            .iter()
            .any(|e| e.subject == entity)
            .then_some(SUBJECT_ATTRIBUTE)
    }

    pub fn entities(&self) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .flat_map(|e| [e.subject.as_str(), e.value.as_str()])
    }
}

/// Pseudo-attribute naming the subject column of a KB.
pub const SUBJECT_ATTRIBUTE: &str = "@subject";

/// Format-specific data kept so that untouched parts of a dialog serialize
/// back to the exact source bytes.
#[derive(Debug, Clone, PartialEq)]
pub enum DialogLayout {
    None,
    Babi {
        kb_lines: Vec<BabiKbLine>,
    },
    /// The source dialogue object with injected turns removed.
    Smd {
        raw: serde_json::Value,
    },
}

/// A bAbI KB line as it appeared in the source, anchored after the original
/// turn with ordinal `after_original` (counting original turns only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BabiKbLine {
    pub after_original: Option<usize>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dialog {
    pub id: String,
    pub domain: Domain,
    pub turns: Vec<Turn>,
    pub kb: KbRecord,
    pub layout: DialogLayout,
}

impl Dialog {
    pub fn new(id: impl Into<String>, domain: Domain, turns: Vec<Turn>, kb: KbRecord) -> Self {
        Dialog {
            id: id.into(),
            domain,
            turns,
            kb,
            layout: DialogLayout::None,
        }
    }

    pub fn utterance_count(&self) -> usize {
        utterance_count(self)
    }

    /// Pattern ids appearing in any injected turn.
    pub fn applied_patterns(&self) -> BTreeSet<PatternId> {
        self.turns
            .iter()
            .filter_map(|t| t.origin.pattern())
            .collect()
    }

    pub fn is_updated(&self) -> bool {
        self.turns.iter().any(|t| !t.origin.is_original())
    }

    pub fn original_turns(&self) -> impl Iterator<Item = (usize, &Turn)> {
        self.turns
            .iter()
            .enumerate()
            .filter(|(_, t)| t.origin.is_original())
    }

    /// Strict user-first alternation.
    pub fn is_alternating(&self) -> bool {
        alternates(self.turns.iter().map(|t| t.speaker))
    }

    /// The dialog restricted to its original turns.
    pub fn original_view(&self) -> Dialog {
        Dialog {
            turns: self
                .turns
                .iter()
                .filter(|t| t.origin.is_original())
                .cloned()
                .collect(),
            ..self.clone()
        }
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if !self.is_alternating() {
            return Err(format!("{}: turns do not alternate user/agent", self.id));
        }
        if !alternates(
            self.turns
                .iter()
                .filter(|t| t.origin.is_original())
                .map(|t| t.speaker),
        ) {
            return Err(format!("{}: original turns do not alternate", self.id));
        }
        if let Some(i) = self
            .turns
            .iter()
            .position(|t| t.text.contains(['\n', '\r']))
        {
            return Err(format!("{}: turn {i} contains a line break", self.id));
        }
        Ok(())
    }
}

fn alternates(mut speakers: impl Iterator<Item = Speaker>) -> bool {
    let mut expected = Speaker::User;
    speakers.all(|s| {
        let ok = s == expected;
        expected = expected.other();
        ok
    })
}

/// Number of utterances in a dialog (one per turn).
pub fn utterance_count(d: &Dialog) -> usize {
    d.turns.len()
}

/// Corpus-level layout facts needed for byte-exact serialization.
#[derive(Debug, Clone, PartialEq)]
pub enum CorpusLayout {
    None,
    Babi {
        trailing_blank: bool,
        final_newline: bool,
    },
    Smd(JsonStyle),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DialogCorpus {
    pub dialogs: Vec<Dialog>,
    pub source_format: SourceFormat,
    pub global_entities: BTreeSet<String>,
    pub layout: CorpusLayout,
}

impl DialogCorpus {
    pub fn new(source_format: SourceFormat, dialogs: Vec<Dialog>) -> Self {
        let global_entities = collect_entities(&dialogs);
        DialogCorpus {
            dialogs,
            source_format,
            global_entities,
            layout: CorpusLayout::None,
        }
    }

    pub fn len(&self) -> usize {
        self.dialogs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dialogs.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Dialog> {
        self.dialogs.iter().find(|d| d.id == id)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.dialogs.iter().position(|d| d.id == id)
    }

    pub fn utterance_total(&self) -> usize {
        self.dialogs.iter().map(utterance_count).sum()
    }

    pub fn mean_utterances(&self) -> f64 {
        if self.dialogs.is_empty() {
            0.0
        } else {
            self.utterance_total() as f64 / self.dialogs.len() as f64
        }
    }

    pub fn lexicon(&self) -> Lexicon {
        Lexicon::new(self.global_entities.iter().cloned())
    }

    /// Entities known to one dialog: its KB plus its slot annotations.
    pub fn dialog_entities(&self, d: &Dialog) -> BTreeSet<String> {
        collect_entities(std::slice::from_ref(d))
    }

    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut ids = HashSet::new();
        for d in &self.dialogs {
            if !ids.insert(d.id.as_str()) {
                return Err(format!("duplicate dialog id {}", d.id));
            }
            d.check_invariants()?;
        }
        Ok(())
    }
}

fn collect_entities(dialogs: &[Dialog]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for d in dialogs {
        for e in d.kb.entities() {
            if let Ok(n) = normalize_entity(e) {
                out.insert(n);
            }
        }
        for t in d.turns.iter().filter(|t| t.origin.is_original()) {
            for (_, v) in t.slots() {
                if let Ok(n) = normalize_entity(v) {
                    out.insert(n);
                }
            }
        }
    }
    out
}

/// Canonical entity form: trimmed, lowercased, whitespace runs replaced by
/// a single underscore. Placeholders without any letter or digit (SMD uses
/// `-` for empty KB cells) are rejected.
pub fn normalize_entity(s: &str) -> Result<String> {
    let parts: Vec<String> = s.split_whitespace().map(str::to_lowercase).collect();
    if !s.chars().any(char::is_alphanumeric) {
        return Err(Error::EmptyEntity);
    }
    Ok(parts.join("_"))
}

/// How an entity is written inside an utterance of the given format.
pub fn surface_form(entity: &str, format: SourceFormat) -> String {
    match format {
        SourceFormat::Babi => entity.to_string(),
        SourceFormat::Smd => entity.replace('_', " "),
    }
}

/// Entities of `lexicon` mentioned in `text`.
pub fn entities_in(text: &str, lexicon: &BTreeSet<String>) -> BTreeSet<String> {
    Lexicon::new(lexicon.iter().cloned()).entities_in(text)
}

/// A located entity mention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntitySpan {
    pub entity: String,
    /// Byte range of the mention in the original text.
    pub range: Range<usize>,
}

const EDGE_PUNCT: &[char] = &['.', ',', '!', '?', ';', ':', '"', '\'', '(', ')', '[', ']'];

/// A set of canonical entities prepared for span matching.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashSet<String>,
    max_parts: usize,
}

impl Lexicon {
    pub fn new(entries: impl IntoIterator<Item = String>) -> Self {
        let entries: HashSet<String> = entries.into_iter().collect();
        let max_parts = entries
            .iter()
            .map(|e| e.split('_').count())
            .max()
            .unwrap_or(0);
        Lexicon { entries, max_parts }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, entity: &str) -> bool {
        self.entries.contains(entity)
    }

    /// Leftmost-longest, non-overlapping mentions aligned to whitespace token
    /// boundaries. A span also matches with punctuation trimmed from its
    /// outer edges.
    pub fn spans(&self, text: &str) -> Vec<EntitySpan> {
        let tokens = tokenize(text);
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let longest = (i + 1..=tokens.len().min(i + self.max_parts))
                .rev()
                .find_map(|j| self.match_span(text, &tokens[i..j]).map(|m| (j, m)));
            match longest {
                Some((j, span)) => {
                    out.push(span);
                    i = j;
                }
                None => i += 1,
            }
        }
        out
    }

    pub fn entities_in(&self, text: &str) -> BTreeSet<String> {
        self.spans(text).into_iter().map(|s| s.entity).collect()
    }

    fn match_span(&self, text: &str, toks: &[Range<usize>]) -> Option<EntitySpan> {
        let first = toks.first()?;
        let last = toks.last()?;
        let joined = |start: usize, end: usize| -> String {
            toks.iter()
                .map(|r| &text[r.start.max(start)..r.end.min(end)])
                .collect::<Vec<_>>()
                .join("_")
                .to_lowercase()
        };
        let full = joined(first.start, last.end);
        if self.entries.contains(&full) {
            return Some(EntitySpan {
                entity: full,
                range: first.start..last.end,
            });
        }
        let lead =
            text[first.clone()].len() - text[first.clone()].trim_start_matches(EDGE_PUNCT).len();
        let trail =
            text[last.clone()].len() - text[last.clone()].trim_end_matches(EDGE_PUNCT).len();
        let (start, end) = (first.start + lead, last.end - trail);
        if (lead == 0 && trail == 0) || start >= end {
            return None;
        }
        if toks.len() == 1 || (start < first.end && end > last.start) {
            let trimmed = joined(start, end);
            if self.entries.contains(&trimmed) {
                return Some(EntitySpan {
                    entity: trimmed,
                    range: start..end,
                });
            }
        }
        None
    }
}

/// Byte ranges of whitespace-separated tokens.
fn tokenize(text: &str) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(s..i);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(s..text.len());
    }
    out
}

/// Replaces the first mention of `entity` in `text` with `replacement`.
pub fn replace_entity(
    lexicon: &Lexicon,
    text: &str,
    entity: &str,
    replacement: &str,
) -> Option<String> {
    let span = lexicon
        .spans(text)
        .into_iter()
        .find(|s| s.entity == entity)?;
    let mut out = String::with_capacity(text.len() + replacement.len());
    out.push_str(&text[..span.range.start]);
    out.push_str(replacement);
    out.push_str(&text[span.range.end..]);
    Some(out)
}
