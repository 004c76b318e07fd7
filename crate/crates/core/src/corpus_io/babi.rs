//! bAbI dialog-task text format.
//!
//! ```text
//! 1 hi\thello what can i help you with today
//! ...
//! 15 resto_1 r_phone resto_1_phone
//! ```
//!
//! Utterance lines carry a user/agent pair separated by a tab; KB lines have
//! exactly three space-separated fields and no tab. Dialogs are separated by
//! one blank line and line indices restart at 1.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::dialog::{
    normalize_entity, BabiKbLine, CorpusLayout, Dialog, DialogCorpus, DialogLayout, Domain,
    KbEntry, KbRecord, Origin, SourceFormat, Speaker, Turn,
};
use crate::error::{Error, Result};
use crate::patterns::PatternId;

use super::{decode_utf8, RawFile};

/// Slots carried by `api_call <cuisine> <location> <party size> <price>`,
/// with the KB attribute holding each one's values.
pub const API_CALL_SLOTS: [(&str, &str); 4] = [
    ("cuisine", "r_cuisine"),
    ("location", "r_location"),
    ("party_size", "r_number"),
    ("price", "r_price"),
];

/// Agent prompts of the task grammar and the slot each one asks for.
const SLOT_QUESTIONS: [(&str, &str); 4] = [
    ("type of cuisine", "cuisine"),
    ("where should it be", "location"),
    ("how many people", "party_size"),
    ("price range", "price"),
];

pub fn parse_babi(file: &RawFile) -> Result<DialogCorpus> {
    parse_babi_with_origins(file, None)
}

struct Block {
    turns: Vec<Turn>,
    /// KB lines anchored after the absolute turn index (None = before any).
    kb_lines: Vec<(Option<usize>, String)>,
    next_index: usize,
}

impl Block {
    fn new() -> Self {
        Block {
            turns: Vec::new(),
            kb_lines: Vec::new(),
            next_index: 1,
        }
    }

    fn is_empty(&self) -> bool {
        self.turns.is_empty() && self.kb_lines.is_empty()
    }
}

/// Parses a bAbI file, restoring injected-turn origins from an origin
/// sidecar when one is given.
pub fn parse_babi_with_origins(file: &RawFile, origins: Option<&str>) -> Result<DialogCorpus> {
    let text = decode_utf8(&file.bytes)?.replace("\r\n", "\n");
    let final_newline = text.ends_with('\n');
    let trailing_blank = text.ends_with("\n\n");

    let mut lines: Vec<&str> = text.split('\n').collect();
    if final_newline {
        lines.pop();
    }

    let mut blocks = Vec::new();
    let mut block = Block::new();
    for (i, line) in lines.iter().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            if !block.is_empty() {
                blocks.push(std::mem::replace(&mut block, Block::new()));
            }
            continue;
        }
        let err = |msg: String| Error::BabiParse { line: line_no, msg };
        let (index, rest) = line
            .split_once(' ')
            .ok_or_else(|| err("expected `<index> <content>`".into()))?;
        let index: usize = index
            .parse()
            .map_err(|_| err(format!("invalid line index `{index}`")))?;
        if index != block.next_index {
            return Err(err(format!(
                "non-monotone line index: expected {}, found {index}",
                block.next_index
            )));
        }
        block.next_index += 1;

        if let Some((user, agent)) = rest.split_once('\t') {
            block.turns.push(Turn::original(Speaker::User, user));
            block.turns.push(Turn::original(Speaker::Agent, agent));
        } else if rest.split_whitespace().count() == 3 {
            block
                .kb_lines
                .push((block.turns.len().checked_sub(1), rest.to_string()));
        } else {
            return Err(err(
                "missing tab: line is neither an utterance pair nor a KB fact".into(),
            ));
        }
    }
    if !block.is_empty() {
        blocks.push(block);
    }

    let mut injected = match origins {
        Some(s) => parse_sidecar(s)?,
        None => HashMap::new(),
    };

    let mut dialogs = Vec::with_capacity(blocks.len());
    for (i, mut block) in blocks.into_iter().enumerate() {
        let id = format!("babi-{i}");
        if let Some(marks) = injected.remove(&id) {
            for (turn, pattern) in marks {
                let t = block.turns.get_mut(turn).ok_or_else(|| Error::Sidecar {
                    line: 0,
                    msg: format!("{id}: turn index {turn} out of range"),
                })?;
                t.origin = Origin::Injected(pattern);
            }
        }
        annotate(&mut block.turns);

        let original_ordinal = |abs: usize| -> Option<usize> {
            block.turns[..=abs]
                .iter()
                .filter(|t| t.origin.is_original())
                .count()
                .checked_sub(1)
        };
        let kb_lines: Vec<BabiKbLine> = block
            .kb_lines
            .iter()
            .map(|(after, text)| BabiKbLine {
                after_original: after.and_then(original_ordinal),
                text: text.clone(),
            })
            .collect();
        let kb = kb_from_lines(&kb_lines);

        let mut dialog = Dialog::new(id, Domain::Restaurant, block.turns, kb);
        dialog.layout = DialogLayout::Babi { kb_lines };
        dialogs.push(dialog);
    }
    if let Some(id) = injected.keys().min() {
        return Err(Error::Sidecar {
            line: 0,
            msg: format!("unknown dialog id {id}"),
        });
    }

    let mut corpus = DialogCorpus::new(SourceFormat::Babi, dialogs);
    corpus.layout = CorpusLayout::Babi {
        trailing_blank,
        final_newline,
    };
    Ok(corpus)
}

fn kb_from_lines(lines: &[BabiKbLine]) -> KbRecord {
    let entries = lines
        .iter()
        .filter_map(|l| {
            let mut parts = l.text.split_whitespace();
            let subject = normalize_entity(parts.next()?).ok()?;
            let attribute = parts.next()?.to_lowercase();
            let value = normalize_entity(parts.next()?).ok()?;
            Some(KbEntry {
                subject,
                attribute,
                value,
            })
        })
        .collect();
    KbRecord {
        entries,
        subject_attribute: Some("r_name".into()),
    }
}

/// Derives slot annotations on original turns from the dialog's api calls.
fn annotate(turns: &mut [Turn]) {
    let calls: Vec<Vec<String>> = turns
        .iter()
        .filter(|t| t.origin.is_original() && t.speaker == Speaker::Agent)
        .filter_map(|t| {
            let args: Vec<String> = t
                .text
                .strip_prefix("api_call ")?
                .split_whitespace()
                .map(String::from)
                .collect();
            (args.len() == API_CALL_SLOTS.len()).then_some(args)
        })
        .collect();

    for t in turns.iter_mut().filter(|t| t.origin.is_original()) {
        match t.speaker {
            Speaker::User => {
                let tokens: Vec<&str> = t.text.split_whitespace().collect();
                let mut found = BTreeMap::new();
                for call in &calls {
                    for ((slot, _), value) in API_CALL_SLOTS.iter().zip(call) {
                        if tokens.contains(&value.as_str()) {
                            found
                                .entry(format!("slot:{slot}"))
                                .or_insert_with(|| value.clone());
                        }
                    }
                }
                t.annotations.extend(found);
            }
            Speaker::Agent => {
                if let Some(rest) = t.text.strip_prefix("api_call ") {
                    let args: Vec<&str> = rest.split_whitespace().collect();
                    if args.len() == API_CALL_SLOTS.len() {
                        t.annotations.insert("act".into(), "api_call".into());
                        for ((slot, _), value) in API_CALL_SLOTS.iter().zip(args) {
                            t.annotations.insert(format!("slot:{slot}"), value.into());
                        }
                    }
                } else if let Some((_, slot)) =
                    SLOT_QUESTIONS.iter().find(|(cue, _)| t.text.contains(cue))
                {
                    t.annotations.insert("asks".into(), (*slot).into());
                }
            }
        }
    }
}

pub(super) fn serialize_babi(corpus: &DialogCorpus) -> Vec<u8> {
    let (trailing_blank, final_newline) = match corpus.layout {
        CorpusLayout::Babi {
            trailing_blank,
            final_newline,
        } => (trailing_blank, final_newline),
        _ => (true, true),
    };

    let mut out = String::new();
    for (di, d) in corpus.dialogs.iter().enumerate() {
        if di > 0 {
            out.push('\n');
        }
        let kb_lines = match &d.layout {
            DialogLayout::Babi { kb_lines } => kb_lines.clone(),
            _ => {
                d.kb.entries
                    .iter()
                    .map(|e| BabiKbLine {
                        after_original: None,
                        text: format!("{} {} {}", e.subject, e.attribute, e.value),
                    })
                    .collect()
            }
        };

        let mut index = 1;
        let mut emit = |out: &mut String, content: &str| {
            let _ = writeln!(out, "{index} {content}");
            index += 1;
        };
        for l in kb_lines.iter().filter(|l| l.after_original.is_none()) {
            emit(&mut out, &l.text);
        }
        let mut ordinal = 0;
        for pair in d.turns.chunks(2) {
            let agent = pair.get(1).map(|t| t.text.as_str()).unwrap_or("");
            emit(&mut out, &format!("{}\t{agent}", pair[0].text));
            for _ in pair.iter().filter(|t| t.origin.is_original()) {
                for l in kb_lines
                    .iter()
                    .filter(|l| l.after_original == Some(ordinal))
                {
                    emit(&mut out, &l.text);
                }
                ordinal += 1;
            }
        }
    }
    if trailing_blank && !corpus.dialogs.is_empty() {
        out.push('\n');
    }
    if !final_newline && out.ends_with('\n') {
        out.pop();
    }
    out.into_bytes()
}

/// Origin sidecar: one line per dialog, `dialog_id: i,j,k<TAB>p_i,p_j,p_k`,
/// listing injected turn indices and the pattern of each.
pub fn write_origin_sidecar(corpus: &DialogCorpus) -> String {
    let mut out = String::new();
    for d in &corpus.dialogs {
        let marks: Vec<(usize, PatternId)> = d
            .turns
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.origin.pattern().map(|p| (i, p)))
            .collect();
        if marks.is_empty() {
            let _ = writeln!(out, "{}:", d.id);
        } else {
            let idx: Vec<String> = marks.iter().map(|(i, _)| i.to_string()).collect();
            let pats: Vec<&str> = marks.iter().map(|(_, p)| p.name()).collect();
            let _ = writeln!(out, "{}: {}\t{}", d.id, idx.join(","), pats.join(","));
        }
    }
    out
}

fn parse_sidecar(text: &str) -> Result<HashMap<String, Vec<(usize, PatternId)>>> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let err = |msg: String| Error::Sidecar { line: i + 1, msg };
        if line.trim().is_empty() {
            continue;
        }
        let (id, rest) = line
            .split_once(':')
            .ok_or_else(|| err("expected `dialog_id: indices`".into()))?;
        let rest = rest.trim();
        if rest.is_empty() {
            continue;
        }
        let (indices, patterns) = rest
            .split_once('\t')
            .ok_or_else(|| err("missing pattern column".into()))?;
        let indices: Vec<usize> = indices
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| err(format!("bad turn index `{s}`")))
            })
            .collect::<Result<_>>()?;
        let patterns: Vec<PatternId> = patterns
            .split(',')
            .map(|s| {
                PatternId::from_name(s.trim()).ok_or_else(|| err(format!("unknown pattern `{s}`")))
            })
            .collect::<Result<_>>()?;
        if indices.len() != patterns.len() {
            return Err(err(format!(
                "{} indices but {} patterns",
                indices.len(),
                patterns.len()
            )));
        }
        out.insert(
            id.trim().to_string(),
            indices.into_iter().zip(patterns).collect(),
        );
    }
    Ok(out)
}
