//! Stanford Multi-Domain (KVRET) JSON format.
//!
//! The file is an array of dialogue objects:
//!
//! ```json
//! {"dialogue": [{"turn": "driver", "data": {"end_dialogue": false, "utterance": "..."}},
//!               {"turn": "assistant", "data": {"end_dialogue": false, "requested": {...},
//!                                              "slots": {...}, "utterance": "..."}}],
//!  "scenario": {"kb": {"items": [...] | null, "column_names": [...], "kb_title": "..."},
//!               "task": {"intent": "navigate"}, "uuid": "..."}}
//! ```
//!
//! Injected turns are ordinary turn objects with two extra fields,
//! `"injected": true` and `"pattern": "<name>"`, so existing readers of the
//! format still load updated files.

use std::collections::HashSet;

use serde_json::{Map, Value};

use crate::dialog::{
    normalize_entity, CorpusLayout, Dialog, DialogCorpus, DialogLayout, Domain, KbEntry, KbRecord,
    Origin, SourceFormat, Speaker, Turn,
};
use crate::error::{Error, Result};
use crate::patterns::PatternId;

use super::pyjson::{render, JsonStyle};
use super::{decode_utf8, RawFile};

pub fn parse_smd(file: &RawFile) -> Result<DialogCorpus> {
    let text = decode_utf8(&file.bytes)?.replace("\r\n", "\n");
    let root: Value = serde_json::from_str(&text)?;
    let style = JsonStyle::detect(&text, &root);
    let items = root.as_array().ok_or_else(|| Error::SmdParse {
        index: 0,
        msg: "top level is not a JSON array".into(),
    })?;

    let mut ids = HashSet::new();
    let mut dialogs = Vec::with_capacity(items.len());
    for (index, item) in items.iter().enumerate() {
        let dialog = parse_dialogue(index, item)?;
        if !ids.insert(dialog.id.clone()) {
            return Err(Error::SmdParse {
                index,
                msg: format!("duplicate dialog id {}", dialog.id),
            });
        }
        dialogs.push(dialog);
    }

    let mut corpus = DialogCorpus::new(SourceFormat::Smd, dialogs);
    corpus.layout = CorpusLayout::Smd(style);
    Ok(corpus)
}

fn parse_dialogue(index: usize, item: &Value) -> Result<Dialog> {
    let err = |msg: String| Error::SmdParse { index, msg };
    let obj = item
        .as_object()
        .ok_or_else(|| err("dialogue is not an object".into()))?;
    let scenario = obj
        .get("scenario")
        .and_then(Value::as_object)
        .ok_or_else(|| err("missing scenario".into()))?;
    let intent = scenario
        .get("task")
        .and_then(|t| t.get("intent"))
        .and_then(Value::as_str)
        .ok_or_else(|| err("missing scenario.task.intent".into()))?;
    let domain = match Domain::parse(intent) {
        Some(d) if d != Domain::Restaurant => d,
        _ => return Err(err(format!("unknown domain `{intent}`"))),
    };
    let id = scenario
        .get("uuid")
        .and_then(Value::as_str)
        .map(String::from)
        .unwrap_or_else(|| format!("smd-{index}"));

    let raw_turns = obj
        .get("dialogue")
        .and_then(Value::as_array)
        .ok_or_else(|| err("missing dialogue array".into()))?;
    let mut turns = Vec::with_capacity(raw_turns.len());
    let mut kept = Vec::with_capacity(raw_turns.len());
    for (ti, rt) in raw_turns.iter().enumerate() {
        let turn = parse_turn(rt).map_err(|m| err(format!("turn {ti}: {m}")))?;
        if turn.origin.is_original() {
            kept.push(rt.clone());
        }
        turns.push(turn);
    }

    let kb = parse_kb(scenario.get("kb")).map_err(err)?;

    let mut raw = obj.clone();
    raw.insert("dialogue".into(), Value::Array(kept));
    let mut dialog = Dialog::new(id, domain, turns, kb);
    dialog.layout = DialogLayout::Smd {
        raw: Value::Object(raw),
    };
    Ok(dialog)
}

fn parse_turn(rt: &Value) -> std::result::Result<Turn, String> {
    let obj = rt.as_object().ok_or("turn is not an object")?;
    let speaker = match obj.get("turn").and_then(Value::as_str) {
        Some("driver") => Speaker::User,
        Some("assistant") => Speaker::Agent,
        Some(other) => return Err(format!("unknown speaker `{other}`")),
        None => return Err("missing `turn` field".into()),
    };
    let data = obj
        .get("data")
        .and_then(Value::as_object)
        .ok_or("missing `data` object")?;
    let utterance = data
        .get("utterance")
        .and_then(Value::as_str)
        .ok_or("missing `data.utterance`")?;
    // the model keeps utterances on one line; the raw object keeps the bytes
    let text = utterance.replace(['\r', '\n'], " ");

    if obj.get("injected").and_then(Value::as_bool) == Some(true) {
        let name = obj
            .get("pattern")
            .and_then(Value::as_str)
            .ok_or("injected turn without `pattern`")?;
        let pattern =
            PatternId::from_name(name).ok_or_else(|| format!("unknown pattern `{name}`"))?;
        return Ok(Turn::injected(speaker, text, pattern));
    }

    let mut turn = Turn::original(speaker, text);
    if let Some(slots) = data.get("slots").and_then(Value::as_object) {
        for (k, v) in slots {
            if let Some(v) = v.as_str().filter(|v| !v.trim().is_empty()) {
                turn.annotations.insert(format!("slot:{k}"), v.to_string());
            }
        }
    }
    if let Some(req) = data.get("requested").and_then(Value::as_object) {
        let names: Vec<&str> = req
            .iter()
            .filter(|(_, v)| v.as_bool() == Some(true))
            .map(|(k, _)| k.as_str())
            .collect();
        if !names.is_empty() {
            turn.annotations.insert("requested".into(), names.join(","));
        }
    }
    Ok(turn)
}

fn parse_kb(kb: Option<&Value>) -> std::result::Result<KbRecord, String> {
    let Some(kb) = kb.and_then(Value::as_object) else {
        return Ok(KbRecord::default());
    };
    let columns: Vec<&str> = kb
        .get("column_names")
        .and_then(Value::as_array)
        .map(|c| c.iter().filter_map(Value::as_str).collect())
        .unwrap_or_default();
    let items = match kb.get("items") {
        None | Some(Value::Null) => return Ok(KbRecord::default()),
        Some(Value::Array(items)) => items,
        Some(_) => return Err("scenario.kb.items is neither null nor an array".into()),
    };

    let mut record = KbRecord::default();
    for item in items {
        let Some(item) = item.as_object() else {
            return Err("KB item is not an object".into());
        };
        let subject_key = columns
            .iter()
            .copied()
            .find(|c| item.contains_key(*c))
            .or_else(|| item.keys().next().map(String::as_str));
        let Some(subject_key) = subject_key else {
            continue;
        };
        let Some(subject) = item
            .get(subject_key)
            .and_then(Value::as_str)
            .and_then(|s| normalize_entity(s).ok())
        else {
            continue;
        };
        record
            .subject_attribute
            .get_or_insert_with(|| subject_key.to_string());
        for (attr, v) in item {
            if attr == subject_key {
                continue;
            }
            if let Some(value) = v.as_str().and_then(|s| normalize_entity(s).ok()) {
                record.entries.push(KbEntry {
                    subject: subject.clone(),
                    attribute: attr.clone(),
                    value,
                });
            }
        }
    }
    Ok(record)
}

pub(super) fn serialize_smd(corpus: &DialogCorpus) -> Vec<u8> {
    let style = match &corpus.layout {
        CorpusLayout::Smd(style) => style.clone(),
        _ => JsonStyle::default(),
    };
    let items: Vec<Value> = corpus.dialogs.iter().map(dialog_value).collect();
    render(&Value::Array(items), &style).into_bytes()
}

fn dialog_value(d: &Dialog) -> Value {
    let mut obj = match &d.layout {
        DialogLayout::Smd {
            raw: Value::Object(raw),
        } => raw.clone(),
        _ => synthesize(d),
    };
    let originals: Vec<Value> = obj
        .get("dialogue")
        .and_then(Value::as_array)
        .cloned()
        .unwrap_or_default();
    let mut originals = originals.into_iter();

    let mut dialogue = Vec::with_capacity(d.turns.len());
    for t in &d.turns {
        match t.origin {
            Origin::Original => match originals.next() {
                Some(v) => dialogue.push(v),
                None => dialogue.push(turn_value(t, None)),
            },
            Origin::Injected(p) => dialogue.push(turn_value(t, Some(p))),
        }
    }
    obj.insert("dialogue".into(), Value::Array(dialogue));
    Value::Object(obj)
}

fn turn_value(t: &Turn, pattern: Option<PatternId>) -> Value {
    let mut data = Map::new();
    data.insert("end_dialogue".into(), Value::Bool(false));
    if t.speaker == Speaker::Agent {
        let mut slots = Map::new();
        if pattern.is_none() {
            for (k, v) in t.slots() {
                slots.insert(k.to_string(), Value::String(v.to_string()));
            }
        }
        let mut requested = Map::new();
        if let (None, Some(req)) = (pattern, t.annotations.get("requested")) {
            for name in req.split(',') {
                requested.insert(name.to_string(), Value::Bool(true));
            }
        }
        data.insert("requested".into(), Value::Object(requested));
        data.insert("slots".into(), Value::Object(slots));
    }
    data.insert("utterance".into(), Value::String(t.text.clone()));

    let mut obj = Map::new();
    let tag = match t.speaker {
        Speaker::User => "driver",
        Speaker::Agent => "assistant",
    };
    obj.insert("turn".into(), Value::String(tag.into()));
    obj.insert("data".into(), Value::Object(data));
    if let Some(p) = pattern {
        obj.insert("injected".into(), Value::Bool(true));
        obj.insert("pattern".into(), Value::String(p.name().into()));
    }
    Value::Object(obj)
}

/// Builds a dialogue object for a dialog that did not come from a file.
fn synthesize(d: &Dialog) -> Map<String, Value> {
    let subject_key =
        d.kb.subject_attribute
            .clone()
            .unwrap_or_else(|| "subject".into());
    let mut columns = vec![subject_key.clone()];
    let mut items: Vec<Map<String, Value>> = Vec::new();
    for e in &d.kb.entries {
        if !columns.contains(&e.attribute) {
            columns.push(e.attribute.clone());
        }
        let pos = items.iter().position(|it| {
            it.get(&subject_key).and_then(Value::as_str) == Some(e.subject.as_str())
        });
        let item = match pos {
            Some(p) => &mut items[p],
            None => {
                let mut it = Map::new();
                it.insert(subject_key.clone(), Value::String(e.subject.clone()));
                items.push(it);
                items.last_mut().expect("just pushed")
            }
        };
        item.insert(e.attribute.clone(), Value::String(e.value.clone()));
    }

    let mut kb = Map::new();
    kb.insert(
        "items".into(),
        if items.is_empty() {
            Value::Null
        } else {
            Value::Array(items.into_iter().map(Value::Object).collect())
        },
    );
    kb.insert(
        "column_names".into(),
        Value::Array(columns.into_iter().map(Value::String).collect()),
    );
    kb.insert("kb_title".into(), Value::String(String::new()));

    let mut task = Map::new();
    task.insert("intent".into(), Value::String(d.domain.as_str().into()));
    let mut scenario = Map::new();
    scenario.insert("kb".into(), Value::Object(kb));
    scenario.insert("task".into(), Value::Object(task));
    scenario.insert("uuid".into(), Value::String(d.id.clone()));

    let mut obj = Map::new();
    obj.insert("dialogue".into(), Value::Array(Vec::new()));
    obj.insert("scenario".into(), Value::Object(scenario));
    obj
}
