//! Applicability heuristics: where in a dialog each recipe can be spliced in,
//! and the values its template needs there.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus_io::API_CALL_SLOTS;
use crate::dialog::{
    normalize_entity, replace_entity, surface_form, Dialog, DialogCorpus, Domain, Lexicon, Origin,
    SourceFormat, Speaker, Turn, SUBJECT_ATTRIBUTE,
};
use crate::digest::keyed_rng;

use super::recipes::{self, AnchorKind, PatternRecipe};
use super::PatternId;

/// An insertion point for one recipe in one dialog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Anchor {
    pub dialog_id: String,
    /// Position the added turns are spliced in at.
    pub turn_index: usize,
    pub bound: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default)]
struct ValueList {
    values: Vec<String>,
    pos: HashMap<String, usize>,
}

impl ValueList {
    fn push(&mut self, v: String) {
        if !self.pos.contains_key(&v) {
            self.pos.insert(v.clone(), self.values.len());
            self.values.push(v);
        }
    }
}

/// Corpus-level facts the heuristics consult: the entity lexicon and, per
/// domain and attribute, every value seen in KBs and slot annotations.
#[derive(Debug, Clone)]
pub struct AnchorContext {
    pub format: SourceFormat,
    pub lexicon: Lexicon,
    pub seed: u64,
    values: BTreeMap<(Domain, String), ValueList>,
    attribute_of: HashMap<(Domain, String), String>,
}

impl AnchorContext {
    pub fn new(corpus: &DialogCorpus, seed: u64) -> AnchorContext {
        let mut ctx = AnchorContext {
            format: corpus.source_format,
            lexicon: corpus.lexicon(),
            seed,
            values: BTreeMap::new(),
            attribute_of: HashMap::new(),
        };
        for d in &corpus.dialogs {
            let subject_attr =
                d.kb.subject_attribute
                    .as_deref()
                    .unwrap_or(SUBJECT_ATTRIBUTE);
            for e in &d.kb.entries {
                ctx.add(d.domain, subject_attr, &e.subject);
                ctx.add(d.domain, &e.attribute, &e.value);
            }
            for t in d.turns.iter().filter(|t| t.origin.is_original()) {
                for (slot, v) in t.slots() {
                    let attr = slot_attribute(corpus.source_format, slot);
                    ctx.add(d.domain, attr, v);
                }
            }
        }
        ctx
    }

    fn add(&mut self, domain: Domain, attribute: &str, value: &str) {
        let Ok(v) = normalize_entity(value) else {
            return;
        };
        self.attribute_of
            .entry((domain, v.clone()))
            .or_insert_with(|| attribute.to_string());
        self.values
            .entry((domain, attribute.to_string()))
            .or_default()
            .push(v);
    }

    /// Values of an attribute across the corpus, in first-seen order.
    pub fn values(&self, domain: Domain, attribute: &str) -> &[String] {
        self.values
            .get(&(domain, attribute.to_string()))
            .map(|l| l.values.as_slice())
            .unwrap_or(&[])
    }

    fn rng(&self, d: &Dialog, pattern: PatternId, purpose: &str, turn: usize) -> ChaCha8Rng {
        keyed_rng(
            self.seed,
            &[&d.id, pattern.name(), purpose, &turn.to_string()],
        )
    }

    /// The attribute `entity` fills in this dialog's KB, else anywhere in
    /// the domain.
    fn attribute_in(&self, d: &Dialog, entity: &str) -> Option<String> {
        match d.kb.attribute_of(entity) {
            Some(SUBJECT_ATTRIBUTE) => Some(
                d.kb.subject_attribute
                    .clone()
                    .unwrap_or_else(|| SUBJECT_ATTRIBUTE.to_string()),
            ),
            Some(a) => Some(a.to_string()),
            None => self
                .attribute_of
                .get(&(d.domain, entity.to_string()))
                .cloned(),
        }
    }

    /// A same-attribute replacement for `original`: a uniform seeded pick
    /// from the dialog's own KB values when any differ from it, else from
    /// the corpus-wide values of the attribute.
    pub fn distractor(
        &self,
        d: &Dialog,
        attribute: &str,
        original: &str,
        rng: &mut ChaCha8Rng,
    ) -> Option<String> {
        let local: Vec<&str> = if d.kb.subject_attribute.as_deref() == Some(attribute) {
            d.kb.subjects()
        } else {
            d.kb.values_of(attribute)
        };
        let local: Vec<&str> = local.into_iter().filter(|v| *v != original).collect();
        if !local.is_empty() {
            return Some(local[rng.gen_range(0..local.len())].to_string());
        }
        let list = self.values.get(&(d.domain, attribute.to_string()))?;
        let skip = list.pos.get(original).copied();
        let n = list.values.len() - usize::from(skip.is_some());
        if n == 0 {
            return None;
        }
        let mut i = rng.gen_range(0..n);
        if skip.is_some_and(|s| i >= s) {
            i += 1;
        }
        Some(list.values[i].clone())
    }
}

/// KB attribute holding the values of a slot.
pub fn slot_attribute(format: SourceFormat, slot: &str) -> &str {
    match format {
        SourceFormat::Babi => API_CALL_SLOTS
            .iter()
            .find(|(s, _)| *s == slot)
            .map(|(_, a)| *a)
            .unwrap_or(slot),
        SourceFormat::Smd => slot,
    }
}

/// What the user would call a value of this slot.
fn slot_noun(slot: &str) -> String {
    match slot {
        "cuisine" => "cuisine".into(),
        "price" => "price range".into(),
        "party_size" => "party size".into(),
        "location" | "poi" | "poi_type" | "address" | "distance" | "traffic_info" => "place".into(),
        "weather_attribute" => "forecast".into(),
        other => other.replace('_', " "),
    }
}

fn intent_phrase(domain: Domain) -> &'static str {
    match domain {
        Domain::Schedule => "my calendar",
        Domain::Weather => "the weather",
        Domain::Navigate => "directions",
        Domain::Restaurant => "a restaurant reservation",
    }
}

const GREETING_WORDS: &[&str] = &[
    "hi",
    "hello",
    "hey",
    "good",
    "morning",
    "afternoon",
    "evening",
    "there",
    "greetings",
];

const SILENCE: &str = "<SILENCE>";

fn words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
                .to_lowercase()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

fn is_request(t: &Turn) -> bool {
    if t.speaker != Speaker::User || t.text.trim() == SILENCE {
        return false;
    }
    let w = words(&t.text);
    !w.is_empty() && !w.iter().all(|w| GREETING_WORDS.contains(&w.as_str()))
}

const CAPABILITY_CUES: &[&str] = &[
    "there are",
    "several",
    "multiple",
    "a few",
    "options",
    "i can",
    "you have",
    "many",
    "some",
];

const NO_RESULT_CUES: &[&str] = &[
    "no result",
    "sorry",
    "don't have",
    "do not have",
    "there is no",
    "there are no",
    "unfortunately",
    "unable",
    "can't find",
    "cannot find",
    "couldn't find",
    "could not find",
    "not available",
    "no information",
    "let me find an other option",
];

fn has_cue(text: &str, cues: &[&str]) -> bool {
    let lower = format!(" {} ", words(text).join(" "));
    cues.iter().any(|c| lower.contains(&format!(" {c} ")))
}

/// The anchor kind of the recipe that injected a turn.
fn kind_of(p: PatternId) -> AnchorKind {
    match p.name() {
        recipes::EXAMPLE_REQUEST | recipes::NOT_HELPED | recipes::REPAIRED => {
            AnchorKind::AfterAgentTurn
        }
        recipes::CAPABILITY_EXPANSION => AnchorKind::DialogStart,
        recipes::MISUNDERSTANDING_REPORT => AnchorKind::BeforeAgentTurn,
        _ => AnchorKind::BeforeUserTurn,
    }
}

/// Whether turns may be spliced in at position `i` without separating an
/// injected block from its own turns or from the turn it is attached to.
pub(crate) fn can_splice(d: &Dialog, i: usize, pattern: PatternId) -> bool {
    let prev = i.checked_sub(1).and_then(|j| d.turns.get(j));
    let next = d.turns.get(i);
    if let (Some(p), Some(n)) = (prev, next) {
        if p.origin == n.origin && !p.origin.is_original() {
            return false;
        }
    }
    if let Some(Origin::Injected(p)) = prev.map(|t| t.origin) {
        let bound_forward = matches!(
            kind_of(p),
            AnchorKind::BeforeAgentTurn | AnchorKind::BeforeUserTurn
        );
        let repair_ack =
            pattern.name() == recipes::REPAIRED && p.name() == recipes::USER_DETAIL_REQUEST;
        if bound_forward && !repair_ack {
            return false;
        }
    }
    if let Some(Origin::Injected(p)) = next.map(|t| t.origin) {
        if kind_of(p) == AnchorKind::AfterAgentTurn {
            return false;
        }
    }
    true
}

fn anchor(d: &Dialog, turn_index: usize, bound: BTreeMap<String, String>) -> Anchor {
    Anchor {
        dialog_id: d.id.clone(),
        turn_index,
        bound,
    }
}

fn bind<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn is_original(t: &Turn, speaker: Speaker) -> bool {
    t.origin.is_original() && t.speaker == speaker
}

/// Every anchor for `recipe` in `d`, ordered by position.
pub fn find_anchors(recipe: &PatternRecipe, d: &Dialog, ctx: &AnchorContext) -> Vec<Anchor> {
    if !recipe.applies_to(ctx.format) || d.applied_patterns().contains(&recipe.id) {
        return Vec::new();
    }
    let id = recipe.id;
    let n = d.turns.len();
    let mut out = Vec::new();
    match id.name() {
        recipes::OPEN_REQUEST_SCREENING => {
            if let Some(i) = d
                .turns
                .iter()
                .position(|t| t.origin.is_original() && is_request(t))
            {
                if can_splice(d, i, id) {
                    out.push(anchor(
                        d,
                        i,
                        bind([("intent", intent_phrase(d.domain).to_string())]),
                    ));
                }
            }
        }
        recipes::USER_DETAIL_REQUEST => {
            for i in 1..n {
                let (q, t) = (&d.turns[i - 1], &d.turns[i]);
                if !is_original(q, Speaker::Agent)
                    || !is_original(t, Speaker::User)
                    || !can_splice(d, i, id)
                {
                    continue;
                }
                let Some(slot) = q.annotations.get("asks") else {
                    continue;
                };
                let attr = slot_attribute(ctx.format, slot);
                let local = d.kb.values_of(attr);
                let values: Vec<&str> = if local.len() >= 2 {
                    local
                } else {
                    ctx.values(d.domain, attr)
                        .iter()
                        .map(String::as_str)
                        .collect()
                };
                if values.len() < 2 {
                    continue;
                }
                let options = values
                    .iter()
                    .map(|v| surface_form(v, ctx.format))
                    .collect::<Vec<_>>()
                    .join(", ");
                out.push(anchor(
                    d,
                    i,
                    bind([("options", options), ("slot", slot.clone())]),
                ));
            }
        }
        recipes::EXAMPLE_REQUEST => {
            let subjects = d.kb.subjects();
            if subjects.is_empty() {
                return out;
            }
            for j in 0..n {
                let t = &d.turns[j];
                if !is_original(t, Speaker::Agent)
                    || !has_cue(&t.text, CAPABILITY_CUES)
                    || !can_splice(d, j + 1, id)
                {
                    continue;
                }
                let mut rng = ctx.rng(d, id, "example", j);
                let subject = subjects[rng.gen_range(0..subjects.len())];
                let detail =
                    d.kb.entries
                        .iter()
                        .find(|e| e.subject == subject)
                        .map(|e| {
                            format!(
                                " with {} {}",
                                e.attribute.replace('_', " "),
                                surface_form(&e.value, ctx.format)
                            )
                        })
                        .unwrap_or_default();
                let example = format!("{}{}", surface_form(subject, ctx.format), detail);
                out.push(anchor(d, j + 1, bind([("example", example)])));
            }
        }
        recipes::MISUNDERSTANDING_REPORT => {
            for i in 1..n {
                let (req, ans) = (&d.turns[i - 1], &d.turns[i]);
                if !is_original(ans, Speaker::Agent)
                    || !is_original(req, Speaker::User)
                    || req.text.trim() == SILENCE
                    || ans.annotations.get("act").is_some_and(|a| a == "api_call")
                    || !can_splice(d, i, id)
                {
                    continue;
                }
                let mut rng = ctx.rng(d, id, "distractor", i);
                let corrupted = ctx.lexicon.spans(&ans.text).into_iter().find_map(|span| {
                    let attr = ctx.attribute_in(d, &span.entity)?;
                    let other = ctx.distractor(d, &attr, &span.entity, &mut rng)?;
                    let text = replace_entity(
                        &ctx.lexicon,
                        &ans.text,
                        &span.entity,
                        &surface_form(&other, ctx.format),
                    )?;
                    Some((span.entity, other, text))
                });
                if let Some((entity, other, text)) = corrupted {
                    out.push(anchor(
                        d,
                        i,
                        bind([
                            ("corrupted", text),
                            ("request", req.text.clone()),
                            ("entity", entity),
                            ("distractor", other),
                        ]),
                    ));
                }
            }
        }
        recipes::OTHER_CORRECTION => {
            for i in 0..n {
                let t = &d.turns[i];
                if !is_original(t, Speaker::User) || !can_splice(d, i, id) {
                    continue;
                }
                if i > 0 && !is_original(&d.turns[i - 1], Speaker::Agent) {
                    continue;
                }
                let mut slots: Vec<(String, String)> = t
                    .slots()
                    .map(|(s, v)| (s.to_string(), v.to_string()))
                    .collect();
                if let Some(next) = d
                    .turns
                    .get(i + 1)
                    .filter(|n| is_original(n, Speaker::Agent))
                {
                    slots.extend(next.slots().map(|(s, v)| (s.to_string(), v.to_string())));
                }
                let mentioned = ctx.lexicon.entities_in(&t.text);
                let mut rng = ctx.rng(d, id, "distractor", i);
                let found = slots.into_iter().find_map(|(slot, value)| {
                    let v = normalize_entity(&value).ok()?;
                    if !mentioned.contains(&v) {
                        return None;
                    }
                    let attr = slot_attribute(ctx.format, &slot);
                    let other = ctx.distractor(d, attr, &v, &mut rng)?;
                    let slip = replace_entity(
                        &ctx.lexicon,
                        &t.text,
                        &v,
                        &surface_form(&other, ctx.format),
                    )?;
                    Some((slot, v, other, slip))
                });
                if let Some((slot, v, other, slip)) = found {
                    out.push(anchor(
                        d,
                        i,
                        bind([
                            ("slip", slip),
                            ("noun", slot_noun(&slot)),
                            ("distractor", surface_form(&other, ctx.format)),
                            ("value", surface_form(&v, ctx.format)),
                            ("slot", slot),
                        ]),
                    ));
                }
            }
        }
        recipes::NOT_HELPED => {
            for j in 0..n {
                let t = &d.turns[j];
                if is_original(t, Speaker::Agent)
                    && has_cue(&t.text, NO_RESULT_CUES)
                    && can_splice(d, j + 1, id)
                {
                    out.push(anchor(d, j + 1, BTreeMap::new()));
                }
            }
        }
        recipes::REPAIRED => {
            for j in 0..n {
                if d.turns[j].speaker == Speaker::Agent
                    && resolves_repair(d, j)
                    && can_splice(d, j + 1, id)
                {
                    out.push(anchor(d, j + 1, BTreeMap::new()));
                }
            }
        }
        recipes::CAPABILITY_EXPANSION => {
            if can_splice(d, 0, id) {
                out.push(anchor(d, 0, capability_bindings(d, ctx, id)));
            }
        }
        recipes::RECIPIENT_CORRECTION => {
            for i in 0..n {
                if is_original(&d.turns[i], Speaker::User) && can_splice(d, i, id) {
                    out.push(anchor(d, i, BTreeMap::new()));
                }
            }
        }
        _ => {}
    }
    out
}

fn is_question(t: &Turn) -> bool {
    t.text.trim_end().ends_with('?') || t.annotations.contains_key("asks")
}

fn injected_by(t: &Turn, name: &str) -> bool {
    t.origin.pattern().is_some_and(|p| p.name() == name)
}

/// Whether agent turn `j` completes a clarification or repair sequence.
fn resolves_repair(d: &Dialog, j: usize) -> bool {
    let t = &d.turns[j];
    if injected_by(t, recipes::EXAMPLE_REQUEST) || injected_by(t, recipes::USER_DETAIL_REQUEST) {
        return true;
    }
    if !t.origin.is_original() || j == 0 {
        return false;
    }
    let prev = &d.turns[j - 1];
    if injected_by(prev, recipes::MISUNDERSTANDING_REPORT) {
        return true;
    }
    if j < 2 || !prev.origin.is_original() {
        return false;
    }
    let before = &d.turns[j - 2];
    if injected_by(before, recipes::OTHER_CORRECTION) {
        return true;
    }
    before.origin.is_original()
        && before.speaker == Speaker::Agent
        && is_question(before)
        && !is_question(t)
}

/// Capability names and example entities drawn from the corpus.
fn capability_bindings(d: &Dialog, ctx: &AnchorContext, id: PatternId) -> BTreeMap<String, String> {
    let sources: [(&str, Domain, &str, &str); 3] = match ctx.format {
        SourceFormat::Smd => [
            (
                "calendar scheduling",
                Domain::Schedule,
                "event",
                "meetings and appointments",
            ),
            (
                "weather information",
                Domain::Weather,
                "location",
                "forecasts for your city",
            ),
            ("navigation", Domain::Navigate, "poi", "nearby places"),
        ],
        SourceFormat::Babi => [
            (
                "restaurant recommendations",
                Domain::Restaurant,
                "r_cuisine",
                "many cuisines",
            ),
            (
                "table reservations",
                Domain::Restaurant,
                "r_location",
                "many cities",
            ),
            (
                "restaurant information",
                Domain::Restaurant,
                "r_name",
                "phone numbers and addresses",
            ),
        ],
    };
    let mut rng = ctx.rng(d, id, "examples", 0);
    let mut bound = BTreeMap::new();
    let names: Vec<&str> = sources.iter().map(|s| s.0).collect();
    bound.insert(
        "capabilities".to_string(),
        format!("{}, {} and {}", names[0], names[1], names[2]),
    );
    for (k, (name, domain, attr, fallback)) in sources.iter().enumerate() {
        let values = ctx.values(*domain, attr);
        let examples = match values.len() {
            0 => fallback.to_string(),
            1 => surface_form(&values[0], ctx.format),
            len => {
                let a = rng.gen_range(0..len);
                let mut b = rng.gen_range(0..len - 1);
                if b >= a {
                    b += 1;
                }
                format!(
                    "{} and {}",
                    surface_form(&values[a], ctx.format),
                    surface_form(&values[b], ctx.format)
                )
            }
        };
        bound.insert(format!("capability_{}", k + 1), name.to_string());
        bound.insert(format!("examples_{}", k + 1), examples);
    }
    bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialog::{KbEntry, KbRecord};
    use crate::patterns::recipes::builtin_recipes;

    fn recipe(name: &str) -> PatternRecipe {
        builtin_recipes()
            .into_iter()
            .find(|r| r.id.name() == name)
            .unwrap()
    }

    fn user(t: &str) -> Turn {
        Turn::original(Speaker::User, t)
    }

    fn agent(t: &str) -> Turn {
        Turn::original(Speaker::Agent, t)
    }

    fn babi_kb(rows: &[(&str, &str, &str)]) -> KbRecord {
        KbRecord {
            entries: rows
                .iter()
                .map(|(s, a, v)| KbEntry {
                    subject: s.to_string(),
                    attribute: a.to_string(),
                    value: v.to_string(),
                })
                .collect(),
            subject_attribute: Some("r_name".into()),
        }
    }

    fn babi_corpus() -> DialogCorpus {
        let d0 = Dialog::new(
            "babi-0",
            Domain::Restaurant,
            vec![
                user("good morning"),
                agent("hello what can i help you with today"),
                user("can you book a table in rome").with_annotation("slot:location", "rome"),
                agent("i'm on it"),
                user("<SILENCE>"),
                agent("any preference on a type of cuisine").with_annotation("asks", "cuisine"),
                user("with italian food").with_annotation("slot:cuisine", "italian"),
                agent("ok let me look into some options for you"),
                user("may i have the phone number of the restaurant"),
                agent("here it is resto_rome_cheap_italian_1stars_phone"),
                user("no this does not work for me"),
                agent("sure let me find an other option for you"),
            ],
            babi_kb(&[
                ("resto_rome_cheap_italian_1stars", "r_cuisine", "italian"),
                ("resto_rome_cheap_italian_1stars", "r_location", "rome"),
                (
                    "resto_rome_cheap_italian_1stars",
                    "r_phone",
                    "resto_rome_cheap_italian_1stars_phone",
                ),
            ]),
        );
        let d1 = Dialog::new(
            "babi-1",
            Domain::Restaurant,
            vec![user("hi"), agent("hello")],
            babi_kb(&[
                ("resto_paris_cheap_french_2stars", "r_cuisine", "french"),
                ("resto_paris_cheap_french_2stars", "r_location", "paris"),
                ("resto_madrid_cheap_spanish_2stars", "r_cuisine", "spanish"),
                (
                    "resto_paris_cheap_french_2stars",
                    "r_phone",
                    "resto_paris_cheap_french_2stars_phone",
                ),
            ]),
        );
        DialogCorpus::new(SourceFormat::Babi, vec![d0, d1])
    }

    fn positions(name: &str, c: &DialogCorpus) -> Vec<usize> {
        let ctx = AnchorContext::new(c, 1);
        find_anchors(&recipe(name), &c.dialogs[0], &ctx)
            .into_iter()
            .map(|a| a.turn_index)
            .collect()
    }

    #[test]
    fn screening_anchors_before_first_request() {
        let c = babi_corpus();
        assert_eq!(positions(recipes::OPEN_REQUEST_SCREENING, &c), vec![2]);
        let smd = DialogCorpus::new(
            SourceFormat::Smd,
            vec![Dialog::new(
                "s",
                Domain::Weather,
                vec![user("will it rain today?"), agent("no")],
                KbRecord::default(),
            )],
        );
        let ctx = AnchorContext::new(&smd, 1);
        let a = find_anchors(
            &recipe(recipes::OPEN_REQUEST_SCREENING),
            &smd.dialogs[0],
            &ctx,
        );
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].turn_index, 0);
        assert_eq!(a[0].bound["intent"], "the weather");
    }

    #[test]
    fn user_detail_follows_slot_question() {
        let c = babi_corpus();
        let ctx = AnchorContext::new(&c, 1);
        let a = find_anchors(&recipe(recipes::USER_DETAIL_REQUEST), &c.dialogs[0], &ctx);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].turn_index, 6);
        assert_eq!(a[0].bound["options"], "italian, french, spanish");
    }

    #[test]
    fn misunderstanding_needs_an_entity_bearing_answer() {
        let c = babi_corpus();
        assert_eq!(positions(recipes::MISUNDERSTANDING_REPORT, &c), vec![9]);
        let ctx = AnchorContext::new(&c, 1);
        let a = &find_anchors(
            &recipe(recipes::MISUNDERSTANDING_REPORT),
            &c.dialogs[0],
            &ctx,
        )[0];
        assert_eq!(
            a.bound["corrupted"],
            "here it is resto_paris_cheap_french_2stars_phone"
        );
        assert_eq!(
            a.bound["request"],
            "may i have the phone number of the restaurant"
        );

        let plain = Dialog::new(
            "p",
            Domain::Restaurant,
            vec![user("hi"), agent("hello")],
            KbRecord::default(),
        );
        assert!(find_anchors(&recipe(recipes::MISUNDERSTANDING_REPORT), &plain, &ctx).is_empty());
    }

    /// Reference: the corpus cuisine values other than the original, indexed
    /// by the first draw of the same keyed stream.
    #[test]
    fn other_correction_distractor_matches_oracle() {
        let c = babi_corpus();
        for seed in 0..20u64 {
            let ctx = AnchorContext::new(&c, seed);
            let anchors = find_anchors(&recipe(recipes::OTHER_CORRECTION), &c.dialogs[0], &ctx);
            let a = anchors.iter().find(|a| a.turn_index == 6).unwrap();
            let candidates: Vec<&str> = ["italian", "french", "spanish"]
                .into_iter()
                .filter(|v| *v != "italian")
                .collect();
            let pid = recipe(recipes::OTHER_CORRECTION).id;
            let mut rng = keyed_rng(seed, &["babi-0", pid.name(), "distractor", "6"]);
            let expected = candidates[rng.gen_range(0..candidates.len())];
            assert_eq!(a.bound["distractor"], expected);
            assert_ne!(a.bound["distractor"], "italian");
            assert_eq!(a.bound["slip"], format!("with {expected} food"));
            assert_eq!(a.bound["noun"], "cuisine");
        }
    }

    #[test]
    fn not_helped_and_repaired_cues() {
        let c = babi_corpus();
        assert_eq!(positions(recipes::NOT_HELPED, &c), vec![12]);
        // the cuisine question is answered and resolved at turn 7
        assert_eq!(positions(recipes::REPAIRED, &c), vec![8]);
    }

    #[test]
    fn capability_binds_examples_from_corpus() {
        let c = babi_corpus();
        let ctx = AnchorContext::new(&c, 3);
        let a = find_anchors(&recipe(recipes::CAPABILITY_EXPANSION), &c.dialogs[1], &ctx);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].turn_index, 0);
        for key in recipe(recipes::CAPABILITY_EXPANSION).required_bindings() {
            assert!(a[0].bound.contains_key(key), "{key}");
        }
        assert!(a[0].bound["examples_1"].contains(" and "));
    }

    #[test]
    fn smd_only_recipes_skip_babi() {
        let c = babi_corpus();
        assert!(positions(recipes::RECIPIENT_CORRECTION, &c).is_empty());
        assert!(positions(recipes::EXAMPLE_REQUEST, &c).is_empty());
    }

    #[test]
    fn example_request_after_capability_statement() {
        let kb = KbRecord {
            entries: vec![KbEntry {
                subject: "chevron".into(),
                attribute: "address".into(),
                value: "783_arcadia_pl".into(),
            }],
            subject_attribute: Some("poi".into()),
        };
        let d = Dialog::new(
            "s",
            Domain::Navigate,
            vec![
                user("find me a gas station"),
                agent("there are several gas stations nearby"),
                user("the closest"),
                agent("chevron"),
            ],
            kb,
        );
        let c = DialogCorpus::new(SourceFormat::Smd, vec![d]);
        let ctx = AnchorContext::new(&c, 0);
        let a = find_anchors(&recipe(recipes::EXAMPLE_REQUEST), &c.dialogs[0], &ctx);
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].turn_index, 2);
        assert_eq!(a[0].bound["example"], "chevron with address 783 arcadia pl");
    }
}
