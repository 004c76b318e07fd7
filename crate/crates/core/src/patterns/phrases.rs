//! Phrase banks and surface realization of injected turns.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::dialog::Domain;
use crate::digest::keyed_rng;
use crate::error::{Error, Result};

use super::recipes::{PatternRecipe, TemplateStep};
use super::PatternId;

const BUILTIN: &str = include_str!("../../data/phrases.toml");

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct ActionPhrases {
    default: Vec<String>,
    by_domain: BTreeMap<Domain, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseBank {
    actions: BTreeMap<(String, String), ActionPhrases>,
}

type RawBank = BTreeMap<String, BTreeMap<String, BTreeMap<String, Vec<String>>>>;

impl PhraseBank {
    pub fn builtin() -> PhraseBank {
        PhraseBank::from_toml(BUILTIN).expect("embedded phrase bank is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PhraseBank> {
        PhraseBank::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn from_toml(text: &str) -> Result<PhraseBank> {
        let raw: RawBank = toml::from_str(text).map_err(|e| Error::PhraseBank(e.to_string()))?;
        let mut actions = BTreeMap::new();
        for (pattern, by_action) in raw {
            if PatternId::from_name(&pattern).is_none() {
                return Err(Error::PhraseBank(format!("unknown pattern `{pattern}`")));
            }
            for (action, lists) in by_action {
                let mut phrases = ActionPhrases::default();
                for (key, list) in lists {
                    if list.is_empty() || list.iter().any(|s| s.trim().is_empty()) {
                        return Err(Error::PhraseBank(format!(
                            "{pattern}.{action}.{key}: empty surface form list or entry"
                        )));
                    }
                    if list.iter().any(|s| s.contains(['\n', '\r'])) {
                        return Err(Error::PhraseBank(format!(
                            "{pattern}.{action}.{key}: surface forms must be single-line"
                        )));
                    }
                    if key == "default" {
                        phrases.default = list;
                    } else {
                        let domain = Domain::parse(&key).ok_or_else(|| {
                            Error::PhraseBank(format!("{pattern}.{action}: unknown domain `{key}`"))
                        })?;
                        phrases.by_domain.insert(domain, list);
                    }
                }
                actions.insert((pattern.clone(), action), phrases);
            }
        }
        Ok(PhraseBank { actions })
    }

    /// Surface forms for one action in one domain.
    pub fn variants(&self, pattern: PatternId, action: &str, domain: Domain) -> Result<&[String]> {
        let missing = || Error::MissingPhrase {
            pattern: pattern.name().to_string(),
            action: action.to_string(),
            domain: domain.to_string(),
        };
        let phrases = self
            .actions
            .get(&(pattern.name().to_string(), action.to_string()))
            .ok_or_else(missing)?;
        let list = phrases.by_domain.get(&domain).unwrap_or(&phrases.default);
        if list.is_empty() {
            return Err(missing());
        }
        Ok(list)
    }

    /// Checks that every recipe step has surface forms in every domain of
    /// the recipe's datasets and that they only use the step's placeholders.
    pub fn validate(&self, recipes: &[PatternRecipe]) -> Result<()> {
        for r in recipes {
            let domains = r
                .datasets
                .iter()
                .flat_map(|f| domains_of(*f).iter().copied())
                .collect::<BTreeSet<_>>();
            for step in &r.template {
                let allowed: BTreeSet<&str> = step.slots.iter().map(|(p, _)| *p).collect();
                for domain in &domains {
                    for form in self.variants(r.id, step.action, *domain)? {
                        for name in placeholders(form) {
                            if !allowed.contains(name) {
                                return Err(Error::PhraseBank(format!(
                                    "{}.{}: unknown placeholder `{{{name}}}` in {form:?}",
                                    r.id, step.action
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Realizes one template step with values bound at the anchor.
    pub fn realize(
        &self,
        pattern: PatternId,
        step: &TemplateStep,
        domain: Domain,
        bound: &BTreeMap<String, String>,
        draw: &mut Draw,
    ) -> Result<String> {
        let variants = self.variants(pattern, step.action, domain)?;
        let form = &variants[draw.pick(variants.len())];
        fill(form, |name| {
            let key = step
                .slots
                .iter()
                .find(|(p, _)| *p == name)
                .map(|(_, k)| *k)
                .unwrap_or(name);
            bound.get(key).map(String::as_str)
        })
    }
}

pub(crate) fn domains_of(format: crate::dialog::SourceFormat) -> &'static [Domain] {
    match format {
        crate::dialog::SourceFormat::Babi => &[Domain::Restaurant],
        crate::dialog::SourceFormat::Smd => &[Domain::Schedule, Domain::Weather, Domain::Navigate],
    }
}

/// Deterministic variant choice. `Keyed` draws depend only on the seed, the
/// dialog and the pattern, so results do not depend on processing order.
#[derive(Debug, Clone)]
pub enum Draw {
    First,
    Keyed(Box<ChaCha8Rng>),
}

impl Draw {
    pub fn first() -> Draw {
        Draw::First
    }

    pub fn keyed(seed: u64, dialog_id: &str, pattern: PatternId) -> Draw {
        Draw::Keyed(Box::new(keyed_rng(
            seed,
            &[dialog_id, pattern.name(), "realize"],
        )))
    }

    pub fn pick(&mut self, n: usize) -> usize {
        match self {
            Draw::First => 0,
            Draw::Keyed(rng) => rng.gen_range(0..n),
        }
    }
}

fn placeholders(form: &str) -> impl Iterator<Item = &str> {
    form.split('{')
        .skip(1)
        .filter_map(|rest| rest.split_once('}').map(|(name, _)| name))
}

fn fill<'a>(form: &str, lookup: impl Fn(&str) -> Option<&'a str>) -> Result<String> {
    let mut out = String::with_capacity(form.len() + 16);
    let mut rest = form;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after
            .find('}')
            .ok_or_else(|| Error::PhraseBank(format!("unclosed placeholder in {form:?}")))?;
        let name = &after[..close];
        let value = lookup(name).ok_or_else(|| Error::UnresolvedSlot(name.to_string()))?;
        out.push_str(value);
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}
