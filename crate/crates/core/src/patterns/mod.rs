//! NCF patterns: the catalog, the nine injection recipes, their anchors and
//! the realization of injected turns.

mod anchors;
mod catalog;
mod phrases;
pub mod recipes;

use std::collections::BTreeMap;

pub use anchors::{find_anchors, slot_attribute, Anchor, AnchorContext};
pub use catalog::{list_patterns, CatalogEntry, PatternClass, PatternId, CATALOG};
pub use phrases::{Draw, PhraseBank};
pub use recipes::{AnchorKind, PatternRecipe, TemplateStep};

use crate::dialog::{Dialog, Domain, SourceFormat, Speaker, Turn};
use crate::error::{Error, Result};

/// Recipes plus the phrase bank used to realize them.
#[derive(Debug, Clone)]
pub struct PatternEngine {
    recipes: Vec<PatternRecipe>,
    phrases: PhraseBank,
}

impl Default for PatternEngine {
    fn default() -> Self {
        PatternEngine::new(PhraseBank::builtin()).expect("builtin phrase bank covers every recipe")
    }
}

impl PatternEngine {
    pub fn new(phrases: PhraseBank) -> Result<PatternEngine> {
        let recipes = recipes::builtin_recipes();
        phrases.validate(&recipes)?;
        Ok(PatternEngine { recipes, phrases })
    }

    pub fn recipes(&self) -> &[PatternRecipe] {
        &self.recipes
    }

    pub fn recipes_for(&self, format: SourceFormat) -> impl Iterator<Item = &PatternRecipe> {
        self.recipes.iter().filter(move |r| r.applies_to(format))
    }

    pub fn recipe(&self, id: PatternId) -> Option<&PatternRecipe> {
        self.recipes.iter().find(|r| r.id == id)
    }

    /// Looks up a recipe by name or NCF code.
    pub fn recipe_by_name(&self, name: &str) -> Result<&PatternRecipe> {
        PatternId::lookup(name)
            .and_then(|id| self.recipe(id))
            .ok_or_else(|| Error::UnknownPattern(name.to_string()))
    }

    pub fn phrases(&self) -> &PhraseBank {
        &self.phrases
    }

    pub fn find_anchors(
        &self,
        recipe: &PatternRecipe,
        d: &Dialog,
        ctx: &AnchorContext,
    ) -> Vec<Anchor> {
        find_anchors(recipe, d, ctx)
    }

    /// Realizes the first template step performing `action`.
    pub fn realize(
        &self,
        recipe: &PatternRecipe,
        action: &str,
        domain: Domain,
        bound: &BTreeMap<String, String>,
        draw: &mut Draw,
    ) -> Result<String> {
        let step = recipe
            .template
            .iter()
            .find(|s| s.action == action)
            .ok_or_else(|| Error::MissingPhrase {
                pattern: recipe.id.name().to_string(),
                action: action.to_string(),
                domain: domain.to_string(),
            })?;
        self.phrases.realize(recipe.id, step, domain, bound, draw)
    }

    /// Returns `d` with the recipe's turns spliced in at the anchor.
    pub fn inject(
        &self,
        d: &Dialog,
        recipe: &PatternRecipe,
        anchor: &Anchor,
        seed: u64,
    ) -> Result<Dialog> {
        if d.applied_patterns().contains(&recipe.id) {
            return Err(Error::AlreadyApplied);
        }
        let at = anchor.turn_index;
        let n = d.turns.len();
        let invalid =
            |why: &str| Error::InvalidAnchor(format!("{} at {} in {}: {why}", recipe.id, at, d.id));
        if anchor.dialog_id != d.id {
            return Err(invalid("anchor belongs to another dialog"));
        }
        if at > n {
            return Err(invalid("position past the end of the dialog"));
        }
        let speaker_at = |i: usize| d.turns.get(i).map(|t| t.speaker);
        let kind_ok = match recipe.anchor_kind {
            AnchorKind::DialogStart => at == 0,
            AnchorKind::DialogEnd => at == n,
            AnchorKind::BeforeUserTurn => speaker_at(at) == Some(Speaker::User),
            AnchorKind::BeforeAgentTurn => speaker_at(at) == Some(Speaker::Agent),
            AnchorKind::AfterAgentTurn => at > 0 && speaker_at(at - 1) == Some(Speaker::Agent),
        };
        if !kind_ok {
            return Err(invalid("position does not match the recipe's anchor kind"));
        }
        if !anchors::can_splice(d, at, recipe.id) {
            return Err(invalid("position is inside an injected sequence"));
        }
        for key in recipe.required_bindings() {
            if !anchor.bound.contains_key(key) {
                return Err(Error::UnresolvedSlot(key.to_string()));
            }
        }

        let mut draw = Draw::keyed(seed, &d.id, recipe.id);
        let mut added = Vec::with_capacity(recipe.template.len());
        for step in &recipe.template {
            let text = self
                .phrases
                .realize(recipe.id, step, d.domain, &anchor.bound, &mut draw)?;
            let text = text.replace(['\r', '\n'], " ");
            if text.trim().is_empty() {
                return Err(Error::UnresolvedSlot(step.action.to_string()));
            }
            added.push(Turn::injected(step.speaker, text, recipe.id));
        }

        let mut out = d.clone();
        out.turns.splice(at..at, added);
        if d.is_alternating() && !out.is_alternating() {
            return Err(invalid("splice breaks user/agent alternation"));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialog::{DialogCorpus, KbRecord};

    fn dialog() -> Dialog {
        Dialog::new(
            "smd-0",
            Domain::Navigate,
            vec![
                Turn::original(Speaker::User, "where is the nearest gas station"),
                Turn::original(Speaker::Agent, "chevron is 5 miles away"),
                Turn::original(Speaker::User, "thanks"),
                Turn::original(Speaker::Agent, "you're welcome"),
            ],
            KbRecord::default(),
        )
    }

    fn setup() -> (PatternEngine, DialogCorpus, AnchorContext) {
        let corpus = DialogCorpus::new(SourceFormat::Smd, vec![dialog()]);
        let ctx = AnchorContext::new(&corpus, 0);
        (PatternEngine::default(), corpus, ctx)
    }

    #[test]
    fn screening_prepends_pre_request_and_go_ahead() {
        let (engine, corpus, ctx) = setup();
        let r = engine.recipe_by_name("open_request_screening").unwrap();
        let d = &corpus.dialogs[0];
        let anchors = engine.find_anchors(r, d, &ctx);
        assert_eq!(anchors.len(), 1);
        let out = engine.inject(d, r, &anchors[0], 7).unwrap();
        assert_eq!(out.turns.len(), 6);
        assert_eq!(out.turns[0].speaker, Speaker::User);
        assert_eq!(out.turns[1].speaker, Speaker::Agent);
        assert!(out.turns[..2]
            .iter()
            .all(|t| t.origin.pattern() == Some(r.id)));
        assert_eq!(out.turns[2..], d.turns[..]);
        assert!(out.turns[0].text.contains("directions"));
    }

    #[test]
    fn capability_expansion_adds_ten() {
        let (engine, corpus, ctx) = setup();
        let mut d = corpus.dialogs[0].clone();
        d.turns.push(Turn::original(Speaker::User, "bye"));
        d.turns.push(Turn::original(Speaker::Agent, "bye"));
        let r = engine.recipe_by_name("C3.1").unwrap();
        let a = &engine.find_anchors(r, &d, &ctx)[0];
        let out = engine.inject(&d, r, a, 1).unwrap();
        assert_eq!(out.turns.len(), 16);
        assert!(out.check_invariants().is_ok());
        assert_eq!(out.turns[2].text, {
            let mut draw = Draw::keyed(1, "smd-0", r.id);
            let mut last = String::new();
            for step in &r.template[..3] {
                last = engine
                    .phrases()
                    .realize(r.id, step, Domain::Navigate, &a.bound, &mut draw)
                    .unwrap();
            }
            last
        });
    }

    #[test]
    fn injecting_twice_is_rejected() {
        let (engine, corpus, ctx) = setup();
        let r = engine.recipe_by_name("open_request_screening").unwrap();
        let d = &corpus.dialogs[0];
        let a = &engine.find_anchors(r, d, &ctx)[0];
        let once = engine.inject(d, r, a, 0).unwrap();
        let err = engine.inject(&once, r, a, 0).unwrap_err();
        assert_eq!(err.to_string(), "pattern already applied at anchor");
    }

    #[test]
    fn invalid_anchors_are_rejected() {
        let (engine, corpus, _) = setup();
        let d = &corpus.dialogs[0];
        let r = engine.recipe_by_name("sequence_closer_repaired").unwrap();
        let bad = Anchor {
            dialog_id: d.id.clone(),
            turn_index: 1,
            bound: BTreeMap::new(),
        };
        assert!(matches!(
            engine.inject(d, r, &bad, 0),
            Err(Error::InvalidAnchor(_))
        ));
        let far = Anchor {
            turn_index: 9,
            ..bad.clone()
        };
        assert!(matches!(
            engine.inject(d, r, &far, 0),
            Err(Error::InvalidAnchor(_))
        ));
        let other = Anchor {
            dialog_id: "x".into(),
            turn_index: 2,
            bound: BTreeMap::new(),
        };
        assert!(matches!(
            engine.inject(d, r, &other, 0),
            Err(Error::InvalidAnchor(_))
        ));
    }

    #[test]
    fn missing_binding_names_the_slot() {
        let (engine, corpus, _) = setup();
        let d = &corpus.dialogs[0];
        let r = engine.recipe_by_name("open_request_screening").unwrap();
        let a = Anchor {
            dialog_id: d.id.clone(),
            turn_index: 0,
            bound: BTreeMap::new(),
        };
        match engine.inject(d, r, &a, 0) {
            Err(Error::UnresolvedSlot(s)) => assert_eq!(s, "intent"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inject_is_deterministic() {
        let (engine, corpus, ctx) = setup();
        let d = &corpus.dialogs[0];
        for r in engine.recipes_for(SourceFormat::Smd) {
            for a in engine.find_anchors(r, d, &ctx) {
                assert_eq!(
                    engine.inject(d, r, &a, 42).unwrap(),
                    engine.inject(d, r, &a, 42).unwrap()
                );
            }
        }
    }
}
