//! The nine injection recipes: where each pattern anchors and which turns it
//! adds.

use serde::Serialize;

use crate::dialog::{SourceFormat, Speaker};

use super::PatternId;

pub const OPEN_REQUEST_SCREENING: &str = "open_request_screening";
pub const USER_DETAIL_REQUEST: &str = "open_request_user_detail_request";
pub const EXAMPLE_REQUEST: &str = "example_request";
pub const MISUNDERSTANDING_REPORT: &str = "misunderstanding_report";
pub const OTHER_CORRECTION: &str = "other_correction";
pub const NOT_HELPED: &str = "sequence_closer_not_helped";
pub const REPAIRED: &str = "sequence_closer_repaired";
pub const CAPABILITY_EXPANSION: &str = "capability_expansion";
pub const RECIPIENT_CORRECTION: &str = "recipient_correction";

/// Recipe names in planning priority order.
pub const RECIPE_ORDER: [&str; 9] = [
    OPEN_REQUEST_SCREENING,
    USER_DETAIL_REQUEST,
    EXAMPLE_REQUEST,
    MISUNDERSTANDING_REPORT,
    OTHER_CORRECTION,
    NOT_HELPED,
    REPAIRED,
    CAPABILITY_EXPANSION,
    RECIPIENT_CORRECTION,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AnchorKind {
    DialogStart,
    BeforeAgentTurn,
    AfterAgentTurn,
    BeforeUserTurn,
    DialogEnd,
}

/// One added turn: who says it, the social action it performs, and which
/// bound values fill its placeholders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TemplateStep {
    pub speaker: Speaker,
    pub action: &'static str,
    /// `(placeholder, bound value key)` pairs.
    pub slots: Vec<(&'static str, &'static str)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternRecipe {
    pub id: PatternId,
    pub anchor_kind: AnchorKind,
    pub template: Vec<TemplateStep>,
    pub datasets: Vec<SourceFormat>,
}

impl PatternRecipe {
    pub fn added_turn_count(&self) -> usize {
        self.template.len()
    }

    pub fn applies_to(&self, format: SourceFormat) -> bool {
        self.datasets.contains(&format)
    }

    /// Bound value keys the template needs.
    pub fn required_bindings(&self) -> Vec<&'static str> {
        let mut keys: Vec<&'static str> = self
            .template
            .iter()
            .flat_map(|s| s.slots.iter().map(|(_, k)| *k))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }
}

fn step(
    speaker: Speaker,
    action: &'static str,
    slots: &[(&'static str, &'static str)],
) -> TemplateStep {
    TemplateStep {
        speaker,
        action,
        slots: slots.to_vec(),
    }
}

fn u(action: &'static str, slots: &[(&'static str, &'static str)]) -> TemplateStep {
    step(Speaker::User, action, slots)
}

fn a(action: &'static str, slots: &[(&'static str, &'static str)]) -> TemplateStep {
    step(Speaker::Agent, action, slots)
}

const BOTH: [SourceFormat; 2] = [SourceFormat::Babi, SourceFormat::Smd];

/// All recipes, in [`RECIPE_ORDER`].
pub fn builtin_recipes() -> Vec<PatternRecipe> {
    let id = |name: &str| PatternId::from_name(name).expect("recipe names are in the catalog");
    vec![
        PatternRecipe {
            id: id(OPEN_REQUEST_SCREENING),
            anchor_kind: AnchorKind::BeforeUserTurn,
            template: vec![
                u("PRE-REQUEST", &[("intent", "intent")]),
                a("GO-AHEAD", &[]),
            ],
            datasets: BOTH.to_vec(),
        },
        PatternRecipe {
            id: id(USER_DETAIL_REQUEST),
            anchor_kind: AnchorKind::BeforeUserTurn,
            template: vec![
                u("DETAIL-REQUEST", &[]),
                a("DETAIL-OPTIONS", &[("options", "options")]),
            ],
            datasets: vec![SourceFormat::Babi],
        },
        PatternRecipe {
            id: id(EXAMPLE_REQUEST),
            anchor_kind: AnchorKind::AfterAgentTurn,
            template: vec![
                u("EXAMPLE-REQUEST", &[]),
                a("EXAMPLE", &[("example", "example")]),
            ],
            datasets: vec![SourceFormat::Smd],
        },
        PatternRecipe {
            id: id(MISUNDERSTANDING_REPORT),
            anchor_kind: AnchorKind::BeforeAgentTurn,
            template: vec![
                a("CORRUPTED-ANSWER", &[("answer", "corrupted")]),
                u("REPORT", &[]),
                a("REPEAT-REQUEST", &[]),
                u("RESTATEMENT", &[("request", "request")]),
            ],
            datasets: BOTH.to_vec(),
        },
        PatternRecipe {
            id: id(OTHER_CORRECTION),
            anchor_kind: AnchorKind::BeforeUserTurn,
            template: vec![
                u("SLIP", &[("slip", "slip")]),
                a("CORRECTION", &[("noun", "noun"), ("value", "distractor")]),
            ],
            datasets: BOTH.to_vec(),
        },
        PatternRecipe {
            id: id(NOT_HELPED),
            anchor_kind: AnchorKind::AfterAgentTurn,
            template: vec![u("CLOSER", &[]), a("RECEIPT", &[])],
            datasets: BOTH.to_vec(),
        },
        PatternRecipe {
            id: id(REPAIRED),
            anchor_kind: AnchorKind::AfterAgentTurn,
            template: vec![u("APPRECIATION", &[]), a("RECEIPT", &[])],
            datasets: BOTH.to_vec(),
        },
        PatternRecipe {
            id: id(CAPABILITY_EXPANSION),
            anchor_kind: AnchorKind::DialogStart,
            template: vec![
                u("CAPABILITY-CHECK", &[]),
                a("CAPABILITY-LIST", &[("capabilities", "capabilities")]),
                u("EXPANSION-REQUEST", &[("capability", "capability_1")]),
                a(
                    "EXPANSION",
                    &[("capability", "capability_1"), ("examples", "examples_1")],
                ),
                u("EXPANSION-REQUEST", &[("capability", "capability_2")]),
                a(
                    "EXPANSION",
                    &[("capability", "capability_2"), ("examples", "examples_2")],
                ),
                u("EXPANSION-REQUEST", &[("capability", "capability_3")]),
                a(
                    "EXPANSION",
                    &[("capability", "capability_3"), ("examples", "examples_3")],
                ),
                u("ACKNOWLEDGEMENT", &[]),
                a("RECEIPT", &[]),
            ],
            datasets: BOTH.to_vec(),
        },
        PatternRecipe {
            id: id(RECIPIENT_CORRECTION),
            anchor_kind: AnchorKind::BeforeUserTurn,
            template: vec![
                u("SIDE-REMARK", &[]),
                a("MISTAKEN-REPLY", &[]),
                u("CORRECTION", &[]),
                a("STAND-BY", &[]),
                u("SIDE-REMARK", &[]),
                a("MISTAKEN-REPLY", &[]),
                u("CORRECTION", &[]),
                a("STAND-BY", &[]),
            ],
            datasets: vec![SourceFormat::Smd],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn by_name(name: &str) -> PatternRecipe {
        builtin_recipes()
            .into_iter()
            .find(|r| r.id.name() == name)
            .unwrap()
    }

    #[test]
    fn added_turn_counts() {
        let expected = [
            (OPEN_REQUEST_SCREENING, 2),
            (USER_DETAIL_REQUEST, 2),
            (EXAMPLE_REQUEST, 2),
            (MISUNDERSTANDING_REPORT, 4),
            (OTHER_CORRECTION, 2),
            (NOT_HELPED, 2),
            (REPAIRED, 2),
            (CAPABILITY_EXPANSION, 10),
            (RECIPIENT_CORRECTION, 8),
        ];
        for (name, n) in expected {
            assert_eq!(by_name(name).added_turn_count(), n, "{name}");
        }
    }

    /// Solving the per-pattern ablation means for the number of added turns
    /// must land on the integer counts above.
    #[test]
    fn added_turn_counts_match_ablation_means() {
        let original = 5.35;
        let dialogs = 304.0;
        let rows = [
            (OPEN_REQUEST_SCREENING, 64.0, 5.77),
            (EXAMPLE_REQUEST, 23.0, 5.5),
            (MISUNDERSTANDING_REPORT, 35.0, 5.81),
            (OTHER_CORRECTION, 24.0, 5.51),
            (NOT_HELPED, 6.0, 5.39),
            (REPAIRED, 139.0, 6.27),
            (CAPABILITY_EXPANSION, 151.0, 10.32),
            (RECIPIENT_CORRECTION, 100.0, 7.99),
        ];
        for (name, updated, mean) in rows {
            let solved: f64 = (mean - original) * dialogs / updated;
            let count = by_name(name).added_turn_count() as f64;
            assert!((solved - count).abs() < 0.05, "{name}: {solved} vs {count}");
        }
    }

    #[test]
    fn templates_alternate() {
        for r in builtin_recipes() {
            for w in r.template.windows(2) {
                assert_ne!(w[0].speaker, w[1].speaker, "{}", r.id);
            }
            let first = r.template[0].speaker;
            let last = r.template.last().unwrap().speaker;
            match r.anchor_kind {
                AnchorKind::BeforeAgentTurn => {
                    assert_eq!(first, Speaker::Agent);
                    assert_eq!(last, Speaker::User);
                }
                _ => {
                    assert_eq!(first, Speaker::User);
                    assert_eq!(last, Speaker::Agent);
                }
            }
        }
    }

    #[test]
    fn dataset_restrictions() {
        assert!(!by_name(USER_DETAIL_REQUEST).applies_to(SourceFormat::Smd));
        assert!(!by_name(EXAMPLE_REQUEST).applies_to(SourceFormat::Babi));
        assert!(!by_name(RECIPIENT_CORRECTION).applies_to(SourceFormat::Babi));
        assert_eq!(
            builtin_recipes()
                .iter()
                .filter(|r| r.applies_to(SourceFormat::Smd))
                .count(),
            8
        );
        assert_eq!(
            builtin_recipes()
                .iter()
                .filter(|r| r.applies_to(SourceFormat::Babi))
                .count(),
            7
        );
    }
}
