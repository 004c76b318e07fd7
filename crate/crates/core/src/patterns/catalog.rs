//! The 32 registered NCF patterns. Nine of them have injection recipes.

use std::fmt;

use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PatternClass {
    /// Conversational activities.
    A,
    /// Sequence-level management.
    B,
    /// Conversation-level management.
    C,
}

impl fmt::Display for PatternClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CatalogEntry {
    pub ncf_code: &'static str,
    pub name: &'static str,
    pub class: PatternClass,
    pub description: &'static str,
    pub has_recipe: bool,
}

use PatternClass::{A, B, C};

const fn entry(
    ncf_code: &'static str,
    name: &'static str,
    class: PatternClass,
    description: &'static str,
    has_recipe: bool,
) -> CatalogEntry {
    CatalogEntry {
        ncf_code,
        name,
        class,
        description,
        has_recipe,
    }
}

pub static CATALOG: [CatalogEntry; 32] = [
    entry(
        "A1.1",
        "inquiry_confirmation",
        A,
        "user confirms an agent inquiry",
        false,
    ),
    entry(
        "A1.2",
        "inquiry_disconfirmation",
        A,
        "user disconfirms an agent inquiry",
        false,
    ),
    entry(
        "A1.3",
        "inquiry_repairs",
        A,
        "user repairs an answer to an agent inquiry",
        false,
    ),
    entry(
        "A2.2",
        "open_request_continuer",
        A,
        "agent prompts the user to continue a request",
        false,
    ),
    entry(
        "A2.3",
        "open_request_screening",
        A,
        "user checks whether the agent can help before the full request",
        true,
    ),
    entry(
        "A2.5",
        "open_request_user_detail_request",
        A,
        "user asks for the options before answering an agent question",
        true,
    ),
    entry(
        "A2.6",
        "open_request_summary",
        A,
        "agent summarizes a multi-part request",
        false,
    ),
    entry(
        "A2.11",
        "open_request_repairs",
        A,
        "repairs within an open request",
        false,
    ),
    entry(
        "A3.0",
        "extended_telling_with_repair",
        A,
        "agent tells in parts and the user repairs one part",
        false,
    ),
    entry(
        "A3.1",
        "extended_telling_abort",
        A,
        "user aborts an extended telling",
        false,
    ),
    entry(
        "B1.2.2",
        "agent_continuer",
        B,
        "agent signals the user to go on",
        false,
    ),
    entry(
        "B2.6.0",
        "example_request",
        B,
        "user asks for an example of what the agent just said",
        true,
    ),
    entry(
        "B3.1.1",
        "misunderstanding_report",
        B,
        "user reports that the agent got the request wrong",
        true,
    ),
    entry(
        "B3.2.0",
        "other_correction",
        B,
        "agent corrects a user slip",
        true,
    ),
    entry(
        "B4.0",
        "sequence_closer_helped",
        B,
        "user closes a sequence that went well",
        false,
    ),
    entry(
        "B4.1",
        "sequence_closer_not_helped",
        B,
        "user closes a sequence that did not help",
        true,
    ),
    entry(
        "B4.2",
        "sequence_closer_appreciation",
        B,
        "user closes a sequence with thanks",
        false,
    ),
    entry(
        "B4.4",
        "sequence_closer_repaired",
        B,
        "user acknowledges a completed repair",
        true,
    ),
    entry(
        "C1.4",
        "opening_welfare_check_agent",
        C,
        "agent asks how the user is",
        false,
    ),
    entry(
        "C1.5",
        "opening_offer_of_help_agent",
        C,
        "agent opens by offering help",
        false,
    ),
    entry(
        "C1.7",
        "organizational_problem_request_agent",
        C,
        "agent asks what the problem is",
        false,
    ),
    entry("C2.1", "summons_user", C, "user summons the agent", false),
    entry(
        "C2.2",
        "welfare_check_user",
        C,
        "user asks how the agent is",
        false,
    ),
    entry(
        "C2.9",
        "name_correction_user",
        C,
        "user corrects the agent's name",
        false,
    ),
    entry(
        "C3.0",
        "general_capability_check",
        C,
        "user asks what the agent can do",
        false,
    ),
    entry(
        "C3.1",
        "capability_expansion",
        C,
        "user asks the agent to expand on a capability it listed",
        true,
    ),
    entry(
        "C3.2",
        "specific_capability_check",
        C,
        "user asks whether the agent can do one thing",
        false,
    ),
    entry(
        "C4.7",
        "closing_success_check_disaffirmed",
        C,
        "user says the agent did not help at closing",
        false,
    ),
    entry(
        "C4.8",
        "closing_success_check_reopened",
        C,
        "user reopens the conversation at closing",
        false,
    ),
    entry(
        "C4.9",
        "closing_offer_affirmed",
        C,
        "user accepts an offer of more help",
        false,
    ),
    entry(
        "C4.10",
        "closing_offer_disaffirmed",
        C,
        "user declines an offer of more help",
        false,
    ),
    entry(
        "C5.2",
        "recipient_correction",
        C,
        "user says the last utterance was meant for someone else",
        true,
    ),
];

/// A catalog pattern, by position in [`CATALOG`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternId(u8);

impl PatternId {
    pub fn from_name(name: &str) -> Option<PatternId> {
        CATALOG
            .iter()
            .position(|e| e.name == name)
            .map(|i| PatternId(i as u8))
    }

    pub fn from_code(code: &str) -> Option<PatternId> {
        CATALOG
            .iter()
            .position(|e| e.ncf_code == code)
            .map(|i| PatternId(i as u8))
    }

    /// Accepts either a name or an NCF code.
    pub fn lookup(s: &str) -> Option<PatternId> {
        PatternId::from_name(s).or_else(|| PatternId::from_code(s))
    }

    pub fn entry(self) -> &'static CatalogEntry {
        &CATALOG[self.0 as usize]
    }

    pub fn name(self) -> &'static str {
        self.entry().name
    }

    pub fn class(self) -> PatternClass {
        self.entry().class
    }

    pub fn ncf_code(self) -> &'static str {
        self.entry().ncf_code
    }

    pub fn all() -> impl Iterator<Item = PatternId> {
        (0..CATALOG.len()).map(|i| PatternId(i as u8))
    }
}

impl fmt::Debug for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PatternId({})", self.name())
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for PatternId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

pub fn list_patterns() -> &'static [CatalogEntry] {
    &CATALOG
}
