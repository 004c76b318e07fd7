use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// One pattern whose planning target could not be met.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Shortfall {
    pub pattern: String,
    pub target: usize,
    pub eligible: usize,
}

impl fmt::Display for Shortfall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: eligible {} < target {}",
            self.pattern, self.eligible, self.target
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty entity")]
    EmptyEntity,

    #[error("bAbI parse error at line {line}: {msg}")]
    BabiParse { line: usize, msg: String },

    #[error("SMD parse error in dialog {index}: {msg}")]
    SmdParse { index: usize, msg: String },

    #[error("origin sidecar error at line {line}: {msg}")]
    Sidecar { line: usize, msg: String },

    #[error("manifest parse error at line {line}: {msg}")]
    Manifest { line: usize, msg: String },

    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("expected {expected} predictions, got {got}")]
    PredictionCount { expected: usize, got: usize },

    #[error("invalid UTF-8 at byte offset {offset}")]
    Utf8 { offset: usize },

    #[error("invalid anchor: {0}")]
    InvalidAnchor(String),

    #[error("unresolvable realization slot `{0}`")]
    UnresolvedSlot(String),

    #[error("pattern already applied at anchor")]
    AlreadyApplied,

    #[error("no phrase bank entry for {pattern}/{action}/{domain}")]
    MissingPhrase {
        pattern: String,
        action: String,
        domain: String,
    },

    #[error("phrase bank: {0}")]
    PhraseBank(String),

    #[error("unknown pattern `{0}`")]
    UnknownPattern(String),

    #[error("pattern {pattern} not applicable to {format}")]
    NotApplicable { pattern: String, format: String },

    #[error("plan config: {0}")]
    Config(String),

    #[error("eligibility shortfall: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Shortfall(Vec<Shortfall>),

    #[error("plan/corpus mismatch")]
    PlanMismatch,

    #[error("predictions were aligned to a different manifest (digest mismatch)")]
    DigestMismatch,

    #[error("empty lexicon")]
    EmptyLexicon,

    #[error("no updated dialogs to review")]
    NoUpdatedDialogs,

    #[error("review fraction must be in (0, 1], got {0}")]
    BadFraction(f64),

    #[error("empty candidate set")]
    EmptyCandidates,

    #[error("report: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
