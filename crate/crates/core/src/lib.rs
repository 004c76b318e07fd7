//! Injection of naturalistic conversation-management patterns into
//! goal-oriented dialog test sets (bAbI dialog task and SMD formats), with
//! lossless corpus I/O, seeded planning, corpus statistics and a masked
//! evaluation protocol.
//!
//! The crate is organised bottom-up:
//!
//! * [`dialog`]: the in-memory dialog model shared by everything else.
//! * [`corpus_io`]: parsers/serializers, evaluation manifests, predictions.
//! * [`patterns`]: pattern catalog, injection recipes, phrase banks.
//! * [`planner`]: seeded selection of injection sites, ablations, review.
//! * [`metrics`]: BLEU, entity F1, response accuracy and comparisons.
//! * [`baseline`]: a TF-IDF retrieval responder for end-to-end runs.
//! * [`stats`]: corpus statistics.

pub mod baseline;
pub mod corpus_io;
pub mod dialog;
pub mod digest;
pub mod error;
pub mod metrics;
pub mod patterns;
pub mod planner;
pub mod stats;

pub use dialog::{
    Dialog, DialogCorpus, Domain, KbEntry, KbRecord, Origin, SourceFormat, Speaker, Turn,
};
pub use error::{Error, Result};
pub use patterns::{PatternEngine, PatternId};
