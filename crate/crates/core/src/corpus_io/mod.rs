//! Reading and writing corpora, manifests and prediction files.

mod babi;
mod manifest;
mod predictions;
mod pyjson;
mod smd;

use std::path::{Path, PathBuf};

pub use babi::{parse_babi, parse_babi_with_origins, write_origin_sidecar, API_CALL_SLOTS};
pub use manifest::{export_manifest, EvalManifest, ManifestEntry};
pub use predictions::{read_predictions, write_predictions, PredictionSet};
pub use pyjson::JsonStyle;
pub use smd::parse_smd;

use crate::dialog::{DialogCorpus, SourceFormat};
use crate::digest::sha256_hex;
use crate::error::{Error, Result};

/// A file's path and exact contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFile {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl RawFile {
    pub fn read(path: impl AsRef<Path>) -> Result<RawFile> {
        let path = path.as_ref();
        Ok(RawFile {
            path: path.to_path_buf(),
            bytes: std::fs::read(path)?,
        })
    }

    pub fn from_bytes(path: impl Into<PathBuf>, bytes: Vec<u8>) -> RawFile {
        RawFile {
            path: path.into(),
            bytes,
        }
    }

    pub fn checksum(&self) -> String {
        sha256_hex(&self.bytes)
    }
}

pub(crate) fn decode_utf8(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| Error::Utf8 {
        offset: e.valid_up_to(),
    })
}

/// Parses `file` as `format`. `origins` is the bAbI origin sidecar, if any;
/// SMD files carry their origin flags inline.
pub fn parse(format: SourceFormat, file: &RawFile, origins: Option<&str>) -> Result<DialogCorpus> {
    match format {
        SourceFormat::Babi => parse_babi_with_origins(file, origins),
        SourceFormat::Smd => parse_smd(file),
    }
}

pub fn serialize(corpus: &DialogCorpus) -> Vec<u8> {
    match corpus.source_format {
        SourceFormat::Babi => babi::serialize_babi(corpus),
        SourceFormat::Smd => smd::serialize_smd(corpus),
    }
}

/// SHA-256 of the serialized corpus.
pub fn corpus_checksum(corpus: &DialogCorpus) -> String {
    sha256_hex(&serialize(corpus))
}
