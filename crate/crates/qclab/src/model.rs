//! Versioned JSON model container.

use std::path::Path;

use qclab_core::{HierarchicalClassifier, Taxonomy};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::{read_text, write_atomic};

pub const MAGIC: &str = "qclab-model";
pub const VERSION: u32 = 1;

#[derive(Deserialize)]
struct Header {
    magic: Option<String>,
    version: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    magic: String,
    version: u32,
    classifier: HierarchicalClassifier,
}

pub fn to_json(model: &HierarchicalClassifier) -> Result<String> {
    let finite = model
        .ensembles
        .iter()
        .all(|e| e.models.iter().all(|m| m.model.is_finite()));
    if !finite {
        return Err(Error::Internal("model has non-finite weights".into()));
    }
    let file = ModelFile {
        magic: MAGIC.into(),
        version: VERSION,
        classifier: model.clone(),
    };
    let mut s = serde_json::to_string(&file).map_err(|e| Error::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn save(path: &Path, model: &HierarchicalClassifier) -> Result<()> {
    write_atomic(path, to_json(model)?.as_bytes())
}

pub fn from_json(path: &Path, text: &str) -> Result<HierarchicalClassifier> {
    let err = |message: String| Error::Model {
        path: path.to_path_buf(),
        message,
    };
    let header: Header =
        serde_json::from_str(text).map_err(|e| err(format!("corrupt model file: {e}")))?;
    if header.magic.as_deref() != Some(MAGIC) {
        return Err(err("not a qclab model file (bad magic)".into()));
    }
    match header.version {
        Some(VERSION) => {}
        Some(v) => return Err(err(format!("model format version {v}, expected {VERSION}"))),
        None => return Err(err("model file has no version".into())),
    }
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| err(format!("corrupt model file: {e}")))?;
    Ok(file.classifier)
}

pub fn load(path: &Path) -> Result<HierarchicalClassifier> {
    from_json(path, &read_text(path)?)
}

/// A model trained against another taxonomy is a warning, or an error
/// when `strict`.
pub fn check_taxonomy(
    path: &Path,
    model: &HierarchicalClassifier,
    taxonomy: &Taxonomy,
    strict: bool,
) -> Result<()> {
    let have = taxonomy.fingerprint();
    if model.taxonomy_hash == have {
        return Ok(());
    }
    let message = format!(
        "model was trained on taxonomy {:016x}, current taxonomy is {have:016x}",
        model.taxonomy_hash
    );
    if strict {
        return Err(Error::Model {
            path: path.to_path_buf(),
            message,
        });
    }
    log::warn!("{}: {message}", path.display());
    Ok(())
}
