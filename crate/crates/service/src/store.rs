//! Directory-of-JSON document store.
//!
//! ```text
//! <root>/tables/<table-id>.json       KnowledgeTable
//! <root>/snippets/<table-id>.json     enriched snippets, sorted by id
//! <root>/sessions/<table-id>.json     balanced session log (absent if none)
//! <root>/fixtures/<table-id>/         canned external responses from the bundle
//! <root>/consumers/<sha256>.json      ConsumerState per consumer id
//! ```
//!
//! Every document write goes to a temporary file in the target directory
//! and is renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use tablecheck_core::appraisal::ConsumerState;
use tablecheck_core::session::SessionLog;
use tablecheck_core::{KnowledgeTable, Snippet, SnippetStore, TableId};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {reason}", path.display())]
    Corrupt { path: PathBuf, reason: String },
    #[error("unknown table {0:?}")]
    UnknownTable(String),
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

/// Table ids become file names, so only a conservative alphabet is accepted.
pub fn is_valid_table_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

pub fn consumer_key(consumer_id: &str) -> String {
    hex::encode(Sha256::digest(consumer_id.as_bytes()))
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for dir in ["tables", "snippets", "sessions", "fixtures", "consumers"] {
            let p = root.join(dir);
            fs::create_dir_all(&p).map_err(io(&p))?;
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn doc(&self, dir: &str, id: &str) -> PathBuf {
        self.root.join(dir).join(format!("{id}.json"))
    }

    fn checked(&self, id: &str) -> Result<(), StoreError> {
        if is_valid_table_id(id) {
            Ok(())
        } else {
            Err(StoreError::UnknownTable(id.to_string()))
        }
    }

    pub fn fixtures_dir(&self, id: &TableId) -> PathBuf {
        self.root.join("fixtures").join(id.as_str())
    }

    pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
        let mut bytes = serde_json::to_vec_pretty(value)
            .map_err(|e| StoreError::Corrupt { path: path.to_path_buf(), reason: e.to_string() })?;
        bytes.push(b'\n');
        let dir = path.parent().expect("documents live in a directory");
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(dir))?;
        tmp.write_all(&bytes).map_err(io(path))?;
        tmp.as_file().sync_all().map_err(io(path))?;
        tmp.persist(path).map_err(|e| StoreError::Io { path: path.to_path_buf(), source: e.error })?;
        Ok(())
    }

    fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Option<T>, StoreError> {
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(io(path)(e)),
        };
        serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|e| StoreError::Corrupt { path: path.to_path_buf(), reason: e.to_string() })
    }

    pub fn put_table(&self, table: &KnowledgeTable, snippets: &SnippetStore, log: Option<&SessionLog>) -> Result<(), StoreError> {
        let id = table.id.as_str();
        self.checked(id)?;
        Self::write_json(&self.doc("snippets", id), snippets)?;
        let session = self.doc("sessions", id);
        match log {
            Some(log) => Self::write_json(&session, log)?,
            None => match fs::remove_file(&session) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => return Err(io(&session)(e)),
            },
        }
        // The table document goes last so a reader never sees a table
        // without its snippets.
        Self::write_json(&self.doc("tables", id), table)
    }

    /// Replaces the fixture directory of a table with a copy of `src`.
    pub fn put_fixtures(&self, id: &TableId, src: Option<&Path>) -> Result<(), StoreError> {
        let dest = self.fixtures_dir(id);
        if dest.exists() {
            fs::remove_dir_all(&dest).map_err(io(&dest))?;
        }
        if let Some(src) = src {
            copy_dir(src, &dest)?;
        }
        Ok(())
    }

    pub fn table(&self, id: &str) -> Result<KnowledgeTable, StoreError> {
        self.checked(id)?;
        Self::read_json(&self.doc("tables", id))?.ok_or_else(|| StoreError::UnknownTable(id.to_string()))
    }

    pub fn snippets(&self, id: &str) -> Result<SnippetStore, StoreError> {
        self.checked(id)?;
        Ok(Self::read_json::<Vec<Snippet>>(&self.doc("snippets", id))?.unwrap_or_default().into_iter().collect())
    }

    pub fn session(&self, id: &str) -> Result<Option<SessionLog>, StoreError> {
        self.checked(id)?;
        Self::read_json(&self.doc("sessions", id))
    }

    /// Stored table ids, sorted.
    pub fn table_ids(&self) -> Result<Vec<String>, StoreError> {
        let dir = self.root.join("tables");
        let mut ids: Vec<String> = fs::read_dir(&dir)
            .map_err(io(&dir))?
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().to_str().and_then(|n| n.strip_suffix(".json")).map(str::to_string))
            .filter(|id| is_valid_table_id(id))
            .collect();
        ids.sort();
        Ok(ids)
    }

    pub fn consumer(&self, consumer_id: &str) -> Result<ConsumerState, StoreError> {
        Ok(Self::read_json(&self.doc("consumers", &consumer_key(consumer_id)))?.unwrap_or_default())
    }

    pub fn put_consumer(&self, consumer_id: &str, state: &ConsumerState) -> Result<(), StoreError> {
        Self::write_json(&self.doc("consumers", &consumer_key(consumer_id)), state)
    }
}

fn copy_dir(src: &Path, dest: &Path) -> Result<(), StoreError> {
    fs::create_dir_all(dest).map_err(io(dest))?;
    for entry in fs::read_dir(src).map_err(io(src))? {
        let entry = entry.map_err(io(src))?;
        let from = entry.path();
        let to = dest.join(entry.file_name());
        let kind = entry.file_type().map_err(io(&from))?;
        if kind.is_dir() {
            copy_dir(&from, &to)?;
        } else if kind.is_file() {
            fs::copy(&from, &to).map_err(io(&from))?;
        }
    }
    Ok(())
}
