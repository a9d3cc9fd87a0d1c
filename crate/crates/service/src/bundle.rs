//! Importing a captured table bundle:
//!
//! ```text
//! <bundle>/table.json           KnowledgeTable (its id is replaced)
//! <bundle>/snippets/*.json      one Snippet per file
//! <bundle>/session.log          JSON-lines activity log (optional)
//! <bundle>/pages/*.json         CapturedPage per source page (optional)
//! <bundle>/fixtures/            canned external responses (optional)
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::Value;
use sha2::{Digest, Sha256};
use tablecheck_core::enrich::{enrich_snippet, CapturedPage, DetectorRegistry};
use tablecheck_core::session::{ingest_session_log, normalize_url, SessionLog};
use tablecheck_core::{validate_table, KnowledgeTable, Snippet, SnippetStore, TableId, ThresholdConfig, Violation};

use crate::store::{Store, StoreError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportOutcome {
    pub table_id: TableId,
    pub snippet_count: usize,
    pub has_session_log: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ImportError {
    #[error("{}: {reason}", path.display())]
    File { path: PathBuf, reason: String },
    #[error("{}: invalid table: {}", path.display(), violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid { path: PathBuf, violations: Vec<Violation> },
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn file_err(path: &Path, reason: impl ToString) -> ImportError {
    ImportError::File { path: path.to_path_buf(), reason: reason.to_string() }
}

fn read_doc<T: DeserializeOwned>(path: &Path) -> Result<T, ImportError> {
    let bytes = fs::read(path).map_err(|e| file_err(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| file_err(path, e))
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>, ImportError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| file_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn fixture_files(dir: &Path, base: &Path, out: &mut Vec<(String, Vec<u8>)>) -> Result<(), ImportError> {
    for entry in fs::read_dir(dir).map_err(|e| file_err(dir, e))? {
        let path = entry.map_err(|e| file_err(dir, e))?.path();
        if path.is_dir() {
            fixture_files(&path, base, out)?;
        } else {
            let rel = path.strip_prefix(base).expect("walked from base").to_string_lossy().replace('\\', "/");
            out.push((rel, fs::read(&path).map_err(|e| file_err(&path, e))?));
        }
    }
    Ok(())
}

/// Parsed, not yet enriched bundle contents.
struct Bundle {
    table: KnowledgeTable,
    snippets: Vec<(PathBuf, Snippet)>,
    pages: Vec<CapturedPage>,
    log: Option<SessionLog>,
    fixtures: Option<PathBuf>,
    fixture_bytes: Vec<(String, Vec<u8>)>,
    warnings: Vec<String>,
}

fn read_bundle(dir: &Path) -> Result<Bundle, ImportError> {
    if !dir.is_dir() {
        return Err(file_err(dir, "bundle is not a directory"));
    }
    let table: KnowledgeTable = read_doc(&dir.join("table.json"))?;

    let snippet_dir = dir.join("snippets");
    if !snippet_dir.is_dir() {
        return Err(file_err(&snippet_dir, "missing snippets directory"));
    }
    let mut snippets = Vec::new();
    let mut seen: BTreeMap<String, PathBuf> = BTreeMap::new();
    for path in json_files(&snippet_dir)? {
        let snippet: Snippet = read_doc(&path)?;
        if let Some(first) = seen.insert(snippet.id.to_string(), path.clone()) {
            return Err(file_err(&path, format!("snippet id {:?} already defined in {}", snippet.id.as_str(), first.display())));
        }
        snippets.push((path, snippet));
    }

    let page_dir = dir.join("pages");
    let mut pages = Vec::new();
    if page_dir.is_dir() {
        for path in json_files(&page_dir)? {
            pages.push(read_doc::<CapturedPage>(&path)?);
        }
    }
    pages.sort_by(|a, b| a.url.as_str().cmp(b.url.as_str()));

    let mut warnings = Vec::new();
    let log_path = dir.join("session.log");
    let log = if log_path.is_file() {
        let raw = fs::read_to_string(&log_path).map_err(|e| file_err(&log_path, e))?;
        match ingest_session_log(&raw) {
            Ok(outcome) => {
                for m in &outcome.malformed {
                    warnings.push(format!("session.log line {}: {}", m.line, m.reason));
                }
                if outcome.skipped_unknown > 0 {
                    warnings.push(format!("session.log: skipped {} events of unknown kind", outcome.skipped_unknown));
                }
                Some(outcome.log)
            }
            Err(e) => return Err(file_err(&log_path, e)),
        }
    } else {
        warnings.push("no session.log; research process shown as no activity data".into());
        None
    };

    let fixture_dir = dir.join("fixtures");
    let mut fixture_bytes = Vec::new();
    let fixtures = if fixture_dir.is_dir() {
        fixture_files(&fixture_dir, &fixture_dir, &mut fixture_bytes)?;
        fixture_bytes.sort();
        Some(fixture_dir)
    } else {
        None
    };

    Ok(Bundle { table, snippets, pages, log, fixtures, fixture_bytes, warnings })
}

/// Content-derived table id: identical bundle content yields the same id
/// regardless of the id written in table.json or file names.
fn content_id(b: &Bundle) -> TableId {
    let mut table = serde_json::to_value(&b.table).expect("table serializes");
    if let Value::Object(m) = &mut table {
        m.remove("id");
    }
    let mut snippets: Vec<&Snippet> = b.snippets.iter().map(|(_, s)| s).collect();
    snippets.sort_by(|a, c| a.id.cmp(&c.id));
    let doc = serde_json::json!({
        "table": table,
        "snippets": snippets,
        "pages": b.pages,
        "session": b.log,
    });
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&doc).expect("serializes"));
    for (name, bytes) in &b.fixture_bytes {
        h.update(name.as_bytes());
        h.update([0]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    TableId::new(format!("t-{}", &hex::encode(h.finalize())[..16]))
}

/// Validates, enriches and stores a bundle. Re-importing identical content
/// yields the same id and rewrites identical documents.
pub fn import_bundle(
    store: &Store,
    dir: &Path,
    registry: &DetectorRegistry,
    cfg: &ThresholdConfig,
) -> Result<ImportOutcome, ImportError> {
    let mut bundle = read_bundle(dir)?;
    let id = content_id(&bundle);

    let pages: BTreeMap<String, &CapturedPage> = bundle.pages.iter().map(|p| (normalize_url(&p.url), p)).collect();
    let mut snippets = SnippetStore::new();
    for (path, mut snippet) in std::mem::take(&mut bundle.snippets) {
        let page = pages.get(&normalize_url(&snippet.source_url)).copied();
        let notes = enrich_snippet(&mut snippet, page, registry, cfg).map_err(|e| file_err(&path, e))?;
        bundle.warnings.extend(notes.warnings);
        snippets.insert(snippet);
    }

    let validation = validate_table(&bundle.table, &snippets);
    if !validation.is_ok() {
        return Err(ImportError::Invalid { path: dir.join("table.json"), violations: validation.violations });
    }

    bundle.table.id = id.clone();
    store.put_fixtures(&id, bundle.fixtures.as_deref())?;
    store.put_table(&bundle.table, &snippets, bundle.log.as_ref())?;
    Ok(ImportOutcome {
        table_id: id,
        snippet_count: snippets.len(),
        has_session_log: bundle.log.is_some(),
        warnings: bundle.warnings,
    })
}
