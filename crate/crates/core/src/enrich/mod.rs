//! Per-snippet enrichment from the captured source page.

pub mod code;
pub mod dates;
pub mod detect;
pub mod domain;
pub mod popularity;
pub mod qa;
pub mod snapshot;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use url::Url;

pub use code::extract_code_examples;
pub use dates::extract_last_updated;
pub use detect::{detect_platforms, Detector, DetectorRegistry, RegistryError, RegistryProblem};
pub use domain::{domain_of, extract_domain, normalize_domain_input, registrable_domain, DomainError};
pub use popularity::extract_popularity;
pub use snapshot::{capture_bounded_snapshot, capture_snapshot, SnapshotError};

use crate::html::Document;
use crate::model::{DetectionSource, DetectorCategory, EnrichmentSignals, Snippet, ThresholdConfig};

/// The page a snippet was collected from, as captured by the client.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapturedPage {
    pub url: Url,
    pub captured_at: DateTime<Utc>,
    pub html: String,
    /// HTTP `Last-Modified`, when the client recorded it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_modified: Option<DateTime<Utc>>,
}

/// Non-fatal problems met while enriching one snippet.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrichNotes {
    pub warnings: Vec<String>,
}

/// Computes [`EnrichmentSignals`] for `snippet`, filling in its snapshot
/// from `page` when it has none. Without a page only the domain, keyword
/// detections and code examples inside the snippet are available.
pub fn enrich_snippet(
    snippet: &mut Snippet,
    page: Option<&CapturedPage>,
    registry: &DetectorRegistry,
    cfg: &ThresholdConfig,
) -> Result<EnrichNotes, DomainError> {
    let mut notes = EnrichNotes::default();
    snippet.ensure_plain_text();
    let domain = domain_of(&snippet.source_url)?;
    let doc = page.map(|p| Document::parse(&p.html));

    if snippet.context_snapshot.is_none() {
        if let Some(doc) = &doc {
            match capture_snapshot(doc, &snippet.source_url, &domain, &snippet.plain_text) {
                Ok(s) => snippet.context_snapshot = Some(s),
                Err(e) => notes.warnings.push(format!("snippet {}: no context snapshot: {e}", snippet.id)),
            }
        }
    }

    let parent_text = match (&doc, &snippet.context_snapshot) {
        (Some(doc), _) => Some(doc.text()),
        (None, Some(s)) => Some(Document::parse(&s.surroundings).text()),
        (None, None) => None,
    };
    let detections = detect_platforms(snippet, parent_text.as_deref(), registry, cfg);

    let (last_updated, popularity) = match (&doc, page) {
        (Some(doc), Some(page)) => (
            extract_last_updated(
                doc,
                &snippet.source_url,
                &domain,
                &snippet.plain_text,
                page.captured_at.max(snippet.collected_at),
                page.last_modified,
            ),
            extract_popularity(doc, &snippet.source_url, &domain, &snippet.plain_text),
        ),
        _ => (None, None),
    };

    let language = detections
        .iter()
        .find(|d| d.category == DetectorCategory::Language && d.source == DetectionSource::Snippet)
        .or_else(|| detections.iter().find(|d| d.category == DetectorCategory::Language))
        .map(|d| d.detector_name.clone());
    let code_examples = extract_code_examples(
        &snippet.id,
        &snippet.content,
        snippet.context_snapshot.as_ref().map(|s| s.surroundings.as_str()),
        language.as_deref(),
    );

    snippet.enrichment = Some(EnrichmentSignals { domain, detections, last_updated, popularity, code_examples });
    Ok(notes)
}
