use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use url::Url;

use super::{normalize_url, EventKind, SessionLog};
use crate::model::SnippetId;

pub const NO_QUERY_LABEL: &str = "(no query)";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageNode {
    pub url: Url,
    pub entered_at: DateTime<Utc>,
    pub shade_index: usize,
    pub snippet_ids: Vec<SnippetId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryNode {
    /// `None` for the synthetic node grouping pages visited before any query.
    pub query: Option<String>,
    pub label: String,
    pub at: DateTime<Utc>,
    pub shade_index: usize,
    pub pages: Vec<PageNode>,
}

/// Queries, each with the pages entered during its span. Shade indices
/// number every node chronologically from 0 (lower = older).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeline {
    pub entries: Vec<QueryNode>,
}

impl Timeline {
    pub fn node_count(&self) -> usize {
        self.entries.iter().map(|q| 1 + q.pages.len()).sum()
    }

    /// Shade index of the page node on which `snippet` was collected.
    pub fn shade_of_snippet(&self, snippet: &SnippetId) -> Option<usize> {
        self.entries.iter().flat_map(|q| &q.pages).find(|p| p.snippet_ids.contains(snippet)).map(|p| p.shade_index)
    }
}

pub fn build_timeline(log: &SessionLog) -> Timeline {
    let mut entries: Vec<QueryNode> = Vec::new();
    let mut next_shade = 0;
    // (query index, page index) of the currently open page
    let mut open_page: Option<(usize, usize)> = None;

    for event in &log.events {
        match &event.kind {
            EventKind::QueryIssued { query } => {
                entries.push(QueryNode {
                    query: Some(query.clone()),
                    label: query.clone(),
                    at: event.at,
                    shade_index: next_shade,
                    pages: vec![],
                });
                next_shade += 1;
            }
            EventKind::PageEnter { url } => {
                if entries.is_empty() {
                    entries.push(QueryNode {
                        query: None,
                        label: NO_QUERY_LABEL.to_string(),
                        at: event.at,
                        shade_index: next_shade,
                        pages: vec![],
                    });
                    next_shade += 1;
                }
                let qi = entries.len() - 1;
                entries[qi].pages.push(PageNode {
                    url: url.clone(),
                    entered_at: event.at,
                    shade_index: next_shade,
                    snippet_ids: vec![],
                });
                next_shade += 1;
                open_page = Some((qi, entries[qi].pages.len() - 1));
            }
            EventKind::PageLeave { .. } => open_page = None,
            EventKind::SnippetCollected { snippet_id, url } => {
                let key = normalize_url(url);
                let target = open_page
                    .filter(|&(qi, pi)| normalize_url(&entries[qi].pages[pi].url) == key)
                    .or_else(|| latest_page_with(&entries, &key));
                if let Some((qi, pi)) = target {
                    entries[qi].pages[pi].snippet_ids.push(snippet_id.clone());
                }
            }
            _ => {}
        }
    }
    Timeline { entries }
}

fn latest_page_with(entries: &[QueryNode], key: &str) -> Option<(usize, usize)> {
    entries
        .iter()
        .enumerate()
        .rev()
        .find_map(|(qi, q)| q.pages.iter().rposition(|p| normalize_url(&p.url) == key).map(|pi| (qi, pi)))
}
