use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use url::Url;

use super::{normalize_url, SessionError};
use crate::model::SnippetId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventKind {
    QueryIssued { query: String },
    PageEnter { url: Url },
    PageLeave { url: Url },
    Scroll { url: Url, visible_fraction: f64 },
    SnippetCollected { snippet_id: SnippetId, url: Url },
    Copy { url: Url, text: String },
    ActivityHeartbeat { url: Url },
}

const KNOWN_KINDS: &[&str] =
    &["query_issued", "page_enter", "page_leave", "scroll", "snippet_collected", "copy", "activity_heartbeat"];

impl EventKind {
    pub fn url(&self) -> Option<&Url> {
        match self {
            EventKind::QueryIssued { .. } => None,
            EventKind::PageEnter { url }
            | EventKind::PageLeave { url }
            | EventKind::Scroll { url, .. }
            | EventKind::SnippetCollected { url, .. }
            | EventKind::Copy { url, .. }
            | EventKind::ActivityHeartbeat { url } => Some(url),
        }
    }
}

/// One timestamped author activity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub at: DateTime<Utc>,
    #[serde(flatten)]
    pub kind: EventKind,
    /// Set on page leaves inserted while balancing enter/leave pairs.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub synthetic: bool,
}

impl SessionEvent {
    pub fn new(at: DateTime<Utc>, kind: EventKind) -> Self {
        Self { at, kind, synthetic: false }
    }
}

/// Time-sorted, enter/leave-balanced author activity.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionLog {
    pub events: Vec<SessionEvent>,
}

impl SessionLog {
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    /// Serializes the log back to the line-oriented file format.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalformedEvent {
    /// 1-based line number in the input.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOutcome {
    pub log: SessionLog,
    pub malformed: Vec<MalformedEvent>,
    pub skipped_unknown: usize,
    /// Page leaves that matched no open page and were dropped.
    pub dropped_leaves: usize,
}

/// Parses a JSON-lines activity log.
///
/// Malformed lines are collected, unknown event kinds are skipped and
/// counted. Events are stably sorted by time and page enter/leave pairs are
/// balanced: an enter while another page is open closes the open page at the
/// new enter's time, and a page still open at the end is closed at the last
/// event's time.
pub fn ingest_session_log(raw: &str) -> Result<IngestOutcome, SessionError> {
    let mut events = Vec::new();
    let mut malformed = Vec::new();
    let mut skipped_unknown = 0;

    for (idx, line) in raw.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => {
                malformed.push(MalformedEvent { line: line_no, reason: e.to_string() });
                continue;
            }
        };
        match value.get("kind").and_then(|k| k.as_str()) {
            Some(kind) if KNOWN_KINDS.contains(&kind) => {}
            Some(_) => {
                skipped_unknown += 1;
                continue;
            }
            None => {
                malformed.push(MalformedEvent { line: line_no, reason: "missing event kind".into() });
                continue;
            }
        }
        match serde_json::from_value::<SessionEvent>(value) {
            Ok(mut event) => {
                if let EventKind::Scroll { visible_fraction, .. } = event.kind {
                    if !(0.0..=1.0).contains(&visible_fraction) {
                        malformed.push(MalformedEvent {
                            line: line_no,
                            reason: format!("visible_fraction {visible_fraction} outside [0, 1]"),
                        });
                        continue;
                    }
                }
                event.synthetic = false;
                events.push(event);
            }
            Err(e) => malformed.push(MalformedEvent { line: line_no, reason: e.to_string() }),
        }
    }

    if events.is_empty() {
        return Err(SessionError::EmptyLog { malformed });
    }

    events.sort_by_key(|e| e.at);
    let (events, dropped_leaves) = balance_pages(events);
    Ok(IngestOutcome { log: SessionLog { events }, malformed, skipped_unknown, dropped_leaves })
}

fn balance_pages(events: Vec<SessionEvent>) -> (Vec<SessionEvent>, usize) {
    let mut out = Vec::with_capacity(events.len() + 2);
    let mut open: Option<Url> = None;
    let mut dropped = 0;
    for event in events {
        match &event.kind {
            EventKind::PageEnter { .. } => {
                if let Some(prev) = open.take() {
                    out.push(SessionEvent { at: event.at, kind: EventKind::PageLeave { url: prev }, synthetic: true });
                }
                open = event.kind.url().cloned();
                out.push(event);
            }
            EventKind::PageLeave { url } => {
                let matches = open.as_ref().is_some_and(|o| normalize_url(o) == normalize_url(url));
                if matches {
                    open = None;
                    out.push(event);
                } else {
                    dropped += 1;
                }
            }
            _ => out.push(event),
        }
    }
    if let Some(prev) = open {
        let at = out.last().map(|e| e.at).expect("non-empty");
        out.push(SessionEvent { at, kind: EventKind::PageLeave { url: prev }, synthetic: true });
    }
    (out, dropped)
}
