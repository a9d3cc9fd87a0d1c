//! Author activity analytics: log ingestion, effective (idle-clamped)
//! durations, per-query and per-page statistics, the two-level timeline,
//! the chosen-option heuristic and the task summary.

mod log;
mod stats;
mod timeline;

pub use log::{ingest_session_log, EventKind, IngestOutcome, MalformedEvent, SessionEvent, SessionLog};
pub use stats::{
    effective_duration, infer_chosen_option, page_stats, query_stats, sort_query_stats, task_summary, ChosenOption, PageStat,
    QueryOrder, QueryStat, TaskSummary,
};
pub use timeline::{build_timeline, PageNode, QueryNode, Timeline, NO_QUERY_LABEL};

use url::Url;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("session log contains no parseable events")]
    EmptyLog { malformed: Vec<MalformedEvent> },
    #[error("reference time precedes the latest table or activity timestamp")]
    NowBeforeData,
}

/// URL identity used for matching events and snippets: lowercased host,
/// fragment removed.
pub fn normalize_url(url: &Url) -> String {
    let mut u = url.clone();
    u.set_fragment(None);
    if let Some(host) = u.host_str().map(str::to_ascii_lowercase) {
        let _ = u.set_host(Some(&host));
    }
    u.to_string()
}

/// Serde helper: `TimeDelta` as integer milliseconds.
pub(crate) mod millis {
    use chrono::TimeDelta;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &TimeDelta, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(d.num_milliseconds())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<TimeDelta, D::Error> {
        Ok(TimeDelta::milliseconds(i64::deserialize(d)?))
    }
}
