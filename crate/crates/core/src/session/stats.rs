use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};
use url::Url;

use super::{millis, normalize_url, EventKind, SessionError, SessionEvent, SessionLog};
use crate::model::{KnowledgeTable, OptionId, SnippetStore, ThresholdConfig};

/// Activity time of a time-sorted segment: the sum over consecutive gaps of
/// `min(gap, idle_threshold)`. A single event (or none) yields zero.
pub fn effective_duration(segment: &[SessionEvent], cfg: &ThresholdConfig) -> TimeDelta {
    let idle = cfg.idle_threshold();
    segment.windows(2).map(|w| (w[1].at - w[0].at).max(TimeDelta::zero()).min(idle)).fold(TimeDelta::zero(), |acc, g| acc + g)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryStat {
    pub query: String,
    /// Chronological index, starting at 0.
    pub ordinal: usize,
    pub issued_at: DateTime<Utc>,
    #[serde(rename = "effective_duration_ms", with = "millis")]
    pub effective_duration: TimeDelta,
    pub snippet_count: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryOrder {
    /// Most snippets first, ties in chronological order.
    #[default]
    SnippetCount,
    Chronological,
    /// Longest first, ties in chronological order.
    Duration,
}

pub fn sort_query_stats(stats: &mut [QueryStat], order: QueryOrder) {
    match order {
        QueryOrder::SnippetCount => stats.sort_by(|a, b| b.snippet_count.cmp(&a.snippet_count).then(a.ordinal.cmp(&b.ordinal))),
        QueryOrder::Chronological => stats.sort_by_key(|s| s.ordinal),
        QueryOrder::Duration => {
            stats.sort_by(|a, b| b.effective_duration.cmp(&a.effective_duration).then(a.ordinal.cmp(&b.ordinal)))
        }
    }
}

fn query_positions(log: &SessionLog) -> Vec<usize> {
    log.events.iter().enumerate().filter(|(_, e)| matches!(e.kind, EventKind::QueryIssued { .. })).map(|(i, _)| i).collect()
}

/// One entry per issued query, in the default (snippet count) order.
///
/// A query's span is half-open: from its event up to the next query (or the
/// end of the log). Its duration additionally counts the gap up to the next
/// query's timestamp.
pub fn query_stats(log: &SessionLog, cfg: &ThresholdConfig) -> Vec<QueryStat> {
    let positions = query_positions(log);
    let mut stats = Vec::with_capacity(positions.len());
    for (ordinal, &start) in positions.iter().enumerate() {
        let next = positions.get(ordinal + 1).copied();
        let span_end = next.unwrap_or(log.events.len());
        let duration_end = next.map(|n| n + 1).unwrap_or(log.events.len());
        let EventKind::QueryIssued { query } = &log.events[start].kind else {
            unreachable!("position points at a query");
        };
        let snippet_count =
            log.events[start..span_end].iter().filter(|e| matches!(e.kind, EventKind::SnippetCollected { .. })).count();
        stats.push(QueryStat {
            query: query.clone(),
            ordinal,
            issued_at: log.events[start].at,
            effective_duration: effective_duration(&log.events[start..duration_end], cfg),
            snippet_count,
        });
    }
    sort_query_stats(&mut stats, QueryOrder::SnippetCount);
    stats
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageStat {
    pub url: Url,
    pub visits: usize,
    #[serde(rename = "effective_duration_ms", with = "millis")]
    pub effective_duration: TimeDelta,
    pub max_scroll: f64,
    pub snippet_count: usize,
}

/// Index pairs (enter, leave) for every page visit in a balanced log.
pub(crate) fn visits(log: &SessionLog) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut open: Option<(usize, String)> = None;
    for (i, e) in log.events.iter().enumerate() {
        match &e.kind {
            EventKind::PageEnter { url } => {
                if let Some((start, _)) = open.take() {
                    out.push((start, i));
                }
                open = Some((i, normalize_url(url)));
            }
            EventKind::PageLeave { url } => {
                if let Some((start, key)) = open.take() {
                    if key == normalize_url(url) {
                        out.push((start, i));
                    } else {
                        open = Some((start, key));
                    }
                }
            }
            _ => {}
        }
    }
    if let Some((start, _)) = open {
        out.push((start, log.events.len().saturating_sub(1)));
    }
    out
}

/// One entry per distinct visited URL, ordered by first visit.
pub fn page_stats(log: &SessionLog, cfg: &ThresholdConfig) -> Vec<PageStat> {
    let mut order: Vec<String> = Vec::new();
    let mut by_url: HashMap<String, PageStat> = HashMap::new();
    for (enter, leave) in visits(log) {
        let url = log.events[enter].kind.url().expect("enter has url").clone();
        let key = normalize_url(&url);
        let stat = by_url.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            PageStat { url, visits: 0, effective_duration: TimeDelta::zero(), max_scroll: 0.0, snippet_count: 0 }
        });
        stat.visits += 1;
        stat.effective_duration += effective_duration(&log.events[enter..=leave], cfg);
    }
    for e in &log.events {
        match &e.kind {
            EventKind::Scroll { url, visible_fraction } => {
                if let Some(stat) = by_url.get_mut(&normalize_url(url)) {
                    stat.max_scroll = stat.max_scroll.max(*visible_fraction);
                }
            }
            EventKind::SnippetCollected { url, .. } => {
                if let Some(stat) = by_url.get_mut(&normalize_url(url)) {
                    stat.snippet_count += 1;
                }
            }
            _ => {}
        }
    }
    order.into_iter().map(|k| by_url.remove(&k).expect("inserted")).collect()
}

/// Result of the copy-event heuristic. The confidence is the chosen option's
/// share of all option attributions; it is a heuristic, not a probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChosenOption {
    pub option_id: OptionId,
    pub confidence: f64,
    pub attributed_copies: usize,
    pub total_attributions: usize,
}

/// Attributes each copy event to every option whose row holds a snippet
/// sourced from the copied page, then picks the option with the most
/// attributions. Ties go to the option listed first in the table.
pub fn infer_chosen_option(log: &SessionLog, table: &KnowledgeTable, snippets: &SnippetStore) -> Option<ChosenOption> {
    let mut pages_by_option: BTreeMap<&OptionId, Vec<String>> = BTreeMap::new();
    for (cell, sid) in table.placements() {
        if let Some(s) = snippets.get(sid) {
            pages_by_option.entry(&cell.option).or_default().push(normalize_url(&s.source_url));
        }
    }

    let mut counts: HashMap<&OptionId, usize> = HashMap::new();
    let mut total = 0;
    for e in &log.events {
        let EventKind::Copy { url, .. } = &e.kind else { continue };
        let key = normalize_url(url);
        for (option, pages) in &pages_by_option {
            if pages.contains(&key) {
                *counts.entry(option).or_default() += 1;
                total += 1;
            }
        }
    }
    if total == 0 {
        return None;
    }

    let mut best: Option<(&OptionId, usize)> = None;
    for option in &table.options {
        let n = counts.get(&option.id).copied().unwrap_or(0);
        if n > 0 && best.is_none_or(|(_, b)| n > b) {
            best = Some((&option.id, n));
        }
    }
    best.map(|(id, n)| ChosenOption {
        option_id: id.clone(),
        confidence: n as f64 / total as f64,
        attributed_copies: n,
        total_attributions: total,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSummary {
    #[serde(rename = "total_effective_duration_ms", with = "millis")]
    pub total_effective_duration: TimeDelta,
    #[serde(rename = "last_updated_age_ms", with = "millis")]
    pub last_updated_age: TimeDelta,
    pub option_count: usize,
    pub criterion_count: usize,
    pub evidence_count: usize,
}

/// Effort and recency figures for the table. `evidence_count` counts
/// placements, so a snippet placed in two cells counts twice.
pub fn task_summary(
    log: &SessionLog,
    table: &KnowledgeTable,
    now: DateTime<Utc>,
    cfg: &ThresholdConfig,
) -> Result<TaskSummary, SessionError> {
    let last_activity = log.events.last().map(|e| e.at);
    let latest = last_activity.map_or(table.updated_at, |a| a.max(table.updated_at));
    if now < latest {
        return Err(SessionError::NowBeforeData);
    }
    Ok(TaskSummary {
        total_effective_duration: effective_duration(&log.events, cfg),
        last_updated_age: now - latest,
        option_count: table.options.len(),
        criterion_count: table.criteria.len(),
        evidence_count: table.placements().count(),
    })
}
