use std::collections::BTreeMap;

use chrono::{DateTime, Months, Utc};
use serde::{Deserialize, Serialize};

use super::whitelist::Whitelist;
use crate::model::{CriterionId, KnowledgeTable, OptionId, PopularityKind, Rating, SnippetId, SnippetStore, ThresholdConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facet {
    Context,
    Trustworthiness,
    Thoroughness,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueStatus {
    #[default]
    Open,
    Dismissed,
    Resolved,
}

/// Calendar age: whole years plus remaining days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Age {
    pub years: u32,
    pub days: i64,
    pub total_days: i64,
}

impl Age {
    pub fn between(then: DateTime<Utc>, now: DateTime<Utc>) -> Age {
        let mut years = 0;
        while then.checked_add_months(Months::new(12 * (years + 1))).is_some_and(|d| d <= now) {
            years += 1;
        }
        let anchor = then.checked_add_months(Months::new(12 * years)).unwrap_or(then);
        Age { years, days: (now - anchor).num_days(), total_days: (now - then).num_days() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum IssueKind {
    UntrustedDomain { domain: String },
    LowDiversity { domain_count: usize, min_domains: u32 },
    StaleSnippet { snippet_id: SnippetId, last_updated: DateTime<Utc>, age: Age },
    ConflictingCell { option_id: OptionId, criterion_id: CriterionId },
    LowPopularity { snippet_id: SnippetId, score: i64 },
}

impl IssueKind {
    /// Stable identifier, independent of consumer state.
    pub fn id(&self) -> String {
        match self {
            IssueKind::UntrustedDomain { domain } => format!("untrusted_domain:{domain}"),
            IssueKind::LowDiversity { .. } => "low_diversity".into(),
            IssueKind::StaleSnippet { snippet_id, .. } => format!("stale_snippet:{snippet_id}"),
            IssueKind::ConflictingCell { option_id, criterion_id } => format!("conflicting_cell:{option_id}:{criterion_id}"),
            IssueKind::LowPopularity { snippet_id, .. } => format!("low_popularity:{snippet_id}"),
        }
    }

    pub fn facet(&self) -> Facet {
        Facet::Trustworthiness
    }

    pub fn summary(&self) -> String {
        match self {
            IssueKind::UntrustedDomain { domain } => format!("{domain} is not on the trusted domains list"),
            IssueKind::LowDiversity { domain_count, .. } => {
                format!("all evidence comes from {domain_count} source domain{}", if *domain_count == 1 { "" } else { "s" })
            }
            IssueKind::StaleSnippet { snippet_id, age, .. } => {
                format!("snippet {snippet_id} was last updated {} years {} days ago", age.years, age.days)
            }
            IssueKind::ConflictingCell { option_id, criterion_id } => {
                format!("cell {option_id}/{criterion_id} has both positive and negative evidence")
            }
            IssueKind::LowPopularity { snippet_id, score } => format!("snippet {snippet_id} has a net score of {score}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub id: String,
    pub facet: Facet,
    pub kind: IssueKind,
    pub status: IssueStatus,
    pub summary: String,
}

impl Issue {
    pub fn new(kind: IssueKind) -> Issue {
        Issue { id: kind.id(), facet: kind.facet(), summary: kind.summary(), kind, status: IssueStatus::Open }
    }

    pub fn with_status(mut self, status: IssueStatus) -> Issue {
        self.status = status;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BadgeLevel {
    None,
    Yellow,
    Red,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Badge {
    pub level: BadgeLevel,
    pub count: usize,
}

pub fn badge_for_count(open: usize, cfg: &ThresholdConfig) -> Badge {
    let level = if open >= cfg.badge_red_at as usize {
        BadgeLevel::Red
    } else if open >= cfg.badge_yellow_at as usize {
        BadgeLevel::Yellow
    } else {
        BadgeLevel::None
    };
    Badge { level, count: open }
}

/// Badge from the open issues; dismissed and resolved ones do not count.
pub fn facet_badge(issues: &[Issue], cfg: &ThresholdConfig) -> Badge {
    badge_for_count(issues.iter().filter(|i| i.status == IssueStatus::Open).count(), cfg)
}

/// Snippet count per source domain, over placed snippets only. A snippet
/// placed in several cells counts once.
pub fn domain_distribution(table: &KnowledgeTable, snippets: &SnippetStore) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for sid in table.placed_snippet_ids() {
        if let Some(domain) = snippets.get(sid).and_then(|s| s.enrichment.as_ref()).map(|e| &e.domain) {
            *out.entry(domain.clone()).or_default() += 1;
        }
    }
    out
}

/// One untrusted-domain issue per distribution domain missing from the
/// whitelist. Domains trusted only through a consumer addition keep their
/// issue, marked resolved.
pub fn whitelist_issues(distribution: &BTreeMap<String, usize>, whitelist: &Whitelist) -> Vec<Issue> {
    distribution
        .keys()
        .filter_map(|domain| {
            let issue = Issue::new(IssueKind::UntrustedDomain { domain: domain.clone() });
            if !whitelist.contains(domain) {
                Some(issue)
            } else if whitelist.added_by_consumer(domain) {
                Some(issue.with_status(IssueStatus::Resolved))
            } else {
                None
            }
        })
        .collect()
}

pub fn diversity_issue(distribution: &BTreeMap<String, usize>, cfg: &ThresholdConfig) -> Option<Issue> {
    let n = distribution.len();
    (n > 0 && n < cfg.diversity_min_domains as usize)
        .then(|| Issue::new(IssueKind::LowDiversity { domain_count: n, min_domains: cfg.diversity_min_domains }))
}

/// Whether evidence last updated at `last_updated` is stale at `now`:
/// more than the configured number of calendar months has passed.
pub fn is_stale(last_updated: DateTime<Utc>, now: DateTime<Utc>, cfg: &ThresholdConfig) -> bool {
    last_updated.checked_add_months(Months::new(cfg.staleness_threshold_months)).is_some_and(|limit| limit < now)
}

pub fn staleness_issues(
    table: &KnowledgeTable,
    snippets: &SnippetStore,
    now: DateTime<Utc>,
    cfg: &ThresholdConfig,
) -> Vec<Issue> {
    table
        .placed_snippet_ids()
        .into_iter()
        .filter_map(|sid| {
            let last = snippets.get(sid)?.enrichment.as_ref()?.last_updated?;
            is_stale(last, now, cfg).then(|| {
                Issue::new(IssueKind::StaleSnippet { snippet_id: sid.clone(), last_updated: last, age: Age::between(last, now) })
            })
        })
        .collect()
}

pub fn popularity_issues(table: &KnowledgeTable, snippets: &SnippetStore, cfg: &ThresholdConfig) -> Vec<Issue> {
    table
        .placed_snippet_ids()
        .into_iter()
        .filter_map(|sid| {
            let pop = snippets.get(sid)?.enrichment.as_ref()?.popularity.as_ref()?;
            match pop.kind {
                PopularityKind::Upvotes { count, .. } if count < cfg.low_popularity_below => {
                    Some(Issue::new(IssueKind::LowPopularity { snippet_id: sid.clone(), score: count }))
                }
                _ => None,
            }
        })
        .collect()
}

/// Cells holding both positive and negative evidence, in table order.
pub fn conflict_cells(table: &KnowledgeTable, snippets: &SnippetStore) -> Vec<(OptionId, CriterionId)> {
    table
        .cells
        .iter()
        .filter(|cell| {
            let ratings = || cell.snippets.iter().filter_map(|s| snippets.get(s)?.rating);
            ratings().any(|r| r == Rating::Positive) && ratings().any(|r| r == Rating::Negative)
        })
        .map(|cell| (cell.option.clone(), cell.criterion.clone()))
        .collect()
}
