use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use url::Url;

use super::alternatives::{aggregate_alternatives, Alternative, OptionSuggestions};
use super::issues::{
    conflict_cells, diversity_issue, domain_distribution, facet_badge, is_stale, popularity_issues, staleness_issues,
    whitelist_issues, Age, Badge, Facet, Issue, IssueStatus,
};
use super::whitelist::{Whitelist, WhitelistSource};
use crate::model::{
    validate_table, CodeExample, Criterion, CriterionId, DetectionResult, DetectorCategory, KnowledgeTable, OptionId,
    PopularitySignal, Rating, SnippetId, SnippetStore, TableId, TableOption, ThresholdConfig, Violation,
};
use crate::session::{
    build_timeline, infer_chosen_option, page_stats, query_stats, task_summary, ChosenOption, PageStat, QueryStat, SessionError,
    SessionLog, TaskSummary, Timeline,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoStars {
    pub name: String,
    pub stars: u64,
}

/// Public profile figures for a table author who linked a code-hosting
/// account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorCredibility {
    pub display_name: String,
    pub top_repo_stars: Vec<RepoStars>,
    pub top_languages: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affiliation: Option<String>,
    pub profile_url: Url,
}

/// Outcome of fetching data from an external service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Fetched<T> {
    Available { value: T },
    Unavailable { reason: String },
    NotRequested,
}

/// A consumer's personal appraisal settings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConsumerState {
    pub whitelist: Whitelist,
    pub dismissed: BTreeSet<String>,
    pub thresholds: ThresholdConfig,
}

pub struct AppraisalInput<'a> {
    pub table: &'a KnowledgeTable,
    pub snippets: &'a SnippetStore,
    pub log: Option<&'a SessionLog>,
    pub alternatives: &'a Fetched<Vec<OptionSuggestions>>,
    pub author: &'a Fetched<AuthorCredibility>,
    pub consumer: &'a ConsumerState,
    pub now: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AppraisalError {
    #[error("table is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidTable(Vec<Violation>),
    #[error("thresholds are invalid: {0}")]
    InvalidThresholds(String),
    #[error("now ({now}) precedes the latest table or activity timestamp")]
    NowBeforeData { now: DateTime<Utc> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupState {
    Available,
    Unavailable,
    NoData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechnologySummary {
    pub name: String,
    pub category: DetectorCategory,
    pub versions: Vec<String>,
    pub snippet_ids: Vec<SnippetId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainShare {
    pub domain: String,
    pub snippet_count: usize,
    pub trusted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRef {
    pub option_id: OptionId,
    pub criterion_id: CriterionId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupData {
    SearchQueries {
        queries: Vec<QueryStat>,
    },
    Technologies {
        technologies: Vec<TechnologySummary>,
    },
    Surroundings {
        with_snapshot: Vec<SnippetId>,
        without_snapshot: Vec<SnippetId>,
    },
    Domains {
        distribution: Vec<DomainShare>,
        whitelist_source: WhitelistSource,
    },
    EvidenceSnippets {
        conflicting_cells: Vec<CellRef>,
        stale: Vec<SnippetId>,
        age_unknown: Vec<SnippetId>,
        low_popularity: Vec<SnippetId>,
    },
    TaskAuthor {
        author: AuthorCredibility,
    },
    ResearchProcess {
        summary: TaskSummary,
        timeline: Timeline,
        pages: Vec<PageStat>,
    },
    Alternatives {
        alternatives: Vec<Alternative>,
    },
    CodeExamples {
        examples: Vec<CodeExample>,
        chosen_option: Option<ChosenOption>,
    },
}

/// A named cluster of signals inside a facet panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub key: String,
    pub name: String,
    pub state: GroupState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<GroupData>,
}

impl Group {
    fn available(key: &str, name: &str, data: GroupData) -> Group {
        Group { key: key.into(), name: name.into(), state: GroupState::Available, detail: None, data: Some(data) }
    }

    fn without_data(key: &str, name: &str, state: GroupState, detail: impl Into<String>) -> Group {
        Group { key: key.into(), name: name.into(), state, detail: Some(detail.into()), data: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextAnnotation {
    pub detections: Vec<DetectionResult>,
    pub has_snapshot: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustAnnotation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    pub trusted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub popularity: Option<PopularitySignal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_updated: Option<DateTime<Utc>>,
    /// `None` when the last-updated date is unknown.
    pub age: Option<Age>,
    pub stale: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThoroughnessAnnotation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shade_index: Option<usize>,
    pub contains_code: bool,
    pub code_example_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetPanel<A> {
    pub facet: Facet,
    pub badge: Badge,
    pub issues: Vec<Issue>,
    pub groups: Vec<Group>,
    pub annotations: BTreeMap<SnippetId, A>,
}

impl<A> FacetPanel<A> {
    fn new(
        facet: Facet,
        issues: Vec<Issue>,
        groups: Vec<Group>,
        annotations: BTreeMap<SnippetId, A>,
        cfg: &ThresholdConfig,
    ) -> Self {
        FacetPanel { facet, badge: facet_badge(&issues, cfg), issues, groups, annotations }
    }

    pub fn group(&self, key: &str) -> Option<&Group> {
        self.groups.iter().find(|g| g.key == key)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facets {
    pub context: FacetPanel<ContextAnnotation>,
    pub trustworthiness: FacetPanel<TrustAnnotation>,
    pub thoroughness: FacetPanel<ThoroughnessAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnippetRef {
    pub id: SnippetId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<Rating>,
    pub text: String,
    pub source_url: Url,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellProjection {
    pub option: OptionId,
    pub criterion: CriterionId,
    pub snippets: Vec<SnippetRef>,
}

/// The table as the report renders it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableProjection {
    pub options: Vec<TableOption>,
    pub criteria: Vec<Criterion>,
    pub cells: Vec<CellProjection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppraisalReport {
    pub schema_version: u32,
    pub table_id: TableId,
    pub title: String,
    pub now: DateTime<Utc>,
    pub thresholds: ThresholdConfig,
    pub table: TableProjection,
    pub facets: Facets,
}

impl AppraisalReport {
    pub fn issues(&self) -> impl Iterator<Item = &Issue> {
        self.facets.context.issues.iter().chain(&self.facets.trustworthiness.issues).chain(&self.facets.thoroughness.issues)
    }

    pub fn issue(&self, id: &str) -> Option<&Issue> {
        self.issues().find(|i| i.id == id)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn project_table(table: &KnowledgeTable, snippets: &SnippetStore) -> TableProjection {
    TableProjection {
        options: table.options.clone(),
        criteria: table.criteria.clone(),
        cells: table
            .cells
            .iter()
            .map(|c| CellProjection {
                option: c.option.clone(),
                criterion: c.criterion.clone(),
                snippets: c
                    .snippets
                    .iter()
                    .filter_map(|sid| snippets.get(sid))
                    .map(|s| SnippetRef {
                        id: s.id.clone(),
                        rating: s.rating,
                        text: s.plain_text.clone(),
                        source_url: s.source_url.clone(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

fn mark_dismissed(issues: &mut [Issue], dismissed: &BTreeSet<String>) {
    for i in issues {
        if i.status == IssueStatus::Open && dismissed.contains(&i.id) {
            i.status = IssueStatus::Dismissed;
        }
    }
}

fn context_panel(input: &AppraisalInput, placed: &[&SnippetId], cfg: &ThresholdConfig) -> FacetPanel<ContextAnnotation> {
    let mut groups = Vec::new();
    match input.log {
        Some(log) => groups.push(Group::available(
            "search_queries",
            "Search Queries",
            GroupData::SearchQueries { queries: query_stats(log, cfg) },
        )),
        None => groups.push(Group::without_data("search_queries", "Search Queries", GroupState::NoData, "no activity data")),
    }

    let mut tech: BTreeMap<(DetectorCategory, String), (BTreeSet<String>, Vec<SnippetId>)> = BTreeMap::new();
    let mut annotations = BTreeMap::new();
    let (mut with_snapshot, mut without_snapshot) = (Vec::new(), Vec::new());
    for &sid in placed {
        let Some(s) = input.snippets.get(sid) else { continue };
        let detections = s.enrichment.as_ref().map(|e| e.detections.clone()).unwrap_or_default();
        for d in &detections {
            let entry = tech.entry((d.category, d.detector_name.clone())).or_default();
            entry.0.extend(d.version.clone());
            entry.1.push(sid.clone());
        }
        let has_snapshot = s.context_snapshot.is_some();
        if has_snapshot { &mut with_snapshot } else { &mut without_snapshot }.push(sid.clone());
        annotations.insert(sid.clone(), ContextAnnotation { detections, has_snapshot });
    }
    let technologies = tech
        .into_iter()
        .map(|((category, name), (versions, snippet_ids))| TechnologySummary {
            name,
            category,
            versions: versions.into_iter().collect(),
            snippet_ids,
        })
        .collect();
    groups.push(Group::available(
        "technologies",
        "Languages, Frameworks and Platforms",
        GroupData::Technologies { technologies },
    ));
    groups.push(Group::available(
        "surroundings",
        "Snippet Surroundings",
        GroupData::Surroundings { with_snapshot, without_snapshot },
    ));
    FacetPanel::new(Facet::Context, vec![], groups, annotations, cfg)
}

fn trust_panel(input: &AppraisalInput, placed: &[&SnippetId], cfg: &ThresholdConfig) -> FacetPanel<TrustAnnotation> {
    let whitelist = &input.consumer.whitelist;
    let distribution = domain_distribution(input.table, input.snippets);
    let conflicts = conflict_cells(input.table, input.snippets);

    let mut issues = whitelist_issues(&distribution, whitelist);
    issues.extend(diversity_issue(&distribution, cfg));
    issues.extend(
        conflicts.iter().map(|(o, c)| {
            Issue::new(super::issues::IssueKind::ConflictingCell { option_id: o.clone(), criterion_id: c.clone() })
        }),
    );
    let stale_issues = staleness_issues(input.table, input.snippets, input.now, cfg);
    let popularity = popularity_issues(input.table, input.snippets, cfg);
    let stale: Vec<SnippetId> = stale_issues
        .iter()
        .filter_map(|i| match &i.kind {
            super::issues::IssueKind::StaleSnippet { snippet_id, .. } => Some(snippet_id.clone()),
            _ => None,
        })
        .collect();
    let low_popularity: Vec<SnippetId> = popularity
        .iter()
        .filter_map(|i| match &i.kind {
            super::issues::IssueKind::LowPopularity { snippet_id, .. } => Some(snippet_id.clone()),
            _ => None,
        })
        .collect();
    issues.extend(stale_issues);
    issues.extend(popularity);
    mark_dismissed(&mut issues, &input.consumer.dismissed);

    let mut annotations = BTreeMap::new();
    let mut age_unknown = Vec::new();
    for &sid in placed {
        let Some(s) = input.snippets.get(sid) else { continue };
        let e = s.enrichment.as_ref();
        let domain = e.map(|e| e.domain.clone());
        let last_updated = e.and_then(|e| e.last_updated);
        if last_updated.is_none() {
            age_unknown.push(sid.clone());
        }
        annotations.insert(
            sid.clone(),
            TrustAnnotation {
                trusted: domain.as_deref().is_some_and(|d| whitelist.contains(d)),
                domain,
                popularity: e.and_then(|e| e.popularity.clone()),
                last_updated,
                age: last_updated.map(|d| Age::between(d, input.now)),
                stale: last_updated.is_some_and(|d| is_stale(d, input.now, cfg)),
            },
        );
    }

    let distribution = distribution
        .into_iter()
        .map(|(domain, snippet_count)| DomainShare { trusted: whitelist.contains(&domain), domain, snippet_count })
        .collect();
    let mut groups = vec![
        Group::available("domains", "Domains", GroupData::Domains { distribution, whitelist_source: whitelist.source }),
        Group::available(
            "evidence_snippets",
            "Evidence Snippets",
            GroupData::EvidenceSnippets {
                conflicting_cells: conflicts
                    .into_iter()
                    .map(|(option_id, criterion_id)| CellRef { option_id, criterion_id })
                    .collect(),
                stale,
                age_unknown,
                low_popularity,
            },
        ),
    ];
    groups.push(match input.author {
        Fetched::Available { value } => {
            Group::available("task_author", "Task Author", GroupData::TaskAuthor { author: value.clone() })
        }
        Fetched::Unavailable { reason } => {
            Group::without_data("task_author", "Task Author", GroupState::Unavailable, format!("unverified: {reason}"))
        }
        Fetched::NotRequested => {
            Group::without_data("task_author", "Task Author", GroupState::NoData, "no author profile provided")
        }
    });
    FacetPanel::new(Facet::Trustworthiness, issues, groups, annotations, cfg)
}

fn thoroughness_panel(
    input: &AppraisalInput,
    placed: &[&SnippetId],
    cfg: &ThresholdConfig,
) -> Result<FacetPanel<ThoroughnessAnnotation>, AppraisalError> {
    let mut groups = Vec::new();
    let timeline = input.log.map(build_timeline);
    match input.log {
        Some(log) => {
            let summary = task_summary(log, input.table, input.now, cfg)
                .map_err(|_: SessionError| AppraisalError::NowBeforeData { now: input.now })?;
            groups.push(Group::available(
                "research_process",
                "Research Process",
                GroupData::ResearchProcess {
                    summary,
                    timeline: timeline.clone().unwrap_or_default(),
                    pages: page_stats(log, cfg),
                },
            ));
        }
        None => {
            if input.now < input.table.updated_at {
                return Err(AppraisalError::NowBeforeData { now: input.now });
            }
            groups.push(Group::without_data("research_process", "Research Process", GroupState::NoData, "no activity data"));
        }
    }

    groups.push(match input.alternatives {
        Fetched::Available { value } => {
            let names: Vec<String> = input.table.options.iter().map(|o| o.name.clone()).collect();
            Group::available(
                "alternatives",
                "Commonly Searched Alternatives",
                GroupData::Alternatives { alternatives: aggregate_alternatives(&names, value) },
            )
        }
        Fetched::Unavailable { reason } => Group::without_data(
            "alternatives",
            "Commonly Searched Alternatives",
            GroupState::Unavailable,
            format!("alternatives unavailable: {reason}"),
        ),
        Fetched::NotRequested => Group::without_data(
            "alternatives",
            "Commonly Searched Alternatives",
            GroupState::NoData,
            "alternatives not requested",
        ),
    });

    let mut annotations = BTreeMap::new();
    let mut examples: Vec<CodeExample> = Vec::new();
    // snippets from one page share its code blocks; list each block once
    let mut seen_code = std::collections::HashSet::new();
    for &sid in placed {
        let Some(s) = input.snippets.get(sid) else { continue };
        let code = s.enrichment.as_ref().map(|e| e.code_examples.as_slice()).unwrap_or_default();
        for c in code {
            if seen_code.insert(c.text.split_whitespace().collect::<Vec<_>>().join(" ")) {
                examples.push(c.clone());
            }
        }
        annotations.insert(
            sid.clone(),
            ThoroughnessAnnotation {
                shade_index: timeline.as_ref().and_then(|t| t.shade_of_snippet(sid)),
                contains_code: code.iter().any(|c| c.origin == crate::model::CodeOrigin::Snippet),
                code_example_count: code.len(),
            },
        );
    }
    let chosen_option = input.log.and_then(|log| infer_chosen_option(log, input.table, input.snippets));
    groups.push(Group::available("code_examples", "Code Examples", GroupData::CodeExamples { examples, chosen_option }));

    Ok(FacetPanel::new(Facet::Thoroughness, vec![], groups, annotations, cfg))
}

/// Builds the three-facet report. Pure: the clock, external data and the
/// consumer's settings are all inputs.
pub fn assemble_report(input: &AppraisalInput) -> Result<AppraisalReport, AppraisalError> {
    let cfg = &input.consumer.thresholds;
    cfg.validate().map_err(|e| AppraisalError::InvalidThresholds(e.to_string()))?;
    let validation = validate_table(input.table, input.snippets);
    if !validation.is_ok() {
        return Err(AppraisalError::InvalidTable(validation.violations));
    }
    let placed: Vec<&SnippetId> = input.table.placed_snippet_ids().into_iter().collect();

    let thoroughness = thoroughness_panel(input, &placed, cfg)?;
    Ok(AppraisalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        table_id: input.table.id.clone(),
        title: input.table.title.clone(),
        now: input.now,
        thresholds: cfg.clone(),
        table: project_table(input.table, input.snippets),
        facets: Facets {
            context: context_panel(input, &placed, cfg),
            trustworthiness: trust_panel(input, &placed, cfg),
            thoroughness,
        },
    })
}
