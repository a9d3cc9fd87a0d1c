//! The three-facet appraisal: issue rules, badges, report assembly and
//! consumer adjustments.

mod adjust;
mod alternatives;
mod issues;
mod report;
mod whitelist;

pub use adjust::{apply_adjustment, set_threshold, Adjustment, AdjustmentError};
pub use alternatives::{aggregate_alternatives, strip_comparison_prefix, Alternative, OptionSuggestions, SuggestionResponse};
pub use issues::{
    badge_for_count, conflict_cells, diversity_issue, domain_distribution, facet_badge, is_stale, popularity_issues,
    staleness_issues, whitelist_issues, Age, Badge, BadgeLevel, Facet, Issue, IssueKind, IssueStatus,
};
pub use report::{
    assemble_report, AppraisalError, AppraisalInput, AppraisalReport, AuthorCredibility, CellProjection, CellRef, ConsumerState,
    ContextAnnotation, DomainShare, FacetPanel, Facets, Fetched, Group, GroupData, GroupState, RepoStars, SnippetRef,
    TableProjection, TechnologySummary, ThoroughnessAnnotation, TrustAnnotation, REPORT_SCHEMA_VERSION,
};
pub use whitelist::{InvalidDomain, Whitelist, WhitelistSource, DEFAULT_TRUSTED_DOMAINS};
