//! Shared domain types: the comparison table, its evidence snippets, and
//! the thresholds that drive every appraisal rule.
//!
//! Snippets live in a [`SnippetStore`] separate from the table; table cells
//! refer to them by id, so the same snippet can sit in several cells and in
//! the uncategorized repository without being duplicated.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use url::Url;

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_newtype!(
    /// Identifier of a knowledge table.
    TableId
);
id_newtype!(OptionId);
id_newtype!(CriterionId);
id_newtype!(
    /// Identifier of a snippet in a [`SnippetStore`].
    SnippetId
);

/// A row header of the comparison table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableOption {
    pub id: OptionId,
    pub name: String,
}

/// A column header of the comparison table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: CriterionId,
    pub name: String,
}

/// The evidence placed at one (option, criterion) intersection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub option: OptionId,
    pub criterion: CriterionId,
    pub snippets: Vec<SnippetId>,
}

/// A captured decision artifact: options × criteria with rated evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeTable {
    pub id: TableId,
    pub title: String,
    pub options: Vec<TableOption>,
    pub criteria: Vec<Criterion>,
    #[serde(default)]
    pub cells: Vec<Cell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author_profile_url: Option<Url>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl KnowledgeTable {
    /// Every (cell, snippet) placement in table order.
    pub fn placements(&self) -> impl Iterator<Item = (&Cell, &SnippetId)> {
        self.cells.iter().flat_map(|cell| cell.snippets.iter().map(move |sid| (cell, sid)))
    }

    /// Distinct placed snippet ids, sorted.
    pub fn placed_snippet_ids(&self) -> BTreeSet<&SnippetId> {
        self.placements().map(|(_, sid)| sid).collect()
    }

    pub fn option(&self, id: &OptionId) -> Option<&TableOption> {
        self.options.iter().find(|o| &o.id == id)
    }
}

/// Evidence rating of a placed snippet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rating {
    Positive,
    Negative,
    Informational,
}

impl Rating {
    /// Glyph used when rendering the rating.
    pub fn glyph(self) -> &'static str {
        match self {
            Rating::Positive => "👍",
            Rating::Negative => "👎",
            Rating::Informational => "i",
        }
    }
}

/// Char offsets into the text projection of a snapshot's surroundings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighlightRange {
    pub start: usize,
    pub end: usize,
}

/// Captured surroundings of a snippet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSnapshot {
    pub surroundings: String,
    pub highlight_range: HighlightRange,
    pub includes_question_block: bool,
}

impl ContextSnapshot {
    /// Whether the highlight range is a non-empty region of the surroundings text.
    pub fn highlight_resolves(&self) -> bool {
        let text = crate::html::Document::parse(&self.surroundings).text();
        let len = text.chars().count();
        let HighlightRange { start, end } = self.highlight_range;
        start < end && end <= len
    }

    /// The highlighted text, if the range resolves.
    pub fn highlighted_text(&self) -> Option<String> {
        if !self.highlight_resolves() {
            return None;
        }
        let text = crate::html::Document::parse(&self.surroundings).text();
        let HighlightRange { start, end } = self.highlight_range;
        Some(text.chars().skip(start).take(end - start).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorCategory {
    Language,
    Framework,
    Platform,
}

impl fmt::Display for DetectorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorCategory::Language => "language",
            DetectorCategory::Framework => "framework",
            DetectorCategory::Platform => "platform",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionSource {
    Snippet,
    ParentPage,
}

/// A technology found in a snippet (or its parent page).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub detector_name: String,
    pub category: DetectorCategory,
    pub matched_keyword: String,
    pub source: DetectionSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PopularityKind {
    /// Net vote score of a Q&A post.
    Upvotes {
        count: i64,
        accepted: bool,
    },
    Claps {
        count: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopularitySignal {
    pub kind: PopularityKind,
    pub extracted_from: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeOrigin {
    Snippet,
    ContextSnapshot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeExample {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_hint: Option<String>,
    pub origin_snippet: SnippetId,
    pub origin: CodeOrigin,
}

/// Per-snippet signals computed at import.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrichmentSignals {
    pub domain: String,
    #[serde(default)]
    pub detections: Vec<DetectionResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_updated: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub popularity: Option<PopularitySignal>,
    #[serde(default)]
    pub code_examples: Vec<CodeExample>,
}

/// One captured evidence unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    pub id: SnippetId,
    pub content: String,
    #[serde(default)]
    pub plain_text: String,
    pub source_url: Url,
    pub collected_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<Rating>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_snapshot: Option<ContextSnapshot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enrichment: Option<EnrichmentSignals>,
}

impl Snippet {
    /// Builds a snippet from captured markup, deriving `plain_text`.
    pub fn from_capture(
        id: impl Into<String>,
        content: impl Into<String>,
        source_url: Url,
        collected_at: DateTime<Utc>,
        rating: Option<Rating>,
    ) -> Self {
        let content = content.into();
        let plain_text = crate::html::plain_text(&content);
        Self {
            id: SnippetId(id.into()),
            content,
            plain_text,
            source_url,
            collected_at,
            rating,
            context_snapshot: None,
            enrichment: None,
        }
    }

    /// Fills `plain_text` from `content` when it is missing.
    pub fn ensure_plain_text(&mut self) {
        if self.plain_text.trim().is_empty() {
            self.plain_text = crate::html::plain_text(&self.content);
        }
    }
}

/// Snippets keyed by id. Serialized as an array sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<Snippet>", into = "Vec<Snippet>")]
pub struct SnippetStore {
    snippets: BTreeMap<SnippetId, Snippet>,
}

impl SnippetStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, snippet: Snippet) -> Option<Snippet> {
        self.snippets.insert(snippet.id.clone(), snippet)
    }

    pub fn get(&self, id: &SnippetId) -> Option<&Snippet> {
        self.snippets.get(id)
    }

    pub fn get_mut(&mut self, id: &SnippetId) -> Option<&mut Snippet> {
        self.snippets.get_mut(id)
    }

    pub fn contains(&self, id: &SnippetId) -> bool {
        self.snippets.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.snippets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snippets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Snippet> {
        self.snippets.values()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Snippet> {
        self.snippets.values_mut()
    }
}

impl From<Vec<Snippet>> for SnippetStore {
    fn from(list: Vec<Snippet>) -> Self {
        list.into_iter().collect()
    }
}

impl From<SnippetStore> for Vec<Snippet> {
    fn from(store: SnippetStore) -> Self {
        store.snippets.into_values().collect()
    }
}

impl FromIterator<Snippet> for SnippetStore {
    fn from_iter<I: IntoIterator<Item = Snippet>>(iter: I) -> Self {
        let mut store = SnippetStore::new();
        for s in iter {
            store.insert(s);
        }
        store
    }
}

/// Tunable thresholds shared by analytics and appraisal rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdConfig {
    /// Gaps between activity events are clamped to this many seconds.
    pub idle_threshold_secs: u64,
    /// Evidence last updated more than this many calendar months ago is stale.
    pub staleness_threshold_months: u32,
    pub diversity_min_domains: u32,
    pub badge_yellow_at: u32,
    pub badge_red_at: u32,
    pub suggestion_top_n: u32,
    /// Characters scanned on each side of a detection for a version token.
    pub version_vicinity: u32,
    /// Net vote scores strictly below this value raise a low-popularity issue.
    pub low_popularity_below: i64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            idle_threshold_secs: 8,
            staleness_threshold_months: 36,
            diversity_min_domains: 2,
            badge_yellow_at: 1,
            badge_red_at: 2,
            suggestion_top_n: 10,
            version_vicinity: 30,
            low_popularity_below: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("{0} must be at least 1")]
    NotPositive(&'static str),
    #[error("badge_red_at ({red}) must exceed badge_yellow_at ({yellow})")]
    BadgeOrder { yellow: u32, red: u32 },
}

impl ThresholdConfig {
    pub fn idle_threshold(&self) -> chrono::TimeDelta {
        chrono::TimeDelta::seconds(self.idle_threshold_secs as i64)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("idle_threshold_secs", self.idle_threshold_secs),
            ("staleness_threshold_months", self.staleness_threshold_months as u64),
            ("diversity_min_domains", self.diversity_min_domains as u64),
            ("badge_yellow_at", self.badge_yellow_at as u64),
            ("badge_red_at", self.badge_red_at as u64),
            ("suggestion_top_n", self.suggestion_top_n as u64),
            ("version_vicinity", self.version_vicinity as u64),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(ConfigError::NotPositive(name));
            }
        }
        if self.badge_red_at <= self.badge_yellow_at {
            return Err(ConfigError::BadgeOrder { yellow: self.badge_yellow_at, red: self.badge_red_at });
        }
        Ok(())
    }
}

/// A structural problem found by [`validate_table`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Violation {
    DanglingRef { snippet_id: SnippetId },
    DuplicateOptionId { option_id: OptionId },
    DuplicateCriterionId { criterion_id: CriterionId },
    DuplicateCell { option_id: OptionId, criterion_id: CriterionId },
    UnknownOption { option_id: OptionId },
    UnknownCriterion { criterion_id: CriterionId },
    TimestampInversion,
    UnratedPlacement { snippet_id: SnippetId },
    UnresolvedHighlight { snippet_id: SnippetId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingRef { snippet_id } => {
                write!(f, "cell references unknown snippet \"{snippet_id}\"")
            }
            Violation::DuplicateOptionId { option_id } => write!(f, "duplicate option id \"{option_id}\""),
            Violation::DuplicateCriterionId { criterion_id } => {
                write!(f, "duplicate criterion id \"{criterion_id}\"")
            }
            Violation::DuplicateCell { option_id, criterion_id } => {
                write!(f, "cell ({option_id}, {criterion_id}) listed twice")
            }
            Violation::UnknownOption { option_id } => write!(f, "cell uses unknown option \"{option_id}\""),
            Violation::UnknownCriterion { criterion_id } => {
                write!(f, "cell uses unknown criterion \"{criterion_id}\"")
            }
            Violation::TimestampInversion => f.write_str("updated_at precedes created_at"),
            Violation::UnratedPlacement { snippet_id } => {
                write!(f, "snippet \"{snippet_id}\" is placed in a cell but has no rating")
            }
            Violation::UnresolvedHighlight { snippet_id } => {
                write!(f, "context snapshot of \"{snippet_id}\" has an empty or out-of-range highlight")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the table against its snippet store. Never mutates either input.
pub fn validate_table(table: &KnowledgeTable, snippets: &SnippetStore) -> ValidationResult {
    let mut violations = Vec::new();

    let mut seen = HashSet::new();
    for option in &table.options {
        if !seen.insert(&option.id) {
            violations.push(Violation::DuplicateOptionId { option_id: option.id.clone() });
        }
    }
    let mut seen = HashSet::new();
    for criterion in &table.criteria {
        if !seen.insert(&criterion.id) {
            violations.push(Violation::DuplicateCriterionId { criterion_id: criterion.id.clone() });
        }
    }

    let option_ids: HashSet<_> = table.options.iter().map(|o| &o.id).collect();
    let criterion_ids: HashSet<_> = table.criteria.iter().map(|c| &c.id).collect();
    let mut cells_seen = HashSet::new();
    let mut reported_dangling = HashSet::new();
    for cell in &table.cells {
        if !cells_seen.insert((&cell.option, &cell.criterion)) {
            violations.push(Violation::DuplicateCell { option_id: cell.option.clone(), criterion_id: cell.criterion.clone() });
        }
        if !option_ids.contains(&cell.option) {
            violations.push(Violation::UnknownOption { option_id: cell.option.clone() });
        }
        if !criterion_ids.contains(&cell.criterion) {
            violations.push(Violation::UnknownCriterion { criterion_id: cell.criterion.clone() });
        }
        for sid in &cell.snippets {
            match snippets.get(sid) {
                None => {
                    if reported_dangling.insert(sid) {
                        violations.push(Violation::DanglingRef { snippet_id: sid.clone() });
                    }
                }
                Some(s) if s.rating.is_none() => {
                    if reported_dangling.insert(sid) {
                        violations.push(Violation::UnratedPlacement { snippet_id: sid.clone() });
                    }
                }
                Some(_) => {}
            }
        }
    }

    if table.updated_at < table.created_at {
        violations.push(Violation::TimestampInversion);
    }

    for snippet in snippets.iter() {
        if let Some(snapshot) = &snippet.context_snapshot {
            if !snapshot.highlight_resolves() {
                violations.push(Violation::UnresolvedHighlight { snippet_id: snippet.id.clone() });
            }
        }
    }

    ValidationResult { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn ts(y: i32, m: u32, d: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).unwrap()
    }

    fn url(s: &str) -> Url {
        Url::parse(s).unwrap()
    }

    fn empty_table() -> KnowledgeTable {
        KnowledgeTable {
            id: "t".into(),
            title: "empty".into(),
            options: vec![],
            criteria: vec![],
            cells: vec![],
            author_profile_url: None,
            created_at: ts(2020, 1, 1),
            updated_at: ts(2020, 1, 1),
        }
    }

    /// 3 options × 4 criteria, one snippet per cell.
    fn grid_fixture() -> (KnowledgeTable, SnippetStore) {
        let mut table = empty_table();
        let mut store = SnippetStore::new();
        for o in 0..3 {
            table.options.push(TableOption { id: OptionId(format!("o{o}")), name: format!("opt {o}") });
        }
        for c in 0..4 {
            table.criteria.push(Criterion { id: CriterionId(format!("c{c}")), name: format!("crit {c}") });
        }
        for o in 0..3 {
            for c in 0..4 {
                let sid = format!("s{o}{c}");
                store.insert(Snippet::from_capture(
                    sid.clone(),
                    "<p>evidence</p>",
                    url("https://example.org/a"),
                    ts(2020, 1, 1),
                    Some(Rating::Positive),
                ));
                table.cells.push(Cell {
                    option: OptionId(format!("o{o}")),
                    criterion: CriterionId(format!("c{c}")),
                    snippets: vec![SnippetId(sid)],
                });
            }
        }
        (table, store)
    }

    #[test]
    fn empty_table_is_valid() {
        assert!(validate_table(&empty_table(), &SnippetStore::new()).is_ok());
    }

    #[test]
    fn dangling_reference_is_reported() {
        let mut table = empty_table();
        table.options.push(TableOption { id: "o1".into(), name: "a".into() });
        table.criteria.push(Criterion { id: "c1".into(), name: "b".into() });
        table.cells.push(Cell { option: "o1".into(), criterion: "c1".into(), snippets: vec!["s9".into()] });
        let result = validate_table(&table, &SnippetStore::new());
        assert_eq!(result.violations, vec![Violation::DanglingRef { snippet_id: "s9".into() }]);
    }

    #[test]
    fn full_grid_fixture_is_valid() {
        let (table, store) = grid_fixture();
        assert_eq!(table.placements().count(), 12);
        let result = validate_table(&table, &store);
        assert!(result.is_ok(), "{:?}", result.violations);
    }

    #[test]
    fn duplicate_ids_and_inversion() {
        let (mut table, store) = grid_fixture();
        table.options.push(TableOption { id: "o0".into(), name: "again".into() });
        table.criteria.push(Criterion { id: "c3".into(), name: "again".into() });
        table.updated_at = ts(2019, 1, 1);
        let v = validate_table(&table, &store).violations;
        assert!(v.contains(&Violation::DuplicateOptionId { option_id: "o0".into() }));
        assert!(v.contains(&Violation::DuplicateCriterionId { criterion_id: "c3".into() }));
        assert!(v.contains(&Violation::TimestampInversion));
    }

    #[test]
    fn placed_snippet_needs_rating() {
        let (table, mut store) = grid_fixture();
        store.get_mut(&"s00".into()).unwrap().rating = None;
        let v = validate_table(&table, &store).violations;
        assert_eq!(v, vec![Violation::UnratedPlacement { snippet_id: "s00".into() }]);
    }

    #[test]
    fn validation_is_idempotent() {
        let (table, store) = grid_fixture();
        let (t0, s0) = (table.clone(), store.clone());
        let a = validate_table(&table, &store);
        let b = validate_table(&table, &store);
        assert_eq!(a, b);
        assert_eq!(table, t0);
        assert_eq!(store, s0);
    }

    #[test]
    fn threshold_defaults_validate() {
        let cfg = ThresholdConfig::default();
        assert_eq!(cfg.idle_threshold_secs, 8);
        assert_eq!(cfg.staleness_threshold_months, 36);
        cfg.validate().unwrap();
        let bad = ThresholdConfig { badge_red_at: 1, ..cfg.clone() };
        assert!(matches!(bad.validate(), Err(ConfigError::BadgeOrder { .. })));
        let zero = ThresholdConfig { diversity_min_domains: 0, ..cfg };
        assert_eq!(zero.validate(), Err(ConfigError::NotPositive("diversity_min_domains")));
    }

    #[test]
    fn plain_text_is_derived_from_markup() {
        let s = Snippet::from_capture(
            "s1",
            "<p>Hello   <b>numpy</b></p>\n<p>world</p>",
            url("https://example.org"),
            ts(2020, 1, 1),
            None,
        );
        assert_eq!(s.plain_text, "Hello numpy world");
    }

    #[test]
    fn snippet_store_serializes_sorted() {
        let mut store = SnippetStore::new();
        for id in ["b", "a"] {
            store.insert(Snippet::from_capture(id, "x", url("https://e.org"), ts(2020, 1, 1), None));
        }
        let json = serde_json::to_value(&store).unwrap();
        let ids: Vec<_> = json.as_array().unwrap().iter().map(|s| s["id"].as_str().unwrap()).collect();
        assert_eq!(ids, ["a", "b"]);
    }
}
