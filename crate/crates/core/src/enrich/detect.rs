//! Keyword detectors for languages, frameworks and platforms, plus version
//! extraction near a detection or from the page URL.
//!
//! Keywords are matched case-sensitively on token boundaries: a keyword
//! edge that is an identifier character must not touch another identifier
//! character in the text, so `useState` does not fire on `useStateful`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use aho_corasick::{AhoCorasick, MatchKind};
use regex::Regex;
use serde::{Deserialize, Serialize};
use url::Url;

use crate::model::{DetectionResult, DetectionSource, DetectorCategory, Snippet, ThresholdConfig};

/// A named keyword set identifying one technology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detector {
    pub name: String,
    pub category: DetectorCategory,
    pub keywords: Vec<String>,
    /// Regexes with one capture group, applied to the URL without scheme
    /// or fragment (`host/path?query`).
    #[serde(default)]
    pub version_url_patterns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryFile {
    #[serde(rename = "detector", default)]
    pub detectors: Vec<Detector>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegistryProblem {
    DuplicateKeyword { keyword: String, first: String, second: String },
    DuplicateName(String),
    EmptyKeywords(String),
    BlankKeyword(String),
    BadPattern { detector: String, pattern: String, reason: String },
}

impl fmt::Display for RegistryProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegistryProblem::DuplicateKeyword { keyword, first, second } => {
                write!(f, "keyword {keyword:?} is claimed by both {first:?} and {second:?}")
            }
            RegistryProblem::DuplicateName(n) => write!(f, "detector {n:?} is defined twice"),
            RegistryProblem::EmptyKeywords(n) => write!(f, "detector {n:?} has no keywords"),
            RegistryProblem::BlankKeyword(n) => write!(f, "detector {n:?} has a blank keyword"),
            RegistryProblem::BadPattern { detector, pattern, reason } => {
                write!(f, "detector {detector:?} URL pattern {pattern:?}: {reason}")
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("cannot read registry {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("registry is not valid TOML: {0}")]
    Parse(String),
    #[error("registry is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<RegistryProblem>),
}

const DEFAULT_REGISTRY: &str = include_str!("../../detectors/default.toml");

/// Validated, read-only set of detectors with a compiled keyword automaton.
#[derive(Debug, Clone)]
pub struct DetectorRegistry {
    detectors: Vec<Detector>,
    url_patterns: Vec<Vec<Regex>>,
    matcher: AhoCorasick,
    /// automaton pattern index -> (detector index, keyword)
    owners: Vec<(usize, String)>,
    by_name: HashMap<String, usize>,
}

impl DetectorRegistry {
    /// The bundled registry.
    pub fn default_registry() -> DetectorRegistry {
        Self::from_toml(DEFAULT_REGISTRY).expect("bundled registry is valid")
    }

    pub fn from_toml(text: &str) -> Result<DetectorRegistry, RegistryError> {
        let file: RegistryFile = toml::from_str(text).map_err(|e| RegistryError::Parse(e.to_string()))?;
        Self::new(file.detectors)
    }

    pub fn load(path: &Path) -> Result<DetectorRegistry, RegistryError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| RegistryError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    /// Validates the detectors: names unique, keyword sets non-empty, no
    /// keyword shared between detectors, URL patterns compile with one group.
    pub fn new(detectors: Vec<Detector>) -> Result<DetectorRegistry, RegistryError> {
        let mut problems = Vec::new();
        let mut by_name = HashMap::new();
        let mut keyword_owner: HashMap<&str, &str> = HashMap::new();
        let mut url_patterns = Vec::with_capacity(detectors.len());

        for (idx, d) in detectors.iter().enumerate() {
            if by_name.insert(d.name.clone(), idx).is_some() {
                problems.push(RegistryProblem::DuplicateName(d.name.clone()));
            }
            if d.keywords.is_empty() {
                problems.push(RegistryProblem::EmptyKeywords(d.name.clone()));
            }
            for kw in &d.keywords {
                if kw.trim().is_empty() {
                    problems.push(RegistryProblem::BlankKeyword(d.name.clone()));
                    continue;
                }
                match keyword_owner.get(kw.as_str()) {
                    Some(&owner) if owner != d.name => problems.push(RegistryProblem::DuplicateKeyword {
                        keyword: kw.clone(),
                        first: owner.to_string(),
                        second: d.name.clone(),
                    }),
                    Some(_) => {}
                    None => {
                        keyword_owner.insert(kw, &d.name);
                    }
                }
            }
            let mut compiled = Vec::new();
            for p in &d.version_url_patterns {
                match Regex::new(p) {
                    Ok(re) if re.captures_len() == 2 => compiled.push(re),
                    Ok(_) => problems.push(RegistryProblem::BadPattern {
                        detector: d.name.clone(),
                        pattern: p.clone(),
                        reason: "needs exactly one capture group".into(),
                    }),
                    Err(e) => problems.push(RegistryProblem::BadPattern {
                        detector: d.name.clone(),
                        pattern: p.clone(),
                        reason: e.to_string(),
                    }),
                }
            }
            url_patterns.push(compiled);
        }
        if !problems.is_empty() {
            return Err(RegistryError::Invalid(problems));
        }

        let mut owners = Vec::new();
        for (idx, d) in detectors.iter().enumerate() {
            for kw in &d.keywords {
                owners.push((idx, kw.clone()));
            }
        }
        let matcher = AhoCorasick::builder()
            .match_kind(MatchKind::Standard)
            .build(owners.iter().map(|(_, k)| k.as_str()))
            .map_err(|e| RegistryError::Parse(e.to_string()))?;

        Ok(DetectorRegistry { detectors, url_patterns, matcher, owners, by_name })
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    pub fn get(&self, name: &str) -> Option<&Detector> {
        self.by_name.get(name).map(|&i| &self.detectors[i])
    }

    /// Earliest boundary-respecting keyword hit per detector, indexed like
    /// [`DetectorRegistry::detectors`].
    fn first_hits(&self, text: &str) -> Vec<Option<(usize, &str)>> {
        let mut hits: Vec<Option<(usize, &str)>> = vec![None; self.detectors.len()];
        for m in self.matcher.find_overlapping_iter(text) {
            let (det, kw) = &self.owners[m.pattern().as_usize()];
            if !on_token_boundary(text, m.start(), m.end()) {
                continue;
            }
            let slot = &mut hits[*det];
            if slot.is_none_or(|(pos, _)| m.start() < pos) {
                *slot = Some((m.start(), kw.as_str()));
            }
        }
        hits
    }

    /// Detects technologies in `primary` text, falling back per detector to
    /// `fallback` text when the primary text has no hit for it. Results
    /// follow registry order, at most one per detector.
    pub fn detect(&self, primary: &str, fallback: Option<&str>) -> Vec<DetectionResult> {
        let primary_hits = self.first_hits(primary);
        let fallback_hits = match fallback {
            Some(text) if primary_hits.iter().any(Option::is_none) => self.first_hits(text),
            _ => vec![None; self.detectors.len()],
        };
        self.detectors
            .iter()
            .enumerate()
            .filter_map(|(i, d)| {
                let (kw, source) = match (primary_hits[i], fallback_hits[i]) {
                    (Some((_, kw)), _) => (kw, DetectionSource::Snippet),
                    (None, Some((_, kw))) => (kw, DetectionSource::ParentPage),
                    (None, None) => return None,
                };
                Some(DetectionResult {
                    detector_name: d.name.clone(),
                    category: d.category,
                    matched_keyword: kw.to_string(),
                    source,
                    version: None,
                })
            })
            .collect()
    }

    /// Version for a detection: the nearest version token within the
    /// configured vicinity of the detector name or one of its keywords in
    /// `text`, else the first URL pattern that yields one.
    pub fn extract_version(
        &self,
        detection: &DetectionResult,
        text: &str,
        url: Option<&Url>,
        cfg: &ThresholdConfig,
    ) -> Option<String> {
        let chars: Vec<char> = text.chars().collect();
        let idx = self.by_name.get(&detection.detector_name).copied();
        let mut keywords = vec![detection.matched_keyword.as_str()];
        if let Some(i) = idx {
            keywords.extend(self.detectors[i].keywords.iter().map(String::as_str));
        }
        if let Some(v) = nearest_version(&chars, &detection.detector_name, &keywords, cfg.version_vicinity as usize) {
            return Some(v);
        }
        let idx = idx?;
        let url = url?;
        let target = url_match_target(url);
        self.url_patterns[idx].iter().find_map(|re| {
            let caps = re.captures(&target)?;
            let v = caps.get(1)?.as_str();
            is_version_token(v).then(|| v.to_string())
        })
    }
}

/// Detection on a snippet with parent-page fallback, versions filled in.
pub fn detect_platforms(
    snippet: &Snippet,
    parent_page_text: Option<&str>,
    registry: &DetectorRegistry,
    cfg: &ThresholdConfig,
) -> Vec<DetectionResult> {
    let mut detections = registry.detect(&snippet.plain_text, parent_page_text);
    for d in &mut detections {
        let text = match d.source {
            DetectionSource::Snippet => snippet.plain_text.as_str(),
            DetectionSource::ParentPage => parent_page_text.unwrap_or_default(),
        };
        d.version = registry.extract_version(d, text, Some(&snippet.source_url), cfg);
        if d.version.is_none() && d.source == DetectionSource::Snippet {
            if let Some(parent) = parent_page_text {
                d.version = registry.extract_version(d, parent, None, cfg);
            }
        }
    }
    detections
}

fn is_ident(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn on_token_boundary(text: &str, start: usize, end: usize) -> bool {
    let kw = &text[start..end];
    let first = kw.chars().next();
    let last = kw.chars().next_back();
    if first.is_some_and(is_ident) && text[..start].chars().next_back().is_some_and(is_ident) {
        return false;
    }
    if last.is_some_and(is_ident) && text[end..].chars().next().is_some_and(is_ident) {
        return false;
    }
    true
}

/// `digits(.digits)*`
pub fn is_version_token(s: &str) -> bool {
    !s.is_empty() && s.split('.').all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_digit()))
}

fn url_match_target(url: &Url) -> String {
    let mut target = String::new();
    if let Some(host) = url.host_str() {
        target.push_str(host);
    }
    target.push_str(url.path());
    if let Some(q) = url.query() {
        target.push('?');
        target.push_str(q);
    }
    target
}

#[derive(Debug, Clone, Copy)]
struct Span {
    start: usize,
    end: usize,
}

/// Occurrences of `needle` in `chars` respecting identifier boundaries.
/// With `digits_follow`, a trailing digit run does not break the boundary
/// (so `Python3` yields an anchor for `Python`).
fn find_anchors(chars: &[char], needle: &str, ignore_case: bool, digits_follow: bool) -> Vec<Span> {
    let pat: Vec<char> = needle.chars().collect();
    if pat.is_empty() || pat.len() > chars.len() {
        return vec![];
    }
    let eq = |a: char, b: char| {
        if ignore_case {
            a.to_lowercase().eq(b.to_lowercase())
        } else {
            a == b
        }
    };
    let mut out = Vec::new();
    for start in 0..=chars.len() - pat.len() {
        if !pat.iter().enumerate().all(|(i, &p)| eq(chars[start + i], p)) {
            continue;
        }
        let end = start + pat.len();
        if is_ident(pat[0]) && start > 0 && is_ident(chars[start - 1]) {
            continue;
        }
        if is_ident(pat[pat.len() - 1]) && end < chars.len() && is_ident(chars[end]) {
            let digit_ok = digits_follow && chars[end].is_ascii_digit();
            if !digit_ok {
                continue;
            }
        }
        out.push(Span { start, end });
    }
    out
}

#[derive(Debug, Clone)]
struct VersionToken {
    /// start including any `v` prefix
    start: usize,
    digits_start: usize,
    end: usize,
    value: String,
    /// No dot and no `v` prefix: `2`, `10`, `1000`.
    bare: bool,
}

fn version_tokens(chars: &[char]) -> Vec<VersionToken> {
    let mut out = Vec::new();
    let n = chars.len();
    let mut i = 0;
    while i < n {
        if !chars[i].is_ascii_digit() || (i > 0 && chars[i - 1].is_ascii_digit()) {
            i += 1;
            continue;
        }
        let digits_start = i;
        let mut j = i;
        while j < n && chars[j].is_ascii_digit() {
            j += 1;
        }
        while j + 1 < n && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
            j += 1;
            while j < n && chars[j].is_ascii_digit() {
                j += 1;
            }
        }
        let end = j;
        let v_prefixed = digits_start > 0 && matches!(chars[digits_start - 1], 'v' | 'V');
        let start = if v_prefixed { digits_start - 1 } else { digits_start };
        let before = start.checked_sub(1).map(|k| chars[k]);
        let after = chars.get(end).copied();
        let after2 = chars.get(end + 1).copied();
        let value: String = chars[digits_start..end].iter().collect();

        let before_ok = match before {
            None => true,
            Some(c) => c.is_whitespace() || c == '@' || (!v_prefixed && c == '\u{a0}'),
        };
        let glued_after = match after {
            None => false,
            Some(c) if is_ident(c) || c == '%' => true,
            Some('-') => after2.is_some_and(|c| c.is_alphanumeric()),
            Some(':' | ',' | '/') => after2.is_some_and(|c| c.is_ascii_digit()),
            _ => false,
        };
        // bare integers that look like years are dates, not versions
        let year_like =
            !value.contains('.') && value.len() == 4 && value.parse::<u32>().is_ok_and(|y| (1990..=2039).contains(&y));

        if !glued_after && !year_like {
            let bare = !v_prefixed && !value.contains('.');
            out.push(VersionToken { start, digits_start, end, value, bare });
            if !before_ok {
                // kept only for adjacency to a name anchor; marked by start
                out.last_mut().unwrap().start = usize::MAX;
            }
        }
        i = end.max(i + 1);
    }
    out
}

/// Anchors are the detector name (any case) and every occurrence of the
/// detector's keywords, not only the first one matched.
fn nearest_version(chars: &[char], name: &str, keywords: &[&str], vicinity: usize) -> Option<String> {
    let mut anchors: Vec<(Span, bool)> = find_anchors(chars, name, true, true).into_iter().map(|s| (s, true)).collect();
    let mut seen = std::collections::HashSet::new();
    for kw in keywords {
        if *kw == name || !seen.insert(*kw) {
            continue;
        }
        anchors.extend(find_anchors(chars, kw, false, false).into_iter().map(|s| (s, false)));
    }
    if anchors.is_empty() {
        return None;
    }
    let tokens = version_tokens(chars);

    // (distance, preceding?, position) -> lower is better
    let mut best: Option<((usize, bool, usize), &str)> = None;
    for (anchor, is_name) in &anchors {
        for tok in &tokens {
            if tok.digits_start < anchor.end && tok.end > anchor.start {
                continue;
            }
            let standalone = tok.start != usize::MAX;
            // A bare integer is read as a version only right after an anchor
            // ("Android 10"); elsewhere it is usually a literal in code or prose.
            if tok.bare
                && !(tok.digits_start >= anchor.end && chars[anchor.end..tok.digits_start].iter().all(|c| c.is_whitespace()))
            {
                continue;
            }
            let key = if tok.digits_start >= anchor.end {
                let adjacent = tok.digits_start == anchor.end;
                if adjacent && *is_name {
                    (0, false, tok.digits_start)
                } else if standalone {
                    (tok.start - anchor.end, false, tok.digits_start)
                } else {
                    continue;
                }
            } else if standalone {
                (anchor.start - tok.end, true, tok.digits_start)
            } else {
                continue;
            };
            if key.0 > vicinity {
                continue;
            }
            if best.is_none_or(|(b, _)| key < b) {
                best = Some((key, tok.value.as_str()));
            }
        }
    }
    best.map(|(_, v)| v.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry() -> DetectorRegistry {
        DetectorRegistry::default_registry()
    }

    fn names(d: &[DetectionResult]) -> Vec<&str> {
        d.iter().map(|r| r.detector_name.as_str()).collect()
    }

    fn detection(name: &str, keyword: &str) -> DetectionResult {
        DetectionResult {
            detector_name: name.into(),
            category: DetectorCategory::Framework,
            matched_keyword: keyword.into(),
            source: DetectionSource::Snippet,
            version: None,
        }
    }

    #[test]
    fn default_registry_is_valid_and_covers_each_category() {
        let r = registry();
        for cat in [DetectorCategory::Language, DetectorCategory::Framework, DetectorCategory::Platform] {
            assert!(r.detectors().iter().filter(|d| d.category == cat).count() >= 10, "{cat}");
        }
    }

    #[test]
    fn javascript_keywords() {
        let found = registry().detect("console.log(x); setTimeout(f, 0)", None);
        assert_eq!(names(&found), ["JavaScript"]);
        assert_eq!(found[0].source, DetectionSource::Snippet);
        assert_eq!(found[0].matched_keyword, "console.log");
    }

    #[test]
    fn react_reported_once_preferring_snippet() {
        let found = registry().detect("const [a, setA] = useState(0)", Some("componentDidMount() { }"));
        let react: Vec<_> = found.iter().filter(|d| d.detector_name == "React").collect();
        assert_eq!(react.len(), 1);
        assert_eq!(react[0].source, DetectionSource::Snippet);
        assert_eq!(react[0].matched_keyword, "useState");
    }

    #[test]
    fn fallback_to_parent_page() {
        let found = registry().detect("a plain sentence", Some("call componentDidMount here"));
        assert_eq!(names(&found), ["React"]);
        assert_eq!(found[0].source, DetectionSource::ParentPage);
    }

    #[test]
    fn nothing_detected_in_plain_prose() {
        assert!(registry().detect("we compared two options", Some("nothing relevant")).is_empty());
    }

    #[test]
    fn keywords_respect_token_boundaries() {
        assert!(registry().detect("call useStateful() and myuseState", None).is_empty());
        assert_eq!(names(&registry().detect("useState()", None)), ["React"]);
    }

    #[test]
    fn keyword_match_is_case_sensitive() {
        assert!(registry().detect("USESTATE", None).is_empty());
    }

    #[test]
    fn duplicate_keywords_rejected() {
        let toml = r#"
            [[detector]]
            name = "PHP"
            category = "language"
            keywords = ["$"]
            [[detector]]
            name = "jQuery"
            category = "framework"
            keywords = ["$", "jQuery"]
        "#;
        match DetectorRegistry::from_toml(toml) {
            Err(RegistryError::Invalid(p)) => assert_eq!(
                p,
                vec![RegistryProblem::DuplicateKeyword { keyword: "$".into(), first: "PHP".into(), second: "jQuery".into() }]
            ),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_keywords_and_bad_patterns_rejected() {
        let toml = r#"
            [[detector]]
            name = "X"
            category = "platform"
            keywords = []
            version_url_patterns = ["no-group", "(unclosed"]
        "#;
        let Err(RegistryError::Invalid(p)) = DetectorRegistry::from_toml(toml) else { panic!() };
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn version_near_name() {
        let cfg = ThresholdConfig::default();
        let r = registry();
        let d = detection("Angular", "Angular");
        assert_eq!(r.extract_version(&d, "time to migrate to Angular 9 today", None, &cfg).as_deref(), Some("9"));
        let d = detection("React", "useState");
        assert_eq!(r.extract_version(&d, "Hooks landed in React 16.8 so useState works", None, &cfg).as_deref(), Some("16.8"));
        let d = detection("Python", "def ");
        assert_eq!(r.extract_version(&d, "tested on Python 3.5.", None, &cfg).as_deref(), Some("3.5"));
    }

    #[test]
    fn version_from_url_pattern() {
        let cfg = ThresholdConfig::default();
        let d = detection("Java", "ArrayList<");
        let url = Url::parse("https://docs.oracle.com/javase/8/docs/api/").unwrap();
        assert_eq!(
            registry().extract_version(&d, "ArrayList<String> list = new ArrayList<>();", Some(&url), &cfg).as_deref(),
            Some("8")
        );
    }

    #[test]
    fn no_version_anywhere() {
        let cfg = ThresholdConfig::default();
        let d = detection("Java", "ArrayList<");
        let url = Url::parse("https://example.com/blog/lists").unwrap();
        assert_eq!(registry().extract_version(&d, "use an ArrayList< here", Some(&url), &cfg), None);
    }

    #[test]
    fn code_arguments_are_not_versions() {
        let cfg = ThresholdConfig::default();
        let d = detection("Python", "range(");
        assert_eq!(registry().extract_version(&d, "for x in range(10): print(x)", None, &cfg), None);
    }

    #[test]
    fn bare_integers_need_an_adjacent_anchor() {
        let cfg = ThresholdConfig::default();
        let numpy = detection("NumPy", "np.");
        assert_eq!(registry().extract_version(&numpy, "a = np.arange(5)\nb = a * 2  # doubled", None, &cfg), None);
        let python = detection("Python", "Python");
        assert_eq!(registry().extract_version(&python, "Python lists of 1000 rows", None, &cfg), None);
        assert_eq!(registry().extract_version(&python, "Python 3 lists", None, &cfg).as_deref(), Some("3"));
        assert_eq!(registry().extract_version(&python, "in Python the 3.8 release", None, &cfg).as_deref(), Some("3.8"));
    }

    #[test]
    fn equidistant_tokens_prefer_following() {
        let cfg = ThresholdConfig::default();
        let d = detection("Vue.js", "Vue.js");
        assert_eq!(registry().extract_version(&d, "2.6 Vue.js 3.0", None, &cfg).as_deref(), Some("3.0"));
    }

    #[test]
    fn adjacent_name_versions_and_years() {
        let cfg = ThresholdConfig::default();
        let r = registry();
        assert_eq!(r.extract_version(&detection("C++", "std::"), "needs C++17 support", None, &cfg).as_deref(), Some("17"));
        assert_eq!(r.extract_version(&detection("React", "React"), "React in 2019 was", None, &cfg), None);
        assert_eq!(r.extract_version(&detection("React", "React"), "React on 2019-05-01", None, &cfg), None);
    }

    #[test]
    fn vicinity_limits_search() {
        let cfg = ThresholdConfig { version_vicinity: 5, ..ThresholdConfig::default() };
        let d = detection("Angular", "Angular");
        assert_eq!(registry().extract_version(&d, "Angular is a framework, version 9", None, &cfg), None);
    }

    #[test]
    fn version_grammar() {
        assert!(is_version_token("16.13.1"));
        assert!(is_version_token("9"));
        assert!(!is_version_token("1..2"));
        assert!(!is_version_token("v9"));
        assert!(!is_version_token(""));
    }
}
