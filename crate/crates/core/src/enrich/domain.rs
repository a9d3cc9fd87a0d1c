//! Registrable-domain extraction backed by an embedded subset of the Public
//! Suffix List. Rules follow the list's format: plain suffixes, `*.`
//! wildcards and `!` exceptions; the longest matching rule wins and a host
//! with no matching rule falls back to its top-level label.

use std::collections::HashSet;
use std::net::IpAddr;
use std::sync::OnceLock;

use url::{Host, Url};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("invalid URL: {0}")]
    InvalidUrl(String),
}

const SUFFIX_RULES: &str = include_str!("public_suffixes.dat");

struct Rules {
    exact: HashSet<&'static str>,
    wildcard: HashSet<&'static str>,
    exception: HashSet<&'static str>,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| {
        let mut r = Rules { exact: HashSet::new(), wildcard: HashSet::new(), exception: HashSet::new() };
        for line in SUFFIX_RULES.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            if let Some(rest) = line.strip_prefix('!') {
                r.exception.insert(rest);
            } else if let Some(rest) = line.strip_prefix("*.") {
                r.wildcard.insert(rest);
            } else {
                r.exact.insert(line);
            }
        }
        r
    })
}

/// Number of labels in the public suffix of `host` (already lowercase).
fn suffix_len(labels: &[&str]) -> usize {
    let r = rules();
    let n = labels.len();
    let mut best = 1;
    for start in 0..n {
        let candidate = labels[start..].join(".");
        let len = n - start;
        if r.exception.contains(candidate.as_str()) {
            // an exception rule's suffix is the rule minus its first label
            return len - 1;
        }
        if r.exact.contains(candidate.as_str()) {
            best = best.max(len);
        }
        if start + 1 < n && r.wildcard.contains(labels[start + 1..].join(".").as_str()) {
            best = best.max(len);
        }
    }
    best
}

/// Registrable domain (public suffix plus one label) of a host name. Hosts
/// that are themselves a public suffix are returned unchanged.
pub fn registrable_domain(host: &str) -> String {
    let host = host.trim_end_matches('.').to_ascii_lowercase();
    if host.parse::<IpAddr>().is_ok() {
        return host;
    }
    let labels: Vec<&str> = host.split('.').collect();
    let suffix = suffix_len(&labels);
    if labels.len() <= suffix {
        return host;
    }
    labels[labels.len() - suffix - 1..].join(".")
}

/// Lowercase registrable domain of an absolute URL, e.g.
/// `https://www.stackoverflow.com/q/1` → `stackoverflow.com`.
pub fn extract_domain(url: &str) -> Result<String, DomainError> {
    let parsed = Url::parse(url).map_err(|e| DomainError::InvalidUrl(format!("{url}: {e}")))?;
    domain_of(&parsed)
}

pub fn domain_of(url: &Url) -> Result<String, DomainError> {
    match url.host() {
        Some(Host::Domain(d)) => Ok(registrable_domain(d)),
        Some(Host::Ipv4(ip)) => Ok(ip.to_string()),
        Some(Host::Ipv6(ip)) => Ok(ip.to_string()),
        None => Err(DomainError::InvalidUrl(format!("{url}: no host"))),
    }
}

/// Normalizes user input naming a domain (bare host or URL) to its
/// registrable domain. Returns `None` for input that is not a host name.
pub fn normalize_domain_input(input: &str) -> Option<String> {
    let trimmed = input.trim();
    if trimmed.is_empty() {
        return None;
    }
    let candidate = if trimmed.contains("://") { trimmed.to_string() } else { format!("https://{trimmed}") };
    let url = Url::parse(&candidate).ok()?;
    if !trimmed.contains("://") && (url.path() != "/" || url.query().is_some()) {
        return None;
    }
    match url.host()? {
        Host::Domain(d) if d.contains('.') => {
            let d = registrable_domain(d);
            let labels: Vec<&str> = d.split('.').collect();
            (suffix_len(&labels) < labels.len()).then_some(d)
        }
        _ => None,
    }
}
