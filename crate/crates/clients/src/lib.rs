//! Clients for the two outside services an appraisal report draws on:
//! search autocomplete (alternative options) and a code-hosting API
//! (author credibility). Both run live over HTTP or from a fixture
//! directory with no network access.

mod fixtures;
mod profile;
mod suggest;
mod transport;

use std::path::PathBuf;
use std::sync::Arc;

use url::Url;

pub use fixtures::{fixture_key, FixtureDir};
pub use profile::{aggregate_profile, fetch_author_profile, parse_profile_url, ProfileLimits, RepoPayload, UserPayload};
pub use suggest::{fetch_suggestions, parse_suggestion_payload, suggestions_for_options};
pub use transport::{
    get_with_retry, HttpRequest, HttpResponse, LiveTransport, OfflineTransport, PanicTransport, RetryPolicy, Transport,
    TransportError, DEFAULT_PER_HOST_LIMIT, DEFAULT_TIMEOUT,
};

pub const DEFAULT_SUGGEST_URL: &str = "https://suggestqueries.google.com/complete/search?client=firefox";
pub const DEFAULT_GITHUB_API: &str = "https://api.github.com";

pub const ENV_SUGGEST_URL: &str = "TABLECHECK_SUGGEST_URL";
pub const ENV_GITHUB_API: &str = "TABLECHECK_GITHUB_API";
pub const ENV_GITHUB_TOKEN: &str = "GITHUB_TOKEN";

/// Longest suggestion or profile string kept, in characters.
pub const MAX_TEXT_CHARS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClientError {
    #[error("option name is empty")]
    EmptyOptionName,
    #[error("unsupported profile host: {0}")]
    UnsupportedHost(String),
    #[error("not a profile URL: {0}")]
    InvalidProfileUrl(String),
    #[error("profile not found: {0}")]
    ProfileNotFound(String),
    #[error("service unavailable: {0}")]
    ServiceUnavailable(String),
    #[error("no fixture at {}", .0.display())]
    MissingFixture(PathBuf),
    #[error("malformed payload from {source_name}: {reason}")]
    BadPayload { source_name: String, reason: String },
}

#[derive(Debug, Clone)]
pub struct Endpoints {
    /// Autocomplete endpoint; the query is appended as the `q` parameter.
    pub suggest: Url,
    pub github_api: Url,
    pub github_token: Option<String>,
}

impl Default for Endpoints {
    fn default() -> Self {
        Self {
            suggest: Url::parse(DEFAULT_SUGGEST_URL).expect("valid default"),
            github_api: Url::parse(DEFAULT_GITHUB_API).expect("valid default"),
            github_token: None,
        }
    }
}

impl Endpoints {
    /// Defaults overridden by `TABLECHECK_SUGGEST_URL`, `TABLECHECK_GITHUB_API`
    /// and `GITHUB_TOKEN` where set.
    pub fn from_env() -> Result<Self, url::ParseError> {
        let mut e = Self::default();
        if let Ok(v) = std::env::var(ENV_SUGGEST_URL) {
            e.suggest = Url::parse(&v)?;
        }
        if let Ok(v) = std::env::var(ENV_GITHUB_API) {
            e.github_api = Url::parse(&v)?;
        }
        e.github_token = std::env::var(ENV_GITHUB_TOKEN).ok().filter(|t| !t.is_empty());
        Ok(e)
    }
}

#[derive(Debug, Clone)]
pub enum Mode {
    Live,
    Fixture(FixtureDir),
}

/// Where requests go and how. Cheap to clone and safe to share between
/// concurrent callers.
#[derive(Clone)]
pub struct Connector {
    pub transport: Arc<dyn Transport>,
    pub mode: Mode,
    pub endpoints: Endpoints,
    pub retry: RetryPolicy,
}

impl std::fmt::Debug for Connector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Connector").field("mode", &self.mode).field("retry", &self.retry).finish_non_exhaustive()
    }
}

impl Connector {
    pub fn live(transport: Arc<dyn Transport>, endpoints: Endpoints) -> Self {
        Self { transport, mode: Mode::Live, endpoints, retry: RetryPolicy::default() }
    }

    /// Fixture mode. The transport is kept only so tests can hand in a
    /// [`PanicTransport`] and prove it is never touched.
    pub fn fixtures(dir: impl Into<PathBuf>, transport: Arc<dyn Transport>) -> Self {
        Self {
            transport,
            mode: Mode::Fixture(FixtureDir::new(dir)),
            endpoints: Endpoints::default(),
            retry: RetryPolicy::default(),
        }
    }

    pub fn offline(dir: impl Into<PathBuf>) -> Self {
        Self::fixtures(dir, Arc::new(OfflineTransport))
    }
}

/// Trims, drops control characters and caps length.
pub fn sanitize(text: &str) -> String {
    text.chars()
        .filter(|c| !c.is_control())
        .collect::<String>()
        .trim()
        .chars()
        .take(MAX_TEXT_CHARS)
        .collect::<String>()
        .trim_end()
        .to_string()
}

pub(crate) fn read_fixture(path: PathBuf) -> Result<Vec<u8>, ClientError> {
    match std::fs::read(&path) {
        Ok(b) => Ok(b),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(ClientError::MissingFixture(path)),
        Err(e) => Err(ClientError::ServiceUnavailable(format!("{}: {e}", path.display()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sanitize_strips_and_caps() {
        assert_eq!(sanitize("  react\u{0007} vs\tvue \n"), "react vsvue");
        assert_eq!(sanitize(&"x".repeat(500)).chars().count(), MAX_TEXT_CHARS);
        assert_eq!(sanitize("日本語"), "日本語");
    }
}
