use std::collections::BTreeMap;

use serde::Deserialize;
use tablecheck_core::appraisal::{AuthorCredibility, RepoStars};
use url::Url;

use crate::{get_with_retry, read_fixture, sanitize, ClientError, Connector, HttpRequest, Mode};

const SUPPORTED_HOSTS: &[&str] = &["github.com", "www.github.com"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileLimits {
    pub top_repos: usize,
    pub top_languages: usize,
}

impl Default for ProfileLimits {
    fn default() -> Self {
        Self { top_repos: 5, top_languages: 3 }
    }
}

/// The fields read from a `/users/{login}` response.
#[derive(Debug, Clone, Deserialize)]
pub struct UserPayload {
    pub login: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub company: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RepoOwner {
    pub login: String,
}

/// The fields read from each entry of a `/users/{login}/repos` response.
#[derive(Debug, Clone, Deserialize)]
pub struct RepoPayload {
    pub name: String,
    #[serde(default)]
    pub stargazers_count: u64,
    #[serde(default)]
    pub language: Option<String>,
    #[serde(default)]
    pub fork: bool,
    #[serde(default)]
    pub owner: Option<RepoOwner>,
}

/// The account login named by a profile URL such as `https://github.com/octocat`.
pub fn parse_profile_url(url: &Url) -> Result<String, ClientError> {
    let host = url.host_str().unwrap_or_default().to_ascii_lowercase();
    if !SUPPORTED_HOSTS.contains(&host.as_str()) {
        return Err(ClientError::UnsupportedHost(host));
    }
    let segments: Vec<&str> = url.path_segments().map(|s| s.filter(|x| !x.is_empty()).collect()).unwrap_or_default();
    match segments.as_slice() {
        [login]
            if login.len() <= 39 && !login.starts_with('-') && login.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') =>
        {
            Ok(login.to_string())
        }
        _ => Err(ClientError::InvalidProfileUrl(url.to_string())),
    }
}

/// Owned, non-fork repositories ranked by stars, and their languages ranked
/// by how many of those repositories use them. Ties break by name.
pub fn aggregate_profile(
    profile_url: &Url,
    user: &UserPayload,
    repos: &[RepoPayload],
    limits: ProfileLimits,
) -> AuthorCredibility {
    let owned: Vec<&RepoPayload> =
        repos.iter().filter(|r| !r.fork && r.owner.as_ref().is_none_or(|o| o.login.eq_ignore_ascii_case(&user.login))).collect();

    let mut ranked = owned.clone();
    ranked.sort_by(|a, b| b.stargazers_count.cmp(&a.stargazers_count).then_with(|| a.name.cmp(&b.name)));
    let top_repo_stars =
        ranked.iter().take(limits.top_repos).map(|r| RepoStars { name: sanitize(&r.name), stars: r.stargazers_count }).collect();

    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for lang in owned.iter().filter_map(|r| r.language.as_deref()).map(sanitize).filter(|l| !l.is_empty()) {
        *counts.entry(lang).or_default() += 1;
    }
    let mut langs: Vec<(String, usize)> = counts.into_iter().collect();
    langs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let display_name = user.name.as_deref().map(sanitize).filter(|n| !n.is_empty()).unwrap_or_else(|| sanitize(&user.login));
    let affiliation = user.company.as_deref().map(sanitize).filter(|c| !c.is_empty());
    AuthorCredibility {
        display_name,
        top_repo_stars,
        top_languages: langs.into_iter().take(limits.top_languages).map(|(l, _)| l).collect(),
        affiliation,
        profile_url: profile_url.clone(),
    }
}

fn decode<T: serde::de::DeserializeOwned>(body: &[u8], source_name: String) -> Result<T, ClientError> {
    serde_json::from_slice(body).map_err(|e| ClientError::BadPayload { source_name, reason: e.to_string() })
}

async fn api_get(connector: &Connector, path: &str, login: &str) -> Result<Vec<u8>, ClientError> {
    let url = connector.endpoints.github_api.join(path).map_err(|e| ClientError::ServiceUnavailable(e.to_string()))?;
    let mut req = HttpRequest::get(url).header("Accept", "application/vnd.github+json");
    if let Some(token) = &connector.endpoints.github_token {
        req = req.header("Authorization", format!("Bearer {token}"));
    }
    let r = get_with_retry(connector.transport.as_ref(), &req, connector.retry).await.map_err(ClientError::ServiceUnavailable)?;
    match r.status {
        200 => Ok(r.body),
        404 | 410 => Err(ClientError::ProfileNotFound(login.to_string())),
        s => Err(ClientError::ServiceUnavailable(format!("HTTP {s}"))),
    }
}

/// Public credibility figures for the account behind `profile_url`.
/// Live mode reads the first 100 owned repositories.
pub async fn fetch_author_profile(
    profile_url: &Url,
    connector: &Connector,
    limits: ProfileLimits,
) -> Result<AuthorCredibility, ClientError> {
    let login = parse_profile_url(profile_url)?;
    let (user, repos): (UserPayload, Vec<RepoPayload>) = match &connector.mode {
        Mode::Fixture(dir) => {
            let base = dir.profile_dir(&login);
            if !base.is_dir() {
                return Err(ClientError::ProfileNotFound(login));
            }
            let user_path = base.join("user.json");
            let repos_path = base.join("repos.json");
            let user = decode(&read_fixture(user_path.clone())?, user_path.display().to_string())?;
            let repos = match read_fixture(repos_path.clone()) {
                Ok(b) => decode(&b, repos_path.display().to_string())?,
                Err(ClientError::MissingFixture(_)) => Vec::new(),
                Err(e) => return Err(e),
            };
            (user, repos)
        }
        Mode::Live => {
            let user = decode(&api_get(connector, &format!("users/{login}"), &login).await?, "user".into())?;
            let repos = decode(
                &api_get(connector, &format!("users/{login}/repos?type=owner&per_page=100"), &login).await?,
                "repos".into(),
            )?;
            (user, repos)
        }
    };
    Ok(aggregate_profile(profile_url, &user, &repos, limits))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn url(s: &str) -> Url {
        Url::parse(s).unwrap()
    }

    #[test]
    fn profile_urls() {
        assert_eq!(parse_profile_url(&url("https://github.com/octocat")).unwrap(), "octocat");
        assert_eq!(parse_profile_url(&url("https://www.github.com/octo-cat/")).unwrap(), "octo-cat");
        assert_eq!(
            parse_profile_url(&url("https://gitlab.com/x")).unwrap_err(),
            ClientError::UnsupportedHost("gitlab.com".into())
        );
        assert!(matches!(parse_profile_url(&url("https://github.com/a/b")), Err(ClientError::InvalidProfileUrl(_))));
        assert!(matches!(parse_profile_url(&url("https://github.com/")), Err(ClientError::InvalidProfileUrl(_))));
    }

    fn repo(name: &str, stars: u64, lang: Option<&str>, fork: bool) -> RepoPayload {
        RepoPayload { name: name.into(), stargazers_count: stars, language: lang.map(Into::into), fork, owner: None }
    }

    #[test]
    fn aggregation_orders_and_limits() {
        let user = UserPayload { login: "dev".into(), name: None, company: Some("  Acme  ".into()) };
        let repos = vec![
            repo("small", 3, Some("Rust"), false),
            repo("big", 1200, Some("Python"), false),
            repo("forked", 9999, Some("C"), true),
            repo("mid", 40, Some("Python"), false),
            repo("tie-b", 3, None, false),
            repo("a", 1, Some("Go"), false),
            repo("b", 0, Some("Shell"), false),
        ];
        let a = aggregate_profile(&url("https://github.com/dev"), &user, &repos, ProfileLimits::default());
        let stars: Vec<_> = a.top_repo_stars.iter().map(|r| (r.name.as_str(), r.stars)).collect();
        assert_eq!(stars, [("big", 1200), ("mid", 40), ("small", 3), ("tie-b", 3), ("a", 1)]);
        assert_eq!(a.top_languages, ["Python", "Go", "Rust"]);
        assert_eq!(a.display_name, "dev");
        assert_eq!(a.affiliation.as_deref(), Some("Acme"));
    }

    #[test]
    fn repos_owned_by_others_are_skipped() {
        let user = UserPayload { login: "dev".into(), name: Some("Dev Person".into()), company: None };
        let mut other = repo("theirs", 50, Some("C"), false);
        other.owner = Some(RepoOwner { login: "someone".into() });
        let mut mine = repo("mine", 1, Some("C"), false);
        mine.owner = Some(RepoOwner { login: "DEV".into() });
        let a = aggregate_profile(&url("https://github.com/dev"), &user, &[other, mine], ProfileLimits::default());
        assert_eq!(a.top_repo_stars.len(), 1);
        assert_eq!(a.display_name, "Dev Person");
    }
}
