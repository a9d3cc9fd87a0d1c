use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::enrich::normalize_domain_input;

/// Domains trusted out of the box: major Q&A sites, code hosting, and the
/// official documentation sites of common languages and frameworks.
pub const DEFAULT_TRUSTED_DOMAINS: [&str; 25] = [
    "stackoverflow.com",
    "stackexchange.com",
    "superuser.com",
    "serverfault.com",
    "askubuntu.com",
    "github.com",
    "medium.com",
    "dev.to",
    "angular.io",
    "reactjs.org",
    "vuejs.org",
    "nodejs.org",
    "python.org",
    "numpy.org",
    "scipy.org",
    "pydata.org",
    "mozilla.org",
    "microsoft.com",
    "oracle.com",
    "docker.com",
    "kubernetes.io",
    "djangoproject.com",
    "spring.io",
    "jquery.com",
    "typescriptlang.org",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WhitelistSource {
    #[default]
    Default,
    UserEdited,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Whitelist {
    pub domains: BTreeSet<String>,
    pub source: WhitelistSource,
}

impl Default for Whitelist {
    fn default() -> Self {
        Whitelist { domains: DEFAULT_TRUSTED_DOMAINS.iter().map(|d| d.to_string()).collect(), source: WhitelistSource::Default }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a domain name: {0:?}")]
pub struct InvalidDomain(pub String);

impl Whitelist {
    /// Builds a user-edited whitelist, normalizing each entry to its
    /// registrable domain.
    pub fn from_entries<I, S>(entries: I) -> Result<Whitelist, InvalidDomain>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let domains = entries
            .into_iter()
            .map(|e| normalize_domain_input(e.as_ref()).ok_or_else(|| InvalidDomain(e.as_ref().to_string())))
            .collect::<Result<_, _>>()?;
        Ok(Whitelist { domains, source: WhitelistSource::UserEdited })
    }

    pub fn contains(&self, domain: &str) -> bool {
        self.domains.contains(domain)
    }

    /// Adds a domain; returns the normalized form.
    pub fn add(&mut self, input: &str) -> Result<String, InvalidDomain> {
        let d = normalize_domain_input(input).ok_or_else(|| InvalidDomain(input.to_string()))?;
        self.domains.insert(d.clone());
        self.source = WhitelistSource::UserEdited;
        Ok(d)
    }

    pub fn remove(&mut self, input: &str) -> Result<String, InvalidDomain> {
        let d = normalize_domain_input(input).ok_or_else(|| InvalidDomain(input.to_string()))?;
        self.domains.remove(&d);
        self.source = WhitelistSource::UserEdited;
        Ok(d)
    }

    /// Whether `domain` is trusted only because the consumer added it.
    pub fn added_by_consumer(&self, domain: &str) -> bool {
        self.contains(domain) && !DEFAULT_TRUSTED_DOMAINS.contains(&domain)
    }
}
