use std::path::{Path, PathBuf};

/// Canned responses on disk:
///
/// ```text
/// <root>/suggestions/<key>.json        ["<query>", ["s1", "s2", ...]]
/// <root>/profiles/<user>/user.json     code-hosting user payload
/// <root>/profiles/<user>/repos.json    code-hosting repository list
/// ```
///
/// `<key>` is [`fixture_key`] of the query, `<user>` the lowercased login.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureDir {
    root: PathBuf,
}

/// Lowercase, with every run of non-alphanumeric characters collapsed to
/// one `-` and no leading or trailing dash: "React  vs." becomes "react-vs".
pub fn fixture_key(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            out.push(c);
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

impl FixtureDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn suggestion_path(&self, query: &str) -> PathBuf {
        self.root.join("suggestions").join(format!("{}.json", fixture_key(query)))
    }

    pub fn profile_dir(&self, login: &str) -> PathBuf {
        self.root.join("profiles").join(login.to_lowercase())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys() {
        assert_eq!(fixture_key("React vs"), "react-vs");
        assert_eq!(fixture_key("  numpy ndarray  versus "), "numpy-ndarray-versus");
        assert_eq!(fixture_key("C++ vs"), "c-vs");
        assert_eq!(fixture_key("..."), "");
    }

    #[test]
    fn paths() {
        let f = FixtureDir::new("/x");
        assert_eq!(f.suggestion_path("python list vs"), PathBuf::from("/x/suggestions/python-list-vs.json"));
        assert_eq!(f.profile_dir("Octo"), PathBuf::from("/x/profiles/octo"));
    }
}
