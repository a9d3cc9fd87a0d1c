#![allow(dead_code)]

use std::path::{Path, PathBuf};

use chrono::{DateTime, TimeZone, Utc};
use tablecheck_core::appraisal::{AuthorCredibility, Fetched, OptionSuggestions, RepoStars, SuggestionResponse};
use tablecheck_core::enrich::DetectorRegistry;
use tablecheck_core::ThresholdConfig;
use tablecheck_service::{import_bundle, Store};
use url::Url;

pub fn bundle_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/python-matrices")
}

pub fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

pub fn fixed_now() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 9, 1, 0, 0, 0).unwrap()
}

pub const NOW: &str = "2020-09-01T00:00:00Z";

pub fn import_into(dir: &Path, bundle: &Path) -> (Store, String) {
    let store = Store::open(dir).unwrap();
    let outcome = import_bundle(&store, bundle, &DetectorRegistry::default_registry(), &ThresholdConfig::default()).unwrap();
    (store, outcome.table_id.to_string())
}

/// Compares against a golden file; `UPDATE_GOLDEN=1` rewrites it instead.
pub fn assert_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{} differs from the generated output", path.display());
}

/// Copies a directory tree so a test can mutate a bundle.
pub fn copy_tree(src: &Path, dest: &Path) {
    std::fs::create_dir_all(dest).unwrap();
    for entry in std::fs::read_dir(src).unwrap() {
        let entry = entry.unwrap();
        let to = dest.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_tree(&entry.path(), &to);
        } else {
            std::fs::copy(entry.path(), to).unwrap();
        }
    }
}

/// Builds the external inputs straight from the bundle's fixture files,
/// without going through the clients crate.
pub fn hand_built_externals() -> (Fetched<Vec<OptionSuggestions>>, Fetched<AuthorCredibility>) {
    let dir = bundle_dir().join("fixtures/suggestions");
    let read = |file: &str| -> SuggestionResponse {
        let v: (String, Vec<String>) = serde_json::from_str(&std::fs::read_to_string(dir.join(file)).unwrap()).unwrap();
        SuggestionResponse { query: v.0, suggestions: v.1.into_iter().take(10).collect() }
    };
    let alternatives = vec![
        OptionSuggestions {
            option: "numpy ndarray".into(),
            responses: vec![read("numpy-ndarray-vs.json"), read("numpy-ndarray-versus.json")],
        },
        OptionSuggestions {
            option: "python list".into(),
            responses: vec![read("python-list-vs.json"), read("python-list-versus.json")],
        },
    ];
    let repo = |name: &str, stars| RepoStars { name: name.into(), stars };
    let author = AuthorCredibility {
        display_name: "Mira Trix".into(),
        top_repo_stars: vec![repo("sparse-tricks", 1200), repo("blas-notes", 40), repo("dotfiles", 3), repo("matrix-bench", 3)],
        top_languages: vec!["Python".into(), "C".into(), "Shell".into()],
        affiliation: Some("Open Data Lab".into()),
        profile_url: Url::parse("https://github.com/matrixfan").unwrap(),
    };
    (Fetched::Available { value: alternatives }, Fetched::Available { value: author })
}
