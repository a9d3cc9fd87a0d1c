use std::path::PathBuf;

use chrono::{TimeZone, Utc};
use serde::Deserialize;
use tablecheck_core::enrich::{detect_platforms, DetectorRegistry};
use tablecheck_core::html::Document;
use tablecheck_core::{Snippet, ThresholdConfig};
use url::Url;

#[derive(Deserialize)]
struct Case {
    url: String,
    snippet: String,
    technology: String,
    version: String,
}

fn corpus() -> Vec<(String, Case, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/detectors");
    let mut entries: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    entries
        .into_iter()
        .map(|p| {
            let case: Case = toml::from_str(&std::fs::read_to_string(p.join("case.toml")).unwrap()).unwrap();
            let html = std::fs::read_to_string(p.join("page.html")).unwrap();
            (p.file_name().unwrap().to_string_lossy().into_owned(), case, html)
        })
        .collect()
}

#[test]
fn corpus_detection_and_versions() {
    let registry = DetectorRegistry::default_registry();
    let cfg = ThresholdConfig::default();
    let at = Utc.with_ymd_and_hms(2020, 6, 1, 0, 0, 0).unwrap();
    let cases = corpus();
    assert_eq!(cases.len(), 25);

    let mut detected = 0;
    let mut versioned = 0;
    let mut misses = Vec::new();
    for (name, case, html) in &cases {
        let url = Url::parse(&case.url).unwrap();
        let snippet = Snippet::from_capture("s", case.snippet.as_str(), url, at, None);
        let parent = Document::parse(html).text();
        assert!(parent.contains(&snippet.plain_text), "{name}: snippet text must appear on the page");
        let found = detect_platforms(&snippet, Some(&parent), &registry, &cfg);
        match found.iter().find(|d| d.detector_name == case.technology) {
            Some(d) => {
                detected += 1;
                if d.version.as_deref() == Some(case.version.as_str()) {
                    versioned += 1;
                } else {
                    misses.push(format!("{name}: version {:?}, expected {}", d.version, case.version));
                }
            }
            None => misses.push(format!("{name}: {} not detected", case.technology)),
        }
    }
    println!("detected {detected}/25, versions {versioned}/25");
    assert_eq!(detected, 25, "{misses:#?}");
    assert!(versioned >= 24, "{misses:#?}");
}
