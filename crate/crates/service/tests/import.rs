mod common;

use common::*;
use tablecheck_core::appraisal::{ConsumerState, GroupState};
use tablecheck_core::enrich::DetectorRegistry;
use tablecheck_core::ThresholdConfig;
use tablecheck_service::{import_bundle, Engine, External, ImportError, Store};

fn import(store: &Store, dir: &std::path::Path) -> Result<tablecheck_service::ImportOutcome, ImportError> {
    import_bundle(store, dir, &DetectorRegistry::default_registry(), &ThresholdConfig::default())
}

fn mutable_bundle(tmp: &std::path::Path) -> std::path::PathBuf {
    let dir = tmp.join("bundle");
    copy_tree(&bundle_dir(), &dir);
    dir
}

#[test]
fn reimport_yields_the_same_id() {
    let tmp = tempfile::tempdir().unwrap();
    let store = Store::open(tmp.path().join("store")).unwrap();
    let a = import(&store, &bundle_dir()).unwrap();
    let b = import(&store, &bundle_dir()).unwrap();
    assert_eq!(a.table_id, b.table_id);
    assert_eq!(a.snippet_count, 6);
    assert!(a.has_session_log);
    assert_eq!(store.table_ids().unwrap(), vec![a.table_id.to_string()]);
}

#[test]
fn id_ignores_the_draft_id_but_not_content() {
    let tmp = tempfile::tempdir().unwrap();
    let store = Store::open(tmp.path().join("store")).unwrap();
    let original = import(&store, &bundle_dir()).unwrap().table_id;

    let dir = mutable_bundle(tmp.path());
    let path = dir.join("table.json");
    let mut table: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    table["id"] = "renamed-draft".into();
    std::fs::write(&path, serde_json::to_string(&table).unwrap()).unwrap();
    assert_eq!(import(&store, &dir).unwrap().table_id, original);

    table["title"] = "Another title".into();
    std::fs::write(&path, serde_json::to_string(&table).unwrap()).unwrap();
    assert_ne!(import(&store, &dir).unwrap().table_id, original);
}

#[tokio::test]
async fn bundle_without_session_log_reports_no_activity_data() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = mutable_bundle(tmp.path());
    std::fs::remove_file(dir.join("session.log")).unwrap();
    let store = Store::open(tmp.path().join("store")).unwrap();
    let outcome = import(&store, &dir).unwrap();
    assert!(!outcome.has_session_log);
    assert!(outcome.warnings.iter().any(|w| w.contains("session.log")));

    let engine = Engine::new(store, External::Offline);
    let report = engine.report(outcome.table_id.as_str(), &ConsumerState::default(), fixed_now()).await.unwrap();
    let group = report.facets.thoroughness.group("research_process").unwrap();
    assert_eq!(group.state, GroupState::NoData);
    assert_eq!(group.detail.as_deref(), Some("no activity data"));
    let timeline = engine.timeline(outcome.table_id.as_str(), &ThresholdConfig::default()).unwrap();
    assert_eq!(timeline, tablecheck_service::TimelineView::NoData);
}

#[test]
fn malformed_table_names_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = mutable_bundle(tmp.path());
    std::fs::write(dir.join("table.json"), "{ not json").unwrap();
    let store = Store::open(tmp.path().join("store")).unwrap();
    let err = import(&store, &dir).unwrap_err();
    assert!(matches!(&err, ImportError::File { path, .. } if path.ends_with("table.json")), "{err}");
    assert!(err.to_string().contains("table.json"));
}

#[test]
fn dangling_snippet_reference_is_invalid() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = mutable_bundle(tmp.path());
    std::fs::remove_file(dir.join("snippets/s6.json")).unwrap();
    let store = Store::open(tmp.path().join("store")).unwrap();
    match import(&store, &dir).unwrap_err() {
        ImportError::Invalid { violations, .. } => {
            assert!(!violations.is_empty());
            assert!(violations.iter().any(|v| v.to_string().contains("s6")), "{violations:?}");
        }
        other => panic!("expected Invalid, got {other}"),
    }
    assert!(store.table_ids().unwrap().is_empty());
}

#[test]
fn missing_snippets_dir_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = mutable_bundle(tmp.path());
    std::fs::remove_dir_all(dir.join("snippets")).unwrap();
    let store = Store::open(tmp.path().join("store")).unwrap();
    let err = import(&store, &dir).unwrap_err();
    assert!(err.to_string().contains("snippets"), "{err}");
}

#[test]
fn bad_snippet_file_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = mutable_bundle(tmp.path());
    std::fs::write(dir.join("snippets/s4.json"), r#"{"id": "s4"}"#).unwrap();
    let store = Store::open(tmp.path().join("store")).unwrap();
    let err = import(&store, &dir).unwrap_err();
    assert!(err.to_string().contains("s4.json"), "{err}");
}

#[test]
fn not_a_directory_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let store = Store::open(tmp.path().join("store")).unwrap();
    assert!(import(&store, &tmp.path().join("missing")).is_err());
}

#[test]
fn stored_documents_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let (store, id) = import_into(tmp.path(), &bundle_dir());
    let reopened = Store::open(tmp.path()).unwrap();
    assert_eq!(store.table(&id).unwrap(), reopened.table(&id).unwrap());
    assert_eq!(store.snippets(&id).unwrap(), reopened.snippets(&id).unwrap());
    assert!(reopened.session(&id).unwrap().is_some());
    assert!(reopened.table("t-0000000000000000").is_err());
    assert!(reopened.table("../etc").is_err());
}
