mod common;

use common::*;
use tablecheck_core::appraisal::{assemble_report, AppraisalInput, BadgeLevel, ConsumerState};

#[test]
fn golden_report_matches_direct_assembly() {
    let tmp = tempfile::tempdir().unwrap();
    let (store, id) = import_into(tmp.path(), &bundle_dir());
    let table = store.table(&id).unwrap();
    let snippets = store.snippets(&id).unwrap();
    let log = store.session(&id).unwrap();
    let (alternatives, author) = hand_built_externals();
    let consumer = ConsumerState::default();
    let report = assemble_report(&AppraisalInput {
        table: &table,
        snippets: &snippets,
        log: log.as_ref(),
        alternatives: &alternatives,
        author: &author,
        consumer: &consumer,
        now: fixed_now(),
    })
    .unwrap();

    assert_eq!(report.facets.trustworthiness.badge.level, BadgeLevel::Red);
    assert_eq!(report.facets.trustworthiness.badge.count, 2);
    assert_eq!(report.facets.context.badge.level, BadgeLevel::None);
    assert_eq!(report.facets.thoroughness.badge.level, BadgeLevel::None);
    let ids: Vec<_> = report.issues().map(|i| i.id.as_str()).collect();
    assert_eq!(ids, ["untrusted_domain:techgeekbuzz.com", "conflicting_cell:o2:c2"]);

    assert_golden("python-matrices.report.json", &report.to_json());
}

#[tokio::test]
async fn engine_offline_report_equals_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let (store, id) = import_into(tmp.path(), &bundle_dir());
    let engine = tablecheck_service::Engine::new(store, tablecheck_service::External::Offline);
    let report = engine.report(&id, &ConsumerState::default(), fixed_now()).await.unwrap();
    let expected = std::fs::read_to_string(golden("python-matrices.report.json")).unwrap();
    assert_eq!(report.to_json(), expected);
}
