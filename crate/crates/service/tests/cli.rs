mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;

fn tablecheck(store: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tablecheck"))
        .arg("--store")
        .arg(store)
        .args(args)
        .env_remove("TABLECHECK_OFFLINE")
        .env_remove("TABLECHECK_STORE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn imported(store: &Path) -> String {
    let o = tablecheck(store, &["import", bundle_dir().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    stdout(&o).trim().to_string()
}

#[test]
fn import_then_appraise_prints_the_golden_json() {
    let tmp = tempfile::tempdir().unwrap();
    let id = imported(tmp.path());
    assert!(id.starts_with("t-"));
    let o = tablecheck(tmp.path(), &["appraise", &id, "--offline", "--format", "json", "--now", NOW]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let expected = std::fs::read_to_string(golden("python-matrices.report.json")).unwrap();
    assert_eq!(stdout(&o), expected);
}

#[test]
fn text_format_shows_badges_and_issues() {
    let tmp = tempfile::tempdir().unwrap();
    let id = imported(tmp.path());
    let o = tablecheck(tmp.path(), &["appraise", &id, "--offline", "--now", NOW]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("TRUSTWORTHINESS  [RED 2]"), "{text}");
    assert!(text.contains("<untrusted_domain:techgeekbuzz.com>"));
    assert!(text.contains("<conflicting_cell:o2:c2>"));
    assert!(text.contains("CONTEXT  [ok]"));
}

#[test]
fn whitelist_file_replaces_the_default_list() {
    let tmp = tempfile::tempdir().unwrap();
    let id = imported(tmp.path());
    let list = tmp.path().join("trusted.txt");
    std::fs::write(&list, "# mine\nstackoverflow.com\nmedium.com\ntechgeekbuzz.com  # ok\n").unwrap();
    let o = tablecheck(tmp.path(), &["appraise", &id, "--offline", "--now", NOW, "--whitelist", list.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("TRUSTWORTHINESS  [yellow 1]"));

    std::fs::write(&list, "not a domain\n").unwrap();
    let o = tablecheck(tmp.path(), &["appraise", &id, "--offline", "--now", NOW, "--whitelist", list.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("trusted.txt"));
}

#[test]
fn adjust_persists_for_the_consumer() {
    let tmp = tempfile::tempdir().unwrap();
    let id = imported(tmp.path());
    let o = tablecheck(
        tmp.path(),
        &[
            "adjust",
            &id,
            "--consumer",
            "dana",
            "--add-trusted",
            "techgeekbuzz.com",
            "--offline",
            "--now",
            NOW,
            "--format",
            "json",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["facets"]["trustworthiness"]["badge"], serde_json::json!({ "level": "yellow", "count": 1 }));

    let o = tablecheck(tmp.path(), &["appraise", &id, "--offline", "--now", NOW, "--consumer", "dana"]);
    assert!(stdout(&o).contains("[yellow 1]"));
    let o = tablecheck(tmp.path(), &["appraise", &id, "--offline", "--now", NOW]);
    assert!(stdout(&o).contains("[RED 2]"));

    let o = tablecheck(tmp.path(), &["adjust", &id, "--consumer", "dana", "--dismiss", "nope", "--offline", "--now", NOW]);
    assert_eq!(o.status.code(), Some(1));
    let o = tablecheck(
        tmp.path(),
        &["adjust", &id, "--consumer", "dana", "--set", "diversity_min_domains=4", "--offline", "--now", NOW],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("low_diversity"));
}

#[test]
fn duplicate_keyword_registry_fails_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let registry = tmp.path().join("registry.toml");
    std::fs::write(
        &registry,
        "[[detector]]\nname = \"A\"\ncategory = \"language\"\nkeywords = [\"shared\"]\n\n\
         [[detector]]\nname = \"B\"\ncategory = \"framework\"\nkeywords = [\"shared\", \"other\"]\n",
    )
    .unwrap();
    let o = tablecheck(tmp.path(), &["detectors", "validate", registry.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("shared"), "{}", stderr(&o));

    let builtin = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/detectors/default.toml");
    let o = tablecheck(tmp.path(), &["detectors", "validate", builtin.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("ok"));
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(tablecheck(tmp.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(tablecheck(tmp.path(), &["appraise"]).status.code(), Some(2));
    assert_eq!(tablecheck(tmp.path(), &["adjust", "t-1", "--consumer", "x"]).status.code(), Some(2));
    assert_eq!(tablecheck(tmp.path(), &["appraise", "t-1", "--now", "soon"]).status.code(), Some(2));
    assert_eq!(tablecheck(tmp.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_table_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tablecheck(tmp.path(), &["appraise", "t-0000000000000000", "--offline"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn invalid_bundle_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tablecheck(tmp.path(), &["import", tmp.path().join("nope").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn offline_env_accepts_boolish_values() {
    let tmp = tempfile::tempdir().unwrap();
    let id = imported(tmp.path());
    for value in ["1", "true", "yes"] {
        let o = Command::new(env!("CARGO_BIN_EXE_tablecheck"))
            .args(["--store", tmp.path().to_str().unwrap(), "appraise", &id, "--now", NOW, "--format", "json"])
            .env("TABLECHECK_OFFLINE", value)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{value}: {}", stderr(&o));
        assert_eq!(stdout(&o), std::fs::read_to_string(golden("python-matrices.report.json")).unwrap());
    }
}
