use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn egorank(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_egorank")).current_dir(dir).args(args).output().unwrap()
}

fn synth(members: &str, n_it: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = egorank(dir.path(), &["synth", "--out", ".", "--members", members, "--n-it", n_it]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn missing_member_list_exits_with_data_error() {
    let dir = synth("20", "5");
    std::fs::remove_file(dir.path().join("dataset_5.csv")).unwrap();
    let out = egorank(dir.path(), &["ingest", "--config", "egorank.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("5"));
}

#[test]
fn unknown_config_key_and_flag_are_rejected() {
    let dir = synth("20", "5");
    let cfg = std::fs::read_to_string(dir.path().join("egorank.toml")).unwrap();
    std::fs::write(dir.path().join("bad.toml"), format!("colour = \"blue\"\n{cfg}")).unwrap();
    assert_eq!(egorank(dir.path(), &["run", "--config", "bad.toml"]).status.code(), Some(1));
    assert_eq!(egorank(dir.path(), &["run", "--config", "egorank.toml", "--colour", "blue"]).status.code(), Some(1));
}

#[test]
fn small_n_it_needs_the_override() {
    let dir = synth("20", "5");
    let out = egorank(dir.path(), &["run", "--config", "egorank.toml", "--n-it", "10", "--allow-small", "false"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("50"));
    let out = egorank(dir.path(), &["run", "--config", "egorank.toml", "--n-it", "10", "--allow-small"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = synth("20", "5");
    assert!(egorank(dir.path(), &["run", "--config", "egorank.toml", "--out-dir", "a"]).status.success());
    assert!(egorank(dir.path(), &["run", "--config", "egorank.toml", "--out-dir", "b", "--parallel"]).status.success());
    let a = snapshot(&dir.path().join("a"));
    assert!(a.len() >= 5);
    assert_eq!(a, snapshot(&dir.path().join("b")));
}

#[test]
fn ingest_reports_every_dataset() {
    let dir = synth("20", "5");
    assert!(egorank(dir.path(), &["ingest", "--config", "egorank.toml"]).status.success());
    let report = json(&dir.path().join("out/ingest_report.json"));
    let counts = report["dataset_counts"].as_object().unwrap();
    assert_eq!(counts.len(), 9);
    assert_eq!(counts["5"], 20);
}

#[test]
fn bucket_without_ego_documents_gives_an_empty_ranking() {
    let dir = synth("20", "5");
    let out = egorank(dir.path(), &["rank", "--config", "egorank.toml", "--bucket", "all"]);
    assert_eq!(out.status.code(), Some(2), "rank needs a bundle first");
    assert!(egorank(dir.path(), &["ingest", "--config", "egorank.toml"]).status.success());
    let out = egorank(dir.path(), &["rank", "--config", "egorank.toml", "--bucket", "Technology/Positive"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("out/ranking-technology-positive.json"));
    assert!(report["entries"].as_array().unwrap().is_empty());
    assert!(report["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().contains("no ego documents")));
    let csv = std::fs::read_to_string(dir.path().join("out/ranking-technology-positive.csv")).unwrap();
    assert_eq!(csv, "rank,member_id,score,best_doc_id\n");
}

#[test]
fn all_default_selection_leaves_no_effective_targets() {
    let dir = synth("20", "5");
    let out = egorank(dir.path(), &["run", "--config", "egorank.toml", "--threshold", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("out/targets-politics-positive.json"));
    assert_eq!(report["d_it"], 5);
    assert!(report["effective"].as_array().unwrap().is_empty());
    assert!(!report["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn ranking_csv_has_the_documented_header() {
    let dir = synth("20", "5");
    assert!(egorank(dir.path(), &["run", "--config", "egorank.toml"]).status.success());
    let csv = std::fs::read_to_string(dir.path().join("out/ranking-politics-positive.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("rank,member_id,score,best_doc_id"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    let targets = json(&dir.path().join("out/targets-politics-positive.json"));
    assert_eq!(targets["config_hash"].as_str().unwrap().len(), 64);
}
