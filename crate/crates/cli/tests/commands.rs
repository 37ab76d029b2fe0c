use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use lodlog::ingest::LogFormat;
use lodlog::store::{self, ExportFormat, RunStore, TRUSTED};
use lodlog_cli::{analyze_run, cmd_analyze, cmd_curate, cmd_export, cmd_ingest, cmd_profile, CliError, RunConfig};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn config(input: &str, out: &Path, id: &str) -> RunConfig {
    let mut cfg = RunConfig::new(vec![fixture(input)], out);
    cfg.vocab = Some(fixture("vocab.txt"));
    cfg.topics = Some(fixture("topics.txt"));
    cfg.provenance = Some(fixture("provenance.txt"));
    cfg.run_id = Some(id.into());
    cfg
}

#[test]
fn missing_input_fails_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = RunConfig::new(vec![dir.path().join("nope.log")], &out);
    let err = cmd_curate(&cfg, &mut Vec::new(), &mut Vec::new()).unwrap_err();
    assert!(matches!(err, CliError::MissingInput(_)));
    assert!(!out.exists());

    let mut cfg = config("pipeline200.log", &out, "x");
    cfg.vocab = Some(dir.path().join("missing-vocab.txt"));
    assert!(cmd_profile(&cfg, &mut Vec::new(), &mut Vec::new()).is_err());
    assert!(!out.exists());
}

#[test]
fn ingest_writes_summary_and_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("ingest10.csv", dir.path(), "ing");
    cfg.format = LogFormat::Csv;
    let mut err = Vec::new();
    let run = cmd_ingest(&cfg, &mut Vec::new(), &mut err).unwrap();
    let store = RunStore::open(&run).unwrap();
    let summary = store.read_file("ingest.summary").unwrap();
    assert!(summary.contains("lines 10\nrecords 9\nerrors 1\n"), "{summary}");
    assert!(summary.contains("kept 6\n"));
    assert_eq!(store.read_snapshot("ingest").unwrap().len(), 6);
    assert!(String::from_utf8(err).unwrap().contains("warning"));
}

#[test]
fn profile_report_lists_labels_and_optional_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("profile10.log", dir.path(), "p");
    cfg.csv = true;
    let report = cmd_profile(&cfg, &mut Vec::new(), &mut Vec::new()).unwrap();
    let store = RunStore::open(&dir.path().join("run-p")).unwrap();
    let text = store.read_file("profile.report").unwrap();
    assert_eq!(text, report.to_text());
    assert!(text.starts_with("total 10\n"));
    assert!(text.contains("count duplication Duplicate 1\n"));
    assert!(text.contains("count behavior Robot 1\n"));
    let csv = store.read_file("profile.csv").unwrap();
    assert!(csv.starts_with("analyzer,label,count\n"));
    assert_eq!(csv.lines().count(), 1 + 42);
}

#[test]
fn curate_then_analyze_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = cmd_curate(
        &config("pipeline200.log", dir.path(), "c"),
        &mut Vec::new(),
        &mut Vec::new(),
    )
    .unwrap();
    assert_eq!((outcome.trusted, outcome.untrusted), (82, 18));
    let trust = outcome.report.trust.expect("trust statistics");
    assert_eq!(trust.count, 100);

    // The ten trusted GROUP BY queries collapse into one pattern group.
    let a = analyze_run(&outcome.run_dir, 0.5, &mut Vec::new()).unwrap();
    assert_eq!(a.patterns.len(), 10);
    assert!(a
        .patterns
        .iter()
        .all(|p| p.fact == "InProceedings" && p.dimensions == ["a"]));
    assert_eq!(a.groups.len(), 1);
    assert_eq!(
        (a.summary.facts, a.summary.measures, a.summary.fact_attributes),
        (1, 1, 0)
    );
    let md = RunStore::open(&outcome.run_dir)
        .unwrap()
        .read_file("md.summary")
        .unwrap();
    assert!(md.starts_with("Facts 1\n"));

    let mut out = Vec::new();
    cmd_analyze(
        None,
        Some((&outcome.run_dir, &outcome.run_dir)),
        0.5,
        false,
        &mut out,
        &mut Vec::new(),
    )
    .unwrap();
    assert_eq!(
        String::from_utf8(out).unwrap(),
        "semantic_overlap 1.0000\nsource_overlap 1.0000\n"
    );
    assert!(cmd_analyze(None, None, 0.5, false, &mut Vec::new(), &mut Vec::new()).is_err());

    let dest = dir.path().join("trusted.csv");
    let n = cmd_export(&outcome.run_dir, TRUSTED, ExportFormat::Csv, &dest, &mut Vec::new()).unwrap();
    assert_eq!(n, 82);
    assert_eq!(store::import(&dest, ExportFormat::Csv).unwrap().len(), 82);
    assert!(cmd_export(
        &outcome.run_dir,
        "everything",
        ExportFormat::Csv,
        &dest,
        &mut Vec::new()
    )
    .is_err());
}

#[test]
fn custom_pipeline_and_policy_files_load() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("pipeline200.log", dir.path(), "k");
    cfg.pipeline = Some(fixture("pipeline.conf"));
    cfg.policy = Some(fixture("policy.txt"));
    let outcome = cmd_curate(&cfg, &mut Vec::new(), &mut Vec::new()).unwrap();
    assert_eq!((outcome.trusted, outcome.untrusted), (82, 18));
}

#[test]
fn binary_reports_errors_with_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lodlog"))
        .args(["curate", "--input"])
        .arg(dir.path().join("absent.log"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn binary_runs_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lodlog"))
        .args(["ingest", "--format", "clf", "--run-id", "b", "--input"])
        .arg(fixture("ingest10.log"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("run-b/ingest.summary")).unwrap();
    assert!(summary.contains("select 5\nconstruct 1\n"));
    assert!(summary.contains("describe 1\n"));
}
