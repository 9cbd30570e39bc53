use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const RULES: &str = "topic \"Saint-Louis\"\naccept when \"saint-louis\" scope document\n";

fn ctlfilter(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctlfilter"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A directory with rules, topic config and a simulated corpus.
fn workspace(kind: &str, n_docs: usize) -> TempDir {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    fs::write(p.join("sl.rules"), RULES).unwrap();
    fs::write(
        p.join("sl.topic"),
        "topic_name = Saint-Louis\nrules_path = sl.rules\nseed = 5\n",
    )
    .unwrap();
    fs::write(p.join("sim.spec"), format!("drift_kind = {kind}\nn_docs = {n_docs}\nseed = 2\n")).unwrap();
    let o = ctlfilter(&["simulate", "--spec", "sim.spec", "--out", "c.jsonl", "--truth", "t.jsonl"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    dir
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn build_control_creates_a_model_deterministically() {
    let w = workspace("none", 400);
    let args = ["build-control", "--corpus", "c.jsonl", "--topic", "sl.topic", "--out", "m.model"];
    let o = ctlfilter(&args, w.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = fs::read(path(&w, "m.model")).unwrap();
    let o = ctlfilter(&args, w.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(path(&w, "m.model")).unwrap(), first);

    let o = ctlfilter(&["build-control", "--corpus", "c.jsonl", "--topic", "sl.topic", "--out", "m2.model", "--seed", "6"], w.path());
    assert_eq!(o.status.code(), Some(0));
    let other: serde_json::Value = serde_json::from_slice(&fs::read(path(&w, "m2.model")).unwrap()).unwrap();
    assert_eq!(other["training_meta"]["seed"], 6);
}

#[test]
fn supervise_rejects_unknown_model_version() {
    let w = workspace("none", 400);
    let o = ctlfilter(&["build-control", "--corpus", "c.jsonl", "--topic", "sl.topic", "--out", "m.model"], w.path());
    assert!(o.status.success());
    let text = fs::read_to_string(path(&w, "m.model")).unwrap();
    fs::write(path(&w, "m.model"), text.replace("\"format_version\": 1", "\"format_version\": 99")).unwrap();
    let o = ctlfilter(
        &["supervise", "--topic", "sl.topic", "--corpus", "c.jsonl", "--model", "m.model", "--kind", "precision", "--out", "r.jsonl"],
        w.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("format_version 99"), "{}", stderr(&o));
    assert!(!path(&w, "r.jsonl").exists());
}

#[test]
fn supervise_writes_ranked_report_and_leaves_inputs_alone() {
    let w = workspace("polysemy", 1000);
    // train on the history before the drift onset
    let corpus = fs::read_to_string(path(&w, "c.jsonl")).unwrap();
    let history: String = corpus.lines().take(500).map(|l| format!("{l}\n")).collect();
    fs::write(path(&w, "h.jsonl"), history).unwrap();
    let o = ctlfilter(&["build-control", "--corpus", "h.jsonl", "--topic", "sl.topic", "--out", "m.model"], w.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let before: Vec<Vec<u8>> = ["c.jsonl", "m.model", "sl.topic", "sl.rules"]
        .iter()
        .map(|f| fs::read(path(&w, f)).unwrap())
        .collect();
    let o = ctlfilter(
        &["supervise", "--topic", "sl.topic", "--corpus", "c.jsonl", "--model", "m.model", "--kind", "precision", "--out", "r.jsonl"],
        w.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let after: Vec<Vec<u8>> = ["c.jsonl", "m.model", "sl.topic", "sl.rules"]
        .iter()
        .map(|f| fs::read(path(&w, f)).unwrap())
        .collect();
    assert_eq!(before, after);

    let report = fs::read_to_string(path(&w, "r.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = report.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["report_version"], 1);
    assert_eq!(lines[0]["kind"], "precision");
    assert!(lines.len() > 1, "polysemy stream should raise alerts");
    let mut last = 0.0;
    for (i, rec) in lines[1..].iter().enumerate() {
        assert_eq!(rec["rank"], i + 1);
        assert_eq!(rec["kind"], "precision_loss");
        assert!(rec["spans"].is_array());
        let score = rec["score"].as_f64().unwrap();
        assert!(score >= last && score < 0.2);
        last = score;
    }
    for line in report.lines().skip(1) {
        let raw = line.split("\"score\":").nth(1).unwrap().split(',').next().unwrap();
        assert_eq!(raw.split('.').nth(1).unwrap().len(), 4, "{raw}");
    }
}

#[test]
fn no_alerts_gives_header_only_report() {
    let w = workspace("none", 400);
    fs::write(
        path(&w, "quiet.topic"),
        "topic_name = Saint-Louis\nrules_path = sl.rules\nmodel_path = m.model\ns_minus = 0\ns_plus = 1\n",
    )
    .unwrap();
    let o = ctlfilter(&["build-control", "--corpus", "c.jsonl", "--topic", "quiet.topic"], w.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = ctlfilter(
        &["supervise", "--topic", "quiet.topic", "--corpus", "c.jsonl", "--kind", "both", "--out", "r.jsonl"],
        w.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(path(&w, "r.jsonl")).unwrap().lines().count(), 1);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = ctlfilter(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
    let o = ctlfilter(&["supervise", "--topic", "x"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = ctlfilter(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn rule_and_config_errors_exit_3() {
    let w = workspace("none", 50);
    fs::write(path(&w, "bad.rules"), "topic \"t\"\naccept when fact(MISSING)\n").unwrap();
    let o = ctlfilter(&["filter", "--rules", "bad.rules", "--corpus", "c.jsonl"], w.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("MISSING"), "{}", stderr(&o));

    fs::write(path(&w, "bad.topic"), "topic_name = t\nrules_path = sl.rules\ncolour = red\n").unwrap();
    let o = ctlfilter(&["build-control", "--corpus", "c.jsonl", "--topic", "bad.topic", "--out", "m.model"], w.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("colour"));

    fs::write(path(&w, "bad.spec"), "drift_kind = none\nn_docs = 10\ninjection_rate = 0.5\n").unwrap();
    let o = ctlfilter(&["simulate", "--spec", "bad.spec", "--out", "x.jsonl", "--truth", "y.jsonl"], w.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(!path(&w, "x.jsonl").exists());
}

#[test]
fn data_errors_exit_2_without_partial_output() {
    let w = workspace("none", 50);
    fs::write(path(&w, "broken.jsonl"), "{\"id\":\"a\",\"ts\":\"2001-01-01\",\"title\":\"\",\"body\":\"\"}\nnot json\n").unwrap();
    let o = ctlfilter(&["filter", "--rules", "sl.rules", "--corpus", "broken.jsonl", "--out", "v.jsonl"], w.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    assert!(!path(&w, "v.jsonl").exists());

    let o = ctlfilter(&["filter", "--rules", "sl.rules", "--corpus", "missing.jsonl"], w.path());
    assert_eq!(o.status.code(), Some(2));

    // a rule that never fires leaves nothing to learn from
    fs::write(path(&w, "never.rules"), "topic \"t\"\naccept when \"zzz\"\n").unwrap();
    fs::write(path(&w, "never.topic"), "topic_name = t\nrules_path = never.rules\n").unwrap();
    let o = ctlfilter(&["build-control", "--corpus", "c.jsonl", "--topic", "never.topic", "--out", "m.model"], w.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("untrainable"), "{}", stderr(&o));
    assert!(!path(&w, "m.model").exists());
}

#[test]
fn simulate_is_deterministic_and_evaluate_reports_prf() {
    let w = workspace("polymorphism", 300);
    let corpus = fs::read(path(&w, "c.jsonl")).unwrap();
    let truth = fs::read(path(&w, "t.jsonl")).unwrap();
    let o = ctlfilter(&["simulate", "--spec", "sim.spec", "--out", "c2.jsonl", "--truth", "t2.jsonl"], w.path());
    assert!(o.status.success());
    assert_eq!(fs::read(path(&w, "c2.jsonl")).unwrap(), corpus);
    assert_eq!(fs::read(path(&w, "t2.jsonl")).unwrap(), truth);
    assert_eq!(String::from_utf8(truth).unwrap().lines().count(), 300);

    let o = ctlfilter(&["filter", "--rules", "sl.rules", "--corpus", "c.jsonl", "--out", "v.jsonl"], w.path());
    assert!(o.status.success());
    let o = ctlfilter(&["evaluate", "--predicted", "v.jsonl", "--truth", "t.jsonl"], w.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let values: Vec<f64> = out.lines().map(|l| l.split(' ').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 3);
    // the rule never sees the new form, so precision stays perfect while recall drops
    assert_eq!(values[0], 1.0);
    assert!(values[1] < 1.0);

    let o = ctlfilter(&["evaluate", "--predicted", "v.jsonl", "--truth", "sl.rules"], w.path());
    assert_eq!(o.status.code(), Some(2));
}
