use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_polarity-gap"));
    c.env_remove("POLARITY_GAP_THREADS").env_remove("SOURCE_DATE_EPOCH");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn run_stdin(dir: &Path, args: &[&str], input: &[u8]) -> Output {
    let mut child = bin()
        .args(args)
        .current_dir(dir)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn ok(o: Output) -> Output {
    assert_eq!(code(&o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn json_file(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

/// A small trained model inside `dir`, named `model.json`.
fn trained(dir: &Path) {
    ok(run_in(dir, &["generate", "--kind", "benchmark", "-n", "80", "--seed", "3", "-o", "labeled.jsonl"]));
    ok(run_in(dir, &["train", "-i", "labeled.jsonl", "-o", "model.json"]));
}

#[test]
fn usage_errors_exit_with_one() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&run_in(d.path(), &["frobnicate"])), 1);
    assert_eq!(code(&run_in(d.path(), &["crossval", "--folds", "1"])), 1);
    assert_eq!(code(&run_in(d.path(), &["train"])), 1);
}

#[test]
fn help_and_version_exit_with_zero() {
    let d = tempfile::tempdir().unwrap();
    let o = ok(run_in(d.path(), &["--help"]));
    let text = String::from_utf8_lossy(&o.stdout);
    for sub in ["prepare", "crossval", "train", "detect", "report", "generate", "stats"] {
        assert!(text.contains(sub), "help lists {sub}");
    }
    ok(run_in(d.path(), &["--version"]));
    ok(run_in(d.path(), &["detect", "--help"]));
}

#[test]
fn missing_stopword_file_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    ok(run_in(d.path(), &["generate", "--kind", "benchmark", "-n", "20", "-o", "labeled.jsonl"]));
    let o = run_in(d.path(), &["train", "-i", "labeled.jsonl", "-o", "m.json", "--stopwords", "nope.txt"]);
    assert_eq!(code(&o), 1);
    assert!(!d.path().join("m.json").exists());
}

#[test]
fn missing_input_is_an_io_error() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&run_in(d.path(), &["detect", "-m", "missing.json", "-i", "x.jsonl"])), 1);
}

#[test]
fn insufficient_data_still_writes_summary() {
    let d = tempfile::tempdir().unwrap();
    ok(run_in(d.path(), &["generate", "--kind", "ten-point", "-n", "200", "--seed", "2", "-o", "raw.jsonl"]));
    let o = run_in(
        d.path(),
        &["prepare", "-i", "raw.jsonl", "-o", "out.jsonl", "--per-class", "5000", "--summary", "summary.json"],
    );
    assert_eq!(code(&o), 2);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("error"), "{stderr}");
    let summary = json_file(&d.path().join("summary.json"));
    assert!(summary.is_object());
    assert!(!d.path().join("out.jsonl").exists());
}

#[test]
fn malformed_record_reports_line_and_exits_with_two() {
    let d = tempfile::tempdir().unwrap();
    let input = b"{\"id\":\"a\",\"text\":\"fine words here\",\"score\":9}\n{\"id\":\"b\",\"text\":";
    let o = run_stdin(d.path(), &["prepare", "--min-words", "1"], input);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains('2'));
}

#[test]
fn out_of_range_score_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let input = b"{\"id\":\"a\",\"text\":\"some words\",\"score\":11}\n";
    assert_eq!(code(&run_stdin(d.path(), &["prepare"], input)), 2);
}

#[test]
fn future_model_version_is_refused() {
    let d = tempfile::tempdir().unwrap();
    trained(d.path());
    let mut model = json_file(&d.path().join("model.json"));
    model["format_version"] = json!(99);
    std::fs::write(d.path().join("future.json"), serde_json::to_vec(&model).unwrap()).unwrap();
    let o = run_stdin(d.path(), &["detect", "-m", "future.json"], b"");
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("99"));
}

#[test]
fn empty_detect_input_yields_empty_output() {
    let d = tempfile::tempdir().unwrap();
    trained(d.path());
    let o = ok(run_stdin(d.path(), &["detect", "-m", "model.json", "--summary", "s.json"], b""));
    assert!(o.stdout.is_empty());
    assert_eq!(json_file(&d.path().join("s.json"))["input_total"], json!(0));
}

#[test]
fn detect_drops_neutral_scores_and_counts_them() {
    let d = tempfile::tempdir().unwrap();
    trained(d.path());
    let rows = [
        json!({"id": "r1", "text": "excellent friendly lovely stay", "score": 5}),
        json!({"id": "r2", "text": "okay average room", "score": 3}),
        json!({"id": "r3", "text": "dirty rude awful noisy", "score": 1}),
    ];
    let input: String = rows.iter().map(|r| format!("{r}\n")).collect();
    let o = ok(run_stdin(
        d.path(),
        &["detect", "-m", "model.json", "--no-english-filter", "--summary", "s.json"],
        input.as_bytes(),
    ));
    let records: Vec<Value> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let ids: Vec<&str> = records.iter().map(|r| r["review_id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["r1", "r3"]);
    let s = json_file(&d.path().join("s.json"));
    assert_eq!(s["input_total"], json!(3));
    assert_eq!(s["dropped_excluded_score"], json!(1));
    assert_eq!(s["scored"], json!(2));
}

#[test]
fn report_accepts_counts_directly() {
    let d = tempfile::tempdir().unwrap();
    let counts = json!({"per_score": {
        "5": {"predicted_pos": 81783, "predicted_neg": 2462},
        "4": {"predicted_pos": 59314, "predicted_neg": 5476},
        "2": {"predicted_pos": 1522, "predicted_neg": 7266},
        "1": {"predicted_pos": 284, "predicted_neg": 6193}
    }});
    std::fs::write(d.path().join("counts.json"), counts.to_string()).unwrap();
    ok(run_in(d.path(), &["report", "--counts", "counts.json", "-o", "r.json", "--table", "t.txt"]));
    let r = json_file(&d.path().join("r.json"));
    assert_eq!(r["total"], json!(164_300));
    assert_eq!(r["fp_total"], json!(1806));
    assert_eq!(r["fn_total"], json!(7938));
    let table = std::fs::read_to_string(d.path().join("t.txt")).unwrap();
    assert!(table.contains("94.07"), "{table}");
    assert!(d.path().join("r.json.manifest.json").exists());
}

#[test]
fn report_rejects_inconsistent_records() {
    let d = tempfile::tempdir().unwrap();
    let bad = json!({"review_id": "x", "score": 5, "actual_polarity": "pos",
        "predicted_polarity": "neg", "decision_value": -1.0, "pm": 0});
    let o = run_stdin(d.path(), &["report"], format!("{bad}\n").as_bytes());
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn thread_count_comes_from_the_environment() {
    let d = tempfile::tempdir().unwrap();
    ok(run_in(d.path(), &["generate", "--kind", "benchmark", "-n", "60", "--seed", "9", "-o", "l.jsonl"]));
    let cv = |threads: &str| {
        let o = bin()
            .args(["crossval", "-i", "l.jsonl", "--folds", "3", "--classifiers", "nb"])
            .current_dir(d.path())
            .env("POLARITY_GAP_THREADS", threads)
            .output()
            .unwrap();
        ok(o).stdout
    };
    assert_eq!(cv("1"), cv("3"));
    assert_eq!(code(&bin().arg("stats").env("POLARITY_GAP_THREADS", "lots").output().unwrap()), 1);
}

#[test]
fn stdin_and_stdout_streams() {
    let d = tempfile::tempdir().unwrap();
    let raw = ok(run_in(d.path(), &["generate", "--kind", "ten-point", "-n", "400", "--seed", "4"])).stdout;
    let labeled = ok(run_stdin(d.path(), &["prepare", "-i", "-", "-o", "-", "--per-class", "20"], &raw)).stdout;
    assert_eq!(String::from_utf8(labeled).unwrap().lines().count(), 40);
    // no manifest sidecar for a streamed output
    let names: Vec<_> = std::fs::read_dir(d.path()).unwrap().collect();
    assert!(names.is_empty());
}
