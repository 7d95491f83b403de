use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conflens"))
        .args(args)
        .current_dir(dir)
        .env("CONFLENS_CACHE", dir.join("cache"))
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn outputs(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(ext) && !p.to_string_lossy().ends_with(".manifest.json"))
        .collect();
    v.sort();
    v
}

fn first_lines(path: &Path, n: usize) -> String {
    std::fs::read_to_string(path).unwrap().lines().take(n).map(|l| format!("{l}\n")).collect()
}

#[test]
fn ingest_counts_records() {
    let dir = tempfile::tempdir().unwrap();
    let valid = dir.path().join("valid.jsonl");
    std::fs::write(&valid, first_lines(&fixture("rq1.jsonl"), 3)).unwrap();
    let o = run(dir.path(), &["ingest", "--input", "valid.jsonl", "-o", "out.jsonl"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "3 records, 0 skipped");
    assert!(dir.path().join("out.jsonl.manifest.json").is_file());

    let mixed = format!("{}{{\"review_id\": 7}}\n", first_lines(&fixture("rq1.jsonl"), 2));
    std::fs::write(dir.path().join("mixed.jsonl"), mixed).unwrap();
    let o = run(dir.path(), &["ingest", "--input", "mixed.jsonl", "-o", "out2.jsonl"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "2 records, 1 skipped");

    let o = run(dir.path(), &["ingest", "--input", "mixed.jsonl", "-o", "out3.jsonl", "--fail-fast"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ingest_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let src = fixture("pq1.jsonl");
    let o = run(dir.path(), &["ingest", "--input", src.to_str().unwrap(), "-o", "a.jsonl"]);
    assert!(o.status.success());
    let o = run(dir.path(), &["ingest", "--input", "a.jsonl", "-o", "b.jsonl"]);
    assert!(o.status.success());
    let a = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.jsonl")).unwrap());
}

#[test]
fn missing_input_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["ingest", "--input", "absent.jsonl", "-o", "x.jsonl"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(dir.path(), &["experiment", "rq1", "--archive", "absent.jsonl"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let archive = fixture("rq1.jsonl");
    let a = archive.to_str().unwrap();
    for args in [
        vec!["train", "--archive", a, "--order", "12", "-o", "m.txt"],
        vec!["train", "--archive", a, "--order", "0", "-o", "m.txt"],
        vec!["experiment", "rq1", "--archive", a, "--order", "5..2"],
        vec!["experiment", "rq1", "--archive", a, "--smoothing", "witten-bell"],
        vec!["experiment", "nope", "--archive", a],
        vec!["experiment", "rq1", "--archive", a, "--jobs", "0"],
        vec!["frobnicate"],
    ] {
        let o = run(dir.path(), &args);
        assert_eq!(o.status.code(), Some(64), "{args:?}");
    }
}

#[test]
fn train_writes_deterministic_model() {
    let dir = tempfile::tempdir().unwrap();
    let archive = fixture("rq1.jsonl");
    let a = archive.to_str().unwrap();
    let o = run(dir.path(), &["train", "--archive", a, "--order", "3", "-o", "m1.txt", "--no-cache"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m1 = std::fs::read_to_string(dir.path().join("m1.txt")).unwrap();
    assert_eq!(m1.lines().take(2).collect::<Vec<_>>(), ["conflens-ngram v1", "order 3"]);

    let o = run(dir.path(), &["train", "--archive", a, "--order", "3", "-o", "m2.txt"]);
    assert!(o.status.success());
    let o = run(dir.path(), &["train", "--archive", a, "--order", "3", "-o", "m3.txt"]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("m2.txt")).unwrap(), m1);
    assert_eq!(std::fs::read_to_string(dir.path().join("m3.txt")).unwrap(), m1);
    assert!(std::fs::read_dir(dir.path().join("cache")).unwrap().count() == 1);
}

#[test]
fn train_on_empty_selection_is_precondition_error() {
    let dir = tempfile::tempdir().unwrap();
    let archive = fixture("rq1.jsonl");
    let o = run(
        dir.path(),
        &["train", "--archive", archive.to_str().unwrap(), "--order", "2", "--ext", "js", "-o", "m.txt"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rq1_writes_reports_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let archive = fixture("rq1.jsonl");
    let o = run(
        dir.path(),
        &["experiment", "rq1", "--archive", archive.to_str().unwrap(), "--order", "1..3", "--out-dir", "out"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let csv = outputs(&out, ".csv");
    let json = outputs(&out, ".json");
    assert_eq!((csv.len(), json.len()), (1, 1));
    let table = std::fs::read_to_string(&csv[0]).unwrap();
    assert!(table.starts_with("extension,side,order,bits_per_token,file_mean,files,tokens\n"));
    assert_eq!(table.lines().count(), 1 + 2 * 2 * 3);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json[0]).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["experiment"], "rq1");
    let manifests: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().to_string_lossy().ends_with(".manifest.json"))
        .collect();
    assert_eq!(manifests.len(), 1);
}

#[test]
fn precondition_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let rq1 = fixture("rq1.jsonl");
    let o = run(dir.path(), &["experiment", "pq1", "--archive", rq1.to_str().unwrap(), "--out-dir", "out"]);
    assert_eq!(o.status.code(), Some(2));
    let o =
        run(dir.path(), &["experiment", "rq2", "--archive", rq1.to_str().unwrap(), "--order", "2", "--out-dir", "out"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("out").exists() || outputs(&dir.path().join("out"), ".csv").is_empty());
}

#[test]
fn table4_respects_k() {
    let dir = tempfile::tempdir().unwrap();
    let rev = |n: u32, lines: &[&str]| {
        serde_json::json!({
            "revision_number": n,
            "created": format!("2015-03-0{n}T00:00:00Z"),
            "files": [{ "path": "a.py", "lines": lines.iter().map(|l| serde_json::json!({"op": "added", "text": l})).collect::<Vec<_>>() }],
        })
    };
    let record = serde_json::json!({
        "review_id": "I1",
        "status": "accepted",
        "revisions": [
            rev(1, &["x = f(a, b)", "y = g(c)", "while x: pass"]),
            rev(2, &["x = self.f(a, b=b)", "y = g(c)[0]", "for i in x: pass", "z = [1, 2, 3]"]),
        ],
    });
    std::fs::write(dir.path().join("t4.jsonl"), format!("{record}\n")).unwrap();
    let o = run(
        dir.path(),
        &["experiment", "table4", "--archive", "t4.jsonl", "--k", "3", "--format", "csv", "--out-dir", "out"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = outputs(&dir.path().join("out"), ".csv");
    let mut rdr = csv::Reader::from_path(&csv[0]).unwrap();
    let mut rows = 0;
    for r in rdr.records() {
        let r = r.unwrap();
        assert!((1..=3).contains(&r[3].parse::<u32>().unwrap()));
        assert!(["separator", "operator", "keyword"].contains(&&r[2]));
        rows += 1;
    }
    assert!(rows > 0);
    assert!(outputs(&dir.path().join("out"), ".json").is_empty());
}

#[test]
fn experiment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let archive = fixture("rq2.jsonl");
    let a = archive.to_str().unwrap();
    for (out, jobs) in [("a", "1"), ("b", "3")] {
        let o = run(
            dir.path(),
            &["experiment", "rq2", "--archive", a, "--order", "2..3", "--jobs", jobs, "--out-dir", out],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for ext in [".csv", ".json"] {
        let a = outputs(&dir.path().join("a"), ext);
        let b = outputs(&dir.path().join("b"), ext);
        assert_eq!(std::fs::read(&a[0]).unwrap(), std::fs::read(&b[0]).unwrap());
    }
}
