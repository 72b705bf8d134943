mod common;

use std::fs;

use common::{fixture, mock_cmd, run, tempdir};
use serde_json::Value;

fn stdout(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_error(out: &std::process::Output) -> String {
    let text = String::from_utf8_lossy(&out.stderr);
    let last = text.lines().last().unwrap_or_default();
    let v: Value = serde_json::from_str(last).unwrap_or_else(|_| panic!("not a JSON error line: {text}"));
    v["error"].as_str().expect("error field").to_string()
}

#[test]
fn validate_builtin_and_fixture() {
    let dir = tempdir();
    let out = run(&["validate"], dir.path());
    assert!(out.status.success());
    assert_eq!(stdout(&out), "60 languages, 234 directions\n");

    let tri = fixture("fixtures/tri/langs.jsonl");
    let corpus = fixture("fixtures/tri/corpus.mwjsonl");
    let out = run(&["--registry", &tri, "validate", "--in", &corpus], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out), "3 languages, 6 directions\n300 records\n");
}

#[test]
fn exit_codes() {
    let dir = tempdir();
    assert_eq!(run(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["downsample", "--in", "x"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));

    let out = run(&["expand", "--in", "missing.mwjsonl", "--out", "o.djsonl"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_error(&out).contains("missing.mwjsonl"));

    fs::write(dir.path().join("bad.mwjsonl"), "{\"id\":\"a\",\"sentences\":{\"en\":\"x\"}}\n{\"id\":\"b\",\"sentences\":{\"qq\":\"y\"}}\n").unwrap();
    let out = run(&["expand", "--in", "bad.mwjsonl", "--out", "o.djsonl"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_error(&out).starts_with("bad.mwjsonl:2:"));

    let out = run(&["downsample", "--p", "1.5", "--in", "-", "--out", "-"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stdin_to_stdout() {
    let dir = tempdir();
    let mut child = common::mtforge()
        .args(["expand", "--in", "-", "--out", "-"])
        .current_dir(dir.path())
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"{\"id\":\"a\",\"sentences\":{\"en\":\"hi\",\"zh\":\"ni hao\",\"de\":\"hallo\"}}\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let lines: Vec<Value> = stdout(&out)
        .lines()
        .filter(|l| l.contains("\"src_lang\""))
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 6);
}

#[test]
fn config_defaults_and_overrides() {
    let dir = tempdir();
    let d = dir.path();
    let lines: String = (0..2000)
        .map(|i| format!("{{\"id\":\"c{i}#de2en\",\"src_lang\":\"de\",\"tgt_lang\":\"en\",\"src\":\"s{i}\",\"tgt\":\"t{i}\",\"provenance\":\"human\"}}\n"))
        .collect();
    fs::write(d.join("in.djsonl"), lines).unwrap();
    fs::write(d.join("cfg.json"), r#"{"seed": 7, "downsample": {"p": 0.5}}"#).unwrap();

    let count = |args: &[&str]| -> u64 {
        let out = run(args, d);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let v: Value = serde_json::from_str(stdout(&out).trim()).unwrap();
        v["reverse_retained"].as_u64().unwrap()
    };
    let base = ["downsample", "--in", "in.djsonl", "--out", "o.djsonl"];
    let from_config = count(&[&["--config", "cfg.json"][..], &base[..]].concat());
    assert!((800..1200).contains(&from_config), "{from_config}");
    let p_flag = count(&[&["--config", "cfg.json"][..], &base[..], &["--p", "0.05"][..]].concat());
    assert!(p_flag < 200, "{p_flag}");
    let same_seed = count(&[&["--seed", "7", "--config", "cfg.json"][..], &base[..]].concat());
    assert_eq!(same_seed, from_config);
    let flag_seed = count(&[&["--seed", "8", "--config", "cfg.json"][..], &base[..]].concat());
    let defaults = count(&base);
    assert!(defaults < 200);
    assert_ne!(flag_seed, 0);

    fs::write(d.join("typo.json"), r#"{"sed": 7}"#).unwrap();
    let out = run(&[&["--config", "typo.json"][..], &base[..]].concat(), d);
    assert_eq!(out.status.code(), Some(1));
    fs::write(d.join("ghost.json"), r#"{"registry": "nowhere.jsonl"}"#).unwrap();
    assert_eq!(run(&["--config", "ghost.json", "validate"], d).status.code(), Some(1));
}

#[test]
fn diagnose_matches_frozen_count() {
    let dir = tempdir();
    let d = dir.path();
    let codes: Vec<String> = serde_json::from_str(&fs::read_to_string(fixture("fixtures/builtin_codes.json")).unwrap()).unwrap();
    let mut corpus = String::new();
    for r in 0..1000 {
        let sentences: serde_json::Map<String, Value> =
            codes.iter().map(|c| (c.clone(), Value::String(format!("{c} {r}")))).collect();
        corpus.push_str(&serde_json::json!({"id": format!("d{r:04}"), "sentences": sentences}).to_string());
        corpus.push('\n');
    }
    fs::write(d.join("full.mwjsonl"), corpus).unwrap();
    assert!(run(&["expand", "--in", "full.mwjsonl", "--out", "all.djsonl"], d).status.success());

    let out = run(&["--seed", "42", "--workers", "3", "diagnose", "--in", "all.djsonl", "--p", "0.05", "--out", "diag.json"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains(" | "));
    let report: Value = serde_json::from_str(&fs::read_to_string(d.join("diag.json")).unwrap()).unwrap();
    let en = &report["stats"]["by_target_lang"]["en"];
    let oracle: Value = serde_json::from_str(&fs::read_to_string(fixture("oracle/hash_counts.json")).unwrap()).unwrap();
    let total = en["total_pairs"].as_u64().unwrap();
    assert_eq!(total, oracle["diagnose_en_target_pairs_1000x60_p005_seed42"].as_u64().unwrap());
    let sd = (59_000.0f64 * 0.05 * 0.95).sqrt();
    assert!((total as f64 - 2950.0).abs() <= 3.0 * sd);
    assert!(en["max_repetition"].as_u64().unwrap() <= 59);

    // without a policy every en target has 59 sources
    let out = run(&["diagnose", "--in", "all.djsonl", "--out", "raw.json"], d);
    assert!(out.status.success());
    let raw: Value = serde_json::from_str(&fs::read_to_string(d.join("raw.json")).unwrap()).unwrap();
    assert_eq!(raw["stats"]["by_target_lang"]["en"]["mean_repetition"].as_f64(), Some(59.0));
    assert_eq!(raw["stats"]["max_repetition"].as_u64(), Some(59));
}

#[test]
fn synth_pivot_rejects_center_pairs() {
    let dir = tempdir();
    let d = dir.path();
    fs::write(d.join("p.djsonl"), "{\"id\":\"x\",\"src_lang\":\"en\",\"tgt_lang\":\"zh\",\"src\":\"a\",\"tgt\":\"b\",\"provenance\":\"human\"}\n").unwrap();
    let backend = mock_cmd("backend identity");
    let out = run(&["synth", "--mode", "pivot", "--backend-cmd", &backend, "--in", "p.djsonl", "--out", "o.djsonl"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_error(&out).contains("pivot"));
}
