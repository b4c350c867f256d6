//! End-to-end runs through the experiments layer: directories, manifest
//! schema and replay.

use std::fs;

use fpp_core::experiments::{config_hash, run_experiment, validate_config, CSV_HEADER};

const ONE_ARM: &str = r#"
seed = 77
[model]
kind = "bernoulli-lattice"
p = 0.25
[task]
kind = "one-arm"
replicas = 200
radii = [4.0, 8.0, 16.0]
"#;

/// Reads the manifest with plain JSON, independently of the writer's types.
fn read_manifest(path: &std::path::Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("each manifest line is a JSON object"))
        .collect()
}

#[test]
fn one_arm_run_has_wilson_rows_and_three_stream_families() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = validate_config(ONE_ARM).unwrap();
    let m = run_experiment(&cfg, tmp.path()).unwrap();

    let mut rdr = csv::Reader::from_path(m.dir.join("results.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let arm: Vec<_> = rows.iter().filter(|r| &r[0] == "one_arm").collect();
    assert_eq!(arm.len(), 3);
    for r in arm {
        let p: f64 = r[2].parse().unwrap();
        let (lo, hi): (f64, f64) = (r[4].parse().unwrap(), r[5].parse().unwrap());
        // Wilson intervals are asymmetric about p and stay inside [0, 1]
        assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
        assert!(((p - lo) - (hi - p)).abs() > 1e-9);
        assert_eq!(&r[6], "200");
    }

    let lines = read_manifest(&m.dir.join("manifest.jsonl"));
    assert_eq!(lines.len(), 2);
    let run = &lines[0];
    assert_eq!(run["record"], "run");
    assert_eq!(run["config_hash"], config_hash(&cfg));
    assert_eq!(run["seed"], 77);
    let files: Vec<&str> = run["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    for f in &files {
        assert!(m.dir.join(f).exists(), "{f}");
    }
    let task = &lines[1];
    assert_eq!(task["record"], "task");
    assert_eq!(task["task"], "one-arm");
    let streams = task["streams"].as_array().unwrap();
    let labels: std::collections::HashSet<&str> = streams.iter().map(|s| s["label"].as_str().unwrap()).collect();
    assert_eq!(streams.len(), 3);
    assert_eq!(labels.len(), 3, "families must be distinct streams");
    assert!(m.dir.file_name().unwrap().to_str().unwrap().starts_with(&config_hash(&cfg)[..16]));
}

#[test]
fn manifest_replay_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = validate_config(ONE_ARM).unwrap();
    let first = run_experiment(&cfg, tmp.path()).unwrap();
    let lines = read_manifest(&first.dir.join("manifest.jsonl"));
    let replayed = validate_config(lines[0]["config"].as_str().unwrap()).unwrap();
    assert_eq!(replayed, cfg);
    let second = run_experiment(&replayed, tmp.path()).unwrap();
    assert_ne!(first.dir, second.dir);
    assert_eq!(fs::read(first.dir.join("results.csv")).unwrap(), fs::read(second.dir.join("results.csv")).unwrap());
    assert_eq!(fs::read(first.dir.join("config.toml")).unwrap(), fs::read(second.dir.join("config.toml")).unwrap());
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = validate_config(ONE_ARM).unwrap();
    cfg.threads = Some(1);
    let a = run_experiment(&cfg, tmp.path()).unwrap();
    cfg.threads = Some(3);
    let b = run_experiment(&cfg, tmp.path()).unwrap();
    assert_eq!(a.config_hash, b.config_hash);
    assert_eq!(fs::read(a.dir.join("results.csv")).unwrap(), fs::read(b.dir.join("results.csv")).unwrap());
}

#[test]
fn degenerate_fit_becomes_a_warning_row() {
    // p = 1: every annulus is crossed at time 0, P = 1 at every radius
    let tmp = tempfile::tempdir().unwrap();
    let cfg = validate_config(&ONE_ARM.replace("p = 0.25", "p = 1.0")).unwrap();
    let m = run_experiment(&cfg, tmp.path()).unwrap();
    assert_eq!(m.warnings, 1);
    let text = fs::read_to_string(m.dir.join("results.csv")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("one_arm_exponent,") && l.contains("warning:")), "{text}");
}

#[test]
fn every_task_kind_runs_from_a_document() {
    let docs = [
        "[model]\nkind = \"constant\"\nvalue = 1.0\n[grid]\nspacing = 0.5\n[task]\nkind = \"ball-shape\"\nreplicas = 2\nt = [3.0, 6.0]\nbins = 16\npilot_factor = 1.0\n",
        "[model]\nkind = \"voronoi\"\np = 0.5\nlambda = 1.0\n[grid]\nspacing = 0.5\n[task]\nkind = \"crossing\"\nreplicas = 20\nscales = [3.0, 6.0]\nrect = { lo = [0.0, 0.0], hi = [2.0, 1.0], axis = 0 }\n",
        "[model]\nkind = \"bernoulli-lattice\"\np = 0.5\n[task]\nkind = \"ind\"\nreplicas = 20\nq = 2.0\ns = 8.0\ndelta = 0.5\n",
        "[model]\nkind = \"bernoulli-lattice\"\np = 0.25\n[task]\nkind = \"renorm\"\nreplicas = 20\nq = 2.0\nr = 4.0\ns = 41.0\ndelta = 0.1\n",
        "[model]\nkind = \"gaussian-psi\"\np = 0.0\npsi = { kind = \"positive-part\" }\n[grid]\nspacing = 0.5\n[task]\nkind = \"sample\"\nhalf_width = 2.0\n",
    ];
    let tmp = tempfile::tempdir().unwrap();
    for doc in docs {
        let cfg = validate_config(&format!("seed = 1\n{doc}")).unwrap_or_else(|e| panic!("{e:?}\n{doc}"));
        let m = run_experiment(&cfg, tmp.path()).unwrap_or_else(|e| panic!("{e}\n{doc}"));
        let text = fs::read_to_string(m.dir.join("results.csv")).unwrap();
        assert!(text.lines().count() > 1, "{doc}");
    }
}
