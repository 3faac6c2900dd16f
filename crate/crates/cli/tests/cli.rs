use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ftmem::tanner::read_alist;
use serde_json::Value;

fn ftmem(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftmem"))
        .args(args)
        .current_dir(dir)
        .env("FTMEM_OUT_DIR", dir.join("out"))
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn generate_round_trips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = ftmem(dir.path(), &["generate", "--n", "12", "--gamma", "3", "--rho", "6", "--seed", "7"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    let path = dir.path().join("out/code_12_3_6_s7.alist");
    let first = fs::read(&path).unwrap();
    let g = read_alist(std::str::from_utf8(&first).unwrap()).unwrap();
    assert_eq!((g.n(), g.gamma(), g.rho()), (12, 3, 6));

    let b = ftmem(dir.path(), &["generate", "--n", "12", "--gamma", "3", "--rho", "6", "--seed", "7", "--out", "again.alist"]);
    assert_eq!(code(&b), 0);
    assert_eq!(fs::read(dir.path().join("again.alist")).unwrap(), first);
}

#[test]
fn generate_rejects_bad_divisibility() {
    let dir = tempfile::tempdir().unwrap();
    let o = ftmem(dir.path(), &["generate", "--n", "10", "--gamma", "3", "--rho", "4"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("divisible"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

fn certificate(dir: &Path, extra: &[&str]) -> (i32, Option<Value>) {
    let mut args = vec!["certify", "--alist", "g.alist", "--out", "cert.json"];
    args.extend_from_slice(extra);
    let o = ftmem(dir, &args);
    let cert = fs::read_to_string(dir.join("cert.json")).ok().map(|s| serde_json::from_str(&s).unwrap());
    let _ = fs::remove_file(dir.join("cert.json"));
    (code(&o), cert)
}

#[test]
fn certify_modes_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let o = ftmem(
        dir.path(),
        &["generate", "--n", "36", "--gamma", "4", "--rho", "6", "--girth6", "--out", "g.alist"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let g = read_alist(&fs::read_to_string(dir.path().join("g.alist")).unwrap()).unwrap();

    // Girth 6 gives every pair 2*gamma - 1 = 7 neighbours, exactly (3/4 + 1/8) * 4 * 2.
    let (c, cert) = certificate(dir.path(), &["--alpha-n", "2", "--epsilon", "0.125"]);
    assert_eq!(c, 0);
    assert_eq!(cert.unwrap()["verdict"], "certified");

    let (c, cert) = certificate(dir.path(), &["--alpha-n", "2", "--epsilon", "0.2"]);
    assert_eq!(c, 0);
    let cert = cert.unwrap();
    assert_eq!(cert["verdict"], "refuted");
    let w: Vec<usize> = serde_json::from_value(cert["witness"].clone()).unwrap();
    let hood = ftmem::expansion::neighborhood_size(&g, &w) as f64;
    assert!(hood < 0.95 * 4.0 * w.len() as f64);

    let (c, cert) = certificate(dir.path(), &["--alpha-n", "2", "--epsilon", "0.125", "--mode", "randomized", "--trials", "500"]);
    assert_eq!(c, 0);
    assert_eq!(cert.unwrap()["verdict"], "inconclusive");

    let (c, cert) = certificate(dir.path(), &["--alpha-n", "2", "--epsilon", "0.3"]);
    assert_eq!(c, 2);
    assert!(cert.is_none());
}

fn write_config(dir: &Path, name: &str, body: &str) {
    fs::create_dir_all(dir.join("cfg")).unwrap();
    fs::write(dir.join("cfg").join(name), body).unwrap();
}

#[test]
fn simulate_fault_free_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "clean.json",
        r#"{
            "code": { "n": 40, "gamma": 3, "rho": 6, "seed": 2 },
            "decoder": "algorithm_a",
            "fault_model": { "model": "independent", "rates": { "p_m": 0, "p_xor": 0, "p_maj": 0 } },
            "cycles": 20, "trials": 10, "root_seed": 1,
            "output": { "summary": "res/clean.json", "trace": "res/clean.csv" }
        }"#,
    );
    let o = ftmem(dir.path(), &["simulate", "cfg/clean.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = dir.path().join("cfg/res/clean.json");
    let first = fs::read(&summary).unwrap();
    let v: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["summary"]["failures"], 0);
    let trace = fs::read_to_string(dir.path().join("cfg/res/clean.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 10 * 20);

    let o = ftmem(dir.path(), &["simulate", "cfg/clean.json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(&summary).unwrap(), first);
}

#[test]
fn simulate_adversarial_on_certified_graph() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "adv.json",
        r#"{
            "code": { "n": 70, "gamma": 6, "rho": 7, "seed": 0, "girth6": true },
            "decoder": "algorithm_a",
            "fault_model": {
                "model": "adversarial",
                "budget": { "alpha_m": 0.015, "alpha_xor": 0, "alpha_maj": 0 },
                "strategy": "greedy"
            },
            "cycles": 200, "trials": 20, "root_seed": 5,
            "profile": { "alpha_n": 2, "epsilon": 0.16666666666666666, "certify": true }
        }"#,
    );
    let o = ftmem(dir.path(), &["simulate", "cfg/adv.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/simulation.json")).unwrap()).unwrap();
    assert_eq!(v["certificate"]["verdict"], "certified");
    assert_eq!(v["summary"]["failures"], 0);
    assert_eq!(v["summary"]["accounting_violations"], 0);
}

#[test]
fn simulate_without_correction_fails_on_schedule() {
    let dir = tempfile::tempdir().unwrap();
    // Three clean registers flip per cycle and nothing repairs them.
    write_config(
        dir.path(),
        "none.json",
        r#"{
            "code": { "n": 40, "gamma": 3, "rho": 6, "seed": 0 },
            "decoder": "none",
            "fault_model": {
                "model": "adversarial",
                "budget": { "alpha_m": 0.08, "alpha_xor": 0, "alpha_maj": 0 },
                "strategy": "cluster"
            },
            "cycles": 30, "trials": 1, "root_seed": 0,
            "output": { "trace": "none.csv" }
        }"#,
    );
    let o = ftmem(dir.path(), &["simulate", "cfg/none.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let trace = fs::read_to_string(dir.path().join("cfg/none.csv")).unwrap();
    let pre: Vec<f64> = trace.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(!pre.is_empty() && pre.len() < 30, "memory should fail and stop");
    for (i, a) in pre.iter().enumerate() {
        assert!((a - 3.0 * (i + 1) as f64 / 40.0).abs() < 1e-12);
    }
}

#[test]
fn simulate_rejects_invalid_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "gates.json",
            r#"{ "code": { "n": 40, "gamma": 3, "rho": 6, "seed": 0 }, "decoder": "none",
                 "fault_model": { "model": "independent", "rates": { "p_m": 0.01, "p_xor": 0.01, "p_maj": 0 } },
                 "cycles": 5, "trials": 1, "root_seed": 0 }"#,
        ),
        (
            "missing.json",
            r#"{ "code": { "alist": "nowhere.alist" }, "decoder": "tk",
                 "fault_model": { "model": "independent", "rates": { "p_m": 0, "p_xor": 0, "p_maj": 0 } },
                 "cycles": 5, "trials": 1, "root_seed": 0 }"#,
        ),
        (
            "uncertified.json",
            r#"{ "code": { "n": 40, "gamma": 3, "rho": 6, "seed": 0 }, "decoder": "algorithm_a",
                 "fault_model": { "model": "independent", "rates": { "p_m": 0, "p_xor": 0, "p_maj": 0 } },
                 "cycles": 5, "trials": 1, "root_seed": 0,
                 "profile": { "alpha_n": 4, "epsilon": 0.25, "certify": true } }"#,
        ),
        ("garbage.json", "{ not json"),
    ];
    for (name, body) in cases {
        write_config(dir.path(), name, body);
        let o = ftmem(dir.path(), &["simulate", &format!("cfg/{name}")]);
        assert_eq!(code(&o), 2, "{name}: {}", stderr(&o));
    }
    assert!(!dir.path().join("out").exists());
}

#[test]
fn compare_tk_emits_paired_traces() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "pair.json",
        r#"{
            "code": { "n": 40, "gamma": 4, "rho": 8, "seed": 3 },
            "decoder": "algorithm_a",
            "fault_model": { "model": "independent", "rates": { "p_m": 0.01, "p_xor": 0.001, "p_maj": 0.001 } },
            "cycles": 15, "trials": 4, "root_seed": 9,
            "output": { "summary": "res/pair.json" }
        }"#,
    );
    let o = ftmem(dir.path(), &["compare-tk", "cfg/pair.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("cfg/res/pair_compare_tk.json")).unwrap()).unwrap();
    assert_eq!(v["algorithm_a"]["trials"], 4);
    assert_eq!(v["tk"]["trials"], 4);
    let trace = fs::read_to_string(dir.path().join("cfg/res/pair_compare_tk.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 8);
    assert!(lines.count() >= 4);
}

#[test]
fn bounds_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = ftmem(dir.path(), &["bounds", "--gammas", "9", "--rhos", "10..72", "--chernoff-out", "tail.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/bounds.csv")).unwrap();
    let rows: Vec<(usize, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 63);
    let best = rows.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert_eq!(best.0, 18);
    let tail = fs::read_to_string(dir.path().join("tail.csv")).unwrap();
    assert_eq!(tail.lines().count(), 1 + 8);

    let o = ftmem(dir.path(), &["bounds", "--gammas", "34", "--rhos", "35..136", "--out", "b34.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let o = ftmem(dir.path(), &["bounds", "--gammas", "9", "--rhos", ""]);
    assert_eq!(code(&o), 2);
    let o = ftmem(dir.path(), &["bounds", "--cost", "cubic"]);
    assert_eq!(code(&o), 2);
}
