use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qpf_cli::output::verify_manifest;
use serde_json::{json, Value};
use tempfile::TempDir;

fn qpf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpf")).args(args).output().expect("spawn qpf")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}

fn run(mode: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![mode, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    qpf(&args)
}

fn arnold(alpha: f64) -> Value {
    json!({ "family_kind": "unforced-arnold", "parameters": { "alpha": alpha } })
}

fn staircase_cfg(alpha: f64) -> Value {
    json!({
        "family": arnold(alpha),
        "staircase": {
            "tau": { "start": -0.2, "end": 0.2, "points": 81 },
            "estimator": { "n_iter": 4000, "burn_in": 200, "n_starts": 3 },
            "refine_edges": true,
            "bisect_tol": 1e-4
        }
    })
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn alpha_zero_staircase_is_identity() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &json!({
            "family": arnold(0.0),
            "rho_sweep": {
                "tau": { "start": 0.0, "end": 0.99, "points": 100 },
                "estimator": { "n_iter": 20000, "burn_in": 0, "n_starts": 2 }
            }
        }),
    );
    let out = tmp.path().join("out");
    let o = run("rho-sweep", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out.join("rho.csv"));
    assert_eq!(rows.len(), 100);
    for r in rows {
        let tau: f64 = r[0].parse().unwrap();
        let rho: f64 = r[2].parse().unwrap();
        assert!((rho - tau).abs() < 1e-4, "tau {tau} rho {rho}");
    }
}

#[test]
fn outputs_are_reproducible_and_checksummed() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &staircase_cfg(0.8));
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(run("staircase", &cfg, &a, &["--seed", "11", "--workers", "1"]).status.success());
    assert!(run("staircase", &cfg, &b, &["--seed", "11", "--workers", "4"]).status.success());
    for name in ["staircase.csv", "plateaus.csv", "staircase.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    assert!(verify_manifest(&a).unwrap());
    let m: Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    let n: Value = serde_json::from_slice(&fs::read(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 11);
    assert_eq!(m["outputs"], n["outputs"]);
    assert_eq!(m["mode"], "staircase");

    let text = fs::read_to_string(a.join("staircase.csv")).unwrap();
    assert!(text.starts_with("tau,rho,rho_unwrapped,spread,error_bound\n"));
    assert!(!text.contains('\r'));
    let svg = fs::read_to_string(a.join("staircase.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("plateaus"));
}

#[test]
fn seed_changes_sampled_starts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &staircase_cfg(0.3));
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(run("staircase", &cfg, &a, &["--seed", "1"]).status.success());
    assert!(run("staircase", &cfg, &b, &["--seed", "2"]).status.success());
    assert_ne!(fs::read(a.join("staircase.csv")).unwrap(), fs::read(b.join("staircase.csv")).unwrap());
}

#[test]
fn refined_tongue_edges_match_fixed_point_condition() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &staircase_cfg(0.8));
    let out = tmp.path().join("o");
    assert!(run("staircase", &cfg, &out, &[]).status.success());
    let report: Value = serde_json::from_slice(&fs::read(out.join("staircase.json")).unwrap()).unwrap();
    let edge = 0.8 / (2.0 * std::f64::consts::PI);
    let locked = report["plateaus"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["plateau"]["rho_unwrapped"].as_f64().unwrap().abs() < 1e-9)
        .expect("ρ = 0 plateau");
    assert!((locked["refined_left"].as_f64().unwrap() + edge).abs() < 2e-4);
    assert!((locked["refined_right"].as_f64().unwrap() - edge).abs() < 2e-4);
}

#[test]
fn malformed_config_exits_with_config_code() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, "{ not json").unwrap();
    let out = tmp.path().join("o");
    let o = run("staircase", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let unknown_plot = write_config(
        tmp.path(),
        "p.json",
        &json!({ "family": arnold(0.5), "plots": ["pie"], "staircase": staircase_cfg(0.5)["staircase"] }),
    );
    assert_eq!(run("staircase", &unknown_plot, &out, &[]).status.code(), Some(2));

    let missing_block = write_config(tmp.path(), "m.json", &json!({ "family": arnold(0.5) }));
    assert_eq!(run("staircase", &missing_block, &out, &[]).status.code(), Some(2));

    let bad_family = write_config(
        tmp.path(),
        "f.json",
        &json!({ "family": { "family_kind": "unforced-arnold" }, "staircase": staircase_cfg(0.5)["staircase"] }),
    );
    assert_eq!(run("staircase", &bad_family, &out, &[]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn family_paths_resolve_next_to_config() {
    let tmp = TempDir::new().unwrap();
    fs::create_dir(tmp.path().join("fam")).unwrap();
    fs::write(tmp.path().join("fam/a.json"), arnold(0.5).to_string()).unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &json!({ "family": "fam/a.json", "rho_sweep": { "tau": { "start": 0.0, "end": 0.1, "points": 3 } } }),
    );
    let out = tmp.path().join("o");
    assert!(run("rho-sweep", &cfg, &out, &[]).status.success());
}

#[test]
fn failed_assumptions_exit_with_structure_code() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &json!({
            "family": {
                "family_kind": "rigid",
                "E": [0.9, 0.1], "C": [0.3, 0.7],
                "constants": { "alpha": 10, "S": 1, "s": 0.5, "ell": 0.5, "L": 2 }
            },
            "verify": { "grid": { "n_theta": 50, "n_x": 50 }, "require_pass": true }
        }),
    );
    let out = tmp.path().join("o");
    let o = run("verify", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn unbracketed_gap_scan_exits_not_converged_and_keeps_existing_files() {
    let tmp = TempDir::new().unwrap();
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/families/toy-gap.json");
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &json!({
            "family": root.canonicalize().unwrap(),
            "hooks": {
                "bracket": [0.4998, 0.4999],
                "m": [3, 20],
                "eps": [0.0025048, 1e-7, 1e-10],
                "nu": 1,
                "build": { "cells": 512 },
                "hook": { "k": 5 }
            }
        }),
    );
    let out = tmp.path().join("o");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("keep.txt"), "x").unwrap();
    let o = run("hooks", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    let left: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(left, vec![std::ffi::OsString::from("keep.txt")]);
}

#[test]
fn write_failure_removes_partial_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &json!({ "family": arnold(0.5), "rho_sweep": { "tau": { "start": 0.0, "end": 0.1, "points": 3 } } }),
    );
    let out = tmp.path().join("o");
    fs::create_dir_all(out.join("rho.json")).unwrap();
    let o = run("rho-sweep", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let mut left: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    left.sort();
    assert_eq!(left, vec![std::ffi::OsString::from("rho.json")]);
}

#[test]
fn every_mode_writes_its_artifacts() {
    let tmp = TempDir::new().unwrap();
    let fam = json!({
        "family_kind": "unforced-arnold",
        "parameters": { "alpha": 0.5 },
        "E": [0.9, 0.1], "C": [0.3, 0.65],
        "constants": { "alpha": 2, "S": 1, "s": 0.5, "ell": 0.5, "L": 2 }
    });
    let cases = [
        (
            "tongues",
            json!({ "parameter": "alpha", "values": { "start": 0.2, "end": 0.6, "points": 3 },
                    "tau": { "start": -0.2, "end": 0.2, "points": 41 },
                    "estimator": { "n_iter": 2000, "burn_in": 100, "n_starts": 2 } }),
            vec!["tongues.csv", "tongues.svg"],
        ),
        (
            "sna-search",
            json!({ "tau": { "start": 0.0, "end": 0.02, "points": 2 }, "n_pullback": 300, "grid_size": 32,
                    "sink_source": { "n_theta": 4, "n_x": 4, "horizon": 200, "lambda_min": 0.05 },
                    "uniform": { "iterations": 300, "grid": 32 } }),
            vec!["sna.csv", "sna.json", "graph.svg"],
        ),
        ("verify", json!({ "grid": { "n_theta": 40, "n_x": 40 } }), vec!["verify.csv", "verify.json"]),
    ];
    for (mode, block, files) in cases {
        let key = mode.replace('-', "_");
        let cfg = write_config(tmp.path(), &format!("{key}.json"), &json!({ "family": fam, key.clone(): block }));
        let out = tmp.path().join(&key);
        let o = run(mode, &cfg, &out, &[]);
        assert!(o.status.success(), "{mode}: {}", String::from_utf8_lossy(&o.stderr));
        for f in files {
            assert!(out.join(f).is_file(), "{mode} misses {f}");
        }
        assert!(verify_manifest(&out).unwrap());
    }
    let sna = read_csv(&tmp.path().join("sna_search/sna.csv"));
    assert_eq!(sna[0][2], "smooth");
    assert_eq!(sna[0][8], "true");
    assert_eq!(sna[0][7], "0");
}
