use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::TempDir;
use vbal::formats::{read_body, read_instance, BodyFile, InstanceFile};
use vbal::generate::{gen_beck_fiala, gen_cube_body, gen_komlos};

fn vbal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vbal")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = vbal(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json_of(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }
    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
    fn s(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_owned()
    }
}

#[test]
fn solve_komlos_report_bounds_the_spectrum() {
    let d = Dir::new();
    ok(&["gen-komlos", "--n", "8", "--m", "8", "--norm-bound", "1.0", "--seed", "7", "--out", &d.s("k.json")]);
    ok(&["solve-komlos", "--instance", &d.s("k.json"), "--out", &d.s("r.json")]);
    let r = json_of(&d.path("r.json"));
    assert_eq!(r["command"], "solve-komlos");
    assert_eq!(r["schema_version"], 1);
    let eig = r["outputs"]["eig_max_VXVt"].as_f64().unwrap();
    assert!(eig <= 1.0 + 1e-7, "eig_max = {eig}");
    let x = r["outputs"]["x"].as_array().unwrap();
    for (i, row) in x.iter().enumerate() {
        assert!((row[i].as_f64().unwrap() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn generators_are_byte_deterministic() {
    let d = Dir::new();
    for name in ["a.json", "b.json"] {
        ok(&["gen-beck-fiala", "--n", "8", "--m", "6", "--t", "3", "--seed", "5", "--out", &d.s(name)]);
    }
    assert_eq!(std::fs::read(d.path("a.json")).unwrap(), std::fs::read(d.path("b.json")).unwrap());
    let (_, sys) = read_instance(&d.path("a.json")).unwrap();
    assert_eq!(sys.vectors(), gen_beck_fiala(8, 6, 3, 5).unwrap().vectors());

    ok(&["gen-cube-body", "--dim", "2", "--measure", "0.25", "--out", &d.s("c.json")]);
    let c: BodyFile = serde_json::from_str(&std::fs::read_to_string(d.path("c.json")).unwrap()).unwrap();
    assert_eq!(c, gen_cube_body(2, 0.25).unwrap());
    match c {
        BodyFile::Cube { scale, .. } => assert!((scale - 0.674_489_750_196_081_7).abs() < 1e-12),
        other => panic!("unexpected body {other:?}"),
    }
}

#[test]
fn instance_and_body_files_round_trip() {
    let d = Dir::new();
    let sys = gen_komlos(5, 3, 0.7, 11).unwrap();
    let file = InstanceFile::from_system(&sys);
    vbal::formats::write_json(&d.path("i.json"), &file).unwrap();
    let (back, sys2) = read_instance(&d.path("i.json")).unwrap();
    assert_eq!(back, file);
    assert_eq!(sys2.vectors(), sys.vectors());
    assert_eq!(sys2.lambda(), sys.lambda());

    let text = r#"{"type": "symmetrized", "children": [{"type": "intersection", "children": [
        {"type": "ball", "center": [0.1, 0.0], "radius": 2.0},
        {"type": "scaled", "factor": 1.5, "children": [{"type": "whole", "dim": 2}]}]}]}"#;
    std::fs::write(d.path("b.json"), text).unwrap();
    let body = read_body(&d.path("b.json")).unwrap();
    let file: BodyFile = serde_json::from_str(text).unwrap();
    assert_eq!(BodyFile::from_body(&body).unwrap(), file);
}

#[test]
fn walk_reports_are_reproducible() {
    let d = Dir::new();
    ok(&["gen-komlos", "--n", "6", "--m", "4", "--seed", "1", "--out", &d.s("k.json")]);
    for name in ["w1.json", "w2.json"] {
        ok(&["walk", "--instance", &d.s("k.json"), "--seed", "9", "--trials", "3", "--out", &d.s(name)]);
    }
    let (a, b) = (json_of(&d.path("w1.json")), json_of(&d.path("w2.json")));
    assert_eq!(a["outputs"], b["outputs"]);
    assert_eq!(a["instance_hash"], b["instance_hash"]);
    let chi = a["outputs"]["coloring"].as_array().unwrap();
    assert_eq!(chi.len(), 6);
    assert!(chi.iter().all(|x| x.as_f64().unwrap().abs() == 1.0));
    assert!(a["statistics"]["wall_time_ms"].as_f64().is_some());
}

fn pipe_walk_into_verify(trials: &str) -> (Output, Output) {
    let d = Dir::new();
    ok(&["gen-komlos", "--n", "8", "--m", "8", "--seed", "3", "--out", &d.s("k.json")]);
    let mut walk = Command::new(env!("CARGO_BIN_EXE_vbal"))
        .args(["walk", "--mode", "practical", "--instance", &d.s("k.json"), "--trials", trials, "--emit-samples", "-"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let verify = Command::new(env!("CARGO_BIN_EXE_vbal"))
        .args(["verify-subgaussian", "--input", "-"])
        .stdin(walk.stdout.take().unwrap())
        .output()
        .unwrap();
    let walk = walk.wait_with_output().unwrap();
    (walk, verify)
}

#[test]
fn walk_pipes_into_verify_subgaussian() {
    let (walk, verify) = pipe_walk_into_verify("1000");
    assert!(walk.status.success() && verify.status.success(), "{}", String::from_utf8_lossy(&verify.stderr));
    let r: Value = serde_json::from_slice(&verify.stdout).unwrap();
    let s = r["outputs"]["s_hat"].as_f64().unwrap();
    assert!(s > 0.0 && s.is_finite());
    assert_eq!(r["statistics"]["samples"], 1000);
}

#[test]
fn verify_subgaussian_rejects_short_sample_files() {
    let (walk, verify) = pipe_walk_into_verify("500");
    assert!(walk.status.success());
    assert_eq!(verify.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&verify.stderr).unwrap();
    assert_eq!(err["error"], "precondition");
    assert_eq!(err["exit_code"], 1);
}

#[test]
fn coverage_of_gaussian_samples() {
    let d = Dir::new();
    ok(&["gen-cube-body", "--dim", "2", "--measure", "0.5", "--out", &d.s("c.json")]);
    let mut f = std::fs::File::create(d.path("g.csv")).unwrap();
    let rows: Vec<Vec<f64>> = {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        (0..4000).map(|_| (0..2).map(|_| rng.sample(rand_distr_normal())).collect()).collect()
    };
    vbal::formats::write_samples(&mut f, &rows).unwrap();
    f.flush().unwrap();
    ok(&["verify-subgaussian", "--input", &d.s("g.csv"), "--body", &d.s("c.json"), "--out", &d.s("r.json")]);
    let r = json_of(&d.path("r.json"));
    let cov = r["outputs"]["coverage"].as_f64().unwrap();
    // 4000 samples: standard error 0.0079.
    assert!((cov - 0.5).abs() < 0.04, "coverage {cov}");
    let s = r["outputs"]["s_hat"].as_f64().unwrap();
    assert!((s - 1.0).abs() < 0.25, "s_hat {s}");
}

// Box–Muller keeps rand_distr out of this crate's dependency list.
fn rand_distr_normal() -> impl rand::distr::Distribution<f64> {
    rand::distr::Distribution::map(rand::distr::StandardUniform, |(u, v): (f64, f64)| {
        (-2.0 * (1.0 - u).ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    })
}

#[test]
fn bench_zero_family_rows_are_zero() {
    let d = Dir::new();
    ok(&["bench", "--families", "zero", "--ns", "4,6", "--trials", "4", "--csv", &d.s("b.csv"), "--out", &d.s("r.json")]);
    let mut r = csv::Reader::from_path(d.path("b.csv")).unwrap();
    let headers = r.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        for col in ["mean_linf", "median_linf", "max_linf", "mean_l2", "baseline_max_linf"] {
            let i = headers.iter().position(|h| h == col).unwrap();
            assert_eq!(row[i].parse::<f64>().unwrap(), 0.0, "{col}");
        }
    }
    assert_eq!(json_of(&d.path("r.json"))["command"], "bench");
}

#[test]
fn pipelines_run_on_small_vectors() {
    let d = Dir::new();
    ok(&["gen-komlos", "--n", "4", "--m", "4", "--norm-bound", "0.02", "--seed", "2", "--out", &d.s("k.json")]);
    ok(&["gen-cube-body", "--dim", "4", "--measure", "0.6", "--out", &d.s("c.json")]);
    let common = ["--instance", &d.s("k.json"), "--body", &d.s("c.json"), "--samples", "1000", "--beta", "0.05"];
    for cmd in ["color-asym", "color-body-centric", "recenter"] {
        let out = d.s(&format!("{cmd}.json"));
        let mut args = vec![cmd];
        args.extend(common.iter().copied());
        args.extend(["--seed", "3", "--out", &out]);
        ok(&args);
        let r = json_of(Path::new(&out));
        assert_eq!(r["command"], cmd);
        if cmd != "recenter" {
            let chi = r["outputs"]["coloring"].as_array().unwrap();
            assert!(chi.iter().all(|x| x.as_f64().unwrap().abs() == 1.0));
        } else {
            assert_eq!(r["outputs"]["status"], "Ok");
        }
    }
}

#[test]
fn errors_are_json_with_exit_codes() {
    let d = Dir::new();
    let out = vbal(&["walk", "--instance", &d.s("missing.json")]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "io");

    // Vectors far too long for the pipeline's scaling.
    ok(&["gen-komlos", "--n", "4", "--m", "4", "--seed", "2", "--out", &d.s("k.json")]);
    ok(&["gen-cube-body", "--dim", "4", "--measure", "0.6", "--out", &d.s("c.json")]);
    let out = vbal(&["color-asym", "--instance", &d.s("k.json"), "--body", &d.s("c.json")]);
    assert_eq!(out.status.code(), Some(1));

    std::fs::write(d.path("bad.json"), r#"{"m": 1, "n": 2, "vectors": [[1.0]]}"#).unwrap();
    let out = vbal(&["walk", "--instance", &d.s("bad.json")]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "format");

    assert_eq!(vbal(&["walk", "--no-such-flag"]).status.code(), Some(1));
}
