use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fracwill(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracwill")).args(args).current_dir(dir).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn ellipse_polyline(b: f64) -> String {
    let nodes: Vec<[f64; 2]> = (0..4000)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / 4000.0;
            [t.cos(), b * t.sin()]
        })
        .collect();
    serde_json::json!({ "kind": "polyline", "nodes": nodes, "closed": true }).to_string()
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&fracwill(&["suite", "nope"], d.path())), 2);
    assert_eq!(code(&fracwill(&["energy", "--s", "0.5"], d.path())), 2);
}

#[test]
fn bad_config_values_are_usage_errors() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "bad.cfg", "n = lots\n");
    let o = fracwill(&["suite", "scaling", "--config", "bad.cfg", "--out", "r"], d.path());
    assert_eq!(code(&o), 2);
    write(d.path(), "dup.cfg", "n = 64\nn = 128\n");
    assert_eq!(code(&fracwill(&["suite", "scaling", "--config", "dup.cfg"], d.path())), 2);
}

#[test]
fn scaling_suite_passes_and_reruns_identically() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "s.cfg", "# small run\nn = 256\n");
    let digests = |out: &str| {
        let o = fracwill(&["suite", "scaling", "--config", "s.cfg", "--out", out], d.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let m = json(&d.path().join(out).join("manifest.json"));
        assert_eq!(m["pass"], true);
        assert_eq!(m["config"]["n"], "256");
        assert_eq!(m["config"]["s_critical"], "0.5");
        assert_eq!(m["inputs"].as_array().unwrap().len(), 1);
        m["outputs"].as_array().unwrap().iter().map(|f| f["sha256"].as_str().unwrap().to_string()).collect::<Vec<_>>()
    };
    assert_eq!(digests("a"), digests("b"));
    let csv = std::fs::read_to_string(d.path().join("a/scaling.csv")).unwrap();
    assert!(csv.starts_with("s,p,rho,n,delta,"));
}

#[test]
fn nmc_on_a_circle_is_constant_and_methods_agree() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.json", r#"{"kind": "support", "a0": 1.0, "coeffs": []}"#);
    let o = fracwill(&["nmc", "--curve", "c.json", "--s", "0.5", "--n", "256", "--out", "b.csv"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(d.path().join("b.csv")).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["node_index", "arc_param", "H_s", "method", "delta", "n", "h"]);
    let v: Vec<f64> = r.records().map(|x| x.unwrap()[2].parse().unwrap()).collect();
    assert_eq!(v.len(), 256);
    assert!(v.iter().all(|x| (x - v[0]).abs() < 1e-8 * v[0]));

    let o = fracwill(
        &["nmc", "--curve", "c.json", "--s", "0.5", "--n", "256", "--method", "region", "--every", "128"],
        d.path(),
    );
    assert_eq!(code(&o), 0);
    let mut r = csv::Reader::from_reader(&o.stdout[..]);
    for rec in r.records() {
        let h: f64 = rec.unwrap()[2].parse().unwrap();
        assert!((h - v[0]).abs() / v[0] < 0.02, "{h} vs {}", v[0]);
    }
}

#[test]
fn critical_energy_ignores_scale() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "a.json", r#"{"kind": "support", "a0": 1.0, "coeffs": [[3, 0.02, 0.0]]}"#);
    write(d.path(), "b.json", r#"{"kind": "support", "a0": 4.0, "coeffs": [[3, 0.08, 0.0]]}"#);
    let total = |f: &str| {
        let o = fracwill(&["energy", "--curve", f, "--s", "0.5", "--critical", "--n", "128"], d.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["n"], 128);
        v["total"].as_f64().unwrap()
    };
    let (a, b) = (total("a.json"), total("b.json"));
    assert!((a - b).abs() < 1e-10 * a);
}

#[test]
fn open_or_missing_curves_fail() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "open.json", r#"{"kind": "polyline", "nodes": [[0,0],[1,0],[1,1]], "closed": false}"#);
    assert_eq!(code(&fracwill(&["energy", "--curve", "open.json", "--s", "0.5", "--p", "2"], d.path())), 1);
    assert_eq!(code(&fracwill(&["energy", "--curve", "none.json", "--s", "0.5", "--p", "2"], d.path())), 1);
}

#[test]
fn function_commands() {
    let d = tempfile::tempdir().unwrap();
    let cos: Vec<f64> = (0..128).map(|j| (std::f64::consts::TAU * j as f64 / 128.0).cos()).collect();
    write(d.path(), "cos.json", &serde_json::json!({ "domain": "circle", "samples": cos }).to_string());
    let o = fracwill(&["seminorm", "--fn", "cos.json", "--t", "0.5", "--p", "2"], d.path());
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["value"].as_f64().unwrap() > 0.0);

    let o = fracwill(&["stein", "--fn", "cos.json", "--s", "0.5", "--out", "st.json"], d.path());
    assert_eq!(code(&o), 0);
    let r = json(&d.path().join("st.json"))["ratio"].as_f64().unwrap();
    assert!(r > 0.1 && r < 10.0);

    let m = 256;
    let bump: Vec<f64> = (0..m)
        .map(|j| {
            let x = -1.0 + (j as f64 + 0.5) * 2.0 / m as f64;
            if x.abs() < 0.5 { (-1.0 / (1.0 - 4.0 * x * x)).exp() } else { 0.0 }
        })
        .collect();
    write(d.path(), "bump.json", &serde_json::json!({ "domain": { "interval": [-1.0, 1.0] }, "samples": bump }).to_string());
    let o = fracwill(&["toper", "--fn", "bump.json", "--s", "0.5", "--at", "120,128,136"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["values"].as_array().unwrap().iter().all(|x| x.as_f64().unwrap() < 0.0));
    assert_eq!(code(&fracwill(&["toper", "--fn", "bump.json", "--s", "0.5", "--at", "999"], d.path())), 2);
    // the spectral operator needs a periodic domain
    assert_eq!(code(&fracwill(&["stein", "--fn", "bump.json", "--s", "0.5"], d.path())), 1);
}

#[test]
fn lsc_diagnosis_sets_the_exit_code() {
    let d = tempfile::tempdir().unwrap();
    for (k, b) in [0.6, 0.8, 0.9, 0.95, 0.975].iter().enumerate() {
        write(d.path(), &format!("e{k}.json"), &ellipse_polyline(*b));
    }
    write(d.path(), "circle.json", &ellipse_polyline(1.0));
    let base = ["diagnose", "lsc", "--s", "0.5", "--n", "256", "--curves"];
    let mut good: Vec<&str> = base.to_vec();
    good.extend(["e0.json", "e1.json", "e2.json", "e3.json", "e4.json", "--limit", "circle.json"]);
    assert_eq!(code(&fracwill(&good, d.path())), 0);
    // an oval as the limit of circles would contradict the inequality
    let mut bad: Vec<&str> = base.to_vec();
    bad.extend(["circle.json", "circle.json", "circle.json", "circle.json", "--limit", "e0.json"]);
    let o = fracwill(&bad, d.path());
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["holds"], false);
}

#[test]
fn minimize_writes_a_reproducible_trace() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "m.cfg", "n = 64\nk = 4\nmax_iters = 2\nseed = 3\namplitude = 0.1\n");
    let run = |out: &str| {
        let o = fracwill(&["minimize", "--config", "m.cfg", "--out", out], d.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(d.path().join(out).join("trace.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    assert!(a.starts_with("iter,energy,grad_norm,step,accepted,n,k"));
    assert!(d.path().join("a/curves/iter_000.json").exists());
    let fin = json(&d.path().join("a/final.json"));
    assert_eq!(fin["kind"], "support");
    let m = json(&d.path().join("a/manifest.json"));
    assert_eq!(m["seeds"], serde_json::json!([3]));
    assert_eq!(m["config"]["shrink"], "0.5");

    write(d.path(), "bad.cfg", "shrink = 1.5\n");
    assert_eq!(code(&fracwill(&["minimize", "--config", "bad.cfg", "--out", "c"], d.path())), 2);

    let o = fracwill(&["plotdata", "--kind", "descent", "--input", "a/trace.csv", "--out", "plots"], d.path());
    assert_eq!(code(&o), 0);
    let dat = std::fs::read_to_string(d.path().join("plots/descent.dat")).unwrap();
    assert!(dat.starts_with("# source"));
    assert_eq!(dat.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).count(), a.lines().count() - 1);
    assert!(d.path().join("plots/descent.gp").exists());
}

#[test]
fn plotdata_groups_refinement_rows_and_logs_corner_rows() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "dichotomy.csv", "p,n,delta,total\n2,128,0.03,10\n2,256,0.015,19\n1,128,0.03,4\n1,256,0.015,4.1\n");
    let o = fracwill(&["plotdata", "--kind", "refinement", "--input", "dichotomy.csv", "--out", "p"], d.path());
    assert_eq!(code(&o), 0);
    let dat = std::fs::read_to_string(d.path().join("p/refinement.dat")).unwrap();
    assert_eq!(dat.matches("# p = ").count(), 2);
    assert!(std::fs::read_to_string(d.path().join("p/refinement.gp")).unwrap().contains("index 1"));

    write(d.path(), "corners.csv", "s,n,delta,distance,h_s,alpha\n0.5,100,0.04,1.0,2.0,-0.5\n");
    assert_eq!(code(&fracwill(&["plotdata", "--kind", "corners", "--input", "corners.csv", "--out", "p"], d.path())), 0);
    let dat = std::fs::read_to_string(d.path().join("p/corners.dat")).unwrap();
    let row: Vec<f64> = dat.lines().last().unwrap().split_whitespace().map(|x| x.parse().unwrap()).collect();
    assert!(row[0].abs() < 1e-12 && (row[1] - 2f64.ln()).abs() < 1e-12);

    assert_eq!(code(&fracwill(&["plotdata", "--kind", "corners", "--input", "gone.csv", "--out", "p"], d.path())), 1);
}

#[test]
fn thread_cap_is_validated() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.json", r#"{"kind": "support", "a0": 1.0}"#);
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_fracwill"))
            .args(["energy", "--curve", "c.json", "--s", "0.5", "--p", "2", "--n", "64"])
            .env("FRACWILL_THREADS", threads)
            .current_dir(d.path())
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("0")), 2);
    let (a, b) = (run("1"), run("3"));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}
