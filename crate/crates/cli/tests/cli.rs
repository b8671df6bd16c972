use std::path::Path;
use std::process::{Command, Output};

use ionqec_core::circuit::Op;
use ionqec_core::DenseState;

fn ionqec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ionqec")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

/// Data rows as (column name → value) maps.
fn rows(csv_text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let body: String = csv_text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let head = r.headers().unwrap().clone();
    r.records()
        .map(|rec| head.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

const NOISELESS: &str = "[run]\nsamples = 200\n[noise]\np_1q = 0.0\np_ms = 0.0\np_sp = 0.0\np_m = 0.0\np_sg = 0.0\nt1 = inf\nt2 = inf\n";

#[test]
fn simulate_noiseless_gives_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", NOISELESS);
    let o = ionqec(&["simulate", "--config", &cfg, "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("# ionqec simulate config_hash="));
    let r = rows(&out);
    assert_eq!(r.len(), 2);
    for row in r {
        assert_eq!(row["p_log"].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row["err"].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row["n_samples"], "200");
        assert_eq!(row["backend"], "tableau");
    }
}

#[test]
fn simulate_defaults_reports_error_bars() {
    let o = ionqec(&["simulate", "--set", "run.samples=2000", "--set", "noise.p_ms=5e-3", "--set", "run.targets=[\"zero\"]"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    let p: f64 = r[0]["p_log"].parse().unwrap();
    let e: f64 = r[0]["err"].parse().unwrap();
    assert!(p > 0.0 && p < 0.2, "{p}");
    assert!((e - (p * (1.0 - p) / 2000.0).sqrt()).abs() < 1e-15);
}

#[test]
fn invalid_backend_noise_combination_exits_2() {
    let o = ionqec(&["simulate", "--backend", "tableau", "--set", "noise.p_c=1e-3", "--set", "noise.crosstalk_mode=entangling-coherent"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = ionqec(&["paths", "--set", "noise.p_c=1e-3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ionqec(&["simulate", "--backend", "gpu"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ionqec(&["simulate", "--set", "noise.bogus=1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ionqec(&["simulate", "--config", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_with_empty_grid_exits_2() {
    let o = ionqec(&["sweep", "--set", "sweep.axis=\"p_ms\"", "--set", "sweep.values=[]"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn sweep_output_is_reproducible_and_worker_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "[run]\nsamples = 3000\nchunk = 700\ntargets = [\"zero\"]\n[sweep]\naxis = \"p_ms\"\nvalues = [1e-3, 1e-2, 3e-2]\n",
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    let run = |out: &Path, jobs: &str, config: &str| {
        let o = ionqec(&["sweep", "--config", config, "--seed", "11", "--jobs", jobs, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read_to_string(out).unwrap()
    };
    let first = run(&a, "1", &cfg);
    assert_eq!(first, run(&b, "3", &cfg));
    // The header alone reproduces the file.
    assert_eq!(first, run(&c, "2", a.to_str().unwrap()));
    assert!(first.lines().any(|l| l.starts_with("# pseudo_threshold series=base target=zero value=")));
    let r = rows(&first);
    assert_eq!(r.len(), 3);
    assert!(r[2]["p_log"].parse::<f64>().unwrap() > r[0]["p_log"].parse::<f64>().unwrap());
}

#[test]
fn coherence_ratio_sweep_fills_ratio_column() {
    let o = ionqec(&[
        "sweep",
        "--preset",
        "coherence-ratio",
        "--set",
        "sweep.values=[1e-3]",
        "--set",
        "run.samples=20000",
        "--set",
        "run.targets=[\"zero\"]",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let r = rows(&out);
    assert_eq!(r.len(), 2);
    assert_eq!(r[0]["backend"], "paths");
    assert_eq!(r[1]["backend"], "tableau");
    let ratio: f64 = r[0]["coherent_ratio"].parse().unwrap();
    assert!(ratio > 1.0, "{ratio}");
    assert!(r[1]["coherent_ratio"].is_empty());
    assert!(out.contains("# loglog_slope series=crosstalk_mode=entangling-coherent target=zero"));
}

#[test]
fn paths_without_crosstalk_is_exactly_zero() {
    let o = ionqec(&["paths", "--preset", "coherence-ratio", "--set", "noise.crosstalk_mode=entangling-coherent", "--set", "noise.p_c=0.0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for row in rows(&stdout(&o)) {
        assert_eq!(row["p_logical"].parse::<f64>().unwrap(), 0.0);
        let w: f64 = row["accepted_weight"].parse::<f64>().unwrap() + row["restart_weight"].parse::<f64>().unwrap();
        assert!((w - 1.0).abs() < 1e-10);
    }
}

/// Applies a native circuit to a dense state.
fn apply(s: &mut DenseState, c: &ionqec_core::circuit::Circuit) {
    for e in c.events() {
        match e.op {
            Op::Rotation { axis, theta, ion } => s.apply_rotation(axis, theta, ion).unwrap(),
            Op::Ms { theta, a, b } => s.apply_xx(theta, a, b).unwrap(),
            Op::Barrier => {}
            op => panic!("unexpected {op:?}"),
        }
    }
}

#[test]
fn compile_lowers_cnot_to_an_exact_native_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.txt", "ions 3\n# bell pair\ncnot 0 2\n");
    let o = ionqec(&["compile", &f]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(!text.contains("cnot"));
    let native = ionqec::circuit_text::parse(&text).unwrap();
    assert_eq!(native.ms_count(), 1);
    // Compare with CNOT on a generic input state.
    let mut input = DenseState::new(3).unwrap();
    for (q, t) in [(0, 0.3), (1, 1.2), (2, 2.1)] {
        input.apply_rotation(ionqec_core::Axis::Y, t, q).unwrap();
        input.apply_rotation(ionqec_core::Axis::Z, t * 0.7, q).unwrap();
    }
    let mut got = input.clone();
    apply(&mut got, &native);
    let amps = input.amplitudes();
    let want: Vec<_> = (0..8).map(|b: usize| amps[if b & 1 == 1 { b ^ 4 } else { b }]).collect();
    let want = DenseState::from_amplitudes(want).unwrap();
    assert!((got.fidelity(&want) - 1.0).abs() < 1e-12);
}

#[test]
fn compile_refocus_doubles_ms_count() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.txt", "ions 4\ncnot 0 1\nms pi/2 1 2\ncnot 3 2\n");
    let plain = ionqec::circuit_text::parse(&stdout(&ionqec(&["compile", &f]))).unwrap();
    let o = ionqec(&["compile", "--refocus", &f]);
    assert!(o.status.success(), "{}", stderr(&o));
    let refocussed = ionqec::circuit_text::parse(&stdout(&o)).unwrap();
    assert_eq!(plain.ms_count(), 3);
    assert_eq!(refocussed.ms_count(), 6);
    // The refocussed circuit implements the same unitary.
    let mut a = DenseState::new(4).unwrap();
    for q in 0..4 {
        a.apply_rotation(ionqec_core::Axis::Y, 0.4 + q as f64, q).unwrap();
    }
    let mut b = a.clone();
    apply(&mut a, &plain);
    apply(&mut b, &refocussed);
    assert!((a.fidelity(&b) - 1.0).abs() < 1e-12);
}

#[test]
fn compile_reports_the_malformed_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.txt", "ions 2\ncnot 0 1\n\nms pi/2 0 7\n");
    let o = ionqec(&["compile", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn analyze_budget_tables() {
    let o = ionqec(&["analyze", "--preset", "budget"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table: std::collections::HashMap<String, String> = rows(&stdout(&o)).into_iter().map(|r| (r["quantity"].clone(), r["value"].clone())).collect();
    let deph: f64 = table["eps_ct_deph"].parse().unwrap();
    assert!((deph - 8.0 * 15e-6 / 2.2).abs() < 1e-15);
    assert_eq!(table["n_ms"], "21");
    assert_eq!(table["n_ct"], "102");

    let o = ionqec(&["analyze", "--preset", "budget", "--set", "budget.omega_ratios=[0.0, 0.0]"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let table: std::collections::HashMap<String, String> = rows(&out).into_iter().map(|r| (r["quantity"].clone(), r["value"].clone())).collect();
    for k in ["chi", "eps_ct_ms", "eps_ct_off", "eps_ct_dw", "eps_ct_loops", "eps_ct_int", "eps_ct_total", "p_ct"] {
        assert_eq!(table[k].parse::<f64>().unwrap(), 0.0, "{k}");
    }
    assert_eq!(table["total_clamped"], "true");
    assert!(out.contains("# warning"));
}

#[test]
fn analyze_missing_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "b.toml", "[budget]\nn = 2\nm = 1\nomega_ratios = [0.01]\n");
    let o = ionqec(&["analyze", "--config", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing field"), "{}", stderr(&o));
}

#[test]
fn presets_are_listed() {
    let o = ionqec(&["presets"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for name in ["coherence-ratio", "threshold", "refocus", "stark", "budget"] {
        assert!(out.contains(name));
    }
}
