use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use squeezeprep_cli::manifest::sha256_hex;
use squeezeprep_cli::RunConfig;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squeezeprep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn spectrum_table_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let o = run(&["spectrum", "--out", out.to_str().unwrap(), "--set", "system.n_cut=60"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("spectrum.csv"));
    assert_eq!(rows.len(), 51 * 21);
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["results"]["zero_mode_everywhere"], true);
    assert!(m["results"]["max_relative_pairing"].as_f64().unwrap() < 1e-8);
}

#[test]
fn half_integer_spin_is_flagged() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("half");
    let o = run(&[
        "spectrum",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "system.kind=\"spin\"",
        "--set",
        "system.j=\"9/2\"",
        "--set",
        "sweep.branches=5",
    ]);
    assert!(o.status.success());
    let m = manifest(&out);
    let flags: Vec<&str> = m["flags"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert!(flags.contains(&"no zero mode"));
    assert_eq!(m["results"]["half_integer_spin"], true);
}

#[test]
fn states_table_values() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("st");
    let o = run(&["states", "--out", out.to_str().unwrap(), "--set", "states.ratios=[0.0, 0.25, 0.4]"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    for s in m["results"]["states"].as_array().unwrap() {
        let cos = s["cos_theta"].as_f64().unwrap();
        assert!((s["var_p"].as_f64().unwrap() - cos).abs() < 1e-9);
        assert!((s["var_x"].as_f64().unwrap() - 1.0 / cos).abs() < 1e-9);
    }
    let rows = csv_rows(&out.join("states.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][3], "sub");
    assert!(out.join("state_r0.25.csv").exists());
}

#[test]
fn spin_states_gamma_and_boundary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sp");
    let o = run(&[
        "states",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "system.kind=\"spin\"",
        "--set",
        "system.j=6",
        "--set",
        "states.ratios=[0.0, 0.5, 0.75]",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    let states = m["results"]["states"].as_array().unwrap();
    assert!(states[0]["gamma"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(states[1]["regime"], "critical");
    assert!(states[1]["phi"].as_f64().unwrap().abs() < 1e-15);
    let phi = states[2]["phi"].as_f64().unwrap();
    assert!((phi - (1.0f64 / 1.5).acos()).abs() < 1e-12);
}

#[test]
fn oscillator_beyond_boundary_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bad");
    let o = run(&["states", "--out", out.to_str().unwrap(), "--set", "states.ratios=[0.5]"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("1/2"), "{err}");
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn unknown_key_is_a_config_error() {
    let o = run(&["spectrum", "--set", "sweep.points=3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn leakage_guard_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("leak");
    let o = run(&[
        "evolve",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "system.n_cut=12",
        "--set",
        "schedule.duration=20",
        "--set",
        "schedule.dt=0.01",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let m = manifest(&out);
    assert_eq!(m["status"], "guard");
    assert_eq!(m["results"]["guard"]["guard"], "leakage");
    assert!(m["results"]["guard"]["t"].as_f64().unwrap() > 0.0);
}

fn small_evolve(out: &Path) -> Output {
    run(&[
        "evolve",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "system.n_cut=100",
        "--set",
        "schedule.duration=10",
        "--set",
        "schedule.dt=0.01",
        "--set",
        "outputs.binary_snapshots=true",
        "--set",
        "wigner.step=0.1",
        "--snapshots",
        "0.3",
    ])
}

#[test]
fn evolve_outputs_and_hashes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ev");
    let o = small_evolve(&out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    let outputs = m["outputs"].as_array().unwrap();
    let names: Vec<&str> = outputs.iter().map(|r| r["file"].as_str().unwrap()).collect();
    for f in ["trajectory.csv", "snapshot_u0.3000.bin", "wigner_u0.3000.csv", "wigner_u0.3000.bin"] {
        assert!(names.contains(&f), "{names:?}");
    }
    for r in outputs {
        let bytes = std::fs::read(out.join(r["file"].as_str().unwrap())).unwrap();
        assert_eq!(r["sha256"].as_str().unwrap(), sha256_hex(&bytes));
        assert_eq!(r["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
    assert_eq!(m["units"]["times"], "1/g");
    let delta = m["results"]["convergence"]["fidelity_delta"].as_f64().unwrap();
    assert!(delta.abs() <= 1e-8, "{delta}");
    let header = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(header.starts_with("t,u,rho_gg,rho_ee,rho_ge_re,rho_ge_im,entropy,leakage,norm_drift,"));

    let wout = tmp.path().join("w");
    let snap = out.join("snapshot_u0.3000.bin");
    let o = run(&[
        "wigner",
        "--out",
        wout.to_str().unwrap(),
        "--set",
        "system.n_cut=100",
        "--set",
        "wigner.step=0.1",
        "--set",
        &format!("wigner.input={:?}", snap.to_str().unwrap()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = std::fs::read(wout.join("wigner.csv")).unwrap();
    let b = std::fs::read(out.join("wigner_u0.3000.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(small_evolve(&a).status.success());
    assert!(small_evolve(&b).status.success());
    for f in ["trajectory.csv", "wigner_u0.3000.csv", "snapshot_u0.3000.bin"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn husimi_from_spin_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let ev = tmp.path().join("ev");
    let spin = ["--set", "system.kind=\"spin\"", "--set", "system.j=4"];
    let mut args = vec!["evolve", "--out", ev.to_str().unwrap()];
    args.extend(spin);
    args.extend([
        "--set",
        "schedule.duration=100",
        "--set",
        "schedule.dt=0.01",
        "--set",
        "outputs.binary_snapshots=true",
        "--set",
        "outputs.maps=false",
        "--snapshots",
        "0.7",
    ]);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let header = std::fs::read_to_string(ev.join("trajectory.csv")).unwrap();
    assert!(header.lines().next().unwrap().ends_with("fidelity_adiabatic,fidelity_zero_product,symmetry,energy"));

    let hs = tmp.path().join("hs");
    let input = format!("husimi.input={:?}", ev.join("snapshot_u0.7000.bin").to_str().unwrap());
    let mut args = vec!["husimi", "--out", hs.to_str().unwrap(), "--set", &input];
    args.extend(spin);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&hs);
    let integral = m["results"]["map"]["integral"].as_f64().unwrap();
    assert!((integral - 1.0).abs() < 1e-3);
    assert_eq!(csv_rows(&hs.join("husimi.csv")).len(), 181 * 361);

    let mut args = vec!["husimi", "--out", hs.to_str().unwrap(), "--set", "system.j=5", "--set", &input];
    args.extend(["--set", "system.kind=\"spin\""]);
    assert_eq!(run(&args).status.code(), Some(2));
}

#[test]
fn config_file_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.system.n_cut = 80;
    cfg.sweep.u_points = 5;
    cfg.sweep.branches = 4;
    cfg.outputs.dir = tmp.path().join("from_file");
    let path = tmp.path().join("run.toml");
    std::fs::write(&path, cfg.to_toml()).unwrap();
    assert_eq!(RunConfig::load(Some(&path), &[]).unwrap(), cfg);
    let o = run(&["spectrum", "--config", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(csv_rows(&cfg.outputs.dir.join("spectrum.csv")).len(), 20);
    let m = manifest(&cfg.outputs.dir);
    assert_eq!(m["config"]["system"]["n_cut"], 80);
}
