//! Command drivers. Each verb writes its artifacts into the output directory
//! and finishes with a manifest; the manifest is also written when a
//! numerical guard aborts the run.

use std::time::Instant;

use serde_json::{json, Value};
use squeezeprep::evolve::{
    self, AdiabaticFidelity, EnergyObserver, EvolveOptions, Observer, OperatorExpectation,
    Schedule, ZeroProductFidelity,
};
use squeezeprep::phase_space::{self, Components, PhaseSpaceMap, SphereMesh, WignerGrid};
use squeezeprep::states::{self, SpinZeroModes};
use squeezeprep::{
    CouplingPoint, JointState, LadderKind, LadderRep, RampSchedule, Regime, Snapshot,
};

use crate::config::{RunConfig, SystemKind};
use crate::manifest::RunDir;
use crate::{CliError, EXIT_GUARD, EXIT_OK};

/// Largest accepted `1 - |<psi_dt|psi_dt/2>|^2` for evolve runs.
pub const DT_HALVING_LIMIT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Verb {
    Spectrum,
    Evolve,
    States,
    Wigner,
    Husimi,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Spectrum => "spectrum",
            Verb::Evolve => "evolve",
            Verb::States => "states",
            Verb::Wigner => "wigner",
            Verb::Husimi => "husimi",
        }
    }
}

#[derive(Debug)]
pub struct RunReport {
    pub exit_code: i32,
    pub manifest: Value,
}

struct Outcome {
    flags: Vec<String>,
    results: Value,
}

/// Runs `verb`. Configuration problems come back as `Err` before anything
/// is written; guard trips come back as a report with exit code 3.
pub fn execute(verb: Verb, cfg: &RunConfig) -> Result<RunReport, CliError> {
    let rep = cfg.ladder()?;
    let mut dir = RunDir::create(&cfg.outputs.dir)?;
    let config_json = serde_json::to_value(cfg).expect("config serializes");
    let outcome = match verb {
        Verb::Spectrum => spectrum(cfg, &rep, &mut dir),
        Verb::Evolve => evolve_cmd(cfg, &rep, &mut dir),
        Verb::States => states_cmd(cfg, &rep, &mut dir),
        Verb::Wigner => wigner_cmd(cfg, &rep, &mut dir),
        Verb::Husimi => husimi_cmd(cfg, &rep, &mut dir),
    };
    match outcome {
        Ok(out) => {
            let manifest = dir.finish(verb.name(), &config_json, "ok", &out.flags, out.results)?;
            Ok(RunReport {
                exit_code: EXIT_OK,
                manifest,
            })
        }
        Err(CliError::Guard { message, details }) => {
            let results = json!({ "error": message, "guard": details });
            let manifest = dir.finish(verb.name(), &config_json, "guard", &[], results)?;
            Ok(RunReport {
                exit_code: EXIT_GUARD,
                manifest,
            })
        }
        Err(e) => Err(e),
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory");
    buf
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn spectrum(cfg: &RunConfig, rep: &LadderRep<f64>, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let sw = &cfg.sweep;
    if sw.branches == 0 {
        return Err(CliError::Config("sweep.branches must be at least 1".into()));
    }
    let grid = match &sw.u_grid {
        Some(g) => g.clone(),
        None => squeezeprep::spectra::uniform_u_grid(sw.u_points),
    };
    if grid.is_empty() || grid.iter().any(|u| !(0.0..=1.0).contains(u)) {
        return Err(CliError::Config("u grid must be non-empty and inside [0, 1]".into()));
    }
    let sweep = dir.timed("sweep", |_| squeezeprep::sweep(rep, sw.g, &grid, sw.branches))?;
    let body = csv_bytes(|b| sweep.write_csv(b));
    dir.write("spectrum.csv", &body)?;

    let mut flags = Vec::new();
    let half_integer = matches!(rep.kind(), LadderKind::Spin(j) if !j.is_integer());
    if half_integer {
        flags.push("no zero mode".to_string());
    }
    let min_gap = sweep
        .points
        .iter()
        .map(|p| p.zero_mode_gap)
        .fold(f64::INFINITY, f64::min);
    let short = sweep.points.iter().filter(|p| p.lowest_nonneg.len() < sw.branches).count();
    if short > 0 {
        flags.push(format!("{short} points have fewer than {} non-negative branches", sw.branches));
    }
    let points: Vec<Value> = sweep
        .points
        .iter()
        .map(|p| {
            json!({
                "u": p.u,
                "zero_mode": p.has_zero_mode(),
                "zero_mode_gap": p.zero_mode_gap,
                "pairing_residual": p.pairing_residual,
                "spectral_radius": p.spectral_radius,
                "scale": p.scale,
            })
        })
        .collect();
    Ok(Outcome {
        flags,
        results: json!({
            "points": grid.len(),
            "branches": sw.branches,
            "half_integer_spin": half_integer,
            "zero_mode_everywhere": sweep.zero_mode_everywhere(),
            "min_zero_mode_gap": min_gap,
            "max_relative_pairing": sweep.max_relative_pairing(),
            "per_point": points,
        }),
    })
}

fn observers_for(rep: &LadderRep<f64>) -> Result<Vec<Box<dyn Observer<f64>>>, CliError> {
    let mut obs: Vec<Box<dyn Observer<f64>>> = Vec::new();
    match rep.kind() {
        LadderKind::Spin(j) if j.is_integer() => {
            obs.push(Box::new(AdiabaticFidelity::new(rep)?));
            obs.push(Box::new(ZeroProductFidelity::new(rep)?));
            obs.push(Box::new(OperatorExpectation::spin_symmetry(rep)?));
        }
        LadderKind::Spin(_) => {}
        _ => obs.push(Box::new(ZeroProductFidelity::new(rep)?)),
    }
    obs.push(Box::new(EnergyObserver::new(rep)));
    Ok(obs)
}

fn snapshot_label(u: f64) -> String {
    format!("u{u:.4}")
}

fn wigner_grid(cfg: &RunConfig, comp: &Components) -> WignerGrid {
    let w = &cfg.wigner;
    if w.auto {
        phase_space::auto_grid(comp, 1.0, w.step, w.max_points)
    } else {
        WignerGrid::square(w.half_width, w.step)
    }
}

fn write_map(dir: &mut RunDir, stem: &str, map: &PhaseSpaceMap) -> Result<(), CliError> {
    let csv = csv_bytes(|b| map.write_csv(b));
    dir.write(&format!("{stem}.csv"), &csv)?;
    let raster = csv_bytes(|b| map.write_raster(b));
    dir.write(&format!("{stem}.bin"), &raster)?;
    Ok(())
}

fn map_summary(map: &PhaseSpaceMap) -> Value {
    let mut v = json!({
        "min": map.min(),
        "max": map.max(),
        "integral": map.integral,
        "rows": map.rows.len(),
        "cols": map.cols.len(),
        "row_range": [map.rows[0], map.rows[map.rows.len() - 1]],
        "col_range": [map.cols[0], map.cols[map.cols.len() - 1]],
    });
    if map.kind == phase_space::MapKind::Wigner {
        v["boundary_max"] = json!(map.boundary_max);
        v["convention"] = json!(phase_space::CONVENTION);
    }
    v
}

/// Wigner map for oscillator-like ancillas, Husimi map for spins.
fn snapshot_map(
    cfg: &RunConfig,
    rep: &LadderRep<f64>,
    state: &JointState<f64>,
) -> Result<(String, PhaseSpaceMap), CliError> {
    if rep.spin().is_some() {
        let mesh = SphereMesh {
            n_theta: cfg.husimi.n_theta,
            n_phi: cfg.husimi.n_phi,
        };
        Ok(("husimi".into(), phase_space::husimi_of_joint(rep, state, &mesh)?))
    } else {
        let comp = Components::from_joint(state);
        let grid = wigner_grid(cfg, &comp);
        Ok(("wigner".into(), phase_space::wigner_components(&comp, &grid)?))
    }
}

fn evolve_cmd(cfg: &RunConfig, rep: &LadderRep<f64>, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let sc = &cfg.schedule;
    let schedule = Schedule::Ramp(RampSchedule::new(sc.g, sc.duration)?);
    if cfg.outputs.snapshots.iter().any(|u| !(0.0..=1.0).contains(u)) {
        return Err(CliError::Config("snapshot u values must lie in [0, 1]".into()));
    }
    let times: Vec<f64> = cfg
        .outputs
        .snapshots
        .iter()
        .filter_map(|&u| schedule.time_of_u(u))
        .collect();
    let opts = EvolveOptions::new(sc.dt)
        .decimation(cfg.outputs.decimation)
        .snapshots(times);
    let start = evolve::ground_start(rep);
    let mut observers = observers_for(rep)?;
    let traj = dir.timed("propagate", |_| {
        evolve::propagate(rep, &schedule, &start, &opts, &mut observers)
    })?;
    let body = csv_bytes(|b| traj.write_csv(b));
    dir.write("trajectory.csv", &body)?;

    let mut snaps = Vec::new();
    let t_maps = Instant::now();
    for (snap, &u) in traj.snapshots.iter().zip(&cfg.outputs.snapshots) {
        let label = snapshot_label(u);
        let mut entry = json!({ "u": u, "t": snap.t, "step": snap.step });
        if cfg.outputs.binary_snapshots {
            let bytes = csv_bytes(|b| evolve::write_snapshot(b, snap));
            let name = format!("snapshot_{label}.bin");
            dir.write(&name, &bytes)?;
            entry["file"] = json!(name);
        }
        if cfg.outputs.maps {
            let (kind, map) = snapshot_map(cfg, rep, &snap.state)?;
            write_map(dir, &format!("{kind}_{label}"), &map)?;
            entry[kind.as_str()] = map_summary(&map);
        }
        snaps.push(entry);
    }
    let map_seconds = t_maps.elapsed().as_secs_f64();

    let last = |name: &str| {
        traj.series(name)
            .and_then(|s| s.last().copied())
            .map(finite_or_null)
            .unwrap_or(Value::Null)
    };
    let mut results = json!({
        "steps": traj.steps,
        "dt": traj.dt,
        "samples": traj.len(),
        "max_norm_drift": traj.max_norm_drift,
        "max_krylov_dim": traj.max_krylov_dim,
        "final_entropy": traj.entropy.last().copied().unwrap_or(0.0),
        "final_leakage": finite_or_null(*traj.leakage.last().unwrap_or(&f64::NAN)),
        "final_fidelity_zero_product": last("fidelity_zero_product"),
        "final_fidelity_adiabatic": last("fidelity_adiabatic"),
        "snapshots": snaps,
        "map_seconds": map_seconds,
    });
    if let Some(sym) = traj.series("symmetry") {
        let drift = sym.iter().map(|s| (s - sym[0]).abs()).fold(0.0, f64::max);
        results["symmetry_drift"] = json!(drift);
    }
    if cfg.outputs.dt_halving {
        let report = dir.timed("dt_halving", |_| evolve::dt_halving_check(rep, &schedule, &start, &opts))?;
        let convergence = json!({
            "dt": report.dt,
            "dt_half": report.dt / 2.0,
            "fidelity_delta": report.fidelity_delta,
            "limit": DT_HALVING_LIMIT,
        });
        if report.fidelity_delta > DT_HALVING_LIMIT {
            return Err(CliError::Guard {
                message: format!(
                    "dt = {} too large: halving it changes the final state by {:.3e} (limit {DT_HALVING_LIMIT:e})",
                    report.dt, report.fidelity_delta
                ),
                details: json!({ "guard": "dt_halving", "convergence": convergence, "run": results }),
            });
        }
        results["convergence"] = convergence;
    }
    Ok(Outcome {
        flags: Vec::new(),
        results,
    })
}

fn states_cmd(cfg: &RunConfig, rep: &LadderRep<f64>, dir: &mut RunDir) -> Result<Outcome, CliError> {
    let st = &cfg.states;
    if st.ratios.is_empty() {
        return Err(CliError::Config("states.ratios is empty".into()));
    }
    let modes = match rep.kind() {
        LadderKind::Spin(_) => Some(SpinZeroModes::new(rep)?),
        _ => None,
    };
    let mut table = String::from(
        "ratio,g1,g2,regime,theta,phi,mu,nu,tau,gamma,var_x,var_p,var_jx,var_jy,mean_jz,uncertainty_residual\n",
    );
    let mut rows = Vec::new();
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for &ratio in &st.ratios {
        let p = CouplingPoint::new(st.g1, ratio * st.g1)?;
        let ansatz = match &modes {
            Some(m) => m.product_state(&p)?,
            None => states::zero_product_state(rep, &p)?,
        };
        let gamma = modes.as_ref().map(|m| m.gamma(&ansatz.joint));
        let (mut var_x, mut var_p) = (None, None);
        let (mut var_jx, mut var_jy, mut mean_jz) = (None, None, None);
        let resid;
        if rep.spin().is_some() {
            let m = states::spin_moments(rep, &ansatz.phi_state)?;
            var_jx = Some(m.var_x);
            var_jy = Some(m.var_y);
            mean_jz = Some(m.mean_z);
            resid = Some(m.var_x.sqrt() * m.var_y.sqrt() - m.mean_z.abs() / 2.0);
        } else {
            let (_, vx, _, vp) = states::quadrature_moments(rep, &ansatz.phi_state);
            var_x = Some(vx);
            var_p = Some(vp);
            resid = Some(vx * vp - 1.0);
        }
        let regime = ansatz.regime.name();
        table.push_str(&format!(
            "{ratio},{},{},{regime},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            p.g1(),
            p.g2(),
            opt(ansatz.theta),
            opt(ansatz.phi_angle),
            opt(ansatz.mu),
            opt(ansatz.nu),
            opt(ansatz.tau.filter(|t| t.is_finite() && *t < f64::MAX)),
            opt(gamma),
            opt(var_x),
            opt(var_p),
            opt(var_jx),
            opt(var_jy),
            opt(mean_jz),
            opt(resid),
        ));
        let name = format!("state_r{ratio}.csv");
        let body = csv_bytes(|b| states::write_joint_csv(b, rep, &ansatz.joint));
        dir.write(&name, &body)?;
        let mut row = json!({
            "ratio": ratio,
            "regime": regime,
            "theta": ansatz.theta,
            "phi": ansatz.phi_angle,
            "mu": ansatz.mu,
            "nu": ansatz.nu,
            "gamma": gamma,
            "file": name,
        });
        if let Some(theta) = ansatz.theta {
            if ansatz.regime == Regime::Sub {
                row["cos_theta"] = json!(theta.cos());
                row["sec_theta"] = json!(1.0 / theta.cos());
            }
        }
        if let Some(v) = var_p {
            row["var_p"] = json!(v);
            row["var_x"] = json!(var_x);
        }
        if let Some(v) = var_jy {
            row["var_jy"] = json!(v);
            row["var_jx"] = json!(var_jx);
            row["mean_jz"] = json!(mean_jz);
        }
        rows.push(row);
    }
    dir.write("states.csv", table.as_bytes())?;
    Ok(Outcome {
        flags: Vec::new(),
        results: json!({ "states": rows }),
    })
}

fn load_snapshot(path: Option<&std::path::PathBuf>, rep: &LadderRep<f64>, verb: &str) -> Result<Snapshot<f64>, CliError> {
    let path = path.ok_or_else(|| CliError::Config(format!("{verb}.input (snapshot file) is required")))?;
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))?;
    let snap: Snapshot<f64> = evolve::read_snapshot(std::io::BufReader::new(file))
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if snap.state.anc_dim() != rep.dim() {
        return Err(CliError::Config(format!(
            "snapshot ancilla dimension {} does not match the configured system ({})",
            snap.state.anc_dim(),
            rep.dim()
        )));
    }
    Ok(snap)
}

fn wigner_cmd(cfg: &RunConfig, rep: &LadderRep<f64>, dir: &mut RunDir) -> Result<Outcome, CliError> {
    if cfg.system.kind == SystemKind::Spin {
        return Err(CliError::Config("wigner maps need an oscillator or custom ancilla".into()));
    }
    let snap = load_snapshot(cfg.wigner.input.as_ref(), rep, "wigner")?;
    let comp = Components::from_joint(&snap.state);
    let grid = wigner_grid(cfg, &comp);
    let map = dir.timed("wigner", |_| phase_space::wigner_components(&comp, &grid))?;
    write_map(dir, "wigner", &map)?;
    Ok(Outcome {
        flags: Vec::new(),
        results: json!({ "t": snap.t, "u": snap.u, "map": map_summary(&map) }),
    })
}

fn husimi_cmd(cfg: &RunConfig, rep: &LadderRep<f64>, dir: &mut RunDir) -> Result<Outcome, CliError> {
    if rep.spin().is_none() {
        return Err(CliError::Config("husimi maps need a spin ancilla".into()));
    }
    let snap = load_snapshot(cfg.husimi.input.as_ref(), rep, "husimi")?;
    let mesh = SphereMesh {
        n_theta: cfg.husimi.n_theta,
        n_phi: cfg.husimi.n_phi,
    };
    let map = dir.timed("husimi", |_| phase_space::husimi_of_joint(rep, &snap.state, &mesh))?;
    write_map(dir, "husimi", &map)?;
    let peaks = phase_space::equatorial_peaks(&map, 0.3);
    Ok(Outcome {
        flags: Vec::new(),
        results: json!({
            "t": snap.t,
            "u": snap.u,
            "map": map_summary(&map),
            "equatorial_peaks": peaks,
        }),
    })
}
