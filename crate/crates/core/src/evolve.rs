//! Time evolution under the ramp, with observables sampled along the way.
//!
//! Each step applies `exp(-i H(t + dt/2) dt)`. The exponential acts on the
//! state through a Lanczos basis built from sparse products with the two
//! fixed Hamiltonian parts, so a step costs a handful of matrix-vector
//! products. [`Propagator::Spectral`] diagonalizes the dense midpoint
//! Hamiltonian instead and serves as a cross-check.

use std::io::{Read, Write};

use nalgebra::{DMatrix, Normed};

use crate::error::{Error, Result};
use crate::hamiltonian::{CouplingPoint, InteractionParts, RampSchedule};
use crate::hilbert::{JointState, LadderRep};
use crate::linalg::{eigh_unchecked, expm_hermitian, inner, lanczos_expm, CMatrix, CVector};
use crate::scalar::{Cx, Real};
use crate::states::SpinZeroModes;

/// Largest accepted `dt·g`.
pub const MAX_DT_G: f64 = 0.01;

/// Coupling history of a run.
#[derive(Clone, Copy, Debug)]
pub enum Schedule<T: Real> {
    Ramp(RampSchedule<T>),
    /// Fixed couplings for `duration`.
    Frozen { point: CouplingPoint<T>, duration: T },
}

impl<T: Real> Schedule<T> {
    pub fn duration(&self) -> T {
        match self {
            Schedule::Ramp(r) => r.duration(),
            Schedule::Frozen { duration, .. } => *duration,
        }
    }

    /// Coupling rate used for the step-size guard: `g` of the ramp, or
    /// `g1 + 2g2` for a frozen point.
    pub fn rate(&self) -> T {
        match self {
            Schedule::Ramp(r) => r.g(),
            Schedule::Frozen { point, .. } => point.g1() + T::lit(2.0) * point.g2(),
        }
    }

    pub fn at(&self, t: T) -> Result<CouplingPoint<T>> {
        match self {
            Schedule::Ramp(r) => r.at(t),
            Schedule::Frozen { point, duration } => {
                if !(t >= T::zero() && t <= *duration) {
                    return Err(Error::OutOfSchedule {
                        t: t.as_f64(),
                        duration: duration.as_f64(),
                    });
                }
                Ok(*point)
            }
        }
    }

    pub fn u_at(&self, t: T) -> T {
        match self {
            Schedule::Ramp(r) => r.u_at(t),
            Schedule::Frozen { point, .. } => point.u(),
        }
    }

    /// Time at which the ramp reaches `u`; `None` for a frozen schedule or
    /// `u` outside `[0, 1]`.
    pub fn time_of_u(&self, u: T) -> Option<T> {
        match self {
            Schedule::Ramp(r) if u >= T::zero() && u <= T::one() => Some(u * r.duration()),
            _ => None,
        }
    }
}

/// How the per-step exponential is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Propagator {
    Krylov,
    Spectral,
}

/// Step and sampling controls for [`propagate`].
#[derive(Clone, Debug)]
pub struct EvolveOptions<T: Real> {
    pub dt: T,
    /// Observers run every `decimation` steps (and at the first and last).
    pub decimation: usize,
    /// Window of `u` in which sampling is refined.
    pub refine_window: (T, T),
    pub refine_factor: usize,
    pub propagator: Propagator,
    pub krylov_tol: T,
    pub krylov_max_dim: usize,
    /// Oscillator only: fraction of the highest Fock levels watched for leakage.
    pub leakage_fraction: f64,
    pub leakage_threshold: f64,
    /// Times at which full states are stored.
    pub snapshot_times: Vec<T>,
}

impl<T: Real> EvolveOptions<T> {
    pub fn new(dt: T) -> Self {
        Self {
            dt,
            decimation: 100,
            refine_window: (T::lit(0.45), T::lit(0.75)),
            refine_factor: 10,
            propagator: Propagator::Krylov,
            krylov_tol: T::lit(1e-13),
            krylov_max_dim: 60,
            leakage_fraction: 0.1,
            leakage_threshold: 1e-6,
            snapshot_times: Vec::new(),
        }
    }

    pub fn decimation(mut self, every: usize) -> Self {
        self.decimation = every.max(1);
        self
    }

    pub fn propagator(mut self, kind: Propagator) -> Self {
        self.propagator = kind;
        self
    }

    pub fn snapshots(mut self, times: Vec<T>) -> Self {
        self.snapshot_times = times;
        self
    }
}

/// A named scalar series computed from the state at each sample.
pub trait Observer<T: Real> {
    fn name(&self) -> String;
    /// `NaN` when undefined at this point (e.g. a reference outside its regime).
    fn observe(&mut self, t: T, p: &CouplingPoint<T>, state: &JointState<T>) -> Result<f64>;
}

/// Fidelity to the zero-energy product state at the current couplings.
pub struct ZeroProductFidelity<T: Real> {
    rep: LadderRep<T>,
    spin: Option<SpinZeroModes<T>>,
}

impl<T: Real> ZeroProductFidelity<T> {
    pub fn new(rep: &LadderRep<T>) -> Result<Self> {
        let spin = match rep.spin() {
            Some(_) => Some(SpinZeroModes::new(rep)?),
            None => None,
        };
        Ok(Self {
            rep: rep.clone(),
            spin,
        })
    }
}

impl<T: Real> Observer<T> for ZeroProductFidelity<T> {
    fn name(&self) -> String {
        "fidelity_zero_product".into()
    }

    fn observe(&mut self, _t: T, p: &CouplingPoint<T>, state: &JointState<T>) -> Result<f64> {
        let ansatz = match &self.spin {
            Some(modes) => modes.product_state(p),
            None => crate::states::zero_product_state(&self.rep, p),
        };
        match ansatz {
            Ok(a) => Ok(fidelity(&a.joint, state)?.as_f64()),
            Err(Error::Regime { .. }) | Err(Error::TruncationTooSmall { .. }) => Ok(f64::NAN),
            Err(e) => Err(e),
        }
    }
}

/// Fidelity to the symmetrized-doublet superposition (integer spin only).
pub struct AdiabaticFidelity<T: Real> {
    modes: SpinZeroModes<T>,
}

impl<T: Real> AdiabaticFidelity<T> {
    pub fn new(rep: &LadderRep<T>) -> Result<Self> {
        Ok(Self {
            modes: SpinZeroModes::new(rep)?,
        })
    }
}

impl<T: Real> Observer<T> for AdiabaticFidelity<T> {
    fn name(&self) -> String {
        "fidelity_adiabatic".into()
    }

    fn observe(&mut self, _t: T, p: &CouplingPoint<T>, state: &JointState<T>) -> Result<f64> {
        let reference = self.modes.adiabatic_reference(p)?;
        Ok(fidelity(&reference, state)?.as_f64())
    }
}

/// Fidelity to a fixed state.
pub struct FixedFidelity<T: Real> {
    label: String,
    target: JointState<T>,
}

impl<T: Real> FixedFidelity<T> {
    pub fn new(label: impl Into<String>, target: JointState<T>) -> Self {
        Self {
            label: label.into(),
            target,
        }
    }
}

impl<T: Real> Observer<T> for FixedFidelity<T> {
    fn name(&self) -> String {
        format!("fidelity_{}", self.label)
    }

    fn observe(&mut self, _t: T, _p: &CouplingPoint<T>, state: &JointState<T>) -> Result<f64> {
        Ok(fidelity(&self.target, state)?.as_f64())
    }
}

/// `Re⟨O⟩` for a fixed operator on the joint space.
pub struct OperatorExpectation<T: Real> {
    label: String,
    op: CMatrix<T>,
}

impl<T: Real> OperatorExpectation<T> {
    pub fn new(label: impl Into<String>, op: CMatrix<T>) -> Self {
        Self {
            label: label.into(),
            op,
        }
    }

    /// `⟨i(-1)^J R_x⟩` for an integer spin.
    pub fn spin_symmetry(rep: &LadderRep<T>) -> Result<Self> {
        let modes = SpinZeroModes::new(rep)?;
        Ok(Self::new("symmetry", modes.symmetry().clone()))
    }
}

impl<T: Real> Observer<T> for OperatorExpectation<T> {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn observe(&mut self, _t: T, _p: &CouplingPoint<T>, state: &JointState<T>) -> Result<f64> {
        Ok(state.expectation(&self.op).re.as_f64())
    }
}

/// `⟨H(t)⟩` at the sample time.
pub struct EnergyObserver<T: Real> {
    parts: InteractionParts<T>,
}

impl<T: Real> EnergyObserver<T> {
    pub fn new(rep: &LadderRep<T>) -> Self {
        Self {
            parts: InteractionParts::new(rep),
        }
    }
}

impl<T: Real> Observer<T> for EnergyObserver<T> {
    fn name(&self) -> String {
        "energy".into()
    }

    fn observe(&mut self, _t: T, p: &CouplingPoint<T>, state: &JointState<T>) -> Result<f64> {
        let psi = state.amplitudes();
        let h_psi = self.parts.exchange() * psi * Cx::new(p.g1(), T::zero())
            + self.parts.drive() * psi * Cx::new(p.g2(), T::zero());
        Ok(inner(psi, &h_psi).re.as_f64())
    }
}

/// A stored state.
#[derive(Clone, Debug)]
pub struct Snapshot<T: Real> {
    pub step: usize,
    pub t: T,
    pub u: T,
    pub state: JointState<T>,
}

/// Sampled observables of a run.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub dt: T,
    pub steps: usize,
    pub times: Vec<f64>,
    pub u: Vec<f64>,
    pub rho_gg: Vec<f64>,
    pub rho_ee: Vec<f64>,
    pub rho_ge_re: Vec<f64>,
    pub rho_ge_im: Vec<f64>,
    pub entropy: Vec<f64>,
    /// Top-level population (oscillator) or `NaN`.
    pub leakage: Vec<f64>,
    pub norm_drift: Vec<f64>,
    pub observables: Vec<(String, Vec<f64>)>,
    pub snapshots: Vec<Snapshot<T>>,
    pub final_state: JointState<T>,
    pub max_krylov_dim: usize,
    /// Largest norm drift over the whole run, sampled or not.
    pub max_norm_drift: f64,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t,u,rho_gg,rho_ee,rho_ge_re,rho_ge_im,entropy,leakage,norm_drift")?;
        for (name, _) in &self.observables {
            write!(w, ",{name}")?;
        }
        writeln!(w)?;
        for i in 0..self.len() {
            write!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                self.times[i],
                self.u[i],
                self.rho_gg[i],
                self.rho_ee[i],
                self.rho_ge_re[i],
                self.rho_ge_im[i],
                self.entropy[i],
                self.leakage[i],
                self.norm_drift[i]
            )?;
            for (_, values) in &self.observables {
                write!(w, ",{}", values[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Leakage diagnostic: population of the highest `fraction` of Fock levels.
pub fn top_level_population<T: Real>(state: &JointState<T>, fraction: f64) -> T {
    let d = state.anc_dim();
    let watched = ((d as f64) * fraction).ceil().max(1.0) as usize;
    let start = d - watched.min(d);
    let amps = state.amplitudes();
    let mut total = T::zero();
    for tls in 0..2 {
        for m in start..d {
            total += amps[tls * d + m].norm_sqr();
        }
    }
    total
}

/// `|⟨a|b⟩|²`.
pub fn fidelity<T: Real>(a: &JointState<T>, b: &JointState<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(inner(a.amplitudes(), b.amplitudes()).norm_sqr())
}

/// Which factor survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    Tls,
    Ancilla,
}

/// Reduced density matrix of a joint pure state.
pub fn reduced_density<T: Real>(state: &JointState<T>, keep: Subsystem) -> CMatrix<T> {
    let d = state.anc_dim();
    let psi = state.amplitudes();
    // rows: TLS level, columns: ancilla level
    let m = CMatrix::from_fn(2, d, |a, k| psi[a * d + k]);
    let mut rho = match keep {
        Subsystem::Tls => &m * m.adjoint(),
        Subsystem::Ancilla => m.transpose() * m.conjugate(),
    };
    crate::linalg::symmetrize(&mut rho);
    rho
}

/// Eigenvalues below this are treated as zero in the entropy sum.
pub const ENTROPY_CLAMP: f64 = 1e-15;

/// `-Σ λ ln λ` in nats.
pub fn von_neumann_entropy<T: Real>(rho: &CMatrix<T>) -> Result<T> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            found: rho.ncols(),
        });
    }
    let trace = rho.trace();
    if (trace.re - T::one()).abs() > T::lit(1e-9) || trace.im.abs() > T::lit(1e-9) {
        return Err(Error::InvalidDensity(format!(
            "trace {} + {}i differs from 1",
            trace.re.as_f64(),
            trace.im.as_f64()
        )));
    }
    let eig = eigh_unchecked(rho);
    let clamp = T::lit(ENTROPY_CLAMP);
    Ok(eig
        .values
        .iter()
        .filter(|&&l| l >= clamp)
        .fold(T::zero(), |acc, &l| acc - l * l.ln()))
}

fn tls_entropy<T: Real>(rho: &CMatrix<T>) -> T {
    // closed form for 2x2: eigenvalues (1 ± r)/2
    let tr = rho[(0, 0)].re + rho[(1, 1)].re;
    let diff = rho[(0, 0)].re - rho[(1, 1)].re;
    let off = rho[(0, 1)].norm();
    let r = (diff * diff + T::lit(4.0) * off * off).sqrt();
    let clamp = T::lit(ENTROPY_CLAMP);
    [(tr + r) / T::lit(2.0), (tr - r) / T::lit(2.0)]
        .iter()
        .filter(|&&l| l >= clamp)
        .fold(T::zero(), |acc, &l| acc - l * l.ln())
}

struct Stepper<'a, T: Real> {
    parts: &'a InteractionParts<T>,
    sparse: (crate::linalg::SparseMatrix<T>, crate::linalg::SparseMatrix<T>),
    opts: &'a EvolveOptions<T>,
    max_dim: usize,
}

impl<'a, T: Real> Stepper<'a, T> {
    fn new(parts: &'a InteractionParts<T>, opts: &'a EvolveOptions<T>) -> Self {
        Self {
            parts,
            sparse: parts.sparse(),
            opts,
            max_dim: 0,
        }
    }

    fn step(&mut self, psi: &CVector<T>, p: &CouplingPoint<T>, dt: T) -> CVector<T> {
        match self.opts.propagator {
            Propagator::Krylov => {
                let (a, b) = &self.sparse;
                let (g1, g2) = (p.g1(), p.g2());
                let (out, stats) = lanczos_expm(
                    |x, y| {
                        y.fill(Cx::new(T::zero(), T::zero()));
                        a.mul_add(g1, x, y);
                        b.mul_add(g2, x, y);
                    },
                    psi,
                    dt,
                    self.opts.krylov_tol,
                    self.opts.krylov_max_dim,
                );
                self.max_dim = self.max_dim.max(stats.dimension);
                out
            }
            Propagator::Spectral => expm_hermitian(&self.parts.assemble(p), dt) * psi,
        }
    }
}

/// Integrates `i d/dt ψ = H(t) ψ` from `initial` over the schedule.
///
/// The step is shrunk to `T/ceil(T/dt)` so the run ends exactly at `T`.
pub fn propagate<T: Real>(
    rep: &LadderRep<T>,
    schedule: &Schedule<T>,
    initial: &JointState<T>,
    opts: &EvolveOptions<T>,
    observers: &mut [Box<dyn Observer<T> + '_>],
) -> Result<Trajectory<T>> {
    if initial.dim() != rep.joint_dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.joint_dim(),
            found: initial.dim(),
        });
    }
    let dt_g = (opts.dt * schedule.rate()).as_f64();
    if !(opts.dt > T::zero()) || dt_g > MAX_DT_G * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge {
            dt_g,
            limit: MAX_DT_G,
        });
    }
    let duration = schedule.duration();
    let steps = ((duration / opts.dt).as_f64() - 1e-9).ceil().max(1.0) as usize;
    let dt = duration / T::from_usize_lossy(steps);
    let time = |n: usize| {
        if n == steps {
            duration
        } else {
            T::from_usize_lossy(n) * dt
        }
    };
    let fine = (opts.decimation / opts.refine_factor.max(1)).max(1);
    let snapshot_steps: Vec<usize> = opts
        .snapshot_times
        .iter()
        .map(|&t| ((t / dt).as_f64().round().max(0.0) as usize).min(steps))
        .collect();

    let parts = InteractionParts::new(rep);
    let mut stepper = Stepper::new(&parts, opts);
    let watch_leakage = rep.is_oscillator();
    let d = rep.dim();

    let mut traj = Trajectory {
        dt,
        steps,
        times: Vec::new(),
        u: Vec::new(),
        rho_gg: Vec::new(),
        rho_ee: Vec::new(),
        rho_ge_re: Vec::new(),
        rho_ge_im: Vec::new(),
        entropy: Vec::new(),
        leakage: Vec::new(),
        norm_drift: Vec::new(),
        observables: observers.iter().map(|o| (o.name(), Vec::new())).collect(),
        snapshots: Vec::new(),
        final_state: initial.clone(),
        max_krylov_dim: 0,
        max_norm_drift: 0.0,
    };

    let mut psi = initial.amplitudes().clone();
    for n in 0..=steps {
        let t = time(n);
        let u = schedule.u_at(t);
        let state = JointState::from_raw(psi.clone(), d)?;
        let drift = (state.norm() - T::one()).abs().as_f64();
        traj.max_norm_drift = traj.max_norm_drift.max(drift);

        let leak = if watch_leakage {
            let pop = top_level_population(&state, opts.leakage_fraction).as_f64();
            if pop > opts.leakage_threshold {
                return Err(Error::Leakage {
                    t: t.as_f64(),
                    u: u.as_f64(),
                    population: pop,
                    threshold: opts.leakage_threshold,
                });
            }
            pop
        } else {
            f64::NAN
        };

        let in_window = u >= opts.refine_window.0 && u <= opts.refine_window.1;
        let every = if in_window { fine } else { opts.decimation };
        if n % every == 0 || n == steps {
            let p = schedule.at(t)?;
            let rho = reduced_density(&state, Subsystem::Tls);
            traj.times.push(t.as_f64());
            traj.u.push(u.as_f64());
            traj.rho_gg.push(rho[(0, 0)].re.as_f64());
            traj.rho_ee.push(rho[(1, 1)].re.as_f64());
            traj.rho_ge_re.push(rho[(0, 1)].re.as_f64());
            traj.rho_ge_im.push(rho[(0, 1)].im.as_f64());
            traj.entropy.push(tls_entropy(&rho).as_f64());
            traj.leakage.push(leak);
            traj.norm_drift.push(drift);
            for (k, obs) in observers.iter_mut().enumerate() {
                let value = obs.observe(t, &p, &state)?;
                traj.observables[k].1.push(value);
            }
        }
        for (k, &s) in snapshot_steps.iter().enumerate() {
            if s == n {
                traj.snapshots.push(Snapshot {
                    step: n,
                    t: opts.snapshot_times[k],
                    u,
                    state: state.clone(),
                });
            }
        }
        if n == steps {
            traj.final_state = state;
            break;
        }
        let mid = (time(n) + time(n + 1)) / T::lit(2.0);
        let p_mid = schedule.at(mid)?;
        psi = stepper.step(&psi, &p_mid, time(n + 1) - time(n));
    }
    traj.max_krylov_dim = stepper.max_dim;
    Ok(traj)
}

/// Result of re-running with half the step.
#[derive(Clone, Debug)]
pub struct ConvergenceReport<T: Real> {
    pub dt: T,
    /// `1 - |⟨ψ_dt|ψ_{dt/2}⟩|²` for the final states.
    pub fidelity_delta: f64,
    pub coarse: JointState<T>,
    pub fine: JointState<T>,
}

/// Runs the schedule at `dt` and `dt/2` without observers and compares the
/// final states.
pub fn dt_halving_check<T: Real>(
    rep: &LadderRep<T>,
    schedule: &Schedule<T>,
    initial: &JointState<T>,
    opts: &EvolveOptions<T>,
) -> Result<ConvergenceReport<T>> {
    let mut quiet = opts.clone();
    quiet.decimation = usize::MAX;
    quiet.snapshot_times.clear();
    let coarse = propagate(rep, schedule, initial, &quiet, &mut [])?;
    quiet.dt = opts.dt / T::lit(2.0);
    let fine = propagate(rep, schedule, initial, &quiet, &mut [])?;
    let f = fidelity(&coarse.final_state, &fine.final_state)?.as_f64();
    Ok(ConvergenceReport {
        dt: coarse.dt,
        fidelity_delta: 1.0 - f,
        coarse: coarse.final_state,
        fine: fine.final_state,
    })
}

/// `|g⟩ ⊗` lowest ancilla basis state (`|0⟩` or `|J,-J⟩`).
pub fn ground_start<T: Real>(rep: &LadderRep<T>) -> JointState<T> {
    JointState::basis(crate::hilbert::GROUND, 0, rep.dim())
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"SQZS";
const SNAPSHOT_VERSION: u32 = 1;

/// Binary snapshot: magic `SQZS`, `u32` version, `u64` TLS dimension (2),
/// `u64` ancilla dimension, `f64` t, `f64` u, then `2·D` amplitudes as
/// interleaved `f64` (re, im), all little-endian.
pub fn write_snapshot<T: Real, W: Write>(mut w: W, snap: &Snapshot<T>) -> std::io::Result<()> {
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&2u64.to_le_bytes())?;
    w.write_all(&(snap.state.anc_dim() as u64).to_le_bytes())?;
    w.write_all(&snap.t.as_f64().to_le_bytes())?;
    w.write_all(&snap.u.as_f64().to_le_bytes())?;
    for z in snap.state.amplitudes().iter() {
        w.write_all(&z.re.as_f64().to_le_bytes())?;
        w.write_all(&z.im.as_f64().to_le_bytes())?;
    }
    Ok(())
}

/// Inverse of [`write_snapshot`]; `step` is not stored and comes back as 0.
pub fn read_snapshot<T: Real, R: Read>(mut r: R) -> Result<Snapshot<T>> {
    let bad = |msg: &str| Error::InvalidParameter(format!("snapshot: {msg}"));
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    if u32::from_le_bytes(b4) != SNAPSHOT_VERSION {
        return Err(bad("unsupported version"));
    }
    r.read_exact(&mut b8)?;
    if u64::from_le_bytes(b8) != 2 {
        return Err(bad("TLS dimension must be 2"));
    }
    r.read_exact(&mut b8)?;
    let d = u64::from_le_bytes(b8) as usize;
    let mut read_f64 = |r: &mut R| -> Result<f64> {
        r.read_exact(&mut b8)?;
        Ok(f64::from_le_bytes(b8))
    };
    let t = read_f64(&mut r)?;
    let u = read_f64(&mut r)?;
    let mut amps = CVector::zeros(2 * d);
    for k in 0..2 * d {
        let re_part = read_f64(&mut r)?;
        let im_part = read_f64(&mut r)?;
        amps[k] = Cx::new(T::lit(re_part), T::lit(im_part));
    }
    Ok(Snapshot {
        step: 0,
        t: T::lit(t),
        u: T::lit(u),
        state: JointState::from_raw(amps, d)?,
    })
}

/// Dense `D x D` ancilla density matrix of a snapshot, as plain `f64` pairs.
pub fn ancilla_density_f64<T: Real>(state: &JointState<T>) -> DMatrix<Cx<f64>> {
    reduced_density(state, Subsystem::Ancilla).map(|z| Cx::new(z.re.as_f64(), z.im.as_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{osc_ladder, spin_ladder, SpinMagnitude};

    fn spin(j: u32) -> LadderRep<f64> {
        spin_ladder(SpinMagnitude::integer(j).unwrap()).unwrap()
    }

    #[test]
    fn rejects_large_step() {
        let rep = spin(2);
        let sched = Schedule::Ramp(RampSchedule::new(1.0, 10.0).unwrap());
        let err = propagate(&rep, &sched, &ground_start(&rep), &EvolveOptions::new(0.02), &mut []);
        assert!(matches!(err, Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn frozen_jc_ground_is_stationary() {
        let rep = osc_ladder::<f64>(20).unwrap();
        let sched = Schedule::Frozen {
            point: CouplingPoint::new(1.0, 0.0).unwrap(),
            duration: 5.0,
        };
        let start = ground_start(&rep);
        let mut obs: Vec<Box<dyn Observer<f64>>> =
            vec![Box::new(FixedFidelity::new("start", start.clone()))];
        let traj = propagate(&rep, &sched, &start, &EvolveOptions::new(0.01).decimation(50), &mut obs)
            .unwrap();
        let f = traj.series("fidelity_start").unwrap();
        assert!(f.iter().all(|&x| (x - 1.0).abs() < 1e-14));
        assert_eq!(traj.times.len(), 11);
        assert_eq!(*traj.times.last().unwrap(), 5.0);
    }

    #[test]
    fn krylov_matches_spectral() {
        let rep = spin(3);
        let sched = Schedule::Ramp(RampSchedule::new(1.0, 4.0).unwrap());
        let start = ground_start(&rep);
        let opts = EvolveOptions::new(0.01);
        let a = propagate(&rep, &sched, &start, &opts, &mut []).unwrap();
        let b = propagate(&rep, &sched, &start, &opts.clone().propagator(Propagator::Spectral), &mut [])
            .unwrap();
        let diff = (a.final_state.amplitudes() - b.final_state.amplitudes()).norm();
        assert!(diff < 1e-11, "{diff}");
    }

    #[test]
    fn refined_sampling_in_window() {
        let rep = spin(1);
        let sched = Schedule::Ramp(RampSchedule::new(1.0, 10.0).unwrap());
        let traj = propagate(
            &rep,
            &sched,
            &ground_start(&rep),
            &EvolveOptions::new(0.01).decimation(100),
            &mut [],
        )
        .unwrap();
        let inside = traj.u.iter().filter(|&&u| (0.45..=0.75).contains(&u)).count();
        let outside = traj.u.len() - inside;
        let density_in = inside as f64 / 0.30;
        let density_out = outside as f64 / 0.70;
        assert!(density_in > 8.0 * density_out, "{inside} vs {outside}");
    }

    #[test]
    fn leakage_guard_trips() {
        let rep = osc_ladder::<f64>(8).unwrap();
        let sched = Schedule::Ramp(RampSchedule::new(1.0, 20.0).unwrap());
        let err = propagate(&rep, &sched, &ground_start(&rep), &EvolveOptions::new(0.01), &mut []);
        match err {
            Err(Error::Leakage { t, population, .. }) => {
                assert!(t > 0.0 && population > 1e-6);
            }
            other => panic!("expected leakage, got {other:?}"),
        }
    }

    #[test]
    fn reduced_density_examples() {
        let d = 3;
        let chi: CVector<f64> = CVector::from_vec(vec![Cx::new(0.6, 0.0), Cx::new(0.0, 0.8)]);
        let phi = CVector::from_vec(vec![Cx::new(1.0, 0.0), Cx::new(1.0, 1.0), Cx::new(0.0, 0.5)]);
        let prod = JointState::product(&chi, &phi).unwrap();
        let rho = reduced_density(&prod, Subsystem::Tls);
        let want = &chi * chi.adjoint();
        assert!((rho - want).norm() < 1e-14);
        let rho = reduced_density(&prod, Subsystem::Tls);
        assert!(von_neumann_entropy(&rho).unwrap().abs() < 1e-12);

        let mut amps = CVector::zeros(2 * d);
        amps[0] = Cx::new(1.0, 0.0);
        amps[d + 2] = Cx::new(0.0, 1.0);
        let bell = JointState::from_amplitudes(amps, d).unwrap();
        let rho = reduced_density(&bell, Subsystem::Tls);
        assert!((rho[(0, 0)].re - 0.5f64).abs() < 1e-15 && rho[(0, 1)].norm() < 1e-15);
        let s = von_neumann_entropy(&rho).unwrap();
        assert!((s - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((tls_entropy(&rho) - s).abs() < 1e-12);
    }

    #[test]
    fn entropy_rejects_bad_trace() {
        let rho = CMatrix::<f64>::identity(2, 2);
        assert!(matches!(von_neumann_entropy(&rho), Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn fidelity_properties() {
        let a = JointState::<f64>::basis(0, 1, 4);
        let b = JointState::<f64>::basis(1, 1, 4);
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        let phased =
            JointState::from_raw(a.amplitudes() * Cx::new(0.3f64.cos(), 0.3f64.sin()), 4).unwrap();
        assert!((fidelity(&a, &phased).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity(&a, &JointState::basis(0, 0, 3)).is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let rep = spin(2);
        let state = crate::states::SpinZeroModes::new(&rep)
            .unwrap()
            .adiabatic_reference(&CouplingPoint::from_u(1.0, 0.7).unwrap())
            .unwrap();
        let snap = Snapshot {
            step: 0,
            t: 3.5,
            u: 0.7,
            state,
        };
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &snap).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 8 + 8 + 8 + 8 + 16 * rep.joint_dim());
        let back: Snapshot<f64> = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(back.t, 3.5);
        assert_eq!(back.state.amplitudes(), snap.state.amplitudes());
        buf[0] = b'X';
        assert!(read_snapshot::<f64, _>(buf.as_slice()).is_err());
    }

    #[test]
    fn snapshots_at_requested_times() {
        let rep = spin(1);
        let sched = Schedule::Ramp(RampSchedule::new(1.0, 2.0).unwrap());
        let times: Vec<f64> = [0.1, 0.5, 1.0].iter().map(|&u| sched.time_of_u(u).unwrap()).collect();
        let traj = propagate(
            &rep,
            &sched,
            &ground_start(&rep),
            &EvolveOptions::new(0.01).snapshots(times),
            &mut [],
        )
        .unwrap();
        assert_eq!(traj.snapshots.len(), 3);
        assert!((traj.snapshots[1].u - 0.5).abs() < 1e-12);
        assert_eq!(traj.snapshots[2].state.amplitudes(), traj.final_state.amplitudes());
    }

    #[test]
    fn csv_has_observer_columns() {
        let rep = spin(1);
        let sched = Schedule::Ramp(RampSchedule::new(1.0, 1.0).unwrap());
        let mut obs: Vec<Box<dyn Observer<f64>>> = vec![Box::new(EnergyObserver::new(&rep))];
        let traj = propagate(&rep, &sched, &ground_start(&rep), &EvolveOptions::new(0.01), &mut obs)
            .unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.ends_with(",energy"));
        assert_eq!(text.lines().count(), traj.len() + 1);
    }
}
