//! Closed-form zero-energy states.
//!
//! A product `|χ⟩⊗|φ⟩` is annihilated by the interaction Hamiltonian when the
//! TLS angle obeys `sin θ = -2g2/g1` and the ancilla solves
//! `(μK + νK†)|φ⟩ = 0` with `ν/μ = -tan²(θ/2)`. For the oscillator this is a
//! squeezed vacuum; for an integer spin it is a generalized intelligent state
//! below the critical drive and a rotated `M = 0` state above it. The spin
//! zero mode is two-fold degenerate, which [`SpinZeroModes`] resolves into the
//! symmetrized doublet and the adiabatic reference superposition.

use std::io::Write;

use nalgebra::Normed;

use crate::error::{Error, Result};
use crate::hamiltonian::{symmetry_op, CouplingPoint, Regime, SymmetryKind};
use crate::hilbert::{JointState, LadderKind, LadderRep, SpinMagnitude};
use crate::linalg::{inner, max_abs, CMatrix, CVector};
use crate::scalar::{cis, cx, re, Cx, Real};
use crate::spectra::eig_herm;

/// Beyond this `τ` the factor `exp(-τ(M + j))` underflows for every `M > -j`
/// and the state is replaced by its exact `|j, -j⟩` limit.
pub const TAU_LIMIT: f64 = 700.0;

/// Tail population allowed beyond `n_cut - 2` for a truncated squeezed vacuum.
pub const SQUEEZE_TAIL_LIMIT: f64 = 1e-14;

fn sub_regime_error<T: Real>(p: &CouplingPoint<T>) -> Error {
    Error::Regime {
        ratio: p.ratio().as_f64(),
        regime: "sub-critical",
        boundary: "requires g2/g1 < 1/2; use the super-regime constructor at or above the boundary",
    }
}

/// TLS mixing angle `θ = arcsin(-2g2/g1) ∈ (-π/2, 0]`.
pub fn tls_angle<T: Real>(p: &CouplingPoint<T>) -> Result<T> {
    if p.regime() != Regime::Sub || p.g1() == T::zero() {
        return Err(sub_regime_error(p));
    }
    Ok((-(T::lit(2.0) * p.g2() / p.g1())).asin())
}

fn check_angle<T: Real>(theta: T) -> Result<()> {
    if !(theta.abs() < T::frac_pi_2()) {
        return Err(Error::InvalidParameter(format!(
            "TLS angle {theta} outside (-π/2, π/2)"
        )));
    }
    Ok(())
}

/// `(μ, ν) = (cos²(θ/2), -sin²(θ/2))·√sec θ`, so that `μ² - ν² = 1`.
pub fn bogoliubov_coeffs<T: Real>(theta: T) -> Result<(T, T)> {
    check_angle(theta)?;
    let half = theta / T::lit(2.0);
    let root_sec = (T::one() / theta.cos()).sqrt();
    let (s, c) = half.sin_cos();
    Ok((c * c * root_sec, -(s * s) * root_sec))
}

/// `(Var x, Var p) = (sec θ, cos θ)` for `x = a + a†`, `p = i(a† - a)`.
pub fn quad_variances<T: Real>(theta: T) -> Result<(T, T)> {
    check_angle(theta)?;
    Ok((T::one() / theta.cos(), theta.cos()))
}

/// `(cos θ/2, sin θ/2)` in the `(g, e)` basis.
pub fn tls_sub<T: Real>(theta: T) -> CVector<T> {
    let (s, c) = (theta / T::lit(2.0)).sin_cos();
    CVector::from_vec(vec![re(c), re(s)])
}

/// TLS vector of the super-critical zero mode for rotation angle `phi`.
///
/// Uses `(e^{-iφ/2}, -e^{iφ/2})/√2`: with the ancilla `e^{iφJz}|J,0⟩_y` this is
/// the phase pairing for which the product is annihilated by `H`.
pub fn tls_super<T: Real>(phi: T) -> CVector<T> {
    let h = T::one() / T::lit(2.0).sqrt();
    let half = phi / T::lit(2.0);
    CVector::from_vec(vec![cis(-half).scale(h), -cis(half).scale(h)])
}

/// Fock-basis squeezed vacuum annihilated by `μa + νa†`.
pub fn squeezed_vacuum<T: Real>(mu: T, nu: T, n_cut: usize) -> Result<CVector<T>> {
    if n_cut < 2 {
        return Err(Error::InvalidParameter("squeezed vacuum needs n_cut >= 2".into()));
    }
    if !((mu * mu - nu * nu - T::one()).abs() <= T::lit(1e-10) * (mu * mu).max(T::one())) {
        return Err(Error::InvalidParameter(format!(
            "Bogoliubov coefficients violate mu^2 - nu^2 = 1 (mu={mu}, nu={nu})"
        )));
    }
    let dim = n_cut + 1;
    let ratio = -(nu / mu);
    let mut c = vec![T::zero(); dim];
    c[0] = T::one();
    let mut n = 0;
    while n + 2 < dim {
        let f = (T::from_usize_lossy(n + 1) / T::from_usize_lossy(n + 2)).sqrt();
        c[n + 2] = ratio * f * c[n];
        n += 2;
    }
    let norm_sq = c.iter().fold(T::zero(), |acc, &x| acc + x * x);
    let tail = c[(n_cut - 1)..].iter().fold(T::zero(), |acc, &x| acc + x * x) / norm_sq;
    if tail > T::lit(SQUEEZE_TAIL_LIMIT) {
        return Err(Error::TruncationTooSmall { tail: tail.as_f64() });
    }
    let norm = norm_sq.sqrt();
    Ok(CVector::from_iterator(dim, c.into_iter().map(|x| re(x / norm))))
}

/// Unit vector spanning the null space of `m`, or [`Error::NoSolution`] when
/// the smallest singular value exceeds `rtol·max|m|`.
///
/// The phase is fixed so the largest-modulus component is real and positive.
pub fn null_vector<T: Real>(m: &CMatrix<T>, rtol: T) -> Result<CVector<T>> {
    let n = m.ncols();
    if m.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.nrows(),
        });
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[a]
            .partial_cmp(&svd.singular_values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let smallest = svd.singular_values[order[0]];
    let scale = max_abs(m).max(T::default_epsilon());
    if smallest > rtol * scale {
        return Err(Error::NoSolution(format!(
            "smallest singular value {:.3e} relative to scale {:.3e}",
            smallest.as_f64(),
            scale.as_f64()
        )));
    }
    if n > 1 && svd.singular_values[order[1]] <= rtol * scale {
        return Err(Error::Degenerate("null space is more than one-dimensional".into()));
    }
    let v = v_t.row(order[0]).adjoint();
    Ok(fix_phase_at_max(v))
}

fn fix_phase_at_max<T: Real>(v: CVector<T>) -> CVector<T> {
    let (idx, _) = v
        .iter()
        .enumerate()
        .fold((0, T::zero()), |(bi, bn), (i, z)| {
            if z.norm() > bn * T::lit(1.0 + 1e-9) {
                (i, z.norm())
            } else {
                (bi, bn)
            }
        });
    fix_phase(v, idx)
}

fn fix_phase<T: Real>(v: CVector<T>, idx: usize) -> CVector<T> {
    let z = v[idx];
    if z.norm() == T::zero() {
        return v;
    }
    let phase = z.conj().unscale(z.norm());
    v * phase
}

/// Solves `(μK + νK†)|φ⟩ = 0` for an arbitrary ladder representation.
pub fn ladder_null_state<T: Real>(k: &CMatrix<T>, mu: T, nu: T) -> Result<CVector<T>> {
    let m = k.scale(mu) + k.adjoint().scale(nu);
    null_vector(&m, T::lit(1e-10))
}

fn require_integer_spin<T: Real>(rep: &LadderRep<T>) -> Result<u32> {
    match rep.kind() {
        LadderKind::Spin(j) => j.as_integer().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "spin {j} is half-integer: no zero-energy product state exists"
            ))
        }),
        _ => Err(Error::InvalidParameter("operation requires a spin representation".into())),
    }
}

/// `|J,0⟩_y`: the null vector of `Jy`, with the `M = +j` component real positive.
pub fn j0y_state<T: Real>(rep: &LadderRep<T>) -> Result<CVector<T>> {
    require_integer_spin(rep)?;
    let jy = rep.jy()?;
    let eig = eig_herm(&jy)?;
    let (idx, smallest) = eig
        .values
        .iter()
        .enumerate()
        .fold((0, T::max_value().unwrap_or(T::one())), |(bi, bv), (i, &v)| {
            if v.abs() < bv {
                (i, v.abs())
            } else {
                (bi, bv)
            }
        });
    if smallest > T::lit(1e-9) {
        return Err(Error::NoSolution(format!(
            "Jy has no zero eigenvalue (closest {:.3e})",
            smallest.as_f64()
        )));
    }
    let v = eig.vectors.column(idx).into_owned();
    let top = v.len() - 1;
    Ok(fix_phase(v, top))
}

/// `C(τ)·exp(-τJz)|J,0⟩_y` with `τ = ln|cot(θ/2)|`; `θ = 0` gives `|j, -j⟩`.
pub fn intelligent_spin_state<T: Real>(rep: &LadderRep<T>, theta: T) -> Result<CVector<T>> {
    require_integer_spin(rep)?;
    check_angle(theta)?;
    let j0 = j0y_state(rep)?;
    Ok(intelligent_from_j0y(rep, &j0, theta))
}

/// `ln|cot(θ/2)|`, infinite at `θ = 0`.
pub fn squeeze_tau<T: Real>(theta: T) -> T {
    if theta == T::zero() {
        return T::max_value().unwrap_or(T::lit(f64::MAX));
    }
    (T::one() / (theta / T::lit(2.0)).tan()).abs().ln()
}

fn intelligent_from_j0y<T: Real>(rep: &LadderRep<T>, j0: &CVector<T>, theta: T) -> CVector<T> {
    let tau = squeeze_tau(theta);
    if tau > T::lit(TAU_LIMIT) {
        return rep.basis_vector(0);
    }
    let labels = rep.labels();
    let lowest = labels[0];
    // shifted by the lowest M so that the largest factor is exactly one
    let v = CVector::from_fn(j0.len(), |i, _| j0[i].scale((-(tau * (labels[i] - lowest))).exp()));
    let n = v.norm();
    v.unscale(n)
}

/// Super-critical product state: TLS vector, ancilla `e^{iφJz}|J,0⟩_y`, and `φ`.
pub fn super_state<T: Real>(
    rep: &LadderRep<T>,
    p: &CouplingPoint<T>,
) -> Result<(CVector<T>, CVector<T>, T)> {
    require_integer_spin(rep)?;
    let j0 = j0y_state(rep)?;
    super_from_j0y(rep, &j0, p)
}

/// `φ` with `tan²φ = 4g2²/g1² - 1`, `φ = π/2` at `g1 = 0`.
pub fn super_angle<T: Real>(p: &CouplingPoint<T>) -> Result<T> {
    if p.regime() == Regime::Sub {
        return Err(Error::Regime {
            ratio: p.ratio().as_f64(),
            regime: "super-critical",
            boundary: "requires g2/g1 >= 1/2; use the sub-regime constructor below the boundary",
        });
    }
    let two_g2 = T::lit(2.0) * p.g2();
    let opposite = (two_g2 * two_g2 - p.g1() * p.g1()).max(T::zero()).sqrt();
    Ok(opposite.atan2(p.g1()))
}

fn super_from_j0y<T: Real>(
    rep: &LadderRep<T>,
    j0: &CVector<T>,
    p: &CouplingPoint<T>,
) -> Result<(CVector<T>, CVector<T>, T)> {
    let phi = super_angle(p)?;
    let labels = rep.labels();
    let ancilla = CVector::from_fn(j0.len(), |i, _| j0[i] * cis(phi * labels[i]));

    // independent route: null space of e^{-i(φ+π/2)}J₋ + e^{i(φ+π/2)}J₊
    let arg = phi + T::frac_pi_2();
    let op = rep.lowering() * cis(-arg) + rep.raising() * cis(arg);
    let solved = null_vector(&op, T::lit(1e-10))?;
    let overlap = inner(&solved, &ancilla).norm();
    if (T::one() - overlap).abs() > T::lit(1e-8) {
        return Err(Error::Consistency(format!(
            "rotated M=0 state disagrees with null-space solution (overlap {})",
            overlap.as_f64()
        )));
    }
    Ok((tls_super(phi), ancilla, phi))
}

/// Every field of a constructed zero-energy product state.
#[derive(Clone, Debug)]
pub struct ZeroEnergyAnsatz<T: Real> {
    pub regime: Regime,
    /// TLS angle (sub regime).
    pub theta: Option<T>,
    /// Rotation angle (critical and super regimes).
    pub phi_angle: Option<T>,
    pub mu: Option<T>,
    pub nu: Option<T>,
    /// `ln|cot(θ/2)|` (spin, sub regime).
    pub tau: Option<T>,
    pub chi: CVector<T>,
    pub phi_state: CVector<T>,
    pub joint: JointState<T>,
}

/// Zero-energy product state for any representation and coupling point.
///
/// The oscillator and custom `K` have a normalizable solution only below the
/// critical drive. Half-integer spins are rejected.
pub fn zero_product_state<T: Real>(
    rep: &LadderRep<T>,
    p: &CouplingPoint<T>,
) -> Result<ZeroEnergyAnsatz<T>> {
    match rep.kind() {
        LadderKind::Oscillator { n_cut } => {
            let theta = tls_angle(p)?;
            let (mu, nu) = bogoliubov_coeffs(theta)?;
            let phi = squeezed_vacuum(mu, nu, n_cut)?;
            sub_ansatz(theta, Some((mu, nu)), None, phi)
        }
        LadderKind::Custom => {
            let theta = tls_angle(p)?;
            let (mu, nu) = bogoliubov_coeffs(theta)?;
            let phi = ladder_null_state(rep.lowering(), mu, nu)?;
            sub_ansatz(theta, Some((mu, nu)), None, phi)
        }
        LadderKind::Spin(_) => SpinZeroModes::new(rep)?.product_state(p),
    }
}

fn sub_ansatz<T: Real>(
    theta: T,
    coeffs: Option<(T, T)>,
    tau: Option<T>,
    phi: CVector<T>,
) -> Result<ZeroEnergyAnsatz<T>> {
    let chi = tls_sub(theta);
    let joint = JointState::product(&chi, &phi)?;
    Ok(ZeroEnergyAnsatz {
        regime: Regime::Sub,
        theta: Some(theta),
        phi_angle: None,
        mu: coeffs.map(|c| c.0),
        nu: coeffs.map(|c| c.1),
        tau,
        chi,
        phi_state: phi,
        joint,
    })
}

/// Symmetrized zero-energy doublet `Ψ± = (Ψ ± SΨ)/(√2·√(1 ± γ))`.
#[derive(Clone, Debug)]
pub struct SymmetrizedPair<T: Real> {
    pub plus: JointState<T>,
    pub minus: JointState<T>,
    /// `Re⟨Ψ|S|Ψ⟩`.
    pub gamma: T,
}

/// Cached machinery for the integer-spin zero modes: `|J,0⟩_y` and
/// `S = i(-1)^J R_x`.
///
/// `S` squares to the identity and commutes with `H`; `Ψ₊` carries
/// eigenvalue `+1` and `Ψ₋` eigenvalue `-1`.
#[derive(Clone, Debug)]
pub struct SpinZeroModes<T: Real> {
    rep: LadderRep<T>,
    j: u32,
    j0y: CVector<T>,
    symmetry: CMatrix<T>,
}

impl<T: Real> SpinZeroModes<T> {
    pub fn new(rep: &LadderRep<T>) -> Result<Self> {
        let j = require_integer_spin(rep)?;
        let j0y = j0y_state(rep)?;
        let rx = symmetry_op(rep, SymmetryKind::Rx)?;
        let sign = if j % 2 == 0 { T::one() } else { -T::one() };
        let symmetry = rx * cx(T::zero(), sign);
        Ok(Self {
            rep: rep.clone(),
            j,
            j0y,
            symmetry,
        })
    }

    pub fn spin(&self) -> SpinMagnitude {
        SpinMagnitude::integer(self.j).expect("nonzero integer spin")
    }

    pub fn j0y(&self) -> &CVector<T> {
        &self.j0y
    }

    /// `i(-1)^J R_x` on the joint space.
    pub fn symmetry(&self) -> &CMatrix<T> {
        &self.symmetry
    }

    pub fn intelligent(&self, theta: T) -> Result<CVector<T>> {
        check_angle(theta)?;
        Ok(intelligent_from_j0y(&self.rep, &self.j0y, theta))
    }

    /// Sub regime: intelligent state; critical and super: rotated `M = 0` state.
    pub fn product_state(&self, p: &CouplingPoint<T>) -> Result<ZeroEnergyAnsatz<T>> {
        if p.regime() == Regime::Sub {
            let theta = tls_angle(p)?;
            let (mu, nu) = bogoliubov_coeffs(theta)?;
            let phi = self.intelligent(theta)?;
            return sub_ansatz(theta, Some((mu, nu)), Some(squeeze_tau(theta)), phi);
        }
        let (chi, phi_state, phi) = super_from_j0y(&self.rep, &self.j0y, p)?;
        let joint = JointState::product(&chi, &phi_state)?;
        Ok(ZeroEnergyAnsatz {
            regime: p.regime(),
            theta: None,
            phi_angle: Some(phi),
            mu: None,
            nu: None,
            tau: None,
            chi,
            phi_state,
            joint,
        })
    }

    pub fn gamma(&self, psi: &JointState<T>) -> T {
        inner(psi.amplitudes(), &(&self.symmetry * psi.amplitudes())).re
    }

    pub fn symmetrized_pair(&self, psi: &JointState<T>) -> Result<SymmetrizedPair<T>> {
        if psi.dim() != self.rep.joint_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.rep.joint_dim(),
                found: psi.dim(),
            });
        }
        let v = psi.amplitudes();
        let sv = &self.symmetry * v;
        let gamma = inner(v, &sv).re;
        if T::one() - gamma.abs() <= T::lit(1e-12) {
            return Err(Error::Degenerate(format!(
                "|gamma| = {} is within 1e-12 of 1",
                gamma.as_f64()
            )));
        }
        let root2 = T::lit(2.0).sqrt();
        let plus = (v + &sv).unscale(root2 * (T::one() + gamma).sqrt());
        let minus = (v - &sv).unscale(root2 * (T::one() - gamma).sqrt());
        let d = psi.anc_dim();
        Ok(SymmetrizedPair {
            plus: JointState::from_raw(plus, d)?,
            minus: JointState::from_raw(minus, d)?,
            gamma,
        })
    }

    /// Equal-weight doublet superposition followed by slow evolution:
    /// `(Ψ₊ + Ψ₋)/√2` below the critical drive, `(Ψ₊ - iΨ₋)/√2` above.
    ///
    /// At exactly `g2 = g1/2` the limit from below is returned; there
    /// `Ψ₋ = Ψ₀` and `Ψ₊ ∝ (1 + S)∂_τΨ|_{τ=0}`.
    pub fn adiabatic_reference(&self, p: &CouplingPoint<T>) -> Result<JointState<T>> {
        let root2 = T::lit(2.0).sqrt();
        let d = self.rep.dim();
        let (plus, minus, weight) = match p.regime() {
            Regime::Sub => {
                let ansatz = self.product_state(p)?;
                let pair = self.symmetrized_pair(&ansatz.joint)?;
                (pair.plus, pair.minus, re(T::one()))
            }
            Regime::Critical => {
                let (plus, minus) = self.critical_pair()?;
                (plus, minus, re(T::one()))
            }
            Regime::Super => {
                let ansatz = self.product_state(p)?;
                let pair = self.symmetrized_pair(&ansatz.joint)?;
                (pair.plus, pair.minus, cx(T::zero(), -T::one()))
            }
        };
        let amps = (plus.amplitudes() + minus.amplitudes() * weight).unscale(root2);
        JointState::from_raw(amps, d)
    }

    fn critical_pair(&self) -> Result<(JointState<T>, JointState<T>)> {
        let d = self.rep.dim();
        let h = T::one() / T::lit(2.0).sqrt();
        let chi0 = CVector::from_vec(vec![re(h), re(-h)]);
        let psi0 = JointState::product(&chi0, &self.j0y)?;
        // dχ/dτ at θ = -π/2 is (1, 1)/(2√2); d/dτ of the normalized ancilla is -Jz|J,0⟩_y
        let dchi = CVector::from_vec(vec![re(h / T::lit(2.0)), re(h / T::lit(2.0))]);
        let jz_j0 = CVector::from_fn(d, |i, _| self.j0y[i].scale(self.rep.labels()[i]));
        let dpsi = CVector::from_fn(2 * d, |k, _| {
            dchi[k / d] * self.j0y[k % d] - chi0[k / d] * jz_j0[k % d]
        });
        let projected = &dpsi + &self.symmetry * &dpsi;
        let plus = JointState::from_amplitudes(projected, d)?;
        Ok((plus, psi0))
    }
}

/// Spin first and second moments of an ancilla state.
#[derive(Clone, Copy, Debug)]
pub struct SpinMoments<T: Real> {
    pub mean_x: T,
    pub mean_y: T,
    pub mean_z: T,
    pub var_x: T,
    pub var_y: T,
    pub var_z: T,
}

pub fn spin_moments<T: Real>(rep: &LadderRep<T>, phi: &CVector<T>) -> Result<SpinMoments<T>> {
    let ops = [rep.jx()?, rep.jy()?, rep.jz()?];
    let mut means = [T::zero(); 3];
    let mut vars = [T::zero(); 3];
    for (k, op) in ops.iter().enumerate() {
        let applied = op * phi;
        let mean = inner(phi, &applied).re;
        let second = applied.norm_squared();
        means[k] = mean;
        vars[k] = second - mean * mean;
    }
    Ok(SpinMoments {
        mean_x: means[0],
        mean_y: means[1],
        mean_z: means[2],
        var_x: vars[0],
        var_y: vars[1],
        var_z: vars[2],
    })
}

/// `(⟨x⟩, Var x, ⟨p⟩, Var p)` with `x = K + K†`, `p = i(K† - K)`.
pub fn quadrature_moments<T: Real>(rep: &LadderRep<T>, phi: &CVector<T>) -> (T, T, T, T) {
    let moments = |op: CMatrix<T>| {
        let applied = &op * phi;
        let mean = inner(phi, &applied).re;
        (mean, applied.norm_squared() - mean * mean)
    };
    let (mx, vx) = moments(rep.quadrature_x());
    let (mp, vp) = moments(rep.quadrature_p());
    (mx, vx, mp, vp)
}

/// Writes `label,re,im` rows for an ancilla vector.
pub fn write_ancilla_csv<T: Real, W: Write>(
    mut w: W,
    rep: &LadderRep<T>,
    v: &CVector<T>,
) -> std::io::Result<()> {
    writeln!(w, "label,re,im")?;
    for (label, z) in rep.labels().iter().zip(v.iter()) {
        writeln!(w, "{},{},{}", label.as_f64(), z.re.as_f64(), z.im.as_f64())?;
    }
    Ok(())
}

/// Writes `tls,label,re,im` rows for a joint state.
pub fn write_joint_csv<T: Real, W: Write>(
    mut w: W,
    rep: &LadderRep<T>,
    state: &JointState<T>,
) -> std::io::Result<()> {
    writeln!(w, "tls,label,re,im")?;
    let d = rep.dim();
    for (k, z) in state.amplitudes().iter().enumerate() {
        let tls = if k / d == 0 { "g" } else { "e" };
        writeln!(
            w,
            "{},{},{},{}",
            tls,
            rep.labels()[k % d].as_f64(),
            z.re.as_f64(),
            z.im.as_f64()
        )?;
    }
    Ok(())
}

/// Inverse of [`write_joint_csv`]; accepts any row order matching the layout.
pub fn read_joint_csv<T: Real>(text: &str, rep: &LadderRep<T>) -> Result<JointState<T>> {
    let d = rep.dim();
    let mut amps: CVector<T> = CVector::zeros(2 * d);
    let bad = |line: &str| Error::InvalidParameter(format!("malformed state row {line:?}"));
    let mut rows = 0;
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(bad(line));
        }
        let tls = match fields[0] {
            "g" => 0,
            "e" => 1,
            _ => return Err(bad(line)),
        };
        let label: f64 = fields[1].parse().map_err(|_| bad(line))?;
        let idx = rep
            .labels()
            .iter()
            .position(|l| (l.as_f64() - label).abs() < 1e-9)
            .ok_or_else(|| bad(line))?;
        let re_part: f64 = fields[2].parse().map_err(|_| bad(line))?;
        let im_part: f64 = fields[3].parse().map_err(|_| bad(line))?;
        amps[tls * d + idx] = Cx::new(T::lit(re_part), T::lit(im_part));
        rows += 1;
    }
    if rows != 2 * d {
        return Err(Error::DimensionMismatch {
            expected: 2 * d,
            found: rows,
        });
    }
    JointState::from_amplitudes(amps, d)
}
