//! Quasi-probability maps: Wigner functions of oscillator states and Husimi
//! functions of spin states on the sphere.
//!
//! Coordinates are `x = a + a†`, `p = i(a† - a)` with `[x, p] = 2i`; the
//! vacuum maps to `exp(-(x² + p²)/2)/(2π)`. The Wigner function of each pure
//! component is evaluated from its position-space wavefunction,
//! `W(q, p) = (1/π)∫ψ*(q + y)ψ(q - y)e^{2ipy}dy` in unit-commutator variables,
//! using a scaled Hermite-function recursion that stays finite for thousands of
//! Fock levels. [`wigner_displaced_parity`] evaluates the same quantity as
//! `Tr[ρ D(α) P D(α)†]` and is kept as an independent check for small bases.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::hilbert::{JointState, LadderRep};
use crate::linalg::{eigh_unchecked, hermitian_residual, CMatrix};
use crate::scalar::Real;

type C64 = Complex<f64>;

pub const CONVENTION: &str = "x = a + a^dagger, p = i(a^dagger - a), [x,p] = 2i";

/// Largest `|W|` tolerated on the grid boundary.
pub const BOUNDARY_LIMIT: f64 = 1e-8;

/// Rectangular `(x, p)` grid; both axes include their end points.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub step: f64,
}

impl Default for WignerGrid {
    fn default() -> Self {
        Self::square(8.0, 0.05)
    }
}

impl WignerGrid {
    pub fn square(half_width: f64, step: f64) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            p_min: -half_width,
            p_max: half_width,
            step,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.step > 0.0
            && self.x_max > self.x_min
            && self.p_max > self.p_min
            && [self.x_min, self.x_max, self.p_min, self.p_max, self.step]
                .iter()
                .all(|v| v.is_finite());
        if !ok {
            return Err(Error::InvalidParameter(format!("degenerate Wigner grid {self:?}")));
        }
        Ok(())
    }

    pub fn x_axis(&self) -> Vec<f64> {
        axis(self.x_min, self.x_max, self.step)
    }

    pub fn p_axis(&self) -> Vec<f64> {
        axis(self.p_min, self.p_max, self.step)
    }
}

fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| lo + i as f64 * step).collect()
}

/// Which map a [`PhaseSpaceMap`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    /// Rows follow `x`, columns follow `p`.
    Wigner,
    /// Rows follow polar angle `ϑ`, columns follow azimuth `ϕ`.
    Husimi,
}

/// A real field sampled on a 2-D grid, row-major.
#[derive(Clone, Debug)]
pub struct PhaseSpaceMap {
    pub kind: MapKind,
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
    pub values: Vec<f64>,
    /// Quadrature of the map over its domain (should be close to 1).
    pub integral: f64,
    /// Largest `|value|` on the outer edge (Wigner only; 0 for Husimi).
    pub boundary_max: f64,
}

impl PhaseSpaceMap {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols.len() + j]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Grid position of the largest value.
    pub fn argmax(&self) -> (f64, f64) {
        let (k, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, &v)| if v > bv { (k, v) } else { (bk, bv) });
        let nc = self.cols.len();
        (self.rows[k / nc], self.cols[k % nc])
    }

    fn column_names(&self) -> (&'static str, &'static str, &'static str) {
        match self.kind {
            MapKind::Wigner => ("x", "p", "W"),
            MapKind::Husimi => ("theta", "phi", "Q"),
        }
    }

    /// CSV with a `#` header line stating the convention, then one row per
    /// grid point in row-major order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        match self.kind {
            MapKind::Wigner => writeln!(w, "# {CONVENTION}; integral {}", self.integral)?,
            MapKind::Husimi => writeln!(
                w,
                "# Q = (2J+1)/(4pi) <Omega|rho|Omega>, |Omega> = exp(-i phi Jz) exp(-i theta Jy)|J,J>; integral {}",
                self.integral
            )?,
        }
        let (a, b, v) = self.column_names();
        writeln!(w, "{a},{b},{v}")?;
        for (i, r) in self.rows.iter().enumerate() {
            for (j, c) in self.cols.iter().enumerate() {
                writeln!(w, "{r},{c},{}", self.get(i, j))?;
            }
        }
        Ok(())
    }

    /// Binary raster: magic `SQZW` or `SQZQ`, `u32` version 1, `u64` rows,
    /// `u64` cols, `f64` row and column ranges (min, max each), then the
    /// values row-major, all little-endian `f64`.
    pub fn write_raster<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(match self.kind {
            MapKind::Wigner => b"SQZW",
            MapKind::Husimi => b"SQZQ",
        })?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&(self.rows.len() as u64).to_le_bytes())?;
        w.write_all(&(self.cols.len() as u64).to_le_bytes())?;
        for v in [
            self.rows[0],
            *self.rows.last().unwrap_or(&0.0),
            self.cols[0],
            *self.cols.last().unwrap_or(&0.0),
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Pure components `|v_k⟩` with `ρ = Σ |v_k⟩⟨v_k|` (weights folded in).
#[derive(Clone, Debug)]
pub struct Components {
    vectors: Vec<Vec<C64>>,
}

impl Components {
    /// Spectral decomposition of a density matrix; eigenvalues below
    /// `1e-14` are dropped.
    pub fn from_density<T: Real>(rho: &CMatrix<T>) -> Result<Self> {
        check_density(rho)?;
        let eig = eigh_unchecked(rho);
        let vectors = (0..eig.values.len())
            .filter(|&k| eig.values[k].as_f64() > 1e-14)
            .map(|k| {
                let w = eig.values[k].as_f64().sqrt();
                eig.vectors
                    .column(k)
                    .iter()
                    .map(|z| C64::new(z.re.as_f64() * w, z.im.as_f64() * w))
                    .collect()
            })
            .collect();
        Ok(Self { vectors })
    }

    /// Ancilla of a joint pure state: the two TLS-conditioned branches.
    pub fn from_joint<T: Real>(state: &JointState<T>) -> Self {
        let vectors = (0..2)
            .map(|a| {
                state
                    .branch(a)
                    .iter()
                    .map(|z| C64::new(z.re.as_f64(), z.im.as_f64()))
                    .collect::<Vec<_>>()
            })
            .filter(|v| v.iter().any(|z| z.norm_sqr() > 0.0))
            .collect();
        Self { vectors }
    }

    pub fn from_pure<T: Real>(v: &crate::linalg::CVector<T>) -> Self {
        Self {
            vectors: vec![v.iter().map(|z| C64::new(z.re.as_f64(), z.im.as_f64())).collect()],
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.vectors
            .iter()
            .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Highest Fock index carrying more than `1e-30` of population.
    fn effective_cutoff(&self) -> usize {
        let mut top = 0;
        for v in &self.vectors {
            for (n, z) in v.iter().enumerate() {
                if z.norm_sqr() > 1e-30 {
                    top = top.max(n);
                }
            }
        }
        top
    }

    /// Wavefunction of every component at `q` (unit-commutator position),
    /// `phase_step = -i` gives the momentum representation instead.
    fn evaluate(&self, q: f64, momentum: bool, out: &mut [C64]) {
        hermite_sum(&self.vectors, q, momentum, out);
    }
}

fn check_density<T: Real>(rho: &CMatrix<T>) -> Result<()> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            found: rho.ncols(),
        });
    }
    let residual = hermitian_residual(rho).as_f64();
    if residual > 1e-10 {
        return Err(Error::NotHermitian { residual });
    }
    let tr = rho.trace();
    if (tr.re.as_f64() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDensity(format!("trace {} differs from 1", tr.re.as_f64())));
    }
    Ok(())
}

/// `Σ_n c_n h_n(q)` for every coefficient vector, with `h_n` the normalized
/// Hermite functions. With `momentum` the coefficients pick up `(-i)^n`.
///
/// The recursion carries a separate exponent so that `h_0(q) = π^{-1/4}e^{-q²/2}`
/// never underflows before the high-order terms become large.
fn hermite_sum(coeffs: &[Vec<C64>], q: f64, momentum: bool, out: &mut [C64]) {
    const BIG: f64 = 1e150;
    let n_max = coeffs.iter().map(Vec::len).max().unwrap_or(0);
    for o in out.iter_mut() {
        *o = C64::new(0.0, 0.0);
    }
    if n_max == 0 {
        return;
    }
    // scaled values: true h_n = s_n · exp(log_scale)
    let mut log_scale = -q * q / 2.0 - 0.25 * PI.ln();
    let mut prev = 0.0;
    let mut cur = 1.0;
    let phases = [
        C64::new(1.0, 0.0),
        C64::new(0.0, -1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, 1.0),
    ];
    let mut acc: Vec<C64> = vec![C64::new(0.0, 0.0); coeffs.len()];
    for n in 0..n_max {
        for (k, c) in coeffs.iter().enumerate() {
            if let Some(&z) = c.get(n) {
                let z = if momentum { z * phases[n % 4] } else { z };
                acc[k] += z * cur;
            }
        }
        let next = (2.0 / (n + 1) as f64).sqrt() * q * cur - (n as f64 / (n + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            for a in acc.iter_mut() {
                *a /= BIG;
            }
            log_scale += BIG.ln();
        }
    }
    let factor = log_scale.exp();
    for (o, a) in out.iter_mut().zip(acc) {
        *o = if factor == 0.0 { C64::new(0.0, 0.0) } else { a * factor };
    }
}

/// Wigner map of a density matrix in the Fock basis.
pub fn wigner<T: Real>(rho: &CMatrix<T>, grid: &WignerGrid) -> Result<PhaseSpaceMap> {
    wigner_components(&Components::from_density(rho)?, grid)
}

/// Wigner map of the oscillator factor of a joint pure state.
pub fn wigner_of_joint<T: Real>(state: &JointState<T>, grid: &WignerGrid) -> Result<PhaseSpaceMap> {
    wigner_components(&Components::from_joint(state), grid)
}

/// Wigner map from pure components, checked against [`BOUNDARY_LIMIT`].
pub fn wigner_components(comp: &Components, grid: &WignerGrid) -> Result<PhaseSpaceMap> {
    let map = wigner_unchecked(comp, grid)?;
    if map.boundary_max > BOUNDARY_LIMIT {
        return Err(Error::GridTooNarrow {
            boundary: map.boundary_max,
        });
    }
    Ok(map)
}

/// As [`wigner_components`] without the boundary check.
pub fn wigner_unchecked(comp: &Components, grid: &WignerGrid) -> Result<PhaseSpaceMap> {
    grid.validate()?;
    let xs = grid.x_axis();
    let ps = grid.p_axis();
    let trace = comp.trace();

    // unit-commutator variables: q = x/√2, k = p/√2
    let n_eff = comp.effective_cutoff() as f64;
    let reach = (2.0 * n_eff + 1.0).sqrt() + 8.0;
    let k_grid = ps.iter().fold(0.0f64, |m, &p| m.max(p.abs())) * FRAC_1_SQRT_2;
    // integrand bandwidth is at most 2(k_grid + reach); keep well under Nyquist
    let h = (PI / (2.0 * (k_grid + reach))).min(0.1);

    let mut values = vec![0.0; xs.len() * ps.len()];
    let mut plus = vec![C64::new(0.0, 0.0); comp.len()];
    let mut minus = vec![C64::new(0.0, 0.0); comp.len()];
    let mut f: Vec<C64> = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        let q = x * FRAC_1_SQRT_2;
        let y_max = (reach - q.abs()).max(0.0);
        let n_y = (y_max / h).ceil() as usize;
        // f(y) = Σ_k ψ_k*(q + y) ψ_k(q - y); f(-y) = conj f(y)
        f.clear();
        for m in 0..=n_y {
            let y = m as f64 * h;
            comp.evaluate(q + y, false, &mut plus);
            comp.evaluate(q - y, false, &mut minus);
            let s = plus
                .iter()
                .zip(&minus)
                .fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b);
            f.push(s);
        }
        for (j, &p) in ps.iter().enumerate() {
            let k = p * FRAC_1_SQRT_2;
            let rot = C64::from_polar(1.0, 2.0 * k * h);
            let mut phase = rot;
            let mut sum = f[0].re;
            for fm in &f[1..] {
                sum += 2.0 * (fm * phase).re;
                phase *= rot;
            }
            // W(x, p) = W_unit(q, k) / 2
            values[i * ps.len() + j] = sum * h / PI / 2.0;
        }
    }
    let integral = values.iter().sum::<f64>() * grid.step * grid.step;
    let map = PhaseSpaceMap {
        kind: MapKind::Wigner,
        boundary_max: boundary_max(&values, xs.len(), ps.len()),
        rows: xs,
        cols: ps,
        values,
        integral: integral / trace.max(f64::MIN_POSITIVE),
    };
    Ok(map)
}

fn boundary_max(values: &[f64], nr: usize, nc: usize) -> f64 {
    let mut m = 0.0f64;
    for i in 0..nr {
        for j in 0..nc {
            if i == 0 || j == 0 || i + 1 == nr || j + 1 == nc {
                m = m.max(values[i * nc + j].abs());
            }
        }
    }
    m
}

/// Smallest symmetric-step grid containing the support of both quadrature
/// marginals (density above `1e-13` of its peak), padded by `pad`, with at
/// most `max_points` per axis.
pub fn auto_grid(comp: &Components, pad: f64, min_step: f64, max_points: usize) -> WignerGrid {
    let n_eff = comp.effective_cutoff() as f64;
    let reach = (2.0 * n_eff + 1.0).sqrt() + 8.0;
    let samples = 2000;
    let mut buf = vec![C64::new(0.0, 0.0); comp.len()];
    let mut support = |momentum: bool| {
        let qs: Vec<f64> = (0..=samples)
            .map(|i| -reach + 2.0 * reach * i as f64 / samples as f64)
            .collect();
        let dens: Vec<f64> = qs
            .iter()
            .map(|&q| {
                comp.evaluate(q, momentum, &mut buf);
                buf.iter().map(|z| z.norm_sqr()).sum()
            })
            .collect();
        let peak = dens.iter().copied().fold(0.0, f64::max);
        let cut = peak * 1e-13;
        let lo = dens.iter().position(|&d| d > cut).unwrap_or(0);
        let hi = dens.iter().rposition(|&d| d > cut).unwrap_or(samples);
        // back to x = √2 q units
        (qs[lo] * 2f64.sqrt() - pad, qs[hi] * 2f64.sqrt() + pad)
    };
    let (x_min, x_max) = support(false);
    let (p_min, p_max) = support(true);
    let span = (x_max - x_min).max(p_max - p_min);
    let step = (span / (max_points.max(2) - 1) as f64).max(min_step);
    let snap = |v: f64, up: bool| {
        let s = v / step;
        (if up { s.ceil() } else { s.floor() }) * step
    };
    WignerGrid {
        x_min: snap(x_min, false),
        x_max: snap(x_max, true),
        p_min: snap(p_min, false),
        p_max: snap(p_max, true),
        step,
    }
}

/// `W(x, p) = Tr[ρ D(α) P D(α)†]/(2π)` with `α = (x + ip)/2`, built in a
/// basis enlarged by `pad` levels. Cost grows as the cube of the basis per
/// grid point, so this is meant for small checks.
pub fn wigner_displaced_parity<T: Real>(
    rho: &CMatrix<T>,
    xs: &[f64],
    ps: &[f64],
    pad: usize,
) -> Result<Vec<f64>> {
    check_density(rho)?;
    let d = rho.nrows();
    let big = d + pad;
    let mut rho_big = CMatrix::<f64>::zeros(big, big);
    for i in 0..d {
        for j in 0..d {
            let z = rho[(i, j)];
            rho_big[(i, j)] = C64::new(z.re.as_f64(), z.im.as_f64());
        }
    }
    let mut a = CMatrix::<f64>::zeros(big, big);
    for n in 1..big {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let adag = a.adjoint();
    let parity = CMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_fn(big, |n, _| {
        C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
    }));
    let mut out = Vec::with_capacity(xs.len() * ps.len());
    for &x in xs {
        for &p in ps {
            let alpha = C64::new(x / 2.0, p / 2.0);
            // D(α) = exp(αa† - α*a) = exp(-i·(-1)·G) with G = -i(αa† - α*a) Hermitian
            let gen = (&adag * alpha - &a * alpha.conj()) * C64::new(0.0, -1.0);
            let disp = crate::linalg::expm_hermitian(&gen, -1.0);
            let kernel = &disp * &parity * disp.adjoint();
            let tr = (&rho_big * kernel).trace();
            out.push(tr.re / (2.0 * PI));
        }
    }
    Ok(out)
}

/// Equiangular sphere mesh: `ϑ ∈ [0, π]`, `ϕ ∈ [-π, π]`, end points included.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SphereMesh {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for SphereMesh {
    fn default() -> Self {
        Self {
            n_theta: 181,
            n_phi: 361,
        }
    }
}

impl SphereMesh {
    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_theta)
            .map(|i| PI * i as f64 / (self.n_theta - 1) as f64)
            .collect()
    }

    pub fn phis(&self) -> Vec<f64> {
        (0..self.n_phi)
            .map(|j| -PI + 2.0 * PI * j as f64 / (self.n_phi - 1) as f64)
            .collect()
    }
}

/// `⟨J, M|Ω(ϑ, ϕ)⟩` for `M = -J..J` (ascending), with
/// `|Ω⟩ = e^{-iϕJz}e^{-iϑJy}|J, J⟩`.
pub fn spin_coherent_state(twice_j: u32, theta: f64, phi: f64) -> Vec<C64> {
    let n = twice_j as usize;
    let (s, c) = (theta / 2.0).sin_cos();
    let (ls, lc) = (s.abs().ln(), c.abs().ln());
    // ln C(n, k) accumulated incrementally
    let mut log_binom = 0.0;
    let j = twice_j as f64 / 2.0;
    (0..=n)
        .map(|k| {
            // k = J + M; amplitude √C(2J, k) cos^k sin^(2J-k)
            if k > 0 {
                log_binom += ((n - k + 1) as f64).ln() - (k as f64).ln();
            }
            let cos_part = if k == 0 { 0.0 } else { k as f64 * lc };
            let sin_part = if n - k == 0 { 0.0 } else { (n - k) as f64 * ls };
            let mag = (0.5 * log_binom + cos_part + sin_part).exp();
            let sign = if (c < 0.0 && k % 2 == 1) != (s < 0.0 && (n - k) % 2 == 1) {
                -1.0
            } else {
                1.0
            };
            let m = k as f64 - j;
            C64::from_polar(sign * mag, -m * phi)
        })
        .collect()
}

/// Husimi function of a spin density matrix on the mesh.
pub fn husimi_sphere<T: Real>(
    rep: &LadderRep<T>,
    rho: &CMatrix<T>,
    mesh: &SphereMesh,
) -> Result<PhaseSpaceMap> {
    let spin = rep
        .spin()
        .ok_or_else(|| Error::InvalidParameter("Husimi map needs a spin representation".into()))?;
    if rho.nrows() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            found: rho.nrows(),
        });
    }
    husimi_components(spin.twice(), &Components::from_density(rho)?, mesh)
}

/// Husimi function of the spin factor of a joint pure state.
pub fn husimi_of_joint<T: Real>(
    rep: &LadderRep<T>,
    state: &JointState<T>,
    mesh: &SphereMesh,
) -> Result<PhaseSpaceMap> {
    let spin = rep
        .spin()
        .ok_or_else(|| Error::InvalidParameter("Husimi map needs a spin representation".into()))?;
    if state.anc_dim() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            found: state.anc_dim(),
        });
    }
    husimi_components(spin.twice(), &Components::from_joint(state), mesh)
}

pub fn husimi_components(twice_j: u32, comp: &Components, mesh: &SphereMesh) -> Result<PhaseSpaceMap> {
    if mesh.n_theta < 2 || mesh.n_phi < 2 {
        return Err(Error::InvalidParameter(format!("degenerate sphere mesh {mesh:?}")));
    }
    let thetas = mesh.thetas();
    let phis = mesh.phis();
    let norm = (twice_j as f64 + 1.0) / (4.0 * PI);
    let mut values = Vec::with_capacity(thetas.len() * phis.len());
    for &th in &thetas {
        for &ph in &phis {
            let omega = spin_coherent_state(twice_j, th, ph);
            let q: f64 = comp
                .vectors
                .iter()
                .map(|v| {
                    v.iter()
                        .zip(&omega)
                        .fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + b.conj() * a)
                        .norm_sqr()
                })
                .sum();
            values.push(norm * q);
        }
    }
    let integral = sphere_integral(&values, &thetas, &phis) / comp.trace().max(f64::MIN_POSITIVE);
    Ok(PhaseSpaceMap {
        kind: MapKind::Husimi,
        rows: thetas,
        cols: phis,
        values,
        integral,
        boundary_max: 0.0,
    })
}

/// Trapezoid quadrature of `∫ f sinϑ dϑ dϕ`.
pub fn sphere_integral(values: &[f64], thetas: &[f64], phis: &[f64]) -> f64 {
    let nc = phis.len();
    let trap = |xs: &[f64], f: &dyn Fn(usize) -> f64| -> f64 {
        (1..xs.len())
            .map(|i| 0.5 * (f(i - 1) + f(i)) * (xs[i] - xs[i - 1]))
            .sum()
    };
    let row = |i: usize| trap(phis, &|j| values[i * nc + j]) * thetas[i].sin();
    trap(thetas, &row)
}

/// Local maxima of `Q(π/2, ϕ)` (periodic in ϕ) exceeding `rel` times the
/// largest equatorial value. Returns azimuths in `(-π, π]`.
pub fn equatorial_peaks(map: &PhaseSpaceMap, rel: f64) -> Vec<f64> {
    assert_eq!(map.kind, MapKind::Husimi);
    let i_eq = map
        .rows
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bd), (i, &t)| {
            let d = (t - PI / 2.0).abs();
            if d < bd {
                (i, d)
            } else {
                (bi, bd)
            }
        })
        .0;
    // drop the duplicated ϕ = π column
    let nc = map.cols.len();
    let n = if (map.cols[nc - 1] - map.cols[0] - 2.0 * PI).abs() < 1e-9 { nc - 1 } else { nc };
    let ring: Vec<f64> = (0..n).map(|j| map.get(i_eq, j)).collect();
    let top = ring.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..n)
        .filter(|&j| {
            let left = ring[(j + n - 1) % n];
            let right = ring[(j + 1) % n];
            ring[j] >= rel * top && ring[j] > left && ring[j] >= right
        })
        .map(|j| {
            let phi = map.cols[j];
            if phi <= -PI + 1e-12 {
                PI
            } else {
                phi
            }
        })
        .collect()
}

/// Mean of `Q` along the meridian at azimuth `phi` relative to its mean over
/// the whole sphere; values well above 1 mark a ring through the poles.
pub fn meridian_contrast(map: &PhaseSpaceMap, phi: f64) -> f64 {
    assert_eq!(map.kind, MapKind::Husimi);
    let nc = map.cols.len();
    let j = map
        .cols
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bj, bd), (j, &c)| {
            let d = (c - phi).abs();
            if d < bd {
                (j, d)
            } else {
                (bj, bd)
            }
        })
        .0;
    let nr = map.rows.len();
    let interior = 1..nr - 1;
    let along: f64 = interior.clone().map(|i| map.get(i, j)).sum::<f64>() / (nr - 2) as f64;
    let mean = map.values.iter().sum::<f64>() / (nr * nc) as f64;
    along / mean
}
