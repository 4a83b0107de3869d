//! Spectral sweeps of the interaction Hamiltonian across the transition
//! parameter, and the closed-form sub-critical spectrum.

use std::io::Write;

use crate::error::{Error, Result};
use crate::hamiltonian::{CouplingPoint, InteractionParts};
use crate::hilbert::{LadderKind, LadderRep};
use crate::linalg::{eigh_unchecked, hermitian_residual, CMatrix, HermitianEigen};
use crate::scalar::Real;

/// Relative tolerance below which an eigenvalue counts as a zero mode.
pub const ZERO_MODE_RTOL: f64 = 1e-8;

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// Rejects input whose relative Hermitian residual exceeds `1e-12`.
pub fn eig_herm<T: Real>(h: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    let residual = hermitian_residual(h);
    if residual > T::lit(1e-12) {
        return Err(Error::NotHermitian {
            residual: residual.as_f64(),
        });
    }
    Ok(eigh_unchecked(h))
}

/// `√n·g1·(1 - (2g2/g1)²)^{3/4}`, valid for `g2 < g1/2`. `n = 0` gives the zero mode.
pub fn analytic_energy<T: Real>(n: usize, p: &CouplingPoint<T>) -> Result<T> {
    let two = T::lit(2.0);
    if !(p.g2() * two < p.g1()) {
        return Err(Error::Regime {
            ratio: p.ratio().as_f64(),
            regime: "sub-critical",
            boundary: "the discrete spectrum collapses at g2 = g1/2",
        });
    }
    if n == 0 {
        return Ok(T::zero());
    }
    let x = two * p.g2() / p.g1();
    let base = T::one() - x * x;
    Ok(T::from_usize_lossy(n).sqrt() * p.g1() * base.powf(T::lit(0.75)))
}

/// Diagnostics at one point of a sweep.
#[derive(Clone, Debug)]
pub struct SpectrumPoint<T: Real> {
    pub u: T,
    pub coupling: CouplingPoint<T>,
    /// Full ascending spectrum.
    pub eigenvalues: Vec<T>,
    /// Divisor applied to produce scaled values; `None` when `g1 = 0` and the
    /// values are reported raw.
    pub scale: Option<T>,
    /// The `k` smallest non-negative eigenvalues (scaled), zero mode listed once.
    pub lowest_nonneg: Vec<T>,
    /// `min |E|`.
    pub zero_mode_gap: T,
    /// `max_i |E_i + E_{rev(i)}|`.
    pub pairing_residual: T,
    /// `max |E|`.
    pub spectral_radius: T,
}

impl<T: Real> SpectrumPoint<T> {
    pub fn has_zero_mode(&self) -> bool {
        self.zero_mode_gap <= T::lit(ZERO_MODE_RTOL) * self.spectral_radius
    }

    /// Mean spacing between consecutive reported branches, zero mode excluded.
    pub fn mean_spacing(&self) -> Option<T> {
        let positive: Vec<T> = self
            .lowest_nonneg
            .iter()
            .copied()
            .filter(|&e| e > T::zero())
            .collect();
        if positive.len() < 2 {
            return None;
        }
        let span = positive[positive.len() - 1] - positive[0];
        Some(span / T::from_usize_lossy(positive.len() - 1))
    }
}

/// Result of [`sweep`].
#[derive(Clone, Debug)]
pub struct SpectrumSweep<T: Real> {
    pub kind: LadderKind,
    pub points: Vec<SpectrumPoint<T>>,
}

impl<T: Real> SpectrumSweep<T> {
    pub fn u_grid(&self) -> Vec<T> {
        self.points.iter().map(|p| p.u).collect()
    }

    /// Worst `pairing_residual / spectral_radius` over the grid.
    pub fn max_relative_pairing(&self) -> T {
        self.points.iter().fold(T::zero(), |acc, p| {
            acc.max(p.pairing_residual / p.spectral_radius.max(T::default_epsilon()))
        })
    }

    /// True when every grid point has a numerical zero mode.
    pub fn zero_mode_everywhere(&self) -> bool {
        self.points.iter().all(SpectrumPoint::has_zero_mode)
    }

    /// Rows `u,branch_index,E_scaled`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "u,branch_index,E_scaled")?;
        for p in &self.points {
            for (b, e) in p.lowest_nonneg.iter().enumerate() {
                writeln!(w, "{},{},{}", p.u.as_f64(), b, e.as_f64())?;
            }
        }
        Ok(())
    }
}

/// Scale used for the reported branches: `g1` (oscillator, custom) or
/// `g1·√(2J)` (spin). `None` at `g1 = 0`.
pub fn branch_scale<T: Real>(kind: LadderKind, p: &CouplingPoint<T>) -> Option<T> {
    if p.g1() == T::zero() {
        return None;
    }
    Some(match kind {
        LadderKind::Spin(j) => p.g1() * T::from_usize_lossy(j.twice() as usize).sqrt(),
        _ => p.g1(),
    })
}

/// Spectrum at one coupling point; `k` is the number of reported branches.
pub fn spectrum_point<T: Real>(
    rep: &LadderRep<T>,
    parts: &InteractionParts<T>,
    p: CouplingPoint<T>,
    k: usize,
) -> Result<SpectrumPoint<T>> {
    let h = parts.assemble(&p);
    let eig = eig_herm(&h)?;
    let values: Vec<T> = eig.values.iter().copied().collect();
    let n = values.len();
    let radius = values.iter().fold(T::zero(), |acc, e| acc.max(e.abs()));
    let zero_gap = values.iter().fold(T::max_value().unwrap_or(radius), |acc, e| acc.min(e.abs()));
    let pairing = (0..n).fold(T::zero(), |acc, i| acc.max((values[i] + values[n - 1 - i]).abs()));

    let tol = T::lit(ZERO_MODE_RTOL) * radius;
    let scale = branch_scale(rep.kind(), &p);
    let mut lowest = Vec::with_capacity(k);
    let mut zero_listed = false;
    for &e in values.iter().filter(|&&e| e >= -tol) {
        if lowest.len() == k {
            break;
        }
        if e.abs() <= tol {
            if zero_listed {
                continue;
            }
            zero_listed = true;
            lowest.push(T::zero());
            continue;
        }
        lowest.push(match scale {
            Some(s) => e / s,
            None => e,
        });
    }

    Ok(SpectrumPoint {
        u: p.u(),
        coupling: p,
        eigenvalues: values,
        scale,
        lowest_nonneg: lowest,
        zero_mode_gap: zero_gap,
        pairing_residual: pairing,
        spectral_radius: radius,
    })
}

/// Diagonalizes `H` at every `u` of `u_grid` with `g1 = (1-u)g`, `g2 = u·g/2`.
pub fn sweep<T: Real>(
    rep: &LadderRep<T>,
    g: T,
    u_grid: &[T],
    k: usize,
) -> Result<SpectrumSweep<T>> {
    let parts = InteractionParts::new(rep);
    let points = u_grid
        .iter()
        .map(|&u| spectrum_point(rep, &parts, CouplingPoint::from_u(g, u)?, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumSweep {
        kind: rep.kind(),
        points,
    })
}

/// `n` points evenly spaced on `[0, 1]`.
pub fn uniform_u_grid<T: Real>(n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![T::zero()],
        _ => (0..n)
            .map(|i| T::from_usize_lossy(i) / T::from_usize_lossy(n - 1))
            .collect(),
    }
}
