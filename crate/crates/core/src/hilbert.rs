//! Operator matrices for the two-level system, the truncated oscillator and
//! the collective spin, and their embedding into the joint space.
//!
//! The joint basis is `TLS ⊗ ancilla` with the TLS as the slow index:
//! amplitude `k = tls·D + m` where `tls ∈ {0 = g, 1 = e}`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::scalar::{re, Cx, Real};

/// Index of `|g⟩` in the TLS basis.
pub const GROUND: usize = 0;
/// Index of `|e⟩` in the TLS basis.
pub const EXCITED: usize = 1;

/// TLS operators in the `(g, e)` basis.
pub mod tls {
    use super::*;

    /// `σ₊ = |e⟩⟨g|`.
    pub fn sigma_plus<T: Real>() -> CMatrix<T> {
        let mut m = CMatrix::zeros(2, 2);
        m[(EXCITED, GROUND)] = re(T::one());
        m
    }

    /// `σ₋ = |g⟩⟨e|`.
    pub fn sigma_minus<T: Real>() -> CMatrix<T> {
        sigma_plus::<T>().adjoint()
    }

    pub fn sigma_x<T: Real>() -> CMatrix<T> {
        sigma_plus::<T>() + sigma_minus::<T>()
    }

    pub fn sigma_z<T: Real>() -> CMatrix<T> {
        let mut m = CMatrix::zeros(2, 2);
        m[(EXCITED, EXCITED)] = re(T::one());
        m[(GROUND, GROUND)] = re(-T::one());
        m
    }
}

/// Spin magnitude `j`, stored exactly as the integer `2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinMagnitude {
    twice: u32,
}

impl SpinMagnitude {
    /// `j = twice/2`; rejects `j = 0`.
    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(Error::InvalidParameter("spin magnitude must be at least 1/2".into()));
        }
        Ok(Self { twice })
    }

    pub fn integer(j: u32) -> Result<Self> {
        Self::from_twice(2 * j)
    }

    /// From a rational `num/den`, which must be a positive half-integer.
    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 || num * den <= 0 {
            return Err(Error::InvalidParameter(format!("spin {num}/{den} is not positive")));
        }
        let (num, den) = (num.abs(), den.abs());
        if (2 * num) % den != 0 {
            return Err(Error::InvalidParameter(format!(
                "spin {num}/{den} is not a half-integer"
            )));
        }
        let twice = u32::try_from(2 * num / den)
            .map_err(|_| Error::InvalidParameter(format!("spin {num}/{den} too large")))?;
        Self::from_twice(twice)
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// `j` itself when integer.
    pub fn as_integer(self) -> Option<u32> {
        self.is_integer().then_some(self.twice / 2)
    }

    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    pub fn value<T: Real>(self) -> T {
        T::from_usize_lossy(self.twice as usize) / T::lit(2.0)
    }
}

impl fmt::Display for SpinMagnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for SpinMagnitude {
    type Err = Error;

    /// Accepts `"10"`, `"9/2"` or `"4.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse spin magnitude {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            return Self::from_ratio(n, d);
        }
        if let Ok(n) = s.parse::<i64>() {
            return Self::from_ratio(n, 1);
        }
        let x: f64 = s.parse().map_err(|_| bad())?;
        let twice = (2.0 * x).round();
        if (2.0 * x - twice).abs() > 1e-12 || twice < 1.0 {
            return Err(Error::InvalidParameter(format!("spin {s} is not a positive half-integer")));
        }
        Self::from_twice(twice as u32)
    }
}

/// Which physical ancilla a [`LadderRep`] describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderKind {
    /// Fock basis `n = 0..=n_cut`, `K = a`.
    Oscillator { n_cut: usize },
    /// Dicke basis `M = -j..=j` ascending, `K = J₋`.
    Spin(SpinMagnitude),
    /// User-supplied lowering operator.
    Custom,
}

/// Matrix representation of the ancilla lowering operator `K`.
#[derive(Clone, Debug)]
pub struct LadderRep<T: Real> {
    kind: LadderKind,
    lowering: CMatrix<T>,
    labels: Vec<T>,
}

/// Truncated oscillator with `K[n-1, n] = √n`.
pub fn osc_ladder<T: Real>(n_cut: usize) -> Result<LadderRep<T>> {
    if n_cut == 0 {
        return Err(Error::InvalidParameter("n_cut must be at least 1".into()));
    }
    let dim = n_cut + 1;
    let mut k = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        k[(n - 1, n)] = re(T::from_usize_lossy(n).sqrt());
    }
    Ok(LadderRep {
        kind: LadderKind::Oscillator { n_cut },
        lowering: k,
        labels: (0..dim).map(T::from_usize_lossy).collect(),
    })
}

/// Spin-`j` with `K = J₋`, `⟨M-1|J₋|M⟩ = √(j(j+1) - M(M-1))`.
pub fn spin_ladder<T: Real>(j: SpinMagnitude) -> Result<LadderRep<T>> {
    let dim = j.dim();
    let jv: T = j.value();
    let two = T::lit(2.0);
    let labels: Vec<T> = (0..dim)
        .map(|i| (T::from_usize_lossy(2 * i) - T::from_usize_lossy(j.twice() as usize)) / two)
        .collect();
    let mut k = CMatrix::zeros(dim, dim);
    for i in 1..dim {
        let m = labels[i];
        let w = jv * (jv + T::one()) - m * (m - T::one());
        k[(i - 1, i)] = re(w.max(T::zero()).sqrt());
    }
    Ok(LadderRep {
        kind: LadderKind::Spin(j),
        lowering: k,
        labels,
    })
}

/// Arbitrary square lowering operator, labels `0..D`.
pub fn custom_ladder<T: Real>(k: CMatrix<T>) -> Result<LadderRep<T>> {
    if k.nrows() != k.ncols() {
        return Err(Error::DimensionMismatch {
            expected: k.nrows(),
            found: k.ncols(),
        });
    }
    if k.nrows() < 2 {
        return Err(Error::InvalidParameter("ancilla dimension must be at least 2".into()));
    }
    let dim = k.nrows();
    Ok(LadderRep {
        kind: LadderKind::Custom,
        lowering: k,
        labels: (0..dim).map(T::from_usize_lossy).collect(),
    })
}

impl<T: Real> LadderRep<T> {
    pub fn kind(&self) -> LadderKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.lowering.nrows()
    }

    /// Dimension of the joint `TLS ⊗ ancilla` space.
    pub fn joint_dim(&self) -> usize {
        2 * self.dim()
    }

    /// Basis quantum numbers: `n` for the oscillator, `M` for the spin.
    pub fn labels(&self) -> &[T] {
        &self.labels
    }

    pub fn lowering(&self) -> &CMatrix<T> {
        &self.lowering
    }

    pub fn raising(&self) -> CMatrix<T> {
        self.lowering.adjoint()
    }

    pub fn spin(&self) -> Option<SpinMagnitude> {
        match self.kind {
            LadderKind::Spin(j) => Some(j),
            _ => None,
        }
    }

    pub fn is_oscillator(&self) -> bool {
        matches!(self.kind, LadderKind::Oscillator { .. })
    }

    fn require_spin(&self) -> Result<SpinMagnitude> {
        self.spin()
            .ok_or_else(|| Error::InvalidParameter("operation requires a spin representation".into()))
    }

    /// `(J₊ + J₋)/2`.
    pub fn jx(&self) -> Result<CMatrix<T>> {
        self.require_spin()?;
        Ok((self.raising() + &self.lowering).scale(T::lit(0.5)))
    }

    /// `(J₊ - J₋)/(2i)`.
    pub fn jy(&self) -> Result<CMatrix<T>> {
        self.require_spin()?;
        let diff = self.raising() - &self.lowering;
        Ok(diff * Cx::new(T::zero(), -T::lit(0.5)))
    }

    pub fn jz(&self) -> Result<CMatrix<T>> {
        self.require_spin()?;
        Ok(CMatrix::from_diagonal(&CVector::from_iterator(
            self.dim(),
            self.labels.iter().map(|&m| re(m)),
        )))
    }

    /// `K†K`, the number operator for the oscillator.
    pub fn number(&self) -> CMatrix<T> {
        self.raising() * &self.lowering
    }

    /// `K + K†`.
    pub fn quadrature_x(&self) -> CMatrix<T> {
        &self.lowering + self.raising()
    }

    /// `i(K† - K)`.
    pub fn quadrature_p(&self) -> CMatrix<T> {
        (self.raising() - &self.lowering) * Cx::new(T::zero(), T::one())
    }

    /// Ancilla basis vector with index `idx`.
    pub fn basis_vector(&self, idx: usize) -> CVector<T> {
        let mut v = CVector::zeros(self.dim());
        v[idx] = re(T::one());
        v
    }
}

/// Kronecker product `tls_op ⊗ anc_op` with the TLS as the slow index.
pub fn joint_embed<T: Real>(tls_op: &CMatrix<T>, anc_op: &CMatrix<T>) -> Result<CMatrix<T>> {
    if tls_op.nrows() != 2 || tls_op.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: tls_op.nrows().max(tls_op.ncols()),
        });
    }
    if anc_op.nrows() != anc_op.ncols() {
        return Err(Error::DimensionMismatch {
            expected: anc_op.nrows(),
            found: anc_op.ncols(),
        });
    }
    Ok(tls_op.kronecker(anc_op))
}

/// Normalized amplitude vector on `TLS ⊗ ancilla`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState<T: Real> {
    amplitudes: CVector<T>,
    anc_dim: usize,
}

impl<T: Real> JointState<T> {
    /// Normalizes `amplitudes`; length must be `2·anc_dim`.
    pub fn from_amplitudes(amplitudes: CVector<T>, anc_dim: usize) -> Result<Self> {
        let state = Self::from_raw(amplitudes, anc_dim)?;
        let norm = state.norm();
        if norm == T::zero() || !norm.is_finite() {
            return Err(Error::InvalidParameter("state has zero or non-finite norm".into()));
        }
        Ok(Self {
            amplitudes: state.amplitudes.unscale(norm),
            anc_dim,
        })
    }

    /// Wraps amplitudes without renormalizing (propagator output, norm-drift tracking).
    pub fn from_raw(amplitudes: CVector<T>, anc_dim: usize) -> Result<Self> {
        if amplitudes.len() != 2 * anc_dim {
            return Err(Error::DimensionMismatch {
                expected: 2 * anc_dim,
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            amplitudes,
            anc_dim,
        })
    }

    /// `|chi⟩ ⊗ |phi⟩`, normalized.
    pub fn product(chi: &CVector<T>, phi: &CVector<T>) -> Result<Self> {
        if chi.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: chi.len(),
            });
        }
        let d = phi.len();
        let amps = CVector::from_fn(2 * d, |k, _| chi[k / d] * phi[k % d]);
        Self::from_amplitudes(amps, d)
    }

    /// `|tls⟩ ⊗ |anc_idx⟩`.
    pub fn basis(tls: usize, anc_idx: usize, anc_dim: usize) -> Self {
        let mut amps = CVector::zeros(2 * anc_dim);
        amps[tls * anc_dim + anc_idx] = re(T::one());
        Self {
            amplitudes: amps,
            anc_dim,
        }
    }

    pub fn amplitudes(&self) -> &CVector<T> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector<T> {
        self.amplitudes
    }

    pub fn anc_dim(&self) -> usize {
        self.anc_dim
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> T {
        self.amplitudes.norm()
    }

    /// Ancilla amplitudes conditioned on TLS level `tls` (unnormalized).
    pub fn branch(&self, tls: usize) -> CVector<T> {
        let d = self.anc_dim;
        CVector::from_fn(d, |m, _| self.amplitudes[tls * d + m])
    }

    /// `⟨self|op|self⟩`.
    pub fn expectation(&self, op: &CMatrix<T>) -> Cx<T> {
        crate::linalg::inner(&self.amplitudes, &(op * &self.amplitudes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, identity, max_abs};

    #[test]
    fn osc_matrix_elements() {
        let rep = osc_ladder::<f64>(2).unwrap();
        let k = rep.lowering();
        assert_eq!(k[(0, 1)].re, 1.0);
        assert!((k[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
        let nonzero = k.iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 2);
        let n = rep.number();
        for i in 0..3 {
            assert!((n[(i, i)].re - i as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn osc_rejects_zero_cut() {
        assert!(osc_ladder::<f64>(0).is_err());
        assert_eq!(osc_ladder::<f64>(2000).unwrap().dim(), 2001);
    }

    #[test]
    fn osc_commutator_truncation_artifact() {
        let rep = osc_ladder::<f64>(5).unwrap();
        let c = commutator(rep.lowering(), &rep.raising());
        let mut want = identity::<f64>(6);
        want[(5, 5)] = re(-5.0);
        assert!(max_abs(&(c - want)) < 1e-13);
    }

    #[test]
    fn spin_half_lowering() {
        let rep = spin_ladder::<f64>(SpinMagnitude::from_twice(1).unwrap()).unwrap();
        // labels ascending: index 0 is M=-1/2, index 1 is M=+1/2
        assert_eq!(rep.labels(), &[-0.5, 0.5]);
        let k = rep.lowering();
        assert!((k[(0, 1)].re - 1.0).abs() < 1e-15);
        assert_eq!(k[(1, 0)].norm(), 0.0);
    }

    #[test]
    fn spin_one_elements() {
        let rep = spin_ladder::<f64>(SpinMagnitude::integer(1).unwrap()).unwrap();
        let k = rep.lowering();
        assert!((k[(0, 1)].re - 2f64.sqrt()).abs() < 1e-15);
        assert!((k[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn spin_algebra_j20() {
        let j = SpinMagnitude::integer(20).unwrap();
        let rep = spin_ladder::<f64>(j).unwrap();
        assert_eq!(rep.dim(), 41);
        let (jx, jy, jz) = (rep.jx().unwrap(), rep.jy().unwrap(), rep.jz().unwrap());
        let i = Cx::new(0.0, 1.0);
        assert!(max_abs(&(commutator(&jx, &jy) - &jz * i)) <= 1e-12);
        assert!(max_abs(&(commutator(&jy, &jz) - &jx * i)) <= 1e-12);
        assert!(max_abs(&(commutator(&jz, &jx) - &jy * i)) <= 1e-12);
        let casimir = &jx * &jx + &jy * &jy + &jz * &jz;
        assert!(max_abs(&(casimir - identity::<f64>(41).scale(420.0))) <= 1e-10);
    }

    #[test]
    fn spin_magnitude_parsing() {
        assert_eq!("9/2".parse::<SpinMagnitude>().unwrap().twice(), 9);
        assert_eq!("4.5".parse::<SpinMagnitude>().unwrap().twice(), 9);
        assert_eq!("10".parse::<SpinMagnitude>().unwrap().twice(), 20);
        assert!("1/3".parse::<SpinMagnitude>().is_err());
        assert!("0".parse::<SpinMagnitude>().is_err());
        assert!(SpinMagnitude::from_ratio(3, 4).is_err());
        assert_eq!(SpinMagnitude::from_twice(9).unwrap().to_string(), "9/2");
    }

    #[test]
    fn custom_rejects_tiny_or_rectangular() {
        assert!(custom_ladder::<f64>(CMatrix::zeros(1, 1)).is_err());
        assert!(custom_ladder::<f64>(CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn embed_identity_and_block() {
        let id = joint_embed::<f64>(&identity(2), &identity(3)).unwrap();
        assert_eq!(id, identity(6));

        let rep = osc_ladder::<f64>(1).unwrap();
        let m = joint_embed(&tls::sigma_plus(), rep.lowering()).unwrap();
        // only the (e, g) block is populated
        for r in 0..4 {
            for c in 0..4 {
                if m[(r, c)].norm() > 0.0 {
                    assert!(r >= 2 && c < 2);
                }
            }
        }
        assert_eq!(m[(2, 1)].re, 1.0);
    }

    #[test]
    fn embed_rejects_bad_shapes() {
        assert!(joint_embed::<f64>(&identity(3), &identity(2)).is_err());
        assert!(joint_embed::<f64>(&identity(2), &CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn joint_state_normalizes() {
        let chi = CVector::from_vec(vec![re(3.0), re(4.0)]);
        let phi = CVector::from_vec(vec![re(1.0), re(1.0), re(0.0)]);
        let s = JointState::<f64>::product(&chi, &phi).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        assert!((s.amplitudes()[3].re - 0.8 / 2f64.sqrt()).abs() < 1e-15);
        assert!(JointState::<f64>::from_amplitudes(CVector::zeros(4), 2).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let rep = spin_ladder::<f32>(SpinMagnitude::integer(3).unwrap()).unwrap();
        let c = commutator(&rep.jx().unwrap(), &rep.jy().unwrap());
        let jz = rep.jz().unwrap() * Cx::new(0.0f32, 1.0);
        assert!(max_abs(&(c - jz)) < 1e-5);
    }
}
