//! Driven interaction Hamiltonian `H = g1(σ₋⊗K† + σ₊⊗K) + g2·I⊗(K + K†)`
//! in the rotating frame, the linear ramp, and the symmetry operators.

use crate::error::{Error, Result};
use crate::hilbert::{joint_embed, tls, LadderKind, LadderRep};
use crate::linalg::{expm_hermitian, identity, symmetrize, CMatrix, SparseMatrix};
use crate::scalar::{cis, Real};

/// Which side of the critical drive `g2 = g1/2` a coupling point lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Sub,
    Critical,
    Super,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Sub => "sub",
            Regime::Critical => "critical",
            Regime::Super => "super",
        }
    }
}

/// Coupling strengths in units of the reference rate `g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingPoint<T: Real> {
    g1: T,
    g2: T,
}

impl<T: Real> CouplingPoint<T> {
    pub fn new(g1: T, g2: T) -> Result<Self> {
        if !(g1.is_finite() && g2.is_finite()) || g1 < T::zero() || g2 < T::zero() {
            return Err(Error::InvalidParameter(format!(
                "couplings must be finite and non-negative (g1={g1}, g2={g2})"
            )));
        }
        if g1 == T::zero() && g2 == T::zero() {
            return Err(Error::InvalidParameter("g1 and g2 cannot both vanish".into()));
        }
        Ok(Self { g1, g2 })
    }

    /// `g1 = (1-u)g`, `g2 = u·g/2`, so that `2g2/(g1+2g2) = u`.
    pub fn from_u(g: T, u: T) -> Result<Self> {
        if !(g > T::zero()) || !(u >= T::zero() && u <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "need g > 0 and u in [0, 1] (g={g}, u={u})"
            )));
        }
        Self::new((T::one() - u) * g, u * g / T::lit(2.0))
    }

    pub fn g1(&self) -> T {
        self.g1
    }

    pub fn g2(&self) -> T {
        self.g2
    }

    /// Transition parameter `2g2/(g1 + 2g2)`.
    pub fn u(&self) -> T {
        let two_g2 = self.g2 + self.g2;
        two_g2 / (self.g1 + two_g2)
    }

    /// `g2/g1`, infinite at `g1 = 0`.
    pub fn ratio(&self) -> T {
        if self.g1 == T::zero() {
            T::max_value().unwrap_or_else(|| T::lit(f64::MAX))
        } else {
            self.g2 / self.g1
        }
    }

    pub fn regime(&self) -> Regime {
        let two_g2 = self.g2 + self.g2;
        if two_g2 < self.g1 {
            Regime::Sub
        } else if two_g2 == self.g1 {
            Regime::Critical
        } else {
            Regime::Super
        }
    }
}

/// Linear ramp `g1(t) = (1 - t/T)g`, `g2(t) = (t/2T)g`, so `u(t) = t/T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RampSchedule<T: Real> {
    g: T,
    duration: T,
}

impl<T: Real> RampSchedule<T> {
    pub fn new(g: T, duration: T) -> Result<Self> {
        if !(g > T::zero() && duration > T::zero()) || !g.is_finite() || !duration.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ramp needs g > 0 and T > 0 (g={g}, T={duration})"
            )));
        }
        Ok(Self { g, duration })
    }

    pub fn g(&self) -> T {
        self.g
    }

    pub fn duration(&self) -> T {
        self.duration
    }

    pub fn u_at(&self, t: T) -> T {
        t / self.duration
    }

    pub fn at(&self, t: T) -> Result<CouplingPoint<T>> {
        if !(t >= T::zero() && t <= self.duration) {
            return Err(Error::OutOfSchedule {
                t: t.as_f64(),
                duration: self.duration.as_f64(),
            });
        }
        let s = t / self.duration;
        CouplingPoint::new((T::one() - s) * self.g, s * self.g / T::lit(2.0))
    }
}

/// Cached `σ₋⊗K† + σ₊⊗K` and `I⊗(K + K†)`; `H = g1·exchange + g2·drive`.
#[derive(Clone, Debug)]
pub struct InteractionParts<T: Real> {
    exchange: CMatrix<T>,
    drive: CMatrix<T>,
}

impl<T: Real> InteractionParts<T> {
    pub fn new(rep: &LadderRep<T>) -> Self {
        let k = rep.lowering();
        let kd = rep.raising();
        let exchange = joint_embed(&tls::sigma_minus(), &kd).expect("2x2 TLS operator")
            + joint_embed(&tls::sigma_plus(), k).expect("2x2 TLS operator");
        let drive = joint_embed(&identity(2), &(k + &kd)).expect("2x2 TLS operator");
        Self { exchange, drive }
    }

    pub fn exchange(&self) -> &CMatrix<T> {
        &self.exchange
    }

    pub fn drive(&self) -> &CMatrix<T> {
        &self.drive
    }

    pub fn assemble(&self, p: &CouplingPoint<T>) -> CMatrix<T> {
        let mut h = self.exchange.scale(p.g1()) + self.drive.scale(p.g2());
        symmetrize(&mut h);
        h
    }

    pub fn sparse(&self) -> (SparseMatrix<T>, SparseMatrix<T>) {
        (
            SparseMatrix::from_dense(&self.exchange),
            SparseMatrix::from_dense(&self.drive),
        )
    }
}

pub fn build_interaction<T: Real>(rep: &LadderRep<T>, p: &CouplingPoint<T>) -> CMatrix<T> {
    InteractionParts::new(rep).assemble(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryKind {
    /// `I⊗(-1)^{a†a}`; maps `E → -E`.
    OscParity,
    /// `I⊗exp(-iπJz)`; maps `E → -E`.
    SpinPiZ,
    /// `exp(-iπσx/2)⊗exp(-iπJx)`; commutes with `H`.
    Rx,
}

pub fn symmetry_op<T: Real>(rep: &LadderRep<T>, kind: SymmetryKind) -> Result<CMatrix<T>> {
    let mismatch = |what: &str| {
        Err(Error::InvalidParameter(format!(
            "{kind:?} requires {what} representation"
        )))
    };
    let pi = T::pi();
    match kind {
        SymmetryKind::OscParity => {
            let LadderKind::Oscillator { .. } = rep.kind() else {
                return mismatch("an oscillator");
            };
            let d = rep.dim();
            let parity = CMatrix::from_fn(d, d, |i, j| {
                if i != j {
                    crate::scalar::re(T::zero())
                } else if i % 2 == 0 {
                    crate::scalar::re(T::one())
                } else {
                    crate::scalar::re(-T::one())
                }
            });
            joint_embed(&identity(2), &parity)
        }
        SymmetryKind::SpinPiZ => {
            if rep.spin().is_none() {
                return mismatch("a spin");
            }
            let d = rep.dim();
            let labels = rep.labels();
            let rot = CMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    cis(-(pi * labels[i]))
                } else {
                    crate::scalar::re(T::zero())
                }
            });
            joint_embed(&identity(2), &rot)
        }
        SymmetryKind::Rx => {
            if rep.spin().is_none() {
                return mismatch("a spin");
            }
            let tls_half = tls::sigma_x::<T>().scale(T::lit(0.5));
            let tls_rot = expm_hermitian(&tls_half, pi);
            let anc_rot = expm_hermitian(&rep.jx()?, pi);
            joint_embed(&tls_rot, &anc_rot)
        }
    }
}
