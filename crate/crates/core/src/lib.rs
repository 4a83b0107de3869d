//! Adiabatic preparation of squeezed ancilla states by a driven two-level system.
//!
//! The ancilla is any ladder representation: a truncated oscillator, an
//! integer or half-integer collective spin, or a user-supplied lowering
//! operator. Everything is generic over the real scalar (`f32` or `f64`);
//! the `*F64` aliases below fix it to double precision.

pub mod error;
pub mod evolve;
pub mod hamiltonian;
pub mod hilbert;
pub mod linalg;
pub mod phase_space;
pub mod scalar;
pub mod spectra;
pub mod states;

pub use error::{Error, Result};
pub use evolve::{
    fidelity, propagate, reduced_density, von_neumann_entropy, EvolveOptions, Observer,
    Propagator, Schedule, Snapshot, Subsystem, Trajectory,
};
pub use hamiltonian::{
    build_interaction, symmetry_op, CouplingPoint, InteractionParts, RampSchedule, Regime,
    SymmetryKind,
};
pub use hilbert::{
    custom_ladder, joint_embed, osc_ladder, spin_ladder, JointState, LadderKind, LadderRep,
    SpinMagnitude,
};
pub use linalg::{CMatrix, CVector, HermitianEigen, SparseMatrix};
pub use phase_space::{
    husimi_of_joint, husimi_sphere, wigner, wigner_of_joint, PhaseSpaceMap, SphereMesh, WignerGrid,
};
pub use scalar::{Cx, Real};
pub use spectra::{analytic_energy, eig_herm, spectrum_point, sweep, SpectrumPoint, SpectrumSweep};
pub use states::{SpinZeroModes, SymmetrizedPair, ZeroEnergyAnsatz};

pub type LadderRepF64 = LadderRep<f64>;
pub type JointStateF64 = JointState<f64>;
pub type CouplingPointF64 = CouplingPoint<f64>;
pub type RampScheduleF64 = RampSchedule<f64>;
pub type CMatrixF64 = CMatrix<f64>;
pub type CVectorF64 = CVector<f64>;
pub type SpectrumSweepF64 = SpectrumSweep<f64>;
pub type SpinZeroModesF64 = SpinZeroModes<f64>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type ScheduleF64 = Schedule<f64>;
