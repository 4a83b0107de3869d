use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("coupling g2/g1 = {ratio} is outside the {regime} regime ({boundary})")]
    Regime {
        ratio: f64,
        regime: &'static str,
        boundary: &'static str,
    },

    #[error("time {t} outside schedule window [0, {duration}]")]
    OutOfSchedule { t: f64, duration: f64 },

    #[error("Fock truncation too small: tail population {tail:.3e} beyond n_cut-2")]
    TruncationTooSmall { tail: f64 },

    #[error("no normalizable solution: {0}")]
    NoSolution(String),

    #[error("degenerate construction: {0}")]
    Degenerate(String),

    #[error(
        "leakage guard tripped at t={t:.6} (u={u:.6}): top-level population {population:.3e} > {threshold:.1e}"
    )]
    Leakage {
        t: f64,
        u: f64,
        population: f64,
        threshold: f64,
    },

    #[error("time step dt*g = {dt_g} exceeds the limit {limit}")]
    StepTooLarge { dt_g: f64, limit: f64 },

    #[error("phase-space grid too narrow: boundary |W| = {boundary:.3e}")]
    GridTooNarrow { boundary: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
