use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Hilbert space: {0}")]
    InvalidSpec(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{what} index {value} out of range (allowed {min}..={max})")]
    IndexOutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("operands live on different Hilbert spaces (n_max {left} vs {right})")]
    SpecMismatch { left: usize, right: usize },

    #[error("not a valid density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("steady state is not unique (relative pivot {pivot_ratio:e})")]
    DegenerateSteadyState { pivot_ratio: f64 },

    #[error("steady-state residual {residual:e} exceeds bound {bound:e}")]
    SteadyStateResidual { residual: f64, bound: f64 },

    #[error("step size underflow at t = {t} (h = {h:e}); the problem is too stiff for the integrator")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integrated state left the density-matrix set at t = {t}: {reason}")]
    StateDrift { t: f64, reason: String },

    #[error("Fock truncation did not converge below n_max = {cap}")]
    TruncationCapExceeded { cap: usize },

    #[error("coherent state |alpha| = {alpha} needs more than {n_max} Fock levels (tail {tail:e})")]
    TruncationTail { alpha: f64, n_max: usize, tail: f64 },

    #[error("both g and omega23 vanish; dark-state coefficients are undefined")]
    CouplingsVanish,

    #[error("ground-state drive omega12 must be positive for the strong-drive analytics")]
    DriveVanishes,

    #[error("closed form is singular for these parameters: {0}")]
    Singular(&'static str),
}
