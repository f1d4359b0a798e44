use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("level {level}: root bracket did not converge after {iterations} iterations")]
    NoConvergence { level: usize, iterations: usize },

    #[error("level search exhausted the energy window before finding level {level}")]
    LevelNotBracketed { level: usize },

    #[error("state index {index} out of range (basis has {len} states)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("argument {value} outside the validated domain [{min}, {max}] of {function}")]
    OutOfDomain {
        function: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("quadrature failed for {what}: estimated error {estimate:e} above tolerance {tol:e}")]
    Quadrature {
        what: String,
        estimate: f64,
        tol: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is not Hermitian: max |U - U^H| = {residual:e}")]
    NotHermitian { residual: f64 },

    #[error("step-doubling check failed: difference {diff:e} exceeds {tol:e}")]
    StepDoubling { diff: f64, tol: f64 },

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("grid inadequate: {0}")]
    Grid(String),
}
