use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("order n={0} is out of range (must be even, 2 <= n <= 64)")]
    OrderOutOfRange(usize),

    #[error("root refinement for n={n} stopped after {iterations} iterations with scaled residual {residual:e}")]
    IterationLimitExceeded {
        n: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("evaluation point hits a pole")]
    PoleHit,

    #[error("digit model condition violated: gamma <= n*10^(1-D) for n={n}, D={digits}")]
    ConditionViolated { n: u64, digits: u32 },

    #[error("singular system: pivot {index} underflows")]
    SingularSystem { index: usize },

    #[error("eigensolver did not converge within {0} iterations")]
    ConvergenceFailure(usize),

    #[error("order n={n} does not exceed 2*rho={:.6}; a priori bound not guaranteed", 2.0 * rho)]
    OrderTooSmall { n: usize, rho: f64 },

    #[error("spectrum is not certified non-positive (upper bound {0:e})")]
    SpectrumNotNonPositive(f64),

    #[error("shift c={0} overflows exp(c) in binary64")]
    Overflow(f64),

    #[error("bad matrix spec: {0}")]
    BadSpec(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: deviation {deviation:e} exceeds {allowed:e}")]
    NotHermitian { deviation: f64, allowed: f64 },
}

impl Error {
    /// Process exit code: 2 bad arguments, 3 invariant violation, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::OrderOutOfRange(_)
            | Error::BadSpec(_)
            | Error::ConditionViolated { .. }
            | Error::Overflow(_)
            | Error::DimensionMismatch(_) => 2,
            Error::Io(_) => 4,
            _ => 3,
        }
    }
}
