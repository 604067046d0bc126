use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("inadmissible Matsubara data: {0}")]
    Inadmissible(String),
    #[error("no admissible Matsubara data after {0} draws")]
    RetryBudget(usize),
    #[error("pole of the auxiliary function at {0}")]
    Pole(String),
    #[error("quadrature failed at node {index}: {reason}")]
    Quadrature { index: i64, reason: String },
    #[error("schur engine invariant violated: {0}")]
    Schur(String),
    #[error("inconsistent system: residual row at equation {row}")]
    Inconsistent { row: usize },
    #[error("rank {rank} below expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("thermal check failed: {0}")]
    ThermalCheck(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
