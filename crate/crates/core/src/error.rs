use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("level mismatch: {left} vs {right}")]
    LevelMismatch { left: u32, right: u32 },
    #[error("level {from} does not divide {to}")]
    NotDivisible { from: u32, to: u32 },
    #[error("weight mismatch: {left} vs {right}")]
    WeightMismatch { left: i64, right: i64 },
    #[error("nonholomorphic square: u^2 term does not vanish")]
    NonholomorphicSquare,
    #[error("invalid weight {0}")]
    InvalidWeight(i64),
    #[error("not absolutely convergent at weight {0}")]
    NotAbsolutelyConvergent(i64),
    #[error("pole of wp: torsion point is zero")]
    PoleOfWp,
    #[error("expression has a nonzero polar part")]
    PolarInput,
    #[error("insufficient precision: have {have}, need {need}")]
    InsufficientPrecision { have: usize, need: usize },
    #[error("inexact division in {0}")]
    InexactDivision(String),
    #[error("determinant must be positive")]
    NonPositiveDeterminant,
    #[error("no convergence within budget (error estimate {estimate:e})")]
    NonConvergence { estimate: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
