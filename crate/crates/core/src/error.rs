use thiserror::Error;

use crate::exact::OptResult;
use crate::model::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {}", join_violations(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("degenerate instance: smallest task size is zero")]
    DegenerateInstance,

    #[error("optimal makespan must be positive, got {0}")]
    NonPositiveOpt(f64),

    #[error("malformed instance file: {0}")]
    Parse(String),

    #[error("enumeration refused: {m}^{n} assignments exceeds cap {cap}")]
    EnumerationCap { m: usize, n: usize, cap: u64 },

    /// The search stopped before proving optimality. The best schedule found
    /// so far is carried along but must not be treated as OPT.
    #[error("node budget of {budget} exhausted before optimality was proven (incumbent {})", .incumbent.makespan)]
    BudgetExhausted {
        budget: u64,
        incumbent: Box<OptResult>,
    },

    #[error("polynomial must have degree >= 1")]
    ZeroDegree,

    #[error("m must be >= 1")]
    ZeroProcessors,

    #[error("no positive root found for polynomial")]
    NoPositiveRoot,

    #[error("{what} out of supported range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("worst-case construction failed for m = {m}: {reason}")]
    ConstructionFailed { m: usize, reason: String },

    #[error("instance is not normalized: {0}")]
    NotNormalized(String),

    #[error("mapping enumeration refused: {targets}^{items} mappings exceeds cap {cap}")]
    MappingCap { items: usize, targets: usize, cap: u64 },

    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
