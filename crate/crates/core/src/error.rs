use thiserror::Error;

use crate::anf::Monomial;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable index x{index} is out of range for a {n}-bit register")]
    InvalidMonomial { index: usize, n: usize },

    #[error("polynomial exceeds the term cap of {cap} monomials")]
    Capacity { cap: usize },

    #[error("register length {0} is outside 2..=64")]
    InvalidLength(usize),

    #[error("expected {expected} feedback functions, got {got}")]
    FunctionCount { expected: usize, got: usize },

    #[error("feedback function of bit {bit} is not singular: g_{bit} depends on x{var}")]
    Singularity { bit: usize, var: usize },

    #[error("state has {got} bits, register has {expected}")]
    StateLength { expected: usize, got: usize },

    #[error("register lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("{what} exceeds the limit of {limit}")]
    ResourceLimit { what: &'static str, limit: u64 },

    #[error("vertex v{vertex} cannot be substituted: predecessors {predecessors:?}")]
    SubstitutionPrecondition {
        vertex: usize,
        predecessors: Vec<usize>,
    },

    #[error("no recurrence for bit {bit}: {reason}")]
    NotDerivable { bit: usize, reason: String },

    #[error("shift rejected: {0}")]
    Shift(#[from] ShiftRejection),

    #[error("register is not in Fibonacci form (terminal bit {tau}, expected {expected})")]
    NotFibonacci { tau: usize, expected: usize },

    #[error("register is not uniform: g_{bit} depends on x{var} above the terminal bit {tau}")]
    NotUniform { bit: usize, var: usize, tau: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Why a single-term shift could not be applied.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShiftRejection {
    #[error("destination bit {to} must be below source bit {from}")]
    NotDownward { from: usize, to: usize },

    #[error("bit index {bit} out of range")]
    BitOutOfRange { bit: usize },

    #[error("term {term} is not a product-term of g_{from}")]
    TermMissing { from: usize, term: Monomial },

    #[error("the constant term is never shifted")]
    ConstantTerm,

    #[error("shifted term {shifted} would cancel an existing term of g_{to}")]
    Collision { to: usize, shifted: Monomial },

    #[error("shifted term {shifted} depends on x{var}, which g_{to} must not contain")]
    BreaksSingularity {
        to: usize,
        shifted: Monomial,
        var: usize,
    },

    #[error("b >= a - alpha_min(p) violated: {to} < {from} - {alpha_min}")]
    MinIndexCondition {
        from: usize,
        to: usize,
        alpha_min: usize,
    },

    #[error("source register is not uniform")]
    SourceNotUniform,

    #[error("term {term} left in g_{bit} depends on x{var} > {to}; it must be shifted together with the moved term")]
    StrandedSibling {
        bit: usize,
        term: Monomial,
        var: usize,
        to: usize,
    },

    #[error("after the shift g_{bit} depends on x{var} > {to}")]
    BoundExceeded { bit: usize, var: usize, to: usize },
}
