use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::system::ValidationIssue;

/// Issues collected by [`crate::system::validate`], displayed as one line.
#[derive(Clone, Debug, PartialEq)]
pub struct IssueList(pub Vec<ValidationIssue>);

impl fmt::Display for IssueList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(IssueList),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("sparsity level {s} is outside 1..={m}")]
    InvalidSparsity { s: usize, m: usize },

    #[error("tolerance {name} must be finite and positive, got {value}")]
    InvalidTolerance { name: &'static str, value: f64 },

    #[error("horizon must be at least 1")]
    InvalidHorizon,

    #[error(
        "input at step {step} has {nonzeros} nonzero entries, more than the sparsity level {s}"
    )]
    InputTooDense {
        step: usize,
        nonzeros: usize,
        s: usize,
    },

    #[error("basis is not orthonormal (max |Q^T Q - I| = {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("rank paths disagree at power {index}: rank(C A^i W) = {direct}, rank(C~ A~^i) = {reduced}; the system is ill-conditioned for the chosen tolerance")]
    NumericalInconsistency {
        index: usize,
        direct: usize,
        reduced: usize,
    },

    #[error("eigenvalue computation did not converge")]
    EigenvalueFailure,

    #[error("oracle budget exceeded: more than {cap} distinct subspace states by horizon {depth}")]
    BudgetExceeded { cap: usize, depth: usize },

    #[error("oracle witness failed re-verification (rank {rank} < n = {n})")]
    WitnessRejected { rank: usize, n: usize },

    #[error("greedy piecewise OMP did not reach the target (residual {residual:e}); the heuristic failed, which does not prove the target unreachable")]
    TargetUnreachable {
        residual: f64,
        supports: Vec<Vec<usize>>,
    },

    #[error("report invariant violated: {0}")]
    ReportInvariant(String),
}
