//! Output controllability of discrete-time linear systems
//! `x_k = A x_{k-1} + B u_k`, `y_k = C x_k` when every input vector `u_k` may
//! carry at most `s` nonzero entries, with the support free to change over
//! time.
//!
//! The crate provides
//!
//! * rank-based necessary and sufficient conditions built on the metric
//!   `R_i = rank(C A^i W) - rank(C A^{i+1} W)` and the bracket they give on
//!   the minimum sparsity level ([`criteria`]),
//! * the classical comparison tests (Kalman output rank, PBH with sparsity,
//!   eigen-conditions on `C [lambda I - A, B]`),
//! * an exhaustive support-enumeration oracle for small systems ([`oracle`]),
//! * a piecewise orthogonal matching pursuit input designer ([`design`]).
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod controllability;
pub mod criteria;
pub mod design;
pub mod error;
pub mod fixtures;
pub mod matops;
pub mod oracle;
pub mod system;

pub use controllability::{
    controllability_matrix, kalman_decompose, rank_profile, KalmanForm, RankProfile, Ratio,
};
pub use criteria::{
    full_report, Analysis, ControllabilityReport, SparsityInterval, SparsityVerdict,
};
pub use design::{design_sparse_inputs, verify_design, DesignProblem, DesignSolution};
pub use error::Error;
pub use matops::{Matrix, TolerancePolicy, Vector};
pub use oracle::{brute_force_check, default_horizon, OracleStatus, OracleVerdict};
pub use system::{simulate, sparsity_of, LinearSystem, SparseInputSequence, Trajectory};
