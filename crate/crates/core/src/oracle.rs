//! Brute-force verifier of output s-sparse controllability by support
//! enumeration.
//!
//! A horizon-K support choice `(S_1, ..., S_K)` certifies controllability when
//! `rank(C [A^{K-1} B_{S_1} | ... | B_{S_K}]) = n`. The search builds that
//! column space from the right: step `j` appends the block `C A^j B_{S_{K-j}}`,
//! and since that block depends only on `j` and the support, the state after
//! `j` steps is just the output subspace spanned so far. States reached at the
//! same depth that span the same subspace are merged, which turns the
//! `C(m, s)^K` tuple explosion into a walk over a small set of subspaces.
//!
//! Breadth-first order gives the smallest horizon. Within a depth, frontier
//! states are kept in order of their lexicographically smallest support
//! history `(S_K, S_{K-1}, ...)` (supports listed from the last input
//! backwards), so the first full-rank state found carries the
//! lexicographically smallest witness in that order.

use alloc::vec;
use alloc::vec::Vec;

use crate::controllability::kalman_decompose;
use crate::error::Error;
use crate::matops::{
    matrix_powers, numerical_rank, orthonormal_range_basis, spectral_norm, Matrix, TolerancePolicy,
};
use crate::system::LinearSystem;

/// Default cap on distinct subspace states visited by one search.
pub const DEFAULT_STATE_BUDGET: usize = 10_000_000;
/// Upper limit applied to [`default_horizon`].
pub const MAX_DEFAULT_HORIZON: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OracleStatus {
    Controllable,
    /// No witness up to the explored horizon. This is not a proof of
    /// uncontrollability at longer horizons.
    NotWithinHorizon,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleVerdict {
    pub status: OracleStatus,
    pub horizon_found: Option<usize>,
    /// `S_1..S_K` in time order, 0-based input indices.
    pub witness_supports: Option<Vec<Vec<usize>>>,
    pub explored_horizon: usize,
    pub states_visited: usize,
}

impl OracleVerdict {
    pub fn is_controllable(&self) -> bool {
        self.status == OracleStatus::Controllable
    }
}

/// Constructive horizon `r + r * ceil(m/s) * rank(A~^r)` with `r = rank(W)`,
/// floored at 1 and capped at [`MAX_DEFAULT_HORIZON`].
pub fn default_horizon(
    sys: &LinearSystem,
    s: usize,
    pol: &TolerancePolicy,
) -> Result<usize, Error> {
    sys.check_sparsity(s)?;
    let form = kalman_decompose(sys, pol)?;
    let r = form.rank;
    if r == 0 {
        return Ok(1);
    }
    let a_r = matrix_powers(&form.a_reduced, r + 1)
        .pop()
        .expect("r + 1 powers");
    let scale = libm::pow(spectral_norm(&form.a_reduced), r as f64);
    let rank_ar = crate::matops::numerical_rank_scaled(&a_r, scale, pol);
    let m = sys.input_dim();
    let horizon = r.saturating_add(r.saturating_mul(m.div_ceil(s)).saturating_mul(rank_ar));
    Ok(horizon.clamp(1, MAX_DEFAULT_HORIZON))
}

/// All `k`-subsets of `0..m` in lexicographic order.
pub fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < m - k + i) else {
            return out;
        };
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

struct Node {
    basis: Matrix,
    /// Support choice per step, step 0 = last input `S_K`.
    history: Vec<u32>,
}

fn same_span(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    if a.ncols() != b.ncols() {
        return false;
    }
    if a.ncols() == 0 {
        return true;
    }
    let leak = b - a * (a.transpose() * b);
    leak.amax() <= tol
}

/// `C A^j B` for `j < horizon`, with columns normalized so that subspace
/// extension sees unit-scale directions. Columns at the noise level of the
/// product are zeroed.
fn unit_blocks(sys: &LinearSystem, horizon: usize, pol: &TolerancePolicy) -> Vec<Matrix> {
    let norm_a = spectral_norm(sys.a());
    let base = spectral_norm(sys.c()) * spectral_norm(sys.b());
    let mut out = Vec::with_capacity(horizon);
    let mut ab = sys.b().clone();
    let mut scale = base;
    for j in 0..horizon {
        if j > 0 {
            ab = sys.a() * &ab;
            scale *= norm_a;
            // Column directions are all that matter; rescale to avoid overflow.
            let peak = ab.amax();
            if peak > 0.0 {
                ab /= peak;
                scale /= peak;
            }
        }
        let mut block = sys.c() * &ab;
        let floor = pol.rank_threshold(block.nrows(), sys.state_dim(), scale);
        for mut col in block.column_iter_mut() {
            let norm = col.norm();
            if norm <= floor || norm == 0.0 {
                col.fill(0.0);
            } else {
                col /= norm;
            }
        }
        out.push(block);
    }
    out
}

fn extend(basis: &Matrix, block: &Matrix, support: &[usize], pol: &TolerancePolicy) -> Matrix {
    let n = basis.nrows();
    let mut stacked = Matrix::zeros(n, basis.ncols() + support.len());
    stacked.columns_mut(0, basis.ncols()).copy_from(basis);
    for (k, &j) in support.iter().enumerate() {
        stacked.set_column(basis.ncols() + k, &block.column(j));
    }
    orthonormal_range_basis(&stacked, pol).0
}

/// Re-verifies a time-ordered witness `S_1..S_K` with a direct rank test.
pub fn witness_rank(sys: &LinearSystem, supports: &[Vec<usize>], pol: &TolerancePolicy) -> usize {
    let k = supports.len();
    // Powers rescaled by a positive scalar each step; rank is unaffected.
    let mut powers = Vec::with_capacity(k);
    let mut p = Matrix::identity(sys.state_dim(), sys.state_dim());
    for _ in 0..k {
        powers.push(p.clone());
        p = sys.a() * p;
        let peak = p.amax();
        if peak > 0.0 {
            p /= peak;
        }
    }
    let cols: usize = supports.iter().map(Vec::len).sum();
    let mut m = Matrix::zeros(sys.output_dim(), cols);
    let mut at = 0;
    for (t, support) in supports.iter().enumerate() {
        let power = &powers[k - 1 - t];
        let cab = sys.c() * power * sys.b();
        let noise = pol.rank_threshold(
            sys.output_dim(),
            sys.state_dim(),
            spectral_norm(sys.c()) * spectral_norm(power) * spectral_norm(sys.b()),
        );
        for &j in support {
            let col = cab.column(j);
            let norm = col.norm();
            if norm > noise {
                m.set_column(at, &(col / norm));
            }
            at += 1;
        }
    }
    numerical_rank(&m, pol)
}

pub fn brute_force_check(
    sys: &LinearSystem,
    s: usize,
    max_horizon: usize,
    pol: &TolerancePolicy,
) -> Result<OracleVerdict, Error> {
    brute_force_check_with_budget(sys, s, max_horizon, DEFAULT_STATE_BUDGET, pol)
}

pub fn brute_force_check_with_budget(
    sys: &LinearSystem,
    s: usize,
    max_horizon: usize,
    state_budget: usize,
    pol: &TolerancePolicy,
) -> Result<OracleVerdict, Error> {
    sys.check_sparsity(s)?;
    if max_horizon == 0 {
        return Err(Error::InvalidHorizon);
    }
    let n = sys.output_dim();
    let supports = combinations(sys.input_dim(), s);
    let blocks = unit_blocks(sys, max_horizon, pol);

    let mut frontier = vec![Node {
        basis: Matrix::zeros(n, 0),
        history: Vec::new(),
    }];
    let mut states_visited = 1;

    for depth in 1..=max_horizon {
        let block = &blocks[depth - 1];
        // Frontier states bucketed by dimension for merging.
        let mut next: Vec<Node> = Vec::new();
        let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for node in &frontier {
            for (ci, support) in supports.iter().enumerate() {
                let basis = extend(&node.basis, block, support, pol);
                let dim = basis.ncols();
                let mut history = node.history.clone();
                history.push(ci as u32);
                if dim == n {
                    let witness: Vec<Vec<usize>> = history
                        .iter()
                        .rev()
                        .map(|&c| supports[c as usize].clone())
                        .collect();
                    let rank = witness_rank(sys, &witness, pol);
                    if rank != n {
                        return Err(Error::WitnessRejected { rank, n });
                    }
                    return Ok(OracleVerdict {
                        status: OracleStatus::Controllable,
                        horizon_found: Some(depth),
                        witness_supports: Some(witness),
                        explored_horizon: depth,
                        states_visited: states_visited + next.len() + 1,
                    });
                }
                let duplicate = by_dim[dim]
                    .iter()
                    .any(|&i| same_span(&next[i].basis, &basis, pol.residual_tol));
                if !duplicate {
                    by_dim[dim].push(next.len());
                    next.push(Node { basis, history });
                    if states_visited + next.len() > state_budget {
                        return Err(Error::BudgetExceeded {
                            cap: state_budget,
                            depth,
                        });
                    }
                }
            }
        }
        states_visited += next.len();
        frontier = next;
    }

    Ok(OracleVerdict {
        status: OracleStatus::NotWithinHorizon,
        horizon_found: None,
        witness_supports: None,
        explored_horizon: max_horizon,
        states_visited,
    })
}
