//! Piecewise-sparse input design.
//!
//! Driving `y_K` to `y_f` means solving `y_f - C A^K x_0 = Phi u~` where
//! `Phi = C [A^{K-1} B | ... | B]` and `u~ = [u_1; ...; u_K]` must be
//! s-sparse block by block. The default horizon is `K = n`. The solver is
//! greedy piecewise orthogonal matching pursuit: pick the column with the
//! largest residual correlation among blocks that still have budget, refit
//! every selected coefficient by least squares, repeat.

use alloc::vec;
use alloc::vec::Vec;

use crate::controllability::block_controllability_matrix;
use crate::criteria::check_output_controllable;
use crate::error::Error;
use crate::matops::{least_squares_solve, Matrix, TolerancePolicy, Vector};
use crate::system::{simulate, LinearSystem, SparseInputSequence};

#[derive(Clone, Debug, PartialEq)]
pub struct DesignProblem<'a> {
    pub sys: &'a LinearSystem,
    pub x0: Vector,
    pub yf: Vector,
    pub s: usize,
    /// Stop once the residual is at or below this.
    pub tol: f64,
    /// Overrides the default horizon `K = n`.
    pub horizon: Option<usize>,
}

impl<'a> DesignProblem<'a> {
    pub fn new(sys: &'a LinearSystem, x0: Vector, yf: Vector, s: usize, tol: f64) -> Self {
        Self {
            sys,
            x0,
            yf,
            s,
            tol,
            horizon: None,
        }
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn horizon(&self) -> usize {
        self.horizon.unwrap_or(self.sys.output_dim())
    }

    fn validate(&self) -> Result<(), Error> {
        self.sys.check_sparsity(self.s)?;
        if self.x0.len() != self.sys.state_dim() {
            return Err(Error::DimensionMismatch {
                what: "initial state x0",
                expected: self.sys.state_dim(),
                found: self.x0.len(),
            });
        }
        if self.yf.len() != self.sys.output_dim() {
            return Err(Error::DimensionMismatch {
                what: "target output yf",
                expected: self.sys.output_dim(),
                found: self.yf.len(),
            });
        }
        if self.horizon() == 0 {
            return Err(Error::InvalidHorizon);
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::InvalidTolerance {
                name: "design tol",
                value: self.tol,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignSolution {
    pub inputs: SparseInputSequence,
    /// `||y_f - C A^K x_0 - Phi u~||_2`
    pub residual: f64,
    /// Selected input indices for each step `u_1..u_K`, ascending.
    pub selected_supports: Vec<Vec<usize>>,
    /// Residual norm before the first selection and after each one.
    pub residual_history: Vec<f64>,
    /// `false` when `rank(CW) < n`; the design was still attempted.
    pub output_controllable: bool,
}

/// `Phi = C [A^{n-1} B | ... | B]`, n x n m.
pub fn stacked_design_matrix(sys: &LinearSystem) -> Matrix {
    stacked_design_matrix_with_horizon(sys, sys.output_dim())
}

/// `Phi = C [A^{K-1} B | ... | B]`, n x K m; block `k` drives `u_{k+1}`.
pub fn stacked_design_matrix_with_horizon(sys: &LinearSystem, horizon: usize) -> Matrix {
    sys.c() * block_controllability_matrix(sys.a(), sys.b(), horizon)
}

fn free_response(sys: &LinearSystem, x0: &Vector, horizon: usize) -> Vector {
    let mut x = x0.clone();
    for _ in 0..horizon {
        x = sys.a() * x;
    }
    sys.c() * x
}

pub fn design_sparse_inputs(
    p: &DesignProblem<'_>,
    pol: &TolerancePolicy,
) -> Result<DesignSolution, Error> {
    p.validate()?;
    let sys = p.sys;
    let m = sys.input_dim();
    let horizon = p.horizon();
    let phi = stacked_design_matrix_with_horizon(sys, horizon);
    let target = &p.yf - free_response(sys, &p.x0, horizon);
    let output_controllable = check_output_controllable(sys, pol)?;

    let mut selected: Vec<usize> = Vec::new();
    let mut per_block = vec![0usize; horizon];
    let mut coeffs = Vector::zeros(0);
    let mut residual = target.clone();
    let mut history = vec![residual.norm()];
    let column_norms: Vec<f64> = phi.column_iter().map(|c| c.norm()).collect();
    let phi_scale = column_norms.iter().copied().fold(0.0, f64::max);

    while residual.norm() > p.tol {
        // Largest |<r, phi_j>|; ties go to the lowest block, then lowest column.
        let mut best: Option<(usize, f64)> = None;
        for (block, used) in per_block.iter().enumerate() {
            if *used >= p.s {
                continue;
            }
            for j in 0..m {
                let col = block * m + j;
                if selected.contains(&col) {
                    continue;
                }
                let corr = phi.column(col).dot(&residual).abs();
                if best.is_none_or(|(_, c)| corr > c) {
                    best = Some((col, corr));
                }
            }
        }
        let noise = pol.relative_rank_tol * phi_scale * residual.norm();
        let Some((col, corr)) = best else { break };
        if corr <= noise {
            break;
        }
        selected.push(col);
        per_block[col / m] += 1;
        let sub = phi.select_columns(selected.iter());
        coeffs = least_squares_solve(&sub, &target, pol)?;
        residual = &target - &sub * &coeffs;
        history.push(residual.norm());
    }

    let mut stacked = Vector::zeros(horizon * m);
    for (&col, &c) in selected.iter().zip(coeffs.iter()) {
        stacked[col] = c;
    }
    let mut supports = vec![Vec::new(); horizon];
    for &col in &selected {
        supports[col / m].push(col % m);
    }
    for s in supports.iter_mut() {
        s.sort_unstable();
    }
    let final_residual = (&target - &phi * &stacked).norm();
    if final_residual > p.tol {
        return Err(Error::TargetUnreachable {
            residual: final_residual,
            supports,
        });
    }
    let inputs = (0..horizon)
        .map(|k| stacked.rows(k * m, m).into_owned())
        .collect();
    Ok(DesignSolution {
        inputs: SparseInputSequence::new(inputs, p.s, m)?,
        residual: final_residual,
        selected_supports: supports,
        residual_history: history,
        output_controllable,
    })
}

/// Forward-simulates the designed inputs and returns `||y_K - y_f||_2`.
pub fn verify_design(
    sys: &LinearSystem,
    x0: &Vector,
    sol: &DesignSolution,
    yf: &Vector,
) -> Result<f64, Error> {
    if yf.len() != sys.output_dim() {
        return Err(Error::DimensionMismatch {
            what: "target output yf",
            expected: sys.output_dim(),
            found: yf.len(),
        });
    }
    let traj = simulate(sys, x0, &sol.inputs)?;
    Ok((traj.final_output() - yf).norm())
}
