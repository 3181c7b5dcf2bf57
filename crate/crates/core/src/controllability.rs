//! Controllability matrix, Kalman decomposition and the rank profile
//! `rank(C A^i W)` with its gap metric `R_i`.

use alloc::vec::Vec;

use crate::error::Error;
use crate::matops::{
    hstack, matrix_powers, numerical_rank, numerical_rank_scaled, orthonormal_complement,
    orthonormal_range_basis, spectral_norm, Matrix, TolerancePolicy,
};
use crate::system::LinearSystem;

/// `[A^{K-1} B | A^{K-2} B | ... | B]`, highest power leftmost.
pub fn block_controllability_matrix(a: &Matrix, b: &Matrix, horizon: usize) -> Matrix {
    let powers = matrix_powers(a, horizon);
    let blocks: Vec<Matrix> = powers.iter().rev().map(|p| p * b).collect();
    hstack(a.nrows(), &blocks)
}

/// `W = [A^{N-1} B | ... | B]`, N x N m.
pub fn controllability_matrix(sys: &LinearSystem) -> Matrix {
    block_controllability_matrix(sys.a(), sys.b(), sys.state_dim())
}

/// Orthogonal split of the state space into the reachable subspace
/// `range(W)` (basis `Q~`) and its complement (basis `R`), with the reduced
/// triple `A~ = Q~^T A Q~`, `B~ = Q~^T B`, `C~ = C Q~`.
#[derive(Clone, Debug, PartialEq)]
pub struct KalmanForm {
    pub basis: Matrix,
    pub complement: Matrix,
    pub a_reduced: Matrix,
    pub b_reduced: Matrix,
    pub c_reduced: Matrix,
    pub rank: usize,
}

impl KalmanForm {
    /// Checks the decomposition identities against the original system:
    /// reduced matrices, `range(W) = range(Q~)`, the zero block `R^T A Q~`
    /// and controllability of `(A~, B~)`.
    pub fn verify(&self, sys: &LinearSystem, pol: &TolerancePolicy) -> Result<(), &'static str> {
        let tol = pol.residual_tol;
        let q = &self.basis;
        let scale_a = spectral_norm(sys.a()).max(1.0);
        if (q.transpose() * sys.a() * q - &self.a_reduced).amax() > tol * scale_a {
            return Err("A~ != Q~^T A Q~");
        }
        if (q.transpose() * sys.b() - &self.b_reduced).amax()
            > tol * spectral_norm(sys.b()).max(1.0)
        {
            return Err("B~ != Q~^T B");
        }
        if (sys.c() * q - &self.c_reduced).amax() > tol * spectral_norm(sys.c()).max(1.0) {
            return Err("C~ != C Q~");
        }
        let w = controllability_matrix(sys);
        let n = sys.state_dim();
        let leak = (Matrix::identity(n, n) - q * q.transpose()) * &w;
        if spectral_norm(&leak) > tol * spectral_norm(&w).max(1.0) {
            return Err("range(W) is not spanned by Q~");
        }
        if self.complement.ncols() > 0 {
            let block = self.complement.transpose() * sys.a() * q;
            if block.ncols() > 0 && spectral_norm(&block) > tol * scale_a {
                return Err("R^T A Q~ is not zero");
            }
        }
        if self.rank > 0 {
            let w_reduced =
                block_controllability_matrix(&self.a_reduced, &self.b_reduced, self.rank);
            if numerical_rank(&w_reduced, pol) != self.rank {
                return Err("(A~, B~) is not controllable");
            }
        }
        Ok(())
    }
}

pub fn kalman_decompose(sys: &LinearSystem, pol: &TolerancePolicy) -> Result<KalmanForm, Error> {
    let w = controllability_matrix(sys);
    let (basis, rank) = orthonormal_range_basis(&w, pol);
    let complement = orthonormal_complement(&basis, pol)?;
    let a_reduced = basis.transpose() * sys.a() * &basis;
    let b_reduced = basis.transpose() * sys.b();
    let c_reduced = sys.c() * &basis;
    Ok(KalmanForm {
        basis,
        complement,
        a_reduced,
        b_reduced,
        c_reduced,
        rank,
    })
}

/// `ranks[i] = rank(C A^i W)` for `i = 0..=N` and `metric[i] = ranks[i] - ranks[i+1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankProfile {
    pub ranks: Vec<usize>,
    pub metric: Vec<usize>,
}

/// Nonnegative fraction, kept exact so that `bound <= s` has no rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ratio {
    pub numerator: usize,
    pub denominator: usize,
}

impl Ratio {
    pub fn new(numerator: usize, denominator: usize) -> Self {
        assert!(denominator > 0, "zero denominator");
        let g = gcd(numerator, denominator);
        Self {
            numerator: numerator / g,
            denominator: denominator / g,
        }
    }

    pub fn ceil(&self) -> usize {
        self.numerator.div_ceil(self.denominator)
    }

    pub fn le_int(&self, s: usize) -> bool {
        self.numerator <= s * self.denominator
    }

    pub fn as_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        (self.numerator * other.denominator).cmp(&(other.numerator * self.denominator))
    }
}

impl core::fmt::Display for Ratio {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.denominator == 1 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator)
        }
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    if a == 0 {
        1
    } else {
        a
    }
}

impl RankProfile {
    /// `max_i R_i` over `0 <= i <= N-1`, with the first maximizing index.
    pub fn max_metric(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for (i, &r) in self.metric.iter().enumerate() {
            if r > best.0 {
                best = (r, i);
            }
        }
        best
    }

    /// `max_i (R_0 + ... + R_i) / (i + 1)` with the first maximizing index.
    pub fn max_average(&self) -> (Ratio, usize) {
        let mut best = (Ratio::new(0, 1), 0);
        let mut prefix = 0;
        for (i, &r) in self.metric.iter().enumerate() {
            prefix += r;
            let avg = Ratio::new(prefix, i + 1);
            if avg > best.0 {
                best = (avg, i);
            }
        }
        best
    }

    pub fn rank_cw(&self) -> usize {
        self.ranks[0]
    }

    pub fn rank_caw(&self) -> usize {
        self.ranks.get(1).copied().unwrap_or(self.ranks[0])
    }
}

/// Direct ranks `rank(C A^i W)`, i = 0..=N.
pub(crate) fn direct_ranks(sys: &LinearSystem, pol: &TolerancePolicy) -> Vec<usize> {
    let n_state = sys.state_dim();
    let w = controllability_matrix(sys);
    let norm_a = spectral_norm(sys.a());
    let norm_c = spectral_norm(sys.c());
    let norm_w = spectral_norm(&w);
    let mut ranks = Vec::with_capacity(n_state + 1);
    let mut aw = w;
    let mut scale = norm_c * norm_w;
    for i in 0..=n_state {
        if i > 0 {
            aw = sys.a() * &aw;
            scale *= norm_a;
        }
        ranks.push(numerical_rank_scaled(&(sys.c() * &aw), scale, pol));
    }
    ranks
}

/// Reduced-form ranks `rank(C~ A~^i)`, i = 0..=N, with the noise floor taken
/// from the original `A` and `C`.
pub(crate) fn reduced_ranks(
    form: &KalmanForm,
    sys: &LinearSystem,
    pol: &TolerancePolicy,
) -> Vec<usize> {
    let n_state = sys.state_dim();
    let norm_a = spectral_norm(sys.a());
    let mut scale = spectral_norm(sys.c());
    let mut ca = form.c_reduced.clone();
    let mut ranks = Vec::with_capacity(n_state + 1);
    for i in 0..=n_state {
        if i > 0 {
            ca = &ca * &form.a_reduced;
            scale *= norm_a;
        }
        ranks.push(numerical_rank_scaled(&ca, scale, pol));
    }
    ranks
}

/// Rank profile computed along both routes; they must agree entry for entry.
pub fn rank_profile(sys: &LinearSystem, pol: &TolerancePolicy) -> Result<RankProfile, Error> {
    let form = kalman_decompose(sys, pol)?;
    rank_profile_with_form(sys, &form, pol)
}

pub(crate) fn rank_profile_with_form(
    sys: &LinearSystem,
    form: &KalmanForm,
    pol: &TolerancePolicy,
) -> Result<RankProfile, Error> {
    let direct = direct_ranks(sys, pol);
    let reduced = reduced_ranks(form, sys, pol);
    for (index, (&d, &r)) in direct.iter().zip(&reduced).enumerate() {
        if d != r {
            return Err(Error::NumericalInconsistency {
                index,
                direct: d,
                reduced: r,
            });
        }
    }
    let mut metric = Vec::with_capacity(sys.state_dim());
    for i in 0..sys.state_dim() {
        // A rank increase along i is impossible in exact arithmetic.
        let gap = direct[i]
            .checked_sub(direct[i + 1])
            .ok_or(Error::NumericalInconsistency {
                index: i + 1,
                direct: direct[i + 1],
                reduced: reduced[i + 1],
            })?;
        metric.push(gap);
    }
    Ok(RankProfile {
        ranks: direct,
        metric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use nalgebra::dmatrix;

    fn pol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn nilpotent_collapse() {
        let b = dmatrix![1.0; 2.0; 3.0];
        let sys =
            LinearSystem::new(Matrix::zeros(3, 3), b.clone(), Matrix::identity(3, 3)).unwrap();
        let w = controllability_matrix(&sys);
        assert_eq!(w.shape(), (3, 3));
        assert_eq!(w.columns(0, 2).amax(), 0.0);
        assert_eq!(w.column(2), b.column(0));
    }

    #[test]
    fn identity_dynamics_repeat_b() {
        let b = dmatrix![1.0, 0.0; 0.0, 0.0; 1.0, 0.0];
        let sys =
            LinearSystem::new(Matrix::identity(3, 3), b.clone(), Matrix::identity(3, 3)).unwrap();
        let w = controllability_matrix(&sys);
        for k in 0..3 {
            assert_eq!(w.columns(2 * k, 2), b);
        }
        assert_eq!(numerical_rank(&w, &pol()), numerical_rank(&b, &pol()));
    }

    #[test]
    fn block_order_is_highest_power_first() {
        let a = dmatrix![0.0, 1.0; 0.0, 0.0];
        let b = dmatrix![0.0; 1.0];
        let sys = LinearSystem::new(a, b, Matrix::identity(2, 2)).unwrap();
        // A b = e1 leftmost, b = e2 rightmost.
        assert_eq!(controllability_matrix(&sys), Matrix::identity(2, 2));
    }

    #[test]
    fn zero_input_gives_degenerate_form() {
        let sys = LinearSystem::new(
            Matrix::identity(2, 2),
            Matrix::zeros(2, 1),
            Matrix::identity(2, 2),
        )
        .unwrap();
        let form = kalman_decompose(&sys, &pol()).unwrap();
        assert_eq!(form.rank, 0);
        assert_eq!(form.basis.shape(), (2, 0));
        assert_eq!(form.complement.shape(), (2, 2));
        assert_eq!(form.a_reduced.shape(), (0, 0));
        form.verify(&sys, &pol()).unwrap();
        let profile = rank_profile(&sys, &pol()).unwrap();
        assert!(profile.ranks.iter().all(|&r| r == 0));
    }

    #[test]
    fn fully_controllable_form_is_similar() {
        let a = dmatrix![1.0, 2.0; -1.0, 0.5];
        let sys = LinearSystem::new(a.clone(), dmatrix![1.0; 0.0], dmatrix![1.0, 1.0]).unwrap();
        let form = kalman_decompose(&sys, &pol()).unwrap();
        assert_eq!(form.rank, 2);
        assert_eq!(form.complement.ncols(), 0);
        assert!((form.a_reduced.trace() - a.trace()).abs() < 1e-12);
        assert!((form.a_reduced.determinant() - a.determinant()).abs() < 1e-12);
        form.verify(&sys, &pol()).unwrap();
    }

    #[test]
    fn invertible_a_has_zero_metric() {
        let a = dmatrix![2.0, 1.0, 0.0; 0.0, 1.0, 1.0; 1.0, 0.0, 1.0];
        let sys = LinearSystem::new(
            a,
            dmatrix![1.0; 0.0; 0.0],
            dmatrix![1.0, 0.0, 0.0; 0.0, 1.0, 0.0],
        )
        .unwrap();
        let profile = rank_profile(&sys, &pol()).unwrap();
        assert!(profile.metric.iter().all(|&r| r == 0));
    }

    #[test]
    fn ratio_ordering_and_ceiling() {
        assert!(Ratio::new(2, 3) < Ratio::new(1, 1));
        assert_eq!(Ratio::new(4, 2), Ratio::new(2, 1));
        assert_eq!(Ratio::new(5, 3).ceil(), 2);
        assert_eq!(Ratio::new(0, 3).ceil(), 0);
        assert!(Ratio::new(3, 3).le_int(1));
        assert!(!Ratio::new(4, 3).le_int(1));
    }
}
