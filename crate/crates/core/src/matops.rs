//! Tolerance-aware dense linear algebra.
//!
//! Every rank decision in the crate goes through [`numerical_rank`] (or its
//! scaled variant), so that the same cutoff is applied consistently to the
//! controllability matrix, the Kalman-reduced matrices and the PBH pencils.

use alloc::vec::Vec;

use nalgebra::{Complex, ComplexField, DMatrix, DVector};

use crate::error::Error;

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type ComplexMatrix = DMatrix<Complex<f64>>;

/// Default relative rank cutoff, 2^-46 (about 64 machine epsilons).
pub const DEFAULT_RANK_TOL: f64 = 1.4210854715202004e-14;
/// Default tolerance for subspace equality and residual checks.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;

/// Numerical tolerances shared by every test in the crate.
///
/// `relative_rank_tol` is multiplied by `max(rows, cols) * sigma_max` to get
/// the singular value cutoff. `residual_tol` bounds orthonormality defects,
/// subspace-equality tests and design residuals.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TolerancePolicy {
    pub relative_rank_tol: f64,
    pub residual_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            relative_rank_tol: DEFAULT_RANK_TOL,
            residual_tol: DEFAULT_RESIDUAL_TOL,
        }
    }
}

impl TolerancePolicy {
    pub fn new(relative_rank_tol: f64, residual_tol: f64) -> Result<Self, Error> {
        let valid = |t: f64| t.is_finite() && t > 0.0;
        if !valid(relative_rank_tol) {
            return Err(Error::InvalidTolerance {
                name: "relative_rank_tol",
                value: relative_rank_tol,
            });
        }
        if !valid(residual_tol) {
            return Err(Error::InvalidTolerance {
                name: "residual_tol",
                value: residual_tol,
            });
        }
        Ok(Self {
            relative_rank_tol,
            residual_tol,
        })
    }

    /// Singular value cutoff for a matrix of the given shape whose largest
    /// singular value (or noise reference scale) is `scale`.
    pub fn rank_threshold(&self, rows: usize, cols: usize, scale: f64) -> f64 {
        self.relative_rank_tol * rows.max(cols) as f64 * scale
    }
}

fn is_empty(m: &Matrix) -> bool {
    m.nrows() == 0 || m.ncols() == 0
}

/// Thin singular value decomposition `m = u diag(sigma) v^H`, with `sigma`
/// descending and `u`, `v` holding `min(rows, cols)` columns.
struct Svd<T: ComplexField<RealField = f64>> {
    u: DMatrix<T>,
    sigma: Vec<f64>,
    v: DMatrix<T>,
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD. Columns of a working copy are rotated
/// pairwise until mutually orthogonal; their norms are then the singular
/// values. A wide input is handled through its conjugate transpose.
fn jacobi_svd<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Svd<T> {
    if m.nrows() < m.ncols() {
        let t = jacobi_svd(&m.adjoint());
        return Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut g = m.clone();
    let mut v = DMatrix::<T>::identity(cols, cols);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = g.column(p).norm_squared();
                let beta = g.column(q).norm_squared();
                let gamma = g.column(p).dotc(&g.column(q));
                let mag = gamma.clone().modulus();
                if mag == 0.0 || mag <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * mag);
                let t = if zeta >= 0.0 { 1.0 } else { -1.0 }
                    / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                // conj(gamma) / |gamma| makes the (p, q) coupling real.
                let phase = gamma.conjugate().unscale(mag);
                for mat in [&mut g, &mut v] {
                    for i in 0..mat.nrows() {
                        let gp = mat[(i, p)].clone();
                        let gq = mat[(i, q)].clone() * phase.clone();
                        mat[(i, p)] = gp.clone().scale(c) - gq.clone().scale(s);
                        mat[(i, q)] = gp.scale(s) + gq.scale(c);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..cols).map(|j| g.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let mut u = DMatrix::<T>::zeros(rows, cols);
    let mut v_sorted = DMatrix::<T>::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    for (k, &j) in order.iter().enumerate() {
        let norm = norms[j];
        sigma.push(norm);
        if norm > 0.0 {
            u.set_column(k, &g.column(j).unscale(norm));
        }
        v_sorted.set_column(k, &v.column(j));
    }
    Svd {
        u,
        sigma,
        v: v_sorted,
    }
}

/// Singular values in descending order. Empty for degenerate shapes.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if is_empty(m) {
        return Vec::new();
    }
    jacobi_svd(m).sigma
}

/// Largest singular value; zero for degenerate shapes.
pub fn spectral_norm(m: &Matrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

fn count_above(sv: &[f64], rows: usize, cols: usize, scale: f64, pol: &TolerancePolicy) -> usize {
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    if sigma_max == 0.0 {
        return 0;
    }
    let cutoff = pol.rank_threshold(rows, cols, sigma_max.max(scale));
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Number of singular values above `relative_rank_tol * max(rows, cols) * sigma_max`.
pub fn numerical_rank(m: &Matrix, pol: &TolerancePolicy) -> usize {
    numerical_rank_scaled(m, 0.0, pol)
}

/// Rank with the cutoff measured against `max(sigma_max, scale)`.
///
/// `scale` is an a-priori magnitude of the exact matrix (for instance a
/// product of factor norms). A product that should vanish exactly but carries
/// rounding noise then reports rank zero instead of promoting the noise to a
/// direction.
pub fn numerical_rank_scaled(m: &Matrix, scale: f64, pol: &TolerancePolicy) -> usize {
    let sv = singular_values(m);
    count_above(&sv, m.nrows(), m.ncols(), scale, pol)
}

/// Rank of a complex matrix under the same cutoff rule.
pub fn complex_numerical_rank(m: &ComplexMatrix, pol: &TolerancePolicy) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = jacobi_svd(m).sigma;
    count_above(&sv, m.nrows(), m.ncols(), 0.0, pol)
}

/// Orthonormal basis of the column space of `m`, with its dimension.
///
/// Columns are the leading left singular vectors, each signed so that its
/// largest-magnitude entry is positive. A zero matrix yields an empty
/// `rows x 0` basis.
pub fn orthonormal_range_basis(m: &Matrix, pol: &TolerancePolicy) -> (Matrix, usize) {
    if is_empty(m) {
        return (Matrix::zeros(m.nrows(), 0), 0);
    }
    let svd = jacobi_svd(m);
    let r = count_above(&svd.sigma, m.nrows(), m.ncols(), 0.0, pol);
    let mut basis = svd.u.columns(0, r).into_owned();
    canonical_signs(&mut basis);
    (basis, r)
}

fn canonical_signs(basis: &mut Matrix) {
    for mut col in basis.column_iter_mut() {
        let pivot = col.iter().copied().fold(
            0.0_f64,
            |best, v| if v.abs() > best.abs() { v } else { best },
        );
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
}

/// Largest absolute entry of `Q^T Q - I`.
pub fn orthonormality_defect(q: &Matrix) -> f64 {
    let gram = q.transpose() * q;
    let mut worst = 0.0_f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// Orthonormal basis `R` of the orthogonal complement of `range(q)`, so that
/// `[q R]` is orthogonal.
pub fn orthonormal_complement(q: &Matrix, pol: &TolerancePolicy) -> Result<Matrix, Error> {
    let rows = q.nrows();
    let r = q.ncols();
    let deviation = orthonormality_defect(q);
    if r > rows || deviation > pol.residual_tol {
        return Err(Error::NotOrthonormal { deviation });
    }
    let k = rows - r;
    if k == 0 {
        return Ok(Matrix::zeros(rows, 0));
    }
    // The projector onto the complement has eigenvalues {1 (x k), 0 (x r)};
    // its leading left singular vectors are the complement basis.
    let projector = Matrix::identity(rows, rows) - q * q.transpose();
    let svd = jacobi_svd(&projector);
    let mut complement = svd.u.columns(0, k).into_owned();
    // One Gram-Schmidt sweep against q removes the O(eps) leakage left by the SVD.
    for mut col in complement.column_iter_mut() {
        let proj = q * (q.transpose() * &col);
        col -= proj;
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    canonical_signs(&mut complement);
    Ok(complement)
}

/// Moore-Penrose pseudo-inverse with singular values below the rank cutoff
/// treated as zero.
pub fn pseudo_inverse(m: &Matrix, pol: &TolerancePolicy) -> Matrix {
    if is_empty(m) {
        return Matrix::zeros(m.ncols(), m.nrows());
    }
    let svd = jacobi_svd(m);
    let sigma_max = svd.sigma.first().copied().unwrap_or(0.0);
    if sigma_max == 0.0 {
        return Matrix::zeros(m.ncols(), m.nrows());
    }
    let cutoff = pol.rank_threshold(m.nrows(), m.ncols(), sigma_max);
    let mut out = Matrix::zeros(m.ncols(), m.nrows());
    for (k, &sigma) in svd.sigma.iter().enumerate() {
        if sigma > cutoff {
            out += (svd.v.column(k) / sigma) * svd.u.column(k).transpose();
        }
    }
    out
}

/// Minimum-norm least-squares solution of `m x = b`.
pub fn least_squares_solve(m: &Matrix, b: &Vector, pol: &TolerancePolicy) -> Result<Vector, Error> {
    if b.len() != m.nrows() {
        return Err(Error::DimensionMismatch {
            what: "least-squares right-hand side",
            expected: m.nrows(),
            found: b.len(),
        });
    }
    Ok(pseudo_inverse(m, pol) * b)
}

/// `[blocks[0] | blocks[1] | ...]`; all blocks must share a row count.
pub fn hstack(rows: usize, blocks: &[Matrix]) -> Matrix {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut at = 0;
    for block in blocks {
        debug_assert_eq!(block.nrows(), rows);
        out.columns_mut(at, block.ncols()).copy_from(block);
        at += block.ncols();
    }
    out
}

/// `[A^0, A^1, ..., A^count-1]` by repeated multiplication.
pub fn matrix_powers(a: &Matrix, count: usize) -> Vec<Matrix> {
    let mut powers = Vec::with_capacity(count);
    if count == 0 {
        return powers;
    }
    powers.push(Matrix::identity(a.nrows(), a.ncols()));
    for i in 1..count {
        let next = a * &powers[i - 1];
        powers.push(next);
    }
    powers
}

/// Embeds a real matrix in the complex field.
pub fn complexify(m: &Matrix) -> ComplexMatrix {
    m.map(|x| Complex::new(x, 0.0))
}

/// Eigenvalues from a real Schur form, retrying on the transpose, a shift by
/// `sigma I` and a fixed Householder similarity when the QR iteration stalls.
fn schur_eigenvalues(a: &Matrix) -> Option<Vec<Complex<f64>>> {
    let dim = a.nrows();
    let sigma = 0.5 * a.norm().max(1.0);
    let v = Vector::from_fn(dim, |i, _| {
        let k = (i + 1) as f64;
        1.0 + 0.618_033_988_749_895 * k * k
    });
    let h = Matrix::identity(dim, dim) - &v * v.transpose() * (2.0 / v.norm_squared());
    let shifted = a + Matrix::identity(dim, dim) * sigma;
    let candidates = [
        (a.clone(), 0.0),
        (a.transpose(), 0.0),
        (shifted.clone(), sigma),
        (&h * a * &h, 0.0),
        (&h * shifted * &h, sigma),
    ];
    candidates.into_iter().find_map(|(m, shift)| {
        nalgebra::Schur::try_new(m, f64::EPSILON, 200 * dim).map(|schur| {
            schur
                .complex_eigenvalues()
                .iter()
                .map(|z| z - Complex::new(shift, 0.0))
                .collect()
        })
    })
}

/// Distinct eigenvalues of a square matrix, sorted by real then imaginary part.
///
/// Eigenvalues are taken from the real Schur form and merged by single-linkage
/// clustering with radius `max(residual_tol, 10 (eps ||A||)^(1/N))`, the
/// worst-case spread of a perturbed Jordan block of size N. Each cluster is
/// replaced by its mean, which is accurate to O(eps ||A||) even when the
/// individual eigenvalues of a defective block are not.
pub fn distinct_eigenvalues(a: &Matrix, pol: &TolerancePolicy) -> Result<Vec<Complex<f64>>, Error> {
    let dim = a.nrows();
    if dim == 0 {
        return Ok(Vec::new());
    }
    let raw: Vec<Complex<f64>> = if dim == 1 {
        alloc::vec![Complex::new(a[(0, 0)], 0.0)]
    } else {
        schur_eigenvalues(a).ok_or(Error::EigenvalueFailure)?
    };
    if raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenvalueFailure);
    }

    let scale = spectral_norm(a).max(1.0);
    let radius = pol
        .residual_tol
        .max(10.0 * libm::pow(f64::EPSILON * scale, 1.0 / dim as f64));

    // Single-linkage clustering via union-find on the (tiny) eigenvalue list.
    let mut parent: Vec<usize> = (0..raw.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..raw.len() {
        for j in (i + 1)..raw.len() {
            if (raw[i] - raw[j]).modulus() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = ri.min(rj);
                }
            }
        }
    }
    let mut sums: Vec<(usize, Complex<f64>, usize)> = Vec::new();
    for (i, &z) in raw.iter().enumerate() {
        let root = find(&mut parent, i);
        match sums.iter_mut().find(|(r, _, _)| *r == root) {
            Some(entry) => {
                entry.1 += z;
                entry.2 += 1;
            }
            None => sums.push((root, z, 1)),
        }
    }
    let mut out: Vec<Complex<f64>> = sums
        .into_iter()
        .map(|(_, sum, count)| {
            let mean = sum / count as f64;
            // Conjugate pairs of a real cluster average to an exactly real value.
            if mean.im.abs() <= radius {
                Complex::new(mean.re, 0.0)
            } else {
                mean
            }
        })
        .collect();
    out.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(
                x.im.partial_cmp(&y.im)
                    .unwrap_or(core::cmp::Ordering::Equal),
            )
    });
    Ok(out)
}
