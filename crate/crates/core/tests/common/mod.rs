//! Shared test support: exact rational rank and seeded random systems.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsectl_core::{LinearSystem, Matrix};

/// Rank by Gaussian elimination over the rationals. Entries must be integers
/// (checked), which covers every fixture and random system in the tests.
pub fn exact_rank(m: &Matrix) -> usize {
    let mut rows: Vec<Vec<BigRational>> = (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| {
                    let v = m[(i, j)];
                    assert!(
                        v.fract() == 0.0 && v.abs() < 9.0e15,
                        "non-integer entry {v}"
                    );
                    BigRational::from_integer(BigInt::from(v as i64))
                })
                .collect()
        })
        .collect();
    let (nr, nc) = (m.nrows(), m.ncols());
    let mut rank = 0;
    for col in 0..nc {
        let Some(pivot) = (rank..nr).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..nr {
            if r != rank && !rows[r][col].is_zero() {
                let factor = &rows[r][col] / &rows[rank][col];
                let pivot_row = rows[rank].clone();
                for (x, p) in rows[r].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= &factor * p;
                }
            }
        }
        rank += 1;
        if rank == nr {
            break;
        }
    }
    rank
}

/// Integer matrix power product `C A^i W` computed in i128 to stay exact.
pub fn exact_product(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut acc: i128 = 0;
            for k in 0..a.ncols() {
                acc += a[(i, k)] as i128 * b[(k, j)] as i128;
            }
            out[(i, j)] = acc as f64;
        }
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn int_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: i32, hi: i32) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(lo..=hi) as f64)
}

/// Random integer system with `N <= max_n`, `m <= max_m`, `n <= max_out`.
pub fn random_system(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    max_m: usize,
    max_out: usize,
    lo: i32,
    hi: i32,
) -> LinearSystem {
    let n_state = rng.random_range(1..=max_n);
    let m = rng.random_range(1..=max_m);
    let n_out = rng.random_range(1..=max_out);
    LinearSystem::new(
        int_matrix(rng, n_state, n_state, lo, hi),
        int_matrix(rng, n_state, m, lo, hi),
        int_matrix(rng, n_out, n_state, lo, hi),
    )
    .unwrap()
}

/// Random orthogonal matrix from the QR factor of a Gaussian-ish matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, size: usize) -> Matrix {
    let g = Matrix::from_fn(size, size, |_, _| rng.random_range(-1.0..1.0));
    g.qr().q()
}

pub fn random_real(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub mod strategies {
    use proptest::prelude::*;
    use sparsectl_core::{LinearSystem, Matrix};

    pub fn int_matrix(rows: usize, cols: usize, lo: i32, hi: i32) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(lo..=hi, rows * cols)
            .prop_map(move |v| Matrix::from_iterator(rows, cols, v.into_iter().map(f64::from)))
    }

    pub fn real_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
        prop::collection::vec(-1.0f64..1.0, rows * cols)
            .prop_map(move |v| Matrix::from_vec(rows, cols, v))
    }

    pub fn int_system(
        max_n: usize,
        max_m: usize,
        max_out: usize,
        lo: i32,
        hi: i32,
    ) -> impl Strategy<Value = LinearSystem> {
        (1..=max_n, 1..=max_m, 1..=max_out).prop_flat_map(move |(n, m, p)| {
            (
                int_matrix(n, n, lo, hi),
                int_matrix(n, m, lo, hi),
                int_matrix(p, n, lo, hi),
            )
                .prop_map(|(a, b, c)| LinearSystem::new(a, b, c).unwrap())
        })
    }
}
