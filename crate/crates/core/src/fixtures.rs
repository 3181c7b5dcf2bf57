//! Reference systems with known verdicts.

use alloc::vec;
use nalgebra::dmatrix;

use crate::matops::Matrix;
use crate::system::LinearSystem;

/// Two nilpotent shift chains (lengths 3 and 2), two inputs, three outputs.
/// Necessary conditions hold at s = 1, sufficient ones do not, and the
/// system is not output 1-sparse controllable.
pub fn example1() -> LinearSystem {
    let a = dmatrix![
        0.0, 1.0, 0.0, 0.0, 0.0;
        0.0, 0.0, 1.0, 0.0, 0.0;
        0.0, 0.0, 0.0, 0.0, 0.0;
        0.0, 0.0, 0.0, 0.0, 1.0;
        0.0, 0.0, 0.0, 0.0, 0.0
    ];
    let b = dmatrix![
        1.0, 1.0;
        0.0, 0.0;
        1.0, 0.0;
        0.0, 0.0;
        0.0, 1.0
    ];
    let c = dmatrix![
        1.0, 0.0, 0.0, 0.0, 0.0;
        0.0, 1.0, 0.0, 0.0, 0.0;
        0.0, 0.0, 0.0, 1.0, 0.0
    ];
    LinearSystem::new(a, b, c)
        .expect("fixture is well formed")
        .with_name("example1")
}

/// Two nilpotent shift chains of length 2, two inputs, two outputs.
/// Sufficient conditions fail at s = 1 yet the single-input restriction to
/// the second column of `B` is output 1-sparse controllable.
pub fn example2() -> LinearSystem {
    let a = dmatrix![
        0.0, 1.0, 0.0, 0.0;
        0.0, 0.0, 0.0, 0.0;
        0.0, 0.0, 0.0, 1.0;
        0.0, 0.0, 0.0, 0.0
    ];
    let b = dmatrix![
        1.0, 1.0;
        1.0, 0.0;
        0.0, 0.0;
        0.0, 1.0
    ];
    let c = dmatrix![
        1.0, 0.0, 0.0, 0.0;
        0.0, 0.0, 1.0, 0.0
    ];
    LinearSystem::new(a, b, c)
        .expect("fixture is well formed")
        .with_name("example2")
}

/// [`example2`] keeping only the second input column.
pub fn example2_b2() -> LinearSystem {
    example2()
        .restrict_inputs(&[1])
        .expect("column 1 exists")
        .with_name("example2_b2")
}

/// `A = B = C = I` of the given size.
pub fn identity(size: usize) -> LinearSystem {
    let i = Matrix::identity(size, size);
    LinearSystem::new(i.clone(), i.clone(), i)
        .expect("fixture is well formed")
        .with_name("identity")
}
