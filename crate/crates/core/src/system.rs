//! The LTI model `x_k = A x_{k-1} + B u_k`, `y_k = C x_k` and its forward
//! simulation.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, IssueList};
use crate::matops::{Matrix, Vector};

/// Entries with magnitude at or below this are structural zeros when
/// counting the support of an input vector.
pub const ZERO_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    A,
    B,
    C,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::A => "A",
            Field::B => "B",
            Field::C => "C",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ValidationIssue {
    Empty(Field),
    NotSquare {
        rows: usize,
        cols: usize,
    },
    RowMismatch {
        field: Field,
        expected: usize,
        found: usize,
    },
    ColumnMismatch {
        field: Field,
        expected: usize,
        found: usize,
    },
    NonFinite {
        field: Field,
        row: usize,
        col: usize,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::Empty(field) => write!(f, "{field} has no entries"),
            ValidationIssue::NotSquare { rows, cols } => {
                write!(f, "A must be square, got {rows}x{cols}")
            }
            ValidationIssue::RowMismatch {
                field,
                expected,
                found,
            } => write!(f, "{field} must have {expected} rows, got {found}"),
            ValidationIssue::ColumnMismatch {
                field,
                expected,
                found,
            } => write!(f, "{field} must have {expected} columns, got {found}"),
            ValidationIssue::NonFinite { field, row, col } => {
                write!(f, "{field}[{row}][{col}] is not finite")
            }
        }
    }
}

/// Every dimension and finiteness violation of the triple `(A, B, C)`.
pub fn validate(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<(), Vec<ValidationIssue>> {
    let mut issues = Vec::new();
    for (field, m) in [(Field::A, a), (Field::B, b), (Field::C, c)] {
        if m.nrows() == 0 || m.ncols() == 0 {
            issues.push(ValidationIssue::Empty(field));
        }
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if !m[(i, j)].is_finite() {
                    issues.push(ValidationIssue::NonFinite {
                        field,
                        row: i,
                        col: j,
                    });
                }
            }
        }
    }
    if a.nrows() != a.ncols() {
        issues.push(ValidationIssue::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n_state = a.nrows();
    if b.nrows() != n_state {
        issues.push(ValidationIssue::RowMismatch {
            field: Field::B,
            expected: n_state,
            found: b.nrows(),
        });
    }
    if c.ncols() != n_state {
        issues.push(ValidationIssue::ColumnMismatch {
            field: Field::C,
            expected: n_state,
            found: c.ncols(),
        });
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

/// A validated triple `(A, B, C)`: `A` is N x N, `B` is N x m, `C` is n x N.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    name: Option<String>,
}

impl LinearSystem {
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Result<Self, Error> {
        validate(&a, &b, &c).map_err(|issues| Error::InvalidSystem(IssueList(issues)))?;
        Ok(Self {
            a,
            b,
            c,
            name: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// N
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// m
    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    /// n
    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    /// Same `(A, C)` with `B` replaced; used for restrictions like `(A, B_2, C)`.
    pub fn with_input_matrix(&self, b: Matrix) -> Result<Self, Error> {
        let mut sys = Self::new(self.a.clone(), b, self.c.clone())?;
        sys.name = self.name.clone();
        Ok(sys)
    }

    /// Keeps only the listed input columns.
    pub fn restrict_inputs(&self, columns: &[usize]) -> Result<Self, Error> {
        let m = self.input_dim();
        if let Some(&bad) = columns.iter().find(|&&j| j >= m) {
            return Err(Error::DimensionMismatch {
                what: "input column index",
                expected: m,
                found: bad,
            });
        }
        self.with_input_matrix(self.b.select_columns(columns.iter()))
    }

    pub(crate) fn check_sparsity(&self, s: usize) -> Result<(), Error> {
        let m = self.input_dim();
        if s == 0 || s > m {
            Err(Error::InvalidSparsity { s, m })
        } else {
            Ok(())
        }
    }
}

pub fn nonzero_count(v: &Vector) -> usize {
    v.iter().filter(|x| x.abs() > ZERO_THRESHOLD).count()
}

/// Inputs `u_1..u_K`, each with at most `sparsity` entries above
/// [`ZERO_THRESHOLD`].
#[derive(Clone, Debug, PartialEq)]
pub struct SparseInputSequence {
    inputs: Vec<Vector>,
    sparsity: usize,
}

impl SparseInputSequence {
    pub fn new(inputs: Vec<Vector>, sparsity: usize, input_dim: usize) -> Result<Self, Error> {
        if inputs.is_empty() {
            return Err(Error::InvalidHorizon);
        }
        if sparsity == 0 || sparsity > input_dim {
            return Err(Error::InvalidSparsity {
                s: sparsity,
                m: input_dim,
            });
        }
        for (step, u) in inputs.iter().enumerate() {
            if u.len() != input_dim {
                return Err(Error::DimensionMismatch {
                    what: "input vector",
                    expected: input_dim,
                    found: u.len(),
                });
            }
            let nonzeros = nonzero_count(u);
            if nonzeros > sparsity {
                return Err(Error::InputTooDense {
                    step,
                    nonzeros,
                    s: sparsity,
                });
            }
        }
        Ok(Self { inputs, sparsity })
    }

    pub fn zeros(horizon: usize, sparsity: usize, input_dim: usize) -> Result<Self, Error> {
        Self::new(
            (0..horizon).map(|_| Vector::zeros(input_dim)).collect(),
            sparsity,
            input_dim,
        )
    }

    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn inputs(&self) -> &[Vector] {
        &self.inputs
    }

    pub fn input_dim(&self) -> usize {
        self.inputs[0].len()
    }
}

/// Largest per-step support size of `u`.
pub fn sparsity_of(u: &SparseInputSequence) -> usize {
    u.inputs.iter().map(nonzero_count).max().unwrap_or(0)
}

/// States `x_0..x_K` and outputs `y_0..y_K`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub states: Vec<Vector>,
    pub outputs: Vec<Vector>,
}

impl Trajectory {
    pub fn final_output(&self) -> &Vector {
        self.outputs.last().expect("trajectory holds at least y_0")
    }
}

pub fn simulate(
    sys: &LinearSystem,
    x0: &Vector,
    u: &SparseInputSequence,
) -> Result<Trajectory, Error> {
    if x0.len() != sys.state_dim() {
        return Err(Error::DimensionMismatch {
            what: "initial state",
            expected: sys.state_dim(),
            found: x0.len(),
        });
    }
    if u.input_dim() != sys.input_dim() {
        return Err(Error::DimensionMismatch {
            what: "input vector",
            expected: sys.input_dim(),
            found: u.input_dim(),
        });
    }
    let mut states = Vec::with_capacity(u.horizon() + 1);
    let mut outputs = Vec::with_capacity(u.horizon() + 1);
    let mut x = x0.clone();
    outputs.push(sys.c() * &x);
    states.push(x.clone());
    for uk in u.inputs() {
        x = sys.a() * &x + sys.b() * uk;
        outputs.push(sys.c() * &x);
        states.push(x.clone());
    }
    Ok(Trajectory { states, outputs })
}
