//! File formats: system JSON, vector arguments and design solutions.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sparsectl_core::{DesignSolution, LinearSystem, Matrix, Trajectory, Vector};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}", path = path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field \"{field}\": {msg}")]
    Field { field: &'static str, msg: String },
    #[error("{0}")]
    System(#[from] sparsectl_core::Error),
    #[error("{what}: {msg}")]
    Vector { what: String, msg: String },
}

fn field_err(field: &'static str, msg: impl Into<String>) -> FormatError {
    FormatError::Field {
        field,
        msg: msg.into(),
    }
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// Rows of finite numbers; an empty outer array is a 0 x 0 matrix.
fn parse_matrix(field: &'static str, v: &Value) -> Result<Matrix, FormatError> {
    let rows = v
        .as_array()
        .ok_or_else(|| field_err(field, "expected an array of rows"))?;
    let mut data: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| field_err(field, format!("row {i} is not an array")))?;
        let mut out = Vec::with_capacity(row.len());
        for (j, x) in row.iter().enumerate() {
            let x = x
                .as_f64()
                .ok_or_else(|| field_err(field, format!("entry ({i}, {j}) is not a number")))?;
            out.push(x);
        }
        if let Some(first) = data.first() {
            if first.len() != out.len() {
                return Err(field_err(
                    field,
                    format!(
                        "row {i} has {} entries, row 0 has {}",
                        out.len(),
                        first.len()
                    ),
                ));
            }
        }
        data.push(out);
    }
    let cols = data.first().map_or(0, Vec::len);
    Ok(Matrix::from_fn(data.len(), cols, |i, j| data[i][j]))
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn parse_system(text: &str) -> Result<LinearSystem, FormatError> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| field_err("system", "expected a JSON object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "A" | "B" | "C" | "name") {
            return Err(FormatError::Field {
                field: "system",
                msg: format!("unknown field \"{key}\""),
            });
        }
    }
    let get = |field: &'static str| {
        obj.get(field)
            .ok_or_else(|| field_err(field, "missing"))
            .and_then(|v| parse_matrix(field, v))
    };
    let (a, b, c) = (get("A")?, get("B")?, get("C")?);
    let name = match obj.get("name") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(field_err("name", "expected a string")),
    };
    let sys = LinearSystem::new(a, b, c)?;
    Ok(match name {
        Some(n) => sys.with_name(n),
        None => sys,
    })
}

pub fn load_system(path: &Path) -> Result<LinearSystem, FormatError> {
    parse_system(&read(path)?)
}

#[derive(Serialize)]
struct SystemOut<'a> {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<&'a str>,
}

pub fn system_to_json(sys: &LinearSystem) -> String {
    let out = SystemOut {
        a: matrix_rows(sys.a()),
        b: matrix_rows(sys.b()),
        c: matrix_rows(sys.c()),
        name: sys.name(),
    };
    serde_json::to_string_pretty(&out).expect("plain data serializes")
}

fn parse_numbers(what: &str, text: &str) -> Result<Vec<f64>, FormatError> {
    let text = text.trim();
    let bad = |msg: String| FormatError::Vector {
        what: what.to_string(),
        msg,
    };
    if text.starts_with('[') {
        let v: Vec<f64> = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        return Ok(v);
    }
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| bad(format!("\"{t}\" is not a number")))
        })
        .collect()
}

/// A vector argument: a file holding a JSON array or comma list, an inline
/// JSON array, or an inline comma list.
pub fn parse_vector(what: &str, arg: &str) -> Result<Vector, FormatError> {
    let path = Path::new(arg);
    let text = if !arg.trim_start().starts_with('[') && path.is_file() {
        read(path)?
    } else {
        arg.to_string()
    };
    let v = parse_numbers(what, &text)?;
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(FormatError::Vector {
            what: what.to_string(),
            msg: format!("non-finite entry {x}"),
        });
    }
    Ok(Vector::from_vec(v))
}

/// A sequence of input vectors: a file or inline JSON array of arrays.
pub fn parse_input_sequence(arg: &str) -> Result<Vec<Vector>, FormatError> {
    let path = Path::new(arg);
    let text = if !arg.trim_start().starts_with('[') && path.is_file() {
        read(path)?
    } else {
        arg.to_string()
    };
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(text.trim()).map_err(|e| FormatError::Vector {
            what: "inputs".into(),
            msg: e.to_string(),
        })?;
    Ok(rows.into_iter().map(Vector::from_vec).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub inputs: Vec<Vec<f64>>,
    pub supports: Vec<Vec<usize>>,
    pub residual: f64,
}

impl From<&DesignSolution> for SolutionJson {
    fn from(sol: &DesignSolution) -> Self {
        Self {
            inputs: sol
                .inputs
                .inputs()
                .iter()
                .map(|u| u.iter().copied().collect())
                .collect(),
            supports: sol.selected_supports.clone(),
            residual: sol.residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryJson {
    pub states: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

impl From<&Trajectory> for TrajectoryJson {
    fn from(t: &Trajectory) -> Self {
        let rows = |vs: &[Vector]| vs.iter().map(|v| v.iter().copied().collect()).collect();
        Self {
            states: rows(&t.states),
            outputs: rows(&t.outputs),
        }
    }
}
