//! Pointwise and stencil transforms between tensors.

use serde::{Deserialize, Serialize};

use super::{AnalysisError, Tensor};
use crate::minisim::METERS_PER_DEGREE;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "op")]
pub enum TransformOp {
    /// Adds a constant.
    Add { value: f64 },
    Scale { factor: f64 },
    /// Pointwise sum of two tensors.
    SumPair,
    /// Horizontal divergence of a (u, v) pair in s-1.
    Divergence,
    /// Wind speed of a (u, v) pair.
    Magnitude,
}

impl TransformOp {
    pub fn arity(self) -> usize {
        match self {
            TransformOp::Add { .. } | TransformOp::Scale { .. } => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TransformOp::Add { .. } => "add",
            TransformOp::Scale { .. } => "scale",
            TransformOp::SumPair => "sum_pair",
            TransformOp::Divergence => "divergence",
            TransformOp::Magnitude => "magnitude",
        }
    }
}

/// Periodic centred-difference divergence on a flat row-major field,
/// using the same stencil and arithmetic order as the simulator.
pub fn divergence_field(u: &[f64], v: &[f64], nx: usize, ny: usize, dx_m: f64) -> Vec<f64> {
    let inv_2dx = 1.0 / (2.0 * dx_m);
    (0..nx * ny)
        .map(|k| {
            let (j, i) = (k / nx, k % nx);
            let e = j * nx + (i + 1) % nx;
            let w = j * nx + (i + nx - 1) % nx;
            let n = ((j + 1) % ny) * nx + i;
            let s = ((j + ny - 1) % ny) * nx + i;
            (u[e] - u[w]) * inv_2dx + (v[n] - v[s]) * inv_2dx
        })
        .collect()
}

fn check_shapes(a: &Tensor, b: &Tensor) -> Result<(), AnalysisError> {
    let pairs = [
        ("time", a.n_times(), b.n_times()),
        ("y", a.grid.ny, b.grid.ny),
        ("x", a.grid.nx, b.grid.nx),
    ];
    for (axis, left, right) in pairs {
        if left != right {
            return Err(AnalysisError::ShapeMismatch { axis, left, right });
        }
    }
    Ok(())
}

fn merge_mask(a: &Tensor, b: &Tensor) -> Option<Vec<bool>> {
    match (&a.mask, &b.mask) {
        (None, None) => None,
        (Some(m), None) | (None, Some(m)) => Some(m.clone()),
        (Some(x), Some(y)) => Some(x.iter().zip(y).map(|(p, q)| *p && *q).collect()),
    }
}

/// Applies `op` to one or two input tensors.
pub fn transform_tensor(op: TransformOp, inputs: &[&Tensor]) -> Result<Tensor, AnalysisError> {
    if inputs.len() != op.arity() {
        return Err(AnalysisError::InvalidArgument(format!(
            "{} takes {} input tensor(s), got {}",
            op.name(),
            op.arity(),
            inputs.len()
        )));
    }
    let a = inputs[0];
    if a.values.is_empty() {
        return Err(AnalysisError::EmptyTensor);
    }
    let unary = |f: &dyn Fn(f64) -> f64, name: String| Tensor {
        name,
        values: a.values.iter().map(|&x| f(x)).collect(),
        ..a.clone()
    };
    match op {
        TransformOp::Add { value } => Ok(unary(&|x| x + value, a.name.clone())),
        TransformOp::Scale { factor } => Ok(unary(&|x| x * factor, a.name.clone())),
        TransformOp::SumPair | TransformOp::Divergence | TransformOp::Magnitude => {
            let b = inputs[1];
            check_shapes(a, b)?;
            let mask = merge_mask(a, b);
            let (name, units, mut values) = match op {
                TransformOp::SumPair => (
                    format!("{}+{}", a.name, b.name),
                    a.units.clone(),
                    a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect::<Vec<f64>>(),
                ),
                TransformOp::Magnitude => (
                    format!("|{},{}|", a.name, b.name),
                    a.units.clone(),
                    a.values.iter().zip(&b.values).map(|(x, y)| (x * x + y * y).sqrt()).collect(),
                ),
                _ => {
                    let dx_m = a.grid.d_deg * METERS_PER_DEGREE;
                    let (nx, ny) = (a.grid.nx, a.grid.ny);
                    let n = a.cells();
                    let mut out = Vec::with_capacity(a.values.len());
                    for t in 0..a.n_times() {
                        let r = t * n..(t + 1) * n;
                        out.extend(divergence_field(&a.values[r.clone()], &b.values[r], nx, ny, dx_m));
                    }
                    ("DIV".to_string(), "s-1".to_string(), out)
                }
            };
            if let Some(m) = &mask {
                let n = a.cells();
                for (k, v) in values.iter_mut().enumerate() {
                    if !m[k % n] {
                        *v = f64::NAN;
                    }
                }
            }
            Ok(Tensor {
                name,
                units,
                values,
                mask,
                ..a.clone()
            })
        }
    }
}

/// Index and value of the extremum; ties keep the smallest index and
/// masked (`NaN`) entries are skipped.
pub fn extremum(values: &[f64], valid: impl Fn(usize) -> bool, max: bool) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, &x) in values.iter().enumerate() {
        if !valid(k) || x.is_nan() {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, b)) => {
                if max {
                    x > b
                } else {
                    x < b
                }
            }
        };
        if better {
            best = Some((k, x));
        }
    }
    best
}
