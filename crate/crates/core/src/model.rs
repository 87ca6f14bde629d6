//! Parameter-vector arithmetic: task-vector construction, linear merging,
//! and norm diagnostics.
//!
//! A task vector is the element-wise difference between a fine-tuned model's
//! parameters and the shared pretrained parameters. Merging forms
//! `pretrained + V * c` where the columns of `V` are task vectors and `c`
//! holds the scaling coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense parameter vector of a (pretrained or fine-tuned or merged) model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "parameter vector",
            });
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// L1 norm of the vector.
    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }
}

/// Task matrix: one column per task, all columns of equal length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMatrix {
    columns: Vec<ParameterVector>,
}

impl TaskMatrix {
    pub fn new(columns: Vec<ParameterVector>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyInput);
        }
        let d = columns[0].len();
        for col in &columns {
            if col.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    got: col.len(),
                });
            }
        }
        Ok(Self { columns })
    }

    /// Number of tasks (columns).
    pub fn task_count(&self) -> usize {
        self.columns.len()
    }

    /// Parameter dimension (rows).
    pub fn dim(&self) -> usize {
        self.columns[0].len()
    }

    pub fn column(&self, n: usize) -> &ParameterVector {
        &self.columns[n]
    }

    pub fn columns(&self) -> &[ParameterVector] {
        &self.columns
    }
}

/// Builds the task matrix whose column `n` is `finetuned[n] - pretrained`.
pub fn compute_task_vectors(
    pretrained: &ParameterVector,
    finetuned: &[ParameterVector],
) -> Result<TaskMatrix> {
    if finetuned.is_empty() {
        return Err(Error::EmptyInput);
    }
    let d = pretrained.len();
    let mut columns = Vec::with_capacity(finetuned.len());
    for ft in finetuned {
        if ft.len() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                got: ft.len(),
            });
        }
        let delta: Vec<f64> = ft
            .as_slice()
            .iter()
            .zip(pretrained.as_slice())
            .map(|(f, p)| f - p)
            .collect();
        columns.push(ParameterVector(delta));
    }
    TaskMatrix::new(columns)
}

/// Merged model `pretrained + sum_n c_n * v_n`.
pub fn merge_model(
    pretrained: &ParameterVector,
    task_matrix: &TaskMatrix,
    coefficients: &[f64],
) -> Result<ParameterVector> {
    if task_matrix.dim() != pretrained.len() {
        return Err(Error::LengthMismatch {
            expected: pretrained.len(),
            got: task_matrix.dim(),
        });
    }
    if coefficients.len() != task_matrix.task_count() {
        return Err(Error::LengthMismatch {
            expected: task_matrix.task_count(),
            got: coefficients.len(),
        });
    }
    let mut merged = pretrained.as_slice().to_vec();
    for (column, &c) in task_matrix.columns().iter().zip(coefficients) {
        if c != 0.0 {
            for (m, v) in merged.iter_mut().zip(column.as_slice()) {
                *m += c * v;
            }
        }
    }
    Ok(ParameterVector(merged))
}

/// Per-task ratio `||v_n||_1 / ||pretrained||_1`, a diagnostic for whether
/// task vectors are small relative to the pretrained weights.
pub fn norm_ratio(pretrained: &ParameterVector, task_matrix: &TaskMatrix) -> Result<Vec<f64>> {
    let pre_norm = pretrained.l1_norm();
    if pre_norm == 0.0 {
        return Err(Error::DegeneratePretrained);
    }
    Ok(task_matrix
        .columns()
        .iter()
        .map(|col| col.l1_norm() / pre_norm)
        .collect())
}
