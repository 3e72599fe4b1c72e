//! Per-prompt dissimilarity scores between candidate models and a target.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{MpsError, Result};

/// An `N x M` matrix of distances in `[0, 1]`: one row per prompt, one
/// column per candidate model.
///
/// Values are stored row-major. The order of `model_ids` is the column order
/// and is used for deterministic tie-breaking everywhere downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct DistanceMatrix {
    prompt_count: usize,
    model_ids: Vec<String>,
    values: Vec<f64>,
}

/// Validates a matrix given as a list of rows (`values[prompt][model]`).
pub fn validate_matrix(values: Vec<Vec<f64>>, model_ids: Vec<String>) -> Result<DistanceMatrix> {
    let width = model_ids.len();
    for (t, row) in values.iter().enumerate() {
        if row.len() != width {
            return Err(MpsError::ShapeMismatch(format!(
                "row {t} has {} values but there are {width} model ids",
                row.len()
            )));
        }
    }
    let prompt_count = values.len();
    DistanceMatrix::from_row_major(
        prompt_count,
        model_ids,
        values.into_iter().flatten().collect(),
    )
}

impl DistanceMatrix {
    /// Builds a matrix from a flat row-major buffer of `prompt_count * model_ids.len()` values.
    pub fn from_row_major(
        prompt_count: usize,
        model_ids: Vec<String>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let width = model_ids.len();
        if prompt_count == 0 || width == 0 {
            return Err(MpsError::EmptyMatrix);
        }
        if values.len() != prompt_count * width {
            return Err(MpsError::ShapeMismatch(format!(
                "expected {} values for {prompt_count} prompts x {width} models, got {}",
                prompt_count * width,
                values.len()
            )));
        }
        let mut seen = HashSet::with_capacity(width);
        for id in &model_ids {
            if !seen.insert(id.as_str()) {
                return Err(MpsError::DuplicateModelId(id.clone()));
            }
        }
        for (k, &v) in values.iter().enumerate() {
            let (prompt, model) = (k / width, k % width);
            if !v.is_finite() {
                return Err(MpsError::NonFinite { prompt, model });
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(MpsError::OutOfRange {
                    prompt,
                    model,
                    value: v,
                });
            }
        }
        Ok(Self {
            prompt_count,
            model_ids,
            values,
        })
    }

    /// Assembles a matrix from one distance vector per model.
    pub fn from_columns(model_ids: Vec<String>, columns: &[Vec<f64>]) -> Result<Self> {
        if columns.len() != model_ids.len() {
            return Err(MpsError::ShapeMismatch(format!(
                "{} columns for {} model ids",
                columns.len(),
                model_ids.len()
            )));
        }
        let prompt_count = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().find(|c| c.len() != prompt_count) {
            return Err(MpsError::ShapeMismatch(format!(
                "column lengths differ ({} vs {prompt_count})",
                bad.len()
            )));
        }
        let width = columns.len();
        let mut values = vec![0.0; prompt_count * width];
        for (i, col) in columns.iter().enumerate() {
            for (t, &v) in col.iter().enumerate() {
                values[t * width + i] = v;
            }
        }
        Self::from_row_major(prompt_count, model_ids, values)
    }

    pub fn prompt_count(&self) -> usize {
        self.prompt_count
    }

    pub fn model_count(&self) -> usize {
        self.model_ids.len()
    }

    pub fn model_ids(&self) -> &[String] {
        &self.model_ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.model_ids.iter().position(|m| m == id)
    }

    #[inline]
    pub fn get(&self, prompt: usize, model: usize) -> f64 {
        self.values[prompt * self.model_count() + model]
    }

    pub fn row(&self, prompt: usize) -> &[f64] {
        let w = self.model_count();
        &self.values[prompt * w..(prompt + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.model_count())
    }

    pub fn column(&self, model: usize) -> Vec<f64> {
        self.rows().map(|r| r[model]).collect()
    }

    /// Flat row-major view of all values.
    pub fn as_row_major(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    model_ids: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl TryFrom<RawMatrix> for DistanceMatrix {
    type Error = MpsError;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        validate_matrix(raw.values, raw.model_ids)
    }
}

impl From<DistanceMatrix> for RawMatrix {
    fn from(m: DistanceMatrix) -> Self {
        let values = m.rows().map(<[f64]>::to_vec).collect();
        RawMatrix {
            model_ids: m.model_ids,
            values,
        }
    }
}
