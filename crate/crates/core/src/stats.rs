//! Relative deviations and studentized statistics over the active set.
//!
//! A model's relative deviation on prompt `t` is its distance minus the mean
//! distance of all active models on that prompt. Averaging over prompts gives
//! `mean_i = Lbar_i - Lbar`, the same quantity as the average of pairwise
//! differences against every active model, at `O(N M)` cost instead of
//! `O(N M^2)`.

use serde::{Deserialize, Serialize};

use crate::candidates::CandidateSet;
use crate::config::{MpsConfig, VarianceMode};
use crate::error::{MpsError, Result};
use crate::matrix::DistanceMatrix;

/// Magnitude assigned to the statistic of a zero-variance column with a
/// nonzero mean deviation.
pub const DEGENERATE_T: f64 = 1e9;

/// Row-major `N x M'` matrix of per-prompt relative deviations, restricted to
/// the active models (in column order).
#[derive(Debug, Clone, PartialEq)]
pub struct Deviations {
    prompt_count: usize,
    width: usize,
    values: Vec<f64>,
}

impl Deviations {
    pub fn from_row_major(prompt_count: usize, width: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), prompt_count * width, "deviation buffer shape");
        Self {
            prompt_count,
            width,
            values,
        }
    }

    pub fn prompt_count(&self) -> usize {
        self.prompt_count
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, prompt: usize, model: usize) -> f64 {
        self.values[prompt * self.width + model]
    }

    pub fn row(&self, prompt: usize) -> &[f64] {
        &self.values[prompt * self.width..(prompt + 1) * self.width]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.values
    }
}

/// Studentized statistics for the active models, with the intermediates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TStatVector {
    pub active_ids: Vec<String>,
    /// Matrix column index of each active model.
    pub active_indices: Vec<usize>,
    pub values: Vec<f64>,
    pub mean_deviations: Vec<f64>,
    pub variances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TMin {
    pub value: f64,
    /// Position within the active set.
    pub position: usize,
    pub argmin_id: String,
}

/// Active-model columns of `matrix`, centered per prompt on the active-set mean.
pub fn sample_relative_deviations(
    matrix: &DistanceMatrix,
    active: &CandidateSet,
) -> Result<Deviations> {
    active.check_against(matrix)?;
    let cols = active.active_indices();
    if cols.is_empty() {
        return Err(MpsError::InactiveSetEmpty);
    }
    let width = cols.len();
    let mut values = Vec::with_capacity(matrix.prompt_count() * width);
    for row in matrix.rows() {
        let start = values.len();
        values.extend(cols.iter().map(|&i| row[i]));
        center_row(&mut values[start..]);
    }
    Ok(Deviations::from_row_major(
        matrix.prompt_count(),
        width,
        values,
    ))
}

/// Subtracts the row mean from every entry in place.
pub(crate) fn center_row(row: &mut [f64]) {
    // Exact zeros for tied rows; the rounded mean of equal values can be off by an ulp.
    if row.iter().all(|&v| v == row[0]) {
        row.fill(0.0);
        return;
    }
    let mean = row.iter().sum::<f64>() / row.len() as f64;
    for v in row.iter_mut() {
        *v -= mean;
    }
}

/// Mean deviation of each active model across prompts.
pub fn mean_relative_deviation(d: &Deviations) -> Vec<f64> {
    let mut means = vec![0.0; d.width];
    column_means(&d.values, d.width, &mut means);
    means
}

/// Per-model variance of the deviations, scaled according to `mode`.
pub fn variance_of_relative(d: &Deviations, mode: VarianceMode) -> Result<Vec<f64>> {
    if d.prompt_count < 2 {
        return Err(MpsError::InsufficientPrompts(d.prompt_count));
    }
    let mut means = vec![0.0; d.width];
    let mut vars = vec![0.0; d.width];
    column_means(&d.values, d.width, &mut means);
    column_variances(&d.values, d.width, &means, mode, &mut vars);
    Ok(vars)
}

/// Studentized statistics for every active model.
pub fn t_statistics(
    matrix: &DistanceMatrix,
    active: &CandidateSet,
    config: &MpsConfig,
) -> Result<TStatVector> {
    let m = active.active_count();
    if m < 2 {
        return Err(MpsError::InactiveSetTooSmall(m));
    }
    if matrix.prompt_count() < 2 {
        return Err(MpsError::InsufficientPrompts(matrix.prompt_count()));
    }
    let d = sample_relative_deviations(matrix, active)?;
    let mut scratch = Moments::new(d.width);
    scratch.compute(&d.values, config);
    Ok(TStatVector {
        active_ids: active.active_ids(),
        active_indices: active.active_indices(),
        values: scratch.t.clone(),
        mean_deviations: scratch.means.clone(),
        variances: scratch.vars.clone(),
    })
}

/// Minimum statistic; ties go to the earliest position.
pub fn t_min(t: &TStatVector) -> TMin {
    let position = argmin(&t.values);
    TMin {
        value: t.values[position],
        position,
        argmin_id: t.active_ids[position].clone(),
    }
}

/// Index of the smallest value, first one on ties.
pub(crate) fn argmin(values: &[f64]) -> usize {
    assert!(!values.is_empty(), "argmin of an empty slice");
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Studentizes one mean deviation, applying the zero-variance rule.
pub fn studentize(mean: f64, variance: f64, epsilon: f64) -> f64 {
    if variance < epsilon {
        if mean.abs() < epsilon {
            0.0
        } else {
            mean.signum() * DEGENERATE_T
        }
    } else {
        mean / variance.sqrt()
    }
}

/// Reusable buffers for computing statistics from a row-major deviation
/// buffer. The permutation kernel keeps one per worker.
#[derive(Debug, Clone)]
pub(crate) struct Moments {
    pub means: Vec<f64>,
    pub vars: Vec<f64>,
    pub t: Vec<f64>,
}

impl Moments {
    pub fn new(width: usize) -> Self {
        Self {
            means: vec![0.0; width],
            vars: vec![0.0; width],
            t: vec![0.0; width],
        }
    }

    pub fn compute(&mut self, values: &[f64], config: &MpsConfig) {
        let width = self.means.len();
        column_means(values, width, &mut self.means);
        column_variances(
            values,
            width,
            &self.means,
            config.variance_mode,
            &mut self.vars,
        );
        for ((t, &m), &v) in self.t.iter_mut().zip(&self.means).zip(&self.vars) {
            *t = studentize(m, v, config.degenerate_epsilon);
        }
    }

    /// Computes the statistics and returns the minimum.
    pub fn t_min(&mut self, values: &[f64], config: &MpsConfig) -> f64 {
        self.compute(values, config);
        self.t[argmin(&self.t)]
    }
}

fn column_means(values: &[f64], width: usize, means: &mut [f64]) {
    means.fill(0.0);
    let n = values.len() / width;
    for row in values.chunks_exact(width) {
        for (acc, &v) in means.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for m in means.iter_mut() {
        *m /= n as f64;
    }
}

fn column_variances(
    values: &[f64],
    width: usize,
    means: &[f64],
    mode: VarianceMode,
    vars: &mut [f64],
) {
    vars.fill(0.0);
    let n = values.len() / width;
    for row in values.chunks_exact(width) {
        for ((acc, &v), &m) in vars.iter_mut().zip(row).zip(means) {
            let e = v - m;
            *acc += e * e;
        }
    }
    let divisor = match mode {
        VarianceMode::PaperLiteral => (n - 1) as f64,
        VarianceMode::MeanScaled => ((n - 1) * n) as f64,
    };
    for v in vars.iter_mut() {
        *v /= divisor;
    }
}
