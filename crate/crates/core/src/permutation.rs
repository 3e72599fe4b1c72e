//! Permutation null for the minimum studentized statistic.
//!
//! Under the equal-closeness hypothesis the active models' distances on each
//! prompt are exchangeable, so shuffling every row independently and
//! recomputing the minimum statistic samples its null distribution.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::CandidateSet;
use crate::config::{MpsConfig, PValueMode};
use crate::error::{MpsError, Result};
use crate::matrix::DistanceMatrix;
use crate::rng::round_rng;
use crate::stats::{sample_relative_deviations, Moments};

/// Relative slack used when comparing a null sample against the observed
/// statistic. Statistics that are equal in exact arithmetic can differ in the
/// last bits after shuffling, and they must count as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    samples: Vec<f64>,
    master_seed: u64,
    iteration: u64,
}

impl NullDistribution {
    pub fn new(samples: Vec<f64>, master_seed: u64, iteration: u64) -> Result<Self> {
        if samples.is_empty() {
            return Err(MpsError::InvalidConfig(
                "a null distribution needs at least one sample".into(),
            ));
        }
        Ok(Self {
            samples,
            master_seed,
            iteration,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn permutations(&self) -> usize {
        self.samples.len()
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }
}

/// Shuffles each `width`-long row of a row-major buffer independently.
pub fn shuffle_rows<R: Rng + ?Sized>(values: &mut [f64], width: usize, rng: &mut R) {
    for row in values.chunks_exact_mut(width) {
        row.shuffle(rng);
    }
}

/// One permuted copy of the active columns of `matrix`.
///
/// Inactive models are dropped from the result; the returned matrix has the
/// active ids as its columns and, prompt by prompt, the same multiset of values.
pub fn permute_once<R: Rng + ?Sized>(
    matrix: &DistanceMatrix,
    active: &CandidateSet,
    rng: &mut R,
) -> Result<DistanceMatrix> {
    active.check_against(matrix)?;
    let cols = active.active_indices();
    if cols.len() < 2 {
        return Err(MpsError::InactiveSetTooSmall(cols.len()));
    }
    let mut values: Vec<f64> = matrix
        .rows()
        .flat_map(|row| cols.iter().map(move |&i| row[i]))
        .collect();
    shuffle_rows(&mut values, cols.len(), rng);
    DistanceMatrix::from_row_major(matrix.prompt_count(), active.active_ids(), values)
}

/// Samples `config.permutations` values of the minimum statistic under
/// per-prompt shuffling. Round `r` draws from the stream
/// `(config.seed, iteration, r)`; rounds may run in parallel.
pub fn null_distribution(
    matrix: &DistanceMatrix,
    active: &CandidateSet,
    config: &MpsConfig,
    iteration: u64,
) -> Result<NullDistribution> {
    config.validate()?;
    let width = active.active_count();
    if width < 2 {
        return Err(MpsError::InactiveSetTooSmall(width));
    }
    if matrix.prompt_count() < 2 {
        return Err(MpsError::InsufficientPrompts(matrix.prompt_count()));
    }
    // Row means are invariant under within-row shuffles, so centering once
    // and shuffling the centered values is the same as shuffling distances.
    let centered = sample_relative_deviations(matrix, active)?;
    let base = centered.as_row_major();

    let samples: Vec<f64> = (0..config.permutations as u64)
        .into_par_iter()
        .map_init(
            || (base.to_vec(), Moments::new(width)),
            |(buf, moments), round| {
                buf.copy_from_slice(base);
                let mut rng = round_rng(config.seed, iteration, round);
                shuffle_rows(buf, width, &mut rng);
                moments.t_min(buf, config)
            },
        )
        .collect();
    NullDistribution::new(samples, config.seed, iteration)
}

/// Fraction of null samples at or below the observed statistic.
pub fn p_value(t_min_observed: f64, null: &NullDistribution, mode: PValueMode) -> f64 {
    let count = count_at_or_below(t_min_observed, null.samples());
    let r = null.permutations() as f64;
    match mode {
        PValueMode::Raw => count as f64 / r,
        PValueMode::AddOneSmoothing => (count as f64 + 1.0) / (r + 1.0),
    }
}

/// Number of `samples` that are `<= observed`, with ties judged up to
/// [`TIE_TOLERANCE`].
pub fn count_at_or_below(observed: f64, samples: &[f64]) -> usize {
    let threshold = observed + TIE_TOLERANCE * observed.abs().max(1.0);
    samples.iter().filter(|&&s| s <= threshold).count()
}
