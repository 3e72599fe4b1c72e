//! The shrinking candidate set of the exclusion loop.

use serde::{Deserialize, Serialize};

use crate::error::{MpsError, Result};
use crate::matrix::DistanceMatrix;

/// Candidate identities in matrix column order plus an active mask.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSet {
    model_ids: Vec<String>,
    active: Vec<bool>,
}

impl CandidateSet {
    /// Every column of `matrix` is an active candidate.
    pub fn all(matrix: &DistanceMatrix) -> Self {
        Self {
            model_ids: matrix.model_ids().to_vec(),
            active: vec![true; matrix.model_count()],
        }
    }

    /// Only the listed models are active. Column order still follows the matrix.
    pub fn only<S: AsRef<str>>(matrix: &DistanceMatrix, ids: &[S]) -> Result<Self> {
        let mut active = vec![false; matrix.model_count()];
        for id in ids {
            let id = id.as_ref();
            let idx = matrix
                .index_of(id)
                .ok_or_else(|| MpsError::UnknownModelId(id.to_string()))?;
            active[idx] = true;
        }
        Ok(Self {
            model_ids: matrix.model_ids().to_vec(),
            active,
        })
    }

    pub fn model_ids(&self) -> &[String] {
        &self.model_ids
    }

    pub fn len(&self) -> usize {
        self.model_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.model_ids.is_empty()
    }

    pub fn is_active(&self, index: usize) -> bool {
        self.active[index]
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Column indices of active members, ascending.
    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&i| self.active[i]).collect()
    }

    pub fn active_ids(&self) -> Vec<String> {
        self.active_indices()
            .into_iter()
            .map(|i| self.model_ids[i].clone())
            .collect()
    }

    /// Marks a column inactive. Returns whether it was active before.
    pub fn deactivate(&mut self, index: usize) -> bool {
        std::mem::replace(&mut self.active[index], false)
    }

    /// Checks that this set describes the columns of `matrix`.
    pub fn check_against(&self, matrix: &DistanceMatrix) -> Result<()> {
        if self.model_ids.as_slice() != matrix.model_ids() {
            return Err(MpsError::ShapeMismatch(
                "candidate ids do not match the matrix columns".into(),
            ));
        }
        Ok(())
    }
}
