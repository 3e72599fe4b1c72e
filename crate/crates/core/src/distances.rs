//! Behavioral traces and the two per-prompt distance functions.
//!
//! Token traces hold one greedy next-token id per prompt; embedding traces
//! hold one precomputed vector per prompt. Token ids are compared as opaque
//! integers, so every trace in a bundle must come from the same tokenizer.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MpsError, Result};
use crate::matrix::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Token,
    Embedding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceEntries {
    Tokens(Vec<u64>),
    Embeddings(Vec<Vec<f64>>),
}

/// One model's per-prompt fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTrace {
    model_id: String,
    entries: TraceEntries,
}

impl ModelTrace {
    pub fn tokens(model_id: impl Into<String>, tokens: Vec<u64>) -> Self {
        Self {
            model_id: model_id.into(),
            entries: TraceEntries::Tokens(tokens),
        }
    }

    /// Embedding vectors must be finite and share one dimension `d >= 1`.
    pub fn embeddings(model_id: impl Into<String>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let model_id = model_id.into();
        if let Some(first) = vectors.first() {
            let dim = first.len();
            if dim == 0 {
                return Err(MpsError::InvalidTrace {
                    model: model_id,
                    reason: "embeddings must have dimension >= 1".into(),
                });
            }
            for (t, v) in vectors.iter().enumerate() {
                if v.len() != dim {
                    return Err(MpsError::DimensionMismatch {
                        left: dim,
                        right: v.len(),
                    });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(MpsError::InvalidTrace {
                        model: model_id,
                        reason: format!("non-finite embedding component at prompt {t}"),
                    });
                }
            }
        }
        Ok(Self {
            model_id,
            entries: TraceEntries::Embeddings(vectors),
        })
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn kind(&self) -> TraceKind {
        match self.entries {
            TraceEntries::Tokens(_) => TraceKind::Token,
            TraceEntries::Embeddings(_) => TraceKind::Embedding,
        }
    }

    pub fn entries(&self) -> &TraceEntries {
        &self.entries
    }

    pub fn len(&self) -> usize {
        match &self.entries {
            TraceEntries::Tokens(t) => t.len(),
            TraceEntries::Embeddings(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Embedding dimension; `None` for token traces or empty embedding traces.
    pub fn dimension(&self) -> Option<usize> {
        match &self.entries {
            TraceEntries::Tokens(_) => None,
            TraceEntries::Embeddings(e) => e.first().map(Vec::len),
        }
    }
}

/// `0` where the two models emit the same token, `1` elsewhere.
pub fn next_token_distance(a: &ModelTrace, b: &ModelTrace) -> Result<Vec<f64>> {
    match (&a.entries, &b.entries) {
        (TraceEntries::Tokens(x), TraceEntries::Tokens(y)) => {
            check_lengths(x.len(), y.len())?;
            Ok(x.iter()
                .zip(y)
                .map(|(p, q)| if p == q { 0.0 } else { 1.0 })
                .collect())
        }
        _ => Err(kind_mismatch(a, b, TraceKind::Token)),
    }
}

/// `1 - cos(a_t, b_t)` per prompt, clamped to `[0, 1]`.
pub fn semantic_distance(a: &ModelTrace, b: &ModelTrace) -> Result<Vec<f64>> {
    match (&a.entries, &b.entries) {
        (TraceEntries::Embeddings(x), TraceEntries::Embeddings(y)) => {
            check_lengths(x.len(), y.len())?;
            x.iter()
                .zip(y)
                .enumerate()
                .map(|(t, (u, v))| {
                    if u.len() != v.len() {
                        return Err(MpsError::DimensionMismatch {
                            left: u.len(),
                            right: v.len(),
                        });
                    }
                    let nu = dot(u, u);
                    let nv = dot(v, v);
                    for (norm, id) in [(nu, &a.model_id), (nv, &b.model_id)] {
                        if norm == 0.0 {
                            return Err(MpsError::ZeroNormEmbedding {
                                model: id.clone(),
                                prompt: t,
                            });
                        }
                    }
                    let cos = dot(u, v) / (nu * nv).sqrt();
                    Ok((1.0 - cos).clamp(0.0, 1.0))
                })
                .collect()
        }
        _ => Err(kind_mismatch(a, b, TraceKind::Embedding)),
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn check_lengths(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(MpsError::LengthMismatch { left, right });
    }
    Ok(())
}

fn kind_mismatch(a: &ModelTrace, b: &ModelTrace, wanted: TraceKind) -> MpsError {
    MpsError::KindMismatch(format!(
        "expected {wanted:?} traces, got `{}` = {:?} and `{}` = {:?}",
        a.model_id,
        a.kind(),
        b.model_id,
        b.kind()
    ))
}

/// A target trace and the candidate traces it is compared with.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceBundle {
    target: ModelTrace,
    candidates: Vec<ModelTrace>,
}

impl TraceBundle {
    pub fn new(target: ModelTrace, candidates: Vec<ModelTrace>) -> Result<Self> {
        let kind = target.kind();
        let n = target.len();
        for c in &candidates {
            if c.kind() != kind {
                return Err(kind_mismatch(&target, c, kind));
            }
            check_lengths(n, c.len())?;
            if let (Some(d0), Some(d1)) = (target.dimension(), c.dimension()) {
                if d0 != d1 {
                    return Err(MpsError::DimensionMismatch {
                        left: d0,
                        right: d1,
                    });
                }
            }
        }
        Ok(Self { target, candidates })
    }

    pub fn kind(&self) -> TraceKind {
        self.target.kind()
    }

    pub fn prompt_count(&self) -> usize {
        self.target.len()
    }

    pub fn target(&self) -> &ModelTrace {
        &self.target
    }

    pub fn candidates(&self) -> &[ModelTrace] {
        &self.candidates
    }
}

/// One column per candidate: its distance to the target on every prompt.
pub fn build_distance_matrix(bundle: &TraceBundle) -> Result<DistanceMatrix> {
    let distance = match bundle.kind() {
        TraceKind::Token => next_token_distance,
        TraceKind::Embedding => semantic_distance,
    };
    let columns = bundle
        .candidates
        .par_iter()
        .map(|c| distance(c, &bundle.target))
        .collect::<Result<Vec<_>>>()?;
    let ids = bundle
        .candidates
        .iter()
        .map(|c| c.model_id.clone())
        .collect();
    DistanceMatrix::from_columns(ids, &columns)
}
