use serde::{Deserialize, Serialize};

use crate::error::{MpsError, Result};

/// How the per-model variance entering the studentized statistic is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// Sample variance of the per-prompt deviations, divisor `N - 1`.
    #[default]
    PaperLiteral,
    /// Variance of the mean deviation: the sample variance divided by `N`.
    MeanScaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMode {
    /// `count / R`; can be exactly zero.
    #[default]
    Raw,
    /// `(1 + count) / (1 + R)`; always positive.
    AddOneSmoothing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpsConfig {
    pub alpha: f64,
    pub permutations: usize,
    pub seed: u64,
    pub variance_mode: VarianceMode,
    pub p_value_mode: PValueMode,
    pub degenerate_epsilon: f64,
}

impl Default for MpsConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            permutations: 1000,
            seed: 0,
            variance_mode: VarianceMode::default(),
            p_value_mode: PValueMode::default(),
            degenerate_epsilon: 1e-12,
        }
    }
}

impl MpsConfig {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_permutations(mut self, permutations: usize) -> Self {
        self.permutations = permutations;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_variance_mode(mut self, mode: VarianceMode) -> Self {
        self.variance_mode = mode;
        self
    }

    pub fn with_p_value_mode(mut self, mode: PValueMode) -> Self {
        self.p_value_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(MpsError::InvalidConfig(format!(
                "alpha must lie strictly between 0 and 1, got {}",
                self.alpha
            )));
        }
        if self.permutations == 0 {
            return Err(MpsError::InvalidConfig(
                "permutations must be at least 1".into(),
            ));
        }
        if !(self.degenerate_epsilon.is_finite() && self.degenerate_epsilon > 0.0) {
            return Err(MpsError::InvalidConfig(format!(
                "degenerate_epsilon must be a small positive number, got {}",
                self.degenerate_epsilon
            )));
        }
        Ok(())
    }
}
