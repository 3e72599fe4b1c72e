//! Synthetic lineages, the Monte Carlo harness, and an exhaustive permutation oracle.
//!
//! A scenario plants a few "provenance" columns whose distances to the target
//! are drawn around smaller means than the unrelated columns. Deeper hops sit
//! closer to the unrelated mean, mimicking signal decay along a derivation
//! chain. Default means are calibration constants, not measured values.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::CandidateSet;
use crate::config::{MpsConfig, VarianceMode};
use crate::error::{MpsError, Result};
use crate::matrix::DistanceMatrix;
use crate::mps::{risk_verdict, run_mps, MpsResult, RiskVerdict};
use crate::permutation::TIE_TOLERANCE;
use crate::rng::{scenario_rng, trial_seed};

/// Per-prompt distance law used for every column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceModel {
    /// Binary distances, 1 with probability equal to the column mean
    /// (token-mode fingerprints). `spread` is unused.
    Bernoulli,
    /// Gaussian around the column mean with std-dev `spread`, clamped to
    /// `[0, 1]` (semantic-mode fingerprints).
    TruncatedGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub unrelated_mean: f64,
    /// Means for 1-, 2- and 3-hop ancestors.
    pub hop_means: [f64; 3],
    pub spread: f64,
}

impl ScenarioParams {
    /// Token-like defaults.
    pub fn bernoulli_default() -> Self {
        Self {
            unrelated_mean: 0.95,
            hop_means: [0.35, 0.6, 0.75],
            spread: 0.0,
        }
    }

    /// Semantic-like defaults.
    pub fn gaussian_default() -> Self {
        Self {
            unrelated_mean: 0.5,
            hop_means: [0.1, 0.25, 0.35],
            spread: 0.08,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedModel {
    pub index: usize,
    /// Derivation distance from the target, 1 to 3.
    pub depth: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScenario {
    pub candidate_count: usize,
    pub prompt_count: usize,
    #[serde(default)]
    pub true_provenance: Vec<PlantedModel>,
    pub distance_model: DistanceModel,
    pub params: ScenarioParams,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticScenario {
    /// `tam` planted ancestors at depths 1..=tam in the first columns, default
    /// parameters for the chosen distance model.
    pub fn with_lineage(
        candidate_count: usize,
        prompt_count: usize,
        tam: usize,
        distance_model: DistanceModel,
    ) -> Self {
        let params = match distance_model {
            DistanceModel::Bernoulli => ScenarioParams::bernoulli_default(),
            DistanceModel::TruncatedGaussian => ScenarioParams::gaussian_default(),
        };
        Self {
            candidate_count,
            prompt_count,
            true_provenance: (0..tam)
                .map(|i| PlantedModel {
                    index: i,
                    depth: (i + 1).min(3) as u8,
                })
                .collect(),
            distance_model,
            params,
            seed: 0,
        }
    }

    /// Places every planted ancestor exactly `gap` below the unrelated mean
    /// at its deepest hop, keeping shallower hops no further than that.
    pub fn with_gap(mut self, gap: f64) -> Self {
        let deepest = self.params.unrelated_mean - gap;
        for m in &mut self.params.hop_means {
            *m = m.min(deepest);
        }
        let max_depth = self
            .true_provenance
            .iter()
            .map(|p| p.depth)
            .max()
            .unwrap_or(1);
        self.params.hop_means[max_depth as usize - 1] = deepest;
        for d in max_depth as usize..3 {
            self.params.hop_means[d] = deepest;
        }
        self
    }

    pub fn with_params(mut self, params: ScenarioParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn model_id(&self, index: usize) -> String {
        let width = self.candidate_count.saturating_sub(1).to_string().len();
        format!("model_{index:0width$}")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(MpsError::InvalidScenario(msg));
        if self.candidate_count < 2 {
            return bad(format!(
                "need at least 2 candidates, got {}",
                self.candidate_count
            ));
        }
        if self.prompt_count < 2 {
            return bad(format!(
                "need at least 2 prompts, got {}",
                self.prompt_count
            ));
        }
        let mut seen = vec![false; self.candidate_count];
        for p in &self.true_provenance {
            if p.index >= self.candidate_count {
                return bad(format!("planted index {} out of range", p.index));
            }
            if std::mem::replace(&mut seen[p.index], true) {
                return bad(format!("planted index {} listed twice", p.index));
            }
            if !(1..=3).contains(&p.depth) {
                return bad(format!("hop depth {} not in 1..=3", p.depth));
            }
        }
        let ScenarioParams {
            unrelated_mean: mu_u,
            hop_means: [mu1, mu2, mu3],
            spread,
        } = self.params;
        for (name, mu) in [
            ("unrelated", mu_u),
            ("1-hop", mu1),
            ("2-hop", mu2),
            ("3-hop", mu3),
        ] {
            if !(0.0..=1.0).contains(&mu) {
                return bad(format!("{name} mean {mu} outside [0, 1]"));
            }
        }
        if !(mu1 <= mu2 && mu2 <= mu3 && mu3 < mu_u) {
            return bad(format!(
                "means must satisfy 1-hop <= 2-hop <= 3-hop < unrelated, got {mu1}, {mu2}, {mu3}, {mu_u}"
            ));
        }
        if !(spread.is_finite() && spread >= 0.0) {
            return bad(format!(
                "spread must be finite and non-negative, got {spread}"
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedScenario {
    pub matrix: DistanceMatrix,
    /// Ids of planted ancestors, ascending by column.
    pub truth: Vec<String>,
}

/// Draws one distance matrix. Column `i` holds `N` i.i.d. draws around its
/// role's mean; the same seed always gives the same matrix.
pub fn generate_scenario(spec: &SyntheticScenario) -> Result<GeneratedScenario> {
    spec.validate()?;
    let m = spec.candidate_count;
    let n = spec.prompt_count;
    let mut means = vec![spec.params.unrelated_mean; m];
    for p in &spec.true_provenance {
        means[p.index] = spec.params.hop_means[p.depth as usize - 1];
    }

    let mut rng = scenario_rng(spec.seed);
    let mut columns = Vec::with_capacity(m);
    for &mu in &means {
        let col: Vec<f64> = match spec.distance_model {
            DistanceModel::Bernoulli => (0..n)
                .map(|_| if rng.random_bool(mu) { 1.0 } else { 0.0 })
                .collect(),
            DistanceModel::TruncatedGaussian => {
                let normal = Normal::new(mu, spec.params.spread)
                    .map_err(|e| MpsError::InvalidScenario(e.to_string()))?;
                (0..n)
                    .map(|_| normal.sample(&mut rng).clamp(0.0, 1.0))
                    .collect()
            }
        };
        columns.push(col);
    }

    let ids: Vec<String> = (0..m).map(|i| spec.model_id(i)).collect();
    let mut planted: Vec<usize> = spec.true_provenance.iter().map(|p| p.index).collect();
    planted.sort_unstable();
    let truth = planted.into_iter().map(|i| ids[i].clone()).collect();
    Ok(GeneratedScenario {
        matrix: DistanceMatrix::from_columns(ids, &columns)?,
        truth,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub truth: Vec<String>,
    pub predicted_set: Vec<String>,
    pub covered: bool,
    pub exact: bool,
    pub risky: bool,
    pub ni_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub trials: usize,
    /// Fraction of trials whose truth is contained in the predicted set.
    pub coverage_rate: f64,
    pub mean_set_size: f64,
    /// Fraction of trials whose predicted set equals the truth.
    pub exact_recovery_rate: f64,
    /// Micro-averaged over (trial, model) pairs; 1.0 when nothing was predicted.
    pub precision: f64,
    /// Micro-averaged over (trial, model) pairs; 1.0 when nothing was planted.
    pub recall: f64,
    /// Fraction of trials with a non-empty predicted set.
    pub risky_rate: f64,
    pub mean_ni_score: f64,
    pub records: Vec<TrialRecord>,
}

/// Runs `trials` independent scenario draws through the exclusion loop.
///
/// Trial `k` uses seed `trial_seed(spec.seed, k)` both for the scenario and
/// for the permutation streams, so reports are reproducible and independent
/// of scheduling.
pub fn monte_carlo(
    spec: &SyntheticScenario,
    trials: usize,
    config: &MpsConfig,
) -> Result<EvaluationReport> {
    if trials == 0 {
        return Err(MpsError::InvalidConfig("trials must be at least 1".into()));
    }
    spec.validate()?;
    config.validate()?;
    let records = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(spec.seed, trial as u64);
            let scenario = spec.clone().with_seed(seed);
            let generated = generate_scenario(&scenario)?;
            let cfg = config.with_seed(seed);
            let result = run_mps(
                &generated.matrix,
                &CandidateSet::all(&generated.matrix),
                &cfg,
            )?;
            Ok(trial_record(trial, seed, generated.truth, &result))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(records))
}

fn trial_record(trial: usize, seed: u64, truth: Vec<String>, result: &MpsResult) -> TrialRecord {
    let covered = truth.iter().all(|t| result.predicted_set.contains(t));
    let exact = covered && result.predicted_set.len() == truth.len();
    TrialRecord {
        trial,
        seed,
        covered,
        exact,
        risky: risk_verdict(result) == RiskVerdict::Risky,
        ni_score: result.ni_score,
        predicted_set: result.predicted_set.clone(),
        truth,
    }
}

/// Aggregates per-trial records into rates.
pub fn summarize(records: Vec<TrialRecord>) -> EvaluationReport {
    let n = records.len() as f64;
    let rate = |f: fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count() as f64 / n;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for r in &records {
        let hits = r
            .predicted_set
            .iter()
            .filter(|p| r.truth.contains(p))
            .count();
        tp += hits;
        fp += r.predicted_set.len() - hits;
        fn_ += r.truth.len() - hits;
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            1.0
        } else {
            num as f64 / den as f64
        }
    };
    EvaluationReport {
        trials: records.len(),
        coverage_rate: rate(|r| r.covered),
        mean_set_size: records
            .iter()
            .map(|r| r.predicted_set.len() as f64)
            .sum::<f64>()
            / n,
        exact_recovery_rate: rate(|r| r.exact),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        risky_rate: rate(|r| r.risky),
        mean_ni_score: records.iter().map(|r| r.ni_score).sum::<f64>() / n,
        records,
    }
}

/// Largest number of joint permutation patterns the exhaustive oracle visits.
pub const EXHAUSTIVE_LIMIT: f64 = 1e6;

/// Exact permutation p-value by enumerating every per-prompt permutation of
/// the active columns.
///
/// Statistics are computed through the pairwise-difference form (averaging
/// `L_i - L_j` over all active `j`) rather than by centering on row means, so
/// this serves as an independent check on the sampled test.
pub fn exhaustive_p_value(
    matrix: &DistanceMatrix,
    active: &CandidateSet,
    config: &MpsConfig,
) -> Result<f64> {
    active.check_against(matrix)?;
    let cols = active.active_indices();
    let width = cols.len();
    if width < 2 {
        return Err(MpsError::InactiveSetTooSmall(width));
    }
    let n = matrix.prompt_count();
    if n < 2 {
        return Err(MpsError::InsufficientPrompts(n));
    }
    let perms = all_permutations(width);
    let space = (perms.len() as f64).powi(n as i32);
    if space > EXHAUSTIVE_LIMIT {
        return Err(MpsError::SearchSpaceTooLarge(space));
    }

    let rows: Vec<Vec<f64>> = matrix
        .rows()
        .map(|r| cols.iter().map(|&i| r[i]).collect())
        .collect();
    let observed = pairwise_t_min(&rows, config);
    let threshold = observed + TIE_TOLERANCE * observed.abs().max(1.0);

    let mut digits = vec![0usize; n];
    let mut permuted = rows.clone();
    let (mut hits, mut total) = (0u64, 0u64);
    loop {
        for (t, &d) in digits.iter().enumerate() {
            for (slot, &src) in perms[d].iter().enumerate() {
                permuted[t][slot] = rows[t][src];
            }
        }
        if pairwise_t_min(&permuted, config) <= threshold {
            hits += 1;
        }
        total += 1;

        // Odometer increment over prompts.
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(hits as f64 / total as f64);
            }
            digits[pos] += 1;
            if digits[pos] < perms.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                extend(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

fn pairwise_t_min(rows: &[Vec<f64>], config: &MpsConfig) -> f64 {
    let n = rows.len();
    let m = rows[0].len();
    let eps = config.degenerate_epsilon;
    let mut best = f64::INFINITY;
    for i in 0..m {
        let per_prompt: Vec<f64> = rows
            .iter()
            .map(|r| (0..m).map(|j| r[i] - r[j]).sum::<f64>() / m as f64)
            .collect();
        let mean = per_prompt.iter().sum::<f64>() / n as f64;
        let mut var = per_prompt.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        if config.variance_mode == VarianceMode::MeanScaled {
            var /= n as f64;
        }
        let t = if var < eps {
            if mean.abs() < eps {
                0.0
            } else {
                mean.signum() * crate::stats::DEGENERATE_T
            }
        } else {
            mean / var.sqrt()
        };
        best = best.min(t);
    }
    best
}
