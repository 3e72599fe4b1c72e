//! Sequential test-and-exclusion and the decisions built on top of it.
//!
//! Each iteration tests whether the active candidates are equally close to
//! the target. On rejection the candidate with the smallest studentized
//! statistic moves into the predicted set; the loop ends when the test
//! accepts or a single candidate remains.

use serde::{Deserialize, Serialize};

use crate::candidates::CandidateSet;
use crate::config::MpsConfig;
use crate::error::{MpsError, Result};
use crate::matrix::DistanceMatrix;
use crate::permutation::{null_distribution, p_value};
use crate::stats::{t_min, t_statistics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    /// Equal closeness rejected; the argmin model was excluded into the set.
    RejectExclude,
    /// Equal closeness not rejected; the loop stopped.
    AcceptStop,
    /// One active candidate left; nothing to test.
    SingletonStop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub active_ids: Vec<String>,
    /// One value per active id; empty for a singleton stop.
    pub t_statistics: Vec<f64>,
    pub t_min_observed: Option<f64>,
    pub argmin_id: Option<String>,
    pub p_value: Option<f64>,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpsResult {
    /// Excluded models in exclusion order.
    pub predicted_set: Vec<String>,
    pub iterations: Vec<Iteration>,
    /// p-value of the test on the full candidate set. 1.0 when untestable.
    pub ni_score: f64,
    /// False when the initial candidate set had a single member.
    pub ni_testable: bool,
    /// p-value of the last test performed. 1.0 when none was.
    pub terminal_p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskVerdict {
    RiskFree,
    Risky,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseVerdict {
    pub suspect_id: String,
    pub is_provenance: bool,
    /// Iteration (0-based) at which the suspect was excluded, if it was.
    pub suspect_excluded_at: Option<usize>,
    /// Controls that ended up in the predicted set.
    pub control_contamination: Vec<String>,
    pub underlying: MpsResult,
}

/// Runs the exclusion loop over the active members of `candidates`.
pub fn run_mps(
    matrix: &DistanceMatrix,
    candidates: &CandidateSet,
    config: &MpsConfig,
) -> Result<MpsResult> {
    config.validate()?;
    candidates.check_against(matrix)?;
    if candidates.active_count() == 0 {
        return Err(MpsError::EmptyCandidateSet);
    }
    if matrix.prompt_count() < 2 {
        return Err(MpsError::InsufficientPrompts(matrix.prompt_count()));
    }

    let mut active = candidates.clone();
    let mut predicted_set = Vec::new();
    let mut iterations = Vec::new();

    loop {
        if active.active_count() <= 1 {
            iterations.push(Iteration {
                active_ids: active.active_ids(),
                t_statistics: Vec::new(),
                t_min_observed: None,
                argmin_id: None,
                p_value: None,
                decision: Decision::SingletonStop,
            });
            break;
        }

        let k = iterations.len();
        let stats = t_statistics(matrix, &active, config)?;
        let observed = t_min(&stats);
        let null = null_distribution(matrix, &active, config, k as u64)?;
        let p = p_value(observed.value, &null, config.p_value_mode);

        let reject = p <= config.alpha;
        iterations.push(Iteration {
            active_ids: stats.active_ids.clone(),
            t_statistics: stats.values.clone(),
            t_min_observed: Some(observed.value),
            argmin_id: Some(observed.argmin_id.clone()),
            p_value: Some(p),
            decision: if reject {
                Decision::RejectExclude
            } else {
                Decision::AcceptStop
            },
        });
        if !reject {
            break;
        }
        active.deactivate(stats.active_indices[observed.position]);
        predicted_set.push(observed.argmin_id);
    }

    let p_values: Vec<f64> = iterations.iter().filter_map(|it| it.p_value).collect();
    Ok(MpsResult {
        predicted_set,
        ni_score: p_values.first().copied().unwrap_or(1.0),
        ni_testable: !p_values.is_empty(),
        terminal_p_value: p_values.last().copied().unwrap_or(1.0),
        iterations,
    })
}

/// p-value of the equal-closeness test on the full candidate set. Higher
/// values mean less evidence that the target derives from any candidate.
pub fn ni_score(
    matrix: &DistanceMatrix,
    candidates: &CandidateSet,
    config: &MpsConfig,
) -> Result<f64> {
    config.validate()?;
    candidates.check_against(matrix)?;
    let m = candidates.active_count();
    if m < 2 {
        return Err(MpsError::CandidateSetTooSmallForNI(m));
    }
    let stats = t_statistics(matrix, candidates, config)?;
    let null = null_distribution(matrix, candidates, config, 0)?;
    Ok(p_value(t_min(&stats).value, &null, config.p_value_mode))
}

/// An empty predicted set means no evidence of reuse.
pub fn risk_verdict(result: &MpsResult) -> RiskVerdict {
    if result.predicted_set.is_empty() {
        RiskVerdict::RiskFree
    } else {
        RiskVerdict::Risky
    }
}

/// Tests one suspected parent against known-unrelated controls.
///
/// The ordinary exclusion loop runs over `{suspect} ∪ controls`; the suspect
/// is a provenance model iff it lands in the predicted set. Controls that get
/// excluded are reported rather than treated as an error.
pub fn pairwise_verdict<S: AsRef<str>>(
    matrix: &DistanceMatrix,
    suspect_id: &str,
    control_ids: &[S],
    config: &MpsConfig,
) -> Result<PairwiseVerdict> {
    if matrix.index_of(suspect_id).is_none() {
        return Err(MpsError::UnknownModelId(suspect_id.to_string()));
    }
    if control_ids.is_empty() {
        return Err(MpsError::NoControls);
    }
    let mut members = vec![suspect_id.to_string()];
    for id in control_ids {
        let id = id.as_ref();
        if id == suspect_id {
            return Err(MpsError::OverlappingSuspectControl(id.to_string()));
        }
        if matrix.index_of(id).is_none() {
            return Err(MpsError::UnknownModelId(id.to_string()));
        }
        members.push(id.to_string());
    }
    let candidates = CandidateSet::only(matrix, &members)?;
    let underlying = run_mps(matrix, &candidates, config)?;

    let suspect_excluded_at = underlying.iterations.iter().position(|it| {
        it.decision == Decision::RejectExclude && it.argmin_id.as_deref() == Some(suspect_id)
    });
    let control_contamination = underlying
        .predicted_set
        .iter()
        .filter(|id| id.as_str() != suspect_id)
        .cloned()
        .collect();
    Ok(PairwiseVerdict {
        suspect_id: suspect_id.to_string(),
        is_provenance: suspect_excluded_at.is_some(),
        suspect_excluded_at,
        control_contamination,
        underlying,
    })
}
