//! Model provenance sets.
//!
//! Given per-prompt distances between a target model and `M` candidate
//! models, [`run_mps`] returns the candidates that are significantly closer
//! to the target than the rest. The set is built by repeatedly testing
//! whether all active candidates are equally close (a permutation test on
//! the smallest studentized relative deviation) and excluding the closest
//! candidate whenever the test rejects.
//!
//! - [`matrix`], [`candidates`], [`config`]: input types and validation
//! - [`stats`]: relative deviations and studentized statistics
//! - [`permutation`]: seeded, parallel permutation null and p-values
//! - [`mps`]: the exclusion loop, NI-Score, risk and pairwise verdicts
//! - [`distances`]: token and embedding traces to distance matrices
//! - [`simulator`]: synthetic lineages, Monte Carlo evaluation, exhaustive oracle

pub mod candidates;
pub mod config;
pub mod distances;
pub mod error;
pub mod matrix;
pub mod mps;
pub mod permutation;
pub mod rng;
pub mod simulator;
pub mod stats;

pub use candidates::CandidateSet;
pub use config::{MpsConfig, PValueMode, VarianceMode};
pub use distances::{
    build_distance_matrix, next_token_distance, semantic_distance, ModelTrace, TraceBundle,
    TraceEntries, TraceKind,
};
pub use error::{MpsError, Result};
pub use matrix::{validate_matrix, DistanceMatrix};
pub use mps::{
    ni_score, pairwise_verdict, risk_verdict, run_mps, Decision, Iteration, MpsResult,
    PairwiseVerdict, RiskVerdict,
};
pub use permutation::{null_distribution, p_value, permute_once, NullDistribution};
pub use simulator::{
    exhaustive_p_value, generate_scenario, monte_carlo, DistanceModel, EvaluationReport,
    GeneratedScenario, PlantedModel, ScenarioParams, SyntheticScenario, TrialRecord,
};
pub use stats::{t_min, t_statistics, TMin, TStatVector};
