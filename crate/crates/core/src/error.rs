use thiserror::Error;

pub type Result<T> = std::result::Result<T, MpsError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MpsError {
    #[error("distance matrix is empty (need at least one prompt and one model)")]
    EmptyMatrix,

    #[error("non-finite distance at prompt {prompt}, model {model}")]
    NonFinite { prompt: usize, model: usize },

    #[error("distance {value} at prompt {prompt}, model {model} is outside [0, 1]")]
    OutOfRange {
        prompt: usize,
        model: usize,
        value: f64,
    },

    #[error("duplicate model id `{0}`")]
    DuplicateModelId(String),

    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unknown model id `{0}`")]
    UnknownModelId(String),

    #[error("suspect `{0}` is also listed as a control")]
    OverlappingSuspectControl(String),

    #[error("pairwise mode needs at least one control model")]
    NoControls,

    #[error("candidate set is empty")]
    EmptyCandidateSet,

    #[error("active candidate set is empty")]
    InactiveSetEmpty,

    #[error("active candidate set has {0} member(s), at least 2 are required")]
    InactiveSetTooSmall(usize),

    #[error("need at least 2 prompts for a sample variance, got {0}")]
    InsufficientPrompts(usize),

    #[error(
        "the non-infringement score needs at least 2 candidates, got {0}; \
         add unrelated control models to the candidate set"
    )]
    CandidateSetTooSmallForNI(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("trace kind mismatch: {0}")]
    KindMismatch(String),

    #[error("trace length mismatch: {left} vs {right} prompts")]
    LengthMismatch { left: usize, right: usize },

    #[error("embedding dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("zero-norm embedding in trace `{model}` at prompt {prompt}")]
    ZeroNormEmbedding { model: String, prompt: usize },

    #[error("invalid trace `{model}`: {reason}")]
    InvalidTrace { model: String, reason: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("exhaustive enumeration needs {0:.3e} permutation patterns (limit 1e6)")]
    SearchSpaceTooLarge(f64),
}
