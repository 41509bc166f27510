use thiserror::Error;

/// Errors raised by instances and by the shared morphism algebra.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CategoryError {
    #[error("invalid ring: {0}")]
    InvalidRing(String),

    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },

    #[error("instance {0} is not enumerable")]
    NonEnumerable(String),

    #[error("enumerating {what} would produce {size} items (limit {limit})")]
    TooLarge { what: String, size: u128, limit: u128 },

    #[error("{0} is not supported by this instance")]
    Unsupported(String),

    #[error("decision rule and refutation oracle disagree: {0}")]
    DecisionConflict(String),

    #[error("invalid object: {0}")]
    InvalidObject(String),

    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),

    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("subject is not a cokernel: {0}")]
    SubjectNotCokernel(String),

    #[error("subject is not a kernel: {0}")]
    SubjectNotKernel(String),

    #[error("object class {class} is not closed: {detail}")]
    ClassClosureViolation { class: String, detail: String },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("not a kernel-cokernel pair: {0}")]
    NotAKernelCokernelPair(String),

    #[error("the second morphism has no kernel: {0}")]
    KernelOfPMissing(String),

    #[error("a retraction has no kernel: {0}")]
    RetractionUnsplittable(String),

    #[error("bound mismatch: {0}")]
    BoundMismatch(String),

    #[error("sequence is stable, so it cannot witness maximality")]
    InputStable,

    #[error("morphism is not idempotent: {0}")]
    NotIdempotent(String),
}

pub type Result<T, E = CategoryError> = std::result::Result<T, E>;

pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> CategoryError {
    CategoryError::ShapeMismatch { op, detail: detail.into() }
}
