use thiserror::Error;

/// Errors shared by every module in this crate.
///
/// The variants mirror the ways a caller can hand us unusable data:
/// wrong shapes, degenerate spans, parameters outside the admissible
/// range, or hypotheses a checker refuses to proceed without.
#[derive(Debug, Error)]
pub enum KmuError {
    /// A vector or matrix has the wrong dimensions for the operation.
    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// Input vector at `index` is (numerically) in the span of its
    /// predecessors, so no orthonormal frame can be built from it.
    #[error("degenerate input: vector {index} lies in the span of the preceding vectors (residual norm {residual:.3e})")]
    DegenerateInput { index: usize, residual: f64 },

    /// A plane section failed its orthonormality or tangency contract.
    #[error("invalid plane: {reason} (residual {residual:.3e})")]
    InvalidPlane { reason: &'static str, residual: f64 },

    /// A structure parameter is outside its admissible domain.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// A parameter that is mandatory in this regime was not supplied.
    #[error("missing parameter: {0}")]
    MissingParameter(&'static str),

    /// A checker's mathematical hypothesis does not hold for the input.
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    /// A stated precondition was violated; carries the measured residual.
    #[error("precondition violated: {context} (residual {residual:.3e})")]
    Precondition { context: &'static str, residual: f64 },

    /// The ambient structure fails validation and the operation refuses
    /// to run on it. Carries the worst residual name for diagnosis.
    #[error("structure failed validation: worst residual {name} = {residual:.3e}")]
    InvalidStructure { name: &'static str, residual: f64 },

    /// The submanifold data fails validation for the requested mode.
    #[error("submanifold failed validation: worst residual {name} = {residual:.3e}")]
    InvalidSubmanifold { name: &'static str, residual: f64 },

    /// An exhaustive search would exceed the configured sample cap.
    #[error("search budget exceeded: {estimated} samples estimated, cap is {cap}")]
    Budget { estimated: u64, cap: u64 },

    /// Frame or coefficient index outside the valid range.
    #[error("index out of range: {context} (index {index}, len {len})")]
    IndexOutOfRange {
        context: &'static str,
        index: usize,
        len: usize,
    },

    /// Parameter list length disagrees with the geometry it must match.
    #[error("parameter count mismatch: {context} (expected {expected}, got {actual})")]
    ParameterCount {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// Two independent internal computation routes disagreed. This is a
    /// defect report, not a user error: results must not be trusted.
    #[error("internal cross-check failed: {context} (residual {residual:.3e})")]
    CrossCheck { context: &'static str, residual: f64 },
}

pub type Result<T> = std::result::Result<T, KmuError>;
