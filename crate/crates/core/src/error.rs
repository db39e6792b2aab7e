use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: expected n={expected_n}, L={expected_len}; found n={found_n}, L={found_len}")]
    GridMismatch {
        expected_n: usize,
        expected_len: f64,
        found_n: usize,
        found_len: f64,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("nonpositive depth: h[{index}] = {value}")]
    NonPositiveDepth { index: usize, value: f64 },

    #[error("dry state during Newton iteration {iteration}: h[{index}] = {value}")]
    DryState {
        iteration: usize,
        index: usize,
        value: f64,
    },

    #[error("Newton did not converge: residual {final_residual:e} > tol {tol:e} after {} iterations", trace.len().saturating_sub(1))]
    NewtonDivergence {
        tol: f64,
        final_residual: f64,
        /// Residual max-norm before every iteration, and after the last one.
        trace: Vec<f64>,
    },

    #[error("singular Jacobian (pivot {pivot:e} at row {row}): {hint}")]
    SingularJacobian {
        row: usize,
        pivot: f64,
        hint: String,
    },

    #[error("linear solver breakdown: residual {residual:e} after {iterations} iterations")]
    SolverBreakdown { residual: f64, iterations: usize },

    #[error("instability at t = {t}: max |field| = {max_abs:e}")]
    Instability { t: f64, max_abs: f64 },

    #[error("certification of scenario `{scenario}` failed: {detail}")]
    CertificationFailure { scenario: String, detail: String },

    #[error("need at least {needed} snapshots, got {got}")]
    InsufficientSnapshots { needed: usize, got: usize },

    #[error("step {step} (t = {t}) failed: {source}")]
    StepFailed {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("convergence study at n = {n} failed: {source}")]
    StudyRowFailed {
        n: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::GridMismatch { .. } => "grid_mismatch",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::NonPositiveDepth { .. } => "nonpositive_depth",
            Error::DryState { .. } => "dry_state",
            Error::NewtonDivergence { .. } => "newton_divergence",
            Error::SingularJacobian { .. } => "singular_jacobian",
            Error::SolverBreakdown { .. } => "solver_breakdown",
            Error::Instability { .. } => "instability",
            Error::CertificationFailure { .. } => "certification_failure",
            Error::InsufficientSnapshots { .. } => "insufficient_snapshots",
            Error::StepFailed { .. } => "step_failed",
            Error::StudyRowFailed { .. } => "study_row_failed",
        }
    }
}
