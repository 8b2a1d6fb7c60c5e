//! Least-squares and sparse estimators for the primary channel, and the
//! two-stage wrappers that go through the relay channel first.

mod indirect;
mod l1;
mod ls;
mod sparse;

pub use indirect::{
    estimate_reporting_channel, indirect_ls, indirect_sparse, LambdaRule, SparseAlgorithm,
    SparseStageConfig,
};
pub use l1::l1_sparse_solve;
pub use ls::{ls_solve, LsConfig, LsMethod};
pub use sparse::{
    irls_sparse_solve, irls_sparse_solve_observed, sparse_cost, sparse_gradient, InnerRegularizer,
    SparseInit, SparseSolverConfig, GRADIENT_SINGULARITY_THRESHOLD,
};

use crate::CVector;

/// Residual norms and the noise/λ values each stage settled on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageDiagnostics {
    /// `‖z − H3 ŷ‖` of the relay-channel inversion, when there was one.
    pub relay_residual: Option<f64>,
    /// `‖b − A ĥ‖` of the final fit.
    pub fit_residual: f64,
    /// Noise standard deviation estimated from the relay-channel residual.
    pub noise_std: Option<f64>,
    /// Regularization weight actually used by a sparse stage.
    pub lambda: Option<f64>,
}

/// Output of every estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub h_hat: CVector,
    pub iterations: usize,
    /// Objective value at `h_hat`: plain squared residual for LS, the
    /// penalized cost for the sparse solvers.
    pub final_cost: f64,
    pub converged: bool,
    pub diagnostics: StageDiagnostics,
    /// Objective after each iterate, starting with the initial point.
    pub cost_trace: Vec<f64>,
}
