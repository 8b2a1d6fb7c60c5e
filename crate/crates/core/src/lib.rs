//! Indirect sensing of the primary channel in a cognitive amplify-and-forward
//! relay link.
//!
//! A primary transmitter sends a known training burst `x` through the primary
//! channel `h1` to an AF relay, which retransmits what it hears through the
//! sensing channel `h3` to a cognitive radio. The cognitive radio only sees
//! `z = H3 (g·y) + n3` with `y = X h1 + n1`, and recovers `h1` from it in two
//! stages: a least-squares inversion of the relay channel, followed by either
//! a second least-squares fit or an Lp-penalized sparse fit.
//!
//! Modules:
//! - [`channel_model`]: dense and sparse impulse responses, AWGN.
//! - [`signal_model`]: training signals, convolution matrices, the forward link.
//! - [`estimators`]: LS, IRLS (Lp) and FISTA (L1) solvers plus the two-stage wrappers.
//! - [`experiment`]: seeded Monte Carlo runner with RMSE metrics and empirical CDFs.

pub mod channel_model;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod signal_model;

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

pub use crate::channel_model::{
    generate_dense_channel, generate_sparse_channel, sample_awgn, snr_to_noise_variance,
    ChannelImpulseResponse, ChannelKind, NoiseLevel, NoiseSpec, PowerNormalization, ScalarField,
};
pub use crate::error::{Error, Result};
pub use crate::estimators::{
    estimate_reporting_channel, indirect_ls, indirect_sparse, irls_sparse_solve, l1_sparse_solve,
    ls_solve, sparse_cost, sparse_gradient, EstimateResult, InnerRegularizer, LambdaRule, LsConfig,
    LsMethod, SparseAlgorithm, SparseInit, SparseSolverConfig, SparseStageConfig, StageDiagnostics,
};
pub use crate::experiment::{
    empirical_cdf, run_experiment, run_experiment_with_threads, trial_rmse, EmpiricalCdf,
    EstimatorKind, ExperimentConfig, ExperimentResult, H3Knowledge, Metric, Preset, TrialResult,
};
pub use crate::signal_model::{
    build_convolution_matrix, convolve, make_training_signal, simulate_link, simulate_probe,
    ConvolutionMatrix, LinkObservation, LinkSetup, MatrixMode, MatrixModes, TrainingScheme,
    TrainingSignal,
};

/// Dense complex matrix used by every solver.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Builds a complex vector with zero imaginary parts.
pub fn real_vector(values: &[f64]) -> CVector {
    CVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)))
}
