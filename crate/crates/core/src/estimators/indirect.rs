//! Two-stage estimation of the primary channel from the cognitive radio's
//! observation, plus direct estimation of the relay channel from a probe.

use serde::{Deserialize, Serialize};

use super::l1::l1_sparse_solve;
use super::ls::{ls_solve_convolution, LsConfig};
use super::sparse::{irls_with_gram, SparseSolverConfig};
use super::{EstimateResult, StageDiagnostics};
use crate::channel_model::ChannelImpulseResponse;
use crate::error::{Error, Result};
use crate::signal_model::{ConvolutionMatrix, MatrixMode, MatrixModes, TrainingSignal};
use crate::CVector;

/// Where the sparse stage gets λ from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaRule {
    /// Use `SparseSolverConfig::lambda` as is.
    Fixed,
    /// `λ = scale · σ̂^exponent · ln N`, with σ̂ the noise standard deviation
    /// estimated from the relay-channel residual.
    NoiseScaled { scale: f64, exponent: f64 },
}

impl Default for LambdaRule {
    fn default() -> Self {
        LambdaRule::NoiseScaled {
            scale: 1.0,
            exponent: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparseAlgorithm {
    /// Reweighted least squares for any `0 < p ≤ 1`.
    #[default]
    Irls,
    /// FISTA on the convex `p = 1` problem.
    L1,
}

/// Sparse second stage: solver settings, λ rule and algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SparseStageConfig {
    pub solver: SparseSolverConfig,
    pub lambda_rule: LambdaRule,
    pub algorithm: SparseAlgorithm,
}

impl SparseStageConfig {
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if let LambdaRule::NoiseScaled { scale, exponent } = self.lambda_rule {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::config(
                    &["sparse.lambda_rule.scale"],
                    "scale must be positive",
                ));
            }
            if !exponent.is_finite() {
                return Err(Error::config(
                    &["sparse.lambda_rule.exponent"],
                    "exponent must be finite",
                ));
            }
        }
        Ok(())
    }

    /// Resolves λ for an `n_taps`-long channel given the stage-1 noise estimate.
    pub fn resolve_lambda(&self, noise_std: Option<f64>, n_taps: usize) -> Result<f64> {
        match self.lambda_rule {
            LambdaRule::Fixed => Ok(self.solver.lambda),
            LambdaRule::NoiseScaled { scale, exponent } => {
                let sigma = noise_std.ok_or_else(|| {
                    Error::InvalidArgument(
                        "noise-scaled lambda needs an overdetermined relay-channel stage".into(),
                    )
                })?;
                let lambda = scale * sigma.powf(exponent) * (n_taps.max(2) as f64).ln();
                // A noiseless link would give λ = 0; keep the problem well posed.
                Ok(lambda.max(f64::EPSILON))
            }
        }
    }
}

struct RelayEstimate {
    y_hat: CVector,
    residual: f64,
    noise_std: Option<f64>,
}

/// Stage 1: `ŷ = (H3ᴴH3)⁻¹H3ᴴz / g`.
fn recover_relay_input(
    z: &CVector,
    h3: &ChannelImpulseResponse,
    y_len: usize,
    h3_mode: MatrixMode,
    cfg: &LsConfig,
    relay_gain: f64,
) -> Result<RelayEstimate> {
    if !(relay_gain > 0.0 && relay_gain.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "relay gain must be positive and finite, got {relay_gain}"
        )));
    }
    let h3mat = ConvolutionMatrix::new(h3.taps().clone(), y_len, h3_mode)?;
    if h3mat.rows() != z.len() {
        return Err(Error::InvalidArgument(format!(
            "observation has {} samples, relay channel produces {}",
            z.len(),
            h3mat.rows()
        )));
    }
    let scaled = ls_solve_convolution(&h3mat, z, cfg)?;
    let residual = (z - h3mat.apply(&scaled)?).norm();
    let dof = z.len().saturating_sub(y_len);
    let noise_std = (dof > 0).then(|| residual / (dof as f64).sqrt() / relay_gain);
    Ok(RelayEstimate {
        y_hat: scaled.unscale(relay_gain),
        residual,
        noise_std,
    })
}

fn training_operator(
    x: &TrainingSignal,
    h3: &ChannelImpulseResponse,
    modes: MatrixModes,
    z: &CVector,
) -> Result<ConvolutionMatrix> {
    let (m, n) = (x.len(), h3.len());
    let expected = modes.cognitive_len(m, n);
    if z.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "observation has {} samples; training length {m}, {n} taps and modes {modes:?} give {expected}",
            z.len()
        )));
    }
    ConvolutionMatrix::new(x.samples().clone(), n, modes.x)
}

/// Two-stage least squares: invert the relay channel, then fit `h1` to the
/// recovered relay input.
pub fn indirect_ls(
    z: &CVector,
    x: &TrainingSignal,
    h3: &ChannelImpulseResponse,
    modes: MatrixModes,
    cfg: &LsConfig,
    relay_gain: f64,
) -> Result<EstimateResult> {
    let xmat = training_operator(x, h3, modes, z)?;
    let relay = recover_relay_input(z, h3, xmat.rows(), modes.h3, cfg, relay_gain)?;
    let h_hat = ls_solve_convolution(&xmat, &relay.y_hat, cfg)?;
    let fit_residual = (&relay.y_hat - xmat.apply(&h_hat)?).norm();
    let cost = fit_residual * fit_residual;
    Ok(EstimateResult {
        h_hat,
        iterations: 1,
        final_cost: cost,
        converged: true,
        diagnostics: StageDiagnostics {
            relay_residual: Some(relay.residual),
            fit_residual,
            noise_std: relay.noise_std,
            lambda: None,
        },
        cost_trace: vec![cost],
    })
}

/// Same first stage as [`indirect_ls`], then a sparse fit of `h1`.
pub fn indirect_sparse(
    z: &CVector,
    x: &TrainingSignal,
    h3: &ChannelImpulseResponse,
    modes: MatrixModes,
    ls_cfg: &LsConfig,
    sparse: &SparseStageConfig,
    relay_gain: f64,
) -> Result<EstimateResult> {
    sparse.validate()?;
    let xmat = training_operator(x, h3, modes, z)?;
    let relay = recover_relay_input(z, h3, xmat.rows(), modes.h3, ls_cfg, relay_gain)?;
    let lambda = sparse.resolve_lambda(relay.noise_std, h3.len())?;
    let solver = SparseSolverConfig {
        lambda,
        ..sparse.solver
    };
    let a = xmat.to_dense();
    let mut result = match sparse.algorithm {
        SparseAlgorithm::Irls => {
            let atb = xmat.adjoint_apply(&relay.y_hat)?;
            irls_with_gram(&a, xmat.gram(), atb, &relay.y_hat, &solver, |_, _| {})?
        }
        SparseAlgorithm::L1 => {
            l1_sparse_solve(&a, &relay.y_hat, lambda, solver.max_iter, solver.tol)?
        }
    };
    result.diagnostics.relay_residual = Some(relay.residual);
    result.diagnostics.noise_std = relay.noise_std;
    Ok(result)
}

/// Least-squares estimate of the relay channel from what came back after
/// sending `probe`. The observation length selects the matrix mode:
/// `len(probe) + n_taps − 1` for full, `len(probe)` for truncated.
pub fn estimate_reporting_channel(
    probe: &TrainingSignal,
    observed: &CVector,
    n_taps: usize,
    cfg: &LsConfig,
) -> Result<ChannelImpulseResponse> {
    if n_taps == 0 {
        return Err(Error::InvalidArgument("n_taps must be positive".into()));
    }
    let m = probe.len();
    let mode = if observed.len() == m + n_taps - 1 {
        MatrixMode::Full
    } else if observed.len() == m {
        MatrixMode::Truncated
    } else {
        return Err(Error::InvalidArgument(format!(
            "observation has {} samples; a probe of {m} through {n_taps} taps gives {} (full) or {m} (truncated)",
            observed.len(),
            m + n_taps - 1
        )));
    };
    let op = ConvolutionMatrix::new(probe.samples().clone(), n_taps, mode)?;
    let taps = ls_solve_convolution(&op, observed, cfg)?;
    ChannelImpulseResponse::dense(taps)
}
