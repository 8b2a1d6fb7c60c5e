//! Lp-penalized least squares, `min ‖b − Ah‖² + λ Σ|hᵢ|^p` with `0 < p ≤ 1`,
//! solved by iterative reweighting.
//!
//! Each step rescales the columns of `A` by `W = diag(|hᵢ|^(1−p/2))` and
//! solves a ridge problem in the scaled variables:
//!
//! ```text
//! h_next = W (AW)ᴴ ((AW)(AW)ᴴ + μI)⁻¹ b  =  W ((AW)ᴴ(AW) + μI)⁻¹ (AW)ᴴ b
//! ```
//!
//! With `μ = λp/2` the step minimizes a quadratic upper bound of the cost
//! that touches it at the current iterate, so the cost never increases and
//! fixed points are stationary points of the cost.

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use super::ls::solve_regularized;
use super::{EstimateResult, StageDiagnostics};
use crate::error::{Error, Result};
use crate::{CMatrix, CVector, Complex64};

/// `sparse_gradient` refuses taps smaller than this when `λ > 0`.
pub const GRADIENT_SINGULARITY_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparseInit {
    /// Ridge solution with ridge `λp`.
    #[default]
    LsSolution,
    Ones,
}

/// Ridge weight `μ` used in each reweighted solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerRegularizer {
    /// `μ = λp/2`: zero of the cost gradient, monotone descent.
    #[default]
    Stationary,
    /// `μ = λp`.
    LambdaBar,
    /// `μ = λ`.
    Lambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SparseSolverConfig {
    pub p: f64,
    pub lambda: f64,
    pub max_iter: usize,
    /// Stop once `‖h_next − h‖ < tol·‖h‖`.
    pub tol: f64,
    /// Magnitudes are clamped to at least this before computing weights, and
    /// taps that fall below it are set to zero.
    pub eps_floor: f64,
    pub init: SparseInit,
    pub inner_regularizer: InnerRegularizer,
}

impl Default for SparseSolverConfig {
    fn default() -> Self {
        Self {
            p: 0.5,
            lambda: 0.1,
            max_iter: 200,
            tol: 1e-6,
            eps_floor: 1e-12,
            init: SparseInit::LsSolution,
            inner_regularizer: InnerRegularizer::Stationary,
        }
    }
}

impl SparseSolverConfig {
    /// `λ̄ = λp`, the weight in front of `Π(h)h` in the gradient.
    pub fn lambda_bar(&self) -> f64 {
        self.lambda * self.p
    }

    pub fn inner_weight(&self) -> f64 {
        match self.inner_regularizer {
            InnerRegularizer::Stationary => 0.5 * self.lambda_bar(),
            InnerRegularizer::LambdaBar => self.lambda_bar(),
            InnerRegularizer::Lambda => self.lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::config(
                &["sparse.solver.p"],
                format!("p must lie in (0, 1], got {}", self.p),
            ));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::config(
                &["sparse.solver.lambda"],
                format!("lambda must be positive, got {}", self.lambda),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::config(
                &["sparse.solver.max_iter"],
                "max_iter must be positive",
            ));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::config(
                &["sparse.solver.tol"],
                "tol must be positive",
            ));
        }
        if !(self.eps_floor > 0.0 && self.eps_floor.is_finite()) {
            return Err(Error::config(
                &["sparse.solver.eps_floor"],
                "eps_floor must be positive",
            ));
        }
        Ok(())
    }
}

/// `‖b − Ah‖² + λ Σ|hᵢ|^p`.
pub fn sparse_cost(h: &CVector, a: &CMatrix, b: &CVector, p: f64, lambda: f64) -> f64 {
    let residual = b - a * h;
    residual.norm_squared() + lambda * h.iter().map(|v| v.norm().powf(p)).sum::<f64>()
}

/// `2Aᴴ(Ah − b) + λp Π(h) h` with `Π(h) = diag(|hᵢ|^(p−2))`.
///
/// For complex `h` this is twice the derivative with respect to `conj(h)`.
pub fn sparse_gradient(
    h: &CVector,
    a: &CMatrix,
    b: &CVector,
    p: f64,
    lambda: f64,
) -> Result<CVector> {
    let mut grad = a.ad_mul(&(a * h - b)) * Complex64::new(2.0, 0.0);
    if lambda == 0.0 {
        return Ok(grad);
    }
    for (i, (g, hi)) in grad.iter_mut().zip(h.iter()).enumerate() {
        let mag = hi.norm();
        if mag < GRADIENT_SINGULARITY_THRESHOLD {
            return Err(Error::SingularGradient {
                index: i,
                magnitude: mag,
                threshold: GRADIENT_SINGULARITY_THRESHOLD,
            });
        }
        *g += hi * (lambda * p * mag.powf(p - 2.0));
    }
    Ok(grad)
}

/// Reweighted least squares for the Lp-penalized problem.
pub fn irls_sparse_solve(
    a: &CMatrix,
    b: &CVector,
    cfg: &SparseSolverConfig,
) -> Result<EstimateResult> {
    irls_sparse_solve_observed(a, b, cfg, |_, _| {})
}

/// [`irls_sparse_solve`], calling `observer(k, h_k)` on the initial point
/// (`k = 0`) and after every update.
pub fn irls_sparse_solve_observed(
    a: &CMatrix,
    b: &CVector,
    cfg: &SparseSolverConfig,
    observer: impl FnMut(usize, &CVector),
) -> Result<EstimateResult> {
    if a.nrows() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "matrix has {} rows, data has {} entries",
            a.nrows(),
            b.len()
        )));
    }
    let gram = a.adjoint() * a;
    let atb = a.ad_mul(b);
    irls_with_gram(a, gram, atb, b, cfg, observer)
}

pub(crate) fn irls_with_gram(
    a: &CMatrix,
    gram: CMatrix,
    atb: CVector,
    b: &CVector,
    cfg: &SparseSolverConfig,
    mut observer: impl FnMut(usize, &CVector),
) -> Result<EstimateResult> {
    cfg.validate()?;
    if a.is_empty() {
        return Err(Error::InvalidArgument("matrix is empty".into()));
    }
    let n = a.ncols();
    let mu = cfg.inner_weight();
    let exponent = 1.0 - 0.5 * cfg.p;
    let cost = |h: &CVector| sparse_cost(h, a, b, cfg.p, cfg.lambda);

    let mut h =
        match cfg.init {
            SparseInit::LsSolution => solve_regularized(gram.clone(), &atb, cfg.lambda_bar())
                .map_err(|e| Error::SolverBreakdown {
                    iteration: 0,
                    reason: e.to_string(),
                })?,
            SparseInit::Ones => CVector::from_element(n, Complex64::new(1.0, 0.0)),
        };
    observer(0, &h);
    let mut trace = vec![cost(&h)];
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=cfg.max_iter {
        iterations = k;
        let w: Vec<f64> = h
            .iter()
            .map(|v| v.norm().max(cfg.eps_floor).powf(exponent))
            .collect();
        let mut next = if a.nrows() < n {
            row_space_step(a, &w, b, mu, k)?
        } else {
            column_space_step(&gram, &atb, &w, mu, k)?
        };
        for v in next.iter_mut() {
            if v.norm() < cfg.eps_floor {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        if next.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::SolverBreakdown {
                iteration: k,
                reason: "iterate is not finite".into(),
            });
        }
        let change = (&next - &h).norm();
        let scale = h.norm();
        h = next;
        observer(k, &h);
        trace.push(cost(&h));
        if change <= cfg.tol * scale || (scale == 0.0 && change == 0.0) {
            converged = true;
            break;
        }
    }

    let fit_residual = (b - a * &h).norm();
    Ok(EstimateResult {
        final_cost: *trace.last().expect("trace holds the initial cost"),
        h_hat: h,
        iterations,
        converged,
        diagnostics: StageDiagnostics {
            fit_residual,
            lambda: Some(cfg.lambda),
            ..StageDiagnostics::default()
        },
        cost_trace: trace,
    })
}

/// `W ((AW)ᴴ(AW) + μI)⁻¹ W Aᴴb`, an n×n solve.
fn column_space_step(
    gram: &CMatrix,
    atb: &CVector,
    w: &[f64],
    mu: f64,
    k: usize,
) -> Result<CVector> {
    let n = w.len();
    let mut m = CMatrix::from_fn(n, n, |i, j| gram[(i, j)] * (w[i] * w[j]));
    for i in 0..n {
        m[(i, i)] += Complex64::new(mu, 0.0);
    }
    let rhs = CVector::from_fn(n, |i, _| atb[i] * w[i]);
    let chol = Cholesky::new(m).ok_or_else(|| breakdown(k))?;
    let q = chol.solve(&rhs);
    Ok(CVector::from_fn(n, |i, _| q[i] * w[i]))
}

/// `W (AW)ᴴ ((AW)(AW)ᴴ + μI)⁻¹ b`, an m×m solve for wide `A`.
fn row_space_step(a: &CMatrix, w: &[f64], b: &CVector, mu: f64, k: usize) -> Result<CVector> {
    let mut aw = a.clone();
    for (j, mut col) in aw.column_iter_mut().enumerate() {
        col *= Complex64::new(w[j], 0.0);
    }
    let mut m = &aw * aw.adjoint();
    for i in 0..m.nrows() {
        m[(i, i)] += Complex64::new(mu, 0.0);
    }
    let chol = Cholesky::new(m).ok_or_else(|| breakdown(k))?;
    let u = chol.solve(b);
    let q = aw.ad_mul(&u);
    Ok(CVector::from_fn(w.len(), |i, _| q[i] * w[i]))
}

fn breakdown(k: usize) -> Error {
    Error::SolverBreakdown {
        iteration: k,
        reason: "reweighted system is not positive definite".into(),
    }
}
