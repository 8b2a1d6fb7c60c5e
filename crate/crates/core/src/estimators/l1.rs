//! Convex `p = 1` path: `min ‖b − Ah‖² + λ‖h‖₁` by accelerated proximal
//! gradient with gradient-based restart.

use super::{EstimateResult, StageDiagnostics};
use crate::error::{Error, Result};
use crate::{CMatrix, CVector, Complex64};

const POWER_ITERATIONS: usize = 500;
// Power iteration approaches the top eigenvalue from below.
const LIPSCHITZ_MARGIN: f64 = 1.01;

/// FISTA on the L1-penalized least-squares problem. Running out of
/// iterations is reported through `converged`, not as an error.
pub fn l1_sparse_solve(
    a: &CMatrix,
    b: &CVector,
    lambda: f64,
    max_iter: usize,
    tol: f64,
) -> Result<EstimateResult> {
    if a.nrows() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "matrix has {} rows, data has {} entries",
            a.nrows(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("matrix is empty".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if max_iter == 0 || tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(
            "max_iter and tol must be positive".into(),
        ));
    }

    let gram = a.adjoint() * a;
    let atb = a.ad_mul(b);
    let n = a.ncols();
    let cost =
        |h: &CVector| (b - a * h).norm_squared() + lambda * h.iter().map(|v| v.norm()).sum::<f64>();

    let top = largest_eigenvalue(&gram);
    if top == 0.0 {
        // A = 0: the penalty alone decides.
        let h = CVector::zeros(n);
        return Ok(finish(a, b, h, 0, true, lambda, vec![b.norm_squared()]));
    }
    let lipschitz = 2.0 * top * LIPSCHITZ_MARGIN;
    let step = 1.0 / lipschitz;
    let threshold = lambda * step;

    let mut x = CVector::zeros(n);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut trace = vec![cost(&x)];
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=max_iter {
        iterations = k;
        let grad = (&gram * &y - &atb) * Complex64::new(2.0, 0.0);
        let x_next = soft_threshold(&(&y - grad * Complex64::new(step, 0.0)), threshold);

        let change = (&x_next - &x).norm();
        let scale = x_next.norm();
        // Restart momentum when it points uphill.
        let uphill = (&y - &x_next).dotc(&(&x_next - &x)).re > 0.0;
        let t_next = if uphill {
            1.0
        } else {
            0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
        };
        y = if uphill {
            x_next.clone()
        } else {
            &x_next + (&x_next - &x) * Complex64::new((t - 1.0) / t_next, 0.0)
        };
        x = x_next;
        t = t_next;
        trace.push(cost(&x));
        if change <= tol * scale.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    Ok(finish(a, b, x, iterations, converged, lambda, trace))
}

fn finish(
    a: &CMatrix,
    b: &CVector,
    h: CVector,
    iterations: usize,
    converged: bool,
    lambda: f64,
    trace: Vec<f64>,
) -> EstimateResult {
    EstimateResult {
        diagnostics: StageDiagnostics {
            fit_residual: (b - a * &h).norm(),
            lambda: Some(lambda),
            ..StageDiagnostics::default()
        },
        final_cost: *trace.last().expect("non-empty trace"),
        h_hat: h,
        iterations,
        converged,
        cost_trace: trace,
    }
}

/// Complex soft threshold: shrinks each magnitude by `tau`, keeping phase.
pub(crate) fn soft_threshold(v: &CVector, tau: f64) -> CVector {
    v.map(|c| {
        let mag = c.norm();
        if mag <= tau {
            Complex64::new(0.0, 0.0)
        } else {
            c * ((mag - tau) / mag)
        }
    })
}

/// Largest eigenvalue of a Hermitian PSD matrix by power iteration from the
/// all-ones vector (deterministic).
fn largest_eigenvalue(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut v = CVector::from_element(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = m * &v;
        let norm = w.norm();
        if norm == 0.0 {
            // Ones happened to be in the null space; fall back to the trace bound.
            return (0..n).map(|i| m[(i, i)].re).sum();
        }
        let next = norm;
        v = w.unscale(norm);
        if (next - estimate).abs() <= 1e-12 * next {
            return next;
        }
        estimate = next;
    }
    estimate
}
