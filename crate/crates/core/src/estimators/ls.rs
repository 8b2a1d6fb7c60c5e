use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal_model::ConvolutionMatrix;
use crate::{CMatrix, CVector, Complex64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LsMethod {
    /// Cholesky on `AᴴA + δI`; refuses singular systems.
    #[default]
    NormalEquations,
    /// SVD; minimum-norm solution when `AᴴA` is singular.
    PseudoInverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LsConfig {
    /// δ in `(AᴴA + δI) h = Aᴴb`.
    pub ridge: f64,
    pub method: LsMethod,
}

impl LsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::config(
                &["ls.ridge"],
                format!("ridge must be finite and non-negative, got {}", self.ridge),
            ));
        }
        Ok(())
    }
}

/// `argmin ‖b − Ah‖² + δ‖h‖²`.
pub fn ls_solve(a: &CMatrix, b: &CVector, cfg: &LsConfig) -> Result<CVector> {
    cfg.validate()?;
    if a.nrows() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "matrix has {} rows, data has {} entries",
            a.nrows(),
            b.len()
        )));
    }
    match cfg.method {
        LsMethod::NormalEquations => {
            let gram = a.adjoint() * a;
            let rhs = a.ad_mul(b);
            solve_regularized(gram, &rhs, cfg.ridge)
        }
        LsMethod::PseudoInverse => pseudo_inverse_solve(a, b, cfg.ridge),
    }
}

/// [`ls_solve`] for a convolution operator, using its structured Gram matrix.
pub(crate) fn ls_solve_convolution(
    op: &ConvolutionMatrix,
    b: &CVector,
    cfg: &LsConfig,
) -> Result<CVector> {
    cfg.validate()?;
    if op.rows() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "operator has {} rows, data has {} entries",
            op.rows(),
            b.len()
        )));
    }
    match cfg.method {
        LsMethod::NormalEquations => solve_regularized(op.gram(), &op.adjoint_apply(b)?, cfg.ridge),
        LsMethod::PseudoInverse => pseudo_inverse_solve(&op.to_dense(), b, cfg.ridge),
    }
}

/// Solves `(G + δI) h = rhs` for Hermitian PSD `G` by Cholesky. A pivot
/// below `n·ε·max diag` is reported as singular.
pub(crate) fn solve_regularized(mut gram: CMatrix, rhs: &CVector, ridge: f64) -> Result<CVector> {
    let n = gram.nrows();
    for i in 0..n {
        gram[(i, i)] += Complex64::new(ridge, 0.0);
    }
    let scale = (0..n).map(|i| gram[(i, i)].re).fold(0.0, f64::max);
    if scale <= 0.0 {
        return Err(Error::SingularSystem(
            "normal equations are identically zero".into(),
        ));
    }
    let chol = Cholesky::new(gram).ok_or_else(|| {
        Error::SingularSystem("normal equations are not positive definite".into())
    })?;
    let threshold = n as f64 * f64::EPSILON * scale;
    let l = chol.l_dirty();
    if let Some(i) = (0..n).find(|&i| l[(i, i)].norm_sqr() <= threshold) {
        return Err(Error::SingularSystem(format!(
            "pivot {i} of the normal equations is numerically zero"
        )));
    }
    let h = chol.solve(rhs);
    if h.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::SingularSystem("solution is not finite".into()));
    }
    Ok(h)
}

/// Tikhonov-filtered SVD solve; with `ridge == 0` this is the minimum-norm
/// least-squares solution.
fn pseudo_inverse_solve(a: &CMatrix, b: &CVector, ridge: f64) -> Result<CVector> {
    let svd = a.clone().svd(true, true);
    let (u, v_t) = match (&svd.u, &svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::SingularSystem("SVD did not converge".into())),
    };
    let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = a.nrows().max(a.ncols()) as f64 * f64::EPSILON * s_max;
    let mut h = CVector::zeros(a.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            continue;
        }
        let coeff = u.column(k).dotc(b) * (s / (s * s + ridge));
        h += v_t.row(k).adjoint() * coeff;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real_vector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn cmat(rows: usize, cols: usize, v: &[f64]) -> CMatrix {
        CMatrix::from_row_iterator(rows, cols, v.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    #[test]
    fn identity_system() {
        let a = CMatrix::identity(3, 3);
        let b = real_vector(&[1.0, 2.0, 3.0]);
        assert_eq!(ls_solve(&a, &b, &LsConfig::default()).unwrap(), b);
    }

    #[test]
    fn consistent_tall_system() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let a = CMatrix::from_fn(6, 3, |_, _| {
            Complex64::new(StandardNormal.sample(&mut rng), 0.0)
        });
        let truth = real_vector(&[1.0, -1.0, 2.0]);
        let b = &a * &truth;
        for method in [LsMethod::NormalEquations, LsMethod::PseudoInverse] {
            let h = ls_solve(&a, &b, &LsConfig { ridge: 0.0, method }).unwrap();
            assert!((h - &truth).norm() < 1e-10);
        }
    }

    #[test]
    fn averaging_oracle() {
        // min (0 - h)^2 + (2 - h)^2 is attained at h = 1.
        let h = ls_solve(
            &cmat(2, 1, &[1.0, 1.0]),
            &real_vector(&[0.0, 2.0]),
            &LsConfig::default(),
        )
        .unwrap();
        assert!((h[0].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn minimum_norm_on_rank_deficient_system() {
        let a = cmat(1, 2, &[1.0, 1.0]);
        let b = real_vector(&[2.0]);
        let cfg = LsConfig {
            ridge: 0.0,
            method: LsMethod::PseudoInverse,
        };
        let h = ls_solve(&a, &b, &cfg).unwrap();
        assert!((h - real_vector(&[1.0, 1.0])).norm() < 1e-14);
        assert!(matches!(
            ls_solve(&a, &b, &LsConfig::default()),
            Err(Error::SingularSystem(_))
        ));
    }

    #[test]
    fn ridge_rescues_singular_system() {
        let a = cmat(1, 2, &[1.0, 1.0]);
        let b = real_vector(&[2.0]);
        let cfg = LsConfig {
            ridge: 0.5,
            method: LsMethod::NormalEquations,
        };
        let h = ls_solve(&a, &b, &cfg).unwrap();
        // (AᴴA + 0.5 I) h = [2, 2]  =>  h = [0.8, 0.8]
        assert!((h - real_vector(&[0.8, 0.8])).norm() < 1e-14);
        let svd = ls_solve(
            &a,
            &b,
            &LsConfig {
                method: LsMethod::PseudoInverse,
                ..cfg
            },
        )
        .unwrap();
        assert!((svd - real_vector(&[0.8, 0.8])).norm() < 1e-14);
    }

    #[test]
    fn rejects_shape_mismatch_and_bad_ridge() {
        let a = CMatrix::identity(3, 3);
        assert!(ls_solve(&a, &real_vector(&[1.0]), &LsConfig::default()).is_err());
        let cfg = LsConfig {
            ridge: -1.0,
            ..LsConfig::default()
        };
        assert!(ls_solve(&a, &real_vector(&[1.0, 2.0, 3.0]), &cfg).is_err());
    }

    #[test]
    fn complex_system() {
        let a = CMatrix::from_fn(5, 2, |i, j| {
            Complex64::new(i as f64 + 1.0, (j as f64) - 0.5 * i as f64)
        });
        let truth = CVector::from_vec(vec![Complex64::new(0.5, -1.0), Complex64::new(-2.0, 0.25)]);
        let b = &a * &truth;
        let h = ls_solve(&a, &b, &LsConfig::default()).unwrap();
        assert!((h - truth).norm() < 1e-10);
    }
}
