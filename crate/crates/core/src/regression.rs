//! Ordinary and generalized least squares over a lagged design.

use crate::error::{Error, Result};
use crate::matrix::{cholesky, CholeskyFactor, SymmetricMatrix};
use crate::series::{LaggedDesign, TimeSeries};

/// Which estimator produced a [`FitResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    Ols,
    Gls,
}

/// Estimated coefficients with residuals and the coefficient covariance.
///
/// Residuals are always reported in the original scale, `y - X beta`, and
/// `ssr` is their plain sum of squares; for GLS the whitened quantities stay
/// internal.
#[derive(Debug, Clone)]
pub struct FitResult {
    coefficients: Vec<f64>,
    residuals: Vec<f64>,
    ssr: f64,
    coef_covariance: SymmetricMatrix,
    method: FitMethod,
}

impl FitResult {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Sum of squared (raw-scale) residuals.
    pub fn ssr(&self) -> f64 {
        self.ssr
    }

    /// Covariance of the coefficient estimates: `s^2 (X^T X)^{-1}` for OLS,
    /// `(X^T Omega^{-1} X)^{-1}` for GLS.
    pub fn coef_covariance(&self) -> &SymmetricMatrix {
        &self.coef_covariance
    }

    pub fn method(&self) -> FitMethod {
        self.method
    }

    pub fn n_eff(&self) -> usize {
        self.residuals.len()
    }

    pub fn n_coeffs(&self) -> usize {
        self.coefficients.len()
    }

    /// Residual degrees of freedom, `n_eff - n_coeffs`.
    pub fn dof(&self) -> usize {
        self.n_eff() - self.n_coeffs()
    }
}

fn map_collinear(e: Error) -> Error {
    match e {
        Error::NotPositiveDefinite { pivot, .. } => Error::CollinearDesign { pivot },
        other => other,
    }
}

fn solve_normal_equations(
    x: &crate::matrix::Matrix,
    y: &[f64],
) -> Result<(Vec<f64>, CholeskyFactor)> {
    let gram = x.gram();
    let factor = cholesky(&gram).map_err(map_collinear)?;
    let xty = x.transpose_mul_vec(y);
    Ok((factor.solve_vec(&xty), factor))
}

fn residuals_of(x: &crate::matrix::Matrix, y: &[f64], beta: &[f64]) -> (Vec<f64>, f64) {
    let fitted = x.mul_vec(beta);
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(yi, fi)| yi - fi).collect();
    let ssr = residuals.iter().map(|r| r * r).sum();
    (residuals, ssr)
}

fn check_estimable(design: &LaggedDesign) -> Result<()> {
    if design.n_eff() < design.n_coeffs() {
        return Err(Error::invalid(format!(
            "insufficient observations: {} rows for {} coefficients",
            design.n_eff(),
            design.n_coeffs()
        )));
    }
    Ok(())
}

/// Ordinary least squares: solves the normal equations by factor-and-solve
/// and reports `s^2 (X^T X)^{-1}` as the coefficient covariance, with
/// `s^2 = ssr / (n_eff - m)`.
///
/// An exactly determined system (`n_eff = m`) interpolates; its residual
/// variance, and with it the covariance, is identically zero. Meaningful
/// inference needs `n_eff > m`.
pub fn ols_fit(design: &LaggedDesign) -> Result<FitResult> {
    check_estimable(design)?;
    let x = design.matrix();
    let y = design.response();
    let (beta, factor) = solve_normal_equations(x, y)?;
    let (residuals, ssr) = residuals_of(x, y, &beta);
    let dof = design.n_eff() - design.n_coeffs();
    let s2 = if dof > 0 { ssr / dof as f64 } else { 0.0 };
    let coef_covariance = factor.inverse()?.scaled(s2)?;
    Ok(FitResult {
        coefficients: beta,
        residuals,
        ssr,
        coef_covariance,
        method: FitMethod::Ols,
    })
}

/// Generalized least squares with residual covariance `omega`.
///
/// Computed by whitening: factor `omega = L L^T`, solve `L X~ = X` and
/// `L y~ = y`, then run least squares on the whitened system. The
/// coefficient covariance is `(X~^T X~)^{-1} = (X^T Omega^{-1} X)^{-1}`
/// with no residual-variance factor; `omega` carries the scale.
pub fn gls_fit(design: &LaggedDesign, omega: &SymmetricMatrix) -> Result<FitResult> {
    check_estimable(design)?;
    if omega.dim() != design.n_eff() {
        return Err(Error::invalid(format!(
            "covariance dimension {} does not match the {} design rows",
            omega.dim(),
            design.n_eff()
        )));
    }
    let omega_factor = cholesky(omega)?;
    let x_white = omega_factor.solve_lower_mat(design.matrix());
    let y_white = omega_factor.solve_lower_vec(design.response());
    let (beta, factor) = solve_normal_equations(&x_white, &y_white)?;
    let (residuals, ssr) = residuals_of(design.matrix(), design.response(), &beta);
    let coef_covariance = factor.inverse()?;
    Ok(FitResult {
        coefficients: beta,
        residuals,
        ssr,
        coef_covariance,
        method: FitMethod::Gls,
    })
}

/// Wraps the residuals of a fit as a time series (in observation order).
pub fn residual_series(fit: &FitResult) -> TimeSeries {
    TimeSeries::new(fit.residuals().to_vec()).expect("residuals of a finite fit are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{build_lagged_design, TimeSeries};

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    /// y follows an exact linear law of its own and a driver's lags, so the
    /// fit interpolates and recovers the generating coefficients.
    #[test]
    fn ols_recovers_exact_linear_model() {
        let n = 60;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.9).sin() + 0.3 * (i as f64 * 0.37).cos()).collect();
        let mut y = vec![1.0, -0.5];
        for t in 2..n {
            let v: f64 = 0.3 + 0.5 * y[t - 1] - 0.2 * y[t - 2] + 0.9 * x[t - 1] - 0.4 * x[t - 2];
            y.push(v);
        }
        let d = build_lagged_design(&ts(&y), Some(&ts(&x)), 2).unwrap();
        let fit = ols_fit(&d).unwrap();
        let expect = [0.3, 0.5, -0.2, 0.9, -0.4];
        for (b, e) in fit.coefficients().iter().zip(expect) {
            assert!((b - e).abs() < 1e-8, "{b} vs {e}");
        }
        assert!(fit.ssr() < 1e-12);
    }

    #[test]
    fn ols_two_equation_hand_solve() {
        // rows (1,1) and (1,2) with responses 2 and 3: intercept 1, slope 1
        let y = ts(&[1.0, 2.0, 3.0]);
        let d = build_lagged_design(&y, None, 1).unwrap();
        let fit = ols_fit(&d).unwrap();
        assert!((fit.coefficients()[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ols_duplicate_column_is_collinear() {
        // x identical to y makes the lag blocks linearly dependent
        let vals: Vec<f64> = (0..30).map(|i| ((i * 7 % 13) as f64).sin()).collect();
        let y = ts(&vals);
        let x = ts(&vals);
        let d = build_lagged_design(&y, Some(&x), 2).unwrap();
        match ols_fit(&d) {
            Err(Error::CollinearDesign { .. }) => {}
            other => panic!("expected collinear-design error, got {other:?}"),
        }
    }

    #[test]
    fn ssr_matches_residual_sum_of_squares() {
        let vals: Vec<f64> = (0..50)
            .map(|i| (i as f64 * 0.3).sin() + 0.1 * i as f64)
            .collect();
        let d = build_lagged_design(&ts(&vals), None, 3).unwrap();
        let fit = ols_fit(&d).unwrap();
        let direct: f64 = fit.residuals().iter().map(|r| r * r).sum();
        assert!((fit.ssr() - direct).abs() <= 1e-8 * direct.max(1e-30));
    }

    #[test]
    fn gls_with_identity_matches_ols_coefficients() {
        let vals: Vec<f64> = (0..60)
            .map(|i| (i as f64 * 0.41).sin() * 2.0 + (i as f64 * 0.07).cos())
            .collect();
        let d = build_lagged_design(&ts(&vals), None, 2).unwrap();
        let ols = ols_fit(&d).unwrap();
        let gls = gls_fit(&d, &SymmetricMatrix::identity(d.n_eff())).unwrap();
        for (a, b) in ols.coefficients().iter().zip(gls.coefficients()) {
            assert!((a - b).abs() < 1e-10);
        }
        // identity covariance: V_gls = (X^T X)^{-1}, V_ols = s^2 (X^T X)^{-1}
        let s2 = ols.ssr() / ols.dof() as f64;
        for i in 0..d.n_coeffs() {
            for j in 0..d.n_coeffs() {
                let lhs = ols.coef_covariance()[(i, j)];
                let rhs = s2 * gls.coef_covariance()[(i, j)];
                assert!((lhs - rhs).abs() <= 1e-8 * lhs.abs().max(1e-12));
            }
        }
    }

    #[test]
    fn gls_scalar_covariance_rescales_v_not_beta() {
        let vals: Vec<f64> = (0..45)
            .map(|i| (i as f64 * 0.23).cos() * 1.5 - 0.02 * i as f64)
            .collect();
        let d = build_lagged_design(&ts(&vals), None, 2).unwrap();
        let eye = SymmetricMatrix::identity(d.n_eff());
        let scaled = eye.scaled(4.0).unwrap();
        let base = gls_fit(&d, &eye).unwrap();
        let big = gls_fit(&d, &scaled).unwrap();
        for (a, b) in base.coefficients().iter().zip(big.coefficients()) {
            assert!((a - b).abs() < 1e-10);
        }
        for i in 0..d.n_coeffs() {
            for j in 0..d.n_coeffs() {
                let lhs = 4.0 * base.coef_covariance()[(i, j)];
                let rhs = big.coef_covariance()[(i, j)];
                assert!((lhs - rhs).abs() <= 1e-8 * lhs.abs().max(1e-12));
            }
        }
    }

    #[test]
    fn gls_rejects_non_spd_covariance() {
        let vals: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let d = build_lagged_design(&ts(&vals), None, 1).unwrap();
        let diag: Vec<f64> = (0..d.n_eff())
            .map(|i| if i == 3 { -1.0 } else { 1.0 })
            .collect();
        let omega = SymmetricMatrix::diagonal(&diag).unwrap();
        match gls_fit(&d, &omega) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 3),
            other => panic!("expected not-positive-definite, got {other:?}"),
        }
    }

    #[test]
    fn residual_series_wraps_residuals_in_order() {
        let vals: Vec<f64> = (0..30).map(|i| (i as f64 * 0.9).sin() + 2.0).collect();
        let d = build_lagged_design(&ts(&vals), None, 2).unwrap();
        let fit = ols_fit(&d).unwrap();
        let rs = residual_series(&fit);
        assert_eq!(rs.len(), d.n_eff());
        assert_eq!(rs.values(), fit.residuals());
        // recompute y - X beta independently
        let fitted = d.matrix().mul_vec(fit.coefficients());
        for (i, r) in rs.values().iter().enumerate() {
            assert!((r - (d.response()[i] - fitted[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn whitened_residual_orthogonality() {
        // X~^T (y~ - X~ beta) = 0 for the GLS solution
        let vals: Vec<f64> = (0..50)
            .map(|i| (i as f64 * 0.31).sin() * 1.2 + (i as f64 * 0.11).cos() * 0.4)
            .collect();
        let d = build_lagged_design(&ts(&vals), None, 2).unwrap();
        let n = d.n_eff();
        let omega =
            SymmetricMatrix::from_upper_fn(n, |i, j| 0.5f64.powi((j - i) as i32) * 2.0).unwrap();
        let fit = gls_fit(&d, &omega).unwrap();
        let factor = cholesky(&omega).unwrap();
        let xw = factor.solve_lower_mat(d.matrix());
        let yw = factor.solve_lower_vec(d.response());
        let fitted = xw.mul_vec(fit.coefficients());
        let rw: Vec<f64> = yw.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let orth = xw.transpose_mul_vec(&rw);
        for v in orth {
            assert!(v.abs() < 1e-8, "orthogonality defect {v}");
        }
    }

    #[test]
    fn gls_objective_is_minimized_at_the_estimate() {
        // perturbing any single coefficient strictly increases the
        // weighted residual quadratic form
        let vals: Vec<f64> = (0..40)
            .map(|i| (i as f64 * 0.53).sin() + 0.03 * i as f64)
            .collect();
        let d = build_lagged_design(&ts(&vals), None, 2).unwrap();
        let n = d.n_eff();
        let omega =
            SymmetricMatrix::from_upper_fn(n, |i, j| 0.3f64.powi((j - i) as i32) * 1.5).unwrap();
        let fit = gls_fit(&d, &omega).unwrap();
        let objective = |beta: &[f64]| {
            let fitted = d.matrix().mul_vec(beta);
            let r: Vec<f64> = d.response().iter().zip(&fitted).map(|(a, b)| a - b).collect();
            let z = crate::matrix::cholesky_solve(&omega, &r).unwrap();
            r.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>()
        };
        let at_min = objective(fit.coefficients());
        for k in 0..d.n_coeffs() {
            for delta in [-1e-3, 1e-3] {
                let mut b = fit.coefficients().to_vec();
                b[k] += delta;
                assert!(
                    objective(&b) > at_min,
                    "perturbing coefficient {k} by {delta} did not increase the objective"
                );
            }
        }
    }
}
