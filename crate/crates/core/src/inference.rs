//! Linear-restriction hypothesis tests: the Wald statistic, its F-form
//! p-value, and the nested-model F statistic for Granger comparisons.

use crate::dist::{f_cdf, f_sf};
use crate::error::{Error, Result};
use crate::matrix::{cholesky, Matrix, SymmetricMatrix};
use crate::regression::FitResult;

/// Linear restrictions `R beta = r` with `R` of shape `Q x m`.
#[derive(Debug, Clone)]
pub struct Restriction {
    r_matrix: Matrix,
    r_vector: Vec<f64>,
}

impl Restriction {
    pub fn new(r_matrix: Matrix, r_vector: Vec<f64>) -> Result<Self> {
        let q = r_matrix.rows();
        if r_vector.len() != q {
            return Err(Error::invalid(format!(
                "restriction matrix has {q} rows but the target vector has length {}",
                r_vector.len()
            )));
        }
        if q > r_matrix.cols() {
            return Err(Error::invalid(format!(
                "cannot impose {q} independent restrictions on {} coefficients",
                r_matrix.cols()
            )));
        }
        Ok(Restriction { r_matrix, r_vector })
    }

    pub fn r_matrix(&self) -> &Matrix {
        &self.r_matrix
    }

    pub fn r_vector(&self) -> &[f64] {
        &self.r_vector
    }

    /// Number of restrictions `Q`.
    pub fn q(&self) -> usize {
        self.r_matrix.rows()
    }
}

/// The Granger null hypothesis for lag order `p`: all `p` exogenous-lag
/// coefficients are zero. `R` is `p x (1 + 2p)`, zero over the intercept and
/// autoregressive block with an identity over the exogenous block; `r = 0`.
pub fn granger_restriction(p: usize) -> Result<Restriction> {
    if p == 0 {
        return Err(Error::invalid("lag order must be positive"));
    }
    let m = 1 + 2 * p;
    let r = Matrix::from_fn(p, m, |row, col| {
        if col == 1 + p + row {
            1.0
        } else {
            0.0
        }
    });
    Restriction::new(r, vec![0.0; p])
}

/// Outcome of one hypothesis test against an F null distribution.
#[derive(Debug, Clone)]
pub struct TestResult {
    pub statistic: f64,
    pub df1: f64,
    pub df2: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
}

impl TestResult {
    /// Builds the outcome from an F-distributed statistic. An infinite
    /// statistic is the perfect-fit sentinel and maps to `p = 0`.
    pub fn from_f_statistic(statistic: f64, df1: f64, df2: f64, alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) || alpha <= 0.0 {
            return Err(Error::invalid(format!(
                "significance level must be in (0, 1), got {alpha}"
            )));
        }
        let p_value = if statistic.is_infinite() {
            0.0
        } else {
            f_sf(statistic, df1, df2)?
        };
        Ok(TestResult {
            statistic,
            df1,
            df2,
            p_value,
            reject: p_value < alpha,
            alpha,
        })
    }

    /// CDF complement cross-check, mostly for tests.
    pub fn p_value_from_cdf(&self) -> Result<f64> {
        if self.statistic.is_infinite() {
            return Ok(0.0);
        }
        Ok(1.0 - f_cdf(self.statistic, self.df1, self.df2)?)
    }
}

/// The Wald quadratic form `(R b - r)^T (R V R^T)^{-1} (R b - r)` for the
/// fitted coefficients `b` with covariance `V`. Nonnegative; computed by
/// factor-and-solve on `R V R^T`.
pub fn wald_statistic(fit: &FitResult, restriction: &Restriction) -> Result<f64> {
    let m = fit.n_coeffs();
    let r = restriction.r_matrix();
    if r.cols() != m {
        return Err(Error::invalid(format!(
            "restriction matrix has {} columns but the fit has {m} coefficients",
            r.cols()
        )));
    }
    let q = restriction.q();
    let v = fit.coef_covariance();
    // discrepancy d = R b - r
    let rb = r.mul_vec(fit.coefficients());
    let d: Vec<f64> = rb
        .iter()
        .zip(restriction.r_vector())
        .map(|(a, b)| a - b)
        .collect();
    // R V R^T, symmetrized from the upper triangle
    let vr = Matrix::from_fn(m, q, |i, row| {
        (0..m).map(|k| v[(i, k)] * r[(row, k)]).sum()
    });
    let rvr = SymmetricMatrix::from_upper_fn(q, |a, b| {
        let ab: f64 = (0..m).map(|k| r[(a, k)] * vr[(k, b)]).sum();
        let ba: f64 = (0..m).map(|k| r[(b, k)] * vr[(k, a)]).sum();
        0.5 * (ab + ba)
    })?;
    let z = cholesky(&rvr)?.solve_vec(&d);
    let w: f64 = d.iter().zip(&z).map(|(a, b)| a * b).sum();
    Ok(w.max(0.0))
}

/// Wald test in F form: the statistic divided by `Q` is referred to an
/// `F(Q, n_eff - m)` null.
pub fn wald_test(fit: &FitResult, restriction: &Restriction, alpha: f64) -> Result<TestResult> {
    let w = wald_statistic(fit, restriction)?;
    let q = restriction.q() as f64;
    let df2 = fit.dof() as f64;
    if df2 < 1.0 {
        return Err(Error::invalid(
            "Wald test needs at least one residual degree of freedom",
        ));
    }
    TestResult::from_f_statistic(w / q, q, df2, alpha)
}

/// Nested-model F statistic from the two sums of squared residuals:
/// `((ssr_rm - ssr_um) / p) / (ssr_um / df2)` with `df1 = p` and
/// `df2 = n_eff - (2p + 1)`.
///
/// Returns `(statistic, df1, df2)`; the statistic is `+inf` when the
/// unrestricted model fits perfectly but the restricted one does not.
pub fn granger_f_statistic(
    ssr_rm: f64,
    ssr_um: f64,
    p: usize,
    n_eff: usize,
) -> Result<(f64, usize, usize)> {
    if p == 0 {
        return Err(Error::invalid("lag order must be positive"));
    }
    if !(ssr_rm >= 0.0) || !(ssr_um >= 0.0) {
        return Err(Error::invalid(
            "sums of squared residuals must be nonnegative",
        ));
    }
    if n_eff <= 2 * p + 1 {
        return Err(Error::invalid(format!(
            "need more than {} observations for {p} lags, got {n_eff}",
            2 * p + 1
        )));
    }
    let df2 = n_eff - (2 * p + 1);
    // the restricted model can never fit better; allow round-off slack
    let slack = 1e-10 * ssr_um.max(1.0);
    let gain = if ssr_rm >= ssr_um {
        ssr_rm - ssr_um
    } else if ssr_um - ssr_rm <= slack {
        0.0
    } else {
        return Err(Error::NumericalInconsistency(format!(
            "restricted SSR {ssr_rm} is below unrestricted SSR {ssr_um}"
        )));
    };
    let statistic = if ssr_um == 0.0 {
        if gain == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (gain / p as f64) / (ssr_um / df2 as f64)
    };
    Ok((statistic, p, df2))
}
