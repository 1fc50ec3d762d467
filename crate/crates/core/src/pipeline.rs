//! End-to-end causality tests and causal-graph construction.
//!
//! Two pairwise tests share the same lagged-design front end:
//!
//! * [`classical_granger_test`] — the nested-model F test on OLS fits.
//! * [`gls_granger_test`] — OLS first, then the residual autocovariance is
//!   estimated with the sliding-window estimator, cleaned into a usable
//!   covariance, and the model is refit by GLS; the exogenous block is
//!   tested with a Wald statistic against its F null.
//!
//! The raw sliding estimate cannot be inverted as-is: built from `n`
//! windows of `tau + 1` points it has rank at most `tau + 1 < n`, so some
//! regularization is not optional. The cleaning step keeps what the
//! estimator resolves well — the local variance profile (its diagonal) and
//! eigencomponents too large to be sampling noise — and treats the rest as
//! idiosyncratic. The scale is calibrated against the OLS residual
//! variance, with a degrees-of-freedom correction for the estimated
//! weighting; with a fixed covariance the correction drops out and the test
//! reduces exactly to the Wald test on the supplied structure.

use crate::error::{Error, Result};
use crate::inference::{granger_f_statistic, granger_restriction, wald_test, TestResult};
use crate::matrix::{spd_floor, symmetric_eigen, SymmetricMatrix};
use crate::regression::{gls_fit, ols_fit, residual_series, FitResult};
use crate::series::{build_lagged_design, build_lagged_design_from, LaggedDesign, TimeSeries};
use crate::{autocov, threads};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Which pairwise test to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMethod {
    /// Nested-model F test on OLS fits.
    ClassicalF,
    /// GLS refit with estimated residual covariance, Wald-tested.
    GlsWald,
}

impl std::fmt::Display for TestMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestMethod::ClassicalF => write!(f, "classical-f"),
            TestMethod::GlsWald => write!(f, "gls-wald"),
        }
    }
}

/// Per-direction causality verdict.
#[derive(Debug, Clone)]
pub struct CausalityResult {
    pub cause: String,
    pub effect: String,
    pub lag: usize,
    pub method: TestMethod,
    pub test: TestResult,
    /// Sliding-window length; present exactly for the GLS method.
    pub tau: Option<usize>,
}

impl CausalityResult {
    /// True when the null of no causality was rejected.
    pub fn causal(&self) -> bool {
        self.test.reject
    }
}

/// Covariance used by the GLS stage.
#[derive(Debug, Clone)]
pub enum CovarianceSource {
    /// Estimate from the OLS residuals with the sliding-window estimator,
    /// then clean (the normal path).
    Estimated,
    /// Use the supplied matrix as the covariance structure, known up to
    /// scale. Mostly a diagnostic: with the identity this reproduces the
    /// OLS Wald test exactly.
    Fixed(SymmetricMatrix),
}

/// Settings of the covariance cleaning step.
///
/// Built from `n` windows of `tau + 1` points, the raw estimate has rank
/// at most `tau + 1` and every entry carries sampling noise, so inverting
/// it directly overweights directions the data never resolved. Cleaning
/// keeps the estimated local variances (the diagonal) untouched and
/// soft-thresholds each off-diagonal entry against its own sampling
/// standard error under uncorrelated residuals, which for windows at
/// distance `d` is `sbar * sqrt((tau + 1 + 2 max(tau + 1 - d, 0)) /
/// tau^2)`; entries the estimator cannot distinguish from noise drop to
/// zero, systematic structure survives. Eigenvalues are then floored at
/// `eigenvalue_floor` of the mean estimated variance so no direction gets
/// unbounded weight, and the whole matrix is inflated by
/// `scale_inflation`, a finite-sample margin for the estimated weighting
/// calibrated so the test holds its nominal size on null data.
#[derive(Debug, Clone, Copy)]
pub struct CovarianceCleaning {
    /// z-score cut for off-diagonal entries against the estimator's null
    /// sampling noise.
    pub threshold_z: f64,
    /// Eigenvalue floor as a fraction of the mean estimated variance.
    pub eigenvalue_floor: f64,
    /// Multiplicative variance margin for the estimated weighting.
    pub scale_inflation: f64,
}

impl Default for CovarianceCleaning {
    fn default() -> Self {
        CovarianceCleaning {
            threshold_z: 3.0,
            eigenvalue_floor: 0.05,
            scale_inflation: 1.05,
        }
    }
}

/// Options of the GLS Granger test.
#[derive(Debug, Clone)]
pub struct GlsGrangerOptions {
    pub tau: usize,
    pub alpha: f64,
    pub cleaning: CovarianceCleaning,
    /// Relative eigenvalue floor applied before factorization.
    pub eps_rel: f64,
    /// Extend the residual series by reflection so every window exists.
    /// When false, the first `tau` observations carry no window and are
    /// dropped from the GLS stage instead.
    pub reflect: bool,
    pub covariance: CovarianceSource,
}

impl GlsGrangerOptions {
    pub fn new(tau: usize, alpha: f64) -> Self {
        GlsGrangerOptions {
            tau,
            alpha,
            cleaning: CovarianceCleaning::default(),
            eps_rel: 1e-8,
            reflect: true,
            covariance: CovarianceSource::Estimated,
        }
    }
}

fn series_labels(x: &TimeSeries, y: &TimeSeries) -> (String, String) {
    (x.name_or("x"), y.name_or("y"))
}

/// Classical Granger causality F test of "`x` causes `y`" at lag `p`:
/// OLS-fits the model of `y` on its own lags with and without the lags of
/// `x` over the same rows, and refers the SSR gain to its F null.
pub fn classical_granger_test(
    x: &TimeSeries,
    y: &TimeSeries,
    p: usize,
    alpha: f64,
) -> Result<CausalityResult> {
    let unrestricted = build_lagged_design(y, Some(x), p)?;
    let restricted = unrestricted.without_exog();
    let fit_u = ols_fit(&unrestricted)?;
    let fit_r = ols_fit(&restricted)?;
    let (stat, df1, df2) =
        granger_f_statistic(fit_r.ssr(), fit_u.ssr(), p, unrestricted.n_eff())?;
    let test = TestResult::from_f_statistic(stat, df1 as f64, df2 as f64, alpha)?;
    let (cause, effect) = series_labels(x, y);
    Ok(CausalityResult {
        cause,
        effect,
        lag: p,
        method: TestMethod::ClassicalF,
        test,
        tau: None,
    })
}

/// Raw sliding-window autocovariance of the unrestricted model's OLS
/// residuals — the uncleaned estimate, as a diagnostic surface.
pub fn estimate_residual_autocovariance(
    x: &TimeSeries,
    y: &TimeSeries,
    p: usize,
    tau: usize,
    reflect: bool,
) -> Result<SymmetricMatrix> {
    let design = build_lagged_design(y, Some(x), p)?;
    let fit = ols_fit(&design)?;
    let resid = residual_series(&fit);
    if reflect {
        autocov::sliding_autocov_matrix(&resid, tau)
    } else {
        autocov::sliding_autocov_matrix_truncated(&resid, tau)
    }
}

/// Soft-thresholding plus eigenvalue-floor cleaning of a raw
/// sliding-window covariance estimate; see [`CovarianceCleaning`].
fn clean_covariance(
    raw: &SymmetricMatrix,
    tau: usize,
    cleaning: &CovarianceCleaning,
) -> Result<SymmetricMatrix> {
    let n = raw.dim();
    let sbar = raw.mean_diagonal();
    if !(sbar > 0.0) {
        return Err(Error::NumericalInconsistency(
            "residual covariance estimate has no positive scale".into(),
        ));
    }
    let tau_f = tau as f64;
    // per-distance sampling sd of an entry under uncorrelated residuals
    let null_se = |d: usize| {
        let overlap = (tau + 1).saturating_sub(d) as f64;
        sbar * ((tau_f + 1.0 + 2.0 * overlap) / (tau_f * tau_f)).sqrt()
    };
    let thresholds: Vec<f64> = (0..n).map(|d| cleaning.threshold_z * null_se(d)).collect();
    let soft = |v: f64, t: f64| v.signum() * (v.abs() - t).max(0.0);
    let thresholded = SymmetricMatrix::from_upper_fn(n, |i, j| {
        if i == j {
            raw[(i, i)]
        } else {
            soft(raw[(i, j)], thresholds[j - i])
        }
    })?;
    let (evals, vecs) = symmetric_eigen(&thresholded);
    let floor = cleaning.eigenvalue_floor * sbar;
    let floored: Vec<f64> = evals.iter().map(|&l| l.max(floor)).collect();
    crate::matrix::eigen_reconstruct(&floored, &vecs)
}

/// The GLS Granger causality test of "`x` causes `y`" at lag `p` with
/// window length `tau`, with default options.
pub fn gls_granger_test(
    x: &TimeSeries,
    y: &TimeSeries,
    p: usize,
    tau: usize,
    alpha: f64,
) -> Result<CausalityResult> {
    gls_granger_test_with(x, y, p, &GlsGrangerOptions::new(tau, alpha))
}

/// The GLS Granger causality test, fully parameterized.
///
/// Steps: (1) OLS-fit the unrestricted model; (2) estimate the residual
/// covariance from the OLS residuals with the sliding-window estimator and
/// clean it; (3) guarantee positive definiteness with the eigenvalue floor,
/// calibrate the scale, and refit by GLS; (4) Wald-test the exogenous
/// block. The covariance passed to the GLS stage always comes from the OLS
/// residuals of step (1); it is a single pass, never iterated.
pub fn gls_granger_test_with(
    x: &TimeSeries,
    y: &TimeSeries,
    p: usize,
    opts: &GlsGrangerOptions,
) -> Result<CausalityResult> {
    let design = build_lagged_design(y, Some(x), p)?;
    if design.n_eff() <= design.n_coeffs() {
        return Err(Error::invalid(format!(
            "insufficient observations: {} rows for {} coefficients leave no residual degrees of freedom",
            design.n_eff(),
            design.n_coeffs()
        )));
    }
    let fit0 = ols_fit(&design)?;
    if !(fit0.ssr() > 0.0) {
        return Err(Error::NumericalInconsistency(
            "perfect OLS fit leaves no residual scale for the GLS stage".into(),
        ));
    }
    let s2 = fit0.ssr() / fit0.dof() as f64;
    let resid = residual_series(&fit0);

    // estimated or supplied covariance structure, and the rows it covers
    let (structure, gls_design, estimated): (SymmetricMatrix, LaggedDesign, bool) =
        match &opts.covariance {
            CovarianceSource::Estimated => {
                if opts.reflect {
                    let raw = autocov::sliding_autocov_matrix(&resid, opts.tau)?;
                    let cleaned = clean_covariance(&raw, opts.tau, &opts.cleaning)?;
                    (cleaned, design.clone(), true)
                } else {
                    // no reflection: indices below tau have no window and
                    // drop out of the GLS stage
                    let raw = autocov::sliding_autocov_matrix_truncated(&resid, opts.tau)?;
                    let cleaned = clean_covariance(&raw, opts.tau, &opts.cleaning)?;
                    (cleaned, design.rows_from(opts.tau)?, true)
                }
            }
            CovarianceSource::Fixed(m) => (m.clone(), design.clone(), false),
        };
    if structure.dim() != gls_design.n_eff() {
        return Err(Error::invalid(format!(
            "covariance dimension {} does not match the {} usable rows",
            structure.dim(),
            gls_design.n_eff()
        )));
    }

    let floored = spd_floor(&structure, opts.eps_rel);

    // Scale: an estimated covariance carries its own scale (the local
    // variances the estimator measured), inflated by the calibrated
    // finite-sample margin. A supplied structure is treated as known up
    // to scale, set from the OLS residual variance — with the identity
    // this makes the pipeline collapse to the plain OLS Wald test.
    let kappa = if estimated {
        opts.cleaning.scale_inflation
    } else {
        let mean_diag = floored.mean_diagonal();
        if !(mean_diag > 0.0) {
            return Err(Error::NumericalInconsistency(
                "supplied covariance has no positive scale".into(),
            ));
        }
        s2 / mean_diag
    };
    let omega = floored.scaled(kappa)?;

    let fit = gls_fit(&gls_design, &omega)?;
    let restriction = granger_restriction(p)?;
    let test = wald_test(&fit, &restriction, opts.alpha)?;
    let (cause, effect) = series_labels(x, y);
    Ok(CausalityResult {
        cause,
        effect,
        lag: p,
        method: TestMethod::GlsWald,
        test,
        tau: Some(opts.tau),
    })
}

/// Picks the lag order in `1..=p_max` minimizing the Gaussian AIC
/// `n_eff * ln(ssr / n_eff) + 2 (2p + 1)` of the unrestricted model, with
/// rows fixed at `N - p_max` so every candidate scores the same
/// observations. Ties break toward the smaller lag.
pub fn select_lag_aic(x: &TimeSeries, y: &TimeSeries, p_max: usize) -> Result<usize> {
    if p_max == 0 {
        return Err(Error::invalid("maximum lag must be positive"));
    }
    // feasibility at the largest candidate implies it for all of them
    let widest = build_lagged_design_from(y, Some(x), p_max, p_max)?;
    if widest.n_eff() <= widest.n_coeffs() {
        return Err(Error::invalid(format!(
            "maximum lag {p_max} leaves {} rows for {} coefficients",
            widest.n_eff(),
            widest.n_coeffs()
        )));
    }
    let mut best: Option<(f64, usize)> = None;
    for p in 1..=p_max {
        let design = build_lagged_design_from(y, Some(x), p, p_max)?;
        let fit = ols_fit(&design)?;
        let n_eff = design.n_eff() as f64;
        let aic = n_eff * (fit.ssr() / n_eff).ln() + 2.0 * (2 * p + 1) as f64;
        if best.map_or(true, |(b, _)| aic < b) {
            best = Some((aic, p));
        }
    }
    Ok(best.expect("at least one candidate").1)
}

/// How the per-pair lag order is chosen in a causal graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagSelection {
    Fixed(usize),
    /// Per-pair AIC selection over `1..=p_max`.
    Auto { p_max: usize },
}

/// Options of [`build_causal_graph`].
#[derive(Debug, Clone)]
pub struct GraphOptions {
    pub method: TestMethod,
    pub lag: LagSelection,
    /// Window length as a fraction of the usable observations.
    pub tau_fraction: f64,
    pub alpha: f64,
    pub cleaning: CovarianceCleaning,
    pub reflect: bool,
    /// Benjamini-Hochberg correction across the pairwise p-values.
    pub bh_correction: bool,
}

impl GraphOptions {
    pub fn new(method: TestMethod, lag: LagSelection) -> Self {
        GraphOptions {
            method,
            lag,
            tau_fraction: 0.2,
            alpha: 0.05,
            cleaning: CovarianceCleaning::default(),
            reflect: true,
            bh_correction: false,
        }
    }
}

/// One directed causal edge with its evidence.
#[derive(Debug, Clone)]
pub struct CausalEdge {
    pub from: String,
    pub to: String,
    pub p_value: f64,
    pub lag: usize,
}

/// Pairwise causality verdicts over a set of series.
#[derive(Debug, Clone)]
pub struct CausalGraph {
    /// All series labels, sorted.
    pub nodes: Vec<String>,
    /// Directed edges for the rejected nulls, in deterministic
    /// (from, to) order. Never contains self-edges.
    pub edges: Vec<CausalEdge>,
    /// Lag order used for every tested ordered pair.
    pub lag_per_pair: BTreeMap<(String, String), usize>,
    /// Per-pair failures, as diagnostics rather than edges.
    pub diagnostics: Vec<String>,
}

/// Runs the chosen test over every ordered pair of distinct series and
/// collects the rejected nulls as directed edges. Pairs are enumerated in
/// sorted label order and evaluated in parallel; the output is identical
/// for any worker count. Per-pair failures become diagnostics.
pub fn build_causal_graph(series: &[TimeSeries], opts: &GraphOptions) -> Result<CausalGraph> {
    if series.len() < 2 {
        return Err(Error::invalid(
            "need at least two series to build a causal graph",
        ));
    }
    let len = series[0].len();
    if series.iter().any(|s| s.len() != len) {
        return Err(Error::invalid("all series must have equal length"));
    }
    let mut labeled: Vec<(&TimeSeries, String)> = Vec::with_capacity(series.len());
    for (i, s) in series.iter().enumerate() {
        let label = s
            .name()
            .map(str::to_string)
            .ok_or_else(|| Error::invalid(format!("series {i} has no label")))?;
        labeled.push((s, label));
    }
    labeled.sort_by(|a, b| a.1.cmp(&b.1));
    for w in labeled.windows(2) {
        if w[0].1 == w[1].1 {
            return Err(Error::invalid(format!("duplicate series label '{}'", w[0].1)));
        }
    }
    if !(opts.tau_fraction > 0.0 && opts.tau_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "window fraction must lie in (0, 1), got {}",
            opts.tau_fraction
        )));
    }

    let pairs: Vec<(usize, usize)> = (0..labeled.len())
        .flat_map(|a| (0..labeled.len()).map(move |b| (a, b)))
        .filter(|(a, b)| a != b)
        .collect();

    let outcomes: Vec<std::result::Result<CausalityResult, String>> = threads::run(|| {
        pairs
            .par_iter()
            .map(|&(a, b)| {
                let (x, ref xl) = labeled[a];
                let (y, ref yl) = labeled[b];
                run_pair(x, y, opts)
                    .map_err(|e| format!("{xl} -> {yl}: {e}"))
            })
            .collect()
    });

    let nodes: Vec<String> = labeled.iter().map(|(_, l)| l.clone()).collect();
    let mut results = Vec::new();
    let mut diagnostics = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(r) => results.push(r),
            Err(d) => diagnostics.push(d),
        }
    }

    let rejected: Vec<bool> = if opts.bh_correction {
        benjamini_hochberg(
            &results.iter().map(|r| r.test.p_value).collect::<Vec<_>>(),
            opts.alpha,
        )
    } else {
        results.iter().map(|r| r.test.reject).collect()
    };

    let mut edges = Vec::new();
    let mut lag_per_pair = BTreeMap::new();
    for (r, &reject) in results.iter().zip(&rejected) {
        lag_per_pair.insert((r.cause.clone(), r.effect.clone()), r.lag);
        if reject {
            edges.push(CausalEdge {
                from: r.cause.clone(),
                to: r.effect.clone(),
                p_value: r.test.p_value,
                lag: r.lag,
            });
        }
    }
    Ok(CausalGraph {
        nodes,
        edges,
        lag_per_pair,
        diagnostics,
    })
}

fn run_pair(x: &TimeSeries, y: &TimeSeries, opts: &GraphOptions) -> Result<CausalityResult> {
    let p = match opts.lag {
        LagSelection::Fixed(p) => p,
        LagSelection::Auto { p_max } => select_lag_aic(x, y, p_max)?,
    };
    match opts.method {
        TestMethod::ClassicalF => classical_granger_test(x, y, p, opts.alpha),
        TestMethod::GlsWald => {
            let n_eff = y.len().saturating_sub(p);
            let tau = (opts.tau_fraction * n_eff as f64).floor() as usize;
            let mut gls = GlsGrangerOptions::new(tau, opts.alpha);
            gls.cleaning = opts.cleaning;
            gls.reflect = opts.reflect;
            gls_granger_test_with(x, y, p, &gls)
        }
    }
}

/// Step-up Benjamini-Hochberg decision at level `alpha`: rejects the
/// hypotheses with the `k` smallest p-values, where `k` is the largest
/// index with `p_(k) <= k * alpha / m`.
fn benjamini_hochberg(p_values: &[f64], alpha: f64) -> Vec<bool> {
    let m = p_values.len();
    if m == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        p_values[a]
            .partial_cmp(&p_values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut cutoff = 0;
    for (rank, &idx) in order.iter().enumerate() {
        if p_values[idx] <= (rank + 1) as f64 * alpha / m as f64 {
            cutoff = rank + 1;
        }
    }
    let mut reject = vec![false; m];
    for &idx in &order[..cutoff] {
        reject[idx] = true;
    }
    reject
}

/// Convenience: the wald test of the OLS unrestricted fit against the
/// Granger restriction, the algebraic twin of the classical F test.
pub fn ols_wald_granger_test(
    x: &TimeSeries,
    y: &TimeSeries,
    p: usize,
    alpha: f64,
) -> Result<(FitResult, TestResult)> {
    let design = build_lagged_design(y, Some(x), p)?;
    let fit = ols_fit(&design)?;
    let test = wald_test(&fit, &granger_restriction(p)?, alpha)?;
    Ok((fit, test))
}
