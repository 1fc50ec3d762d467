//! Time-series container and lagged design-matrix construction.
//!
//! Everything downstream (covariance estimation, regression, hypothesis
//! tests) consumes either a [`TimeSeries`] or a [`LaggedDesign`] built here.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// An ordered sequence of real-valued observations with an optional label.
///
/// Invariants enforced at construction: at least one observation, every
/// value finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    name: Option<String>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("time series must contain at least one value"));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "time series value at index {pos} is not finite"
            )));
        }
        Ok(TimeSeries { values, name: None })
    }

    pub fn with_name(values: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        let mut s = Self::new(values)?;
        s.name = Some(name.into());
        Ok(s)
    }

    /// Replaces the label, keeping the data.
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Label to use in reports when no explicit name was given.
    pub fn name_or(&self, fallback: &str) -> String {
        self.name.clone().unwrap_or_else(|| fallback.to_string())
    }

    /// Finite differencing. Order 1 maps `s` to `(s[t+1] - s[t])_t`; higher
    /// orders apply the first difference repeatedly.
    pub fn difference(&self, order: usize) -> Result<TimeSeries> {
        if order == 0 {
            return Err(Error::invalid("differencing order must be positive"));
        }
        if order >= self.len() {
            return Err(Error::invalid(format!(
                "differencing order {order} must be smaller than the series length {}",
                self.len()
            )));
        }
        let mut v = self.values.clone();
        for _ in 0..order {
            v = v.windows(2).map(|w| w[1] - w[0]).collect();
        }
        Ok(TimeSeries {
            values: v,
            name: self.name.clone(),
        })
    }
}

/// One column of a [`LaggedDesign`], in regression order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignColumn {
    /// The all-ones intercept column.
    Intercept,
    /// `y` backshifted by the given lag (1-based).
    YLag(usize),
    /// The exogenous series backshifted by the given lag (1-based).
    XLag(usize),
}

/// Regression design built from backshifted series.
///
/// Row `t` (for `t = first_row..N-1`) carries response `y[t]` and regressors
/// `[1, y[t-1], .., y[t-p]]`, plus `[x[t-1], .., x[t-p]]` when an exogenous
/// series is present. Observations with index below `first_row` are dropped;
/// no values outside `[0, N-1]` are ever read.
///
/// Construction only requires the rows to exist; whether there are enough
/// of them to estimate anything is checked where fitting happens.
#[derive(Debug, Clone)]
pub struct LaggedDesign {
    matrix: Matrix,
    response: Vec<f64>,
    lag_order: usize,
    has_exog: bool,
}

impl LaggedDesign {
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn lag_order(&self) -> usize {
        self.lag_order
    }

    /// Number of usable observations (rows of the design matrix).
    pub fn n_eff(&self) -> usize {
        self.response.len()
    }

    /// Number of estimated coefficients: `1 + p` without an exogenous block,
    /// `1 + 2p` with one.
    pub fn n_coeffs(&self) -> usize {
        self.matrix.cols()
    }

    pub fn has_exog(&self) -> bool {
        self.has_exog
    }

    /// Ordered description of the columns.
    pub fn column_layout(&self) -> Vec<DesignColumn> {
        let p = self.lag_order;
        let mut cols = Vec::with_capacity(self.n_coeffs());
        cols.push(DesignColumn::Intercept);
        cols.extend((1..=p).map(DesignColumn::YLag));
        if self.has_exog {
            cols.extend((1..=p).map(DesignColumn::XLag));
        }
        cols
    }

    /// The same design with the exogenous block removed, element for element.
    pub fn without_exog(&self) -> LaggedDesign {
        if !self.has_exog {
            return self.clone();
        }
        let keep = 1 + self.lag_order;
        let m = Matrix::from_fn(self.matrix.rows(), keep, |r, c| self.matrix[(r, c)]);
        LaggedDesign {
            matrix: m,
            response: self.response.clone(),
            lag_order: self.lag_order,
            has_exog: false,
        }
    }

    /// Drops the first `skip` rows, keeping the column structure. Used when
    /// boundary handling shrinks the set of usable observations.
    pub fn rows_from(&self, skip: usize) -> Result<LaggedDesign> {
        let n = self.n_eff();
        if skip >= n {
            return Err(Error::invalid(format!(
                "cannot drop {skip} rows from a design with {n} rows"
            )));
        }
        let rows = n - skip;
        let m = Matrix::from_fn(rows, self.matrix.cols(), |r, c| self.matrix[(r + skip, c)]);
        Ok(LaggedDesign {
            matrix: m,
            response: self.response[skip..].to_vec(),
            lag_order: self.lag_order,
            has_exog: self.has_exog,
        })
    }
}

/// Builds the lagged regression design for `y` on its own `p` lags, plus the
/// `p` lags of `x` when given. Rows start at index `p`, so `n_eff = N - p`.
pub fn build_lagged_design(
    y: &TimeSeries,
    x: Option<&TimeSeries>,
    p: usize,
) -> Result<LaggedDesign> {
    build_lagged_design_from(y, x, p, p)
}

/// Like [`build_lagged_design`] but with rows starting at `first_row >= p`.
///
/// Fixing `first_row` across different lag orders keeps the response rows
/// identical, which makes fit criteria comparable across candidate lags.
pub fn build_lagged_design_from(
    y: &TimeSeries,
    x: Option<&TimeSeries>,
    p: usize,
    first_row: usize,
) -> Result<LaggedDesign> {
    if p == 0 {
        return Err(Error::invalid("lag order must be positive"));
    }
    if first_row < p {
        return Err(Error::invalid(format!(
            "first row {first_row} must be at least the lag order {p}"
        )));
    }
    let n = y.len();
    if let Some(x) = x {
        if x.len() != n {
            return Err(Error::invalid(format!(
                "series lengths differ: y has {n}, x has {}",
                x.len()
            )));
        }
    }
    let has_exog = x.is_some();
    let cols = 1 + p + if has_exog { p } else { 0 };
    if n <= first_row {
        return Err(Error::invalid(format!(
            "insufficient observations: {n} points leave no rows past index {first_row}"
        )));
    }
    let rows = n - first_row;
    let yv = y.values();
    let mut m = Matrix::zeros(rows, cols);
    let mut response = Vec::with_capacity(rows);
    for (r, t) in (first_row..n).enumerate() {
        m[(r, 0)] = 1.0;
        for k in 1..=p {
            m[(r, k)] = yv[t - k];
        }
        if let Some(x) = x {
            let xv = x.values();
            for k in 1..=p {
                m[(r, p + k)] = xv[t - k];
            }
        }
        response.push(yv[t]);
    }
    Ok(LaggedDesign {
        matrix: m,
        response,
        lag_order: p,
        has_exog,
    })
}
