//! Granger causality testing for heteroskedastic and regime-shifting time
//! series.
//!
//! The classical Granger F test compares nested OLS autoregressions and
//! leans on homoskedastic, uncorrelated residuals. This crate also
//! implements a GLS variant that estimates the residual covariance with a
//! sliding-window autocovariance matrix, refits by generalized least
//! squares, and Wald-tests the exogenous lags — which holds up better when
//! the residuals carry structural breaks or growing variance.
//!
//! The pieces compose bottom-up:
//!
//! * [`series`] — time-series container, differencing, lagged designs.
//! * [`matrix`] — symmetric matrices, Cholesky solves, eigenvalue floor.
//! * [`dist`] — log-gamma, incomplete beta, F distribution.
//! * [`autocov`] — windowed and sliding autocovariance estimation.
//! * [`regression`] — OLS and GLS fits.
//! * [`inference`] — restrictions, Wald statistic, nested-model F.
//! * [`pipeline`] — the end-to-end causality tests and causal graphs.
//! * [`simulation`] — seeded generators for synthetic benchmarks.
//! * [`bench`] — the classical-vs-GLS accuracy harness.
//! * [`dataset`] — CSV ingestion for real multi-series data.

pub mod autocov;
pub mod bench;
pub mod dataset;
pub mod dist;
pub mod error;
pub mod inference;
pub mod matrix;
pub mod pipeline;
pub mod regression;
pub mod series;
pub mod simulation;
pub mod threads;

pub use error::{Error, Result};
pub use series::TimeSeries;
