//! Windowed sample autocovariance and the sliding autocovariance matrix.
//!
//! The estimator compares two trailing windows of the same series: the
//! windowed autocovariance at `(t, t')` is the sample cross-covariance of
//! the windows ending at `t` and `t'`. Collecting it for every index pair
//! gives a dense, exactly symmetric positive semidefinite matrix that
//! tracks covariance structure which changes along the series — variance
//! ramps, regime shifts — which a single global estimate would average away.
//!
//! Windows near the start of the series would reach before index 0; the
//! series is extended by reflection (`x[-t] = x[t]`) so every window exists.

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;
use crate::series::TimeSeries;

/// Window length for the sliding estimator.
///
/// At least two points per window so the window mean is nondegenerate, and
/// strictly shorter than the series it slides over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    tau: usize,
}

impl WindowSpec {
    pub fn new(tau: usize, series_len: usize) -> Result<Self> {
        if tau < 2 {
            return Err(Error::invalid(format!(
                "window length must be at least 2, got {tau}"
            )));
        }
        if tau >= series_len {
            return Err(Error::invalid(format!(
                "window length {tau} must be shorter than the series ({series_len} points)"
            )));
        }
        Ok(WindowSpec { tau })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }
}

/// Extends `s` with `tau` reflected values so that padded index `i`
/// corresponds to original index `i - tau`, with `x[-t] = x[t]`.
pub fn reflect_pad(s: &TimeSeries, tau: usize) -> Result<TimeSeries> {
    if tau == 0 {
        return Err(Error::invalid("reflection length must be positive"));
    }
    if tau >= s.len() {
        return Err(Error::invalid(format!(
            "reflection length {tau} must be shorter than the series ({} points)",
            s.len()
        )));
    }
    let v = s.values();
    let mut padded = Vec::with_capacity(v.len() + tau);
    padded.extend((1..=tau).rev().map(|t| v[t]));
    padded.extend_from_slice(v);
    let ts = TimeSeries::new(padded).expect("padded copy of a valid series is valid");
    Ok(match s.name() {
        Some(n) => ts.renamed(n),
        None => ts,
    })
}

/// Mean of the window `[t - tau, t]` (inclusive, `tau + 1` points).
fn window_mean(v: &[f64], t: usize, tau: usize) -> f64 {
    v[t - tau..=t].iter().sum::<f64>() / (tau + 1) as f64
}

/// The literal estimator sum given precomputed window means: `tau + 1`
/// paired summands divided by `tau`.
fn windowed_autocov_with_means(
    v: &[f64],
    t: usize,
    t_prime: usize,
    tau: usize,
    mean_t: f64,
    mean_tp: f64,
) -> f64 {
    let mut acc = 0.0;
    for k in 0..=tau {
        acc += (v[t - k] - mean_t) * (v[t_prime - k] - mean_tp);
    }
    acc / tau as f64
}

/// Windowed sample autocovariance of `s` at indices `(t, t_prime)` with
/// window length `tau`.
///
/// Both windows `[t - tau, t]` and `[t_prime - tau, t_prime]` must lie
/// inside the series; pass a reflect-padded series (with shifted indices)
/// when windows would reach before the start. Symmetric in `(t, t_prime)`.
pub fn windowed_autocov(s: &TimeSeries, t: usize, t_prime: usize, tau: usize) -> Result<f64> {
    if tau == 0 {
        return Err(Error::invalid("window length must be positive"));
    }
    let v = s.values();
    for idx in [t, t_prime] {
        if idx >= v.len() || idx < tau {
            return Err(Error::invalid(format!(
                "window [{}..={idx}] out of range for series of length {} (tau = {tau})",
                idx as isize - tau as isize,
                v.len()
            )));
        }
    }
    let mean_t = window_mean(v, t, tau);
    let mean_tp = window_mean(v, t_prime, tau);
    Ok(windowed_autocov_with_means(v, t, t_prime, tau, mean_t, mean_tp))
}

/// The sliding autocovariance matrix of `s`: entry `(t, t')` is the windowed
/// sample autocovariance of the reflect-padded series, so every window is
/// defined and the matrix covers the full `N x N` index grid.
pub fn sliding_autocov_matrix(s: &TimeSeries, tau: usize) -> Result<SymmetricMatrix> {
    let spec = WindowSpec::new(tau, s.len())?;
    let tau = spec.tau();
    let padded = reflect_pad(s, tau)?;
    let v = padded.values();
    let n = s.len();
    let means: Vec<f64> = (0..n).map(|t| window_mean(v, t + tau, tau)).collect();
    SymmetricMatrix::from_upper_fn(n, |t, tp| {
        windowed_autocov_with_means(v, t + tau, tp + tau, tau, means[t], means[tp])
    })
}

/// Variant without reflection: only indices with a full in-range window are
/// kept, so the matrix covers `[tau, N)` and has dimension `N - tau`.
pub fn sliding_autocov_matrix_truncated(s: &TimeSeries, tau: usize) -> Result<SymmetricMatrix> {
    let spec = WindowSpec::new(tau, s.len())?;
    let tau = spec.tau();
    let v = s.values();
    let n = s.len() - tau;
    if n < 2 {
        return Err(Error::invalid(
            "truncated sliding matrix needs at least two usable indices",
        ));
    }
    let means: Vec<f64> = (0..n).map(|t| window_mean(v, t + tau, tau)).collect();
    SymmetricMatrix::from_upper_fn(n, |t, tp| {
        windowed_autocov_with_means(v, t + tau, tp + tau, tau, means[t], means[tp])
    })
}

/// Autocovariance matrix of a stationary AR(1) process with coefficient
/// `phi` and innovation standard deviation `sigma`: entry `(t, t')` equals
/// `phi^|t - t'| * sigma^2 / (1 - phi^2)`.
pub fn ar1_theoretical_autocov(phi: f64, sigma: f64, n: usize) -> Result<SymmetricMatrix> {
    if !(phi.abs() < 1.0) {
        return Err(Error::invalid(format!(
            "AR(1) coefficient must satisfy |phi| < 1, got {phi}"
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!(
            "innovation standard deviation must be positive, got {sigma}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("matrix dimension must be positive"));
    }
    let var = sigma * sigma / (1.0 - phi * phi);
    SymmetricMatrix::from_upper_fn(n, |t, tp| var * phi.powi((tp as i32 - t as i32).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn reflect_pad_three_points() {
        let p = reflect_pad(&ts(&[10.0, 20.0, 30.0]), 2).unwrap();
        assert_eq!(p.values(), &[30.0, 20.0, 10.0, 20.0, 30.0]);
    }

    #[test]
    fn reflect_pad_single() {
        let p = reflect_pad(&ts(&[1.0, 2.0, 3.0, 4.0]), 1).unwrap();
        assert_eq!(p.values(), &[2.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn reflect_pad_preserves_original_segment() {
        let s = ts(&[5.0, -1.0, 2.0, 0.5, 3.0]);
        let tau = 3;
        let p = reflect_pad(&s, tau).unwrap();
        assert_eq!(&p.values()[tau..], s.values());
    }

    #[test]
    fn reflect_pad_rejects_long_tau() {
        assert!(reflect_pad(&ts(&[1.0, 2.0]), 2).is_err());
        assert!(reflect_pad(&ts(&[1.0, 2.0]), 0).is_err());
    }

    #[test]
    fn windowed_autocov_constant_series_is_zero() {
        let s = ts(&[3.0; 10]);
        for (t, tp) in [(3, 3), (5, 8), (9, 4)] {
            assert_eq!(windowed_autocov(&s, t, tp, 3).unwrap(), 0.0);
        }
    }

    #[test]
    fn windowed_autocov_hand_evaluated() {
        // window (3,4,5) has mean 4; sum of squared deviations is 2; divisor 2
        let s = ts(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let v = windowed_autocov(&s, 4, 4, 2).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn windowed_autocov_symmetric_in_indices() {
        let s = ts(&[0.3, -1.2, 2.5, 0.1, -0.7, 1.9, 0.4, -2.2, 1.1, 0.6]);
        for (t, tp) in [(4, 7), (3, 9), (5, 5), (8, 3)] {
            let a = windowed_autocov(&s, t, tp, 3).unwrap();
            let b = windowed_autocov(&s, tp, t, 3).unwrap();
            assert_eq!(a, b, "t={t} tp={tp}");
        }
    }

    #[test]
    fn windowed_autocov_rejects_out_of_range() {
        let s = ts(&[1.0, 2.0, 3.0, 4.0]);
        assert!(windowed_autocov(&s, 1, 3, 2).is_err()); // t - tau < 0
        assert!(windowed_autocov(&s, 2, 4, 2).is_err()); // t' past the end
    }

    #[test]
    fn sliding_matrix_constant_series_is_zero() {
        let m = sliding_autocov_matrix(&ts(&[7.0; 12]), 4).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(m[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn sliding_matrix_entries_match_windowed_autocov_on_padded_series() {
        let vals: Vec<f64> = (0..20).map(|i| ((i * 13 % 7) as f64) - 2.0).collect();
        let s = ts(&vals);
        let tau = 5;
        let m = sliding_autocov_matrix(&s, tau).unwrap();
        let padded = reflect_pad(&s, tau).unwrap();
        for t in 0..s.len() {
            for tp in 0..s.len() {
                let direct = windowed_autocov(&padded, t + tau, tp + tau, tau).unwrap();
                assert_eq!(m[(t, tp)], direct, "entry ({t}, {tp})");
            }
        }
    }

    #[test]
    fn sliding_matrix_scale_equivariance() {
        let vals: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin() * (1.0 + i as f64 * 0.05)).collect();
        let s = ts(&vals);
        let scaled = ts(&vals.iter().map(|v| 3.0 * v).collect::<Vec<_>>());
        let m1 = sliding_autocov_matrix(&s, 6).unwrap();
        let m2 = sliding_autocov_matrix(&scaled, 6).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                assert!((m2[(i, j)] - 9.0 * m1[(i, j)]).abs() <= 1e-10 * m1[(i, j)].abs().max(1.0));
            }
        }
    }

    #[test]
    fn truncated_matrix_dimension_and_agreement() {
        let vals: Vec<f64> = (0..25).map(|i| ((i * 11 % 9) as f64) * 0.5 - 1.0).collect();
        let s = ts(&vals);
        let tau = 6;
        let m = sliding_autocov_matrix_truncated(&s, tau).unwrap();
        assert_eq!(m.dim(), 25 - tau);
        // entries use the raw series directly, no reflected values
        let direct = windowed_autocov(&s, tau, tau + 3, tau).unwrap();
        assert_eq!(m[(0, 3)], direct);
    }

    #[test]
    fn ar1_theory_white_noise_is_identity() {
        let m = ar1_theoretical_autocov(0.0, 1.0, 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[(i, j)], if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn ar1_theory_two_by_two() {
        // stationary variance 1/(1-0.81), cross-checked against the
        // long-run sample variance of a simulated AR(1) elsewhere
        let v = 1.0 / (1.0 - 0.81);
        let m = ar1_theoretical_autocov(0.9, 1.0, 2).unwrap();
        assert!((m[(0, 0)] - v).abs() < 1e-12);
        assert!((m[(0, 1)] - 0.9 * v).abs() < 1e-12);
        assert!((m[(1, 1)] - v).abs() < 1e-12);
    }

    #[test]
    fn ar1_theory_constant_diagonal() {
        let m = ar1_theoretical_autocov(0.6, 2.0, 8).unwrap();
        for i in 1..8 {
            assert_eq!(m[(i, i)], m[(0, 0)]);
        }
    }

    #[test]
    fn ar1_theory_rejects_nonstationary() {
        assert!(ar1_theoretical_autocov(1.0, 1.0, 3).is_err());
        assert!(ar1_theoretical_autocov(-1.2, 1.0, 3).is_err());
    }
}
