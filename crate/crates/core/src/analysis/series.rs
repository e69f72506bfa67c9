use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{PmeError, Result};
use crate::solver::Moments;

/// A sampled curve `t -> E F(t)` with Monte Carlo standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecaySeries {
    times: Vec<f64>,
    values: Vec<f64>,
    stderr: Vec<f64>,
}

impl DecaySeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, stderr: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() != stderr.len() {
            return Err(PmeError::Input(format!(
                "series lengths differ: {} times, {} values, {} errors",
                times.len(),
                values.len(),
                stderr.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(PmeError::Input("series times must be strictly increasing".into()));
        }
        if values.iter().chain(&stderr).any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(PmeError::Input("series values and errors must be finite and nonnegative".into()));
        }
        Ok(Self { times, values, stderr })
    }

    /// A series without sampling error.
    pub fn exact(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(times, values, vec![0.0; n])
    }

    pub fn from_moments(times: &[f64], moments: &Moments) -> Result<Self> {
        Self::new(times.to_vec(), moments.mean.clone(), moments.stderr.clone())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn stderr(&self) -> &[f64] {
        &self.stderr
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(t_k, values_k)` with `t_k` inside `window` (endpoints included up to rounding).
    fn window_points(&self, window: (f64, f64)) -> impl Iterator<Item = (f64, f64)> + '_ {
        let slack = 1e-9 * window.1.abs().max(1.0);
        self.times
            .iter()
            .zip(&self.values)
            .filter(move |(t, _)| **t >= window.0 - slack && **t <= window.1 + slack)
            .map(|(t, v)| (*t, *v))
    }
}

/// Least-squares slope with a 95% Student-t confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub ci_halfwidth: f64,
    pub window: (f64, f64),
    pub points: usize,
}

impl RateFit {
    pub fn contains(&self, value: f64) -> bool {
        (self.exponent - value).abs() <= self.ci_halfwidth
    }
}

fn ols(xs: &[f64], ys: &[f64], window: (f64, f64)) -> Result<RateFit> {
    let n = xs.len();
    if n < 5 {
        return Err(PmeError::Input(format!("a rate fit needs at least 5 points in the window, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(PmeError::Input("degenerate abscissae in rate fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let se = (rss / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .map_err(|e| PmeError::Input(format!("t distribution: {e}")))?
        .inverse_cdf(0.975);
    Ok(RateFit { exponent: slope, intercept, ci_halfwidth: t * se, window, points: n })
}

fn positive_window(series: &DecaySeries, window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let pts: Vec<(f64, f64)> = series.window_points(window).collect();
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(PmeError::Input(format!("nonpositive value {v} at t = {t} inside the fit window")));
    }
    Ok(pts)
}

/// Slope of `log value` against `log t` on `window`.
pub fn fit_power_exponent(series: &DecaySeries, window: (f64, f64)) -> Result<RateFit> {
    fit_power_exponent_shifted(series, window, 0.0)
}

/// Slope of `log value` against `log(t + shift)`; a shift of 1 fits
/// `(1 + t)^p` laws exactly.
pub fn fit_power_exponent_shifted(series: &DecaySeries, window: (f64, f64), shift: f64) -> Result<RateFit> {
    let pts = positive_window(series, window)?;
    if pts.iter().any(|(t, _)| t + shift <= 0.0) {
        return Err(PmeError::Input("log-time needs t + shift > 0 inside the window".into()));
    }
    let xs: Vec<f64> = pts.iter().map(|(t, _)| (t + shift).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    ols(&xs, &ys, window)
}

/// Slope of `log value` against `t`, the exponential decay rate.
pub fn fit_log_slope(series: &DecaySeries, window: (f64, f64)) -> Result<RateFit> {
    let pts = positive_window(series, window)?;
    let xs: Vec<f64> = pts.iter().map(|(t, _)| *t).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    ols(&xs, &ys, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn exact_power_law() {
        let t = times(40, 0.1, 4.0);
        let v = t.iter().map(|t| 1.0 / t).collect();
        let fit = fit_power_exponent(&DecaySeries::exact(t, v).unwrap(), (0.5, 4.0)).unwrap();
        assert!((fit.exponent + 1.0).abs() < 1e-9);
        assert!(fit.ci_halfwidth < 1e-9);
    }

    #[test]
    fn noisy_power_law_within_ci() {
        let t = times(60, 0.5, 8.0);
        // deterministic pseudo-noise of relative size 1e-3
        let v = t
            .iter()
            .enumerate()
            .map(|(k, t)| 3.0 * t.powf(-0.5) * (1.0 + 1e-3 * ((k as f64 * 12.9898).sin())))
            .collect();
        let fit = fit_power_exponent(&DecaySeries::exact(t, v).unwrap(), (0.5, 8.0)).unwrap();
        assert!(fit.contains(-0.5), "{fit:?}");
        assert!(fit.ci_halfwidth < 1e-2);
    }

    #[test]
    fn constant_series() {
        let t = times(10, 1.0, 2.0);
        let fit = fit_power_exponent(&DecaySeries::exact(t, vec![0.3; 10]).unwrap(), (1.0, 2.0)).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
    }

    #[test]
    fn shifted_and_exponential_fits() {
        let t = times(30, 0.0, 5.0);
        let v: Vec<f64> = t.iter().map(|t| 2.0 / (1.0 + t)).collect();
        let s = DecaySeries::exact(t.clone(), v).unwrap();
        assert!((fit_power_exponent_shifted(&s, (0.0, 5.0), 1.0).unwrap().exponent + 1.0).abs() < 1e-12);
        let e: Vec<f64> = t.iter().map(|t| (-3.0 * t).exp()).collect();
        let s = DecaySeries::exact(t, e).unwrap();
        assert!((fit_log_slope(&s, (0.0, 5.0)).unwrap().exponent + 3.0).abs() < 1e-10);
    }

    #[test]
    fn rejections() {
        let t = times(10, 1.0, 2.0);
        let mut v = vec![1.0; 10];
        v[4] = 0.0;
        let s = DecaySeries::exact(t.clone(), v).unwrap();
        assert!(fit_power_exponent(&s, (1.0, 2.0)).is_err());
        assert!(fit_power_exponent(&DecaySeries::exact(t.clone(), vec![1.0; 10]).unwrap(), (1.0, 1.3)).is_err());
        assert!(DecaySeries::exact(vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(DecaySeries::exact(t, vec![1.0; 3]).is_err());
    }
}
