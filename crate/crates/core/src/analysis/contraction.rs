use serde::Serialize;

use crate::analysis::DecaySeries;
use crate::error::{PmeError, Result};

/// A time at which a checked inequality fails, with the amount by which
/// the left side exceeds the right side plus slack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub clause: String,
    pub time: f64,
    pub excess: f64,
}

/// Outcome of a pathwise or ensemble-level inequality check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub(crate) fn from_violations(mut violations: Vec<Violation>) -> Self {
        violations.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite times"));
        Self { pass: violations.is_empty(), violations }
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }

    /// Largest excess over all violations (0 when passing).
    pub fn worst_excess(&self) -> f64 {
        self.violations.iter().fold(0.0, |m, v| m.max(v.excess))
    }
}

fn combined(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

/// Checks that `series` is nonincreasing up to `k_sigma` combined standard
/// errors: `v_k <= v_j + k_sigma sqrt(se_j^2 + se_k^2)` for every `j < k`
/// (or only consecutive pairs when `all_pairs` is false).
pub fn monotone_check(series: &DecaySeries, k_sigma: f64, all_pairs: bool) -> Verdict {
    let (t, v, se) = (series.times(), series.values(), series.stderr());
    let mut violations = Vec::new();
    for k in 1..v.len() {
        let from = if all_pairs { 0 } else { k - 1 };
        let worst = (from..k).map(|j| v[k] - v[j] - k_sigma * combined(se[j], se[k])).fold(f64::NEG_INFINITY, f64::max);
        if worst > 0.0 {
            violations.push(Violation { clause: "nonincreasing".into(), time: t[k], excess: worst });
        }
    }
    Verdict::from_violations(violations)
}

/// Checks both forms of the weighted-L^1 contraction:
///
/// * `distance(t) <= distance(0) + 2 se(t)` at every record time;
/// * `distance(t) - distance(s) <= -int_s^t |A(u) - A(u')|_{L^1} + slack` for
///   consecutive record times, where `lyapunov = distance + cumulative
///   dissipation` and the slack is `rel_slack` times the dissipation over
///   `[s, t]` (time-discretization defect) plus two combined standard errors.
pub fn contraction_check(distance: &DecaySeries, lyapunov: &DecaySeries, rel_slack: f64) -> Result<Verdict> {
    if distance.times() != lyapunov.times() {
        return Err(PmeError::Input("distance and Lyapunov series use different times".into()));
    }
    let (d, sd) = (distance.values(), distance.stderr());
    let (l, sl) = (lyapunov.values(), lyapunov.stderr());
    let t = distance.times();
    let mut violations = Vec::new();
    for k in 1..d.len() {
        let excess = d[k] - d[0] - 2.0 * combined(sd[0], sd[k]);
        if excess > 0.0 {
            violations.push(Violation { clause: "bounded_by_initial".into(), time: t[k], excess });
        }
        let dissipated = (l[k - 1] - d[k - 1]) - (l[k] - d[k]);
        let slack = rel_slack * dissipated.abs() + 2.0 * combined(sl[k - 1], sl[k]);
        let excess = l[k] - l[k - 1] - slack;
        if excess > 0.0 {
            violations.push(Violation { clause: "dissipation".into(), time: t[k], excess });
        }
    }
    Ok(Verdict::from_violations(violations))
}

/// `h(t) = (h0^{-(m-1)} + coeff (m-1) t)^{-1/(m-1)}`, the solution of
/// `h' = -coeff h^m`, `h(0) = h0`.
pub fn theoretical_envelope(t: f64, h0: f64, coeff: f64, m: f64) -> f64 {
    (h0.powf(-(m - 1.0)) + coeff * (m - 1.0) * t).powf(-1.0 / (m - 1.0))
}

/// The constant `2^{-m} |w|_{L^{m*}}^{-m}` that the lower bound
/// `||u|^{m-1}u - |v|^{m-1}v| >= 2^{-m}|u-v|^m` and Hölder's inequality
/// give for the integral inequality of the weighted distance.
pub fn lemma_coefficient(m: f64, w_norm_mstar: f64) -> f64 {
    2f64.powf(-m) * w_norm_mstar.powf(-m)
}

/// Largest `C` with `f(t_k) - f(t_0) <= -C int_{t_0}^{t_k} f^m` at every record
/// time (trapezoid rule), i.e. the empirically fitted coefficient.
pub fn empirical_coefficient(f: &DecaySeries, m: f64) -> Result<f64> {
    let (t, v) = (f.times(), f.values());
    if v.len() < 2 {
        return Err(PmeError::Input("coefficient fit needs at least two points".into()));
    }
    let mut integral = 0.0;
    let mut best = f64::INFINITY;
    for k in 1..v.len() {
        integral += 0.5 * (t[k] - t[k - 1]) * (v[k].powf(m) + v[k - 1].powf(m));
        if integral > 0.0 {
            best = best.min((v[0] - v[k]) / integral);
        }
    }
    if !best.is_finite() || best <= 0.0 {
        return Err(PmeError::Input(format!("series admits no positive decay coefficient (best {best})")));
    }
    Ok(best)
}

/// Checks `f(t_k) <= h(t_k - t_0) + 2 se_k + abs_slack` with `h` the envelope
/// started from `f(t_0)`.
pub fn ode_comparison(f: &DecaySeries, coeff: f64, m: f64, abs_slack: f64) -> Result<Verdict> {
    let (t, v, se) = (f.times(), f.values(), f.stderr());
    let h0 = *v.first().ok_or_else(|| PmeError::Input("empty series".into()))?;
    if !(h0 > 0.0) {
        return Err(PmeError::Input("the comparison needs f(t_0) > 0".into()));
    }
    let mut violations = Vec::new();
    for k in 0..v.len() {
        let h = theoretical_envelope(t[k] - t[0], h0, coeff, m);
        let excess = v[k] - h - 2.0 * se[k] - abs_slack;
        if excess > 0.0 {
            violations.push(Violation { clause: "envelope".into(), time: t[k], excess });
        }
    }
    Ok(Verdict::from_violations(violations))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, hi: f64) -> Vec<f64> {
        (0..n).map(|k| hi * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn envelope_examples() {
        assert!((theoretical_envelope(1.0, 1.0, 1.0, 2.0) - 0.5).abs() < 1e-15);
        let big = 1e8;
        assert!((theoretical_envelope(big, 1.0, 1.0, 2.0) * big - 1.0).abs() < 1e-7);
        assert!((theoretical_envelope(3.0, 2.0, 0.5, 3.0) - 3.25f64.powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn envelope_solves_its_ode() {
        for &(h0, c, m) in &[(1.0, 1.0, 2.0), (2.0, 0.5, 3.0), (0.3, 7.0, 1.5)] {
            let dt = 1e-5;
            for k in 1..200 {
                let t = k as f64 * 0.01;
                let d = (theoretical_envelope(t + dt, h0, c, m) - theoretical_envelope(t - dt, h0, c, m)) / (2.0 * dt);
                let rhs = -c * theoretical_envelope(t, h0, c, m).powf(m);
                assert!((d - rhs).abs() < 1e-8 * (1.0 + rhs.abs()), "h0={h0} c={c} m={m} t={t}");
            }
        }
    }

    #[test]
    fn ode_comparison_cases() {
        let t = grid(50, 5.0);
        let h: Vec<f64> = t.iter().map(|&t| theoretical_envelope(t, 1.0, 1.0, 2.0)).collect();
        let exact = DecaySeries::exact(t.clone(), h.clone()).unwrap();
        assert!(ode_comparison(&exact, 1.0, 2.0, 0.0).unwrap().pass);

        let sub: Vec<f64> = h.iter().enumerate().map(|(k, v)| if k == 0 { *v } else { 0.9 * v }).collect();
        assert!(ode_comparison(&DecaySeries::exact(t.clone(), sub).unwrap(), 1.0, 2.0, 0.0).unwrap().pass);

        let mut sup = h.clone();
        sup[20] *= 1.2;
        let v = ode_comparison(&DecaySeries::exact(t.clone(), sup).unwrap(), 1.0, 2.0, 0.0).unwrap();
        assert!(!v.pass);
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.first_violation().unwrap().time, t[20]);
    }

    #[test]
    fn empirical_coefficient_recovers_envelope_constant() {
        let t = grid(2001, 4.0);
        let h: Vec<f64> = t.iter().map(|&t| theoretical_envelope(t, 1.0, 2.5, 2.0)).collect();
        let c = empirical_coefficient(&DecaySeries::exact(t, h).unwrap(), 2.0).unwrap();
        assert!((c - 2.5).abs() < 1e-3);
    }

    #[test]
    fn contraction_cases() {
        let t = grid(20, 1.0);
        let zeros = DecaySeries::exact(t.clone(), vec![0.0; 20]).unwrap();
        assert!(contraction_check(&zeros, &zeros, 0.0).unwrap().pass);

        let d: Vec<f64> = t.iter().map(|t| 1.0 / (1.0 + t)).collect();
        let cum: Vec<f64> = t.iter().map(|t| 0.5 * t / (1.0 + t)).collect();
        let lyap: Vec<f64> = d.iter().zip(&cum).map(|(a, b)| a + b).collect();
        let ds = DecaySeries::exact(t.clone(), d.clone()).unwrap();
        let ls = DecaySeries::exact(t.clone(), lyap).unwrap();
        assert!(contraction_check(&ds, &ls, 0.0).unwrap().pass);

        let mut bad = d.clone();
        bad[7] = d[0] * 1.1;
        let bs = DecaySeries::exact(t.clone(), bad.clone()).unwrap();
        let bl = DecaySeries::exact(t.clone(), bad.iter().zip(&cum).map(|(a, b)| a + b).collect()).unwrap();
        let v = contraction_check(&bs, &bl, 0.0).unwrap();
        assert!(!v.pass);
        assert_eq!(v.first_violation().unwrap().time, t[7]);
    }

    #[test]
    fn monotone_check_respects_error_bars() {
        let t = grid(5, 1.0);
        let s = DecaySeries::new(t.clone(), vec![1.0, 0.8, 0.85, 0.7, 0.6], vec![0.05; 5]).unwrap();
        assert!(monotone_check(&s, 2.0, true).pass);
        let s = DecaySeries::new(t, vec![1.0, 0.8, 0.95, 0.7, 0.6], vec![0.01; 5]).unwrap();
        let v = monotone_check(&s, 2.0, true);
        assert!(!v.pass && v.violations.len() == 1);
    }
}
