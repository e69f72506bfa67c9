use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{ode_comparison, theoretical_envelope, Check, DecaySeries};
use crate::error::{config_err, Result};
use crate::model::NoiseModel;
use crate::quad::gauss_legendre;

/// Shape parameter of the profile `exp(-BETA / (s (1 - s)))`.
const BETA: f64 = 0.25;
const TABLE_CELLS: usize = 2048;

fn raw_profile(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (-BETA / (s * (1.0 - s))).exp()
    }
}

/// `E1(s) = ∫_0^s p` and `E2(s) = ∫_0^s E1` for the normalized profile `p`,
/// tabulated on a uniform grid and interpolated by cubic Hermite splines
/// whose slopes are the exact derivatives.
struct EtaTables {
    norm: f64,
    e1: Vec<f64>,
    e2: Vec<f64>,
}

fn tables() -> &'static EtaTables {
    static TABLES: OnceLock<EtaTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let ds = 1.0 / TABLE_CELLS as f64;
        let cells: Vec<f64> =
            (0..TABLE_CELLS).map(|k| gauss_legendre(&raw_profile, k as f64 * ds, (k + 1) as f64 * ds)).collect();
        let norm: f64 = cells.iter().sum();
        let mut e1 = vec![0.0; TABLE_CELLS + 1];
        for k in 0..TABLE_CELLS {
            e1[k + 1] = e1[k] + cells[k] / norm;
        }
        // nested Gauss-Legendre: E1 inside a cell is its left value plus a
        // partial integral of the profile
        let mut e2 = vec![0.0; TABLE_CELLS + 1];
        for k in 0..TABLE_CELLS {
            let (s0, s1) = (k as f64 * ds, (k + 1) as f64 * ds);
            let inner = gauss_legendre(&|s: f64| e1[k] + gauss_legendre(&|r| raw_profile(r) / norm, s0, s), s0, s1);
            e2[k + 1] = e2[k] + inner;
        }
        EtaTables { norm, e1, e2 }
    })
}

fn hermite(s: f64, values: &[f64], slope: impl Fn(f64) -> f64) -> f64 {
    let ds = 1.0 / TABLE_CELLS as f64;
    let s = s.clamp(0.0, 1.0);
    let k = ((s / ds) as usize).min(TABLE_CELLS - 1);
    let (s0, s1) = (k as f64 * ds, (k + 1) as f64 * ds);
    let t = (s - s0) / ds;
    let (t2, t3) = (t * t, t * t * t);
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * values[k] + h10 * ds * slope(s0) + h01 * values[k + 1] + h11 * ds * slope(s1)
}

/// The normalized profile `p(s)` on `(0, 1)`; `∫ p = 1`, `max p <= 2`.
pub fn eta_profile(s: f64) -> f64 {
    raw_profile(s) / tables().norm
}

fn e1(s: f64) -> f64 {
    if s >= 1.0 {
        1.0
    } else {
        hermite(s, &tables().e1, eta_profile).clamp(0.0, 1.0)
    }
}

fn e2(s: f64) -> f64 {
    let t = tables();
    if s >= 1.0 {
        t.e2[TABLE_CELLS] + (s - 1.0)
    } else {
        hermite(s, &t.e2, e1)
    }
}

/// Value and first two derivatives of the symmetric convex surrogate of `|r|`
/// with `eta''(r) = p(|r|/delta)/delta`, `eta(0) = eta'(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaDelta {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

pub fn eta_delta(delta: f64, r: f64) -> Result<EtaDelta> {
    if !(delta > 0.0) || !delta.is_finite() {
        return config_err(format!("eta_delta needs delta > 0, got {delta}"));
    }
    Ok(eta_unchecked(delta, r))
}

#[inline]
pub(crate) fn eta_unchecked(delta: f64, r: f64) -> EtaDelta {
    let s = r.abs() / delta;
    EtaDelta {
        value: delta * e2(s),
        first: if r == 0.0 { 0.0 } else { r.signum() * e1(s) },
        second: eta_profile(s) / delta,
    }
}

/// Parameters of the error budget `G_alpha` of the doubling argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GAlpha {
    pub kappa: f64,
    pub kappa_bar: f64,
    pub alpha: f64,
    pub m: f64,
}

impl GAlpha {
    /// Validates `kappa in (0, 1/2]`, `kappa_bar in (1/(m ∧ 2), 1]` and
    /// `alpha in (0, 1 ∧ m/2)`.
    pub fn new(kappa: f64, kappa_bar: f64, alpha: f64, m: f64) -> Result<Self> {
        if !(m > 1.0) {
            return config_err(format!("G_alpha needs m > 1, got {m}"));
        }
        if !(kappa > 0.0 && kappa <= 0.5) {
            return config_err(format!("kappa must lie in (0, 1/2], got {kappa}"));
        }
        if !(kappa_bar > 1.0 / m.min(2.0) && kappa_bar <= 1.0) {
            return config_err(format!("kappa_bar must lie in (1/(m∧2), 1], got {kappa_bar}"));
        }
        if !(alpha > 0.0 && alpha < alpha_ceiling(m)) {
            return config_err(format!("alpha must lie in (0, {}), got {alpha}", alpha_ceiling(m)));
        }
        Ok(Self { kappa, kappa_bar, alpha, m })
    }

    pub fn from_noise(nm: &NoiseModel, alpha: f64) -> Result<Self> {
        Self::new(nm.kappa(), nm.kappa_bar(), alpha, nm.m())
    }

    /// `G_alpha(delta, eps, lambda)` term by term, in the order
    /// `delta^{2k}, delta^{-1} eps^{2kb}, delta/eps, delta^{2a}/eps^2, lambda^2/eps^2, lambda/eps`.
    pub fn terms(&self, delta: f64, eps: f64, lambda: f64) -> Result<[f64; 6]> {
        if !(delta > 0.0 && delta < 1.0) || !(eps > 0.0 && eps < 1.0) {
            return config_err(format!("G_alpha needs delta, eps in (0, 1), got {delta}, {eps}"));
        }
        if !(lambda >= 0.0) {
            return config_err(format!("G_alpha needs lambda >= 0, got {lambda}"));
        }
        Ok([
            delta.powf(2.0 * self.kappa),
            eps.powf(2.0 * self.kappa_bar) / delta,
            delta / eps,
            delta.powf(2.0 * self.alpha) / (eps * eps),
            lambda * lambda / (eps * eps),
            lambda / eps,
        ])
    }

    pub fn eval(&self, delta: f64, eps: f64, lambda: f64) -> Result<f64> {
        Ok(self.terms(delta, eps, lambda)?.iter().sum())
    }

    /// `delta = eps^{2 nu}`, valid for `nu in (1/(m ∧ 2), kappa_bar)` with
    /// `4 alpha nu > 2`.
    pub fn schedule(&self, nu: f64, eps: f64) -> Result<f64> {
        let lo = 1.0 / self.m.min(2.0);
        if !(nu > lo && nu < self.kappa_bar) {
            return config_err(format!("nu must lie in ({lo}, {}), got {nu}", self.kappa_bar));
        }
        if !(4.0 * self.alpha * nu > 2.0) {
            return config_err(format!("the schedule needs 4 alpha nu > 2, got {}", 4.0 * self.alpha * nu));
        }
        Ok(eps.powf(2.0 * nu))
    }
}

/// Supremum of the admissible `alpha`, `1 ∧ m/2`.
pub fn alpha_ceiling(m: f64) -> f64 {
    1.0f64.min(0.5 * m)
}

/// A `(nu, alpha)` pair along which `G_alpha(eps^{2 nu}, eps, 0) -> 0`:
/// midpoints of `(1/(m ∧ 2), kappa_bar)` and `(1/(2 nu), 1 ∧ m/2)`.
pub fn vanishing_schedule(m: f64, kappa_bar: f64) -> Result<(f64, f64)> {
    let lo = 1.0 / m.min(2.0);
    if !(kappa_bar > lo) {
        return config_err(format!("no schedule exists for kappa_bar = {kappa_bar} <= {lo}"));
    }
    let nu = 0.5 * (lo + kappa_bar);
    let alpha = 0.5 * (0.5 / nu + alpha_ceiling(m));
    Ok((nu, alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `||u|^{m-1}u - |v|^{m-1}v| >= 2^{-m} |u - v|^m`.
pub fn lower_bound_check(u: f64, v: f64, m: f64) -> LowerBound {
    let pw = |r: f64| r.abs().powf(m - 1.0) * r;
    let lhs = (pw(u) - pw(v)).abs();
    let rhs = 2f64.powf(-m) * (u - v).abs().powf(m);
    LowerBound { lhs, rhs, ok: lhs >= rhs - 1e-12 * rhs.max(1.0) }
}

/// Outcome of the lower-bound sweep for one `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub m: f64,
    pub pairs: usize,
    pub violations: usize,
    /// `min lhs/rhs` over pairs with `rhs > 0`.
    pub tightest_ratio: f64,
}

/// Uniform random `(u, v)` in `[-range, range]^2`.
pub fn lower_bound_sweep(m: f64, pairs: usize, range: f64, seed: u64) -> SweepResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..pairs {
        let u = rng.random_range(-range..=range);
        let v = rng.random_range(-range..=range);
        let lb = lower_bound_check(u, v, m);
        if !lb.ok {
            violations += 1;
        }
        if lb.rhs > 0.0 {
            tightest = tightest.min(lb.lhs / lb.rhs);
        }
    }
    SweepResult { m, pairs, violations, tightest_ratio: tightest }
}

/// Settings of [`lemma_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSuiteOptions {
    pub pairs: usize,
    pub exponents: Vec<f64>,
    pub seed: u64,
    pub deltas: Vec<f64>,
}

impl Default for LemmaSuiteOptions {
    fn default() -> Self {
        Self { pairs: 1_000_000, exponents: vec![1.5, 2.0, 3.0, 5.0], seed: 0, deltas: vec![0.01, 0.1, 0.5] }
    }
}

/// The lower bound sweep, the comparison verdicts on synthetic sub- and
/// super-solutions, the `eta_delta` clauses and the `G_alpha` schedules.
pub fn lemma_suite(opts: &LemmaSuiteOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (k, &m) in opts.exponents.iter().enumerate() {
        let sweep = lower_bound_sweep(m, opts.pairs, 100.0, opts.seed.wrapping_add(k as u64));
        checks.push(Check::new(format!("lower_bound_m{m}"), sweep.violations == 0, sweep.violations as f64, 0.0, 0.0));
    }

    let times: Vec<f64> = (0..=40).map(|k| 0.1 * k as f64).collect();
    let h: Vec<f64> = times.iter().map(|&t| theoretical_envelope(t, 1.0, 1.0, 2.0)).collect();
    let exact = DecaySeries::exact(times.clone(), h.clone())?;
    let sub = DecaySeries::exact(
        times.clone(),
        h.iter().enumerate().map(|(k, v)| if k == 0 { *v } else { 0.9 * v }).collect(),
    )?;
    let mut bump = h.clone();
    bump[20] *= 1.2;
    let sup = DecaySeries::exact(times, bump)?;
    let v_exact = ode_comparison(&exact, 1.0, 2.0, 0.0)?;
    let v_sub = ode_comparison(&sub, 1.0, 2.0, 0.0)?;
    let v_sup = ode_comparison(&sup, 1.0, 2.0, 0.0)?;
    checks.push(Check::new("comparison_equality", v_exact.pass, v_exact.worst_excess(), 0.0, 0.0));
    checks.push(Check::new("comparison_subsolution", v_sub.pass, v_sub.worst_excess(), 0.0, 0.0));
    checks.push(Check::new("comparison_violation_detected", !v_sup.pass, v_sup.worst_excess(), 0.0, 0.0));

    for &delta in &opts.deltas {
        let at0 = eta_delta(delta, 0.0)?;
        checks.push(Check::new(
            format!("eta_origin_d{delta}"),
            at0.value == 0.0 && at0.first == 0.0,
            at0.value.abs().max(at0.first.abs()),
            0.0,
            0.0,
        ));
        let samples: Vec<f64> = (-4000..=4000).map(|k| k as f64 * 0.005 * delta).collect();
        let mut gap = 0.0f64;
        let mut outside = 0.0f64;
        let mut peak = 0.0f64;
        for &r in &samples {
            let e = eta_delta(delta, r)?;
            gap = gap.max((e.value - r.abs()).abs());
            if r.abs() >= delta {
                outside = outside.max(e.second.abs());
            }
            peak = peak.max(e.second.abs());
        }
        checks.push(Check::new(format!("eta_close_to_abs_d{delta}"), gap <= delta, gap, delta, 0.0));
        checks.push(Check::new(format!("eta_support_d{delta}"), outside == 0.0, outside, 0.0, 0.0));
        checks.push(Check::new(format!("eta_curvature_bound_d{delta}"), peak <= 2.0 / delta, peak, 2.0 / delta, 0.0));
    }

    let g = GAlpha::new(0.5, 1.0, 0.75, 2.0)?;
    let (nu, _) = vanishing_schedule(2.0, 1.0)?;
    let along: Vec<f64> = (1..=30)
        .map(|k| {
            let eps = 2f64.powi(-k);
            g.eval(g.schedule(nu, eps)?, eps, 0.0)
        })
        .collect::<Result<_>>()?;
    let tail_monotone = along[5..].windows(2).all(|w| w[1] < w[0]);
    let last = *along.last().expect("nonempty");
    checks.push(Check::new("g_alpha_vanishes", tail_monotone && last < 0.05, last, 0.0, 0.05));

    let bad = GAlpha::new(0.5, 1.0, 0.45, 2.0)?;
    let diverging: Vec<f64> = (1..=30)
        .map(|k| {
            let eps = 2f64.powi(-k);
            Ok(bad.terms(eps, eps, 0.0)?[3])
        })
        .collect::<Result<_>>()?;
    let grows = diverging.windows(2).all(|w| w[1] > w[0]);
    let last = *diverging.last().expect("nonempty");
    checks.push(Check::new("g_alpha_diverges_off_schedule", grows && last > 1e6, last, f64::INFINITY, 0.0));
    Ok(checks)
}
