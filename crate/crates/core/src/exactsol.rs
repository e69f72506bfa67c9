//! The separable solution `u(t, x) = (1 + t)^{-1/(m-1)} f(x)` of the
//! deterministic porous medium equation, where `f >= 0` solves
//! `Δ(f^m) + f/(m-1) = 0` with zero boundary values.

use crate::domain::{laplacian_into, Grid1D, GridFunction};
use crate::error::{config_err, PmeError, Result};

#[derive(Debug, Clone)]
pub struct Profile {
    grid: Grid1D,
    f: GridFunction,
    m: f64,
    midpoint_value: f64,
    residual_norm: f64,
}

impl Profile {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn f(&self) -> &GridFunction {
        &self.f
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `v(mid) = f(mid)^m`, the shooting parameter.
    pub fn midpoint_value(&self) -> f64 {
        self.midpoint_value
    }

    /// `max_i |Δ_h(f^m) + f/(m-1)|` at the interior nodes.
    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }
}

const MAX_BISECTIONS: usize = 400;

/// Integrates `v'' = -c sgn(v)|v|^{1/m}`, `v(0) = top`, `v'(0) = 0` over
/// `[0, len]` with classical RK4, `substeps` steps per half mesh width.
/// Returns `v` at every multiple of `half_h`.
fn shoot(top: f64, c: f64, m: f64, half_h: f64, len: f64, substeps: usize) -> Vec<f64> {
    let rhs = |v: f64| -c * v.signum() * v.abs().powf(1.0 / m);
    let count = (len / half_h).round() as usize;
    let k = half_h / substeps as f64;
    let mut out = Vec::with_capacity(count + 1);
    let (mut v, mut dv) = (top, 0.0);
    out.push(v);
    for _ in 0..count {
        for _ in 0..substeps {
            let (k1v, k1d) = (dv, rhs(v));
            let (k2v, k2d) = (dv + 0.5 * k * k1d, rhs(v + 0.5 * k * k1v));
            let (k3v, k3d) = (dv + 0.5 * k * k2d, rhs(v + 0.5 * k * k2v));
            let (k4v, k4d) = (dv + k * k3d, rhs(v + k * k3v));
            v += k / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            dv += k / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        }
        out.push(v);
    }
    out
}

/// Computes the positive profile by shooting from the midpoint and bisecting
/// on `v(mid)` until `|v(b)| <= tol * v(mid)`.
pub fn solve_profile(grid: &Grid1D, m: f64, tol: f64) -> Result<Profile> {
    if !(m > 1.0) || !m.is_finite() {
        return config_err(format!("profile needs m > 1, got {m}"));
    }
    if !(tol > 0.0) {
        return config_err(format!("profile tolerance must be positive, got {tol}"));
    }
    let c = 1.0 / (m - 1.0);
    let half = 0.5 * grid.length();
    let half_h = 0.5 * grid.h();
    let substeps = ((half_h / (grid.length() / 8000.0)).ceil() as usize).max(2);
    let end_value = |top: f64| *shoot(top, c, m, half_h, half, substeps).last().expect("nonempty");

    // The first zero of v moves outward as v(mid) grows, so the end value is
    // negative below the root and positive above it.
    let (mut lo, mut hi) = (1.0, 1.0);
    let mut guard = 0;
    while end_value(lo) >= 0.0 {
        lo *= 0.5;
        guard += 1;
        if guard > 200 {
            return Err(PmeError::NonConvergence {
                iterations: guard,
                detail: format!("no lower bracket found, last v(mid) = {lo:e}"),
            });
        }
    }
    while end_value(hi) <= 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(PmeError::NonConvergence {
                iterations: guard,
                detail: format!("no upper bracket found, last v(mid) = {hi:e}"),
            });
        }
    }
    let mut top = 0.5 * (lo + hi);
    let mut iterations = 0;
    loop {
        let val = end_value(top);
        if val.abs() <= tol * top && (hi - lo) <= 1e-13 * hi {
            break;
        }
        if val < 0.0 {
            lo = top;
        } else {
            hi = top;
        }
        let next = 0.5 * (lo + hi);
        iterations += 1;
        if next == top || iterations >= MAX_BISECTIONS {
            if end_value(next).abs() <= tol * next {
                top = next;
                break;
            }
            return Err(PmeError::NonConvergence {
                iterations,
                detail: format!("bracket [{lo:e}, {hi:e}], boundary value {val:e}"),
            });
        }
        top = next;
    }

    let trace = shoot(top, c, m, half_h, half, substeps);
    let mid = grid.a() + half;
    let values: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| {
            let j = ((x - mid).abs() / half_h).round() as usize;
            trace[j].max(0.0).powf(1.0 / m)
        })
        .collect();
    let vm: Vec<f64> = values.iter().map(|f| f.powf(m)).collect();
    let mut lap = vec![0.0; vm.len()];
    laplacian_into(&vm, grid.h(), &mut lap);
    let residual_norm = lap.iter().zip(&values).map(|(l, f)| (l + c * f).abs()).fold(0.0, f64::max);
    let f = GridFunction::new(*grid, values)?;
    if f.max_abs() <= 0.0 {
        return Err(PmeError::NonConvergence { iterations, detail: "profile collapsed to zero".into() });
    }
    Ok(Profile { grid: *grid, f, m, midpoint_value: top, residual_norm })
}

/// `(1 + t)^{-1/(m-1)} f`.
pub fn separable_solution(profile: &Profile, t: f64) -> Result<GridFunction> {
    if !(t >= 0.0) {
        return config_err(format!("separable solution needs t >= 0, got {t}"));
    }
    Ok(profile.f.scaled((1.0 + t).powf(-1.0 / (profile.m - 1.0))))
}
