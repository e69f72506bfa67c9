use serde::{Deserialize, Serialize};

use crate::analysis::lemmas::eta_unchecked;
use crate::domain::{Grid1D, GridFunction};
use crate::error::{config_err, PmeError, Result};
use crate::model::{NoiseModel, Nonlinearity};
use crate::quad::gauss_legendre;
use crate::solver::{unit_bump, CoupledOutput, NoiseIncrements};

/// A trajectory stored at every time step `t_n = n dt`, `n = 0..=steps`,
/// with the key of the increments that drove it (if any).
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Grid1D,
    dt: f64,
    states: Vec<GridFunction>,
    noise: Option<NoiseIncrements>,
}

impl Trajectory {
    pub fn new(states: Vec<GridFunction>, dt: f64, noise: Option<NoiseIncrements>) -> Result<Self> {
        if states.len() < 2 {
            return Err(PmeError::Input("a trajectory needs at least two states".into()));
        }
        if !(dt > 0.0) {
            return config_err(format!("trajectory step must be positive, got {dt}"));
        }
        let grid = *states[0].grid();
        for s in &states {
            grid.check_same(s.grid())?;
        }
        Ok(Self { grid, dt, states, noise })
    }

    /// Member `member` of a run recorded with `record_every = 1` and snapshots on.
    pub fn from_coupled(out: &CoupledOutput, member: usize, modes: usize) -> Result<Self> {
        if out.snapshots.is_empty() {
            return Err(PmeError::Input("the run kept no snapshots".into()));
        }
        let dense = out.times.iter().enumerate().all(|(k, t)| (t - k as f64 * out.dt).abs() <= 1e-9 * out.dt.max(*t));
        if !dense {
            return Err(PmeError::Input("entropy residuals need a state at every step (record_every = 1)".into()));
        }
        let states = out
            .snapshots
            .iter()
            .map(|snap| snap.get(member).cloned().ok_or_else(|| PmeError::Input(format!("run has no member {member}"))))
            .collect::<Result<Vec<_>>>()?;
        let noise = (modes > 0).then(|| NoiseIncrements::new(out.seed, out.dt, modes));
        Self::new(states, out.dt, noise)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn states(&self) -> &[GridFunction] {
        &self.states
    }

    pub fn duration(&self) -> f64 {
        (self.states.len() - 1) as f64 * self.dt
    }
}

/// The same states in reverse order, without noise: an anti-diffusing path.
pub fn reversed(traj: &Trajectory) -> Trajectory {
    let mut states = traj.states.clone();
    states.reverse();
    Trajectory { grid: traj.grid, dt: traj.dt, states, noise: None }
}

/// Nonnegative test functions `phi(t) rho(x)` built from the unit bump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// Centered at the midpoint, radius a quarter of the interval.
    Central,
    /// Centered at the first third, radius a fifth.
    Left,
    /// Centered at two thirds, radius a fifth.
    Right,
    /// Centered, radius 0.45 of the interval, half the time horizon.
    Wide,
}

impl TestFunction {
    /// `(center, radius, horizon)` as fractions of interval and duration.
    fn shape(self) -> (f64, f64, f64) {
        match self {
            TestFunction::Central => (0.5, 0.25, 1.0),
            TestFunction::Left => (1.0 / 3.0, 0.2, 1.0),
            TestFunction::Right => (2.0 / 3.0, 0.2, 1.0),
            TestFunction::Wide => (0.5, 0.45, 0.5),
        }
    }
}

/// `(b, b', b'')` of the unit bump `exp(1 - 1/(1 - s^2))`.
fn bump_jet(s: f64) -> (f64, f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let b = unit_bump(s);
    let g1 = -2.0 * s / (q * q);
    let g2 = -2.0 / (q * q) - 8.0 * s * s / (q * q * q);
    (b, b * g1, b * (g2 + g1 * g1))
}

/// Signed residual `RHS - LHS` of the entropy inequality, averaged over an
/// ensemble of trajectories, with the contribution of each term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyResidual {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Per-term means: initial, time derivative, flux, Itô correction,
    /// gradient (subtracted), stochastic integral.
    pub terms: [f64; 6],
}

/// `[eta' a^2](u) = ∫_0^u eta'(z - a) A'(z) dz`, rewritten by parts as
/// `eta'(u - a) A(u) - ∫_0^u eta''(z - a) A(z) dz`. The last integral only
/// sees the support `[a - delta, a + delta]` of `eta''`; its running value
/// `H` is tabulated there once and interpolated by cubic Hermite splines.
struct Flux<'a> {
    nl: &'a Nonlinearity,
    delta: f64,
    level: f64,
    cumulative: Vec<f64>,
    at_zero: f64,
}

const FLUX_CELLS: usize = 1024;

impl<'a> Flux<'a> {
    fn new(nl: &'a Nonlinearity, delta: f64, level: f64) -> Self {
        let lo = level - delta;
        let dz = 2.0 * delta / FLUX_CELLS as f64;
        let integrand = |z: f64| eta_unchecked(delta, z - level).second * nl.a(z);
        let mut cumulative = vec![0.0; FLUX_CELLS + 1];
        for k in 0..FLUX_CELLS {
            let a = lo + k as f64 * dz;
            // A is only C^1 at the origin; split the cell there
            let piece = if a < 0.0 && a + dz > 0.0 {
                gauss_legendre(&integrand, a, 0.0) + gauss_legendre(&integrand, 0.0, a + dz)
            } else {
                gauss_legendre(&integrand, a, a + dz)
            };
            cumulative[k + 1] = cumulative[k] + piece;
        }
        let mut flux = Self { nl, delta, level, cumulative, at_zero: 0.0 };
        flux.at_zero = flux.running(0.0);
        flux
    }

    fn running(&self, z: f64) -> f64 {
        let lo = self.level - self.delta;
        let dz = 2.0 * self.delta / FLUX_CELLS as f64;
        if z <= lo {
            return 0.0;
        }
        if z >= self.level + self.delta {
            return self.cumulative[FLUX_CELLS];
        }
        let k = (((z - lo) / dz) as usize).min(FLUX_CELLS - 1);
        let (z0, z1) = (lo + k as f64 * dz, lo + (k + 1) as f64 * dz);
        let t = (z - z0) / dz;
        let slope = |z: f64| eta_unchecked(self.delta, z - self.level).second * self.nl.a(z);
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.cumulative[k]
            + (t3 - 2.0 * t2 + t) * dz * slope(z0)
            + (-2.0 * t3 + 3.0 * t2) * self.cumulative[k + 1]
            + (t3 - t2) * dz * slope(z1)
    }

    fn eval(&self, u: f64) -> f64 {
        eta_unchecked(self.delta, u - self.level).first * self.nl.a(u) - (self.running(u) - self.at_zero)
    }
}

fn single_residual(
    traj: &Trajectory,
    nl: &Nonlinearity,
    nm: &NoiseModel,
    delta: f64,
    level: f64,
    testfn: TestFunction,
) -> [f64; 6] {
    let grid = traj.grid;
    let (h, dt, n) = (grid.h(), traj.dt, grid.n());
    let (center, radius, horizon) = testfn.shape();
    let (c, r) = (grid.a() + center * grid.length(), radius * grid.length());
    let t_phi = horizon * traj.duration();
    let rho: Vec<(f64, f64)> = grid
        .nodes()
        .iter()
        .map(|&x| {
            let (b, _, b2) = bump_jet((x - c) / r);
            (b, b2 / (r * r))
        })
        .collect();
    let rho_edge: Vec<f64> = (0..=n).map(|e| unit_bump((grid.a() + (e as f64 + 0.5) * h - c) / r)).collect();
    let phi = |t: f64| bump_jet(t / t_phi);
    let modes = traj.noise.map_or(0, |nz| nz.modes());
    let mut dw = vec![0.0; modes];

    let flux = Flux::new(nl, delta, level);
    let mut terms = [0.0; 6];
    let xi = traj.states[0].values();
    terms[0] = xi.iter().zip(&rho).map(|(&u, (rho, _))| eta_unchecked(delta, u - level).value * rho).sum::<f64>()
        * phi(0.0).0
        * h;

    let mut prim = vec![0.0; n + 2];
    let mut curv = vec![0.0; n + 2];
    let last = traj.states.len() - 1;
    for (step, state) in traj.states[..last].iter().enumerate() {
        let t = step as f64 * dt;
        let (p, dp, _) = phi(t);
        if p == 0.0 && dp == 0.0 {
            continue;
        }
        let dp = dp / t_phi;
        let u = state.values();
        if let Some(nz) = traj.noise {
            nz.fill(step as u64, &mut dw);
        }
        let (mut time, mut fl, mut ito, mut mart) = (0.0, 0.0, 0.0, 0.0);
        for (i, (&ui, &(rh, lap_rho))) in u.iter().zip(&rho).enumerate() {
            let eta = eta_unchecked(delta, ui - level);
            prim[i + 1] = nl.primitive(ui);
            curv[i + 1] = eta.second;
            if rh == 0.0 && lap_rho == 0.0 {
                continue;
            }
            time += eta.value * rh;
            fl += flux.eval(ui) * lap_rho;
            if modes > 0 && rh != 0.0 {
                let x = grid.node(i + 1);
                let sigma = nm.sigma(x, ui);
                let sq: f64 = sigma.iter().map(|s| s * s).sum();
                ito += 0.5 * eta.second * sq * rh;
                mart += eta.first * sigma.iter().zip(&dw).map(|(s, w)| s * w).sum::<f64>() * rh;
            }
        }
        let grad: f64 = (0..=n)
            .map(|e| {
                let g = (prim[e + 1] - prim[e]) / h;
                0.5 * (curv[e] + curv[e + 1]) * g * g * rho_edge[e]
            })
            .sum();
        terms[1] += time * dp * h * dt;
        terms[2] += fl * p * h * dt;
        terms[3] += ito * p * h * dt;
        terms[4] += grad * p * h * dt;
        terms[5] += mart * p * h;
    }
    terms
}

/// Mean over `trajectories` of the discrete `RHS - LHS` of the entropy
/// inequality with `eta = eta_delta(. - level)`: time integrals are left
/// Riemann sums, space integrals nodal sums, and the stochastic integral is
/// `Σ_n phi ρ eta' σ^k ΔW^k_n` with the increments regenerated from the key.
/// A valid entropy solution gives a mean that is nonnegative up to the
/// discretization error.
pub fn entropy_residual(
    trajectories: &[Trajectory],
    nl: &Nonlinearity,
    nm: &NoiseModel,
    delta: f64,
    level: f64,
    testfn: TestFunction,
) -> Result<EntropyResidual> {
    if !(delta > 0.0) || !delta.is_finite() {
        return config_err(format!("entropy residual needs delta > 0, got {delta}"));
    }
    if trajectories.is_empty() {
        return Err(PmeError::Input("no trajectories".into()));
    }
    let mut acc = crate::solver::Welford::default();
    let mut terms = [0.0; 6];
    for traj in trajectories {
        let t = single_residual(traj, nl, nm, delta, level, testfn);
        acc.push(t[0] + t[1] + t[2] + t[3] - t[4] + t[5]);
        for (s, v) in terms.iter_mut().zip(t) {
            *s += v / trajectories.len() as f64;
        }
    }
    Ok(EntropyResidual { mean: acc.mean(), stderr: acc.stderr(), samples: trajectories.len(), terms })
}
