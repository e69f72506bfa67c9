use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::{Grid1D, GridFunction};
use crate::error::{config_err, Result};

/// Amplitude law `g(r)` multiplying each spatial noise mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum NoiseFamily {
    Off,
    /// `g = 1`.
    Additive,
    /// `g(r) = r`.
    Linear,
    /// `g(r) = sign(r) |r|^{1/2 + kappa}`.
    Holder {
        kappa: f64,
    },
    /// `g(r) = |r|^{1/2 + kappa}`: the square-root noise of branching
    /// particle limits, lifted to an admissible Hölder exponent.
    Branching {
        kappa: f64,
    },
}

impl NoiseFamily {
    #[inline]
    pub fn amplitude(&self, r: f64) -> f64 {
        match *self {
            NoiseFamily::Off => 0.0,
            NoiseFamily::Additive => 1.0,
            NoiseFamily::Linear => r,
            NoiseFamily::Holder { kappa } => r.signum() * r.abs().powf(0.5 + kappa),
            NoiseFamily::Branching { kappa } => r.abs().powf(0.5 + kappa),
        }
    }

    /// Hölder exponent of `g` in `r` on `|r - r'| <= 1`.
    pub fn exponent(&self) -> f64 {
        match *self {
            NoiseFamily::Holder { kappa } | NoiseFamily::Branching { kappa } => 0.5 + kappa,
            _ => 1.0,
        }
    }

    /// Constant `H` with `|g(r) - g(r')| <= H |r - r'|^{exponent}` for `|r - r'| <= 1`.
    fn holder_constant(&self) -> f64 {
        match *self {
            NoiseFamily::Off | NoiseFamily::Additive => 0.0,
            NoiseFamily::Linear | NoiseFamily::Branching { .. } => 1.0,
            NoiseFamily::Holder { kappa } => 2f64.powf(0.5 - kappa),
        }
    }

    fn family_kappa(&self) -> Option<f64> {
        match *self {
            NoiseFamily::Holder { kappa } | NoiseFamily::Branching { kappa } => Some(kappa),
            _ => None,
        }
    }
}

/// Finite-mode noise coefficient
/// `sigma^k(x, r) = c k^{-q} sqrt(2) sin(k pi (x - a)/(b - a)) g(r)`, `k = 1..modes`,
/// together with the declared constants `(K, kappa, kappa_bar)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    family: NoiseFamily,
    modes: usize,
    amplitude: f64,
    decay: f64,
    interval: (f64, f64),
    m: f64,
    k: f64,
    kappa: f64,
    kappa_bar: f64,
}

impl NoiseModel {
    /// Builds the model with declared constants derived from the family:
    /// `kappa` is the family exponent minus 1/2 (1/2 for Lipschitz families),
    /// `kappa_bar = 1`, and `K` the analytic bound of [`NoiseModel::analytic_constant`].
    pub fn new(
        family: NoiseFamily,
        modes: usize,
        amplitude: f64,
        decay: f64,
        interval: (f64, f64),
        m: f64,
    ) -> Result<Self> {
        if let Some(kappa) = family.family_kappa() {
            if !(kappa > 0.0 && kappa <= 0.5) {
                return config_err(format!("noise family exponent kappa must lie in (0, 1/2], got {kappa}"));
            }
        }
        if family != NoiseFamily::Off && modes == 0 {
            return config_err("noise requires at least one mode unless the family is off");
        }
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return config_err(format!("noise amplitude must be >= 0, got {amplitude}"));
        }
        if !(decay >= 2.0) || !decay.is_finite() {
            return config_err(format!("spatial decay q must be >= 2, got {decay}"));
        }
        if !(interval.1 > interval.0) {
            return config_err("noise interval requires b > a");
        }
        if !(m > 1.0) {
            return config_err(format!("m must exceed 1, got {m}"));
        }
        let mut model = Self {
            family,
            modes,
            amplitude,
            decay,
            interval,
            m,
            k: 1.0,
            kappa: family.family_kappa().unwrap_or(0.5),
            kappa_bar: 1.0,
        };
        model.k = model.analytic_constant();
        Ok(model)
    }

    pub fn off(interval: (f64, f64), m: f64) -> Self {
        Self::new(NoiseFamily::Off, 0, 0.0, 2.0, interval, m).expect("off model is always valid")
    }

    /// Overrides the declared constants.
    pub fn with_declared(mut self, k: f64, kappa: f64, kappa_bar: f64) -> Result<Self> {
        if !(k >= 1.0) {
            return config_err(format!("declared K must be >= 1, got {k}"));
        }
        if !(kappa > 0.0 && kappa <= 0.5) {
            return config_err(format!("declared kappa must lie in (0, 1/2], got {kappa}"));
        }
        let lo = 1.0 / self.m.min(2.0);
        if !(kappa_bar > lo && kappa_bar <= 1.0) {
            return config_err(format!("declared kappa_bar must lie in ({lo}, 1], got {kappa_bar}"));
        }
        self.k = k;
        self.kappa = kappa;
        self.kappa_bar = kappa_bar;
        Ok(self)
    }

    /// Same coefficient with a different number of retained modes.
    pub fn with_modes(mut self, modes: usize) -> Result<Self> {
        if self.family != NoiseFamily::Off && modes == 0 {
            return config_err("noise requires at least one mode unless the family is off");
        }
        self.modes = modes;
        Ok(self)
    }

    pub fn family(&self) -> NoiseFamily {
        self.family
    }

    pub fn modes(&self) -> usize {
        if self.family == NoiseFamily::Off {
            0
        } else {
            self.modes
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kappa_bar(&self) -> f64 {
        self.kappa_bar
    }

    pub fn is_off(&self) -> bool {
        self.modes() == 0 || self.amplitude == 0.0
    }

    /// Spatial factor of mode `k` (1-based) at `x`.
    #[inline]
    pub fn spatial(&self, k: usize, x: f64) -> f64 {
        let (a, b) = self.interval;
        let kf = k as f64;
        self.amplitude * kf.powf(-self.decay) * 2f64.sqrt() * (kf * PI * (x - a) / (b - a)).sin()
    }

    /// The vector `sigma(x, r)` in `l^2`, truncated to `modes` entries.
    pub fn sigma(&self, x: f64, r: f64) -> Vec<f64> {
        let g = self.family.amplitude(r);
        (1..=self.modes()).map(|k| self.spatial(k, x) * g).collect()
    }

    #[inline]
    pub fn amplitude_law(&self, r: f64) -> f64 {
        self.family.amplitude(r)
    }

    /// `sup_x |e(x)|_{l^2}` bound: `c sqrt(2) sqrt(sum k^{-2q})`.
    fn growth_constant(&self) -> f64 {
        let s: f64 = (1..=self.modes()).map(|k| (k as f64).powf(-2.0 * self.decay)).sum();
        self.amplitude * 2f64.sqrt() * s.sqrt()
    }

    /// Lipschitz constant of `x -> e(x)` in `l^2`.
    fn spatial_lipschitz(&self) -> f64 {
        let (a, b) = self.interval;
        let s: f64 = (1..=self.modes()).map(|k| (k as f64).powf(2.0 - 2.0 * self.decay)).sum();
        self.amplitude * 2f64.sqrt() * PI / (b - a) * s.sqrt()
    }

    /// A constant `K >= 1` for which both growth and Hölder bounds hold
    /// provably, given the family exponent.
    pub fn analytic_constant(&self) -> f64 {
        if self.is_off() {
            return 1.0;
        }
        let (a, b) = self.interval;
        let g = self.growth_constant();
        let x_term = 2.0 * self.spatial_lipschitz() * (b - a).powf(1.0 - self.kappa_bar);
        1f64.max(g).max(g * self.family.holder_constant()).max(x_term)
    }

    /// Upper bound on the discarded tail `sup_x sum_{k > modes} |sigma^k|^2 / g^2`.
    pub fn truncation_tail(&self) -> f64 {
        if self.is_off() {
            return 0.0;
        }
        let q = self.decay;
        let k = self.modes as f64;
        2.0 * self.amplitude * self.amplitude * k.powf(1.0 - 2.0 * q) / (2.0 * q - 1.0)
    }
}

/// `sigma^k(x_i, u_i)` for every mode, as nodal fields.
pub fn eval_sigma(nm: &NoiseModel, grid: &Grid1D, u: &GridFunction) -> Result<Vec<GridFunction>> {
    grid.check_same(u.grid())?;
    let nodes = grid.nodes();
    (1..=nm.modes())
        .map(|k| {
            let values = nodes.iter().zip(u.values()).map(|(&x, &r)| nm.spatial(k, x) * nm.amplitude_law(r)).collect();
            GridFunction::new(*grid, values)
        })
        .collect()
}
