use serde::{Deserialize, Serialize};

use crate::domain::{solve_weight, Grid1D, GridFunction};
use crate::error::{config_err, Result};
use crate::exactsol::solve_profile;

/// Built-in initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "shape", deny_unknown_fields)]
pub enum InitialCondition {
    Zero,
    /// `amplitude * exp(1 - 1/(1 - s^2))`, `s = (x - center)/radius`, with
    /// `center` and `radius` as fractions of the interval (defaults 1/2, 1/4).
    Bump {
        amplitude: f64,
        #[serde(default = "half")]
        center: f64,
        #[serde(default = "quarter")]
        radius: f64,
    },
    /// `amplitude * w / max w`: the Dirichlet weight normalized to peak 1.
    WBump {
        amplitude: f64,
    },
    /// `amplitude * sin(mode * pi (x - a)/(b - a))`.
    Sine {
        amplitude: f64,
        mode: u32,
    },
    /// `amplitude * f` with `f` the separable profile for the model's `m`.
    Profile {
        amplitude: f64,
    },
}

fn half() -> f64 {
    0.5
}

fn quarter() -> f64 {
    0.25
}

/// Smooth compactly supported bump on `(-1, 1)` with peak 1 at 0.
#[inline]
pub fn unit_bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

impl InitialCondition {
    pub fn build(&self, grid: &Grid1D, m: f64) -> Result<GridFunction> {
        let (a, len) = (grid.a(), grid.length());
        match *self {
            InitialCondition::Zero => Ok(GridFunction::zeros(*grid)),
            InitialCondition::Bump { amplitude, center, radius } => {
                if !(radius > 0.0) || !(0.0..=1.0).contains(&center) {
                    return config_err("bump needs radius > 0 and center in [0, 1]");
                }
                let c = a + center * len;
                let r = radius * len;
                GridFunction::from_fn(*grid, |x| amplitude * unit_bump((x - c) / r))
            }
            InitialCondition::WBump { amplitude } => {
                let w = solve_weight(grid);
                Ok(w.as_grid_function().scaled(amplitude / w.max()))
            }
            InitialCondition::Sine { amplitude, mode } => {
                if mode == 0 {
                    return config_err("sine initial data needs mode >= 1");
                }
                let k = mode as f64 * std::f64::consts::PI / len;
                GridFunction::from_fn(*grid, |x| amplitude * (k * (x - a)).sin())
            }
            InitialCondition::Profile { amplitude } => {
                let p = solve_profile(grid, m, 1e-12)?;
                Ok(p.f().scaled(amplitude))
            }
        }
    }

    /// Same shape with the amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = *self;
        match &mut out {
            InitialCondition::Zero => {}
            InitialCondition::Bump { amplitude, .. }
            | InitialCondition::WBump { amplitude }
            | InitialCondition::Sine { amplitude, .. }
            | InitialCondition::Profile { amplitude } => *amplitude *= factor,
        }
        out
    }
}

/// The truncation `clamp(xi, -n, n)`.
pub fn truncate_initial(xi: &GridFunction, n: f64) -> GridFunction {
    xi.map(|v| v.clamp(-n, n)).expect("clamping preserves finiteness")
}
