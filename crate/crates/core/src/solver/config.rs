use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Linearized semi-implicit stabilization, one tridiagonal solve per step.
    FdSemiImplicit,
    /// Forward Euler with CFL sub-stepping.
    FdExplicit,
    /// Sine-basis Galerkin with `galerkin_modes` retained modes.
    Galerkin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    PorousMedium,
    /// `du = (Δu + f(u)) dt + sigma dW`.
    Semilinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drift {
    Zero,
    /// `f(u) = -u^3`.
    CubicDissipative,
}

impl Drift {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Drift::Zero => 0.0,
            Drift::CubicDissipative => -u * u * u,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub scheme: Scheme,
    /// Galerkin modes; 0 means the full basis.
    pub galerkin_modes: usize,
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    /// Record every this many steps (t = 0 is always recorded).
    pub record_every: u64,
    pub equation: Equation,
    pub drift: Drift,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::FdSemiImplicit,
            galerkin_modes: 0,
            dt: 1e-3,
            t_end: 1.0,
            cfl_safety: 0.9,
            record_every: 10,
            equation: Equation::PorousMedium,
            drift: Drift::Zero,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return config_err(format!("solver.dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return config_err(format!("solver.t_end = {} must be >= dt = {}", self.t_end, self.dt));
        }
        let steps = self.t_end / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return config_err(format!("solver.t_end = {} is not a multiple of dt = {}", self.t_end, self.dt));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return config_err(format!("solver.cfl_safety must lie in (0, 1], got {}", self.cfl_safety));
        }
        if self.record_every == 0 {
            return config_err("solver.record_every must be >= 1");
        }
        if self.equation == Equation::Semilinear && self.scheme == Scheme::Galerkin {
            return config_err("the semilinear equation is only available with finite differences");
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    /// Indices of the recorded steps, always including 0 and the final step.
    pub fn record_steps(&self) -> Vec<u64> {
        let n = self.steps();
        let mut out: Vec<u64> = (0..=n).step_by(self.record_every as usize).collect();
        if *out.last().expect("step 0 is recorded") != n {
            out.push(n);
        }
        out
    }
}
