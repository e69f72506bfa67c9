use crate::domain::{laplacian_into, solve_shifted_laplacian, Grid1D, GridFunction};
use crate::error::{PmeError, Result};
use crate::model::{NoiseModel, Nonlinearity};
use crate::solver::config::{Drift, Equation, Scheme, SolverConfig};
use crate::solver::galerkin::{galerkin_drift, SineBasis};

/// Largest admissible `|u|_inf` before a trajectory is declared blown up.
pub const BLOW_UP_THRESHOLD: f64 = 1e8;

/// Advances a set of coupled states by one step, sharing the stabilization
/// constant `D` (or the explicit sub-step count) and the noise increments
/// between members.
///
/// Sharing `D` keeps the semi-implicit map monotone across members:
/// `u* = u - A(u)/D + M A(u)/D` with `M = (I - dt D Δ_h)^{-1} >= 0`, which is
/// nondecreasing in `u` whenever `D >= A'` on the range of every member.
pub(crate) struct Stepper<'a> {
    grid: Grid1D,
    nl: &'a Nonlinearity,
    nm: &'a NoiseModel,
    scheme: Scheme,
    equation: Equation,
    drift: Drift,
    cfl: f64,
    /// `e_k(x_i)`, row-major by mode.
    noise_table: Vec<f64>,
    basis: Option<(SineBasis, usize)>,
    zeta: Vec<f64>,
    noise_terms: Vec<Vec<f64>>,
    buf_a: Vec<f64>,
    buf_lap: Vec<f64>,
    buf_delta: Vec<f64>,
    scratch: Vec<f64>,
    coeffs: Vec<f64>,
    a_hat: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(
        grid: &Grid1D,
        nl: &'a Nonlinearity,
        nm: &'a NoiseModel,
        config: &SolverConfig,
        members: usize,
    ) -> Result<Self> {
        let n = grid.n();
        let nodes = grid.nodes();
        let modes = nm.modes();
        let mut noise_table = Vec::with_capacity(modes * n);
        for k in 1..=modes {
            noise_table.extend(nodes.iter().map(|&x| nm.spatial(k, x)));
        }
        let basis = if config.scheme == Scheme::Galerkin {
            let l = if config.galerkin_modes == 0 { n } else { config.galerkin_modes };
            if l > n {
                return Err(PmeError::Config(format!("galerkin_modes = {l} exceeds N = {n}")));
            }
            Some((SineBasis::new(grid), l))
        } else {
            None
        };
        let l = basis.as_ref().map_or(0, |(_, l)| *l);
        Ok(Self {
            grid: *grid,
            nl,
            nm,
            scheme: config.scheme,
            equation: config.equation,
            drift: config.drift,
            cfl: config.cfl_safety,
            noise_table,
            basis,
            zeta: vec![0.0; n],
            noise_terms: vec![vec![0.0; n]; members],
            buf_a: vec![0.0; n],
            buf_lap: vec![0.0; n],
            buf_delta: vec![0.0; n],
            scratch: vec![0.0; n],
            coeffs: vec![0.0; l],
            a_hat: vec![0.0; l],
        })
    }

    /// Projects nodal states onto the retained Galerkin modes (identity for
    /// finite differences).
    pub(crate) fn prepare(&mut self, states: &mut [Vec<f64>]) {
        if let Some((basis, l)) = &self.basis {
            for u in states.iter_mut() {
                let c = basis.analyze(u, *l);
                basis.synthesize_into(&c, u);
            }
        }
    }

    /// One step of size `dt` with mode increments `dw`. On failure returns
    /// the index of the offending member and a reason.
    pub(crate) fn advance(
        &mut self,
        states: &mut [Vec<f64>],
        dt: f64,
        dw: &[f64],
    ) -> std::result::Result<(), (usize, String)> {
        let noisy = !self.nm.is_off();
        if noisy {
            let n = self.grid.n();
            self.zeta.iter_mut().for_each(|z| *z = 0.0);
            for (k, &w) in dw.iter().enumerate().take(self.nm.modes()) {
                let row = &self.noise_table[k * n..(k + 1) * n];
                for (z, e) in self.zeta.iter_mut().zip(row) {
                    *z += e * w;
                }
            }
            for (u, term) in states.iter().zip(self.noise_terms.iter_mut()) {
                for ((t, &ui), &z) in term.iter_mut().zip(u).zip(&self.zeta) {
                    *t = self.nm.amplitude_law(ui) * z;
                }
            }
        }

        match (self.equation, self.scheme) {
            (Equation::PorousMedium, Scheme::FdSemiImplicit) => self.semi_implicit(states, dt),
            (Equation::PorousMedium, Scheme::FdExplicit) => self.explicit(states, dt),
            (Equation::PorousMedium, Scheme::Galerkin) => self.galerkin(states, dt),
            (Equation::Semilinear, Scheme::FdExplicit) => self.semilinear_explicit(states, dt),
            (Equation::Semilinear, _) => self.semilinear_implicit(states, dt),
        }

        if noisy {
            if let Some((basis, l)) = &self.basis {
                for (u, term) in states.iter_mut().zip(&self.noise_terms) {
                    basis.analyze_into(term, &mut self.coeffs[..*l]);
                    basis.synthesize_into(&self.coeffs[..*l], &mut self.buf_delta);
                    u.iter_mut().zip(&self.buf_delta).for_each(|(v, t)| *v += t);
                }
            } else {
                for (u, term) in states.iter_mut().zip(&self.noise_terms) {
                    u.iter_mut().zip(term).for_each(|(v, t)| *v += t);
                }
            }
        }

        for (j, u) in states.iter().enumerate() {
            for (i, &v) in u.iter().enumerate() {
                if !v.is_finite() {
                    return Err((j, format!("non-finite value at node {}", i + 1)));
                }
                if v.abs() > BLOW_UP_THRESHOLD {
                    return Err((j, format!("|u| = {:e} exceeds {BLOW_UP_THRESHOLD:e} at node {}", v.abs(), i + 1)));
                }
            }
        }
        Ok(())
    }

    fn shared_max_derivative(&self, states: &[Vec<f64>]) -> f64 {
        let r = states.iter().flat_map(|u| u.iter()).fold(0.0_f64, |acc, v| acc.max(v.abs()));
        self.nl.max_derivative(r)
    }

    fn semi_implicit(&mut self, states: &mut [Vec<f64>], dt: f64) {
        let d = self.shared_max_derivative(states);
        let h = self.grid.h();
        let r = dt * d / (h * h);
        for u in states.iter_mut() {
            for (a, &v) in self.buf_a.iter_mut().zip(u.iter()) {
                *a = self.nl.a(v);
            }
            laplacian_into(&self.buf_a, h, &mut self.buf_lap);
            self.buf_lap.iter_mut().for_each(|x| *x *= dt);
            solve_shifted_laplacian(r, &self.buf_lap, &mut self.buf_delta, &mut self.scratch);
            u.iter_mut().zip(&self.buf_delta).for_each(|(v, d)| *v += d);
        }
    }

    fn explicit_substeps(&self, dt: f64, d: f64) -> u64 {
        let h = self.grid.h();
        let limit = self.cfl * h * h / (2.0 * d + f64::EPSILON);
        ((dt / limit).ceil() as u64).max(1)
    }

    fn explicit(&mut self, states: &mut [Vec<f64>], dt: f64) {
        let d = self.shared_max_derivative(states);
        let subs = self.explicit_substeps(dt, d);
        let ds = dt / subs as f64;
        let h = self.grid.h();
        for u in states.iter_mut() {
            for _ in 0..subs {
                for (a, &v) in self.buf_a.iter_mut().zip(u.iter()) {
                    *a = self.nl.a(v);
                }
                laplacian_into(&self.buf_a, h, &mut self.buf_lap);
                u.iter_mut().zip(&self.buf_lap).for_each(|(v, l)| *v += ds * l);
            }
        }
    }

    fn galerkin(&mut self, states: &mut [Vec<f64>], dt: f64) {
        let d = self.shared_max_derivative(states);
        let (basis, l) = self.basis.as_ref().expect("Galerkin basis present");
        let l = *l;
        for u in states.iter_mut() {
            for (a, &v) in self.buf_a.iter_mut().zip(u.iter()) {
                *a = self.nl.a(v);
            }
            basis.analyze_into(u, &mut self.coeffs[..l]);
            basis.analyze_into(&self.buf_a, &mut self.a_hat[..l]);
            galerkin_drift(basis, &mut self.coeffs[..l], &self.a_hat[..l], d, dt);
            basis.synthesize_into(&self.coeffs[..l], u);
        }
    }

    /// `(I - dt Δ_h) u* = u + dt f(u)`.
    fn semilinear_implicit(&mut self, states: &mut [Vec<f64>], dt: f64) {
        let h = self.grid.h();
        let r = dt / (h * h);
        for u in states.iter_mut() {
            for (b, &v) in self.buf_a.iter_mut().zip(u.iter()) {
                *b = v + dt * self.drift.eval(v);
            }
            solve_shifted_laplacian(r, &self.buf_a, u, &mut self.scratch);
        }
    }

    fn semilinear_explicit(&mut self, states: &mut [Vec<f64>], dt: f64) {
        let subs = self.explicit_substeps(dt, 1.0);
        let ds = dt / subs as f64;
        let h = self.grid.h();
        for u in states.iter_mut() {
            for _ in 0..subs {
                laplacian_into(u, h, &mut self.buf_lap);
                for (v, l) in u.iter_mut().zip(&self.buf_lap) {
                    *v += ds * (l + self.drift.eval(*v));
                }
            }
        }
    }
}

fn single_step(
    state: &GridFunction,
    nl: &Nonlinearity,
    nm: &NoiseModel,
    dt: f64,
    dw: &[f64],
    config: SolverConfig,
) -> Result<GridFunction> {
    if !(dt > 0.0) {
        return Err(PmeError::Config(format!("dt must be positive, got {dt}")));
    }
    if dw.len() < nm.modes() {
        return Err(PmeError::Input(format!("{} increments for {} noise modes", dw.len(), nm.modes())));
    }
    let mut stepper = Stepper::new(state.grid(), nl, nm, &config, 1)?;
    let mut states = vec![state.values().to_vec()];
    stepper.advance(&mut states, dt, dw).map_err(|(_, reason)| PmeError::BlowUp { step: 1, time: dt, reason })?;
    GridFunction::new(*state.grid(), states.pop().expect("one member"))
}

/// Semi-implicit step: `(I - dt D Δ_h)(u* - u) = dt Δ_h A(u)` with
/// `D = max_i A'(u_i)`, then `u* += g(u) sum_k e_k dW_k`.
pub fn step_fd(state: &GridFunction, nl: &Nonlinearity, nm: &NoiseModel, dt: f64, dw: &[f64]) -> Result<GridFunction> {
    single_step(state, nl, nm, dt, dw, SolverConfig { scheme: Scheme::FdSemiImplicit, ..Default::default() })
}

/// Forward Euler in sub-steps of size at most `cfl h^2 / (2 max A')`, then the noise.
pub fn step_fd_explicit(
    state: &GridFunction,
    nl: &Nonlinearity,
    nm: &NoiseModel,
    dt: f64,
    dw: &[f64],
    cfl: f64,
) -> Result<GridFunction> {
    let cfg = SolverConfig { scheme: Scheme::FdExplicit, cfl_safety: cfl, ..Default::default() };
    cfg.validate()?;
    single_step(state, nl, nm, dt, dw, cfg)
}

/// `(I - dt Δ_h) u* = u + dt f(u)`, then the noise.
pub fn step_semilinear(
    state: &GridFunction,
    drift: Drift,
    nm: &NoiseModel,
    dt: f64,
    dw: &[f64],
) -> Result<GridFunction> {
    let nl = Nonlinearity::linear(2.0, 1.0)?;
    let cfg = SolverConfig { equation: Equation::Semilinear, drift, ..Default::default() };
    single_step(state, &nl, nm, dt, dw, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;
    use crate::model::NoiseFamily;
    use proptest::prelude::*;

    fn off() -> NoiseModel {
        NoiseModel::off((0.0, 1.0), 2.0)
    }

    #[test]
    fn zero_is_fixed() {
        let g = build_grid(0.0, 1.0, 20).unwrap();
        let nl = Nonlinearity::pure_power(2.0, 2.0).unwrap();
        let mut u = GridFunction::zeros(g);
        for _ in 0..10 {
            u = step_fd(&u, &nl, &off(), 1e-2, &[]).unwrap();
            u = step_semilinear(&u, Drift::CubicDissipative, &off(), 1e-2, &[]).unwrap();
        }
        assert_eq!(u.max_abs(), 0.0);
    }

    #[test]
    fn odd_data_stays_odd() {
        let g = build_grid(-1.0, 1.0, 41).unwrap();
        let nl = Nonlinearity::pure_power(2.0, 2.0).unwrap();
        let mut u = GridFunction::from_fn(g, |x| x * (1.0 - x * x) * 3.0).unwrap();
        for _ in 0..200 {
            u = step_fd(&u, &nl, &off(), 1e-3, &[]).unwrap();
        }
        let v = u.values();
        for i in 0..v.len() {
            assert!((v[i] + v[v.len() - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn heat_energy_decreases() {
        let g = build_grid(0.0, 1.0, 30).unwrap();
        let mut u = GridFunction::from_fn(g, |x| (7.0 * x).sin() + x).unwrap();
        let energy = |u: &GridFunction| u.values().iter().map(|v| v * v).sum::<f64>();
        let mut prev = energy(&u);
        for _ in 0..50 {
            u = step_semilinear(&u, Drift::Zero, &off(), 1e-3, &[]).unwrap();
            let e = energy(&u);
            assert!(e <= prev);
            prev = e;
        }
    }

    #[test]
    fn explicit_and_semi_implicit_agree_on_smooth_data() {
        let g = build_grid(0.0, 1.0, 40).unwrap();
        let nl = Nonlinearity::pure_power(2.0, 2.0).unwrap();
        let u0 = GridFunction::from_fn(g, |x| (std::f64::consts::PI * x).sin()).unwrap();
        let (mut a, mut b) = (u0.clone(), u0);
        for _ in 0..100 {
            a = step_fd(&a, &nl, &off(), 1e-4, &[]).unwrap();
            b = step_fd_explicit(&b, &nl, &off(), 1e-4, &[], 0.9).unwrap();
        }
        let diff = a.sub(&b).unwrap().max_abs();
        assert!(diff < 5e-3 * a.max_abs(), "diff {diff}");
    }

    #[test]
    fn multiplicative_noise_preserves_zero() {
        let g = build_grid(0.0, 1.0, 10).unwrap();
        let nl = Nonlinearity::pure_power(2.0, 2.0).unwrap();
        let nm = NoiseModel::new(NoiseFamily::Linear, 3, 1.0, 2.0, (0.0, 1.0), 2.0).unwrap();
        let u = step_fd(&GridFunction::zeros(g), &nl, &nm, 1e-3, &[0.1, -0.2, 0.3]).unwrap();
        assert_eq!(u.max_abs(), 0.0);
        assert!(step_fd(&GridFunction::zeros(g), &nl, &nm, 1e-3, &[0.1]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        /// Discrete comparison principle and weighted contraction for the
        /// semi-implicit scheme with a shared stabilization constant.
        #[test]
        fn semi_implicit_is_monotone_and_contractive(
            seedvals in prop::collection::vec(-3.0f64..3.0, 12),
            bump in prop::collection::vec(0.0f64..2.0, 12),
            dt in 1e-4f64..5e-2,
            m in 1.5f64..4.0,
        ) {
            let g = build_grid(0.0, 1.0, 12).unwrap();
            let nl = Nonlinearity::pure_power(m, 4.0).unwrap();
            let nm = off();
            let cfg = SolverConfig::default();
            let mut st = Stepper::new(&g, &nl, &nm, &cfg, 2).unwrap();
            let lo = seedvals.clone();
            let hi: Vec<f64> = seedvals.iter().zip(&bump).map(|(a, b)| a + b).collect();
            let w = crate::domain::solve_weight(&g);
            let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(w.values()).map(|((x, y), w)| (x - y).abs() * w).sum::<f64>();
            let d0 = dist(&lo, &hi);
            let mut states = vec![lo, hi];
            for _ in 0..5 {
                st.advance(&mut states, dt, &[]).unwrap();
                for (a, b) in states[0].iter().zip(&states[1]) {
                    prop_assert!(*a <= *b + 1e-12);
                }
            }
            prop_assert!(dist(&states[0], &states[1]) <= d0 * (1.0 + 1e-12) + 1e-14);
        }
    }
}
