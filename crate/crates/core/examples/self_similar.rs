//! The separable solution `(1 + t)^{-1/(m-1)} f(x)`: compute the profile by
//! shooting, evolve it with the solver and compare.

use pme_mixer::domain::build_grid;
use pme_mixer::exactsol::{separable_solution, solve_profile};
use pme_mixer::model::{NoiseModel, Nonlinearity};
use pme_mixer::solver::{run_coupled, RecordOptions, SolverConfig};

fn main() -> pme_mixer::Result<()> {
    let m = 2.0;
    let grid = build_grid(0.0, 1.0, 200)?;
    let profile = solve_profile(&grid, m, 1e-12)?;
    println!("profile peak {:.6}, residual {:.2e}", profile.f().max_abs(), profile.residual_norm());
    let nl = Nonlinearity::pure_power(m, 2.0)?;
    let nm = NoiseModel::off((0.0, 1.0), m);
    let config = SolverConfig { dt: 2e-4, t_end: 4.0, record_every: 2500, ..Default::default() };
    let opts = RecordOptions { snapshots: true, ..Default::default() };
    let out = run_coupled(&config, &nl, &nm, &[profile.f().clone()], 0, &opts)?.into_result()?;
    for (t, snap) in out.times.iter().zip(&out.snapshots) {
        let exact = separable_solution(&profile, *t)?;
        let err = snap[0].sub(&exact)?.max_abs() / exact.max_abs();
        println!("t = {t:.1}: relative sup error {err:.2e}");
    }
    Ok(())
}
