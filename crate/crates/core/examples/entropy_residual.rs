//! Discrete entropy inequality on a deterministic trajectory and on the same
//! trajectory played backwards.

use pme_mixer::analysis::{entropy_residual, reversed, TestFunction, Trajectory};
use pme_mixer::domain::build_grid;
use pme_mixer::model::{NoiseModel, Nonlinearity};
use pme_mixer::solver::{run_coupled, InitialCondition, RecordOptions, SolverConfig};

fn main() -> pme_mixer::Result<()> {
    let grid = build_grid(0.0, 1.0, 100)?;
    let nl = Nonlinearity::pure_power(2.0, 2.0)?;
    let nm = NoiseModel::off((0.0, 1.0), 2.0);
    let u0 = InitialCondition::Bump { amplitude: 2.0, center: 0.5, radius: 0.25 }.build(&grid, 2.0)?;
    let config = SolverConfig { dt: 1e-4, t_end: 0.5, record_every: 1, ..Default::default() };
    let opts = RecordOptions { snapshots: true, ..Default::default() };
    let out = run_coupled(&config, &nl, &nm, &[u0], 0, &opts)?.into_result()?;
    let forward = Trajectory::from_coupled(&out, 0, 0)?;
    let backward = reversed(&forward);
    for level in [0.0, 0.5] {
        let f = entropy_residual(std::slice::from_ref(&forward), &nl, &nm, 0.1, level, TestFunction::Central)?;
        let b = entropy_residual(std::slice::from_ref(&backward), &nl, &nm, 0.1, level, TestFunction::Central)?;
        println!("level {level}: forward {:+.4e}, reversed {:+.4e}", f.mean, b.mean);
    }
    Ok(())
}
