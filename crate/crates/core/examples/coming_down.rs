//! Solutions from very different initial sizes end up with comparable
//! `L^{m+1}` norms after unit time.

use pme_mixer::analysis::{coming_down_statistic, DecaySeries};
use pme_mixer::domain::build_grid;
use pme_mixer::model::{NoiseModel, Nonlinearity};
use pme_mixer::solver::{aggregate, run_coupled, InitialCondition, RecordOptions, SolverConfig};

fn main() -> pme_mixer::Result<()> {
    let m = 2.0;
    let grid = build_grid(0.0, 1.0, 100)?;
    let nl = Nonlinearity::pure_power(m, 2.0)?;
    let nm = NoiseModel::off((0.0, 1.0), m);
    let config = SolverConfig { dt: 2e-4, t_end: 2.0, record_every: 50, ..Default::default() };
    let xi = InitialCondition::Bump { amplitude: 10.0, center: 0.5, radius: 0.25 };
    for scale in [1.0, 10.0, 100.0] {
        let u0 = xi.scaled(scale).build(&grid, m)?;
        let out = run_coupled(&config, &nl, &nm, &[u0], 0, &RecordOptions::default())?.into_result()?;
        let stats = aggregate(&[out], 0)?;
        let norms = DecaySeries::from_moments(&stats.times, &stats.members[0].norm_mp1)?;
        println!("scale {scale:>5}: statistic {:.5}", coming_down_statistic(&norms, m));
    }
    Ok(())
}
