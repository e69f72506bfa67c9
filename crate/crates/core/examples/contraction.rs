//! Monte Carlo estimate of the mean weighted distance of a coupled pair,
//! its polynomial decay rate and the ODE envelope that bounds it.

use pme_mixer::analysis::{
    contraction_check, empirical_coefficient, fit_power_exponent, lemma_coefficient, ode_comparison, DecaySeries,
};
use pme_mixer::domain::{build_grid, solve_weight};
use pme_mixer::model::{NoiseFamily, NoiseModel, Nonlinearity};
use pme_mixer::solver::{run_ensemble, InitialCondition, RecordOptions, SolverConfig};

fn main() -> pme_mixer::Result<()> {
    let m = 2.0;
    let grid = build_grid(0.0, 1.0, 100)?;
    let nl = Nonlinearity::pure_power(m, 2.0)?;
    let nm = NoiseModel::new(NoiseFamily::Linear, 4, 0.5, 2.0, (0.0, 1.0), m)?;
    let bump = |a| InitialCondition::Bump { amplitude: a, center: 0.5, radius: 0.25 };
    let ics = [bump(2.0).build(&grid, m)?, bump(-2.0).build(&grid, m)?];
    let config = SolverConfig { dt: 5e-4, t_end: 4.0, record_every: 100, ..Default::default() };
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let stats = run_ensemble(&config, &nl, &nm, &ics, 16, 0, threads, &RecordOptions::default())?;
    let pair = stats.pair(0, 1).expect("pair");
    let dist = DecaySeries::from_moments(&stats.times, &pair.distance)?;
    let lyap = DecaySeries::from_moments(&stats.times, &pair.lyapunov)?;

    let verdict = contraction_check(&dist, &lyap, 0.05)?;
    println!("contraction holds: {} (worst excess {:.2e})", verdict.pass, verdict.worst_excess());
    let fit = fit_power_exponent(&dist, (0.5, 4.0))?;
    println!("decay exponent {:.3} ± {:.3} (rate -1/(m-1) = {:.3})", fit.exponent, fit.ci_halfwidth, -1.0 / (m - 1.0));
    let c = empirical_coefficient(&dist, m)?;
    let w = solve_weight(&grid);
    let c_th = lemma_coefficient(m, w.lp_norm(m / (m - 1.0))?);
    for (label, coeff) in [("fitted", c), ("theoretical", c_th)] {
        let env = ode_comparison(&dist, coeff, m, 0.0)?;
        println!("envelope with {label} C = {coeff:.3}: dominated = {}", env.pass);
    }
    Ok(())
}
