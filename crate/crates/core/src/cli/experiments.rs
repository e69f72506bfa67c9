//! One runner per experiment. Each turns a validated configuration into a
//! [`Report`] of series, fits and verdicts.

use statrs::function::beta::beta;

use crate::analysis::{
    coming_down_statistic, contraction_check, empirical_coefficient, entropy_residual, fit_log_slope,
    fit_power_exponent, fit_power_exponent_shifted, lemma_coefficient, lemma_suite, lipschitz_domination, mixing_gap,
    monotone_check, ode_comparison, reversed, theoretical_envelope, Check, DecaySeries, Functional, LemmaSuiteOptions,
    Trajectory,
};
use crate::cli::config::{ExperimentConfig, ExperimentKind};
use crate::cli::output::{FitRecord, Report, Series};
use crate::domain::{solve_weight, weighted_l1_norm, GridFunction};
use crate::error::{PmeError, Result};
use crate::exactsol::{separable_solution, solve_profile};
use crate::model::{
    regularize, validate_assumption_a, validate_noise, NoiseFamily, NoiseModel, Nonlinearity, ValidationReport,
};
use crate::solver::{
    aggregate, map_seeds, run_coupled, screen_runs, truncate_initial, EnsembleStats, InitialCondition, Moments,
    RecordOptions, Welford, MAX_BLOW_UP_FRACTION,
};

/// Runs the experiment named in `config`. `threads` sizes the worker pool
/// and never changes the result.
pub fn run_experiment(config: &ExperimentConfig, threads: usize) -> Result<Report> {
    config.validate()?;
    let mut report = Report::new(config);
    match config.experiment {
        ExperimentKind::Weight => weight(config, &mut report)?,
        ExperimentKind::Validate => validate(config, &mut report)?,
        ExperimentKind::Simulate => simulate(config, threads, &mut report)?,
        ExperimentKind::Contract => contract(config, threads, &mut report)?,
        ExperimentKind::Comedown => comedown(config, threads, &mut report)?,
        ExperimentKind::Selfsim => selfsim(config, &mut report)?,
        ExperimentKind::Mix => mix(config, threads, &mut report)?,
        ExperimentKind::Stability => {
            run_stability_sweep(config, &config.analysis.stability_n, threads, &mut report)?;
        }
        ExperimentKind::Lemmas => lemmas(config, &mut report)?,
        ExperimentKind::Entropy => entropy(config, threads, &mut report)?,
        ExperimentKind::Semilinear => semilinear(config, threads, &mut report)?,
    }
    Ok(report)
}

fn m_star(m: f64) -> f64 {
    m / (m - 1.0)
}

/// `∫_a^b ((x - a)(b - x)/2)^p dx = 2^{-p} L^{2p+1} B(p+1, p+1)`.
fn weight_power_integral(len: f64, p: f64) -> f64 {
    2f64.powf(-p) * len.powf(2.0 * p + 1.0) * beta(p + 1.0, p + 1.0)
}

fn weight(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let grid = config.grid()?;
    let (a, b, len) = (grid.a(), grid.b(), grid.length());
    let w = solve_weight(&grid);
    let x = grid.nodes();
    // the quadratic is reproduced exactly by the three-point stencil
    let exact: Vec<f64> = x.iter().map(|x| 0.5 * (x - a) * (b - x)).collect();
    let nodal = w.values().iter().zip(&exact).map(|(w, e)| (w - e).abs()).fold(0.0, f64::max);
    let peak = len * len / 8.0;
    report.check(Check::new("weight_nodal", nodal <= 1e-10 * peak, nodal, 0.0, 1e-10 * peak));

    let tol = 2.0 * (grid.h() / len).powi(2);
    let mut norms = Vec::new();
    for p in [1.0, 1.5, 2.0, m_star(config.model.m)] {
        let got = w.lp_norm(p)?;
        let want = weight_power_integral(len, p).powf(1.0 / p);
        let rel = (got - want).abs() / want;
        report.check(Check::new(format!("weight_l{p}"), rel <= tol, got, want, tol * want));
        norms.push(serde_json::json!({ "p": p, "norm": got, "continuum": want }));
    }
    report.meta("weight_norms", norms);
    report.meta("weight_max", w.max());
    report.series.push(Series::with_columns("weight", ["x", "value"], vec![x, w.values().to_vec()]));
    Ok(())
}

fn push_validation(report: &mut Report, prefix: &str, rep: &ValidationReport) {
    let failing = rep.failures().count();
    report.check(Check::new(prefix, rep.passed(), failing as f64, 0.0, 0.0));
    for c in &rep.clauses {
        report.check(Check::new(format!("{prefix}.{}", c.name), c.pass, c.tightest_constant, c.declared_constant, 0.0));
    }
}

fn validate(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let (r_max, samples) = (config.analysis.r_max, config.analysis.samples);
    let nl = config.nonlinearity()?;
    let nm = config.noise_model()?;
    let a = validate_assumption_a(&nl, r_max, samples)?;
    let s = validate_noise(&nm, r_max, samples)?;
    push_validation(report, "nonlinearity", &a);
    push_validation(report, "noise", &s);
    report.meta("nonlinearity", &a);
    report.meta("noise", &s);
    Ok(())
}

/// The coupled pair `(xi, xi~)`: one run when the noise is off, otherwise an
/// ensemble with seeds `solver.seed + j`.
fn coupled_stats(
    config: &ExperimentConfig,
    ics: &[GridFunction],
    threads: usize,
    report: &mut Report,
) -> Result<EnsembleStats> {
    let nl = config.nonlinearity()?;
    let nm = config.noise_model()?;
    let opts = RecordOptions { clip: config.analysis.clip, snapshots: false };
    let seed = config.solver.seed;
    let stats = if nm.is_off() || config.ensemble.members == 1 {
        let out = run_coupled(&config.solver, &nl, &nm, ics, seed, &opts)?.into_result()?;
        aggregate(&[out], 0)?
    } else {
        let outputs = map_seeds(config.ensemble.members, seed, threads, |s| {
            run_coupled(&config.solver, &nl, &nm, ics, s, &opts)
        })?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let (ok, failed) = screen_runs(outputs)?;
        aggregate(&ok, failed)?
    };
    report.meta("completed", stats.completed);
    report.meta("blown_up", stats.blown_up);
    Ok(stats)
}

fn initial_pair(config: &ExperimentConfig) -> Result<Vec<GridFunction>> {
    let grid = config.grid()?;
    let m = config.model.m;
    Ok(vec![config.initial.xi.build(&grid, m)?, config.initial.xi_tilde.build(&grid, m)?])
}

fn distance_series(stats: &EnsembleStats) -> Result<(DecaySeries, DecaySeries)> {
    let pair = stats.pair(0, 1).ok_or_else(|| PmeError::Input("no coupled pair recorded".into()))?;
    Ok((
        DecaySeries::from_moments(&stats.times, &pair.distance)?,
        DecaySeries::from_moments(&stats.times, &pair.lyapunov)?,
    ))
}

fn push_stats_series(report: &mut Report, stats: &EnsembleStats) {
    let t = &stats.times;
    for (j, member) in stats.members.iter().enumerate() {
        report.series.push(Series::from_moments(format!("member{j}_weighted_l1"), t, &member.weighted_l1));
        report.series.push(Series::from_moments(format!("member{j}_norm_mp1"), t, &member.norm_mp1));
    }
    for p in &stats.pairs {
        report.series.push(Series::from_moments(format!("distance_{}_{}", p.i, p.j), t, &p.distance));
        report.series.push(Series::from_moments(format!("lyapunov_{}_{}", p.i, p.j), t, &p.lyapunov));
    }
}

fn simulate(config: &ExperimentConfig, threads: usize, report: &mut Report) -> Result<()> {
    let stats = coupled_stats(config, &initial_pair(config)?, threads, report)?;
    let rejected = stats.blown_up as f64 > MAX_BLOW_UP_FRACTION * (stats.completed + stats.blown_up) as f64;
    report.check(Check::new("ensemble_accepted", !rejected, stats.blown_up as f64, 0.0, MAX_BLOW_UP_FRACTION));
    push_stats_series(report, &stats);
    Ok(())
}

fn contract(config: &ExperimentConfig, threads: usize, report: &mut Report) -> Result<()> {
    let m = config.model.m;
    let stats = coupled_stats(config, &initial_pair(config)?, threads, report)?;
    let (dist, lyap) = distance_series(&stats)?;
    push_stats_series(report, &stats);

    let mono = monotone_check(&dist, 2.0, true);
    report.check(Check::new("distance_nonincreasing", mono.pass, mono.worst_excess(), 0.0, 2.0));
    report.meta("distance_nonincreasing", &mono);
    let slack = config.analysis.contraction_slack;
    let contraction = contraction_check(&dist, &lyap, slack)?;
    report.check(Check::new("contraction", contraction.pass, contraction.worst_excess(), 0.0, slack));
    report.meta("contraction", &contraction);

    if dist.values().iter().all(|&d| d == 0.0) {
        // identical data stay identical; no rate to fit
        report.check(Check::new("distance_identically_zero", true, 0.0, 0.0, 0.0));
        return Ok(());
    }

    let target = -1.0 / (m - 1.0);
    let fit = fit_power_exponent(&dist, config.fit_window())?;
    let (lo, hi) = (target - 0.25, target + 0.15);
    report.check(Check::new("rate_exponent", fit.exponent >= lo && fit.exponent <= hi, fit.exponent, target, 0.25));
    report.meta("rate_band", [lo, hi]);
    report.fits.push(FitRecord::new("distance", &fit));

    let c_emp = empirical_coefficient(&dist, m)?;
    let env = ode_comparison(&dist, c_emp, m, 0.0)?;
    report.check(Check::new("envelope_empirical", env.pass, env.worst_excess(), c_emp, 0.0));
    let w = solve_weight(&config.grid()?);
    let c_th = lemma_coefficient(m, w.lp_norm(m_star(m))?);
    let env_th = ode_comparison(&dist, c_th, m, 0.0)?;
    report.check(Check::new("envelope_theoretical", env_th.pass, env_th.worst_excess(), c_th, 0.0));
    report.meta("coefficient_empirical", c_emp);
    report.meta("coefficient_theoretical", c_th);
    let h0 = dist.values()[0];
    let envelope: Vec<f64> = dist.times().iter().map(|&t| theoretical_envelope(t, h0, c_emp, m)).collect();
    report.series.push(Series::timed("envelope_empirical", dist.times(), &envelope, &vec![0.0; envelope.len()]));
    Ok(())
}

fn comedown(config: &ExperimentConfig, threads: usize, report: &mut Report) -> Result<()> {
    let grid = config.grid()?;
    let m = config.model.m;
    let scale = config.analysis.comedown_scale;
    let xi = config.initial.xi;
    let ics = vec![xi.build(&grid, m)?, xi.scaled(scale).build(&grid, m)?];
    let stats = coupled_stats(config, &ics, threads, report)?;
    push_stats_series(report, &stats);
    let stat = |j: usize| -> Result<f64> {
        let s = DecaySeries::from_moments(&stats.times, &stats.members[j].norm_mp1)?;
        Ok(coming_down_statistic(&s, m))
    };
    let (s_small, s_large) = (stat(0)?, stat(1)?);
    let rel = (s_large - s_small).abs() / s_small.max(s_large);
    report.check(Check::new("comedown_independence", rel < 0.25, rel, 0.0, 0.25));
    report.meta("statistic", [s_small, s_large]);
    report.meta("scale", scale);
    Ok(())
}

fn selfsim(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let grid = config.grid()?;
    let m = config.model.m;
    let profile = solve_profile(&grid, m, config.analysis.profile_tol)?;
    let nl = config.nonlinearity()?;
    let nm = NoiseModel::off((grid.a(), grid.b()), m);
    let amp = match config.initial.xi {
        InitialCondition::Profile { amplitude } => amplitude,
        _ => return Err(PmeError::Config("selfsim needs initial.xi of shape \"profile\"".into())),
    };
    let start = profile.f().scaled(amp);
    let opts = RecordOptions { clip: config.analysis.clip, snapshots: true };
    let out = run_coupled(&config.solver, &nl, &nm, &[start], config.solver.seed, &opts)?.into_result()?;
    report.meta("profile_midpoint", profile.f().values()[grid.n() / 2]);
    report.meta("profile_residual", profile.residual_norm());

    // the exact solution is (amp^{-(m-1)} + t)^{-1/(m-1)} f
    let shift = amp.powf(-(m - 1.0));
    let unit = |t: f64| separable_solution(&profile, t + shift - 1.0);
    let mut worst: f64 = 0.0;
    for &t in &config.analysis.check_times {
        let k = out
            .times
            .iter()
            .position(|s| (s - t).abs() <= 1e-9 * t.max(1.0))
            .ok_or_else(|| PmeError::Config(format!("check time {t} is not a record time")))?;
        let exact = unit(t)?;
        let num = &out.snapshots[k][0];
        let scale = exact.max_abs();
        let err = num.sub(&exact)?.max_abs() / scale;
        worst = worst.max(err);
        report.check(Check::new(format!("profile_error_t{t}"), err < 0.01, err, 0.0, 0.01));
    }
    report.meta("profile_worst_error", worst);

    let norms = DecaySeries::exact(out.times.clone(), out.members[0].weighted_l1.clone())?;
    let target = -1.0 / (m - 1.0);
    let fit = fit_power_exponent_shifted(&norms, config.fit_window(), shift)?;
    let err = (fit.exponent - target).abs();
    report.check(Check::new("norm_exponent", err <= 1e-3, fit.exponent, target, 1e-3));
    report.fits.push(FitRecord::new("weighted_l1", &fit));
    report.series.push(Series::from_decay("weighted_l1", &norms));
    Ok(())
}

fn mix(config: &ExperimentConfig, threads: usize, report: &mut Report) -> Result<()> {
    let m = config.model.m;
    let stats = coupled_stats(config, &initial_pair(config)?, threads, report)?;
    let (dist, _) = distance_series(&stats)?;
    push_stats_series(report, &stats);
    for f in [Functional::ClippedNorm, Functional::ClippedField, Functional::ClippedMass] {
        let gap = mixing_gap(&stats, 0, &stats, 1, f)?;
        let v = lipschitz_domination(&gap, &dist)?;
        let name = serde_json::to_value(f).expect("functional name").as_str().unwrap_or_default().to_string();
        report.check(Check::new(format!("gap_dominated_{name}"), v.pass, v.worst_excess(), 0.0, 0.0));
        report.series.push(Series::from_decay(format!("gap_{name}"), &gap));
    }
    let gap = mixing_gap(&stats, 0, &stats, 1, config.analysis.functional)?;
    let bound = -1.0 / (m - 1.0) + 0.2;
    let fit = fit_power_exponent(&gap, config.fit_window())?;
    report.check(Check::new("gap_exponent", fit.exponent <= bound, fit.exponent, bound, 0.0));
    report.fits.push(FitRecord::new("gap", &fit));
    report.meta("functional", config.analysis.functional);
    Ok(())
}

/// Trapezoid rule.
fn time_integral(t: &[f64], v: &[f64]) -> f64 {
    t.windows(2).zip(v.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
}

/// Runs the regularized problems `(A_n, clamp(xi, -n, n), sigma_n)` for each
/// `n` in `n_values` with shared noise, where `sigma_n` keeps the first
/// `min(n, modes)` modes, and records `D(n) = ∫ |u_n - u_ref|_{L^1_w} dt`
/// with the largest `n` as reference. Verdicts: `D` nonincreasing within two
/// combined standard errors and `D(n_{max-1}) / D(n_min) < 0.5`.
pub fn run_stability_sweep(
    config: &ExperimentConfig,
    n_values: &[u32],
    threads: usize,
    report: &mut Report,
) -> Result<Vec<f64>> {
    if n_values.len() < 3 || n_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(PmeError::Config("analysis.stability_n must be nondecreasing with at least 3 entries".into()));
    }
    let grid = config.grid()?;
    let m = config.model.m;
    let base = Nonlinearity::pure_power(m, config.model.k)?;
    let nm = config.noise_model()?;
    let xi = config.initial.xi.build(&grid, m)?;
    let w = solve_weight(&grid);
    let opts = RecordOptions { clip: config.analysis.clip, snapshots: true };
    let seed = config.solver.seed;
    let count = if nm.is_off() { 1 } else { config.ensemble.members.max(2) };

    // per seed: one distance curve per n, or None after a blow-up
    let one = |s: u64| -> Result<Option<Vec<Vec<f64>>>> {
        let mut fields = Vec::with_capacity(n_values.len());
        for &n in n_values {
            let nl = regularize(&base, n)?;
            let nm_n = if nm.is_off() { nm } else { nm.with_modes((n as usize).min(nm.modes()))? };
            let start = truncate_initial(&xi, n as f64);
            let out = run_coupled(&config.solver, &nl, &nm_n, &[start], s, &opts)?;
            if out.blow_up.is_some() {
                return Ok(None);
            }
            fields.push(out.snapshots.into_iter().map(|mut snap| snap.remove(0)).collect::<Vec<_>>());
        }
        let reference = fields.last().expect("n_values is nonempty");
        let curves = fields
            .iter()
            .map(|f| {
                f.iter().zip(reference).map(|(u, r)| weighted_l1_norm(&u.sub(r)?, &w)).collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(curves))
    };
    let results = map_seeds(count, seed, threads, one)?.into_iter().collect::<Result<Vec<_>>>()?;
    let failed = results.iter().filter(|r| r.is_none()).count();
    let runs: Vec<Vec<Vec<f64>>> = results.into_iter().flatten().collect();
    if failed as f64 > MAX_BLOW_UP_FRACTION * count as f64 || runs.is_empty() {
        return Err(PmeError::EnsembleRejected { failed, total: count });
    }
    let times = config.solver.record_steps().iter().map(|&k| k as f64 * config.solver.dt).collect::<Vec<_>>();
    let mut d = Vec::new();
    let mut se = Vec::new();
    for (k, &n) in n_values.iter().enumerate() {
        let curves: Vec<&[f64]> = runs.iter().map(|r| r[k].as_slice()).collect();
        let mom = Moments::from_samples(curves.iter().copied(), times.len());
        report.series.push(Series::from_moments(format!("distance_n{n}"), &times, &mom));
        let mut acc = Welford::default();
        curves.iter().for_each(|c| acc.push(time_integral(&times, c)));
        d.push(acc.mean());
        se.push(acc.stderr());
    }
    let ns: Vec<f64> = n_values.iter().map(|&n| n as f64).collect();
    report.series.push(Series::with_columns("stability", ["n", "mean", "stderr"], vec![ns, d.clone(), se.clone()]));

    let worst = (1..d.len()).map(|k| d[k] - d[k - 1] - 2.0 * se[k].hypot(se[k - 1])).fold(f64::NEG_INFINITY, f64::max);
    report.check(Check::new("stability_nonincreasing", worst <= 0.0, worst.max(0.0), 0.0, 2.0));
    let last = d.len() - 2;
    let ratio = if d[0] > 0.0 { d[last] / d[0] } else { 0.0 };
    report.check(Check::new("stability_ratio", ratio < 0.5, ratio, 0.0, 0.5));
    report.meta("stability_n", n_values);
    report.meta("stability_runs", runs.len());
    report.meta("stability_blown_up", failed);
    Ok(d)
}

fn lemmas(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let opts = LemmaSuiteOptions { pairs: config.analysis.lemma_pairs, seed: config.solver.seed, ..Default::default() };
    for c in lemma_suite(&opts)? {
        report.check(c);
    }
    let (r_max, samples) = (config.analysis.r_max, config.analysis.samples);
    let m = config.model.m;
    let nl = Nonlinearity::pure_power(m, config.model.k)?;
    push_validation(report, "validator_pure_power", &validate_assumption_a(&nl, r_max, samples)?);
    let s = &config.noise;
    let interval = (config.domain.a, config.domain.b);
    let kappa = s.kappa;
    for (name, family) in [
        ("additive", NoiseFamily::Additive),
        ("linear", NoiseFamily::Linear),
        ("holder", NoiseFamily::Holder { kappa }),
        ("branching", NoiseFamily::Branching { kappa }),
    ] {
        let nm = NoiseModel::new(family, s.modes, s.amplitude, s.decay, interval, m)?;
        push_validation(report, &format!("validator_noise_{name}"), &validate_noise(&nm, r_max, samples)?);
    }
    report.meta("eta_profile", "exp(-0.25/(s(1-s))) normalized to unit mass on (0,1)");
    Ok(())
}

fn entropy(config: &ExperimentConfig, threads: usize, report: &mut Report) -> Result<()> {
    if config.solver.record_every != 1 {
        return Err(PmeError::Config("entropy needs solver.record_every = 1".into()));
    }
    let grid = config.grid()?;
    let nl = config.nonlinearity()?;
    let nm = config.noise_model()?;
    let xi = config.initial.xi.build(&grid, config.model.m)?;
    let opts = RecordOptions { clip: config.analysis.clip, snapshots: true };
    let count = if nm.is_off() { 1 } else { config.ensemble.members };
    let outputs = map_seeds(count, config.solver.seed, threads, |s| {
        run_coupled(&config.solver, &nl, &nm, std::slice::from_ref(&xi), s, &opts)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let outputs = if count == 1 {
        vec![outputs.into_iter().next().expect("one run").into_result()?]
    } else {
        screen_runs(outputs)?.0
    };
    let trajs = outputs.iter().map(|o| Trajectory::from_coupled(o, 0, nm.modes())).collect::<Result<Vec<_>>>()?;
    let norms = aggregate(&outputs, 0)?;
    report.series.push(Series::from_moments("weighted_l1", &norms.times, &norms.members[0].weighted_l1));

    let a = &config.analysis;
    let threshold = -a.c_cal * (grid.h() + config.solver.dt + a.delta);
    let fwd = entropy_residual(&trajs, &nl, &nm, a.delta, a.level, a.test_function)?;
    let back: Vec<Trajectory> = trajs.iter().map(reversed).collect();
    let rev = entropy_residual(&back, &nl, &nm, a.delta, a.level, a.test_function)?;
    report.check(Check::new("entropy_forward", fwd.mean >= threshold, fwd.mean, threshold, fwd.stderr));
    report.check(Check::new("entropy_reversed_fails", rev.mean < threshold, rev.mean, threshold, rev.stderr));
    report.meta("forward", &fwd);
    report.meta("reversed", &rev);
    report.meta("c_cal", a.c_cal);
    Ok(())
}

fn semilinear(config: &ExperimentConfig, threads: usize, report: &mut Report) -> Result<()> {
    let grid = config.grid()?;
    let stats = coupled_stats(config, &initial_pair(config)?, threads, report)?;
    let (dist, _) = distance_series(&stats)?;
    push_stats_series(report, &stats);
    let (h, len) = (grid.h(), grid.length());
    let gap = 4.0 / (h * h) * (std::f64::consts::PI * h / (2.0 * len)).sin().powi(2);
    let mono = monotone_check(&dist, 2.0, true);
    report.check(Check::new("distance_decreasing", mono.pass, mono.worst_excess(), 0.0, 2.0));
    let fit = fit_log_slope(&dist, config.fit_window())?;
    let bound = -0.5 * gap;
    report.check(Check::new("log_slope", fit.exponent <= bound, fit.exponent, bound, 0.0));
    report.fits.push(FitRecord::new("log_distance", &fit));
    report.meta("spectral_gap", gap);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_integral_oracles() {
        // closed forms of the quadratic weight on an interval of length L
        for len in [1.0, 2.5] {
            assert!((weight_power_integral(len, 1.0) - len.powi(3) / 12.0).abs() < 1e-14);
            assert!((weight_power_integral(len, 2.0) - len.powi(5) / 120.0).abs() < 1e-13);
        }
    }

    #[test]
    fn trapezoid_is_exact_on_lines() {
        let t = [0.0, 0.5, 2.0];
        assert!((time_integral(&t, &[1.0, 2.0, 5.0]) - 6.0).abs() < 1e-15);
    }

    #[test]
    fn weight_experiment_matches_oracles() {
        let mut c = ExperimentConfig::defaults(ExperimentKind::Weight);
        for (a, b) in [(0.0, 1.0), (-1.0, 2.0)] {
            c.domain.a = a;
            c.domain.b = b;
            let r = run_experiment(&c, 1).unwrap();
            assert!(r.passed(), "{:?}", r.verdicts);
        }
    }

    #[test]
    fn identical_pair_gives_zero_distance() {
        let mut c = ExperimentConfig::defaults(ExperimentKind::Contract);
        c.domain.n = 40;
        c.solver.t_end = 0.2;
        c.solver.dt = 1e-3;
        c.solver.record_every = 10;
        c.ensemble.members = 4;
        c.initial.xi_tilde = c.initial.xi;
        let r = run_experiment(&c, 1).unwrap();
        assert!(r.passed(), "{:?}", r.verdicts);
        let d = r.series("distance_0_1").unwrap();
        assert!(d.data[1].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stability_with_equal_n_is_zero() {
        let mut c = ExperimentConfig::defaults(ExperimentKind::Stability);
        c.domain.n = 30;
        c.solver.t_end = 0.1;
        c.solver.dt = 1e-3;
        let mut r = Report::new(&c);
        assert!(run_stability_sweep(&c, &[4, 8], 1, &mut r).is_err());
        assert!(run_stability_sweep(&c, &[8, 4, 16], 1, &mut r).is_err());
        let d = run_stability_sweep(&c, &[6, 6, 6], 1, &mut r).unwrap();
        assert_eq!(d, vec![0.0; 3]);
        let d = run_stability_sweep(&c, &[4, 5, 6], 1, &mut r).unwrap();
        assert_eq!(d[2], 0.0);
        assert!(d[0] > d[1] && d[1] > 0.0);
    }
}
