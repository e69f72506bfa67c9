use serde::Serialize;

use crate::domain::{solve_weight, Grid1D, GridFunction, Weight};
use crate::error::{PmeError, Result};
use crate::model::{NoiseModel, Nonlinearity};
use crate::solver::config::SolverConfig;
use crate::solver::rng::NoiseIncrements;
use crate::solver::scheme::Stepper;

/// What [`run_coupled`] records besides the standard functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordOptions {
    /// Level `c` of the clipped functionals `min(|u|_w, c)` and `|min(u, c)|_w`.
    pub clip: f64,
    /// Keep every member's field at every record time.
    pub snapshots: bool,
}

impl Default for RecordOptions {
    fn default() -> Self {
        Self { clip: 1.0, snapshots: false }
    }
}

/// Functionals of one member at the record times.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MemberRecord {
    /// `|u|_{L^1_w}`.
    pub weighted_l1: Vec<f64>,
    /// `|u|_{L^{m+1}}^{m+1}`.
    pub norm_mp1: Vec<f64>,
    /// `min(|u|_{L^1_w}, c)`.
    pub clipped_norm: Vec<f64>,
    /// `|min(u, c)|_{L^1_w}`.
    pub clipped_field: Vec<f64>,
    /// `∫ min(u, c) w`, signed.
    pub clipped_mass: Vec<f64>,
}

/// Distance and dissipation of one pair `(i, j)`, `i < j`, at the record times.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PairRecord {
    pub i: usize,
    pub j: usize,
    /// `|u_i - u_j|_{L^1_w}`.
    pub distance: Vec<f64>,
    /// `|A(u_i) - A(u_j)|_{L^1}`.
    pub dissipation: Vec<f64>,
    /// Left Riemann sum of `dissipation` over every step up to the record time.
    pub cumulative_dissipation: Vec<f64>,
}

impl PairRecord {
    /// `distance + cumulative_dissipation`, nonincreasing in expectation.
    pub fn lyapunov(&self) -> Vec<f64> {
        self.distance.iter().zip(&self.cumulative_dissipation).map(|(d, c)| d + c).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowUpInfo {
    pub step: u64,
    pub time: f64,
    pub member: usize,
    pub reason: String,
}

/// Records of a coupled run. After a blow-up the records stop at the last
/// record time reached and `blow_up` is set.
#[derive(Debug, Clone)]
pub struct CoupledOutput {
    pub grid: Grid1D,
    pub seed: u64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub members: Vec<MemberRecord>,
    pub pairs: Vec<PairRecord>,
    /// `snapshots[k][j]` is member `j` at `times[k]`; empty unless requested.
    pub snapshots: Vec<Vec<GridFunction>>,
    pub final_states: Vec<GridFunction>,
    pub blow_up: Option<BlowUpInfo>,
}

impl CoupledOutput {
    pub fn pair(&self, i: usize, j: usize) -> Option<&PairRecord> {
        self.pairs.iter().find(|p| p.i == i && p.j == j)
    }

    pub fn into_result(self) -> Result<Self> {
        match &self.blow_up {
            Some(b) => Err(PmeError::BlowUp { step: b.step, time: b.time, reason: b.reason.clone() }),
            None => Ok(self),
        }
    }
}

pub(crate) struct Recorder {
    w: Weight,
    h: f64,
    m: f64,
    clip: f64,
}

impl Recorder {
    pub(crate) fn new(grid: &Grid1D, m: f64, clip: f64) -> Self {
        Self { w: solve_weight(grid), h: grid.h(), m, clip }
    }

    pub(crate) fn weighted(&self, f: impl Iterator<Item = f64>) -> f64 {
        f.zip(self.w.values()).map(|(v, w)| v.abs() * w).sum::<f64>() * self.h
    }

    fn member(&self, u: &[f64], rec: &mut MemberRecord) {
        let norm = self.weighted(u.iter().copied());
        let p = self.m + 1.0;
        let mp1 = if p == 3.0 {
            u.iter().map(|v| (v * v * v).abs()).sum::<f64>()
        } else {
            u.iter().map(|v| v.abs().powf(p)).sum::<f64>()
        } * self.h;
        rec.weighted_l1.push(norm);
        rec.norm_mp1.push(mp1);
        rec.clipped_norm.push(norm.min(self.clip));
        rec.clipped_field.push(self.weighted(u.iter().map(|v| v.min(self.clip))));
        rec.clipped_mass.push(u.iter().zip(self.w.values()).map(|(v, w)| v.min(self.clip) * w).sum::<f64>() * self.h);
    }
}

fn l1_gap(a: &[f64], b: &[f64], h: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * h
}

/// Advances every initial condition with the same increments `dW^k_n`
/// (keyed by `seed`) and records member functionals and pair distances.
///
/// A blow-up ends the run early; the partial output carries `blow_up`.
pub fn run_coupled(
    config: &SolverConfig,
    nl: &Nonlinearity,
    nm: &NoiseModel,
    ics: &[GridFunction],
    seed: u64,
    opts: &RecordOptions,
) -> Result<CoupledOutput> {
    config.validate()?;
    let first =
        ics.first().ok_or_else(|| PmeError::Input("run_coupled needs at least one initial condition".into()))?;
    let grid = *first.grid();
    for ic in ics {
        grid.check_same(ic.grid())?;
    }
    let members = ics.len();
    let dt = config.dt;
    let mut stepper = Stepper::new(&grid, nl, nm, config, members)?;
    let mut states: Vec<Vec<f64>> = ics.iter().map(|u| u.values().to_vec()).collect();
    stepper.prepare(&mut states);

    let recorder = Recorder::new(&grid, nl.m(), opts.clip);
    let noise = NoiseIncrements::new(seed, dt, nm.modes());
    let mut dw = vec![0.0; nm.modes()];
    let pair_index: Vec<(usize, usize)> = (0..members).flat_map(|i| ((i + 1)..members).map(move |j| (i, j))).collect();
    let mut member_recs = vec![MemberRecord::default(); members];
    let mut pair_recs: Vec<PairRecord> =
        pair_index.iter().map(|&(i, j)| PairRecord { i, j, ..Default::default() }).collect();
    let mut cumulative = vec![0.0; pair_index.len()];
    let mut a_vals = vec![vec![0.0; grid.n()]; members];
    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    let h = grid.h();

    let record_steps = config.record_steps();
    let mut next_record = 0usize;
    let total = config.steps();
    let mut blow_up = None;

    for step in 0..=total {
        if !pair_index.is_empty() {
            for (a, u) in a_vals.iter_mut().zip(&states) {
                a.iter_mut().zip(u).for_each(|(a, &v)| *a = nl.a(v));
            }
        }
        if next_record < record_steps.len() && record_steps[next_record] == step {
            next_record += 1;
            times.push(step as f64 * dt);
            for (u, rec) in states.iter().zip(member_recs.iter_mut()) {
                recorder.member(u, rec);
            }
            for ((&(i, j), rec), &cum) in pair_index.iter().zip(pair_recs.iter_mut()).zip(&cumulative) {
                rec.distance.push(recorder.weighted(states[i].iter().zip(&states[j]).map(|(a, b)| a - b)));
                rec.dissipation.push(l1_gap(&a_vals[i], &a_vals[j], h));
                rec.cumulative_dissipation.push(cum);
            }
            if opts.snapshots {
                snapshots.push(states.iter().map(|u| GridFunction::new(grid, u.clone())).collect::<Result<Vec<_>>>()?);
            }
        }
        if step == total {
            break;
        }
        for (c, &(i, j)) in cumulative.iter_mut().zip(&pair_index) {
            *c += dt * l1_gap(&a_vals[i], &a_vals[j], h);
        }
        noise.fill(step, &mut dw);
        if let Err((member, reason)) = stepper.advance(&mut states, dt, &dw) {
            blow_up = Some(BlowUpInfo { step: step + 1, time: (step + 1) as f64 * dt, member, reason });
            break;
        }
    }

    let final_states = if blow_up.is_none() {
        states.into_iter().map(|u| GridFunction::new(grid, u)).collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(CoupledOutput {
        grid,
        seed,
        dt,
        times,
        members: member_recs,
        pairs: pair_recs,
        snapshots,
        final_states,
        blow_up,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;
    use crate::model::NoiseFamily;
    use crate::solver::config::Scheme;
    use crate::solver::initial::InitialCondition;

    fn setup(n: usize) -> (Grid1D, Nonlinearity) {
        (build_grid(0.0, 1.0, n).unwrap(), Nonlinearity::pure_power(2.0, 2.0).unwrap())
    }

    fn cfg(t_end: f64, scheme: Scheme) -> SolverConfig {
        SolverConfig { scheme, dt: 1e-3, t_end, record_every: 10, ..Default::default() }
    }

    #[test]
    fn identical_members_never_separate() {
        let (g, nl) = setup(30);
        let nm = NoiseModel::new(NoiseFamily::Linear, 4, 0.5, 2.0, (0.0, 1.0), 2.0).unwrap();
        let xi = InitialCondition::Bump { amplitude: 2.0, center: 0.5, radius: 0.25 }.build(&g, 2.0).unwrap();
        for scheme in [Scheme::FdSemiImplicit, Scheme::FdExplicit, Scheme::Galerkin] {
            let out = run_coupled(&cfg(0.3, scheme), &nl, &nm, &[xi.clone(), xi.clone()], 9, &RecordOptions::default())
                .unwrap();
            assert!(out.pairs[0].distance.iter().all(|&d| d == 0.0));
            assert_eq!(out.final_states[0], out.final_states[1]);
        }
    }

    #[test]
    fn deterministic_distance_is_nonincreasing() {
        let (g, nl) = setup(60);
        let nm = NoiseModel::off((0.0, 1.0), 2.0);
        let a = InitialCondition::Bump { amplitude: 2.0, center: 0.4, radius: 0.3 }.build(&g, 2.0).unwrap();
        let b = InitialCondition::Sine { amplitude: -1.0, mode: 1 }.build(&g, 2.0).unwrap();
        let out =
            run_coupled(&cfg(1.0, Scheme::FdSemiImplicit), &nl, &nm, &[a, b], 0, &RecordOptions::default()).unwrap();
        let d = &out.pairs[0].distance;
        assert!(d.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        let lyap = out.pairs[0].lyapunov();
        // The semi-implicit scheme dissipates sum (M 1)_i |δA_i| h dt with
        // M = (I - dt D Δ_h)^{-1}, slightly less than the recorded left sum.
        let c = &out.pairs[0].cumulative_dissipation;
        for k in 1..lyap.len() {
            assert!(lyap[k] - lyap[k - 1] <= 0.05 * (c[k] - c[k - 1]));
        }
        assert_eq!(out.times.len(), 101);
        assert!((out.times[100] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_norm_of_single_member_decreases() {
        let (g, nl) = setup(40);
        let nm = NoiseModel::off((0.0, 1.0), 2.0);
        let a = InitialCondition::WBump { amplitude: 3.0 }.build(&g, 2.0).unwrap();
        let out = run_coupled(&cfg(0.5, Scheme::FdExplicit), &nl, &nm, &[a], 0, &RecordOptions::default()).unwrap();
        assert!(out.pairs.is_empty());
        let n = &out.members[0].weighted_l1;
        assert!(n.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn blow_up_is_flagged_with_partial_records() {
        let g = build_grid(0.0, 1.0, 10).unwrap();
        let nl = Nonlinearity::pure_power(2.0, 2.0).unwrap();
        let nm = NoiseModel::new(NoiseFamily::Additive, 1, 1e11, 2.0, (0.0, 1.0), 2.0).unwrap();
        let out = run_coupled(
            &cfg(0.1, Scheme::FdSemiImplicit),
            &nl,
            &nm,
            &[GridFunction::zeros(g)],
            1,
            &RecordOptions::default(),
        )
        .unwrap();
        let b = out.blow_up.clone().expect("blow-up detected");
        assert!(b.step >= 1 && out.times.len() as u64 <= b.step / 10 + 1);
        assert!(out.into_result().is_err());
    }

    #[test]
    fn galerkin_full_basis_matches_fd() {
        let (g, nl) = setup(24);
        let nm = NoiseModel::new(NoiseFamily::Linear, 3, 0.3, 2.0, (0.0, 1.0), 2.0).unwrap();
        let xi = InitialCondition::Bump { amplitude: 1.5, center: 0.5, radius: 0.3 }.build(&g, 2.0).unwrap();
        let fd = run_coupled(
            &cfg(0.2, Scheme::FdSemiImplicit),
            &nl,
            &nm,
            std::slice::from_ref(&xi),
            4,
            &RecordOptions::default(),
        )
        .unwrap();
        let gk = run_coupled(&cfg(0.2, Scheme::Galerkin), &nl, &nm, &[xi], 4, &RecordOptions::default()).unwrap();
        let diff = fd.final_states[0].sub(&gk.final_states[0]).unwrap().max_abs();
        assert!(diff < 1e-10, "{diff}");
    }
}
