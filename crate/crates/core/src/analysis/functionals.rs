use serde::{Deserialize, Serialize};

use crate::analysis::{DecaySeries, Verdict, Violation};
use crate::error::{PmeError, Result};
use crate::solver::{EnsembleStats, MemberMoments, Moments};

/// `sup_t (t ∧ 1)^{(m+1)/(m-1)} E|u(t)|_{L^{m+1}}^{m+1}` over the record times.
pub fn coming_down_statistic(norm_series: &DecaySeries, m: f64) -> f64 {
    let p = (m + 1.0) / (m - 1.0);
    norm_series.times().iter().zip(norm_series.values()).map(|(t, v)| t.min(1.0).powf(p) * v).fold(0.0, f64::max)
}

/// Built-in functionals with Lipschitz constant 1 with respect to `|.|_{L^1_w}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// `min(|u|_{L^1_w}, c)`.
    ClippedNorm,
    /// `|min(u, c)|_{L^1_w}`.
    ClippedField,
    /// `∫ min(u, c) w`.
    ClippedMass,
}

impl Functional {
    pub fn moments<'a>(&self, member: &'a MemberMoments) -> &'a Moments {
        match self {
            Functional::ClippedNorm => &member.clipped_norm,
            Functional::ClippedField => &member.clipped_field,
            Functional::ClippedMass => &member.clipped_mass,
        }
    }
}

/// `|E F(u(t; xi)) - E F(u(t; xi~))|` with the combined standard error, where
/// `xi` is member `member_a` of `stats_a` and `xi~` member `member_b` of `stats_b`.
pub fn mixing_gap(
    stats_a: &EnsembleStats,
    member_a: usize,
    stats_b: &EnsembleStats,
    member_b: usize,
    functional: Functional,
) -> Result<DecaySeries> {
    if stats_a.times != stats_b.times {
        return Err(PmeError::Input("mixing gap needs ensembles on the same time grid".into()));
    }
    let get = |s: &'_ EnsembleStats, j: usize| -> Result<Moments> {
        s.members
            .get(j)
            .map(|mm| functional.moments(mm).clone())
            .ok_or_else(|| PmeError::Input(format!("ensemble has no member {j}")))
    };
    let (fa, fb) = (get(stats_a, member_a)?, get(stats_b, member_b)?);
    let values = fa.mean.iter().zip(&fb.mean).map(|(a, b)| (a - b).abs()).collect();
    let stderr = fa.stderr.iter().zip(&fb.stderr).map(|(a, b)| a.hypot(*b)).collect();
    DecaySeries::new(stats_a.times.clone(), values, stderr)
}

/// `gap(t) <= distance(t) + sqrt(se_gap^2 + se_dist^2)` at every time. The
/// bound holds pathwise for a 1-Lipschitz functional, so beyond the error
/// bars only rounding (relative `1e-12`) is allowed.
pub fn lipschitz_domination(gap: &DecaySeries, distance: &DecaySeries) -> Result<Verdict> {
    if gap.times() != distance.times() {
        return Err(PmeError::Input("gap and distance use different times".into()));
    }
    let violations = gap
        .times()
        .iter()
        .enumerate()
        .filter_map(|(k, &t)| {
            let (g, d) = (gap.values()[k], distance.values()[k]);
            let slack = gap.stderr()[k].hypot(distance.stderr()[k]) + 1e-12 * d.max(g);
            let excess = g - d - slack;
            (excess > 0.0).then(|| Violation { clause: "lipschitz".into(), time: t, excess })
        })
        .collect::<Vec<_>>();
    Ok(Verdict::from_violations(violations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;
    use crate::model::{NoiseFamily, NoiseModel, Nonlinearity};
    use crate::solver::{run_ensemble, InitialCondition, RecordOptions, SolverConfig};

    #[test]
    fn coming_down_examples() {
        let t: Vec<f64> = (0..40).map(|k| 0.05 * k as f64).collect();
        let zero = DecaySeries::exact(t.clone(), vec![0.0; 40]).unwrap();
        assert_eq!(coming_down_statistic(&zero, 2.0), 0.0);
        for m in [2.0, 3.0] {
            let p = (m + 1.0) / (m - 1.0);
            let v = t.iter().map(|t| if *t == 0.0 { 1e300 } else { t.min(1.0).powf(-p) }).collect();
            let s = DecaySeries::exact(t.clone(), v).unwrap();
            assert!((coming_down_statistic(&s, m) - 1.0).abs() < 1e-12);
        }
    }

    fn ensemble() -> EnsembleStats {
        let g = build_grid(0.0, 1.0, 24).unwrap();
        let nl = Nonlinearity::pure_power(2.0, 2.0).unwrap();
        let nm = NoiseModel::new(NoiseFamily::Linear, 3, 0.5, 2.0, (0.0, 1.0), 2.0).unwrap();
        let a = InitialCondition::WBump { amplitude: 3.0 }.build(&g, 2.0).unwrap();
        let b = InitialCondition::Bump { amplitude: -1.0, center: 0.4, radius: 0.3 }.build(&g, 2.0).unwrap();
        let cfg = SolverConfig { dt: 1e-3, t_end: 0.3, record_every: 20, ..Default::default() };
        run_ensemble(&cfg, &nl, &nm, &[a, b], 8, 5, 2, &RecordOptions { clip: 0.05, snapshots: false }).unwrap()
    }

    #[test]
    fn gap_against_itself_vanishes() {
        let s = ensemble();
        for f in [Functional::ClippedNorm, Functional::ClippedField, Functional::ClippedMass] {
            let gap = mixing_gap(&s, 0, &s, 0, f).unwrap();
            assert!(gap.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn coupled_gap_is_dominated_by_distance() {
        let s = ensemble();
        let p = &s.pairs[0];
        let d = DecaySeries::from_moments(&s.times, &p.distance).unwrap();
        for f in [Functional::ClippedNorm, Functional::ClippedField, Functional::ClippedMass] {
            let gap = mixing_gap(&s, 0, &s, 1, f).unwrap();
            // exact on the means, no error bars needed
            for (g, dist) in gap.values().iter().zip(d.values()) {
                assert!(*g <= dist * (1.0 + 1e-12), "{f:?}: {g} > {dist}");
            }
            assert!(lipschitz_domination(&gap, &d).unwrap().pass);
        }
    }

    #[test]
    fn domination_flags_violations() {
        let t = vec![0.0, 1.0, 2.0];
        let d = DecaySeries::exact(t.clone(), vec![1.0, 0.5, 0.2]).unwrap();
        let g = DecaySeries::exact(t, vec![0.5, 0.6, 0.1]).unwrap();
        let v = lipschitz_domination(&g, &d).unwrap();
        assert!(!v.pass);
        assert_eq!(v.violations[0].time, 1.0);
    }
}
