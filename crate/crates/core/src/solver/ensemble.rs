use rayon::prelude::*;
use serde::Serialize;

use crate::domain::GridFunction;
use crate::error::{PmeError, Result};
use crate::model::{NoiseModel, Nonlinearity};
use crate::solver::config::SolverConfig;
use crate::solver::coupled::{run_coupled, CoupledOutput, RecordOptions};

/// Fraction of blown-up members above which an ensemble is rejected.
pub const MAX_BLOW_UP_FRACTION: f64 = 0.1;

/// Numerically stable running mean and variance.
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `sample_std / sqrt(count)`; zero for fewer than two samples.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = self.m2 / (self.count - 1) as f64;
        (var / self.count as f64).sqrt()
    }
}

/// Mean and standard error of one functional at each record time.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Moments {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl Moments {
    /// Moments over `samples[r][k]`: run `r`, record time `k`.
    pub fn from_samples<'a>(samples: impl IntoIterator<Item = &'a [f64]>, len: usize) -> Self {
        let mut acc = vec![Welford::default(); len];
        for run in samples {
            for (w, &x) in acc.iter_mut().zip(run) {
                w.push(x);
            }
        }
        Self { mean: acc.iter().map(Welford::mean).collect(), stderr: acc.iter().map(Welford::stderr).collect() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MemberMoments {
    pub weighted_l1: Moments,
    pub norm_mp1: Moments,
    pub clipped_norm: Moments,
    pub clipped_field: Moments,
    pub clipped_mass: Moments,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PairMoments {
    pub i: usize,
    pub j: usize,
    pub distance: Moments,
    pub dissipation: Moments,
    pub cumulative_dissipation: Moments,
    pub lyapunov: Moments,
}

/// Ensemble statistics of every recorded functional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub members: Vec<MemberMoments>,
    pub pairs: Vec<PairMoments>,
    pub completed: usize,
    pub blown_up: usize,
}

impl EnsembleStats {
    pub fn pair(&self, i: usize, j: usize) -> Option<&PairMoments> {
        self.pairs.iter().find(|p| p.i == i && p.j == j)
    }
}

/// Evaluates `f(base_seed + j)` for `j = 0..count` on a dedicated pool of
/// `threads` workers. Results come back in seed order, so the outcome never
/// depends on scheduling.
pub fn map_seeds<T, F>(count: usize, base_seed: u64, threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| PmeError::Config(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(|| (0..count).into_par_iter().map(|j| f(base_seed.wrapping_add(j as u64))).collect()))
}

/// Aggregates coupled outputs that all ran to completion.
pub fn aggregate(runs: &[CoupledOutput], blown_up: usize) -> Result<EnsembleStats> {
    let first = runs.first().ok_or_else(|| PmeError::Input("no completed runs to aggregate".into()))?;
    let len = first.times.len();
    let members = (0..first.members.len())
        .map(|j| MemberMoments {
            weighted_l1: Moments::from_samples(runs.iter().map(|r| r.members[j].weighted_l1.as_slice()), len),
            norm_mp1: Moments::from_samples(runs.iter().map(|r| r.members[j].norm_mp1.as_slice()), len),
            clipped_norm: Moments::from_samples(runs.iter().map(|r| r.members[j].clipped_norm.as_slice()), len),
            clipped_field: Moments::from_samples(runs.iter().map(|r| r.members[j].clipped_field.as_slice()), len),
            clipped_mass: Moments::from_samples(runs.iter().map(|r| r.members[j].clipped_mass.as_slice()), len),
        })
        .collect();
    let lyap: Vec<Vec<Vec<f64>>> = runs.iter().map(|r| r.pairs.iter().map(|p| p.lyapunov()).collect()).collect();
    let pairs = first
        .pairs
        .iter()
        .enumerate()
        .map(|(k, p)| PairMoments {
            i: p.i,
            j: p.j,
            distance: Moments::from_samples(runs.iter().map(|r| r.pairs[k].distance.as_slice()), len),
            dissipation: Moments::from_samples(runs.iter().map(|r| r.pairs[k].dissipation.as_slice()), len),
            cumulative_dissipation: Moments::from_samples(
                runs.iter().map(|r| r.pairs[k].cumulative_dissipation.as_slice()),
                len,
            ),
            lyapunov: Moments::from_samples(lyap.iter().map(|l| l[k].as_slice()), len),
        })
        .collect();
    Ok(EnsembleStats { times: first.times.clone(), members, pairs, completed: runs.len(), blown_up })
}

/// Splits finished runs into completed ones and a blow-up count, rejecting
/// the ensemble when more than 10% of the runs blew up.
pub fn screen_runs(outputs: Vec<CoupledOutput>) -> Result<(Vec<CoupledOutput>, usize)> {
    let total = outputs.len();
    let (ok, bad): (Vec<_>, Vec<_>) = outputs.into_iter().partition(|o| o.blow_up.is_none());
    let failed = bad.len();
    if failed as f64 > MAX_BLOW_UP_FRACTION * total as f64 || ok.len() < 2 {
        return Err(PmeError::EnsembleRejected { failed, total });
    }
    Ok((ok, failed))
}

/// `M` independent coupled runs with seeds `base_seed + j`.
#[allow(clippy::too_many_arguments)]
pub fn run_ensemble(
    config: &SolverConfig,
    nl: &Nonlinearity,
    nm: &NoiseModel,
    ics: &[GridFunction],
    m: usize,
    base_seed: u64,
    threads: usize,
    opts: &RecordOptions,
) -> Result<EnsembleStats> {
    if m < 2 {
        return Err(PmeError::Config(format!("an ensemble needs M >= 2, got {m}")));
    }
    let outputs = map_seeds(m, base_seed, threads, |seed| run_coupled(config, nl, nm, ics, seed, opts))?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (ok, failed) = screen_runs(outputs)?;
    aggregate(&ok, failed)
}
