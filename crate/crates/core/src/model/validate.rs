//! Sampling-based falsification of the structural assumptions on `A` and `sigma`.
//!
//! A passing report is evidence on the sample lattice, not a proof. Every
//! clause records the smallest constant that would make it hold on the
//! lattice together with the pair of arguments attaining it.

use serde::Serialize;

use crate::domain::Grid1D;
use crate::error::{config_err, PmeError, Result};
use crate::model::{NoiseModel, Nonlinearity};

/// Outcome of one clause.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClauseReport {
    pub name: String,
    pub pass: bool,
    /// Smallest constant for which the clause holds on the sample lattice.
    pub tightest_constant: f64,
    pub declared_constant: f64,
    /// Arguments attaining `tightest_constant`, if any sample was informative.
    pub witness: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub clauses: Vec<ClauseReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }

    pub fn clause(&self, name: &str) -> Option<&ClauseReport> {
        self.clauses.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClauseReport> {
        self.clauses.iter().filter(|c| !c.pass)
    }
}

/// Running maximum of a ratio with the arguments that produced it.
struct Tightest {
    value: f64,
    witness: Option<Vec<f64>>,
}

impl Tightest {
    fn new() -> Self {
        Self { value: 0.0, witness: None }
    }

    #[inline]
    fn offer(&mut self, ratio: f64, args: impl FnOnce() -> Vec<f64>) {
        if ratio > self.value {
            self.value = ratio;
            self.witness = Some(args());
        }
    }

    fn into_clause(self, name: &str, declared: f64) -> ClauseReport {
        ClauseReport {
            name: name.to_string(),
            pass: self.value <= declared * (1.0 + 1e-12),
            tightest_constant: self.value,
            declared_constant: declared,
            witness: self.witness,
        }
    }
}

const RELATIVE_FLOOR: f64 = 1e-6;

/// Positive magnitudes, log-spaced on `[r_max * 1e-6, r_max]`, with `1` added
/// when it lies inside (the clauses switch regime there).
fn positive_lattice(r_max: f64, samples: usize) -> Vec<f64> {
    let lo = r_max * RELATIVE_FLOOR;
    let ratio = (r_max / lo).ln() / (samples - 1) as f64;
    let mut out: Vec<f64> = (0..samples).map(|i| lo * (ratio * i as f64).exp()).collect();
    *out.last_mut().expect("samples >= 2") = r_max;
    if r_max >= 1.0 {
        out.push(1.0);
    }
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite lattice"));
    out.dedup();
    out
}

/// Symmetric lattice `-p_n < ... < -p_1 < 0 < p_1 < ... < p_n`.
fn symmetric_lattice(r_max: f64, samples: usize) -> Vec<f64> {
    let pos = positive_lattice(r_max, samples);
    let mut out: Vec<f64> = pos.iter().rev().map(|r| -r).collect();
    out.push(0.0);
    out.extend_from_slice(&pos);
    out
}

fn check_sampling(r_max: f64, samples: usize) -> Result<()> {
    if samples < 100 {
        return config_err(format!("validators need at least 100 samples, got {samples}"));
    }
    if !(r_max > 0.0) || !r_max.is_finite() {
        return config_err(format!("r_max must be positive and finite, got {r_max}"));
    }
    Ok(())
}

/// Checks the bounds on `a = sqrt(A')` and on its primitive `[a]` against the
/// declared constant `K` of `nl`.
///
/// Clauses: `declared_k` (`K >= 1`), `a_at_zero`, `a_derivative`
/// (`|a'(r)| <= K r^{(m-3)/2}` for `r > 0`, central differences), `a_floor`
/// (`K a(r) >= 1` for `|r| >= 1`), `primitive_outer` and `primitive_inner` (the
/// two regimes of the lower bound on `K |[a](r) - [a](r')|`).
pub fn validate_assumption_a(nl: &Nonlinearity, r_max: f64, samples: usize) -> Result<ValidationReport> {
    check_sampling(r_max, samples)?;
    let k = nl.k();
    let m = nl.m();
    let mut clauses = Vec::with_capacity(6);

    clauses.push(ClauseReport {
        name: "declared_k".into(),
        pass: k >= 1.0,
        tightest_constant: 1.0,
        declared_constant: k,
        witness: None,
    });

    let mut at_zero = Tightest::new();
    at_zero.offer(nl.sqrt_derivative(0.0).abs(), || vec![0.0]);
    clauses.push(at_zero.into_clause("a_at_zero", k));

    let pos = positive_lattice(r_max, samples);
    let mut deriv = Tightest::new();
    for &r in &pos {
        let s = 1e-6 * r;
        let d = (nl.sqrt_derivative(r + s) - nl.sqrt_derivative(r - s)) / (2.0 * s);
        deriv.offer(d.abs() / r.powf(0.5 * (m - 3.0)), || vec![r]);
    }
    clauses.push(deriv.into_clause("a_derivative", k));

    let mut floor = Tightest::new();
    for &r in pos.iter().filter(|&&r| r >= 1.0) {
        for x in [r, -r] {
            floor.offer(1.0 / nl.sqrt_derivative(x), || vec![x]);
        }
    }
    clauses.push(floor.into_clause("a_floor", k));

    let lattice = symmetric_lattice(r_max, samples);
    let prim: Vec<f64> = lattice.iter().map(|&r| nl.primitive(r)).collect();
    let mut outer = Tightest::new();
    let mut inner = Tightest::new();
    let inner_exp = 0.5 * (m + 1.0);
    for i in 0..lattice.len() {
        for j in (i + 1)..lattice.len() {
            let (r, s) = (lattice[i], lattice[j]);
            let gap = (prim[i] - prim[j]).abs();
            let dist = (r - s).abs();
            if r.abs().max(s.abs()) >= 1.0 {
                outer.offer(dist / gap, || vec![r, s]);
            } else {
                inner.offer(dist.powf(inner_exp) / gap, || vec![r, s]);
            }
        }
    }
    clauses.push(outer.into_clause("primitive_outer", k));
    clauses.push(inner.into_clause("primitive_inner", k));

    Ok(ValidationReport { clauses })
}

/// Spatial sample points: the endpoints and `count` uniformly spaced interior points.
fn x_lattice(interval: (f64, f64), count: usize) -> Vec<f64> {
    let (a, b) = interval;
    (0..=count + 1).map(|i| a + (b - a) * i as f64 / (count + 1) as f64).collect()
}

fn spatial_vectors(nm: &NoiseModel, xs: &[f64]) -> Vec<Vec<f64>> {
    xs.iter().map(|&x| (1..=nm.modes()).map(|k| nm.spatial(k, x)).collect()).collect()
}

fn l2_norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// Checks the growth and joint Hölder bounds of the noise coefficient with its
/// declared `(K, kappa, kappa_bar)`.
///
/// Clauses: `growth` (`|sigma(x,r)| <= K(1+|r|)`) and `holder`
/// (`|sigma(x,r) - sigma(y,r')| <= K|r-r'|^{1/2+kappa} + K(1+|r|)|x-y|^{kappa_bar}`
/// for `|r - r'| <= 1`). The family `off` passes with empirical constant 0.
pub fn validate_noise(nm: &NoiseModel, r_max: f64, samples: usize) -> Result<ValidationReport> {
    check_sampling(r_max, samples)?;
    let k = nm.k();
    let mut growth = Tightest::new();
    let mut holder = Tightest::new();
    if !nm.is_off() {
        let xs = x_lattice(nm.interval(), 15);
        let es = spatial_vectors(nm, &xs);
        let norms: Vec<f64> = es.iter().map(|e| l2_norm(e.iter().copied())).collect();
        let rs = symmetric_lattice(r_max, samples);

        for (ix, &x) in xs.iter().enumerate() {
            for &r in &rs {
                let v = norms[ix] * nm.amplitude_law(r).abs() / (1.0 + r.abs());
                growth.offer(v, || vec![x, r]);
            }
        }

        // Offsets in r: log-spaced in [1e-9, 1] of both signs, plus the pair (r, 0).
        let offsets: Vec<f64> = {
            let pos: Vec<f64> = (0..=36).map(|i| 10f64.powf(-9.0 + 0.25 * i as f64)).collect();
            pos.iter().flat_map(|&d| [d, -d]).collect()
        };
        let p = 0.5 + nm.kappa();
        let kb = nm.kappa_bar();
        for (ix, &x) in xs.iter().enumerate() {
            for (iy, &y) in xs.iter().enumerate() {
                let dx = (x - y).abs().powf(kb);
                let (ex, ey) = (&es[ix], &es[iy]);
                for &r in &rs {
                    let gr = nm.amplitude_law(r);
                    let spatial = (1.0 + r.abs()) * dx;
                    let mut probe = |s: f64| {
                        let dr = (r - s).abs();
                        if dr > 1.0 || (dr == 0.0 && ix == iy) {
                            return;
                        }
                        let gs = nm.amplitude_law(s);
                        let lhs = l2_norm(ex.iter().zip(ey).map(|(a, b)| a * gr - b * gs));
                        let rhs = dr.powf(p) + spatial;
                        holder.offer(lhs / rhs, || vec![x, y, r, s]);
                    };
                    probe(r);
                    if r.abs() <= 1.0 {
                        probe(0.0);
                    }
                    for &d in &offsets {
                        probe(r + d);
                    }
                }
            }
        }
    }
    Ok(ValidationReport { clauses: vec![growth.into_clause("growth", k), holder.into_clause("holder", k)] })
}

/// `sup_{x, r} |sigma1(x,r) - sigma2(x,r)|^2 / (1+|r|)^{m+1}` over the grid
/// nodes and a symmetric log lattice in `r`. A lower bound for the true
/// supremum.
pub fn noise_distance(nm1: &NoiseModel, nm2: &NoiseModel, grid: &Grid1D, r_max: f64, samples: usize) -> Result<f64> {
    if nm1.m() != nm2.m() {
        return Err(PmeError::Config(format!("noise distance needs a shared m, got {} and {}", nm1.m(), nm2.m())));
    }
    check_sampling(r_max, samples)?;
    let m = nm1.m();
    let modes = nm1.modes().max(nm2.modes());
    let rs = symmetric_lattice(r_max, samples);
    let mut sup: f64 = 0.0;
    for x in grid.nodes() {
        let e1: Vec<f64> = (1..=modes).map(|k| if k <= nm1.modes() { nm1.spatial(k, x) } else { 0.0 }).collect();
        let e2: Vec<f64> = (1..=modes).map(|k| if k <= nm2.modes() { nm2.spatial(k, x) } else { 0.0 }).collect();
        for &r in &rs {
            let (g1, g2) = (nm1.amplitude_law(r), nm2.amplitude_law(r));
            let sq: f64 = e1.iter().zip(&e2).map(|(a, b)| (a * g1 - b * g2).powi(2)).sum();
            sup = sup.max(sq / (1.0 + r.abs()).powf(m + 1.0));
        }
    }
    Ok(sup)
}
