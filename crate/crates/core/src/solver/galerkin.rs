use std::f64::consts::PI;

use crate::domain::{Grid1D, GridFunction};
use crate::error::{PmeError, Result};
use crate::model::{NoiseModel, Nonlinearity};

/// Orthonormal discrete sine basis `S_{il} = sqrt(2/(N+1)) sin(i l pi/(N+1))`.
///
/// `S` is symmetric and orthogonal, and each column is an eigenvector of the
/// three-point Dirichlet Laplacian with eigenvalue `-lambda_l`,
/// `lambda_l = (4/h^2) sin^2(l pi / (2(N+1)))`.
#[derive(Debug, Clone)]
pub struct SineBasis {
    grid: Grid1D,
    matrix: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl SineBasis {
    pub fn new(grid: &Grid1D) -> Self {
        let n = grid.n();
        let np1 = (n + 1) as f64;
        let scale = (2.0 / np1).sqrt();
        let mut matrix = vec![0.0; n * n];
        for i in 1..=n {
            for l in 1..=n {
                // reduce the phase to keep the argument small
                let phase = ((i * l) % (2 * (n + 1))) as f64;
                matrix[(i - 1) * n + (l - 1)] = scale * (phase * PI / np1).sin();
            }
        }
        let h = grid.h();
        let eigenvalues = (1..=n)
            .map(|l| {
                let s = (l as f64 * PI / (2.0 * np1)).sin();
                4.0 / (h * h) * s * s
            })
            .collect();
        Self { grid: *grid, matrix, eigenvalues }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.n()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `lambda_l`, `l = 1..N`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// First `out.len()` coefficients of the nodal field `u`.
    pub fn analyze_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.len();
        out.iter_mut().for_each(|c| *c = 0.0);
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0.0 {
                continue;
            }
            let row = &self.matrix[i * n..i * n + out.len()];
            for (c, s) in out.iter_mut().zip(row) {
                *c += s * ui;
            }
        }
    }

    pub fn analyze(&self, u: &[f64], modes: usize) -> Vec<f64> {
        let mut out = vec![0.0; modes];
        self.analyze_into(u, &mut out);
        out
    }

    /// Nodal field with the given leading coefficients.
    pub fn synthesize_into(&self, coeffs: &[f64], out: &mut [f64]) {
        let n = self.len();
        for (i, v) in out.iter_mut().enumerate() {
            let row = &self.matrix[i * n..i * n + coeffs.len()];
            *v = row.iter().zip(coeffs).map(|(s, c)| s * c).sum();
        }
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.synthesize_into(coeffs, &mut out);
        out
    }
}

/// Deterministic stabilized update of the leading coefficients:
/// `(1 + dt D lambda_l)(c*_l - c_l) = -dt lambda_l Â_l`.
pub(crate) fn galerkin_drift(basis: &SineBasis, coeffs: &mut [f64], a_hat: &[f64], d: f64, dt: f64) {
    for ((c, &ah), &lam) in coeffs.iter_mut().zip(a_hat).zip(basis.eigenvalues()) {
        *c -= dt * lam * ah / (1.0 + dt * d * lam);
    }
}

/// One Galerkin step on spectral coefficients: `D = max_i A'(u_i)`, the
/// nonlinearity is evaluated at the nodes of `u = S c`, and the Itô noise
/// `g(u) sum_k e_k dW_k` is projected onto the retained modes.
pub fn step_galerkin(
    basis: &SineBasis,
    coeffs: &[f64],
    nl: &Nonlinearity,
    nm: &NoiseModel,
    dt: f64,
    dw: &[f64],
) -> Result<Vec<f64>> {
    let modes = coeffs.len();
    if modes == 0 || modes > basis.len() {
        return Err(PmeError::Config(format!("Galerkin needs between 1 and {} modes, got {modes}", basis.len())));
    }
    let u = basis.synthesize(coeffs);
    let d = u.iter().fold(0.0_f64, |acc, &v| acc.max(nl.derivative(v)));
    let a: Vec<f64> = u.iter().map(|&v| nl.a(v)).collect();
    let a_hat = basis.analyze(&a, modes);
    let mut next = coeffs.to_vec();
    galerkin_drift(basis, &mut next, &a_hat, d, dt);
    if !nm.is_off() {
        let nodes = basis.grid().nodes();
        let noise: Vec<f64> = nodes
            .iter()
            .zip(&u)
            .map(|(&x, &v)| {
                let zeta: f64 = (1..=nm.modes()).zip(dw).map(|(k, w)| nm.spatial(k, x) * w).sum();
                nm.amplitude_law(v) * zeta
            })
            .collect();
        let n_hat = basis.analyze(&noise, modes);
        next.iter_mut().zip(n_hat).for_each(|(c, e)| *c += e);
    }
    if let Some(bad) = next.iter().position(|c| !c.is_finite()) {
        return Err(PmeError::BlowUp { step: 0, time: dt, reason: format!("coefficient {} is not finite", bad + 1) });
    }
    Ok(next)
}

/// Nodal field of the given coefficients.
pub fn galerkin_field(basis: &SineBasis, coeffs: &[f64]) -> Result<GridFunction> {
    GridFunction::new(*basis.grid(), basis.synthesize(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_grid, laplacian_into};

    #[test]
    fn basis_is_orthonormal_eigenbasis() {
        let g = build_grid(0.0, 1.0, 17).unwrap();
        let b = SineBasis::new(&g);
        let n = g.n();
        for l in 0..n {
            let mut e = vec![0.0; n];
            e[l] = 1.0;
            let col = b.synthesize(&e);
            let back = b.analyze(&col, n);
            for (k, v) in back.iter().enumerate() {
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-13);
            }
            let mut lap = vec![0.0; n];
            laplacian_into(&col, g.h(), &mut lap);
            for (x, y) in lap.iter().zip(&col) {
                assert!((x + b.eigenvalues()[l] * y).abs() < 1e-9 * b.eigenvalues()[l]);
            }
        }
    }

    #[test]
    fn linear_mode_decays_by_implicit_heat_factor() {
        let g = build_grid(0.0, 1.0, 31).unwrap();
        let b = SineBasis::new(&g);
        let nl = Nonlinearity::linear(2.0, 1.0).unwrap();
        let nm = NoiseModel::off((0.0, 1.0), 2.0);
        let dt = 1e-3;
        let mut c = vec![0.0; 31];
        c[2] = 1.0;
        for _ in 0..50 {
            c = step_galerkin(&b, &c, &nl, &nm, dt, &[]).unwrap();
        }
        let factor = (1.0 / (1.0 + dt * b.eigenvalues()[2])).powi(50);
        assert!((c[2] - factor).abs() < 1e-12);
        assert!(c.iter().enumerate().all(|(k, v)| k == 2 || v.abs() < 1e-12));
    }

    #[test]
    fn single_mode_stays_confined() {
        let g = build_grid(0.0, 1.0, 15).unwrap();
        let b = SineBasis::new(&g);
        let nl = Nonlinearity::pure_power(2.0, 2.0).unwrap();
        let nm = NoiseModel::off((0.0, 1.0), 2.0);
        let mut c = vec![0.7];
        for _ in 0..20 {
            c = step_galerkin(&b, &c, &nl, &nm, 1e-3, &[]).unwrap();
        }
        assert_eq!(c.len(), 1);
        let u = galerkin_field(&b, &c).unwrap();
        let full = b.analyze(u.values(), 15);
        assert!(full[1..].iter().all(|v| v.abs() < 1e-13));
        assert!(c[0] < 0.7 && c[0] > 0.0);
    }
}
