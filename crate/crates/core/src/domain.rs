//! Uniform interior mesh on an interval with homogeneous Dirichlet data,
//! the Dirichlet weight `w` (`-w'' = 1`, `w = 0` on the boundary) and the
//! discrete norms built from nodal quadrature.
//!
//! Every integral in the crate is an interior nodal sum times `h`. Boundary
//! values are implicit zeros, so this is the trapezoid rule.

use crate::error::{config_err, PmeError, Result};

/// Uniform mesh of `n` interior nodes on `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return config_err(format!("grid requires b > a, got a = {a}, b = {b}"));
        }
        if n < 3 {
            return config_err(format!("grid requires at least 3 interior nodes, got {n}"));
        }
        Ok(Self { a, b, n, h: (b - a) / (n as f64 + 1.0) })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of interior nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Interior node `i` for `i = 1..=n`.
    pub fn node(&self, i: usize) -> f64 {
        self.a + i as f64 * self.h
    }

    /// Interior nodes in order, `x_1 .. x_n`.
    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.n).map(|i| self.node(i)).collect()
    }

    pub(crate) fn check_same(&self, other: &Grid1D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(PmeError::GridMismatch(format!(
                "({}, {}, N={}) vs ({}, {}, N={})",
                self.a, self.b, self.n, other.a, other.b, other.n
            )))
        }
    }
}

/// `build_grid(a, b, N)`.
pub fn build_grid(a: f64, b: f64, n: usize) -> Result<Grid1D> {
    Grid1D::new(a, b, n)
}

/// Interior nodal values of a field on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid1D,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(PmeError::Input(format!("expected {} nodal values, got {}", grid.n(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(PmeError::Input(format!("non-finite value at node {}", i + 1)));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![0.0; grid.n()] }
    }

    /// Samples `f` at the interior nodes.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Pointwise `scale * self`.
    pub fn scaled(&self, scale: f64) -> GridFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| v * scale).collect() }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.grid.check_same(&other.grid)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }
}

/// The Dirichlet weight: discrete solution of `-w'' = 1` with zero boundary
/// values, plus cached `L^p` norms.
#[derive(Debug, Clone)]
pub struct Weight {
    field: GridFunction,
    lp_norms: Vec<(f64, f64)>,
}

const CACHED_EXPONENTS: [f64; 3] = [1.0, 1.5, 2.0];

impl Weight {
    pub fn grid(&self) -> &Grid1D {
        self.field.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    pub fn as_grid_function(&self) -> &GridFunction {
        &self.field
    }

    /// `||w||_{L^p}`; served from the cache when `p` was precomputed.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if let Some(&(_, v)) = self.lp_norms.iter().find(|(q, _)| *q == p) {
            return Ok(v);
        }
        lp_norm(&self.field, p)
    }

    /// Adds `||w||_{L^p}` for each `p` to the cache.
    pub fn with_norms(mut self, exponents: &[f64]) -> Result<Self> {
        for &p in exponents {
            if !self.lp_norms.iter().any(|(q, _)| *q == p) {
                let v = lp_norm(&self.field, p)?;
                self.lp_norms.push((p, v));
            }
        }
        Ok(self)
    }

    pub fn max(&self) -> f64 {
        self.field.max_abs()
    }
}

/// Solves `(w_{i+1} - 2 w_i + w_{i-1}) / h^2 = -1` with `w_0 = w_{N+1} = 0`.
pub fn solve_weight(grid: &Grid1D) -> Weight {
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    // -Δ_h w = 1  <=>  (2 w_i - w_{i-1} - w_{i+1}) = h^2
    let lower = vec![-1.0; n];
    let diag = vec![2.0; n];
    let upper = vec![-1.0; n];
    let rhs = vec![h2; n];
    let mut values = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    solve_tridiagonal(&lower, &diag, &upper, &rhs, &mut values, &mut scratch);
    let field = GridFunction { grid: *grid, values };
    let lp_norms =
        CACHED_EXPONENTS.iter().map(|&p| (p, lp_norm(&field, p).expect("cached exponents are >= 1"))).collect();
    Weight { field, lp_norms }
}

/// `sum_i |f_i| w_i h`.
pub fn weighted_l1_norm(f: &GridFunction, w: &Weight) -> Result<f64> {
    f.grid().check_same(w.grid())?;
    Ok(weighted_l1_slice(f.values(), w.values(), f.grid().h()))
}

pub(crate) fn weighted_l1_slice(f: &[f64], w: &[f64], h: f64) -> f64 {
    f.iter().zip(w).map(|(v, wi)| v.abs() * wi).sum::<f64>() * h
}

/// `(sum_i |f_i|^p h)^(1/p)` for `p >= 1`.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(PmeError::Input(format!("L^p norm requires finite p >= 1, got {p}")));
    }
    let h = f.grid().h();
    let sum: f64 = if p == 1.0 {
        f.values().iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        f.values().iter().map(|v| v * v).sum()
    } else {
        f.values().iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((sum * h).powf(1.0 / p))
}

/// Three-point Laplacian with zero ghost values.
pub fn discrete_laplacian(f: &GridFunction) -> GridFunction {
    let mut out = vec![0.0; f.grid().n()];
    laplacian_into(f.values(), f.grid().h(), &mut out);
    GridFunction { grid: *f.grid(), values: out }
}

pub(crate) fn laplacian_into(f: &[f64], h: f64, out: &mut [f64]) {
    let n = f.len();
    let inv_h2 = 1.0 / (h * h);
    for i in 0..n {
        let left = if i > 0 { f[i - 1] } else { 0.0 };
        let right = if i + 1 < n { f[i + 1] } else { 0.0 };
        out[i] = (right - 2.0 * f[i] + left) * inv_h2;
    }
}

/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
///
/// `lower[0]` and `upper[n-1]` are ignored. The matrix must be diagonally
/// dominant (every system solved in this crate is an M-matrix), so no
/// pivoting is done.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64], x: &mut [f64], scratch: &mut [f64]) {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    debug_assert!(x.len() == n && scratch.len() == n);
    let mut denom = diag[0];
    scratch[0] = upper[0] / denom;
    x[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = upper[i] / denom;
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= scratch[i] * x[i + 1];
    }
}

/// Constant-coefficient variant: solves `(1 + 2r) x_i - r (x_{i-1} + x_{i+1}) = rhs_i`,
/// i.e. `(I - r h^2 Δ_h) x = rhs`.
pub(crate) fn solve_shifted_laplacian(r: f64, rhs: &[f64], x: &mut [f64], scratch: &mut [f64]) {
    let n = rhs.len();
    let d = 1.0 + 2.0 * r;
    let mut denom = d;
    scratch[0] = -r / denom;
    x[0] = rhs[0] / denom;
    for i in 1..n {
        denom = d + r * scratch[i - 1];
        scratch[i] = -r / denom;
        x[i] = (rhs[i] + r * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= scratch[i] * x[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn build_grid_examples() {
        let g = build_grid(0.0, 1.0, 3).unwrap();
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.nodes(), vec![0.25, 0.5, 0.75]);
        assert!(close(build_grid(0.0, 1.0, 99).unwrap().h(), 0.01, 1e-15));
        assert_eq!(build_grid(-1.0, 1.0, 3).unwrap().h(), 0.5);
    }

    #[test]
    fn build_grid_rejects_bad_input() {
        assert!(matches!(build_grid(0.0, 1.0, 2), Err(PmeError::Config(_))));
        assert!(matches!(build_grid(1.0, 1.0, 10), Err(PmeError::Config(_))));
        assert!(matches!(build_grid(2.0, 1.0, 10), Err(PmeError::Config(_))));
    }

    #[test]
    fn weight_is_exact_quadratic_on_unit_interval() {
        for n in [3, 10, 99, 1000] {
            let g = build_grid(0.0, 1.0, n).unwrap();
            let w = solve_weight(&g);
            for (x, wi) in g.nodes().iter().zip(w.values()) {
                let exact = x * (1.0 - x) / 2.0;
                assert!(close(*wi, exact, 1e-12), "n={n} x={x}: {wi} vs {exact}");
            }
        }
    }

    #[test]
    fn weight_norms_match_symbolic_integrals() {
        // ∫ x(1-x)/2 = 1/12, ∫ (x(1-x)/2)^2 = 1/120
        let g = build_grid(0.0, 1.0, 199).unwrap();
        let w = solve_weight(&g);
        let h2 = g.h() * g.h();
        assert!(close(w.lp_norm(1.0).unwrap(), 1.0 / 12.0, h2));
        assert!(close(w.lp_norm(2.0).unwrap(), (1.0f64 / 120.0).sqrt(), h2));
        assert!(close(w.lp_norm(2.0).unwrap(), 0.091287, 1e-5));
    }

    #[test]
    fn weight_laplacian_is_minus_one() {
        for n in [3, 10, 100, 1000] {
            let g = build_grid(-1.0, 2.0, n).unwrap();
            let w = solve_weight(&g);
            assert!(w.values().iter().all(|&v| v > 0.0));
            let lap = discrete_laplacian(w.as_grid_function());
            for v in lap.values() {
                assert!(close(*v, -1.0, 1e-10), "n={n}: {v}");
            }
        }
    }

    #[test]
    fn weighted_norm_examples() {
        let g = build_grid(0.0, 1.0, 199).unwrap();
        let w = solve_weight(&g);
        let h2 = g.h() * g.h();
        assert_eq!(weighted_l1_norm(&GridFunction::zeros(g), &w).unwrap(), 0.0);
        let one = GridFunction::from_fn(g, |_| 1.0).unwrap();
        assert!(close(weighted_l1_norm(&one, &w).unwrap(), 1.0 / 12.0, h2));
        assert!(close(weighted_l1_norm(w.as_grid_function(), &w).unwrap(), 1.0 / 120.0, h2));
        let other = solve_weight(&build_grid(0.0, 1.0, 50).unwrap());
        assert!(matches!(weighted_l1_norm(&one, &other), Err(PmeError::GridMismatch(_))));
    }

    #[test]
    fn lp_norm_examples() {
        let g = build_grid(0.0, 1.0, 199).unwrap();
        assert_eq!(lp_norm(&GridFunction::zeros(g), 2.5).unwrap(), 0.0);
        let two = GridFunction::from_fn(g, |_| 2.0).unwrap();
        assert!(close(lp_norm(&two, 3.0).unwrap(), 2.0, 2.0 * g.h()));
        let x = GridFunction::from_fn(g, |x| x).unwrap();
        // f(1) = 1 is cut off by the interior nodal sum, so the error is the
        // missing trapezoid end term h/2 in the square: O(h), not O(h^2).
        let h = g.h();
        let discrete = ((1.0 - h) * (2.0 - h) / 6.0).sqrt();
        assert!(close(lp_norm(&x, 2.0).unwrap(), discrete, 1e-13));
        assert!(close(lp_norm(&x, 2.0).unwrap(), (1.0f64 / 3.0).sqrt(), h));
        assert!(lp_norm(&x, 0.5).is_err());
    }

    #[test]
    fn laplacian_of_sine_is_discrete_eigenpair() {
        let g = build_grid(0.0, 1.0, 63).unwrap();
        let h = g.h();
        let s = GridFunction::from_fn(g, |x| (std::f64::consts::PI * x).sin()).unwrap();
        let lam = -(2.0 / (h * h)) * (1.0 - (std::f64::consts::PI * h).cos());
        let lap = discrete_laplacian(&s);
        for (l, v) in lap.values().iter().zip(s.values()) {
            assert!(close(*l, lam * v, 1e-9));
        }
        assert!(discrete_laplacian(&GridFunction::zeros(g)).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shifted_solver_matches_general_thomas() {
        let n = 17;
        let r = 3.7;
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut x1 = vec![0.0; n];
        let mut x2 = vec![0.0; n];
        let mut s = vec![0.0; n];
        solve_shifted_laplacian(r, &rhs, &mut x1, &mut s);
        solve_tridiagonal(&vec![-r; n], &vec![1.0 + 2.0 * r; n], &vec![-r; n], &rhs, &mut x2, &mut s);
        for (a, b) in x1.iter().zip(&x2) {
            assert!(close(*a, *b, 1e-14));
        }
    }
}
