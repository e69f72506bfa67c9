use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::quad;

/// Which member of the diffusion family is in use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NonlinearityKind {
    /// `A(r) = |r|^{m-1} r`.
    PurePower,
    /// `A(r) = |r|^{m-1} r + r/n` (vanishing viscosity).
    Viscosity { n: u32 },
    /// `a_n(r)^2 = a(clamp(r, -n, n))^2 + (2/n)^2`, see [`regularize`].
    Regularized { n: u32 },
    /// `A(r) = r`. Only a sanity mode: it is not degenerate, so the
    /// assumption validator flags it when `m > 1` is declared.
    Linear,
}

/// The diffusion nonlinearity `A`, with `a = sqrt(A')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    m: f64,
    kind: NonlinearityKind,
    k: f64,
}

impl Nonlinearity {
    /// `K` is normally `>= 1`; smaller values are accepted so that the
    /// validator can be exercised on deliberately broken declarations.
    pub fn new(m: f64, kind: NonlinearityKind, k: f64) -> Result<Self> {
        if !(m > 1.0) || !m.is_finite() {
            return config_err(format!("nonlinearity exponent must satisfy m > 1, got {m}"));
        }
        if !(k > 0.0) || !k.is_finite() {
            return config_err(format!("assumption constant K must be positive, got {k}"));
        }
        match kind {
            NonlinearityKind::Viscosity { n } | NonlinearityKind::Regularized { n } if n < 1 => {
                return config_err("regularization index n must be >= 1");
            }
            _ => {}
        }
        Ok(Self { m, kind, k })
    }

    pub fn pure_power(m: f64, k: f64) -> Result<Self> {
        Self::new(m, NonlinearityKind::PurePower, k)
    }

    pub fn viscosity(m: f64, n: u32, k: f64) -> Result<Self> {
        Self::new(m, NonlinearityKind::Viscosity { n }, k)
    }

    pub fn linear(m_declared: f64, k: f64) -> Result<Self> {
        Self::new(m_declared, NonlinearityKind::Linear, k)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `A(r)`.
    #[inline]
    pub fn a(&self, r: f64) -> f64 {
        match self.kind {
            NonlinearityKind::PurePower => power(r, self.m),
            NonlinearityKind::Viscosity { n } => power(r, self.m) + r / n as f64,
            NonlinearityKind::Regularized { n } => {
                let n = n as f64;
                let floor = 4.0 / (n * n) * r;
                if r.abs() <= n {
                    power(r, self.m) + floor
                } else {
                    let inner = n.powf(self.m) + self.m * n.powf(self.m - 1.0) * (r.abs() - n);
                    r.signum() * inner + floor
                }
            }
            NonlinearityKind::Linear => r,
        }
    }

    /// `A'(r) = a(r)^2`.
    #[inline]
    pub fn derivative(&self, r: f64) -> f64 {
        match self.kind {
            NonlinearityKind::PurePower => power_derivative(r, self.m),
            NonlinearityKind::Viscosity { n } => power_derivative(r, self.m) + 1.0 / n as f64,
            NonlinearityKind::Regularized { n } => {
                let n = n as f64;
                power_derivative(r.clamp(-n, n), self.m) + 4.0 / (n * n)
            }
            NonlinearityKind::Linear => 1.0,
        }
    }

    /// `a(r) = sqrt(A'(r))`.
    #[inline]
    pub fn sqrt_derivative(&self, r: f64) -> f64 {
        self.derivative(r).sqrt()
    }

    /// `(A(r), a(r))`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        (self.a(r), self.sqrt_derivative(r))
    }

    /// `[a](r) = ∫_0^r a`, closed form where one exists.
    pub fn primitive(&self, r: f64) -> f64 {
        match self.kind {
            NonlinearityKind::PurePower => {
                let p = 0.5 * (self.m + 1.0);
                self.m.sqrt() / p * power(r, p)
            }
            NonlinearityKind::Linear => r,
            _ => self.primitive_by_quadrature(r),
        }
    }

    /// `[a](r)` by graded Gauss-Legendre quadrature, for every kind.
    pub fn primitive_by_quadrature(&self, r: f64) -> f64 {
        let breaks: Vec<f64> = match self.kind {
            NonlinearityKind::Regularized { n } => vec![n as f64],
            _ => Vec::new(),
        };
        quad::integrate_from_origin(&|s| self.sqrt_derivative(s), r, &breaks)
    }

    /// `sup |A'|` over `[-r_max, r_max]`; `A'` is even and nondecreasing in `|r|`.
    pub fn max_derivative(&self, r_max: f64) -> f64 {
        self.derivative(r_max.abs())
    }
}

/// `|r|^{p-1} r` with exact fast paths for the common integer exponents.
#[inline]
pub(crate) fn power(r: f64, p: f64) -> f64 {
    if p == 2.0 {
        r * r.abs()
    } else if p == 3.0 {
        r * r * r
    } else if p == 1.0 {
        r
    } else {
        r.signum() * r.abs().powf(p)
    }
}

#[inline]
fn power_derivative(r: f64, m: f64) -> f64 {
    if m == 2.0 {
        2.0 * r.abs()
    } else if m == 3.0 {
        3.0 * r * r
    } else {
        m * r.abs().powf(m - 1.0)
    }
}

/// Regularization with a nondegenerate floor:
/// `a_n(r)^2 = a(clamp(r, -n, n))^2 + (2/n)^2`.
///
/// Then `a_n >= 2/n` everywhere and `|a_n - a| <= 2/n` on `[-n, n]`. The
/// assumption constant is tripled.
pub fn regularize(nl: &Nonlinearity, n: u32) -> Result<Nonlinearity> {
    if n < 1 {
        return config_err("regularization index n must be >= 1");
    }
    if nl.kind != NonlinearityKind::PurePower {
        return config_err("only pure power nonlinearities can be regularized");
    }
    Nonlinearity::new(nl.m, NonlinearityKind::Regularized { n }, 3.0 * nl.k)
}

/// `(A(r), a(r))`.
pub fn eval_nonlinearity(nl: &Nonlinearity, r: f64) -> (f64, f64) {
    nl.eval(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pure_power_closed_form() {
        let nl = Nonlinearity::pure_power(2.0, 1.0).unwrap();
        let (a, s) = nl.eval(-3.0);
        assert_eq!(a, -9.0);
        assert!((s - 2.0f64.sqrt() * 3.0f64.sqrt()).abs() < 1e-14);
        assert!((s - 2.4495).abs() < 1e-4);
    }

    #[test]
    fn viscosity_example() {
        let nl = Nonlinearity::viscosity(2.0, 10, 1.0).unwrap();
        assert!((nl.a(1.0) - 1.1).abs() < 1e-15);
    }

    #[test]
    fn zero_maps_to_zero_for_every_kind() {
        for kind in [
            NonlinearityKind::PurePower,
            NonlinearityKind::Viscosity { n: 3 },
            NonlinearityKind::Regularized { n: 3 },
            NonlinearityKind::Linear,
        ] {
            let nl = Nonlinearity::new(2.5, kind, 1.0).unwrap();
            assert_eq!(nl.a(0.0), 0.0);
        }
    }

    #[test]
    fn regularize_examples() {
        let base = Nonlinearity::pure_power(2.0, 1.0).unwrap();
        let reg = regularize(&base, 10).unwrap();
        assert!((reg.sqrt_derivative(0.0) - 0.2).abs() < 1e-15);
        assert!((reg.sqrt_derivative(1.0) - 2.04f64.sqrt()).abs() < 1e-14);
        assert!((reg.sqrt_derivative(1.0) - 1.42829).abs() < 1e-5);
        let gap = reg.sqrt_derivative(1.0) - base.sqrt_derivative(1.0);
        assert!((gap - 0.01408).abs() < 1e-5 && gap <= 0.4);
        assert_eq!(reg.k(), 3.0);

        let base3 = Nonlinearity::pure_power(3.0, 1.0).unwrap();
        let reg3 = regularize(&base3, 4).unwrap();
        assert!((reg3.sqrt_derivative(10.0) - 48.25f64.sqrt()).abs() < 1e-13);
        assert_eq!(reg3.sqrt_derivative(10.0), reg3.sqrt_derivative(4.0));
    }

    #[test]
    fn regularize_rejects_bad_input() {
        let base = Nonlinearity::pure_power(2.0, 1.0).unwrap();
        assert!(regularize(&base, 0).is_err());
        let visc = Nonlinearity::viscosity(2.0, 3, 1.0).unwrap();
        assert!(regularize(&visc, 3).is_err());
        assert!(Nonlinearity::pure_power(1.0, 1.0).is_err());
    }

    #[test]
    fn regularized_a_is_primitive_of_derivative() {
        let reg = regularize(&Nonlinearity::pure_power(2.0, 1.0).unwrap(), 3).unwrap();
        for r in [-7.0, -3.0, -0.4, 0.0, 0.9, 3.0, 5.5] {
            let q = quad::integrate_from_origin(&|s| reg.derivative(s), r, &[3.0]);
            assert!((q - reg.a(r)).abs() < 1e-10, "r={r}: {q} vs {}", reg.a(r));
        }
    }

    #[test]
    fn primitive_quadrature_matches_closed_form() {
        for m in [1.5, 2.0, 3.0, 5.0] {
            let nl = Nonlinearity::pure_power(m, 1.0).unwrap();
            for r in [-4.0, -0.3, 1e-3, 0.7, 6.0] {
                let exact = nl.primitive(r);
                let q = nl.primitive_by_quadrature(r);
                assert!((exact - q).abs() <= 1e-11 * (1.0 + exact.abs()), "m={m} r={r}");
            }
        }
    }

    proptest! {
        #[test]
        fn odd_and_monotone(m in 1.1f64..5.0, n in 1u32..50, mut rs in prop::collection::vec(-50.0f64..50.0, 2..40)) {
            rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for kind in [NonlinearityKind::PurePower, NonlinearityKind::Viscosity { n }, NonlinearityKind::Regularized { n }] {
                let nl = Nonlinearity::new(m, kind, 1.0).unwrap();
                for &r in &rs {
                    prop_assert_eq!(nl.a(-r), -nl.a(r));
                }
                for w in rs.windows(2) {
                    prop_assert!(nl.a(w[0]) <= nl.a(w[1]));
                }
            }
        }

        #[test]
        fn regularization_bounds(m in 1.1f64..4.0, n in 1u32..40, t in -1.0f64..1.0) {
            let base = Nonlinearity::pure_power(m, 1.0).unwrap();
            let reg = regularize(&base, n).unwrap();
            let nf = n as f64;
            prop_assert!(reg.sqrt_derivative(10.0 * nf * t) >= 2.0 / nf);
            let r = nf * t;
            prop_assert!((reg.sqrt_derivative(r) - base.sqrt_derivative(r)).abs() <= 4.0 / nf);
        }

        #[test]
        fn viscosity_shift_is_exact(m in 1.1f64..4.0, n in 1u32..100, r in -20.0f64..20.0) {
            let base = Nonlinearity::pure_power(m, 1.0).unwrap();
            let visc = Nonlinearity::viscosity(m, n, 1.0).unwrap();
            let shift = visc.a(r) - base.a(r);
            prop_assert!((shift - r / n as f64).abs() <= 1e-12 * (1.0 + base.a(r).abs()));
        }
    }
}
