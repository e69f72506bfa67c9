//! Composite Gauss-Legendre quadrature.

const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];

const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// 8-point Gauss-Legendre on `[lo, hi]`.
pub fn gauss_legendre(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    GL8_NODES.iter().zip(GL8_WEIGHTS.iter()).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// `panels` equal Gauss-Legendre panels on `[lo, hi]`.
pub fn composite(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let width = (hi - lo) / panels as f64;
    (0..panels)
        .map(|k| {
            let a = lo + k as f64 * width;
            gauss_legendre(f, a, a + width)
        })
        .sum()
}

/// `∫_0^x f` for integrands that may have an algebraic singularity (in a
/// derivative) at the origin: panels are geometrically graded toward 0.
/// `breaks` are extra interior points where `f` is only Lipschitz.
pub fn integrate_from_origin(f: &impl Fn(f64) -> f64, x: f64, breaks: &[f64]) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let sign = x.signum();
    let end = x.abs();
    let g = |s: f64| f(sign * s);
    let mut cuts: Vec<f64> = breaks.iter().map(|b| b.abs()).filter(|&b| b > 0.0 && b < end).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    let first = cuts.first().copied().unwrap_or(end);
    // graded panels on (0, first]
    let mut total = 0.0;
    let levels = 48;
    let mut hi = first;
    for _ in 0..levels {
        let lo = 0.5 * hi;
        total += gauss_legendre(&g, lo, hi);
        hi = lo;
    }
    total += gauss_legendre(&g, 0.0, hi);
    let mut lo = first;
    for &c in cuts.iter().skip(1).chain(std::iter::once(&end)) {
        if c > lo {
            total += composite(&g, lo, c, 16);
            lo = c;
        }
    }
    sign * total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let f = |x: f64| 3.0 * x.powi(7) - x.powi(4) + 2.0;
        let exact = 3.0 / 8.0 - 1.0 / 5.0 + 2.0;
        assert!((gauss_legendre(&f, 0.0, 1.0) - exact).abs() < 1e-14);
    }

    #[test]
    fn graded_rule_handles_sqrt_singularity() {
        let f = |x: f64| x.abs().sqrt();
        let v = integrate_from_origin(&f, 2.0, &[]);
        assert!((v - 2.0 / 3.0 * 2.0f64.powf(1.5)).abs() < 1e-12);
        let v = integrate_from_origin(&f, -2.0, &[1.0]);
        assert!((v + 2.0 / 3.0 * 2.0f64.powf(1.5)).abs() < 1e-12);
    }
}
