//! The lower bound on `|A(u) - A(v)|`, the ODE comparison, the entropy
//! approximations `eta_delta` and the vanishing of `G_alpha`.

use pme_mixer::analysis::{eta_delta, lemma_suite, vanishing_schedule, GAlpha, LemmaSuiteOptions};

fn main() -> pme_mixer::Result<()> {
    let checks = lemma_suite(&LemmaSuiteOptions { pairs: 100_000, ..Default::default() })?;
    for c in &checks {
        println!("{:<5} {:<40} {:.3e}", if c.pass { "ok" } else { "FAIL" }, c.name, c.observed);
    }
    let e = eta_delta(0.1, 0.03)?;
    println!("eta_0.1(0.03) = {:.6}, eta' = {:.4}, eta'' = {:.4}", e.value, e.first, e.second);
    let (nu, alpha) = vanishing_schedule(2.0, 1.0)?;
    let g = GAlpha::new(0.5, 1.0, alpha, 2.0)?;
    for eps in [1e-1, 1e-2, 1e-3] {
        println!("G along delta = eps^(2 nu), eps = {eps:e}: {:.3e}", g.schedule(nu, eps)?);
    }
    Ok(())
}
