//! Regularized problems `(A_n, clamp(xi), sigma_n)` approach the limit problem:
//! the time-integrated distance to the finest run shrinks with `n`.

use pme_mixer::cli::{run_stability_sweep, ExperimentConfig, ExperimentKind, FamilyId, Report};

fn main() -> pme_mixer::Result<()> {
    for family in [FamilyId::Off, FamilyId::Linear] {
        let mut config = ExperimentConfig::defaults(ExperimentKind::Stability);
        config.noise.family = family;
        let mut report = Report::new(&config);
        let d = run_stability_sweep(&config, &[4, 8, 16, 32], 1, &mut report)?;
        println!("{family:?}: D(n) = {:?}", d.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>());
        for c in &report.verdicts {
            println!("  {}: {} ({:.3e})", c.name, if c.pass { "pass" } else { "fail" }, c.observed);
        }
    }
    Ok(())
}
