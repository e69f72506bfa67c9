//! Checks the structural assumptions on `A` and on each noise family, and
//! shows a deliberately bad declaration being caught.

use pme_mixer::model::{validate_assumption_a, validate_noise, NoiseFamily, NoiseModel, Nonlinearity};

fn main() -> pme_mixer::Result<()> {
    let good = Nonlinearity::pure_power(2.0, 2.0)?;
    let bad = Nonlinearity::pure_power(2.0, 0.1)?;
    for (label, nl) in [("K = 2", good), ("K = 0.1", bad)] {
        let rep = validate_assumption_a(&nl, 10.0, 200)?;
        println!("pure power m=2, {label}: {}", if rep.passed() { "ok" } else { "rejected" });
        for c in rep.failures() {
            println!("  clause {} needs {:.3}, declared {:.3}", c.name, c.tightest_constant, c.declared_constant);
        }
    }
    for family in [
        NoiseFamily::Additive,
        NoiseFamily::Linear,
        NoiseFamily::Holder { kappa: 0.1 },
        NoiseFamily::Branching { kappa: 0.1 },
    ] {
        let nm = NoiseModel::new(family, 4, 0.5, 2.0, (0.0, 1.0), 2.0)?;
        let rep = validate_noise(&nm, 10.0, 200)?;
        println!("{family:?}: K = {:.3}, passed = {}", nm.k(), rep.passed());
    }
    Ok(())
}
