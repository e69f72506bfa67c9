//! The Dirichlet weight `-w'' = 1` on an interval and its `L^p` norms.

use pme_mixer::domain::{build_grid, solve_weight};

fn main() -> pme_mixer::Result<()> {
    let grid = build_grid(0.0, 2.0, 199)?;
    let w = solve_weight(&grid).with_norms(&[3.0])?;
    println!("max w = {:.6} (exact L^2/8 = {:.6})", w.max(), 0.5);
    for p in [1.0, 1.5, 2.0, 3.0] {
        println!("|w|_L{p} = {:.10}", w.lp_norm(p)?);
    }
    Ok(())
}
