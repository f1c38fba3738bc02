//! Lower bound, solver and equalized-chain upper bound on two joined cliques.
//!
//! Run with `cargo run --release --example knkn_sandwich -- 8`.

use fastmix::families;
use fastmix::lower::{embedding_bound, knkn_embedding};
use fastmix::solver::{solve_fastest_mixing, SolverConfig};
use fastmix::upper::{equalize_congestion, shortest_path_system};

fn main() -> fastmix::Result<()> {
    let max_n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    println!("{:>3} {:>10} {:>10} {:>10} {:>7}", "n", "lower", "solver", "upper", "ratio");
    for n in 3..=max_n {
        let g = families::knkn(n)?;
        let lb = embedding_bound(&g, &knkn_embedding(n)?)?;
        let tau = solve_fastest_mixing(&g, &SolverConfig::default())?.tau2_star;
        let ub = equalize_congestion(&g, &shortest_path_system(&g))?.rho_bar;
        println!("{n:>3} {lb:>10.4} {tau:>10.4} {ub:>10.4} {:>7.4}", ub / lb);
    }
    Ok(())
}
