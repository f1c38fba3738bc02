//! Geometric grids: nodes of `Z_m^d` joined within distance `k` per coordinate.

use fastmix::chain::max_degree_chain;
use fastmix::families;
use fastmix::lower::{embedding_bound, geometric_embedding};
use fastmix::solver::{solve_fastest_mixing, SolverConfig};
use fastmix::spectral::spectrum;

fn main() -> fastmix::Result<()> {
    for (m, k, d) in [(6, 1, 1), (8, 2, 1), (9, 3, 1), (6, 2, 2)] {
        let g = families::geometric(m, k, d)?;
        let lb = embedding_bound(&g, &geometric_embedding(m, k, d)?)?;
        let md = spectrum(&max_degree_chain(&g))?.relaxation_time;
        let tau = solve_fastest_mixing(&g, &SolverConfig::default())?.tau2_star;
        println!(
            "m={m} k={k} d={d}: {} states, bound {lb:.4} <= solver {tau:.4}, max-degree chain {md:.4}",
            g.node_count()
        );
    }
    Ok(())
}
