//! Subgradient solver against exhaustive grid search on small weighted graphs.

use fastmix::solver::{grid_oracle, solve_fastest_mixing, SolverConfig};
use fastmix::TransitionGraph;

fn main() -> fastmix::Result<()> {
    let path = TransitionGraph::new(3, [(0, 1), (1, 2)], vec![0.5, 0.3, 0.2])?;
    let star = TransitionGraph::uniform(4, [(0, 1), (0, 2), (0, 3)])?;
    for (name, g, resolution) in [("weighted path", path, 200), ("star", star, 60)] {
        let r = solve_fastest_mixing(&g, &SolverConfig::default())?;
        let grid = grid_oracle(&g, resolution)?;
        println!(
            "{name}: solver lambda2 {:.6} after {} iterations, grid {:.6} (spacing {:.4})",
            r.lambda2_star, r.iterations, grid.lambda2, grid.spacing
        );
        for i in 0..g.node_count() {
            let row: Vec<String> = (0..g.node_count()).map(|j| format!("{:.3}", r.chain.prob(i, j))).collect();
            println!("  {}", row.join(" "));
        }
    }
    Ok(())
}
