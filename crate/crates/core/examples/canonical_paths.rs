//! Shortest-path congestion, before and after equalizing the edge flows.

use fastmix::chain::{edge_flow, max_degree_chain};
use fastmix::families;
use fastmix::spectral::spectrum;
use fastmix::upper::{cheeger_upper_bound, congestion, equalize_congestion, shortest_path_system};

fn main() -> fastmix::Result<()> {
    let g = families::knkn(4)?;
    let paths = shortest_path_system(&g);
    println!("path 1 -> 6: {:?}", paths.path(1, 6));

    let md = congestion(&max_degree_chain(&g), &paths)?;
    println!("max-degree chain: congestion {:.4} at {:?}", md.rho_bar, md.argmax);

    let eq = equalize_congestion(&g, &paths)?;
    println!("equalized chain:  congestion {:.4}, levels {:?}", eq.rho_bar, eq.levels);
    println!("  bridge flow {:.6}, clique flow {:.6}", edge_flow(&eq.chain, 0, 4), edge_flow(&eq.chain, 0, 1));
    println!("  relaxation time {:.4}", spectrum(&eq.chain)?.relaxation_time);

    let ch = cheeger_upper_bound(&g)?;
    println!("Cheeger-type bound {:.2} (expansion {:.4})", ch.bound, ch.upsilon);
    Ok(())
}
