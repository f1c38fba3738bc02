//! Exhaustive vertex expansion and the two-point embedding built from the cut.

use fastmix::families;
use fastmix::lower::{expansion_lower_bound, vertex_expansion_over};

fn main() -> fastmix::Result<()> {
    for (name, g) in [
        ("cycle(10)", families::cycle(10)?),
        ("knkn(5)", families::knkn(5)?),
        ("torus(4,2)", families::torus(4, 2)?),
    ] {
        let x = expansion_lower_bound(&g)?;
        println!(
            "{name:<11} upsilon {:.4} at {:?}, bound {:.4} (two-point value {:.4})",
            x.expansion.upsilon, x.expansion.subset, x.bound, x.two_point_value
        );
    }

    // Beyond the exhaustive limit, search a chosen family of cuts instead.
    let g = families::cycle(40)?;
    let arcs: Vec<Vec<usize>> = (1..=20).map(|len| (0..len).collect()).collect();
    let x = vertex_expansion_over(&g, &arcs)?;
    println!("cycle(40) over arcs: upsilon {:.4}, |S| = {}", x.upsilon, x.subset.len());
    Ok(())
}
