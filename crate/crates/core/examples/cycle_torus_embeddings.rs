//! Circle embeddings of cycles and tori; on these the bound is attained by the
//! symmetric random walk.

use fastmix::chain::symmetric_walk;
use fastmix::families;
use fastmix::lower::{cycle_embedding, embedding_bound, torus_embedding};
use fastmix::spectral::spectrum;

fn main() -> fastmix::Result<()> {
    for n in [4, 5, 8, 12, 16] {
        let g = families::cycle(n)?;
        let lb = embedding_bound(&g, &cycle_embedding(n)?)?;
        let walk = spectrum(&symmetric_walk(&g)?)?.relaxation_time;
        println!("cycle n={n:<2}     bound {lb:.6}  walk {walk:.6}");
    }
    for (m, d) in [(3, 2), (4, 2), (5, 2), (3, 3)] {
        let g = families::torus(m, d)?;
        let lb = embedding_bound(&g, &torus_embedding(m, d)?)?;
        let walk = spectrum(&symmetric_walk(&g)?)?.relaxation_time;
        println!("torus m={m} d={d}  bound {lb:.6}  walk {walk:.6}");
    }
    Ok(())
}
