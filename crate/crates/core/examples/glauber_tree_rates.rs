//! Site rates for Glauber dynamics of the Ising model on a complete tree,
//! compared with uniform rates on the exact configuration chain.

use fastmix::glauber::{build_glauber_chain, optimize_rates, RateVector, SpinSystem};
use fastmix::spectral::spectrum;
use fastmix::tree::{bv_bounds, node_widths, optimal_rates, TreeSpec};

fn main() -> fastmix::Result<()> {
    let beta = 0.4;
    let tree = TreeSpec::new(2, 2)?;
    let sys = SpinSystem::ising_tree(&tree, beta)?;

    let widths = node_widths(&tree);
    let bounds = bv_bounds(&tree, beta)?;
    let (rates, claimed) = optimal_rates(&tree, beta)?;
    println!("widths {:?}", widths.widths);
    println!("rates  {:?}", rates.rho.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>());

    let uniform = spectrum(&build_glauber_chain(&sys, &RateVector::uniform(tree.node_count()))?)?;
    let weighted = spectrum(&build_glauber_chain(&sys, &rates)?)?;
    println!("uniform rates: tau2 {:.3} <= max B_v {:.3}", uniform.relaxation_time, bounds.max());
    println!("B_v rates:     tau2 {:.3} <= sum B_v / |V| {:.3}", weighted.relaxation_time, claimed);

    let best = optimize_rates(&sys, 300)?;
    println!("optimized:     tau2 {:.3}", best.tau2);
    Ok(())
}
