//! Recursive majority on the ternary Ising tree: the cut behind the
//! conductance lower bound, exactly on the 13-site tree.

use fastmix::tree::{majority_cut_bound, recursive_majority, TreeSpec};

fn main() -> fastmix::Result<()> {
    let small = TreeSpec::new(3, 2)?;
    let mut sigma = vec![-1i8; small.node_count()];
    for leaf in small.leaves().take(5) {
        sigma[leaf] = 1;
    }
    println!("majority with five + leaves: {:+}", recursive_majority(&small, &sigma)?);

    for beta in [0.5, 1.0, 2.0] {
        let m = majority_cut_bound(&small, beta)?;
        let exact = m.exact.as_ref().expect("13 sites are enumerated");
        println!(
            "r=2 beta={beta}: eps {:.2e}, conductance {:.3e}, flip bound {:.3e}",
            m.epsilon, exact.phi_s, m.flip_bound
        );
    }
    for r in [4, 6, 8] {
        let m = majority_cut_bound(&TreeSpec::new(3, r)?, 2.0)?;
        println!(
            "r={r} beta=2: tau2* >= {:.3e}{}",
            m.tau2_star_lower,
            if m.vacuous { " (vacuous)" } else { "" }
        );
    }
    Ok(())
}
