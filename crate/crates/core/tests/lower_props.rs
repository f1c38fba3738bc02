mod common;

use proptest::prelude::*;
use rand::Rng;

use fastmix::chain::symmetric_walk;
use fastmix::families;
use fastmix::graph::TransitionGraph;
use fastmix::lower::{
    cycle_embedding, embedding_bound, expansion_lower_bound, geometric_embedding, knkn_embedding,
    specified_chain_bound, torus_embedding, two_point_embedding, vertex_expansion, Embedding,
};
use fastmix::solver::{solve_fastest_mixing, SolverConfig};
use fastmix::spectral::spectrum;
use fastmix::Error;

use common::{fixed, graph, graph_and_chain, rng};

/// `pi(S) pi(S^c) / min(pi(dS), pi(dS^c))` computed from scratch.
fn two_point_oracle(g: &TransitionGraph, subset: &[usize]) -> f64 {
    let n = g.node_count();
    let inside: Vec<bool> = (0..n).map(|i| subset.contains(&i)).collect();
    let pi = g.pi();
    let (mut in_s, mut inner, mut outer) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let crosses = g.edges().iter().any(|&(a, b)| {
            (a == i || b == i) && inside[a] != inside[b]
        });
        if inside[i] {
            in_s += pi[i];
            if crosses {
                inner += pi[i];
            }
        } else if crosses {
            outer += pi[i];
        }
    }
    in_s * (1.0 - in_s) / inner.min(outer)
}

fn centered(pi: &[f64], mut x: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let dim = x[0].len();
    for k in 0..dim {
        let mean: f64 = pi.iter().zip(&x).map(|(p, v)| p * v[k]).sum();
        for v in &mut x {
            v[k] -= mean;
        }
    }
    x
}

#[test]
fn analytic_embeddings_sit_below_the_solver() {
    let cases: Vec<(TransitionGraph, Embedding)> = vec![
        (families::knkn(3).unwrap(), knkn_embedding(3).unwrap()),
        (families::knkn(4).unwrap(), knkn_embedding(4).unwrap()),
        (families::knkn(5).unwrap(), knkn_embedding(5).unwrap()),
        (families::cycle(5).unwrap(), cycle_embedding(5).unwrap()),
        (families::cycle(8).unwrap(), cycle_embedding(8).unwrap()),
        (families::torus(3, 2).unwrap(), torus_embedding(3, 2).unwrap()),
        (families::geometric(8, 2, 1).unwrap(), geometric_embedding(8, 2, 1).unwrap()),
        (families::geometric(9, 3, 1).unwrap(), geometric_embedding(9, 3, 1).unwrap()),
    ];
    for (g, e) in cases {
        let lb = embedding_bound(&g, &e).unwrap();
        let tau = solve_fastest_mixing(&g, &SolverConfig::default()).unwrap().tau2_star;
        assert!(lb <= tau * (1.0 + 1e-6), "{lb} > {tau} on {g:?}");
    }
}

#[test]
fn cycle_embedding_matches_the_walk() {
    for n in 3..=16 {
        let g = families::cycle(n).unwrap();
        let e = cycle_embedding(n).unwrap();
        let walk = symmetric_walk(&g).unwrap();
        let tau = spectrum(&walk).unwrap().relaxation_time;
        let lb = embedding_bound(&g, &e).unwrap();
        let specified = specified_chain_bound(&walk, &e.vectors).unwrap();
        assert!((lb - tau).abs() <= 1e-9 * tau, "n = {n}: {lb} vs {tau}");
        assert!((specified - tau).abs() <= 1e-9 * tau);
    }
}

#[test]
fn specified_chain_bound_below_tau() {
    for k in 0..100u64 {
        let (g, chain) = graph_and_chain(k, 2 + (k as usize) % 8, k % 2 == 0);
        let tau = spectrum(&chain).unwrap().relaxation_time;
        let mut r = rng(500 + k);
        let dim = 1 + (k as usize) % 3;
        let raw = (0..g.node_count())
            .map(|_| (0..dim).map(|_| r.random::<f64>() - 0.5).collect())
            .collect();
        let x = centered(g.pi(), raw);
        match specified_chain_bound(&chain, &x) {
            Ok(b) => assert!(b <= tau + 1e-9 * tau.max(1.0), "chain {k}: {b} > {tau}"),
            Err(Error::DegenerateEmbedding) => {}
            Err(e) => panic!("chain {k}: {e}"),
        }
    }
}

#[test]
fn uncentered_vectors_rejected() {
    let (g, chain) = graph_and_chain(1, 5, false);
    let x = vec![vec![1.0]; g.node_count()];
    assert!(matches!(
        specified_chain_bound(&chain, &x),
        Err(Error::InfeasibleEmbedding(_))
    ));
}

proptest! {
    #![proptest_config(fixed(48))]

    #[test]
    fn two_point_identity(seed in any::<u64>(), n in 2usize..11, mask in 1u64..1024) {
        let g = graph(seed, n, true);
        let full = (1u64 << n) - 1;
        let m = mask & full;
        prop_assume!(m != 0 && m != full);
        let subset: Vec<usize> = (0..n).filter(|i| m >> i & 1 == 1).collect();
        let (e, value) = two_point_embedding(&g, &subset).unwrap();
        prop_assert!(e.check(&g).is_ok());
        prop_assert!((e.spread(g.pi()) - value).abs() <= 1e-9 * value.max(1.0));
        let oracle = two_point_oracle(&g, &subset);
        prop_assert!((value - oracle).abs() <= 1e-9 * oracle.max(1.0), "{} vs {}", value, oracle);
    }

    #[test]
    fn expansion_bound_is_sound(seed in any::<u64>(), n in 2usize..9, weighted in any::<bool>()) {
        let g = graph(seed, n, weighted);
        let x = expansion_lower_bound(&g).unwrap();
        prop_assert!(x.bound <= x.two_point_value * (1.0 + 1e-12));
        prop_assert!(embedding_bound(&g, &x.embedding).is_ok());
        let tau = solve_fastest_mixing(&g, &SolverConfig { max_iters: 1500, ..SolverConfig::default() })
            .unwrap()
            .tau2_star;
        prop_assert!(x.bound <= tau * (1.0 + 1e-6), "{} > {}", x.bound, tau);
    }

    #[test]
    fn expansion_minimizer_is_minimal(seed in any::<u64>(), n in 2usize..9) {
        let g = graph(seed, n, true);
        let best = vertex_expansion(&g).unwrap();
        let pi = g.pi();
        for mask in 1u64..(1 << n) - 1 {
            let inside = |i: usize| mask >> i & 1 == 1;
            let ps: f64 = (0..n).filter(|&i| inside(i)).map(|i| pi[i]).sum();
            if ps > 0.5 + 1e-12 {
                continue;
            }
            let boundary: f64 = (0..n)
                .filter(|&i| !inside(i) && g.neighbors(i).iter().any(|&j| inside(j)))
                .map(|i| pi[i])
                .sum();
            prop_assert!(best.upsilon <= boundary / ps * (1.0 + 1e-12));
        }
    }
}
