mod common;

use proptest::prelude::*;

use fastmix::chain::{edge_flow, max_degree_chain, validate_chain};
use fastmix::families;
use fastmix::solver::{solve_fastest_mixing, SolverConfig};
use fastmix::spectral::spectrum;
use fastmix::upper::{
    cheeger_upper_bound, congestion, edge_loads, equalize_congestion, shortest_path_system,
};

use common::{fixed, graph, graph_and_chain};

/// BFS distances from `s`.
fn distances(g: &fastmix::TransitionGraph, s: usize) -> Vec<usize> {
    let mut d = vec![usize::MAX; g.node_count()];
    d[s] = 0;
    let mut queue = std::collections::VecDeque::from([s]);
    while let Some(i) = queue.pop_front() {
        for &j in g.neighbors(i) {
            if d[j] == usize::MAX {
                d[j] = d[i] + 1;
                queue.push_back(j);
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(fixed(50))]

    #[test]
    fn congestion_dominates_tau(seed in any::<u64>(), n in 2usize..10, weighted in any::<bool>()) {
        let (g, chain) = graph_and_chain(seed, n, weighted);
        let paths = shortest_path_system(&g);
        for c in [chain, max_degree_chain(&g), equalize_congestion(&g, &paths).unwrap().chain] {
            let tau = spectrum(&c).unwrap().relaxation_time;
            let rho = congestion(&c, &paths).unwrap().rho_bar;
            prop_assert!(tau <= rho * (1.0 + 1e-9), "{} > {}", tau, rho);
        }
    }

    #[test]
    fn equalization_improves_on_max_degree(seed in any::<u64>(), n in 2usize..10, weighted in any::<bool>()) {
        let g = graph(seed, n, weighted);
        let paths = shortest_path_system(&g);
        let eq = equalize_congestion(&g, &paths).unwrap();
        let md = congestion(&max_degree_chain(&g), &paths).unwrap().rho_bar;
        prop_assert!(validate_chain(&eq.chain).is_empty());
        prop_assert!(eq.rho_bar <= md * (1.0 + 1e-12));
        prop_assert!(eq.levels.windows(2).all(|w| w[0] >= w[1] * (1.0 - 1e-12)));
        prop_assert!((congestion(&eq.chain, &paths).unwrap().rho_bar - eq.rho_bar).abs() <= 1e-9 * eq.rho_bar);
        // No chain beats the first level: every node must route its load through its own budget.
        let w = edge_loads(&g, &paths);
        let floor = (0..n)
            .map(|i| {
                g.edges().iter().zip(&w).filter(|((a, b), _)| *a == i || *b == i).map(|(_, x)| x).sum::<f64>()
                    / g.pi()[i]
            })
            .fold(0.0, f64::max);
        prop_assert!((eq.levels[0] - floor).abs() <= 1e-9 * floor);
    }

    #[test]
    fn shortest_paths_are_shortest(seed in any::<u64>(), n in 2usize..12) {
        let g = graph(seed, n, false);
        let paths = shortest_path_system(&g);
        for x in 0..n {
            let d = distances(&g, x);
            for y in 0..n {
                let p = paths.path(x, y);
                prop_assert_eq!(p.len() - 1, d[y]);
                prop_assert_eq!(p[0], x);
                prop_assert_eq!(*p.last().unwrap(), y);
                prop_assert!(p.windows(2).all(|e| g.has_edge(e[0], e[1])));
                let mut back = paths.path(y, x);
                back.reverse();
                prop_assert_eq!(back, p);
            }
        }
    }

    #[test]
    fn cheeger_dominates_solver(seed in any::<u64>(), n in 2usize..9, weighted in any::<bool>()) {
        let g = graph(seed, n, weighted);
        let ub = cheeger_upper_bound(&g).unwrap().bound;
        let tau = solve_fastest_mixing(&g, &SolverConfig { max_iters: 1500, ..SolverConfig::default() })
            .unwrap()
            .tau2_star;
        prop_assert!(tau <= ub * (1.0 + 1e-9), "{} > {}", tau, ub);
    }
}

#[test]
fn knkn_equalized_chain() {
    for n in 3..=20 {
        let g = families::knkn(n).unwrap();
        let eq = equalize_congestion(&g, &shortest_path_system(&g)).unwrap();
        let nf = n as f64;
        let denom = 2.0 * nf * (2.0 * nf - 5.0 / 3.0);
        let bridge = edge_flow(&eq.chain, 0, n);
        let spoke = edge_flow(&eq.chain, 0, 1);
        assert!((bridge - (nf - 2.0 / 3.0) / denom).abs() <= 1e-12, "n = {n}: bridge {bridge}");
        assert!((spoke - 1.0 / denom).abs() <= 1e-12, "n = {n}: spoke {spoke}");
        assert!((edge_flow(&eq.chain, n, n + 1) - spoke).abs() <= 1e-15);
        let tau = spectrum(&eq.chain).unwrap().relaxation_time;
        let bound = 3.0 * nf * (1.0 - 5.0 / (6.0 * nf));
        assert!(tau <= bound + 1e-6, "n = {n}: {tau} > {bound}");
        assert!(eq.rho_bar <= bound + 1e-6, "n = {n}: congestion {} > {bound}", eq.rho_bar);
    }
}
