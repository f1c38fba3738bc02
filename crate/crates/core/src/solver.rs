//! Numerical fastest-mixing solver and a brute-force grid oracle.
//!
//! The solver runs projected subgradient descent on `lambda_2` over the
//! symmetric edge flows `Q(e)`, `e = (i, j)` with `i < j`. The feasible set is
//! `{Q >= 0, sum_{e at i} Q(e) <= pi(i)}`; the self-loops take the rest.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{max_degree_chain, ReversibleChain};
use crate::error::{Error, Result};
use crate::graph::TransitionGraph;
use crate::linalg::{symmetric_eigen, SymmetricEigen};
use crate::spectral::{relaxation_time, spectrum};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Step at iteration `t` is `step * pi_min / sqrt(t)` along the unit subgradient.
    pub step: f64,
    pub projection_tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            step: 0.1,
            projection_tol: 1e-10,
            seed: 0,
        }
    }
}

impl SolverConfig {
    fn check(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.step > 0.0) || !(self.projection_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "solver needs max_iters > 0, step > 0 and projection_tol > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolverResult {
    pub chain: ReversibleChain,
    pub lambda2_star: f64,
    pub tau2_star: f64,
    pub iterations: usize,
    /// `|best lambda_2 - lambda_2 of the last iterate|`.
    pub certificate_gap: f64,
    /// Best `lambda_2` seen after each iteration.
    pub history: Vec<f64>,
}

struct Projector<'a> {
    graph: &'a TransitionGraph,
    incident: Vec<Vec<usize>>,
    tol: f64,
}

impl<'a> Projector<'a> {
    fn new(graph: &'a TransitionGraph, tol: f64) -> Self {
        let incident = (0..graph.node_count())
            .map(|i| {
                graph
                    .neighbors(i)
                    .iter()
                    .map(|&j| graph.edge_index(i, j).expect("neighbour"))
                    .collect()
            })
            .collect();
        Self {
            graph,
            incident,
            tol,
        }
    }

    /// Dykstra's alternating projection onto the orthant and the per-node
    /// halfspaces, followed by a clean-up that makes the point exactly feasible.
    fn project(&self, q: &mut [f64]) {
        const MAX_SWEEPS: usize = 1000;
        let pi = self.graph.pi();
        let n = pi.len();
        let mut orthant_corr = vec![0.0; q.len()];
        let mut node_corr = vec![0.0; n];
        for _ in 0..MAX_SWEEPS {
            let mut change: f64 = 0.0;
            for (x, c) in q.iter_mut().zip(&mut orthant_corr) {
                let y = *x + *c;
                let p = y.max(0.0);
                *c = y - p;
                change = change.max((p - *x).abs());
                *x = p;
            }
            for i in 0..n {
                let edges = &self.incident[i];
                if edges.is_empty() {
                    continue;
                }
                // The correction for a halfspace is a multiple of its normal.
                let k = edges.len() as f64;
                let sum: f64 = edges.iter().map(|&e| q[e]).sum::<f64>() + node_corr[i] * k;
                let shift = ((sum - pi[i]) / k).max(0.0);
                let delta = node_corr[i] - shift;
                for &e in edges {
                    q[e] += delta;
                }
                change = change.max(delta.abs());
                node_corr[i] = shift;
            }
            if change < self.tol {
                break;
            }
        }
        for x in q.iter_mut() {
            *x = x.max(0.0);
        }
        for i in 0..n {
            let sum: f64 = self.incident[i].iter().map(|&e| q[e]).sum();
            if sum > pi[i] {
                let scale = pi[i] / sum;
                for &e in &self.incident[i] {
                    q[e] *= scale;
                }
            }
        }
    }
}

/// Among the eigenvectors for the second eigenvalue (within `1e-9`), the one
/// whose sign-normalized absolute values are lexicographically largest.
fn second_eigenvector(eig: &SymmetricEigen) -> &[f64] {
    let l2 = eig.values[1];
    let key = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x.abs()).collect() };
    let mut best = &eig.vectors[1];
    for k in 2..eig.values.len() {
        if (eig.values[k] - l2).abs() > 1e-9 {
            break;
        }
        let cand = &eig.vectors[k];
        if key(cand)
            .iter()
            .zip(key(best).iter())
            .find(|(a, b)| a != b)
            .is_some_and(|(a, b)| a > b)
        {
            best = cand;
        }
    }
    best
}

fn lambda2_of(graph: &TransitionGraph, flows: &[f64]) -> Result<(f64, SymmetricEigen)> {
    let chain = ReversibleChain::from_edge_flows(graph.clone(), flows)?;
    let eig = symmetric_eigen(&chain.symmetrized())?;
    Ok((eig.values[1], eig))
}

pub fn solve_fastest_mixing(graph: &TransitionGraph, config: &SolverConfig) -> Result<SolverResult> {
    config.check()?;
    let n = graph.node_count();
    if n == 1 {
        let chain = ReversibleChain::from_edge_flows(graph.clone(), &[])?;
        return Ok(SolverResult {
            chain,
            lambda2_star: f64::NEG_INFINITY,
            tau2_star: 0.0,
            iterations: 0,
            certificate_gap: 0.0,
            history: Vec::new(),
        });
    }
    let pi = graph.pi();
    let projector = Projector::new(graph, config.projection_tol);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut q: Vec<f64> = max_degree_chain(graph)
        .edge_flows()
        .into_iter()
        .map(|x| x * (0.95 + 0.1 * rng.random::<f64>()))
        .collect();
    projector.project(&mut q);

    let scale = config.step * graph.pi_min();
    let mut best_q = q.clone();
    let mut best = f64::INFINITY;
    let mut last = f64::INFINITY;
    let mut history = Vec::with_capacity(config.max_iters);
    let mut iterations = 0;
    for t in 1..=config.max_iters {
        iterations = t;
        let (l2, eig) = lambda2_of(graph, &q)?;
        last = l2;
        if l2 < best {
            best = l2;
            best_q.copy_from_slice(&q);
        }
        history.push(best);
        let u = second_eigenvector(&eig);
        let x: Vec<f64> = u.iter().zip(pi).map(|(u, p)| u / p.sqrt()).collect();
        // Ascent direction of -lambda_2: d lambda_2 / dQ(i,j) = -(x_i - x_j)^2.
        let dir: Vec<f64> = graph
            .edges()
            .iter()
            .map(|&(i, j)| (x[i] - x[j]) * (x[i] - x[j]))
            .collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        let step = scale / (t as f64).sqrt() / norm;
        for (qe, d) in q.iter_mut().zip(&dir) {
            *qe += step * d;
        }
        projector.project(&mut q);
    }

    let chain = ReversibleChain::from_edge_flows(graph.clone(), &best_q)?.validated()?;
    let lambda2_star = spectrum(&chain)?.lambda2;
    Ok(SolverResult {
        chain,
        lambda2_star,
        tau2_star: relaxation_time(lambda2_star),
        iterations,
        certificate_gap: (best - last).abs(),
        history,
    })
}

/// Largest number of free edge flows the grid oracle accepts.
pub const GRID_MAX_VARS: usize = 4;
pub const GRID_MAX_RESOLUTION: usize = 200;

#[derive(Clone, Debug)]
pub struct GridResult {
    pub chain: ReversibleChain,
    pub lambda2: f64,
    pub flows: Vec<f64>,
    /// Largest grid step, measured as a transition probability `dQ / pi_min`.
    pub spacing: f64,
}

/// Exhaustive search over `Q(e) = k / resolution * min(pi(i), pi(j))`,
/// `k = 0..=resolution`, skipping infeasible points.
pub fn grid_oracle(graph: &TransitionGraph, resolution: usize) -> Result<GridResult> {
    let m = graph.edge_count();
    if m == 0 || m > GRID_MAX_VARS {
        return Err(Error::TooLarge {
            what: "grid oracle free variables",
            size: m,
            limit: GRID_MAX_VARS,
        });
    }
    if resolution == 0 || resolution > GRID_MAX_RESOLUTION {
        return Err(Error::InvalidParameter(format!(
            "grid resolution must be in 1..={GRID_MAX_RESOLUTION}"
        )));
    }
    let pi = graph.pi();
    let caps: Vec<f64> = graph.edges().iter().map(|&(i, j)| pi[i].min(pi[j])).collect();
    let mut idx = vec![0usize; m];
    let mut q = vec![0.0; m];
    let mut best: Option<(f64, Vec<f64>)> = None;
    'grid: loop {
        for (e, &k) in idx.iter().enumerate() {
            q[e] = caps[e] * k as f64 / resolution as f64;
        }
        let mut load = vec![0.0; pi.len()];
        for (&(i, j), &x) in graph.edges().iter().zip(&q) {
            load[i] += x;
            load[j] += x;
        }
        if load.iter().zip(pi).all(|(l, p)| *l <= p * (1.0 + 1e-12)) {
            let (l2, _) = lambda2_of(graph, &q)?;
            if best.as_ref().is_none_or(|(b, _)| l2 < *b) {
                best = Some((l2, q.clone()));
            }
        }
        for e in 0..m {
            idx[e] += 1;
            if idx[e] <= resolution {
                continue 'grid;
            }
            idx[e] = 0;
        }
        break;
    }
    let (lambda2, flows) = best.expect("the zero flow is feasible");
    let chain = ReversibleChain::from_edge_flows(graph.clone(), &flows)?.validated()?;
    let spacing = caps.iter().copied().fold(0.0, f64::max) / resolution as f64 / graph.pi_min();
    Ok(GridResult {
        chain,
        lambda2,
        flows,
        spacing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn two_nodes_reach_the_flip() {
        let g = TransitionGraph::uniform(2, [(0, 1)]).unwrap();
        let r = solve_fastest_mixing(&g, &SolverConfig::default()).unwrap();
        assert!((r.lambda2_star + 1.0).abs() < 1e-12);
        assert!((r.tau2_star - 0.5).abs() < 1e-12);
    }

    #[test]
    fn history_is_monotone() {
        let g = families::path(4).unwrap();
        let cfg = SolverConfig {
            max_iters: 300,
            ..SolverConfig::default()
        };
        let r = solve_fastest_mixing(&g, &cfg).unwrap();
        assert_eq!(r.history.len(), 300);
        assert!(r.history.windows(2).all(|h| h[1] <= h[0]));
        assert!((r.history[299] - r.lambda2_star).abs() < 1e-9);
    }

    #[test]
    fn projection_is_feasible() {
        let g = families::knkn(3).unwrap();
        let p = Projector::new(&g, 1e-10);
        let mut q = vec![0.3; g.edge_count()];
        q[0] = -0.1;
        p.project(&mut q);
        assert!(q.iter().all(|&x| x >= 0.0));
        for i in 0..6 {
            let s: f64 = p.incident[i].iter().map(|&e| q[e]).sum();
            assert!(s <= g.pi()[i] + 1e-15);
        }
    }

    #[test]
    fn projection_fixes_feasible_points() {
        let g = families::cycle(5).unwrap();
        let p = Projector::new(&g, 1e-12);
        let mut q = vec![0.05; 5];
        p.project(&mut q);
        assert!(q.iter().all(|&x| (x - 0.05).abs() < 1e-15));
    }

    #[test]
    fn grid_on_two_nodes() {
        let g = TransitionGraph::uniform(2, [(0, 1)]).unwrap();
        let r = grid_oracle(&g, 10).unwrap();
        assert!((r.lambda2 + 1.0).abs() < 1e-12);
        assert_eq!(r.flows, vec![0.5]);
    }

    #[test]
    fn grid_limits() {
        assert!(grid_oracle(&families::cycle(5).unwrap(), 10).is_err());
        assert!(grid_oracle(&families::path(3).unwrap(), 201).is_err());
    }
}
