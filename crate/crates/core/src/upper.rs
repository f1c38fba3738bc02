//! Upper bounds: canonical-path congestion, congestion equalization of the
//! edge flows, and the Cheeger-type bound through the max-degree chain.

use serde::Serialize;

use crate::chain::{edge_flow, max_neighborhood_mass, validate_chain, ReversibleChain};
use crate::error::{Error, Result};
use crate::graph::TransitionGraph;
use crate::lower::vertex_expansion;

/// One simple path per unordered node pair.
///
/// The path of `(x, y)` with `x < y` is stored from `x` to `y`; the path of
/// `(y, x)` is its reverse.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSystem {
    n: usize,
    paths: Vec<Vec<usize>>,
}

fn pair_index(n: usize, x: usize, y: usize) -> usize {
    debug_assert!(x < y && y < n);
    x * (2 * n - x - 1) / 2 + (y - x - 1)
}

impl PathSystem {
    /// Builds a system from paths given for every pair `x < y` in order
    /// `(0,1), (0,2), ..., (n-2,n-1)`, each a node sequence from `x` to `y`.
    pub fn new(graph: &TransitionGraph, paths: Vec<Vec<usize>>) -> Result<Self> {
        let n = graph.node_count();
        if paths.len() != n * (n - 1) / 2 {
            return Err(Error::DimensionMismatch {
                expected: n * (n - 1) / 2,
                found: paths.len(),
            });
        }
        let mut k = 0;
        for x in 0..n {
            for y in (x + 1)..n {
                let p = &paths[k];
                k += 1;
                if p.first() != Some(&x) || p.last() != Some(&y) {
                    return Err(Error::InvalidParameter(format!(
                        "path for ({x},{y}) has wrong endpoints"
                    )));
                }
                let mut seen = p.clone();
                seen.sort_unstable();
                if seen.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::InvalidParameter(format!(
                        "path for ({x},{y}) repeats a node"
                    )));
                }
                if let Some(w) = p.windows(2).find(|w| graph.edge_index(w[0], w[1]).is_none()) {
                    return Err(Error::InvalidParameter(format!(
                        "path for ({x},{y}) uses non-edge ({},{})",
                        w[0], w[1]
                    )));
                }
            }
        }
        Ok(Self { n, paths })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Node sequence from `x` to `y`.
    pub fn path(&self, x: usize, y: usize) -> Vec<usize> {
        if x == y {
            return vec![x];
        }
        let p = &self.paths[pair_index(self.n, x.min(y), x.max(y))];
        if x < y {
            p.clone()
        } else {
            p.iter().rev().copied().collect()
        }
    }

    /// Number of edges on the path between `x` and `y`.
    pub fn length(&self, x: usize, y: usize) -> usize {
        if x == y {
            0
        } else {
            self.paths[pair_index(self.n, x.min(y), x.max(y))].len() - 1
        }
    }

    /// `(x, y, path)` for every pair `x < y`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &[usize])> {
        let n = self.n;
        (0..n)
            .flat_map(move |x| ((x + 1)..n).map(move |y| (x, y)))
            .zip(&self.paths)
            .map(|((x, y), p)| (x, y, p.as_slice()))
    }
}

/// Shortest paths; among shortest paths the lexicographically smallest node
/// sequence from the smaller endpoint is chosen.
pub fn shortest_path_system(graph: &TransitionGraph) -> PathSystem {
    let n = graph.node_count();
    let mut paths = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let dist: Vec<Vec<usize>> = (0..n).map(|y| graph.bfs_distances(y)).collect();
    for x in 0..n {
        for y in (x + 1)..n {
            let to_y = &dist[y];
            let mut path = vec![x];
            let mut cur = x;
            while cur != y {
                cur = *graph
                    .neighbors(cur)
                    .iter()
                    .find(|&&v| to_y[v] + 1 == to_y[cur])
                    .expect("connected graph");
                path.push(cur);
            }
            paths.push(path);
        }
    }
    PathSystem { n, paths }
}

/// `W(e) = sum_{x<y : e in path(x,y)} pi(x) pi(y) |path(x,y)|`, aligned with
/// `graph.edges()`.
pub fn edge_loads(graph: &TransitionGraph, paths: &PathSystem) -> Vec<f64> {
    let pi = graph.pi();
    let mut w = vec![0.0; graph.edge_count()];
    for (x, y, p) in paths.iter() {
        let load = pi[x] * pi[y] * (p.len() - 1) as f64;
        for step in p.windows(2) {
            w[graph.edge_index(step[0], step[1]).expect("path edge")] += load;
        }
    }
    w
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeLoad {
    pub i: usize,
    pub j: usize,
    pub w: f64,
    pub q: f64,
    /// `W / Q`, `+inf` when the edge is loaded but carries no flow.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CongestionReport {
    pub edges: Vec<EdgeLoad>,
    /// Maximum ratio, an upper bound on the relaxation time.
    pub rho_bar: f64,
    /// First edge attaining `rho_bar`.
    pub argmax: Option<(usize, usize)>,
    /// First loaded edge with zero flow, if any.
    pub blocked: Option<(usize, usize)>,
}

pub fn congestion(chain: &ReversibleChain, paths: &PathSystem) -> Result<CongestionReport> {
    let report = validate_chain(chain);
    if !report.is_empty() {
        return Err(Error::InvalidChain(report));
    }
    let graph = chain.graph();
    if paths.node_count() != graph.node_count() {
        return Err(Error::DimensionMismatch {
            expected: graph.node_count(),
            found: paths.node_count(),
        });
    }
    let loads = edge_loads(graph, paths);
    let mut edges = Vec::with_capacity(loads.len());
    let mut rho_bar = 0.0;
    let mut argmax = None;
    let mut blocked = None;
    for (&(i, j), &w) in graph.edges().iter().zip(&loads) {
        let q = edge_flow(chain, i, j);
        let ratio = if w == 0.0 {
            0.0
        } else if q > 0.0 {
            w / q
        } else {
            blocked.get_or_insert((i, j));
            f64::INFINITY
        };
        if ratio > rho_bar || argmax.is_none() && w > 0.0 {
            rho_bar = ratio;
            argmax = Some((i, j));
        }
        edges.push(EdgeLoad { i, j, w, q, ratio });
    }
    Ok(CongestionReport {
        edges,
        rho_bar,
        argmax,
        blocked,
    })
}

#[derive(Clone, Debug)]
pub struct Equalized {
    pub chain: ReversibleChain,
    /// Congestion of `chain` under the path system used.
    pub rho_bar: f64,
    /// Congestion level fixed at each round, non-increasing.
    pub levels: Vec<f64>,
    /// Always true: the filling terminates after at most `n` rounds.
    pub converged: bool,
}

/// Edge flows minimizing the congestion for a fixed path system.
///
/// Progressive filling: the node with the largest level
/// `sum_{free e at i} W(e) / remaining budget(i)` fixes all its free edges at
/// `Q(e) = W(e) / level`, which is charged against both endpoints' budgets.
/// Unloaded edges carry no flow and each self-loop absorbs the residual budget.
/// The first level equals `max_i sum_{e at i} W(e) / pi(i)`, which is the
/// smallest congestion any chain can have with these paths.
pub fn equalize_congestion(graph: &TransitionGraph, paths: &PathSystem) -> Result<Equalized> {
    let n = graph.node_count();
    if paths.node_count() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: paths.node_count(),
        });
    }
    let loads = edge_loads(graph, paths);
    let mut budget = graph.pi().to_vec();
    let mut free: Vec<bool> = loads.iter().map(|&w| w > 0.0).collect();
    let mut flows = vec![0.0; loads.len()];
    let incident: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            graph
                .neighbors(i)
                .iter()
                .map(|&j| graph.edge_index(i, j).expect("neighbour"))
                .collect()
        })
        .collect();
    let mut done = vec![false; n];
    let mut levels = Vec::new();
    loop {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| !done[i]) {
            let load: f64 = incident[i].iter().filter(|&&e| free[e]).map(|&e| loads[e]).sum();
            if load == 0.0 {
                continue;
            }
            let level = load / budget[i].max(f64::MIN_POSITIVE);
            if best.is_none_or(|(_, l)| level > l) {
                best = Some((i, level));
            }
        }
        let Some((i, level)) = best else { break };
        done[i] = true;
        levels.push(level);
        for &e in &incident[i] {
            if free[e] {
                free[e] = false;
                flows[e] = loads[e] / level;
                let (a, b) = graph.edges()[e];
                budget[a] -= flows[e];
                budget[b] -= flows[e];
            }
        }
    }
    let chain = ReversibleChain::from_edge_flows(graph.clone(), &flows)?.validated()?;
    let rho_bar = congestion(&chain, paths)?.rho_bar;
    Ok(Equalized {
        chain,
        rho_bar,
        levels,
        converged: true,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheegerBound {
    pub pi_star: f64,
    pub pi_min: f64,
    pub upsilon: f64,
    /// `(pi_* / pi_0)^2 * 2 / Upsilon^2`.
    pub bound: f64,
}

pub fn cheeger_upper_bound(graph: &TransitionGraph) -> Result<CheegerBound> {
    let upsilon = vertex_expansion(graph)?.upsilon;
    let pi_star = max_neighborhood_mass(graph);
    let pi_min = graph.pi_min();
    let ratio = pi_star / pi_min;
    Ok(CheegerBound {
        pi_star,
        pi_min,
        upsilon,
        bound: ratio * ratio * 2.0 / (upsilon * upsilon),
    })
}
