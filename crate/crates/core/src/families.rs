//! Graph families used throughout the examples and the experiment harness.
//!
//! Numbering conventions:
//! - `knkn(n)`: nodes `0..n` are the first clique with `0` the bridge end,
//!   nodes `n..2n` the second clique with `n` the other bridge end.
//! - `torus(m, d)` and `geometric(m, k, d)`: row-major coordinates, the first
//!   coordinate most significant.
//! - Ising trees: sites in depth-first order, see [`crate::tree::TreeSpec`].

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glauber::SpinSystem;
use crate::graph::TransitionGraph;
use crate::tree::TreeSpec;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub fn complete(n: usize) -> Result<TransitionGraph> {
    if n == 0 {
        return Err(invalid("complete graph needs n >= 1"));
    }
    let edges = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)));
    TransitionGraph::uniform(n, edges)
}

pub fn path(n: usize) -> Result<TransitionGraph> {
    if n == 0 {
        return Err(invalid("path needs n >= 1"));
    }
    TransitionGraph::uniform(n, (1..n).map(|i| (i - 1, i)))
}

pub fn cycle(n: usize) -> Result<TransitionGraph> {
    if n < 3 {
        return Err(invalid("cycle needs n >= 3"));
    }
    TransitionGraph::uniform(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// Two `n`-cliques joined by the edge `(0, n)`.
pub fn knkn(n: usize) -> Result<TransitionGraph> {
    if n < 2 {
        return Err(invalid("K_n-K_n needs n >= 2"));
    }
    let mut edges = Vec::new();
    for side in [0, n] {
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((side + i, side + j));
            }
        }
    }
    edges.push((0, n));
    TransitionGraph::uniform(2 * n, edges)
}

/// Row-major coordinates of node `index` on `Z_m^d`.
pub fn torus_coords(index: usize, m: usize, d: usize) -> Vec<usize> {
    let mut coords = vec![0; d];
    let mut rest = index;
    for l in (0..d).rev() {
        coords[l] = rest % m;
        rest /= m;
    }
    coords
}

fn torus_index(coords: &[usize], m: usize) -> usize {
    coords.iter().fold(0, |acc, &c| acc * m + c)
}

fn checked_power(m: usize, d: usize) -> Result<usize> {
    u32::try_from(d)
        .ok()
        .and_then(|d| m.checked_pow(d))
        .ok_or_else(|| invalid(format!("{m}^{d} nodes overflows")))
}

/// The `m^d` grid on the `d`-dimensional torus, nearest-neighbour edges.
pub fn torus(m: usize, d: usize) -> Result<TransitionGraph> {
    if m < 3 || d == 0 {
        return Err(invalid("torus needs m >= 3 and d >= 1"));
    }
    let n = checked_power(m, d)?;
    let mut edges = Vec::with_capacity(n * d);
    for v in 0..n {
        let coords = torus_coords(v, m, d);
        for l in 0..d {
            let mut next = coords.clone();
            next[l] = (coords[l] + 1) % m;
            edges.push((v, torus_index(&next, m)));
        }
    }
    TransitionGraph::uniform(n, edges)
}

fn cyclic_distance(a: usize, b: usize, m: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(m - d)
}

/// Torus `Z_m^d` where two distinct nodes are adjacent when they are at most
/// `k` cells apart (cyclically) in every coordinate.
pub fn geometric(m: usize, k: usize, d: usize) -> Result<TransitionGraph> {
    if d == 0 || k == 0 || 2 * k >= m {
        return Err(invalid("geometric grid needs d >= 1 and 1 <= k < m/2"));
    }
    if m % k != 0 {
        return Err(invalid(format!("geometric grid needs k | m, got m={m}, k={k}")));
    }
    let n = checked_power(m, d)?;
    let coords: Vec<Vec<usize>> = (0..n).map(|v| torus_coords(v, m, d)).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if coords[u]
                .iter()
                .zip(&coords[v])
                .all(|(&a, &b)| cyclic_distance(a, b, m) <= k)
            {
                edges.push((u, v));
            }
        }
    }
    TransitionGraph::uniform(n, edges)
}

/// Random connected graph: a random spanning tree plus every other pair with
/// probability `extra`. With `random_pi` the stationary distribution is drawn
/// with weights in `[0.5, 1.5)`, otherwise it is uniform.
pub fn random_connected<R: Rng + ?Sized>(
    n: usize,
    extra: f64,
    random_pi: bool,
    rng: &mut R,
) -> Result<TransitionGraph> {
    if n == 0 {
        return Err(invalid("random graph needs n >= 1"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.random_range(0..k)];
        edges.push((parent.min(order[k]), parent.max(order[k])));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !edges.contains(&(i, j)) && rng.random::<f64>() < extra {
                edges.push((i, j));
            }
        }
    }
    if random_pi {
        let weights: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
        let total: f64 = weights.iter().sum();
        let mut pi: Vec<f64> = weights.iter().map(|w| w / total).collect();
        // Put the rounding residue on the largest entry so the sum is 1 to 1e-15.
        let residue = 1.0 - pi.iter().sum::<f64>();
        let top = (0..n).max_by(|&a, &b| pi[a].total_cmp(&pi[b])).unwrap();
        pi[top] += residue;
        TransitionGraph::new(n, edges, pi)
    } else {
        TransitionGraph::uniform(n, edges)
    }
}

/// A named instance family with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Knkn { n: usize },
    Cycle { n: usize },
    Torus { m: usize, d: usize },
    Geometric { m: usize, k: usize, d: usize },
    IsingTree { b: usize, r: usize, beta: f64 },
    Custom { name: String, graph: crate::graph::GraphFile },
}

impl Family {
    pub fn name(&self) -> &str {
        match self {
            Family::Knkn { .. } => "knkn",
            Family::Cycle { .. } => "cycle",
            Family::Torus { .. } => "torus",
            Family::Geometric { .. } => "geometric",
            Family::IsingTree { .. } => "ising_tree",
            Family::Custom { .. } => "custom",
        }
    }

    /// Parameters as `key=value` pairs joined by `;`.
    pub fn params(&self) -> String {
        match self {
            Family::Knkn { n } | Family::Cycle { n } => format!("n={n}"),
            Family::Torus { m, d } => format!("m={m};d={d}"),
            Family::Geometric { m, k, d } => format!("m={m};k={k};d={d}"),
            Family::IsingTree { b, r, beta } => format!("b={b};r={r};beta={beta}"),
            Family::Custom { name, .. } => format!("name={name}"),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.params())
    }
}

/// Output of [`generate`].
#[derive(Clone, Debug)]
pub enum Generated {
    Graph(TransitionGraph),
    Spins(SpinSystem),
}

pub fn generate(family: &Family) -> Result<Generated> {
    Ok(match family {
        Family::Knkn { n } => Generated::Graph(knkn(*n)?),
        Family::Cycle { n } => Generated::Graph(cycle(*n)?),
        Family::Torus { m, d } => Generated::Graph(torus(*m, *d)?),
        Family::Geometric { m, k, d } => Generated::Graph(geometric(*m, *k, *d)?),
        Family::IsingTree { b, r, beta } => {
            Generated::Spins(SpinSystem::ising_tree(&TreeSpec::new(*b, *r)?, *beta)?)
        }
        Family::Custom { graph, .. } => Generated::Graph(graph.clone().into_graph()?),
    })
}
