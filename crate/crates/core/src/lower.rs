//! Lower bounds on the optimal relaxation time: Euclidean embeddings of the
//! graph, the variant for a completely specified chain, and the weighted vertex
//! expansion with its two-point embedding.
//!
//! An [`Embedding`] assigns each node a vector `psi(i)` and a slack `w(i) >= 0`.
//! It is feasible when `sum_k pi(k) psi(k) = 0`, `sum_i pi(i) w(i) = 1` and every
//! edge satisfies `|psi(i) - psi(j)|^2 <= w(i) + w(j)`. Any feasible embedding
//! bounds the optimal relaxation time from below by `sum_k pi(k) |psi(k)|^2`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{validate_chain, ReversibleChain};
use crate::error::{Error, Result};
use crate::graph::TransitionGraph;

/// Slack allowed on every embedding constraint.
pub const EMBEDDING_TOL: f64 = 1e-9;

/// Largest graph for exhaustive subset enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    #[serde(rename = "d")]
    pub dim: usize,
    #[serde(rename = "psi")]
    pub vectors: Vec<Vec<f64>>,
    #[serde(rename = "w")]
    pub slacks: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EmbeddingViolation {
    NodeCount { expected: usize, found: usize },
    Dimension { node: usize, expected: usize, found: usize },
    NegativeSlack { node: usize, value: f64 },
    Centering { norm: f64 },
    Normalization { sum: f64 },
    Edge { i: usize, j: usize, dist2: f64, allowance: f64 },
}

impl fmt::Display for EmbeddingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::NodeCount { expected, found } => {
                write!(f, "embedding has {found} nodes, graph has {expected}")
            }
            Self::Dimension {
                node,
                expected,
                found,
            } => write!(f, "psi({node}) has dimension {found}, expected {expected}"),
            Self::NegativeSlack { node, value } => write!(f, "w({node}) = {value} < 0"),
            Self::Centering { norm } => write!(f, "|sum pi(k) psi(k)| = {norm:e}"),
            Self::Normalization { sum } => write!(f, "sum pi(i) w(i) = {sum}, not 1"),
            Self::Edge {
                i,
                j,
                dist2,
                allowance,
            } => write!(
                f,
                "edge ({i},{j}): |psi(i) - psi(j)|^2 = {dist2} > w(i) + w(j) = {allowance}"
            ),
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

fn weighted_mean(pi: &[f64], vectors: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut mean = vec![0.0; dim];
    for (p, v) in pi.iter().zip(vectors) {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += p * x;
        }
    }
    mean
}

impl Embedding {
    pub fn new(vectors: Vec<Vec<f64>>, slacks: Vec<f64>) -> Self {
        let dim = vectors.first().map_or(0, Vec::len);
        Self {
            dim,
            vectors,
            slacks,
        }
    }

    /// First violated constraint, if any.
    pub fn check(&self, graph: &TransitionGraph) -> Result<(), EmbeddingViolation> {
        let n = graph.node_count();
        let pi = graph.pi();
        for found in [self.vectors.len(), self.slacks.len()] {
            if found != n {
                return Err(EmbeddingViolation::NodeCount { expected: n, found });
            }
        }
        if let Some((node, v)) = self
            .vectors
            .iter()
            .enumerate()
            .find(|(_, v)| v.len() != self.dim)
        {
            return Err(EmbeddingViolation::Dimension {
                node,
                expected: self.dim,
                found: v.len(),
            });
        }
        if let Some((node, &value)) = self.slacks.iter().enumerate().find(|(_, w)| **w < 0.0) {
            return Err(EmbeddingViolation::NegativeSlack { node, value });
        }
        let norm = norm2(&weighted_mean(pi, &self.vectors, self.dim)).sqrt();
        if norm > EMBEDDING_TOL {
            return Err(EmbeddingViolation::Centering { norm });
        }
        let sum: f64 = pi.iter().zip(&self.slacks).map(|(p, w)| p * w).sum();
        if (sum - 1.0).abs() > EMBEDDING_TOL {
            return Err(EmbeddingViolation::Normalization { sum });
        }
        for &(i, j) in graph.edges() {
            let d = dist2(&self.vectors[i], &self.vectors[j]);
            let allowance = self.slacks[i] + self.slacks[j];
            if d > allowance + EMBEDDING_TOL {
                return Err(EmbeddingViolation::Edge {
                    i,
                    j,
                    dist2: d,
                    allowance,
                });
            }
        }
        Ok(())
    }

    /// `sum_k pi(k) |psi(k)|^2`, without any feasibility check.
    pub fn spread(&self, pi: &[f64]) -> f64 {
        pi.iter()
            .zip(&self.vectors)
            .map(|(p, v)| p * norm2(v))
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Lower bound on the optimal relaxation time from a feasible embedding.
pub fn embedding_bound(graph: &TransitionGraph, embedding: &Embedding) -> Result<f64> {
    embedding.check(graph).map_err(Error::InfeasibleEmbedding)?;
    Ok(embedding.spread(graph.pi()))
}

/// Lower bound on the relaxation time of a given chain.
///
/// The vectors are rescaled so that `sum_{i<j} |psi(i) - psi(j)|^2 Q(i,j) = 1`,
/// then `sum_k pi(k) |psi(k)|^2` is returned.
pub fn specified_chain_bound(chain: &ReversibleChain, vectors: &[Vec<f64>]) -> Result<f64> {
    let report = validate_chain(chain);
    if !report.is_empty() {
        return Err(Error::InvalidChain(report));
    }
    let graph = chain.graph();
    let pi = graph.pi();
    if vectors.len() != pi.len() {
        return Err(Error::DimensionMismatch {
            expected: pi.len(),
            found: vectors.len(),
        });
    }
    let dim = vectors.first().map_or(0, Vec::len);
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    let spread: f64 = pi.iter().zip(vectors).map(|(p, v)| p * norm2(v)).sum();
    let norm = norm2(&weighted_mean(pi, vectors, dim)).sqrt();
    if norm > EMBEDDING_TOL * spread.sqrt().max(1.0) {
        return Err(Error::InfeasibleEmbedding(EmbeddingViolation::Centering {
            norm,
        }));
    }
    let mut dirichlet = 0.0;
    for i in 0..chain.node_count() {
        for &(j, p) in chain.row(i) {
            if j > i {
                dirichlet += dist2(&vectors[i], &vectors[j]) * pi[i] * p;
            }
        }
    }
    if !(dirichlet > 1e-300) || spread == 0.0 {
        return Err(Error::DegenerateEmbedding);
    }
    Ok(spread / dirichlet)
}

/// Minimizer of the weighted vertex expansion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexExpansion {
    /// `min_S pi(dS) / min(pi(S), pi(S^c))`.
    pub upsilon: f64,
    /// Sorted nodes of the minimizing subset.
    pub subset: Vec<usize>,
}

struct CutProfile {
    pi_s: f64,
    /// Nodes of `S^c` adjacent to `S`.
    outer_boundary: u64,
    /// Nodes of `S` adjacent to `S^c`.
    inner_boundary: u64,
}

fn adjacency_masks(graph: &TransitionGraph) -> Vec<u64> {
    (0..graph.node_count())
        .map(|i| graph.neighbors(i).iter().fold(0u64, |m, &j| m | (1 << j)))
        .collect()
}

fn mask_mass(pi: &[f64], mut mask: u64) -> f64 {
    let mut total = 0.0;
    while mask != 0 {
        total += pi[mask.trailing_zeros() as usize];
        mask &= mask - 1;
    }
    total
}

fn cut_profile(adj: &[u64], pi: &[f64], set: u64, full: u64) -> CutProfile {
    let mut reach = 0u64;
    let mut rest = set;
    while rest != 0 {
        reach |= adj[rest.trailing_zeros() as usize];
        rest &= rest - 1;
    }
    let outer = reach & !set & full;
    let mut inner = 0u64;
    let mut rest = outer;
    let mut touched = 0u64;
    while rest != 0 {
        touched |= adj[rest.trailing_zeros() as usize];
        rest &= rest - 1;
    }
    inner |= touched & set;
    CutProfile {
        pi_s: mask_mass(pi, set),
        outer_boundary: outer,
        inner_boundary: inner,
    }
}

/// Lexicographic order of the sorted node lists encoded by two masks.
fn lex_less(a: u64, b: u64) -> bool {
    if a == b {
        return false;
    }
    let p = (a ^ b).trailing_zeros();
    let above = if p >= 63 { 0 } else { !0u64 << (p + 1) };
    if a & (1 << p) != 0 {
        // `a` continues with p; `b` continues with something larger or stops.
        b & above != 0
    } else {
        a & above == 0
    }
}

fn mask_to_nodes(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask & (1 << i) != 0).collect()
}

#[derive(Clone, Copy)]
struct Candidate {
    ratio: f64,
    mask: u64,
}

fn better(a: Candidate, b: Candidate) -> Candidate {
    let tol = 1e-12 * a.ratio.abs().max(b.ratio.abs()).max(1.0);
    if a.ratio < b.ratio - tol {
        a
    } else if b.ratio < a.ratio - tol {
        b
    } else if lex_less(b.mask, a.mask) {
        b
    } else {
        a
    }
}

fn expansion_ratio(adj: &[u64], pi: &[f64], set: u64, full: u64) -> f64 {
    let profile = cut_profile(adj, pi, set, full);
    let smaller = profile.pi_s.min(1.0 - profile.pi_s).min(mask_mass(pi, full & !set));
    mask_mass(pi, profile.outer_boundary) / smaller
}

fn check_size(graph: &TransitionGraph) -> Result<()> {
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "vertex expansion needs at least two nodes".into(),
        ));
    }
    Ok(())
}

/// Exhaustive weighted vertex expansion over all proper nonempty subsets, ties
/// broken towards the lexicographically smallest subset.
pub fn vertex_expansion(graph: &TransitionGraph) -> Result<VertexExpansion> {
    check_size(graph)?;
    let n = graph.node_count();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            what: "exhaustive subset search",
            size: n,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let adj = adjacency_masks(graph);
    let pi = graph.pi();
    let full = (1u64 << n) - 1;
    // Fixed chunking, so the reduction order does not depend on the thread pool.
    const CHUNKS: u64 = 64;
    let total = full - 1;
    let chunk = total.div_ceil(CHUNKS).max(1);
    let best = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let lo = 1 + c * chunk;
            let hi = (lo + chunk).min(full);
            let mut best: Option<Candidate> = None;
            for set in lo..hi {
                let cand = Candidate {
                    ratio: expansion_ratio(&adj, pi, set, full),
                    mask: set,
                };
                best = Some(best.map_or(cand, |b| better(b, cand)));
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .reduce(better)
        .expect("at least one proper subset");
    Ok(VertexExpansion {
        upsilon: best.ratio,
        subset: mask_to_nodes(best.mask),
    })
}

/// Vertex expansion restricted to the given candidate subsets. Works for graphs
/// of any size up to 64 nodes.
pub fn vertex_expansion_over(
    graph: &TransitionGraph,
    candidates: &[Vec<usize>],
) -> Result<VertexExpansion> {
    check_size(graph)?;
    let n = graph.node_count();
    if n > 64 {
        return Err(Error::TooLarge {
            what: "candidate subset search",
            size: n,
            limit: 64,
        });
    }
    let adj = adjacency_masks(graph);
    let full = if n == 64 { !0 } else { (1u64 << n) - 1 };
    let mut best: Option<Candidate> = None;
    for nodes in candidates {
        let mut set = 0u64;
        for &v in nodes {
            if v >= n {
                return Err(Error::InvalidParameter(format!("node {v} out of range")));
            }
            set |= 1 << v;
        }
        if set == 0 || set == full {
            return Err(Error::InvalidParameter(
                "candidate subsets must be proper and nonempty".into(),
            ));
        }
        let cand = Candidate {
            ratio: expansion_ratio(&adj, graph.pi(), set, full),
            mask: set,
        };
        best = Some(best.map_or(cand, |b| better(b, cand)));
    }
    let best = best.ok_or_else(|| Error::InvalidParameter("no candidate subsets".into()))?;
    Ok(VertexExpansion {
        upsilon: best.ratio,
        subset: mask_to_nodes(best.mask),
    })
}

/// The vertex-expansion bound `1 / (2 Upsilon)` together with the two-point
/// embedding behind it.
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionBound {
    pub expansion: VertexExpansion,
    pub bound: f64,
    pub embedding: Embedding,
    /// `pi(S) pi(S^c) / pi(B)` where `B` is the lighter of the two boundaries;
    /// equals the spread of `embedding` and is at least `bound`.
    pub two_point_value: f64,
}

/// Maps the cut `S` to two points. With `B` the lighter of the inner boundaries
/// `dS^c` (in `S`) and `dS` (in `S^c`), nodes of `B` get slack `1 / pi(B)`,
/// all others zero, and the two points sit at squared distance `1 / pi(B)`.
pub fn two_point_embedding(graph: &TransitionGraph, subset: &[usize]) -> Result<(Embedding, f64)> {
    let n = graph.node_count();
    if n > 64 {
        return Err(Error::TooLarge {
            what: "two-point embedding",
            size: n,
            limit: 64,
        });
    }
    let adj = adjacency_masks(graph);
    let pi = graph.pi();
    let full = if n == 64 { !0 } else { (1u64 << n) - 1 };
    let mut set = 0u64;
    for &v in subset {
        set |= 1 << v;
    }
    if set == 0 || set == full {
        return Err(Error::InvalidParameter(
            "cut must be proper and nonempty".into(),
        ));
    }
    let profile = cut_profile(&adj, pi, set, full);
    let pi_inner = mask_mass(pi, profile.inner_boundary);
    let pi_outer = mask_mass(pi, profile.outer_boundary);
    let (side, boundary, pi_boundary) = if pi_inner <= pi_outer {
        (set, profile.inner_boundary, pi_inner)
    } else {
        (full & !set, profile.outer_boundary, pi_outer)
    };
    let pi_side = mask_mass(pi, side);
    let pi_other = mask_mass(pi, full & !side);
    let gap = pi_boundary.recip().sqrt();
    let vectors = (0..n)
        .map(|i| {
            if side & (1 << i) != 0 {
                vec![pi_other * gap]
            } else {
                vec![-pi_side * gap]
            }
        })
        .collect();
    let slacks = (0..n)
        .map(|i| {
            if boundary & (1 << i) != 0 {
                pi_boundary.recip()
            } else {
                0.0
            }
        })
        .collect();
    let value = pi_side * pi_other / pi_boundary;
    Ok((Embedding::new(vectors, slacks), value))
}

pub fn expansion_lower_bound(graph: &TransitionGraph) -> Result<ExpansionBound> {
    let expansion = vertex_expansion(graph)?;
    let (embedding, two_point_value) = two_point_embedding(graph, &expansion.subset)?;
    Ok(ExpansionBound {
        bound: 1.0 / (2.0 * expansion.upsilon),
        expansion,
        embedding,
        two_point_value,
    })
}

fn circle_point(radius: f64, step: usize, period: usize) -> [f64; 2] {
    let angle = 2.0 * PI * step as f64 / period as f64;
    [radius * angle.cos(), radius * angle.sin()]
}

/// One-dimensional embedding of `K_n - K_n`: the bridge ends at `+-sqrt(n/2)`,
/// the other nodes at `+-(sqrt 2 + 2) sqrt(n) / 2`, slack `n` on the bridge ends.
pub fn knkn_embedding(n: usize) -> Result<Embedding> {
    if n < 2 {
        return Err(Error::InvalidParameter("K_n-K_n needs n >= 2".into()));
    }
    let root_n = (n as f64).sqrt();
    let inner = std::f64::consts::FRAC_1_SQRT_2 * root_n;
    let outer = (std::f64::consts::SQRT_2 + 2.0) / 2.0 * root_n;
    let mut vectors = Vec::with_capacity(2 * n);
    let mut slacks = Vec::with_capacity(2 * n);
    for sign in [1.0, -1.0] {
        for i in 0..n {
            vectors.push(vec![sign * if i == 0 { inner } else { outer }]);
            slacks.push(if i == 0 { n as f64 } else { 0.0 });
        }
    }
    Ok(Embedding::new(vectors, slacks))
}

/// Evenly spaced points on a circle of radius `sqrt2 / (2 sin(pi/n))`, unit slacks.
pub fn cycle_embedding(n: usize) -> Result<Embedding> {
    if n < 3 {
        return Err(Error::InvalidParameter("cycle needs n >= 3".into()));
    }
    let radius = std::f64::consts::SQRT_2 / (2.0 * (PI / n as f64).sin());
    let vectors = (0..n).map(|i| circle_point(radius, i, n).to_vec()).collect();
    Ok(Embedding::new(vectors, vec![1.0; n]))
}

/// Product of `d` circle embeddings, one per torus coordinate.
pub fn torus_embedding(m: usize, d: usize) -> Result<Embedding> {
    if m < 3 || d == 0 {
        return Err(Error::InvalidParameter("torus needs m >= 3 and d >= 1".into()));
    }
    let radius = std::f64::consts::SQRT_2 / (2.0 * (PI / m as f64).sin());
    let n = crate::families::torus(m, d)?.node_count();
    let vectors = (0..n)
        .map(|v| {
            crate::families::torus_coords(v, m, d)
                .into_iter()
                .flat_map(|c| circle_point(radius, c, m))
                .collect()
        })
        .collect();
    Ok(Embedding::new(vectors, vec![1.0; n]))
}

/// Geometric grid collapsed onto the circle of its first coordinate, radius
/// `sqrt2 / (2 sin(k pi / m))`, unit slacks.
pub fn geometric_embedding(m: usize, k: usize, d: usize) -> Result<Embedding> {
    if d == 0 || k == 0 || 2 * k >= m || m % k != 0 {
        return Err(Error::InvalidParameter(
            "geometric grid needs d >= 1, 1 <= k < m/2 and k | m".into(),
        ));
    }
    let radius = std::f64::consts::SQRT_2 / (2.0 * (k as f64 * PI / m as f64).sin());
    let n = crate::families::geometric(m, k, d)?.node_count();
    let vectors = (0..n)
        .map(|v| circle_point(radius, crate::families::torus_coords(v, m, d)[0], m).to_vec())
        .collect();
    Ok(Embedding::new(vectors, vec![1.0; n]))
}
