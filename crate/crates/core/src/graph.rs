//! Transition graphs with a target stationary distribution.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `sum(pi) == 1`.
pub const PI_SUM_TOL: f64 = 1e-12;

/// Undirected graph of allowed transitions together with the stationary
/// distribution the chain must have.
///
/// Every node carries an implicit self-loop; the stored edge list holds only
/// distinct pairs, canonically oriented as `(min, max)` and sorted. Cloning is
/// cheap since the data is shared.
#[derive(Clone, PartialEq)]
pub struct TransitionGraph {
    inner: Arc<GraphData>,
}

#[derive(PartialEq)]
struct GraphData {
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
    pi: Vec<f64>,
}

impl TransitionGraph {
    /// Builds a graph with the uniform distribution.
    pub fn uniform(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(n, edges, vec![1.0 / n.max(1) as f64; n])
    }

    /// Builds and validates a graph. Explicit self-loops `(i, i)` are accepted
    /// and dropped since every self-loop is present anyway.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        pi: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        if pi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: pi.len(),
            });
        }
        if let Some((i, p)) = pi.iter().enumerate().find(|(_, p)| !(**p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidGraph(format!("pi({i}) = {p} is not positive")));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > PI_SUM_TOL {
            return Err(Error::InvalidGraph(format!("pi sums to {total}, not 1")));
        }

        let mut list = Vec::new();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) out of range for {n} nodes"
                )));
            }
            if i != j {
                list.push((i.min(j), i.max(j)));
            }
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!("duplicate edge {:?}", w[0])));
        }

        let mut adj = vec![Vec::new(); n];
        for &(i, j) in &list {
            adj[i].push(j);
            adj[j].push(i);
        }
        for row in &mut adj {
            row.sort_unstable();
        }

        let graph = Self {
            inner: Arc::new(GraphData {
                edges: list,
                adj,
                pi,
            }),
        };
        if !graph.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.inner.pi.len()
    }

    /// Canonical non-loop edges, `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.inner.edges
    }

    pub fn edge_count(&self) -> usize {
        self.inner.edges.len()
    }

    /// Sorted non-loop neighbours of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.inner.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.inner.adj[i].len()
    }

    pub fn pi(&self) -> &[f64] {
        &self.inner.pi
    }

    /// Whether `(i, j)` is an allowed transition; self-loops always are.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i == j || self.inner.adj[i].binary_search(&j).is_ok()
    }

    /// Position of the non-loop edge `{i, j}` in [`edges`](Self::edges).
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        if i == j {
            return None;
        }
        self.inner.edges.binary_search(&(i.min(j), i.max(j))).ok()
    }

    pub fn is_uniform(&self) -> bool {
        let n = self.node_count() as f64;
        self.pi().iter().all(|p| (p * n - 1.0).abs() <= 1e-12)
    }

    /// Smallest stationary weight, `pi_0`.
    pub fn pi_min(&self) -> f64 {
        self.pi().iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    }

    /// Hop distances from `source`.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.node_count(),
            edges: self.edges().iter().map(|&(i, j)| [i, j]).collect(),
            pi: Some(self.pi().to_vec()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<GraphFile>(text)?.into_graph()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

impl fmt::Debug for TransitionGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransitionGraph")
            .field("n", &self.node_count())
            .field("edges", &self.edges())
            .field("pi", &self.pi())
            .finish()
    }
}

/// On-disk graph format: `{"n": int, "edges": [[i, j], ...], "pi": [..]}` with
/// `pi` optional (uniform when absent).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<f64>>,
}

impl GraphFile {
    pub fn into_graph(self) -> Result<TransitionGraph> {
        let edges = self.edges.into_iter().map(|[i, j]| (i, j));
        match self.pi {
            Some(pi) => TransitionGraph::new(self.n, edges, pi),
            None => TransitionGraph::uniform(self.n, edges),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalizes_edges() {
        let g = TransitionGraph::uniform(3, [(2, 1), (0, 1), (1, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(g.has_edge(2, 2));
        assert!(!g.has_edge(0, 2));
        assert_eq!(g.edge_index(2, 1), Some(1));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TransitionGraph::uniform(3, [(0, 1), (1, 0), (1, 2)]).is_err());
        assert!(TransitionGraph::uniform(3, [(0, 1)]).is_err());
        assert!(TransitionGraph::uniform(2, [(0, 2)]).is_err());
        assert!(TransitionGraph::new(2, [(0, 1)], vec![0.5, 0.6]).is_err());
        assert!(TransitionGraph::new(2, [(0, 1)], vec![1.0, 0.0]).is_err());
        assert!(TransitionGraph::new(2, [(0, 1)], vec![1.0]).is_err());
    }

    #[test]
    fn json_defaults_to_uniform() {
        let g = TransitionGraph::from_json(r#"{"n": 4, "edges": [[0,1],[1,2],[2,3]]}"#).unwrap();
        assert!(g.is_uniform());
        let back = TransitionGraph::from_json(&g.to_json().unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn single_node_is_connected() {
        let g = TransitionGraph::uniform(1, []).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.bfs_distances(0), vec![0]);
    }
}
