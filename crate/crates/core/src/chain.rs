//! Reversible chains on a transition graph: storage, feasibility checks and the
//! standard constructors.

use std::fmt;
use std::io::{Read, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::TransitionGraph;
use crate::linalg::SquareMatrix;

/// Tolerance on row sums, detailed balance and nonnegativity.
pub const CHAIN_TOL: f64 = 1e-10;

/// Transition matrix `P` tied to its graph. Rows are stored sparsely, sorted by
/// column; every graph neighbour and the diagonal have an entry, plus any
/// nonzero entry off the graph (which makes the chain infeasible).
///
/// Construction only checks dimensions. Use [`validate_chain`] (or
/// [`ReversibleChain::validated`]) to check the constraints of the
/// fastest-mixing program.
#[derive(Clone, Debug)]
pub struct ReversibleChain {
    graph: TransitionGraph,
    rows: Vec<Vec<(usize, f64)>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Negative { i: usize, j: usize, value: f64 },
    OffGraph { i: usize, j: usize, value: f64 },
    RowSum { row: usize, sum: f64 },
    DetailedBalance { i: usize, j: usize, forward: f64, backward: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Negative { i, j, value } => write!(f, "P({i},{j}) = {value} < 0"),
            Violation::OffGraph { i, j, value } => {
                write!(f, "P({i},{j}) = {value} on a non-edge")
            }
            Violation::RowSum { row, sum } => write!(f, "row {row} sums to {sum}"),
            Violation::DetailedBalance {
                i,
                j,
                forward,
                backward,
            } => write!(
                f,
                "pi({i})P({i},{j}) = {forward} but pi({j})P({j},{i}) = {backward}"
            ),
        }
    }
}

/// Every violated constraint; empty iff the chain is feasible.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl ReversibleChain {
    /// Wraps sparse rows. Each row must be sorted by column without repeats.
    pub fn from_sparse_rows(graph: TransitionGraph, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = graph.node_count();
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        for row in &rows {
            if let Some(&(j, _)) = row.iter().find(|(j, _)| *j >= n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: j + 1,
                });
            }
            if row.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::Parse("sparse row not strictly sorted".into()));
            }
        }
        Ok(Self { graph, rows })
    }

    pub fn from_dense(graph: TransitionGraph, p: &SquareMatrix) -> Result<Self> {
        let n = graph.node_count();
        if p.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.dim(),
            });
        }
        let rows = (0..n)
            .map(|i| {
                p.row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(j, &v)| v != 0.0 || graph.has_edge(i, j))
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect();
        Ok(Self { graph, rows })
    }

    /// Chain with the given symmetric edge flows `Q(e)`, aligned with
    /// `graph.edges()`. Each self-loop absorbs the residual `pi(i) - sum_j Q(i,j)`.
    pub fn from_edge_flows(graph: TransitionGraph, flows: &[f64]) -> Result<Self> {
        if flows.len() != graph.edge_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.edge_count(),
                found: flows.len(),
            });
        }
        let n = graph.node_count();
        let pi = graph.pi();
        let mut rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| Vec::with_capacity(graph.degree(i) + 1))
            .collect();
        for i in 0..n {
            let mut off = 0.0;
            let mut diag_pos = None;
            for &j in graph.neighbors(i) {
                if diag_pos.is_none() && j > i {
                    diag_pos = Some(rows[i].len());
                    rows[i].push((i, 0.0));
                }
                let e = graph.edge_index(i, j).expect("neighbour is an edge");
                let p = flows[e] / pi[i];
                off += p;
                rows[i].push((j, p));
            }
            let pos = diag_pos.unwrap_or_else(|| {
                rows[i].push((i, 0.0));
                rows[i].len() - 1
            });
            rows[i][pos].1 = 1.0 - off;
        }
        Ok(Self { graph, rows })
    }

    /// Random feasible chain: each edge gets a uniform fraction of the smaller
    /// of its endpoints' per-edge budgets `pi(i) / deg(i)`.
    pub fn random<R: Rng + ?Sized>(graph: TransitionGraph, rng: &mut R) -> Self {
        let pi = graph.pi();
        let flows: Vec<f64> = graph
            .edges()
            .iter()
            .map(|&(i, j)| {
                let cap = (pi[i] / graph.degree(i) as f64).min(pi[j] / graph.degree(j) as f64);
                rng.random::<f64>() * cap
            })
            .collect();
        Self::from_edge_flows(graph, &flows).expect("flows match edges")
    }

    /// Returns the chain if it is feasible, the full report otherwise.
    pub fn validated(self) -> Result<Self> {
        let report = validate_chain(&self);
        if report.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidChain(report))
        }
    }

    pub fn graph(&self) -> &TransitionGraph {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// `P(i, j)`.
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| row[k].1)
            .unwrap_or(0.0)
    }

    /// Flows `pi(i)P(i,j)` on the canonical edges, aligned with `graph.edges()`.
    pub fn edge_flows(&self) -> Vec<f64> {
        self.graph
            .edges()
            .iter()
            .map(|&(i, j)| edge_flow(self, i, j))
            .collect()
    }

    pub fn to_dense(&self) -> SquareMatrix {
        let mut m = SquareMatrix::zeros(self.node_count());
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// `S = D^{1/2} P D^{-1/2}` with `D = diag(pi)`; symmetric when the chain is
    /// reversible, and similar to `P` in any case.
    pub fn symmetrized(&self) -> SquareMatrix {
        let sqrt_pi: Vec<f64> = self.graph.pi().iter().map(|p| p.sqrt()).collect();
        let mut s = SquareMatrix::zeros(self.node_count());
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                s[(i, j)] = sqrt_pi[i] * v / sqrt_pi[j];
            }
        }
        s
    }

    /// Dense CSV, one row of `P` per line, no header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for row in self.to_dense().rows() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(graph: TransitionGraph, reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            let row = record
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad matrix entry {s:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Self::from_dense(graph, &SquareMatrix::from_rows(&rows)?)
    }
}

/// Checks every constraint of the fastest-mixing program.
pub fn validate_chain(chain: &ReversibleChain) -> ValidationReport {
    let graph = chain.graph();
    let pi = graph.pi();
    let mut violations = Vec::new();
    for (i, row) in chain.rows.iter().enumerate() {
        let mut sum = 0.0;
        for &(j, v) in row {
            sum += v;
            if v < -CHAIN_TOL {
                violations.push(Violation::Negative { i, j, value: v });
            }
            if v != 0.0 && !graph.has_edge(i, j) {
                violations.push(Violation::OffGraph { i, j, value: v });
            }
        }
        if (sum - 1.0).abs() > CHAIN_TOL {
            violations.push(Violation::RowSum { row: i, sum });
        }
    }
    for (i, row) in chain.rows.iter().enumerate() {
        for &(j, v) in row {
            // Pairs stored in one direction only are caught from the lower triangle.
            let reverse = chain.prob(j, i);
            let reverse_stored = chain.rows[j].binary_search_by_key(&i, |&(c, _)| c).is_ok();
            if j > i || (j < i && !reverse_stored) {
                let forward = pi[i] * v;
                let backward = pi[j] * reverse;
                if (forward - backward).abs() > CHAIN_TOL {
                    violations.push(Violation::DetailedBalance {
                        i,
                        j,
                        forward,
                        backward,
                    });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Ergodic flow `Q(i,j) = pi(i) P(i,j)`.
pub fn edge_flow(chain: &ReversibleChain, i: usize, j: usize) -> f64 {
    chain.graph().pi()[i] * chain.prob(i, j)
}

/// `pi_* = max_i sum_{j : (i,j) in E} pi(j)`, self-loop term included.
pub fn max_neighborhood_mass(graph: &TransitionGraph) -> f64 {
    let pi = graph.pi();
    (0..graph.node_count())
        .map(|i| pi[i] + graph.neighbors(i).iter().map(|&j| pi[j]).sum::<f64>())
        .fold(0.0, f64::max)
}

/// The max-degree-like chain `P_d(i,j) = pi(j) / pi_*` on edges, rest of the
/// mass on the diagonal.
pub fn max_degree_chain(graph: &TransitionGraph) -> ReversibleChain {
    let pi_star = max_neighborhood_mass(graph);
    let pi = graph.pi();
    let flows: Vec<f64> = graph
        .edges()
        .iter()
        .map(|&(i, j)| pi[i] * pi[j] / pi_star)
        .collect();
    ReversibleChain::from_edge_flows(graph.clone(), &flows).expect("flows match edges")
}

/// Simple random walk `P(i,j) = 1/deg(i)` over non-loop neighbours. Reversible
/// with respect to the uniform distribution only on regular graphs.
pub fn symmetric_walk(graph: &TransitionGraph) -> Result<ReversibleChain> {
    if !graph.is_uniform() {
        return Err(Error::NonUniform);
    }
    let rows = (0..graph.node_count())
        .map(|i| {
            let deg = graph.degree(i);
            if deg == 0 {
                return vec![(i, 1.0)];
            }
            let mut row: Vec<(usize, f64)> = graph
                .neighbors(i)
                .iter()
                .map(|&j| (j, 1.0 / deg as f64))
                .collect();
            let pos = row.partition_point(|&(j, _)| j < i);
            row.insert(pos, (i, 0.0));
            row
        })
        .collect();
    ReversibleChain::from_sparse_rows(graph.clone(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    fn k2() -> TransitionGraph {
        TransitionGraph::uniform(2, [(0, 1)]).unwrap()
    }

    fn dense(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn flip_chain_is_valid() {
        let c = ReversibleChain::from_dense(k2(), &dense(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert!(validate_chain(&c).is_empty());
        assert_eq!(edge_flow(&c, 0, 1), 0.5);
    }

    #[test]
    fn row_sum_violation_reported() {
        let c = ReversibleChain::from_dense(k2(), &dense(&[&[0.5, 0.6], &[0.6, 0.4]])).unwrap();
        let report = validate_chain(&c);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            report.violations[0],
            Violation::RowSum { row: 0, sum } if (sum - 1.1).abs() < 1e-15
        ));
    }

    #[test]
    fn off_graph_and_balance_violations() {
        let g = TransitionGraph::new(3, [(0, 1), (1, 2)], vec![0.25, 0.5, 0.25]).unwrap();
        let p = dense(&[&[0.5, 0.3, 0.2], &[0.25, 0.5, 0.25], &[0.0, 0.5, 0.5]]);
        let report = validate_chain(&ReversibleChain::from_dense(g, &p).unwrap());
        assert!(report
            .violations
            .contains(&Violation::OffGraph { i: 0, j: 2, value: 0.2 }));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DetailedBalance { i: 0, j: 1, .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DetailedBalance { i: 0, j: 2, .. })));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = SquareMatrix::identity(3);
        assert!(matches!(
            ReversibleChain::from_dense(k2(), &p),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn max_degree_chain_closed_forms() {
        let c = max_degree_chain(&k2());
        assert_eq!(c.prob(0, 1), 0.5);
        assert!(validate_chain(&c).is_empty());

        let g = families::complete(5).unwrap();
        let c = max_degree_chain(&g);
        for i in 0..5 {
            for j in 0..5 {
                assert!((c.prob(i, j) - 0.2).abs() < 1e-15);
            }
        }

        let g = families::knkn(3).unwrap();
        assert!((max_neighborhood_mass(&g) - 4.0 / 6.0).abs() < 1e-15);
        let c = max_degree_chain(&g);
        for &(i, j) in g.edges() {
            assert!((c.prob(i, j) - 0.25).abs() < 1e-15);
        }
        assert!(validate_chain(&c).is_empty());
    }

    #[test]
    fn symmetric_walks() {
        let c = symmetric_walk(&families::cycle(4).unwrap()).unwrap();
        assert_eq!(c.prob(0, 1), 0.5);
        assert_eq!(c.prob(0, 3), 0.5);
        assert_eq!(c.prob(0, 0), 0.0);
        assert!(validate_chain(&c).is_empty());

        let c = symmetric_walk(&families::complete(4).unwrap()).unwrap();
        assert!((c.prob(2, 1) - 1.0 / 3.0).abs() < 1e-15);

        let c = symmetric_walk(&families::torus(3, 2).unwrap()).unwrap();
        for i in 0..9 {
            assert_eq!(c.row(i).iter().filter(|(_, v)| *v == 0.25).count(), 4);
        }
        assert!(validate_chain(&c).is_empty());

        let nonuniform = TransitionGraph::new(2, [(0, 1)], vec![0.25, 0.75]).unwrap();
        assert!(matches!(symmetric_walk(&nonuniform), Err(Error::NonUniform)));
    }

    #[test]
    fn irregular_symmetric_walk_fails_validation() {
        let path = families::path(3).unwrap();
        let c = symmetric_walk(&path).unwrap();
        assert!(!validate_chain(&c).is_empty());
    }

    #[test]
    fn csv_round_trip() {
        let g = families::knkn(3).unwrap();
        let c = max_degree_chain(&g);
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let back = ReversibleChain::read_csv(g, buf.as_slice()).unwrap();
        assert_eq!(back.to_dense(), c.to_dense());
    }
}
