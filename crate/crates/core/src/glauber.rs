//! Glauber dynamics with site-dependent update rates for pairwise spin systems.
//!
//! A configuration over `n` sites with `q` colors is indexed by
//! `sum_v sigma(v) q^v`. For Ising systems color `1` is the spin `+1` and
//! color `0` the spin `-1`, so site `v` is bit `v` of the index.

use serde::Serialize;

use crate::chain::ReversibleChain;
use crate::error::{Error, Result};
use crate::graph::TransitionGraph;
use crate::linalg::{dot, log_sum_exp};
use crate::spectral::{relaxation_time, spectrum, symmetrized_decomposition};
use crate::tree::TreeSpec;

/// Largest explicit configuration space.
pub const STATE_LIMIT: usize = 1 << 20;

/// Pairwise model `pi(sigma) ~ prod_{(v,w)} alpha_vw(sigma(v), sigma(w))`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem {
    sites: usize,
    colors: usize,
    edges: Vec<(usize, usize)>,
    /// Row-major `colors x colors` table of `ln alpha_vw(a, b)` per edge `(v, w)`.
    log_couplings: Vec<Vec<f64>>,
    /// `(neighbour, edge, site is the first endpoint)`.
    adj: Vec<Vec<(usize, usize, bool)>>,
    beta: Option<f64>,
}

impl SpinSystem {
    /// General pairwise system; `couplings[e]` is the row-major table of
    /// `alpha(a, b)` for edge `edges[e] = (v, w)`, `a` the color at `v`.
    pub fn new(
        sites: usize,
        colors: usize,
        edges: Vec<(usize, usize)>,
        couplings: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::build(sites, colors, edges, couplings, None)
    }

    fn build(
        sites: usize,
        colors: usize,
        edges: Vec<(usize, usize)>,
        couplings: Vec<Vec<f64>>,
        beta: Option<f64>,
    ) -> Result<Self> {
        if sites == 0 || colors < 2 {
            return Err(Error::InvalidParameter(
                "spin system needs at least one site and two colors".into(),
            ));
        }
        if couplings.len() != edges.len() {
            return Err(Error::DimensionMismatch {
                expected: edges.len(),
                found: couplings.len(),
            });
        }
        let mut adj = vec![Vec::new(); sites];
        let mut seen = std::collections::BTreeSet::new();
        for (e, &(v, w)) in edges.iter().enumerate() {
            if v >= sites || w >= sites || v == w || !seen.insert((v.min(w), v.max(w))) {
                return Err(Error::InvalidGraph(format!("bad site edge ({v}, {w})")));
            }
            adj[v].push((w, e, true));
            adj[w].push((v, e, false));
        }
        let mut log_couplings = Vec::with_capacity(couplings.len());
        for table in couplings {
            if table.len() != colors * colors {
                return Err(Error::DimensionMismatch {
                    expected: colors * colors,
                    found: table.len(),
                });
            }
            if table.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
                return Err(Error::InvalidParameter("couplings must be positive".into()));
            }
            log_couplings.push(table.iter().map(|a| a.ln()).collect());
        }
        Ok(Self {
            sites,
            colors,
            edges,
            log_couplings,
            adj,
            beta,
        })
    }

    /// Ising model `alpha(a, b) = exp(beta a b)`, couplings stored in log form
    /// so large `beta` does not overflow.
    pub fn ising(sites: usize, edges: Vec<(usize, usize)>, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
        }
        let table = vec![1.0; 4];
        let mut sys = Self::build(sites, 2, edges.clone(), vec![table; edges.len()], Some(beta))?;
        for t in &mut sys.log_couplings {
            *t = vec![beta, -beta, -beta, beta];
        }
        Ok(sys)
    }

    /// Two sites joined by one edge.
    pub fn ising_edge(beta: f64) -> Result<Self> {
        Self::ising(2, vec![(0, 1)], beta)
    }

    pub fn ising_tree(tree: &TreeSpec, beta: f64) -> Result<Self> {
        Self::ising(tree.node_count(), tree.edges(), beta)
    }

    pub fn site_count(&self) -> usize {
        self.sites
    }

    pub fn color_count(&self) -> usize {
        self.colors
    }

    pub fn site_edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    /// Maximum site degree.
    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `colors^sites`, rejected beyond [`STATE_LIMIT`].
    pub fn state_count(&self) -> Result<usize> {
        let too_large = Error::TooLarge {
            what: "configuration space",
            size: usize::MAX,
            limit: STATE_LIMIT,
        };
        let count = u32::try_from(self.sites)
            .ok()
            .and_then(|s| self.colors.checked_pow(s))
            .ok_or(too_large)?;
        if count > STATE_LIMIT {
            return Err(Error::TooLarge {
                what: "configuration space",
                size: count,
                limit: STATE_LIMIT,
            });
        }
        Ok(count)
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        (0..self.sites)
            .map(|_| {
                let c = index % self.colors;
                index /= self.colors;
                c
            })
            .collect()
    }

    pub fn encode(&self, sigma: &[usize]) -> usize {
        sigma.iter().rev().fold(0, |acc, &c| acc * self.colors + c)
    }

    fn log_alpha(&self, e: usize, first: bool, a: usize, b: usize) -> f64 {
        let (x, y) = if first { (a, b) } else { (b, a) };
        self.log_couplings[e][x * self.colors + y]
    }

    /// `ln prod_{(v,w)} alpha_vw(sigma(v), sigma(w))`.
    pub fn log_weight(&self, sigma: &[usize]) -> f64 {
        self.edges
            .iter()
            .zip(&self.log_couplings)
            .map(|(&(v, w), t)| t[sigma[v] * self.colors + sigma[w]])
            .sum()
    }

    /// `ln prod_{w ~ v} alpha_vw(a, sigma(w))`.
    fn local_log_weight(&self, sigma: &[usize], v: usize, a: usize) -> f64 {
        self.adj[v]
            .iter()
            .map(|&(w, e, first)| self.log_alpha(e, first, a, sigma[w]))
            .sum()
    }
}

/// Heat-bath probability of setting site `v` to color `a`.
pub fn glauber_kernel(sys: &SpinSystem, sigma: &[usize], v: usize, a: usize) -> f64 {
    let logs: Vec<f64> = (0..sys.colors)
        .map(|c| sys.local_log_weight(sigma, v, c))
        .collect();
    (logs[a] - log_sum_exp(logs.iter().copied())).exp()
}

/// Exact Gibbs distribution over all configurations.
pub fn gibbs_distribution(sys: &SpinSystem) -> Result<Vec<f64>> {
    let states = sys.state_count()?;
    let logs: Vec<f64> = (0..states).map(|s| sys.log_weight(&sys.decode(s))).collect();
    let log_z = log_sum_exp(logs.iter().copied());
    Ok(logs.into_iter().map(|l| (l - log_z).exp()).collect())
}

/// Site-selection probabilities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateVector {
    pub rho: Vec<f64>,
}

impl RateVector {
    pub fn new(rho: Vec<f64>) -> Result<Self> {
        if rho.is_empty() || rho.iter().any(|&r| !(r >= 0.0)) {
            return Err(Error::InvalidParameter("rates must be nonnegative".into()));
        }
        let total: f64 = rho.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("rates sum to {total}, not 1")));
        }
        Ok(Self { rho })
    }

    pub fn uniform(sites: usize) -> Self {
        Self {
            rho: vec![1.0 / sites as f64; sites],
        }
    }
}

/// Configuration graph: configurations joined when they differ at one site,
/// with the Gibbs distribution attached.
pub fn configuration_graph(sys: &SpinSystem) -> Result<TransitionGraph> {
    let pi = gibbs_distribution(sys)?;
    let states = pi.len();
    let mut edges = Vec::with_capacity(states * sys.sites * (sys.colors - 1) / 2);
    let mut stride = 1;
    for _ in 0..sys.sites {
        for s in 0..states {
            let c = s / stride % sys.colors;
            for a in (c + 1)..sys.colors {
                edges.push((s, s + (a - c) * stride));
            }
        }
        stride *= sys.colors;
    }
    TransitionGraph::new(states, edges, pi)
}

/// Rows of `sum_v weight(v) K_v` over the configuration graph, optionally
/// restricted to a single site.
fn glauber_rows(sys: &SpinSystem, weights: &[f64]) -> Result<Vec<Vec<(usize, f64)>>> {
    let states = sys.state_count()?;
    let mut rows = Vec::with_capacity(states);
    for s in 0..states {
        let sigma = sys.decode(s);
        let mut row = Vec::with_capacity(sys.sites * (sys.colors - 1) + 1);
        let mut stay = 0.0;
        let mut stride = 1;
        for v in 0..sys.sites {
            let logs: Vec<f64> = (0..sys.colors)
                .map(|c| sys.local_log_weight(&sigma, v, c))
                .collect();
            let lz = log_sum_exp(logs.iter().copied());
            for (a, l) in logs.iter().enumerate() {
                let p = weights[v] * (l - lz).exp();
                if a == sigma[v] {
                    stay += p;
                } else {
                    let t = s + a * stride - sigma[v] * stride;
                    row.push((t, p));
                }
            }
            stride *= sys.colors;
        }
        row.push((s, stay));
        row.sort_unstable_by_key(|&(j, _)| j);
        rows.push(row);
    }
    Ok(rows)
}

/// `P_rho(sigma, sigma_v^a) = rho(v) K(sigma, sigma_v^a)` for `a != sigma(v)`.
pub fn build_glauber_chain(sys: &SpinSystem, rates: &RateVector) -> Result<ReversibleChain> {
    if rates.rho.len() != sys.sites {
        return Err(Error::DimensionMismatch {
            expected: sys.sites,
            found: rates.rho.len(),
        });
    }
    let graph = configuration_graph(sys)?;
    let rows = glauber_rows(sys, &rates.rho)?;
    ReversibleChain::from_sparse_rows(graph, rows)
}

/// `max_{sigma, v, a} 1 / K(sigma, sigma_v^a)`.
pub fn kbar(sys: &SpinSystem) -> Result<f64> {
    let states = sys.state_count()?;
    let mut worst: f64 = 0.0;
    for s in 0..states {
        let sigma = sys.decode(s);
        for v in 0..sys.sites {
            for a in 0..sys.colors {
                let k = glauber_kernel(sys, &sigma, v, a);
                worst = worst.max(if k > 0.0 { 1.0 / k } else { f64::INFINITY });
            }
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct RateOptimum {
    pub rates: RateVector,
    pub tau2: f64,
    pub iterations: usize,
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(x: &mut [f64]) {
    let mut sorted = x.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    for v in x.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
    let total: f64 = x.iter().sum();
    for v in x.iter_mut() {
        *v /= total;
    }
}

/// Minimizes `lambda_2(P_rho)` over rates by projected subgradient descent,
/// starting from uniform rates. `lambda_2` is convex in `rho` since `P_rho` is
/// linear in it.
pub fn optimize_rates(sys: &SpinSystem, iterations: usize) -> Result<RateOptimum> {
    let n = sys.sites;
    let graph = configuration_graph(sys)?;
    let pi = graph.pi().to_vec();
    let per_site: Vec<Vec<Vec<(usize, f64)>>> = (0..n)
        .map(|v| {
            let mut w = vec![0.0; n];
            w[v] = 1.0;
            glauber_rows(sys, &w)
        })
        .collect::<Result<_>>()?;
    let chain_for = |rho: &[f64]| -> Result<ReversibleChain> {
        let rows = (0..pi.len())
            .map(|s| {
                let mut row: Vec<(usize, f64)> = Vec::new();
                for (v, &r) in rho.iter().enumerate() {
                    for &(t, p) in &per_site[v][s] {
                        match row.binary_search_by_key(&t, |&(j, _)| j) {
                            Ok(k) => row[k].1 += r * p,
                            Err(k) => row.insert(k, (t, r * p)),
                        }
                    }
                }
                row
            })
            .collect();
        ReversibleChain::from_sparse_rows(graph.clone(), rows)
    };

    let mut rho = vec![1.0 / n as f64; n];
    let mut best = (f64::INFINITY, rho.clone());
    let mut done = 0;
    for t in 1..=iterations {
        done = t;
        let chain = chain_for(&rho)?;
        let eig = symmetrized_decomposition(&chain)?;
        let l2 = eig.values[1];
        if l2 < best.0 {
            best = (l2, rho.clone());
        }
        // d lambda_2 / d rho(v) = u^T S_v u with S_v the symmetrized site kernel.
        let u = &eig.vectors[1];
        let grad: Vec<f64> = (0..n)
            .map(|v| {
                let mut acc = 0.0;
                for (s, row) in per_site[v].iter().enumerate() {
                    for &(t, p) in row {
                        acc += u[s] * u[t] * p * (pi[s] / pi[t]).sqrt();
                    }
                }
                acc
            })
            .collect();
        let mean = grad.iter().sum::<f64>() / n as f64;
        let centered: Vec<f64> = grad.iter().map(|g| g - mean).collect();
        let norm = dot(&centered, &centered).sqrt();
        if norm < 1e-15 {
            break;
        }
        let step = 0.2 / (n as f64 * (t as f64).sqrt() * norm);
        for (r, g) in rho.iter_mut().zip(&centered) {
            *r -= step * g;
        }
        project_simplex(&mut rho);
    }
    let rates = RateVector::new(best.1)?;
    Ok(RateOptimum {
        rates,
        tau2: relaxation_time(best.0),
        iterations: done,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prop3Report {
    pub sites: usize,
    pub kbar: f64,
    pub tau2_uniform: f64,
    pub tau2_star: f64,
    pub tau2_rates: f64,
    /// `K̄ |V| tau2_star - tau2_uniform`.
    pub margin_star: f64,
    /// `|V| tau2_rates - tau2_uniform`.
    pub margin_rates: f64,
    pub holds: bool,
}

/// Checks `tau2(P_U) <= K̄ |V| tau2*` and `tau2(P_U) <= |V| tau2(P_rho)` for
/// the given optimal relaxation time and rate vector.
pub fn check_prop3(sys: &SpinSystem, tau2_star: f64, rates: &RateVector) -> Result<Prop3Report> {
    let v = sys.sites as f64;
    let k = kbar(sys)?;
    let tau2_uniform =
        spectrum(&build_glauber_chain(sys, &RateVector::uniform(sys.sites))?)?.relaxation_time;
    let tau2_rates = spectrum(&build_glauber_chain(sys, rates)?)?.relaxation_time;
    let margin_star = k * v * tau2_star - tau2_uniform;
    let margin_rates = v * tau2_rates - tau2_uniform;
    Ok(Prop3Report {
        sites: sys.sites,
        kbar: k,
        tau2_uniform,
        tau2_star,
        tau2_rates,
        margin_star,
        margin_rates,
        holds: margin_star >= -1e-6 && margin_rates >= -1e-6,
    })
}
