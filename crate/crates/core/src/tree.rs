//! Complete `b`-ary trees: DFS node widths, the `B_v` rate weights, and the
//! recursive-majority cut.
//!
//! Sites are numbered in depth-first preorder from the root `0`; children are
//! visited in increasing order, so the `q`-th child of a node is its `q`-th
//! visited child.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::glauber::{gibbs_distribution, glauber_kernel, RateVector, SpinSystem};
use crate::linalg::{ln_exp_m1, log_sum_exp};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeSpec {
    pub b: usize,
    pub r: usize,
    parent: Vec<Option<usize>>,
    level: Vec<usize>,
    /// 1-based position among the parent's children.
    child_rank: Vec<usize>,
    children: Vec<Vec<usize>>,
}

impl TreeSpec {
    pub fn new(b: usize, r: usize) -> Result<Self> {
        if b < 2 || r < 1 {
            return Err(Error::InvalidParameter(format!(
                "tree needs b >= 2 and r >= 1, got b={b}, r={r}"
            )));
        }
        let n = u32::try_from(r + 1)
            .ok()
            .and_then(|e| b.checked_pow(e))
            .map(|p| (p - 1) / (b - 1))
            .filter(|&n| n <= 1 << 26)
            .ok_or_else(|| Error::InvalidParameter(format!("tree b={b}, r={r} is too large")))?;
        let mut spec = Self {
            b,
            r,
            parent: Vec::with_capacity(n),
            level: Vec::with_capacity(n),
            child_rank: Vec::with_capacity(n),
            children: Vec::with_capacity(n),
        };
        spec.grow(None, 0, 0);
        debug_assert_eq!(spec.parent.len(), n);
        Ok(spec)
    }

    fn grow(&mut self, parent: Option<usize>, level: usize, rank: usize) {
        let id = self.parent.len();
        self.parent.push(parent);
        self.level.push(level);
        self.child_rank.push(rank);
        self.children.push(Vec::new());
        if let Some(p) = parent {
            self.children[p].push(id);
        }
        if level < self.r {
            for q in 1..=self.b {
                self.grow(Some(id), level + 1, q);
            }
        }
    }

    /// `(b^{r+1} - 1) / (b - 1)`.
    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn level(&self, v: usize) -> usize {
        self.level[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(|&v| self.level[v] == self.r)
    }

    /// `(parent, child)` pairs in DFS order of the child.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (1..self.node_count())
            .map(|v| (self.parent[v].expect("non-root"), v))
            .collect()
    }

    /// Maximum degree: `b + 1` once there are internal non-root nodes.
    pub fn max_degree(&self) -> usize {
        if self.r >= 2 {
            self.b + 1
        } else {
            self.b
        }
    }
}

/// Number of edges leaving each prefix of `order`: entry `k` counts edges
/// between `order[..=k]` and the remaining nodes.
pub fn cut_widths(n: usize, edges: &[(usize, usize)], order: &[usize]) -> Result<Vec<usize>> {
    let mut position = vec![usize::MAX; n];
    for (k, &v) in order.iter().enumerate() {
        if v >= n || position[v] != usize::MAX {
            return Err(Error::InvalidParameter(
                "order must be a permutation of the nodes".into(),
            ));
        }
        position[v] = k;
    }
    if order.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: order.len(),
        });
    }
    // An edge crosses prefix k when exactly one endpoint is within it.
    let mut delta = vec![0isize; n + 1];
    for &(a, b) in edges {
        let (lo, hi) = (position[a].min(position[b]), position[a].max(position[b]));
        delta[lo] += 1;
        delta[hi] -= 1;
    }
    let mut widths = Vec::with_capacity(n);
    let mut running = 0isize;
    for d in &delta[..n] {
        running += d;
        widths.push(running as usize);
    }
    Ok(widths)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeWidths {
    pub widths: Vec<usize>,
    pub max: usize,
}

/// Widths `xi(v)` under the DFS ordering, from the parent recursion.
pub fn node_widths(tree: &TreeSpec) -> NodeWidths {
    let n = tree.node_count();
    let mut widths = vec![0; n];
    widths[0] = tree.b;
    // Preorder: parents precede children.
    for v in 1..n {
        let w = widths[tree.parent[v].expect("non-root")];
        let q = tree.child_rank[v];
        widths[v] = if tree.level[v] < tree.r {
            w + tree.b - q
        } else {
            w - q
        };
    }
    let max = widths.iter().copied().max().unwrap_or(0);
    NodeWidths { widths, max }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BvBounds {
    pub log_b: Vec<f64>,
    /// `B_v`, `+inf` where it overflows.
    pub b: Vec<f64>,
    /// `ln sum_v B_v`, summed node by node.
    pub log_sum: f64,
    /// `ln (sum_v B_v / |V|)`.
    pub log_mean: f64,
    pub log_max: f64,
    /// `ln` of the per-level sums, level 0 first.
    pub log_level_sums: Vec<f64>,
    /// `ln zeta(b, beta)`.
    pub log_zeta: f64,
    /// `ln sum_v B_v` from the geometric-series closed form.
    pub log_sum_closed_form: f64,
}

impl BvBounds {
    pub fn mean(&self) -> f64 {
        self.log_mean.exp()
    }

    pub fn max(&self) -> f64 {
        self.log_max.exp()
    }
}

/// `ln zeta(b, beta)` with `zeta = (e^{4 b beta} - 1) / (e^{4 beta} - 1)`,
/// continuous at `beta = 0` where `zeta = b`.
pub fn log_zeta(b: usize, beta: f64) -> f64 {
    if beta == 0.0 {
        (b as f64).ln()
    } else {
        ln_exp_m1(4.0 * b as f64 * beta) - ln_exp_m1(4.0 * beta)
    }
}

/// `ln B_v = 2 ln |V| + (4 xi(v) + 2 Delta) beta` for arbitrary widths, e.g.
/// from [`cut_widths`] on a general site graph.
pub fn log_bv(widths: &[usize], max_degree: usize, beta: f64) -> Vec<f64> {
    let prefix = 2.0 * (widths.len() as f64).ln();
    widths
        .iter()
        .map(|&xi| prefix + (4.0 * xi as f64 + 2.0 * max_degree as f64) * beta)
        .collect()
}

/// `B_v = |V|^2 exp((4 xi(v) + 2 Delta) beta)` in log space, with aggregates.
pub fn bv_bounds(tree: &TreeSpec, beta: f64) -> Result<BvBounds> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
    }
    let n = tree.node_count();
    let delta = tree.max_degree() as f64;
    let prefix = 2.0 * (n as f64).ln();
    let log_b = log_bv(&node_widths(tree).widths, tree.max_degree(), beta);
    let log_sum = log_sum_exp(log_b.iter().copied());
    let log_max = log_b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_level_sums = (0..=tree.r)
        .map(|l| log_sum_exp((0..n).filter(|&v| tree.level[v] == l).map(|v| log_b[v])))
        .collect();

    let lz = log_zeta(tree.b, beta);
    let r = tree.r as f64;
    let b4 = 4.0 * tree.b as f64 * beta;
    // (zeta^r - 1) / (zeta - 1); zeta > 1 for b >= 2.
    let log_series = ln_exp_m1(r * lz) - ln_exp_m1(lz);
    let log_sum_closed_form =
        prefix + (4.0 * tree.b as f64 + 2.0 * delta) * beta + log_sum_exp([log_series, r * lz - b4]);

    Ok(BvBounds {
        b: log_b.iter().map(|l| l.exp()).collect(),
        log_b,
        log_sum,
        log_mean: log_sum - (n as f64).ln(),
        log_max,
        log_level_sums,
        log_zeta: lz,
        log_sum_closed_form,
    })
}

/// Rates proportional to `B_v`. The claimed bound on the relaxation time of the
/// resulting Glauber chain is `sum_v B_v / |V|`.
pub fn optimal_rates(tree: &TreeSpec, beta: f64) -> Result<(RateVector, f64)> {
    let bounds = bv_bounds(tree, beta)?;
    let mut rho: Vec<f64> = bounds
        .log_b
        .iter()
        .map(|l| (l - bounds.log_sum).exp())
        .collect();
    let total: f64 = rho.iter().sum();
    for x in &mut rho {
        *x /= total;
    }
    Ok((RateVector::new(rho)?, bounds.mean()))
}

/// Recursive majority of a `+-1` configuration indexed by site.
pub fn recursive_majority(tree: &TreeSpec, sigma: &[i8]) -> Result<i8> {
    if tree.b % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "recursive majority needs odd b, got {}",
            tree.b
        )));
    }
    let n = tree.node_count();
    if sigma.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: sigma.len(),
        });
    }
    if sigma.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::InvalidParameter("spins must be +1 or -1".into()));
    }
    let mut m = vec![0i8; n];
    for v in (0..n).rev() {
        m[v] = if tree.level[v] == tree.r {
            sigma[v]
        } else {
            let s: i32 = tree.children[v].iter().map(|&c| m[c] as i32).sum();
            s.signum() as i8
        };
    }
    Ok(m[0])
}

/// Majority of the configuration with bit `v` set for `+1` at site `v`.
fn majority_of_index(tree: &TreeSpec, index: usize, scratch: &mut [i8]) -> i8 {
    for v in (0..tree.node_count()).rev() {
        scratch[v] = if tree.level[v] == tree.r {
            if index >> v & 1 == 1 {
                1
            } else {
                -1
            }
        } else {
            let s: i32 = tree.children[v].iter().map(|&c| scratch[c] as i32).sum();
            s.signum() as i8
        };
    }
    scratch[0]
}

/// Largest tree, in sites, enumerated exactly by [`majority_cut_bound`].
pub const MAJORITY_EXACT_SITES: usize = 13;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MajorityExact {
    pub pi_s: f64,
    /// `pi(S)` and `pi(S^c)` agree bit for bit, configuration by configuration.
    pub exact_pairing: bool,
    /// Mass of configurations in `S` with a neighbour outside `S`.
    pub pi_inner_boundary: f64,
    /// Conductance of `S` under uniform-rate Glauber dynamics.
    pub phi_s: f64,
    /// Probability that flipping a leaf changes the majority, for each leaf.
    pub leaf_flip: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MajorityBound {
    pub epsilon: f64,
    /// `(2 eps + 8 eps^2)^{r-1}`.
    pub flip_bound: f64,
    /// `3^r / 2 * flip_bound`.
    pub boundary_bound: f64,
    /// `1 - 2 * 3^r * flip_bound`, lower bound on the optimal `lambda_2`.
    pub lambda2_star_lower: f64,
    /// `1 / (2 * 3^r * flip_bound)`, lower bound on the optimal relaxation time.
    pub tau2_star_lower: f64,
    /// `1 - 2 * flip_bound`, lower bound on `lambda_2` of uniform Glauber.
    pub lambda2_uniform_lower: f64,
    /// `lambda2_star_lower <= 0`.
    pub vacuous: bool,
    pub exact: Option<MajorityExact>,
}

/// Recursive-majority conductance bounds for the ternary Ising tree.
pub fn majority_cut_bound(tree: &TreeSpec, beta: f64) -> Result<MajorityBound> {
    if tree.b != 3 {
        return Err(Error::InvalidParameter(format!(
            "majority cut bound needs b = 3, got {}",
            tree.b
        )));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
    }
    let epsilon = 1.0 / (1.0 + (2.0 * beta).exp());
    let flip_bound = (2.0 * epsilon + 8.0 * epsilon * epsilon).powi(tree.r as i32 - 1);
    let three_r = 3f64.powi(tree.r as i32);
    let lambda2_star_lower = 1.0 - 2.0 * three_r * flip_bound;
    let exact = if tree.node_count() <= MAJORITY_EXACT_SITES {
        Some(majority_exact(tree, beta)?)
    } else {
        None
    };
    Ok(MajorityBound {
        epsilon,
        flip_bound,
        boundary_bound: three_r / 2.0 * flip_bound,
        lambda2_star_lower,
        tau2_star_lower: 1.0 / (2.0 * three_r * flip_bound),
        lambda2_uniform_lower: 1.0 - 2.0 * flip_bound,
        vacuous: lambda2_star_lower <= 0.0,
        exact,
    })
}

fn majority_exact(tree: &TreeSpec, beta: f64) -> Result<MajorityExact> {
    let sys = SpinSystem::ising_tree(tree, beta)?;
    let pi = gibbs_distribution(&sys)?;
    let n = tree.node_count();
    let states = pi.len();
    let mut scratch = vec![0i8; n];
    let m: Vec<i8> = (0..states)
        .map(|s| majority_of_index(tree, s, &mut scratch))
        .collect();
    let full = states - 1;

    let mut pi_s = 0.0;
    let mut exact_pairing = true;
    let mut pi_inner_boundary = 0.0;
    let mut flow_out = 0.0;
    let leaves: Vec<usize> = tree.leaves().collect();
    let mut leaf_flip = vec![0.0; leaves.len()];
    let mut sigma = vec![0usize; n];
    for s in 0..states {
        if m[s] != -m[full ^ s] || pi[s] != pi[full ^ s] {
            exact_pairing = false;
        }
        for (k, &leaf) in leaves.iter().enumerate() {
            if m[s ^ (1 << leaf)] != m[s] {
                leaf_flip[k] += pi[s];
            }
        }
        if m[s] != 1 {
            continue;
        }
        pi_s += pi[s];
        for (v, c) in sigma.iter_mut().enumerate() {
            *c = s >> v & 1;
        }
        let mut on_boundary = false;
        for v in 0..n {
            let t = s ^ (1 << v);
            if m[t] == -1 {
                on_boundary = true;
                let k = glauber_kernel(&sys, &sigma, v, 1 - sigma[v]);
                flow_out += pi[s] * k / n as f64;
            }
        }
        if on_boundary {
            pi_inner_boundary += pi[s];
        }
    }
    Ok(MajorityExact {
        pi_s,
        exact_pairing,
        pi_inner_boundary,
        phi_s: flow_out / pi_s,
        leaf_flip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_counts() {
        assert_eq!(TreeSpec::new(3, 1).unwrap().node_count(), 4);
        assert_eq!(TreeSpec::new(3, 2).unwrap().node_count(), 13);
        assert_eq!(TreeSpec::new(2, 6).unwrap().node_count(), 127);
        assert!(TreeSpec::new(1, 3).is_err());
        assert!(TreeSpec::new(2, 0).is_err());
    }

    #[test]
    fn dfs_layout() {
        let t = TreeSpec::new(2, 2).unwrap();
        assert_eq!(t.children(0), &[1, 4]);
        assert_eq!(t.children(1), &[2, 3]);
        assert_eq!(t.leaves().collect::<Vec<_>>(), vec![2, 3, 5, 6]);
        assert_eq!(t.max_degree(), 3);
        assert_eq!(TreeSpec::new(3, 1).unwrap().max_degree(), 3);
    }

    #[test]
    fn widths_small_trees() {
        let w = node_widths(&TreeSpec::new(3, 1).unwrap());
        assert_eq!(w.widths, vec![3, 2, 1, 0]);
        let t = TreeSpec::new(3, 2).unwrap();
        let w = node_widths(&t);
        assert_eq!(w.widths[1], 5);
        assert_eq!(w.max, 5);
    }

    #[test]
    fn cut_widths_on_a_path() {
        let w = cut_widths(4, &[(0, 1), (1, 2), (2, 3)], &[0, 1, 2, 3]).unwrap();
        assert_eq!(w, vec![1, 1, 1, 0]);
        let w = cut_widths(4, &[(0, 1), (1, 2), (2, 3)], &[1, 3, 0, 2]).unwrap();
        assert_eq!(w, vec![2, 3, 2, 0]);
        assert!(cut_widths(3, &[(0, 1)], &[0, 0, 1]).is_err());
    }

    #[test]
    fn zeta_value() {
        // e^{4 beta} = 2 gives (8 - 1) / (2 - 1).
        let beta = 2f64.ln() / 4.0;
        assert!((log_zeta(3, beta).exp() - 7.0).abs() < 1e-12);
        assert!((log_zeta(3, 0.0).exp() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn star_bounds() {
        let t = TreeSpec::new(3, 1).unwrap();
        let bv = bv_bounds(&t, 0.7).unwrap();
        let expected = 2.0 * 4f64.ln() + (12.0 + 6.0) * 0.7;
        assert!((bv.log_max - expected).abs() < 1e-12);
        assert!((bv.log_sum - bv.log_sum_closed_form).abs() < 1e-12);
        let (rates, _) = optimal_rates(&t, 0.7).unwrap();
        assert!(rates.rho[0] > rates.rho[1]);
    }

    #[test]
    fn majority_examples() {
        let t = TreeSpec::new(3, 1).unwrap();
        assert_eq!(recursive_majority(&t, &[-1, 1, 1, -1]).unwrap(), 1);
        let t2 = TreeSpec::new(3, 2).unwrap();
        let mut sigma = vec![-1i8; 13];
        for v in [0, 1, 5, 9] {
            sigma[v] = 1;
        }
        assert_eq!(recursive_majority(&t2, &sigma).unwrap(), -1);
        assert!(recursive_majority(&TreeSpec::new(2, 1).unwrap(), &[1, 1, 1]).is_err());
    }

    #[test]
    fn majority_bound_flags() {
        let t = TreeSpec::new(3, 1).unwrap();
        let m = majority_cut_bound(&t, 0.0).unwrap();
        assert_eq!(m.epsilon, 0.5);
        assert_eq!(m.flip_bound, 1.0);
        assert!(m.vacuous);
        assert!(majority_cut_bound(&TreeSpec::new(2, 2).unwrap(), 1.0).is_err());
    }
}
