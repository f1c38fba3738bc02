//! Spectra of reversible chains and the relaxation time.

use serde::Serialize;

use crate::chain::{validate_chain, ReversibleChain};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, SymmetricEigen};

/// Largest chain handled by the dense eigensolver.
pub const DENSE_SPECTRUM_LIMIT: usize = 4096;

/// `lambda_2` at or above `1 - GAP_FLOOR` has infinite relaxation time.
pub const GAP_FLOOR: f64 = 1e-12;

/// Sorted spectrum of a reversible chain. `relaxation_time` is `+inf` for
/// reducible chains (serialized as `null`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub eigenvalues: Vec<f64>,
    pub lambda2: f64,
    pub relaxation_time: f64,
}

/// `1 / (1 - lambda_2)` with the `+inf` sentinel.
pub fn relaxation_time(lambda2: f64) -> f64 {
    if lambda2 >= 1.0 - GAP_FLOOR {
        f64::INFINITY
    } else {
        1.0 / (1.0 - lambda2)
    }
}

impl SpectralSummary {
    pub fn from_eigenvalues(eigenvalues: Vec<f64>) -> Self {
        // A single state has no nontrivial eigenvalue and mixes immediately.
        let lambda2 = eigenvalues.get(1).copied().unwrap_or(f64::NEG_INFINITY);
        Self {
            eigenvalues,
            lambda2,
            relaxation_time: relaxation_time(lambda2),
        }
    }
}

/// Eigen-decomposition of the symmetrized chain `D^{1/2} P D^{-1/2}`.
/// Rejects chains that fail validation.
pub fn symmetrized_decomposition(chain: &ReversibleChain) -> Result<SymmetricEigen> {
    let n = chain.node_count();
    if n > DENSE_SPECTRUM_LIMIT {
        return Err(Error::TooLarge {
            what: "dense spectrum",
            size: n,
            limit: DENSE_SPECTRUM_LIMIT,
        });
    }
    let report = validate_chain(chain);
    if !report.is_empty() {
        return Err(Error::InvalidChain(report));
    }
    symmetric_eigen(&chain.symmetrized())
}

pub fn spectrum(chain: &ReversibleChain) -> Result<SpectralSummary> {
    Ok(SpectralSummary::from_eigenvalues(
        symmetrized_decomposition(chain)?.values,
    ))
}

/// Eigenvector of `P` for the `k`-th eigenvalue: `D^{-1/2} u_k`.
pub fn right_eigenvector(chain: &ReversibleChain, eig: &SymmetricEigen, k: usize) -> Vec<f64> {
    eig.vectors[k]
        .iter()
        .zip(chain.graph().pi())
        .map(|(u, p)| u / p.sqrt())
        .collect()
}

/// Dirichlet form over unordered pairs, `sum_{i<j} (g(i) - g(j))^2 Q(i,j)`.
pub fn dirichlet_form(chain: &ReversibleChain, g: &[f64]) -> f64 {
    let pi = chain.graph().pi();
    let mut total = 0.0;
    for i in 0..chain.node_count() {
        for &(j, p) in chain.row(i) {
            if j > i {
                let d = g[i] - g[j];
                total += d * d * pi[i] * p;
            }
        }
    }
    total
}

pub fn variance(pi: &[f64], g: &[f64]) -> f64 {
    let mean: f64 = pi.iter().zip(g).map(|(p, x)| p * x).sum();
    pi.iter().zip(g).map(|(p, x)| p * (x - mean) * (x - mean)).sum()
}

/// Dirichlet form divided by `Var_pi(g)`; bounded below by `1 - lambda_2`.
pub fn rayleigh_quotient(chain: &ReversibleChain, g: &[f64]) -> Result<f64> {
    let pi = chain.graph().pi();
    if g.len() != pi.len() {
        return Err(Error::DimensionMismatch {
            expected: pi.len(),
            found: g.len(),
        });
    }
    let var = variance(pi, g);
    let scale: f64 = pi.iter().zip(g).map(|(p, x)| p * x * x).sum();
    if !(var > 1e-14 * scale) {
        return Err(Error::ConstantFunction);
    }
    Ok(dirichlet_form(chain, g) / var)
}
