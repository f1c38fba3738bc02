mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

use fastmix::chain::symmetric_walk;
use fastmix::families;
use fastmix::linalg::symmetric_eigen;
use fastmix::spectral::{rayleigh_quotient, right_eigenvector, spectrum, symmetrized_decomposition};

use common::{fixed, graph_and_chain, rng};

/// Eigenvalues of the (non-symmetric) transition matrix, computed by nalgebra.
fn nalgebra_eigenvalues(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let mut ev: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.re).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

#[test]
fn rayleigh_dominates_gap() {
    for k in 0..200u64 {
        let (g, chain) = graph_and_chain(k, 2 + (k as usize) % 7, k % 3 != 0);
        let gap = 1.0 - spectrum(&chain).unwrap().lambda2;
        let mut r = rng(1000 + k);
        for _ in 0..20 {
            let f: Vec<f64> = (0..g.node_count()).map(|_| r.random::<f64>() - 0.5).collect();
            if let Ok(q) = rayleigh_quotient(&chain, &f) {
                assert!(q >= gap - 1e-9, "chain {k}: {q} < {gap}");
            }
        }
    }
}

proptest! {
    #![proptest_config(fixed(64))]

    #[test]
    fn similarity_invariance(seed in any::<u64>(), n in 2usize..9, weighted in any::<bool>()) {
        let (_, chain) = graph_and_chain(seed, n, weighted);
        let ours = spectrum(&chain).unwrap().eigenvalues;
        let theirs = nalgebra_eigenvalues(&chain.to_dense().to_rows());
        for (a, b) in ours.iter().zip(&theirs) {
            prop_assert!((a - b).abs() <= 1e-9, "{:?} vs {:?}", ours, theirs);
        }
    }

    #[test]
    fn summary_invariants(seed in any::<u64>(), n in 2usize..9) {
        let (_, chain) = graph_and_chain(seed, n, true);
        let s = spectrum(&chain).unwrap();
        prop_assert!((s.eigenvalues[0] - 1.0).abs() <= 1e-9);
        prop_assert!(s.eigenvalues.iter().all(|l| (-1.0 - 1e-9..=1.0 + 1e-9).contains(l)));
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(s.relaxation_time, fastmix::spectral::relaxation_time(s.lambda2));
    }

    #[test]
    fn deterministic(seed in any::<u64>(), n in 2usize..9) {
        let (_, chain) = graph_and_chain(seed, n, true);
        let a = spectrum(&chain).unwrap();
        let b = spectrum(&chain).unwrap();
        prop_assert!(a.eigenvalues.iter().zip(&b.eigenvalues).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn eigenvector_attains_gap(seed in any::<u64>(), n in 2usize..9) {
        let (_, chain) = graph_and_chain(seed, n, true);
        let eig = symmetrized_decomposition(&chain).unwrap();
        let g = right_eigenvector(&chain, &eig, 1);
        let q = rayleigh_quotient(&chain, &g).unwrap();
        prop_assert!((q - (1.0 - eig.values[1])).abs() <= 1e-8);
    }
}

#[test]
fn circulant_spectra() {
    for n in 3..12 {
        let s = spectrum(&symmetric_walk(&families::cycle(n).unwrap()).unwrap()).unwrap();
        let mut expected: Vec<f64> = (0..n)
            .map(|k| (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect();
        expected.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in s.eigenvalues.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn jacobi_matches_nalgebra_on_symmetric_input() {
    let mut r = rng(3);
    for n in [1, 2, 5, 17, 40] {
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let x = r.random::<f64>() - 0.5;
                rows[i][j] = x;
                rows[j][i] = x;
            }
        }
        let m = fastmix::linalg::SquareMatrix::from_rows(&rows).unwrap();
        let ours = symmetric_eigen(&m).unwrap().values;
        let mut theirs: Vec<f64> = DMatrix::from_fn(n, n, |i, j| rows[i][j])
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        theirs.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() < 1e-11);
        }
    }
}
