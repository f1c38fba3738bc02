#![allow(dead_code)]

use proptest::test_runner::{Config, RngSeed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fastmix::{families, ReversibleChain, TransitionGraph};

pub const SEED: u64 = 0x5eed;

pub fn fixed(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(SEED),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected graph on `n` nodes, random `pi` when `weighted`.
pub fn graph(seed: u64, n: usize, weighted: bool) -> TransitionGraph {
    families::random_connected(n, 0.35, weighted, &mut rng(seed)).unwrap()
}

pub fn graph_and_chain(seed: u64, n: usize, weighted: bool) -> (TransitionGraph, ReversibleChain) {
    let mut r = rng(seed);
    let g = families::random_connected(n, 0.35, weighted, &mut r).unwrap();
    let c = ReversibleChain::random(g.clone(), &mut r);
    (g, c)
}
