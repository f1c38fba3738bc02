//! Fastest-mixing reversible Markov chains on graphs.
//!
//! Given a connected graph and a target stationary distribution `pi`, the
//! crate bounds the smallest relaxation time any reversible chain on the graph
//! can have:
//!
//! - [`lower`]: embedding bounds and the vertex-expansion bound;
//! - [`upper`]: canonical-path congestion with equalized flows, Cheeger-type bound;
//! - [`solver`]: a projected subgradient solver for the optimum itself;
//! - [`glauber`] and [`tree`]: Glauber dynamics with optimized site rates,
//!   specialized to the Ising model on complete trees;
//! - [`experiment`]: tables checking lower bound <= optimum <= upper bound.

pub mod chain;
pub mod error;
pub mod experiment;
pub mod families;
pub mod glauber;
pub mod graph;
pub mod linalg;
pub mod lower;
pub mod solver;
pub mod spectral;
pub mod tree;
pub mod upper;

pub use chain::{edge_flow, max_degree_chain, symmetric_walk, validate_chain, ReversibleChain};
pub use error::{Error, Result};
pub use graph::TransitionGraph;
pub use spectral::{spectrum, SpectralSummary};
