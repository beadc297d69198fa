//! Sampling and exact computation for causal triangulations (CTs) and the
//! tree ensembles they are equivalent to.
//!
//! The crate is organised around the chain of objects
//!
//! ```text
//! offspring law  ->  random trees  ->  causal triangulations  ->  reduced half-line graphs
//! ```
//!
//! with three kinds of machinery layered on top:
//!
//! * exact closed forms and recursions ([`exact`]) used as oracles,
//! * random-walk engines and return-probability generating functions ([`walk`]),
//! * effective-resistance solvers ([`resistance`]) and dimension estimators
//!   ([`dimensions`]).
//!
//! Every sampler is a pure function of `(parameters, seed, stream)` so replica
//! sets reproduce bit-for-bit regardless of thread count. See the `examples/`
//! directory for one runnable program per capability; the `ctlab` binary wraps
//! the same drivers behind subcommands.

pub mod bijection;
pub mod cli;
pub mod dimensions;
pub mod ensembles;
pub mod exact;
pub mod offspring;
pub mod resistance;
pub mod rng;
pub mod stats;
pub mod walk;

pub use bijection::{AdjacencyGraph, CausalTriangulation};
pub use ensembles::ReducedGraph;
pub use offspring::{OffspringDistribution, PlanarTree, SpineTree};
