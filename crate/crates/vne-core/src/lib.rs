//! Energy-aware virtual network embedding.
//!
//! This crate maps virtual network requests (VNRs) onto substrate networks
//! while minimizing embedding cost plus server energy consumption. It
//! provides:
//!
//! - [`topology`]: attributed graph model for substrate and virtual
//!   networks, Waxman-style random generators, and BRITE-format persistence;
//! - [`energy`]: the linear server power model and the cost / revenue /
//!   fitness arithmetic;
//! - [`pso`]: a discrete particle swarm embedder operating on candidate
//!   host lists with set-based subtraction, roulette addition, and
//!   reselecting multiplication operators;
//! - [`partition`]: heavy-clique-matching coarsening that splits a request
//!   across data centers, plus the distributed embedding driver;
//! - [`sim`]: a discrete-event simulator replaying a VNR workload with
//!   exact resource accounting, a greedy baseline, and metric collection.

pub mod alloc;
pub mod energy;
pub mod partition;
pub mod pso;
pub mod sim;
pub mod topology;

mod error;

pub use error::{Result, VneError};
