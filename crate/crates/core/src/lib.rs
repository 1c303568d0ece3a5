//! Influence maximization by reverse influence sampling.
//!
//! The crate implements the IMM pipeline (RR-set sampling, greedy node
//! selection and the sampling phase with its data-dependent stopping time)
//! together with two corrected variants:
//!
//! * [`Variant::W1`] regenerates an independent RR-set sequence for the final
//!   node selection, so the final sample no longer depends on the stopping
//!   time.
//! * [`Variant::W2`] keeps a single sequence but inflates the confidence
//!   exponent by a constant `gamma` so the union bound over every possible
//!   stopping time still sums to `1/n^ell`.
//!
//! Exact brute-force oracles for tiny instances live in [`oracle`], and a
//! forward Monte Carlo estimator in [`mc`].
//!
//! Data-parallel loops (RR-set generation, Monte Carlo runs, world
//! enumeration) go through [`Exec`]. With the default `parallel` feature
//! they run on rayon; without it, or with [`Exec::Sequential`], they run on
//! the calling thread and produce bitwise identical results.

pub mod error;
pub mod exec;
pub mod graph;
pub mod imm;
pub mod mc;
pub mod oracle;
pub mod rr;
pub mod seed;
pub mod select;

pub use error::{Error, Result};
pub use exec::Exec;
pub use graph::{Graph, Model};
pub use imm::{ImmOutput, ImmParams, SamplingTrace, Variant};
pub use mc::SpreadEstimate;
pub use rr::{CoverageIndex, RRSequence, RRSet};
pub use select::SeedResult;

/// Node identifier. Graphs are dense, so ids run over `0..n`.
pub type NodeId = u32;
