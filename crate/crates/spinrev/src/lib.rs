//! Spin-reversal (gauge) transforms for Ising and QUBO problems.
//!
//! An Ising problem is the minimization of
//!
//!   H(x_1, …, x_n) = Σ_i a_i x_i + Σ_{i<j} a_ij x_i x_j
//!
//! over spins x_i ∈ {-1, +1} (or bits {0, 1} in the QUBO form). Reversing a
//! set of spins — negating their linear weights and incident couplers —
//! produces an equivalent model whose minima map back by sign flips. On
//! analog annealing hardware the two models are *not* realized identically,
//! so the choice of reversal mask affects solution quality. This crate
//! provides:
//!
//! - [`model`]: sparse Ising/QUBO models, energy evaluation, conversions,
//!   rescaling, and exhaustive ground-state search.
//! - [`gauge`]: spin-reversal masks and the qubit-level transform.
//! - [`graph`]: Erdős–Rényi generation plus Maximum Clique and Minimum
//!   Vertex Cover QUBO reductions with decoders and oracles.
//! - [`chimera`]: Chimera topologies, complete-graph chain embeddings,
//!   logical→physical model expansion, majority-vote unembedding, and
//!   chain-level masks.
//! - [`noise`] / [`sampler`]: a classical Metropolis annealer emulation with
//!   a persistent, gauge-dependent hardware noise model.
//! - [`ga`]: genetic search over reversal masks minimizing sampled energy.
//! - [`experiments`]: seeded sweep/study harnesses with CSV and SVG output.
//!
//! With the `parallel` feature (default) the embarrassingly parallel loops
//! (anneal reads, population evaluation, sweep grids) run on rayon; results
//! are bit-identical to the sequential fallback because every work item
//! derives its own RNG seed.

pub mod chimera;
pub mod error;
pub mod experiments;
pub mod ga;
pub mod gauge;
pub mod graph;
pub mod model;
pub mod noise;
pub mod sampler;
pub mod seed;
pub mod svg;

mod exec;

pub use error::{Error, Result};
pub use gauge::SpinReversalMask;
pub use model::{IsingModel, QuboModel, SpinState, VarDomain};
