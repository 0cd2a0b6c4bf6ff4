//! Scenario-generation toolkit for joint load and wind-power forecast
//! deviations.
//!
//! The model is fitted in stages: CSV ingest into an aligned deviation
//! panel, harmonic seasonal removal, semi-parametric heavy-tailed marginals
//! (empirical body, generalized Pareto tails), gaussianization through the
//! fitted CDFs, and a Kronecker-structured sparse precision estimate
//! (graphical lasso on each factor). Simulation reverses the chain with
//! seeded Monte Carlo draws, producing scenario batches, envelope bands,
//! and dependency-graph exports.

// Validation guards are written `!(x > 0.0)` on purpose: the negated form
// rejects NaN, the "cleaner" `x <= 0.0` would let it through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod config;
pub mod error;
pub mod export;
pub mod gaussianize;
pub mod gemini;
pub mod glasso;
pub mod graph;
pub mod ingest;
pub mod normal;
pub mod panel;
pub mod pipeline;
pub mod seasonal;
pub mod simulate;
pub mod stats;
pub mod synthetic;
pub mod tails;

pub use error::{Error, Result};
