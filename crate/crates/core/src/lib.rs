//! Model-agnostic engine for trie-constrained beam search with a planning
//! look-ahead bonus, together with plan-drift diagnostics, query-variation
//! generators, and retrieval effectiveness metrics.
//!
//! The pipeline: a [`corpus::Corpus`] pairs each document with a sequential
//! docid (decoded by beam search over the [`trie::DocidTrie`]) and a
//! set-based docid (scored in one pass by the [`planner`]). The
//! [`decode`] module runs beam search whose pruning score adds a look-ahead
//! bonus from the planning set, [`metrics`] evaluates runs, [`variations`]
//! produces fixed perturbed query sets, and [`diagnostics`] quantifies how
//! much the planning signal drifts under those perturbations.
//!
//! Everything randomized flows through the portable generator in [`rng`],
//! so a seed reproduces byte-identical artifacts on any platform.

pub mod corpus;
pub mod decode;
pub mod diagnostics;
pub mod error;
pub mod fixtures;
pub mod metrics;
pub mod planner;
pub mod rng;
pub mod rq;
pub mod run;
pub mod scorer;
pub mod trie;
pub mod variations;

pub use error::{Error, Result};
