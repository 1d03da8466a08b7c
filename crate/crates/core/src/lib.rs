//! Augmented structural causal models for counterfactual analysis of
//! classifiers.
//!
//! A model couples generative features `V`, a mixture `X` that hides them
//! (pixels), and a classifier `Ŷ` reading either `X` or a feature set `T`.
//! The crate parses models from a small text language, enumerates them
//! exactly, induces their causal diagram, decides which interventional
//! queries a feature set can answer, and evaluates those queries both by
//! brute-force counterfactual reasoning and by an observational formula.

pub mod admissibility;
pub mod cli;
pub mod corpus;
pub mod ctf;
pub mod dsl;
pub mod error;
pub mod graph;
pub mod joint;
pub mod prob;
pub mod random;
pub mod scm;
pub mod suite;

pub use error::{Error, Result};
pub use graph::CausalDiagram;
pub use joint::JointTable;
pub use prob::Prob;
pub use scm::{Assignment, Scm};
