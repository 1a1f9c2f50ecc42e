//! Sampling-based feature importance for fixed-size binary decision trees.
//!
//! The pipeline encodes the space of all binary decision trees with `2N+1`
//! nodes and training accuracy at or above a threshold as a CNF formula,
//! draws trees uniformly from that space, and scores each feature by its
//! emergence probability: the fraction of branch nodes the feature occupies
//! across the sampled trees. A brute-force enumerator provides exact ground
//! truth at desk scale so the encoding and the sampler can be cross-checked.

pub mod cnf;
pub mod dataset;
pub mod encoder;
pub mod importance;
pub mod oracle;
pub mod sampler;
pub mod satcore;
pub mod tree;

pub use cnf::{Cnf, Lit, Var};
pub use dataset::Dataset;
pub use encoder::{EncodingParams, VarMap};
pub use tree::DecisionTree;
