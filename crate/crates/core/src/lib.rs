//! Dynamical analysis of the standard, centred and odd Euclidean algorithms.
//!
//! The crate has five layers:
//!
//! - [`euclid`]: exact divisions, digit words and additive costs;
//! - [`sample_space`]: the uniform model on coprime pairs and its smoothed variant;
//! - [`cost_stats`]: empirical distributions of total costs and limit-law statistics;
//! - [`spectral`]: a collocation discretization of the weighted transfer operator;
//! - [`dirichlet`]: the Dirichlet series of costs and its operator form.

pub mod cost_stats;
pub mod dirichlet;
pub mod error;
pub mod euclid;
pub mod numeric;
pub mod sample_space;
pub mod spectral;

pub use error::{Error, Result};
pub use euclid::{AlgorithmKind, CostFunction, Digit, Expansion, Sign};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/algorithms.md")]
    pub mod algorithms {}
    #[doc = include_str!("../../../book/src/sample-spaces.md")]
    pub mod sample_spaces {}
    #[doc = include_str!("../../../book/src/cost-statistics.md")]
    pub mod cost_statistics {}
    #[doc = include_str!("../../../book/src/transfer-operator.md")]
    pub mod transfer_operator {}
    #[doc = include_str!("../../../book/src/dirichlet.md")]
    pub mod dirichlet {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
