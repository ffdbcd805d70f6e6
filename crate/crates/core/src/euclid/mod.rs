//! Exact integer Euclidean divisions, digit words, branch maps and costs.

mod cost;
mod expansion;
mod growth;
mod kind;

pub use cost::{CostFunction, CostRule, Lattice, TailRule};
pub use expansion::{
    evaluate_word_at_zero, expand, for_each_digit, reconstruct, total_cost, word_cost,
    word_derivative, Expansion,
};
pub use growth::{moderate_growth_probe, GrowthProbe};
pub use kind::{branch_eval, AlgorithmKind, Digit, Interval, Sign};
