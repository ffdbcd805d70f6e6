//! The uniform model on coprime pairs, its smoothed variant, and the engines
//! that traverse them.
//!
//! Two exhaustive traversals exist. [`enumerate_pairs`] scans denominators and
//! tests coprimality; it is simple and partitions by denominator range.
//! [`sweep`] walks the tree of digit words from the last digit outwards,
//! producing every pair exactly once together with its accumulated costs in
//! O(1) work per pair; it partitions by subtree.

mod count;
mod distance;
mod mc;
mod space;
mod sweep;

pub use distance::model_distance;
pub use count::{count_omega, count_omega_brute, omega_prefix_counts, totients};
pub use mc::{monte_carlo, MC_CHUNK, Draw, sample_pair_in_triangle, sample_smoothed, sample_uniform, substream};
pub use space::{
    denominator_shards, enumerate_pairs, enumerate_range, Mode, SampleSpace, SmoothedModel,
};
pub use sweep::{default_threads, sweep, PairVisitor, PathPair, SweepOptions, SweepPlan};
