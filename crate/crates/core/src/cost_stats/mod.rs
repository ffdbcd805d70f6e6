//! Empirical laws of total costs: moments, characteristic functions and the
//! statistics used to check the central and local limit theorems.

mod clt;
mod decay;
mod llt;
mod profile;
mod regression;
mod summary;

pub use clt::{clt_table, ks_from_atoms, ks_from_samples, CltRow, MAX_EXPLICIT_N};
pub use decay::{charfn_decay, check_lattice_range, decay_from_profile, DecayFit};
pub use llt::{llt_estimate, llt_estimates, llt_report, llt_rhs, llt_shift, HalfOpen, LltReport};
pub use profile::{Profile, ProfileSpec, Window};
pub use regression::{growth_regression, GrowthFit};
pub use summary::{empirical_char_fn, run_source, summarize, CostSummary, Histogram, Moments, Source};
