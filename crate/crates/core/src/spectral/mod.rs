//! Collocation discretization of the weighted transfer operator
//! `H_{s,w}[f](x) = sum_h exp(w c(h)) |h'(x)|^s f(h(x))`.

mod eigen;
mod grid;
mod hurwitz;
mod model;
mod operator;

pub use eigen::{dominant_eigenpair, eigenpair_near, eigenvalues, Eigenpair};
pub use grid::CollocationGrid;
pub use hurwitz::hurwitz_zeta;
pub use model::{MomentConstants, PressureReport, ProbeOutcome, QuasiPower, SpectralConfig, SpectralModel, SpectralReport};
pub use operator::{build_operator, DigitFilter, OperatorConfig, OperatorMatrix};
