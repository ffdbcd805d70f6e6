use super::count::omega_prefix_counts;
use crate::error::{invalid, Result};
use crate::euclid::AlgorithmKind;
use num_integer::Integer;
use serde::Serialize;
use std::ops::RangeInclusive;

/// Access mode of a [`SampleSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Exhaustive,
    MonteCarlo { samples: u64, seed: u64 },
}

/// `Omega_N` with the uniform probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampleSpace {
    pub n: u64,
    pub kind: AlgorithmKind,
    pub mode: Mode,
}

impl SampleSpace {
    pub fn exhaustive(n: u64, kind: AlgorithmKind) -> Self {
        SampleSpace { n, kind, mode: Mode::Exhaustive }
    }

    pub fn monte_carlo(n: u64, kind: AlgorithmKind, samples: u64, seed: u64) -> Self {
        SampleSpace { n, kind, mode: Mode::MonteCarlo { samples, seed } }
    }

    /// Number of numerators for each denominator.
    pub fn max_numerator(&self, v: u64) -> u64 {
        max_numerator(self.kind, v)
    }
}

pub(crate) fn max_numerator(kind: AlgorithmKind, v: u64) -> u64 {
    match kind {
        AlgorithmKind::Centred => v / 2,
        _ => v,
    }
}

/// The two-stage model: `Q` uniform on `[N - floor(N xi), N]`, then a pair uniform on `Omega_Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothedModel {
    pub n: u64,
    pub kind: AlgorithmKind,
    pub alpha0: f64,
    pub seed: u64,
}

impl SmoothedModel {
    pub const DEFAULT_ALPHA0: f64 = 0.25;

    pub fn new(n: u64, kind: AlgorithmKind, alpha0: f64, seed: u64) -> Result<Self> {
        if !(alpha0 > 0.0 && alpha0 < 0.5) {
            return Err(invalid(format!("alpha0 must lie in (0, 1/2), got {alpha0}")));
        }
        if n == 0 {
            return Err(invalid("N must be positive"));
        }
        Ok(SmoothedModel { n, kind, alpha0, seed })
    }

    /// `xi(N) = N^(-alpha0)`.
    pub fn xi(&self) -> f64 {
        (self.n as f64).powf(-self.alpha0)
    }

    /// `floor(N xi(N))`.
    pub fn window(&self) -> u64 {
        let w = (self.n as f64 * self.xi()).floor() as u64;
        w.min(self.n - 1)
    }

    /// Range of the outer draw `Q`.
    pub fn q_range(&self) -> RangeInclusive<u64> {
        (self.n - self.window())..=self.n
    }

    /// Probability of each pair with denominator `v`, for `v = 0..=N`.
    pub fn pair_weights(&self) -> Vec<f64> {
        pair_weights(self.n, self.window(), self.kind)
    }
}

pub(crate) fn pair_weights(n: u64, window: u64, kind: AlgorithmKind) -> Vec<f64> {
    let counts = omega_prefix_counts(n, kind);
    let lo = n - window;
    let mut w = vec![0.0; n as usize + 1];
    let share = 1.0 / (window + 1) as f64;
    let mut acc = 0.0;
    for v in (1..=n).rev() {
        if v >= lo && counts[v as usize] > 0 {
            acc += share / counts[v as usize] as f64;
        }
        w[v as usize] = acc;
    }
    w
}

/// Iterator over `Omega_N` by a per-denominator coprimality scan.
pub fn enumerate_pairs(space: &SampleSpace) -> impl Iterator<Item = (u64, u64)> {
    enumerate_range(space.kind, 1..=space.n)
}

/// Pairs of `Omega_N` whose denominator lies in `range`.
pub fn enumerate_range(
    kind: AlgorithmKind,
    range: RangeInclusive<u64>,
) -> impl Iterator<Item = (u64, u64)> {
    range.flat_map(move |v| {
        (1..=max_numerator(kind, v)).filter(move |&u| u.gcd(&v) == 1).map(move |u| (u, v))
    })
}

/// Splits `1..=N` into at most `parts` contiguous denominator ranges of
/// roughly equal pair counts.
pub fn denominator_shards(n: u64, kind: AlgorithmKind, parts: usize) -> Vec<RangeInclusive<u64>> {
    if n == 0 || parts == 0 {
        return Vec::new();
    }
    let counts = omega_prefix_counts(n, kind);
    let total = counts[n as usize];
    let mut out = Vec::with_capacity(parts);
    let mut start = 1u64;
    for k in 1..=parts as u64 {
        if start > n {
            break;
        }
        let target = (total as u128 * k as u128 / parts as u128) as u64;
        let mut end = start;
        while end < n && counts[end as usize] < target {
            end += 1;
        }
        if k == parts as u64 {
            end = n;
        }
        out.push(start..=end);
        start = end + 1;
    }
    out
}
