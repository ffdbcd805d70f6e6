use super::summary::{run_source, Source};
use crate::error::{invalid, Result};
use crate::euclid::{AlgorithmKind, CostFunction};
use crate::sample_space::{Mode, PairVisitor, PathPair, SampleSpace, SweepOptions, SweepPlan};
use serde::Serialize;

/// The half-open interval `(a, b]`; empty when `b <= a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfOpen {
    pub a: f64,
    pub b: f64,
}

impl HalfOpen {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(invalid("interval ends must be finite"));
        }
        Ok(HalfOpen { a, b })
    }

    pub fn len(&self) -> f64 {
        (self.b - self.a).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.b <= self.a
    }

    #[inline]
    pub fn contains(&self, y: f64) -> bool {
        y > self.a && y <= self.b
    }
}

/// One local-limit comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LltReport {
    pub n: u64,
    pub x: f64,
    pub j: HalfOpen,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// 95% normal-approximation half-width of `lhs`; zero for exhaustive runs.
    pub ci_halfwidth: f64,
    pub hits: u64,
    pub total: u64,
    pub mode: Mode,
}

/// Gaussian prediction `|J| exp(-x^2/2) / (delta sqrt(2 pi))`.
pub fn llt_rhs(x: f64, j: HalfOpen, delta: f64) -> f64 {
    j.len() * (-0.5 * x * x).exp() / (delta * (2.0 * std::f64::consts::PI).sqrt())
}

/// Builds a report from `hits` out of `total` pairs.
pub fn llt_report(
    n: u64,
    x: f64,
    j: HalfOpen,
    delta: f64,
    hits: u64,
    total: u64,
    mode: Mode,
) -> LltReport {
    let scale = (n as f64).ln().sqrt();
    let p = hits as f64 / total as f64;
    let lhs = scale * p;
    let rhs = llt_rhs(x, j, delta);
    let abs_err = (lhs - rhs).abs();
    let rel_err = if rhs > 0.0 { abs_err / rhs } else { 0.0 };
    let ci_halfwidth = match mode {
        Mode::Exhaustive => 0.0,
        Mode::MonteCarlo { .. } => scale * 1.96 * (p * (1.0 - p) / total as f64).sqrt(),
    };
    LltReport { n, x, j, lhs, rhs, abs_err, rel_err, ci_halfwidth, hits, total, mode }
}

struct WindowCounter {
    windows: Vec<HalfOpen>,
    hits: Vec<u64>,
    total: u64,
}

impl PairVisitor for WindowCounter {
    #[inline]
    fn visit(&mut self, p: &PathPair<'_>) {
        self.total += 1;
        let c = p.costs[0];
        for (h, w) in self.hits.iter_mut().zip(&self.windows) {
            *h += w.contains(c) as u64;
        }
    }
    fn merge(&mut self, o: Self) {
        self.total += o.total;
        for (a, b) in self.hits.iter_mut().zip(&o.hits) {
            *a += b;
        }
    }
}

/// Shift `mu ln N + delta x sqrt(ln N)` applied to `J` before counting.
pub fn llt_shift(n: u64, x: f64, mu: f64, delta: f64) -> f64 {
    let ln = (n as f64).ln();
    mu * ln + delta * x * ln.sqrt()
}

/// Local-limit reports for several `x` from a single pass.
#[allow(clippy::too_many_arguments)]
pub fn llt_estimates(
    n: u64,
    xs: &[f64],
    j: HalfOpen,
    c: &CostFunction,
    kind: AlgorithmKind,
    mu: f64,
    delta: f64,
    mode: Mode,
    opts: &SweepOptions,
) -> Result<Vec<LltReport>> {
    if !(delta > 0.0) {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    if n < 2 {
        return Err(invalid("LLT needs N >= 2"));
    }
    let windows: Vec<HalfOpen> = xs
        .iter()
        .map(|&x| {
            let s = llt_shift(n, x, mu, delta);
            HalfOpen { a: j.a + s, b: j.b + s }
        })
        .collect();
    let plan = SweepPlan::new(vec![c.clone()]);
    let src = Source::Space(SampleSpace { n, kind, mode });
    let acc = run_source(&src, &plan, opts, || WindowCounter {
        windows: windows.clone(),
        hits: vec![0; windows.len()],
        total: 0,
    })?;
    Ok(xs
        .iter()
        .zip(&acc.hits)
        .map(|(&x, &h)| llt_report(n, x, j, delta, h, acc.total, mode))
        .collect())
}

#[allow(clippy::too_many_arguments)]
pub fn llt_estimate(
    n: u64,
    x: f64,
    j: HalfOpen,
    c: &CostFunction,
    kind: AlgorithmKind,
    mu: f64,
    delta: f64,
    mode: Mode,
    opts: &SweepOptions,
) -> Result<LltReport> {
    Ok(llt_estimates(n, &[x], j, c, kind, mu, delta, mode, opts)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclid::{expand, total_cost};
    use AlgorithmKind::*;

    const MU: f64 = 0.8325;
    const DELTA: f64 = 0.9;

    fn opts() -> SweepOptions {
        SweepOptions { shards: 4, threads: 1 }
    }

    #[test]
    fn empty_interval() {
        let j = HalfOpen::new(0.3, 0.3).unwrap();
        let r = llt_estimate(100, 0.0, j, &CostFunction::unit(), Standard, MU, DELTA, Mode::Exhaustive, &opts())
            .unwrap();
        assert_eq!((r.lhs, r.rhs, r.rel_err), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rhs_formula() {
        let r = llt_rhs(0.0, HalfOpen { a: 0.0, b: 1.0 }, 1.0);
        assert!((r - 0.398942280401).abs() < 1e-11);
    }

    #[test]
    fn exhaustive_count_matches_brute_force() {
        let n = 10_000u64;
        let j = HalfOpen::new(-0.5, 0.5).unwrap();
        let c = CostFunction::log_quotient();
        let r = llt_estimate(n, 0.0, j, &c, Standard, MU, DELTA, Mode::Exhaustive, &opts()).unwrap();
        let shift = MU * (n as f64).ln();
        let mut hits = 0u64;
        let mut total = 0u64;
        for v in 1..=n {
            for u in 1..=v {
                if num_integer::gcd(u, v) == 1 {
                    total += 1;
                    let y = total_cost(&expand(u, v, Standard).unwrap(), &c) - shift;
                    if y > -0.5 && y <= 0.5 {
                        hits += 1;
                    }
                }
            }
        }
        assert_eq!((r.hits, r.total), (hits, total));
        assert!((r.lhs - (n as f64).ln().sqrt() * hits as f64 / total as f64).abs() < 1e-15);
    }

    #[test]
    fn additivity_over_a_partition() {
        let n = 3000;
        let c = CostFunction::log_quotient();
        let edges: Vec<f64> = (0..=8).map(|k| -4.0 + k as f64).collect();
        let mut sum = 0.0;
        for w in edges.windows(2) {
            let j = HalfOpen::new(w[0], w[1]).unwrap();
            sum += llt_estimate(n, 0.5, j, &c, Odd, MU, DELTA, Mode::Exhaustive, &opts()).unwrap().lhs;
        }
        let wide = HalfOpen::new(-4.0, 4.0).unwrap();
        let all = llt_estimate(n, 0.5, wide, &c, Odd, MU, DELTA, Mode::Exhaustive, &opts()).unwrap();
        assert!((sum - all.lhs).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_halfwidth() {
        let j = HalfOpen::new(-0.5, 0.5).unwrap();
        let mode = Mode::MonteCarlo { samples: 20_000, seed: 8 };
        let r = llt_estimate(100_000, 1.0, j, &CostFunction::log_quotient(), Standard, MU, DELTA, mode, &opts())
            .unwrap();
        let p = r.hits as f64 / r.total as f64;
        let want = (1e5f64).ln().sqrt() * 1.96 * (p * (1.0 - p) / 20_000.0).sqrt();
        assert!((r.ci_halfwidth - want).abs() < 1e-15);
        assert_eq!(r.total, 20_000);
    }
}
