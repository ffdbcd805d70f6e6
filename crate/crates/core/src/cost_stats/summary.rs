use crate::error::{invalid, Result};
use crate::euclid::{AlgorithmKind, CostFunction};
use crate::numeric::ComplexSum;
use crate::sample_space::{
    monte_carlo, sweep, Draw, Mode, PairVisitor, PathPair, SampleSpace, SmoothedModel,
    SweepOptions, SweepPlan,
};
use num_complex::Complex64;
use serde::Serialize;

/// Where pairs come from.
#[derive(Debug, Clone, Copy)]
pub enum Source {
    Space(SampleSpace),
    /// Monte-Carlo draws from the smoothed model, seeded by `model.seed`.
    Smoothed { model: SmoothedModel, samples: u64 },
}

impl Source {
    pub fn kind(&self) -> AlgorithmKind {
        match self {
            Source::Space(s) => s.kind,
            Source::Smoothed { model, .. } => model.kind,
        }
    }

    pub fn n(&self) -> u64 {
        match self {
            Source::Space(s) => s.n,
            Source::Smoothed { model, .. } => model.n,
        }
    }

    pub fn mode(&self) -> Mode {
        match *self {
            Source::Space(s) => s.mode,
            Source::Smoothed { model, samples } => Mode::MonteCarlo { samples, seed: model.seed },
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 || (self.kind() == AlgorithmKind::Centred && n < 2) {
            return Err(invalid(format!("Omega_{n} is empty for {}", self.kind())));
        }
        if let Mode::MonteCarlo { samples: 0, .. } = self.mode() {
            return Err(invalid("Monte-Carlo mode needs a positive sample count"));
        }
        Ok(())
    }
}

/// Runs `make`-built visitors over every pair of the source.
pub fn run_source<V, F>(source: &Source, plan: &SweepPlan, opts: &SweepOptions, make: F) -> Result<V>
where
    V: PairVisitor,
    F: Fn() -> V + Sync,
{
    source.validate()?;
    Ok(match *source {
        Source::Space(s) => match s.mode {
            Mode::Exhaustive => sweep(s.kind, s.n, plan, opts, make),
            Mode::MonteCarlo { samples, seed } => {
                monte_carlo(Draw::Uniform(s), plan, samples, seed, opts, make)
            }
        },
        Source::Smoothed { model, samples } => {
            monte_carlo(Draw::Smoothed(model), plan, samples, model.seed, opts, make)
        }
    })
}

/// Running count, mean and second central moment (Chan et al. merge).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Moments) {
        if o.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *o;
            return;
        }
        let n = self.count + o.count;
        let d = o.mean - self.mean;
        self.mean += d * o.count as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.count as f64) * (o.count as f64) / n as f64;
        self.count = n;
    }

    /// Variance of the empirical distribution (divisor `count`).
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.m2 / self.count as f64).max(0.0)
        }
    }
}

/// Fixed-width histogram with bins `[lo + k w, lo + (k+1) w)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub origin: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Unit bins centred on the integers, for integer-valued costs.
    pub fn integer() -> Self {
        Histogram { bin_width: 1.0, origin: -0.5, counts: Vec::new() }
    }

    pub fn with_width(bin_width: f64) -> Self {
        Histogram { bin_width, origin: 0.0, counts: Vec::new() }
    }

    pub fn for_cost(c: &CostFunction) -> Self {
        if c.is_integer_valued() {
            Self::integer()
        } else {
            Self::with_width(0.25)
        }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        let k = ((x - self.origin) / self.bin_width).floor().max(0.0) as usize;
        if k >= self.counts.len() {
            self.counts.resize(k + 1, 0);
        }
        self.counts[k] += 1;
    }

    pub fn merge(&mut self, o: &Histogram) {
        if o.counts.len() > self.counts.len() {
            self.counts.resize(o.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&o.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(bin_lo, bin_hi, count)` rows.
    pub fn rows(&self) -> Vec<(f64, f64, u64)> {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let lo = self.origin + k as f64 * self.bin_width;
                (lo, lo + self.bin_width, c)
            })
            .collect()
    }
}

/// Empirical statistics of `C` over a sample space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSummary {
    pub n: u64,
    pub kind: AlgorithmKind,
    pub cost: String,
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    pub histogram: Histogram,
    pub mode: Mode,
}

struct SummaryVisitor {
    moments: Moments,
    hist: Histogram,
    phase: ComplexSum,
}

impl PairVisitor for SummaryVisitor {
    #[inline]
    fn visit(&mut self, p: &PathPair<'_>) {
        self.moments.push(p.costs[0]);
        self.hist.push(p.costs[0]);
        if let Some(&z) = p.phases.first() {
            self.phase.add(z);
        }
    }

    fn merge(&mut self, o: Self) {
        self.moments.merge(&o.moments);
        self.hist.merge(&o.hist);
        self.phase.merge(&o.phase);
    }
}

/// One streaming pass computing mean, variance and histogram of `C`.
pub fn summarize(source: &Source, c: &CostFunction, opts: &SweepOptions) -> Result<CostSummary> {
    let plan = SweepPlan::new(vec![c.clone()]);
    let hist = Histogram::for_cost(c);
    let acc = run_source(source, &plan, opts, || SummaryVisitor {
        moments: Moments::default(),
        hist: hist.clone(),
        phase: ComplexSum::default(),
    })?;
    Ok(CostSummary {
        n: source.n(),
        kind: source.kind(),
        cost: c.name().to_string(),
        count: acc.moments.count,
        mean: acc.moments.mean,
        variance: acc.moments.variance(),
        histogram: acc.hist,
        mode: source.mode(),
    })
}

/// Empirical mean of `exp(i tau C)`.
pub fn empirical_char_fn(
    source: &Source,
    c: &CostFunction,
    tau: f64,
    opts: &SweepOptions,
) -> Result<Complex64> {
    if tau == 0.0 {
        source.validate()?;
        return Ok(Complex64::new(1.0, 0.0));
    }
    let plan = SweepPlan::new(vec![c.clone()]).with_phase(0, tau);
    let acc = run_source(source, &plan, opts, || SummaryVisitor {
        moments: Moments::default(),
        hist: Histogram::with_width(f64::INFINITY),
        phase: ComplexSum::default(),
    })?;
    Ok(acc.phase.value() / acc.moments.count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclid::expand;
    use num_rational::Ratio;
    use AlgorithmKind::*;

    fn one() -> SweepOptions {
        SweepOptions { shards: 4, threads: 1 }
    }

    #[test]
    fn omega_4_mean_depth() {
        let s = summarize(&Source::Space(SampleSpace::exhaustive(4, Standard)), &CostFunction::unit(), &one())
            .unwrap();
        assert_eq!(s.count, 6);
        assert!((s.mean - 8.0 / 6.0).abs() < 1e-15);
        assert_eq!(s.histogram.total(), 6);
        assert_eq!(s.histogram.counts, vec![0, 4, 2]);
    }

    #[test]
    fn omega_10_mean_is_exact_rational() {
        let mut total = Ratio::from_integer(0i64);
        let mut n = 0i64;
        for v in 1..=10u64 {
            for u in 1..=v {
                if num_integer::gcd(u, v) == 1 {
                    total += Ratio::from_integer(expand(u, v, Standard).unwrap().depth() as i64);
                    n += 1;
                }
            }
        }
        let want = total / Ratio::from_integer(n);
        let s = summarize(&Source::Space(SampleSpace::exhaustive(10, Standard)), &CostFunction::unit(), &one())
            .unwrap();
        assert!((s.mean - *want.numer() as f64 / *want.denom() as f64).abs() < 1e-14);
    }

    #[test]
    fn mean_over_log_n_at_10k() {
        let s = summarize(
            &Source::Space(SampleSpace::exhaustive(10_000, Standard)),
            &CostFunction::unit(),
            &one(),
        )
        .unwrap();
        let r = s.mean / (1e4f64).ln();
        assert!((0.75..=0.95).contains(&r), "{r}");
        assert!(s.variance > 0.0);
    }

    #[test]
    fn empty_space_is_an_error() {
        let e = summarize(&Source::Space(SampleSpace::exhaustive(0, Standard)), &CostFunction::unit(), &one());
        assert!(e.is_err());
    }

    #[test]
    fn char_fn_small_cases() {
        let src = Source::Space(SampleSpace::exhaustive(4, Standard));
        let z0 = empirical_char_fn(&src, &CostFunction::unit(), 0.0, &one()).unwrap();
        assert_eq!(z0, Complex64::new(1.0, 0.0));
        let z = empirical_char_fn(&src, &CostFunction::unit(), std::f64::consts::PI, &one()).unwrap();
        assert!((z - Complex64::new(-1.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn char_fn_matches_brute_force_log_cost() {
        let c = CostFunction::log_quotient();
        let src = Source::Space(SampleSpace::exhaustive(1000, Standard));
        let got = empirical_char_fn(&src, &c, 0.5, &one()).unwrap();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut n = 0.0;
        for v in 1..=1000u64 {
            for u in 1..=v {
                if num_integer::gcd(u, v) == 1 {
                    let e = expand(u, v, Standard).unwrap();
                    let cost: f64 = e.digits.iter().map(|q| (q.m as f64).ln()).sum();
                    acc += Complex64::from_polar(1.0, 0.5 * cost);
                    n += 1.0;
                }
            }
        }
        assert!((got - acc / n).norm() < 1e-12);
    }

    #[test]
    fn integer_cost_char_fn_is_periodic() {
        let src = Source::Space(SampleSpace::exhaustive(300, Odd));
        let c = CostFunction::unit();
        let a = empirical_char_fn(&src, &c, 0.9, &one()).unwrap();
        let b = empirical_char_fn(&src, &c, 0.9 + 2.0 * std::f64::consts::PI, &one()).unwrap();
        assert!((a - b).norm() < 1e-12);
        assert!(a.norm() <= 1.0);
    }

    #[test]
    fn shard_invariance() {
        let src = Source::Space(SampleSpace::exhaustive(3000, Centred));
        let c = CostFunction::log_quotient();
        let a = summarize(&src, &c, &SweepOptions { shards: 1, threads: 1 }).unwrap();
        let b = summarize(&src, &c, &SweepOptions { shards: 16, threads: 1 }).unwrap();
        assert_eq!(a.count, b.count);
        assert!((a.mean - b.mean).abs() < 1e-10);
        assert!((a.variance - b.variance).abs() < 1e-10);
    }

    #[test]
    fn monte_carlo_mean_agrees_with_exhaustive() {
        let c = CostFunction::unit();
        let ex = summarize(&Source::Space(SampleSpace::exhaustive(1000, Standard)), &c, &one()).unwrap();
        let m = 200_000;
        let mc = summarize(&Source::Space(SampleSpace::monte_carlo(1000, Standard, m, 21)), &c, &one())
            .unwrap();
        let se = (mc.variance / m as f64).sqrt();
        assert!((mc.mean - ex.mean).abs() < 3.0 * se, "{} vs {}", mc.mean, ex.mean);
    }

    #[test]
    fn degenerate_smoothed_model_matches_uniform() {
        // N^(1 - alpha0) < 1 only at N = 1
        let model = SmoothedModel::new(1, Standard, 0.25, 5).unwrap();
        assert_eq!(model.window(), 0);
        let s = summarize(&Source::Smoothed { model, samples: 100 }, &CostFunction::unit(), &one()).unwrap();
        assert_eq!((s.count, s.mean), (100, 1.0));
    }
}
