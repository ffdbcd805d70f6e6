use super::clt::ks_from_atoms;
use super::summary::{CostSummary, Histogram};
use crate::error::{invalid, Result};
use crate::euclid::{AlgorithmKind, CostFunction};
use crate::numeric::{CompensatedSum, ComplexSum};
use crate::sample_space::{
    sweep, Mode, PairVisitor, PathPair, SmoothedModel, SweepOptions, SweepPlan,
};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::ops::RangeInclusive;

/// Pairs with `v <= n` and `lo < C <= hi` for cost `cost`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub cost: usize,
    pub n: u64,
    pub lo: f64,
    pub hi: f64,
}

/// What an exhaustive [`Profile`] records.
#[derive(Debug, Clone)]
pub struct ProfileSpec {
    pub kind: AlgorithmKind,
    pub n_max: u64,
    pub costs: Vec<CostFunction>,
    /// `(cost index, tau)`.
    pub phases: Vec<(usize, f64)>,
    pub windows: Vec<Window>,
    /// Denominators kept individually. `None` keeps every denominator; otherwise
    /// the gaps between the ranges are pooled, which keeps the accumulator in
    /// cache for large `n_max`.
    pub fine: Option<Vec<RangeInclusive<u64>>>,
}

impl ProfileSpec {
    pub fn new(kind: AlgorithmKind, n_max: u64, costs: Vec<CostFunction>) -> Self {
        ProfileSpec { kind, n_max, costs, phases: Vec::new(), windows: Vec::new(), fine: None }
    }

    /// Resolution sufficient for `Omega_N` and smoothed-model queries at each `N` of `grid`.
    pub fn resolve_for(mut self, grid: &[u64], alpha0: f64) -> Result<Self> {
        let mut ranges = Vec::new();
        for &n in grid {
            let w = SmoothedModel::new(n, self.kind, alpha0, 0)?.window();
            ranges.push((n - w).max(1)..=n);
        }
        self.fine = Some(ranges);
        Ok(self)
    }
}

/// Bins stored inline per cell; larger integer costs spill into a map.
const HIST_CAP: usize = 48;

/// Per-denominator sums over `Omega_{n_max}` from one exhaustive sweep.
///
/// Statistics of `Omega_N` and of the smoothed model are read off these sums
/// without another pass, for every `N` the resolution supports.
#[derive(Debug, Clone)]
pub struct Profile {
    pub spec: ProfileSpec,
    layout: Layout,
    /// Cell index of each denominator.
    bucket: Vec<u32>,
    /// Largest denominator of each cell.
    bucket_end: Vec<u64>,
    /// One cell of `layout.stride` slots per bucket.
    cells: Vec<f64>,
    overflow: BTreeMap<(usize, usize, usize), u64>,
    window_hits: Vec<u64>,
}

#[derive(Debug, Clone)]
struct Layout {
    stride: usize,
    nc: usize,
    np: usize,
    /// Offset of each cost's inline histogram, for integer-valued costs.
    hist: Vec<Option<usize>>,
}

impl Layout {
    fn new(spec: &ProfileSpec) -> Self {
        let nc = spec.costs.len();
        let np = spec.phases.len();
        let mut off = 1 + 4 * nc + 4 * np;
        let hist = spec
            .costs
            .iter()
            .map(|c| {
                c.is_integer_valued().then(|| {
                    let o = off;
                    off += HIST_CAP;
                    o
                })
            })
            .collect();
        Layout { stride: off, nc, np, hist }
    }

    #[inline]
    fn sum(&self, j: usize) -> usize {
        1 + 4 * j
    }

    #[inline]
    fn phase(&self, k: usize) -> usize {
        1 + 4 * self.nc + 4 * k
    }
}

#[inline]
fn neumaier(cell: &mut [f64], at: usize, x: f64) {
    let s = cell[at];
    let t = s + x;
    cell[at + 1] += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
    cell[at] = t;
}

fn buckets(spec: &ProfileSpec) -> (Vec<u32>, Vec<u64>) {
    let n = spec.n_max as usize;
    let mut fine = vec![spec.fine.is_none(); n + 1];
    for r in spec.fine.iter().flatten() {
        for v in *r.start()..=(*r.end()).min(spec.n_max) {
            fine[v as usize] = true;
        }
    }
    fine[n] = true;
    let mut bucket = vec![0u32; n + 1];
    let mut ends = vec![0u64];
    for v in 1..=n {
        if v == 1 || fine[v] || fine[v - 1] {
            ends.push(v as u64);
        } else {
            *ends.last_mut().unwrap() = v as u64;
        }
        bucket[v] = (ends.len() - 1) as u32;
    }
    (bucket, ends)
}

impl Profile {
    fn empty(spec: &ProfileSpec, bucket: &[u32], ends: &[u64]) -> Self {
        let layout = Layout::new(spec);
        Profile {
            spec: spec.clone(),
            cells: vec![0.0; layout.stride * ends.len()],
            layout,
            bucket: bucket.to_vec(),
            bucket_end: ends.to_vec(),
            overflow: BTreeMap::new(),
            window_hits: vec![0; spec.windows.len()],
        }
    }

    pub fn build(spec: ProfileSpec, opts: &SweepOptions) -> Result<Self> {
        if spec.n_max == 0 {
            return Err(invalid("profile needs n_max >= 1"));
        }
        for &(j, _) in &spec.phases {
            if j >= spec.costs.len() {
                return Err(invalid(format!("phase refers to missing cost {j}")));
            }
        }
        for w in &spec.windows {
            if w.cost >= spec.costs.len() || w.n > spec.n_max {
                return Err(invalid("window outside the profile"));
            }
        }
        let (bucket, ends) = buckets(&spec);
        let mut plan = SweepPlan::new(spec.costs.clone());
        plan.phases = spec.phases.clone();
        Ok(sweep(spec.kind, spec.n_max, &plan, opts, || Profile::empty(&spec, &bucket, &ends)))
    }

    #[inline]
    fn cell(&self, b: usize) -> &[f64] {
        &self.cells[b * self.layout.stride..(b + 1) * self.layout.stride]
    }

    /// Index of the last cell covering `1..=n`.
    fn prefix(&self, n: u64) -> Result<usize> {
        if n == 0 || n > self.spec.n_max {
            return Err(invalid(format!("N = {n} outside the profile range 1..={}", self.spec.n_max)));
        }
        let b = self.bucket[n as usize] as usize;
        if self.bucket_end[b] != n {
            return Err(invalid(format!("N = {n} is not resolved by this profile")));
        }
        Ok(b)
    }

    /// Whether denominator `v` has a cell of its own.
    fn is_fine(&self, v: u64) -> bool {
        let b = self.bucket[v as usize] as usize;
        self.bucket_end[b] == v && (b == 0 || self.bucket_end[b - 1] == v - 1)
    }

    /// `|Omega_N|`.
    pub fn count(&self, n: u64) -> Result<u64> {
        let b = self.prefix(n)?;
        Ok((1..=b).map(|k| self.cell(k)[0] as u64).sum())
    }

    fn compensated(&self, b: usize, at: usize) -> f64 {
        let mut s = CompensatedSum::new();
        for k in 1..=b {
            let c = self.cell(k);
            s.add(c[at]);
            s.add(c[at + 1]);
        }
        s.value()
    }

    fn integer_histogram(&self, b: usize, cost: usize) -> Option<Histogram> {
        let off = self.layout.hist[cost]?;
        let mut out = Histogram::integer();
        out.counts = vec![0; HIST_CAP];
        for k in 1..=b {
            let c = self.cell(k);
            for i in 0..HIST_CAP {
                out.counts[i] += c[off + i] as u64;
            }
        }
        for (&(j, cb, i), &cnt) in &self.overflow {
            if j == cost && cb <= b {
                if i >= out.counts.len() {
                    out.counts.resize(i + 1, 0);
                }
                out.counts[i] += cnt;
            }
        }
        while out.counts.len() > 1 && *out.counts.last().unwrap() == 0 {
            out.counts.pop();
        }
        Some(out)
    }

    /// Exact summary of cost `cost` over `Omega_N`.
    pub fn summary(&self, n: u64, cost: usize) -> Result<CostSummary> {
        let b = self.prefix(n)?;
        let c = &self.spec.costs[cost];
        let count = self.count(n)?;
        if count == 0 {
            return Err(invalid(format!("Omega_{n} is empty")));
        }
        let at = self.layout.sum(cost);
        let mean = self.compensated(b, at) / count as f64;
        let variance = (self.compensated(b, at + 2) / count as f64 - mean * mean).max(0.0);
        let histogram = self
            .integer_histogram(b, cost)
            .unwrap_or(Histogram { bin_width: f64::INFINITY, origin: 0.0, counts: vec![count] });
        Ok(CostSummary {
            n,
            kind: self.spec.kind,
            cost: c.name().to_string(),
            count,
            mean,
            variance,
            histogram,
            mode: Mode::Exhaustive,
        })
    }

    /// `(value, count)` atoms of an integer-valued cost over `Omega_N`.
    pub fn atoms(&self, n: u64, cost: usize) -> Result<Vec<(f64, u64)>> {
        let b = self.prefix(n)?;
        let h = self.integer_histogram(b, cost).ok_or_else(|| {
            invalid(format!(
                "cost {} is not integer-valued; its law is not kept exactly",
                self.spec.costs[cost].name()
            ))
        })?;
        Ok(h.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k as f64, c))
            .collect())
    }

    /// Kolmogorov-Smirnov distance of `(C - mu ln N)/(delta sqrt(ln N))` to the normal law.
    pub fn ks(&self, n: u64, cost: usize, mu: f64, delta: f64) -> Result<f64> {
        let atoms = self.atoms(n, cost)?;
        let ln = (n as f64).ln();
        let std: Vec<(f64, f64)> =
            atoms.iter().map(|&(x, c)| ((x - mu * ln) / (delta * ln.sqrt()), c as f64)).collect();
        ks_from_atoms(&std)
    }

    fn cell_phase(&self, b: usize, at: usize) -> Complex64 {
        let c = self.cell(b);
        Complex64::new(c[at] + c[at + 1], c[at + 2] + c[at + 3])
    }

    /// Sum of `exp(i tau C)` over pairs with denominator `v`, for `v = 0..=n_max`.
    /// Needs full resolution.
    pub fn phase_coefficients(&self, phase: usize) -> Result<Vec<Complex64>> {
        if self.spec.fine.is_some() {
            return Err(invalid("per-denominator coefficients need a fully resolved profile"));
        }
        let at = self.layout.phase(phase);
        Ok((0..self.bucket_end.len()).map(|b| self.cell_phase(b, at)).collect())
    }

    /// `E_N[exp(i tau C)]`.
    pub fn char_fn(&self, n: u64, phase: usize) -> Result<Complex64> {
        let b = self.prefix(n)?;
        let at = self.layout.phase(phase);
        let z = Complex64::new(self.compensated(b, at), self.compensated(b, at + 2));
        Ok(z / self.count(n)? as f64)
    }

    /// Smoothed-model mean of `exp(i tau C)`, computed exactly.
    pub fn smoothed_char_fn(&self, n: u64, alpha0: f64, phase: usize) -> Result<Complex64> {
        self.prefix(n)?;
        let model = SmoothedModel::new(n, self.spec.kind, alpha0, 0)?;
        let lo = *model.q_range().start();
        if !(lo..=n).all(|v| self.is_fine(v)) {
            return Err(invalid(format!("smoothed window at N = {n} is not resolved by this profile")));
        }
        let w = model.pair_weights();
        let at = self.layout.phase(phase);
        let mut s = ComplexSum::default();
        if lo > 1 {
            // every pair below the window has the same weight
            let b = self.prefix(lo - 1)?;
            let below = Complex64::new(self.compensated(b, at), self.compensated(b, at + 2));
            s.add(below * w[lo as usize - 1]);
        }
        for v in lo..=n {
            s.add(self.cell_phase(self.bucket[v as usize] as usize, at) * w[v as usize]);
        }
        Ok(s.value())
    }

    pub fn window_hits(&self, i: usize) -> u64 {
        self.window_hits[i]
    }
}

impl PairVisitor for Profile {
    #[inline]
    fn visit(&mut self, p: &PathPair<'_>) {
        let b = self.bucket[p.v as usize] as usize;
        let l = &self.layout;
        let cell = &mut self.cells[b * l.stride..(b + 1) * l.stride];
        cell[0] += 1.0;
        for (j, &c) in p.costs.iter().enumerate() {
            neumaier(cell, 1 + 4 * j, c);
            neumaier(cell, 3 + 4 * j, c * c);
            if let Some(off) = l.hist[j] {
                let k = c.round() as usize;
                if k < HIST_CAP {
                    cell[off + k] += 1.0;
                } else {
                    *self.overflow.entry((j, b, k)).or_insert(0) += 1;
                }
            }
        }
        let base = 1 + 4 * l.nc;
        for (k, &z) in p.phases.iter().enumerate() {
            neumaier(cell, base + 4 * k, z.re);
            neumaier(cell, base + 4 * k + 2, z.im);
        }
        for (i, w) in self.spec.windows.iter().enumerate() {
            let c = p.costs[w.cost];
            if p.v <= w.n && c > w.lo && c <= w.hi {
                self.window_hits[i] += 1;
            }
        }
    }

    fn merge(&mut self, o: Self) {
        let st = self.layout.stride;
        let sums = 1 + 4 * (self.layout.nc + self.layout.np);
        for (a, b) in self.cells.chunks_exact_mut(st).zip(o.cells.chunks_exact(st)) {
            a[0] += b[0];
            let mut at = 1;
            while at < sums {
                neumaier(a, at, b[at]);
                neumaier(a, at, b[at + 1]);
                at += 2;
            }
            for k in sums..st {
                a[k] += b[k];
            }
        }
        for (k, c) in o.overflow {
            *self.overflow.entry(k).or_insert(0) += c;
        }
        for (a, b) in self.window_hits.iter_mut().zip(&o.window_hits) {
            *a += b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::summary::{empirical_char_fn, summarize, Source};
    use super::*;
    use crate::sample_space::{count_omega, SampleSpace};
    use AlgorithmKind::*;

    fn spec(kind: AlgorithmKind, n: u64) -> ProfileSpec {
        ProfileSpec {
            phases: vec![(0, 0.3), (1, 1.0)],
            windows: vec![Window { cost: 1, n: n / 2, lo: 1.0, hi: 2.0 }],
            ..ProfileSpec::new(kind, n, vec![CostFunction::unit(), CostFunction::log_quotient()])
        }
    }

    #[test]
    fn profile_reproduces_direct_statistics() {
        let opts = SweepOptions { shards: 4, threads: 1 };
        for kind in AlgorithmKind::ALL {
            let p = Profile::build(spec(kind, 1200), &opts).unwrap();
            for n in [10, 500, 1200] {
                assert_eq!(p.count(n).unwrap(), count_omega(n, kind));
                let src = Source::Space(SampleSpace::exhaustive(n, kind));
                for j in 0..2 {
                    let direct = summarize(&src, &p.spec.costs[j], &opts).unwrap();
                    let s = p.summary(n, j).unwrap();
                    assert!((s.mean - direct.mean).abs() < 1e-12);
                    assert!((s.variance - direct.variance).abs() < 1e-10);
                }
                assert_eq!(p.summary(n, 0).unwrap().histogram.counts, summarize(&src, &CostFunction::unit(), &opts).unwrap().histogram.counts);
                let z = empirical_char_fn(&src, &CostFunction::log_quotient(), 1.0, &opts).unwrap();
                assert!((p.char_fn(n, 1).unwrap() - z).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn window_counts_match_scan() {
        let opts = SweepOptions { shards: 2, threads: 1 };
        let p = Profile::build(spec(Standard, 400), &opts).unwrap();
        let mut hits = 0;
        for v in 1..=200u64 {
            for u in 1..=v {
                if num_integer::gcd(u, v) == 1 {
                    let e = crate::euclid::expand(u, v, Standard).unwrap();
                    let c = crate::euclid::total_cost(&e, &CostFunction::log_quotient());
                    if c > 1.0 && c <= 2.0 {
                        hits += 1;
                    }
                }
            }
        }
        assert_eq!(p.window_hits(0), hits);
    }

    #[test]
    fn smoothed_char_fn_is_a_mixture() {
        let opts = SweepOptions { shards: 2, threads: 1 };
        let p = Profile::build(spec(Standard, 300), &opts).unwrap();
        let m = SmoothedModel::new(300, Standard, 0.25, 0).unwrap();
        let qs: Vec<u64> = m.q_range().collect();
        let want: Complex64 =
            qs.iter().map(|&q| p.char_fn(q, 1).unwrap()).sum::<Complex64>() / qs.len() as f64;
        assert!((p.smoothed_char_fn(300, 0.25, 1).unwrap() - want).norm() < 1e-13);
    }

    #[test]
    fn pooled_resolution_answers_resolved_queries() {
        let opts = SweepOptions { shards: 3, threads: 1 };
        let full = Profile::build(spec(Standard, 2000), &opts).unwrap();
        let coarse = Profile::build(spec(Standard, 2000).resolve_for(&[200, 2000], 0.25).unwrap(), &opts).unwrap();
        for n in [200, 2000] {
            assert_eq!(coarse.count(n).unwrap(), full.count(n).unwrap());
            let (a, b) = (coarse.summary(n, 1).unwrap(), full.summary(n, 1).unwrap());
            assert!((a.mean - b.mean).abs() < 1e-12 && (a.variance - b.variance).abs() < 1e-10);
            assert_eq!(coarse.atoms(n, 0).unwrap(), full.atoms(n, 0).unwrap());
            let d = coarse.smoothed_char_fn(n, 0.25, 1).unwrap() - full.smoothed_char_fn(n, 0.25, 1).unwrap();
            assert!(d.norm() < 1e-13);
        }
        assert!(coarse.count(1000).is_err());
        assert!(coarse.phase_coefficients(0).is_err());
        assert_eq!(coarse.window_hits(0), full.window_hits(0));
    }
}
