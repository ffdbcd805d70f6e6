use super::profile::{Profile, ProfileSpec};
use super::summary::{run_source, Source};
use crate::error::{invalid, Result};
use crate::euclid::{AlgorithmKind, CostFunction};
use crate::numeric::normal_cdf;
use crate::sample_space::{Mode, PairVisitor, PathPair, SampleSpace, SweepOptions, SweepPlan};
use serde::Serialize;

/// Largest exhaustive `N` for which a non-integer cost is standardized pair by pair.
pub const MAX_EXPLICIT_N: u64 = 5000;

/// Kolmogorov-Smirnov distance between a discrete law given by `(value, mass)`
/// atoms and the standard normal law. Both sides of every jump are checked.
pub fn ks_from_atoms(atoms: &[(f64, f64)]) -> Result<f64> {
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    if !(total > 0.0) {
        return Err(invalid("KS distance of an empty sample"));
    }
    let mut sorted: Vec<(f64, f64)> = atoms.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut below = 0.0;
    let mut ks: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i].0;
        let mut mass = 0.0;
        while i < sorted.len() && sorted[i].0 == x {
            mass += sorted[i].1;
            i += 1;
        }
        let phi = normal_cdf(x);
        ks = ks.max((below / total - phi).abs());
        below += mass;
        ks = ks.max((below / total - phi).abs());
    }
    Ok(ks)
}

/// KS distance of raw values to the standard normal law.
pub fn ks_from_samples(xs: &[f64]) -> Result<f64> {
    let atoms: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 1.0)).collect();
    ks_from_atoms(&atoms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CltRow {
    pub n: u64,
    pub ks: f64,
    pub count: u64,
}

struct Values(Vec<f64>);

impl PairVisitor for Values {
    fn visit(&mut self, p: &PathPair<'_>) {
        self.0.push(p.costs[0]);
    }
    fn merge(&mut self, o: Self) {
        self.0.extend(o.0);
    }
}

/// KS distance of `(C - mu ln N)/(delta sqrt(ln N))` to the normal law for each `N`.
///
/// In exhaustive mode integer-valued costs use a single [`Profile`]; other
/// costs are limited to `N <= MAX_EXPLICIT_N`. Monte-Carlo mode draws
/// `samples` pairs at each `N`.
pub fn clt_table(
    grid: &[u64],
    c: &CostFunction,
    kind: AlgorithmKind,
    mu: f64,
    delta: f64,
    mode: Mode,
    opts: &SweepOptions,
) -> Result<Vec<CltRow>> {
    if !(delta > 0.0) {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    if grid.iter().any(|&n| n < 2) {
        return Err(invalid("CLT grid needs N >= 2 so that ln N > 0"));
    }
    let n_max = grid.iter().copied().max().ok_or_else(|| invalid("empty N grid"))?;
    match mode {
        Mode::Exhaustive if c.is_integer_valued() => {
            let p = Profile::build(
                ProfileSpec {
                    fine: Some(grid.iter().map(|&n| n..=n).collect()),
                    ..ProfileSpec::new(kind, n_max, vec![c.clone()])
                },
                opts,
            )?;
            grid.iter()
                .map(|&n| Ok(CltRow { n, ks: p.ks(n, 0, mu, delta)?, count: p.count(n)? }))
                .collect()
        }
        Mode::Exhaustive if n_max > MAX_EXPLICIT_N => Err(invalid(format!(
            "exhaustive KS for the non-integer cost {} is limited to N <= {MAX_EXPLICIT_N}; use Monte-Carlo mode",
            c.name()
        ))),
        _ => grid
            .iter()
            .map(|&n| {
                let space = SampleSpace { n, kind, mode };
                let plan = SweepPlan::new(vec![c.clone()]);
                let vals = run_source(&Source::Space(space), &plan, opts, || Values(Vec::new()))?.0;
                let ln = (n as f64).ln();
                let z: Vec<f64> = vals.iter().map(|&x| (x - mu * ln) / (delta * ln.sqrt())).collect();
                Ok(CltRow { n, ks: ks_from_samples(&z)?, count: vals.len() as u64 })
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclid::expand;
    use crate::numeric::normal_quantile;
    use AlgorithmKind::*;

    #[test]
    fn quantile_sample_has_minimal_distance() {
        let n = 400;
        let xs: Vec<f64> = (0..n).map(|i| normal_quantile((i as f64 + 0.5) / n as f64)).collect();
        let ks = ks_from_samples(&xs).unwrap();
        assert!(ks <= 0.5 / n as f64 + 1e-12, "{ks}");
    }

    #[test]
    fn point_mass_distance() {
        assert!((ks_from_atoms(&[(0.0, 3.0)]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exhaustive_ks_matches_independent_scan() {
        let (mu, delta) = (0.842766, 0.7184);
        let n = 10_000u64;
        let opts = SweepOptions { shards: 4, threads: 1 };
        let rows = clt_table(&[n], &CostFunction::unit(), Standard, mu, delta, Mode::Exhaustive, &opts).unwrap();
        // brute force: sort all standardized depths and scan the empirical CDF
        let ln = (n as f64).ln();
        let mut zs = Vec::new();
        for v in 1..=n {
            for u in 1..=v {
                if num_integer::gcd(u, v) == 1 {
                    let p = expand(u, v, Standard).unwrap().depth() as f64;
                    zs.push((p - mu * ln) / (delta * ln.sqrt()));
                }
            }
        }
        zs.sort_by(f64::total_cmp);
        let m = zs.len() as f64;
        let jumps_only = {
            let mut best: f64 = 0.0;
            let mut i = 0;
            while i < zs.len() {
                let z = zs[i];
                let f = crate::numeric::normal_cdf(z);
                best = best.max((i as f64 / m - f).abs());
                while i < zs.len() && zs[i] == z {
                    i += 1;
                }
                best = best.max((i as f64 / m - f).abs());
            }
            best
        };
        assert!((rows[0].ks - jumps_only).abs() < 1e-12);
        assert_eq!(rows[0].count, zs.len() as u64);
    }

    #[test]
    fn rejects_nonpositive_delta() {
        let opts = SweepOptions::default();
        assert!(clt_table(&[100], &CostFunction::unit(), Standard, 0.8, 0.0, Mode::Exhaustive, &opts).is_err());
    }

    #[test]
    fn non_integer_costs_work_in_small_exhaustive_and_mc_modes() {
        let opts = SweepOptions { shards: 2, threads: 1 };
        let c = CostFunction::log_quotient();
        let a = clt_table(&[1000], &c, Odd, 0.5, 0.6, Mode::Exhaustive, &opts).unwrap();
        assert!(a[0].ks > 0.0 && a[0].ks < 1.0);
        assert!(clt_table(&[10_000], &c, Odd, 0.5, 0.6, Mode::Exhaustive, &opts).is_err());
        let b = clt_table(&[10_000], &c, Odd, 0.5, 0.6, Mode::MonteCarlo { samples: 5000, seed: 1 }, &opts)
            .unwrap();
        assert_eq!(b[0].count, 5000);
    }
}
