use super::profile::{Profile, ProfileSpec};
use crate::error::{invalid, Result};
use crate::euclid::{AlgorithmKind, CostFunction};
use crate::numeric::fit_line;
use crate::sample_space::SweepOptions;
use serde::Serialize;
use std::f64::consts::PI;

/// Power-law fit `|E_bar_N[exp(i tau C)]| ~ const * N^(-gamma)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub tau: f64,
    pub gamma: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual: f64,
    /// `(N, |E_bar_N|)`.
    pub moduli: Vec<(u64, f64)>,
    pub warning: Option<String>,
}

/// Rejects frequencies beyond the half period of a lattice cost.
pub fn check_lattice_range(c: &CostFunction, tau: f64) -> Result<()> {
    if let Some(l) = c.lattice() {
        if l.width > 0.0 && tau.abs() > PI / l.width * (1.0 + 1e-12) {
            return Err(invalid(format!(
                "cost {} is lattice with width {}; |tau| = {} exceeds pi/width = {}, where the characteristic function repeats its values near 0",
                c.name(),
                l.width,
                tau.abs(),
                PI / l.width
            )));
        }
    }
    Ok(())
}

/// Fits decay exponents from smoothed-model characteristic functions of a
/// profile whose phases include each requested `tau` for cost 0.
pub fn decay_from_profile(p: &Profile, grid: &[u64], alpha0: f64) -> Result<Vec<DecayFit>> {
    p.spec
        .phases
        .iter()
        .enumerate()
        .map(|(k, &(_, tau))| {
            let moduli: Vec<(u64, f64)> = grid
                .iter()
                .map(|&n| Ok((n, p.smoothed_char_fn(n, alpha0, k)?.norm())))
                .collect::<Result<_>>()?;
            if tau == 0.0 {
                return Ok(DecayFit {
                    tau,
                    gamma: 0.0,
                    intercept: 0.0,
                    r_squared: 1.0,
                    residual: 0.0,
                    moduli,
                    warning: Some("tau = 0 gives modulus 1 identically".into()),
                });
            }
            let xs: Vec<f64> = moduli.iter().map(|m| (m.0 as f64).ln()).collect();
            let ys: Vec<f64> = moduli.iter().map(|m| m.1.max(f64::MIN_POSITIVE).ln()).collect();
            let fit = fit_line(&xs, &ys).ok_or_else(|| invalid("degenerate N grid"))?;
            Ok(DecayFit {
                tau,
                gamma: -fit.slope,
                intercept: fit.intercept,
                r_squared: fit.r_squared,
                residual: fit.residual,
                moduli,
                warning: None,
            })
        })
        .collect()
}

/// Exhaustive decay fits for each `tau` over the `N` grid.
pub fn charfn_decay(
    taus: &[f64],
    grid: &[u64],
    c: &CostFunction,
    kind: AlgorithmKind,
    alpha0: f64,
    opts: &SweepOptions,
) -> Result<Vec<DecayFit>> {
    let mut distinct = grid.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(invalid("decay fit needs at least two distinct N"));
    }
    for &t in taus {
        check_lattice_range(c, t)?;
    }
    let spec = ProfileSpec {
        phases: taus.iter().map(|&t| (0, t)).collect(),
        ..ProfileSpec::new(kind, *distinct.last().unwrap(), vec![c.clone()])
    }
    .resolve_for(&distinct, alpha0)?;
    let p = Profile::build(spec, opts)?;
    decay_from_profile(&p, grid, alpha0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use AlgorithmKind::*;

    fn opts() -> SweepOptions {
        SweepOptions { shards: 4, threads: 1 }
    }

    #[test]
    fn lattice_range_is_enforced() {
        let c = CostFunction::unit();
        assert!(charfn_decay(&[2.0 * PI], &[100, 1000], &c, Standard, 0.25, &opts()).is_err());
        assert!(charfn_decay(&[PI], &[100, 1000], &c, Standard, 0.25, &opts()).is_ok());
    }

    #[test]
    fn zero_frequency_is_flagged() {
        let f = charfn_decay(&[0.0], &[100, 1000], &CostFunction::log_quotient(), Standard, 0.25, &opts())
            .unwrap();
        assert_eq!(f[0].gamma, 0.0);
        assert!(f[0].warning.is_some());
        assert!(f[0].moduli.iter().all(|m| (m.1 - 1.0).abs() < 1e-12));
    }

    #[test]
    fn log_cost_decays() {
        let f = charfn_decay(&[1.0], &[300, 1000, 3000], &CostFunction::log_quotient(), Standard, 0.25, &opts())
            .unwrap();
        assert!(f[0].gamma > 0.0, "{:?}", f[0]);
    }
}
