use super::space::{pair_weights, SmoothedModel};
use super::sweep::{sweep, PairVisitor, PathPair, SweepOptions, SweepPlan};
use super::count::count_omega;
use crate::error::Result;
use crate::euclid::{AlgorithmKind, CostFunction};
use crate::numeric::CompensatedSum;
use std::collections::HashMap;

/// Key identifying equal total costs. Integer-valued costs are exact; other
/// costs are grouped at a resolution of `1e-9`.
pub(crate) fn cost_key(c: f64) -> i64 {
    (c * 1e9).round() as i64
}

struct SignedMass<'a> {
    weights: &'a [f64],
    base: f64,
    mass: HashMap<i64, CompensatedSum>,
}

impl PairVisitor for SignedMass<'_> {
    fn visit(&mut self, p: &PathPair<'_>) {
        let d = self.weights[p.v as usize] - self.base;
        self.mass.entry(cost_key(p.costs[0])).or_default().add(d);
    }

    fn merge(&mut self, other: Self) {
        let mut keys: Vec<_> = other.mass.into_iter().collect();
        keys.sort_by_key(|(k, _)| *k);
        for (k, s) in keys {
            self.mass.entry(k).or_default().merge(&s);
        }
    }
}

/// Total-variation distance between the laws of `C` under the smoothed model
/// and under `P_N`, by exhaustive enumeration.
pub fn model_distance(n: u64, alpha0: f64, kind: AlgorithmKind, c: &CostFunction) -> Result<f64> {
    let model = SmoothedModel::new(n, kind, alpha0, 0)?;
    if model.window() == 0 {
        return Ok(0.0);
    }
    let weights = pair_weights(n, model.window(), kind);
    let base = 1.0 / count_omega(n, kind) as f64;
    let plan = SweepPlan::new(vec![c.clone()]);
    let opts = SweepOptions { shards: 1, threads: 1 };
    let acc = sweep(kind, n, &plan, &opts, || SignedMass {
        weights: &weights,
        base,
        mass: HashMap::new(),
    });
    let mut terms: Vec<_> = acc.mass.into_iter().collect();
    terms.sort_by_key(|(k, _)| *k);
    let mut tv = CompensatedSum::new();
    for (_, s) in terms {
        tv.add(s.value().abs());
    }
    Ok(0.5 * tv.value())
}
