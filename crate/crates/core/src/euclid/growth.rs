use super::cost::{CostFunction, TailRule};
use super::kind::{AlgorithmKind, Digit, Sign};
use crate::error::{domain, Result};
use serde::Serialize;

/// Truncated moderate-growth series with an integral tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthProbe {
    pub partial_sum: f64,
    /// Upper bound on the omitted terms; infinite when the series diverges.
    pub tail_bound: f64,
    pub converges: bool,
}

/// Evaluates `sum_h exp(w c(h)) sup_I |h'|^sigma` over quotients `<= max_m`.
pub fn moderate_growth_probe(
    c: &CostFunction,
    sigma: f64,
    w: f64,
    kind: AlgorithmKind,
    max_m: u64,
) -> Result<GrowthProbe> {
    if max_m < 2 {
        return Err(domain("truncation must be at least 2"));
    }
    let iv = kind.interval();
    let mut partial = 0.0;
    for &eps in kind.signs() {
        let x_star = match eps {
            Sign::Plus => iv.lo,
            Sign::Minus => iv.hi,
        };
        let mut m = kind.min_quotient(eps);
        while m <= max_m {
            let q = Digit { m, eps };
            let d = m as f64 + eps.as_f64() * x_star;
            partial += (w * c.value(q)).exp() * d.powf(-2.0 * sigma);
            m += kind.quotient_step();
        }
    }

    // e^{w c(m)} <= amp * m^{w beta} beyond the table, and (m - hi)^{-1} <= (M/(M - hi)) / m.
    let (amp, beta) = if w > 0.0 {
        match c.tail_rule() {
            TailRule::AffineLog { offset, .. } => ((w * offset).exp(), c.growth_exponent()),
            TailRule::BitLength { offset, scale } => ((w * (offset + scale)).exp(), c.growth_exponent()),
        }
    } else {
        (1.0, 0.0)
    };
    let expo = 2.0 * sigma - w * beta;
    let converges = expo > 1.0;
    let tail_bound = if converges {
        let mf = max_m as f64;
        let shift = (mf / (mf - iv.hi)).powf(2.0 * sigma);
        let per_sign = amp * shift * mf.powf(1.0 - expo) / (expo - 1.0) / kind.quotient_step() as f64;
        per_sign * kind.signs().len() as f64
    } else {
        f64::INFINITY
    };
    Ok(GrowthProbe { partial_sum: partial, tail_bound, converges })
}
