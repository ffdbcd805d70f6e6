use super::summary::CostSummary;
use crate::error::{invalid, Result};
use crate::numeric::fit_line;
use serde::Serialize;

/// Least-squares fits `mean ~ mu ln N + b` and `variance ~ delta2 ln N + b'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub mu: f64,
    pub delta2: f64,
    pub mean_intercept: f64,
    pub variance_intercept: f64,
    pub mean_r_squared: f64,
    pub variance_r_squared: f64,
}

pub fn growth_regression(summaries: &[CostSummary]) -> Result<GrowthFit> {
    let mut ns: Vec<u64> = summaries.iter().map(|s| s.n).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 || ns[0] < 2 {
        return Err(invalid("growth regression needs at least three distinct N >= 2"));
    }
    let xs: Vec<f64> = summaries.iter().map(|s| (s.n as f64).ln()).collect();
    let means: Vec<f64> = summaries.iter().map(|s| s.mean).collect();
    let vars: Vec<f64> = summaries.iter().map(|s| s.variance).collect();
    let m = fit_line(&xs, &means).ok_or_else(|| invalid("degenerate N grid"))?;
    let v = fit_line(&xs, &vars).ok_or_else(|| invalid("degenerate N grid"))?;
    Ok(GrowthFit {
        mu: m.slope,
        delta2: v.slope,
        mean_intercept: m.intercept,
        variance_intercept: v.intercept,
        mean_r_squared: m.r_squared,
        variance_r_squared: v.r_squared,
    })
}
