use super::grid::CollocationGrid;
use super::hurwitz::hurwitz_zeta;
use crate::error::{invalid, Error, Result};
use crate::euclid::{AlgorithmKind, CostFunction, Digit, Sign, TailRule};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorConfig {
    /// Number of collocation nodes.
    pub grid_order: usize,
    /// Quotients `m <= truncation` are summed to full Taylor order; larger
    /// ones enter through a low-order tail.
    pub truncation: u64,
    /// Taylor order of the tail beyond `truncation`.
    pub tail_order: usize,
    /// Taylor order used between the direct cutoff and `truncation`.
    pub taylor_order: usize,
    /// Branches with `m` up to this value are evaluated one by one; `None`
    /// picks a value from the grid order.
    pub direct_cutoff: Option<u64>,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            grid_order: 64,
            truncation: 10_000,
            tail_order: 3,
            taylor_order: 24,
            direct_cutoff: None,
        }
    }
}

/// Which digits a row sums over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigitFilter {
    All,
    /// Digits that may end an expansion.
    Final,
}

/// Collocation matrix of `H_{s,w}` on a grid.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub s: Complex64,
    pub w: Complex64,
    pub kind: AlgorithmKind,
    pub cost: CostFunction,
    pub grid: CollocationGrid,
    pub config: OperatorConfig,
    pub direct_cutoff: u64,
    pub matrix: DMatrix<Complex64>,
    /// Largest row estimate of the neglected Taylor terms.
    pub tail_bound: f64,
    taylor: Vec<Vec<f64>>,
}

/// Assembles the collocation matrix of `f -> sum_q exp(w c(q)) |h_q'|^s f o h_q`.
pub fn build_operator(
    s: Complex64,
    w: Complex64,
    c: &CostFunction,
    kind: AlgorithmKind,
    config: &OperatorConfig,
) -> Result<OperatorMatrix> {
    if s.re <= kind.sigma0() {
        return Err(Error::Divergence(format!(
            "Re s = {} <= 1/2: the branch series diverges",
            s.re
        )));
    }
    if !c.moderate_growth_ok(s.re, w.re) {
        return Err(Error::Divergence(format!(
            "Re w = {} is outside the moderate-growth window of cost {} at Re s = {}",
            w.re,
            c.name(),
            s.re
        )));
    }
    if config.truncation < 100 {
        return Err(invalid(format!("truncation M = {} must be at least 100", config.truncation)));
    }
    let grid = CollocationGrid::for_kind(kind, config.grid_order)?;
    let n = grid.len();
    let direct_cutoff = config
        .direct_cutoff
        .unwrap_or_else(|| {
            let width = grid.b - grid.a;
            ((n * n) as f64 / (4.0 * width)).ceil().max(256.0) as u64
        })
        .max(c.tail_start())
        .min(config.truncation);
    let taylor = grid.left_taylor(config.taylor_order.max(config.tail_order) + 1);
    let mut op = OperatorMatrix {
        s,
        w,
        kind,
        cost: c.clone(),
        grid,
        config: *config,
        direct_cutoff,
        matrix: DMatrix::zeros(n, n),
        tail_bound: 0.0,
        taylor,
    };
    let rows: Vec<(Vec<Complex64>, f64)> =
        op.grid.nodes.par_iter().map(|&x| op.row_at(x, DigitFilter::All)).collect();
    let mut bound: f64 = 0.0;
    for (i, (row, b)) in rows.into_iter().enumerate() {
        bound = bound.max(b);
        for j in 0..n {
            op.matrix[(i, j)] = row[j];
        }
    }
    op.tail_bound = bound;
    Ok(op)
}

fn binomial_terms(beta: Complex64, x: f64) -> impl Iterator<Item = Complex64> {
    let mut b = Complex64::new(1.0, 0.0);
    let mut k = 0.0;
    std::iter::from_fn(move || {
        let out = b;
        b *= (beta - k) / (k + 1.0) * x;
        k += 1.0;
        Some(out)
    })
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// `sum (m + eps x)^(-z)` over admissible `m` in `[lo, hi]` (`hi = None` for infinity).
    fn power_sum(&self, z: Complex64, ex: f64, lo: u64, hi: Option<u64>) -> Complex64 {
        if self.kind == AlgorithmKind::Odd {
            // m = 2j + 1: (m + eps x) = 2 (j + (1 + eps x)/2)
            let shift = 0.5 * (1.0 + ex);
            let jlo = (lo - 1) / 2;
            let mut h = hurwitz_zeta(z, jlo as f64 + shift);
            if let Some(hi) = hi {
                let jhi = (hi - 1) / 2;
                h -= hurwitz_zeta(z, (jhi + 1) as f64 + shift);
            }
            h * (-z * std::f64::consts::LN_2).exp()
        } else {
            let mut h = hurwitz_zeta(z, lo as f64 + ex);
            if let Some(hi) = hi {
                h -= hurwitz_zeta(z, (hi + 1) as f64 + ex);
            }
            h
        }
    }

    /// `sum exp(w c(m, eps)) (m + eps x)^(-z)` over admissible `m` in `[lo, hi]`,
    /// using the closed form of the cost.
    fn weighted_sum(&self, z: Complex64, eps: Sign, x: f64, lo: u64, hi: Option<u64>) -> Complex64 {
        if let Some(h) = hi {
            if h < lo {
                return Complex64::new(0.0, 0.0);
            }
        }
        let ex = eps.as_f64() * x;
        match self.cost.tail_rule() {
            TailRule::AffineLog { offset, log_coeff } => {
                let pre = (self.w * offset).exp();
                let beta = self.w * log_coeff;
                if beta == Complex64::new(0.0, 0.0) || ex == 0.0 {
                    return pre * self.power_sum(z - beta, ex, lo, hi);
                }
                // m^beta = (m + eps x)^beta (1 - eps x/(m + eps x))^beta
                let mut total = Complex64::new(0.0, 0.0);
                for (k, b) in binomial_terms(beta, -ex).enumerate().take(60) {
                    let t = b * self.power_sum(z - beta + k as f64, ex, lo, hi);
                    total += t;
                    if t.norm() <= 1e-17 * total.norm() {
                        break;
                    }
                }
                pre * total
            }
            TailRule::BitLength { offset, scale } => {
                let mut total = Complex64::new(0.0, 0.0);
                let mut k = 63 - lo.leading_zeros() as u64;
                loop {
                    let block_lo = (1u64 << k).max(lo);
                    let block_hi = if k >= 62 { u64::MAX / 4 } else { (1u64 << (k + 1)) - 1 };
                    let top = match hi {
                        Some(h) => block_hi.min(h),
                        None => block_hi,
                    };
                    let mut b_lo = block_lo;
                    if self.kind == AlgorithmKind::Odd && b_lo % 2 == 0 {
                        b_lo += 1;
                    }
                    if b_lo <= top {
                        let weight = (self.w * (offset + scale * (k + 1) as f64)).exp();
                        let t = weight * self.power_sum(z, ex, b_lo, Some(top));
                        total += t;
                        if hi.is_none() && t.norm() <= 1e-18 * total.norm() {
                            break;
                        }
                    }
                    if hi.is_some_and(|h| top >= h) || k >= 61 {
                        break;
                    }
                    k += 1;
                }
                total
            }
        }
    }

    /// `H_{s,w}[l_j](x)` for every basis function, and an estimate of the
    /// neglected Taylor terms.
    pub fn row_at(&self, x: f64, filter: DigitFilter) -> (Vec<Complex64>, f64) {
        let n = self.dim();
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        let mut basis = vec![0.0; n];
        let mut bound = 0.0;
        let two_s = 2.0 * self.s;
        for &eps in self.kind.signs() {
            if filter == DigitFilter::Final && eps == Sign::Minus {
                continue;
            }
            let mut m = self.kind.min_quotient(eps);
            while m <= self.direct_cutoff {
                let q = Digit { m, eps };
                if filter == DigitFilter::All || self.kind.is_final(q) {
                    let d = m as f64 + eps.as_f64() * x;
                    let wt = (self.w * self.cost.value(q) - two_s * d.ln()).exp();
                    self.grid.basis_at(1.0 / d, &mut basis);
                    for j in 0..n {
                        row[j] += wt * basis[j];
                    }
                }
                m += self.kind.quotient_step();
            }
            let lo = self.kind.next_quotient_above(eps, self.direct_cutoff);
            let m_trunc = self.config.truncation;
            let k_mid = self.config.taylor_order.min(n - 1);
            for r in 0..=k_mid + 1 {
                let z = two_s + r as f64;
                let mom = self.weighted_sum(z, eps, x, lo, Some(m_trunc));
                if r <= k_mid {
                    for j in 0..n {
                        row[j] += mom * self.taylor[r][j];
                    }
                } else if r < n {
                    bound += mom.norm() * self.taylor[r].iter().map(|d| d.abs()).sum::<f64>();
                }
            }
            let tail_lo = self.kind.next_quotient_above(eps, m_trunc.max(self.direct_cutoff));
            let k_tail = self.config.tail_order.min(n - 1);
            for r in 0..=k_tail + 1 {
                let z = two_s + r as f64;
                let mom = self.weighted_sum(z, eps, x, tail_lo, None);
                if r <= k_tail {
                    for j in 0..n {
                        row[j] += mom * self.taylor[r][j];
                    }
                } else if r < n {
                    bound += mom.norm() * self.taylor[r].iter().map(|d| d.abs()).sum::<f64>();
                }
            }
        }
        (row, bound)
    }

    /// `H_{s,w}[f]` at the nodes, for `f` given by its node values.
    pub fn apply(&self, f: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * f
    }

    /// `H_{s,w}[f](x)` (or its final-digit restriction) at any point of the closed interval.
    pub fn apply_at(&self, x: f64, f: &[Complex64], filter: DigitFilter) -> Complex64 {
        let (row, _) = self.row_at(x, filter);
        row.iter().zip(f).map(|(a, b)| a * b).sum()
    }

    /// Sum over digit words that are actual expansions: `F[f](0)` minus the
    /// words whose last two digits hit a remainder tie (`(m,+1)(2,+1)` for the
    /// centred algorithm, `(m,+1)(1,+1)` for the odd one). These words evaluate
    /// to the same rational as a word the division rule does produce.
    pub fn final_functional(&self, f: &[Complex64]) -> Complex64 {
        let at_zero = self.apply_at(0.0, f, DigitFilter::Final);
        let tie = match self.kind {
            AlgorithmKind::Standard => return at_zero,
            AlgorithmKind::Centred => Digit::plus(2),
            AlgorithmKind::Odd => Digit::plus(1),
        };
        // innermost branch at 0 has |h'(0)| = 1/m^2 and lands on 1/m
        let m = tie.m as f64;
        let weight = (self.w * self.cost.value(tie) - 2.0 * self.s * m.ln()).exp();
        at_zero - weight * self.apply_at(1.0 / m, f, DigitFilter::Final)
    }

    /// Node values of a function.
    pub fn sample(&self, f: impl Fn(f64) -> Complex64) -> DVector<Complex64> {
        DVector::from_iterator(self.dim(), self.grid.nodes.iter().map(|&x| f(x)))
    }
}
