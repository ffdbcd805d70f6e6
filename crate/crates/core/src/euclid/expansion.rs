use super::cost::CostFunction;
use super::kind::{AlgorithmKind, Digit};
use crate::error::{domain, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use serde::Serialize;

/// The digit word produced by one run of an algorithm on a coprime pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Expansion {
    pub kind: AlgorithmKind,
    pub u: u64,
    pub v: u64,
    pub digits: Vec<Digit>,
    /// Remainder after each division; the last entry is 0.
    pub remainders: Vec<u64>,
}

impl Expansion {
    /// Depth `P(u, v)`.
    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    pub fn last_digit(&self) -> Digit {
        *self.digits.last().expect("expansions are nonempty")
    }

    /// `(1,1)` in the standard algorithm ends on `(1,+1)`, which lies outside `F`.
    pub fn is_trivial_pair(&self) -> bool {
        self.u == 1 && self.v == 1
    }
}

/// Runs the algorithm on `(u, v)` and feeds each digit and remainder to `f`.
///
/// No coprimality check is made; the return value is `gcd(u, v)`.
pub fn for_each_digit(
    u: u64,
    v: u64,
    kind: AlgorithmKind,
    mut f: impl FnMut(Digit, u64),
) -> Result<u64> {
    if !kind.accepts_pair(u, v) {
        return Err(domain(format!("pair ({u}, {v}) outside the domain of {kind}")));
    }
    let (mut a, mut b) = (u, v);
    loop {
        let (q, r) = kind.divide(b, a)?;
        f(q, r);
        if r == 0 {
            return Ok(a);
        }
        b = a;
        a = r;
    }
}

/// Full expansion of a coprime pair `u <= v` (`2u <= v` for the centred algorithm).
pub fn expand(u: u64, v: u64, kind: AlgorithmKind) -> Result<Expansion> {
    if u == 0 || v == 0 {
        return Err(domain("expand requires positive integers"));
    }
    if u.gcd(&v) != 1 {
        return Err(domain(format!("gcd({u}, {v}) = {} != 1", u.gcd(&v))));
    }
    let mut digits = Vec::new();
    let mut remainders = Vec::new();
    for_each_digit(u, v, kind, |q, r| {
        digits.push(q);
        remainders.push(r);
    })?;
    Ok(Expansion { kind, u, v, digits, remainders })
}

/// `h_1 o ... o h_P (0)` as an exact rational, via continuant matrices.
pub fn reconstruct(e: &Expansion) -> BigRational {
    evaluate_word_at_zero(&e.digits)
}

/// Exact value at 0 of the composition of the branches of `word`.
pub fn evaluate_word_at_zero(word: &[Digit]) -> BigRational {
    // Running product of [[0, 1], [eps, m]]; only its second column is read.
    let one = BigInt::from(1);
    let zero = BigInt::from(0);
    let (mut a, mut b, mut c, mut d) = (one.clone(), zero.clone(), zero, one);
    for q in word {
        let m = BigInt::from(q.m);
        let eps = BigInt::from(q.eps.as_i64());
        let na = &b * &eps;
        let nb = &a + &b * &m;
        let nc = &d * &eps;
        let nd = &c + &d * &m;
        a = na;
        b = nb;
        c = nc;
        d = nd;
    }
    BigRational::new(b, d)
}

/// Total cost `C = sum_i c(h_i)`.
pub fn total_cost(e: &Expansion, c: &CostFunction) -> f64 {
    word_cost(&e.digits, c)
}

pub fn word_cost(word: &[Digit], c: &CostFunction) -> f64 {
    word.iter().map(|&q| c.value(q)).sum()
}

/// `|(h_1 o ... o h_n)'(x)|` for a word, evaluated from the innermost branch out.
pub fn word_derivative(word: &[Digit], x: f64) -> f64 {
    let mut y = x;
    let mut deriv = 1.0;
    for q in word.iter().rev() {
        let d = q.m as f64 + q.eps.as_f64() * y;
        deriv /= d * d;
        y = 1.0 / d;
    }
    deriv
}
