use crate::error::{domain, Result};
use serde::Serialize;
use std::fmt;

/// Sign of a digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.as_i64() as f64
    }
}

/// A quotient/sign pair `(m, eps)` labelling the branch `x -> 1/(m + eps x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Digit {
    pub m: u64,
    pub eps: Sign,
}

impl Digit {
    pub const fn plus(m: u64) -> Self {
        Digit { m, eps: Sign::Plus }
    }

    pub const fn minus(m: u64) -> Self {
        Digit { m, eps: Sign::Minus }
    }

    /// Value `h(x)` and `|h'(x)|` of the inverse branch.
    pub fn eval(self, x: f64) -> Result<(f64, f64)> {
        let d = self.m as f64 + self.eps.as_f64() * x;
        if d <= 0.0 || !d.is_finite() {
            return Err(domain(format!("branch {self} undefined at x = {x}")));
        }
        let h = 1.0 / d;
        Ok((h, h * h))
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.eps {
            Sign::Plus => '+',
            Sign::Minus => '-',
        };
        write!(f, "({},{}1)", self.m, s)
    }
}

/// Free-function form of [`Digit::eval`].
pub fn branch_eval(q: Digit, x: f64) -> Result<(f64, f64)> {
    q.eval(x)
}

/// The three Euclidean algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AlgorithmKind {
    /// Standard division `v = m u + r`, `0 <= r < u`.
    #[serde(rename = "G")]
    Standard,
    /// Centred division, remainder in `[-u/2, u/2)`.
    #[serde(rename = "K")]
    Centred,
    /// Odd-quotient division, remainder in `[-u, u)`.
    #[serde(rename = "O")]
    Odd,
}

/// An interval with open/closed ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        let lo_ok = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let hi_ok = if self.hi_closed { x <= self.hi } else { x < self.hi };
        lo_ok && hi_ok
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 3] = [Self::Standard, Self::Centred, Self::Odd];

    pub fn tag(self) -> char {
        match self {
            Self::Standard => 'G',
            Self::Centred => 'K',
            Self::Odd => 'O',
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag.to_ascii_lowercase().as_str() {
            "g" | "standard" => Some(Self::Standard),
            "k" | "centred" | "centered" => Some(Self::Centred),
            "o" | "odd" => Some(Self::Odd),
            _ => None,
        }
    }

    /// The interval `I` on which the map `T` acts.
    pub fn interval(self) -> Interval {
        match self {
            Self::Standard => Interval { lo: 0.0, hi: 1.0, lo_closed: false, hi_closed: false },
            Self::Centred => Interval { lo: 0.0, hi: 0.5, lo_closed: false, hi_closed: true },
            Self::Odd => Interval { lo: 0.0, hi: 1.0, lo_closed: true, hi_closed: true },
        }
    }

    /// Exponent below which `sum_h sup |h'|^sigma` diverges.
    pub fn sigma0(self) -> f64 {
        0.5
    }

    pub fn signs(self) -> &'static [Sign] {
        match self {
            Self::Standard => &[Sign::Plus],
            Self::Centred | Self::Odd => &[Sign::Plus, Sign::Minus],
        }
    }

    /// Smallest admissible quotient for the given sign.
    pub fn min_quotient(self, eps: Sign) -> u64 {
        match (self, eps) {
            (Self::Standard, Sign::Plus) => 1,
            (Self::Standard, Sign::Minus) => u64::MAX,
            (Self::Centred, Sign::Plus) => 2,
            (Self::Centred, Sign::Minus) => 3,
            (Self::Odd, Sign::Plus) => 1,
            (Self::Odd, Sign::Minus) => 3,
        }
    }

    /// Spacing between consecutive admissible quotients.
    pub fn quotient_step(self) -> u64 {
        match self {
            Self::Odd => 2,
            _ => 1,
        }
    }

    /// Smallest admissible quotient `> m` for the sign.
    pub fn next_quotient_above(self, eps: Sign, m: u64) -> u64 {
        let lo = self.min_quotient(eps);
        if m < lo {
            return lo;
        }
        match self {
            Self::Odd => {
                if m % 2 == 0 {
                    m + 1
                } else {
                    m + 2
                }
            }
            _ => m + 1,
        }
    }

    pub fn is_admissible(self, q: Digit) -> bool {
        match (self, q.eps) {
            (Self::Standard, Sign::Plus) => q.m >= 1,
            (Self::Standard, Sign::Minus) => false,
            (Self::Centred, Sign::Plus) => q.m >= 2,
            (Self::Centred, Sign::Minus) => q.m >= 3,
            (Self::Odd, eps) => q.m % 2 == 1 && !(q.m == 1 && eps == Sign::Minus),
        }
    }

    /// Membership in the set `F` of digits that may end an expansion.
    pub fn is_final(self, q: Digit) -> bool {
        match self {
            Self::Standard | Self::Centred => q.eps == Sign::Plus && q.m >= 2,
            Self::Odd => q.eps == Sign::Plus && q.m % 2 == 1,
        }
    }

    /// Admissible digits with quotient `<= max_m`, ordered by quotient then sign.
    pub fn digits_up_to(self, max_m: u64) -> Vec<Digit> {
        let mut out = Vec::new();
        for m in 1..=max_m {
            for &eps in self.signs() {
                let q = Digit { m, eps };
                if self.is_admissible(q) {
                    out.push(q);
                }
            }
        }
        out
    }

    /// Whether the ratio `u/v` lies in the algorithm's domain.
    pub fn accepts_pair(self, u: u64, v: u64) -> bool {
        match self {
            Self::Centred => u >= 1 && 2 * u <= v,
            _ => u >= 1 && u <= v,
        }
    }

    /// One division step `v = m u + eps r`.
    pub fn divide(self, v: u64, u: u64) -> Result<(Digit, u64)> {
        if u == 0 {
            return Err(domain("division by u = 0"));
        }
        if v < u {
            return Err(domain(format!("divide requires v >= u, got v = {v}, u = {u}")));
        }
        let (m, s): (u64, i128) = match self {
            Self::Standard => (v / u, (v % u) as i128),
            Self::Centred => {
                if v < 2 * u {
                    return Err(domain(format!(
                        "centred division requires v >= 2u, got v = {v}, u = {u}"
                    )));
                }
                // s in [-u/2, u/2): m = floor(v/u + 1/2)
                let m = (2 * v as u128 + u as u128) / (2 * u as u128);
                let m = m as u64;
                (m, v as i128 - m as i128 * u as i128)
            }
            Self::Odd => {
                // s in [-u, u): odd m in (v/u - 1, v/u + 1]
                let m = 2 * (v / (2 * u)) + 1;
                (m, v as i128 - m as i128 * u as i128)
            }
        };
        let (eps, r) = if s < 0 { (Sign::Minus, (-s) as u64) } else { (Sign::Plus, s as u64) };
        Ok((Digit { m, eps }, r))
    }

    /// The interval map `T(x) = |1/x - A(1/x)|`.
    pub fn apply_t(self, x: f64) -> Result<f64> {
        if x == 0.0 || !self.interval().contains(x) {
            return Err(domain(format!("x = {x} outside the open domain of T_{}", self.tag())));
        }
        let y = 1.0 / x;
        let a = match self {
            Self::Standard => y.floor(),
            Self::Centred => (y + 0.5).floor(),
            Self::Odd => 2.0 * (y / 2.0).floor() + 1.0,
        };
        Ok((y - a).abs())
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use AlgorithmKind::*;

    #[test]
    fn divide_examples() {
        assert_eq!(Standard.divide(13, 8).unwrap(), (Digit::plus(1), 5));
        assert_eq!(Centred.divide(13, 5).unwrap(), (Digit::minus(3), 2));
        assert_eq!(Odd.divide(13, 8).unwrap(), (Digit::plus(1), 5));
        assert_eq!(Odd.divide(2, 1).unwrap(), (Digit::minus(3), 1));
    }

    #[test]
    fn divide_ties() {
        // 5/2 = 2.5: centred rounds up, leaving s = -1 in [-1, 1)
        assert_eq!(Centred.divide(5, 2).unwrap(), (Digit::minus(3), 1));
        // 4/1 is even: odd quotient rounds up to 5, s = -1 in [-1, 1)
        assert_eq!(Odd.divide(4, 1).unwrap(), (Digit::minus(5), 1));
        assert_eq!(Odd.divide(3, 1).unwrap(), (Digit::plus(3), 0));
    }

    #[test]
    fn divide_errors() {
        assert!(Centred.divide(9, 5).is_err());
        assert!(Standard.divide(3, 0).is_err());
        assert!(Odd.divide(0, 0).is_err());
    }

    #[test]
    fn divide_postconditions_exhaustive() {
        for kind in AlgorithmKind::ALL {
            for u in 1..60u64 {
                for v in u..200u64 {
                    if kind == Centred && v < 2 * u {
                        assert!(kind.divide(v, u).is_err());
                        continue;
                    }
                    let (q, r) = kind.divide(v, u).unwrap();
                    assert_eq!(v as i64, q.m as i64 * u as i64 + q.eps.as_i64() * r as i64);
                    assert!(kind.is_admissible(q), "{kind}: {q} from {v}/{u}");
                    if r == 0 {
                        assert_eq!(q.eps, Sign::Plus);
                    }
                    let s = q.eps.as_i64() * r as i64;
                    let u = u as i64;
                    match kind {
                        Standard => assert!((0..u).contains(&s)),
                        Centred => assert!(2 * s >= -u && 2 * s < u),
                        Odd => assert!(s >= -u && s < u),
                    }
                }
            }
        }
    }

    #[test]
    fn branch_eval_examples() {
        let (h, d) = Digit::minus(3).eval(0.4).unwrap();
        assert!((h - 1.0 / 2.6).abs() < 1e-15);
        assert!((d - 1.0 / (2.6 * 2.6)).abs() < 1e-15);
        assert_eq!(Digit::plus(1).eval(0.0).unwrap(), (1.0, 1.0));
        let (h, d) = Digit::plus(2).eval(0.5).unwrap();
        assert!((h - 0.4).abs() < 1e-15 && (d - 0.16).abs() < 1e-15);
        assert!(Digit::minus(1).eval(1.0).is_err());
    }

    #[test]
    fn apply_t_examples() {
        for kind in AlgorithmKind::ALL {
            assert!((kind.apply_t(0.4).unwrap() - 0.5).abs() < 1e-12);
        }
        assert!(Standard.apply_t(1.0).is_err());
        assert!(Centred.apply_t(0.6).is_err());
        assert!(Odd.apply_t(1.0).is_ok());
        assert!(Odd.apply_t(0.0).is_err());
    }

    #[test]
    fn admissibility_tables() {
        assert!(!Centred.is_admissible(Digit::plus(1)));
        assert!(!Centred.is_admissible(Digit::minus(2)));
        assert!(Centred.is_admissible(Digit::minus(3)));
        assert!(!Odd.is_admissible(Digit::minus(1)));
        assert!(!Odd.is_admissible(Digit::plus(2)));
        assert!(!Standard.is_admissible(Digit::minus(4)));
        assert!(Odd.is_final(Digit::plus(1)));
        assert!(!Standard.is_final(Digit::plus(1)));
    }

    #[test]
    fn branches_map_closure_into_closure() {
        for kind in AlgorithmKind::ALL {
            let iv = kind.interval();
            for q in kind.digits_up_to(40) {
                for &x in &[iv.lo, iv.hi, 0.5 * (iv.lo + iv.hi)] {
                    let (h, _) = q.eval(x).unwrap();
                    assert!(h >= iv.lo - 1e-15 && h <= iv.hi + 1e-15, "{kind} {q} {x}");
                }
            }
        }
    }

    #[test]
    fn distortion_bound() {
        // |h''| / |h'| = 2 / (m + eps x) <= 2
        for kind in AlgorithmKind::ALL {
            let iv = kind.interval();
            for q in kind.digits_up_to(30) {
                for k in 0..=20 {
                    let x = iv.lo + iv.width() * k as f64 / 20.0;
                    let d = q.m as f64 + q.eps.as_f64() * x;
                    let h1 = d.powi(-2);
                    let h2 = 2.0 * d.powi(-3);
                    assert!(h2 <= 2.0 * h1 + 1e-15);
                }
            }
        }
    }
}
