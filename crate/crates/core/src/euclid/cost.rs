//! Digit costs and their growth/lattice metadata.

use super::kind::{Digit, Sign};
use crate::error::{invalid, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Cost assigned to every digit not listed in a table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CostRule {
    /// `c = 1`: the number of steps.
    Unit,
    /// `c = log m`.
    LogQuotient,
    /// `c = floor(log2 m) + 1`.
    BinaryLength,
    /// `c = 1{q = q0}`.
    Indicator(Digit),
    /// `c = const`.
    Constant(f64),
}

impl CostRule {
    fn eval(&self, q: Digit) -> f64 {
        match *self {
            CostRule::Unit => 1.0,
            CostRule::LogQuotient => (q.m as f64).ln(),
            CostRule::BinaryLength => (64 - q.m.leading_zeros()) as f64,
            CostRule::Indicator(q0) => {
                if q == q0 {
                    1.0
                } else {
                    0.0
                }
            }
            CostRule::Constant(c) => c,
        }
    }

    fn name(&self) -> String {
        match self {
            CostRule::Unit => "unit".into(),
            CostRule::LogQuotient => "logq".into(),
            CostRule::BinaryLength => "binlen".into(),
            CostRule::Indicator(q) => format!("indicator{q}"),
            CostRule::Constant(c) => format!("const({c})"),
        }
    }
}

/// Closed form of the cost for large quotients, used to sum branch tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailRule {
    /// `c(m, eps) = offset + log_coeff * ln m`.
    AffineLog { offset: f64, log_coeff: f64 },
    /// `c(m, eps) = offset + scale * (floor(log2 m) + 1)`.
    BitLength { offset: f64, scale: f64 },
}

/// Lattice metadata: `(c - offset) / width` is an integer for every digit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lattice {
    pub width: f64,
    pub offset: f64,
}

/// A nonnegative additive cost on digits.
#[derive(Debug, Clone, PartialEq)]
pub struct CostFunction {
    name: String,
    table: BTreeMap<Digit, f64>,
    default: CostRule,
    scale: f64,
    lattice: Option<Lattice>,
}

impl CostFunction {
    fn from_rule(rule: CostRule) -> Self {
        let lattice = match rule {
            CostRule::Unit | CostRule::BinaryLength | CostRule::Indicator(_) => {
                Some(Lattice { width: 1.0, offset: 0.0 })
            }
            CostRule::Constant(c) if c > 0.0 => Some(Lattice { width: c, offset: 0.0 }),
            _ => None,
        };
        CostFunction { name: rule.name(), table: BTreeMap::new(), default: rule, scale: 1.0, lattice }
    }

    pub fn unit() -> Self {
        Self::from_rule(CostRule::Unit)
    }

    pub fn log_quotient() -> Self {
        Self::from_rule(CostRule::LogQuotient)
    }

    pub fn binary_length() -> Self {
        Self::from_rule(CostRule::BinaryLength)
    }

    pub fn indicator(q0: Digit) -> Self {
        Self::from_rule(CostRule::Indicator(q0))
    }

    /// Looks up one of the built-in costs by name: `unit`, `logq`, `binlen`,
    /// or `indicator:<m><sign>` such as `indicator:1+`.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "unit" => Some(Self::unit()),
            "logq" | "log" => Some(Self::log_quotient()),
            "binlen" => Some(Self::binary_length()),
            _ => {
                let rest = name.strip_prefix("indicator:")?;
                let (m, eps) = if let Some(m) = rest.strip_suffix('+') {
                    (m, Sign::Plus)
                } else if let Some(m) = rest.strip_suffix('-') {
                    (m, Sign::Minus)
                } else {
                    (rest, Sign::Plus)
                };
                Some(Self::indicator(Digit { m: m.parse().ok()?, eps }))
            }
        }
    }

    /// Parses a table file: one `m eps value` line per listed digit, a single
    /// `default <unit|logq|binlen|const v>` line, and optional `name <text>` and
    /// `lattice <width> <offset>` lines. `#` starts a comment.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut table = BTreeMap::new();
        let mut default = None;
        let mut name = None;
        let mut lattice = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| invalid(format!("cost table line {}: {msg}: `{raw}`", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "default" => {
                    if default.is_some() {
                        return Err(err("duplicate default rule"));
                    }
                    let rule = match (fields.get(1).copied(), fields.get(2)) {
                        (Some("unit"), None) => CostRule::Unit,
                        (Some("logq"), None) => CostRule::LogQuotient,
                        (Some("binlen"), None) => CostRule::BinaryLength,
                        (Some("zero"), None) => CostRule::Constant(0.0),
                        (Some("const"), Some(v)) => {
                            let v: f64 = v.parse().map_err(|_| err("bad constant"))?;
                            if !(v >= 0.0 && v.is_finite()) {
                                return Err(err("negative cost"));
                            }
                            CostRule::Constant(v)
                        }
                        _ => return Err(err("unknown default rule")),
                    };
                    default = Some(rule);
                }
                "name" => name = Some(fields[1..].join(" ")),
                "lattice" => {
                    if fields.len() != 3 {
                        return Err(err("expected `lattice <width> <offset>`"));
                    }
                    let width: f64 = fields[1].parse().map_err(|_| err("bad width"))?;
                    let offset: f64 = fields[2].parse().map_err(|_| err("bad offset"))?;
                    if !(width > 0.0) {
                        return Err(err("lattice width must be positive"));
                    }
                    lattice = Some(Lattice { width, offset });
                }
                _ => {
                    if fields.len() != 3 {
                        return Err(err("expected `m eps value`"));
                    }
                    let m: u64 = fields[0].parse().map_err(|_| err("bad quotient"))?;
                    let eps = match fields[1] {
                        "+1" | "1" | "+" => Sign::Plus,
                        "-1" | "-" => Sign::Minus,
                        _ => return Err(err("eps must be +1 or -1")),
                    };
                    let value: f64 = fields[2].parse().map_err(|_| err("bad value"))?;
                    if m == 0 {
                        return Err(err("quotient must be positive"));
                    }
                    if !(value >= 0.0 && value.is_finite()) {
                        return Err(err("costs must be nonnegative"));
                    }
                    if table.insert(Digit { m, eps }, value).is_some() {
                        return Err(err("duplicate digit"));
                    }
                }
            }
        }
        let default = default.ok_or_else(|| invalid("cost table has no `default` line"))?;
        let cost = CostFunction {
            name: name.unwrap_or_else(|| format!("table[{}]+{}", table.len(), default.name())),
            table,
            default,
            scale: 1.0,
            lattice,
        };
        if let Some(l) = cost.lattice {
            let max_m = cost.table.keys().map(|q| q.m).max().unwrap_or(0) + 64;
            for m in 1..=max_m {
                for eps in [Sign::Plus, Sign::Minus] {
                    let k = (cost.value(Digit { m, eps }) - l.offset) / l.width;
                    if (k - k.round()).abs() > 1e-9 {
                        return Err(invalid(format!(
                            "declared lattice ({}, {}) does not fit c{} = {}",
                            l.width,
                            l.offset,
                            Digit { m, eps },
                            cost.value(Digit { m, eps })
                        )));
                    }
                }
            }
        }
        Ok(cost)
    }

    /// `k * c`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.scale *= k;
        out.name = format!("{}*{}", k, self.name);
        out.lattice = self.lattice.map(|l| Lattice { width: l.width * k.abs(), offset: l.offset * k });
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn value(&self, q: Digit) -> f64 {
        let base = match self.table.get(&q) {
            Some(&v) => v,
            None => self.default.eval(q),
        };
        self.scale * base
    }

    pub fn lattice(&self) -> Option<Lattice> {
        self.lattice
    }

    /// True when `c` takes the same value on every digit.
    pub fn is_constant(&self) -> bool {
        self.table.is_empty() && matches!(self.default, CostRule::Unit | CostRule::Constant(_))
    }

    /// True when every value is an integer, so totals can be histogrammed exactly.
    pub fn is_integer_valued(&self) -> bool {
        let int = |x: f64| (x - x.round()).abs() < 1e-12;
        self.table.values().all(|&v| int(v * self.scale))
            && match self.default {
                CostRule::Unit | CostRule::BinaryLength | CostRule::Indicator(_) => int(self.scale),
                CostRule::Constant(c) => int(c * self.scale),
                CostRule::LogQuotient => false,
            }
    }

    /// First quotient from which [`CostFunction::tail_rule`] is exact.
    pub fn tail_start(&self) -> u64 {
        let table_max = self.table.keys().map(|q| q.m).max().unwrap_or(0);
        let ind = match self.default {
            CostRule::Indicator(q) => q.m,
            _ => 0,
        };
        table_max.max(ind) + 1
    }

    /// Cost as a closed form in `m`, valid for `m >= tail_start()`.
    pub fn tail_rule(&self) -> TailRule {
        let s = self.scale;
        match self.default {
            CostRule::Unit => TailRule::AffineLog { offset: s, log_coeff: 0.0 },
            CostRule::Constant(c) => TailRule::AffineLog { offset: s * c, log_coeff: 0.0 },
            CostRule::Indicator(_) => TailRule::AffineLog { offset: 0.0, log_coeff: 0.0 },
            CostRule::LogQuotient => TailRule::AffineLog { offset: 0.0, log_coeff: s },
            CostRule::BinaryLength => TailRule::BitLength { offset: 0.0, scale: s },
        }
    }

    /// `beta` such that `c(m) <= const + beta ln m` for large `m`.
    pub fn growth_exponent(&self) -> f64 {
        match self.tail_rule() {
            TailRule::AffineLog { log_coeff, .. } => log_coeff.max(0.0),
            TailRule::BitLength { scale, .. } => scale.max(0.0) / std::f64::consts::LN_2,
        }
    }

    /// Default half-width of the real `w` window used by the spectral solvers
    /// (moderate growth holds at `sigma = 1` for `w < 1 / beta`).
    pub fn nu0(&self) -> f64 {
        let beta = self.growth_exponent();
        if beta > 0.0 {
            0.5 / beta
        } else {
            1.0
        }
    }

    /// Whether `sum_m e^{w c} m^{-2 sigma}` converges for real parts `(sigma, w)`.
    pub fn moderate_growth_ok(&self, sigma: f64, w: f64) -> bool {
        let beta = if w > 0.0 { self.growth_exponent() } else { 0.0 };
        2.0 * sigma - w * beta > 1.0
    }
}

impl fmt::Display for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins() {
        assert_eq!(CostFunction::unit().value(Digit::plus(7)), 1.0);
        assert_eq!(CostFunction::binary_length().value(Digit::plus(1)), 1.0);
        assert_eq!(CostFunction::binary_length().value(Digit::plus(4)), 3.0);
        assert_eq!(CostFunction::binary_length().value(Digit::minus(7)), 3.0);
        assert!((CostFunction::log_quotient().value(Digit::plus(3)) - 3f64.ln()).abs() < 1e-15);
        let ind = CostFunction::indicator(Digit::plus(1));
        assert_eq!(ind.value(Digit::plus(1)), 1.0);
        assert_eq!(ind.value(Digit::plus(2)), 0.0);
        assert_eq!(CostFunction::builtin("indicator:3-").unwrap().value(Digit::minus(3)), 1.0);
        assert!(CostFunction::builtin("nope").is_none());
    }

    #[test]
    fn lattice_metadata_holds() {
        for c in [
            CostFunction::unit(),
            CostFunction::binary_length(),
            CostFunction::indicator(Digit::plus(2)),
            CostFunction::unit().scaled(2.5),
        ] {
            let l = c.lattice().unwrap();
            for m in 1..500 {
                for eps in [Sign::Plus, Sign::Minus] {
                    let k = (c.value(Digit { m, eps }) - l.offset) / l.width;
                    assert!((k - k.round()).abs() < 1e-12);
                }
            }
        }
        assert!(CostFunction::log_quotient().lattice().is_none());
    }

    #[test]
    fn table_parsing() {
        let text = "# custom\nname small-quotients\n1 +1 0.5\n2 -1 3\ndefault logq\n";
        let c = CostFunction::parse_table(text).unwrap();
        assert_eq!(c.name(), "small-quotients");
        assert_eq!(c.value(Digit::plus(1)), 0.5);
        assert_eq!(c.value(Digit::minus(2)), 3.0);
        assert!((c.value(Digit::plus(5)) - 5f64.ln()).abs() < 1e-15);
        assert_eq!(c.tail_start(), 3);
        assert!(CostFunction::parse_table("1 +1 2\n").is_err());
        assert!(CostFunction::parse_table("1 +1 -2\ndefault unit\n").is_err());
        assert!(CostFunction::parse_table("default unit\ndefault logq\n").is_err());
        assert!(CostFunction::parse_table("1 x 2\ndefault unit\n").is_err());
        let c = CostFunction::parse_table("1 +1 3\ndefault const 2\nlattice 1 0\n").unwrap();
        assert!(c.is_integer_valued());
        assert!(CostFunction::parse_table("1 +1 0.5\ndefault unit\nlattice 1 0\n").is_err());
    }

    #[test]
    fn growth_windows() {
        let c = CostFunction::log_quotient();
        assert!(c.moderate_growth_ok(1.0, 0.3));
        assert!(!c.moderate_growth_ok(1.0, 1.0));
        assert!(CostFunction::unit().moderate_growth_ok(0.75, 5.0));
        assert!(!CostFunction::unit().moderate_growth_ok(0.5, 0.0));
    }

    #[test]
    fn scaling() {
        let c = CostFunction::log_quotient().scaled(2.0);
        assert!((c.value(Digit::plus(3)) - 2.0 * 3f64.ln()).abs() < 1e-15);
        assert_eq!(c.growth_exponent(), 2.0);
    }
}
