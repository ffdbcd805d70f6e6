//! Dirichlet series of costs: coefficients `c_n(i tau)`, their partial sums,
//! truncations of `S(s, i tau) = sum_{(u,v)} v^(-s) exp(i tau C(u,v))` and the
//! operator form `S(2s, i tau) = F_{s, i tau} (I - H_{s, i tau})^(-1) [1] (0)`.

use crate::cost_stats::{Profile, ProfileSpec};
use crate::error::{invalid, Error, Result};
use crate::euclid::{AlgorithmKind, CostFunction};
use crate::numeric::ComplexSum;
use crate::sample_space::SweepOptions;
use crate::spectral::{eigenvalues, SpectralConfig, SpectralModel};
use nalgebra::DVector;
use num_complex::Complex64;

/// Largest table size accepted by [`coefficients`].
pub const MAX_COEFFICIENTS: u64 = 200_000;

/// Coefficient table of the Dirichlet series of `exp(i tau C)`.
#[derive(Debug, Clone)]
pub struct DirichletData {
    pub kind: AlgorithmKind,
    pub cost: CostFunction,
    pub tau: f64,
    /// `c_n(i tau)` for `n = 0..=n_max`; `c_0 = 0`.
    pub coefficients: Vec<Complex64>,
    /// `c_n(0)`, the number of pairs with denominator `n`.
    pub counts: Vec<u64>,
}

impl DirichletData {
    pub fn n_max(&self) -> u64 {
        (self.coefficients.len() - 1) as u64
    }
}

/// `Phi(N) = sum_{n <= N} c_n` and `Psi(T) = sum_{n <= T} c_n (T - n)`, indexed by `N` and `T`.
#[derive(Debug, Clone)]
pub struct PartialSums {
    pub phi: Vec<Complex64>,
    pub psi: Vec<Complex64>,
}

/// `sum_{n <= n_max} c_n n^(-s)` with a bound on the omitted terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedS {
    pub value: Complex64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub s: f64,
    pub tau: f64,
    /// Pair sum `S(2s, i tau)` over pairs with an expansion ending in `F`.
    pub lhs: Complex64,
    /// `F [sum_{k <= n} H^k 1] (0)`.
    pub rhs: Complex64,
    pub diff: f64,
    pub lhs_tail: f64,
    pub rhs_tail: f64,
    /// Successive partial Neumann sums seen through `F`.
    pub iterates: Vec<Complex64>,
}

pub fn coefficients(
    n_max: u64,
    tau: f64,
    c: &CostFunction,
    kind: AlgorithmKind,
    opts: &SweepOptions,
) -> Result<DirichletData> {
    if n_max == 0 || n_max > MAX_COEFFICIENTS {
        return Err(invalid(format!("N_max = {n_max} outside 1..={MAX_COEFFICIENTS}")));
    }
    let mut spec = ProfileSpec::new(kind, n_max, vec![c.clone()]);
    spec.phases = vec![(0, tau), (0, 0.0)];
    let profile = Profile::build(spec, opts)?;
    let coefficients = profile.phase_coefficients(0)?;
    let counts = profile.phase_coefficients(1)?.iter().map(|z| z.re.round() as u64).collect();
    Ok(DirichletData { kind, cost: c.clone(), tau, coefficients, counts })
}

pub fn partial_sums(data: &DirichletData) -> PartialSums {
    let n = data.coefficients.len();
    let mut phi = Vec::with_capacity(n);
    let mut psi = Vec::with_capacity(n);
    let mut acc = ComplexSum::default();
    let mut lagged = ComplexSum::default();
    for t in 0..n {
        // Psi(T) = sum_{N < T} Phi(N)
        psi.push(lagged.value());
        acc.add(data.coefficients[t]);
        phi.push(acc.value());
        lagged.add(acc.value());
    }
    PartialSums { phi, psi }
}

/// Direct evaluation of `Psi(T)` from its definition.
pub fn cesaro_sum(data: &DirichletData, t: u64) -> Complex64 {
    let mut acc = ComplexSum::default();
    for n in 1..=t.min(data.n_max()) {
        acc.add(data.coefficients[n as usize] * (t - n) as f64);
    }
    acc.value()
}

/// Truncated `S(s, i tau)`. Needs `Re s > 2`, where `c_n(0) <= n` gives the
/// tail bound `N^(2 - sigma) / (sigma - 2)`.
pub fn truncated_s(s: Complex64, data: &DirichletData) -> Result<TruncatedS> {
    if s.re <= 2.0 {
        return Err(Error::Divergence(format!("Re s = {} <= 2: no tail bound for the truncation", s.re)));
    }
    let mut acc = ComplexSum::default();
    for (n, &cn) in data.coefficients.iter().enumerate().skip(1) {
        acc.add(cn * (-s * (n as f64).ln()).exp());
    }
    let nm = data.n_max() as f64;
    Ok(TruncatedS { value: acc.value(), tail_bound: nm.powf(2.0 - s.re) / (s.re - 2.0) })
}

/// Compares the pair sum `S(2s, i tau)` with its operator form.
///
/// Pairs are counted through their expansions, so `(1, 1)` is left out for
/// the standard algorithm, whose expansion of it ends outside `F`.
pub fn identity_check(
    s: f64,
    tau: f64,
    c: &CostFunction,
    kind: AlgorithmKind,
    n_max: u64,
    n_neumann: usize,
    spectral: &SpectralConfig,
    opts: &SweepOptions,
) -> Result<IdentityReport> {
    if !(s > 1.0 && s <= 1.5) {
        return Err(invalid(format!("s = {s} outside (1, 1.5]")));
    }
    let data = coefficients(n_max, tau, c, kind, opts)?;
    let ts = truncated_s(Complex64::new(2.0 * s, 0.0), &data)?;
    let mut lhs = ts.value;
    if kind == AlgorithmKind::Standard && n_max >= 1 {
        lhs -= data.coefficients[1];
    }

    let model = SpectralModel::new(kind, c.clone(), *spectral);
    let op = model.operator(Complex64::new(s, 0.0), Complex64::new(0.0, tau))?;
    let rho = eigenvalues(&op.matrix)?.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if rho >= 1.0 {
        return Err(Error::Divergence(format!(
            "spectral radius {rho} >= 1: the Neumann series diverges"
        )));
    }
    let ones = DVector::from_element(op.dim(), Complex64::new(1.0, 0.0));
    let mut term = ones.clone();
    let mut sum = ones.clone();
    let mut iterates = vec![op.final_functional(sum.as_slice())];
    for _ in 0..n_neumann {
        term = op.apply(&term);
        sum += &term;
        iterates.push(op.final_functional(sum.as_slice()));
    }
    let rhs = *iterates.last().expect("nonempty");
    let last = op.final_functional(term.as_slice()).norm();
    let sup = sum.iter().map(|z| z.norm()).fold(0.0, f64::max);
    // remaining Neumann terms, plus the quadrature tail propagated through the resolvent
    let rhs_tail = last * rho / (1.0 - rho) + op.tail_bound * sup / (1.0 - rho);
    Ok(IdentityReport {
        s,
        tau,
        lhs,
        rhs,
        diff: (lhs - rhs).norm(),
        lhs_tail: ts.tail_bound,
        rhs_tail,
        iterates,
    })
}
