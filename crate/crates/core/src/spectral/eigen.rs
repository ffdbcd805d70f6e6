use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

/// Dominant (or selected) eigenvalue of a collocation matrix with its
/// right eigenvector and left eigenvector, normalized so that `left . right = 1`.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub lambda: Complex64,
    pub right: DVector<Complex64>,
    pub left: DVector<Complex64>,
    /// Modulus of the largest other eigenvalue.
    pub r_sub: f64,
    /// `|A r - lambda r| / |r|` in the max norm.
    pub residual: f64,
}

const RESIDUAL_TOL: f64 = 1e-12;
const MAX_ITER: usize = 60;

pub fn eigenvalues(a: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let schur = Schur::try_new(a.clone(), 1e-15, 10_000).ok_or_else(|| Error::NoConvergence {
        iterations: 10_000,
        detail: "Schur decomposition did not converge".into(),
    })?;
    let ev = schur.eigenvalues().ok_or_else(|| Error::NoConvergence {
        iterations: 0,
        detail: "Schur form is not triangular".into(),
    })?;
    Ok(ev.iter().copied().collect())
}

fn max_norm(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn inverse_iteration(a: &DMatrix<Complex64>, shift: Complex64) -> Result<(DVector<Complex64>, f64)> {
    let n = a.nrows();
    let scale = shift.norm().max(1.0);
    let mut x = DVector::from_element(n, Complex64::new(1.0, 0.0));
    let mut residual = f64::INFINITY;
    for (attempt, nudge) in [0.0, 1e-13, 1e-10].into_iter().enumerate() {
        let mu = shift + Complex64::new(nudge * scale, 0.0);
        let lu = (a - DMatrix::identity(n, n) * mu).lu();
        for _ in 0..MAX_ITER {
            let Some(y) = lu.solve(&x) else { break };
            let norm = max_norm(&y);
            if !norm.is_finite() || norm == 0.0 {
                break;
            }
            x = y / Complex64::new(norm, 0.0);
            let ax = a * &x;
            let lambda = x.dotc(&ax) / x.dotc(&x);
            residual = max_norm(&(ax - &x * lambda)) / max_norm(&x);
            if residual <= RESIDUAL_TOL * scale {
                return Ok((x, residual));
            }
        }
        if attempt == 2 {
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITER,
        detail: format!("inverse iteration near {shift}: residual {residual:.3e}"),
    })
}

fn pair_at(a: &DMatrix<Complex64>, index: usize, values: &[Complex64]) -> Result<Eigenpair> {
    let target = values[index];
    let (mut right, residual) = inverse_iteration(a, target)?;
    let (mut left, _) = inverse_iteration(&a.transpose(), target)?;
    let lambda = left.dot(&(a * &right)) / left.dot(&right);
    // phase: make the largest node value of the right vector real positive
    let pivot = right.iter().copied().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap_or_default();
    if pivot.norm() > 0.0 {
        right /= pivot / pivot.norm();
    }
    let pairing = left.dot(&right);
    if pairing.norm() < 1e-300 {
        return Err(Error::Singular(format!("left and right eigenvectors at {target} are orthogonal")));
    }
    left /= pairing;
    let r_sub = values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != index)
        .map(|(_, z)| z.norm())
        .fold(0.0, f64::max);
    Ok(Eigenpair { lambda, right, left, r_sub, residual })
}

/// Eigenvalue of largest modulus, polished by inverse iteration.
pub fn dominant_eigenpair(a: &DMatrix<Complex64>) -> Result<Eigenpair> {
    let values = eigenvalues(a)?;
    let index = (0..values.len())
        .max_by(|&i, &j| values[i].norm().total_cmp(&values[j].norm()))
        .ok_or_else(|| crate::error::invalid("empty matrix"))?;
    pair_at(a, index, &values)
}

/// Eigenvalue closest to `target`.
pub fn eigenpair_near(a: &DMatrix<Complex64>, target: Complex64) -> Result<Eigenpair> {
    let values = eigenvalues(a)?;
    let index = (0..values.len())
        .min_by(|&i, &j| (values[i] - target).norm().total_cmp(&(values[j] - target).norm()))
        .ok_or_else(|| crate::error::invalid("empty matrix"))?;
    pair_at(a, index, &values)
}
