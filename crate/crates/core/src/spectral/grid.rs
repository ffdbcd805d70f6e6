use crate::error::{invalid, Result};
use crate::euclid::AlgorithmKind;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Chebyshev points of the first kind on `[a, b]`, with barycentric and
/// Fejer quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationGrid {
    pub a: f64,
    pub b: f64,
    /// Increasing, strictly inside `(a, b)`.
    pub nodes: Vec<f64>,
    pub bary: Vec<f64>,
    pub quad: Vec<f64>,
}

impl CollocationGrid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid("a collocation grid needs at least two nodes"));
        }
        if !(b > a) {
            return Err(invalid(format!("empty interval [{a}, {b}]")));
        }
        let half = 0.5 * (b - a);
        let theta: Vec<f64> = (0..n).map(|j| (2 * j + 1) as f64 * PI / (2 * n) as f64).collect();
        let nodes = theta.iter().map(|t| a + half * (1.0 - t.cos())).collect();
        let bary = theta
            .iter()
            .enumerate()
            .map(|(j, t)| if j % 2 == 0 { t.sin() } else { -t.sin() })
            .collect();
        let quad = theta
            .iter()
            .map(|&t| {
                let s: f64 = (1..=n / 2)
                    .map(|l| (2.0 * l as f64 * t).cos() / (4.0 * (l * l) as f64 - 1.0))
                    .sum();
                half * 2.0 / n as f64 * (1.0 - 2.0 * s)
            })
            .collect();
        Ok(CollocationGrid { a, b, nodes, bary, quad })
    }

    /// Grid on the closure of the algorithm's interval.
    pub fn for_kind(kind: AlgorithmKind, n: usize) -> Result<Self> {
        let i = kind.interval();
        Self::new(i.lo, i.hi, n)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Lagrange basis values `l_j(y)` written into `out`.
    pub fn basis_at(&self, y: f64, out: &mut [f64]) {
        let mut denom = 0.0;
        for (j, (&xj, &wj)) in self.nodes.iter().zip(&self.bary).enumerate() {
            let d = y - xj;
            if d == 0.0 {
                out.iter_mut().for_each(|o| *o = 0.0);
                out[j] = 1.0;
                return;
            }
            out[j] = wj / d;
            denom += out[j];
        }
        let inv = 1.0 / denom;
        out.iter_mut().for_each(|o| *o *= inv);
    }

    pub fn interpolate(&self, values: &[Complex64], y: f64) -> Complex64 {
        let mut basis = vec![0.0; self.len()];
        self.basis_at(y, &mut basis);
        values.iter().zip(&basis).map(|(v, b)| v * b).sum()
    }

    pub fn interpolate_real(&self, values: &[f64], y: f64) -> f64 {
        let mut basis = vec![0.0; self.len()];
        self.basis_at(y, &mut basis);
        values.iter().zip(&basis).map(|(v, b)| v * b).sum()
    }

    /// Quadrature of the interpolant.
    pub fn integrate(&self, values: &[Complex64]) -> Complex64 {
        values.iter().zip(&self.quad).map(|(v, w)| v * w).sum()
    }

    /// Differentiation matrix of the interpolant at the nodes.
    pub fn derivative_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if i != j {
                    let v = (self.bary[j] / self.bary[i]) / (self.nodes[i] - self.nodes[j]);
                    d[(i, j)] = v;
                    diag -= v;
                }
            }
            d[(i, i)] = diag;
        }
        d
    }

    /// Taylor coefficients of the basis at the left end: `l_j(a + y) = sum_r d[r][j] y^r`.
    pub fn left_taylor(&self, order: usize) -> Vec<Vec<f64>> {
        let n = self.len();
        let theta: Vec<f64> = (0..n).map(|j| (2 * j + 1) as f64 * PI / (2 * n) as f64).collect();
        // Chebyshev coefficients of l_j in t = -1 + 2(y - a)/(b - a); node j sits at t = -cos(theta_j)
        let mut coef = vec![vec![0.0; n]; n];
        for (k, row) in coef.iter_mut().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            for j in 0..n {
                let scale = if k == 0 { 1.0 } else { 2.0 };
                row[j] = scale / n as f64 * sign * (k as f64 * theta[j]).cos();
            }
        }
        // T_k(-1 + delta) = (-1)^k sum_r (-delta)^r p[k][r]
        let rmax = order.min(n - 1);
        let g = 2.0 / (self.b - self.a);
        let mut d = vec![vec![0.0; n]; order + 1];
        for k in 0..n {
            let kk = (k * k) as f64;
            let mut p = 1.0;
            let sk = if k % 2 == 0 { 1.0 } else { -1.0 };
            for r in 0..=rmax.min(k) {
                let sr = if r % 2 == 0 { 1.0 } else { -1.0 };
                let f = sk * sr * p * g.powi(r as i32);
                for j in 0..n {
                    d[r][j] += coef[k][j] * f;
                }
                let rr = (r * r) as f64;
                p *= (kk - rr) / ((2 * r + 1) as f64 * (r + 1) as f64);
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_sorted_and_interior() {
        let g = CollocationGrid::for_kind(AlgorithmKind::Centred, 32).unwrap();
        assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(g.nodes[0] > 0.0 && *g.nodes.last().unwrap() < 0.5);
    }

    #[test]
    fn interpolation_is_exact_for_polynomials() {
        let g = CollocationGrid::new(0.0, 1.0, 12).unwrap();
        let f = |x: f64| 3.0 * x.powi(7) - x.powi(2) + 0.5;
        let vals: Vec<f64> = g.nodes.iter().map(|&x| f(x)).collect();
        for y in [0.0, 0.013, 0.5, 0.77, 1.0] {
            assert!((g.interpolate_real(&vals, y) - f(y)).abs() < 1e-13);
        }
    }

    #[test]
    fn quadrature_and_derivative() {
        let g = CollocationGrid::new(0.0, 0.5, 20).unwrap();
        let vals: Vec<Complex64> = g.nodes.iter().map(|&x| Complex64::new(x.exp(), 0.0)).collect();
        assert!((g.integrate(&vals).re - (0.5f64.exp() - 1.0)).abs() < 1e-14);
        let d = g.derivative_matrix();
        let real: Vec<f64> = vals.iter().map(|v| v.re).collect();
        for i in 0..g.len() {
            let di: f64 = (0..g.len()).map(|j| d[(i, j)] * real[j]).sum();
            assert!((di - g.nodes[i].exp()).abs() < 1e-11);
        }
    }

    #[test]
    fn left_taylor_matches_barycentric() {
        let g = CollocationGrid::new(0.0, 1.0, 64).unwrap();
        let d = g.left_taylor(28);
        let mut basis = vec![0.0; 64];
        for y in [1e-4, 1e-3, 5e-3] {
            g.basis_at(y, &mut basis);
            for j in [0, 1, 7, 40, 63] {
                let t: f64 = (0..=28).map(|r| d[r][j] * y.powi(r as i32)).sum();
                assert!((t - basis[j]).abs() < 1e-11, "y {y} j {j}: {t} vs {}", basis[j]);
            }
        }
    }
}
