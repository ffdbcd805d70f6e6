use super::eigen::{dominant_eigenpair, Eigenpair};
use super::operator::{build_operator, OperatorConfig, OperatorMatrix};
use crate::error::{invalid, Error, Result};
use crate::euclid::{AlgorithmKind, CostFunction};
use num_complex::Complex64;
use serde::Serialize;

/// Parameters of the spectral solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralConfig {
    pub operator: OperatorConfig,
    /// Step of the finite differences in `w` for the moment constants.
    pub fd_step: f64,
    /// Finite-difference step in `s` for `lambda'_s`.
    pub s_step: f64,
    /// Largest `|w|` accepted by the `sigma(w)` solver; `None` uses the cost's default.
    pub nu0: Option<f64>,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig { operator: OperatorConfig::default(), fd_step: 1e-3, s_step: 1e-5, nu0: None }
    }
}

/// Pressure `Lambda(sigma) = log lambda(sigma, 0)` and its derivatives at `sigma = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureReport {
    pub values: Vec<(f64, f64)>,
    pub d1: f64,
    /// Second derivative in `s`.
    pub d2_s: f64,
    /// Second derivative of `log lambda(1, w)` along real `w`.
    pub d2_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentConstants {
    pub sigma_prime: f64,
    pub sigma_second: f64,
    pub mu: f64,
    pub delta2: f64,
}

/// Ingredients of the quasi-power approximation at `w = i tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiPower {
    pub tau: f64,
    pub sigma: Complex64,
    /// `E(i tau)`.
    pub e: Complex64,
    /// `E(0)`.
    pub e0: Complex64,
}

impl QuasiPower {
    pub fn coefficient(&self) -> Complex64 {
        self.e / (self.e0 * self.sigma)
    }

    /// `coefficient * N^(2 (sigma - 1))`.
    pub fn predict(&self, n: u64) -> Complex64 {
        self.coefficient() * (2.0 * (self.sigma - 1.0) * (n as f64).ln()).exp()
    }
}

/// Outcome of [`SpectralModel::resolvent_norm_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ProbeOutcome {
    Finite(f64),
    /// An eigenvalue of the discretization lies within `1e-8` of 1.
    Singular,
}

/// Summary of the spectral constants of one algorithm and cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub kind: AlgorithmKind,
    pub cost: String,
    pub grid_order: usize,
    #[serde(rename = "M")]
    pub m: u64,
    pub lambda: f64,
    pub pressure: PressureReport,
    pub sigma_prime: f64,
    pub sigma_second: f64,
    pub mu: f64,
    pub delta2: f64,
    pub tail_bound: f64,
}

/// Discretized weighted transfer operator for one algorithm and cost.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    pub kind: AlgorithmKind,
    pub cost: CostFunction,
    pub config: SpectralConfig,
}

fn richardson_first(f: &mut impl FnMut(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    let d = |f: &mut dyn FnMut(f64) -> Result<f64>, h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let d1 = d(f, h)?;
    let d2 = d(f, h / 2.0)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

fn richardson_second(f: &mut impl FnMut(f64) -> Result<f64>, x: f64, h: f64, fx: f64) -> Result<f64> {
    let d = |f: &mut dyn FnMut(f64) -> Result<f64>, h: f64| -> Result<f64> {
        Ok((f(x + h)? - 2.0 * fx + f(x - h)?) / (h * h))
    };
    let d1 = d(f, h)?;
    let d2 = d(f, h / 2.0)?;
    let r = (4.0 * d2 - d1) / 3.0;
    // roundoff in the eigenvalues is amplified by 1/h^2
    if !r.is_finite() || (r - d2).abs() > 1e-2 * (r.abs() + 1e-3) {
        return Err(Error::NoConvergence {
            iterations: 2,
            detail: format!("second difference unstable: {d1} vs {d2}; eigen-solver noise dominates the step"),
        });
    }
    Ok(r)
}

impl SpectralModel {
    pub fn new(kind: AlgorithmKind, cost: CostFunction, config: SpectralConfig) -> Self {
        SpectralModel { kind, cost, config }
    }

    pub fn with_defaults(kind: AlgorithmKind, cost: CostFunction) -> Self {
        Self::new(kind, cost, SpectralConfig::default())
    }

    pub fn operator(&self, s: Complex64, w: Complex64) -> Result<OperatorMatrix> {
        build_operator(s, w, &self.cost, self.kind, &self.config.operator)
    }

    pub fn eigenpair(&self, s: Complex64, w: Complex64) -> Result<(OperatorMatrix, Eigenpair)> {
        let op = self.operator(s, w)?;
        let e = dominant_eigenpair(&op.matrix)?;
        Ok((op, e))
    }

    /// Dominant eigenvalue `lambda(s, w)`.
    pub fn lambda(&self, s: Complex64, w: Complex64) -> Result<Complex64> {
        Ok(self.eigenpair(s, w)?.1.lambda)
    }

    /// `Lambda(sigma) = log lambda(sigma, 0)`.
    pub fn pressure(&self, sigma: f64) -> Result<f64> {
        self.log_lambda(sigma, 0.0)
    }

    fn log_lambda(&self, sigma: f64, w: f64) -> Result<f64> {
        let l = self.lambda(Complex64::new(sigma, 0.0), Complex64::new(w, 0.0))?;
        if l.re <= 0.0 {
            return Err(Error::NoConvergence {
                iterations: 0,
                detail: format!("dominant eigenvalue {l} at real parameters is not positive"),
            });
        }
        Ok(l.re.ln())
    }

    /// Pressure on `sigmas` and its derivatives at `(1, 0)` by Richardson-extrapolated
    /// central differences with steps `1e-2` and `5e-3`.
    pub fn pressure_and_derivatives(&self, sigmas: &[f64]) -> Result<PressureReport> {
        if let Some(&s) = sigmas.iter().find(|&&s| s <= self.kind.sigma0()) {
            return Err(Error::Divergence(format!("sigma = {s} is not above 1/2")));
        }
        let values = sigmas.iter().map(|&s| Ok((s, self.pressure(s)?))).collect::<Result<Vec<_>>>()?;
        let h = 1e-2;
        let centre = self.pressure(1.0)?;
        let mut in_s = |s: f64| self.pressure(s);
        let d1 = richardson_first(&mut in_s, 1.0, h)?;
        let d2_s = richardson_second(&mut in_s, 1.0, h, centre)?;
        let d2_w = if self.cost.is_constant() {
            0.0
        } else {
            let mut in_w = |w: f64| self.log_lambda(1.0, w);
            richardson_second(&mut in_w, 0.0, h, centre)?
        };
        Ok(PressureReport { values, d1, d2_s, d2_w })
    }

    fn nu0(&self) -> f64 {
        self.config.nu0.unwrap_or_else(|| self.cost.nu0())
    }

    /// `d lambda / d s` at `(s, w)` by a central difference.
    fn lambda_s(&self, s: Complex64, w: Complex64) -> Result<Complex64> {
        let h = self.config.s_step;
        let up = self.lambda(s + h, w)?;
        let down = self.lambda(s - h, w)?;
        Ok((up - down) / (2.0 * h))
    }

    /// Root of `lambda(sigma, w) = 1` continued from `sigma(0) = 1`.
    pub fn solve_sigma(&self, w: Complex64) -> Result<Complex64> {
        if w.norm() > self.nu0() {
            return Err(invalid(format!(
                "|w| = {} exceeds the solver window {} for cost {}",
                w.norm(),
                self.nu0(),
                self.cost.name()
            )));
        }
        let steps = (w.norm() / 0.05).ceil().max(1.0) as usize;
        let mut sigma = Complex64::new(1.0, 0.0);
        let mut prev = sigma;
        for k in 1..=steps {
            let wk = w * (k as f64 / steps as f64);
            let guess = if k > 1 { 2.0 * sigma - prev } else { sigma };
            prev = sigma;
            sigma = self.newton(guess, wk)?;
        }
        Ok(sigma)
    }

    fn newton(&self, start: Complex64, w: Complex64) -> Result<Complex64> {
        let mut sigma = start;
        let mut last = f64::INFINITY;
        for it in 0..40 {
            let g = self.lambda(sigma, w)? - 1.0;
            if g.norm() <= 1e-13 {
                return Ok(sigma);
            }
            if it > 4 && g.norm() >= last {
                // no further progress at roundoff level
                if g.norm() <= 1e-10 {
                    return Ok(sigma);
                }
                break;
            }
            last = g.norm();
            let ls = self.lambda_s(sigma, w)?;
            sigma -= g / ls;
            if !sigma.re.is_finite() || sigma.re <= self.kind.sigma0() {
                break;
            }
        }
        Err(Error::NoConvergence {
            iterations: 40,
            detail: format!("Newton for sigma(w) at w = {w} did not converge; try a smaller |w|"),
        })
    }

    fn sigma_real(&self, w: f64) -> Result<f64> {
        Ok(self.solve_sigma(Complex64::new(w, 0.0))?.re)
    }

    /// `mu = 2 sigma'(0)` and `delta^2 = 2 sigma''(0)` from five-point differences
    /// of `sigma` along real `w`.
    pub fn moment_constants(&self) -> Result<MomentConstants> {
        let h = self.config.fd_step;
        let s0 = self.sigma_real(0.0)?;
        let (p1, m1) = (self.sigma_real(h)?, self.sigma_real(-h)?);
        let (p2, m2) = (self.sigma_real(2.0 * h)?, self.sigma_real(-2.0 * h)?);
        let sigma_prime = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
        let sigma_second = (-p2 + 16.0 * p1 - 30.0 * s0 + 16.0 * m1 - m2) / (12.0 * h * h);
        Ok(MomentConstants { sigma_prime, sigma_second, mu: 2.0 * sigma_prime, delta2: 2.0 * sigma_second })
    }

    pub fn report(&self) -> Result<SpectralReport> {
        let (op, e) = self.eigenpair(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))?;
        let pressure = self.pressure_and_derivatives(&[0.9, 0.95, 1.0, 1.05, 1.1])?;
        let mc = self.moment_constants()?;
        Ok(SpectralReport {
            kind: self.kind,
            cost: self.cost.name().to_string(),
            grid_order: op.dim(),
            m: self.config.operator.truncation,
            lambda: e.lambda.re,
            pressure,
            sigma_prime: mc.sigma_prime,
            sigma_second: mc.sigma_second,
            mu: mc.mu,
            delta2: mc.delta2,
            tail_bound: op.tail_bound,
        })
    }

    /// `E(w) = F_{sigma(w), w} R(w) [1] (0)` with `R(w) = -P / lambda'_s`.
    fn residue_coefficient(&self, sigma: Complex64, w: Complex64) -> Result<Complex64> {
        let (op, e) = self.eigenpair(sigma, w)?;
        let ls = self.lambda_s(sigma, w)?;
        let ones: Complex64 = e.left.iter().sum();
        let fr = op.final_functional(e.right.as_slice());
        // left is normalized against right
        Ok(-fr * ones / ls)
    }

    pub fn quasi_power(&self, tau: f64) -> Result<QuasiPower> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let e0 = self.residue_coefficient(one, zero)?;
        if tau == 0.0 {
            return Ok(QuasiPower { tau, sigma: one, e: e0, e0 });
        }
        let w = Complex64::new(0.0, tau);
        let sigma = self.solve_sigma(w)?;
        let e = self.residue_coefficient(sigma, w)?;
        Ok(QuasiPower { tau, sigma, e, e0 })
    }

    /// Quasi-power prediction of the characteristic function of the cost at level `N`.
    pub fn quasi_power_predict(&self, n: u64, tau: f64) -> Result<Complex64> {
        if tau == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        Ok(self.quasi_power(tau)?.predict(n))
    }

    /// Estimate of `||(I - H_{s, i tau})^(-1)||` in the norm `sup|f| + sup|f'|/|t|`
    /// (`t = Im s`, replaced by 1 when smaller), over a fixed family of test functions.
    pub fn resolvent_norm_probe(&self, s: Complex64, tau: f64) -> Result<ProbeOutcome> {
        let op = self.operator(s, Complex64::new(0.0, tau))?;
        let values = super::eigen::eigenvalues(&op.matrix)?;
        if values.iter().any(|z| (z - 1.0).norm() < 1e-8) {
            return Ok(ProbeOutcome::Singular);
        }
        let n = op.dim();
        let lu = (nalgebra::DMatrix::identity(n, n) - &op.matrix).lu();
        let deriv = op.grid.derivative_matrix().map(|x| Complex64::new(x, 0.0));
        let t = s.im.abs().max(1.0);
        let fine: Vec<f64> = (0..=400)
            .map(|k| op.grid.a + (op.grid.b - op.grid.a) * k as f64 / 400.0)
            .collect();
        let norm = |f: &nalgebra::DVector<Complex64>| -> f64 {
            let df = &deriv * f;
            let mut s0: f64 = 0.0;
            let mut s1: f64 = 0.0;
            for &x in &fine {
                s0 = s0.max(op.grid.interpolate(f.as_slice(), x).norm());
                s1 = s1.max(op.grid.interpolate(df.as_slice(), x).norm());
            }
            s0 + s1 / t
        };
        let mut best: f64 = 0.0;
        let (a, b) = (op.grid.a, op.grid.b);
        let mut tests: Vec<Box<dyn Fn(f64) -> Complex64>> = Vec::new();
        for omega in [0.0, 1.0, 2.0, 4.0, 8.0, 16.0] {
            tests.push(Box::new(move |x| Complex64::new(0.0, omega * x).exp()));
        }
        for k in 1..=8 {
            tests.push(Box::new(move |x| {
                let y = (2.0 * (x - a) / (b - a) - 1.0).clamp(-1.0, 1.0);
                Complex64::new((k as f64 * y.acos()).cos(), 0.0)
            }));
        }
        for f in &tests {
            let fv = op.sample(f);
            let g = lu.solve(&fv).ok_or_else(|| Error::Singular("I - H is singular".into()))?;
            best = best.max(norm(&g) / norm(&fv));
        }
        Ok(ProbeOutcome::Finite(best))
    }
}
