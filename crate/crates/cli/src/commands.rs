use crate::config::{RunConfig, UsageError};
use crate::report::{complex, Cell, Outputs};
use eucdyn::cost_stats::{
    clt_table, empirical_char_fn, growth_regression, llt_estimates, summarize, CostSummary, HalfOpen, Source,
};
use eucdyn::dirichlet::{coefficients, identity_check, partial_sums, truncated_s};
use eucdyn::euclid::{expand, total_cost};
use eucdyn::sample_space::{model_distance, Mode, SampleSpace};
use eucdyn::spectral::SpectralModel;
use eucdyn::Error;
use num_complex::Complex64;
use serde_json::{json, Value};

pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e.0)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Invalid(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

/// Result of a command: its files and whether every declared tolerance held.
pub struct Run {
    pub outputs: Outputs,
    pub passed: bool,
}

fn config_value(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("serializable config")
}

fn mode_cells(mode: Mode) -> (String, String, String) {
    match mode {
        Mode::Exhaustive => ("exhaustive".into(), String::new(), String::new()),
        Mode::MonteCarlo { samples, seed } => ("mc".into(), samples.to_string(), seed.to_string()),
    }
}

fn source(cfg: &RunConfig, n: u64) -> Source {
    let space = match cfg.mode() {
        Mode::Exhaustive => SampleSpace::exhaustive(n, cfg.algo),
        Mode::MonteCarlo { samples, seed } => SampleSpace::monte_carlo(n, cfg.algo, samples, seed),
    };
    Source::Space(space)
}

fn model(cfg: &RunConfig) -> SpectralModel {
    SpectralModel::new(cfg.algo, cfg.cost_fn.clone(), cfg.spectral())
}

fn spectral_constants(cfg: &RunConfig) -> Result<(f64, f64), CliError> {
    let mc = model(cfg).moment_constants()?;
    if !(mc.delta2 > 0.0) {
        return Err(CliError::Usage(format!(
            "cost {} has no Gaussian fluctuations (delta^2 = {})",
            cfg.cost, mc.delta2
        )));
    }
    Ok((mc.mu, mc.delta2.sqrt()))
}

pub fn execute(cfg: &RunConfig, verify: bool) -> Result<Run, CliError> {
    let mut out = Outputs::default();
    let passed = match (verify, cfg.command.as_str()) {
        (false, "expand") => run_expand(cfg, &mut out)?,
        (false, "stats") => run_stats(cfg, &mut out)?,
        (false, "spectral") => run_spectral(cfg, &mut out)?,
        (false, "moments") => run_moments(cfg, &mut out)?,
        (false, "dirichlet") => run_dirichlet(cfg, &mut out)?,
        (true, "clt") => verify_clt(cfg, &mut out)?,
        (true, "llt") => verify_llt(cfg, &mut out)?,
        (true, "quasipower") => verify_quasipower(cfg, &mut out)?,
        (true, "decay") => verify_decay(cfg, &mut out)?,
        (true, "identity") => verify_identity(cfg, &mut out)?,
        (true, "model-distance") => verify_model_distance(cfg, &mut out)?,
        (_, other) => return Err(CliError::Usage(format!("unknown command `{other}`"))),
    };
    Ok(Run { outputs: out, passed })
}

fn run_expand(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, CliError> {
    let (Some(u), Some(v)) = (cfg.u, cfg.v) else {
        return Err(CliError::Usage("expand needs --u and --v".into()));
    };
    let e = expand(u, v, cfg.algo)?;
    let digits: Vec<Value> = e.digits.iter().map(|q| json!({"m": q.m, "eps": q.eps.as_i64()})).collect();
    out.json(
        "expand.json",
        json!({
            "config": config_value(cfg),
            "u": u,
            "v": v,
            "depth": e.depth(),
            "digits": digits,
            "remainders": e.remainders,
            "total_cost": total_cost(&e, &cfg.cost_fn),
        }),
    );
    let rows: Vec<Vec<Cell>> = e
        .digits
        .iter()
        .zip(&e.remainders)
        .enumerate()
        .map(|(i, (q, &r))| vec![((i + 1) as u64).into(), q.m.into(), q.eps.as_i64().to_string().into(), r.into()])
        .collect();
    out.csv("digits.csv", &["step", "m", "eps", "r"], &rows);
    Ok(true)
}

fn summaries(cfg: &RunConfig) -> Result<Vec<CostSummary>, CliError> {
    let opts = cfg.sweep();
    cfg.levels()?
        .iter()
        .map(|&n| Ok(summarize(&source(cfg, n), &cfg.cost_fn, &opts)?))
        .collect()
}

fn run_stats(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, CliError> {
    let sums = summaries(cfg)?;
    let (mode, samples, seed) = mode_cells(cfg.mode());
    let rows: Vec<Vec<Cell>> = sums
        .iter()
        .map(|s| {
            vec![
                s.n.into(),
                s.count.into(),
                s.mean.into(),
                s.variance.into(),
                mode.clone().into(),
                samples.clone().into(),
                seed.clone().into(),
            ]
        })
        .collect();
    let growth = if sums.len() >= 3 { Some(growth_regression(&sums)?) } else { None };
    let last = sums.last().expect("at least one level");
    out.json(
        "stats.json",
        json!({
            "config": config_value(cfg),
            "rows": sums.iter().map(|s| json!({"N": s.n, "count": s.count, "mean": s.mean, "variance": s.variance})).collect::<Vec<_>>(),
            "growth": growth,
        }),
    );
    out.csv("stats.csv", &["N", "count", "mean", "variance", "mode", "samples", "seed"], &rows);
    let hist: Vec<Vec<Cell>> =
        last.histogram.rows().into_iter().map(|(lo, hi, c)| vec![lo.into(), hi.into(), c.into()]).collect();
    out.csv("histogram.csv", &["bin_lo", "bin_hi", "count"], &hist);
    Ok(true)
}

fn run_spectral(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, CliError> {
    let report = model(cfg).report()?;
    let mut v = serde_json::to_value(&report).expect("serializable");
    let rows: Vec<Vec<Cell>> = report.pressure.values.iter().map(|&(s, p)| vec![s.into(), p.into()]).collect();
    if let Value::Object(m) = &mut v {
        m.insert("config".into(), config_value(cfg));
    }
    out.json("spectral.json", v);
    out.csv("pressure.csv", &["sigma", "pressure"], &rows);
    Ok(true)
}

fn run_moments(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, CliError> {
    let mc = model(cfg).moment_constants()?;
    out.json(
        "moments.json",
        json!({
            "config": config_value(cfg),
            "mu": mc.mu,
            "delta2": mc.delta2,
            "sigma_prime": mc.sigma_prime,
            "sigma_second": mc.sigma_second,
        }),
    );
    Ok(true)
}

fn run_dirichlet(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, CliError> {
    let tau = cfg.tau.unwrap_or(0.0);
    let data = coefficients(cfg.n_max, tau, &cfg.cost_fn, cfg.algo, &cfg.sweep())?;
    let sums = partial_sums(&data);
    let series = match cfg.s {
        Some(s) => {
            let t = truncated_s(Complex64::new(s, 0.0), &data)?;
            json!({"s": s, "value": complex(t.value), "tail_bound": t.tail_bound})
        }
        None => Value::Null,
    };
    let n = cfg.n_max as usize;
    out.json(
        "dirichlet.json",
        json!({
            "config": config_value(cfg),
            "n_max": cfg.n_max,
            "tau": tau,
            "phi": complex(sums.phi[n]),
            "psi": complex(sums.psi[n]),
            "S": series,
        }),
    );
    let rows: Vec<Vec<Cell>> = (1..=n)
        .map(|k| vec![(k as u64).into(), data.coefficients[k].re.into(), data.coefficients[k].im.into()])
        .collect();
    out.csv("dirichlet.csv", &["n", "re", "im"], &rows);
    let rows: Vec<Vec<Cell>> = (1..=n)
        .map(|k| {
            vec![
                (k as u64).into(),
                sums.phi[k].re.into(),
                sums.phi[k].im.into(),
                sums.psi[k].re.into(),
                sums.psi[k].im.into(),
            ]
        })
        .collect();
    out.csv("partial_sums.csv", &["N", "phi_re", "phi_im", "psi_re", "psi_im"], &rows);
    Ok(true)
}

fn verify_clt(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, CliError> {
    let levels = cfg.levels()?;
    let (mu, delta) = spectral_constants(cfg)?;
    let rows = clt_table(&levels, &cfg.cost_fn, cfg.algo, mu, delta, cfg.mode(), &cfg.sweep())?;
    let tol = cfg.tol.unwrap_or(0.05);
    let decreasing = rows.windows(2).all(|w| w[1].ks < w[0].ks);
    let last_ok = rows.last().is_some_and(|r| r.ks <= tol);
    let passed = decreasing && last_ok;
    out.json(
        "clt.json",
        json!({
            "config": config_value(cfg),
            "mu": mu,
            "delta": delta,
            "rows": rows.iter().map(|r| json!({"N": r.n, "ks": r.ks, "count": r.count})).collect::<Vec<_>>(),
            "tol": tol,
            "decreasing": decreasing,
            "pass": passed,
        }),
    );
    let csv: Vec<Vec<Cell>> = rows.iter().map(|r| vec![r.n.into(), r.ks.into(), r.count.into()]).collect();
    out.csv("clt.csv", &["N", "ks", "count"], &csv);
    Ok(passed)
}

fn verify_llt(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, CliError> {
    let levels = cfg.levels()?;
    let (mu, delta) = spectral_constants(cfg)?;
    let j = HalfOpen::new(cfg.j.0, cfg.j.1)?;
    let tol = cfg.tol.unwrap_or(0.25);
    let mut all = Vec::new();
    for &n in &levels {
        all.push(llt_estimates(n, &cfg.x, j, &cfg.cost_fn, cfg.algo, mu, delta, cfg.mode(), &cfg.sweep())?);
    }
    let last = all.last().expect("at least one level");
    let mut passed = last.iter().all(|r| r.rel_err <= tol);
    for k in 0..cfg.x.len() {
        passed &= all.windows(2).all(|w| w[1][k].rel_err < w[0][k].rel_err);
    }
    let reports: Vec<Value> = all
        .iter()
        .flatten()
        .map(|r| {
            json!({
                "N": r.n,
                "x": r.x,
                "J": [r.j.a, r.j.b],
                "lhs": r.lhs,
                "rhs": r.rhs,
                "abs_err": r.abs_err,
                "rel_err": r.rel_err,
                "ci_halfwidth": r.ci_halfwidth,
            })
        })
        .collect();
    out.json(
        "llt.json",
        json!({"config": config_value(cfg), "mu": mu, "delta": delta, "tol": tol, "reports": reports, "pass": passed}),
    );
    let rows: Vec<Vec<Cell>> = all
        .iter()
        .flatten()
        .map(|r| {
            vec![
                r.n.into(),
                r.x.into(),
                r.j.a.into(),
                r.j.b.into(),
                r.lhs.into(),
                r.rhs.into(),
                r.abs_err.into(),
                r.rel_err.into(),
                r.ci_halfwidth.into(),
            ]
        })
        .collect();
    out.csv("llt.csv", &["N", "x", "J_lo", "J_hi", "lhs", "rhs", "abs_err", "rel_err", "ci_halfwidth"], &rows);
    Ok(passed)
}

fn verify_quasipower(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, CliError> {
    let n = cfg.n.unwrap_or(100_000);
    let tau = cfg.tau.unwrap_or(0.05);
    let tol = cfg.tol.unwrap_or(0.1);
    let q = model(cfg).quasi_power(tau)?;
    let prediction = if tau == 0.0 { Complex64::new(1.0, 0.0) } else { q.predict(n) };
    let space = SampleSpace::exhaustive(n, cfg.algo);
    let empirical = empirical_char_fn(&Source::Space(space), &cfg.cost_fn, tau, &cfg.sweep())?;
    let rel_err = (prediction - empirical).norm() / empirical.norm();
    let passed = rel_err <= tol;
    out.json(
        "quasipower.json",
        json!({
            "config": config_value(cfg),
            "N": n,
            "tau": tau,
            "sigma": complex(q.sigma),
            "E": complex(q.e),
            "E0": complex(q.e0),
            "prediction": complex(prediction),
            "empirical": complex(empirical),
            "rel_err": rel_err,
            "tol": tol,
            "pass": passed,
        }),
    );
    Ok(passed)
}

fn verify_decay(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, CliError> {
    let levels = cfg.levels()?;
    let fits = eucdyn::cost_stats::charfn_decay(&cfg.taus, &levels, &cfg.cost_fn, cfg.algo, cfg.alpha0, &cfg.sweep())?;
    let min_gamma = cfg.tol.unwrap_or(0.0);
    let passed = fits.iter().all(|f| f.warning.is_none() && f.gamma > min_gamma);
    let mut rows = Vec::new();
    for f in &fits {
        for &(n, m) in &f.moduli {
            rows.push(vec![Cell::from(n), f.tau.into(), m.into()]);
        }
    }
    out.json(
        "decay.json",
        json!({
            "config": config_value(cfg),
            "fits": fits.iter().map(|f| json!({
                "tau": f.tau,
                "gamma": f.gamma,
                "intercept": f.intercept,
                "r_squared": f.r_squared,
                "residual": f.residual,
                "warning": f.warning,
            })).collect::<Vec<_>>(),
            "pass": passed,
        }),
    );
    out.csv("decay.csv", &["N", "tau", "modulus"], &rows);
    Ok(passed)
}

fn verify_identity(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, CliError> {
    let s = cfg.s.unwrap_or(1.5);
    let tau = cfg.tau.unwrap_or(0.0);
    let r = identity_check(s, tau, &cfg.cost_fn, cfg.algo, cfg.n_max, cfg.n_neumann, &cfg.spectral(), &cfg.sweep())?;
    let tol = cfg.tol.unwrap_or(1e-3).max(r.lhs_tail + r.rhs_tail);
    let passed = r.diff <= tol;
    out.json(
        "identity.json",
        json!({
            "config": config_value(cfg),
            "s": r.s,
            "tau": r.tau,
            "lhs": complex(r.lhs),
            "rhs": complex(r.rhs),
            "diff": r.diff,
            "lhs_tail": r.lhs_tail,
            "rhs_tail": r.rhs_tail,
            "tol": tol,
            "pass": passed,
        }),
    );
    let rows: Vec<Vec<Cell>> =
        r.iterates.iter().enumerate().map(|(k, z)| vec![(k as u64).into(), z.re.into(), z.im.into()]).collect();
    out.csv("neumann.csv", &["k", "re", "im"], &rows);
    Ok(passed)
}

fn verify_model_distance(cfg: &RunConfig, out: &mut Outputs) -> Result<bool, CliError> {
    let n = cfg.n.unwrap_or(1000);
    let factor = cfg.tol.unwrap_or(3.0);
    let d = model_distance(n, cfg.alpha0, cfg.algo, &cfg.cost_fn)?;
    let bound = factor * (n as f64).powf(-cfg.alpha0);
    let passed = d <= bound;
    out.json(
        "model_distance.json",
        json!({"config": config_value(cfg), "N": n, "alpha0": cfg.alpha0, "distance": d, "bound": bound, "pass": passed}),
    );
    Ok(passed)
}
