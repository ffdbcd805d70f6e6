use eucdyn::sample_space::default_threads;
use eucdyn::{AlgorithmKind, CostFunction};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Keys accepted in a config file and as `--key value` flags.
pub const KEYS: &[&str] = &[
    "algo", "cost", "N", "grid", "mode", "samples", "seed", "grid_order", "M", "tail_order", "fd_step", "out",
    "threads", "shards", "u", "v", "x", "J", "tau", "taus", "s", "alpha0", "n_max", "n_neumann", "tol", "domain",
];

#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

/// Reads flat `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key = value", k + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(usage(format!("config line {}: unknown key `{key}`", k + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// Validated parameters of one run, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub algo: AlgorithmKind,
    pub cost: String,
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub grid: Vec<u64>,
    pub mode: String,
    pub samples: Option<u64>,
    pub seed: u64,
    pub grid_order: usize,
    #[serde(rename = "M")]
    pub truncation: u64,
    pub tail_order: usize,
    pub fd_step: f64,
    pub threads: usize,
    pub shards: usize,
    pub u: Option<u64>,
    pub v: Option<u64>,
    pub x: Vec<f64>,
    #[serde(rename = "J")]
    pub j: (f64, f64),
    pub tau: Option<f64>,
    pub taus: Vec<f64>,
    pub s: Option<f64>,
    pub alpha0: f64,
    pub n_max: u64,
    pub n_neumann: usize,
    pub tol: Option<f64>,
    pub domain: String,
    #[serde(skip)]
    pub cost_fn: CostFunction,
    #[serde(skip)]
    pub out: PathBuf,
}

/// Integer that may be written as `100000`, `1e5` or `100_000`.
pub fn parse_count(key: &str, text: &str) -> Result<u64, UsageError> {
    let t = text.replace('_', "");
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    match t.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 => Ok(v as u64),
        _ => Err(usage(format!("--{key}: expected a nonnegative integer, got `{text}`"))),
    }
}

fn parse_real(key: &str, text: &str) -> Result<f64, UsageError> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| usage(format!("--{key}: expected a number, got `{text}`")))
}

fn parse_list<T>(key: &str, text: &str, item: impl Fn(&str, &str) -> Result<T, UsageError>) -> Result<Vec<T>, UsageError> {
    text.split(',').filter(|p| !p.trim().is_empty()).map(|p| item(key, p.trim())).collect()
}

fn parse_cost(spec: &str) -> Result<CostFunction, UsageError> {
    if let Some(c) = CostFunction::builtin(spec) {
        return Ok(c);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| usage(format!("--cost `{spec}` is neither a built-in cost nor a readable table: {e}")))?;
    CostFunction::parse_table(&text).map_err(|e| usage(e.to_string()))
}

fn parse_algo(text: &str) -> Result<AlgorithmKind, UsageError> {
    AlgorithmKind::from_tag(text).ok_or_else(|| usage(format!("--algo: expected g, k or o, got `{text}`")))
}

impl RunConfig {
    pub fn from_settings(command: &str, set: &BTreeMap<String, String>) -> Result<Self, UsageError> {
        if let Some(k) = set.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(usage(format!("unknown key `{k}`")));
        }
        let get = |k: &str| set.get(k).map(String::as_str);
        let count = |k: &str| get(k).map(|t| parse_count(k, t)).transpose();
        let real = |k: &str| get(k).map(|t| parse_real(k, t)).transpose();

        let algo = parse_algo(get("algo").unwrap_or("g"))?;
        let cost = get("cost").unwrap_or("unit").to_string();
        let cost_fn = parse_cost(&cost)?;
        let domain = get("domain").unwrap_or("restricted").to_string();
        match domain.as_str() {
            "restricted" => {}
            "unrestricted" if algo == AlgorithmKind::Centred => {
                return Err(usage("the centred division needs 2u <= v; domain=unrestricted is not available for K"));
            }
            "unrestricted" => {}
            other => return Err(usage(format!("--domain: expected restricted or unrestricted, got `{other}`"))),
        }
        let mode = get("mode").unwrap_or("exhaustive").to_string();
        let samples = count("samples")?;
        match mode.as_str() {
            "exhaustive" => {
                if samples.is_some() {
                    return Err(usage("--samples needs --mode mc"));
                }
            }
            "mc" => {
                if !samples.is_some_and(|s| s > 0) {
                    return Err(usage("--mode mc needs a positive --samples"));
                }
            }
            other => return Err(usage(format!("--mode: expected exhaustive or mc, got `{other}`"))),
        }
        let grid = get("grid").map(|t| parse_list("grid", t, parse_count)).transpose()?.unwrap_or_default();
        let x = get("x").map(|t| parse_list("x", t, parse_real)).transpose()?.unwrap_or_else(|| vec![0.0, 1.0]);
        let j = match get("J") {
            Some(t) => {
                let v = parse_list("J", t, parse_real)?;
                if v.len() != 2 || v[1] <= v[0] {
                    return Err(usage(format!("--J: expected `a,b` with a < b, got `{t}`")));
                }
                (v[0], v[1])
            }
            None => (-0.5, 0.5),
        };
        let taus = get("taus").map(|t| parse_list("taus", t, parse_real)).transpose()?.unwrap_or_else(|| vec![1.0]);
        let threads = match count("threads")? {
            Some(0) => return Err(usage("--threads must be positive")),
            Some(t) => t as usize,
            None => default_threads(),
        };
        let shards = count("shards")?.unwrap_or(64) as usize;
        if shards == 0 {
            return Err(usage("--shards must be positive"));
        }
        let grid_order = count("grid_order")?.unwrap_or(64) as usize;
        if grid_order < 4 {
            return Err(usage("--grid_order must be at least 4"));
        }
        let alpha0 = real("alpha0")?.unwrap_or(0.25);
        if !(alpha0 > 0.0 && alpha0 < 0.5) {
            return Err(usage("--alpha0 must lie in (0, 1/2)"));
        }
        Ok(RunConfig {
            command: command.to_string(),
            algo,
            cost,
            n: count("N")?,
            grid,
            mode,
            samples,
            seed: count("seed")?.unwrap_or(0),
            grid_order,
            truncation: count("M")?.unwrap_or(10_000),
            tail_order: count("tail_order")?.unwrap_or(3) as usize,
            fd_step: real("fd_step")?.unwrap_or(1e-3),
            threads,
            shards,
            u: count("u")?,
            v: count("v")?,
            x,
            j,
            tau: real("tau")?,
            taus,
            s: real("s")?,
            alpha0,
            n_max: count("n_max")?.unwrap_or(20_000),
            n_neumann: count("n_neumann")?.unwrap_or(300) as usize,
            tol: real("tol")?,
            domain,
            cost_fn,
            out: PathBuf::from(get("out").unwrap_or("eucdyn-out")),
        })
    }

    /// `N` values of the run: `--grid` if given, else `--N`.
    pub fn levels(&self) -> Result<Vec<u64>, UsageError> {
        let levels = if !self.grid.is_empty() {
            self.grid.clone()
        } else if let Some(n) = self.n {
            vec![n]
        } else {
            return Err(usage(format!("{} needs --N or --grid", self.command)));
        };
        if levels.contains(&0) {
            return Err(usage("N must be positive"));
        }
        Ok(levels)
    }

    pub fn mode(&self) -> eucdyn::sample_space::Mode {
        match self.samples {
            Some(samples) if self.mode == "mc" => eucdyn::sample_space::Mode::MonteCarlo { samples, seed: self.seed },
            _ => eucdyn::sample_space::Mode::Exhaustive,
        }
    }

    pub fn sweep(&self) -> eucdyn::sample_space::SweepOptions {
        eucdyn::sample_space::SweepOptions { shards: self.shards, threads: self.threads }
    }

    pub fn spectral(&self) -> eucdyn::spectral::SpectralConfig {
        let mut cfg = eucdyn::spectral::SpectralConfig::default();
        cfg.operator.grid_order = self.grid_order;
        cfg.operator.truncation = self.truncation;
        cfg.operator.tail_order = self.tail_order;
        cfg.fd_step = self.fd_step;
        cfg
    }
}
