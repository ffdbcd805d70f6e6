use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn eucdyn(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eucdyn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn expand_lists_digits() {
    let dir = tempfile::tempdir().unwrap();
    let o = eucdyn(&["expand", "--algo", "g", "--u", "8", "--v", "13"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&dir.path().join("expand.json"));
    let ms: Vec<u64> = v["digits"].as_array().unwrap().iter().map(|d| d["m"].as_u64().unwrap()).collect();
    assert_eq!(ms, vec![1, 1, 1, 1, 2]);
    assert_eq!(v["depth"], 5);
    let csv = std::fs::read_to_string(dir.path().join("digits.csv")).unwrap();
    assert!(csv.starts_with("step,m,eps,r\n1,1,1,5\n"));
}

#[test]
fn missing_argument_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = eucdyn(&["expand", "--algo", "g", "--u", "8"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--v"));
    let o = eucdyn(&["stats", "--algo", "k", "--domain", "unrestricted", "--N", "10"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = eucdyn(&["stats", "--algo", "q", "--N", "10"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = eucdyn(&["stats", "--N", "10", "--mode", "mc"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stats_schema_and_centred_domain() {
    let dir = tempfile::tempdir().unwrap();
    let o = eucdyn(&["stats", "--algo", "k", "--N", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("stats.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,count,mean,variance,mode,samples,seed"));
    assert!(lines.next().unwrap().starts_with("4,3,"));
    let hist = std::fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    assert!(hist.starts_with("bin_lo,bin_hi,count\n"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "algo = o\nN = 50  # overridden\ncost = unit\n").unwrap();
    let o = eucdyn(&["stats", "--config", cfg.to_str().unwrap(), "--N", "20"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&dir.path().join("stats.json"));
    assert_eq!(v["config"]["algo"], "O");
    assert_eq!(v["config"]["N"], 20);
    std::fs::write(&cfg, "algo = o\nbogus = 1\n").unwrap();
    let o = eucdyn(&["stats", "--config", cfg.to_str().unwrap(), "--N", "20"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn moments_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = eucdyn(&["moments", "--algo", "g", "--cost", "unit"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&dir.path().join("moments.json"));
    assert!((v["mu"].as_f64().unwrap() - 0.8428).abs() < 1e-4);
    assert!((v["delta2"].as_f64().unwrap() - 0.516).abs() < 1e-3);
}

#[test]
fn spectral_report_keys() {
    let dir = tempfile::tempdir().unwrap();
    let o = eucdyn(&["spectral", "--algo", "o"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&dir.path().join("spectral.json"));
    for key in ["kind", "cost", "grid_order", "M", "lambda", "pressure", "sigma_prime", "sigma_second", "mu", "delta2", "tail_bound"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert!((v["lambda"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn identity_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = eucdyn(&["verify", "identity", "--algo", "g", "--s", "1.5"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&dir.path().join("identity.json"));
    assert!(v["diff"].as_f64().unwrap() <= 1e-3);
    for key in ["s", "tau", "lhs", "rhs", "diff", "lhs_tail", "rhs_tail"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn tolerance_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = eucdyn(&["verify", "clt", "--grid", "100,1000", "--tol", "1e-9"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let v = read_json(&dir.path().join("clt.json"));
    assert_eq!(v["pass"], false);
}

#[test]
fn unwritable_output_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = eucdyn(&["expand", "--u", "3", "--v", "7"], &blocker.join("sub"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn llt_schema_and_reproducible_monte_carlo() {
    let runs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    let args = [
        "verify", "llt", "--algo", "g", "--cost", "logq", "--N", "1e6", "--mode", "mc", "--samples", "20000",
        "--seed", "11", "--x", "0,1", "--J", "-0.5,0.5",
    ];
    for d in &runs {
        let o = eucdyn(&args, d.path());
        assert!(matches!(o.status.code(), Some(0) | Some(1)));
    }
    for name in ["llt.json", "llt.csv"] {
        let a = std::fs::read(runs[0].path().join(name)).unwrap();
        let b = std::fs::read(runs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let v = read_json(&runs[0].path().join("llt.json"));
    let r = &v["reports"][0];
    let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["N", "x", "J", "lhs", "rhs", "abs_err", "rel_err", "ci_halfwidth"]);
    assert!(r["ci_halfwidth"].as_f64().unwrap() > 0.0);
    assert_eq!(v["config"]["seed"], 11);
}

#[test]
fn exhaustive_stats_ignore_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    eucdyn(&["stats", "--cost", "logq", "--grid", "300,900", "--threads", "1"], a.path());
    eucdyn(&["stats", "--cost", "logq", "--grid", "300,900", "--threads", "3"], b.path());
    let x = std::fs::read_to_string(a.path().join("stats.csv")).unwrap();
    let y = std::fs::read_to_string(b.path().join("stats.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn model_distance_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = eucdyn(&["verify", "model-distance", "--N", "1000", "--alpha0", "0.25"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&dir.path().join("model_distance.json"));
    assert!(v["distance"].as_f64().unwrap() <= v["bound"].as_f64().unwrap());
}

#[test]
fn dirichlet_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = eucdyn(&["dirichlet", "--n_max", "10", "--s", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("dirichlet.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,re,im"));
    assert_eq!(lines.nth(4), Some("5,4.0,0.0"));
    let v = read_json(&dir.path().join("dirichlet.json"));
    assert_eq!(v["phi"][0], 32.0);
}
