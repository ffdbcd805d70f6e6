use eucdyn::numeric::round_sig15;
use num_complex::Complex64;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::Path;

/// Rounds every float in a JSON tree to 15 significant digits.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = json!(round_sig15(x));
            }
        }
        Value::Array(xs) => xs.iter_mut().for_each(round_floats),
        Value::Object(m) => m.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// One CSV cell.
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

fn fmt_real(x: f64) -> String {
    let r = round_sig15(x);
    if r == r.trunc() && r.abs() < 1e15 {
        format!("{r:.1}")
    } else {
        format!("{r}")
    }
}

pub fn render_json(mut v: Value) -> String {
    round_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

pub fn render_csv(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Int(v) => v.to_string(),
                Cell::Real(v) => fmt_real(*v),
                Cell::Text(t) => t.clone(),
            })
            .collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

/// Files produced by one command.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
    pub summary: Option<String>,
}

impl Outputs {
    pub fn json(&mut self, name: &str, v: Value) {
        let text = render_json(v);
        if self.summary.is_none() {
            self.summary = Some(text.clone());
        }
        self.files.push((name.to_string(), text));
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<Cell>]) {
        self.files.push((name.to_string(), render_csv(header, rows)));
    }

    pub fn write_all(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, text) in &self.files {
            std::fs::write(dir.join(name), text)?;
        }
        Ok(())
    }
}
