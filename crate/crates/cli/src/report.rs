//! JSON and CSV output helpers.

use std::io::Write;
use std::path::Path;

use plc_core::State;
use serde_json::{json, Value};

use crate::CliError;

pub const SIG_DIGITS: usize = 6;

/// Rounds to `digits` significant digits.
pub fn round_sig(v: f64, digits: usize) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    if !v.is_finite() {
        return v;
    }
    format!("{:.*e}", digits - 1, v).parse().unwrap_or(v)
}

/// Rounds every non-integer number in `v`.
pub fn round_json(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if !n.is_i64() && !n.is_u64() => {
            if let Some(f) = n.as_f64() {
                *v = json!(round_sig(f, digits));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|x| round_json(x, digits)),
        Value::Object(map) => map.values_mut().for_each(|x| round_json(x, digits)),
        _ => {}
    }
}

fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e7).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// `value ± sigma` with the report precision.
pub fn pm(value: f64, sigma: f64, full: bool) -> String {
    if full {
        format!("{} ± {}", num(value), num(sigma))
    } else {
        format!(
            "{} ± {}",
            num(round_sig(value, SIG_DIGITS)),
            num(round_sig(sigma, SIG_DIGITS))
        )
    }
}

pub fn state(s: &State) -> Value {
    json!({ "x": s.x, "y": s.y })
}

/// Writes pretty JSON with sorted keys to `path`, or stdout.
pub fn emit_json(mut v: Value, path: Option<&Path>, full_precision: bool) -> Result<(), CliError> {
    if !full_precision {
        round_json(&mut v, SIG_DIGITS);
    }
    let mut text = serde_json::to_string_pretty(&v).map_err(|e| CliError::input(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| write_err(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::input(format!("cannot write output: {e}"))),
    }
}

pub fn write_err(p: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::input(format!("cannot write {}: {e}", p.display()))
}

/// Writes rows of displayable fields as CSV.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| write_err(path, e))?;
    w.write_record(header).map_err(|e| write_err(path, e))?;
    for r in rows {
        let r: Vec<String> = r.into_iter().collect();
        w.write_record(&r).map_err(|e| write_err(path, e))?;
    }
    w.flush().map_err(|e| write_err(path, e))
}
