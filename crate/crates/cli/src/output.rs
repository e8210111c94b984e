use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde_json::Value;

use crate::CliError;

/// 17 significant digits, `inf`/`-inf` for infinities.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// JSON number, or the string `inf` where JSON has no number.
pub fn json_num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or_else(|| Value::String(fmt_f64(v)), Value::Number)
}

pub fn json_opt(v: Option<f64>) -> Value {
    v.map_or(Value::Null, json_num)
}

pub fn writer(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_csv(path: Option<&Path>, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer(path)?);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: Option<&Path>, value: &Value) -> Result<(), CliError> {
    let mut w = writer(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
