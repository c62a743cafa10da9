//! CSV and JSON writers with a fixed numeric format.

use std::fmt::Write as _;
use std::path::Path;

use crate::scenario::{BackendSpec, Scenario};
use crate::{CliError, VERSION};

/// 17 significant digits in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comment line recording the run parameters.
pub fn provenance(command: &str, s: &Scenario) -> String {
    let backend = match s.backend {
        BackendSpec::Spectral => "spectral",
        BackendSpec::Bie => "bie",
    };
    format!(
        "# mssolve {VERSION} command={command} K={} dt={} backend={backend} seed={}",
        s.k,
        num(s.dt),
        s.seed
    )
}

pub fn write_csv(path: &Path, comment: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut text = String::new();
    writeln!(text, "{comment}").unwrap();
    writeln!(text, "{}", columns.join(",")).unwrap();
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let cells: Vec<String> = row.iter().map(|&x| num(x)).collect();
        writeln!(text, "{}", cells.join(",")).unwrap();
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// NaN and infinities become null.
pub fn json_num(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, serde_json::Value::Number)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(-0.1), "-1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn non_finite_json() {
        assert!(json_num(f64::NAN).is_null());
        assert_eq!(json_num(0.5), serde_json::json!(0.5));
    }
}
