//! Deterministic report serialization.
//!
//! CSV files are assembled by hand so the byte stream is a pure function of
//! the computed values: fixed column order, shortest round-trip float
//! formatting, `\n` line endings, and quoting only for the free-text input
//! column. JSON reports use struct-ordered keys, so identical runs produce
//! identical bytes there too.

use std::path::{Path, PathBuf};

use fraclab::VerificationReport;
use serde::Serialize;

use crate::config::CliError;

/// Shortest round-trip formatting; non-finite values spelled explicitly.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{v}")
    }
}

/// Quote a free-text CSV field (always quoted; embedded quotes doubled).
pub fn quote(field: &str) -> String {
    format!("\"{}\"", field.replace('"', "\"\""))
}

/// Flatten verification reports into one combined CSV: one row per case at
/// each resolution, in suite order.
pub fn cases_csv(reports: &[&VerificationReport]) -> String {
    let mut out = String::from("suite,resolution,case,inputs,lhs,rhs,ratio,flagged,degenerate\n");
    for report in reports {
        for (resolution, cases) in [("coarse", &report.cases), ("fine", &report.cases_fine)] {
            for (i, case) in cases.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    report.suite,
                    resolution,
                    i,
                    quote(&case.inputs),
                    fmt_f64(case.lhs),
                    fmt_f64(case.rhs),
                    fmt_f64(case.ratio),
                    case.flagged,
                    case.degenerate
                ));
            }
        }
    }
    out
}

/// One row per grid node, in node-index (lexicographic coordinate) order.
/// `columns` supplies a header name and sampled values per value column.
pub fn nodes_csv(domain: &fraclab::GridDomain, columns: &[(String, &[f64])]) -> String {
    let n = domain.dim();
    let mut header: Vec<String> = (0..n).map(|a| format!("x{a}")).collect();
    for (name, _) in columns {
        header.push(name.clone());
    }
    let mut out = header.join(",");
    out.push('\n');
    for idx in 0..domain.node_count() {
        let node = domain.node(idx);
        let mut row: Vec<String> = (0..n).map(|a| fmt_f64(node[a])).collect();
        for (_, values) in columns {
            row.push(fmt_f64(values[idx]));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("serializing {name}: {e}")))?;
    text.push('\n');
    write_text(dir, name, &text)
}
