//! CSV writers. Floats use the shortest representation that parses back to
//! the same value, and nothing time-dependent is written, so reruns are
//! byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use ghostfringe::gate::TruthTable;
use ghostfringe::CorrelationPattern;

use crate::config::num;

pub fn preamble(meta: &[(String, String)]) -> String {
    meta.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
}

pub fn pattern_csv(meta: &[(String, String)], pattern: &CorrelationPattern) -> String {
    let mut out = preamble(meta);
    let stderr = pattern.stderr.as_deref();
    out.push_str(if stderr.is_some() {
        "x_C,x_T,value,stderr\n"
    } else {
        "x_C,x_T,value\n"
    });
    for (k, (p, v)) in pattern.grid.iter().zip(&pattern.values).enumerate() {
        let _ = write!(out, "{},{},{}", num(p.x_c), num(p.x_t), num(*v));
        if let Some(s) = stderr {
            let _ = write!(out, ",{}", num(s[k]));
        }
        out.push('\n');
    }
    out
}

/// One row per pairwise comparison; `max_sigma_dev` is empty when neither
/// side carries error bars.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub reference: String,
    pub estimate: String,
    pub nrmse: f64,
    pub pearson: f64,
    pub max_sigma_dev: Option<f64>,
}

pub fn comparison_csv(meta: &[(String, String)], rows: &[ComparisonRow]) -> String {
    let mut out = preamble(meta);
    out.push_str("reference,estimate,nrmse,pearson,max_sigma_dev\n");
    for r in rows {
        let dev = r.max_sigma_dev.map(num).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.reference,
            r.estimate,
            num(r.nrmse),
            num(r.pearson),
            dev
        );
    }
    out
}

/// Rows are input states, columns analyzer settings, both `HH, HV, VH, VV`.
pub fn truth_table_csv(meta: &[(String, String)], table: &TruthTable) -> String {
    let mut out = preamble(meta);
    out.push_str("input");
    for i in 0..4 {
        let _ = write!(out, ",{}", TruthTable::label(i));
    }
    out.push('\n');
    for (i, row) in table.p.iter().enumerate() {
        out.push_str(&TruthTable::label(i));
        for v in row {
            let _ = write!(out, ",{}", num(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ghostfringe::pattern::{GridPoint, PatternMode};

    #[test]
    fn stderr_column_only_when_present() {
        let mut p = CorrelationPattern {
            grid: vec![GridPoint::new(1e-7, 0.1)],
            values: vec![0.3],
            mode: PatternMode::Exact,
            stderr: None,
        };
        let meta = vec![("k".to_string(), "v".to_string())];
        assert_eq!(
            pattern_csv(&meta, &p),
            "# k=v\nx_C,x_T,value\n1e-7,0.1,0.3\n"
        );
        p.stderr = Some(vec![0.25]);
        assert!(pattern_csv(&[], &p).ends_with("value,stderr\n1e-7,0.1,0.3,0.25\n"));
    }
}
