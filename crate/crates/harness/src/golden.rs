//! Stored convergence tables and comparison against fresh runs.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::study::ConvergenceRow;

pub const TABLE_HEADER: [&str; 7] = ["N", "L1", "L1_order", "L2", "L2_order", "Linf", "Linf_order"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::L1, Norm::L2, Norm::Linf];

    pub fn name(self) -> &'static str {
        match self {
            Norm::L1 => "L1",
            Norm::L2 => "L2",
            Norm::Linf => "Linf",
        }
    }

    fn error(self, r: &ConvergenceRow) -> f64 {
        match self {
            Norm::L1 => r.l1,
            Norm::L2 => r.l2,
            Norm::Linf => r.linf,
        }
    }

    fn order(self, r: &ConvergenceRow) -> Option<f64> {
        match self {
            Norm::L1 => r.l1_order,
            Norm::L2 => r.l2_order,
            Norm::Linf => r.linf_order,
        }
    }
}

/// A stored table plus the `# key=value` run settings written above it.
#[derive(Debug, Clone, PartialEq)]
pub struct Golden {
    pub settings: Vec<(String, String)>,
    pub rows: Vec<ConvergenceRow>,
}

impl Golden {
    pub fn setting(&self, key: &str) -> Option<&str> {
        self.settings
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// The run the table came from. `reference-*` entries are left out.
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (k, v) in &self.settings {
            if !k.starts_with("reference-") {
                cfg.set(k, v)?;
            }
        }
        Ok(cfg)
    }

    pub fn mesh_sizes(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.n).collect()
    }
}

fn opt(s: &str) -> Result<Option<f64>> {
    let s = s.trim();
    if s.is_empty() || s == "-" {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| HarnessError::config(format!("table entry `{s}`")))
}

pub fn parse_golden(text: &str) -> Result<Golden> {
    let mut settings = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.trim().strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                settings.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != TABLE_HEADER.len() {
            return Err(HarnessError::config(format!(
                "table row has {} columns, expected {}",
                rec.len(),
                TABLE_HEADER.len()
            )));
        }
        let need = |i: usize| -> Result<f64> {
            opt(&rec[i])?.ok_or_else(|| HarnessError::config(format!("missing {}", TABLE_HEADER[i])))
        };
        rows.push(ConvergenceRow {
            n: rec[0]
                .parse()
                .map_err(|_| HarnessError::config(format!("mesh size `{}`", &rec[0])))?,
            l1: need(1)?,
            l1_order: opt(&rec[2])?,
            l2: need(3)?,
            l2_order: opt(&rec[4])?,
            linf: need(5)?,
            linf_order: opt(&rec[6])?,
        });
    }
    Ok(Golden { settings, rows })
}

pub fn read_golden(path: &Path) -> Result<Golden> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_golden(&text)
}

fn sci(v: f64) -> String {
    format!("{v:.6e}")
}

/// Writes rows in the golden/report CSV layout.
pub fn write_table<W: Write>(out: W, rows: &[ConvergenceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE_HEADER)?;
    let o = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.n.to_string(),
            sci(r.l1),
            o(r.l1_order),
            sci(r.l2),
            o(r.l2_order),
            sci(r.linf),
            o(r.linf_order),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io("<table>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerance {
    /// Errors pass within `[golden / f, golden * f]`.
    pub error_factor: f64,
    /// Orders pass within `golden +- order_abs`.
    pub order_abs: f64,
    pub norms: Vec<Norm>,
    /// `(N, norm)` cells whose order is not checked.
    pub exempt_orders: Vec<(usize, Norm)>,
    pub check_errors: bool,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            error_factor: 3.0,
            order_abs: 0.35,
            norms: Norm::ALL.to_vec(),
            exempt_orders: Vec::new(),
            check_errors: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellDiff {
    pub n: usize,
    pub column: String,
    pub golden: f64,
    pub got: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenOutcome {
    pub pass: bool,
    pub cells: Vec<CellDiff>,
}

impl GoldenOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &CellDiff> {
        self.cells.iter().filter(|c| !c.pass)
    }
}

/// Compares a fresh table against a stored one, cell by cell. Rows are
/// matched on `N`; a golden row with no counterpart fails.
pub fn golden_compare(report: &[ConvergenceRow], golden: &[ConvergenceRow], tol: &Tolerance) -> GoldenOutcome {
    let mut cells = Vec::new();
    for g in golden {
        let got = report.iter().find(|r| r.n == g.n);
        for &norm in &tol.norms {
            if tol.check_errors {
                let want = norm.error(g);
                let v = got.map(|r| norm.error(r));
                let pass = v.is_some_and(|v| {
                    v.is_finite() && v <= want * tol.error_factor && v >= want / tol.error_factor
                });
                cells.push(CellDiff {
                    n: g.n,
                    column: norm.name().to_string(),
                    golden: want,
                    got: v,
                    pass,
                });
            }
            if let Some(want) = norm.order(g) {
                if tol.exempt_orders.contains(&(g.n, norm)) {
                    continue;
                }
                let v = got.and_then(|r| norm.order(r));
                let pass = v.is_some_and(|v| (v - want).abs() <= tol.order_abs);
                cells.push(CellDiff {
                    n: g.n,
                    column: format!("{}_order", norm.name()),
                    golden: want,
                    got: v,
                    pass,
                });
            }
        }
    }
    GoldenOutcome {
        pass: cells.iter().all(|c| c.pass),
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "# problem=transport-1d-const\n# cfl=8\nN,L1,L1_order,L2,L2_order,Linf,Linf_order\n50,1.09E-08,,4.83E-09,,2.86E-09,\n100,3.34E-10,5.03,1.48E-10,5.03,8.34E-11,5.10\n";

    #[test]
    fn parse_and_round_trip() {
        let g = parse_golden(TABLE).unwrap();
        assert_eq!(g.setting("cfl"), Some("8"));
        assert_eq!(g.mesh_sizes(), vec![50, 100]);
        assert_eq!(g.rows[1].linf_order, Some(5.10));
        assert_eq!(g.run_config().unwrap().cfl, 8.0);
        let mut buf = Vec::new();
        write_table(&mut buf, &g.rows).unwrap();
        let back = parse_golden(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back.rows, g.rows);
    }

    #[test]
    fn identical_tables_pass() {
        let g = parse_golden(TABLE).unwrap();
        let out = golden_compare(&g.rows, &g.rows, &Tolerance::default());
        assert!(out.pass);
    }

    #[test]
    fn tenfold_error_fails_and_names_the_cell() {
        let g = parse_golden(TABLE).unwrap();
        let mut r = g.rows.clone();
        r[1].l2 *= 10.0;
        let out = golden_compare(&r, &g.rows, &Tolerance::default());
        assert!(!out.pass);
        let bad: Vec<_> = out.failures().collect();
        assert_eq!(bad.len(), 1);
        assert_eq!((bad[0].n, bad[0].column.as_str()), (100, "L2"));
    }

    #[test]
    fn missing_rows_fail() {
        let g = parse_golden(TABLE).unwrap();
        let out = golden_compare(&g.rows[..1], &g.rows, &Tolerance::default());
        assert!(!out.pass);
    }
}
