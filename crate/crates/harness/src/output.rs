//! CSV and JSON writers for runs, reports and sweeps.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::golden::{write_table, GoldenOutcome};
use crate::norms::ErrorNorms;
use crate::run::{MacroSample, RunOutput, State};
use crate::study::{ConvergenceReport, SweepRow};

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::io(path, e))
}

fn sci(v: f64) -> String {
    format!("{v:.9e}")
}

/// Cell centres and averages: `x,value` or `x,y,value`.
pub fn write_state_csv(path: &Path, state: &State) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    match state {
        State::OneD(f) => {
            w.write_record(["x", "value"])?;
            for (j, v) in f.values.iter().enumerate() {
                w.write_record([sci(f.grid.center(j)), sci(*v)])?;
            }
        }
        State::TwoD(f) => {
            w.write_record(["x", "y", "value"])?;
            let ny = f.ny();
            for i in 0..f.nx() {
                for j in 0..ny {
                    w.write_record([
                        sci(f.grid_x.center(i)),
                        sci(f.grid_y.center(j)),
                        sci(f.values[i * ny + j]),
                    ])?;
                }
            }
        }
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_macro_csv(path: &Path, series: &[MacroSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["t", "n", "v_bar_x", "v_bar_y", "T", "l1_to_equilibrium"])?;
    for s in series {
        w.write_record([
            sci(s.t),
            sci(s.n),
            sci(s.v_bar_x),
            sci(s.v_bar_y),
            sci(s.temperature),
            sci(s.l1_to_equilibrium),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_report_csv(path: &Path, report: &ConvergenceReport) -> Result<()> {
    write_table(create(path)?, &report.rows)
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["CFL", "dt", "L1", "L2", "Linf"])?;
    for r in rows {
        w.write_record([sci(r.cfl), sci(r.dt), sci(r.l1), sci(r.l2), sci(r.linf)])?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn config_map(cfg: &RunConfig) -> BTreeMap<String, String> {
    cfg.to_pairs().into_iter().collect()
}

#[derive(Serialize)]
struct RunSummary<'a> {
    config: BTreeMap<String, String>,
    dt: f64,
    steps: usize,
    final_time: f64,
    wall_time_s: f64,
    mass_initial: f64,
    mass_final: f64,
    min_value: f64,
    max_value: f64,
    error: Option<ErrorNorms>,
    macro_series: &'a [MacroSample],
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(create(path)?, value)?;
    Ok(())
}

/// `summary.json`, `final.csv`, one `snapshot_<t>.csv` per requested time
/// and `macro.csv` for kinetic problems, all under `dir`.
pub fn write_run(dir: &Path, cfg: &RunConfig, out: &RunOutput, error: Option<ErrorNorms>) -> Result<()> {
    let summary = RunSummary {
        config: config_map(cfg),
        dt: out.dt,
        steps: out.steps,
        final_time: out.final_state.time(),
        wall_time_s: out.wall_time,
        mass_initial: out.initial_state.mass(),
        mass_final: out.final_state.mass(),
        min_value: out.min_value,
        max_value: out.max_value,
        error,
        macro_series: &out.macro_series,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    write_state_csv(&dir.join("final.csv"), &out.final_state)?;
    for s in &out.snapshots {
        write_state_csv(&dir.join(format!("snapshot_{}.csv", s.requested)), &s.state)?;
    }
    if !out.macro_series.is_empty() {
        write_macro_csv(&dir.join("macro.csv"), &out.macro_series)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportJson<'a> {
    config: BTreeMap<String, String>,
    report: &'a ConvergenceReport,
    golden: Option<&'a GoldenOutcome>,
}

/// `report.csv` and `report.json` under `dir`.
pub fn write_report(
    dir: &Path,
    cfg: &RunConfig,
    report: &ConvergenceReport,
    golden: Option<&GoldenOutcome>,
) -> Result<()> {
    write_report_csv(&dir.join("report.csv"), report)?;
    write_json(
        &dir.join("report.json"),
        &ReportJson {
            config: config_map(cfg),
            report,
            golden,
        },
    )
}
