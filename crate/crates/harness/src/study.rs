//! Mesh-refinement studies and CFL sweeps.

use std::time::Instant;

use elrkfv_core::problems::ProblemSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Resolved, RunConfig};
use crate::error::{HarnessError, Result};
use crate::norms::{error_norms, ErrorNorms};
use crate::run::{run_resolved, RunOutput, State};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub l1: f64,
    pub l1_order: Option<f64>,
    pub l2: f64,
    pub l2_order: Option<f64>,
    pub linf: f64,
    pub linf_order: Option<f64>,
}

impl ConvergenceRow {
    pub fn new(n: usize, e: ErrorNorms) -> Self {
        Self {
            n,
            l1: e.l1,
            l1_order: None,
            l2: e.l2,
            l2_order: None,
            linf: e.linf,
            linf_order: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub problem: String,
    pub scheme: String,
    pub splitting: String,
    pub cfl: f64,
    pub final_time: f64,
    pub l2_convention: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub meta: ReportMeta,
    pub rows: Vec<ConvergenceRow>,
}

fn order(prev: f64, cur: f64, n_prev: usize, n_cur: usize) -> f64 {
    (prev / cur).ln() / (n_cur as f64 / n_prev as f64).ln()
}

/// `log(e_prev / e_cur) / log(N_cur / N_prev)` for every row but the first.
pub fn fill_orders(rows: &mut [ConvergenceRow]) {
    for i in 0..rows.len() {
        if i == 0 {
            rows[i].l1_order = None;
            rows[i].l2_order = None;
            rows[i].linf_order = None;
            continue;
        }
        let (p, c) = (rows[i - 1].clone(), &mut rows[i]);
        c.l1_order = Some(order(p.l1, c.l1, p.n, c.n));
        c.l2_order = Some(order(p.l2, c.l2, p.n, c.n));
        c.linf_order = Some(order(p.linf, c.linf, p.n, c.n));
    }
}

/// Averages `reference` down onto an `n`-cell (per dimension) grid; the
/// reference resolution must be a multiple of `n`.
pub fn restrict(reference: &State, n: usize) -> Result<Vec<f64>> {
    let nr = reference.n();
    if n == 0 || nr % n != 0 {
        return Err(HarnessError::config(format!(
            "reference with {nr} cells cannot be restricted to {n}"
        )));
    }
    let r = nr / n;
    Ok(match reference {
        State::OneD(f) => f
            .values
            .chunks(r)
            .map(|c| c.iter().sum::<f64>() / r as f64)
            .collect(),
        State::TwoD(f) => {
            let ny = f.ny();
            let mut out = vec![0.0; n * n];
            for i in 0..nr {
                for j in 0..ny {
                    out[(i / r) * n + j / r] += f.values[i * ny + j];
                }
            }
            let w = (r * r) as f64;
            out.iter_mut().for_each(|v| *v /= w);
            out
        }
    })
}

/// Error of a finished run against exact cell averages at the final time,
/// or against `reference` restricted to the run's mesh.
pub fn final_error(
    cfg: &RunConfig,
    res: &Resolved,
    out: &RunOutput,
    reference: Option<&State>,
) -> Result<ErrorNorms> {
    let st = &out.final_state;
    let t = st.time();
    let exact = if let Some(r) = reference {
        Some(restrict(r, st.n())?)
    } else {
        match (&res.problem, st) {
            (ProblemSpec::OneD(p), State::OneD(f)) => p.exact_averages(&f.grid, t),
            (ProblemSpec::TwoD(p), State::TwoD(f)) => p.exact_averages(&f.grid_x, &f.grid_y, t),
            _ => None,
        }
    };
    let exact = exact.ok_or_else(|| HarnessError::NoReference(cfg.problem.clone()))?;
    error_norms(st.values(), &exact, st.cell_measure(), cfg.l2)
}

/// Runs `base` on every mesh of `ns` (in parallel) and tabulates the errors.
pub fn convergence_study(
    base: &RunConfig,
    ns: &[usize],
    reference: Option<&State>,
) -> Result<ConvergenceReport> {
    let start = Instant::now();
    let res = base.resolve()?;
    if reference.is_none() && !res.problem.has_exact() {
        return Err(HarnessError::NoReference(base.problem.clone()));
    }
    let rows: Vec<Result<ConvergenceRow>> = ns
        .par_iter()
        .map(|&n| {
            let cfg = RunConfig {
                n,
                ..base.clone()
            };
            let out = run_resolved(&cfg, &res)?;
            let e = final_error(&cfg, &res, &out, reference)?;
            log::info!("{} N = {n}: L1 = {:.3e} ({:.2} s)", cfg.problem, e.l1, out.wall_time);
            Ok(ConvergenceRow::new(n, e))
        })
        .collect();
    let mut rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    fill_orders(&mut rows);
    Ok(ConvergenceReport {
        meta: meta(base, &res, start),
        rows,
    })
}

fn meta(cfg: &RunConfig, res: &Resolved, start: Instant) -> ReportMeta {
    ReportMeta {
        problem: cfg.problem.clone(),
        scheme: res.scheme.name().to_string(),
        splitting: if res.problem.dimension() == 2 {
            cfg.splitting.name().to_string()
        } else {
            "none".to_string()
        },
        cfl: cfg.cfl,
        final_time: res.final_time,
        l2_convention: cfg.l2.name().to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

/// Final state of a fine run used in place of an exact solution.
pub fn reference_solution(base: &RunConfig, n: usize, cfl: f64) -> Result<State> {
    let cfg = RunConfig {
        n,
        cfl,
        snapshots: Vec::new(),
        ..base.clone()
    };
    let res = cfg.resolve()?;
    Ok(run_resolved(&cfg, &res)?.final_state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cfl: f64,
    pub dt: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Errors at a fixed mesh over a range of CFL numbers.
pub fn cfl_sweep(base: &RunConfig, cfls: &[f64], reference: Option<&State>) -> Result<Vec<SweepRow>> {
    let res = base.resolve()?;
    cfls.par_iter()
        .map(|&cfl| {
            let cfg = RunConfig {
                cfl,
                ..base.clone()
            };
            let out = run_resolved(&cfg, &res)?;
            let e = final_error(&cfg, &res, &out, reference)?;
            Ok(SweepRow {
                cfl,
                dt: out.dt,
                l1: e.l1,
                l2: e.l2,
                linf: e.linf,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, e: f64) -> ConvergenceRow {
        ConvergenceRow::new(
            n,
            ErrorNorms {
                l1: e,
                l2: e,
                linf: e,
            },
        )
    }

    #[test]
    fn orders_from_errors() {
        let mut rows = vec![row(50, 1.0), row(100, 1.0 / 32.0), row(200, 1.0 / 1024.0)];
        fill_orders(&mut rows);
        assert_eq!(rows[0].l1_order, None);
        assert!((rows[1].l1_order.unwrap() - 5.0).abs() < 1e-12);
        assert!((rows[2].linf_order.unwrap() - 5.0).abs() < 1e-12);
        let mut one = vec![row(50, 1.0)];
        fill_orders(&mut one);
        assert!(one[0].l1_order.is_none() && one[0].l2_order.is_none());
    }

    #[test]
    fn single_mesh_study_has_no_orders() {
        let cfg = RunConfig {
            problem: "transport-1d-const".into(),
            cfl: 2.0,
            final_time: Some(0.2),
            scheme: Some("forward-euler".into()),
            ..Default::default()
        };
        let rep = convergence_study(&cfg, &[40], None).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert!(rep.rows[0].l1_order.is_none());
        let r = &rep.rows[0];
        assert!(r.l1 <= 2.0 * std::f64::consts::PI * r.linf * (1.0 + 1e-12));
    }

    #[test]
    fn missing_reference_is_reported() {
        let cfg = RunConfig {
            problem: "swirling-diffusion".into(),
            ..Default::default()
        };
        assert!(matches!(
            convergence_study(&cfg, &[10], None),
            Err(HarnessError::NoReference(_))
        ));
    }
}
