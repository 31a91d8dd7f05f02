//! A single time integration from the initial data to the final time.

use std::time::Instant;

use elrkfv_core::diffusion_imex::SolverCache;
use elrkfv_core::grid::{cfl_dt_1d, cfl_dt_2d};
use elrkfv_core::multidim::{fourth_order_split_step, strang_step, Field2D, SplitConfig};
use elrkfv_core::problems::{
    cell_averages_1d, cell_averages_2d, macro_parameters_1v, macro_parameters_2v, ProblemSpec,
};
use elrkfv_core::stepper::step;
use elrkfv_core::CellField;
use serde::Serialize;

use crate::config::{Resolved, RunConfig, Splitting};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum State {
    OneD(CellField),
    TwoD(Field2D),
}

impl State {
    pub fn time(&self) -> f64 {
        match self {
            State::OneD(f) => f.time,
            State::TwoD(f) => f.time,
        }
    }

    fn set_time(&mut self, t: f64) {
        match self {
            State::OneD(f) => f.time = t,
            State::TwoD(f) => f.time = t,
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            State::OneD(f) => &f.values,
            State::TwoD(f) => &f.values,
        }
    }

    /// `dx` or `dx dy`.
    pub fn cell_measure(&self) -> f64 {
        match self {
            State::OneD(f) => f.grid.dx(),
            State::TwoD(f) => f.grid_x.dx() * f.grid_y.dx(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            State::OneD(f) => f.grid.len(),
            State::TwoD(f) => f.nx(),
        }
    }

    pub fn mass(&self) -> f64 {
        self.cell_measure() * self.values().iter().sum::<f64>()
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub requested: f64,
    pub state: State,
}

/// Moments of a kinetic run after one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MacroSample {
    pub t: f64,
    pub n: f64,
    pub v_bar_x: f64,
    pub v_bar_y: f64,
    pub temperature: f64,
    /// `sum |f - f_M| dv` against the cell averages of the target equilibrium.
    pub l1_to_equilibrium: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dt: f64,
    pub steps: usize,
    pub initial_state: State,
    pub final_state: State,
    pub snapshots: Vec<Snapshot>,
    pub macro_series: Vec<MacroSample>,
    /// Extremes of the cell averages over every accepted step.
    pub min_value: f64,
    pub max_value: f64,
    pub wall_time: f64,
}

/// Cell averages of the initial data and the CFL time step.
pub fn initial_state(cfg: &RunConfig, res: &Resolved) -> Result<(State, f64)> {
    Ok(match &res.problem {
        ProblemSpec::OneD(p) => {
            let f = p.initial_field(cfg.n)?;
            let dt = cfl_dt_1d(cfg.cfl, f.grid.dx(), p.max_speed(&f))?;
            (State::OneD(f), dt)
        }
        ProblemSpec::TwoD(p) => {
            let f = p.initial_field(cfg.n, cfg.n)?;
            let (sx, sy) = p.max_speeds(&f);
            let dt = cfl_dt_2d(cfg.cfl, f.grid_x.dx(), f.grid_y.dx(), sx, sy)?;
            (State::TwoD(f), dt)
        }
    })
}

struct Observer {
    equilibrium: Option<(f64, Vec<f64>)>,
    series: Vec<MacroSample>,
    min: f64,
    max: f64,
}

impl Observer {
    fn new(res: &Resolved, state: &State) -> Self {
        let equilibrium = res.problem.equilibrium().map(|m| {
            let avgs = match state {
                State::OneD(f) => cell_averages_1d(&f.grid, |v| m.eval_1v(v)),
                State::TwoD(f) => cell_averages_2d(&f.grid_x, &f.grid_y, |x, y| m.eval_2v(x, y)),
            };
            (m.r, avgs)
        });
        Self {
            equilibrium,
            series: Vec::new(),
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn observe(&mut self, state: &State) -> Result<()> {
        for &v in state.values() {
            self.min = self.min.min(v);
            self.max = self.max.max(v);
        }
        if let Some((r, target)) = &self.equilibrium {
            let m = match state {
                State::OneD(f) => macro_parameters_1v(f, *r)?,
                State::TwoD(f) => macro_parameters_2v(f, *r)?,
            };
            let dist = state
                .values()
                .iter()
                .zip(target)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                * state.cell_measure();
            self.series.push(MacroSample {
                t: state.time(),
                n: m.n,
                v_bar_x: m.v_bar[0],
                v_bar_y: m.v_bar[1],
                temperature: m.t,
                l1_to_equilibrium: dist,
            });
        }
        Ok(())
    }
}

/// Runs `cfg` to its final time with a fixed step; the last step is clipped
/// so the final time is hit exactly.
pub fn run_single(cfg: &RunConfig) -> Result<RunOutput> {
    let res = cfg.resolve()?;
    run_resolved(cfg, &res)
}

pub fn run_resolved(cfg: &RunConfig, res: &Resolved) -> Result<RunOutput> {
    let start = Instant::now();
    let (initial, dt) = initial_state(cfg, res)?;
    let t_final = res.final_time;
    let split = SplitConfig {
        scheme: res.scheme.clone(),
        opts: res.opts,
        bc: res.problem.bc(),
        gauss_order: cfg.gauss_order,
    };
    let mut cache = SolverCache::default();
    let mut obs = Observer::new(res, &initial);
    obs.observe(&initial)?;

    let mut pending: Vec<f64> = cfg.snapshots.clone();
    pending.sort_by(f64::total_cmp);
    pending.reverse();
    let mut snapshots = Vec::new();
    let mut take_snapshots = |state: &State, last: bool, snaps: &mut Vec<Snapshot>| {
        while let Some(&s) = pending.last() {
            if last || state.time() + 0.5 * dt >= s {
                snaps.push(Snapshot {
                    requested: s,
                    state: state.clone(),
                });
                pending.pop();
            } else {
                break;
            }
        }
    };
    take_snapshots(&initial, false, &mut snapshots);

    let t0 = initial.time();
    let mut state = initial.clone();
    let mut k: u64 = 0;
    loop {
        let remaining = t_final - state.time();
        if remaining <= 1e-14 * t_final.abs().max(1.0) {
            break;
        }
        let h = if dt >= remaining * (1.0 - 1e-12) {
            remaining
        } else {
            dt
        };
        let mut next = match (&state, &res.problem) {
            (State::OneD(f), ProblemSpec::OneD(p)) => State::OneD(step(
                f,
                h,
                p,
                p.bc,
                &res.scheme,
                &res.opts,
                &mut cache,
            )?),
            (State::TwoD(f), ProblemSpec::TwoD(p)) => State::TwoD(match cfg.splitting {
                Splitting::FourthOrder => fourth_order_split_step(f, h, p, &split)?,
                _ => strang_step(f, h, p, &split)?,
            }),
            _ => unreachable!("state and problem dimensions agree"),
        };
        k += 1;
        next.set_time(if h == remaining {
            t_final
        } else {
            t0 + k as f64 * dt
        });
        state = next;
        obs.observe(&state)?;
        take_snapshots(&state, false, &mut snapshots);
        log::debug!("step {k}: t = {}", state.time());
    }
    state.set_time(t_final);
    take_snapshots(&state, true, &mut snapshots);

    Ok(RunOutput {
        dt,
        steps: k as usize,
        initial_state: initial,
        final_state: state,
        snapshots,
        macro_series: obs.series,
        min_value: obs.min,
        max_value: obs.max,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_step_is_clipped() {
        let cfg = RunConfig {
            problem: "transport-1d-const".into(),
            n: 20,
            cfl: 0.7,
            final_time: Some(0.33),
            scheme: Some("ssp-rk3".into()),
            snapshots: vec![0.0, 0.1, 5.0],
            ..Default::default()
        };
        let out = run_single(&cfg).unwrap();
        assert!((out.final_state.time() - 0.33).abs() <= 1e-14);
        assert!(out.dt * (out.steps as f64 - 1.0) < 0.33);
        assert_eq!(out.snapshots.len(), 3);
        assert_eq!(out.snapshots[0].state.time(), 0.0);
        assert!((out.snapshots[1].state.time() - 0.1).abs() <= 0.5 * out.dt);
        assert_eq!(out.snapshots[2].state.time(), 0.33);
    }
}
