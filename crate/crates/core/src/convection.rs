//! Explicit EL-RK-FV stepping for convection: the modified Lax-Friedrichs
//! flux, the moving-cell right-hand side and the Runge-Kutta loop.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::characteristics::{rh_speeds, TracebackGrid};
use crate::diffusion_imex::source_cell_integrals;
use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, CellField};
use crate::math::fabs;
use crate::model::LineModel;
use crate::reconstruct::{face_values_uniform, UniformReconstruction, WenoParams};
use crate::stepper::{advance_with_fallback, SpeedMode, StepOptions};

/// Safety factor on the local wave speed in the dissipation coefficient.
pub const ALPHA_MARGIN: f64 = 1.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTable {
    pub name: String,
    pub stages: usize,
    /// Row-major `stages x stages`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl ButcherTable {
    pub fn new(name: &str, stages: usize, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let t = Self {
            name: name.into(),
            stages,
            a,
            b,
            c,
        };
        t.validate()?;
        Ok(t)
    }

    #[inline]
    pub fn a(&self, i: usize, k: usize) -> f64 {
        self.a[i * self.stages + k]
    }

    pub fn forward_euler() -> Self {
        Self::new("forward-euler", 1, vec![0.0], vec![1.0], vec![0.0]).unwrap()
    }

    pub fn ssp_rk3() -> Self {
        #[rustfmt::skip]
        let a = vec![
            0.0, 0.0, 0.0,
            1.0, 0.0, 0.0,
            0.25, 0.25, 0.0,
        ];
        Self::new("ssp-rk3", 3, a, vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], vec![0.0, 1.0, 0.5]).unwrap()
    }

    pub fn rk4() -> Self {
        #[rustfmt::skip]
        let a = vec![
            0.0, 0.0, 0.0, 0.0,
            0.5, 0.0, 0.0, 0.0,
            0.0, 0.5, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
        ];
        Self::new(
            "rk4",
            4,
            a,
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 0.5, 1.0],
        )
        .unwrap()
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "forward-euler" | "euler" => Ok(Self::forward_euler()),
            "ssp-rk3" => Ok(Self::ssp_rk3()),
            "rk4" => Ok(Self::rk4()),
            _ => Err(Error::Unknown {
                kind: "explicit scheme",
                name: name.into(),
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.stages;
        if s == 0 || self.a.len() != s * s || self.b.len() != s || self.c.len() != s {
            return Err(Error::OutOfRange(format!("malformed table {}", self.name)));
        }
        for i in 0..s {
            for k in i..s {
                if self.a(i, k) != 0.0 {
                    return Err(Error::OutOfRange(format!("{} is not explicit", self.name)));
                }
            }
            let row: f64 = (0..i).map(|k| self.a(i, k)).sum();
            if fabs(row - self.c[i]) > 1e-14 {
                return Err(Error::OutOfRange(format!("{}: c[{i}] != row sum", self.name)));
            }
        }
        if fabs(self.b.iter().sum::<f64>() - 1.0) > 1e-14 {
            return Err(Error::OutOfRange(format!("{}: weights do not sum to 1", self.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dissipation {
    /// Per-face `alpha = 1.1 max(|f'(u-) - nu|, |f'(u+) - nu|)`.
    #[default]
    Local,
    /// The largest local value, applied at every face.
    Global,
}

/// Flux, speed and dissipation at one face at one instant.
pub struct ModifiedFluxContext<'a, M: ?Sized> {
    pub model: &'a M,
    pub x: f64,
    pub t: f64,
    pub nu: f64,
    pub alpha: f64,
}

impl<M: LineModel + ?Sized> ModifiedFluxContext<'_, M> {
    /// `f(u) - nu u`.
    #[inline]
    pub fn modified_flux(&self, u: f64) -> f64 {
        self.model.flux(self.x, self.t, u) - self.nu * u
    }

    /// `1.1 max |f'(u) - nu|` over the two face states.
    #[inline]
    pub fn local_alpha(&self, u_minus: f64, u_plus: f64) -> f64 {
        let dm = fabs(self.model.flux_deriv(self.x, self.t, u_minus) - self.nu);
        let dp = fabs(self.model.flux_deriv(self.x, self.t, u_plus) - self.nu);
        ALPHA_MARGIN * dm.max(dp)
    }
}

/// `0.5 [(f(u-) - nu u-) + (f(u+) - nu u+)] - 0.5 alpha (u+ - u-)`.
#[inline]
pub fn lax_friedrichs_modified<M: LineModel + ?Sized>(
    u_minus: f64,
    u_plus: f64,
    ctx: &ModifiedFluxContext<'_, M>,
) -> f64 {
    0.5 * (ctx.modified_flux(u_minus) + ctx.modified_flux(u_plus)) - 0.5 * ctx.alpha * (u_plus - u_minus)
}

/// Numerical fluxes at the `N+1` faces located at `nodes`.
pub(crate) fn face_fluxes<M: LineModel + ?Sized>(
    model: &M,
    speeds: &[f64],
    nodes: &[f64],
    t: f64,
    avgs: &[f64],
    bc: BoundaryCondition,
    weno: &WenoParams,
    dissipation: Dissipation,
) -> Vec<f64> {
    let n = avgs.len();
    let faces = face_values_uniform(avgs, bc, weno);
    let ctx = |j: usize| ModifiedFluxContext {
        model,
        x: nodes[j],
        t,
        nu: speeds[j],
        alpha: 0.0,
    };
    let last = match bc {
        BoundaryCondition::Periodic => n - 1,
        BoundaryCondition::Zero => n,
    };
    let mut alphas: Vec<f64> = (0..=last)
        .map(|j| ctx(j).local_alpha(faces[j].0, faces[j].1))
        .collect();
    if dissipation == Dissipation::Global {
        let m = alphas.iter().cloned().fold(0.0, f64::max);
        alphas.iter_mut().for_each(|a| *a = m);
    }
    let mut out: Vec<f64> = (0..=last)
        .map(|j| {
            let mut c = ctx(j);
            c.alpha = alphas[j];
            lax_friedrichs_modified(faces[j].0, faces[j].1, &c)
        })
        .collect();
    if bc == BoundaryCondition::Periodic {
        out.push(out[0]);
    }
    out
}

/// `dU_j/dt = -(F_{j+1/2} - F_{j-1/2})` on the traceback cells at `tau`,
/// plus the source integrated over each moving cell.
///
/// `t0` is the absolute time at `tau = 0`.
#[allow(clippy::too_many_arguments)]
pub fn semidiscrete_rhs<M: LineModel + ?Sized>(
    tb: &TracebackGrid,
    tau: f64,
    t0: f64,
    nonuniform_avgs: &[f64],
    model: &M,
    bc: BoundaryCondition,
    weno: &WenoParams,
    dissipation: Dissipation,
) -> Result<Vec<f64>> {
    let n = tb.base.len();
    if nonuniform_avgs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: nonuniform_avgs.len(),
        });
    }
    let nodes = tb.nodes_unchecked(tau);
    for j in 0..n {
        if !(nodes[j + 1] > nodes[j]) {
            return Err(Error::NonIncreasingNodes(j));
        }
    }
    Ok(convective_rhs(tb, &nodes, t0 + tau, nonuniform_avgs, model, bc, weno, dissipation, true))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn convective_rhs<M: LineModel + ?Sized>(
    tb: &TracebackGrid,
    nodes: &[f64],
    t: f64,
    avgs: &[f64],
    model: &M,
    bc: BoundaryCondition,
    weno: &WenoParams,
    dissipation: Dissipation,
    with_source: bool,
) -> Vec<f64> {
    let flux = face_fluxes(model, &tb.speeds, nodes, t, avgs, bc, weno, dissipation);
    let mut rhs: Vec<f64> = flux.windows(2).map(|w| w[0] - w[1]).collect();
    if with_source && model.has_source() {
        let g = source_cell_integrals(|x| model.source(x, t), nodes);
        rhs.iter_mut().zip(g).for_each(|(r, gi)| *r += gi);
    }
    rhs
}

/// Speeds for one step according to the chosen mode.
pub(crate) fn step_speeds<M: LineModel + ?Sized>(
    field: &CellField,
    model: &M,
    bc: BoundaryCondition,
    mode: SpeedMode,
) -> Result<Vec<f64>> {
    match mode {
        SpeedMode::RankineHugoniot => rh_speeds(&field.grid, &field.values, model, field.time, bc),
        SpeedMode::Zero => Ok(vec![0.0; field.grid.len() + 1]),
    }
}

/// Builds the step's traceback grid, failing if any cell collapses.
pub(crate) fn traceback_for_step<M: LineModel + ?Sized>(
    field: &CellField,
    dt: f64,
    model: &M,
    bc: BoundaryCondition,
    opts: &StepOptions,
) -> Result<TracebackGrid> {
    let speeds = step_speeds(field, model, bc, opts.speeds)?;
    let tb = TracebackGrid::new(field.grid, speeds, dt)?;
    tb.validate_partition().map_err(Error::Partition)?;
    Ok(tb)
}

pub(crate) fn widths(nodes: &[f64]) -> Vec<f64> {
    nodes.windows(2).map(|w| w[1] - w[0]).collect()
}

/// One explicit step with no fallback; `dt > 0`.
pub(crate) fn el_rk_attempt<M: LineModel + ?Sized>(
    field: &CellField,
    table: &ButcherTable,
    dt: f64,
    model: &M,
    bc: BoundaryCondition,
    opts: &StepOptions,
) -> Result<CellField> {
    let tb = traceback_for_step(field, dt, model, bc, opts)?;
    let n = field.grid.len();
    let recon = UniformReconstruction::new(field.grid, &field.values, bc, &opts.weno)?;
    let start = recon.cell_integrals(&tb.nodes_unchecked(0.0))?;

    let s = table.stages;
    let mut ks: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut stage = vec![0.0; n];
    for i in 0..s {
        stage.copy_from_slice(&start);
        for (k, kk) in ks.iter().enumerate() {
            let a = table.a(i, k);
            if a != 0.0 {
                stage.iter_mut().zip(kk).for_each(|(u, l)| *u += dt * a * l);
            }
        }
        let tau = table.c[i] * dt;
        let nodes = tb.nodes_unchecked(tau);
        let avgs: Vec<f64> = stage
            .iter()
            .zip(widths(&nodes))
            .map(|(u, w)| u / w)
            .collect();
        ks.push(convective_rhs(
            &tb,
            &nodes,
            field.time + tau,
            &avgs,
            model,
            bc,
            &opts.weno,
            opts.dissipation,
            true,
        ));
    }
    let dx = field.grid.dx();
    let mut values = start;
    for (b, kk) in table.b.iter().zip(&ks) {
        values.iter_mut().zip(kk).for_each(|(u, l)| *u += dt * b * l);
    }
    values.iter_mut().for_each(|u| *u /= dx);
    CellField::new(field.grid, values, field.time + dt)
}

/// One explicit EL-RK-FV step of size `dt`.
///
/// A collapsing traceback partition triggers recursive halving of the step.
/// Negative `dt` integrates backwards (pure convection only).
pub fn el_rk_step<M: LineModel + ?Sized>(
    field: &CellField,
    table: &ButcherTable,
    dt: f64,
    model: &M,
    bc: BoundaryCondition,
    opts: &StepOptions,
) -> Result<CellField> {
    advance_with_fallback(field, dt, model, opts, &|f, h, m| {
        el_rk_attempt(f, table, h, m, bc, opts)
    })
}

/// Max-norm distance; used by the reduction checks.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| fabs(x - y)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use crate::math::PI;
    use crate::model::FnModel;
    use proptest::prelude::*;

    #[test]
    fn tables_are_consistent() {
        for t in [ButcherTable::forward_euler(), ButcherTable::ssp_rk3(), ButcherTable::rk4()] {
            t.validate().unwrap();
        }
        assert!(ButcherTable::by_name("rk5").is_err());
    }

    #[test]
    fn flux_examples() {
        let b = FnModel::new(|_, _, u: f64| 0.5 * u * u, |_, _, u| u);
        let mut ctx = ModifiedFluxContext { model: &b, x: 0.0, t: 0.0, nu: 0.3, alpha: 2.0 };
        assert!((lax_friedrichs_modified(0.7, 0.7, &ctx) - (0.5 * 0.49 - 0.3 * 0.7)).abs() < 1e-16);
        ctx.nu = 0.0;
        ctx.alpha = 1.0;
        assert_eq!(lax_friedrichs_modified(-1.0, 1.0, &ctx), -0.5);

        let lin = FnModel::new(|_, _, u| u, |_, _, _| 1.0);
        let ctx = ModifiedFluxContext { model: &lin, x: 0.0, t: 0.0, nu: 1.0, alpha: 0.0 };
        assert_eq!(lax_friedrichs_modified(0.2, -3.0, &ctx), 0.0);
        assert_eq!(ctx.local_alpha(0.2, -3.0), 0.0);
    }

    #[test]
    fn rhs_vanishes_for_constants_and_exact_tracing() {
        let g = Grid1D::new(0.0, 2.0 * PI, 32).unwrap();
        let b = FnModel::new(|_, _, u: f64| 0.5 * u * u, |_, _, u| u);
        let tb = TracebackGrid::new(g, vec![0.4; 33], 0.1).unwrap();
        let r = semidiscrete_rhs(&tb, 0.05, 0.0, &[1.3; 32], &b, BoundaryCondition::Periodic, &WenoParams::default(), Dissipation::Local)
            .unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-14));

        let lin = FnModel::new(|_, _, u| u, |_, _, _| 1.0);
        let tb = TracebackGrid::new(g, vec![1.0; 33], 0.1).unwrap();
        let v: Vec<f64> = g.centers().iter().map(|x| x.sin()).collect();
        let r = semidiscrete_rhs(&tb, 0.0, 0.0, &v, &lin, BoundaryCondition::Periodic, &WenoParams::default(), Dissipation::Local)
            .unwrap();
        assert!(r.iter().all(|v| *v == 0.0));
    }

    proptest! {
        #[test]
        fn rhs_telescopes(vals in proptest::collection::vec(-1.0f64..1.0, 24), nu in -1.0f64..1.0) {
            let g = Grid1D::new(0.0, 1.0, 24).unwrap();
            let b = FnModel::new(|_, _, u: f64| 0.5 * u * u, |_, _, u| u);
            let tb = TracebackGrid::new(g, vec![nu; 25], 0.01).unwrap();
            for dis in [Dissipation::Local, Dissipation::Global] {
                let r = semidiscrete_rhs(&tb, 0.0, 0.0, &vals, &b, BoundaryCondition::Periodic, &WenoParams::default(), dis).unwrap();
                prop_assert!(r.iter().sum::<f64>().abs() < 1e-12);
            }
        }
    }
}
