//! Step options, scheme selection, the step-halving fallback and a simple
//! fixed-step time loop.

use alloc::format;

use crate::convection::{el_rk_attempt, ButcherTable, Dissipation};
use crate::diffusion_imex::{el_imex_attempt, ImexTableau, SolverCache};
use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, CellField};
use crate::math::fabs;
use crate::model::{LineModel, TimeReversed};
use crate::reconstruct::WenoParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpeedMode {
    /// Divided differences of the flux between neighbouring averages.
    #[default]
    RankineHugoniot,
    /// All characteristics vertical; the scheme becomes plain RK-FV.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub weno: WenoParams,
    pub speeds: SpeedMode,
    pub dissipation: Dissipation,
    pub max_halvings: u32,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            weno: WenoParams::default(),
            speeds: SpeedMode::RankineHugoniot,
            dissipation: Dissipation::Local,
            max_halvings: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimeScheme {
    Explicit(ButcherTable),
    Imex(ImexTableau),
}

impl TimeScheme {
    /// `forward-euler`, `ssp-rk3`, `rk4` or an IMEX name such as `IMEX(2,3,3)`.
    pub fn by_name(name: &str) -> Result<Self> {
        if let Ok(t) = ButcherTable::by_name(name) {
            return Ok(TimeScheme::Explicit(t));
        }
        crate::diffusion_imex::imex_tableau(name).map(TimeScheme::Imex)
    }

    pub fn name(&self) -> &str {
        match self {
            TimeScheme::Explicit(t) => &t.name,
            TimeScheme::Imex(t) => &t.name,
        }
    }

    pub fn is_imex(&self) -> bool {
        matches!(self, TimeScheme::Imex(_))
    }
}

type Attempt<'a> = dyn Fn(&CellField, f64, &dyn LineModel) -> Result<CellField> + 'a;

/// Runs `attempt` over `dt`, splitting the step in halves whenever the
/// traceback partition degenerates. Negative `dt` runs the time-reversed
/// problem forward.
pub(crate) fn advance_with_fallback<M: LineModel + ?Sized>(
    field: &CellField,
    dt: f64,
    model: &M,
    opts: &StepOptions,
    attempt: &Attempt<'_>,
) -> Result<CellField> {
    if !dt.is_finite() {
        return Err(Error::OutOfRange(format!("dt = {dt}")));
    }
    if dt == 0.0 {
        return Ok(field.clone());
    }
    let model: &dyn LineModel = &DynRef(model);
    if dt > 0.0 {
        return halving(field, dt, model, opts.max_halvings, 0, attempt);
    }
    if model.epsilon() > 0.0 {
        return Err(Error::Unsupported(
            "backward time steps are only allowed for pure convection".into(),
        ));
    }
    let reversed = TimeReversed {
        inner: model,
        t0: field.time,
    };
    let mut out = halving(field, -dt, &reversed, opts.max_halvings, 0, attempt)?;
    out.time = field.time + dt;
    Ok(out)
}

struct DynRef<'a, M: ?Sized>(&'a M);

impl<M: LineModel + ?Sized> LineModel for DynRef<'_, M> {
    fn flux(&self, x: f64, t: f64, u: f64) -> f64 {
        self.0.flux(x, t, u)
    }
    fn flux_deriv(&self, x: f64, t: f64, u: f64) -> f64 {
        self.0.flux_deriv(x, t, u)
    }
    fn epsilon(&self) -> f64 {
        self.0.epsilon()
    }
    fn has_source(&self) -> bool {
        self.0.has_source()
    }
    fn source(&self, x: f64, t: f64) -> f64 {
        self.0.source(x, t)
    }
}

fn halving(
    field: &CellField,
    dt: f64,
    model: &dyn LineModel,
    max: u32,
    depth: u32,
    attempt: &Attempt<'_>,
) -> Result<CellField> {
    match attempt(field, dt, model) {
        Err(Error::Partition(fail)) => {
            if depth >= max {
                return Err(Error::PartitionExhausted { halvings: depth });
            }
            log::warn!(
                "traceback cells {:?} collapse at t = {}, dt = {dt}; halving (admissible dt {})",
                fail.cells,
                field.time,
                fail.admissible_dt
            );
            let half = 0.5 * dt;
            let mid = halving(field, half, model, max, depth + 1, attempt)?;
            halving(&mid, half, model, max, depth + 1, attempt)
        }
        other => other,
    }
}

/// Advances one step with either an explicit or an IMEX scheme.
pub fn step<M: LineModel + ?Sized>(
    field: &CellField,
    dt: f64,
    model: &M,
    bc: BoundaryCondition,
    scheme: &TimeScheme,
    opts: &StepOptions,
    cache: &mut SolverCache,
) -> Result<CellField> {
    match scheme {
        TimeScheme::Explicit(table) => {
            if model.epsilon() != 0.0 {
                return Err(Error::Unsupported(format!(
                    "explicit scheme {} cannot treat diffusion",
                    table.name
                )));
            }
            advance_with_fallback(field, dt, model, opts, &|f, h, m| {
                el_rk_attempt(f, table, h, m, bc, opts)
            })
        }
        TimeScheme::Imex(tab) => {
            let cache = core::cell::RefCell::new(cache);
            advance_with_fallback(field, dt, model, opts, &|f, h, m| {
                el_imex_attempt(f, tab, h, m, bc, opts, &mut cache.borrow_mut())
            })
        }
    }
}

/// Fixed-step loop from `field.time` to `t_final`; the last step is clipped.
/// `on_step` sees every accepted state.
#[allow(clippy::too_many_arguments)]
pub fn integrate<M: LineModel + ?Sized>(
    mut field: CellField,
    t_final: f64,
    dt: f64,
    model: &M,
    bc: BoundaryCondition,
    scheme: &TimeScheme,
    opts: &StepOptions,
    mut on_step: impl FnMut(&CellField),
) -> Result<CellField> {
    if !(dt > 0.0) {
        return Err(Error::OutOfRange(format!("dt = {dt}")));
    }
    let mut cache = SolverCache::default();
    let t_start = field.time;
    let mut k: u64 = 0;
    loop {
        let remaining = t_final - field.time;
        if remaining <= 1e-14 * fabs(t_final).max(1.0) {
            break;
        }
        let h = if dt >= remaining * (1.0 - 1e-12) {
            remaining
        } else {
            dt
        };
        field = step(&field, h, model, bc, scheme, opts, &mut cache)?;
        k += 1;
        // Avoid drift from repeated addition.
        let nominal = t_start + k as f64 * dt;
        field.time = if h == remaining { t_final } else { nominal };
        on_step(&field);
    }
    field.time = t_final;
    Ok(field)
}
