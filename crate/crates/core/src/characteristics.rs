//! Linear approximate characteristics and the traceback grids they induce.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, PartitionFailure, Result};
use crate::grid::{BoundaryCondition, Grid1D};
use crate::math::fabs;
use crate::model::LineModel;

/// Below this jump the divided difference is replaced by `f'` at the mean.
pub const RH_JUMP_EPS: f64 = 1e-8;

/// Minimum traceback cell width, relative to `dx`.
pub const MIN_GAP: f64 = 1e-12;

#[inline]
fn rh_speed<M: LineModel + ?Sized>(model: &M, x: f64, t: f64, ul: f64, ur: f64) -> f64 {
    let jump = ur - ul;
    if fabs(jump) >= RH_JUMP_EPS {
        (model.flux(x, t, ur) - model.flux(x, t, ul)) / jump
    } else {
        model.flux_deriv(x, t, 0.5 * (ul + ur))
    }
}

/// Rankine-Hugoniot speeds `nu_{j+1/2}` at the `N+1` faces of `grid`,
/// computed from the averages at time `t`.
///
/// For periodic grids the first and last faces share the wrapped pair
/// `(u_{N-1}, u_0)`; zero boundaries pair the edge cells with a zero ghost.
pub fn rh_speeds<M: LineModel + ?Sized>(
    grid: &Grid1D,
    values: &[f64],
    model: &M,
    t: f64,
    bc: BoundaryCondition,
) -> Result<Vec<f64>> {
    let n = grid.len();
    if values.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: values.len(),
        });
    }
    let mut speeds = Vec::with_capacity(n + 1);
    let (first, last) = match bc {
        BoundaryCondition::Periodic => {
            let s = rh_speed(model, grid.node(0), t, values[n - 1], values[0]);
            (s, s)
        }
        BoundaryCondition::Zero => (
            rh_speed(model, grid.node(0), t, 0.0, values[0]),
            rh_speed(model, grid.node(n), t, values[n - 1], 0.0),
        ),
    };
    speeds.push(first);
    for j in 1..n {
        speeds.push(rh_speed(model, grid.node(j), t, values[j - 1], values[j]));
    }
    speeds.push(last);
    Ok(speeds)
}

/// Faces of the uniform grid at `t^n + dt_full` traced back along straight
/// lines of slope `speeds[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TracebackGrid {
    pub base: Grid1D,
    pub speeds: Vec<f64>,
    pub dt_full: f64,
}

impl TracebackGrid {
    pub fn new(base: Grid1D, speeds: Vec<f64>, dt_full: f64) -> Result<Self> {
        if speeds.len() != base.len() + 1 {
            return Err(Error::LengthMismatch {
                expected: base.len() + 1,
                got: speeds.len(),
            });
        }
        if !(dt_full >= 0.0 && dt_full.is_finite()) {
            return Err(Error::OutOfRange(format!("dt_full = {dt_full}")));
        }
        Ok(Self {
            base,
            speeds,
            dt_full,
        })
    }

    /// Nodes at `tau` after the start of the region, `0 <= tau <= dt_full`.
    pub fn nodes_at(&self, tau: f64) -> Result<Vec<f64>> {
        if !(0.0..=self.dt_full).contains(&tau) {
            return Err(Error::OutOfRange(format!(
                "tau = {tau} outside [0, {}]",
                self.dt_full
            )));
        }
        Ok(self.nodes_unchecked(tau))
    }

    /// Same as [`nodes_at`](Self::nodes_at) without the range check, so the
    /// straight lines can be extended past either end of the region.
    pub fn nodes_unchecked(&self, tau: f64) -> Vec<f64> {
        let back = self.dt_full - tau;
        self.speeds
            .iter()
            .enumerate()
            .map(|(j, nu)| self.base.node(j) - nu * back)
            .collect()
    }

    /// The region ending at `t^n + c_mu dt_full`, with the same speeds.
    pub fn substage_grid(&self, c_mu: f64) -> Result<TracebackGrid> {
        if !(0.0..=1.0).contains(&c_mu) {
            return Err(Error::OutOfRange(format!("c_mu = {c_mu}")));
        }
        Ok(TracebackGrid {
            base: self.base,
            speeds: self.speeds.clone(),
            dt_full: if c_mu == 1.0 {
                self.dt_full
            } else {
                c_mu * self.dt_full
            },
        })
    }

    /// Checks that every cell of `nodes_at(0)` keeps a positive width.
    pub fn validate_partition(&self) -> core::result::Result<(), PartitionFailure> {
        let dx = self.base.dx();
        let nodes = self.nodes_unchecked(0.0);
        let mut cells = Vec::new();
        let mut admissible = f64::INFINITY;
        for j in 0..self.base.len() {
            let closing = self.speeds[j + 1] - self.speeds[j];
            if closing > 0.0 {
                admissible = admissible.min(dx / closing);
            }
            if !(nodes[j + 1] - nodes[j] > MIN_GAP * dx) {
                cells.push(j);
            }
        }
        if cells.is_empty() {
            Ok(())
        } else {
            Err(PartitionFailure {
                cells,
                admissible_dt: admissible,
            })
        }
    }
}
