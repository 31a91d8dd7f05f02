//! Uniform background grids, cell location and CFL time steps.
//!
//! Cells are indexed from 0: cell `j` is `[a + j dx, a + (j+1) dx]`, so the
//! usual 1-based cell `I_j` of the method description is index `j - 1` here.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{ceil, fabs, floor};

/// Speeds below this are treated as zero when choosing the time step.
pub const SPEED_FLOOR: f64 = 1e-14;

/// Relative (to `dx`) tolerance used to snap points onto grid nodes.
pub const NODE_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Periodic,
    /// Zero-valued ghost cells outside the domain.
    Zero,
}

impl BoundaryCondition {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Periodic => "periodic",
            BoundaryCondition::Zero => "zero",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n_cells: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n_cells: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::InvalidGrid(format!("need a < b, got [{a}, {b}]")));
        }
        if n_cells == 0 {
            return Err(Error::InvalidGrid("n_cells must be positive".into()));
        }
        Ok(Self {
            a,
            b,
            n_cells,
            dx: (b - a) / n_cells as f64,
        })
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_cells
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n_cells == 0
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn span(&self) -> f64 {
        self.b - self.a
    }

    /// Node `x_{j+1/2}` in 1-based notation, i.e. the left edge of cell `j`.
    /// `node(n_cells)` is `b` exactly.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        if j == self.n_cells {
            self.b
        } else {
            self.a + j as f64 * self.dx
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|j| self.node(j)).collect()
    }

    #[inline]
    pub fn center(&self, j: usize) -> f64 {
        self.a + (j as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.center(j)).collect()
    }

    /// Wraps `x` into `[a, b)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let span = self.span();
        let mut y = x - floor((x - self.a) / span) * span;
        if y >= self.b {
            y -= span;
        }
        if y < self.a {
            y = self.a;
        }
        y
    }

    /// Position of `x` in cell units, snapped to the nearest integer when
    /// within [`NODE_SNAP`]. Unbounded: periodic callers unwrap themselves.
    #[inline]
    pub(crate) fn cell_coordinate(&self, x: f64) -> f64 {
        let s = (x - self.a) / self.dx;
        let r = crate::math::round(s);
        if fabs(s - r) < NODE_SNAP {
            r
        } else {
            s
        }
    }

    /// Cell containing `x`. Points on an interior node go to the left cell.
    pub fn locate_cell(&self, x: f64, bc: BoundaryCondition) -> Result<usize> {
        if !x.is_finite() {
            return Err(Error::OutOfDomain {
                x,
                a: self.a,
                b: self.b,
            });
        }
        let x = match bc {
            BoundaryCondition::Periodic => self.wrap(x),
            BoundaryCondition::Zero => {
                let tol = NODE_SNAP * self.dx;
                if x < self.a - tol || x > self.b + tol {
                    return Err(Error::OutOfDomain {
                        x,
                        a: self.a,
                        b: self.b,
                    });
                }
                x
            }
        };
        let s = self.cell_coordinate(x);
        let j = ceil(s) as i64 - 1;
        Ok(j.clamp(0, self.n_cells as i64 - 1) as usize)
    }
}

/// Cell averages on a uniform grid at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub time: f64,
}

impl CellField {
    pub fn new(grid: Grid1D, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfRange("cell averages must be finite".into()));
        }
        Ok(Self { grid, values, time })
    }

    /// `sum dx * u_j`.
    pub fn mass(&self) -> f64 {
        self.grid.dx() * self.values.iter().sum::<f64>()
    }
}

/// `dt = cfl dx / max|f'|`, with `dt = cfl dx` when the convection vanishes.
pub fn cfl_dt_1d(cfl: f64, dx: f64, max_speed: f64) -> Result<f64> {
    if !(cfl > 0.0 && dx > 0.0 && max_speed >= 0.0) {
        return Err(Error::OutOfRange(format!(
            "cfl_dt_1d(cfl={cfl}, dx={dx}, max_speed={max_speed})"
        )));
    }
    if max_speed < SPEED_FLOOR {
        Ok(cfl * dx)
    } else {
        Ok(cfl * dx / max_speed)
    }
}

/// `dt = cfl / (max|f'|/dx + max|g'|/dy)`; falls back to `cfl min(dx, dy)`.
pub fn cfl_dt_2d(cfl: f64, dx: f64, dy: f64, max_fx: f64, max_gy: f64) -> Result<f64> {
    if !(cfl > 0.0 && dx > 0.0 && dy > 0.0 && max_fx >= 0.0 && max_gy >= 0.0) {
        return Err(Error::OutOfRange(format!(
            "cfl_dt_2d(cfl={cfl}, dx={dx}, dy={dy}, max_fx={max_fx}, max_gy={max_gy})"
        )));
    }
    if max_fx < SPEED_FLOOR && max_gy < SPEED_FLOOR {
        return Ok(cfl * dx.min(dy));
    }
    Ok(cfl / (max_fx / dx + max_gy / dy))
}
