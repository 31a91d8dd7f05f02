//! Eulerian-Lagrangian Runge-Kutta finite volume (EL-RK-FV) solvers.
//!
//! The scheme integrates a 1D convection(-diffusion) equation over space-time
//! cells bounded by linear approximate characteristics, then evolves the
//! resulting moving-cell integrals with ordinary method-of-lines Runge-Kutta
//! (explicit) or IMEX Runge-Kutta (with an implicit fourth-order diffusion
//! stencil) time integrators. Cell averages are remapped between the uniform
//! background grid and the nonuniform traceback grids with WENO-AO(5,3)
//! reconstruction. Two-dimensional problems are handled by dimensional
//! splitting (Strang or the fourth-order Forest-Ruth/Yoshida sequence).
//!
//! The crate is `no_std` and only needs `alloc`. Enabling the `parallel`
//! feature runs the independent line sweeps of the 2D splitting on rayon.
//!
//! Module map:
//! - [`grid`]: uniform grids, cell location, time-step selection
//! - [`reconstruct`]: WENO-AO(5,3), integral remapping, face values
//! - [`characteristics`]: Rankine-Hugoniot speeds and traceback grids
//! - [`convection`]: modified Lax-Friedrichs flux and explicit EL-RK steps
//! - [`diffusion_imex`]: five-point diffusion stencil, banded solves, IMEX steps
//! - [`multidim`]: Gauss-Legendre line averages and dimensional splitting
//! - [`problems`]: the compiled-in problem registry and kinetic diagnostics
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod characteristics;
pub mod convection;
pub mod diffusion_imex;
pub mod error;
pub mod grid;
mod math;
pub mod model;
pub mod multidim;
pub mod problems;
pub mod reconstruct;
pub mod stepper;

pub use error::{Error, Result};
pub use grid::{BoundaryCondition, CellField, Grid1D};
pub use model::LineModel;
pub use reconstruct::WenoParams;
pub use stepper::{StepOptions, TimeScheme};
