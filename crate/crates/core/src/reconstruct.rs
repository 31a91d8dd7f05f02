//! WENO-AO(5,3) reconstruction, integral remapping onto traceback cells and
//! face values on nonuniform grids.
//!
//! Polynomials are stored as monomial coefficients in the normalized local
//! coordinate `xi = (x - x_j) / dx`, `xi` in `[-1/2, 1/2]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, CellField, Grid1D};
use crate::math::{ceil, fabs, floor};

/// Slack, in cell units, allowed when evaluating at a cell edge.
const EVAL_TOL: f64 = 1e-12;

/// Smallest admissible traceback cell, relative to `dx`.
pub const MIN_CELL_WIDTH: f64 = 1e-14;

// Degree-4 polynomial matching the averages on cells -2..=2.
// Row k gives the coefficient of xi^k.
const QUARTIC: [[f64; 5]; 5] = [
    [3.0 / 640.0, -29.0 / 480.0, 1067.0 / 960.0, -29.0 / 480.0, 3.0 / 640.0],
    [5.0 / 48.0, -17.0 / 24.0, 0.0, 17.0 / 24.0, -5.0 / 48.0],
    [-1.0 / 16.0, 3.0 / 4.0, -11.0 / 8.0, 3.0 / 4.0, -1.0 / 16.0],
    [-1.0 / 12.0, 1.0 / 6.0, 0.0, -1.0 / 6.0, 1.0 / 12.0],
    [1.0 / 24.0, -1.0 / 6.0, 1.0 / 4.0, -1.0 / 6.0, 1.0 / 24.0],
];

// Degree-2 polynomials on the left, central and right three-cell stencils.
const QUAD_LEFT: [[f64; 3]; 3] = [
    [-1.0 / 24.0, 1.0 / 12.0, 23.0 / 24.0],
    [1.0 / 2.0, -2.0, 3.0 / 2.0],
    [1.0 / 2.0, -1.0, 1.0 / 2.0],
];
const QUAD_CENTER: [[f64; 3]; 3] = [
    [-1.0 / 24.0, 13.0 / 12.0, -1.0 / 24.0],
    [-1.0 / 2.0, 0.0, 1.0 / 2.0],
    [1.0 / 2.0, -1.0, 1.0 / 2.0],
];
const QUAD_RIGHT: [[f64; 3]; 3] = [
    [23.0 / 24.0, 1.0 / 12.0, -1.0 / 24.0],
    [-3.0 / 2.0, 2.0, -1.0 / 2.0],
    [1.0 / 2.0, -1.0, 1.0 / 2.0],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WenoParams {
    /// Linear weight of the degree-4 polynomial.
    pub gamma_hi: f64,
    /// Share of the central stencil among the three degree-2 polynomials.
    pub gamma_lo: f64,
    pub epsilon: f64,
    pub power: f64,
}

impl Default for WenoParams {
    fn default() -> Self {
        Self {
            gamma_hi: 0.85,
            gamma_lo: 0.85,
            epsilon: 1e-12,
            power: 2.0,
        }
    }
}

impl WenoParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |g: f64| g > 0.0 && g < 1.0;
        if !(unit(self.gamma_hi)
            && unit(self.gamma_lo)
            && self.epsilon > 0.0
            && self.power > 0.0)
        {
            return Err(Error::OutOfRange(format!("invalid WENO parameters {self:?}")));
        }
        Ok(())
    }

    /// Linear weights `(large, left, center, right)`; they sum to one.
    pub fn linear_weights(&self) -> [f64; 4] {
        let low = 1.0 - self.gamma_hi;
        let side = 0.5 * (1.0 - self.gamma_lo);
        [self.gamma_hi, low * side, low * self.gamma_lo, low * side]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionPoly {
    pub cell: usize,
    pub coeffs: [f64; 5],
}

impl ReconstructionPoly {
    #[inline]
    pub fn value(&self, xi: f64) -> f64 {
        horner(&self.coeffs, xi)
    }

    /// `int_{-1/2}^{xi} R`, in units of `dx`.
    #[inline]
    pub fn cumulative(&self, xi: f64) -> f64 {
        antiderivative(&self.coeffs, xi) - antiderivative(&self.coeffs, -0.5)
    }
}

#[inline]
fn horner(c: &[f64; 5], xi: f64) -> f64 {
    (((c[4] * xi + c[3]) * xi + c[2]) * xi + c[1]) * xi + c[0]
}

#[inline]
fn antiderivative(c: &[f64; 5], xi: f64) -> f64 {
    ((((c[4] / 5.0 * xi + c[3] / 4.0) * xi + c[2] / 3.0) * xi + c[1] / 2.0) * xi + c[0]) * xi
}

/// `int_{-1/2}^{1/2} xi^k`.
#[inline]
fn centered_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        let mut p = 1.0;
        for _ in 0..k {
            p *= 0.5;
        }
        p / (k + 1) as f64
    }
}

/// `sum_{l>=1} int (d^l p / dxi^l)^2` over the unit cell.
fn smoothness(c: &[f64], degree: usize) -> f64 {
    let mut beta = 0.0;
    let mut d = [0.0; 5];
    for l in 1..=degree {
        let len = degree + 1 - l;
        for m in 0..len {
            let mut fac = 1.0;
            for q in (m + 1)..=(m + l) {
                fac *= q as f64;
            }
            d[m] = c[m + l] * fac;
        }
        for m in 0..len {
            for n in 0..len {
                beta += d[m] * d[n] * centered_moment(m + n);
            }
        }
    }
    beta
}

#[inline]
fn quad(rows: &[[f64; 3]; 3], s: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, row) in rows.iter().enumerate() {
        out[k] = row[0] * s[0] + row[1] * s[1] + row[2] * s[2];
    }
    out
}

/// WENO-AO(5,3) polynomial for the centre cell of `stencil`
/// (`u_{j-2}, ..., u_{j+2}`). Returns monomial coefficients in `xi`.
pub fn weno_ao_53_coeffs(stencil: &[f64; 5], params: &WenoParams) -> [f64; 5] {
    let mut big = [0.0; 5];
    for (k, row) in QUARTIC.iter().enumerate() {
        big[k] = row.iter().zip(stencil).map(|(a, u)| a * u).sum();
    }
    let small = [
        quad(&QUAD_LEFT, &stencil[0..3]),
        quad(&QUAD_CENTER, &stencil[1..4]),
        quad(&QUAD_RIGHT, &stencil[2..5]),
    ];

    let beta_big = smoothness(&big, 4);
    let betas = [
        smoothness(&small[0], 2),
        smoothness(&small[1], 2),
        smoothness(&small[2], 2),
    ];
    let tau = (fabs(beta_big - betas[0]) + fabs(beta_big - betas[1]) + fabs(beta_big - betas[2]))
        / 3.0;

    let gamma = params.linear_weights();
    let weight = |g: f64, b: f64| {
        let r = tau / (b + params.epsilon);
        let z = if params.power == 2.0 {
            r * r
        } else {
            crate::math::pow(r, params.power)
        };
        g * (1.0 + z)
    };
    let mut w = [
        weight(gamma[0], beta_big),
        weight(gamma[1], betas[0]),
        weight(gamma[2], betas[1]),
        weight(gamma[3], betas[2]),
    ];
    let total: f64 = w.iter().sum();
    for wk in w.iter_mut() {
        *wk /= total;
    }

    let scale = w[0] / gamma[0];
    let mut out = [0.0; 5];
    for k in 0..5 {
        out[k] = scale * big[k];
    }
    for (s, p) in small.iter().enumerate() {
        let lin = w[s + 1] - scale * gamma[s + 1];
        for k in 0..3 {
            out[k] += lin * p[k];
        }
    }
    out
}

pub fn weno_ao_53(stencil: &[f64; 5], params: &WenoParams) -> ReconstructionPoly {
    ReconstructionPoly {
        cell: 2,
        coeffs: weno_ao_53_coeffs(stencil, params),
    }
}

fn check_in_cell(poly: &ReconstructionPoly, grid: &Grid1D, x: f64) -> Result<f64> {
    if poly.cell >= grid.len() {
        return Err(Error::OutOfRange(format!(
            "cell {} outside grid of {} cells",
            poly.cell,
            grid.len()
        )));
    }
    let xi = (x - grid.center(poly.cell)) / grid.dx();
    if !(fabs(xi) <= 0.5 + EVAL_TOL) {
        return Err(Error::OutsideCell { x, cell: poly.cell });
    }
    Ok(xi.clamp(-0.5, 0.5))
}

pub fn poly_eval(poly: &ReconstructionPoly, grid: &Grid1D, x: f64) -> Result<f64> {
    let xi = check_in_cell(poly, grid, x)?;
    Ok(poly.value(xi))
}

pub fn poly_partial_integral(
    poly: &ReconstructionPoly,
    grid: &Grid1D,
    x_lo: f64,
    x_hi: f64,
) -> Result<f64> {
    if !(x_lo <= x_hi) {
        return Err(Error::InvalidBounds {
            lo: x_lo,
            hi: x_hi,
            cell: poly.cell,
        });
    }
    let lo = check_in_cell(poly, grid, x_lo)?;
    let hi = check_in_cell(poly, grid, x_hi)?;
    if x_lo == x_hi {
        return Ok(0.0);
    }
    Ok(grid.dx() * (antiderivative(&poly.coeffs, hi) - antiderivative(&poly.coeffs, lo)))
}

/// The five-cell stencil around `j`, with wrap-around or zero ghosts.
#[inline]
pub fn stencil_at(values: &[f64], j: usize, bc: BoundaryCondition) -> [f64; 5] {
    let n = values.len() as i64;
    let mut s = [0.0; 5];
    for (o, slot) in s.iter_mut().enumerate() {
        let k = j as i64 + o as i64 - 2;
        *slot = match bc {
            BoundaryCondition::Periodic => values[k.rem_euclid(n) as usize],
            BoundaryCondition::Zero => {
                if (0..n).contains(&k) {
                    values[k as usize]
                } else {
                    0.0
                }
            }
        };
    }
    s
}

/// WENO-AO polynomials for every cell of a uniform (or auxiliary uniform) grid.
pub fn reconstruct_all(values: &[f64], bc: BoundaryCondition, params: &WenoParams) -> Vec<[f64; 5]> {
    (0..values.len())
        .map(|j| weno_ao_53_coeffs(&stencil_at(values, j, bc), params))
        .collect()
}

/// Cached reconstruction of a uniform cell field, used to integrate it over
/// arbitrary target cells.
#[derive(Debug, Clone)]
pub struct UniformReconstruction {
    grid: Grid1D,
    bc: BoundaryCondition,
    values: Vec<f64>,
    polys: Vec<[f64; 5]>,
}

impl UniformReconstruction {
    pub fn new(grid: Grid1D, values: &[f64], bc: BoundaryCondition, params: &WenoParams) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid,
            bc,
            values: values.to_vec(),
            polys: reconstruct_all(values, bc, params),
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn poly(&self, cell: usize) -> ReconstructionPoly {
        ReconstructionPoly {
            cell,
            coeffs: self.polys[cell],
        }
    }

    /// Maps an unwrapped cell index to storage; `None` for zero ghosts.
    #[inline]
    fn resolve(&self, k: i64) -> Option<usize> {
        let n = self.grid.len() as i64;
        match self.bc {
            BoundaryCondition::Periodic => Some(k.rem_euclid(n) as usize),
            BoundaryCondition::Zero => (0..n).contains(&k).then_some(k as usize),
        }
    }

    #[inline]
    fn full(&self, k: i64) -> f64 {
        self.resolve(k).map_or(0.0, |c| self.values[c])
    }

    /// `int_{-1/2}^{xi}` of cell `k` in units of `dx`.
    #[inline]
    fn head(&self, k: i64, xi: f64) -> f64 {
        self.resolve(k).map_or(0.0, |c| {
            antiderivative(&self.polys[c], xi) - antiderivative(&self.polys[c], -0.5)
        })
    }

    /// Integral over `[x_lo, x_hi]` together with the averaged value when the
    /// interval is exactly one background cell.
    fn integrate(&self, x_lo: f64, x_hi: f64) -> (f64, Option<f64>) {
        let dx = self.grid.dx();
        let sl = self.grid.cell_coordinate(x_lo);
        let sr = self.grid.cell_coordinate(x_hi);
        let kl = floor(sl) as i64;
        let kr = ceil(sr) as i64 - 1;
        let xi_l = sl - kl as f64 - 0.5;
        let xi_r = sr - kr as f64 - 0.5;
        if kl >= kr {
            // Both ends in one cell.
            if sl == kl as f64 && sr == (kl + 1) as f64 {
                let v = self.full(kl);
                return (dx * v, Some(v));
            }
            let k = kl;
            return (dx * (self.head(k, xi_r) - self.head(k, xi_l)), None);
        }
        let left = if sl == kl as f64 {
            self.full(kl)
        } else {
            self.full(kl) - self.head(kl, xi_l)
        };
        let right = if sr == (kr + 1) as f64 {
            self.full(kr)
        } else {
            self.head(kr, xi_r)
        };
        let mut middle = 0.0;
        for k in (kl + 1)..kr {
            middle += self.full(k);
        }
        (dx * (left + middle + right), None)
    }

    fn check_nodes(&self, nodes: &[f64]) -> Result<()> {
        let n = self.grid.len();
        if nodes.len() != n + 1 {
            return Err(Error::LengthMismatch {
                expected: n + 1,
                got: nodes.len(),
            });
        }
        if self.bc == BoundaryCondition::Periodic {
            let span = nodes[n] - nodes[0];
            if fabs(span - self.grid.span()) > 1e-10 * self.grid.span().max(1.0) {
                return Err(Error::SpanMismatch {
                    span,
                    domain: self.grid.span(),
                });
            }
        }
        let min_width = MIN_CELL_WIDTH * self.grid.dx();
        for j in 0..n {
            let w = nodes[j + 1] - nodes[j];
            if !(w > 0.0) {
                return Err(Error::NonIncreasingNodes(j));
            }
            if w < min_width {
                return Err(Error::DegenerateCell(j));
            }
        }
        Ok(())
    }

    /// Integrals `int_{x_j}^{x_{j+1}} R` over consecutive target cells.
    pub fn cell_integrals(&self, nodes: &[f64]) -> Result<Vec<f64>> {
        self.check_nodes(nodes)?;
        Ok(nodes
            .windows(2)
            .map(|w| self.integrate(w[0], w[1]).0)
            .collect())
    }

    /// Averages over consecutive target cells.
    pub fn remap_to(&self, nodes: &[f64]) -> Result<Vec<f64>> {
        self.check_nodes(nodes)?;
        Ok(nodes
            .windows(2)
            .map(|w| {
                let (integral, exact) = self.integrate(w[0], w[1]);
                exact.unwrap_or(integral / (w[1] - w[0]))
            })
            .collect())
    }
}

/// Averages of the reconstructed uniform field over the target cells.
pub fn remap_to_cells(
    uniform: &CellField,
    target_nodes: &[f64],
    bc: BoundaryCondition,
    params: &WenoParams,
) -> Result<Vec<f64>> {
    UniformReconstruction::new(uniform.grid, &uniform.values, bc, params)?.remap_to(target_nodes)
}

/// Left/right limits `(u-, u+)` at every face `0..=N` of a traceback grid.
///
/// The nonuniform averages are reconstructed as if they lived on a uniform
/// grid; face `j` takes the right edge of cell `j-1` and the left edge of
/// cell `j`.
pub fn face_values_nonuniform(
    nonuniform_avgs: &[f64],
    traceback_nodes: &[f64],
    bc: BoundaryCondition,
    params: &WenoParams,
) -> Result<Vec<(f64, f64)>> {
    let n = nonuniform_avgs.len();
    if traceback_nodes.len() != n + 1 {
        return Err(Error::LengthMismatch {
            expected: n + 1,
            got: traceback_nodes.len(),
        });
    }
    for j in 0..n {
        if !(traceback_nodes[j + 1] > traceback_nodes[j]) {
            return Err(Error::NonIncreasingNodes(j));
        }
    }
    Ok(face_values_uniform(nonuniform_avgs, bc, params))
}

pub(crate) fn face_values_uniform(
    avgs: &[f64],
    bc: BoundaryCondition,
    params: &WenoParams,
) -> Vec<(f64, f64)> {
    let n = avgs.len();
    let mut right_edge = vec![0.0; n];
    let mut left_edge = vec![0.0; n];
    for j in 0..n {
        let c = weno_ao_53_coeffs(&stencil_at(avgs, j, bc), params);
        right_edge[j] = horner(&c, 0.5);
        left_edge[j] = horner(&c, -0.5);
    }
    // Ghost cells for zero bc reconstruct from zero-padded stencils too.
    let ghost = |j: i64| -> f64 {
        let mut s = [0.0; 5];
        for (o, slot) in s.iter_mut().enumerate() {
            let k = j + o as i64 - 2;
            if (0..n as i64).contains(&k) {
                *slot = avgs[k as usize];
            }
        }
        let c = weno_ao_53_coeffs(&s, params);
        horner(&c, if j < 0 { 0.5 } else { -0.5 })
    };
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let minus = if j == 0 {
            match bc {
                BoundaryCondition::Periodic => right_edge[n - 1],
                BoundaryCondition::Zero => ghost(-1),
            }
        } else {
            right_edge[j - 1]
        };
        let plus = if j == n {
            match bc {
                BoundaryCondition::Periodic => left_edge[0],
                BoundaryCondition::Zero => ghost(n as i64),
            }
        } else {
            left_edge[j]
        };
        out.push((minus, plus));
    }
    out
}
