//! Dimensional splitting for 2D problems.
//!
//! Cell averages are turned into interval averages along Gauss-Legendre
//! lines, every line is advanced with the 1D stepper, and the lines are
//! recombined into cell averages by the same quadrature.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::diffusion_imex::SolverCache;
use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, CellField, Grid1D};
use crate::math::{cbrt, cos, fabs, PI};
use crate::model::LineModel;
use crate::reconstruct::{stencil_at, weno_ao_53_coeffs, WenoParams};
use crate::stepper::{step, StepOptions, TimeScheme};

/// Nodes and weights of the `order`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=10).contains(&order) {
        return Err(Error::Unsupported(format!("Gauss-Legendre order {order}")));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if fabs(dx) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    // Enforce exact symmetry.
    for i in 0..n / 2 {
        let x = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok((nodes, weights))
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Cell averages on a uniform 2D grid, stored as `values[i * ny + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub grid_x: Grid1D,
    pub grid_y: Grid1D,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field2D {
    pub fn new(grid_x: Grid1D, grid_y: Grid1D, values: Vec<f64>, time: f64) -> Result<Self> {
        let want = grid_x.len() * grid_y.len();
        if values.len() != want {
            return Err(Error::LengthMismatch {
                expected: want,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfRange("cell averages must be finite".into()));
        }
        Ok(Self {
            grid_x,
            grid_y,
            values,
            time,
        })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.grid_x.len()
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.grid_y.len()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny() + j]
    }

    pub fn mass(&self) -> f64 {
        self.grid_x.dx() * self.grid_y.dx() * self.values.iter().sum::<f64>()
    }

    /// Swaps the roles of x and y.
    pub fn transpose(&self) -> Field2D {
        let (nx, ny) = (self.nx(), self.ny());
        let mut v = vec![0.0; nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                v[j * nx + i] = self.values[i * ny + j];
            }
        }
        Field2D {
            grid_x: self.grid_y,
            grid_y: self.grid_x,
            values: v,
            time: self.time,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    X,
    Y,
}

/// Interval averages along lines parallel to `direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSet {
    pub direction: Direction,
    pub gauss_order: usize,
    pub weights: Vec<f64>,
    /// Transverse coordinate of each line; line `p * L + l` sits at the
    /// `l`-th Gauss node of transverse cell `p`.
    pub positions: Vec<f64>,
    pub lines: Vec<Vec<f64>>,
    pub grid_parallel: Grid1D,
    pub grid_transverse: Grid1D,
}

/// Interval averages along `direction` at `L` Gauss nodes per transverse cell.
pub fn cells_to_lines(
    field: &Field2D,
    direction: Direction,
    gauss_order: usize,
    bc: BoundaryCondition,
    weno: &WenoParams,
) -> Result<LineSet> {
    let (nodes, weights) = gauss_legendre(gauss_order)?;
    let ny = field.ny();
    let (gpar, gtr) = match direction {
        Direction::X => (field.grid_x, field.grid_y),
        Direction::Y => (field.grid_y, field.grid_x),
    };
    let (npar, ntr) = (gpar.len(), gtr.len());
    let l = gauss_order;
    let mut lines = vec![vec![0.0; npar]; ntr * l];
    let mut profile = vec![0.0; ntr];
    for q in 0..npar {
        for (p, slot) in profile.iter_mut().enumerate() {
            *slot = match direction {
                Direction::X => field.values[q * ny + p],
                Direction::Y => field.values[p * ny + q],
            };
        }
        for p in 0..ntr {
            let c = weno_ao_53_coeffs(&stencil_at(&profile, p, bc), weno);
            for (k, xi) in nodes.iter().enumerate() {
                let z = 0.5 * xi;
                lines[p * l + k][q] = (((c[4] * z + c[3]) * z + c[2]) * z + c[1]) * z + c[0];
            }
        }
    }
    let positions = (0..ntr * l)
        .map(|idx| gtr.center(idx / l) + 0.5 * gtr.dx() * nodes[idx % l])
        .collect();
    Ok(LineSet {
        direction,
        gauss_order,
        weights,
        positions,
        lines,
        grid_parallel: gpar,
        grid_transverse: gtr,
    })
}

/// `u_{i,j} = 1/2 sum_l w_l psi(y_l)` back on the 2D grid (values only).
pub fn lines_to_cells(lines: &LineSet) -> Vec<f64> {
    let npar = lines.grid_parallel.len();
    let ntr = lines.grid_transverse.len();
    let l = lines.gauss_order;
    let mut out = vec![0.0; npar * ntr];
    for p in 0..ntr {
        for q in 0..npar {
            let mut s = 0.0;
            for k in 0..l {
                s += lines.weights[k] * lines.lines[p * l + k][q];
            }
            let v = 0.5 * s;
            match lines.direction {
                Direction::X => out[q * ntr + p] = v,
                Direction::Y => out[p * npar + q] = v,
            }
        }
    }
    out
}

/// A scalar 2D model `u_t + f(x,y,t,u)_x + g(x,y,t,u)_y = eps lap u + s`.
pub trait PlaneModel: Sync {
    fn flux_x(&self, x: f64, y: f64, t: f64, u: f64) -> f64;
    fn dflux_x(&self, x: f64, y: f64, t: f64, u: f64) -> f64;
    fn flux_y(&self, x: f64, y: f64, t: f64, u: f64) -> f64;
    fn dflux_y(&self, x: f64, y: f64, t: f64, u: f64) -> f64;
    fn epsilon(&self) -> f64 {
        0.0
    }
    fn has_source(&self) -> bool {
        false
    }
    fn source(&self, _x: f64, _y: f64, _t: f64) -> f64 {
        0.0
    }
}

/// One line of a plane model at a fixed transverse coordinate. The source is
/// split evenly between the two directions.
pub struct LineOf<'a, P: ?Sized> {
    pub model: &'a P,
    pub direction: Direction,
    pub transverse: f64,
}

impl<P: PlaneModel + ?Sized> LineModel for LineOf<'_, P> {
    fn flux(&self, s: f64, t: f64, u: f64) -> f64 {
        match self.direction {
            Direction::X => self.model.flux_x(s, self.transverse, t, u),
            Direction::Y => self.model.flux_y(self.transverse, s, t, u),
        }
    }
    fn flux_deriv(&self, s: f64, t: f64, u: f64) -> f64 {
        match self.direction {
            Direction::X => self.model.dflux_x(s, self.transverse, t, u),
            Direction::Y => self.model.dflux_y(self.transverse, s, t, u),
        }
    }
    fn epsilon(&self) -> f64 {
        self.model.epsilon()
    }
    fn has_source(&self) -> bool {
        self.model.has_source()
    }
    fn source(&self, s: f64, t: f64) -> f64 {
        0.5 * match self.direction {
            Direction::X => self.model.source(s, self.transverse, t),
            Direction::Y => self.model.source(self.transverse, s, t),
        }
    }
}

/// Settings shared by every sweep of a split step.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitConfig {
    pub scheme: TimeScheme,
    pub opts: StepOptions,
    pub bc: BoundaryCondition,
    pub gauss_order: usize,
}

fn advance_line<P: PlaneModel + ?Sized>(
    model: &P,
    direction: Direction,
    position: f64,
    grid: Grid1D,
    values: &[f64],
    time: f64,
    dt: f64,
    cfg: &SplitConfig,
) -> Result<Vec<f64>> {
    let line = LineOf {
        model,
        direction,
        transverse: position,
    };
    let field = CellField {
        grid,
        values: values.to_vec(),
        time,
    };
    let mut cache = SolverCache::default();
    Ok(step(&field, dt, &line, cfg.bc, &cfg.scheme, &cfg.opts, &mut cache)?.values)
}

/// Advances every line along `direction` by `dt`; the field's time is left
/// untouched so the caller can place sweeps freely.
pub fn sweep<P: PlaneModel + ?Sized>(
    field: &Field2D,
    direction: Direction,
    dt: f64,
    model: &P,
    cfg: &SplitConfig,
) -> Result<Field2D> {
    let mut set = cells_to_lines(field, direction, cfg.gauss_order, cfg.bc, &cfg.opts.weno)?;
    let grid = set.grid_parallel;
    let time = field.time;
    let jobs: Vec<(f64, &Vec<f64>)> = set.positions.iter().cloned().zip(set.lines.iter()).collect();

    #[cfg(feature = "parallel")]
    let advanced: Vec<Result<Vec<f64>>> = {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|(pos, v)| advance_line(model, direction, *pos, grid, v, time, dt, cfg))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let advanced: Vec<Result<Vec<f64>>> = jobs
        .iter()
        .map(|(pos, v)| advance_line(model, direction, *pos, grid, v, time, dt, cfg))
        .collect();

    let mut lines = Vec::with_capacity(advanced.len());
    for r in advanced {
        lines.push(r?);
    }
    set.lines = lines;
    Field2D::new(field.grid_x, field.grid_y, lines_to_cells(&set), field.time)
}

/// Strang splitting: x over `dt/2`, y over `dt`, x over `dt/2`.
///
/// Each direction keeps its own clock, so time-dependent fluxes in y are
/// evaluated on `[t, t + dt]`.
pub fn strang_step<P: PlaneModel + ?Sized>(
    field: &Field2D,
    dt: f64,
    model: &P,
    cfg: &SplitConfig,
) -> Result<Field2D> {
    let t0 = field.time;
    let mut f = sweep(field, Direction::X, 0.5 * dt, model, cfg)?;
    f.time = t0;
    let mut f = sweep(&f, Direction::Y, dt, model, cfg)?;
    f.time = t0 + 0.5 * dt;
    let mut f = sweep(&f, Direction::X, 0.5 * dt, model, cfg)?;
    f.time = t0 + dt;
    Ok(f)
}

/// `gamma_1 = 1/(2 - 2^{1/3})`, `gamma_2 = -2^{1/3}/(2 - 2^{1/3})`.
pub fn yoshida_gammas() -> (f64, f64) {
    let c = cbrt(2.0);
    (1.0 / (2.0 - c), -c / (2.0 - c))
}

/// The seven-sweep fourth-order splitting
/// `X(g1/2) Y(g1) X((g1+g2)/2) Y(g2) X((g1+g2)/2) Y(g1) X(g1/2)`.
pub fn fourth_order_split_step<P: PlaneModel + ?Sized>(
    field: &Field2D,
    dt: f64,
    model: &P,
    cfg: &SplitConfig,
) -> Result<Field2D> {
    if model.epsilon() != 0.0 {
        return Err(Error::Unsupported(
            "fourth-order splitting takes backward steps and is limited to pure convection".into(),
        ));
    }
    let (g1, g2) = yoshida_gammas();
    let seq = [
        (Direction::X, 0.5 * g1),
        (Direction::Y, g1),
        (Direction::X, 0.5 * (g1 + g2)),
        (Direction::Y, g2),
        (Direction::X, 0.5 * (g1 + g2)),
        (Direction::Y, g1),
        (Direction::X, 0.5 * g1),
    ];
    let t0 = field.time;
    let mut tx = 0.0;
    let mut ty = 0.0;
    let mut f = field.clone();
    for (dir, frac) in seq {
        let h = frac * dt;
        f.time = t0 + match dir {
            Direction::X => tx,
            Direction::Y => ty,
        };
        f = sweep(&f, dir, h, model, cfg)?;
        match dir {
            Direction::X => tx += h,
            Direction::Y => ty += h,
        }
    }
    f.time = t0 + dt;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gauss_examples() {
        let (x, w) = gauss_legendre(1).unwrap();
        assert_eq!((x[0], w[0]), (0.0, 2.0));
        let (x, w) = gauss_legendre(3).unwrap();
        let r = (0.6f64).sqrt();
        assert!((x[0] + r).abs() < 1e-15 && x[1] == 0.0 && (x[2] - r).abs() < 1e-15);
        assert!((w[0] - 5.0 / 9.0).abs() < 1e-15 && (w[1] - 8.0 / 9.0).abs() < 1e-15);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((q - 0.4).abs() < 1e-15);
        assert!(gauss_legendre(0).is_err() && gauss_legendre(11).is_err());
    }

    #[test]
    fn gammas() {
        let (g1, g2) = yoshida_gammas();
        assert!((g1 - 1.351207191959658).abs() < 1e-14);
        assert!((g2 + 1.702414383919315).abs() < 1e-14);
        assert!((2.0 * g1 + g2 - 1.0).abs() < 1e-14);
        assert!((0.5 * g1 + 0.5 * (g1 + g2) + 0.5 * (g1 + g2) + 0.5 * g1 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_in_y_lines_are_profiles() {
        let gx = Grid1D::new(0.0, 1.0, 8).unwrap();
        let gy = Grid1D::new(0.0, 2.0, 6).unwrap();
        let vals: Vec<f64> = (0..48).map(|k| (k / 6) as f64 * 0.3 - 1.0).collect();
        let f = Field2D::new(gx, gy, vals, 0.0).unwrap();
        let set = cells_to_lines(&f, Direction::X, 3, BoundaryCondition::Periodic, &WenoParams::default()).unwrap();
        for line in &set.lines {
            for i in 0..8 {
                assert!((line[i] - f.at(i, 0)).abs() < 1e-14);
            }
        }
        let back = lines_to_cells(&set);
        for (a, b) in back.iter().zip(&f.values) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn gauss_exact_on_monomials(order in 1usize..=10) {
            let (x, w) = gauss_legendre(order).unwrap();
            prop_assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for k in 0..(2 * order) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                prop_assert!((q - exact).abs() < 1e-14, "order {} k {} q {} exact {}", order, k, q, exact);
            }
        }

        #[test]
        fn transpose_twice_is_identity(vals in proptest::collection::vec(-1.0f64..1.0, 20)) {
            let f = Field2D::new(Grid1D::new(0.0, 1.0, 4).unwrap(), Grid1D::new(0.0, 1.0, 5).unwrap(), vals, 0.0).unwrap();
            prop_assert_eq!(f.transpose().transpose(), f);
        }
    }
}
