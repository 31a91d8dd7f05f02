//! Compiled-in test problems, Maxwellians and kinetic moment diagnostics.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, CellField, Grid1D};
use crate::math::{cos, exp, fabs, log, sin, sqrt, PI};
use crate::model::LineModel;
use crate::multidim::{gauss_legendre, Field2D, PlaneModel};

pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type Fn3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type Fn4 = Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;

/// Every name accepted by [`registry_get`].
pub const PROBLEM_NAMES: [&str; 19] = [
    "transport-1d-const",
    "transport-1d-varx",
    "transport-1d-vart",
    "transport-2d-const",
    "rigid-body",
    "rigid-body-box",
    "swirling",
    "swirling-disc",
    "cd-1d-const",
    "cd-1d-var",
    "burgers-1d-viscous",
    "fokker-planck-0d1v",
    "cd-2d-const",
    "rigid-body-diffusion",
    "swirling-diffusion",
    "burgers-2d-viscous",
    "fokker-planck-0d2v",
    "fokker-planck-0d2v-bimaxwellian",
    "fokker-planck-0d1v-bimaxwellian",
];

/// Gas constant of the kinetic examples.
pub const GAS_CONSTANT: f64 = 1.0 / 6.0;

/// Parameters of the kinetic equilibrium. `v_bar[1]` is ignored in 1V.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellianParams {
    pub n: f64,
    pub v_bar: [f64; 2],
    pub r: f64,
    pub t: f64,
}

impl MaxwellianParams {
    pub fn new(n: f64, v_bar: [f64; 2], r: f64, t: f64) -> Result<Self> {
        if !(n > 0.0 && t > 0.0 && r > 0.0) {
            return Err(Error::OutOfRange(format!("Maxwellian n = {n}, R = {r}, T = {t}")));
        }
        Ok(Self { n, v_bar, r, t })
    }

    /// `n = pi`, zero drift, `T = 3`, so `RT = 1/2` and `v_th = 1`.
    pub fn reference() -> Self {
        Self {
            n: PI,
            v_bar: [0.0, 0.0],
            r: GAS_CONSTANT,
            t: 3.0,
        }
    }

    pub fn thermal_velocity(&self) -> f64 {
        sqrt(2.0 * self.r * self.t)
    }

    pub fn diffusion(&self) -> f64 {
        self.r * self.t
    }

    pub fn eval_1v(&self, v: f64) -> f64 {
        let rt = self.r * self.t;
        let d = v - self.v_bar[0];
        self.n / sqrt(2.0 * PI * rt) * exp(-d * d / (2.0 * rt))
    }

    pub fn eval_2v(&self, vx: f64, vy: f64) -> f64 {
        let rt = self.r * self.t;
        let dx = vx - self.v_bar[0];
        let dy = vy - self.v_bar[1];
        self.n / (2.0 * PI * rt) * exp(-(dx * dx + dy * dy) / (2.0 * rt))
    }
}

/// A point in velocity space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Velocity {
    V1(f64),
    V2(f64, f64),
}

pub fn maxwellian(params: &MaxwellianParams, v: Velocity) -> f64 {
    match v {
        Velocity::V1(v) => params.eval_1v(v),
        Velocity::V2(vx, vy) => params.eval_2v(vx, vy),
    }
}

/// The two drifting Maxwellians whose sum has `n = pi`, zero drift, `T = 3`.
pub fn bimaxwellian_components() -> [MaxwellianParams; 2] {
    [
        MaxwellianParams {
            n: 1.990964530353041,
            v_bar: [0.4979792385268875, 0.0],
            r: GAS_CONSTANT,
            t: 2.46518981703837,
        },
        MaxwellianParams {
            n: 1.150628123236752,
            v_bar: [-0.8616676237412346, 0.0],
            r: GAS_CONSTANT,
            t: 0.4107062104302872,
        },
    ]
}

/// Density, bulk velocity and temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: f64,
    pub v_bar: [f64; 2],
    pub t: f64,
}

/// Midpoint-rule moments of a 1V distribution: `T = 1/(R n) sum dv (v - v_bar)^2 f`.
pub fn macro_parameters_1v(field: &CellField, r: f64) -> Result<Moments> {
    let g = &field.grid;
    let dv = g.dx();
    let n: f64 = field.values.iter().sum::<f64>() * dv;
    if !(n > 0.0) {
        return Err(Error::DegenerateDistribution(n));
    }
    let mom: f64 = field
        .values
        .iter()
        .enumerate()
        .map(|(j, f)| g.center(j) * f)
        .sum::<f64>()
        * dv;
    let vb = mom / n;
    let e: f64 = field
        .values
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let d = g.center(j) - vb;
            d * d * f
        })
        .sum::<f64>()
        * dv;
    Ok(Moments {
        n,
        v_bar: [vb, 0.0],
        t: e / (r * n),
    })
}

/// Midpoint-rule moments of a 2V distribution: `T = 1/(2 R n) sum |v - v_bar|^2 f dv`.
pub fn macro_parameters_2v(field: &Field2D, r: f64) -> Result<Moments> {
    let (gx, gy) = (field.grid_x, field.grid_y);
    let area = gx.dx() * gy.dx();
    let (nx, ny) = (field.nx(), field.ny());
    let mut n = 0.0;
    let mut px = 0.0;
    let mut py = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            let f = field.values[i * ny + j];
            n += f;
            px += gx.center(i) * f;
            py += gy.center(j) * f;
        }
    }
    n *= area;
    if !(n > 0.0) {
        return Err(Error::DegenerateDistribution(n));
    }
    let vb = [px * area / n, py * area / n];
    let mut e = 0.0;
    for i in 0..nx {
        let dx = gx.center(i) - vb[0];
        for j in 0..ny {
            let dy = gy.center(j) - vb[1];
            e += (dx * dx + dy * dy) * field.values[i * ny + j];
        }
    }
    Ok(Moments {
        n,
        v_bar: vb,
        t: e * area / (2.0 * r * n),
    })
}

/// Fourier coefficients of the Cole-Hopf transform for the viscous Burgers
/// example with `u0 = 0.2 sin(pi x)` on `[0, 2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BurgersSeries {
    pub epsilon: f64,
    pub coeffs: Vec<f64>,
}

impl BurgersSeries {
    /// `c_0, ..., c_{n_terms}`.
    pub fn new(epsilon: f64, n_terms: usize) -> Result<Self> {
        if n_terms == 0 || !(epsilon > 0.0) {
            return Err(Error::OutOfRange(format!(
                "Burgers series with eps = {epsilon}, {n_terms} terms"
            )));
        }
        let kappa = 1.0 / (10.0 * PI * epsilon);
        // The integrand is smooth and periodic in theta = pi x, so the
        // trapezoid rule over a full period converges geometrically.
        const M: usize = 512;
        let coeffs = (0..=n_terms)
            .map(|k| {
                let mut s = 0.0;
                for m in 0..M {
                    let th = 2.0 * PI * m as f64 / M as f64;
                    s += exp(kappa * (cos(th) - 1.0)) * cos(k as f64 * th);
                }
                let avg = s / M as f64;
                if k == 0 {
                    avg
                } else {
                    2.0 * avg
                }
            })
            .collect();
        Ok(Self { epsilon, coeffs })
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let eps = self.epsilon;
        let mut num = 0.0;
        let mut den = self.coeffs[0];
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            let kf = k as f64;
            let decay = c * exp(-kf * kf * PI * PI * eps * t);
            num += decay * kf * sin(kf * PI * x);
            den += decay * cos(kf * PI * x);
        }
        2.0 * eps * PI * num / den
    }
}

pub fn burgers_exact(x: f64, t: f64, epsilon: f64, n_terms: usize) -> Result<f64> {
    Ok(BurgersSeries::new(epsilon, n_terms)?.eval(x, t))
}

/// Exact solution data of a 2D problem.
#[derive(Clone)]
pub enum Exact2D {
    Closed(Fn3),
    /// The flow reverses and the solution returns to its initial state at
    /// the problem's final time.
    InitialAtFinal,
}

#[derive(Clone)]
pub struct Problem1D {
    pub name: String,
    pub domain: (f64, f64),
    pub bc: BoundaryCondition,
    pub epsilon: f64,
    /// `f(x, t, u)`.
    pub flux: Fn3,
    pub dflux: Fn3,
    /// `g(x, t)`.
    pub source: Option<Fn2>,
    pub initial: Fn1,
    /// `u(x, t)`.
    pub exact: Option<Fn2>,
    pub final_time: f64,
    pub default_scheme: &'static str,
    pub equilibrium: Option<MaxwellianParams>,
}

impl LineModel for Problem1D {
    fn flux(&self, x: f64, t: f64, u: f64) -> f64 {
        (self.flux)(x, t, u)
    }
    fn flux_deriv(&self, x: f64, t: f64, u: f64) -> f64 {
        (self.dflux)(x, t, u)
    }
    fn epsilon(&self) -> f64 {
        self.epsilon
    }
    fn has_source(&self) -> bool {
        self.source.is_some()
    }
    fn source(&self, x: f64, t: f64) -> f64 {
        self.source.as_ref().map_or(0.0, |g| g(x, t))
    }
}

impl Problem1D {
    pub fn grid(&self, n: usize) -> Result<Grid1D> {
        Grid1D::new(self.domain.0, self.domain.1, n)
    }

    pub fn initial_field(&self, n: usize) -> Result<CellField> {
        let g = self.grid(n)?;
        let init = self.initial.clone();
        CellField::new(g, cell_averages_1d(&g, |x| init(x)), 0.0)
    }

    pub fn exact_averages(&self, grid: &Grid1D, t: f64) -> Option<Vec<f64>> {
        let ex = self.exact.as_ref()?;
        Some(cell_averages_1d(grid, |x| ex(x, t)))
    }

    /// Largest `|f'|` over the cell centres for the given averages.
    pub fn max_speed(&self, field: &CellField) -> f64 {
        field
            .values
            .iter()
            .enumerate()
            .map(|(j, u)| fabs((self.dflux)(field.grid.center(j), field.time, *u)))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone)]
pub struct Problem2D {
    pub name: String,
    pub domain_x: (f64, f64),
    pub domain_y: (f64, f64),
    pub bc: BoundaryCondition,
    pub epsilon: f64,
    /// `f(x, y, t, u)`.
    pub flux_x: Fn4,
    pub dflux_x: Fn4,
    pub flux_y: Fn4,
    pub dflux_y: Fn4,
    /// `g(x, y, t)`.
    pub source: Option<Fn3>,
    pub initial: Fn2,
    pub exact: Option<Exact2D>,
    pub final_time: f64,
    pub default_scheme: &'static str,
    pub equilibrium: Option<MaxwellianParams>,
}

impl PlaneModel for Problem2D {
    fn flux_x(&self, x: f64, y: f64, t: f64, u: f64) -> f64 {
        (self.flux_x)(x, y, t, u)
    }
    fn dflux_x(&self, x: f64, y: f64, t: f64, u: f64) -> f64 {
        (self.dflux_x)(x, y, t, u)
    }
    fn flux_y(&self, x: f64, y: f64, t: f64, u: f64) -> f64 {
        (self.flux_y)(x, y, t, u)
    }
    fn dflux_y(&self, x: f64, y: f64, t: f64, u: f64) -> f64 {
        (self.dflux_y)(x, y, t, u)
    }
    fn epsilon(&self) -> f64 {
        self.epsilon
    }
    fn has_source(&self) -> bool {
        self.source.is_some()
    }
    fn source(&self, x: f64, y: f64, t: f64) -> f64 {
        self.source.as_ref().map_or(0.0, |g| g(x, y, t))
    }
}

impl Problem2D {
    pub fn grids(&self, nx: usize, ny: usize) -> Result<(Grid1D, Grid1D)> {
        Ok((
            Grid1D::new(self.domain_x.0, self.domain_x.1, nx)?,
            Grid1D::new(self.domain_y.0, self.domain_y.1, ny)?,
        ))
    }

    pub fn initial_field(&self, nx: usize, ny: usize) -> Result<Field2D> {
        let (gx, gy) = self.grids(nx, ny)?;
        let init = self.initial.clone();
        Field2D::new(gx, gy, cell_averages_2d(&gx, &gy, |x, y| init(x, y)), 0.0)
    }

    /// Exact cell averages at `t`. `InitialAtFinal` only answers at the
    /// problem's final time (to 1e-12).
    pub fn exact_averages(&self, gx: &Grid1D, gy: &Grid1D, t: f64) -> Option<Vec<f64>> {
        match self.exact.as_ref()? {
            Exact2D::Closed(f) => Some(cell_averages_2d(gx, gy, |x, y| f(x, y, t))),
            Exact2D::InitialAtFinal => {
                if fabs(t - self.final_time) <= 1e-12 * self.final_time.max(1.0) {
                    let init = self.initial.clone();
                    Some(cell_averages_2d(gx, gy, |x, y| init(x, y)))
                } else {
                    None
                }
            }
        }
    }

    /// Largest `|df/du|` and `|dg/du|` over the cell centres.
    pub fn max_speeds(&self, field: &Field2D) -> (f64, f64) {
        let ny = field.ny();
        let mut sx: f64 = 0.0;
        let mut sy: f64 = 0.0;
        for i in 0..field.nx() {
            let x = field.grid_x.center(i);
            for j in 0..ny {
                let y = field.grid_y.center(j);
                let u = field.values[i * ny + j];
                sx = sx.max(fabs((self.dflux_x)(x, y, field.time, u)));
                sy = sy.max(fabs((self.dflux_y)(x, y, field.time, u)));
            }
        }
        (sx, sy)
    }
}

#[derive(Clone)]
pub enum ProblemSpec {
    OneD(Problem1D),
    TwoD(Problem2D),
}

impl ProblemSpec {
    pub fn name(&self) -> &str {
        match self {
            ProblemSpec::OneD(p) => &p.name,
            ProblemSpec::TwoD(p) => &p.name,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            ProblemSpec::OneD(_) => 1,
            ProblemSpec::TwoD(_) => 2,
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            ProblemSpec::OneD(p) => p.epsilon,
            ProblemSpec::TwoD(p) => p.epsilon,
        }
    }

    pub fn final_time(&self) -> f64 {
        match self {
            ProblemSpec::OneD(p) => p.final_time,
            ProblemSpec::TwoD(p) => p.final_time,
        }
    }

    pub fn bc(&self) -> BoundaryCondition {
        match self {
            ProblemSpec::OneD(p) => p.bc,
            ProblemSpec::TwoD(p) => p.bc,
        }
    }

    pub fn default_scheme(&self) -> &'static str {
        match self {
            ProblemSpec::OneD(p) => p.default_scheme,
            ProblemSpec::TwoD(p) => p.default_scheme,
        }
    }

    pub fn has_exact(&self) -> bool {
        match self {
            ProblemSpec::OneD(p) => p.exact.is_some(),
            ProblemSpec::TwoD(p) => p.exact.is_some(),
        }
    }

    pub fn equilibrium(&self) -> Option<MaxwellianParams> {
        match self {
            ProblemSpec::OneD(p) => p.equilibrium,
            ProblemSpec::TwoD(p) => p.equilibrium,
        }
    }
}

/// Cell averages by 5-point Gauss-Legendre per cell.
pub fn cell_averages_1d(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let (xi, w) = gauss5();
    let h = 0.5 * grid.dx();
    (0..grid.len())
        .map(|j| {
            let c = grid.center(j);
            0.5 * xi.iter().zip(&w).map(|(s, wk)| wk * f(c + h * s)).sum::<f64>()
        })
        .collect()
}

/// Cell averages by the 5x5 tensor Gauss-Legendre rule, stored `i * ny + j`.
pub fn cell_averages_2d(gx: &Grid1D, gy: &Grid1D, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let (xi, w) = gauss5();
    let (hx, hy) = (0.5 * gx.dx(), 0.5 * gy.dx());
    let mut out = vec![0.0; gx.len() * gy.len()];
    for i in 0..gx.len() {
        let cx = gx.center(i);
        for j in 0..gy.len() {
            let cy = gy.center(j);
            let mut s = 0.0;
            for (a, wa) in xi.iter().zip(&w) {
                for (b, wb) in xi.iter().zip(&w) {
                    s += wa * wb * f(cx + hx * a, cy + hy * b);
                }
            }
            out[i * gy.len() + j] = 0.25 * s;
        }
    }
    out
}

fn gauss5() -> (Vec<f64>, Vec<f64>) {
    gauss_legendre(5).expect("order 5 is supported")
}

fn arc1(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Fn1 {
    Arc::new(f)
}
fn arc2(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Fn2 {
    Arc::new(f)
}
fn arc3(f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Fn3 {
    Arc::new(f)
}
fn arc4(f: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static) -> Fn4 {
    Arc::new(f)
}

fn linear_1d(name: &str, domain: (f64, f64), coeff: Fn2) -> Problem1D {
    let c2 = coeff.clone();
    Problem1D {
        name: name.into(),
        domain,
        bc: BoundaryCondition::Periodic,
        epsilon: 0.0,
        flux: arc3(move |x, t, u| coeff(x, t) * u),
        dflux: arc3(move |x, t, _| c2(x, t)),
        source: None,
        initial: arc1(|_| 0.0),
        exact: None,
        final_time: 1.0,
        default_scheme: "rk4",
        equilibrium: None,
    }
}

/// 2D model with fluxes `a(x,y,t) u` and `b(x,y,t) u`.
fn linear_2d(name: &str, domain: (f64, f64), a: Fn3, b: Fn3) -> Problem2D {
    let (a2, b2) = (a.clone(), b.clone());
    Problem2D {
        name: name.into(),
        domain_x: domain,
        domain_y: domain,
        bc: BoundaryCondition::Periodic,
        epsilon: 0.0,
        flux_x: arc4(move |x, y, t, u| a(x, y, t) * u),
        dflux_x: arc4(move |x, y, t, _| a2(x, y, t)),
        flux_y: arc4(move |x, y, t, u| b(x, y, t) * u),
        dflux_y: arc4(move |x, y, t, _| b2(x, y, t)),
        source: None,
        initial: arc2(|_, _| 0.0),
        exact: None,
        final_time: 1.0,
        default_scheme: "rk4",
        equilibrium: None,
    }
}

fn cosine_bell(x: f64, y: f64) -> f64 {
    let r0 = 0.3 * PI;
    let (dx, dy) = (x - 0.3 * PI, y);
    let r = sqrt(dx * dx + dy * dy);
    if r < r0 {
        let c = cos(r * PI / (2.0 * r0));
        let c2 = c * c;
        r0 * c2 * c2 * c2
    } else {
        0.0
    }
}

fn swirl(name: &str, g: Fn1) -> Problem2D {
    let g2 = g.clone();
    let mut p = linear_2d(
        name,
        (-PI, PI),
        arc3(move |x, y, t| {
            let c = cos(0.5 * x);
            -c * c * sin(y) * g(t)
        }),
        arc3(move |x, y, t| {
            let c = cos(0.5 * y);
            sin(x) * c * c * g2(t)
        }),
    );
    p.initial = arc2(cosine_bell);
    p
}

fn burgers_1d_flux(p: &mut Problem1D) {
    p.flux = arc3(|_, _, u| 0.5 * u * u);
    p.dflux = arc3(|_, _, u| u);
}

fn fokker_planck_1v(name: &str) -> Problem1D {
    let m = MaxwellianParams::reference();
    let vb = m.v_bar[0];
    let mut p = linear_1d(name, (-2.0 * PI, 2.0 * PI), arc2(move |v, _| -(v - vb)));
    p.bc = BoundaryCondition::Zero;
    p.epsilon = m.diffusion();
    p.initial = arc1(move |v| m.eval_1v(v));
    p.exact = Some(arc2(move |v, _| m.eval_1v(v)));
    p.default_scheme = "IMEX(4,4,3)";
    p.equilibrium = Some(m);
    p
}

fn fokker_planck_2v(name: &str) -> Problem2D {
    let m = MaxwellianParams::reference();
    let [vx, vy] = m.v_bar;
    let mut p = linear_2d(
        name,
        (-2.0 * PI, 2.0 * PI),
        arc3(move |x, _, _| -(x - vx)),
        arc3(move |_, y, _| -(y - vy)),
    );
    p.bc = BoundaryCondition::Zero;
    p.epsilon = m.diffusion();
    p.initial = arc2(move |x, y| m.eval_2v(x, y));
    p.exact = Some(Exact2D::Closed(arc3(move |x, y, _| m.eval_2v(x, y))));
    p.default_scheme = "IMEX(2,3,3)";
    p.final_time = 0.5;
    p.equilibrium = Some(m);
    p
}

/// The problem with its default final time.
pub fn registry_get(name: &str) -> Result<ProblemSpec> {
    registry_build(name, None)
}

/// The problem, with `final_time` overriding the default. For `swirling`
/// and `swirling-diffusion` the final time also sets the period of the
/// reversing velocity field.
pub fn registry_build(name: &str, final_time: Option<f64>) -> Result<ProblemSpec> {
    if let Some(tf) = final_time {
        if !(tf > 0.0 && tf.is_finite()) {
            return Err(Error::OutOfRange(format!("final time {tf}")));
        }
    }
    let tau = 2.0 * PI;
    let spec = match name {
        "transport-1d-const" => {
            let mut p = linear_1d(name, (0.0, tau), arc2(|_, _| 1.0));
            p.initial = arc1(sin);
            p.exact = Some(arc2(|x, t| sin(x - t)));
            p.default_scheme = "forward-euler";
            ProblemSpec::OneD(p)
        }
        "transport-1d-varx" => {
            let mut p = linear_1d(name, (0.0, tau), arc2(|x, _| sin(x)));
            p.initial = arc1(|_| 1.0);
            // sin(2 atan(e^-t tan(x/2))) / sin(x), without the removable
            // singularities at x = 0, pi, 2 pi.
            p.exact = Some(arc2(|x, t| {
                let (c, s) = (cos(0.5 * x), sin(0.5 * x));
                let e = exp(-t);
                e / (c * c + e * e * s * s)
            }));
            ProblemSpec::OneD(p)
        }
        "transport-1d-vart" => {
            let mut p = linear_1d(name, (0.0, tau), arc2(|_, t| 1.0 / (t + 1.0)));
            let gauss = |x: f64, t: f64| {
                let d = x - log(t + 1.0) - PI;
                exp(-5.0 * d * d)
            };
            p.initial = arc1(move |x| gauss(x, 0.0));
            p.exact = Some(arc2(gauss));
            ProblemSpec::OneD(p)
        }
        "cd-1d-const" => {
            let eps = 1.0;
            let mut p = linear_1d(name, (0.0, tau), arc2(|_, _| 1.0));
            p.epsilon = eps;
            p.initial = arc1(sin);
            p.exact = Some(arc2(move |x, t| sin(x - t) * exp(-eps * t)));
            p.default_scheme = "IMEX(2,3,3)";
            ProblemSpec::OneD(p)
        }
        "cd-1d-var" => {
            let eps = 1.0;
            let mut p = linear_1d(name, (0.0, tau), arc2(|x, _| sin(x)));
            p.epsilon = eps;
            p.source = Some(arc2(move |x, t| sin(2.0 * x) * exp(-eps * t)));
            p.initial = arc1(sin);
            p.exact = Some(arc2(move |x, t| sin(x) * exp(-eps * t)));
            p.default_scheme = "IMEX(2,3,3)";
            ProblemSpec::OneD(p)
        }
        "burgers-1d-viscous" => {
            let eps = 0.1;
            let series = BurgersSeries::new(eps, 10)?;
            let mut p = linear_1d(name, (0.0, 2.0), arc2(|_, _| 0.0));
            burgers_1d_flux(&mut p);
            p.epsilon = eps;
            p.initial = arc1(|x| 0.2 * sin(PI * x));
            p.exact = Some(arc2(move |x, t| series.eval(x, t)));
            p.default_scheme = "IMEX(2,3,3)";
            ProblemSpec::OneD(p)
        }
        "fokker-planck-0d1v" => ProblemSpec::OneD(fokker_planck_1v(name)),
        "fokker-planck-0d1v-bimaxwellian" => {
            let mut p = fokker_planck_1v(name);
            let [m1, m2] = bimaxwellian_components();
            p.initial = arc1(move |v| m1.eval_1v(v) + m2.eval_1v(v));
            p.exact = None;
            p.final_time = 3.0;
            ProblemSpec::OneD(p)
        }
        "transport-2d-const" => {
            let mut p = linear_2d(name, (-PI, PI), arc3(|_, _, _| 1.0), arc3(|_, _, _| 1.0));
            p.initial = arc2(|x, y| sin(x + y));
            p.exact = Some(Exact2D::Closed(arc3(|x, y, t| sin(x + y - 2.0 * t))));
            p.default_scheme = "forward-euler";
            ProblemSpec::TwoD(p)
        }
        "rigid-body" => {
            let mut p = linear_2d(name, (-PI, PI), arc3(|_, y, _| -y), arc3(|x, _, _| x));
            p.initial = arc2(|x, y| exp(-3.0 * (x * x + y * y)));
            p.exact = Some(Exact2D::Closed(arc3(|x, y, _| exp(-3.0 * (x * x + y * y)))));
            p.final_time = 0.5;
            ProblemSpec::TwoD(p)
        }
        "rigid-body-box" => {
            let mut p = linear_2d(name, (-PI, PI), arc3(|_, y, _| -y), arc3(|x, _, _| x));
            let boxed = |x: f64, y: f64| {
                if fabs(x) <= 0.5 * PI && fabs(y) <= 0.5 * PI {
                    1.0
                } else {
                    0.0
                }
            };
            p.initial = arc2(boxed);
            // Counter-clockwise rotation at unit angular speed.
            p.exact = Some(Exact2D::Closed(arc3(move |x, y, t| {
                let (c, s) = (cos(t), sin(t));
                boxed(c * x + s * y, -s * x + c * y)
            })));
            p.final_time = 2.0 * PI;
            p.default_scheme = "ssp-rk3";
            ProblemSpec::TwoD(p)
        }
        "swirling" => {
            let tf = final_time.unwrap_or(1.5);
            let mut p = swirl(name, arc1(move |t| cos(PI * t / tf) * PI));
            p.exact = Some(Exact2D::InitialAtFinal);
            p.final_time = tf;
            ProblemSpec::TwoD(p)
        }
        "swirling-disc" => {
            let mut p = swirl(name, arc1(|_| 1.0));
            p.initial = arc2(|x, y| {
                let (dx, dy) = (x - PI, y - PI);
                if sqrt(dx * dx + dy * dy) < 8.0 * PI / 5.0 {
                    1.0
                } else {
                    0.0
                }
            });
            p.final_time = 5.0 * PI;
            p.default_scheme = "ssp-rk3";
            ProblemSpec::TwoD(p)
        }
        "cd-2d-const" => {
            let eps = 1.0;
            let mut p = linear_2d(name, (0.0, tau), arc3(|_, _, _| 1.0), arc3(|_, _, _| 1.0));
            p.epsilon = eps;
            p.initial = arc2(|x, y| sin(x + y));
            p.exact = Some(Exact2D::Closed(arc3(move |x, y, t| {
                exp(-2.0 * eps * t) * sin(x + y - 2.0 * t)
            })));
            p.final_time = 0.5;
            p.default_scheme = "IMEX(2,3,3)";
            ProblemSpec::TwoD(p)
        }
        "rigid-body-diffusion" => {
            let eps = 1.0;
            let mut p = linear_2d(
                name,
                (-tau, tau),
                arc3(|_, y, _| -y),
                arc3(|x, _, _| x),
            );
            p.epsilon = eps;
            let sol = move |x: f64, y: f64, t: f64| exp(-(x * x + 3.0 * y * y + 2.0 * eps * t));
            p.source = Some(arc3(move |x, y, t| {
                (6.0 * eps - 4.0 * x * y - 4.0 * eps * (x * x + 9.0 * y * y)) * sol(x, y, t)
            }));
            p.initial = arc2(move |x, y| sol(x, y, 0.0));
            p.exact = Some(Exact2D::Closed(arc3(sol)));
            p.final_time = 0.5;
            p.default_scheme = "IMEX(4,4,3)";
            ProblemSpec::TwoD(p)
        }
        "swirling-diffusion" => {
            let tf = final_time.unwrap_or(0.1);
            let mut p = swirl(name, arc1(move |t| cos(PI * t / tf) * PI));
            p.epsilon = 1.0;
            p.final_time = tf;
            p.default_scheme = "IMEX(2,3,3)";
            ProblemSpec::TwoD(p)
        }
        "burgers-2d-viscous" => {
            let eps = 0.1;
            let mut p = linear_2d(name, (-PI, PI), arc3(|_, _, _| 0.0), arc3(|_, _, _| 0.0));
            p.flux_x = arc4(|_, _, _, u| 0.5 * u * u);
            p.dflux_x = arc4(|_, _, _, u| u);
            p.flux_y = arc4(|_, _, _, u| 0.5 * u * u);
            p.dflux_y = arc4(|_, _, _, u| u);
            p.epsilon = eps;
            p.source = Some(arc3(move |x, y, t| exp(-4.0 * eps * t) * sin(2.0 * (x + y))));
            p.initial = arc2(|x, y| sin(x + y));
            p.exact = Some(Exact2D::Closed(arc3(move |x, y, t| {
                exp(-2.0 * eps * t) * sin(x + y)
            })));
            p.final_time = 0.5;
            p.default_scheme = "IMEX(2,3,3)";
            ProblemSpec::TwoD(p)
        }
        "fokker-planck-0d2v" => ProblemSpec::TwoD(fokker_planck_2v(name)),
        "fokker-planck-0d2v-bimaxwellian" => {
            let mut p = fokker_planck_2v(name);
            let [m1, m2] = bimaxwellian_components();
            p.initial = arc2(move |x, y| m1.eval_2v(x, y) + m2.eval_2v(x, y));
            p.exact = None;
            p.final_time = 3.0;
            ProblemSpec::TwoD(p)
        }
        _ => {
            return Err(Error::Unknown {
                kind: "problem",
                name: name.into(),
            })
        }
    };
    Ok(match (spec, final_time) {
        (ProblemSpec::OneD(mut p), Some(tf)) => {
            p.final_time = tf;
            ProblemSpec::OneD(p)
        }
        (ProblemSpec::TwoD(mut p), Some(tf)) => {
            p.final_time = tf;
            ProblemSpec::TwoD(p)
        }
        (spec, None) => spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const H: f64 = 1e-3;

    // Sixth-order central differences.
    fn d1(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        (-f(x - 3.0 * H) + 9.0 * f(x - 2.0 * H) - 45.0 * f(x - H) + 45.0 * f(x + H)
            - 9.0 * f(x + 2.0 * H)
            + f(x + 3.0 * H))
            / (60.0 * H)
    }
    fn d2(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        (2.0 * f(x - 3.0 * H) - 27.0 * f(x - 2.0 * H) + 270.0 * f(x - H) - 490.0 * f(x)
            + 270.0 * f(x + H)
            - 27.0 * f(x + 2.0 * H)
            + 2.0 * f(x + 3.0 * H))
            / (180.0 * H * H)
    }

    fn residual_1d(p: &Problem1D, x: f64, t: f64) -> f64 {
        let u = p.exact.as_ref().unwrap();
        let ut = d1(|s| u(x, s), t);
        let fx = d1(|s| (p.flux)(s, t, u(s, t)), x);
        let uxx = d2(|s| u(s, t), x);
        ut + fx - p.epsilon * uxx - p.source.as_ref().map_or(0.0, |g| g(x, t))
    }

    fn residual_2d(p: &Problem2D, x: f64, y: f64, t: f64) -> f64 {
        let Some(Exact2D::Closed(u)) = p.exact.as_ref() else {
            panic!("no closed form")
        };
        let ut = d1(|s| u(x, y, s), t);
        let fx = d1(|s| (p.flux_x)(s, y, t, u(s, y, t)), x);
        let gy = d1(|s| (p.flux_y)(x, s, t, u(x, s, t)), y);
        let lap = d2(|s| u(s, y, t), x) + d2(|s| u(x, s, t), y);
        ut + fx + gy - p.epsilon * lap - p.source.as_ref().map_or(0.0, |g| g(x, y, t))
    }

    fn one(name: &str) -> Problem1D {
        match registry_get(name).unwrap() {
            ProblemSpec::OneD(p) => p,
            _ => panic!(),
        }
    }
    fn two(name: &str) -> Problem2D {
        match registry_get(name).unwrap() {
            ProblemSpec::TwoD(p) => p,
            _ => panic!(),
        }
    }

    #[test]
    fn registry_covers_all_names() {
        for name in PROBLEM_NAMES {
            let p = registry_get(name).unwrap();
            assert_eq!(p.name(), name);
        }
        assert!(matches!(
            registry_get("nope"),
            Err(Error::Unknown { kind: "problem", .. })
        ));
        assert!(registry_build("swirling", Some(-1.0)).is_err());
    }

    #[test]
    fn registry_examples() {
        let p = one("transport-1d-const");
        assert_eq!(p.domain, (0.0, 2.0 * PI));
        assert_eq!(p.epsilon, 0.0);
        assert_eq!(p.bc, BoundaryCondition::Periodic);
        let u = p.exact.unwrap();
        assert!((u(1.0, 0.3) - sin(0.7)).abs() < 1e-15);

        let b = one("burgers-1d-viscous");
        assert_eq!(b.epsilon, 0.1);
        assert_eq!(b.domain, (0.0, 2.0));
        assert!(((b.initial)(0.5) - 0.2).abs() < 1e-15);

        let s = two("swirling");
        assert_eq!(s.final_time, 1.5);
        assert!(((s.initial)(0.3 * PI, 0.0) - 0.3 * PI).abs() < 1e-15);
        assert_eq!((s.initial)(0.3 * PI + 0.31 * PI, 0.0), 0.0);
        // g(0) = pi, so at (0, pi/2) the x-coefficient is -pi.
        assert!(((s.dflux_x)(0.0, 0.5 * PI, 0.0, 1.0) + PI).abs() < 1e-14);
        assert!((s.dflux_x)(0.0, 0.5 * PI, 0.75, 1.0).abs() < 1e-14);

        let s = match registry_build("swirling", Some(3.0)).unwrap() {
            ProblemSpec::TwoD(p) => p,
            _ => panic!(),
        };
        assert!((s.dflux_x)(0.0, 0.5 * PI, 1.5, 1.0).abs() < 1e-14);
    }

    #[test]
    fn exact_matches_initial_at_zero() {
        for name in PROBLEM_NAMES {
            match registry_get(name).unwrap() {
                ProblemSpec::OneD(p) => {
                    if let Some(u) = &p.exact {
                        for k in 0..200 {
                            let x = p.domain.0 + (p.domain.1 - p.domain.0) * (k as f64 + 0.37) / 200.0;
                            assert!((u(x, 0.0) - (p.initial)(x)).abs() < 1e-10, "{name} at {x}");
                        }
                    }
                }
                ProblemSpec::TwoD(p) => {
                    if let Some(Exact2D::Closed(u)) = &p.exact {
                        for k in 0..40 {
                            for l in 0..40 {
                                let x = p.domain_x.0 + (p.domain_x.1 - p.domain_x.0) * (k as f64 + 0.37) / 40.0;
                                let y = p.domain_y.0 + (p.domain_y.1 - p.domain_y.0) * (l as f64 + 0.61) / 40.0;
                                assert!((u(x, y, 0.0) - (p.initial)(x, y)).abs() < 1e-10, "{name}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn varx_exact_matches_printed_form() {
        let u = one("transport-1d-varx").exact.unwrap();
        for &(x, t) in &[(0.4, 0.3), (2.0, 1.0), (4.0, 0.7), (5.9, 0.1)] {
            let printed = sin(2.0 * crate::math::atan(exp(-t) * crate::math::tan(0.5 * x))) / sin(x);
            assert!((u(x, t) - printed).abs() < 1e-12);
        }
    }

    #[test]
    fn burgers_series_examples() {
        let s = BurgersSeries::new(0.1, 10).unwrap();
        for k in 0..1000 {
            let x = 2.0 * k as f64 / 1000.0;
            assert!((s.eval(x, 0.0) - 0.2 * sin(PI * x)).abs() <= 1e-10);
        }
        assert_eq!(s.eval(0.0, 0.7), 0.0);
        let s11 = BurgersSeries::new(0.1, 11).unwrap();
        for k in 0..100 {
            let x = 2.0 * k as f64 / 100.0;
            for t in [0.0, 0.5, 1.0] {
                assert!((s.eval(x, t) - s11.eval(x, t)).abs() <= 1e-15);
            }
        }
        assert!(BurgersSeries::new(0.1, 0).is_err());
        // c_n = 2 e^{-kappa} I_n(kappa): small-argument series check for n = 1.
        let kappa = 1.0 / PI;
        let mut i1 = 0.0;
        let mut term = 0.5 * kappa;
        for m in 0..20 {
            i1 += term;
            let mf = m as f64;
            term *= 0.25 * kappa * kappa / ((mf + 1.0) * (mf + 2.0));
        }
        assert!((s.coeffs[1] - 2.0 * exp(-kappa) * i1).abs() < 1e-15);
    }

    #[test]
    fn maxwellian_examples() {
        let m = MaxwellianParams::reference();
        assert!((m.thermal_velocity() - 1.0).abs() < 1e-15);
        assert!((maxwellian(&m, Velocity::V1(0.0)) - sqrt(PI)).abs() < 1e-14);
        for a in [0.1, 0.7, 2.5] {
            assert_eq!(m.eval_1v(a), m.eval_1v(-a));
        }
        assert!((maxwellian(&m, Velocity::V2(0.0, 0.0)) - 1.0).abs() < 1e-14);
        assert!(MaxwellianParams::new(-1.0, [0.0; 2], 1.0, 1.0).is_err());

        let g = Grid1D::new(-2.0 * PI, 2.0 * PI, 400).unwrap();
        let mass: f64 = cell_averages_1d(&g, |v| m.eval_1v(v)).iter().sum::<f64>() * g.dx();
        assert!((mass - PI).abs() < 1e-9);
    }

    #[test]
    fn moments_of_sampled_maxwellian() {
        let m = MaxwellianParams::reference();
        let g = Grid1D::new(-2.0 * PI, 2.0 * PI, 200).unwrap();
        let f = CellField::new(g, g.centers().iter().map(|&v| m.eval_1v(v)).collect(), 0.0).unwrap();
        let mo = macro_parameters_1v(&f, GAS_CONSTANT).unwrap();
        assert!((mo.n - PI).abs() < 1e-8);
        assert!(mo.v_bar[0].abs() < 1e-8);
        assert!((mo.t - 3.0).abs() < 1e-8);

        let f2 = CellField::new(g, f.values.iter().map(|v| 2.0 * v).collect(), 0.0).unwrap();
        let mo2 = macro_parameters_1v(&f2, GAS_CONSTANT).unwrap();
        assert!((mo2.n - 2.0 * mo.n).abs() < 1e-12);
        assert!((mo2.v_bar[0] - mo.v_bar[0]).abs() < 1e-12);
        assert!((mo2.t - mo.t).abs() < 1e-12);

        let z = CellField::new(g, vec![0.0; 200], 0.0).unwrap();
        assert!(matches!(
            macro_parameters_1v(&z, GAS_CONSTANT),
            Err(Error::DegenerateDistribution(_))
        ));
    }

    #[test]
    fn bimaxwellian_totals() {
        let [m1, m2] = bimaxwellian_components();
        let g = Grid1D::new(-2.0 * PI, 2.0 * PI, 200).unwrap();
        let vals = g
            .centers()
            .iter()
            .flat_map(|&x| g.centers().into_iter().map(move |y| (x, y)))
            .map(|(x, y)| m1.eval_2v(x, y) + m2.eval_2v(x, y))
            .collect();
        let f = Field2D::new(g, g, vals, 0.0).unwrap();
        let mo = macro_parameters_2v(&f, GAS_CONSTANT).unwrap();
        assert!((mo.n - PI).abs() < 1e-8, "{mo:?}");
        assert!(mo.v_bar[0].abs() < 1e-8 && mo.v_bar[1].abs() < 1e-8, "{mo:?}");
        assert!((mo.t - 3.0).abs() < 1e-8, "{mo:?}");

        let g1 = Grid1D::new(-2.0 * PI, 2.0 * PI, 400).unwrap();
        let f1 = CellField::new(
            g1,
            g1.centers().iter().map(|&v| m1.eval_1v(v) + m2.eval_1v(v)).collect(),
            0.0,
        )
        .unwrap();
        let mo = macro_parameters_1v(&f1, GAS_CONSTANT).unwrap();
        assert!((mo.n - PI).abs() < 1e-8);
    }

    #[test]
    fn maxwellian_is_stationary_spectrally() {
        // ((v - v_bar) f)_v + D f_vv with Fourier derivatives on N = 400.
        let m = MaxwellianParams::reference();
        let n = 400;
        let l = 4.0 * PI;
        let v: Vec<f64> = (0..n).map(|j| -2.0 * PI + l * j as f64 / n as f64).collect();
        let f: Vec<f64> = v.iter().map(|&x| m.eval_1v(x)).collect();
        let g: Vec<f64> = v.iter().zip(&f).map(|(x, y)| x * y).collect();
        let deriv = |u: &[f64], order: u32| -> Vec<f64> {
            let mut re = vec![0.0; n];
            let mut im = vec![0.0; n];
            for k in 0..n {
                for j in 0..n {
                    let a = -2.0 * PI * (k * j % n) as f64 / n as f64;
                    re[k] += u[j] * cos(a);
                    im[k] += u[j] * sin(a);
                }
            }
            let mut out = vec![0.0; n];
            for k in 0..n {
                let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                let w = 2.0 * PI * kk / l;
                let (mut r, mut i) = (re[k], im[k]);
                for _ in 0..order {
                    let nr = -w * i;
                    i = w * r;
                    r = nr;
                }
                if order % 2 == 1 && k == n / 2 {
                    r = 0.0;
                    i = 0.0;
                }
                for (j, o) in out.iter_mut().enumerate() {
                    let a = 2.0 * PI * (k * j % n) as f64 / n as f64;
                    *o += (r * cos(a) - i * sin(a)) / n as f64;
                }
            }
            out
        };
        let gv = deriv(&g, 1);
        let fvv = deriv(&f, 2);
        let worst = (0..n)
            .map(|j| (gv[j] + m.diffusion() * fvv[j]).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "{worst}");
    }

    #[test]
    fn manufactured_sources_are_consistent() {
        let p = one("cd-1d-var");
        for &(x, t) in &[(0.3, 0.1), (2.0, 0.5), (5.0, 0.9)] {
            assert!(residual_1d(&p, x, t).abs() < 1e-8);
        }
        for name in ["rigid-body-diffusion", "burgers-2d-viscous"] {
            let p = two(name);
            for &(x, y, t) in &[(0.3, -0.2, 0.1), (1.0, 0.5, 0.4), (-0.7, 0.9, 0.3)] {
                let r = residual_2d(&p, x, y, t);
                assert!(r.abs() < 1e-8, "{name}: {r}");
            }
        }
    }

    #[test]
    fn cell_averages_exact_for_degree_nine() {
        let g = Grid1D::new(-1.0, 2.0, 7).unwrap();
        let avg = cell_averages_1d(&g, |x| x.powi(9));
        for (j, a) in avg.iter().enumerate() {
            let (l, r) = (g.node(j), g.node(j + 1));
            let exact = (r.powi(10) - l.powi(10)) / (10.0 * g.dx());
            assert!((a - exact).abs() < 1e-11 * (1.0 + exact.abs()));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn pde_residuals_1d(sx in 0.05f64..0.95, t in 0.05f64..1.0) {
            for name in ["transport-1d-const", "transport-1d-varx", "transport-1d-vart",
                         "cd-1d-const", "cd-1d-var", "burgers-1d-viscous", "fokker-planck-0d1v"] {
                let p = one(name);
                let x = p.domain.0 + sx * (p.domain.1 - p.domain.0);
                let r = residual_1d(&p, x, t);
                prop_assert!(r.abs() < 1e-6, "{} at ({}, {}): {}", name, x, t, r);
            }
        }

        #[test]
        fn pde_residuals_2d(sx in 0.05f64..0.95, sy in 0.05f64..0.95, t in 0.05f64..0.5) {
            for name in ["transport-2d-const", "rigid-body", "cd-2d-const",
                         "rigid-body-diffusion", "burgers-2d-viscous", "fokker-planck-0d2v"] {
                let p = two(name);
                let x = p.domain_x.0 + sx * (p.domain_x.1 - p.domain_x.0);
                let y = p.domain_y.0 + sy * (p.domain_y.1 - p.domain_y.0);
                let r = residual_2d(&p, x, y, t);
                prop_assert!(r.abs() < 1e-6, "{} at ({}, {}, {}): {}", name, x, y, t, r);
            }
        }
    }
}
