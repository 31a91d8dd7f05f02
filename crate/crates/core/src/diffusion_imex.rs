//! Convection-diffusion stepping: the five-point diffusion stencil, banded
//! implicit solves and IMEX Runge-Kutta over sub space-time regions.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::characteristics::{TracebackGrid, MIN_GAP};
use crate::convection::{convective_rhs, traceback_for_step, widths};
use crate::error::{Error, PartitionFailure, Result};
use crate::grid::{BoundaryCondition, CellField};
use crate::math::{fabs, sqrt};
use crate::model::LineModel;
use crate::reconstruct::UniformReconstruction;
use crate::stepper::{advance_with_fallback, StepOptions};

/// Cell averages of `u_xx` from cell averages of `u`, times `dx^2`.
pub const D4_STENCIL: [f64; 5] = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionOperator {
    pub dx: f64,
    pub epsilon: f64,
    pub bc: BoundaryCondition,
}

impl DiffusionOperator {
    pub fn new(dx: f64, epsilon: f64, bc: BoundaryCondition) -> Result<Self> {
        if !(dx > 0.0 && epsilon >= 0.0) {
            return Err(Error::OutOfRange(format!("dx = {dx}, epsilon = {epsilon}")));
        }
        Ok(Self { dx, epsilon, bc })
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        d4_apply(values, self.dx, self.bc)
    }
}

/// `(1/dx^2) D4 u` with periodic wrap or zero ghosts.
pub fn d4_apply(values: &[f64], dx: f64, bc: BoundaryCondition) -> Vec<f64> {
    let n = values.len() as i64;
    let at = |k: i64| -> f64 {
        match bc {
            BoundaryCondition::Periodic => values[k.rem_euclid(n) as usize],
            BoundaryCondition::Zero => {
                if (0..n).contains(&k) {
                    values[k as usize]
                } else {
                    0.0
                }
            }
        }
    };
    let inv = 1.0 / (dx * dx);
    (0..n)
        .map(|j| {
            let s = D4_STENCIL[0] * (at(j - 2) + at(j + 2))
                + D4_STENCIL[1] * (at(j - 1) + at(j + 1))
                + D4_STENCIL[2] * at(j);
            s * inv
        })
        .collect()
}

/// Paired implicit/explicit tables, both padded to `(s+1) x (s+1)` with a
/// leading zero stage.
#[derive(Debug, Clone, PartialEq)]
pub struct ImexTableau {
    pub name: String,
    pub s: usize,
    pub sigma: usize,
    pub order: usize,
    pub implicit: Vec<f64>,
    pub explicit: Vec<f64>,
    pub b_implicit: Vec<f64>,
    pub b_explicit: Vec<f64>,
    pub c: Vec<f64>,
}

impl ImexTableau {
    #[inline]
    pub fn a(&self, i: usize, k: usize) -> f64 {
        self.implicit[i * (self.s + 1) + k]
    }

    #[inline]
    pub fn a_hat(&self, i: usize, k: usize) -> f64 {
        self.explicit[i * (self.s + 1) + k]
    }

    /// Checks structure, weights and abscissae to `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let m = self.s + 1;
        let bad = |what: &str| Err(Error::OutOfRange(format!("{}: {what}", self.name)));
        if self.implicit.len() != m * m
            || self.explicit.len() != m * m
            || self.b_implicit.len() != m
            || self.b_explicit.len() != m
            || self.c.len() != m
        {
            return bad("malformed");
        }
        for i in 0..m {
            if self.a(0, i) != 0.0 || self.a(i, 0) != 0.0 || self.b_implicit[0] != 0.0 {
                return bad("implicit table is not padded");
            }
            if i > 0 && !(self.a(i, i) > 0.0) {
                return bad("non-positive implicit diagonal");
            }
            for k in (i + 1)..m {
                if self.a(i, k) != 0.0 {
                    return bad("implicit table is not lower triangular");
                }
            }
            for k in i..m {
                if self.a_hat(i, k) != 0.0 {
                    return bad("explicit table is not strictly lower triangular");
                }
            }
            let ri: f64 = (0..m).map(|k| self.a(i, k)).sum();
            let re: f64 = (0..m).map(|k| self.a_hat(i, k)).sum();
            if fabs(ri - self.c[i]) > tol || fabs(re - self.c[i]) > tol {
                return bad("abscissae differ from row sums");
            }
        }
        if fabs(self.b_implicit.iter().sum::<f64>() - 1.0) > tol
            || fabs(self.b_explicit.iter().sum::<f64>() - 1.0) > tol
        {
            return bad("weights do not sum to one");
        }
        Ok(())
    }
}

pub const IMEX_NAMES: [&str; 7] = [
    "IMEX(1,1,1)",
    "IMEX(1,2,2)",
    "IMEX(2,2,2)",
    "IMEX(2,3,3)",
    "IMEX(2,3,2)",
    "IMEX(3,4,3)",
    "IMEX(4,4,3)",
];

/// Looks up one of the seven tableaus; case and spaces are ignored.
pub fn imex_tableau(name: &str) -> Result<ImexTableau> {
    let key: String = name
        .chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(|c| c.to_uppercase())
        .collect();
    let key = key.strip_prefix("IMEX").unwrap_or(&key);
    let key = key.trim_start_matches('-');
    let digits: String = key.chars().filter(|c| c.is_ascii_digit()).collect();
    let build = |s: usize, sigma: usize, order: usize, ai: Vec<f64>, ae: Vec<f64>, bi: Vec<f64>, be: Vec<f64>, c: Vec<f64>| {
        ImexTableau {
            name: format!("IMEX({s},{sigma},{order})"),
            s,
            sigma,
            order,
            implicit: ai,
            explicit: ae,
            b_implicit: bi,
            b_explicit: be,
            c,
        }
    };
    #[rustfmt::skip]
    let t = match digits.as_str() {
        "111" => build(1, 1, 1,
            vec![0.0, 0.0,
                 0.0, 1.0],
            vec![0.0, 0.0,
                 1.0, 0.0],
            vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]),
        "122" => build(1, 2, 2,
            vec![0.0, 0.0,
                 0.0, 0.5],
            vec![0.0, 0.0,
                 0.5, 0.0],
            vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.5]),
        "222" => {
            let g = 1.0 - sqrt(2.0) / 2.0;
            let d = 1.0 - 1.0 / (2.0 * g);
            build(2, 2, 2,
                vec![0.0, 0.0, 0.0,
                     0.0, g, 0.0,
                     0.0, 1.0 - g, g],
                vec![0.0, 0.0, 0.0,
                     g, 0.0, 0.0,
                     d, 1.0 - d, 0.0],
                vec![0.0, 1.0 - g, g], vec![d, 1.0 - d, 0.0], vec![0.0, g, 1.0])
        }
        "233" => {
            let g = (3.0 + sqrt(3.0)) / 6.0;
            build(2, 3, 3,
                vec![0.0, 0.0, 0.0,
                     0.0, g, 0.0,
                     0.0, 1.0 - 2.0 * g, g],
                vec![0.0, 0.0, 0.0,
                     g, 0.0, 0.0,
                     g - 1.0, 2.0 * (1.0 - g), 0.0],
                vec![0.0, 0.5, 0.5], vec![0.0, 0.5, 0.5], vec![0.0, g, 1.0 - g])
        }
        "232" => {
            let g = (2.0 - sqrt(2.0)) / 2.0;
            let d = -2.0 * sqrt(2.0) / 3.0;
            build(2, 3, 2,
                vec![0.0, 0.0, 0.0,
                     0.0, g, 0.0,
                     0.0, 1.0 - g, g],
                vec![0.0, 0.0, 0.0,
                     g, 0.0, 0.0,
                     d, 1.0 - d, 0.0],
                vec![0.0, 1.0 - g, g], vec![0.0, 1.0 - g, g], vec![0.0, g, 1.0])
        }
        "343" => {
            let g = 0.435867;
            build(3, 4, 3,
                vec![0.0, 0.0, 0.0, 0.0,
                     0.0, g, 0.0, 0.0,
                     0.0, 0.282067, g, 0.0,
                     0.0, 1.208497, -0.644363, g],
                vec![0.0, 0.0, 0.0, 0.0,
                     g, 0.0, 0.0, 0.0,
                     0.321279, 0.396654, 0.0, 0.0,
                     -0.105858, 0.552929, 0.552929, 0.0],
                vec![0.0, 1.208497, -0.644363, g],
                vec![0.0, 1.208497, -0.644363, g],
                vec![0.0, g, 0.717933, 1.0])
        }
        "443" => build(4, 4, 3,
            vec![0.0, 0.0, 0.0, 0.0, 0.0,
                 0.0, 0.5, 0.0, 0.0, 0.0,
                 0.0, 1.0 / 6.0, 0.5, 0.0, 0.0,
                 0.0, -0.5, 0.5, 0.5, 0.0,
                 0.0, 1.5, -1.5, 0.5, 0.5],
            vec![0.0, 0.0, 0.0, 0.0, 0.0,
                 0.5, 0.0, 0.0, 0.0, 0.0,
                 11.0 / 18.0, 1.0 / 18.0, 0.0, 0.0, 0.0,
                 5.0 / 6.0, -5.0 / 6.0, 0.5, 0.0, 0.0,
                 0.25, 1.75, 0.75, -1.75, 0.0],
            vec![0.0, 1.5, -1.5, 0.5, 0.5],
            vec![0.25, 1.75, 0.75, -1.75, 0.0],
            vec![0.0, 0.5, 2.0 / 3.0, 0.5, 1.0]),
        _ => {
            return Err(Error::Unknown {
                kind: "IMEX tableau",
                name: name.into(),
            })
        }
    };
    Ok(t)
}

/// `int g` over each cell by three-point Gauss-Legendre.
pub fn source_cell_integrals(g: impl Fn(f64) -> f64, nodes: &[f64]) -> Vec<f64> {
    let r = sqrt(0.6);
    nodes
        .windows(2)
        .map(|w| {
            let h = 0.5 * (w[1] - w[0]);
            let m = 0.5 * (w[1] + w[0]);
            h * (5.0 / 9.0 * (g(m - r * h) + g(m + r * h)) + 8.0 / 9.0 * g(m))
        })
        .collect()
}

/// LU factors of `I - k D4` (`k = a eps dt / dx^2`), banded with a rank-4
/// correction for the periodic corners.
#[derive(Debug, Clone)]
pub struct PentaFactorization {
    n: usize,
    identity: bool,
    /// Unit lower factor, two sub-diagonals per row.
    lower: Vec<[f64; 2]>,
    /// Upper factor: diagonal and two super-diagonals per row.
    upper: Vec<[f64; 3]>,
    periodic: Option<Woodbury>,
}

#[derive(Debug, Clone)]
struct Woodbury {
    idx: [usize; 4],
    /// `B^{-1} U`, column-major `4 x n`.
    z: Vec<[f64; 4]>,
    /// LU (with pivots) of `I + V^T B^{-1} U`.
    h: [[f64; 4]; 4],
    piv: [usize; 4],
}

impl PentaFactorization {
    pub fn new(n: usize, k: f64, bc: BoundaryCondition) -> Result<Self> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::Solver(format!("invalid diffusion number {k}")));
        }
        if k == 0.0 {
            return Ok(Self {
                n,
                identity: true,
                lower: Vec::new(),
                upper: Vec::new(),
                periodic: None,
            });
        }
        if bc == BoundaryCondition::Periodic && n < 5 {
            return Err(Error::Solver(format!("periodic stencil needs at least 5 cells, got {n}")));
        }
        let band = [
            -k * D4_STENCIL[0],
            -k * D4_STENCIL[1],
            1.0 - k * D4_STENCIL[2],
            -k * D4_STENCIL[3],
            -k * D4_STENCIL[4],
        ];
        let (lower, upper) = band_lu(n, &band)?;
        let mut f = Self {
            n,
            identity: false,
            lower,
            upper,
            periodic: None,
        };
        if bc == BoundaryCondition::Periodic {
            let idx = [0, 1, n - 2, n - 1];
            // Corner block of M - B restricted to idx x idx.
            let (c1, c2) = (band[1], band[0]);
            let corner = [
                [0.0, 0.0, c2, c1],
                [0.0, 0.0, 0.0, c2],
                [c2, 0.0, 0.0, 0.0],
                [c1, c2, 0.0, 0.0],
            ];
            // U = E * corner, so column q of U has entries corner[p][q] at idx[p].
            let mut z = vec![[0.0; 4]; n];
            for q in 0..4 {
                let mut col = vec![0.0; n];
                for p in 0..4 {
                    col[idx[p]] += corner[p][q];
                }
                f.band_solve(&mut col);
                for i in 0..n {
                    z[i][q] = col[i];
                }
            }
            let mut h = [[0.0; 4]; 4];
            for p in 0..4 {
                for q in 0..4 {
                    h[p][q] = z[idx[p]][q] + if p == q { 1.0 } else { 0.0 };
                }
            }
            let piv = lu4(&mut h)?;
            f.periodic = Some(Woodbury { idx, z, h, piv });
        }
        Ok(f)
    }

    fn band_solve(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 1..n {
            let mut s = x[i] - self.lower[i][1] * x[i - 1];
            if i >= 2 {
                s -= self.lower[i][0] * x[i - 2];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.upper[i][1] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.upper[i][2] * x[i + 2];
            }
            x[i] = s / self.upper[i][0];
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: rhs.len(),
            });
        }
        let mut x = rhs.to_vec();
        if self.identity {
            return Ok(x);
        }
        self.band_solve(&mut x);
        if let Some(w) = &self.periodic {
            let mut y = [0.0; 4];
            for p in 0..4 {
                y[p] = x[w.idx[p]];
            }
            lu4_solve(&w.h, &w.piv, &mut y);
            for (xi, zi) in x.iter_mut().zip(&w.z) {
                *xi -= zi[0] * y[0] + zi[1] * y[1] + zi[2] * y[2] + zi[3] * y[3];
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("non-finite solution".into()));
        }
        Ok(x)
    }
}

fn band_lu(n: usize, band: &[f64; 5]) -> Result<(Vec<[f64; 2]>, Vec<[f64; 3]>)> {
    // Rows of the current (partially eliminated) matrix: a[i][o] is entry (i, i+o-2).
    let mut a: Vec<[f64; 5]> = vec![*band; n];
    let mut lower = vec![[0.0; 2]; n];
    for i in 0..n {
        let pivot = a[i][2];
        if !(fabs(pivot) > 1e-300) {
            return Err(Error::Solver(format!("zero pivot in row {i}")));
        }
        for d in 1..=2 {
            let r = i + d;
            if r >= n {
                break;
            }
            // Entry (r, i) sits at offset 2 - d in row r.
            let m = a[r][2 - d] / pivot;
            lower[r][2 - d] = m;
            a[r][2 - d] = 0.0;
            for o in 1..=2 {
                // (i, i+o) -> (r, i+o) at offset o - d + 2 in row r.
                a[r][o + 2 - d] -= m * a[i][2 + o];
            }
        }
    }
    let upper = a.iter().map(|row| [row[2], row[3], row[4]]).collect();
    Ok((lower, upper))
}

fn lu4(h: &mut [[f64; 4]; 4]) -> Result<[usize; 4]> {
    let mut piv = [0, 1, 2, 3];
    for c in 0..4 {
        let mut best = c;
        for r in c + 1..4 {
            if fabs(h[r][c]) > fabs(h[best][c]) {
                best = r;
            }
        }
        if !(fabs(h[best][c]) > 1e-300) {
            return Err(Error::Solver("singular periodic correction".into()));
        }
        h.swap(c, best);
        piv.swap(c, best);
        for r in c + 1..4 {
            let m = h[r][c] / h[c][c];
            h[r][c] = m;
            for q in c + 1..4 {
                h[r][q] -= m * h[c][q];
            }
        }
    }
    Ok(piv)
}

fn lu4_solve(h: &[[f64; 4]; 4], piv: &[usize; 4], y: &mut [f64; 4]) {
    let b = *y;
    for i in 0..4 {
        y[i] = b[piv[i]];
    }
    for i in 0..4 {
        for q in 0..i {
            y[i] -= h[i][q] * y[q];
        }
    }
    for i in (0..4).rev() {
        for q in i + 1..4 {
            y[i] -= h[i][q] * y[q];
        }
        y[i] /= h[i][i];
    }
}

/// Factorizations keyed by size, boundary condition and diffusion number.
#[derive(Debug, Clone, Default)]
pub struct SolverCache {
    map: BTreeMap<(usize, u8, u64), PentaFactorization>,
}

impl SolverCache {
    pub fn get(&mut self, n: usize, k: f64, bc: BoundaryCondition) -> Result<&PentaFactorization> {
        let key = (n, bc as u8, k.to_bits());
        if !self.map.contains_key(&key) {
            if self.map.len() > 64 {
                self.map.clear();
            }
            self.map.insert(key, PentaFactorization::new(n, k, bc)?);
        }
        Ok(&self.map[&key])
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Solves `(I - a eps dt/dx^2 D4) x = rhs`.
pub fn implicit_stage_solve(op: &DiffusionOperator, a_diag: f64, dt: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    if !(a_diag > 0.0 && dt > 0.0) {
        return Err(Error::OutOfRange(format!("a_diag = {a_diag}, dt = {dt}")));
    }
    let k = a_diag * op.epsilon * dt / (op.dx * op.dx);
    PentaFactorization::new(rhs.len(), k, op.bc)?.solve(rhs)
}

/// Fails with a partition report if extending `tb` to `tau` folds any cell.
fn checked_nodes(tb: &TracebackGrid, tau: f64) -> Result<Vec<f64>> {
    let nodes = tb.nodes_unchecked(tau);
    let dx = tb.base.dx();
    let back = fabs(tb.dt_full - tau);
    let mut cells = Vec::new();
    let mut admissible = f64::INFINITY;
    for j in 0..tb.base.len() {
        if !(nodes[j + 1] - nodes[j] > MIN_GAP * dx) {
            cells.push(j);
            let rel = fabs(tb.speeds[j + 1] - tb.speeds[j]);
            if rel > 0.0 && back > 0.0 {
                admissible = admissible.min(dx / rel * tb.dt_full.max(1e-300) / back);
            }
        }
    }
    if cells.is_empty() {
        Ok(nodes)
    } else {
        Err(Error::Partition(PartitionFailure {
            cells,
            admissible_dt: admissible,
        }))
    }
}

/// What the stages leave behind on the uniform grid.
struct StageState {
    recon: UniformReconstruction,
    recon_xx: UniformReconstruction,
}

/// `eps int u_xx + int g` over the cells at `nodes`.
fn diffusion_term<M: LineModel + ?Sized>(
    st: &StageState,
    nodes: &[f64],
    t: f64,
    model: &M,
) -> Result<Vec<f64>> {
    let eps = model.epsilon();
    let mut k = st.recon_xx.cell_integrals(nodes)?;
    k.iter_mut().for_each(|v| *v *= eps);
    if model.has_source() {
        let g = source_cell_integrals(|x| model.source(x, t), nodes);
        k.iter_mut().zip(g).for_each(|(v, gi)| *v += gi);
    }
    Ok(k)
}

/// One IMEX step with no fallback; `dt > 0`.
pub(crate) fn el_imex_attempt<M: LineModel + ?Sized>(
    field: &CellField,
    tab: &ImexTableau,
    dt: f64,
    model: &M,
    bc: BoundaryCondition,
    opts: &StepOptions,
    cache: &mut SolverCache,
) -> Result<CellField> {
    let eps = model.epsilon();
    if eps < 0.0 {
        return Err(Error::Unsupported("negative diffusion".into()));
    }
    let grid = field.grid;
    let n = grid.len();
    let dx = grid.dx();
    let t0 = field.time;
    let s = tab.s;
    let tb = traceback_for_step(field, dt, model, bc, opts)?;
    let recon0 = UniformReconstruction::new(grid, &field.values, bc, &opts.weno)?;

    let flux_term = |nodes: &[f64], integrals: &[f64], t: f64| -> Vec<f64> {
        let avgs: Vec<f64> = integrals.iter().zip(widths(nodes)).map(|(u, w)| u / w).collect();
        convective_rhs(&tb, nodes, t, &avgs, model, bc, &opts.weno, opts.dissipation, false)
    };

    // Quantities on the full region, indexed by stage (0 = t^n).
    let nodes_n = tb.nodes_unchecked(0.0);
    let u_n = recon0.cell_integrals(&nodes_n)?;
    let mut k_hat: Vec<Vec<f64>> = vec![flux_term(&nodes_n, &u_n, t0)];
    let mut k_imp: Vec<Vec<f64>> = vec![Vec::new()];
    let mut stages: Vec<StageState> = Vec::with_capacity(s);

    for mu in 1..=s {
        let c_mu = tab.c[mu];
        let sub = tb.substage_grid(c_mu)?;
        let sub_nodes_n = checked_nodes(&sub, 0.0)?;
        let sub_u_n = recon0.cell_integrals(&sub_nodes_n)?;
        let mut rhs = sub_u_n.clone();
        let a_hat0 = tab.a_hat(mu, 0);
        if a_hat0 != 0.0 {
            let kh = flux_term(&sub_nodes_n, &sub_u_n, t0);
            rhs.iter_mut().zip(&kh).for_each(|(r, v)| *r += dt * a_hat0 * v);
        }
        for nu in 1..mu {
            let a = tab.a(mu, nu);
            let ah = tab.a_hat(mu, nu);
            if a == 0.0 && ah == 0.0 {
                continue;
            }
            let tau = tab.c[nu] * dt;
            let nodes = checked_nodes(&sub, tau)?;
            let st = &stages[nu - 1];
            let t_nu = t0 + tau;
            if ah != 0.0 {
                let u = st.recon.cell_integrals(&nodes)?;
                let kh = flux_term(&nodes, &u, t_nu);
                rhs.iter_mut().zip(&kh).for_each(|(r, v)| *r += dt * ah * v);
            }
            if a != 0.0 {
                let k = diffusion_term(st, &nodes, t_nu, model)?;
                rhs.iter_mut().zip(&k).for_each(|(r, v)| *r += dt * a * v);
            }
        }
        let a_mm = tab.a(mu, mu);
        let t_mu = t0 + c_mu * dt;
        if model.has_source() {
            let g = source_cell_integrals(|x| model.source(x, t_mu), &grid.nodes());
            rhs.iter_mut().zip(g).for_each(|(r, gi)| *r += a_mm * dt * gi);
        }
        let kdiff = a_mm * eps * dt / (dx * dx);
        let u_mu = cache.get(n, kdiff, bc)?.solve(&rhs)?;
        let avg: Vec<f64> = u_mu.iter().map(|u| u / dx).collect();
        let avg_xx = d4_apply(&avg, dx, bc);
        let st = StageState {
            recon: UniformReconstruction::new(grid, &avg, bc, &opts.weno)?,
            recon_xx: UniformReconstruction::new(grid, &avg_xx, bc, &opts.weno)?,
        };

        // Back on the full region at t^(mu).
        let nodes = checked_nodes(&tb, c_mu * dt)?;
        let need_hat = mu < s || tab.b_explicit[mu] != 0.0;
        if need_hat {
            let u = st.recon.cell_integrals(&nodes)?;
            k_hat.push(flux_term(&nodes, &u, t_mu));
        } else {
            k_hat.push(vec![0.0; n]);
        }
        k_imp.push(diffusion_term(&st, &nodes, t_mu, model)?);
        stages.push(st);
    }

    let mut values = u_n;
    for mu in 0..=s {
        let bh = tab.b_explicit[mu];
        if bh != 0.0 {
            values.iter_mut().zip(&k_hat[mu]).for_each(|(u, v)| *u += dt * bh * v);
        }
        let b = tab.b_implicit[mu];
        if mu > 0 && b != 0.0 {
            values.iter_mut().zip(&k_imp[mu]).for_each(|(u, v)| *u += dt * b * v);
        }
    }
    values.iter_mut().for_each(|u| *u /= dx);
    CellField::new(grid, values, t0 + dt)
}

/// One EL-RK-FV step coupled with an IMEX Runge-Kutta scheme.
pub fn el_imex_step<M: LineModel + ?Sized>(
    field: &CellField,
    tableau: &ImexTableau,
    dt: f64,
    model: &M,
    bc: BoundaryCondition,
    opts: &StepOptions,
) -> Result<CellField> {
    let cache = core::cell::RefCell::new(SolverCache::default());
    advance_with_fallback(field, dt, model, opts, &|f, h, m| {
        el_imex_attempt(f, tableau, h, m, bc, opts, &mut cache.borrow_mut())
    })
}
