use std::f64::consts::PI;

use elrkfv_core::convection::{el_rk_step, ButcherTable};
use elrkfv_core::diffusion_imex::{d4_apply, imex_tableau, implicit_stage_solve, DiffusionOperator, SolverCache};
use elrkfv_core::model::FnModel;
use elrkfv_core::multidim::{cells_to_lines, fourth_order_split_step, lines_to_cells, strang_step, Direction, Field2D, SplitConfig};
use elrkfv_core::problems::{registry_get, ProblemSpec};
use elrkfv_core::reconstruct::remap_to_cells;
use elrkfv_core::stepper::step;
use elrkfv_core::{BoundaryCondition, CellField, Grid1D, StepOptions, TimeScheme, WenoParams};
use proptest::prelude::*;

/// Exact cell averages of `sum_k a_k sin(k x + p_k)` on `[0, 2 pi)`.
fn fourier_averages(grid: &Grid1D, modes: &[(f64, f64)], mean: f64) -> Vec<f64> {
    let dx = grid.dx();
    (0..grid.len())
        .map(|j| {
            let (a, b) = (grid.node(j), grid.node(j + 1));
            mean + modes
                .iter()
                .enumerate()
                .map(|(k, &(amp, ph))| {
                    let k = (k + 1) as f64;
                    amp * ((k * a + ph).cos() - (k * b + ph).cos()) / (k * dx)
                })
                .sum::<f64>()
        })
        .collect()
}

fn modes() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, 0.0..6.3f64), 1..4)
}

fn periodic_grid(n: usize) -> Grid1D {
    Grid1D::new(0.0, 2.0 * PI, n).unwrap()
}

fn sum_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    // With f = a u the characteristics are exact and the modified flux
    // vanishes, so a step is a pure remap of the traceback cells.
    #[test]
    fn constant_speed_step_is_a_shift(a in prop_oneof![-3.0..-0.1f64, 0.1..3.0f64], cfl in 0.1..12.0f64, m in modes(), n in 16usize..80) {
        let grid = periodic_grid(n);
        let field = CellField::new(grid, fourier_averages(&grid, &m, 0.3), 0.0).unwrap();
        let dt = cfl * grid.dx() / a.abs();
        let model = FnModel::new(move |_, _, u| a * u, move |_, _, _| a);
        let got = el_rk_step(&field, &ButcherTable::rk4(), dt, &model, BoundaryCondition::Periodic, &StepOptions::default()).unwrap();
        let nodes: Vec<f64> = grid.nodes().iter().map(|x| x - a * dt).collect();
        let want = remap_to_cells(&field, &nodes, BoundaryCondition::Periodic, &WenoParams::default()).unwrap();
        let scale = 1.0 + field.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (g, w) in got.values.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-12 * scale, "{g} vs {w}");
        }
    }

    #[test]
    fn mass_is_conserved(m in modes(), cfl in 0.5..10.0f64, eps in 0.0..0.5f64, imex in any::<bool>(), n in 16usize..64) {
        let grid = periodic_grid(n);
        let mut field = CellField::new(grid, fourier_averages(&grid, &m, 0.2), 0.0).unwrap();
        let (scheme, eps) = if imex {
            (TimeScheme::Imex(imex_tableau("IMEX(2,3,3)").unwrap()), eps)
        } else {
            (TimeScheme::Explicit(ButcherTable::ssp_rk3()), 0.0)
        };
        let model = FnModel::new(|x: f64, _, u| x.sin() * u, |x: f64, _, _| x.sin()).with_epsilon(eps);
        let dt = cfl * grid.dx();
        let m0 = field.mass();
        let scale = grid.dx() * sum_abs(&field.values);
        let mut cache = SolverCache::default();
        for _ in 0..5 {
            field = step(&field, dt, &model, BoundaryCondition::Periodic, &scheme, &StepOptions::default(), &mut cache).unwrap();
        }
        prop_assert!((field.mass() - m0).abs() <= 1e-12 * scale);
    }

    #[test]
    fn implicit_solve_inverts_the_operator(
        rhs in prop::collection::vec(-1.0..1.0f64, 5..60),
        a in 0.1..1.0f64,
        dt in 0.01..2.0f64,
        eps in 0.001..1.0f64,
        periodic in any::<bool>(),
    ) {
        let bc = if periodic { BoundaryCondition::Periodic } else { BoundaryCondition::Zero };
        let dx = 2.0 * PI / rhs.len() as f64;
        let op = DiffusionOperator::new(dx, eps, bc).unwrap();
        let x = implicit_stage_solve(&op, a, dt, &rhs).unwrap();
        let lap = d4_apply(&x, dx, bc);
        let k = a * eps * dt;
        let size = 1.0 + k / (dx * dx);
        for j in 0..rhs.len() {
            prop_assert!((x[j] - k * lap[j] - rhs[j]).abs() <= 1e-11 * size);
        }
    }

    // The Gauss sum of the interval averages gives back the cell average
    // whenever the rule integrates the quartic reconstruction exactly.
    #[test]
    fn lines_round_trip(vals in prop::collection::vec(-1.0..1.0f64, 36..=36), order in 3usize..=5, along_y in any::<bool>()) {
        let g = Grid1D::new(0.0, 1.0, 6).unwrap();
        let field = Field2D::new(g, g, vals.clone(), 0.0).unwrap();
        let dir = if along_y { Direction::Y } else { Direction::X };
        let set = cells_to_lines(&field, dir, order, BoundaryCondition::Periodic, &WenoParams::default()).unwrap();
        let back = lines_to_cells(&set);
        for (b, v) in back.iter().zip(&vals) {
            prop_assert!((b - v).abs() < 1e-13);
        }
    }
}

fn round_trip_error(n: usize) -> f64 {
    let grid = periodic_grid(n);
    let field = CellField::new(grid, fourier_averages(&grid, &[(1.0, 0.0)], 0.0), 0.0).unwrap();
    let model = FnModel::new(|x: f64, _, u| x.sin() * u, |x: f64, _, _| x.sin());
    let opts = StepOptions::default();
    let table = ButcherTable::rk4();
    let dt = 3.0 * grid.dx();
    let fwd = el_rk_step(&field, &table, dt, &model, BoundaryCondition::Periodic, &opts).unwrap();
    let back = el_rk_step(&fwd, &table, -dt, &model, BoundaryCondition::Periodic, &opts).unwrap();
    assert!(back.time.abs() < 1e-15);
    back.values
        .iter()
        .zip(&field.values)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}

#[test]
fn backward_step_undoes_forward_step() {
    let e: Vec<f64> = [32, 64, 128].iter().map(|&n| round_trip_error(n)).collect();
    assert!(e[2] < 1e-6, "{e:?}");
    for w in e.windows(2) {
        assert!((w[0] / w[1]).log2() > 4.0, "{e:?}");
    }
}

// The ssp-rk3 table reproduces the Shu-Osher form on a scalar linear ODE.
#[test]
fn ssp_rk3_matches_shu_osher() {
    let t = ButcherTable::ssp_rk3();
    let lam = -0.7;
    let h = 0.3;
    let mut k = Vec::new();
    for i in 0..t.stages {
        let y: f64 = 1.0 + h * (0..i).map(|j| t.a(i, j) * k[j]).sum::<f64>();
        k.push(lam * y);
    }
    let y1 = 1.0 + h * t.b.iter().zip(&k).map(|(b, k)| b * k).sum::<f64>();
    let u1 = 1.0 + h * lam;
    let u2 = 0.75 + 0.25 * (u1 + h * lam * u1);
    let u3 = 1.0 / 3.0 + 2.0 / 3.0 * (u2 + h * lam * u2);
    assert!((y1 - u3).abs() < 1e-15);
}

fn split_mass_drift(fourth: bool) -> f64 {
    let ProblemSpec::TwoD(p) = registry_get("transport-2d-const").unwrap() else {
        panic!("expected a 2D problem");
    };
    let f0 = p.initial_field(24, 24).unwrap();
    let cfg = SplitConfig {
        scheme: TimeScheme::by_name("rk4").unwrap(),
        opts: StepOptions::default(),
        bc: p.bc,
        gauss_order: 3,
    };
    let dt = 5.0 * f0.grid_x.dx();
    let mut f = f0.clone();
    for _ in 0..3 {
        f = if fourth {
            fourth_order_split_step(&f, dt, &p, &cfg).unwrap()
        } else {
            strang_step(&f, dt, &p, &cfg).unwrap()
        };
    }
    let scale = f0.values.iter().map(|v| v.abs()).sum::<f64>();
    (f.values.iter().sum::<f64>() - f0.values.iter().sum::<f64>()).abs() / scale
}

#[test]
fn splitting_conserves_mass() {
    assert!(split_mass_drift(false) < 1e-13);
    assert!(split_mass_drift(true) < 1e-13);
}

#[test]
fn strang_transport_tracks_exact_solution() {
    let ProblemSpec::TwoD(p) = registry_get("transport-2d-const").unwrap() else {
        panic!("expected a 2D problem");
    };
    let cfg = SplitConfig {
        scheme: TimeScheme::by_name("rk4").unwrap(),
        opts: StepOptions::default(),
        bc: p.bc,
        gauss_order: 3,
    };
    let mut errs = Vec::new();
    for n in [20usize, 40] {
        let mut f = p.initial_field(n, n).unwrap();
        let dt = 0.25 / 4.0;
        for _ in 0..4 {
            f = strang_step(&f, dt, &p, &cfg).unwrap();
        }
        let exact = p.exact_averages(&f.grid_x, &f.grid_y, f.time).unwrap();
        errs.push(
            f.values
                .iter()
                .zip(&exact)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())),
        );
    }
    let order = (errs[0] / errs[1]).log2();
    assert!(order > 4.0, "errors {errs:?}");
}
