use std::f64::consts::PI;

use phicaloric::solver::{discrete_fields, solve_elliptic, solve_parabolic, GridSpec, PresetSpec, Problem, SolverOptions};
use phicaloric::OrliczFunction;

fn square(cells: usize, dt: f64, t_end: f64) -> GridSpec {
    GridSpec::unit(2, cells, dt, t_end)
}

#[test]
fn heat_eigenmode_tracks_discrete_decay() {
    let phi = OrliczFunction::power(2.0).unwrap();
    let grid = GridSpec::unit(1, 64, 1e-3, 0.05);
    let steps = grid.steps();
    let problem = Problem::from_preset(&phi, grid, &PresetSpec::Eigenmode { modes: vec![2] }, 1.0, 0).unwrap();
    let field = solve_parabolic(&phi, &problem, SolverOptions::default()).unwrap();
    let h = 1.0 / 64.0;
    let lam = 4.0 / (h * h) * (2.0 * PI * h / 2.0).sin().powi(2);
    let decay = (1.0 + 1e-3 * lam).powi(-(steps as i32));
    for (cell, u) in field.last().u.iter().enumerate() {
        let x = field.geo.cell_center(cell)[0];
        assert!((u - decay * (2.0 * PI * x).sin()).abs() < 1e-11);
    }
}

#[test]
fn affine_data_is_stationary_for_every_growth() {
    let phis = [
        OrliczFunction::power(1.6).unwrap(),
        OrliczFunction::power(3.0).unwrap(),
        OrliczFunction::max_power(2.0, 3.0).unwrap(),
        OrliczFunction::min_power(1.8, 2.5).unwrap(),
    ];
    for phi in &phis {
        let mut grid = square(8, 0.01, 0.03);
        grid.components = 2;
        let preset = PresetSpec::Affine {
            offset: 0.3,
            slope: vec![1.0, -0.5],
        };
        let problem = Problem::from_preset(phi, grid, &preset, 1.0, 0).unwrap();
        let field = solve_parabolic(phi, &problem, SolverOptions::default()).unwrap();
        let u0 = &field.snapshots[0].u;
        let drift = field.last().u.iter().zip(u0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-10, "{phi}: drift {drift:e}");
    }
}

#[test]
fn harmonic_quadratic_converges_at_second_order() {
    let phi = OrliczFunction::power(2.0).unwrap();
    let err = |cells| {
        let problem = Problem::from_preset(&phi, square(cells, 0.05, 0.5), &PresetSpec::HarmonicQuadratic, 1.0, 0).unwrap();
        let field = solve_parabolic(&phi, &problem, SolverOptions::default()).unwrap();
        field.error(problem.data.as_ref(), field.snapshots.len() - 1).unwrap().linf
    };
    let (coarse, fine) = (err(16), err(32));
    assert!(coarse / fine > 3.5, "{coarse:e} {fine:e}");
}

#[test]
fn zero_stays_zero() {
    let phi = OrliczFunction::power(1.5).unwrap();
    let problem = Problem::from_preset(&phi, square(8, 0.01, 0.02), &PresetSpec::Zero, 1.0, 0).unwrap();
    let field = solve_parabolic(&phi, &problem, SolverOptions::default()).unwrap();
    assert!(field.last().u.iter().all(|&u| u == 0.0));
}

#[test]
fn energy_dissipates_and_maximum_principle_holds() {
    for p in [1.8, 3.0] {
        let phi = OrliczFunction::power(p).unwrap();
        let problem = Problem::from_preset(&phi, square(16, 2e-3, 0.02), &PresetSpec::RandomSmooth { modes: 4 }, 1.0, 7).unwrap();
        let field = solve_parabolic(&phi, &problem, SolverOptions::default()).unwrap();
        for s in &field.stats {
            assert!(s.energy_after <= s.energy_before * (1.0 + 1e-12), "p={p}: {s:?}");
        }
        let bound = field.snapshots[0].u.iter().fold(0.0f64, |m, u| m.max(u.abs()));
        for snap in &field.snapshots {
            let m = snap.u.iter().fold(0.0f64, |m, u| m.max(u.abs()));
            assert!(m <= bound * (1.0 + 1e-9), "p={p}: {m} > {bound}");
        }
    }
}

#[test]
fn components_evolve_independently_for_heat() {
    let phi = OrliczFunction::power(2.0).unwrap();
    let mut grid = square(16, 5e-3, 0.02);
    grid.components = 3;
    let problem = Problem::from_preset(&phi, grid.clone(), &PresetSpec::Eigenmode { modes: vec![1, 2] }, 1.0, 0).unwrap();
    let field = solve_parabolic(&phi, &problem, SolverOptions::default()).unwrap();
    grid.components = 1;
    let single = Problem::from_preset(&phi, grid, &PresetSpec::Eigenmode { modes: vec![1, 2] }, 1.0, 0).unwrap();
    let reference = solve_parabolic(&phi, &single, SolverOptions::default()).unwrap();
    for (cell, r) in reference.last().u.iter().enumerate() {
        for c in 0..3 {
            let u = field.last().u[cell * 3 + c];
            assert!((u - r / (c as f64 + 1.0)).abs() < 1e-12);
        }
    }
}

#[test]
fn snapshot_stride_and_times() {
    let phi = OrliczFunction::power(2.0).unwrap();
    let mut grid = GridSpec::unit(1, 16, 0.01, 0.1);
    grid.snapshot_stride = 3;
    let problem = Problem::from_preset(&phi, grid, &PresetSpec::Eigenmode { modes: vec![] }, 1.0, 0).unwrap();
    let field = solve_parabolic(&phi, &problem, SolverOptions::default()).unwrap();
    let times = field.times();
    assert_eq!(times.len(), 5);
    assert!((times[4] - 0.1).abs() < 1e-12);
    assert_eq!(field.stats.len(), 10);
}

#[test]
fn elliptic_affine_and_derived_fields() {
    let phi = OrliczFunction::power(4.0).unwrap();
    let preset = PresetSpec::Affine {
        offset: 0.0,
        slope: vec![2.0, 1.0],
    };
    let problem = Problem::from_preset(&phi, square(12, 1.0, 0.0), &preset, 1.0, 0).unwrap();
    let field = solve_elliptic(&phi, &problem, SolverOptions::default()).unwrap();
    assert!(field.error(problem.data.as_ref(), 0).unwrap().linf < 1e-9);
    let d = &discrete_fields(&phi, &field)[0];
    assert!(d.v.iter().all(|v| (v - 5f64.sqrt()).abs() < 1e-8));
}

#[test]
fn random_smooth_is_seed_deterministic() {
    let phi = OrliczFunction::power(2.5).unwrap();
    let run = |seed| {
        let problem = Problem::from_preset(&phi, square(8, 0.01, 0.02), &PresetSpec::RandomSmooth { modes: 3 }, 1.0, seed).unwrap();
        solve_parabolic(&phi, &problem, SolverOptions::default()).unwrap()
    };
    let (a, b, c) = (run(1), run(1), run(2));
    assert_eq!(a.last().u, b.last().u);
    assert_ne!(a.last().u, c.last().u);
}

#[test]
fn bad_configurations_are_rejected() {
    let phi = OrliczFunction::max_power(2.0, 3.0).unwrap();
    let grid = GridSpec::unit(1, 16, 0.01, 0.1);
    assert!(Problem::from_preset(&phi, grid.clone(), &PresetSpec::Barenblatt { t0: 0.1, c: 1.0, center: vec![] }, 1.0, 0).is_err());
    let p3 = OrliczFunction::power(3.0).unwrap();
    assert!(Problem::from_preset(&p3, square(8, 0.1, 0.1), &PresetSpec::Manufactured, 1.0, 0).is_err());
    assert!(GridSpec::unit(1, 4, 0.01, 0.1).geometry().is_err());
}

#[test]
fn halving_the_regularisation_floor_barely_moves_the_gradient() {
    for p in [1.8, 3.0] {
        let phi = OrliczFunction::power(p).unwrap();
        let problem = Problem::from_preset(&phi, square(16, 2e-3, 0.04), &PresetSpec::RandomSmooth { modes: 4 }, 1.0, 11).unwrap();
        let sup_grad = |options: SolverOptions| {
            let field = solve_parabolic(&phi, &problem, options).unwrap();
            discrete_fields(&phi, &field).last().unwrap().v.iter().fold(0.0f64, |m, v| m.max(*v))
        };
        let base = SolverOptions::default();
        let halved = SolverOptions {
            eps: base.eps.with_floor_divided(2.0),
            ..base
        };
        let (a, b) = (sup_grad(base), sup_grad(halved));
        assert!((a - b).abs() < 0.01 * a, "p={p}: {a} vs {b}");
    }
}
