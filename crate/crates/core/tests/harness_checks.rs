use phicaloric::harness::*;
use phicaloric::solver::{solve_elliptic, solve_parabolic, GradOrField, GridSpec, PresetSpec, Problem, SolverOptions};
use phicaloric::OrliczFunction;
use proptest::prelude::*;

fn parabolic(p: f64, preset: &PresetSpec, cells: usize, dt: f64, amplitude: f64) -> (OrliczFunction, GradOrField) {
    let phi = OrliczFunction::power(p).unwrap();
    let grid = GridSpec::unit(2, cells, dt, 0.2);
    let problem = Problem::from_preset(&phi, grid, preset, amplitude, 0).unwrap();
    let field = solve_parabolic(&phi, &problem, SolverOptions::default()).unwrap();
    (phi, field)
}

fn elliptic(p: f64, preset: &PresetSpec, lower: f64, cells: usize) -> (OrliczFunction, GradOrField) {
    let phi = OrliczFunction::power(p).unwrap();
    let mut grid = GridSpec::unit(2, cells, 1.0, 1.0);
    grid.lower = vec![lower; 2];
    grid.upper = vec![lower + 1.0; 2];
    let problem = Problem::from_preset(&phi, grid, preset, 1.0, 0).unwrap();
    let field = solve_elliptic(&phi, &problem, SolverOptions::default()).unwrap();
    (phi, field)
}

fn affine_slope() -> PresetSpec {
    PresetSpec::Affine {
        offset: 0.2,
        slope: vec![1.2, -0.5],
    }
}

fn centre_cylinder() -> ParabolicCylinder {
    ParabolicCylinder::new(0.2, [0.5, 0.5], 0.18, 1.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn bochner_norm_is_homogeneous_and_subadditive(
        f in prop::collection::vec(-3.0f64..3.0, 24),
        g in prop::collection::vec(-3.0f64..3.0, 24),
        w in prop::collection::vec(0.0f64..1.0, 24),
        scale in -5.0f64..5.0,
        s in prop::sample::select(vec![1.0, 2.0, 3.5, f64::INFINITY]),
        r in prop::sample::select(vec![1.0, 1.5, 4.0, f64::INFINITY]),
    ) {
        let w: Vec<f64> = w.iter().map(|x| x + 0.05).collect();
        let norm = |h: &[f64]| weighted_bochner(h, &w, 4, 6, s, r);
        let scaled: Vec<f64> = f.iter().map(|x| scale * x).collect();
        prop_assert!((norm(&scaled) - scale.abs() * norm(&f)).abs() <= 1e-12 * (1.0 + norm(&scaled)));
        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        prop_assert!(norm(&sum) <= norm(&f) + norm(&g) + 1e-12);
    }
}

#[test]
fn bochner_norm_stable_under_refinement() {
    let norm = |cells: usize, dt: f64| {
        let (phi, field) = parabolic(2.0, &affine_slope(), cells, dt, 1.0);
        let s = Samples::parabolic(&field, &phi, centre_cylinder()).unwrap();
        let r = sobolev_exponent(2);
        bochner_norm(&s, &s.phi_v, 1.0, r, 0)
    };
    let (coarse, fine) = (norm(32, 4e-3), norm(64, 2e-3));
    assert!(rel(coarse, fine) < 0.01, "{coarse} vs {fine}");
}

#[test]
fn trace_levels_and_quantities_are_monotone() {
    let (phi, field) = parabolic(3.0, &PresetSpec::RandomSmooth { modes: 4 }, 32, 4e-3, 1.0);
    let s = Samples::parabolic(&field, &phi, centre_cylinder()).unwrap();
    let g = resolve_gamma_infty(&s, &GammaPolicy::Quantile { q: 1.0 }, 8).unwrap();
    let trace = compute_trace(&s, g, 10).unwrap();
    for k in 1..trace.w.len() {
        assert!(trace.levels[k] > trace.levels[k - 1]);
        assert!(trace.y[k] <= trace.y[k - 1] && trace.z[k] <= trace.z[k - 1] && trace.w[k] <= trace.w[k - 1]);
    }
    let report = verify_levelset_lemma(&trace, &s).unwrap();
    assert!(report.beta.map_or(true, |b| b <= 3.2), "{:?}", report.beta);
    let calibrated = compute_trace(&s, choose_gamma_infty(&s, 1.0).unwrap().gamma_infty, 10).unwrap();
    let c = closure(&calibrated, 2).unwrap();
    assert!(c.dominates && c.decays, "{c:?}");
}

#[test]
fn calibrated_level_matches_closed_forms() {
    // Heat: ρ = φ = t²/2, so min{γ²/2, γ²/α} = γ²/2 for α ≤ 2.
    let (phi, field) = parabolic(2.0, &PresetSpec::Eigenmode { modes: vec![1, 1] }, 16, 1e-2, 1.0);
    let s = Samples::parabolic(&field, &phi, centre_cylinder()).unwrap();
    let choice = choose_gamma_infty(&s, 1.0).unwrap();
    assert!(rel(choice.gamma_infty, (2.0 * choice.w0).sqrt()) < 1e-10);

    // p = 3, n = 2, α = 1: min{γ³/3, γ²} = W₀.
    let (phi, field) = parabolic(3.0, &PresetSpec::Eigenmode { modes: vec![1, 1] }, 16, 1e-2, 1.0);
    let s = Samples::parabolic(&field, &phi, centre_cylinder()).unwrap();
    let choice = choose_gamma_infty(&s, 1.0).unwrap();
    let g = choice.gamma_infty;
    assert!(rel((g * g * g / 3.0).min(g * g), choice.w0) < 1e-10);
}

#[test]
fn zero_field_gives_vacuous_checks() {
    let (phi, field) = parabolic(3.0, &PresetSpec::Zero, 16, 1e-2, 1.0);
    let s = Samples::parabolic(&field, &phi, centre_cylinder()).unwrap();
    assert_eq!(choose_gamma_infty(&s, 1.0).unwrap().gamma_infty, 0.0);
    let b = verify_main_bound(&s);
    assert_eq!((b.lhs, b.rhs, b.ratio), (0.0, 0.0, 0.0));
    match dibenedetto_compare(&s) {
        DiBenedettoOutcome::Compared(p) => {
            assert_eq!(p.lhs, 0.0);
            assert_eq!(p.rhs_dib, p.alpha_term);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn heat_skips_the_classical_comparison() {
    let (phi, field) = parabolic(2.0, &PresetSpec::Eigenmode { modes: vec![1, 1] }, 16, 1e-2, 1.0);
    let s = Samples::parabolic(&field, &phi, centre_cylinder()).unwrap();
    assert!(matches!(dibenedetto_compare(&s), DiBenedettoOutcome::Skipped(_)));
}

#[test]
fn affine_data_gives_closed_form_main_bound() {
    let c2: f64 = 1.2 * 1.2 + 0.5 * 0.5;
    for alpha in [0.5, 1.0, 3.0] {
        let (phi, field) = parabolic(2.0, &affine_slope(), 16, 1e-2, 1.0);
        let cyl = ParabolicCylinder::new(0.2, [0.5, 0.5], 0.1, alpha).unwrap();
        let s = Samples::parabolic(&field, &phi, cyl).unwrap();
        let b = verify_main_bound(&s);
        let expect = (c2 / 2.0).min(c2 / alpha) / (c2 / alpha + c2 / 2.0);
        assert!(rel(b.ratio, expect) < 1e-9, "α={alpha}: {} vs {expect}", b.ratio);
    }
}

#[test]
fn heat_main_bound_is_scale_invariant() {
    let ratio = |amp: f64| {
        let (phi, field) = parabolic(2.0, &PresetSpec::RandomSmooth { modes: 4 }, 16, 1e-2, amp);
        let s = Samples::parabolic(&field, &phi, centre_cylinder()).unwrap();
        verify_main_bound(&s).ratio
    };
    let (a, b) = (ratio(1.0), ratio(7.5));
    assert!(rel(a, b) < 1e-6, "{a} vs {b}");
}

#[test]
fn cutoff_certificates_hold_on_samples() {
    let (phi, field) = parabolic(2.0, &affine_slope(), 32, 4e-3, 1.0);
    let s = Samples::parabolic(&field, &phi, centre_cylinder()).unwrap();
    let fam = s.family();
    for k in 0..6 {
        let cert = fam.certificate(k, (0..s.len()).map(|i| s.point(i)));
        assert!(cert.pass, "k={k}: {cert:?}");
    }
}

#[test]
fn stationary_affine_ratio_is_one() {
    let (phi, field) = elliptic(3.0, &affine_slope(), 0.0, 24);
    let s = Samples::stationary(&field, &phi, Ball { x0: [0.5, 0.5], r: 0.2 }).unwrap();
    let r = stationary_check(&s, 4, None).unwrap();
    assert!((r.ratio - 1.0).abs() < 1e-8, "{}", r.ratio);
}

#[test]
fn stationary_radial_levels_decay() {
    let (phi, field) = elliptic(3.0, &PresetSpec::RadialPHarmonic { center: vec![] }, 0.5, 32);
    let s = Samples::stationary(&field, &phi, Ball { x0: [1.0, 1.0], r: 0.2 }).unwrap();
    let r = stationary_check(&s, 12, None).unwrap();
    assert!(r.ratio.is_finite() && r.ratio > 0.0);
    assert!(r.decay < 1e-6, "U_12/U_0 = {}", r.decay);
    assert!(r.u.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn w21_ratios_stable_under_refinement() {
    let run = |cells: usize, dt: f64| {
        let (phi, field) = parabolic(2.0, &PresetSpec::Eigenmode { modes: vec![1, 1] }, cells, dt, 1.0);
        let s = Samples::parabolic(&field, &phi, centre_cylinder()).unwrap();
        w21_check(&s).unwrap()
    };
    let (a, b) = (run(32, 4e-3), run(64, 2e-3));
    assert!(rel(a.ratio1, b.ratio1) < 0.1 && rel(a.ratio2, b.ratio2) < 0.1, "{a:?} {b:?}");
}

#[test]
fn heat_caccioppoli_baseline_within_envelope() {
    let (phi, field) = parabolic(2.0, &PresetSpec::RandomSmooth { modes: 4 }, 32, 4e-3, 1.0);
    let s = Samples::parabolic(&field, &phi, centre_cylinder()).unwrap();
    let r = caccioppoli_check(&s, &LevelWeight::One, &default_eta(&s));
    assert!(r.c_emp > 0.0 && r.c_emp < 64.0, "{r:?}");
}

#[test]
fn hoelder_exponent_resolved_for_smooth_heat() {
    let (phi, field) = parabolic(2.0, &PresetSpec::Eigenmode { modes: vec![1, 1] }, 32, 4e-3, 1.0);
    let s = Samples::parabolic(&field, &phi, centre_cylinder()).unwrap();
    let h = hoelder_diagnostic(&s);
    assert!(!h.unresolved);
    assert!(h.mu_fit.unwrap() >= 0.9, "{h:?}");
}
