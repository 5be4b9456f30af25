//! The harness on one parabolic run: main sup bound, the level-set trace and
//! its closure, the energy inequality, the Hölder diagnostic and the cutoffs.
//!
//!     cargo run --release --example degiorgi_harness

use phicaloric::harness::*;
use phicaloric::solver::{solve_parabolic, GridSpec, PresetSpec, Problem, SolverOptions};
use phicaloric::OrliczFunction;

fn main() -> phicaloric::Result<()> {
    let phi = OrliczFunction::power(3.0)?;
    let grid = GridSpec::unit(2, 32, 2e-3, 0.2);
    let preset = PresetSpec::Barenblatt {
        t0: 0.05,
        c: 1.0,
        center: vec![0.5, 0.5],
    };
    let problem = Problem::from_preset(&phi, grid, &preset, 1.0, 0)?;
    let field = solve_parabolic(&phi, &problem, SolverOptions::default())?;
    let cyl = ParabolicCylinder::new(0.2, [0.5, 0.5], 0.15, 1.0)?;
    let s = Samples::parabolic(&field, &phi, cyl)?;

    let b = verify_main_bound(&s);
    println!("main bound: lhs {:.4e}, rhs {:.4e}, ratio {:.4}", b.lhs, b.rhs, b.ratio);

    let top = resolve_gamma_infty(&s, &GammaPolicy::Quantile { q: 1.0 }, 8)?;
    let trace = compute_trace(&s, top, 8)?;
    let lemma = verify_levelset_lemma(&trace, &s)?;
    println!("\nlevels up to γ_∞ = {top:.4}:");
    for k in 0..trace.w.len() {
        println!("  k = {k}: γ_k {:.4}  W_k {:.4e}", trace.levels[k], trace.w[k]);
    }
    println!("largest level constant {:.4}, growth exponent {:?}", lemma.max_c, lemma.beta);

    let closed = calibrate_closure(&s, 8)?;
    println!(
        "closure: κ = {:.3}, fitted C = {:.3e}, M = {:.4} against threshold {:.4e}, decays {}",
        closed.kappa, closed.report.c_fit, closed.report.m, closed.report.threshold, closed.report.decays
    );

    let eta = default_eta(&s);
    let sweep = caccioppoli_level_sweep(&s, &eta, 8);
    println!("\nenergy inequality over 8 levels: c_emp {:.3?}, variation ×{:.2}", sweep.c_emp, sweep.variation);

    let h = hoelder_diagnostic(&s);
    println!("Hölder fit: {:?} over radii {:.3?}", h.mu_fit, h.radii);

    let family = s.family();
    for k in 0..3 {
        let cert = family.certificate(k, (0..s.len()).map(|i| s.point(i)));
        println!("cutoff {k}: {cert:?}");
    }
    Ok(())
}
