//! The stationary sup bound and the decay of the level quantities on
//! p-harmonic solutions.
//!
//!     cargo run --release --example stationary_bound

use phicaloric::harness::{stationary_check, Ball, Samples};
use phicaloric::solver::{solve_elliptic, GridSpec, PresetSpec, Problem, SolverOptions};
use phicaloric::OrliczFunction;

fn main() -> phicaloric::Result<()> {
    for p in [1.8, 3.0, 4.5] {
        let phi = OrliczFunction::power(p)?;
        let mut grid = GridSpec::unit(2, 32, 1.0, 0.0);
        grid.lower = vec![0.5, 0.5];
        grid.upper = vec![1.5, 1.5];
        let problem = Problem::from_preset(&phi, grid, &PresetSpec::RadialPHarmonic { center: vec![] }, 1.0, 0)?;
        let field = solve_elliptic(&phi, &problem, SolverOptions::default())?;
        let s = Samples::stationary(&field, &phi, Ball { x0: [1.0, 1.0], r: 0.2 })?;
        let r = stationary_check(&s, 12, None)?;
        let last = r.u.last().copied().unwrap_or(0.0);
        println!(
            "p = {p}: sup φ(|∇u|) / mean = {:.4}, c_∞ = {:.4}, U_12/U_0 = {:.2e}",
            r.ratio,
            r.c_infty,
            last / r.u[0]
        );
    }
    Ok(())
}
