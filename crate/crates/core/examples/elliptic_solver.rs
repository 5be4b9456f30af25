//! Stationary solves: the radial p-harmonic benchmark under refinement.
//!
//!     cargo run --release --example elliptic_solver

use phicaloric::solver::{solve_elliptic, GridSpec, PresetSpec, Problem, SolverOptions};
use phicaloric::OrliczFunction;

fn main() -> phicaloric::Result<()> {
    for p in [1.8, 3.0, 4.5] {
        let phi = OrliczFunction::power(p)?;
        print!("p = {p}:");
        for cells in [16, 32, 64] {
            let mut grid = GridSpec::unit(2, cells, 1.0, 0.0);
            grid.lower = vec![0.5, 0.5];
            grid.upper = vec![1.5, 1.5];
            let problem = Problem::from_preset(&phi, grid, &PresetSpec::RadialPHarmonic { center: vec![] }, 1.0, 0)?;
            let field = solve_elliptic(&phi, &problem, SolverOptions::default())?;
            let err = field.error(problem.data.as_ref(), 0).unwrap();
            print!("  {cells} cells {:.2e}", err.linf);
        }
        println!();
    }
    Ok(())
}
