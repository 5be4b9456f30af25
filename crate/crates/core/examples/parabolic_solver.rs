//! Backward-Euler runs of the parabolic system on preset data, with errors
//! against the closed-form solutions and a snapshot written as CSV.
//!
//!     cargo run --release --example parabolic_solver

use phicaloric::solver::{solve_parabolic, write_snapshot_csv, GridSpec, PresetSpec, Problem, SolverOptions};
use phicaloric::OrliczFunction;

fn main() -> phicaloric::Result<()> {
    let heat = OrliczFunction::power(2.0)?;
    let grid = GridSpec::unit(1, 64, 1e-3, 0.05);
    let problem = Problem::from_preset(&heat, grid, &PresetSpec::Eigenmode { modes: vec![1] }, 1.0, 0)?;
    let field = solve_parabolic(&heat, &problem, SolverOptions::default())?;
    let err = field.error(problem.data.as_ref(), field.snapshots.len() - 1).unwrap();
    println!("heat eigenmode, 64 cells: L∞ error {:.3e} against the continuum solution", err.linf);

    let cubic = OrliczFunction::power(3.0)?;
    println!("\nBarenblatt profile, p = 3 on [-1, 1]:");
    for cells in [32, 64, 128] {
        let mut grid = GridSpec::unit(1, cells, 0.1 / cells as f64, 0.05);
        grid.lower = vec![-1.0];
        let preset = PresetSpec::Barenblatt {
            t0: 0.01,
            c: 1.0,
            center: vec![],
        };
        let problem = Problem::from_preset(&cubic, grid, &preset, 1.0, 0)?;
        let field = solve_parabolic(&cubic, &problem, SolverOptions::default())?;
        let err = field.error(problem.data.as_ref(), field.snapshots.len() - 1).unwrap();
        let newton: usize = field.stats.iter().map(|s| s.iterations).sum();
        println!("  {cells:>4} cells: L1 error {:.3e}, {newton} Newton iterations", err.l1);
    }

    let grid = GridSpec::unit(2, 24, 5e-3, 0.05);
    let problem = Problem::from_preset(&cubic, grid, &PresetSpec::RandomSmooth { modes: 4 }, 1.0, 7)?;
    let field = solve_parabolic(&cubic, &problem, SolverOptions::default())?;
    let path = std::env::temp_dir().join("phicaloric_random_smooth.csv");
    let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    write_snapshot_csv(&mut file, &field.geo, field.last())?;
    println!("\n2-D random-smooth run: {} snapshots, final state in {}", field.snapshots.len(), path.display());
    Ok(())
}
