//! The algebraic recursion `a_{k+1} <= C b^k a_k (a_k/γ)^α`: the threshold
//! `γ`, the extremal sequence and the decay grid.
//!
//!     cargo run --example iteration_lemma

use phicaloric::iteration::{decay_csv, gamma_threshold, iterate_bound, standard_grid, verify_decay, RecursionParams};

fn main() -> phicaloric::Result<()> {
    let params = RecursionParams::at_threshold(1.0, 1.0, 2.0, 1.0)?;
    let seq = iterate_bound(&params, 8)?;
    println!("threshold γ = {}", params.gamma);
    println!("extremal sequence: {:?}", seq.values);

    let below = RecursionParams::new(1.0, 1.0, 2.0, 1.0, 0.9 * gamma_threshold(1.0, 1.0, 2.0, 1.0)?)?;
    let blown = iterate_bound(&below, 200)?;
    println!("10% below the threshold the sequence overflows at k = {:?}", blown.overflow_at);

    let rows = verify_decay(&standard_grid())?;
    let passed = rows.iter().filter(|r| r.pass).count();
    println!("\n{passed}/{} grid points decay below 1e-10 a0 within 200 steps", rows.len());
    print!("{}", decay_csv(&rows[..6]));
    Ok(())
}
