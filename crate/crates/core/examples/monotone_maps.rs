//! The maps `A(P)` and `V(P)`, the equivalences between their differences,
//! the radial shrink and the shift-change calibration.
//!
//!     cargo run --release --example monotone_maps

use phicaloric::tensor::{a_map, calibrate_shift_change, hammer_check, hammer_envelope, s_epsilon, v_map, GradMatrix};
use phicaloric::OrliczFunction;

fn main() -> phicaloric::Result<()> {
    let phi = OrliczFunction::power(3.0)?;
    let p = GradMatrix::new(2, 1, vec![1.0, 2.0])?;
    let q = GradMatrix::new(2, 1, vec![-0.5, 0.25])?;
    println!("A(P) = {:?}", a_map(&phi, &p).entries());
    println!("V(P) = {:?}", v_map(&phi, &p).entries());
    let single = hammer_check(&phi, &p, &q)?;
    println!("quantities for one pair: {:?}", single.q);

    for big_n in [1, 3] {
        let env = hammer_envelope(&phi, 2, big_n, 10_000, 1);
        println!("\nenvelope for n = 2, N = {big_n} ({} pairs, {} rejected)", env.samples, env.rejected);
        for e in &env.envelope {
            println!("  {:<8} [{:.4}, {:.4}]", e.pair, e.min, e.max);
        }
    }

    let shrunk = s_epsilon(&p, 0.5);
    println!("\n|S_0.5(P)| = {:.6} for |P| = {:.6}", shrunk.norm(), p.norm());

    let cal = calibrate_shift_change(&phi, 0.1)?;
    println!("shift change at δ = 0.1: c_δ = {:.3}, conjugate c_δ = {:.3}", cal.c_delta, cal.c_delta_conj);
    Ok(())
}
