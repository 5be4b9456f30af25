//! Growth functions: values, characteristics, conjugates, shifts and the
//! derived scalar functions.
//!
//!     cargo run --example growth_functions

use phicaloric::numerics::log_grid;
use phicaloric::orlicz::{biconjugate, characteristics, conjugate, select_q, ScalarAux};
use phicaloric::{OrliczFunction, PhiSpec};

fn main() -> phicaloric::Result<()> {
    let family = [
        OrliczFunction::power(1.5)?,
        OrliczFunction::power(3.0)?,
        OrliczFunction::max_power(2.0, 3.0)?,
        OrliczFunction::min_power(1.8, 2.5)?,
        OrliczFunction::power(3.0)?.shift(0.5)?,
    ];
    let grid = log_grid(1e-3, 1e3, 121);
    println!("{:<28} {:>9} {:>9} {:>9} {:>5}", "phi", "char_lo", "char_hi", "delta2", "q");
    for phi in &family {
        let c = characteristics(phi, &grid)?;
        let q = select_q(phi)?;
        println!("{:<28} {:>9.4} {:>9.4} {:>9.4} {:>5.1}", phi.label(), c.char_lo, c.char_hi, c.delta2, q.q);
    }

    let cubic = OrliczFunction::power(3.0)?;
    println!("\nconjugate of t³/3 at s = 1: {:.6} (closed form 2/3)", conjugate(&cubic, 1.0)?);
    println!("biconjugate at t = 2: {:.6} vs φ(2) = {:.6}", biconjugate(&cubic, 2.0)?, cubic.eval(2.0));

    let aux = ScalarAux::new(cubic.clone(), 3);
    println!("\nρ(t) = φ(t)^(n/2) t^(2-n) for n = 3:");
    for t in [0.1, 1.0, 10.0] {
        println!("  t = {t:>5}: ρ = {:.4e}, κ = {:.4}", aux.rho(t), aux.kappa(t));
    }
    let mono = aux.rho_almost_increasing(&grid, 1.01);
    println!("ρ almost increasing: {} (constant {:.4})", mono.pass, mono.constant);

    // the same functions can be described declaratively, as in run configs
    let spec: PhiSpec = serde_json::from_str(r#"{"kind": "shifted", "base": {"kind": "power", "p": 3}, "a": 0.5}"#)?;
    let shifted = spec.build()?;
    println!("\nfrom JSON: {} with φ(1) = {:.6}", shifted.label(), shifted.eval(1.0));
    Ok(())
}
