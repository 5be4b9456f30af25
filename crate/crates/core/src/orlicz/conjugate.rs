use crate::error::{Error, Result};
use crate::numerics::{golden_max, increasing_root};

use super::function::{Kind, OrliczFunction};

/// Smallest `t > 0` bracket with `g(t) >= target` for an increasing `g`, by
/// doubling from `start`. `None` if `g` never reaches `target`.
pub(crate) fn bracket_up(g: impl Fn(f64) -> f64, target: f64, start: f64) -> Option<(f64, f64)> {
    let mut hi = start.max(f64::MIN_POSITIVE);
    let mut lo = 0.0;
    for _ in 0..2200 {
        let v = g(hi);
        if !v.is_finite() && v > 0.0 {
            return Some((lo, hi));
        }
        if v >= target {
            return Some((lo, hi));
        }
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return None;
        }
    }
    None
}

/// `t` with `φ'(t) = s`.
pub fn invert_deriv(phi: &OrliczFunction, s: f64) -> Result<f64> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    let (mut lo, hi) = bracket_up(|t| phi.deriv(t), s, 1.0)
        .ok_or_else(|| Error::Divergence(format!("φ' stays below {s:e}")))?;
    if lo == 0.0 {
        // tighten from below so Newton starts in a sane range
        lo = hi;
        while lo > f64::MIN_POSITIVE && phi.deriv(lo) > s {
            lo *= 0.5;
        }
    }
    Ok(increasing_root(|t| phi.deriv(t) - s, |t| phi.deriv2(t), lo, hi, 1e-15))
}

/// `φ*(s) = sup_{t >= 0} (s t - φ(t))`.
///
/// Closed form for `t^p/p`; otherwise the maximiser solves `φ'(t) = s`.
pub fn conjugate(phi: &OrliczFunction, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter(format!("conjugate needs s >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    match phi.kind() {
        Kind::Power { p } => {
            let pc = p / (p - 1.0);
            return Ok(s.powf(pc) / pc);
        }
        Kind::Shifted { a } if a == 0.0 => return conjugate(phi.base().unwrap(), s),
        _ => {}
    }
    let t = invert_deriv(phi, s)?;
    Ok((s * t - phi.eval(t)).max(0.0))
}

/// Derivative of the conjugate, `(φ*)'(s) = (φ')^{-1}(s)`.
pub fn conjugate_deriv(phi: &OrliczFunction, s: f64) -> Result<f64> {
    invert_deriv(phi, s)
}

/// `φ**(t)` by direct golden-section maximisation of `t s - φ*(s)`; used to
/// check duality independently of the conjugate's own construction.
pub fn biconjugate(phi: &OrliczFunction, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    let guess = phi.deriv(t);
    let objective = |s: f64| t * s - conjugate(phi, s).unwrap_or(f64::INFINITY);
    let (_, v) = golden_max(objective, 0.0, 4.0 * guess, 1e-13);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_self_conjugate() {
        let phi = OrliczFunction::power(2.0).unwrap();
        assert_eq!(conjugate(&phi, 4.0).unwrap(), 8.0);
        assert_eq!(conjugate(&phi, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn cubic_conjugate_closed_form_and_grid_sup() {
        let phi = OrliczFunction::power(3.0).unwrap();
        let v = conjugate(&phi, 1.0).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        // brute-force sup over a fine grid
        let grid_sup = (0..=200_000)
            .map(|i| {
                let t = i as f64 * 1e-5;
                t - t * t * t / 3.0
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((grid_sup - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn numeric_path_matches_closed_form() {
        // same function, but through the generic (non-power) branch
        let phi = OrliczFunction::max_power(2.5, 2.5).unwrap();
        for s in [1e-3, 0.7, 2.0, 50.0] {
            let expected = {
                // φ = t^{2.5}, φ* = (s/2.5)^{5/3} * 1.5
                let t = (s / 2.5f64).powf(1.0 / 1.5);
                s * t - t.powf(2.5)
            };
            let got = conjugate(&phi, s).unwrap();
            assert!((got - expected).abs() <= 1e-12 * expected, "s={s}");
        }
    }

    #[test]
    fn biconjugate_recovers_min_power() {
        let phi = OrliczFunction::min_power(1.5, 3.0).unwrap();
        for t in [0.01, 0.5, 0.95, 3.0] {
            let v = biconjugate(&phi, t).unwrap();
            assert!((v - phi.eval(t)).abs() <= 1e-9 * phi.eval(t), "t={t}");
        }
    }
}
