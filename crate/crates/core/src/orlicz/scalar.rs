use crate::numerics::increasing_root;

use super::conjugate::bracket_up;
use super::function::OrliczFunction;
use crate::error::{Error, Result};

/// Scalar functions derived from `φ` in spatial dimension `n`.
#[derive(Clone, Debug)]
pub struct ScalarAux {
    pub phi: OrliczFunction,
    pub n: usize,
}

impl ScalarAux {
    pub fn new(phi: OrliczFunction, n: usize) -> Self {
        Self { phi, n }
    }

    /// `ρ(t) = φ(t)^{n/2} t^{2-n}`.
    pub fn rho(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.phi.eval(t).powf(self.n as f64 / 2.0) * t.powi(2 - self.n as i32)
    }

    /// `κ(t) = max{√φ''(t), 1/√φ''(t)}`.
    pub fn kappa(&self, t: f64) -> f64 {
        let s = self.phi.deriv2(t).sqrt();
        s.max(1.0 / s)
    }

    /// `(√(φ'(t)t) - √(φ'(γ)γ))₊`.
    pub fn g_level(&self, gamma: f64, t: f64) -> f64 {
        if t <= gamma {
            return 0.0;
        }
        ((self.phi.deriv(t) * t).sqrt() - (self.phi.deriv(gamma) * gamma).sqrt()).max(0.0)
    }

    /// `(t² - γ²)₊`.
    pub fn h_level(gamma: f64, t: f64) -> f64 {
        if t <= gamma {
            0.0
        } else {
            t * t - gamma * gamma
        }
    }

    /// Whether `ρ` is almost increasing on `grid` with constant `c`.
    pub fn rho_almost_increasing(&self, grid: &[f64], c: f64) -> AlmostIncreasing {
        let values: Vec<f64> = grid.iter().map(|&t| self.rho(t)).collect();
        almost_increasing(&values, c)
    }
}

/// Outcome of an almost-monotonicity test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlmostIncreasing {
    pub pass: bool,
    /// Smallest `c` with `f(t₁) <= c f(t₂)` for all sampled `t₁ <= t₂`.
    pub constant: f64,
}

/// Tests `f(t₁) <= c · f(t₂)` for all `t₁ <= t₂` on samples given in
/// increasing `t` order. The worst pair is found through the running maximum.
pub fn almost_increasing(values: &[f64], c: f64) -> AlmostIncreasing {
    let mut running = 0.0f64;
    let mut worst = 1.0f64;
    for &v in values {
        running = running.max(v);
        if v > 0.0 {
            worst = worst.max(running / v);
        } else if running > 0.0 {
            worst = f64::INFINITY;
        }
    }
    AlmostIncreasing {
        pass: worst <= c,
        constant: worst,
    }
}

/// `γ >= 0` with `φ'(γ) γ = c²`.
pub fn invert_phiprime_t(phi: &OrliczFunction, c: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::InvalidParameter(format!("level must be >= 0, got {c}")));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    let target = c * c;
    if !target.is_finite() {
        return Err(Error::Range(format!("level {c:e} squared overflows")));
    }
    let g = |t: f64| phi.deriv(t) * t;
    let (_, hi) = bracket_up(g, target, 1.0).ok_or_else(|| Error::Range(format!("no γ with φ'(γ)γ = {target:e}")))?;
    let mut lo = hi;
    while g(lo) > target {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::Range(format!("γ for level {c:e} underflows")));
        }
    }
    let root = increasing_root(
        |t| g(t) - target,
        |t| phi.deriv2(t) * t + phi.deriv(t),
        lo,
        hi,
        1e-15,
    );
    if !root.is_finite() {
        return Err(Error::Range(format!("γ for level {c:e} is not finite")));
    }
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::log_grid;

    #[test]
    fn invert_examples() {
        let quad = OrliczFunction::power(2.0).unwrap();
        assert!((invert_phiprime_t(&quad, 2.0).unwrap() - 2.0).abs() < 1e-14);
        let cubic = OrliczFunction::power(3.0).unwrap();
        assert!((invert_phiprime_t(&cubic, 8f64.sqrt()).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(invert_phiprime_t(&cubic, 0.0).unwrap(), 0.0);
        assert!(matches!(invert_phiprime_t(&cubic, 1e200), Err(Error::Range(_))));
    }

    #[test]
    fn rho_power_identity() {
        for (p, n) in [(3.0, 2usize), (1.8, 2), (3.0, 1), (2.5, 3)] {
            let aux = ScalarAux::new(OrliczFunction::power(p).unwrap(), n);
            let nu2 = n as f64 * (p - 2.0) + 4.0;
            for t in [0.1f64, 1.0, 7.0] {
                let expect = p.powf(-(n as f64) / 2.0) * t.powf(nu2 / 2.0);
                assert!((aux.rho(t) - expect).abs() <= 1e-12 * expect);
            }
        }
    }

    #[test]
    fn rho_over_phi_constant_only_for_quadratic() {
        let grid = log_grid(1e-2, 1e2, 9);
        for n in 1..=3 {
            let aux = ScalarAux::new(OrliczFunction::power(2.0).unwrap(), n);
            let r: Vec<f64> = grid.iter().map(|&t| aux.rho(t) / aux.phi.eval(t)).collect();
            assert!(r.iter().all(|x| (x - r[0]).abs() <= 1e-12 * r[0]));
        }
        // in the plane ρ = φ for every φ; elsewhere the ratio drifts unless p = 2
        for n in [1usize, 3] {
            let aux = ScalarAux::new(OrliczFunction::power(3.0).unwrap(), n);
            let r0 = aux.rho(0.1) / aux.phi.eval(0.1);
            let r1 = aux.rho(10.0) / aux.phi.eval(10.0);
            assert!((r1 / r0 - 1.0).abs() > 0.5);
        }
    }

    #[test]
    fn almost_increasing_gate_for_powers() {
        let grid = log_grid(1e-3, 1e3, 61);
        for n in 1..=8usize {
            for p in [1.1, 1.4, 1.6, 1.9, 2.0, 3.0] {
                let aux = ScalarAux::new(OrliczFunction::power(p).unwrap(), n);
                let res = aux.rho_almost_increasing(&grid, 1.01);
                assert_eq!(res.pass, p > 2.0 - 4.0 / n as f64, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn level_functions_vanish_below_gamma() {
        let aux = ScalarAux::new(OrliczFunction::power(3.0).unwrap(), 2);
        assert_eq!(aux.g_level(1.0, 0.5), 0.0);
        assert_eq!(ScalarAux::h_level(1.0, 1.0), 0.0);
        assert_eq!(ScalarAux::h_level(1.0, 2.0), 3.0);
        assert!(aux.g_level(1.0, 2.0) > 0.0);
    }

    #[test]
    fn kappa_is_at_least_one() {
        let aux = ScalarAux::new(OrliczFunction::power(3.0).unwrap(), 2);
        for t in log_grid(1e-3, 1e3, 13) {
            assert!(aux.kappa(t) >= 1.0);
        }
        let heat = ScalarAux::new(OrliczFunction::power(2.0).unwrap(), 2);
        assert_eq!(heat.kappa(5.0), 1.0);
    }
}
