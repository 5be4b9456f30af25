use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orlicz::invert_phiprime_t;

use super::samples::{Region, Samples};

/// Sup bound on a ball and the level sequence `U_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryReport {
    /// `sup_{B_R} φ(v)`.
    pub lhs: f64,
    /// `⨏_{B_2R} φ(v)`.
    pub rhs: f64,
    pub ratio: f64,
    pub c_infty: f64,
    /// Levels `c_k = c_∞ (1 - 2^{-k})` of `√(φ'(v) v)`.
    pub c_levels: Vec<f64>,
    /// Matching gradient levels `γ_k` with `φ'(γ_k) γ_k = c_k²`.
    pub gamma_levels: Vec<f64>,
    /// `U_k = ⨏_{B_2R} (√(φ'(v)v) - c_k)₊² η_k^q`.
    pub u: Vec<f64>,
    /// `U_{k+1} / (2^{6k} U_k (U_k/c_∞²)^{2/n})`.
    pub recursion: Vec<f64>,
    /// `U_K / U_0`.
    pub decay: f64,
}

/// Default calibration `c_∞² = κ U_0` with `κ = b^{1/α²}` of the recursion
/// `b = 2^6`, `α = 2/n` (the threshold of the algebraic lemma at `C = 1`).
pub fn default_kappa(n: usize) -> f64 {
    64f64.powf((n * n) as f64 / 4.0)
}

pub fn stationary_check(samples: &Samples, k_max: usize, kappa: Option<f64>) -> Result<StationaryReport> {
    if !matches!(samples.region, Region::Stationary(_)) {
        return Err(Error::InvalidParameter("stationary_check needs samples on a ball".into()));
    }
    let phi = &samples.phi;
    let n = samples.n();
    let kappa = kappa.unwrap_or_else(|| default_kappa(n));
    let lhs = samples.sup_over(&samples.phi_v, 1.0);
    let rhs = samples.mean_over(&samples.phi_v, 2.0);
    let flux_root: Vec<f64> = samples.v.iter().map(|&v| (phi.deriv(v) * v).sqrt()).collect();
    let u_at = |k: usize, c: f64| -> f64 {
        let w = samples.weights(k);
        let s: f64 = flux_root.iter().zip(&w).map(|(g, w)| (g - c).max(0.0).powi(2) * w).sum();
        s / samples.len() as f64
    };
    let u0 = u_at(0, 0.0);
    let c_infty = (kappa * u0).sqrt();
    let mut c_levels = Vec::new();
    let mut gamma_levels = Vec::new();
    let mut u = Vec::new();
    for k in 0..=k_max {
        let c = c_infty * (1.0 - 0.5f64.powi(k as i32));
        c_levels.push(c);
        gamma_levels.push(invert_phiprime_t(phi, c)?);
        u.push(if k == 0 { u0 } else { u_at(k, c) });
    }
    let e = 2.0 / n as f64;
    let recursion = (0..k_max)
        .map(|k| {
            if u[k] == 0.0 {
                0.0
            } else {
                u[k + 1] / (64f64.powi(k as i32) * u[k] * (u[k] / (c_infty * c_infty)).powf(e))
            }
        })
        .collect();
    let decay = if u0 == 0.0 { 0.0 } else { u[k_max] / u0 };
    Ok(StationaryReport {
        lhs,
        rhs,
        ratio: if lhs == 0.0 { 0.0 } else { lhs / rhs },
        c_infty,
        c_levels,
        gamma_levels,
        u,
        recursion,
        decay,
    })
}
