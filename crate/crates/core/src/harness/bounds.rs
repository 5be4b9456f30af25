use serde::{Deserialize, Serialize};

use crate::orlicz::{Kind, ScalarAux};

use super::samples::Samples;

/// Both sides of the gradient sup bound on one cylinder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MainBound {
    /// `sup_{Q_R} ρ(v) α^{(n-2)/2}`.
    pub sup_rho: f64,
    /// `sup_{Q_R} v²/α`.
    pub sup_v2: f64,
    pub lhs: f64,
    /// `⨏_{Q_2R} v²/α + φ(v)`.
    pub rhs: f64,
    /// `lhs/rhs`, zero when both vanish.
    pub ratio: f64,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

pub fn verify_main_bound(samples: &Samples) -> MainBound {
    let alpha = samples.alpha();
    let n = samples.n();
    let aux = ScalarAux::new(samples.phi.clone(), n);
    let scale = alpha.powf((n as f64 - 2.0) / 2.0);
    let rho: Vec<f64> = samples.v.iter().map(|&v| aux.rho(v) * scale).collect();
    let v2: Vec<f64> = samples.v.iter().map(|v| v * v / alpha).collect();
    let sup_rho = samples.sup_over(&rho, 1.0);
    let sup_v2 = samples.sup_over(&v2, 1.0);
    let lhs = sup_rho.min(sup_v2);
    let integrand: Vec<f64> = v2.iter().zip(&samples.phi_v).map(|(a, b)| a + b).collect();
    let rhs = samples.mean_over(&integrand, 2.0);
    MainBound {
        sup_rho,
        sup_v2,
        lhs,
        rhs,
        ratio: ratio(lhs, rhs),
    }
}

/// The new bound and the classical one side by side for `φ = t^p/p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiBenedettoPoint {
    /// `min{sup v^{ν/2} α^{(n-2)/2}, sup v²/α}` with `ν = n(p-2)+4`.
    pub lhs: f64,
    /// `⨏ v²/α + v^p`.
    pub rhs_new: f64,
    /// `max{rhs_new, α^{p/(2-p)}}`.
    pub rhs_dib: f64,
    pub alpha_term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DiBenedettoOutcome {
    Compared(DiBenedettoPoint),
    Skipped(String),
}

pub fn dibenedetto_compare(samples: &Samples) -> DiBenedettoOutcome {
    let p = match samples.phi.kind() {
        Kind::Power { p } => p,
        _ => return DiBenedettoOutcome::Skipped("the comparison needs a power growth function".into()),
    };
    if (p - 2.0).abs() < 1e-12 {
        return DiBenedettoOutcome::Skipped("p = 2: the term α^{p/(2-p)} is undefined".into());
    }
    let n = samples.n() as f64;
    let alpha = samples.alpha();
    let nu_half = (n * (p - 2.0) + 4.0) / 2.0;
    let scale = alpha.powf((n - 2.0) / 2.0);
    let a: Vec<f64> = samples.v.iter().map(|v| v.powf(nu_half) * scale).collect();
    let b: Vec<f64> = samples.v.iter().map(|v| v * v / alpha).collect();
    let lhs = samples.sup_over(&a, 1.0).min(samples.sup_over(&b, 1.0));
    let integrand: Vec<f64> = samples.v.iter().zip(&b).map(|(v, b)| b + v.powf(p)).collect();
    let rhs_new = samples.mean_over(&integrand, 2.0);
    let alpha_term = alpha.powf(p / (2.0 - p));
    DiBenedettoOutcome::Compared(DiBenedettoPoint {
        lhs,
        rhs_new,
        rhs_dib: rhs_new.max(alpha_term),
        alpha_term,
    })
}

/// Amplitude sweep summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSweep {
    pub amplitudes: Vec<f64>,
    pub points: Vec<DiBenedettoPoint>,
    pub lhs_decreasing: bool,
    pub rhs_new_decreasing: bool,
    /// Last-to-first ratios of `lhs` and `rhs_new`.
    pub lhs_fraction: f64,
    pub rhs_new_fraction: f64,
    /// `rhs_dib >= α^{p/(2-p)}` at every amplitude.
    pub dib_floor_holds: bool,
    pub max_lhs_over_rhs_new: f64,
}

/// Summarises points ordered by decreasing amplitude.
pub fn amplitude_sweep(amplitudes: Vec<f64>, points: Vec<DiBenedettoPoint>) -> AmplitudeSweep {
    let dec = |f: fn(&DiBenedettoPoint) -> f64| points.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    let first = points[0];
    let last = *points.last().unwrap();
    AmplitudeSweep {
        lhs_decreasing: dec(|p| p.lhs),
        rhs_new_decreasing: dec(|p| p.rhs_new),
        lhs_fraction: last.lhs / first.lhs,
        rhs_new_fraction: last.rhs_new / first.rhs_new,
        dib_floor_holds: points.iter().all(|p| p.rhs_dib >= p.alpha_term),
        max_lhs_over_rhs_new: points.iter().map(|p| ratio(p.lhs, p.rhs_new)).fold(0.0, f64::max),
        amplitudes,
        points,
    }
}
