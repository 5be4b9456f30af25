use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::log_grid;

use super::scalar::ScalarAux;
use super::conjugate::conjugate;
use super::function::OrliczFunction;

/// Measured characteristics on a sample grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Characteristics {
    pub char_lo: f64,
    pub char_hi: f64,
    pub delta2: f64,
}

/// Min/max of `φ''(t) t / φ'(t)` and max of `φ(2t)/φ(t)` over `grid`.
/// Points inside a blend window are skipped (outside the declared domain).
pub fn characteristics(phi: &OrliczFunction, grid: &[f64]) -> Result<Characteristics> {
    if grid.is_empty() || grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter("grid must be nonempty and positive".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut d2 = 0.0f64;
    for &t in grid {
        let f = phi.eval(t);
        let d2_ratio = phi.eval(2.0 * t) / f;
        if !(d2_ratio.is_finite() && d2_ratio > 0.0) {
            return Err(Error::AssumptionViolation(format!("φ(2t)/φ(t) = {d2_ratio} at t={t:e}")));
        }
        d2 = d2.max(d2_ratio);
        if phi.in_kink_window(t) {
            continue;
        }
        let r = phi.deriv2(t) * t / phi.deriv(t);
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::AssumptionViolation(format!("φ''t/φ' = {r} at t={t:e}")));
        }
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if let Some(base) = phi.base() {
        // shifts keep the ratio inside [min(lo, 1), max(hi, 1)] of the base
        let slack = 1e-9;
        let (blo, bhi) = (base.char_lo().min(1.0), base.char_hi().max(1.0));
        if lo < blo * (1.0 - slack) || hi > bhi * (1.0 + slack) {
            return Err(Error::AssumptionViolation(format!(
                "shifted characteristics [{lo}, {hi}] leave the base window [{blo}, {bhi}]"
            )));
        }
    }
    Ok(Characteristics {
        char_lo: lo,
        char_hi: hi,
        delta2: d2,
    })
}

/// Result of the exponent search behind `φ_a(η^{q-1} t) <= c η^q φ_a(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QSelection {
    pub q: f64,
    /// Largest observed `φ_a(η^{q-1}t) / (η^q φ_a(t))` for the chosen `q`.
    pub c_val: f64,
}

const Q_ETA_SMALL: [f64; 3] = [1e-12, 1e-10, 1e-9];
const Q_ETA_LARGE: [f64; 6] = [1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0];

fn q_ratio_sup(shifts: &[OrliczFunction], ts: &[f64], q: f64, etas: &[f64]) -> (f64, (f64, f64, f64)) {
    let mut worst = (0.0, (0.0, 0.0, 0.0));
    for phi_a in shifts {
        let a = match phi_a.kind() {
            super::function::Kind::Shifted { a } => a,
            _ => 0.0,
        };
        for &t in ts {
            let base = phi_a.eval(t);
            for &eta in etas {
                let r = phi_a.eval(eta.powf(q - 1.0) * t) / (eta.powf(q) * base);
                if r > worst.0 {
                    worst = (r, (a, eta, t));
                }
            }
        }
    }
    worst
}

/// Smallest `q` on the grid `1.1, 1.2, …` for which
/// `φ_a(η^{q-1}t) / (η^q φ_a(t))` stays bounded as `η → 0`, uniformly over
/// sampled shifts `a` and arguments `t`.
///
/// Boundedness is tested by requiring the supremum over `η <= 1e-9` not to
/// exceed the supremum over `η >= 1e-6` by more than 2%.
pub fn select_q(phi: &OrliczFunction) -> Result<QSelection> {
    let mut shifts = vec![phi.shift(0.0)?];
    for a in log_grid(1e-3, 1e3, 7) {
        shifts.push(phi.shift(a)?);
    }
    let ts = log_grid(1e-3, 1e3, 13);
    let q_max = phi.char_hi().max(1.0) + 2.0;
    let mut last_fail = None;
    for i in 0.. {
        let q = (11 + i) as f64 / 10.0;
        if q > q_max + 1e-12 {
            break;
        }
        let (small, at) = q_ratio_sup(&shifts, &ts, q, &Q_ETA_SMALL);
        let (large, _) = q_ratio_sup(&shifts, &ts, q, &Q_ETA_LARGE);
        if small.is_finite() && small <= 1.02 * large {
            return Ok(QSelection {
                q,
                c_val: small.max(large),
            });
        }
        last_fail = Some((q, at));
    }
    let (q, (a, eta, t)) = last_fail.unwrap_or((f64::NAN, (0.0, 0.0, 0.0)));
    Err(Error::AssumptionViolation(format!(
        "no admissible q up to {q_max}; last failure q={q} at a={a:e}, η={eta:e}, t={t:e}"
    )))
}

/// JSON characteristics report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicsReport {
    pub char_lo: f64,
    pub char_hi: f64,
    pub delta2: f64,
    pub q: f64,
    pub rho_admissible: bool,
}

/// Characteristics on `[1e-3, 1e3]`, the selected `q` and the `ρ` gate in
/// dimension `n` with almost-increasing constant `c_rho`.
pub fn characteristics_report(phi: &OrliczFunction, n: usize, c_rho: f64) -> Result<CharacteristicsReport> {
    let grid = log_grid(1e-3, 1e3, 241);
    let ch = characteristics(phi, &grid)?;
    let q = select_q(phi)?.q;
    let rho = ScalarAux::new(phi.clone(), n).rho_almost_increasing(&grid, c_rho);
    Ok(CharacteristicsReport {
        char_lo: ch.char_lo,
        char_hi: ch.char_hi,
        delta2: ch.delta2,
        q,
        rho_admissible: rho.pass,
    })
}

/// Ratio envelope of the equivalent quantities `φ_a(t)`, `φ_a'(t) t`,
/// `φ_a''(t) t²` and `φ''(a+t) t²`, each divided by `φ_a'(t) t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftEnvelope {
    pub value_min: f64,
    pub value_max: f64,
    pub second_min: f64,
    pub second_max: f64,
    pub base_second_min: f64,
    pub base_second_max: f64,
}

pub fn shift_envelope(phi: &OrliczFunction, shifts: &[f64], ts: &[f64]) -> Result<ShiftEnvelope> {
    let mut e = ShiftEnvelope {
        value_min: f64::INFINITY,
        value_max: 0.0,
        second_min: f64::INFINITY,
        second_max: 0.0,
        base_second_min: f64::INFINITY,
        base_second_max: 0.0,
    };
    for &a in shifts {
        let pa = phi.shift(a)?;
        for &t in ts {
            if phi.in_kink_window(a + t) {
                continue;
            }
            let mid = pa.deriv(t) * t;
            let r1 = pa.eval(t) / mid;
            let r2 = pa.deriv2(t) * t * t / mid;
            let r3 = phi.deriv2(a + t) * t * t / mid;
            e.value_min = e.value_min.min(r1);
            e.value_max = e.value_max.max(r1);
            e.second_min = e.second_min.min(r2);
            e.second_max = e.second_max.max(r2);
            e.base_second_min = e.base_second_min.min(r3);
            e.base_second_max = e.base_second_max.max(r3);
        }
    }
    Ok(e)
}

/// Constant needed in `φ'(s) t <= δ φ(s) + c φ*(t)` at one pair.
pub fn young_needed(phi: &OrliczFunction, delta: f64, s: f64, t: f64) -> Result<f64> {
    let lhs = phi.deriv(s) * t - delta * phi.eval(s);
    if lhs <= 0.0 {
        return Ok(0.0);
    }
    Ok(lhs / conjugate(phi, t)?)
}

/// Young constant `c_δ` for all shifts of `φ`, calibrated as 1.25 times the
/// largest need over a structured grid in `(a, s, t)`.
pub fn young_constant(phi: &OrliczFunction, delta: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    let mut shifts = vec![0.0];
    shifts.extend(log_grid(1e-3, 1e3, 7));
    for a in shifts {
        let pa = phi.shift(a)?;
        for s in log_grid(1e-4, 1e4, 33) {
            // scan t across the scale of φ_a'(s), where the need peaks
            let d = pa.deriv(s);
            for k in log_grid(1e-3, 1e3, 49) {
                worst = worst.max(young_needed(&pa, delta, s, k * d)?);
            }
        }
    }
    Ok(1.25 * worst)
}
