//! The algebraic recursion `a_{k+1} <= C b^k a_k (a_k/γ)^α` and its decay
//! certificate `a_k <= a₀ b^{-k/α}` at the threshold `γ = a₀ C^{1/α} b^{1/α²}`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursionParams {
    pub a0: f64,
    pub c: f64,
    pub b: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl RecursionParams {
    pub fn new(a0: f64, c: f64, b: f64, alpha: f64, gamma: f64) -> Result<Self> {
        let finite = [a0, c, b, alpha, gamma].iter().all(|x| x.is_finite());
        if !finite || a0 < 0.0 || c <= 0.0 || b <= 1.0 || alpha <= 0.0 || gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "need a0 >= 0, C > 0, b > 1, alpha > 0, gamma >= 0 (finite); got ({a0}, {c}, {b}, {alpha}, {gamma})"
            )));
        }
        Ok(Self { a0, c, b, alpha, gamma })
    }

    /// Parameters with `γ` at the threshold.
    pub fn at_threshold(a0: f64, c: f64, b: f64, alpha: f64) -> Result<Self> {
        let gamma = gamma_threshold(a0, c, b, alpha)?;
        Self::new(a0, c, b, alpha, gamma)
    }
}

/// `γ = a₀ C^{1/α} b^{1/α²}`.
pub fn gamma_threshold(a0: f64, c: f64, b: f64, alpha: f64) -> Result<f64> {
    if !(c > 0.0 && b > 1.0 && alpha > 0.0 && a0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need a0 >= 0, C > 0, b > 1, alpha > 0; got ({a0}, {c}, {b}, {alpha})"
        )));
    }
    let g = a0 * c.powf(1.0 / alpha) * b.powf(1.0 / (alpha * alpha));
    if !g.is_finite() {
        return Err(Error::Range(format!("threshold overflows for C={c}, b={b}, alpha={alpha}")));
    }
    Ok(g)
}

/// Extremal sequence `a_{k+1} = C b^k a_k (a_k/γ)^α`, `k = 0..K`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundSequence {
    pub values: Vec<f64>,
    /// First index whose value is no longer finite.
    pub overflow_at: Option<usize>,
}

pub fn iterate_bound(params: &RecursionParams, k_max: usize) -> Result<BoundSequence> {
    if k_max > 10_000 {
        return Err(Error::InvalidParameter(format!("K must be <= 10000, got {k_max}")));
    }
    let RecursionParams { a0, c, b, alpha, gamma } = *params;
    let mut values = Vec::with_capacity(k_max + 1);
    values.push(a0);
    let mut overflow_at = None;
    let mut a = a0;
    for k in 0..k_max {
        a = if a == 0.0 {
            0.0
        } else {
            c * b.powi(k as i32) * a * (a / gamma).powf(alpha)
        };
        if !a.is_finite() && overflow_at.is_none() {
            overflow_at = Some(k + 1);
        }
        values.push(a);
    }
    Ok(BoundSequence { values, overflow_at })
}

/// One grid point of [`verify_decay`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub a0: f64,
    pub c: f64,
    pub b: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// First `k` with `a_k < 1e-10 a₀` (`None` if never reached).
    pub k_decay: Option<usize>,
    pub pass: bool,
}

/// Steps checked by [`verify_decay`].
pub const DECAY_STEPS: usize = 200;

/// Threshold `γ` nudged up by a few ulps. At the exact threshold the
/// certificate is an equality along an unstable fixed point of the scaled
/// recursion, so rounding error would otherwise be amplified by `(1+α)^k`.
pub fn gamma_for_verification(a0: f64, c: f64, b: f64, alpha: f64) -> Result<f64> {
    Ok(gamma_threshold(a0, c, b, alpha)? * (1.0 + 64.0 * f64::EPSILON * alpha.recip().max(1.0)))
}

/// For every `(a0, C, b, alpha)` checks `a_k <= a₀ b^{-k/α}` for `k <= 200`
/// and `a_200 < 1e-10 a₀`.
pub fn verify_decay(grid: &[(f64, f64, f64, f64)]) -> Result<Vec<DecayRow>> {
    grid.iter()
        .map(|&(a0, c, b, alpha)| {
            let gamma = gamma_for_verification(a0, c, b, alpha)?;
            let seq = iterate_bound(&RecursionParams::new(a0, c, b, alpha, gamma)?, DECAY_STEPS)?;
            let certified = seq.values.iter().enumerate().all(|(k, &a)| {
                let cert = a0 * b.powf(-(k as f64) / alpha);
                a <= cert * (1.0 + 1e-12)
            });
            let k_decay = seq.values.iter().position(|&a| a < 1e-10 * a0);
            let last = *seq.values.last().unwrap();
            Ok(DecayRow {
                a0,
                c,
                b,
                alpha,
                gamma,
                k_decay,
                pass: certified && seq.overflow_at.is_none() && (a0 == 0.0 || last < 1e-10 * a0),
            })
        })
        .collect()
}

/// The 54-point grid `C ∈ {1,10,100}`, `b ∈ {2,8}`, `α ∈ {0.5,1,2}`, `a₀ ∈ {1e-3,1,1e3}`.
pub fn standard_grid() -> Vec<(f64, f64, f64, f64)> {
    let mut g = Vec::new();
    for c in [1.0, 10.0, 100.0] {
        for b in [2.0, 8.0] {
            for alpha in [0.5, 1.0, 2.0] {
                for a0 in [1e-3, 1.0, 1e3] {
                    g.push((a0, c, b, alpha));
                }
            }
        }
    }
    g
}

/// CSV with header `a0,C,b,alpha,gamma,k_decay,pass`.
pub fn decay_csv(rows: &[DecayRow]) -> String {
    let mut out = String::from("a0,C,b,alpha,gamma,k_decay,pass\n");
    for r in rows {
        let k = r.k_decay.map(|k| k.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{:e},{:e},{:e},{:e},{:e},{},{}", r.a0, r.c, r.b, r.alpha, r.gamma, k, r.pass);
    }
    out
}
