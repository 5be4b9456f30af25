use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iteration::{gamma_threshold, iterate_bound, RecursionParams};
use crate::numerics::{fit_slope, log_grid};
use crate::orlicz::{OrliczFunction, ScalarAux};

use super::norms::{bochner_norm, sobolev_exponent};
use super::samples::Samples;

/// Levels `γ_k = γ_∞(1 - 2^{-k})` and the quantities `Y_k`, `Z_k`, `W_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeGiorgiTrace {
    pub gamma_infty: f64,
    pub levels: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    /// First `k` with `W_k = 0`; the arrays end there.
    pub stop: Option<usize>,
    /// `W_{k+1} / (2^{3k(1+2/n)} W_k (W_k/M)^{2/n})`.
    pub recursion: Vec<f64>,
    /// `M = min{ρ(γ_∞) α^{(n-2)/2}, γ_∞²/α}`.
    pub m: f64,
}

pub fn level(gamma_infty: f64, k: usize) -> f64 {
    gamma_infty * (1.0 - 0.5f64.powi(k as i32))
}

fn above(samples: &Samples, values: &[f64], gamma: f64) -> Vec<f64> {
    samples
        .v
        .iter()
        .zip(values)
        .map(|(&v, &x)| if v > gamma { x } else { 0.0 })
        .collect()
}

fn v_squared(samples: &Samples) -> Vec<f64> {
    samples.v.iter().map(|v| v * v).collect()
}

/// `min{ρ(γ) α^{(n-2)/2}, γ²/α}`.
pub fn intrinsic_min(aux: &ScalarAux, alpha: f64, gamma: f64) -> f64 {
    let n = aux.n as f64;
    (aux.rho(gamma) * alpha.powf((n - 2.0) / 2.0)).min(gamma * gamma / alpha)
}

pub fn compute_trace(samples: &Samples, gamma_infty: f64, k_max: usize) -> Result<DeGiorgiTrace> {
    if !(gamma_infty > 0.0 && gamma_infty.is_finite()) {
        return Err(Error::InvalidParameter(format!("γ_∞ must be positive, got {gamma_infty}")));
    }
    let alpha = samples.alpha();
    let n = samples.n();
    let aux = ScalarAux::new(samples.phi.clone(), n);
    let m = intrinsic_min(&aux, alpha, gamma_infty);
    let v2 = v_squared(samples);
    let mut t = DeGiorgiTrace {
        gamma_infty,
        levels: Vec::new(),
        y: Vec::new(),
        z: Vec::new(),
        w: Vec::new(),
        stop: None,
        recursion: Vec::new(),
        m,
    };
    for k in 0..=k_max {
        let g = level(gamma_infty, k);
        let y = bochner_norm(samples, &above(samples, &samples.phi_v, g), 1.0, 1.0, k);
        let z = bochner_norm(samples, &above(samples, &v2, g), 1.0, 1.0, k) / alpha;
        t.levels.push(g);
        t.y.push(y);
        t.z.push(z);
        t.w.push(y + z);
        if y + z == 0.0 {
            t.stop = Some(k);
            break;
        }
    }
    let e = 2.0 / n as f64;
    for k in 0..t.w.len().saturating_sub(1) {
        let growth = 2f64.powf(3.0 * k as f64 * (1.0 + e));
        t.recursion.push(t.w[k + 1] / (growth * t.w[k] * (t.w[k] / m).powf(e)));
    }
    Ok(t)
}

/// One level of the level-set lemma check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetRow {
    pub k: usize,
    /// `α⁻¹ ‖v² χ_{v>γ_{k+1}}‖_{L∞(L¹)(k+1)}`.
    pub lhs_sup: f64,
    /// `‖φ(v) χ_{v>γ_{k+1}}‖_{L¹(L^r)(k+1)}` with the Sobolev exponent `r`.
    pub lhs_sobolev: f64,
    pub w_k: f64,
    pub c_sup: f64,
    pub c_sobolev: f64,
    pub vacuous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetReport {
    pub rows: Vec<LevelSetRow>,
    pub max_c: f64,
    /// Fitted exponent of `LHS/W_k ~ 2^{βk}` (largest of the two sides), when
    /// at least three nonvacuous levels are available.
    pub beta: Option<f64>,
}

pub fn verify_levelset_lemma(trace: &DeGiorgiTrace, samples: &Samples) -> Result<LevelSetReport> {
    if trace.w.len() < 2 && trace.stop.is_none() {
        return Err(Error::InvalidParameter("trace needs k_max >= 1".into()));
    }
    let alpha = samples.alpha();
    let r = sobolev_exponent(samples.n());
    let v2 = v_squared(samples);
    let k_top = match trace.stop {
        Some(s) => s,
        None => trace.w.len() - 1,
    };
    let mut rows = Vec::new();
    for k in 0..k_top {
        let g = level(trace.gamma_infty, k + 1);
        let w_k = trace.w[k];
        let lhs_sup = bochner_norm(samples, &above(samples, &v2, g), f64::INFINITY, 1.0, k + 1) / alpha;
        let lhs_sobolev = bochner_norm(samples, &above(samples, &samples.phi_v, g), 1.0, r, k + 1);
        let scale = 8f64.powi(k as i32) * w_k;
        let vacuous = w_k == 0.0;
        rows.push(LevelSetRow {
            k,
            lhs_sup,
            lhs_sobolev,
            w_k,
            c_sup: if vacuous { 0.0 } else { lhs_sup / scale },
            c_sobolev: if vacuous { 0.0 } else { lhs_sobolev / scale },
            vacuous,
        });
    }
    let max_c = rows.iter().map(|r| r.c_sup.max(r.c_sobolev)).fold(0.0, f64::max);
    let fit = |pick: fn(&LevelSetRow) -> f64| -> Option<f64> {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| !r.vacuous && pick(r) > 0.0)
            .map(|r| (r.k as f64, (pick(r) / r.w_k).log2()))
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        fit_slope(&x, &y)
    };
    let beta = match (fit(|r| r.lhs_sup), fit(|r| r.lhs_sobolev)) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    Ok(LevelSetReport { rows, max_c, beta })
}

/// Outcome of the `γ_∞` selection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaChoice {
    pub gamma_infty: f64,
    /// `W₀ = ⨏_{Q_2R} φ(v) + v²/α`.
    pub w0: f64,
    pub kappa: f64,
}

/// Default constant in the almost-monotonicity test of `ρ`.
pub const RHO_MONOTONE_CONSTANT: f64 = 1.01;

/// How the top level `γ_∞` of a trace is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaPolicy {
    /// Calibrated against the data: `min{ρ(γ)α^{(n-2)/2}, γ²/α} = κ W₀`.
    Auto { kappa: f64 },
    Fixed { value: f64 },
    /// Quantile of `v` over `Q_R`; `q = 1` is the sup.
    Quantile { q: f64 },
    /// Smallest `κ ≥ 1` for which the fitted recursion closes, see
    /// [`calibrate_closure`].
    Lemma,
}

impl Default for GammaPolicy {
    fn default() -> Self {
        GammaPolicy::Auto { kappa: 1.0 }
    }
}

/// `k_max` is the trace depth used by the `Lemma` policy.
pub fn resolve_gamma_infty(samples: &Samples, policy: &GammaPolicy, k_max: usize) -> Result<f64> {
    match *policy {
        GammaPolicy::Lemma => Ok(calibrate_closure(samples, k_max)?.gamma_infty),
        GammaPolicy::Auto { kappa } => Ok(choose_gamma_infty(samples, kappa)?.gamma_infty),
        GammaPolicy::Fixed { value } if value >= 0.0 && value.is_finite() => Ok(value),
        GammaPolicy::Fixed { value } => Err(Error::InvalidParameter(format!("γ_∞ must be finite and ≥ 0, got {value}"))),
        GammaPolicy::Quantile { q } if (0.0..=1.0).contains(&q) => Ok(samples.quantile_over(&samples.v, 1.0, q)),
        GammaPolicy::Quantile { q } => Err(Error::InvalidParameter(format!("quantile must lie in [0, 1], got {q}"))),
    }
}

/// Solves `min{ρ(γ) α^{(n-2)/2}, γ²/α} = κ W₀` by bisection.
pub fn choose_gamma_infty(samples: &Samples, kappa: f64) -> Result<GammaChoice> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("κ_cal must be positive, got {kappa}")));
    }
    let alpha = samples.alpha();
    let aux = ScalarAux::new(samples.phi.clone(), samples.n());
    let mono = aux.rho_almost_increasing(&log_grid(1e-6, 1e6, 241), RHO_MONOTONE_CONSTANT);
    if !mono.pass {
        return Err(Error::AssumptionViolation(format!(
            "ρ is not almost increasing (constant {:.4} > {RHO_MONOTONE_CONSTANT})",
            mono.constant
        )));
    }
    let integrand: Vec<f64> = samples.phi_v.iter().zip(&samples.v).map(|(f, v)| f + v * v / alpha).collect();
    let w0 = samples.mean_over(&integrand, 2.0);
    let target = kappa * w0;
    if w0 == 0.0 {
        return Ok(GammaChoice { gamma_infty: 0.0, w0, kappa });
    }
    let m = |g: f64| intrinsic_min(&aux, alpha, g);
    let mut hi = 1.0;
    while m(hi) < target {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Range(format!("no γ_∞ reaches κW₀ = {target:e}")));
        }
    }
    let mut lo = hi;
    while m(lo) >= target {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::Range(format!("γ_∞ for κW₀ = {target:e} underflows")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if m(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(GammaChoice {
        gamma_infty: 0.5 * (lo + hi),
        w0,
        kappa,
    })
}

/// The fitted recursion `W_{k+1} <= C 2^{3k(1+2/n)} W_k (W_k/M)^{2/n}` fed
/// into the algebraic iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub c_fit: f64,
    pub b: f64,
    pub exponent: f64,
    pub a0: f64,
    pub m: f64,
    /// Smallest `M` for which the majorant provably decays.
    pub threshold: f64,
    /// Majorant `a_k` dominates every observed `W_k`.
    pub dominates: bool,
    /// Majorant falls below `1e-10 a₀` within 200 steps.
    pub decays: bool,
}

pub fn closure(trace: &DeGiorgiTrace, n: usize) -> Result<ClosureReport> {
    let exponent = 2.0 / n as f64;
    let b = 2f64.powf(3.0 * (1.0 + exponent));
    let a0 = trace.w[0];
    let c_fit = trace.recursion.iter().copied().fold(f64::MIN_POSITIVE, f64::max);
    let threshold = gamma_threshold(a0, c_fit, b, exponent)?;
    if a0 == 0.0 || trace.m == 0.0 {
        return Ok(ClosureReport {
            c_fit,
            b,
            exponent,
            a0,
            m: trace.m,
            threshold,
            dominates: true,
            decays: true,
        });
    }
    let seq = iterate_bound(&RecursionParams::new(a0, c_fit, b, exponent, trace.m)?, 200)?;
    let dominates = trace.w.iter().zip(&seq.values).all(|(w, a)| *w <= a * (1.0 + 1e-12));
    let decays = seq.overflow_at.is_none() && seq.values.last().is_some_and(|&a| a < 1e-10 * a0);
    Ok(ClosureReport {
        c_fit,
        b,
        exponent,
        a0,
        m: trace.m,
        threshold,
        dominates,
        decays,
    })
}

/// Outcome of [`calibrate_closure`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibratedClosure {
    pub kappa: f64,
    pub gamma_infty: f64,
    pub trace: DeGiorgiTrace,
    pub report: ClosureReport,
}

/// Smallest `κ ≥ 1` (to 1% by bisection) for which the recursion fitted at
/// the resulting `γ_∞` meets the smallness condition of the iteration lemma,
/// i.e. `M` clears the threshold computed from the fitted constant.
pub fn calibrate_closure(samples: &Samples, k_max: usize) -> Result<CalibratedClosure> {
    let attempt = |kappa: f64| -> Result<CalibratedClosure> {
        let gamma_infty = choose_gamma_infty(samples, kappa)?.gamma_infty;
        if gamma_infty == 0.0 {
            return Err(Error::InvalidParameter("zero field: no level to calibrate".into()));
        }
        let trace = compute_trace(samples, gamma_infty, k_max)?;
        let report = closure(&trace, samples.n())?;
        Ok(CalibratedClosure {
            kappa,
            gamma_infty,
            trace,
            report,
        })
    };
    let closes = |c: &CalibratedClosure| c.report.dominates && c.report.decays;
    let mut lo = 1.0;
    let mut best = attempt(lo)?;
    if closes(&best) {
        return Ok(best);
    }
    let mut rounds = 0;
    while !closes(&best) {
        rounds += 1;
        if rounds > 64 {
            return Err(Error::Range("closure calibration did not settle within 64 rounds".into()));
        }
        lo = best.kappa;
        best = attempt(lo * (1.05 * best.report.threshold / best.report.m).clamp(1.25, 1e6))?;
    }
    while best.kappa > 1.01 * lo {
        let mid = (lo * best.kappa).sqrt();
        let trial = attempt(mid)?;
        if closes(&trial) {
            best = trial;
        } else {
            lo = mid;
        }
    }
    Ok(best)
}

/// Worst constant in `h(t) <= C 2^{k+1} (h(t) - h(γ_k))₊` for `t > γ_{k+1}`,
/// for `h(t) = t²` and `h(t) = √(φ'(t)t)`, over several `γ_∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelInflationRow {
    pub k: usize,
    pub c_square: f64,
    pub c_sqrt_flux: f64,
}

pub fn level_inflation(phi: &OrliczFunction, k_max: usize) -> Vec<LevelInflationRow> {
    let hs: [&dyn Fn(f64) -> f64; 2] = [&|t: f64| t * t, &|t: f64| (phi.deriv(t) * t).sqrt()];
    let gammas = log_grid(1e-3, 1e3, 7);
    let stretch = log_grid(1.0, 1e3, 25);
    (0..=k_max)
        .map(|k| {
            let mut worst = [0.0f64; 2];
            for (i, h) in hs.iter().enumerate() {
                for &g in &gammas {
                    let (gk, gk1) = (level(g, k), level(g, k + 1));
                    let hk = h(gk);
                    for &s in &stretch {
                        let t = gk1 * s;
                        let ht = h(t);
                        let c = ht / (2f64.powi(k as i32 + 1) * (ht - hk).max(0.0));
                        worst[i] = worst[i].max(c);
                    }
                }
            }
            LevelInflationRow {
                k,
                c_square: worst[0],
                c_sqrt_flux: worst[1],
            }
        })
        .collect()
}
