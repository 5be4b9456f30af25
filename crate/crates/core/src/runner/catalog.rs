//! Text catalogues behind `list-presets` and `describe-check`.

use crate::error::{Error, Result};
use crate::solver::PRESETS;

pub struct CheckDoc {
    pub name: &'static str,
    pub statement: &'static str,
    pub report: &'static str,
    pub config: &'static str,
}

pub const CHECKS: &[CheckDoc] = &[
    CheckDoc {
        name: "verify_main_bound",
        statement: "main theorem (gradient sup bound): min{sup_{Q_R} ρ(|∇u|) α^{(n-2)/2}, sup_{Q_R} |∇u|²/α} \
                    ≲ ⨏_{Q_2R} |∇u|²/α + φ(|∇u|) on intrinsic cylinders Q_R = (t0 - αR², t0] × B_R",
        report: "sup_rho, sup_v2, lhs, rhs, ratio per (run, cylinder); suite maximum and stability groups",
        config: "runs, cylinders, max_ratio, min_evaluations, stability {reference, sets, tolerance}",
    },
    CheckDoc {
        name: "verify_levelset_lemma",
        statement: "level-set lemma of the De Giorgi iteration: the sup term and the Sobolev term at level k+1 \
                    are bounded by 8^k W_k, with W_k = Y_k + Z_k over levels γ_k = γ_∞(1 - 2^{-k})",
        report: "Y_k, Z_k, W_k, per-level constants and the fitted growth exponent β (largest of both sides)",
        config: "runs, cylinders, gamma {mode: quantile (default q = 1)|auto|fixed|lemma}, k_max, max_beta",
    },
    CheckDoc {
        name: "closure",
        statement: "closure of the De Giorgi iteration by the fast geometric convergence lemma: the fitted \
                    recursion W_{k+1} ≤ C b^k W_k (W_k/M)^{2/n} has a decaying extremal majorant",
        report: "c_fit, b, M, threshold, dominates, decays",
        config: "runs, cylinders, gamma {mode: lemma (default)|auto|fixed|quantile}, k_max",
    },
    CheckDoc {
        name: "dibenedetto_compare",
        statement: "comparison with the classical p-Laplace bound, whose right-hand side carries the extra term \
                    α^{p/(2-p)}; an amplitude sweep shows the new bound shrinking with the data",
        report: "lhs, rhs_new, rhs_dib per amplitude; fractions at the smallest amplitude; monotonicity flags",
        config: "run, cylinder, amplitudes, max_fraction",
    },
    CheckDoc {
        name: "caccioppoli_check",
        statement: "weighted energy (Caccioppoli) inequality: sup_t α⁻¹⨏ H(v)η^q + R²⨏|∇V|²η^q f(v) \
                    ≲ R²⨏|V|²‖∇η‖²_∞ f(v) + R²⨏ H(v)η^{q-1}|∂_tη|, with its level-set form for indicator weights",
        report: "lhs_sup, lhs_grad_v, rhs1, rhs2, c_emp and the level-form terms",
        config: "runs, cylinders, weight {kind: one|indicator|ramp}, envelope",
    },
    CheckDoc {
        name: "caccioppoli_sweep",
        statement: "uniformity of the energy inequality in the level: empirical constants over indicator levels \
                    at quantiles of |∇u| where the cutoff equals one",
        report: "level and c_emp per quantile, variation max/min",
        config: "runs, cylinders, quantiles, max_variation",
    },
    CheckDoc {
        name: "w21_check",
        statement: "second-derivative energy bounds at the top time over B_R, against φ*(1) and φ(1)",
        report: "lhs1, lhs2, rhs1, rhs2, ratios",
        config: "runs, cylinders, envelope",
    },
    CheckDoc {
        name: "stationary_check",
        statement: "stationary sup bound: sup_{B_R} φ(|∇u|) ≲ ⨏_{B_2R} φ(|∇u|), with the decay of the level \
                    quantities U_k under the calibrated top level c_∞",
        report: "lhs, rhs, ratio, c_∞, U_k, recursion constants, U_K/U_0",
        config: "runs (elliptic), balls, k_max, kappa, max_decay, stability",
    },
    CheckDoc {
        name: "hoelder_diagnostic",
        statement: "Hölder continuity of the gradient: oscillation of ∇u over shrinking cylinders, fitted exponent",
        report: "radii, oscillations, fitted exponent or an unresolved flag",
        config: "runs, cylinders, min_exponent",
    },
    CheckDoc {
        name: "cutoff_certificates",
        statement: "cutoff family of the iteration: bounds |∇ζ_k| ≤ C 2^k/R and |∂_tζ_k| ≤ C 4^k/(αR²) on the samples",
        report: "sampled maxima and bounds per k",
        config: "runs, cylinders, k_max",
    },
];

pub fn list_presets() -> String {
    let width = PRESETS.iter().map(|p| p.name.len()).max().unwrap_or(0);
    PRESETS
        .iter()
        .map(|p| format!("{:width$}  {}\n", p.name, p.summary))
        .collect()
}

pub fn describe_check(name: &str) -> Result<String> {
    let doc = CHECKS.iter().find(|c| c.name == name).ok_or_else(|| {
        let known: Vec<&str> = CHECKS.iter().map(|c| c.name).collect();
        Error::config("/check", format!("unknown check `{name}` (known: {})", known.join(", ")))
    })?;
    Ok(format!(
        "{}\n  checks:  {}\n  reports: {}\n  config:  {}\n",
        doc.name, doc.statement, doc.report, doc.config
    ))
}
