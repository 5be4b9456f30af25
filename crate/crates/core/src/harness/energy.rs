use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numerics::integrate_gl16;
use crate::orlicz::{conjugate, ScalarAux};
use crate::solver::field::difference;
use crate::tensor::{a_map, GradMatrix};

use super::cylinder::Cutoff;
use super::samples::{Region, Samples};

/// Bounded non-decreasing weight `f` of the energy estimate, with
/// `H(t) = ∫₀ᵗ s f(s) ds`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LevelWeight {
    One,
    Indicator {
        gamma: f64,
    },
    /// `clamp((t - γ)/width, 0, 1)`.
    Ramp {
        gamma: f64,
        width: f64,
    },
    /// Any monotone bounded `f`; `H` by quadrature.
    #[serde(skip)]
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for LevelWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelWeight::One => write!(f, "One"),
            LevelWeight::Indicator { gamma } => write!(f, "Indicator({gamma})"),
            LevelWeight::Ramp { gamma, width } => write!(f, "Ramp({gamma}, {width})"),
            LevelWeight::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl LevelWeight {
    pub fn f(&self, t: f64) -> f64 {
        match self {
            LevelWeight::One => 1.0,
            LevelWeight::Indicator { gamma } => {
                if t > *gamma {
                    1.0
                } else {
                    0.0
                }
            }
            LevelWeight::Ramp { gamma, width } => ((t - gamma) / width).clamp(0.0, 1.0),
            LevelWeight::Custom(f) => f(t),
        }
    }

    pub fn h(&self, t: f64) -> f64 {
        match self {
            LevelWeight::One => 0.5 * t * t,
            LevelWeight::Indicator { gamma } => 0.5 * (t * t - gamma * gamma).max(0.0),
            LevelWeight::Ramp { gamma, width } => {
                let (g, w) = (*gamma, *width);
                let cubic = |s: f64| (s * s * s / 3.0 - g * s * s / 2.0) / w;
                if t <= g {
                    0.0
                } else if t <= g + w {
                    cubic(t) - cubic(g)
                } else {
                    cubic(g + w) - cubic(g) + 0.5 * (t * t - (g + w) * (g + w))
                }
            }
            LevelWeight::Custom(f) => {
                let panels = 64;
                (0..panels)
                    .map(|i| {
                        let (a, b) = (t * i as f64 / panels as f64, t * (i + 1) as f64 / panels as f64);
                        integrate_gl16(|s| s * f(s), a, b)
                    })
                    .sum()
            }
        }
    }
}

/// Terms of the weighted energy estimate and, for an indicator weight, of its
/// level-set form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaccioppoliReport {
    /// `sup_t α⁻¹ ⨏_{B_R} H(v) η^q`.
    pub lhs_sup: f64,
    /// `R² ⨏_{Q_R} |∇V|² η^q f(v)`.
    pub lhs_grad_v: f64,
    /// `R² ⨏_{Q_2R} |V|² ‖∇η‖²_∞ f(v)`.
    pub rhs1: f64,
    /// `R² ⨏_{Q_2R} H(v) η^{q-1} |∂_t η|`.
    pub rhs2: f64,
    pub c_emp: f64,
    pub level_form: Option<LevelFormReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelFormReport {
    /// `sup_t α⁻¹ ⨏_{B_R} (v² - γ²)₊ η^q`.
    pub lhs_sup: f64,
    /// `R² ⨏_{Q_R} |∇(G(v) η^{q/2})|²`.
    pub lhs_grad: f64,
    /// `R² ⨏_{Q_2R} φ(v) ‖∇η‖²_∞ χ_{v>γ}`.
    pub rhs1: f64,
    /// `R² ⨏_{Q_2R} (v² - γ²)₊ η^{q-1} |∂_t η|`.
    pub rhs2: f64,
    pub c_emp: f64,
}

fn quotient(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// `η = 1` on `Q_{R/2}`, vanishing outside `Q_R`.
pub fn default_eta(samples: &Samples) -> Cutoff {
    let (x0, t0, alpha, r) = match samples.region {
        Region::Parabolic(c) => (c.x0, c.t0, Some(c.alpha), c.r),
        Region::Stationary(b) => (b.x0, 0.0, None, b.r),
    };
    Cutoff {
        x0,
        t0,
        alpha,
        r_in: 0.5 * r,
        r_out: r,
    }
}

/// Empirical constants of the energy estimate over a sweep of indicator levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSweep {
    pub levels: Vec<f64>,
    pub c_emp: Vec<f64>,
    pub level_form_c_emp: Vec<f64>,
    /// `max c_emp / min c_emp` (infinite if some level gives zero).
    pub variation: f64,
    pub level_form_variation: f64,
}

fn spread(c: &[f64]) -> f64 {
    let max = c.iter().copied().fold(0.0, f64::max);
    let min = c.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        1.0
    } else if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Indicator levels at the `j/(count+1)` quantiles of `v` over the set where
/// `η = 1`, so every level cuts through the region the left-hand side sees.
pub fn caccioppoli_level_sweep(samples: &Samples, eta: &Cutoff, count: usize) -> LevelSweep {
    let lambda = eta.r_in / samples.radius();
    let levels: Vec<f64> = (1..=count)
        .map(|j| samples.quantile_over(&samples.v, lambda, j as f64 / (count + 1) as f64))
        .collect();
    let reports: Vec<CaccioppoliReport> = levels
        .iter()
        .map(|&gamma| caccioppoli_check(samples, &LevelWeight::Indicator { gamma }, eta))
        .collect();
    let c_emp: Vec<f64> = reports.iter().map(|r| r.c_emp).collect();
    let level_form_c_emp: Vec<f64> = reports.iter().map(|r| r.level_form.map_or(0.0, |l| l.c_emp)).collect();
    LevelSweep {
        variation: spread(&c_emp),
        level_form_variation: spread(&level_form_c_emp),
        levels,
        c_emp,
        level_form_c_emp,
    }
}

/// Largest over times in `Q_R` of the spatial average over `B_R`.
fn sup_of_slices(samples: &Samples, f: &[f64]) -> f64 {
    let mask = samples.mask(1.0);
    let nc = samples.nc();
    (0..samples.nt())
        .filter_map(|j| {
            let (mut s, mut c) = (0.0, 0usize);
            for i in j * nc..(j + 1) * nc {
                if mask[i] {
                    s += f[i];
                    c += 1;
                }
            }
            (c > 0).then(|| s / c as f64)
        })
        .fold(0.0, f64::max)
}

pub fn caccioppoli_check(samples: &Samples, weight: &LevelWeight, eta: &Cutoff) -> CaccioppoliReport {
    let phi = &samples.phi;
    let q = samples.q;
    let alpha = samples.alpha();
    let r2 = samples.radius().powi(2);
    let parabolic = matches!(samples.region, Region::Parabolic(_));
    let len = samples.len();
    let mut eta_q = vec![0.0; len];
    let mut eta_dt = vec![0.0; len];
    let mut grad_max = 0.0f64;
    for i in 0..len {
        let (t, d) = samples.point(i);
        let e = eta.value(t, d);
        eta_q[i] = e.powf(q);
        eta_dt[i] = e.powf(q - 1.0) * eta.time_deriv(t, d).abs();
        grad_max = grad_max.max(eta.grad_norm(t, d));
    }
    let v = &samples.v;
    let hv: Vec<f64> = v.iter().map(|&x| weight.h(x)).collect();
    let fv: Vec<f64> = v.iter().map(|&x| weight.f(x)).collect();
    let lhs_sup = if parabolic {
        sup_of_slices(samples, &hv.iter().zip(&eta_q).map(|(h, e)| h * e / alpha).collect::<Vec<_>>())
    } else {
        0.0
    };
    let gv: Vec<f64> = (0..len).map(|i| samples.grad_v_sq[i] * eta_q[i] * fv[i]).collect();
    let lhs_grad_v = r2 * samples.mean_over(&gv, 1.0);
    let flux: Vec<f64> = (0..len).map(|i| phi.deriv(v[i]) * v[i] * grad_max * grad_max * fv[i]).collect();
    let rhs1 = r2 * samples.mean_over(&flux, 2.0);
    let rhs2 = if parabolic {
        r2 * samples.mean_over(&hv.iter().zip(&eta_dt).map(|(h, e)| h * e).collect::<Vec<_>>(), 2.0)
    } else {
        0.0
    };
    let level_form = match weight {
        LevelWeight::Indicator { gamma } => Some(level_form(samples, *gamma, eta, &eta_q, &eta_dt, grad_max)),
        _ => None,
    };
    CaccioppoliReport {
        lhs_sup,
        lhs_grad_v,
        rhs1,
        rhs2,
        c_emp: quotient(lhs_sup + lhs_grad_v, rhs1 + rhs2),
        level_form,
    }
}

fn level_form(samples: &Samples, gamma: f64, eta: &Cutoff, eta_q: &[f64], eta_dt: &[f64], grad_max: f64) -> LevelFormReport {
    let aux = ScalarAux::new(samples.phi.clone(), samples.n());
    let alpha = samples.alpha();
    let r2 = samples.radius().powi(2);
    let parabolic = matches!(samples.region, Region::Parabolic(_));
    let len = samples.len();
    let hv: Vec<f64> = samples.v.iter().map(|&v| ScalarAux::h_level(gamma, v)).collect();
    let lhs_sup = if parabolic {
        sup_of_slices(samples, &hv.iter().zip(eta_q).map(|(h, e)| h * e / alpha).collect::<Vec<_>>())
    } else {
        0.0
    };
    // gradient of G(v) η^{q/2} from differences of the product on the full grid
    let geo = &samples.geo;
    let n = geo.n;
    let dist_full: Vec<f64> = (0..geo.cell_count())
        .map(|c| {
            let x = geo.cell_center(c);
            (0..n).map(|d| (x[d] - eta.x0[d]).powi(2)).sum::<f64>().sqrt()
        })
        .collect();
    let mut grad_sq = vec![0.0; len];
    let nc = samples.nc();
    for (j, &t) in samples.times.iter().enumerate() {
        let prod: Vec<f64> = samples.v_full[j]
            .iter()
            .zip(&dist_full)
            .map(|(&v, &d)| aux.g_level(gamma, v) * eta.value(t, d).powf(0.5 * samples.q))
            .collect();
        let g = difference(geo, &prod, 1);
        for (i, &cell) in samples.cells.iter().enumerate() {
            grad_sq[j * nc + i] = g[cell * n..(cell + 1) * n].iter().map(|x| x * x).sum();
        }
    }
    let lhs_grad = r2 * samples.mean_over(&grad_sq, 1.0);
    let rhs1_f: Vec<f64> = (0..len)
        .map(|i| if samples.v[i] > gamma { samples.phi_v[i] * grad_max * grad_max } else { 0.0 })
        .collect();
    let rhs1 = r2 * samples.mean_over(&rhs1_f, 2.0);
    let rhs2 = if parabolic {
        r2 * samples.mean_over(&hv.iter().zip(eta_dt).map(|(h, e)| h * e).collect::<Vec<_>>(), 2.0)
    } else {
        0.0
    };
    LevelFormReport {
        lhs_sup,
        lhs_grad,
        rhs1,
        rhs2,
        c_emp: quotient(lhs_sup + lhs_grad, rhs1 + rhs2),
    }
}

/// `L¹` bounds on second derivatives at the top time of the samples, over `B_R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct W21Report {
    /// `⨏ |∇²u|`.
    pub lhs1: f64,
    /// `⨏ |∇A(∇u)|`.
    pub lhs2: f64,
    /// `⨏ |∇V|² + φ(v) + φ*(1)`.
    pub rhs1: f64,
    /// `⨏ |∇V|² + φ(v) + φ(1)`.
    pub rhs2: f64,
    pub ratio1: f64,
    pub ratio2: f64,
}

pub fn w21_check(samples: &Samples) -> crate::Result<W21Report> {
    let phi = &samples.phi;
    let geo = &samples.geo;
    let n = geo.n;
    let comps = geo.components;
    let block = n * comps;
    let top = &samples.top;
    let hess = difference(geo, &top.grad, block);
    let flux: Vec<f64> = top
        .grad
        .chunks(block)
        .flat_map(|g| {
            let m = GradMatrix::new(n, comps, g.to_vec()).expect("finite gradient");
            a_map(phi, &m).entries().to_vec()
        })
        .collect();
    let dflux = difference(geo, &flux, block);
    let phi_star_1 = conjugate(phi, 1.0)?;
    let phi_1 = phi.eval(1.0);
    let r = samples.radius();
    let (mut l1, mut l2, mut base, mut count) = (0.0, 0.0, 0.0, 0usize);
    for (i, &cell) in samples.cells.iter().enumerate() {
        if samples.dist[i] >= r {
            continue;
        }
        let s = cell * n * block..(cell + 1) * n * block;
        l1 += hess[s.clone()].iter().map(|x| x * x).sum::<f64>().sqrt();
        l2 += dflux[s.clone()].iter().map(|x| x * x).sum::<f64>().sqrt();
        base += top.grad_v[s].iter().map(|x| x * x).sum::<f64>() + phi.eval(top.v[cell]);
        count += 1;
    }
    let c = count.max(1) as f64;
    let (lhs1, lhs2) = (l1 / c, l2 / c);
    let rhs1 = base / c + phi_star_1;
    let rhs2 = base / c + phi_1;
    Ok(W21Report {
        lhs1,
        lhs2,
        rhs1,
        rhs2,
        ratio1: lhs1 / rhs1,
        ratio2: lhs2 / rhs2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_integrate_to_h() {
        let ramp = LevelWeight::Ramp { gamma: 0.7, width: 0.4 };
        let custom = LevelWeight::Custom(Arc::new(|t: f64| ((t - 0.7) / 0.4).clamp(0.0, 1.0)));
        for t in [0.1, 0.8, 1.05, 3.0] {
            assert!((ramp.h(t) - custom.h(t)).abs() < 1e-4 * (1.0 + ramp.h(t)), "t={t}: {} {}", ramp.h(t), custom.h(t));
        }
        let ind = LevelWeight::Indicator { gamma: 1.0 };
        assert_eq!(ind.h(0.5), 0.0);
        assert!((ind.h(2.0) - 1.5).abs() < 1e-15);
        let step = (ramp.h(2.0 + 1e-6) - ramp.h(2.0)) / 1e-6;
        assert!((step - 2.0).abs() < 1e-5);
    }
}
