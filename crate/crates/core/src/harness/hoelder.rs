use serde::{Deserialize, Serialize};

use crate::numerics::fit_slope;
use crate::orlicz::ScalarAux;

use super::samples::Samples;

/// Oscillation decay of `∇u` over four nested cylinders `Q_r`, with radii
/// log-spaced from `R` down to `max(R/8, 2h)` (at most `R/2`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoelderReport {
    pub radii: Vec<f64>,
    pub oscillation: Vec<f64>,
    /// `κ(sup_{Q_R} |∇u|)`.
    pub kappa: f64,
    /// Slope of `log osc` against `log r`; `None` when unresolved.
    pub mu_fit: Option<f64>,
    pub unresolved: bool,
}

pub fn hoelder_diagnostic(samples: &Samples) -> HoelderReport {
    let aux = ScalarAux::new(samples.phi.clone(), samples.n());
    let r = samples.radius();
    let block = samples.grad.len() / samples.len().max(1);
    let sup = samples.sup_over(&samples.v, 1.0);
    let r_min = (r / 8.0).max(2.0 * samples.geo.h).min(0.5 * r);
    let radii: Vec<f64> = (0..4).map(|j| r * (r_min / r).powf(j as f64 / 3.0)).collect();
    let mut oscillation = Vec::new();
    let mut unresolved = false;
    for &rr in &radii {
        let mask = samples.mask(rr / r);
        let mut lo = vec![f64::INFINITY; block];
        let mut hi = vec![f64::NEG_INFINITY; block];
        let mut count = 0;
        for (i, m) in mask.iter().enumerate() {
            if !m {
                continue;
            }
            count += 1;
            for e in 0..block {
                let g = samples.grad[i * block + e];
                lo[e] = lo[e].min(g);
                hi[e] = hi[e].max(g);
            }
        }
        let osc = if count < 2 {
            0.0
        } else {
            lo.iter().zip(&hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt()
        };
        if osc <= 1e-9 * (1.0 + sup) {
            unresolved = true;
        }
        oscillation.push(osc);
    }
    let mu_fit = if unresolved {
        None
    } else {
        let x: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let y: Vec<f64> = oscillation.iter().map(|o| o.ln()).collect();
        fit_slope(&x, &y)
    };
    HoelderReport {
        radii,
        oscillation,
        kappa: if sup > 0.0 { aux.kappa(sup) } else { f64::INFINITY },
        mu_fit,
        unresolved,
    }
}
