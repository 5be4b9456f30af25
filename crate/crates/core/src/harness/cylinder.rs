use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{smoothstep, smoothstep_d1, SMOOTHSTEP_MAX_SLOPE};
use crate::solver::Geometry;

/// `Q_R = (t0 - αR², t0] × B_R(x0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParabolicCylinder {
    pub t0: f64,
    pub x0: [f64; 2],
    #[serde(rename = "R")]
    pub r: f64,
    pub alpha: f64,
}

impl ParabolicCylinder {
    pub fn new(t0: f64, x0: [f64; 2], r: f64, alpha: f64) -> Result<Self> {
        if !(r > 0.0 && alpha > 0.0 && r.is_finite() && alpha.is_finite() && t0.is_finite()) {
            return Err(Error::InvalidParameter(format!("cylinder needs R > 0 and α > 0, got R={r}, α={alpha}")));
        }
        Ok(Self { t0, x0, r, alpha })
    }

    /// Start of the time interval of `Q_{λR}`.
    pub fn start(&self, lambda: f64) -> f64 {
        self.t0 - self.alpha * (lambda * self.r).powi(2)
    }

    /// Whether `(t, x)` lies in `Q_{λR}` (open at the bottom, closed at `t0`).
    pub fn contains(&self, lambda: f64, t: f64, dist: f64) -> bool {
        t > self.start(lambda) && t <= self.t0 * (1.0 + 1e-12) + 1e-14 && dist < lambda * self.r
    }

    /// Checks that `Q_{2R}` sits inside the solved region with a two-cell margin.
    pub fn check_inside(&self, geo: &Geometry, t_first: f64, t_last: f64) -> Result<()> {
        let margin = geo.distance_to_boundary(self.x0) - 2.0 * self.r - 2.0 * geo.h;
        if margin < -1e-12 {
            return Err(Error::OutOfDomain(format!(
                "B_2R(x0) with R={} at {:?} leaves the grid minus a two-cell margin",
                self.r, &self.x0[..geo.n]
            )));
        }
        if self.start(2.0) < t_first - 1e-12 || self.t0 > t_last * (1.0 + 1e-12) + 1e-14 {
            return Err(Error::OutOfDomain(format!(
                "time interval ({:e}, {:e}] of Q_2R leaves the solved range [{t_first:e}, {t_last:e}]",
                self.start(2.0),
                self.t0
            )));
        }
        Ok(())
    }
}

/// A ball for stationary checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ball {
    pub x0: [f64; 2],
    #[serde(rename = "R")]
    pub r: f64,
}

impl Ball {
    pub fn check_inside(&self, geo: &Geometry) -> Result<()> {
        if !(self.r > 0.0) {
            return Err(Error::InvalidParameter(format!("ball needs R > 0, got {}", self.r)));
        }
        if geo.distance_to_boundary(self.x0) - 2.0 * self.r - 2.0 * geo.h < -1e-12 {
            return Err(Error::OutOfDomain(format!(
                "B_2R(x0) with R={} at {:?} leaves the grid minus a two-cell margin",
                self.r,
                &self.x0[..geo.n]
            )));
        }
        Ok(())
    }
}

/// Lipschitz factor of the quintic-smoothstep cutoffs:
/// `|∇ζ_k| <= C_ζ 2^k / R` and `|∂_t ζ_k| <= C_ζ 2^k / (αR²)`.
pub const C_ZETA: f64 = 2.0 * SMOOTHSTEP_MAX_SLOPE;

/// Product cutoff equal to one on `Q_{r_in}` and vanishing outside `Q_{r_out}`
/// (no condition at the top time). `alpha = None` gives a purely spatial cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff {
    pub x0: [f64; 2],
    pub t0: f64,
    pub alpha: Option<f64>,
    pub r_in: f64,
    pub r_out: f64,
}

impl Cutoff {
    fn space_arg(&self, dist: f64) -> f64 {
        (self.r_out - dist) / (self.r_out - self.r_in)
    }

    fn time_arg(&self, t: f64) -> Option<(f64, f64)> {
        self.alpha.map(|a| {
            let width = a * (self.r_out * self.r_out - self.r_in * self.r_in);
            ((t - (self.t0 - a * self.r_out * self.r_out)) / width, width)
        })
    }

    pub fn value(&self, t: f64, dist: f64) -> f64 {
        let s = smoothstep(self.space_arg(dist));
        match self.time_arg(t) {
            Some((tau, _)) => s * smoothstep(tau),
            None => s,
        }
    }

    /// `|∇ζ|` (the cutoff is radial in space).
    pub fn grad_norm(&self, t: f64, dist: f64) -> f64 {
        let ds = smoothstep_d1(self.space_arg(dist)) / (self.r_out - self.r_in);
        match self.time_arg(t) {
            Some((tau, _)) => ds * smoothstep(tau),
            None => ds,
        }
    }

    /// Spatial gradient vector at `x` (at distance `dist` from the centre).
    pub fn grad(&self, t: f64, x: [f64; 2], dist: f64, n: usize) -> [f64; 2] {
        let g = self.grad_norm(t, dist);
        let mut out = [0.0; 2];
        if dist > 0.0 {
            for d in 0..n {
                out[d] = -g * (x[d] - self.x0[d]) / dist;
            }
        }
        out
    }

    pub fn time_deriv(&self, t: f64, dist: f64) -> f64 {
        match self.time_arg(t) {
            Some((tau, width)) => smoothstep(self.space_arg(dist)) * smoothstep_d1(tau) / width,
            None => 0.0,
        }
    }
}

/// The cutoffs `ζ_k` of the level iteration: `ζ_k = 1` on `Q_{k+1}` and
/// `ζ_k = 0` outside `Q_k`, with `Q_k = Q_{(1+2^{-k})R}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffFamily {
    pub x0: [f64; 2],
    pub t0: f64,
    pub r: f64,
    pub alpha: Option<f64>,
}

/// Certified bounds of one family member against its discrete maxima.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffCertificate {
    pub k: usize,
    pub max_grad: f64,
    pub max_dt: f64,
    pub grad_bound: f64,
    pub dt_bound: f64,
    pub pass: bool,
}

impl CutoffFamily {
    pub fn parabolic(cyl: &ParabolicCylinder) -> Self {
        Self {
            x0: cyl.x0,
            t0: cyl.t0,
            r: cyl.r,
            alpha: Some(cyl.alpha),
        }
    }

    pub fn spatial(ball: &Ball) -> Self {
        Self {
            x0: ball.x0,
            t0: 0.0,
            r: ball.r,
            alpha: None,
        }
    }

    /// `(1 + 2^{-k}) R`.
    pub fn radius(&self, k: usize) -> f64 {
        (1.0 + 0.5f64.powi(k as i32)) * self.r
    }

    pub fn member(&self, k: usize) -> Cutoff {
        Cutoff {
            x0: self.x0,
            t0: self.t0,
            alpha: self.alpha,
            r_in: self.radius(k + 1),
            r_out: self.radius(k),
        }
    }

    pub fn grad_bound(&self, k: usize) -> f64 {
        C_ZETA * 2f64.powi(k as i32) / self.r
    }

    pub fn dt_bound(&self, k: usize) -> f64 {
        self.alpha.map_or(0.0, |a| C_ZETA * 2f64.powi(k as i32) / (a * self.r * self.r))
    }

    /// Compares discrete maxima over `points = (t, dist)` with the bounds.
    pub fn certificate(&self, k: usize, points: impl Iterator<Item = (f64, f64)>) -> CutoffCertificate {
        let z = self.member(k);
        let (mut mg, mut mt) = (0.0f64, 0.0f64);
        for (t, d) in points {
            mg = mg.max(z.grad_norm(t, d));
            mt = mt.max(z.time_deriv(t, d).abs());
        }
        let (gb, tb) = (self.grad_bound(k), self.dt_bound(k));
        CutoffCertificate {
            k,
            max_grad: mg,
            max_dt: mt,
            grad_bound: gb,
            dt_bound: tb,
            pass: mg <= gb * (1.0 + 1e-12) && mt <= tb * (1.0 + 1e-12),
        }
    }
}
