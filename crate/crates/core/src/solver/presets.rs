//! Named analytic initial/boundary data.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orlicz::{Kind, OrliczFunction};
use crate::sampling;

use super::grid::GridSpec;

/// Initial datum, Dirichlet trace and forcing of a problem.
pub trait DataSource: Send + Sync {
    fn initial(&self, x: [f64; 2], c: usize) -> f64;

    /// Dirichlet value at time `t`; defaults to the initial trace.
    fn boundary(&self, _t: f64, x: [f64; 2], c: usize) -> f64 {
        self.initial(x, c)
    }

    fn forcing(&self, _t: f64, _x: [f64; 2], _c: usize) -> f64 {
        0.0
    }

    /// Known solution, when there is one.
    fn exact(&self, _t: f64, _x: [f64; 2], _c: usize) -> Option<f64> {
        None
    }

    fn has_forcing(&self) -> bool {
        false
    }
}

/// Catalogue entry for `list-presets`.
pub struct PresetInfo {
    pub name: &'static str,
    pub summary: &'static str,
}

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "zero",
        summary: "u ≡ 0; stays zero",
    },
    PresetInfo {
        name: "eigenmode",
        summary: "product of sines (modes per axis), zero boundary; exact decay for the heat equation",
    },
    PresetInfo {
        name: "affine",
        summary: "offset + slope·x with the same trace; stationary for every φ",
    },
    PresetInfo {
        name: "barenblatt",
        summary: "source-type solution of the p-Laplace evolution started at t0 (power φ)",
    },
    PresetInfo {
        name: "radial_p_harmonic",
        summary: "|x - center|^((p-n)/(p-1)) (log for p = n); stationary, for domains avoiding the center",
    },
    PresetInfo {
        name: "random_smooth",
        summary: "seeded random sine series with decaying coefficients, zero boundary",
    },
    PresetInfo {
        name: "manufactured",
        summary: "e^{-t} sin(πx) in 1-D with the forcing that makes it exact (power φ, p >= 2)",
    },
    PresetInfo {
        name: "harmonic_quadratic",
        summary: "x² - y²; stationary for the heat equation",
    },
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum PresetSpec {
    Zero,
    Eigenmode {
        #[serde(default)]
        modes: Vec<usize>,
    },
    Affine {
        #[serde(default)]
        offset: f64,
        slope: Vec<f64>,
    },
    Barenblatt {
        t0: f64,
        #[serde(default = "unit")]
        c: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    RadialPHarmonic {
        #[serde(default)]
        center: Vec<f64>,
    },
    RandomSmooth {
        #[serde(default = "four")]
        modes: usize,
    },
    Manufactured,
    HarmonicQuadratic,
}

fn unit() -> f64 {
    1.0
}

fn four() -> usize {
    4
}

impl PresetSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PresetSpec::Zero => "zero",
            PresetSpec::Eigenmode { .. } => "eigenmode",
            PresetSpec::Affine { .. } => "affine",
            PresetSpec::Barenblatt { .. } => "barenblatt",
            PresetSpec::RadialPHarmonic { .. } => "radial_p_harmonic",
            PresetSpec::RandomSmooth { .. } => "random_smooth",
            PresetSpec::Manufactured => "manufactured",
            PresetSpec::HarmonicQuadratic => "harmonic_quadratic",
        }
    }

    /// Instantiates the preset for a growth function and grid. `amplitude`
    /// scales initial and boundary data; `seed` drives random presets.
    pub fn build(&self, phi: &OrliczFunction, grid: &GridSpec, amplitude: f64, seed: u64) -> Result<Arc<dyn DataSource>> {
        let n = grid.n;
        let comps = grid.components;
        let power = || match phi.kind() {
            Kind::Power { p } => Ok(p),
            _ => Err(Error::InvalidParameter(format!("preset {} needs a power φ", self.name()))),
        };
        let center = |c: &Vec<f64>| -> [f64; 2] { [c.first().copied().unwrap_or(0.0), c.get(1).copied().unwrap_or(0.0)] };
        let data: Arc<dyn DataSource> = match self {
            PresetSpec::Zero => Arc::new(Scaled {
                amplitude: 0.0,
                inner: Zero,
            }),
            PresetSpec::Eigenmode { modes } => {
                let mut k = [1usize; 2];
                for (d, m) in modes.iter().enumerate().take(n) {
                    k[d] = *m;
                }
                let heat_rate = match phi.kind() {
                    Kind::Power { p } if p == 2.0 => {
                        Some((0..n).map(|d| (k[d] as f64 * PI / (grid.upper[d] - grid.lower[d])).powi(2)).sum())
                    }
                    _ => None,
                };
                Arc::new(Scaled {
                    amplitude,
                    inner: Eigenmode {
                        n,
                        k,
                        lower: pad(&grid.lower),
                        length: [grid.upper[0] - grid.lower[0], grid.upper.get(1).zip(grid.lower.get(1)).map(|(u, l)| u - l).unwrap_or(1.0)],
                        heat_rate,
                    },
                })
            }
            PresetSpec::Affine { offset, slope } => {
                if slope.len() != n {
                    return Err(Error::config("/runs/preset/slope", format!("needs {n} entries")));
                }
                Arc::new(Scaled {
                    amplitude,
                    inner: Affine {
                        offset: *offset,
                        slope: pad(slope),
                    },
                })
            }
            PresetSpec::Barenblatt { t0, c, center: xc } => {
                if !(*t0 > 0.0 && *c > 0.0) {
                    return Err(Error::InvalidParameter("barenblatt needs t0 > 0 and c > 0".into()));
                }
                Arc::new(Scaled {
                    amplitude,
                    inner: Barenblatt::new(power()?, n, *c, *t0, center(xc)),
                })
            }
            PresetSpec::RadialPHarmonic { center: xc } => Arc::new(Scaled {
                amplitude,
                inner: RadialPHarmonic {
                    p: power()?,
                    n,
                    center: center(xc),
                },
            }),
            PresetSpec::RandomSmooth { modes } => {
                let mut rng = sampling::rng(seed);
                let my = if n == 2 { *modes } else { 1 };
                let mut coeffs = Vec::new();
                for _ in 0..comps {
                    let mut cs = Vec::new();
                    for kx in 1..=*modes {
                        for ky in 1..=my {
                            let decay = if n == 2 { (kx * kx + ky * ky) as f64 } else { (kx * kx) as f64 };
                            cs.push((kx, ky, sampling::normal(&mut rng) / decay));
                        }
                    }
                    let total: f64 = cs.iter().map(|(_, _, a)| a.abs()).sum();
                    cs.iter_mut().for_each(|(_, _, a)| *a /= total);
                    coeffs.push(cs);
                }
                Arc::new(Scaled {
                    amplitude,
                    inner: RandomSmooth {
                        n,
                        lower: pad(&grid.lower),
                        length: [grid.upper[0] - grid.lower[0], grid.upper.get(1).zip(grid.lower.get(1)).map(|(u, l)| u - l).unwrap_or(1.0)],
                        coeffs,
                    },
                })
            }
            PresetSpec::Manufactured => {
                let p = power()?;
                if n != 1 || p < 2.0 {
                    return Err(Error::InvalidParameter("manufactured preset is 1-D with p >= 2".into()));
                }
                Arc::new(Manufactured { p })
            }
            PresetSpec::HarmonicQuadratic => {
                if n != 2 {
                    return Err(Error::InvalidParameter("harmonic_quadratic is 2-D".into()));
                }
                Arc::new(Scaled {
                    amplitude,
                    inner: HarmonicQuadratic,
                })
            }
        };
        Ok(data)
    }
}

fn pad(v: &[f64]) -> [f64; 2] {
    [v.first().copied().unwrap_or(0.0), v.get(1).copied().unwrap_or(0.0)]
}

fn comp_weight(c: usize) -> f64 {
    1.0 / (c as f64 + 1.0)
}

/// Scalar profile shared by every component, weighted by `1/(c+1)`.
trait Profile: Send + Sync {
    fn value(&self, t: f64, x: [f64; 2], c: usize) -> f64;
    /// Whether `value` solves the equation for all times.
    fn is_exact(&self) -> bool;
    /// Whether the boundary trace follows `value(t)` (otherwise it is frozen at t = 0).
    fn moving_boundary(&self) -> bool {
        self.is_exact()
    }
}

struct Scaled<P> {
    amplitude: f64,
    inner: P,
}

impl<P: Profile> DataSource for Scaled<P> {
    fn initial(&self, x: [f64; 2], c: usize) -> f64 {
        self.amplitude * self.inner.value(0.0, x, c)
    }

    fn boundary(&self, t: f64, x: [f64; 2], c: usize) -> f64 {
        let t = if self.inner.moving_boundary() { t } else { 0.0 };
        self.amplitude * self.inner.value(t, x, c)
    }

    fn exact(&self, t: f64, x: [f64; 2], c: usize) -> Option<f64> {
        self.inner.is_exact().then(|| self.amplitude * self.inner.value(t, x, c))
    }
}

struct Zero;

impl Profile for Zero {
    fn value(&self, _t: f64, _x: [f64; 2], _c: usize) -> f64 {
        0.0
    }
    fn is_exact(&self) -> bool {
        true
    }
}

struct Eigenmode {
    n: usize,
    k: [usize; 2],
    lower: [f64; 2],
    length: [f64; 2],
    heat_rate: Option<f64>,
}

impl Profile for Eigenmode {
    fn value(&self, t: f64, x: [f64; 2], c: usize) -> f64 {
        let mut v = comp_weight(c);
        for d in 0..self.n {
            v *= (self.k[d] as f64 * PI * (x[d] - self.lower[d]) / self.length[d]).sin();
        }
        v * (-self.heat_rate.unwrap_or(0.0) * t).exp()
    }
    fn is_exact(&self) -> bool {
        self.heat_rate.is_some()
    }
    fn moving_boundary(&self) -> bool {
        false
    }
}

struct Affine {
    offset: f64,
    slope: [f64; 2],
}

impl Profile for Affine {
    fn value(&self, _t: f64, x: [f64; 2], c: usize) -> f64 {
        (c as f64 + 1.0) * (self.offset + self.slope[0] * x[0] + self.slope[1] * x[1])
    }
    fn is_exact(&self) -> bool {
        true
    }
}

/// Source-type self-similar solution of `u_t = div(|∇u|^{p-2}∇u)` in `ℝⁿ`,
/// evaluated at time `t0 + t`.
pub struct Barenblatt {
    p: f64,
    n: usize,
    c: f64,
    t0: f64,
    center: [f64; 2],
    k: f64,
    q: f64,
}

impl Barenblatt {
    pub fn new(p: f64, n: usize, c: f64, t0: f64, center: [f64; 2]) -> Self {
        let nf = n as f64;
        let k = nf / (nf * (p - 2.0) + p);
        let q = ((p - 2.0).abs() / p) * (k / nf).powf(1.0 / (p - 1.0));
        Self {
            p,
            n,
            c,
            t0,
            center,
            k,
            q,
        }
    }

    /// Similarity exponent `k = n / (n(p-2) + p)`.
    pub fn exponent(&self) -> f64 {
        self.k
    }

    pub fn eval(&self, t: f64, x: [f64; 2]) -> f64 {
        let tau = self.t0 + t;
        let r2: f64 = (0..self.n).map(|d| (x[d] - self.center[d]).powi(2)).sum();
        let r = r2.sqrt();
        let p = self.p;
        if (p - 2.0).abs() < 1e-14 {
            return self.c * tau.powf(-(self.n as f64) / 2.0) * (-r2 / (4.0 * tau)).exp();
        }
        let xi = r * tau.powf(-self.k / self.n as f64);
        let s = xi.powf(p / (p - 1.0));
        let amp = tau.powf(-self.k);
        if p > 2.0 {
            let base = (self.c - self.q * s).max(0.0);
            amp * base.powf((p - 1.0) / (p - 2.0))
        } else {
            amp * (self.c + self.q * s).powf(-(p - 1.0) / (2.0 - p))
        }
    }

    /// Radius of the support at time `t` (infinite unless `p > 2`).
    pub fn support_radius(&self, t: f64) -> f64 {
        if self.p <= 2.0 {
            return f64::INFINITY;
        }
        (self.c / self.q).powf((self.p - 1.0) / self.p) * (self.t0 + t).powf(self.k / self.n as f64)
    }
}

impl Profile for Barenblatt {
    fn value(&self, t: f64, x: [f64; 2], c: usize) -> f64 {
        comp_weight(c) * self.eval(t, x)
    }
    fn is_exact(&self) -> bool {
        true
    }
}

struct RadialPHarmonic {
    p: f64,
    n: usize,
    center: [f64; 2],
}

impl Profile for RadialPHarmonic {
    fn value(&self, _t: f64, x: [f64; 2], c: usize) -> f64 {
        let r = (0..self.n).map(|d| (x[d] - self.center[d]).powi(2)).sum::<f64>().sqrt();
        let nf = self.n as f64;
        let v = if (self.p - nf).abs() < 1e-14 {
            r.ln()
        } else {
            r.powf((self.p - nf) / (self.p - 1.0))
        };
        comp_weight(c) * v
    }
    fn is_exact(&self) -> bool {
        true
    }
}

struct RandomSmooth {
    n: usize,
    lower: [f64; 2],
    length: [f64; 2],
    coeffs: Vec<Vec<(usize, usize, f64)>>,
}

impl Profile for RandomSmooth {
    fn value(&self, _t: f64, x: [f64; 2], c: usize) -> f64 {
        let sx = |k: usize, d: usize| (k as f64 * PI * (x[d] - self.lower[d]) / self.length[d]).sin();
        self.coeffs[c]
            .iter()
            .map(|&(kx, ky, a)| a * sx(kx, 0) * if self.n == 2 { sx(ky, 1) } else { 1.0 })
            .sum()
    }
    fn is_exact(&self) -> bool {
        false
    }
}

struct HarmonicQuadratic;

impl Profile for HarmonicQuadratic {
    fn value(&self, _t: f64, x: [f64; 2], c: usize) -> f64 {
        comp_weight(c) * (x[0] * x[0] - x[1] * x[1])
    }
    fn is_exact(&self) -> bool {
        true
    }
}

/// `u = e^{-t} sin(πx)` with forcing `u_t - (|u_x|^{p-2} u_x)_x`.
struct Manufactured {
    p: f64,
}

impl DataSource for Manufactured {
    fn initial(&self, x: [f64; 2], c: usize) -> f64 {
        comp_weight(c) * (PI * x[0]).sin()
    }

    fn boundary(&self, t: f64, x: [f64; 2], c: usize) -> f64 {
        self.exact(t, x, c).unwrap()
    }

    fn forcing(&self, t: f64, x: [f64; 2], c: usize) -> f64 {
        let w = comp_weight(c);
        let e = (-t).exp();
        let ux = w * PI * e * (PI * x[0]).cos();
        let uxx = -w * PI * PI * e * (PI * x[0]).sin();
        -w * e * (PI * x[0]).sin() - (self.p - 1.0) * ux.abs().powf(self.p - 2.0) * uxx
    }

    fn exact(&self, t: f64, x: [f64; 2], c: usize) -> Option<f64> {
        Some(comp_weight(c) * (-t).exp() * (PI * x[0]).sin())
    }

    fn has_forcing(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Continuum residual `u_t - div(|∇u|^{p-2}∇u)` by centred differences.
    fn pde_residual(b: &Barenblatt, p: f64, n: usize, t: f64, x: [f64; 2]) -> (f64, f64) {
        let h = 1e-4;
        let ut = (b.eval(t + h, x) - b.eval(t - h, x)) / (2.0 * h);
        let flux = |y: [f64; 2], d: usize| {
            let mut g = [0.0; 2];
            for e in 0..n {
                let mut a = y;
                let mut c = y;
                a[e] += h;
                c[e] -= h;
                g[e] = (b.eval(t, a) - b.eval(t, c)) / (2.0 * h);
            }
            let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
            norm.powf(p - 2.0) * g[d]
        };
        let mut div = 0.0;
        for d in 0..n {
            let mut a = x;
            let mut c = x;
            a[d] += h;
            c[d] -= h;
            div += (flux(a, d) - flux(c, d)) / (2.0 * h);
        }
        (ut - div, ut.abs())
    }

    #[test]
    fn barenblatt_solves_the_equation() {
        for (p, n) in [(3.0, 1usize), (3.0, 2), (1.8, 2), (2.0, 1)] {
            let b = Barenblatt::new(p, n, 1.0, 0.5, [0.0; 2]);
            let r_s = b.support_radius(0.0).min(2.0);
            for frac in [0.1, 0.4, 0.7] {
                let x = [frac * r_s, if n == 2 { 0.3 * frac * r_s } else { 0.0 }];
                let (res, scale) = pde_residual(&b, p, n, 0.0, x);
                assert!(res.abs() < 1e-5 * scale.max(1.0), "p={p} n={n} x={x:?} res={res}");
            }
        }
    }

    #[test]
    fn barenblatt_conserves_mass_in_1d() {
        let b = Barenblatt::new(3.0, 1, 1.0, 0.5, [0.0; 2]);
        let mass = |t: f64| {
            let r = b.support_radius(t);
            crate::numerics::integrate_gl16(|x| b.eval(t, [x, 0.0]), -r, r)
        };
        assert!((mass(0.0) - mass(2.0)).abs() < 1e-6 * mass(0.0));
    }

    #[test]
    fn radial_profile_is_p_harmonic() {
        // radial ODE (r^{n-1}|u'|^{p-2}u')' = 0 reduces to r^{n-1}|u'|^{p-1} = const
        let (p, n) = (3.0, 2usize);
        let prof = RadialPHarmonic { p, n, center: [0.0; 2] };
        let flux = |r: f64| {
            let h = 1e-6;
            let d = (prof.value(0.0, [r + h, 0.0], 0) - prof.value(0.0, [r - h, 0.0], 0)) / (2.0 * h);
            r.powi(n as i32 - 1) * d.abs().powf(p - 1.0)
        };
        let f0 = flux(1.0);
        for r in [1.3, 1.9, 2.8] {
            assert!((flux(r) - f0).abs() < 1e-6 * f0);
        }
    }

    #[test]
    fn preset_config_parses() {
        let s: PresetSpec = serde_json::from_str(r#"{"name":"barenblatt","t0":0.1}"#).unwrap();
        assert_eq!(s.name(), "barenblatt");
        assert!(serde_json::from_str::<PresetSpec>(r#"{"name":"barenblatt","t0":0.1,"bogus":1}"#).is_err());
        assert!(serde_json::from_str::<PresetSpec>(r#"{"name":"nope"}"#).is_err());
    }
}
