use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate_gl16, smoothstep, smoothstep_d1};

/// Half-width of the window around `t = 1` on which the max-power family is
/// blended into a C² function.
pub const KINK_HALF_WIDTH: f64 = 1e-3;

/// Exponent of the `ℓ^{-k}` smooth minimum used for the min-power family.
const SMOOTH_MIN_EXPONENT: f64 = 32.0;

/// Family tag of an [`OrliczFunction`].
#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    /// `t^p / p`.
    Power { p: f64 },
    /// `max{t^p, t^q}`, C²-blended on `[1 - δ, 1 + δ]`.
    MaxPower { p: f64, q: f64 },
    /// N-function equivalent to `min{t^p, t^q}`.
    MinPower { p: f64, q: f64 },
    /// `φ_a` with `(φ_a)'(t) = φ'(a + t) t / (a + t)`.
    Shifted { a: f64 },
    /// Piecewise power-law interpolation of tabulated `φ'`.
    NumericTable,
}

/// Declarative description of a growth function, as used in run configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Power { p: f64 },
    MaxPower { p: f64, q: f64 },
    MinPower { p: f64, q: f64 },
    Shifted { base: Box<PhiSpec>, a: f64 },
    Table { t: Vec<f64>, dphi: Vec<f64> },
}

impl PhiSpec {
    pub fn build(&self) -> Result<OrliczFunction> {
        match self {
            PhiSpec::Power { p } => OrliczFunction::power(*p),
            PhiSpec::MaxPower { p, q } => OrliczFunction::max_power(*p, *q),
            PhiSpec::MinPower { p, q } => OrliczFunction::min_power(*p, *q),
            PhiSpec::Shifted { base, a } => Ok(base.build()?.shift(*a)?),
            PhiSpec::Table { t, dphi } => OrliczFunction::from_table(t, dphi),
        }
    }
}

#[derive(Clone, Debug)]
enum Body {
    /// `c t^p`.
    Power { p: f64, c: f64 },
    MaxPower {
        p: f64,
        q: f64,
        /// `φ(1 - δ)`.
        phi_left: f64,
        /// Constant added to `t^q` right of the blend window.
        offset: f64,
    },
    MinPower {
        p: f64,
        q: f64,
        t_lo: f64,
        t_hi: f64,
        /// Geometric nodes covering `[t_lo, t_hi]` and `φ` at each node.
        nodes: Vec<f64>,
        cumulative: Vec<f64>,
    },
    Shifted {
        base: Arc<OrliczFunction>,
        a: f64,
    },
    Table(Arc<Table>),
}

#[derive(Debug)]
struct Table {
    t: Vec<f64>,
    d: Vec<f64>,
    /// Log-log slope of `φ'` on each segment (extended at both ends).
    s: Vec<f64>,
    /// `φ(t_i)`.
    cumulative: Vec<f64>,
}

/// A convex growth function with `φ(0) = 0`, `φ' ≍ φ'' t`, evaluated together
/// with its first two derivatives. Immutable after construction.
#[derive(Clone, Debug)]
pub struct OrliczFunction {
    body: Body,
    char_lo: f64,
    char_hi: f64,
    delta2: f64,
}

impl OrliczFunction {
    /// `φ(t) = t^p / p`.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "power exponent must be finite and > 1, got {p}"
            )));
        }
        Ok(Self {
            body: Body::Power { p, c: 1.0 / p },
            char_lo: p - 1.0,
            char_hi: p - 1.0,
            delta2: 2f64.powf(p),
        })
    }

    fn check_pair(p: f64, q: f64) -> Result<()> {
        if !(p > 1.0 && q >= p && q.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "expected 1 < p <= q < inf, got p={p}, q={q}"
            )));
        }
        Ok(())
    }

    /// `φ(t) = max{t^p, t^q}` with the kink at `t = 1` replaced by a C² blend
    /// of the derivatives on `[1 - δ, 1 + δ]`, `δ = KINK_HALF_WIDTH`.
    pub fn max_power(p: f64, q: f64) -> Result<Self> {
        Self::check_pair(p, q)?;
        if q - p < 1e-12 {
            return Ok(Self::unit_power(p));
        }
        let d = KINK_HALF_WIDTH;
        let phi_left = (1.0 - d).powf(p);
        let window = integrate_gl16(|t| max_power_window_deriv(p, q, t), 1.0 - d, 1.0 + d);
        let offset = phi_left + window - (1.0 + d).powf(q);
        let mut phi = Self {
            body: Body::MaxPower {
                p,
                q,
                phi_left,
                offset,
            },
            char_lo: p - 1.0,
            char_hi: q - 1.0,
            delta2: 2f64.powf(q),
        };
        // The blend leaves a small offset on the q-branch, so φ(2t)/φ(t) can
        // exceed 2^q just past the window. Beyond 1 + d the ratio is monotone
        // in t; below 1 - d it stays under 2^q.
        let samples = 4096;
        let sup = (0..=samples)
            .map(|i| 1.0 - d + 3.0 * d * i as f64 / samples as f64)
            .map(|t| phi.eval(2.0 * t) / phi.eval(t))
            .fold(phi.delta2, f64::max);
        phi.delta2 = sup * (1.0 + 1e-12);
        Ok(phi)
    }

    /// N-function equivalent to `min{t^p, t^q}`: its derivative is a smooth
    /// minimum of `q t^{q-1}` and `p t^{p-1}`, so `φ'' t / φ'` is a convex
    /// combination of `q - 1` and `p - 1` everywhere.
    pub fn min_power(p: f64, q: f64) -> Result<Self> {
        Self::check_pair(p, q)?;
        if q - p < 1e-12 {
            return Ok(Self::unit_power(p));
        }
        let k = SMOOTH_MIN_EXPONENT;
        let t_star = (p / q).powf(1.0 / (q - p));
        let spread = (17.0 * std::f64::consts::LN_10 / (k * (q - p))).exp();
        let t_lo = t_star / spread;
        let t_hi = t_star * spread;
        // the blend has log-width about 1/(k(q-p)); resolve it with several
        // geometric panels per width
        let step = (0.25 / (k * (q - p))).min(std::f64::consts::LN_2).exp();
        let mut nodes = vec![t_lo];
        while *nodes.last().unwrap() < t_hi {
            let next = (nodes.last().unwrap() * step).min(t_hi);
            nodes.push(next);
        }
        let mut cumulative = vec![t_lo.powf(q)];
        for w in nodes.windows(2) {
            let prev = *cumulative.last().unwrap();
            cumulative.push(prev + integrate_gl16(|t| min_power_deriv(p, q, t), w[0], w[1]));
        }
        Ok(Self {
            body: Body::MinPower {
                p,
                q,
                t_lo,
                t_hi,
                nodes,
                cumulative,
            },
            char_lo: p - 1.0,
            char_hi: q - 1.0,
            delta2: 2f64.powf(q),
        })
    }

    fn unit_power(p: f64) -> Self {
        Self {
            body: Body::Power { p, c: 1.0 },
            char_lo: p - 1.0,
            char_hi: p - 1.0,
            delta2: 2f64.powf(p),
        }
    }

    /// Growth function from samples of `φ'` at increasing knots, interpolated
    /// as a power law on each segment and extrapolated with the end slopes.
    pub fn from_table(t: &[f64], dphi: &[f64]) -> Result<Self> {
        if t.len() < 2 || t.len() != dphi.len() {
            return Err(Error::InvalidParameter(
                "table needs at least two knots and matching φ' samples".into(),
            ));
        }
        if t.iter().chain(dphi).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter("table entries must be finite and positive".into()));
        }
        let mut s = Vec::with_capacity(t.len() - 1);
        for i in 0..t.len() - 1 {
            if t[i + 1] <= t[i] || dphi[i + 1] <= dphi[i] {
                return Err(Error::AssumptionViolation(format!(
                    "table knots and φ' must be strictly increasing (segment {i})"
                )));
            }
            s.push((dphi[i + 1] / dphi[i]).ln() / (t[i + 1] / t[i]).ln());
        }
        let mut cumulative = vec![dphi[0] * t[0] / (s[0] + 1.0)];
        for i in 0..s.len() {
            let seg = dphi[i] * t[i] / (s[i] + 1.0) * ((t[i + 1] / t[i]).powf(s[i] + 1.0) - 1.0);
            cumulative.push(cumulative[i] + seg);
        }
        let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = s.iter().cloned().fold(0.0, f64::max);
        Ok(Self {
            body: Body::Table(Arc::new(Table {
                t: t.to_vec(),
                d: dphi.to_vec(),
                s,
                cumulative,
            })),
            char_lo: lo,
            char_hi: hi,
            delta2: 2f64.powf(1.0 + hi),
        })
    }

    /// The shifted function `φ_a`.
    pub fn shift(&self, a: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!("shift must be finite and >= 0, got {a}")));
        }
        let lo = self.char_lo.min(1.0);
        let hi = self.char_hi.max(1.0);
        Ok(Self {
            body: Body::Shifted {
                base: Arc::new(self.clone()),
                a,
            },
            char_lo: lo,
            char_hi: hi,
            delta2: 2f64.powf(1.0 + hi),
        })
    }

    pub fn kind(&self) -> Kind {
        match &self.body {
            Body::Power { p, c } if (*c - 1.0 / *p).abs() < f64::EPSILON => Kind::Power { p: *p },
            Body::Power { p, .. } => Kind::MaxPower { p: *p, q: *p },
            Body::MaxPower { p, q, .. } => Kind::MaxPower { p: *p, q: *q },
            Body::MinPower { p, q, .. } => Kind::MinPower { p: *p, q: *q },
            Body::Shifted { a, .. } => Kind::Shifted { a: *a },
            Body::Table(_) => Kind::NumericTable,
        }
    }

    /// Base function of a shifted kind.
    pub fn base(&self) -> Option<&OrliczFunction> {
        match &self.body {
            Body::Shifted { base, .. } => Some(base),
            _ => None,
        }
    }

    /// Exponent `p` when `φ = t^p/p` exactly.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.kind() {
            Kind::Power { p } => Some(p),
            _ => None,
        }
    }

    pub fn spec(&self) -> PhiSpec {
        match &self.body {
            Body::Power { p, c } if (*c - 1.0 / *p).abs() < f64::EPSILON => PhiSpec::Power { p: *p },
            Body::Power { p, .. } => PhiSpec::MaxPower { p: *p, q: *p },
            Body::MaxPower { p, q, .. } => PhiSpec::MaxPower { p: *p, q: *q },
            Body::MinPower { p, q, .. } => PhiSpec::MinPower { p: *p, q: *q },
            Body::Shifted { base, a } => PhiSpec::Shifted {
                base: Box::new(base.spec()),
                a: *a,
            },
            Body::Table(tab) => PhiSpec::Table {
                t: tab.t.clone(),
                dphi: tab.d.clone(),
            },
        }
    }

    /// Declared lower bound of `φ''(t) t / φ'(t)`.
    pub fn char_lo(&self) -> f64 {
        self.char_lo
    }

    /// Declared upper bound of `φ''(t) t / φ'(t)`.
    pub fn char_hi(&self) -> f64 {
        self.char_hi
    }

    /// Declared `Δ₂` constant: `φ(2t) <= delta2 · φ(t)`.
    pub fn delta2(&self) -> f64 {
        self.delta2
    }

    /// Whether `t` lies where the declared characteristics do not apply
    /// (inside the max-power blend window).
    pub fn in_kink_window(&self, t: f64) -> bool {
        match &self.body {
            Body::MaxPower { .. } => (t - 1.0).abs() < KINK_HALF_WIDTH,
            Body::Shifted { base, a } => base.in_kink_window(a + t),
            _ => false,
        }
    }

    /// Points where the derivative formula switches branch; quadrature splits there.
    fn breakpoints(&self) -> Vec<f64> {
        match &self.body {
            Body::Power { .. } => vec![],
            Body::MaxPower { .. } => vec![1.0 - KINK_HALF_WIDTH, 1.0 + KINK_HALF_WIDTH],
            Body::MinPower { nodes, .. } => nodes.clone(),
            Body::Table(tab) => tab.t.clone(),
            Body::Shifted { base, a } => base
                .breakpoints()
                .into_iter()
                .map(|b| b - a)
                .filter(|b| *b > 0.0)
                .collect(),
        }
    }

    /// `φ(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.body {
            Body::Power { p, c } => c * t.powf(*p),
            Body::MaxPower {
                p,
                q,
                phi_left,
                offset,
            } => {
                let d = KINK_HALF_WIDTH;
                if t <= 1.0 - d {
                    t.powf(*p)
                } else if t >= 1.0 + d {
                    t.powf(*q) + offset
                } else {
                    phi_left + integrate_gl16(|s| max_power_window_deriv(*p, *q, s), 1.0 - d, t)
                }
            }
            Body::MinPower {
                p,
                q,
                t_lo,
                t_hi,
                nodes,
                cumulative,
            } => {
                if t <= *t_lo {
                    t.powf(*q)
                } else if t >= *t_hi {
                    cumulative.last().unwrap() + t.powf(*p) - t_hi.powf(*p)
                } else {
                    let j = nodes.partition_point(|x| *x <= t) - 1;
                    cumulative[j] + integrate_gl16(|s| min_power_deriv(*p, *q, s), nodes[j], t)
                }
            }
            Body::Table(tab) => tab.eval(t),
            Body::Shifted { base, a } => shifted_eval(base, *a, t, &self.breakpoints()),
        }
    }

    /// `φ'(t)`, with `φ'(0) = 0`.
    pub fn deriv(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.body {
            Body::Power { p, c } => c * p * t.powf(p - 1.0),
            Body::MaxPower { p, q, .. } => {
                let d = KINK_HALF_WIDTH;
                if t <= 1.0 - d {
                    p * t.powf(p - 1.0)
                } else if t >= 1.0 + d {
                    q * t.powf(q - 1.0)
                } else {
                    max_power_window_deriv(*p, *q, t)
                }
            }
            Body::MinPower { p, q, .. } => min_power_deriv(*p, *q, t),
            Body::Table(tab) => tab.deriv(t),
            Body::Shifted { base, a } => base.deriv(a + t) * t / (a + t),
        }
    }

    /// `φ''(t)` for `t > 0`.
    pub fn deriv2(&self, t: f64) -> f64 {
        match &self.body {
            Body::Power { p, c } => c * p * (p - 1.0) * t.powf(p - 2.0),
            Body::MaxPower { p, q, .. } => {
                let d = KINK_HALF_WIDTH;
                if t <= 1.0 - d {
                    p * (p - 1.0) * t.powf(p - 2.0)
                } else if t >= 1.0 + d {
                    q * (q - 1.0) * t.powf(q - 2.0)
                } else {
                    let x = (t - (1.0 - d)) / (2.0 * d);
                    let s = smoothstep(x);
                    let ds = smoothstep_d1(x) / (2.0 * d);
                    let (l1, r1) = (p * t.powf(p - 1.0), q * t.powf(q - 1.0));
                    let (l2, r2) = (p * (p - 1.0) * t.powf(p - 2.0), q * (q - 1.0) * t.powf(q - 2.0));
                    (1.0 - s) * l2 + s * r2 + ds * (r1 - l1)
                }
            }
            Body::MinPower { p, q, .. } => {
                let (w_q, w_p) = min_power_weights(*p, *q, t);
                min_power_deriv(*p, *q, t) / t * (w_q * (q - 1.0) + w_p * (p - 1.0))
            }
            Body::Table(tab) => tab.deriv(t) * tab.slope(t) / t,
            Body::Shifted { base, a } => {
                let s = a + t;
                base.deriv2(s) * t / s + base.deriv(s) * a / (s * s)
            }
        }
    }

    /// `φ'(t) / t`, the radial coefficient of `A(P) = φ'(|P|) P / |P|`; the
    /// limit value at `t = 0` (possibly `0` or `+∞`).
    pub fn deriv_over_t(&self, t: f64) -> f64 {
        if t > 0.0 {
            return self.deriv(t) / t;
        }
        match &self.body {
            Body::Shifted { base, a } if *a > 0.0 => base.deriv(*a) / a,
            _ => {
                let tiny = 1e-300;
                self.deriv(tiny) / tiny
            }
        }
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            Body::Power { p, c } if (*c - 1.0 / *p).abs() < f64::EPSILON => write!(f, "power(p={p})"),
            Body::Power { p, .. } => write!(f, "unit_power(p={p})"),
            Body::MaxPower { p, q, .. } => write!(f, "max_power(p={p},q={q})"),
            Body::MinPower { p, q, .. } => write!(f, "min_power(p={p},q={q})"),
            Body::Table(tab) => write!(f, "table({} knots)", tab.t.len()),
            Body::Shifted { base, a } => write!(f, "shifted({base},a={a})"),
        }
    }
}

fn max_power_window_deriv(p: f64, q: f64, t: f64) -> f64 {
    let d = KINK_HALF_WIDTH;
    let s = smoothstep((t - (1.0 - d)) / (2.0 * d));
    (1.0 - s) * p * t.powf(p - 1.0) + s * q * t.powf(q - 1.0)
}

/// Weights of the `q`-branch and `p`-branch in the smooth minimum.
fn min_power_weights(p: f64, q: f64, t: f64) -> (f64, f64) {
    // log of (a/b)^k with a = q t^{q-1}, b = p t^{p-1}
    let log_ratio = SMOOTH_MIN_EXPONENT * ((q / p).ln() + (q - p) * t.ln());
    // weight of a is a^{-k} / (a^{-k} + b^{-k}) = 1 / (1 + (a/b)^k)
    if log_ratio > 700.0 {
        (0.0, 1.0)
    } else if log_ratio < -700.0 {
        (1.0, 0.0)
    } else {
        let r = log_ratio.exp();
        (1.0 / (1.0 + r), r / (1.0 + r))
    }
}

fn min_power_deriv(p: f64, q: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let a = q * t.powf(q - 1.0);
    let b = p * t.powf(p - 1.0);
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let r = (lo / hi).powf(SMOOTH_MIN_EXPONENT);
    lo * (1.0 + r).powf(-1.0 / SMOOTH_MIN_EXPONENT)
}

impl Table {
    fn segment(&self, t: f64) -> usize {
        // segment index into `s`; below the first knot uses segment 0
        let i = self.t.partition_point(|x| *x <= t);
        i.saturating_sub(1).min(self.s.len() - 1)
    }

    fn slope(&self, t: f64) -> f64 {
        self.s[self.segment(t)]
    }

    fn deriv(&self, t: f64) -> f64 {
        let i = self.segment(t);
        self.d[i] * (t / self.t[i]).powf(self.s[i])
    }

    fn eval(&self, t: f64) -> f64 {
        if t <= self.t[0] {
            return self.cumulative[0] * (t / self.t[0]).powf(self.s[0] + 1.0);
        }
        let i = self.segment(t);
        let s = self.s[i];
        self.cumulative[i] + self.d[i] * self.t[i] / (s + 1.0) * ((t / self.t[i]).powf(s + 1.0) - 1.0)
    }
}

fn shifted_eval(base: &OrliczFunction, a: f64, t: f64, breakpoints: &[f64]) -> f64 {
    if a == 0.0 {
        return base.eval(t);
    }
    if let Body::Power { p, c } = base.body {
        // closed form of ∫_0^t c p (a+s)^{p-2} s ds, used where it does not cancel
        if t >= a {
            let at = a + t;
            return c * p * (at.powf(p) / p - a * at.powf(p - 1.0) / (p - 1.0) + a.powf(p) / (p * (p - 1.0)));
        }
        return integrate_gl16(|s| c * p * (a + s).powf(p - 2.0) * s, 0.0, t);
    }
    // composite Gauss on [0, min(t,a)] and dyadic pieces [a 2^j, a 2^{j+1}],
    // refined at the base's branch points
    let mut cuts = vec![0.0, t.min(a)];
    let mut x = a;
    while x < t {
        cuts.push(x);
        x *= 2.0;
    }
    cuts.extend(breakpoints.iter().copied().filter(|b| *b > 0.0 && *b < t));
    cuts.push(t);
    cuts.sort_by(|u, v| u.partial_cmp(v).unwrap());
    cuts.dedup();
    let integrand = |s: f64| base.deriv(a + s) * s / (a + s);
    cuts.windows(2).map(|w| integrate_gl16(integrand, w[0], w[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn quadratic_values() {
        let phi = OrliczFunction::power(2.0).unwrap();
        assert_eq!(phi.eval(3.0), 4.5);
        assert_eq!(phi.deriv(3.0), 3.0);
        assert_eq!(phi.deriv2(3.0), 1.0);
    }

    #[test]
    fn cubic_ratio_is_two() {
        let phi = OrliczFunction::power(3.0).unwrap();
        for t in [1e-3, 0.5, 1.0, 7.0, 1e3] {
            assert!(rel(phi.deriv2(t) * t / phi.deriv(t), 2.0) < 1e-14);
        }
    }

    #[test]
    fn rejects_non_superlinear_power() {
        assert!(OrliczFunction::power(1.0).is_err());
        assert!(OrliczFunction::power(0.5).is_err());
        assert!(OrliczFunction::max_power(2.0, 1.5).is_err());
    }

    #[test]
    fn max_power_is_piecewise() {
        let phi = OrliczFunction::max_power(1.5, 3.0).unwrap();
        assert!(rel(phi.eval(0.5), 0.5f64.powf(1.5)) < 1e-14);
        assert!(rel(phi.eval(2.0), 8.0) < 1e-6);
        // continuity across the blend window
        let d = KINK_HALF_WIDTH;
        for t in [1.0 - d, 1.0 + d] {
            assert!(rel(phi.eval(t - 1e-12), phi.eval(t + 1e-12)) < 1e-10);
            assert!(rel(phi.deriv(t - 1e-12), phi.deriv(t + 1e-12)) < 1e-9);
        }
        // convex inside the window
        for i in 0..=100 {
            let t = 1.0 - d + 2.0 * d * i as f64 / 100.0;
            assert!(phi.deriv2(t) > 0.0);
        }
    }

    #[test]
    fn min_power_ratio_stays_between_branches() {
        let phi = OrliczFunction::min_power(1.5, 3.0).unwrap();
        for t in crate::numerics::log_grid(1e-4, 1e4, 400) {
            let r = phi.deriv2(t) * t / phi.deriv(t);
            assert!((0.5 - 1e-12..=2.0 + 1e-12).contains(&r), "t={t} r={r}");
        }
        assert!(rel(phi.eval(0.01), 0.01f64.powi(3)) < 1e-12);
    }

    #[test]
    fn min_power_value_consistent_with_derivative() {
        let phi = OrliczFunction::min_power(1.5, 3.0).unwrap();
        for t in [0.3, 0.6, 0.9, 1.7, 5.0] {
            let h = 1e-6 * t;
            let fd = (phi.eval(t + h) - phi.eval(t - h)) / (2.0 * h);
            assert!(rel(fd, phi.deriv(t)) < 1e-7, "t={t}");
        }
    }

    #[test]
    fn table_reproduces_power() {
        let t: Vec<f64> = crate::numerics::log_grid(0.1, 10.0, 9);
        let d: Vec<f64> = t.iter().map(|x| x * x).collect();
        let phi = OrliczFunction::from_table(&t, &d).unwrap();
        for x in [0.05, 0.3, 2.0, 20.0] {
            assert!(rel(phi.eval(x), x.powi(3) / 3.0) < 1e-12);
            assert!(rel(phi.deriv2(x), 2.0 * x) < 1e-12);
        }
    }

    #[test]
    fn shift_zero_is_identity() {
        let phi = OrliczFunction::max_power(1.5, 3.0).unwrap();
        let phi0 = phi.shift(0.0).unwrap();
        for t in [0.1, 0.9995, 1.0, 2.0, 50.0] {
            assert!(rel(phi0.eval(t), phi.eval(t)) < 1e-14);
        }
    }

    #[test]
    fn quadratic_is_shift_invariant() {
        let phi = OrliczFunction::power(2.0).unwrap();
        for a in [0.0, 0.3, 5.0, 1e3] {
            let pa = phi.shift(a).unwrap();
            for t in [1e-4, 0.2, 3.0, 40.0] {
                assert!(rel(pa.deriv(t), t) < 1e-14);
                assert!(rel(pa.eval(t), phi.eval(t)) < 1e-12, "a={a} t={t}");
            }
        }
    }

    #[test]
    fn power_shift_closed_form_matches_quadrature() {
        let phi = OrliczFunction::power(3.0).unwrap();
        let pa = phi.shift(1.0).unwrap();
        for t in [0.5, 1.0, 4.0, 100.0] {
            let quad = shifted_eval(&OrliczFunction::max_power(3.0, 3.0).unwrap(), 1.0, t, &[]) / 3.0;
            assert!(rel(pa.eval(t), quad) < 1e-12, "t={t}");
        }
    }

    #[test]
    fn spec_roundtrip() {
        let spec: PhiSpec = serde_json::from_str(r#"{ "kind": "power", "p": 3.0 }"#).unwrap();
        let phi = spec.build().unwrap();
        assert_eq!(phi.kind(), Kind::Power { p: 3.0 });
        assert_eq!(phi.spec(), spec);
    }
}
