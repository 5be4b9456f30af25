use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::log_grid;
use crate::orlicz::{conjugate, Kind, OrliczFunction};

use super::maps::v_map;
use super::matrix::GradMatrix;

/// Constants `c_δ` for both inequalities of the shift-change estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftChangeCalibration {
    pub delta: f64,
    pub c_delta: f64,
    pub c_delta_conj: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftChangeResult {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub lhs_conj: f64,
    pub rhs_conj: f64,
    pub pass_conj: bool,
}

fn needed(lhs: f64, penalty: f64, base: f64) -> f64 {
    let excess = lhs - penalty;
    if excess <= 0.0 {
        0.0
    } else {
        excess / base
    }
}

/// Calibrates `c_δ` as 1.25 times the largest constant needed over a coarse
/// structured sample of `(|P|, |Q|/|P|, angle, t)`.
pub fn calibrate_shift_change(phi: &OrliczFunction, delta: f64) -> Result<ShiftChangeCalibration> {
    let scales = match phi.kind() {
        Kind::Power { .. } => vec![1.0],
        _ => log_grid(1e-3, 1e3, 5),
    };
    let mut ratios = log_grid(1e-4, 1e4, 33);
    ratios.push(1.0);
    let angles: Vec<f64> = (0..=12).map(|i| std::f64::consts::PI * i as f64 / 12.0).collect();
    let ts = log_grid(1e-6, 1e6, 49);
    let mut cases = Vec::new();
    for &s in &scales {
        for &r in &ratios {
            for &th in &angles {
                cases.push((s, r, th));
            }
        }
    }
    let worst: Vec<Result<(f64, f64)>> = cases
        .par_iter()
        .map(|&(s, r, th)| {
            let p = GradMatrix::new(1, 2, vec![s, 0.0])?;
            let q = GradMatrix::new(1, 2, vec![s * r * th.cos(), s * r * th.sin()])?;
            let dv = v_map(phi, &p).sub(&v_map(phi, &q));
            let penalty = delta * dv.dot(&dv);
            let (fp, fq) = (phi.shift(p.norm())?, phi.shift(q.norm())?);
            let (mut c, mut cc) = (0.0f64, 0.0f64);
            let dual_scale = phi.deriv(s);
            for &k in &ts {
                let t = k * s;
                c = c.max(needed(fp.eval(t), penalty, fq.eval(t)));
                let tc = k * dual_scale;
                cc = cc.max(needed(conjugate(&fp, tc)?, penalty, conjugate(&fq, tc)?));
            }
            Ok((c, cc))
        })
        .collect();
    let (mut c, mut cc) = (1.0f64, 1.0f64);
    for w in worst {
        let (a, b) = w?;
        c = c.max(a);
        cc = cc.max(b);
    }
    Ok(ShiftChangeCalibration {
        delta,
        c_delta: 1.25 * c,
        c_delta_conj: 1.25 * cc,
    })
}

/// Evaluates `φ_{|P|}(t) <= c_δ φ_{|Q|}(t) + δ|V(P)-V(Q)|²` and the
/// conjugate variant with the calibrated constants.
pub fn shift_change_check(
    phi: &OrliczFunction,
    cal: &ShiftChangeCalibration,
    p: &GradMatrix,
    q: &GradMatrix,
    t: f64,
) -> Result<ShiftChangeResult> {
    let dv = v_map(phi, p).sub(&v_map(phi, q));
    let penalty = cal.delta * dv.dot(&dv);
    let (fp, fq) = (phi.shift(p.norm())?, phi.shift(q.norm())?);
    let lhs = fp.eval(t);
    let rhs = cal.c_delta * fq.eval(t) + penalty;
    let lhs_conj = conjugate(&fp, t)?;
    let rhs_conj = cal.c_delta_conj * conjugate(&fq, t)? + penalty;
    let slack = |r: f64| r * (1.0 + 1e-12) + 1e-300;
    Ok(ShiftChangeResult {
        lhs,
        rhs,
        pass: lhs <= slack(rhs),
        lhs_conj,
        rhs_conj,
        pass_conj: lhs_conj <= slack(rhs_conj),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cases_pass() {
        let phi = OrliczFunction::power(3.0).unwrap();
        let cal = calibrate_shift_change(&phi, 0.1).unwrap();
        assert!(cal.c_delta >= 1.0);
        let p = GradMatrix::new(1, 2, vec![0.3, 0.4]).unwrap();
        let same = shift_change_check(&phi, &cal, &p, &p, 2.0).unwrap();
        assert!(same.pass && same.pass_conj);
        let q = GradMatrix::new(1, 2, vec![4.0, -1.0]).unwrap();
        let zero = shift_change_check(&phi, &cal, &p, &q, 0.0).unwrap();
        assert_eq!(zero.lhs, 0.0);
        assert!(zero.pass && zero.pass_conj);
    }
}
