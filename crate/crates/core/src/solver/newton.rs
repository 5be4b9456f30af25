//! Backward-Euler residual of the variational finite-volume scheme, its
//! Newton/Picard linearisations and a Jacobi-preconditioned CG.

use rayon::prelude::*;

use crate::orlicz::OrliczFunction;

use super::grid::Geometry;
use super::stencil::FaceStencil;

/// Fixed-order chunked dot product (independent of the thread count).
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    const CHUNK: usize = 4096;
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    partial.iter().sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Face gradients and the scalar coefficients of `A` and its derivative.
pub(crate) struct FaceState {
    pub grad: Vec<f64>,
    pub norm: Vec<f64>,
    /// `φ'(s)/s`.
    pub coef: Vec<f64>,
    /// `φ''(s)`.
    pub second: Vec<f64>,
}

/// `u ↦ -div A(∇u)` on a fixed grid for a fixed (regularised) `φ`.
pub(crate) struct Operator<'a> {
    pub geo: &'a Geometry,
    pub stencil: &'a FaceStencil,
    pub phi: &'a OrliczFunction,
}

impl<'a> Operator<'a> {
    fn block(&self) -> usize {
        self.geo.n * self.geo.components
    }

    pub fn face_state(&self, u: &[f64], bvals: &[f64]) -> FaceState {
        let grad = self.stencil.gradient(u, self.geo.components, Some(bvals));
        let b = self.block();
        let nf = self.stencil.face_count();
        let mut norm = vec![0.0; nf];
        let mut coef = vec![0.0; nf];
        let mut second = vec![0.0; nf];
        norm.par_iter_mut()
            .zip(coef.par_iter_mut())
            .zip(second.par_iter_mut())
            .enumerate()
            .for_each(|(f, ((nv, cv), sv))| {
                let s = grad[f * b..(f + 1) * b].iter().map(|x| x * x).sum::<f64>().sqrt();
                *nv = s;
                *cv = self.phi.deriv_over_t(s);
                *sv = if s > 0.0 { self.phi.deriv2(s) } else { *cv };
            });
        FaceState {
            grad,
            norm,
            coef,
            second,
        }
    }

    /// `(1/hⁿ) Gᵀ W A(P)`.
    pub fn divergence(&self, st: &FaceState) -> Vec<f64> {
        let b = self.block();
        let mut flux = st.grad.clone();
        flux.par_chunks_mut(b).zip(&st.coef).for_each(|(f, c)| f.iter_mut().for_each(|x| *x *= c));
        let mut out = vec![0.0; self.geo.len()];
        self.stencil.adjoint(&flux, self.geo.components, &mut out);
        let inv = 1.0 / self.geo.cell_volume();
        out.iter_mut().for_each(|x| *x *= inv);
        out
    }

    /// Magnitude of the individual flux contributions per cell.
    pub fn flux_magnitude(&self, st: &FaceState) -> Vec<f64> {
        let b = self.block();
        let mut flux = st.grad.clone();
        flux.par_chunks_mut(b).zip(&st.coef).for_each(|(f, c)| f.iter_mut().for_each(|x| *x *= c));
        let mut out = vec![0.0; self.geo.len()];
        self.stencil.adjoint_abs(&flux, self.geo.components, &mut out);
        let inv = 1.0 / self.geo.cell_volume();
        out.iter_mut().for_each(|x| *x *= inv);
        out
    }

    /// `Σ_f w_f φ(|P_f|)`.
    pub fn energy(&self, st: &FaceState) -> f64 {
        let parts: Vec<f64> = st
            .norm
            .iter()
            .zip(self.stencil.weights())
            .map(|(s, w)| w * self.phi.eval(*s))
            .collect();
        parts.iter().sum()
    }

    /// `(1/hⁿ) Gᵀ W D G v` with the Newton (`picard = false`) or frozen-coefficient `D`.
    pub fn jacobian_apply(&self, st: &FaceState, picard: bool, v: &[f64], out: &mut [f64]) {
        let b = self.block();
        let mut dp = self.stencil.gradient(v, self.geo.components, None);
        dp.par_chunks_mut(b).enumerate().for_each(|(f, d)| {
            let g = st.coef[f];
            let s = st.norm[f];
            if picard || s == 0.0 {
                d.iter_mut().for_each(|x| *x *= g);
                return;
            }
            let p = &st.grad[f * b..(f + 1) * b];
            let proj: f64 = p.iter().zip(d.iter()).map(|(a, c)| a * c).sum::<f64>() / (s * s);
            let k = st.second[f] - g;
            for (x, pi) in d.iter_mut().zip(p) {
                *x = g * *x + k * proj * pi;
            }
        });
        self.stencil.adjoint(&dp, self.geo.components, out);
        let inv = 1.0 / self.geo.cell_volume();
        out.iter_mut().for_each(|x| *x *= inv);
    }

    /// Diagonal of [`Self::jacobian_apply`].
    pub fn jacobian_diag(&self, st: &FaceState, picard: bool) -> Vec<f64> {
        let comps = self.geo.components;
        let n = self.geo.n;
        let b = self.block();
        let inv = 1.0 / self.geo.cell_volume();
        let mut out = vec![0.0; self.geo.len()];
        out.par_chunks_mut(comps).enumerate().for_each(|(cell, chunk)| {
            for &(f, cf) in self.stencil.cell_faces(cell) {
                let w = self.stencil.weight(f);
                let g = st.coef[f];
                let s = st.norm[f];
                let c2: f64 = cf[..n].iter().map(|x| x * x).sum();
                for (c, slot) in chunk.iter_mut().enumerate() {
                    let mut val = g * c2;
                    if !picard && s > 0.0 {
                        let p = &st.grad[f * b..(f + 1) * b];
                        let proj: f64 = (0..n).map(|d| cf[d] * p[d * comps + c]).sum::<f64>() / s;
                        val += (st.second[f] - g) * proj * proj;
                    }
                    *slot += w * val * inv;
                }
            }
        });
        out
    }
}

/// Outcome of a preconditioned CG solve.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CgOutcome {
    pub iterations: usize,
    #[allow(dead_code)]
    pub relative_residual: f64,
}

/// Solves `(shift·I + J) x = b` by CG with Jacobi preconditioning.
pub(crate) fn conjugate_gradient(
    op: &Operator,
    st: &FaceState,
    picard: bool,
    shift: f64,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> (Vec<f64>, CgOutcome) {
    let len = b.len();
    let diag: Vec<f64> = op.jacobian_diag(st, picard).into_iter().map(|d| d + shift).collect();
    let mut x = vec![0.0; len];
    let mut r = b.to_vec();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return (
            x,
            CgOutcome {
                iterations: 0,
                relative_residual: 0.0,
            },
        );
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; len];
    let mut it = 0;
    let mut rel = 1.0;
    while it < max_iter {
        op.jacobian_apply(st, picard, &p, &mut ap);
        ap.par_iter_mut().zip(&p).for_each(|(a, q)| *a += shift * q);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        x.par_iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.par_iter_mut().zip(&ap).for_each(|(ri, ai)| *ri -= alpha * ai);
        it += 1;
        rel = norm(&r) / bnorm;
        if rel <= rel_tol {
            break;
        }
        z.par_iter_mut()
            .zip(&r)
            .zip(&diag)
            .for_each(|((zi, ri), di)| *zi = ri / di);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    (
        x,
        CgOutcome {
            iterations: it,
            relative_residual: rel,
        },
    )
}
