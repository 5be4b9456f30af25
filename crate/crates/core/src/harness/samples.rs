use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::orlicz::{select_q, OrliczFunction};
use crate::solver::field::derive_snapshot;
use crate::solver::{DerivedFields, Geometry, GradOrField};

use super::cylinder::{Ball, CutoffFamily, ParabolicCylinder};

/// Region a sample set was drawn from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Parabolic(ParabolicCylinder),
    Stationary(Ball),
}

/// Gradient data of a solution restricted to `Q_{2R}` (or `B_{2R}`), laid out
/// `[time][cell]`. Cells enter by the centre-in-ball test; times are the
/// snapshots in `(t0 - 4αR², t0]`.
#[derive(Clone, Debug)]
pub struct Samples {
    pub phi: OrliczFunction,
    pub region: Region,
    pub geo: Geometry,
    /// Exponent of `ζ^q`.
    pub q: f64,
    pub times: Vec<f64>,
    pub cells: Vec<usize>,
    pub xs: Vec<[f64; 2]>,
    pub dist: Vec<f64>,
    /// `|∇u|`.
    pub v: Vec<f64>,
    /// `φ(|∇u|)`.
    pub phi_v: Vec<f64>,
    /// `∇u` as `[time][cell][d][c]`.
    pub grad: Vec<f64>,
    /// `|∇V(∇u)|²`.
    pub grad_v_sq: Vec<f64>,
    /// `|∇u|` on the whole grid per time.
    pub v_full: Vec<Vec<f64>>,
    /// Full derived fields at the last time.
    pub top: DerivedFields,
}

impl Samples {
    pub fn parabolic(field: &GradOrField, phi: &OrliczFunction, cyl: ParabolicCylinder) -> Result<Self> {
        let times = field.times();
        let (first, last) = (times[0], *times.last().unwrap());
        cyl.check_inside(&field.geo, first, last)?;
        let picked: Vec<usize> = (0..times.len())
            .filter(|&i| times[i] > cyl.start(2.0) && times[i] <= cyl.t0 * (1.0 + 1e-12) + 1e-14)
            .collect();
        if !picked.iter().any(|&i| times[i] > cyl.start(1.0)) {
            return Err(Error::OutOfDomain(format!("no snapshot inside the time interval of Q_R (t0={})", cyl.t0)));
        }
        Self::build(field, phi, Region::Parabolic(cyl), &picked, cyl.x0, cyl.r)
    }

    pub fn stationary(field: &GradOrField, phi: &OrliczFunction, ball: Ball) -> Result<Self> {
        ball.check_inside(&field.geo)?;
        let last = field.snapshots.len() - 1;
        Self::build(field, phi, Region::Stationary(ball), &[last], ball.x0, ball.r)
    }

    fn build(field: &GradOrField, phi: &OrliczFunction, region: Region, picked: &[usize], x0: [f64; 2], r: f64) -> Result<Self> {
        let geo = field.geo.clone();
        let n = geo.n;
        let q = select_q(phi)?.q;
        let mut cells = Vec::new();
        let mut xs = Vec::new();
        let mut dist = Vec::new();
        for cell in 0..geo.cell_count() {
            let x = geo.cell_center(cell);
            let d = (0..n).map(|k| (x[k] - x0[k]).powi(2)).sum::<f64>().sqrt();
            if d < 2.0 * r {
                cells.push(cell);
                xs.push(x);
                dist.push(d);
            }
        }
        let derived: Vec<DerivedFields> = picked
            .par_iter()
            .map(|&i| derive_snapshot(phi, &geo, &field.snapshots[i]))
            .collect();
        let block = n * geo.components;
        let nc = cells.len();
        let mut v = Vec::with_capacity(derived.len() * nc);
        let mut grad = Vec::with_capacity(derived.len() * nc * block);
        let mut grad_v_sq = Vec::with_capacity(derived.len() * nc);
        for d in &derived {
            for &cell in &cells {
                v.push(d.v[cell]);
                grad.extend_from_slice(&d.grad[cell * block..(cell + 1) * block]);
                let gv = &d.grad_v[cell * n * block..(cell + 1) * n * block];
                grad_v_sq.push(gv.iter().map(|x| x * x).sum());
            }
        }
        let phi_v = v.iter().map(|&t| phi.eval(t)).collect();
        let times = picked.iter().map(|&i| field.snapshots[i].t).collect();
        let v_full = derived.iter().map(|d| d.v.clone()).collect();
        let top = derived.into_iter().last().expect("at least one snapshot");
        Ok(Self {
            phi: phi.clone(),
            region,
            geo,
            q,
            times,
            cells,
            xs,
            dist,
            v,
            phi_v,
            grad,
            grad_v_sq,
            v_full,
            top,
        })
    }

    pub fn n(&self) -> usize {
        self.geo.n
    }

    pub fn nt(&self) -> usize {
        self.times.len()
    }

    pub fn nc(&self) -> usize {
        self.cells.len()
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn radius(&self) -> f64 {
        match self.region {
            Region::Parabolic(c) => c.r,
            Region::Stationary(b) => b.r,
        }
    }

    /// Intrinsic scaling `α` (one for stationary samples).
    pub fn alpha(&self) -> f64 {
        match self.region {
            Region::Parabolic(c) => c.alpha,
            Region::Stationary(_) => 1.0,
        }
    }

    pub fn family(&self) -> CutoffFamily {
        match self.region {
            Region::Parabolic(c) => CutoffFamily::parabolic(&c),
            Region::Stationary(b) => CutoffFamily::spatial(&b),
        }
    }

    /// `(t, dist)` of sample `i`.
    pub fn point(&self, i: usize) -> (f64, f64) {
        (self.times[i / self.nc()], self.dist[i % self.nc()])
    }

    /// Membership in `Q_{λR}` (or `B_{λR}`) per sample.
    pub fn mask(&self, lambda: f64) -> Vec<bool> {
        (0..self.len())
            .map(|i| {
                let (t, d) = self.point(i);
                match self.region {
                    Region::Parabolic(c) => c.contains(lambda, t, d),
                    Region::Stationary(b) => d < lambda * b.r,
                }
            })
            .collect()
    }

    /// `ζ_k^q` per sample.
    pub fn weights(&self, k: usize) -> Vec<f64> {
        let z = self.family().member(k);
        (0..self.len())
            .map(|i| {
                let (t, d) = self.point(i);
                z.value(t, d).powf(self.q)
            })
            .collect()
    }

    /// Dashed average over `Q_{λR}` (discrete measure).
    pub fn mean_over(&self, f: &[f64], lambda: f64) -> f64 {
        let mask = self.mask(lambda);
        let (mut s, mut c) = (0.0, 0usize);
        for (x, m) in f.iter().zip(&mask) {
            if *m {
                s += x;
                c += 1;
            }
        }
        if c == 0 {
            0.0
        } else {
            s / c as f64
        }
    }

    /// Discrete maximum over `Q_{λR}`.
    pub fn sup_over(&self, f: &[f64], lambda: f64) -> f64 {
        f.iter()
            .zip(self.mask(lambda))
            .filter(|(_, m)| *m)
            .fold(0.0f64, |a, (x, _)| a.max(*x))
    }

    /// Empirical `q`-quantile (nearest rank) of `f` over `Q_{λR}`.
    pub fn quantile_over(&self, f: &[f64], lambda: f64, q: f64) -> f64 {
        let mut vals: Vec<f64> = f.iter().zip(self.mask(lambda)).filter(|(_, m)| *m).map(|(x, _)| *x).collect();
        if vals.is_empty() {
            return 0.0;
        }
        vals.sort_by(f64::total_cmp);
        let idx = ((vals.len() - 1) as f64 * q.clamp(0.0, 1.0)).round() as usize;
        vals[idx]
    }
}
