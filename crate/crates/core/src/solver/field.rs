use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::orlicz::OrliczFunction;
use crate::tensor::{v_map, GradMatrix};

use super::grid::{Geometry, GridSpec};
use super::presets::DataSource;
use super::StepStats;

/// Cell values at one time, laid out `[cell][component]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

/// A computed solution: grid, time snapshots and per-step diagnostics.
#[derive(Clone, Debug)]
pub struct GradOrField {
    pub grid: GridSpec,
    pub geo: Geometry,
    pub snapshots: Vec<Snapshot>,
    pub stats: Vec<StepStats>,
}

impl GradOrField {
    pub fn new(grid: GridSpec, geo: Geometry) -> Self {
        Self {
            grid,
            geo,
            snapshots: Vec::new(),
            stats: Vec::new(),
        }
    }

    pub fn push(&mut self, s: Snapshot) {
        self.snapshots.push(s);
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("field has no snapshots")
    }

    /// Error norms of a snapshot against the data's known solution.
    pub fn error(&self, data: &dyn DataSource, index: usize) -> Option<ErrorNorms> {
        let snap = &self.snapshots[index];
        let geo = &self.geo;
        let comps = geo.components;
        let vol = geo.cell_volume();
        let mut e = ErrorNorms::default();
        for cell in 0..geo.cell_count() {
            let x = geo.cell_center(cell);
            for c in 0..comps {
                let d = (snap.u[cell * comps + c] - data.exact(snap.t, x, c)?).abs();
                e.linf = e.linf.max(d);
                e.l1 += d * vol;
                e.l2 += d * d * vol;
            }
        }
        e.l2 = e.l2.sqrt();
        Some(e)
    }

    /// Multiplies every value by `s` (used for amplitude studies of exact scalings).
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for snap in &mut out.snapshots {
            snap.u.iter_mut().for_each(|x| *x *= s);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub linf: f64,
    pub l1: f64,
    pub l2: f64,
}

/// Gradient-derived fields at cell centres for one snapshot.
///
/// `grad` and `vfield` are laid out `[cell][d][c]`, `grad_v` as
/// `[cell][e][d][c]` with `e` the differentiation direction. Differences are
/// centred where both neighbours exist and one-sided at the boundary layer.
#[derive(Clone, Debug)]
pub struct DerivedFields {
    pub t: f64,
    pub grad: Vec<f64>,
    pub v: Vec<f64>,
    pub vfield: Vec<f64>,
    pub grad_v: Vec<f64>,
}

pub(crate) fn difference(geo: &Geometry, values: &[f64], width: usize) -> Vec<f64> {
    let n = geo.n;
    let (mx, my) = (geo.m[0], geo.m[1]);
    let h = geo.h;
    let mut out = vec![0.0; geo.cell_count() * n * width];
    out.par_chunks_mut(n * width).enumerate().for_each(|(cell, chunk)| {
        let (ix, iy) = geo.cell_indices(cell);
        for d in 0..n {
            let (i, m) = if d == 0 { (ix, mx) } else { (iy, my) };
            let at = |k: usize| if d == 0 { geo.cell(k, iy) } else { geo.cell(ix, k) };
            let (lo, hi, span) = if i == 0 {
                (at(0), at(1), h)
            } else if i + 1 == m {
                (at(m - 2), at(m - 1), h)
            } else {
                (at(i - 1), at(i + 1), 2.0 * h)
            };
            for c in 0..width {
                chunk[d * width + c] = (values[hi * width + c] - values[lo * width + c]) / span;
            }
        }
    });
    out
}

/// Gradient, `|∇u|`, `V(∇u)` and `∇V(∇u)` for every snapshot.
pub fn discrete_fields(phi: &OrliczFunction, field: &GradOrField) -> Vec<DerivedFields> {
    field.snapshots.par_iter().map(|s| derive_snapshot(phi, &field.geo, s)).collect()
}

pub(crate) fn derive_snapshot(phi: &OrliczFunction, geo: &Geometry, snap: &Snapshot) -> DerivedFields {
    let n = geo.n;
    let comps = geo.components;
    let grad = difference(geo, &snap.u, comps);
    let block = n * comps;
    let v: Vec<f64> = grad
        .par_chunks(block)
        .map(|g| g.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let vfield: Vec<f64> = grad
        .par_chunks(block)
        .flat_map_iter(|g| {
            let m = GradMatrix::new(n, comps, g.to_vec()).expect("finite gradient");
            v_map(phi, &m).entries().to_vec()
        })
        .collect();
    let grad_v = difference(geo, &vfield, block);
    DerivedFields {
        t: snap.t,
        grad,
        v,
        vfield,
        grad_v,
    }
}
