use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Space-time grid of a run: a rectangle split into square cells, a target
/// dimension and the backward-Euler step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Spatial dimension (1 or 2).
    pub n: usize,
    /// Number of solution components.
    #[serde(rename = "N", default = "one")]
    pub components: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cells: Vec<usize>,
    pub dt: f64,
    pub t_end: f64,
    /// Record every `snapshot_stride`-th step (the initial state is always kept).
    #[serde(default = "one")]
    pub snapshot_stride: usize,
}

fn one() -> usize {
    1
}

impl GridSpec {
    /// Uniform grid on the unit interval or square.
    pub fn unit(n: usize, cells: usize, dt: f64, t_end: f64) -> Self {
        Self {
            n,
            components: 1,
            lower: vec![0.0; n],
            upper: vec![1.0; n],
            cells: vec![cells; n],
            dt,
            t_end,
            snapshot_stride: 1,
        }
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self)
    }

    /// The same grid with every cell split in `2^n` and the step scaled by `dt_factor`.
    pub fn refined(&self, dt_factor: f64) -> Self {
        let mut g = self.clone();
        g.cells.iter_mut().for_each(|c| *c *= 2);
        g.dt *= dt_factor;
        g.snapshot_stride = ((self.snapshot_stride as f64 / dt_factor).round() as usize).max(1);
        g
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// Validated cell geometry derived from a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub n: usize,
    pub components: usize,
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    /// Cells per axis; `m[1] = 1` when `n = 1`.
    pub m: [usize; 2],
    pub h: f64,
}

impl Geometry {
    pub fn new(spec: &GridSpec) -> Result<Self> {
        let n = spec.n;
        if !(1..=2).contains(&n) {
            return Err(Error::InvalidParameter(format!("spatial dimension must be 1 or 2, got {n}")));
        }
        if spec.components == 0 {
            return Err(Error::InvalidParameter("need at least one component".into()));
        }
        if spec.lower.len() != n || spec.upper.len() != n || spec.cells.len() != n {
            return Err(Error::InvalidParameter(format!("extent and cells need {n} entries per axis")));
        }
        if spec.cells.iter().any(|&c| c < 8) {
            return Err(Error::InvalidParameter("at least 8 cells per axis are required".into()));
        }
        if !(spec.dt > 0.0 && spec.dt.is_finite()) || !(spec.t_end >= 0.0) || spec.snapshot_stride == 0 {
            return Err(Error::InvalidParameter("need dt > 0, t_end >= 0 and stride >= 1".into()));
        }
        let hs: Vec<f64> = (0..n)
            .map(|d| (spec.upper[d] - spec.lower[d]) / spec.cells[d] as f64)
            .collect();
        if hs.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::InvalidParameter("upper bounds must exceed lower bounds".into()));
        }
        if n == 2 && (hs[0] - hs[1]).abs() > 1e-12 * hs[0] {
            return Err(Error::InvalidParameter(format!(
                "cells must be square, got spacings {} and {}",
                hs[0], hs[1]
            )));
        }
        let mut lower = [0.0; 2];
        let mut upper = [0.0; 2];
        let mut m = [1; 2];
        for d in 0..n {
            lower[d] = spec.lower[d];
            upper[d] = spec.upper[d];
            m[d] = spec.cells[d];
        }
        Ok(Self {
            n,
            components: spec.components,
            lower,
            upper,
            m,
            h: hs[0],
        })
    }

    pub fn cell_count(&self) -> usize {
        self.m[0] * self.m[1]
    }

    /// Length of a state vector (cells × components).
    pub fn len(&self) -> usize {
        self.cell_count() * self.components
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn cell(&self, ix: usize, iy: usize) -> usize {
        iy * self.m[0] + ix
    }

    #[inline]
    pub fn cell_indices(&self, cell: usize) -> (usize, usize) {
        (cell % self.m[0], cell / self.m[0])
    }

    /// Centre of the (possibly ghost) cell with signed indices.
    #[inline]
    pub fn center(&self, ix: isize, iy: isize) -> [f64; 2] {
        let y = if self.n == 2 {
            self.lower[1] + (iy as f64 + 0.5) * self.h
        } else {
            0.0
        };
        [self.lower[0] + (ix as f64 + 0.5) * self.h, y]
    }

    pub fn cell_center(&self, cell: usize) -> [f64; 2] {
        let (ix, iy) = self.cell_indices(cell);
        self.center(ix as isize, iy as isize)
    }

    /// `hⁿ`, the measure of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.n as i32)
    }

    /// Euclidean distance from a point to the nearest boundary of the rectangle.
    pub fn distance_to_boundary(&self, x: [f64; 2]) -> f64 {
        (0..self.n)
            .map(|d| (x[d] - self.lower[d]).min(self.upper[d] - x[d]))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coarse_or_rectangular_cells() {
        assert!(GridSpec::unit(1, 4, 0.1, 1.0).geometry().is_err());
        let mut g = GridSpec::unit(2, 16, 0.1, 1.0);
        g.upper[1] = 2.0;
        assert!(g.geometry().is_err());
        g.cells[1] = 32;
        assert!(g.geometry().is_ok());
    }

    #[test]
    fn centers_and_indices() {
        let geo = GridSpec::unit(2, 8, 0.1, 1.0).geometry().unwrap();
        let c = geo.cell(3, 5);
        assert_eq!(geo.cell_indices(c), (3, 5));
        let x = geo.cell_center(c);
        assert!((x[0] - 3.5 / 8.0).abs() < 1e-15 && (x[1] - 5.5 / 8.0).abs() < 1e-15);
        assert_eq!(GridSpec::unit(1, 10, 0.03, 0.1).steps(), 4);
    }
}
