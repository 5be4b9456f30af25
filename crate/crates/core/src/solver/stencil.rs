//! Face gradients of cell-centred data.
//!
//! Every face carries the full gradient: the normal difference across the
//! face and, in 2-D, the tangential difference averaged over the four
//! neighbouring cells. Values outside the rectangle come from reflecting the
//! Dirichlet data (`ghost = 2g - u`); corner values are reflected once more
//! along the ghost column (x-faces) or ghost row (y-faces). With this choice
//! the weighted sum of all face gradients depends on boundary data only, so
//! affine states have zero discrete divergence.

use rayon::prelude::*;

use super::grid::Geometry;

#[derive(Clone, Debug)]
struct Face {
    weight: f64,
    entries: std::ops::Range<usize>,
    bterms: std::ops::Range<usize>,
}

/// Sparse linear map from cell values (plus boundary data) to face gradients.
#[derive(Clone, Debug)]
pub struct FaceStencil {
    n: usize,
    faces: Vec<Face>,
    entries: Vec<(usize, [f64; 2])>,
    bterms: Vec<([f64; 2], [f64; 2])>,
    /// Transpose: for each cell the faces it feeds and with which coefficients.
    cell_ptr: Vec<usize>,
    cell_entries: Vec<(usize, [f64; 2])>,
}

#[derive(Clone, Copy, PartialEq)]
enum Axis {
    X,
    Y,
}

/// Affine expression `Σ coef·u_cell + Σ weight·g(point)`.
#[derive(Default)]
struct Affine {
    cells: Vec<(usize, f64)>,
    bdry: Vec<([f64; 2], f64)>,
}

impl Affine {
    fn add(&mut self, other: Affine, s: f64) {
        self.cells.extend(other.cells.into_iter().map(|(c, w)| (c, s * w)));
        self.bdry.extend(other.bdry.into_iter().map(|(p, w)| (p, s * w)));
    }
}

fn ext_value(geo: &Geometry, ix: isize, iy: isize, axis: Axis) -> Affine {
    let (mx, my) = (geo.m[0] as isize, geo.m[1] as isize);
    let in_x = (0..mx).contains(&ix);
    let in_y = (0..my).contains(&iy);
    let h = geo.h;
    let mut out = Affine::default();
    match (in_x, in_y) {
        (true, true) => out.cells.push((geo.cell(ix as usize, iy as usize), 1.0)),
        (false, true) => {
            let inner = if ix < 0 { 0 } else { mx - 1 };
            let xb = if ix < 0 { geo.lower[0] } else { geo.upper[0] };
            let y = geo.center(0, iy)[1];
            out.bdry.push(([xb, y], 2.0));
            out.add(ext_value(geo, inner, iy, axis), -1.0);
        }
        (true, false) => {
            let inner = if iy < 0 { 0 } else { my - 1 };
            let yb = if iy < 0 { geo.lower[1] } else { geo.upper[1] };
            let x = geo.center(ix, 0)[0];
            out.bdry.push(([x, yb], 2.0));
            out.add(ext_value(geo, ix, inner, axis), -1.0);
        }
        (false, false) => match axis {
            // reflect along the ghost column
            Axis::X => {
                let inner = if iy < 0 { 0 } else { my - 1 };
                let yb = if iy < 0 { geo.lower[1] } else { geo.upper[1] };
                let x = geo.lower[0] + (ix as f64 + 0.5) * h;
                out.bdry.push(([x, yb], 2.0));
                out.add(ext_value(geo, ix, inner, axis), -1.0);
            }
            // reflect along the ghost row
            Axis::Y => {
                let inner = if ix < 0 { 0 } else { mx - 1 };
                let xb = if ix < 0 { geo.lower[0] } else { geo.upper[0] };
                let y = geo.lower[1] + (iy as f64 + 0.5) * h;
                out.bdry.push(([xb, y], 2.0));
                out.add(ext_value(geo, inner, iy, axis), -1.0);
            }
        },
    }
    out
}

impl FaceStencil {
    pub fn new(geo: &Geometry) -> Self {
        let n = geo.n;
        let h = geo.h;
        let (mx, my) = (geo.m[0] as isize, geo.m[1] as isize);
        let base_w = if n == 2 { 0.5 * h * h } else { h };
        let mut st = FaceStencil {
            n,
            faces: Vec::new(),
            entries: Vec::new(),
            bterms: Vec::new(),
            cell_ptr: Vec::new(),
            cell_entries: Vec::new(),
        };
        let push_face = |st: &mut FaceStencil, weight: f64, terms: Vec<(Affine, [f64; 2])>| {
            let mut acc: Vec<(usize, [f64; 2])> = Vec::new();
            let mut bt: Vec<([f64; 2], [f64; 2])> = Vec::new();
            for (aff, coef) in terms {
                for (c, w) in aff.cells {
                    match acc.iter_mut().find(|(cc, _)| *cc == c) {
                        Some((_, v)) => {
                            v[0] += w * coef[0];
                            v[1] += w * coef[1];
                        }
                        None => acc.push((c, [w * coef[0], w * coef[1]])),
                    }
                }
                for (p, w) in aff.bdry {
                    bt.push((p, [w * coef[0], w * coef[1]]));
                }
            }
            acc.retain(|(_, v)| v[0] != 0.0 || v[1] != 0.0);
            acc.sort_by_key(|(c, _)| *c);
            let e0 = st.entries.len();
            st.entries.extend(acc);
            let b0 = st.bterms.len();
            st.bterms.extend(bt);
            st.faces.push(Face {
                weight,
                entries: e0..st.entries.len(),
                bterms: b0..st.bterms.len(),
            });
        };
        let inv_h = 1.0 / h;
        let tq = 0.25 / h;
        // x-faces between columns i and i+1
        for j in 0..my {
            for i in -1..mx {
                let boundary = i == -1 || i == mx - 1;
                let w = if boundary { 0.5 * base_w } else { base_w };
                let v = |a, b| ext_value(geo, a, b, Axis::X);
                let mut terms = vec![(v(i + 1, j), [inv_h, 0.0]), (v(i, j), [-inv_h, 0.0])];
                if n == 2 {
                    terms.push((v(i, j + 1), [0.0, tq]));
                    terms.push((v(i + 1, j + 1), [0.0, tq]));
                    terms.push((v(i, j - 1), [0.0, -tq]));
                    terms.push((v(i + 1, j - 1), [0.0, -tq]));
                }
                push_face(&mut st, w, terms);
            }
        }
        if n == 2 {
            for j in -1..my {
                for i in 0..mx {
                    let boundary = j == -1 || j == my - 1;
                    let w = if boundary { 0.5 * base_w } else { base_w };
                    let v = |a, b| ext_value(geo, a, b, Axis::Y);
                    let terms = vec![
                        (v(i, j + 1), [0.0, inv_h]),
                        (v(i, j), [0.0, -inv_h]),
                        (v(i + 1, j), [tq, 0.0]),
                        (v(i + 1, j + 1), [tq, 0.0]),
                        (v(i - 1, j), [-tq, 0.0]),
                        (v(i - 1, j + 1), [-tq, 0.0]),
                    ];
                    push_face(&mut st, w, terms);
                }
            }
        }
        // transpose
        let ncell = geo.cell_count();
        let mut counts = vec![0usize; ncell + 1];
        for &(c, _) in &st.entries {
            counts[c + 1] += 1;
        }
        for i in 0..ncell {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut cell_entries = vec![(0usize, [0.0; 2]); st.entries.len()];
        for (f, face) in st.faces.iter().enumerate() {
            for &(c, coef) in &st.entries[face.entries.clone()] {
                cell_entries[fill[c]] = (f, coef);
                fill[c] += 1;
            }
        }
        st.cell_ptr = counts;
        st.cell_entries = cell_entries;
        st
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn weight(&self, face: usize) -> f64 {
        self.faces[face].weight
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.faces.iter().map(|f| f.weight)
    }

    /// Boundary contribution to each face gradient, laid out `[face][d][c]`.
    pub fn boundary_values(&self, comps: usize, g: impl Fn([f64; 2], usize) -> f64 + Sync) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; self.faces.len() * n * comps];
        out.par_chunks_mut(n * comps).zip(&self.faces).for_each(|(chunk, face)| {
            for &(p, w) in &self.bterms[face.bterms.clone()] {
                for c in 0..comps {
                    let gv = g(p, c);
                    for d in 0..n {
                        chunk[d * comps + c] += w[d] * gv;
                    }
                }
            }
        });
        out
    }

    /// Face gradients `[face][d][c]` of the state `u` (`[cell][c]`) plus `bvals`.
    pub fn gradient(&self, u: &[f64], comps: usize, bvals: Option<&[f64]>) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; self.faces.len() * n * comps];
        out.par_chunks_mut(n * comps).enumerate().for_each(|(f, chunk)| {
            let face = &self.faces[f];
            if let Some(b) = bvals {
                chunk.copy_from_slice(&b[f * n * comps..(f + 1) * n * comps]);
            }
            for &(cell, coef) in &self.entries[face.entries.clone()] {
                for c in 0..comps {
                    let uc = u[cell * comps + c];
                    for d in 0..n {
                        chunk[d * comps + c] += coef[d] * uc;
                    }
                }
            }
        });
        out
    }

    /// `Gᵀ W F`: for each cell and component, `Σ_faces w_f Σ_d coef_d F_f[d][c]`.
    pub fn adjoint(&self, flux: &[f64], comps: usize, out: &mut [f64]) {
        let n = self.n;
        out.par_chunks_mut(comps).enumerate().for_each(|(cell, chunk)| {
            chunk.iter_mut().for_each(|x| *x = 0.0);
            for &(f, coef) in &self.cell_entries[self.cell_ptr[cell]..self.cell_ptr[cell + 1]] {
                let w = self.faces[f].weight;
                let fl = &flux[f * n * comps..(f + 1) * n * comps];
                for c in 0..comps {
                    let mut s = 0.0;
                    for d in 0..n {
                        s += coef[d] * fl[d * comps + c];
                    }
                    chunk[c] += w * s;
                }
            }
        });
    }

    /// `Σ_faces w_f Σ_d |coef_d| |F_f[d][c]|`, a magnitude scale for roundoff.
    pub fn adjoint_abs(&self, flux: &[f64], comps: usize, out: &mut [f64]) {
        let abs: Vec<f64> = flux.iter().map(|x| x.abs()).collect();
        let n = self.n;
        out.par_chunks_mut(comps).enumerate().for_each(|(cell, chunk)| {
            chunk.iter_mut().for_each(|x| *x = 0.0);
            for &(f, coef) in &self.cell_entries[self.cell_ptr[cell]..self.cell_ptr[cell + 1]] {
                let w = self.faces[f].weight;
                for c in 0..comps {
                    for d in 0..n {
                        chunk[c] += w * coef[d].abs() * abs[f * n * comps + d * comps + c];
                    }
                }
            }
        });
    }

    /// For each cell, the faces touching it with their coefficients.
    pub fn cell_faces(&self, cell: usize) -> &[(usize, [f64; 2])] {
        &self.cell_entries[self.cell_ptr[cell]..self.cell_ptr[cell + 1]]
    }
}
