use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::log_grid;
use crate::orlicz::{conjugate, Kind, OrliczFunction};
use crate::sampling;

use super::maps::{a_map, v_map};
use super::matrix::GradMatrix;

/// Index pairs of the equivalent quantities compared in an envelope:
/// the six pairs among `q1..q4`, then `q5/q6`.
pub const RATIO_PAIRS: [(usize, usize); 7] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (4, 5)];

/// The quantities
/// `q1 = (A(P)-A(Q))·(P-Q)`, `q2 = φ_{|P|}(|P-Q|)`, `q3 = |V(P)-V(Q)|²`,
/// `q4 = (φ_{|P|})*(|A(P)-A(Q)|)`, `q5 = |A(P)-A(Q)|`, `q6 = φ'_{|P|}(|P-Q|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HammerReport {
    pub q: [f64; 6],
}

impl HammerReport {
    /// `q_i / q_j` (0-based).
    pub fn ratio(&self, i: usize, j: usize) -> f64 {
        self.q[i] / self.q[j]
    }

    pub fn ratios(&self) -> Vec<f64> {
        RATIO_PAIRS.iter().map(|&(i, j)| self.ratio(i, j)).collect()
    }
}

pub fn pair_name(i: usize, j: usize) -> String {
    format!("q{}/q{}", i + 1, j + 1)
}

pub fn hammer_check(phi: &OrliczFunction, p: &GradMatrix, q: &GradMatrix) -> Result<HammerReport> {
    let diff = p.sub(q);
    let da = a_map(phi, p).sub(&a_map(phi, q));
    let dv = v_map(phi, p).sub(&v_map(phi, q));
    let shifted = phi.shift(p.norm())?;
    let dist = diff.norm();
    let q5 = da.norm();
    let report = HammerReport {
        q: [
            da.dot(&diff),
            shifted.eval(dist),
            dv.dot(&dv),
            conjugate(&shifted, q5)?,
            q5,
            shifted.deriv(dist),
        ],
    };
    if report.q.iter().any(|x| !x.is_finite()) {
        return Err(Error::Range(format!("non-finite hammer quantity at |P|={:e}, |Q|={:e}", p.norm(), q.norm())));
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEnvelope {
    pub pair: String,
    pub min: f64,
    pub max: f64,
}

/// Ratio envelopes over a sample cloud, in the regression-tracking layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HammerEnvelope {
    pub phi: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub seed: u64,
    pub samples: usize,
    pub rejected: usize,
    pub envelope: Vec<PairEnvelope>,
}

impl HammerEnvelope {
    pub fn get(&self, pair: &str) -> Option<&PairEnvelope> {
        self.envelope.iter().find(|e| e.pair == pair)
    }
}

/// Unit matrices spanning the plane used by the structured sweep.
pub(crate) fn plane_basis(rows: usize, cols: usize) -> (GradMatrix, Option<GradMatrix>) {
    let mut e1 = GradMatrix::zeros(rows, cols).entries().to_vec();
    e1[0] = 1.0;
    let e1 = GradMatrix::new(rows, cols, e1).unwrap();
    if rows * cols < 2 {
        return (e1, None);
    }
    let mut e2 = vec![0.0; rows * cols];
    e2[rows * cols - 1] = 1.0;
    (e1, Some(GradMatrix::new(rows, cols, e2).unwrap()))
}

/// Pairs `(P, Q)` with `|P|` on a scale grid and `Q` swept over norm ratio
/// and angle, including near-degenerate pairs with `|P-Q| ≈ 1e-8 |P|`.
pub(crate) fn structured_pairs(phi: &OrliczFunction, rows: usize, cols: usize) -> Vec<(GradMatrix, GradMatrix)> {
    let scales = match phi.kind() {
        // ratios of homogeneous functions only see |Q|/|P| and the angle
        Kind::Power { .. } => vec![1.0],
        _ => log_grid(1e-3, 1e3, 7),
    };
    let mut ratios = log_grid(1e-4, 1e4, 41);
    ratios.extend([1.0 - 1e-8, 1.0 + 1e-8, 1.0]);
    let (e1, e2) = plane_basis(rows, cols);
    let angles: Vec<f64> = match e2 {
        Some(_) => {
            let mut a: Vec<f64> = (0..=24).map(|i| std::f64::consts::PI * i as f64 / 24.0).collect();
            a.push(1e-8);
            a
        }
        None => vec![0.0, std::f64::consts::PI],
    };
    let mut out = Vec::new();
    for &s in &scales {
        let p = e1.scale(s);
        for &r in &ratios {
            for &th in &angles {
                let mut q = e1.scale(s * r * th.cos());
                if let Some(e2) = &e2 {
                    q = q.add(&e2.scale(s * r * th.sin()));
                }
                if p.sub(&q).norm() > 0.0 {
                    out.push((p.clone(), q));
                }
            }
        }
    }
    out
}

/// Random pairs with log-uniform norms in `[1e-3, 1e3]` and uniform directions.
pub(crate) fn random_pairs(rows: usize, cols: usize, count: usize, seed: u64) -> Vec<(GradMatrix, GradMatrix)> {
    let mut rng = sampling::rng(seed);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let r = sampling::log_uniform(rng, 1e-3, 1e3);
        let dir = sampling::unit_vector(rng, rows * cols);
        GradMatrix::new(rows, cols, dir.into_iter().map(|x| r * x).collect()).unwrap()
    };
    (0..count).map(|_| (draw(&mut rng), draw(&mut rng))).collect()
}

/// Min/max of every ratio in [`RATIO_PAIRS`] over `samples` random pairs
/// together with the structured sweep.
pub fn hammer_envelope(phi: &OrliczFunction, rows: usize, cols: usize, samples: usize, seed: u64) -> HammerEnvelope {
    let mut pairs = random_pairs(rows, cols, samples, seed);
    pairs.extend(structured_pairs(phi, rows, cols));
    let results: Vec<Option<Vec<f64>>> = pairs
        .par_iter()
        .map(|(p, q)| hammer_check(phi, p, q).ok().map(|r| r.ratios()))
        .collect();
    let k = RATIO_PAIRS.len();
    let mut lo = vec![f64::INFINITY; k];
    let mut hi = vec![0.0f64; k];
    let mut rejected = 0;
    for r in &results {
        match r {
            Some(ratios) if ratios.iter().all(|x| x.is_finite() && *x > 0.0) => {
                for (i, x) in ratios.iter().enumerate() {
                    lo[i] = lo[i].min(*x);
                    hi[i] = hi[i].max(*x);
                }
            }
            _ => rejected += 1,
        }
    }
    HammerEnvelope {
        phi: phi.label(),
        n: rows,
        big_n: cols,
        seed,
        samples: pairs.len(),
        rejected,
        envelope: RATIO_PAIRS
            .iter()
            .enumerate()
            .map(|(idx, &(i, j))| PairEnvelope {
                pair: pair_name(i, j),
                min: lo[idx],
                max: hi[idx],
            })
            .collect(),
    }
}
