use super::samples::Samples;

/// Inner exponent standing in for `n/(n-2)` when `n <= 2`.
pub const R_HAT: f64 = 10.0;

/// Sobolev exponent `n/(n-2)`, or [`R_HAT`] in one and two dimensions.
pub fn sobolev_exponent(n: usize) -> f64 {
    if n > 2 {
        n as f64 / (n as f64 - 2.0)
    } else {
        R_HAT
    }
}

/// `(⨏_I (⨏_B |f|^r w dx)^{s/r} dt)^{1/s}` over an `nt × nc` sample block
/// with weights `w`; `f64::INFINITY` for `s` or `r` takes discrete maxima
/// (over points with `w > 0` in the spatial case).
pub fn weighted_bochner(f: &[f64], w: &[f64], nt: usize, nc: usize, s: f64, r: f64) -> f64 {
    assert_eq!(f.len(), nt * nc);
    assert_eq!(w.len(), nt * nc);
    if nt == 0 || nc == 0 {
        return 0.0;
    }
    let inner = |j: usize| -> f64 {
        let row = j * nc..(j + 1) * nc;
        if r.is_infinite() {
            f[row.clone()]
                .iter()
                .zip(&w[row])
                .filter(|(_, w)| **w > 0.0)
                .fold(0.0f64, |m, (x, _)| m.max(x.abs()))
        } else {
            let sum: f64 = f[row.clone()].iter().zip(&w[row]).map(|(x, w)| x.abs().powf(r) * w).sum();
            (sum / nc as f64).powf(1.0 / r)
        }
    };
    if s.is_infinite() {
        (0..nt).map(inner).fold(0.0, f64::max)
    } else {
        let sum: f64 = (0..nt).map(|j| inner(j).powf(s)).sum();
        (sum / nt as f64).powf(1.0 / s)
    }
}

/// `‖f‖_{L^s(L^r)(k)}` on the sample block with the cutoff `ζ_k^q`.
pub fn bochner_norm(samples: &Samples, f: &[f64], s: f64, r: f64, k: usize) -> f64 {
    weighted_bochner(f, &samples.weights(k), samples.nt(), samples.nc(), s, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_have_their_own_norm() {
        let f = vec![2.5; 12];
        let w = vec![1.0; 12];
        for (s, r) in [(1.0, 1.0), (f64::INFINITY, 1.0), (1.0, 10.0), (2.0, f64::INFINITY)] {
            assert!((weighted_bochner(&f, &w, 3, 4, s, r) - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn sup_ignores_points_outside_the_support() {
        let f = [1.0, 9.0, 2.0, 3.0];
        let w = [1.0, 0.0, 0.5, 1.0];
        assert_eq!(weighted_bochner(&f, &w, 2, 2, f64::INFINITY, f64::INFINITY), 3.0);
    }
}
