use crate::orlicz::OrliczFunction;

use super::matrix::GradMatrix;

/// `A(P) = φ'(|P|) P / |P|`, zero at `P = 0`.
pub fn a_map(phi: &OrliczFunction, p: &GradMatrix) -> GradMatrix {
    let norm = p.norm();
    if norm == 0.0 {
        return GradMatrix::zeros(p.rows(), p.cols());
    }
    p.scale(phi.deriv(norm) / norm)
}

/// `V(P) = √(φ'(|P|)|P|) P / |P|`, zero at `P = 0`.
pub fn v_map(phi: &OrliczFunction, p: &GradMatrix) -> GradMatrix {
    let norm = p.norm();
    if norm == 0.0 {
        return GradMatrix::zeros(p.rows(), p.cols());
    }
    p.scale((phi.deriv(norm) * norm).sqrt() / norm)
}

/// Radial shrink `(|Q| - ε)₊ Q / |Q|`.
pub fn s_epsilon(q: &GradMatrix, eps: f64) -> GradMatrix {
    let norm = q.norm();
    if norm <= eps {
        return GradMatrix::zeros(q.rows(), q.cols());
    }
    q.scale((norm - eps) / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: &[f64]) -> GradMatrix {
        GradMatrix::new(1, v.len(), v.to_vec()).unwrap()
    }

    #[test]
    fn heat_maps() {
        let phi = OrliczFunction::power(2.0).unwrap();
        let p = GradMatrix::new(2, 2, vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        let a = a_map(&phi, &p);
        let v = v_map(&phi, &p);
        for i in 0..4 {
            assert!((a.entries()[i] - p.entries()[i]).abs() < 1e-15);
            assert!((v.entries()[i] - p.entries()[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn cubic_a_map_scalar() {
        let phi = OrliczFunction::power(3.0).unwrap();
        assert_eq!(a_map(&phi, &GradMatrix::scalar(2.0)).entries(), &[4.0]);
        assert_eq!(a_map(&phi, &GradMatrix::zeros(2, 1)).norm(), 0.0);
    }

    #[test]
    fn power_v_map_normalization() {
        let p_exp = 3.0;
        let phi = OrliczFunction::power(p_exp).unwrap();
        let p = m(&[3.0, 4.0]);
        let v = v_map(&phi, &p);
        // φ'(t)t = t^p for t^p/p, so V = |P|^{(p-2)/2} P
        let c = 5f64.powf((p_exp - 2.0) / 2.0);
        assert!((v.get(0, 0) - 3.0 * c).abs() < 1e-12);
        assert!((v.norm().powi(2) - phi.deriv(5.0) * 5.0).abs() < 1e-10);
    }

    #[test]
    fn shrink_examples() {
        let q = m(&[0.0, 3.0]);
        assert_eq!(s_epsilon(&q, 0.0), q);
        let s = s_epsilon(&q, 1.0);
        assert!((s.norm() - 2.0).abs() < 1e-15);
        assert_eq!(s.get(0, 0), 0.0);
        assert_eq!(s_epsilon(&q, 5.0).norm(), 0.0);
    }
}
