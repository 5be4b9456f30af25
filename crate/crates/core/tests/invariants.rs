use phicaloric::iteration::{gamma_threshold, iterate_bound, RecursionParams};
use phicaloric::orlicz::{conjugate, OrliczFunction};
use phicaloric::tensor::{a_map, s_epsilon, v_map, GradMatrix};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = OrliczFunction> {
    prop_oneof![
        (1.2f64..5.0).prop_map(|p| OrliczFunction::power(p).unwrap()),
        (1.3f64..2.5, 2.6f64..4.5).prop_map(|(p, q)| OrliczFunction::max_power(p, q).unwrap()),
        (1.3f64..2.5, 2.6f64..4.5).prop_map(|(p, q)| OrliczFunction::min_power(p, q).unwrap()),
    ]
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = GradMatrix> {
    prop::collection::vec(-5.0f64..5.0, rows * cols).prop_map(move |d| GradMatrix::new(rows, cols, d).unwrap())
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn growth_ratio_stays_inside_declared_characteristics(phi in family(), t in log_uniform(1e-3, 1e3)) {
        prop_assume!(!phi.in_kink_window(t));
        let r = phi.deriv2(t) * t / phi.deriv(t);
        prop_assert!(r >= phi.char_lo() * (1.0 - 1e-9) && r <= phi.char_hi() * (1.0 + 1e-9),
            "ratio {r} outside [{}, {}]", phi.char_lo(), phi.char_hi());
    }

    #[test]
    fn doubling_is_bounded_by_declared_constant(phi in family(), t in log_uniform(1e-4, 1e4)) {
        prop_assert!(phi.eval(2.0 * t) <= phi.delta2() * phi.eval(t) * (1.0 + 1e-9));
    }

    #[test]
    fn young_inequality_with_equality_on_the_derivative(phi in family(), t in log_uniform(1e-2, 1e2), s in log_uniform(1e-2, 1e2)) {
        let star = conjugate(&phi, s).unwrap();
        prop_assert!(s * t <= (phi.eval(t) + star) * (1.0 + 1e-9));
        let ds = phi.deriv(t);
        let tight = phi.eval(t) + conjugate(&phi, ds).unwrap();
        prop_assert!((ds * t - tight).abs() <= 1e-8 * tight);
    }

    #[test]
    fn shifted_ratio_stays_between_base_window_and_one(p in 1.3f64..4.5, a in log_uniform(1e-2, 1e2), t in log_uniform(1e-3, 1e3)) {
        let base = OrliczFunction::power(p).unwrap();
        let shifted = base.shift(a).unwrap();
        let r = shifted.deriv2(t) * t / shifted.deriv(t);
        let (lo, hi) = ((p - 1.0).min(1.0), (p - 1.0).max(1.0));
        prop_assert!(r >= lo * (1.0 - 1e-6) && r <= hi * (1.0 + 1e-6), "ratio {r} outside [{lo}, {hi}]");
    }

    #[test]
    fn flux_map_is_monotone(phi in family(), p in matrix(2, 2), q in matrix(2, 2)) {
        let lhs = a_map(&phi, &p).sub(&a_map(&phi, &q)).dot(&p.sub(&q));
        prop_assert!(lhs >= -1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn v_map_squared_norm_is_derivative_times_norm(phi in family(), p in matrix(2, 3)) {
        let n = p.norm();
        prop_assume!(n > 1e-6);
        let v = v_map(&phi, &p).norm();
        prop_assert!((v * v - phi.deriv(n) * n).abs() <= 1e-10 * (v * v).max(1e-300));
    }

    #[test]
    fn radial_shrink_is_nonexpansive(p in matrix(3, 3), q in matrix(3, 3), eps in 0.0f64..3.0) {
        let moved = s_epsilon(&p, eps).sub(&s_epsilon(&q, eps)).norm();
        prop_assert!(moved <= p.sub(&q).norm() * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn recursion_above_threshold_obeys_geometric_certificate(
        a0 in log_uniform(1e-3, 1e3),
        c in log_uniform(0.1, 10.0),
        b in 1.5f64..64.0,
        alpha in 0.25f64..2.0,
        margin in 1.01f64..4.0,
    ) {
        let gamma = gamma_threshold(a0, c, b, alpha).unwrap() * margin;
        let seq = iterate_bound(&RecursionParams::new(a0, c, b, alpha, gamma).unwrap(), 40).unwrap();
        for (k, &a) in seq.values.iter().enumerate() {
            let cert = a0 * b.powf(-(k as f64) / alpha);
            prop_assert!(a <= cert * (1.0 + 1e-12), "k={k}: {a} > {cert}");
        }
    }
}
