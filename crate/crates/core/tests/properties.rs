//! Property tests over randomized inputs for the invariants that hold on
//! whole parameter regions rather than at spot values.

use num::bigint::BigInt;
use num::rational::BigRational;
use proptest::prelude::*;

use couponmax::exact::{rational_to_f64, ExactRational};
use couponmax::moments::partial_fraction_coeffs;
use couponmax::partition::{euler_function, PentagonalSeriesConfig};
use couponmax::quadrature::{integrate, normal_cdf_complement, QuadratureSpec};
use couponmax::simulator::{simulate, Model, SimConfig};
use couponmax::zeta::{hurwitz_zeta, hurwitz_zeta_neg, ZetaEvalConfig};

fn product_oracle(x: f64) -> f64 {
    let mut p = 1.0f64;
    let mut xj = 1.0f64;
    loop {
        xj *= x;
        if xj < 1e-18 {
            return p;
        }
        p *= 1.0 - xj;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn euler_series_matches_product(x in 0.0f64..0.92) {
        let cfg = PentagonalSeriesConfig::default();
        let series = euler_function(x, &cfg).unwrap();
        prop_assert!((series - product_oracle(x)).abs() <= 1e-12);
    }

    #[test]
    fn partial_fractions_reconstruct(
        k in 1u32..=6,
        a_idx in 0usize..5,
        x in 0.05f64..0.4,
    ) {
        let a = [3.0, -3.0, 1.0, -1.0, 2.0][a_idx];
        prop_assume!((1.0 + a * x).abs() > 0.05);
        let pf = partial_fraction_coeffs(k, a).unwrap();
        let direct = 1.0 / (x.powi(k as i32) * (1.0 + a * x).powi(k as i32));
        let rel = (pf.eval(x) - direct).abs() / direct.abs();
        prop_assert!(rel < 1e-10, "k={k} a={a} x={x}: rel {rel:e}");
    }

    #[test]
    fn continuation_matches_direct_series(s in 1.5f64..6.0, a in 0.1f64..2.0) {
        let cfg = ZetaEvalConfig::default();
        let v = hurwitz_zeta(s, a, &cfg).unwrap();
        let mut oracle = 0.0f64;
        for n in 0..200_000u64 {
            oracle += (n as f64 + a).powf(-s);
        }
        let big_a = a + 200_000.0;
        oracle += big_a.powf(1.0 - s) / (s - 1.0) + 0.5 * big_a.powf(-s);
        prop_assert!(((v - oracle) / oracle).abs() < 1e-8);
    }

    #[test]
    fn negative_integer_continuation_consistency(k in 0u32..=5, a in 0.1f64..2.0) {
        let cfg = ZetaEvalConfig::default();
        let via_continuation = hurwitz_zeta(-(k as f64), a, &cfg).unwrap();
        let via_closed = hurwitz_zeta_neg(k, a).unwrap();
        prop_assert!((via_continuation - via_closed).abs() < 1e-10);
    }

    #[test]
    fn quadrature_is_exact_on_cubics(c0 in -3.0f64..3.0, c1 in -3.0f64..3.0,
                                     c2 in -3.0f64..3.0, c3 in -3.0f64..3.0) {
        let spec = QuadratureSpec::default();
        let r = integrate(|x| c0 + x * (c1 + x * (c2 + x * c3)), 0.0, 2.0, &spec).unwrap();
        let exact = 2.0 * c0 + 2.0 * c1 + 8.0 / 3.0 * c2 + 4.0 * c3;
        prop_assert!((r.value - exact).abs() < 1e-11 * exact.abs().max(1.0));
    }

    #[test]
    fn normal_tail_reflection(z in -6.0f64..6.0) {
        let lhs = normal_cdf_complement(-z);
        let rhs = 1.0 - normal_cdf_complement(z);
        prop_assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn rational_conversion_matches_native(p in -1_000_000i64..1_000_000, q in 1i64..1_000_000) {
        let r: ExactRational = BigRational::new(BigInt::from(p), BigInt::from(q));
        let converted = rational_to_f64(&r);
        let native = p as f64 / q as f64;
        // Both are correctly rounded or within one ulp of each other.
        let ulp = native.abs() * f64::EPSILON;
        prop_assert!((converted - native).abs() <= ulp);
    }

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>(), n in 1u32..30, trials in 1u32..200) {
        let config = SimConfig::new(Model::Discrete, n, trials, seed);
        let a = simulate(&config).unwrap();
        let b = simulate(&config).unwrap();
        prop_assert_eq!(a, b);
    }
}
