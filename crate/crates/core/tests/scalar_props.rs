use freud_core::scalar::{gamma, pfq, pochhammer, BigReal};
use proptest::prelude::*;

const BITS: u32 = 192;

fn close(a: &BigReal, b: &BigReal, rel: f64) -> bool {
    ((a - b) / b).abs().to_f64() < rel
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_recurrence(x in 0.05f64..30.0) {
        let x = BigReal::from_f64(x, BITS);
        let lhs = gamma(&(&x + 1i64)).unwrap();
        let rhs = &x * gamma(&x).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-50));
    }

    #[test]
    fn gamma_reflection_sign(x in -5.9f64..-0.1) {
        prop_assume!((x - x.round()).abs() > 1e-3);
        let g = gamma(&BigReal::from_f64(x, BITS)).unwrap();
        // Γ alternates sign between consecutive negative integers.
        let expected_negative = (x.floor() as i64).rem_euclid(2) == 1;
        prop_assert_eq!(g.is_negative(), expected_negative);
    }

    #[test]
    fn pochhammer_is_gamma_ratio(a in 0.1f64..12.0, k in 0usize..25) {
        let a = BigReal::from_f64(a, BITS);
        let direct = pochhammer(&a, k);
        let ratio = gamma(&(&a + k as i64)).unwrap() / gamma(&a).unwrap();
        prop_assert!(close(&direct, &ratio, 1e-50));
    }

    #[test]
    fn terminating_series_is_a_polynomial(z in -0.9f64..0.9) {
        // ₂F₁(−2, b; c; z) = 1 − 2bz/c + b(b+1)z²/(c(c+1)).
        let z = BigReal::from_f64(z, BITS);
        let (b, c) = (BigReal::ratio(3, 2, BITS), BigReal::ratio(5, 4, BITS));
        let tol = BigReal::pow2(-(BITS as i32), BITS);
        let got = pfq(&[BigReal::from_i64(-2, BITS), b.clone()], &[c.clone()], &z, &tol).unwrap();
        let one = BigReal::one(BITS);
        let expected = &one - &b * &z * 2i64 / &c + &b * (&b + 1i64) * z.square() / (&c * (&c + 1i64));
        prop_assert!((got - expected).abs().to_f64() < 1e-50);
    }
}

#[test]
fn half_integer_gamma() {
    let g = gamma(&BigReal::ratio(1, 2, BITS)).unwrap();
    assert!(close(&g, &BigReal::pi(BITS).sqrt(), 1e-55));
}
