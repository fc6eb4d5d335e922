//! Sampling checks for continued-fraction convergents, with all error
//! comparisons done in exact rational arithmetic against the exact binary
//! value of the input double.

use dionet_core::constraints::{convergents, rational_approx};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn exact(theta: f64) -> BigRational {
    BigRational::from_float(theta).unwrap()
}

fn ratio(p: i64, q: u64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn check_ladder(theta: f64, max_den: u64) {
    let ladder = convergents(theta, max_den).unwrap();
    assert!(!ladder.is_empty());
    let t = exact(theta);
    let mut prev_q = 0u64;
    let mut prev_err: Option<BigRational> = None;
    for &(p, q) in &ladder {
        assert!(q >= 1 && q <= max_den, "denominator {q} out of range");
        // Denominators are nondecreasing (the first two can both be 1).
        assert!(q >= prev_q, "denominator shrank at {p}/{q}");
        prev_q = q;
        assert_eq!(gcd(p.unsigned_abs(), q), 1, "{p}/{q} is not reduced");
        let err = (&t - ratio(p, q)).abs();
        // |θ − p/q| < 1/q² whenever the convergent is not exact.
        if !err.is_zero() {
            let qq = BigRational::new(BigInt::from(1), BigInt::from(q) * BigInt::from(q));
            assert!(err < qq, "convergent {p}/{q} of {theta} misses the 1/q² bound");
        }
        if let Some(pe) = prev_err {
            assert!(err <= pe, "error grew along the ladder at {p}/{q} of {theta}");
        }
        prev_err = Some(err);
    }
    let last = *ladder.last().unwrap();
    assert_eq!(rational_approx(theta, max_den).unwrap(), last);
}

#[test]
fn random_reals_satisfy_the_convergent_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..1000 {
        let theta = rng.gen_range(-100.0..100.0);
        let max_den = [10u64, 100, 10_000][rng.gen_range(0..3)];
        check_ladder(theta, max_den);
    }
}

#[test]
fn classical_constants_satisfy_the_convergent_contract() {
    let constants = [
        std::f64::consts::PI,
        std::f64::consts::E,
        std::f64::consts::SQRT_2,
        (1.0 + 5.0f64.sqrt()) / 2.0,
        0.577_215_664_901_532_9,
    ];
    for theta in constants {
        for max_den in [1, 10, 113, 1_000_000] {
            check_ladder(theta, max_den);
            check_ladder(-theta, max_den);
        }
    }
}

#[test]
fn tiny_and_integral_inputs_are_handled() {
    check_ladder(1e-9, 1000);
    check_ladder(42.0, 7);
    check_ladder(-3.0, 1);
    check_ladder(0.0, 5);
}
