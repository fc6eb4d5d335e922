//! Sampling checks for the activation contracts: the Lipschitz constant and
//! the output bound must dominate every observed pair/value on the valid
//! domain, and evaluation must be single-valued.

use dionet_core::linalg::{Matrix, Vector};
use dionet_core::network::{Activation, Layer, Network};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const M: f64 = 3.0;
const PAIRS: usize = 10_000;
const SLACK: f64 = 1e-9;

fn specs() -> Vec<Activation> {
    vec![
        Activation::Identity,
        Activation::Relu,
        Activation::Sigmoid,
        Activation::DioLinear { a: 2.0, b: 1.0, c: 0.0 },
        Activation::DioLinear { a: 1.0, b: 2.0, c: 3.0 },
        Activation::DioLinear { a: -3.0, b: 0.5, c: -1.0 },
        Activation::DioQuadratic { a: 1.0, b: 1.0, c: 2.0, z: 0.0, d: 1.0 },
        Activation::DioQuadratic { a: -0.5, b: 2.0, c: 0.0, z: 1.0, d: 4.0 },
        Activation::DioQuadratic { a: 0.0, b: 3.0, c: 1.0, z: 0.0, d: 2.0 },
        Activation::DioExponential { a: 2, b: 2, k: 0.0 },
        Activation::DioExponential { a: 2, b: 3, k: -2.0 },
        Activation::DioExponential { a: 3, b: 1, k: -1.0 },
        Activation::DioExponential { a: 2, b: 1, k: 5.0 },
        Activation::DioExponential { a: 1, b: 1, k: 0.5 },
        // Unbounded slope at the domain edge: the constant is infinite and
        // the inequality is vacuous, but evaluation must still work.
        Activation::DioExponential { a: 1, b: 2, k: 0.0 },
    ]
}

/// Rejection-sample a point of the valid domain inside [−M, M].
fn sample_domain(act: &Activation, rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let x = rng.gen_range(-M..M);
        if act.eval(x).is_ok() {
            return x;
        }
    }
}

#[test]
fn sampled_pairs_respect_the_lipschitz_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for act in specs() {
        let lip = act.lipschitz_constant(M).unwrap();
        if !lip.is_finite() {
            continue;
        }
        for _ in 0..PAIRS {
            let x1 = sample_domain(&act, &mut rng);
            let x2 = sample_domain(&act, &mut rng);
            let y1 = act.eval(x1).unwrap();
            let y2 = act.eval(x2).unwrap();
            assert!(
                (y1 - y2).abs() <= lip * (x1 - x2).abs() + SLACK,
                "{act:?}: |φ({x1}) − φ({x2})| = {} > {lip}·{}",
                (y1 - y2).abs(),
                (x1 - x2).abs()
            );
        }
    }
}

#[test]
fn sampled_values_respect_the_output_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for act in specs() {
        if !act.is_diophantine() {
            continue;
        }
        let bound = act.bound(M).unwrap();
        for _ in 0..PAIRS {
            let x = sample_domain(&act, &mut rng);
            let y = act.eval(x).unwrap();
            assert!(
                y.abs() <= bound + SLACK,
                "{act:?}: |φ({x})| = {} exceeds bound {bound}",
                y.abs()
            );
        }
    }
}

#[test]
fn evaluation_is_single_valued() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for act in specs() {
        for _ in 0..100 {
            let x = sample_domain(&act, &mut rng);
            let first = act.eval(x).unwrap();
            let second = act.eval(x).unwrap();
            assert_eq!(first.to_bits(), second.to_bits());
        }
    }
}

#[test]
fn identity_network_is_the_identity_map() {
    let dim = 4;
    let layers = (0..3)
        .map(|_| {
            Layer::new(
                Matrix::identity(dim),
                Vector::zeros(dim),
                Activation::Identity,
            )
            .unwrap()
        })
        .collect();
    let net = Network::new(layers).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..200 {
        let x = Vector::new((0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect()).unwrap();
        assert_eq!(net.forward(&x).unwrap(), x);
    }
}
