//! Structural properties of the dense kernels on random inputs.

use dionet_core::linalg::{axpy, frobenius_sq, matmul, Matrix};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-100.0f64..100.0, rows * cols)
        .prop_map(move |data| Matrix::new(rows, cols, data).unwrap())
}

fn chain() -> impl Strategy<Value = (Matrix, Matrix, Matrix)> {
    (1usize..5, 1usize..5, 1usize..5, 1usize..5).prop_flat_map(|(m, n, p, q)| {
        (matrix(m, n), matrix(n, p), matrix(p, q))
    })
}

proptest! {
    #[test]
    fn matmul_is_associative((a, b, c) in chain()) {
        let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
        let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
        for (l, r) in left.data().iter().zip(right.data()) {
            let scale = l.abs().max(r.abs()).max(1.0);
            prop_assert!((l - r).abs() <= 1e-9 * scale, "{l} vs {r}");
        }
    }

    #[test]
    fn frobenius_vanishes_only_on_the_zero_matrix(
        (rows, cols) in (1usize..6, 1usize..6),
        flip in prop::collection::vec(any::<bool>(), 36),
    ) {
        let data: Vec<f64> = (0..rows * cols)
            .map(|i| if flip[i] { 1.5 } else { 0.0 })
            .collect();
        let any_nonzero = data.iter().any(|&v| v != 0.0);
        let m = Matrix::new(rows, cols, data).unwrap();
        prop_assert_eq!(frobenius_sq(&m) != 0.0, any_nonzero);
        prop_assert_eq!(m.is_zero(), !any_nonzero);
    }

    #[test]
    fn axpy_with_minus_one_cancels_exactly(
        (rows, cols) in (1usize..6, 1usize..6),
        seed in any::<u64>(),
    ) {
        let data: Vec<f64> = (0..rows * cols)
            .map(|i| ((seed.wrapping_add(i as u64) % 2001) as f64 - 1000.0) / 7.0)
            .collect();
        let x = Matrix::new(rows, cols, data).unwrap();
        let cancelled = axpy(-1.0, &x, &x).unwrap();
        prop_assert!(cancelled.is_zero());
    }
}
