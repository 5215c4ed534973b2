use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use rankbound::kronecker::{basis_vector, coefficient, compositions, kronecker_power, verify_decomposition, CompositionIndex};
use rankbound::numerics::{gaussian_vector, seeded_rng};
use rankbound::CVector;

const DECOMPOSITION_TOL: f64 = 1e-12;

/// Formats and degrees with `(abc)^q ≤ 10^5`.
fn small_cases() -> Vec<([usize; 3], u32)> {
    let mut out = Vec::new();
    for a in 1..=3 {
        for b in a..=4 {
            for c in b..=5 {
                let n = (a * b * c) as u64;
                for q in 1..=6u32 {
                    if n.pow(q) <= 100_000 {
                        out.push(([a, b, c], q));
                    }
                }
            }
        }
    }
    out
}

#[test]
fn decomposition_holds_for_random_tensors() {
    let cases = small_cases();
    let mut rng = seeded_rng(2024, 0);
    for k in 0..100 {
        let ([a, b, c], q) = cases[rng.random_range(0..cases.len())];
        let t = gaussian_vector(&mut rng, a * b * c);
        let res = verify_decomposition(&t, q).unwrap();
        assert!(
            res <= DECOMPOSITION_TOL * t.norm().powi(q as i32),
            "tensor {k} ({a},{b},{c}) q={q}: residual {res:e}"
        );
    }
}

#[test]
fn basis_vectors_sum_to_all_ones() {
    for (n, q) in [(4usize, 3u32), (6, 2), (2, 5)] {
        let mut total = CVector::zeros(n.pow(q));
        for g in compositions(n, q) {
            total += basis_vector(&g).unwrap().to_dense();
        }
        assert!(total.iter().all(|z| *z == Complex64::new(1.0, 0.0)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficient_is_multiplicative(seed in any::<u64>(), x in prop::collection::vec(0u32..3, 6), y in prop::collection::vec(0u32..3, 6)) {
        let t = gaussian_vector(&mut seeded_rng(seed, 0), 6);
        let sum: Vec<u32> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let lhs = coefficient(&t, &CompositionIndex::new(sum));
        let rhs = coefficient(&t, &CompositionIndex::new(x)) * coefficient(&t, &CompositionIndex::new(y));
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn power_entries_are_products(seed in any::<u64>(), idx in any::<prop::sample::Index>()) {
        let t = gaussian_vector(&mut seeded_rng(seed, 1), 5);
        let p = kronecker_power(&t, 3).unwrap();
        let i = idx.index(p.len());
        let (d0, d1, d2) = (i / 25, (i / 5) % 5, i % 5);
        prop_assert!((p[i] - t[d0] * t[d1] * t[d2]).norm() < 1e-13 * (1.0 + p[i].norm()));
    }
}
