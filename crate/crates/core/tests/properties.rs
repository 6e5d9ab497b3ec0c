use bca_core::analysis::{histogram_entropy, log_norm_sum, norm_product, verify_theorem1};
use bca_core::linalg::{givens_matrix, jacobi_eigen, random_orthogonal, DenseMatrix};
use bca_core::metrics::{isi, psnr};
use bca_core::separation::{j_inf, j_vm};
use bca_core::signal::{gen_uniform, inject_extremes, mix};
use bca_core::{Matrix, Rng, SourceEnsemble};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-10.0f64..10.0, rows * cols)
        .prop_map(move |v| DenseMatrix::from_vec(rows, cols, v).unwrap())
}

fn square(max_n: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_n).prop_flat_map(|n| matrix(n, n))
}

fn symmetric(max_n: usize) -> impl Strategy<Value = Matrix> {
    square(max_n).prop_map(|a| a.add(&a.transpose()).unwrap().scale(0.5).unwrap())
}

fn plane(max_n: usize) -> impl Strategy<Value = (usize, usize, usize, f64)> {
    (2..=max_n).prop_flat_map(|n| {
        (0..n - 1).prop_flat_map(move |m| (Just(n), Just(m), m + 1..n, -10.0f64..10.0))
    })
}

fn scale_of(a: &Matrix) -> f64 {
    a.max_abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matmul_is_associative(
        (a, b, c) in (1usize..5, 1usize..5, 1usize..5, 1usize..5)
            .prop_flat_map(|(m, k, l, n)| (matrix(m, k), matrix(k, l), matrix(l, n)))
    ) {
        let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
        let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) <= 1e-12 * scale_of(&left) * 100.0);
    }

    #[test]
    fn jacobi_reconstructs_symmetric(c in symmetric(8)) {
        let e = jacobi_eigen(&c).unwrap();
        let n = c.rows();
        prop_assert!(e.reconstruct().max_abs_diff(&c) <= 1e-12 * scale_of(&c) * n as f64 * 10.0);
        prop_assert!(e.eigenvectors.orthogonality_defect() <= 1e-12 * n as f64 * 10.0);
        for w in e.eigenvalues.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn givens_is_orthogonal((n, m, k, theta) in plane(8)) {
        let g = givens_matrix(n, m, k, theta).unwrap();
        prop_assert!(g.orthogonality_defect() <= 1e-15 * 8.0);
        prop_assert!((g.determinant().unwrap() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn mixing_is_linear(
        (h, s1, s2, a, b) in (1usize..5, 2usize..20).prop_flat_map(|(n, t)| {
            (matrix(n, n), matrix(n, t), matrix(n, t), -5.0f64..5.0, -5.0f64..5.0)
        })
    ) {
        prop_assume!(h.determinant().unwrap().abs() > 1e-3);
        let e = |m: &Matrix| SourceEnsemble::external_tight(m.clone()).unwrap();
        let combo = s1.scale(a).unwrap().add(&s2.scale(b).unwrap()).unwrap();
        prop_assume!(combo.max_abs() > 0.0);
        let left = mix(&h, &e(&combo)).unwrap();
        let right = mix(&h, &e(&s1)).unwrap().scale(a).unwrap()
            .add(&mix(&h, &e(&s2)).unwrap().scale(b).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) <= 1e-9 * scale_of(&left));
    }

    #[test]
    fn isi_ignores_row_permutation_and_scaling(
        (g, perm, scales) in (2usize..6).prop_flat_map(|n| (
            matrix(n, n),
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            prop::collection::vec(prop_oneof![0.01f64..100.0, -100.0f64..-0.01], n),
        ))
    ) {
        prop_assume!(g.rows_iter().all(|r| r.iter().any(|v| *v != 0.0)));
        let n = g.rows();
        let p = DenseMatrix::from_fn(n, n, |i, j| if perm[i] == j { scales[i] } else { 0.0 });
        let pg = p.matmul(&g).unwrap();
        prop_assert!((isi(&pg).unwrap() - isi(&g).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn psnr_is_affine_invariant(
        (s, noise, a, c) in (8usize..64).prop_flat_map(|t| (
            prop::collection::vec(-1.0f64..1.0, t),
            prop::collection::vec(-0.1f64..0.1, t),
            prop_oneof![0.1f64..10.0, -10.0f64..-0.1],
            -5.0f64..5.0,
        ))
    ) {
        let t = s.len();
        let base: Vec<f64> = s.iter().zip(&noise).map(|(x, e)| x + e).collect();
        let moved: Vec<f64> = base.iter().map(|y| a * y + c).collect();
        let y1 = DenseMatrix::from_vec(1, t, base).unwrap();
        let y2 = DenseMatrix::from_vec(1, t, moved).unwrap();
        prop_assume!(s.iter().any(|v| *v != s[0]));
        prop_assert!((psnr(&s, &y1).unwrap() - psnr(&s, &y2).unwrap()).abs() <= 1e-6);
    }

    #[test]
    fn j_inf_is_positively_homogeneous(y in (1usize..5, 1usize..30).prop_flat_map(|(n, t)| matrix(n, t)), alpha in 0.0f64..100.0) {
        let scaled = y.scale(alpha).unwrap();
        prop_assert!((j_inf(&scaled) - alpha * j_inf(&y)).abs() <= 1e-12 * alpha.max(1.0) * j_inf(&y).max(1.0));
    }

    #[test]
    fn rotations_never_beat_the_vertex_bound(n in 2usize..6, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let e = inject_extremes(&gen_uniform::<f64>(n, 50, 1.0, &mut rng).unwrap()).unwrap();
        let w = random_orthogonal::<f64>(n, &mut rng).unwrap();
        prop_assert!(j_inf(&w.matmul(e.sources()).unwrap()) >= n as f64 - 1e-9);
    }

    #[test]
    fn vm_is_rotation_invariant_in_determinant(n in 2usize..5, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let e = gen_uniform::<f64>(n, 200, 1.0, &mut rng).unwrap();
        let w = random_orthogonal::<f64>(n, &mut rng).unwrap();
        let c0 = bca_core::linalg::covariance(e.sources()).unwrap().determinant().unwrap();
        let c1 = bca_core::linalg::covariance(&w.matmul(e.sources()).unwrap()).unwrap().determinant().unwrap();
        prop_assert!((c0 - c1).abs() <= 1e-9 * c0.abs());
        prop_assert!(j_vm(&w.matmul(e.sources()).unwrap()).unwrap() > 0.0);
    }

    #[test]
    fn entropy_bounded_by_support(t in 10usize..500, seed in any::<u64>(), amp in 0.1f64..10.0) {
        let e = gen_uniform::<f64>(1, t, amp, &mut Rng::new(seed)).unwrap();
        let row = e.sources().row(0);
        let norm = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let h = histogram_entropy(row, 64).unwrap();
        prop_assert!(h <= (2.0 * norm).ln() + 1e-12);
    }

    #[test]
    fn log_sum_and_product_share_argmin(n in 2usize..5, seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let e = gen_uniform::<f64>(n, 100, 1.0, &mut rng).unwrap();
        let candidates: Vec<Matrix> = (0..8)
            .map(|_| random_orthogonal::<f64>(n, &mut rng).unwrap().matmul(e.sources()).unwrap())
            .collect();
        let by = |f: fn(&Matrix) -> f64| {
            (0..candidates.len())
                .min_by(|&a, &b| f(&candidates[a]).partial_cmp(&f(&candidates[b])).unwrap())
                .unwrap()
        };
        prop_assert_eq!(by(norm_product), by(log_norm_sum));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn theorem_holds_for_random_bounded_sources(n in 2usize..4, t in 10usize..100, amp in 0.5f64..4.0, seed in any::<u64>()) {
        let e = inject_extremes(&gen_uniform::<f64>(n, t, amp, &mut Rng::new(seed)).unwrap()).unwrap();
        let report = verify_theorem1(&e, if n == 2 { 2000 } else { 1500 }).unwrap();
        prop_assert!(report.passed);
        prop_assert!((report.min_value - amp).abs() <= 1e-9);
    }

    #[test]
    fn l1_dominates_l2(g in prop::collection::vec(-1.0f64..1.0, 1..10)) {
        let l1: f64 = g.iter().map(|v| v.abs()).sum();
        let l2 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(l1 >= l2 * (1.0 - 1e-15));
    }
}

#[test]
fn composed_rotations_stay_orthogonal() {
    let mut rng = Rng::new(0x5eed);
    let n = 6;
    let mut w = Matrix::identity(n);
    for _ in 0..1000 {
        let m = (rng.next_u64() % (n as u64 - 1)) as usize;
        let k = m + 1 + (rng.next_u64() % (n - m - 1) as u64) as usize;
        let g = givens_matrix(n, m, k, rng.uniform_in(-3.2, 3.2)).unwrap();
        w = g.matmul(&w).unwrap();
    }
    assert!(
        w.orthogonality_defect() <= 1e-12,
        "{}",
        w.orthogonality_defect()
    );
}
