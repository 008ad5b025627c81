use proptest::prelude::*;
use vbal_core::linalg::sym_eigen_range;
use vbal_core::{
    estimate_subgaussian, gauge_norm, reduce_to_independent, sample_coloring, solve_komlos, walk_params, ConvexBody,
    FaceState, FractionalColoring, Mat, SubgaussConfig, Vect, VectorSystem, WalkMode,
};

fn matrix(max_m: usize, max_n: usize) -> impl Strategy<Value = Mat> {
    (1..=max_m, 1..=max_n).prop_flat_map(|(m, n)| {
        prop::collection::vec(-1.0f64..1.0, m * n).prop_map(move |data| Mat::from_vec(m, n, data))
    })
}

fn unit_columns(mut v: Mat) -> Mat {
    for mut col in v.column_iter_mut() {
        let norm = col.norm();
        if norm > 1e-6 {
            col /= norm;
        }
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn komlos_meets_its_constraints(v in matrix(8, 8).prop_map(unit_columns), seed in any::<u64>()) {
        let n = v.ncols();
        let alpha: Vec<f64> = (0..n).map(|i| ((seed >> (i % 64)) & 7) as f64 / 7.0).collect();
        let sol = solve_komlos(&v, &alpha).unwrap();
        for (i, a) in alpha.iter().enumerate() {
            prop_assert!((sol.x[(i, i)] - a).abs() <= 1e-8);
        }
        prop_assert!(sym_eigen_range(&sol.x).0 >= -1e-8);
        prop_assert!(sym_eigen_range(&(&v * &sol.x * v.transpose())).1 <= 1.0 + 1e-7);
        prop_assert!((&sol.u * sol.u.transpose() - &sol.x).abs().max() <= 1e-8);
    }

    #[test]
    fn reduction_keeps_the_shift(v in matrix(4, 8), lam in prop::collection::vec(-1.0f64..=1.0, 8)) {
        let n = v.ncols();
        let sys = VectorSystem::new(v.clone(), lam[..n].to_vec()).unwrap();
        let x = reduce_to_independent(&sys);
        prop_assert!(x.values().iter().all(|c| c.abs() <= 1.0));
        let moved = sys.combination(x.values()) - sys.shift();
        prop_assert!(moved.norm() <= 1e-9 * (1.0 + sys.shift().norm()));
        // The face at the reduced point needs independent fractional vectors.
        prop_assert!(FaceState::new(&sys, &x).is_ok());
    }

    #[test]
    fn descent_to_the_closest_facet_drops_one_dimension(
        v in matrix(5, 5),
        c in prop::collection::vec(-0.9f64..0.9, 5),
    ) {
        let n = v.ncols();
        let sys = VectorSystem::new(v.clone(), vec![0.0; n]).unwrap();
        prop_assume!(v.nrows() >= n && v.clone().svd(false, false).singular_values.min() > 1e-3);
        let face = FaceState::new(&sys, &FractionalColoring::new(c[..n].to_vec()).unwrap()).unwrap();
        let p = face.min_norm_boundary_point().unwrap();
        let exit = face.ray_exit(&(&p.point * 2.0)).unwrap();
        prop_assert!(exit.hit && (exit.lambda - 0.5).abs() <= 1e-8);
        let next = face.descend(&sys, &p.point).unwrap();
        prop_assert_eq!(next.dim(), n - 1);
        prop_assert_eq!(next.coefficients()[p.index], p.sign);
    }

    #[test]
    fn gauge_is_positively_homogeneous(
        x in prop::collection::vec(-3.0f64..3.0, 1..6),
        scale in 0.01f64..100.0,
        a in 0.1f64..4.0,
    ) {
        prop_assume!(x.iter().any(|&v| v != 0.0));
        let cube = ConvexBody::cube(x.len(), a).unwrap();
        let g = gauge_norm(&cube, &x, 1e-10).unwrap().value;
        let y: Vec<f64> = x.iter().map(|v| v * scale).collect();
        let gy = gauge_norm(&cube, &y, 1e-10).unwrap().value;
        prop_assert!((gy - scale * g).abs() <= 1e-8 * scale * g);
    }

    #[test]
    fn shifted_bodies_translate_membership(
        x in prop::collection::vec(-2.0f64..2.0, 3),
        s in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let ball = ConvexBody::ball(vec![0.2, -0.1, 0.0], 1.5).unwrap();
        let moved = ball.clone().shifted(s.clone()).unwrap();
        let back: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a + b).collect();
        prop_assert_eq!(moved.contains(&x), ball.contains(&back));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn walk_is_a_function_of_its_seed(v in matrix(6, 6).prop_map(unit_columns), seed in any::<u64>()) {
        let n = v.ncols();
        let sys = VectorSystem::new(v, vec![0.0; n]).unwrap();
        let params = walk_params(n, WalkMode::Practical).with_seed(seed);
        let a = sample_coloring(&sys, &params).unwrap();
        let b = sample_coloring(&sys, &params).unwrap();
        prop_assert_eq!(&a.chi, &b.chi);
        prop_assert!(a.chi.iter().all(|&c| c == 1.0 || c == -1.0));
        let expect: Vect = sys.residual(&a.chi);
        prop_assert_eq!(a.residual, expect);
    }

    #[test]
    fn subgaussian_estimate_scales_with_the_samples(c in 0.1f64..10.0, seed in any::<u64>()) {
        let mut r = vbal_core::rng::stream(seed, 7, 0);
        let samples: Vec<Vec<f64>> = (0..1000)
            .map(|_| {
                let mut v = vec![0.0; 2];
                vbal_core::rng::fill_gaussian(&mut r, &mut v);
                v
            })
            .collect();
        let scaled: Vec<Vec<f64>> = samples.iter().map(|s| s.iter().map(|x| x * c).collect()).collect();
        let cfg = SubgaussConfig { directions: 32, laplace: false, ..SubgaussConfig::default() }.with_seed(seed);
        let a = estimate_subgaussian(&samples, &cfg).unwrap().s_hat;
        let b = estimate_subgaussian(&scaled, &cfg).unwrap().s_hat;
        prop_assert!((b - c * a).abs() <= 1e-12 * c * a.max(1e-300));
    }
}
