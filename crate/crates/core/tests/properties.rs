use nalgebra::DMatrix;
use npo_spectra::cli::format_truncated;
use npo_spectra::eigensolver::{bisection_eigenvalues, count_below, eigh_symmetric};
use npo_spectra::lgl_grid::{legendre_eval, lgl_nodes};
use npo_spectra::mapping::MappingSpec;
use proptest::prelude::*;

fn symmetric(n: usize, entries: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut it = entries.iter();
    for i in 0..n {
        for j in 0..=i {
            let v = *it.next().unwrap();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadrature_exact_to_degree_2n_minus_1(n in 2usize..=256, frac in 0.0f64..1.0) {
        let grid = lgl_nodes(n).unwrap();
        let k = ((2 * n - 1) as f64 * frac) as i32;
        let got: f64 = grid.nodes().iter().zip(grid.weights()).map(|(x, w)| w * x.powi(k)).sum();
        let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
        prop_assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0), "n={n} k={k} got={got}");
    }

    #[test]
    fn nodes_symmetric_sorted_with_exact_ends(n in 2usize..=256) {
        let grid = lgl_nodes(n).unwrap();
        let x = grid.nodes();
        prop_assert_eq!(x.len(), n + 1);
        prop_assert_eq!(x[0], -1.0);
        prop_assert_eq!(x[n], 1.0);
        for j in 0..=n {
            prop_assert_eq!(x[j], -x[n - j]);
            prop_assert_eq!(grid.weights()[j], grid.weights()[n - j]);
        }
        prop_assert!(x.windows(2).all(|w| w[0] < w[1]));
        let total: f64 = grid.weights().iter().sum();
        prop_assert!((total - 2.0).abs() < 1e-13);
        // Interior nodes are roots of P'_N; measure by Newton displacement.
        for &xi in grid.interior_nodes() {
            let (p, dp) = legendre_eval(n, xi);
            let ddp = (2.0 * xi * dp - (n * (n + 1)) as f64 * p) / (1.0 - xi * xi);
            prop_assert!((dp / ddp).abs() < 1e-14, "n={n} x={xi}");
        }
    }

    #[test]
    fn mapping_monotone_with_consistent_jacobian(
        scale in 1.0f64..100.0,
        r_max in 20.0f64..400.0,
        x in -0.99f64..0.99,
    ) {
        let m = MappingSpec::with_scale(scale, r_max).unwrap();
        let h = 1e-6;
        let fd = (m.r(x + h) - m.r(x - h)) / (2.0 * h);
        prop_assert!((m.jacobian(x) - fd).abs() / m.jacobian(x) < 1e-8);
        prop_assert!(m.r(x - 1e-3) < m.r(x) && m.r(x) < m.r(x + 1e-3));
        prop_assert!((m.x_of_r(m.r(x)) - x).abs() < 1e-12);
        prop_assert_eq!(m.r(-1.0), 0.0);
        prop_assert!((m.r(1.0) - r_max).abs() <= 1e-12 * r_max);
    }

    #[test]
    fn mapped_grid_radii_ascend(n in 2usize..=256, alpha in 0.1f64..30.0) {
        let grid = lgl_nodes(n).unwrap();
        let m = MappingSpec::new(alpha, 150.0).unwrap();
        let r: Vec<f64> = grid.nodes().iter().map(|&x| m.r(x)).collect();
        prop_assert!(r.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn truncated_strings_round_trip(v in -1.0e4f64..1.0e4, digits in 1usize..=11) {
        let s = format_truncated(v, digits);
        let back: f64 = s.parse().unwrap();
        prop_assert_eq!(format_truncated(back, digits), s.clone());
        prop_assert!(back.abs() <= v.abs() + 1e-9);
        prop_assert_eq!(s.split_once('.').unwrap().1.len(), digits);
    }

    #[test]
    fn eigensolver_agrees_with_bisection(
        n in 1usize..=8,
        entries in prop::collection::vec(-10.0f64..10.0, 36),
    ) {
        let m = symmetric(n, &entries);
        let sol = eigh_symmetric(&m).unwrap();
        let oracle = bisection_eigenvalues(&m);
        let scale = m.amax().max(1.0);
        for (a, b) in sol.values().iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-12 * scale, "{a} vs {b}");
        }
        prop_assert!(sol.values().windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = (0..n).map(|i| m[(i, i)]).sum();
        let sum: f64 = sol.values().iter().sum();
        prop_assert!((sum - trace).abs() < 1e-12 * scale * n as f64);
        let v = sol.vectors();
        prop_assert!((v.transpose() * v - DMatrix::identity(n, n)).amax() < 1e-12);
        let residual = (&m * v - v * DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(sol.values()))).amax();
        prop_assert!(residual < 1e-12 * scale);
    }

    #[test]
    fn inertia_count_is_monotone(entries in prop::collection::vec(-1.0f64..1.0, 21), x in -3.0f64..3.0) {
        let m = symmetric(6, &entries);
        prop_assert!(count_below(&m, x) <= count_below(&m, x + 0.1));
        prop_assert_eq!(count_below(&m, -10.0), 0);
        prop_assert_eq!(count_below(&m, 10.0), 6);
    }
}
