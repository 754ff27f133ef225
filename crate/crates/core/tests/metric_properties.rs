//! Metric axioms and the ordering `d_M1 <= d_J1 <= d_U` on random step paths.

mod common;

use proptest::prelude::*;
use skolab::metrics::{halfline_distance, j1_distance, m1_distance, uniform_distance, BaseMetric, MetricOptions};

fn opts() -> MetricOptions {
    MetricOptions::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn ordering((x, y) in common::path_pair(20)) {
        let u = uniform_distance(&x, &y, 1.0).unwrap();
        let j = j1_distance(&x, &y, 1.0, &opts()).unwrap();
        let m = m1_distance(&x, &y, 1.0, &opts()).unwrap();
        prop_assert!(j <= u + 1e-12, "j1 {} > uniform {}", j, u);
        prop_assert!(m <= j + 1e-6, "m1 {} > j1 {}", m, j);
    }

    #[test]
    fn symmetry((x, y) in common::path_pair(20)) {
        prop_assert_eq!(uniform_distance(&x, &y, 1.0).unwrap(), uniform_distance(&y, &x, 1.0).unwrap());
        prop_assert_eq!(j1_distance(&x, &y, 1.0, &opts()).unwrap(), j1_distance(&y, &x, 1.0, &opts()).unwrap());
        let (a, b) = (m1_distance(&x, &y, 1.0, &opts()).unwrap(), m1_distance(&y, &x, 1.0, &opts()).unwrap());
        prop_assert!((a - b).abs() <= 2e-6);
    }

    #[test]
    fn identity(x in common::step_path(2, 20)) {
        prop_assert_eq!(uniform_distance(&x, &x, 1.0).unwrap(), 0.0);
        prop_assert_eq!(j1_distance(&x, &x, 1.0, &opts()).unwrap(), 0.0);
        prop_assert_eq!(m1_distance(&x, &x, 1.0, &opts()).unwrap(), 0.0);
        prop_assert_eq!(m1_distance(&x, &x.normalize(), 1.0, &opts()).unwrap(), 0.0);
    }

    #[test]
    fn triangle((x, y, z) in common::path_triple(20)) {
        let u = |a, b| uniform_distance(a, b, 1.0).unwrap();
        prop_assert!(u(&x, &z) <= u(&x, &y) + u(&y, &z) + 1e-12);
        let j = |a, b| j1_distance(a, b, 1.0, &opts()).unwrap();
        prop_assert!(j(&x, &z) <= j(&x, &y) + j(&y, &z) + 1e-9);
        let m = |a, b| m1_distance(a, b, 1.0, &opts()).unwrap();
        prop_assert!(m(&x, &z) <= m(&x, &y) + m(&y, &z) + 3e-6);
    }

    #[test]
    fn halfline_is_a_bounded_symmetric_distance((x, y) in common::path_pair(10)) {
        for base in [BaseMetric::Uniform, BaseMetric::J1, BaseMetric::M1] {
            let o = MetricOptions { base, ..opts() };
            let a = halfline_distance(&x, &y, &o).unwrap();
            let b = halfline_distance(&y, &x, &o).unwrap();
            prop_assert!((0.0..=1.0 + 1e-9).contains(&a));
            prop_assert!((a - b).abs() <= 1e-6);
        }
        let o = MetricOptions { base: BaseMetric::M1, ..opts() };
        prop_assert_eq!(halfline_distance(&x, &x, &o).unwrap(), 0.0);
    }
}
