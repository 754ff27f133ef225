//! Invariants of step paths, their functionals and simple integrals.

mod common;

use proptest::prelude::*;
use skolab::integrals::{dot_integral, quad_covariation, simple_integral, simple_integral_path};
use skolab::metrics::{increment_count, w_dprime, w_prime};
use skolab::paths::{dist, Side};
use skolab::StepPath;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn right_continuous_with_left_limits(x in common::step_path(2, 12)) {
        for (i, &b) in x.breakpoints().iter().enumerate() {
            prop_assert_eq!(x.evaluate(b, Side::Right).unwrap(), x.value(i).to_vec());
            if i > 0 {
                prop_assert_eq!(x.evaluate(b, Side::Left).unwrap(), x.value(i - 1).to_vec());
            }
        }
    }

    #[test]
    fn jumps_telescope(x in common::step_path(1, 12)) {
        let sum: f64 = x.jumps().iter().map(|j| j.delta[0]).sum();
        prop_assert!((sum - (x.end_value()[0] - x.start_value()[0])).abs() < 1e-12);
        let tv = x.total_variation(0.0, 1.0).unwrap().total;
        prop_assert!(tv + 1e-12 >= (x.end_value()[0] - x.start_value()[0]).abs());
        prop_assert!(tv + 1e-12 >= x.sup_norm(1.0) - x.start_value()[0].abs());
    }

    #[test]
    fn json_round_trip(x in common::step_path(2, 12)) {
        prop_assert_eq!(StepPath::from_json(&x.to_json()).unwrap(), x);
    }

    #[test]
    fn normalize_keeps_the_function(x in common::step_path(1, 12)) {
        let y = x.normalize();
        for k in 0..=80 {
            let t = k as f64 / 80.0;
            prop_assert_eq!(x.at(t), y.at(t));
        }
    }

    #[test]
    fn parametric_representation_lies_on_graph(x in common::step_path(2, 10), k in 0usize..40) {
        let rep = x.param_rep(x.completed_graph().len() + k).unwrap();
        prop_assert!(rep.check_against(&x, 1e-12).is_ok());
    }

    #[test]
    fn integral_of_one_is_the_increment(x in common::step_path(1, 12), t in 0.0f64..=1.0) {
        let one = StepPath::constant(1.0, &[1.0]).unwrap();
        let v = simple_integral(&one, &x, t).unwrap()[0];
        prop_assert!((v - (x.at(t)[0] - x.start_value()[0])).abs() < 1e-12);
    }

    #[test]
    fn integral_is_bilinear((h, g) in (common::step_path(1, 8), common::step_path(1, 8)), x in common::step_path(1, 8)) {
        let lhs = dot_integral(&h.add(&g).unwrap(), &x, 1.0).unwrap();
        let rhs = dot_integral(&h, &x, 1.0).unwrap() + dot_integral(&g, &x, 1.0).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
        let scaled = dot_integral(&h, &x.scale(3.0), 1.0).unwrap();
        prop_assert!((scaled - 3.0 * dot_integral(&h, &x, 1.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn integration_by_parts(x in common::step_path(1, 10), y in common::step_path(1, 10)) {
        // x_1 y_1 - x_0 y_0 = ∫ x_- dy + ∫ y_- dx + [x, y]_1
        let lhs = x.end_value()[0] * y.end_value()[0] - x.start_value()[0] * y.start_value()[0];
        let rhs = dot_integral(&x, &y, 1.0).unwrap()
            + dot_integral(&y, &x, 1.0).unwrap()
            + quad_covariation(&x, &y).unwrap().end_value()[0];
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn integral_path_jumps_only_where_integrator_jumps(h in common::step_path(1, 8), x in common::step_path(1, 8)) {
        let p = simple_integral_path(&h, &x).unwrap();
        for j in p.jumps() {
            prop_assert!(x.left_at(j.time) != x.at(j.time));
        }
    }

    #[test]
    fn moduli_are_monotone_in_the_window(x in common::step_path(1, 12), a in 1u32..10, b in 1u32..10) {
        let (lo, hi) = (a.min(b) as f64 / 20.0, a.max(b) as f64 / 20.0);
        prop_assert!(w_prime(&x, lo, 1.0).unwrap() <= w_prime(&x, hi, 1.0).unwrap() + 1e-12);
        prop_assert!(w_dprime(&x, lo, 1.0).unwrap() <= w_dprime(&x, hi, 1.0).unwrap() + 1e-12);
        let (d1, d2) = (lo, hi);
        prop_assert!(increment_count(&x, d2, 1.0).unwrap() <= increment_count(&x, d1, 1.0).unwrap());
    }

    #[test]
    fn monotone_paths_have_no_m1_oscillation(steps in proptest::collection::vec(0u32..4, 1..15)) {
        let n = steps.len();
        let times: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let mut acc = 0.0;
        let values = steps.iter().map(|&s| { acc += s as f64; acc }).collect();
        let x = StepPath::scalar(1.0, times, values).unwrap();
        // only the endpoint oscillations remain: the three-point term vanishes
        let theta = 0.3;
        let osc = |a: f64, b: f64| {
            let ts = x.breakpoints();
            let vs: Vec<f64> = (0..ts.len())
                .filter(|&i| ts[i] <= b && ts.get(i + 1).is_none_or(|&e| e > a))
                .map(|i| x.value(i)[0])
                .collect();
            vs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - vs.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        let ends = osc(0.0, theta).max(osc(1.0 - theta + 1e-12, 1.0));
        prop_assert_eq!(w_dprime(&x, theta, 1.0).unwrap(), ends);
    }

    #[test]
    fn truncation_splits_the_path(x in common::step_path(1, 12), d in 1u32..16) {
        let delta = d as f64 / 8.0;
        let big = x.truncate_jumps(delta).unwrap();
        let rest = x.truncation_remainder(delta).unwrap();
        let sum = big.add(&rest).unwrap();
        for &t in x.breakpoints() {
            prop_assert!(dist(sum.at(t), x.at(t)) < 1e-12);
        }
    }
}

#[test]
fn rejects_bad_input() {
    assert_eq!(
        StepPath::scalar(1.0, vec![0.0, 0.5, 0.5], vec![0.0, 1.0, 2.0]).unwrap_err().kind(),
        "NonMonotoneTimes"
    );
    assert_eq!(
        StepPath::scalar(1.0, vec![0.0, 0.5], vec![0.0, f64::NAN]).unwrap_err().kind(),
        "NonFiniteValue"
    );
    assert_eq!(
        StepPath::scalar(1.0, vec![0.0, 1.5], vec![0.0, 1.0]).unwrap_err().kind(),
        "HorizonExceeded"
    );
}
