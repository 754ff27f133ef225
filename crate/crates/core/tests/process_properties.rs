//! Generators against direct recomputation from their internals, and distributional
//! sanity checks of the samplers.

use proptest::prelude::*;
use skolab::integrals::simple_integral;
use skolab::processes::{
    crossing_identity_rhs, crossing_pair, ctrw_path, exploding_pair, inverse_subordinator_path, sample_innovations,
    sj_lambda, sj_martingale_value, sj_psi, Coupling, CtrwConfig, ExplodingParams, InnovationModel, Seed, Waits,
};

fn config(coeffs: Vec<f64>, n: u64, waits: Waits) -> CtrwConfig {
    CtrwConfig {
        alpha: 1.5,
        waits,
        coeffs,
        normalize: true,
        coupling: Coupling::Uncoupled,
        scale_n: n,
        horizon: 1.0,
        innovations: InnovationModel::ParetoRademacher { alpha: 1.5, x_min: 1.0 },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn moving_average_matches_direct_sum(c1 in 0.0f64..3.0, n in 2u64..300, seed in any::<u64>()) {
        let cfg = config(vec![1.0, c1], n, Waits::Unit);
        let s = ctrw_path(&cfg, Seed::new(seed)).unwrap();
        let th = &s.thetas;
        let scale = (n as f64).powf(-1.0 / 1.5) / (1.0 + c1);
        let mut acc = 0.0;
        for k in 1..=n as usize {
            acc += scale * (th[k] + c1 * th[k - 1]);
            let got = s.path.at(k as f64 / n as f64)[0];
            prop_assert!((got - acc).abs() <= 1e-12 * (1.0 + acc.abs()));
        }
    }

    #[test]
    fn ctrw_jumps_sit_on_epochs(n in 10u64..2000, seed in any::<u64>(), beta in 0.3f64..0.95) {
        let cfg = config(vec![1.0], n, Waits::Pareto { beta, x_min: 1.0 });
        let s = ctrw_path(&cfg, Seed::new(seed)).unwrap();
        let scale = (n as f64).powf(-beta / 1.5);
        for (k, &e) in s.epochs.iter().enumerate() {
            prop_assert_eq!(s.count.at(e)[0], (k + 1) as f64);
            let jump = s.path.at(e)[0] - s.path.left_at(e)[0];
            prop_assert!((jump - scale * s.zetas[k]).abs() <= 1e-12 * (1.0 + jump.abs()));
        }
        prop_assert_eq!(s.path.jump_count(), s.epochs.len());
    }

    #[test]
    fn inverse_subordinator_counts_epochs(n in 2u64..500, seed in any::<u64>(), beta in 0.3f64..0.95) {
        let p = inverse_subordinator_path(beta, n, 1.0, Seed::new(seed)).unwrap();
        let ts = p.breakpoints();
        for (i, &t) in ts.iter().enumerate() {
            // n D^{-1}(t) = number of renewal epochs up to t
            prop_assert_eq!((p.at(t)[0] * n as f64).round() as usize, i);
        }
    }

    #[test]
    fn crossing_identity_holds(seed in any::<u64>(), n in prop::sample::select(vec![16u64, 100, 1000, 10_000])) {
        let s = crossing_pair(n, 1.0, Seed::new(seed)).unwrap();
        let lhs = simple_integral(&s.h, &s.x, 1.0).unwrap()[0];
        prop_assert!((lhs - crossing_identity_rhs(&s, n)).abs() < 1e-9);
        // H vanishes from the cap on and takes values in {-1, 0, 1}
        prop_assert!(s.h.values_flat().iter().all(|v| [-1.0, 0.0, 1.0].contains(v)));
        prop_assert_eq!(s.h.at(s.cap)[0], 0.0);
    }

    #[test]
    fn exploding_integrand_is_adapted_and_bounded(seed in any::<u64>(), n in 10u64..2000) {
        let p = ExplodingParams { n, alpha: 1.5, epsilon: 0.25, x_min: 1.0, horizon: 1.0, c0: 1.0, c1: 1.0 };
        let s = exploding_pair(&p, Seed::new(seed)).unwrap();
        let lvl = (n as f64).powf(-0.25);
        prop_assert_eq!(s.levels[0], 0.0);
        prop_assert_eq!(s.levels[1], 0.0);
        for k in 2..s.levels.len() {
            let h = s.levels[k];
            prop_assert!(h == 0.0 || h == -lvl * s.z[k].signum() || h == s.levels[k - 1]);
        }
    }
}

#[test]
fn symmetric_cauchy_quartiles() {
    // α = 1, β = 0 is the standard Cauchy law: P(|X| > 1) = 1/2
    let v = sample_innovations(&InnovationModel::Stable { alpha: 1.0, skew: 0.0, scale: 1.0 }, 40_000, Seed::new(8)).unwrap();
    let frac = v.iter().filter(|x| x.abs() > 1.0).count() as f64 / v.len() as f64;
    assert!((frac - 0.5).abs() < 0.015, "{frac}");
}

#[test]
fn pareto_tail() {
    let v = sample_innovations(&InnovationModel::ParetoRademacher { alpha: 1.5, x_min: 1.0 }, 40_000, Seed::new(9)).unwrap();
    let frac = v.iter().filter(|x| x.abs() > 2.0).count() as f64 / v.len() as f64;
    assert!((frac - 2f64.powf(-1.5)).abs() < 0.015, "{frac}");
    let pos = v.iter().filter(|x| **x > 0.0).count() as f64 / v.len() as f64;
    assert!((pos - 0.5).abs() < 0.015);
}

#[test]
fn totally_skewed_stable_is_positive_for_small_alpha() {
    let v = sample_innovations(&InnovationModel::Stable { alpha: 0.7, skew: 1.0, scale: 1.0 }, 5_000, Seed::new(1)).unwrap();
    assert!(v.iter().all(|&x| x > 0.0));
}

#[test]
fn single_jump_martingale_has_mean_zero() {
    // E[M_t] = ((1-ε)/T) ∫_0^T M_t(τ) dτ + ε M_t(T), by midpoint quadrature fine enough to
    // resolve the oscillations of Ψ near T
    let (n, horizon, eps) = (100.0f64, 1.0, 0.5);
    let a = horizon + 1.0 / n - 1.0 / n.sqrt();
    for t in [0.5, a + 0.03, horizon] {
        let m = 2_000_000;
        let mut acc = (1.0 - eps) / horizon * a * sj_martingale_value(n, horizon, eps, 0.0, t);
        let w = (horizon - a) / m as f64;
        for i in 0..m {
            let tau = a + (i as f64 + 0.5) * w;
            acc += (1.0 - eps) / horizon * w * sj_martingale_value(n, horizon, eps, tau, t);
        }
        acc += eps * sj_martingale_value(n, horizon, eps, horizon, t);
        assert!(acc.abs() < 1e-4, "t = {t}: {acc}");
    }
    assert_eq!(sj_psi(n, horizon, eps, horizon), 0.0);
    assert_eq!(sj_lambda(n, horizon, 0.2), 0.0);
}
