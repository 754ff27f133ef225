//! J1 and M1 distances against brute-force oracles: an exhaustive search over
//! piecewise-linear time changes for J1, and the discrete Fréchet distance of densely
//! subdivided completed graphs for M1.

mod common;

use proptest::prelude::*;
use skolab::metrics::{j1_distance, m1_distance, uniform_distance, MetricOptions, Mode};
use skolab::StepPath;

/// `λ^{-1}(τ)` for the piecewise-linear `λ` through `(s_j, u_j)`.
fn inverse(s: &[f64], u: &[f64], tau: f64) -> f64 {
    for j in 0..u.len() - 1 {
        if tau == u[j] {
            return s[j];
        }
        if tau > u[j] && tau < u[j + 1] {
            return s[j] + (tau - u[j]) * (s[j + 1] - s[j]) / (u[j + 1] - u[j]);
        }
    }
    s[s.len() - 1]
}

/// `max(|λ - id|, |x∘λ - y|)` for the time change sending `y`'s breakpoints `s` to `u`.
fn cost(x: &StepPath, y: &StepPath, s: &[f64], u: &[f64]) -> f64 {
    let xt = x.breakpoints();
    let times: Vec<f64> = xt.iter().map(|&t| inverse(s, u, t)).collect();
    let mut vals = Vec::new();
    for i in 0..xt.len() {
        vals.extend_from_slice(x.value(i));
    }
    // collapse preimages that coincide after rounding
    let mut tt = vec![times[0]];
    let mut vv: Vec<f64> = vals[..x.dim()].to_vec();
    for i in 1..times.len() {
        if times[i] > *tt.last().unwrap() {
            tt.push(times[i]);
            vv.extend_from_slice(&vals[i * x.dim()..(i + 1) * x.dim()]);
        } else {
            let k = vv.len() - x.dim();
            vv[k..].copy_from_slice(&vals[i * x.dim()..(i + 1) * x.dim()]);
        }
    }
    let xl = StepPath::from_flat(x.dim(), 1.0, tt, vv).unwrap();
    let shift = s.iter().zip(u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    shift.max(uniform_distance(&xl, y, 1.0).unwrap())
}

/// Exhaustive search over knot images on the 1/160 grid.
fn j1_oracle(x: &StepPath, y: &StepPath) -> f64 {
    let inner: Vec<f64> = y.breakpoints()[1..].to_vec();
    let grid: Vec<f64> = (1..160).map(|k| k as f64 / 160.0).collect();
    let mut best = f64::INFINITY;
    let mut u = vec![0.0; inner.len()];
    fn rec(j: usize, lo: f64, grid: &[f64], inner: &[f64], u: &mut Vec<f64>, x: &StepPath, y: &StepPath, best: &mut f64) {
        if j == inner.len() {
            let mut s = vec![0.0];
            s.extend_from_slice(inner);
            s.push(1.0);
            let mut uu = vec![0.0];
            uu.extend_from_slice(u);
            uu.push(1.0);
            *best = best.min(cost(x, y, &s, &uu));
            return;
        }
        for &g in grid.iter().filter(|&&g| g > lo) {
            u[j] = g;
            rec(j + 1, g, grid, inner, u, x, y, best);
        }
    }
    rec(0, 0.0, &grid, &inner, &mut u, x, y, &mut best);
    best
}

fn subdivide(p: &StepPath, h: f64) -> Vec<(Vec<f64>, f64)> {
    let verts = p.completed_graph().vertices();
    let mut out = vec![verts[0].clone()];
    for w in verts.windows(2) {
        let ((a, ta), (b, tb)) = (&w[0], &w[1]);
        let len = a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold((ta - tb).abs(), f64::max);
        let k = ((len / h).ceil() as usize).max(1);
        for i in 1..=k {
            let f = i as f64 / k as f64;
            let v = a.iter().zip(b).map(|(p, q)| p + f * (q - p)).collect();
            out.push((v, ta + f * (tb - ta)));
        }
    }
    out
}

fn ground(a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)) -> f64 {
    let d = a.0.iter().zip(&b.0).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    d.max((a.1 - b.1).abs())
}

fn discrete_frechet(p: &[(Vec<f64>, f64)], q: &[(Vec<f64>, f64)]) -> f64 {
    let mut prev = vec![f64::INFINITY; q.len()];
    for (i, a) in p.iter().enumerate() {
        let mut cur = vec![f64::INFINITY; q.len()];
        for (j, b) in q.iter().enumerate() {
            let reach = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cur[j - 1],
                (_, 0) => prev[0],
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]),
            };
            cur[j] = ground(a, b).max(reach);
        }
        prev = cur;
    }
    prev[q.len() - 1]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn j1_matches_time_change_search(x in common::step_path(1, 5), y in common::step_path(1, 3)) {
        let exact = j1_distance(&x, &y, 1.0, &MetricOptions::default()).unwrap();
        let oracle = j1_oracle(&x, &y);
        prop_assert!(exact <= oracle + 1e-9, "exact {} above oracle {}", exact, oracle);
        prop_assert!(oracle <= exact + 1.0 / 160.0 + 1e-9, "oracle {} far above exact {}", oracle, exact);
    }

    #[test]
    fn m1_matches_subdivided_discrete_frechet((x, y) in common::path_pair(6)) {
        let h = 0.02;
        let m1 = m1_distance(&x, &y, 1.0, &MetricOptions::default()).unwrap();
        let oracle = discrete_frechet(&subdivide(&x, h), &subdivide(&y, h));
        prop_assert!(m1 <= oracle + 1e-6, "m1 {} above oracle {}", m1, oracle);
        prop_assert!(oracle <= m1 + h + 1e-6, "oracle {} far above m1 {}", oracle, m1);
    }

    #[test]
    fn j1_upper_bound_mode_is_close((x, y) in common::path_pair(8)) {
        let exact = j1_distance(&x, &y, 1.0, &MetricOptions::default()).unwrap();
        let opts = MetricOptions { tolerance: 1e-5, mode: Mode::UpperBound, ..MetricOptions::default() };
        let ub = j1_distance(&x, &y, 1.0, &opts).unwrap();
        prop_assert!(ub >= exact - 1e-9);
        prop_assert!(ub <= exact + 1e-4, "upper bound {} vs exact {}", ub, exact);
    }
}

#[test]
fn ramp_is_m1_close_but_j1_far_from_a_jump() {
    // 10 small steps from 0 to 1 over [0.5, 0.51) against a single unit jump at 0.5
    let mut t = vec![0.0];
    let mut v = vec![0.0];
    for k in 1..=10 {
        t.push(0.5 + (k - 1) as f64 * 0.001);
        v.push(k as f64 / 10.0);
    }
    let ramp = StepPath::scalar(1.0, t, v).unwrap();
    let jump = StepPath::indicator(1.0, 0.5, None, 1.0).unwrap();
    let opts = MetricOptions::default();
    assert!(m1_distance(&ramp, &jump, 1.0, &opts).unwrap() <= 0.01 + 1e-6);
    assert!(j1_distance(&ramp, &jump, 1.0, &opts).unwrap() >= 0.45);
}
