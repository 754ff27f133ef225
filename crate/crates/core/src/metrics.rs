//! Distances and moduli on Skorokhod space for step paths.
//!
//! * uniform distance: exact sup over the merged breakpoint grid;
//! * J1: exact infimum over time changes (candidate search + interval reachability),
//!   plus a grid-search upper bound used to cross-check it;
//! * M1: Fréchet distance between completed graphs under the ground metric
//!   `max(|Δvalue|, |Δtime|)`, via the free-space decision procedure and bisection;
//! * the half-line metric `∫ e^{-T} (ρ_T ∧ 1) dT` by quadrature;
//! * the moduli `w'`, `w''`, the consecutive-increment function `ŵ` and the
//!   increment counter `N_δ`, all exact on the breakpoint grid.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{bad, Error, Result};
use crate::paths::{dist, merge_times, GraphPolyline, StepPath};

/// Exact computation or a refinable upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    UpperBound,
}

/// Metric used on `[0, T]` inside the half-line integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseMetric {
    Uniform,
    J1,
    M1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricOptions {
    /// Bisection / grid resolution for approximate infima.
    pub tolerance: f64,
    pub mode: Mode,
    pub base: BaseMetric,
    /// Truncation point of the half-line integral.
    pub t_max: f64,
    /// Number of uniform quadrature nodes on `[0, t_max]`.
    pub grid: usize,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions {
            tolerance: 1e-6,
            mode: Mode::Exact,
            base: BaseMetric::Uniform,
            t_max: 20.0,
            grid: 256,
        }
    }
}

impl MetricOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(bad("tolerance must be positive"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(bad("t_max must be positive and finite"));
        }
        if self.grid < 2 {
            return Err(bad("quadrature grid needs at least 2 points"));
        }
        Ok(())
    }
}

/// Checks dimensions and restricts both paths to `[0, t]`.
fn prepare(x: &StepPath, y: &StepPath, t: f64) -> Result<(StepPath, StepPath)> {
    x.check_dim(y)?;
    let h = x.horizon().min(y.horizon());
    if !(t > 0.0 && t <= h) {
        return Err(Error::OutOfHorizon { t, horizon: h });
    }
    Ok((x.restrict(t)?, y.restrict(t)?))
}

fn sup_diff(x: &StepPath, y: &StepPath) -> f64 {
    // left values at a breakpoint are right values of the previous merged time
    merge_times(x.breakpoints(), y.breakpoints())
        .iter()
        .map(|&t| dist(x.at(t), y.at(t)))
        .fold(0.0, f64::max)
}

/// `|x - y|*_T`, exact.
pub fn uniform_distance(x: &StepPath, y: &StepPath, t: f64) -> Result<f64> {
    let (x, y) = prepare(x, y, t)?;
    Ok(sup_diff(&x, &y))
}

/// J1 distance on `[0, t]`.
pub fn j1_distance(x: &StepPath, y: &StepPath, t: f64, opts: &MetricOptions) -> Result<f64> {
    opts.validate()?;
    let (x, y) = prepare(x, y, t)?;
    Ok(match opts.mode {
        Mode::Exact => j1_exact(&x.normalize(), &y.normalize()),
        Mode::UpperBound => j1_grid(&x.normalize(), &y.normalize(), opts.tolerance),
    })
}

/// Maximal runs `[a, b)` of positive-length segments of `y` within distance `eps` of `v`.
fn good_components(y: &StepPath, v: &[f64], eps: f64) -> Vec<(f64, f64)> {
    let t = y.horizon();
    let yt = y.breakpoints();
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<f64> = None;
    for j in 0..yt.len() {
        let end = yt.get(j + 1).copied().unwrap_or(t);
        if yt[j] >= t {
            break;
        }
        let good = dist(v, y.value(j)) <= eps;
        match (good, open) {
            (true, None) => open = Some(yt[j]),
            (false, Some(a)) => {
                out.push((a, yt[j]));
                open = None;
            }
            _ => {}
        }
        if good && end >= t {
            out.push((open.take().unwrap(), t));
        }
    }
    out
}

fn window(s: f64, eps: f64, t: f64) -> (f64, f64) {
    if s >= t {
        (t, t)
    } else {
        ((s - eps).max(0.0), (s + eps).min(t))
    }
}

/// Is there a time change with displacement and value mismatch both `<= eps`?
///
/// With `u_i` the new position of the i-th jump of `x`, the i-th segment of the
/// re-timed path occupies `[u_i, u_{i+1})` and must lie in a run of `y`-segments
/// within `eps` of `x_i`. Reachable `u_i` form a union of closed intervals; the
/// closure admits degenerate cells, which is what makes the infimum attained.
fn j1_feasible(x: &StepPath, y: &StepPath, eps: f64) -> bool {
    let t = x.horizon();
    let s = x.breakpoints();
    let k = s.len() - 1;
    if dist(x.end_value(), y.end_value()) > eps {
        return false;
    }
    let mut reach: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for i in 0..k {
        let comps = good_components(y, x.value(i), eps);
        let (wl, wh) = window(s[i + 1], eps, t);
        let mut next = Vec::new();
        for &(a, b) in &comps {
            // least reachable position inside [a, b)
            let first = reach.iter().find_map(|&(lo, hi)| {
                let m = lo.max(a);
                (m <= hi && m < b).then_some(m)
            });
            if let Some(m) = first {
                let (lo, hi) = (m.max(wl), b.min(wh));
                if lo <= hi {
                    next.push((lo, hi));
                }
            }
        }
        if next.is_empty() {
            return false;
        }
        reach = next;
    }
    if s[k] >= t {
        return reach.iter().any(|&(_, hi)| hi >= t);
    }
    good_components(y, x.value(k), eps)
        .last()
        .filter(|&&(_, b)| b >= t)
        .is_some_and(|&(a, b)| reach.iter().any(|&(lo, hi)| lo.max(a) <= hi && lo.max(a) < b))
}

/// Exact J1 distance of two normalised paths on a common horizon.
///
/// The optimum is attained at a value mismatch `|x_i - y_j|` or at a displacement
/// `|s_i - t_j|` between a jump of `x` and a jump of `y` (or `0`, `T`); the least
/// feasible candidate is found by binary search.
fn j1_exact(x: &StepPath, y: &StepPath) -> f64 {
    let t = x.horizon();
    let mut cand = vec![0.0];
    for i in 0..x.num_segments() {
        for j in 0..y.num_segments() {
            cand.push(dist(x.value(i), y.value(j)));
        }
    }
    let mut yt = y.breakpoints().to_vec();
    yt.push(t);
    for &s in &x.breakpoints()[1..] {
        for &r in &yt {
            cand.push((s - r).abs());
        }
    }
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let slack = 1e-12 * (1.0 + cand[cand.len() - 1]);
    let (mut lo, mut hi) = (0usize, cand.len() - 1);
    if j1_feasible(x, y, slack) {
        return 0.0;
    }
    // invariant: cand[lo] infeasible, cand[hi] feasible
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if j1_feasible(x, y, cand[mid] + slack) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    cand[hi]
}

/// Grid-search J1 upper bound: jump positions restricted to a grid of spacing `h`
/// around the structural points (own position, window edges, jumps of `y`).
/// Returns the exact cost of the best time change found, hence always `>= d_J1`.
fn j1_grid(x: &StepPath, y: &StepPath, h: f64) -> f64 {
    let uniform = sup_diff(x, y);
    if uniform == 0.0 {
        return 0.0;
    }
    let t = x.horizon();
    let s = x.breakpoints();
    let k = s.len() - 1;
    let spread = (k + 1) as i64;
    let positions = |i: usize, eps: f64| -> Vec<f64> {
        if s[i] >= t {
            return vec![t];
        }
        let (wl, wh) = window(s[i], eps, t);
        let mut p = vec![s[i]];
        let steps = (eps / h).floor();
        let mut anchors: Vec<f64> = y.breakpoints()[1..].to_vec();
        anchors.push(s[i] - steps * h);
        anchors.push(s[i] + steps * h);
        for &a in &anchors {
            for m in -spread..=spread {
                p.push(a + m as f64 * h);
            }
        }
        p.retain(|&u| u >= wl && u <= wh && u > 0.0 && u < t);
        p.sort_by(f64::total_cmp);
        p.dedup();
        p
    };
    let comp_end = |comps: &[(f64, f64)], q: f64| comps.iter().find(|&&(a, b)| a <= q && q < b).map(|&(_, b)| b);
    let search = |eps: f64| -> Option<Vec<f64>> {
        // levels[i] = (position, predecessor index)
        let mut levels: Vec<Vec<(f64, usize)>> = vec![vec![(0.0, 0)]];
        for i in 1..=k {
            let comps = good_components(y, x.value(i - 1), eps);
            let prev: Vec<(usize, f64, f64)> = levels[i - 1]
                .iter()
                .enumerate()
                .filter_map(|(idx, &(q, _))| comp_end(&comps, q).map(|b| (idx, q, b)))
                .collect();
            let mut cur = Vec::new();
            let mut ptr = 0usize;
            for p in positions(i, eps) {
                while ptr < prev.len() && prev[ptr].1 < p {
                    ptr += 1;
                }
                if ptr == 0 {
                    continue;
                }
                let (idx, _, b) = prev[ptr - 1];
                if b >= p {
                    cur.push((p, idx));
                }
            }
            if cur.is_empty() {
                return None;
            }
            levels.push(cur);
        }
        if dist(x.end_value(), y.end_value()) > eps {
            return None;
        }
        let last = &levels[k];
        let pick = if s[k] >= t {
            last.iter().position(|&(u, _)| u >= t)
        } else {
            let comps = good_components(y, x.value(k), eps);
            last.iter().position(|&(u, _)| comp_end(&comps, u).is_some_and(|b| b >= t))
        }?;
        let mut u = vec![0.0; k + 1];
        let mut idx = pick;
        for i in (1..=k).rev() {
            u[i] = levels[i][idx].0;
            idx = levels[i][idx].1;
        }
        Some(u)
    };
    let (mut lo, mut hi) = (0.0, uniform);
    let mut best = s.to_vec();
    if let Some(u) = search(0.0) {
        best = u;
        hi = 0.0;
    }
    while hi - lo > h {
        let mid = 0.5 * (lo + hi);
        match search(mid) {
            Some(u) => {
                hi = mid;
                best = u;
            }
            None => lo = mid,
        }
    }
    let retimed = StepPath::from_flat(x.dim(), t, best.clone(), x.values_flat().to_vec()).expect("increasing witness");
    let shift = best.iter().zip(s).map(|(u, s)| (u - s).abs()).fold(0.0, f64::max);
    shift.max(sup_diff(&retimed, y)).min(uniform)
}

/// Ground metric on value × time: `max(|Δv|, |Δt|)`.
fn ground(a: (&[f64], f64), b: (&[f64], f64)) -> f64 {
    dist(a.0, b.0).max((a.1 - b.1).abs())
}

/// Parameters `β ∈ [0, 1]` with `ground(p, q0 + β (q1 - q0)) <= eps`; an interval by convexity.
fn free_interval(p: (&[f64], f64), q0: (&[f64], f64), q1: (&[f64], f64), eps: f64) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    // value part: |w - β e| <= eps
    let w: Vec<f64> = p.0.iter().zip(q0.0).map(|(a, b)| a - b).collect();
    let e: Vec<f64> = q1.0.iter().zip(q0.0).map(|(a, b)| a - b).collect();
    let ee: f64 = e.iter().map(|v| v * v).sum();
    if ee == 0.0 {
        if w.iter().map(|v| v * v).sum::<f64>().sqrt() > eps {
            return None;
        }
    } else {
        let c = w.iter().zip(&e).map(|(a, b)| a * b).sum::<f64>() / ee;
        let d2: f64 = w.iter().zip(&e).map(|(a, b)| (a - c * b).powi(2)).sum();
        let h2 = eps * eps - d2;
        if h2 < 0.0 {
            return None;
        }
        let hw = (h2 / ee).sqrt();
        lo = lo.max(c - hw);
        hi = hi.min(c + hw);
    }
    // time part: |wt - β et| <= eps
    let (wt, et) = (p.1 - q0.1, q1.1 - q0.1);
    if et == 0.0 {
        if wt.abs() > eps {
            return None;
        }
    } else {
        let (a, b) = ((wt - eps) / et, (wt + eps) / et);
        lo = lo.max(a.min(b));
        hi = hi.min(a.max(b));
    }
    (lo <= hi).then_some((lo, hi))
}

/// Free-space decision: is the Fréchet distance of `p` and `q` at most `eps`?
fn frechet_decide(p: &GraphPolyline, q: &GraphPolyline, eps: f64) -> bool {
    let (np, nq) = (p.len(), q.len());
    if ground(p.vertex(0), q.vertex(0)) > eps || ground(p.vertex(np - 1), q.vertex(nq - 1)) > eps {
        return false;
    }
    if np == 1 || nq == 1 {
        let (single, other) = if np == 1 { (p, q) } else { (q, p) };
        return (0..other.len()).all(|i| ground(single.vertex(0), other.vertex(i)) <= eps);
    }
    type Iv = Option<(f64, f64)>;
    // left[j]: reachable part of {vertex i of p} × edge j of q, for the current column i
    let mut left: Vec<Iv> = vec![None; nq - 1];
    let mut ok = true;
    for (j, slot) in left.iter_mut().enumerate() {
        let f = free_interval(p.vertex(0), q.vertex(j), q.vertex(j + 1), eps);
        *slot = match f {
            Some((lo, hi)) if ok && lo == 0.0 => Some((lo, hi)),
            _ => None,
        };
        ok = matches!(*slot, Some((_, 1.0)));
    }
    // bottom: reachable part of edge i of p × vertex 0 of q, carried along the column
    let mut bottom_ok = true;
    for i in 0..np - 1 {
        let fb = free_interval(q.vertex(0), p.vertex(i), p.vertex(i + 1), eps);
        let mut bottom: Iv = match fb {
            Some((lo, hi)) if bottom_ok && lo == 0.0 => Some((lo, hi)),
            _ => None,
        };
        bottom_ok = matches!(bottom, Some((_, 1.0)));
        let mut new_left: Vec<Iv> = vec![None; nq - 1];
        for j in 0..nq - 1 {
            let fr = free_interval(p.vertex(i + 1), q.vertex(j), q.vertex(j + 1), eps);
            let ft = free_interval(q.vertex(j + 1), p.vertex(i), p.vertex(i + 1), eps);
            let (l, b) = (left[j], bottom);
            new_left[j] = match (l, b, fr) {
                (_, Some(_), f) => f,
                (Some((ll, _)), None, Some((lo, hi))) => (ll.max(lo) <= hi).then_some((ll.max(lo), hi)),
                _ => None,
            };
            bottom = match (l, b, ft) {
                (Some(_), _, f) => f,
                (None, Some((bl, _)), Some((lo, hi))) => (bl.max(lo) <= hi).then_some((bl.max(lo), hi)),
                _ => None,
            };
        }
        if i == np - 2 {
            let corner_right = matches!(new_left[nq - 2], Some((_, hi)) if hi >= 1.0);
            let corner_top = matches!(bottom, Some((_, hi)) if hi >= 1.0);
            return corner_right || corner_top;
        }
        left = new_left;
    }
    unreachable!("loop returns on its last column")
}

/// Discrete Fréchet distance over vertices; an upper bound for the continuous one.
fn discrete_frechet(p: &GraphPolyline, q: &GraphPolyline) -> f64 {
    let nq = q.len();
    let mut prev = vec![0.0f64; nq];
    for i in 0..p.len() {
        let mut cur = vec![0.0f64; nq];
        for j in 0..nq {
            let d = ground(p.vertex(i), q.vertex(j));
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cur[j - 1],
                (_, 0) => prev[0],
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]),
            };
            cur[j] = d.max(best);
        }
        prev = cur;
    }
    prev[nq - 1]
}

/// Fréchet distance between completed-graph polylines, within `tol` and never below the truth.
pub fn frechet_distance(p: &GraphPolyline, q: &GraphPolyline, tol: f64) -> f64 {
    if p == q {
        return 0.0;
    }
    let lo0 = ground(p.vertex(0), q.vertex(0)).max(ground(p.vertex(p.len() - 1), q.vertex(q.len() - 1)));
    if frechet_decide(p, q, lo0) {
        return lo0;
    }
    let (mut lo, mut hi) = (lo0, discrete_frechet(p, q));
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if frechet_decide(p, q, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// M1 distance on `[0, t]` (strong M1 in `R^d`).
pub fn m1_distance(x: &StepPath, y: &StepPath, t: f64, opts: &MetricOptions) -> Result<f64> {
    opts.validate()?;
    let (x, y) = prepare(x, y, t)?;
    Ok(frechet_distance(&x.completed_graph(), &y.completed_graph(), opts.tolerance))
}

/// Weak (productwise) M1: the largest coordinatewise M1 distance. Experimental.
pub fn weak_m1_distance(x: &StepPath, y: &StepPath, t: f64, opts: &MetricOptions) -> Result<f64> {
    x.check_dim(y)?;
    let mut best = 0.0f64;
    for i in 0..x.dim() {
        best = best.max(m1_distance(&x.component(i)?, &y.component(i)?, t, opts)?);
    }
    Ok(best)
}

fn base_distance(x: &StepPath, y: &StepPath, t: f64, opts: &MetricOptions) -> Result<f64> {
    match opts.base {
        BaseMetric::Uniform => uniform_distance(x, y, t),
        BaseMetric::J1 => j1_distance(x, y, t, opts),
        BaseMetric::M1 => m1_distance(x, y, t, opts),
    }
}

/// `∫_{T - a}^{T - a + L} (g_a + (g_b - g_a) s / L) e^{-T} dT` evaluated exactly.
fn linear_exp_integral(a: f64, b: f64, ga: f64, gb: f64) -> f64 {
    let l = b - a;
    let ea = (-a).exp();
    // 1 - e^{-L}(1 + L), with a series where cancellation bites
    let f = if l < 1e-3 {
        l * l / 2.0 - l * l * l / 3.0 + l.powi(4) / 8.0 - l.powi(5) / 30.0
    } else {
        -(-l).exp_m1() - l * (-l).exp()
    };
    ga * ea * (-(-l).exp_m1()) + (gb - ga) / l * ea * f
}

/// Half-line distance `∫_0^∞ e^{-T} (ρ_T(x, y) ∧ 1) dT` for constant-extended paths.
///
/// Nodes: `grid` uniform points on `(0, t_max]` plus points `b ± η` straddling every
/// breakpoint (so no node sits on a jump). The piecewise-linear interpolant of the
/// integrand is integrated against `e^{-T}` exactly; the tail beyond `t_max` is
/// estimated by `g(t_max) e^{-t_max}` and bounded by `e^{-t_max}` (< 3e-9 by default).
pub fn halfline_distance(x: &StepPath, y: &StepPath, opts: &MetricOptions) -> Result<f64> {
    opts.validate()?;
    x.check_dim(y)?;
    let tm = opts.t_max;
    let eta = 1e-9 * tm;
    let mut nodes: Vec<f64> = (1..=opts.grid).map(|i| tm * i as f64 / opts.grid as f64).collect();
    nodes.push(eta);
    for &b in x.breakpoints().iter().chain(y.breakpoints()).chain([x.horizon(), y.horizon()].iter()) {
        if b > 0.0 && b < tm {
            nodes.push(b - eta);
            nodes.push(b + eta);
        }
    }
    nodes.retain(|&s| s > 0.0 && s <= tm);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    // snap nodes that land on a breakpoint after all
    let on_break = |s: f64| x.breakpoints().contains(&s) || y.breakpoints().contains(&s);
    for s in nodes.iter_mut() {
        if on_break(*s) {
            *s += eta / 2.0;
        }
    }
    let g = |s: f64| -> Result<f64> {
        let xs = x.on_horizon(s)?;
        let ys = y.on_horizon(s)?;
        Ok(base_distance(&xs, &ys, s, opts)?.min(1.0))
    };
    let vals = nodes.iter().map(|&s| g(s)).collect::<Result<Vec<f64>>>()?;
    // on (0, first node] the integrand is constant at its first value
    let mut total = vals[0] * (-(-nodes[0]).exp_m1());
    for w in 0..nodes.len() - 1 {
        total += linear_exp_integral(nodes[w], nodes[w + 1], vals[w], vals[w + 1]);
    }
    total += vals[vals.len() - 1] * (-tm).exp();
    Ok(total)
}

/// The values of the restricted path on segments starting before `t`, with their start times.
fn cells_before(x: &StepPath, t: f64) -> (Vec<&[f64]>, Vec<f64>) {
    let ts = x.breakpoints();
    let n = ts.partition_point(|&s| s < t);
    ((0..n).map(|i| x.value(i)).collect(), ts[..n].to_vec())
}

fn diameter(vals: &[&[f64]]) -> f64 {
    if vals.first().is_some_and(|v| v.len() == 1) {
        let (mn, mx) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v[0]), b.max(v[0])));
        return (mx - mn).max(0.0);
    }
    let mut best = 0.0f64;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            best = best.max(dist(vals[i], vals[j]));
        }
    }
    best
}

/// For each start segment `j`, the first later segment `e` whose inclusion pushes the
/// oscillation above `eta` (`n` when none does).
fn first_breaks(vals: &[&[f64]], eta: f64) -> Vec<usize> {
    let n = vals.len();
    let mut out = vec![n; n];
    if vals[0].len() == 1 {
        let mut maxq: VecDeque<usize> = VecDeque::new();
        let mut minq: VecDeque<usize> = VecDeque::new();
        let mut e = 0usize;
        for j in 0..n {
            if e < j {
                e = j;
            }
            while maxq.front().is_some_and(|&f| f < j) {
                maxq.pop_front();
            }
            while minq.front().is_some_and(|&f| f < j) {
                minq.pop_front();
            }
            while e < n {
                let v = vals[e][0];
                let mx = maxq.front().map_or(v, |&f| vals[f][0].max(v));
                let mn = minq.front().map_or(v, |&f| vals[f][0].min(v));
                if mx - mn > eta {
                    break;
                }
                while maxq.back().is_some_and(|&b| vals[b][0] <= v) {
                    maxq.pop_back();
                }
                maxq.push_back(e);
                while minq.back().is_some_and(|&b| vals[b][0] >= v) {
                    minq.pop_back();
                }
                minq.push_back(e);
                e += 1;
            }
            out[j] = e;
        }
    } else {
        let mut e = 0usize;
        for j in 0..n {
            e = e.max(j + 1).min(n);
            while e < n && (j..e).all(|i| dist(vals[i], vals[e]) <= eta) {
                e += 1;
            }
            out[j] = e;
        }
    }
    out
}

/// Does a partition of `[0, t)` into cells of length `>= theta` with oscillation `<= eta` exist?
fn w_prime_feasible(vals: &[&[f64]], ts: &[f64], t: f64, theta: f64, eta: f64) -> bool {
    let n = vals.len();
    let brk = first_breaks(vals, eta);
    let end_of = |e: usize| if e < n { ts[e] } else { t };
    let seg_end = |m: usize| if m + 1 < n { ts[m + 1] } else { t };
    // least reachable cell boundary inside each segment; increasing in the segment index
    let mut a = vec![f64::INFINITY; n];
    a[0] = 0.0;
    let mut live: VecDeque<usize> = VecDeque::new();
    for m in 0..n {
        if m > 0 {
            while live.front().is_some_and(|&j| end_of(brk[j]) < ts[m]) {
                live.pop_front();
            }
            if let Some(&j) = live.front() {
                let b = (a[j] + theta).max(ts[m]);
                if b < seg_end(m) {
                    a[m] = b;
                }
            }
        }
        if a[m].is_finite() && a[m] + theta <= end_of(brk[m]) {
            if brk[m] == n {
                return true;
            }
            live.push_back(m);
        }
    }
    false
}

fn check_theta(theta: f64, t: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= t) {
        return Err(bad(format!("need 0 < theta <= T, got theta = {theta}, T = {t}")));
    }
    Ok(())
}

/// `w'(x, θ)` on `[0, t]`: least achievable maximal cell oscillation over partitions with
/// mesh `>= θ` (cells `[t_{i-1}, t_i)`, so the value at `t` itself is not seen).
/// Exact: the answer is the smallest double for which the partition search succeeds.
pub fn w_prime(x: &StepPath, theta: f64, t: f64) -> Result<f64> {
    let x = x.restrict(t)?;
    check_theta(theta, t)?;
    let (vals, ts) = cells_before(&x, t);
    if w_prime_feasible(&vals, &ts, t, theta, 0.0) {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0u64, diameter(&vals).to_bits());
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if w_prime_feasible(&vals, &ts, t, theta, f64::from_bits(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(f64::from_bits(hi))
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let e: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let ee: f64 = e.iter().map(|v| v * v).sum();
    if ee == 0.0 {
        return dist(p, a);
    }
    let c = (p.iter().zip(a).zip(&e).map(|((p, a), e)| (p - a) * e).sum::<f64>() / ee).clamp(0.0, 1.0);
    let proj: Vec<f64> = a.iter().zip(&e).map(|(a, e)| a + c * e).collect();
    dist(p, &proj)
}

/// `w''(x, θ)` on `[0, t]`: the three-point deviation `w̃` joined with the endpoint
/// oscillations `v̄(0)` and `v̄(t)`.
pub fn w_dprime(x: &StepPath, theta: f64, t: f64) -> Result<f64> {
    let x = x.restrict(t)?;
    check_theta(theta, t)?;
    let ts = x.breakpoints();
    let n = ts.len();
    let vals: Vec<&[f64]> = (0..n).map(|i| x.value(i)).collect();
    let mut best = 0.0f64;
    // triples of segments i < j < l with t_l - t_{i+1} < 2θ
    for i in 0..n.saturating_sub(2) {
        let anchor = ts[i + 1];
        if vals[0].len() == 1 {
            let (mut mx, mut mn) = (f64::NEG_INFINITY, f64::INFINITY);
            for l in i + 2..n {
                if ts[l] - anchor >= 2.0 * theta {
                    break;
                }
                mx = mx.max(vals[l - 1][0]);
                mn = mn.min(vals[l - 1][0]);
                let (vi, vl) = (vals[i][0], vals[l][0]);
                best = best.max(mx - vi.max(vl)).max(vi.min(vl) - mn);
            }
        } else {
            for l in i + 2..n {
                if ts[l] - anchor >= 2.0 * theta {
                    break;
                }
                for mid in vals.iter().take(l).skip(i + 1) {
                    best = best.max(point_segment_distance(mid, vals[i], vals[l]));
                }
            }
        }
    }
    let start: Vec<&[f64]> = (0..n).filter(|&j| ts[j] <= theta).map(|j| vals[j]).collect();
    let seg_end = |j: usize| if j + 1 < n { ts[j + 1] } else { t };
    let end: Vec<&[f64]> = (0..n).filter(|&j| seg_end(j) > t - theta || j + 1 == n).map(|j| vals[j]).collect();
    Ok(best.max(diameter(&start)).max(diameter(&end)))
}

/// `ŵ_δ^T(h, x)`: the largest `|h(s) - h(t)| ∧ |x(t) - x(u)|` over coordinates and
/// `s < t < u <= (s + δ) ∧ T`.
///
/// Both paths are constant between merged breakpoints, so it suffices to take `s, t, u`
/// in merged segments `a < b < c`; such times exist iff `t_c - t_{a+1} < δ`.
pub fn consecutive_increment(h: &StepPath, x: &StepPath, delta: f64, t: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(bad("delta must be positive"));
    }
    let (h, x) = prepare(h, x, t)?;
    let ts = merge_times(h.breakpoints(), x.breakpoints());
    let m = ts.len();
    let mut best = 0.0f64;
    for coord in 0..h.dim() {
        let hv: Vec<f64> = ts.iter().map(|&s| h.at(s)[coord]).collect();
        let xv: Vec<f64> = ts.iter().map(|&s| x.at(s)[coord]).collect();
        for b in 1..m.saturating_sub(1) {
            // widest reach of c, attained with a = b - 1
            let mut c = b;
            while c + 1 < m && ts[c + 1] - ts[b] < delta {
                c += 1;
            }
            if c == b {
                continue;
            }
            let mut run = vec![0.0f64; c + 1];
            for cc in b + 1..=c {
                run[cc] = run[cc - 1].max((xv[b] - xv[cc]).abs());
            }
            for a in (0..b).rev() {
                while c > b && ts[c] - ts[a + 1] >= delta {
                    c -= 1;
                }
                if c == b {
                    break;
                }
                best = best.max((hv[a] - hv[b]).abs().min(run[c]));
            }
        }
    }
    Ok(best)
}

/// `N_δ^T(x)`: the largest `n` with `0 = t_1 <= t_2 <= … <= t_{2n} = T` and
/// `|x(t_{2i}) - x(t_{2i-1})| >= δ` for every `i`.
///
/// The first pair starts at 0 and the last ends at `T`. Greedily closing each pair at
/// the earliest possible segment maximises the number of pairs fitting before any given
/// point (an exchange argument), so the count is `1 + #{k : e_k <= I*}` where `e_k` are
/// the greedy ends and `I*` is the latest segment from which `x(T)` is `δ` away.
pub fn increment_count(x: &StepPath, delta: f64, t: f64) -> Result<usize> {
    if !(delta > 0.0) {
        return Err(bad("delta must be positive"));
    }
    let x = x.restrict(t)?;
    let n = x.num_segments();
    let v: Vec<&[f64]> = (0..n).map(|i| x.value(i)).collect();
    let last = n - 1;
    let Some(istar) = (0..n).rev().find(|&i| dist(v[last], v[i]) >= delta) else {
        return Ok(0);
    };
    let mut count = 1;
    // e_1: first segment δ away from x(0)
    let mut e = match (1..n).find(|&j| dist(v[j], v[0]) >= delta) {
        Some(j) => j,
        None => return Ok(count),
    };
    while e <= istar {
        count += 1;
        let start = e;
        let mut next = None;
        if v[0].len() == 1 {
            let (mut mx, mut mn) = (v[start][0], v[start][0]);
            for (j, vj) in v.iter().enumerate().skip(start + 1) {
                if vj[0] - mn >= delta || mx - vj[0] >= delta {
                    next = Some(j);
                    break;
                }
                mx = mx.max(vj[0]);
                mn = mn.min(vj[0]);
            }
        } else {
            next = (start + 1..n).find(|&j| (start..j).any(|i| dist(v[j], v[i]) >= delta));
        }
        match next {
            Some(j) => e = j,
            None => break,
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(h: f64, t: &[f64], v: &[f64]) -> StepPath {
        StepPath::scalar(h, t.to_vec(), v.to_vec()).unwrap()
    }

    fn ind(a: f64, c: f64) -> StepPath {
        sc(2.0, &[0.0, a], &[0.0, c])
    }

    #[test]
    fn uniform_examples() {
        let z = StepPath::zero(1, 2.0).unwrap();
        assert_eq!(uniform_distance(&ind(1.0, 1.0), &z, 2.0).unwrap(), 1.0);
        let xn = sc(2.0, &[0.0, 0.5, 1.0], &[0.0, 0.25, 0.75]);
        let x = sc(2.0, &[0.0, 1.0], &[0.0, 0.75]);
        assert_eq!(uniform_distance(&xn, &x, 2.0).unwrap(), 0.25);
    }

    #[test]
    fn j1_examples() {
        let o = MetricOptions::default();
        let d = j1_distance(&ind(1.0, 1.0), &ind(1.1, 1.0), 2.0, &o).unwrap();
        assert!((d - 0.1).abs() < 1e-15, "{d}");
        assert_eq!(j1_distance(&ind(1.0, 1.0), &ind(1.0, 0.5), 2.0, &o).unwrap(), 0.5);
        assert_eq!(j1_distance(&ind(1.0, 1.0), &ind(1.0, 1.0), 2.0, &o).unwrap(), 0.0);
        let g = MetricOptions {
            mode: Mode::UpperBound,
            ..o
        };
        let u = j1_distance(&ind(1.0, 1.0), &ind(1.1, 1.0), 2.0, &g).unwrap();
        assert!(u >= 0.1 - 1e-15 && u < 0.1 + 1e-5, "{u}");
    }

    #[test]
    fn j1_time_changes_fix_the_endpoints() {
        // λ(0) = 0, so the initial mismatch survives however close the jump is to 0
        let o = MetricOptions::default();
        let a = sc(1.0, &[0.0, 0.1], &[0.0, 1.0]);
        let b = StepPath::constant(1.0, &[1.0]).unwrap();
        assert_eq!(j1_distance(&a, &b, 1.0, &o).unwrap(), 1.0);
        // a jump at T stays at T
        let c = sc(1.0, &[0.0, 1.0], &[0.0, 1.0]);
        let d = sc(1.0, &[0.0, 0.75], &[0.0, 1.0]);
        assert_eq!(j1_distance(&c, &d, 1.0, &o).unwrap(), 1.0);
        let e = sc(1.0, &[0.0, 0.5], &[0.0, 1.0]);
        assert_eq!(j1_distance(&d, &e, 1.0, &o).unwrap(), 0.25);
    }

    #[test]
    fn m1_examples() {
        let o = MetricOptions::default();
        let x = ind(1.0, 1.0);
        assert_eq!(m1_distance(&x, &x, 2.0, &o).unwrap(), 0.0);
        for n in [4.0, 16.0, 64.0] {
            let xn = sc(2.0, &[0.0, 1.0 - 1.0 / n, 1.0], &[0.0, 0.5, 1.0]);
            let d = m1_distance(&x, &xn, 2.0, &o).unwrap();
            assert!(d <= 1.0 / n + 1e-6, "n={n}: {d}");
        }
        // a pure value gap cannot be hidden by reparametrisation
        let d = m1_distance(&ind(1.0, 1.0), &ind(1.0, 0.5), 2.0, &o).unwrap();
        assert!((d - 0.5).abs() <= 1e-6, "{d}");
        let c0 = StepPath::zero(1, 2.0).unwrap();
        let c1 = StepPath::constant(2.0, &[1.0]).unwrap();
        assert!((m1_distance(&c0, &c1, 2.0, &o).unwrap() - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn halfline_examples() {
        let o = MetricOptions::default();
        let z = StepPath::zero(1, 1.0).unwrap();
        let one = StepPath::constant(1.0, &[1.0]).unwrap();
        assert!((halfline_distance(&z, &one, &o).unwrap() - 1.0).abs() < 1e-3);
        assert_eq!(halfline_distance(&one, &one, &o).unwrap(), 0.0);
        let l2 = std::f64::consts::LN_2;
        let y = sc(1.0, &[0.0, l2], &[0.0, 1.0]);
        assert!((halfline_distance(&z, &y, &o).unwrap() - 0.5).abs() < 2e-3);
    }

    #[test]
    fn moduli_examples() {
        // alternating path, n = 2
        let alt = sc(1.0, &[0.0, 0.25, 0.5, 0.75, 1.0], &[0.0, -0.5, 0.0, -0.5, 0.0]);
        assert_eq!(w_prime(&alt, 0.125, 1.0).unwrap(), 0.0);
        assert_eq!(w_prime(&alt, 0.3, 1.0).unwrap(), 0.5);
        let c = StepPath::constant(1.0, &[3.0]).unwrap();
        assert_eq!(w_prime(&c, 0.5, 1.0).unwrap(), 0.0);
        assert_eq!(w_dprime(&c, 0.5, 1.0).unwrap(), 0.0);
        let stair = sc(1.0, &[0.0, 0.3, 0.5, 0.9], &[0.0, 1.0, 2.0, 4.0]);
        // middle term vanishes; v̄ at 0 sees [0, 0.05] only
        assert_eq!(w_dprime(&stair, 0.05, 1.0).unwrap(), 0.0);
        assert_eq!(w_dprime(&alt, 0.2, 1.0).unwrap(), 0.5);
        assert!(w_prime(&alt, 2.0, 1.0).is_err());
    }

    #[test]
    fn consecutive_increment_examples() {
        let n = 8.0;
        let xn = sc(2.0, &[0.0, 1.0 - 2.0 / n, 1.0], &[0.0, 0.25, 0.75]);
        let yn = sc(2.0, &[0.0, 1.0 - 1.0 / n, 1.0], &[0.0, 0.5, 1.0]);
        assert_eq!(consecutive_increment(&xn, &yn, 2.0 / n, 2.0).unwrap(), 0.25);
        let c = StepPath::constant(2.0, &[1.0]).unwrap();
        assert_eq!(consecutive_increment(&c, &yn, 1.0, 2.0).unwrap(), 0.0);
        let h = sc(2.0, &[0.0, 0.2], &[0.0, 1.0]);
        let x = sc(2.0, &[0.0, 1.5], &[0.0, 1.0]);
        assert_eq!(consecutive_increment(&h, &x, 1.0, 2.0).unwrap(), 0.0);
        assert_eq!(consecutive_increment(&h, &x, 1.31, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn increment_count_examples() {
        assert_eq!(increment_count(&ind(1.0, 1.0), 0.5, 2.0).unwrap(), 1);
        let alt = sc(1.0, &[0.0, 0.25, 0.5, 0.75, 1.0], &[0.0, -0.5, 0.0, -0.5, 0.0]);
        assert_eq!(increment_count(&alt, 0.5, 1.0).unwrap(), 4);
        assert_eq!(increment_count(&StepPath::zero(1, 1.0).unwrap(), 0.5, 1.0).unwrap(), 0);
    }
}
