//! Simple stochastic integrals of step paths, quadratic covariation, the
//! discretisation operators `I_ρ` with deterministic and adaptive partitions, and the
//! parametric representation of a simple integral built from one of `(h, z)`.
//!
//! Integrands always enter through their left limits: `∫_0^t h(s-) dz(s) = Σ_{s<=t} h(s-) Δz(s)`.

use serde::{Deserialize, Serialize};

use crate::error::{bad, Error, Result};
use crate::paths::{ParamRep, StepPath};

fn same_horizon(a: &StepPath, b: &StepPath) -> Result<()> {
    if a.horizon() != b.horizon() {
        return Err(bad(format!(
            "horizons differ ({} vs {}); extend one path first",
            a.horizon(),
            b.horizon()
        )));
    }
    Ok(())
}

/// Integrand coordinate paired with integrator coordinate `c`; a scalar integrand is shared.
fn integrand_dim_ok(h: &StepPath, z: &StepPath) -> Result<()> {
    if h.dim() != z.dim() && h.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: z.dim(),
            found: h.dim(),
        });
    }
    Ok(())
}

/// Componentwise simple integral as a path; breakpoints are those of `z`.
pub fn simple_integral_path(h: &StepPath, z: &StepPath) -> Result<StepPath> {
    integrand_dim_ok(h, z)?;
    same_horizon(h, z)?;
    let d = z.dim();
    let ts = z.breakpoints();
    let mut acc = vec![0.0; d];
    let mut values = Vec::with_capacity(ts.len() * d);
    values.extend_from_slice(&acc);
    for i in 1..ts.len() {
        let hl = h.left_at(ts[i]);
        let (p, q) = (z.value(i - 1), z.value(i));
        for c in 0..d {
            let hc = if hl.len() == 1 { hl[0] } else { hl[c] };
            acc[c] += hc * (q[c] - p[c]);
        }
        values.extend_from_slice(&acc);
    }
    StepPath::from_flat(d, z.horizon(), ts.to_vec(), values)
}

/// `∫_0^t h(s-) dz(s)`, componentwise.
pub fn simple_integral(h: &StepPath, z: &StepPath, t: f64) -> Result<Vec<f64>> {
    if !(0.0..=z.horizon()).contains(&t) {
        return Err(Error::OutOfHorizon { t, horizon: z.horizon() });
    }
    Ok(simple_integral_path(h, z)?.at(t).to_vec())
}

/// Dot-product reducer: `Σ_i ∫_0^t h_i(s-) dz_i(s)`.
pub fn dot_integral(h: &StepPath, z: &StepPath, t: f64) -> Result<f64> {
    Ok(simple_integral(h, z, t)?.iter().sum())
}

/// `[x, y]_t = Σ_{s<=t} Δx(s) Δy(s)` componentwise, as a pure-jump path from 0.
pub fn quad_covariation(x: &StepPath, y: &StepPath) -> Result<StepPath> {
    x.check_dim(y)?;
    same_horizon(x, y)?;
    let d = x.dim();
    let times = crate::paths::merge_times(x.breakpoints(), y.breakpoints());
    let mut acc = vec![0.0; d];
    let mut out_t = vec![0.0];
    let mut out_v = acc.clone();
    for &s in &times[1..] {
        let (xl, xr, yl, yr) = (x.left_at(s), x.at(s), y.left_at(s), y.at(s));
        let mut moved = false;
        for c in 0..d {
            let p = (xr[c] - xl[c]) * (yr[c] - yl[c]);
            if p != 0.0 {
                acc[c] += p;
                moved = true;
            }
        }
        if moved {
            out_t.push(s);
            out_v.extend_from_slice(&acc);
        }
    }
    StepPath::from_flat(d, x.horizon(), out_t, out_v)
}

/// How a partition was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    DeterministicGrid,
    Adaptive,
}

/// Strictly increasing times starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    times: Vec<f64>,
    kind: PartitionKind,
}

impl Partition {
    pub fn new(times: Vec<f64>, kind: PartitionKind) -> Result<Partition> {
        if times.first() != Some(&0.0) {
            return Err(bad("partition must start at 0"));
        }
        for i in 1..times.len() {
            if !(times[i] > times[i - 1]) {
                return Err(Error::NonMonotoneTimes { index: i, time: times[i] });
            }
        }
        Ok(Partition { times, kind })
    }

    /// `{0, T/m, 2T/m, …, T}`.
    pub fn uniform(horizon: f64, m: usize) -> Result<Partition> {
        if m == 0 || !(horizon > 0.0) {
            return Err(bad("uniform grid needs m >= 1 and a positive horizon"));
        }
        let times = (0..=m).map(|i| horizon * i as f64 / m as f64).collect();
        Partition::new(times, PartitionKind::DeterministicGrid)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    fn check_within(&self, horizon: f64) -> Result<()> {
        let last = self.times[self.times.len() - 1];
        if last > horizon {
            return Err(Error::HorizonExceeded { time: last, horizon });
        }
        Ok(())
    }
}

/// `I_ρ(x) = Σ x(s_i) 1_{[s_i, s_{i+1})}`.
pub fn discretize_grid(x: &StepPath, grid: &Partition) -> Result<StepPath> {
    grid.check_within(x.horizon())?;
    let mut v = Vec::with_capacity(grid.times.len() * x.dim());
    for &s in &grid.times {
        v.extend_from_slice(x.at(s));
    }
    StepPath::from_flat(x.dim(), x.horizon(), grid.times.clone(), v)
}

/// Refines `grid` so that within every cell `x` stays strictly within `eps` of its value at
/// the cell start: `τ_{i+1} = inf{s > τ_i : |x(s) - x(τ_i)| >= eps} ∧ t_k`, searched on the
/// breakpoints of `x` (exact for step paths). The span after the last grid point up to
/// the horizon is treated as one more cell.
pub fn adaptive_partition(x: &StepPath, grid: &Partition, eps: f64) -> Result<Partition> {
    if !(eps > 0.0) {
        return Err(bad("eps must be positive"));
    }
    grid.check_within(x.horizon())?;
    let bp = x.breakpoints();
    let g = &grid.times;
    let mut out = Vec::with_capacity(g.len());
    for k in 0..g.len() {
        let start = g[k];
        let (end, closed) = match g.get(k + 1) {
            Some(&e) => (e, false),
            None => (x.horizon(), true),
        };
        out.push(start);
        let mut tau = start;
        let mut i = bp.partition_point(|&s| s <= tau);
        while i < bp.len() && (bp[i] < end || (closed && bp[i] <= end)) {
            if crate::paths::dist(x.value(i), x.at(tau)) >= eps {
                tau = bp[i];
                out.push(tau);
            }
            i += 1;
        }
    }
    Partition::new(out, PartitionKind::Adaptive)
}

/// `|∫ I_ρ(h)_{s-} dx_s − ∫ I_{ρ^ε(h)}(h)_{s-} dx_s|*_T` with `ρ^ε(h)` the adaptive refinement of `grid`.
pub fn discretization_gap(h: &StepPath, x: &StepPath, grid: &Partition, eps: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= h.horizon().min(x.horizon())) {
        return Err(Error::OutOfHorizon {
            t,
            horizon: h.horizon().min(x.horizon()),
        });
    }
    let (h, x) = (h.restrict(t)?, x.restrict(t)?);
    let coarse_times: Vec<f64> = grid.times.iter().copied().filter(|&s| s <= t).collect();
    let coarse = Partition::new(coarse_times, grid.kind)?;
    let fine = adaptive_partition(&h, &coarse, eps)?;
    let a = simple_integral_path(&discretize_grid(&h, &coarse)?, &x)?;
    let b = simple_integral_path(&discretize_grid(&h, &fine)?, &x)?;
    crate::metrics::uniform_distance(&a, &b, t)
}

/// Extends a parametric representation `(u, r)` of the amalgamated path `(h, z)` by the
/// component `ũ(z) = Σ_i u⁽¹⁾(ẑ_{i+1}) [u⁽²⁾(z ∧ z̄_{i+1}) − u⁽²⁾(z ∧ z̄_i)]` of the integral
/// `∫ h(s-) dz(s)`, where `t_1 = 0 < t_2 < … < t_{k+1} = T` are the jump times of `h`
/// framed by 0 and `T`, and `ẑ_i`, `z̄_i` are the first and last samples with `r = t_i`.
///
/// Works on the sample grid: every `t_i` must be hit by some sample. Returns the
/// `3d`-dimensional representation `((u⁽¹⁾, u⁽²⁾, ũ), r)`.
pub fn integral_param_rep(rep: &ParamRep, h_breaks: &[f64]) -> Result<ParamRep> {
    if rep.dim() % 2 != 0 {
        return Err(Error::InvalidRep(format!("dimension {} is not of the form 2d", rep.dim())));
    }
    let d = rep.dim() / 2;
    let r = rep.times();
    let n = r.len();
    let horizon = r[n - 1];
    let mut ts = vec![0.0];
    ts.extend(h_breaks.iter().copied().filter(|&t| t > 0.0 && t < horizon));
    ts.push(horizon);
    if ts.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidRep("jump times must increase strictly inside (0, T)".into()));
    }
    let mut first = Vec::with_capacity(ts.len());
    let mut last = Vec::with_capacity(ts.len());
    for &t in &ts {
        let lo = r.partition_point(|&s| s < t);
        let hi = r.partition_point(|&s| s <= t);
        if lo == hi {
            return Err(Error::InvalidRep(format!("no sample with r = {t}")));
        }
        first.push(lo);
        last.push(hi - 1);
    }
    let u1 = |j: usize| &rep.u(j)[..d];
    let u2 = |j: usize| &rep.u(j)[d..];
    let mut u = Vec::with_capacity(n * 3 * d);
    for j in 0..n {
        let mut acc = vec![0.0; d];
        for i in 0..ts.len() - 1 {
            if last[i] >= j {
                break;
            }
            let w = u1(first[i + 1]);
            let (a, b) = (u2(j.min(last[i + 1])), u2(j.min(last[i])));
            for c in 0..d {
                acc[c] += w[c] * (a[c] - b[c]);
            }
        }
        u.extend_from_slice(rep.u(j));
        u.extend_from_slice(&acc);
    }
    ParamRep::new(3 * d, rep.grid().to_vec(), u, r.to_vec())
}
