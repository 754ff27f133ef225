//! Finite piecewise-constant càdlàg paths and their pathwise functionals.
//!
//! A [`StepPath`] on `[0, T]` in `d` dimensions is stored as strictly increasing
//! breakpoints `0 = t_0 < t_1 < … < t_k <= T` and one value vector per segment;
//! `values[i]` is held on `[t_i, t_{i+1})`, the last segment extending to `T`
//! (closed at `T`). A breakpoint equal to `T` is allowed and encodes a jump at
//! the horizon. Left limits follow the convention `x(0-) = x(0)`.

use serde::{Deserialize, Serialize};

use crate::error::{bad, Error, Result};

/// Which one-sided value to read at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Euclidean norm.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Euclidean distance.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Piecewise-constant càdlàg path on `[0, horizon]` with values in `R^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathFile", into = "PathFile")]
pub struct StepPath {
    dim: usize,
    horizon: f64,
    times: Vec<f64>,
    // segment-major, `times.len() * dim` entries
    values: Vec<f64>,
}

/// On-disk JSON layout of a [`StepPath`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathFile {
    pub dim: usize,
    pub horizon: f64,
    pub breakpoints: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl TryFrom<PathFile> for StepPath {
    type Error = Error;
    fn try_from(f: PathFile) -> Result<Self> {
        StepPath::new(f.dim, f.horizon, f.breakpoints, f.values)
    }
}

impl From<StepPath> for PathFile {
    fn from(p: StepPath) -> Self {
        let values = p.values.chunks(p.dim).map(|c| c.to_vec()).collect();
        PathFile {
            dim: p.dim,
            horizon: p.horizon,
            breakpoints: p.times,
            values,
        }
    }
}

/// A jump `Δx(time) = x(time) - x(time-)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: f64,
    pub delta: Vec<f64>,
}

/// Total variation over a window, per coordinate and summed over coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalVariation {
    pub per_coordinate: Vec<f64>,
    pub total: f64,
}

impl StepPath {
    /// Validated constructor. Zero-size jumps are kept; see [`StepPath::normalize`].
    pub fn new(dim: usize, horizon: f64, breakpoints: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != breakpoints.len() {
            return Err(Error::DimensionMismatch {
                expected: breakpoints.len(),
                found: values.len(),
            });
        }
        let mut flat = Vec::with_capacity(values.len() * dim);
        for v in &values {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            flat.extend_from_slice(v);
        }
        Self::from_flat(dim, horizon, breakpoints, flat)
    }

    /// Constructor taking segment values in one flat, segment-major vector.
    pub fn from_flat(dim: usize, horizon: f64, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(bad("dimension must be positive"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(bad(format!("horizon must be finite and positive, got {horizon}")));
        }
        if times.is_empty() {
            return Err(bad("at least one breakpoint (t0 = 0) is required"));
        }
        if times[0] != 0.0 {
            return Err(bad(format!("first breakpoint must be 0, got {}", times[0])));
        }
        for i in 1..times.len() {
            // negated comparison also rejects NaN
            if !(times[i] > times[i - 1]) {
                return Err(Error::NonMonotoneTimes { index: i, time: times[i] });
            }
        }
        let last = times[times.len() - 1];
        if last > horizon {
            return Err(Error::HorizonExceeded { time: last, horizon });
        }
        if values.len() != times.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: times.len() * dim,
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { segment: i / dim });
        }
        Ok(StepPath {
            dim,
            horizon,
            times,
            values,
        })
    }

    /// One-dimensional path from scalar segment values.
    pub fn scalar(horizon: f64, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::from_flat(1, horizon, times, values)
    }

    pub fn constant(horizon: f64, value: &[f64]) -> Result<Self> {
        Self::from_flat(value.len(), horizon, vec![0.0], value.to_vec())
    }

    pub fn zero(dim: usize, horizon: f64) -> Result<Self> {
        Self::from_flat(dim, horizon, vec![0.0], vec![0.0; dim])
    }

    /// `c · 1_{[a, T]}` (or `1_{[a, b)}` scaled, when `b < T`) in one dimension.
    pub fn indicator(horizon: f64, a: f64, b: Option<f64>, c: f64) -> Result<Self> {
        match (a > 0.0, b) {
            (true, None) => Self::scalar(horizon, vec![0.0, a], vec![0.0, c]),
            (false, None) => Self::scalar(horizon, vec![0.0], vec![c]),
            (true, Some(b)) => Self::scalar(horizon, vec![0.0, a, b], vec![0.0, c, 0.0]),
            (false, Some(b)) => Self::scalar(horizon, vec![0.0, b], vec![c, 0.0]),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.times
    }

    pub fn num_segments(&self) -> usize {
        self.times.len()
    }

    /// Value held on segment `i`.
    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values_flat(&self) -> &[f64] {
        &self.values
    }

    /// Segment values as nested vectors.
    pub fn values(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.dim).map(|c| c.to_vec()).collect()
    }

    pub fn start_value(&self) -> &[f64] {
        self.value(0)
    }

    pub fn end_value(&self) -> &[f64] {
        self.value(self.times.len() - 1)
    }

    /// Index of the segment containing `t` (right-continuous reading). `t` is clamped to `[0, T]`.
    pub fn segment_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).max(1) - 1
    }

    /// Right-continuous value at `t` without bounds checks beyond clamping.
    pub fn at(&self, t: f64) -> &[f64] {
        self.value(self.segment_at(t))
    }

    /// Left limit `x(t-)`, with `x(0-) = x(0)`.
    pub fn left_at(&self, t: f64) -> &[f64] {
        if t <= 0.0 {
            return self.value(0);
        }
        let i = self.times.partition_point(|&s| s < t);
        self.value(i.max(1) - 1)
    }

    /// Value at `t` from the requested side.
    pub fn evaluate(&self, t: f64, side: Side) -> Result<Vec<f64>> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::OutOfHorizon { t, horizon: self.horizon });
        }
        Ok(match side {
            Side::Right => self.at(t).to_vec(),
            Side::Left => self.left_at(t).to_vec(),
        })
    }

    /// Nonzero jumps in time order.
    pub fn jumps(&self) -> Vec<Jump> {
        let mut out = Vec::new();
        for i in 1..self.times.len() {
            let a = self.value(i - 1);
            let b = self.value(i);
            if a != b {
                out.push(Jump {
                    time: self.times[i],
                    delta: b.iter().zip(a).map(|(x, y)| x - y).collect(),
                });
            }
        }
        out
    }

    /// Number of nonzero jumps.
    pub fn jump_count(&self) -> usize {
        (1..self.times.len()).filter(|&i| self.value(i - 1) != self.value(i)).count()
    }

    /// Total variation of the increments in `(a, b]`.
    pub fn total_variation(&self, a: f64, b: f64) -> Result<TotalVariation> {
        if !(0.0 <= a && a <= b && b <= self.horizon) {
            return Err(Error::OutOfHorizon {
                t: if a < 0.0 || a > b { a } else { b },
                horizon: self.horizon,
            });
        }
        let mut per = vec![0.0; self.dim];
        for i in 1..self.times.len() {
            let t = self.times[i];
            if t <= a {
                continue;
            }
            if t > b {
                break;
            }
            let (p, q) = (self.value(i - 1), self.value(i));
            for c in 0..self.dim {
                per[c] += (q[c] - p[c]).abs();
            }
        }
        let total = per.iter().sum();
        Ok(TotalVariation {
            per_coordinate: per,
            total,
        })
    }

    /// `sup_{0<=t<=T} |x(t)|` (Euclidean), for `T` clamped to the horizon.
    pub fn sup_norm(&self, t: f64) -> f64 {
        let end = self.segment_at(t.min(self.horizon));
        (0..=end).map(|i| norm(self.value(i))).fold(0.0, f64::max)
    }

    /// Jump-truncation `J_δ(x)`: the pure-jump path with jumps `((1 - δ/|Δx|) ∨ 0) Δx`, starting at 0.
    /// `δ = +∞` yields the zero path.
    pub fn truncate_jumps(&self, delta: f64) -> Result<StepPath> {
        self.truncation_parts(delta).map(|(j, _)| j)
    }

    /// The companion `x - J_δ(x)`, whose jumps all have size at most `δ`.
    pub fn truncation_remainder(&self, delta: f64) -> Result<StepPath> {
        self.truncation_parts(delta).map(|(_, r)| r)
    }

    fn truncation_parts(&self, delta: f64) -> Result<(StepPath, StepPath)> {
        if !(delta > 0.0) {
            return Err(bad(format!("truncation level must be positive, got {delta}")));
        }
        let d = self.dim;
        let mut jt = vec![0.0];
        let mut jv = vec![0.0; d];
        let mut rt = vec![0.0];
        let mut rv = self.value(0).to_vec();
        let mut jcur = vec![0.0; d];
        let mut rcur = self.value(0).to_vec();
        for i in 1..self.times.len() {
            let (p, q) = (self.value(i - 1), self.value(i));
            let dx: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
            let size = norm(&dx);
            if size == 0.0 {
                continue;
            }
            let keep = if delta.is_finite() { (1.0 - delta / size).max(0.0) } else { 0.0 };
            if keep > 0.0 {
                for c in 0..d {
                    jcur[c] += keep * dx[c];
                }
                jt.push(self.times[i]);
                jv.extend_from_slice(&jcur);
            }
            let rest = 1.0 - keep;
            if rest > 0.0 {
                for c in 0..d {
                    rcur[c] += rest * dx[c];
                }
                rt.push(self.times[i]);
                rv.extend_from_slice(&rcur);
            }
        }
        Ok((
            StepPath::from_flat(d, self.horizon, jt, jv)?,
            StepPath::from_flat(d, self.horizon, rt, rv)?,
        ))
    }

    /// Drops zero-size breakpoints.
    pub fn normalize(&self) -> StepPath {
        let d = self.dim;
        let mut t = vec![0.0];
        let mut v = self.value(0).to_vec();
        for i in 1..self.times.len() {
            if self.value(i) != &v[v.len() - d..] {
                t.push(self.times[i]);
                v.extend_from_slice(self.value(i));
            }
        }
        StepPath {
            dim: d,
            horizon: self.horizon,
            times: t,
            values: v,
        }
    }

    /// Restriction to `[0, t]`.
    pub fn restrict(&self, t: f64) -> Result<StepPath> {
        if !(t > 0.0 && t <= self.horizon) {
            return Err(Error::OutOfHorizon { t, horizon: self.horizon });
        }
        let k = self.times.partition_point(|&s| s <= t);
        Ok(StepPath {
            dim: self.dim,
            horizon: t,
            times: self.times[..k].to_vec(),
            values: self.values[..k * self.dim].to_vec(),
        })
    }

    /// Constant extension to a longer horizon.
    pub fn extend(&self, t: f64) -> Result<StepPath> {
        if !(t >= self.horizon && t.is_finite()) {
            return Err(bad(format!("cannot extend horizon {} to {t}", self.horizon)));
        }
        let mut p = self.clone();
        p.horizon = t;
        Ok(p)
    }

    /// Restriction or constant extension, whichever `t` calls for.
    pub fn on_horizon(&self, t: f64) -> Result<StepPath> {
        if t <= self.horizon {
            self.restrict(t)
        } else {
            self.extend(t)
        }
    }

    /// Coordinate `i` as a one-dimensional path.
    pub fn component(&self, i: usize) -> Result<StepPath> {
        if i >= self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: i + 1,
            });
        }
        let v = self.values.iter().skip(i).step_by(self.dim).copied().collect();
        Ok(StepPath {
            dim: 1,
            horizon: self.horizon,
            times: self.times.clone(),
            values: v,
        })
    }

    /// `c · x`.
    pub fn scale(&self, c: f64) -> StepPath {
        let mut p = self.clone();
        p.values.iter_mut().for_each(|v| *v *= c);
        p
    }

    /// Pointwise combination on the merged breakpoint grid. Horizons must agree.
    pub fn zip_with(&self, other: &StepPath, out_dim: usize, f: impl Fn(&[f64], &[f64], &mut [f64])) -> Result<StepPath> {
        if self.horizon != other.horizon {
            return Err(bad(format!(
                "horizons differ ({} vs {}); extend one path first",
                self.horizon, other.horizon
            )));
        }
        let times = merge_times(&self.times, &other.times);
        let mut values = vec![0.0; times.len() * out_dim];
        let (mut i, mut j) = (0, 0);
        for (k, &t) in times.iter().enumerate() {
            while i + 1 < self.times.len() && self.times[i + 1] <= t {
                i += 1;
            }
            while j + 1 < other.times.len() && other.times[j + 1] <= t {
                j += 1;
            }
            f(self.value(i), other.value(j), &mut values[k * out_dim..(k + 1) * out_dim]);
        }
        StepPath::from_flat(out_dim, self.horizon, times, values)
    }

    pub fn add(&self, other: &StepPath) -> Result<StepPath> {
        self.check_dim(other)?;
        self.zip_with(other, self.dim, |a, b, o| {
            for c in 0..o.len() {
                o[c] = a[c] + b[c];
            }
        })
    }

    pub fn sub(&self, other: &StepPath) -> Result<StepPath> {
        self.check_dim(other)?;
        self.zip_with(other, self.dim, |a, b, o| {
            for c in 0..o.len() {
                o[c] = a[c] - b[c];
            }
        })
    }

    pub(crate) fn check_dim(&self, other: &StepPath) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// Amalgamated path `(x_1, …, x_m)` in `R^{d_1 + … + d_m}`.
    pub fn stack(parts: &[&StepPath]) -> Result<StepPath> {
        let first = parts.first().ok_or_else(|| bad("nothing to stack"))?;
        let mut acc = (*first).clone();
        for p in &parts[1..] {
            let (da, db) = (acc.dim, p.dim);
            acc = acc.zip_with(p, da + db, |a, b, o| {
                o[..da].copy_from_slice(a);
                o[da..].copy_from_slice(b);
            })?;
        }
        Ok(acc)
    }

    /// Completed graph as an ordered polyline in value × time space.
    pub fn completed_graph(&self) -> GraphPolyline {
        let d = self.dim;
        let mut g = GraphPolyline {
            dim: d,
            times: Vec::with_capacity(2 * self.times.len()),
            values: Vec::with_capacity(2 * self.values.len()),
        };
        g.push(self.value(0), 0.0);
        for i in 1..self.times.len() {
            g.push(self.value(i - 1), self.times[i]);
            g.push(self.value(i), self.times[i]);
        }
        g.push(self.end_value(), self.horizon);
        g
    }

    /// Whether `(u, r)` lies on the completed graph, up to `tol`.
    pub fn graph_contains(&self, u: &[f64], r: f64, tol: f64) -> bool {
        if u.len() != self.dim || !(r >= -tol && r <= self.horizon + tol) {
            return false;
        }
        let r = r.clamp(0.0, self.horizon);
        let right = self.at(r);
        let left = self.left_at(r);
        if left == right {
            return dist(u, right) <= tol;
        }
        // u must equal a·left + (1-a)·right for one common a in [0, 1]
        let dx: Vec<f64> = left.iter().zip(right).map(|(l, q)| l - q).collect();
        let nn: f64 = dx.iter().map(|v| v * v).sum();
        let a = (u.iter().zip(right).zip(&dx).map(|((x, q), e)| (x - q) * e).sum::<f64>() / nn).clamp(0.0, 1.0);
        let proj: Vec<f64> = right.iter().zip(&dx).map(|(q, e)| q + a * e).collect();
        dist(u, &proj) <= tol
    }

    /// Arclength-uniform parametric representation with `refinement + 1` samples,
    /// every vertex of the completed graph among them.
    pub fn param_rep(&self, refinement: usize) -> Result<ParamRep> {
        let g = self.completed_graph();
        let nv = g.len();
        if refinement < nv {
            return Err(Error::RefinementTooSmall {
                requested: refinement,
                needed: nv,
            });
        }
        let d = self.dim;
        let edges = nv - 1;
        let len: Vec<f64> = (0..edges)
            .map(|e| {
                let (a, ta) = g.vertex(e);
                let (b, tb) = g.vertex(e + 1);
                (dist(a, b).powi(2) + (tb - ta).powi(2)).sqrt()
            })
            .collect();
        let total: f64 = len.iter().sum();
        // distribute the non-vertex samples over edges by largest remainder
        let extra = refinement + 1 - nv;
        let mut alloc: Vec<usize> = len.iter().map(|l| ((l / total) * extra as f64).floor() as usize).collect();
        let mut given: usize = alloc.iter().sum();
        let mut order: Vec<usize> = (0..edges).collect();
        let rem = |e: usize| (len[e] / total) * extra as f64 - alloc[e] as f64;
        order.sort_by(|&a, &b| rem(b).partial_cmp(&rem(a)).unwrap().then(a.cmp(&b)));
        let mut k = 0;
        while given < extra {
            alloc[order[k % edges]] += 1;
            given += 1;
            k += 1;
        }
        let mut z = Vec::with_capacity(refinement + 1);
        let mut u = Vec::with_capacity((refinement + 1) * d);
        let mut r = Vec::with_capacity(refinement + 1);
        let mut s = 0.0;
        for e in 0..edges {
            let (a, ta) = g.vertex(e);
            let (b, tb) = g.vertex(e + 1);
            let m = alloc[e] + 1;
            for j in 0..m {
                let w = j as f64 / m as f64;
                z.push((s + w * len[e]) / total);
                if j == 0 {
                    u.extend_from_slice(a);
                    r.push(ta);
                } else {
                    u.extend(a.iter().zip(b).map(|(p, q)| p + w * (q - p)));
                    r.push(ta + w * (tb - ta));
                }
            }
            s += len[e];
        }
        let (a, ta) = g.vertex(nv - 1);
        z.push(1.0);
        u.extend_from_slice(a);
        r.push(ta);
        z[0] = 0.0;
        ParamRep::new(d, z, u, r)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("StepPath serialises")
    }

    pub fn from_json(s: &str) -> Result<StepPath> {
        let f: PathFile = serde_json::from_str(s).map_err(|e| bad(format!("invalid path JSON: {e}")))?;
        StepPath::try_from(f)
    }

    /// CSV with header `t,v1..vd`, one row per segment start.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|i| format!("v{i}")));
        w.write_record(&header).expect("in-memory write");
        for i in 0..self.times.len() {
            let mut row = vec![self.times[i].to_string()];
            row.extend(self.value(i).iter().map(|v| v.to_string()));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }

    /// Parses the CSV layout of [`StepPath::to_csv`]; the horizon is not part of the format.
    pub fn from_csv(s: &str, horizon: f64) -> Result<StepPath> {
        let mut rd = csv::Reader::from_reader(s.as_bytes());
        let headers = rd.headers().map_err(|e| bad(format!("invalid CSV header: {e}")))?.clone();
        if headers.is_empty() || &headers[0] != "t" {
            return Err(bad("CSV header must start with `t`"));
        }
        let dim = headers.len() - 1;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| bad(format!("invalid CSV row: {e}")))?;
            if rec.len() != dim + 1 {
                return Err(Error::DimensionMismatch {
                    expected: dim + 1,
                    found: rec.len(),
                });
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("bad number `{s}`: {e}")));
            times.push(parse(&rec[0])?);
            for c in 1..=dim {
                values.push(parse(&rec[c])?);
            }
        }
        StepPath::from_flat(dim, horizon, times, values)
    }
}

/// Sorted union of two breakpoint sequences.
pub fn merge_times(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let t = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        if i < a.len() && a[i] == t {
            i += 1;
        }
        if j < b.len() && b[j] == t {
            j += 1;
        }
        out.push(t);
    }
    out
}

/// Ordered vertices `(value, time)` of a completed graph. Consecutive duplicates
/// (zero-size jumps, a jump at the horizon) are dropped so every edge has positive length.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphPolyline {
    dim: usize,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl GraphPolyline {
    fn push(&mut self, v: &[f64], t: f64) {
        if let Some((lv, lt)) = self.last() {
            if lt == t && lv == v {
                return;
            }
        }
        self.times.push(t);
        self.values.extend_from_slice(v);
    }

    fn last(&self) -> Option<(&[f64], f64)> {
        (!self.times.is_empty()).then(|| self.vertex(self.times.len() - 1))
    }

    /// Builds a polyline from raw vertices (value dimension `dim`).
    pub fn from_vertices(dim: usize, vertices: &[(Vec<f64>, f64)]) -> GraphPolyline {
        let mut g = GraphPolyline {
            dim,
            times: vec![],
            values: vec![],
        };
        for (v, t) in vertices {
            g.push(v, *t);
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn vertex(&self, i: usize) -> (&[f64], f64) {
        (&self.values[i * self.dim..(i + 1) * self.dim], self.times[i])
    }

    pub fn vertices(&self) -> Vec<(Vec<f64>, f64)> {
        (0..self.len()).map(|i| (self.vertex(i).0.to_vec(), self.times[i])).collect()
    }
}

/// Sampled parametric representation `(u, r)` on a parameter grid `0 = z_0 < … < z_K = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRep {
    dim: usize,
    z: Vec<f64>,
    u: Vec<f64>,
    r: Vec<f64>,
}

impl ParamRep {
    pub fn new(dim: usize, z: Vec<f64>, u: Vec<f64>, r: Vec<f64>) -> Result<ParamRep> {
        if z.len() < 2 || r.len() != z.len() || u.len() != z.len() * dim {
            return Err(Error::InvalidRep("grid, u and r lengths disagree".into()));
        }
        if z[0] != 0.0 || z[z.len() - 1] != 1.0 || z.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidRep("parameter grid must increase strictly from 0 to 1".into()));
        }
        if r.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidRep("time component r must be nondecreasing".into()));
        }
        Ok(ParamRep { dim, z, u, r })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn grid(&self) -> &[f64] {
        &self.z
    }

    pub fn times(&self) -> &[f64] {
        &self.r
    }

    pub fn u(&self, j: usize) -> &[f64] {
        &self.u[j * self.dim..(j + 1) * self.dim]
    }

    /// Checks that every sample lies on the completed graph of `path` and that
    /// samples sharing a jump time move monotonically away from the left limit.
    pub fn check_against(&self, path: &StepPath, tol: f64) -> Result<()> {
        if path.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: path.dim(),
                found: self.dim,
            });
        }
        for j in 0..self.len() {
            if !path.graph_contains(self.u(j), self.r[j], tol) {
                return Err(Error::InvalidRep(format!(
                    "sample {j} = ({:?}, {}) is off the completed graph",
                    self.u(j),
                    self.r[j]
                )));
            }
            if j > 0 && self.r[j] == self.r[j - 1] {
                let left = path.left_at(self.r[j]);
                for c in 0..self.dim {
                    let a = (left[c] - self.u(j - 1)[c]).abs();
                    let b = (left[c] - self.u(j)[c]).abs();
                    if b + tol < a {
                        return Err(Error::InvalidRep(format!("order violated at sample {j}")));
                    }
                }
            }
        }
        Ok(())
    }
}
