//! Experiment runner and hypothesis diagnostics.
//!
//! An [`ExperimentSpec`] names a construction, a grid of scale indices `n`, a replica
//! count and a list of [`Functional`]s. Every `(n, replica)` pair draws from its own
//! counter-based stream, replicas run on a rayon pool capped by `SKOLAB_THREADS`, and the
//! per-replica values are kept (keyed by replica index) so that reports over disjoint
//! replica ranges merge exactly. Summaries carry type-7 quantiles, an order-statistic
//! CI for the median and Wilson 95% intervals for indicator functionals.
//!
//! The diagnostics (good decompositions, vanishing consecutive increments, the
//! integrand conditions, restart increments, tightness moduli) are thin spec builders
//! over the same engine.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{bad, Error, Result};
use crate::integrals::{dot_integral, quad_covariation};
use crate::metrics::{self, BaseMetric, MetricOptions};
use crate::paths::{norm, StepPath};
use crate::processes::{self, Coupling, CtrwConfig, ExplodingParams, InnovationModel, Seed, Waits};

/// 97.5% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Quantile levels reported for every cell.
pub const LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Worker count: `SKOLAB_THREADS` if set to a positive integer, else all cores.
pub fn thread_count() -> usize {
    std::env::var("SKOLAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|v| v.get()).unwrap_or(1))
}

/// A construction id with its JSON parameters (the scale index comes from the grid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub id: String,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl Construction {
    pub fn new(id: &str, params: serde_json::Value) -> Construction {
        Construction {
            id: id.to_string(),
            params: match params {
                serde_json::Value::Object(m) => m,
                _ => serde_json::Map::new(),
            },
        }
    }

    fn parse<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(serde_json::Value::Object(self.params.clone()))
            .map_err(|e| bad(format!("parameters of {}: {e}", self.id)))
    }
}

/// Construction ids understood by [`realize`].
pub const CONSTRUCTIONS: [&str; 13] = [
    "constant",
    "alternating",
    "sawtooth",
    "zigzag",
    "fig6",
    "moving_average",
    "ctrw",
    "single_jump_martingale",
    "exploding_pair",
    "crossing_pair",
    "inverse_subordinator",
    "monotone_staircase",
    "separated_jumps",
];

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantParams {
    #[serde(default)]
    value: f64,
    #[serde(default = "dim1")]
    dim: usize,
    #[serde(default = "one")]
    horizon: f64,
}

fn dim1() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WalkParams {
    alpha: f64,
    #[serde(default = "unit_coeffs")]
    coeffs: Vec<f64>,
    #[serde(default = "yes")]
    normalize: bool,
    #[serde(default = "one")]
    horizon: f64,
    innovations: InnovationModel,
    #[serde(default = "unit_waits")]
    waits: Waits,
    #[serde(default)]
    coupling: Coupling,
}

fn unit_coeffs() -> Vec<f64> {
    vec![1.0]
}

fn unit_waits() -> Waits {
    Waits::Unit
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SingleJumpParams {
    #[serde(default = "one")]
    horizon: f64,
    #[serde(default = "half")]
    epsilon: f64,
    /// Grid points per oscillation of the compensator; 0 samples only at the
    /// evaluation times requested by the functionals (exact there).
    #[serde(default = "sixteen")]
    per_oscillation: usize,
}

fn half() -> f64 {
    0.5
}

fn sixteen() -> usize {
    16
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplodingConfig {
    #[serde(default = "alpha_default")]
    alpha: f64,
    #[serde(default = "eps_default")]
    epsilon: f64,
    #[serde(default = "one")]
    x_min: f64,
    #[serde(default = "one")]
    horizon: f64,
    #[serde(default = "one")]
    c0: f64,
    #[serde(default = "one")]
    c1: f64,
}

fn alpha_default() -> f64 {
    1.5
}

fn eps_default() -> f64 {
    0.25
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HorizonParams {
    #[serde(default = "one")]
    horizon: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubordinatorParams {
    beta: f64,
    #[serde(default = "one")]
    horizon: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeparatedParams {
    #[serde(default = "quarter")]
    s0: f64,
    #[serde(default = "one")]
    horizon: f64,
}

fn quarter() -> f64 {
    0.25
}

/// Martingale / finite-variation split of a realization.
#[derive(Debug, Clone, PartialEq)]
pub enum Parts {
    /// Not available (e.g. correlated walks).
    Unknown,
    /// `M = 0`, `A = x`, no drift.
    FiniteVariation,
    /// `x` is itself the martingale part.
    Martingale,
    /// `(M, A, drift)` with `x = M + A`.
    Explicit(StepPath, StepPath, StepPath),
}

/// One draw of a construction at scale `n`, with whatever internals it exposes.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub h: Option<StepPath>,
    pub x: StepPath,
    /// Jump epochs of `x` (renewal epochs for walks).
    pub epochs: Option<Vec<f64>>,
    pub parts: Parts,
    /// Limits `(h, x)` of deterministic families.
    pub limit: Option<(StepPath, StepPath)>,
}

impl Realization {
    fn plain(h: Option<StepPath>, x: StepPath) -> Realization {
        let ts = x.breakpoints();
        let epochs = (1..ts.len()).filter(|&i| x.value(i) != x.value(i - 1)).map(|i| ts[i]).collect();
        Realization {
            h,
            x,
            epochs: Some(epochs),
            parts: Parts::FiniteVariation,
            limit: None,
        }
    }

    fn zero(&self) -> Result<StepPath> {
        StepPath::zero(self.x.dim(), self.x.horizon())
    }

    /// `(M, A, drift)`.
    pub fn decomposition(&self) -> Result<(StepPath, StepPath, StepPath)> {
        match &self.parts {
            Parts::Unknown => Err(Error::MissingInternals("construction has no decomposition".into())),
            Parts::FiniteVariation => Ok((self.zero()?, self.x.clone(), self.zero()?)),
            Parts::Martingale => Ok((self.x.clone(), self.zero()?, self.zero()?)),
            Parts::Explicit(m, a, d) => Ok((m.clone(), a.clone(), d.clone())),
        }
    }

    fn target(&self, of: Target) -> Result<StepPath> {
        match of {
            Target::X => Ok(self.x.clone()),
            Target::H => self.h.clone().ok_or_else(|| Error::MissingInternals("construction has no integrand".into())),
            Target::M => Ok(self.decomposition()?.0),
            Target::A => Ok(self.decomposition()?.1),
            Target::Pair => {
                let h = self.target(Target::H)?;
                StepPath::stack(&[&h, &self.x])
            }
        }
    }

    fn reference(&self, of: Target) -> Result<StepPath> {
        let (lh, lx) = self
            .limit
            .as_ref()
            .ok_or_else(|| Error::MissingInternals("construction has no limit path".into()))?;
        match of {
            Target::X => Ok(lx.clone()),
            Target::H => Ok(lh.clone()),
            Target::Pair => StepPath::stack(&[lh, lx]),
            _ => Err(bad("limits are known for h, x and the pair only")),
        }
    }
}

/// Draws `construction` at scale `n`. `sample_times` are times at which functionals
/// will read the path; constructions sampled on a grid include them exactly.
pub fn realize(construction: &Construction, n: u64, seed: Seed, sample_times: &[f64]) -> Result<Realization> {
    let c = construction;
    match c.id.as_str() {
        "constant" => {
            let p: ConstantParams = c.parse()?;
            Ok(Realization::plain(None, StepPath::constant(p.horizon, &vec![p.value; p.dim])?))
        }
        "alternating" | "sawtooth" | "zigzag" | "fig6" => {
            let _: NoParams = c.parse()?;
            let e = processes::deterministic_example(&c.id, n)?;
            let mut r = Realization::plain(e.h, e.x);
            if c.id == "zigzag" || c.id == "fig6" {
                r.limit = Some(processes::example_limit(&c.id)?);
            }
            Ok(r)
        }
        "moving_average" | "ctrw" => {
            let p: WalkParams = c.parse()?;
            if c.id == "moving_average" && p.waits != Waits::Unit {
                return Err(bad("moving_average uses unit waits; use ctrw for random waits"));
            }
            let cfg = CtrwConfig {
                alpha: p.alpha,
                waits: p.waits,
                coeffs: p.coeffs,
                normalize: p.normalize,
                coupling: p.coupling,
                scale_n: n,
                horizon: p.horizon,
                innovations: p.innovations,
            };
            let s = processes::ctrw_path(&cfg, seed)?;
            let parts = if cfg.is_uncorrelated() {
                let d = processes::ctrw_decompose(&cfg, &s)?;
                let a = d.large.add(&d.drift)?;
                Parts::Explicit(d.martingale, a, d.drift)
            } else {
                Parts::Unknown
            };
            Ok(Realization {
                h: None,
                x: s.path,
                epochs: Some(s.epochs),
                parts,
                limit: None,
            })
        }
        "single_jump_martingale" => {
            let p: SingleJumpParams = c.parse()?;
            let nf = n as f64;
            let s = if p.per_oscillation == 0 {
                let tau = processes::sj_draw_tau(p.horizon, p.epsilon, seed);
                let mut ts: Vec<f64> = sample_times.iter().copied().filter(|&t| t < tau && t > 0.0).collect();
                ts.push(0.0);
                ts.push(tau);
                ts.sort_by(f64::total_cmp);
                ts.dedup();
                let vs = ts
                    .iter()
                    .map(|&t| processes::sj_martingale_value(nf, p.horizon, p.epsilon, tau, t))
                    .collect();
                processes::SingleJumpSample {
                    path: StepPath::scalar(p.horizon, ts, vs)?,
                    tau,
                }
            } else {
                processes::single_jump_martingale(n, p.horizon, p.epsilon, seed, Some(p.per_oscillation))?
            };
            let mut r = Realization::plain(None, s.path);
            r.parts = Parts::Martingale;
            Ok(r)
        }
        "exploding_pair" => {
            let p: ExplodingConfig = c.parse()?;
            let s = processes::exploding_pair(
                &ExplodingParams {
                    n,
                    alpha: p.alpha,
                    epsilon: p.epsilon,
                    x_min: p.x_min,
                    horizon: p.horizon,
                    c0: p.c0,
                    c1: p.c1,
                },
                seed,
            )?;
            let mut r = Realization::plain(Some(s.h), s.x);
            r.parts = Parts::Unknown;
            Ok(r)
        }
        "crossing_pair" => {
            let p: HorizonParams = c.parse()?;
            let s = processes::crossing_pair(n, p.horizon, seed)?;
            let mut r = Realization::plain(Some(s.h), s.x);
            r.parts = Parts::Martingale;
            Ok(r)
        }
        "inverse_subordinator" => {
            let p: SubordinatorParams = c.parse()?;
            Ok(Realization::plain(None, processes::inverse_subordinator_path(p.beta, n, p.horizon, seed)?))
        }
        "monotone_staircase" => {
            let p: HorizonParams = c.parse()?;
            Ok(Realization::plain(None, processes::inverse_subordinator_from_waits(&Waits::Unit, n, p.horizon, seed)?))
        }
        "separated_jumps" => {
            let p: SeparatedParams = c.parse()?;
            if !(p.s0 > 0.0 && 0.5 + p.s0 < p.horizon) {
                return Err(bad("need 0 < s0 and 1/2 + s0 < horizon"));
            }
            let h = StepPath::indicator(p.horizon, 0.5, None, 1.0)?;
            let x = StepPath::indicator(p.horizon, 0.5 + p.s0, None, 1.0)?;
            Ok(Realization::plain(Some(h), x))
        }
        other => Err(Error::UnknownConstruction(other.to_string())),
    }
}

/// Which path a functional reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    #[default]
    X,
    H,
    /// Martingale part of the decomposition.
    M,
    /// Finite-variation part of the decomposition.
    A,
    /// `(h, x)` stacked.
    Pair,
}

/// A window either absolute or as a multiple of `1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Window {
    Abs(f64),
    PerN { per_n: f64 },
}

impl Window {
    pub fn resolve(&self, n: u64) -> f64 {
        match *self {
            Window::Abs(v) => v,
            Window::PerN { per_n } => per_n / n as f64,
        }
    }

    fn label(&self) -> String {
        match *self {
            Window::Abs(v) => format!("{v}"),
            Window::PerN { per_n } => format!("{per_n}/n"),
        }
    }
}

/// Per-path statistics evaluated on every replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Functional {
    /// `∫_0^t h(s-) · dx(s)` (its absolute value if `abs`).
    IntegralAt {
        t: f64,
        #[serde(default)]
        abs: bool,
    },
    /// First coordinate at `t`.
    ValueAt {
        t: f64,
        #[serde(default)]
        of: Target,
    },
    SupNorm {
        t: f64,
        #[serde(default)]
        of: Target,
    },
    Tv {
        t: f64,
        #[serde(default)]
        of: Target,
    },
    /// `Σ_i [x_i, x_i]_t`.
    QuadVar {
        t: f64,
        #[serde(default)]
        of: Target,
    },
    WHat { delta: Window, t: f64 },
    NDelta {
        delta: Window,
        t: f64,
        #[serde(default)]
        of: Target,
    },
    WPrime {
        theta: Window,
        t: f64,
        #[serde(default)]
        of: Target,
    },
    WDprime {
        theta: Window,
        t: f64,
        #[serde(default)]
        of: Target,
    },
    /// Distance on `[0, t]` to the construction's limit.
    MetricToReference {
        metric: BaseMetric,
        t: f64,
        #[serde(default)]
        of: Target,
    },
    /// Indicator `ŵ_δ^t(h, x) > γ`.
    Avci { delta: Window, gamma: f64, t: f64 },
    /// Indicator `TV_{[0,t]}(A) > r`.
    TvExceeds { r: f64, t: f64 },
    /// `|ΔM_{t ∧ τ_c}|` with `τ_c = inf{s > 0 : |M|*_s >= c}`.
    StoppedJump { c: f64, t: f64 },
    /// `sup_{s <= t} |drift_s|`.
    SupDrift { t: f64 },
    /// Indicator that some restart window `σ_k <= s < σ_{k+1} <= r <= σ_{k+1} + δ` has
    /// `|x_{r ∧ t} − x_s| > λ`; the summary probability is the worst single `k`.
    RestartIncrement { delta: Window, lambda: f64, t: f64 },
}

fn of_label(of: Target) -> &'static str {
    match of {
        Target::X => "",
        Target::H => ",of=h",
        Target::M => ",of=m",
        Target::A => ",of=a",
        Target::Pair => ",of=pair",
    }
}

impl Functional {
    pub fn name(&self) -> &'static str {
        match self {
            Functional::IntegralAt { abs: false, .. } => "integral_at",
            Functional::IntegralAt { abs: true, .. } => "abs_integral_at",
            Functional::ValueAt { .. } => "value_at",
            Functional::SupNorm { .. } => "sup_norm",
            Functional::Tv { .. } => "tv",
            Functional::QuadVar { .. } => "quad_var",
            Functional::WHat { .. } => "w_hat",
            Functional::NDelta { .. } => "n_delta",
            Functional::WPrime { .. } => "w_prime",
            Functional::WDprime { .. } => "w_dprime",
            Functional::MetricToReference { .. } => "metric_to_reference",
            Functional::Avci { .. } => "avci",
            Functional::TvExceeds { .. } => "tv_exceeds",
            Functional::StoppedJump { .. } => "stopped_jump",
            Functional::SupDrift { .. } => "sup_drift",
            Functional::RestartIncrement { .. } => "restart_increment",
        }
    }

    /// Parameter label distinguishing cells of the same functional.
    pub fn param(&self) -> String {
        match self {
            Functional::IntegralAt { t, .. } | Functional::SupDrift { t } => format!("t={t}"),
            Functional::ValueAt { t, of } | Functional::SupNorm { t, of } | Functional::Tv { t, of } | Functional::QuadVar { t, of } => {
                format!("t={t}{}", of_label(*of))
            }
            Functional::WHat { delta, t } => format!("delta={},t={t}", delta.label()),
            Functional::NDelta { delta, t, of } => format!("delta={},t={t}{}", delta.label(), of_label(*of)),
            Functional::WPrime { theta, t, of } | Functional::WDprime { theta, t, of } => {
                format!("theta={},t={t}{}", theta.label(), of_label(*of))
            }
            Functional::MetricToReference { metric, t, of } => {
                let m = match metric {
                    BaseMetric::Uniform => "uniform",
                    BaseMetric::J1 => "j1",
                    BaseMetric::M1 => "m1",
                };
                format!("metric={m},t={t}{}", of_label(*of))
            }
            Functional::Avci { delta, gamma, t } => format!("delta={},gamma={gamma},t={t}", delta.label()),
            Functional::TvExceeds { r, t } => format!("r={r},t={t}"),
            Functional::StoppedJump { c, t } => format!("c={c},t={t}"),
            Functional::RestartIncrement { delta, lambda, t } => format!("delta={},lambda={lambda},t={t}", delta.label()),
        }
    }

    pub fn is_indicator(&self) -> bool {
        matches!(
            self,
            Functional::Avci { .. } | Functional::TvExceeds { .. } | Functional::RestartIncrement { .. }
        )
    }

    fn read_time(&self) -> Option<f64> {
        match self {
            Functional::ValueAt { t, .. } => Some(*t),
            _ => None,
        }
    }

    /// Value on one realization, plus the restart windows that fired.
    pub fn evaluate(&self, r: &Realization, n: u64) -> Result<(f64, Vec<u64>)> {
        let v = match self {
            Functional::IntegralAt { t, abs } => {
                let h = r.target(Target::H)?;
                let v = dot_integral(&h, &r.x, *t)?;
                if *abs {
                    v.abs()
                } else {
                    v
                }
            }
            Functional::ValueAt { t, of } => {
                let p = r.target(*of)?;
                check_time(&p, *t)?;
                p.at(*t)[0]
            }
            Functional::SupNorm { t, of } => {
                let p = r.target(*of)?;
                check_time(&p, *t)?;
                p.sup_norm(*t)
            }
            Functional::Tv { t, of } => r.target(*of)?.total_variation(0.0, *t)?.total,
            Functional::QuadVar { t, of } => {
                let p = r.target(*of)?;
                check_time(&p, *t)?;
                quad_covariation(&p, &p)?.at(*t).iter().sum()
            }
            Functional::WHat { delta, t } => {
                metrics::consecutive_increment(&r.target(Target::H)?, &r.x, delta.resolve(n), *t)?
            }
            Functional::NDelta { delta, t, of } => metrics::increment_count(&r.target(*of)?, delta.resolve(n), *t)? as f64,
            Functional::WPrime { theta, t, of } => metrics::w_prime(&r.target(*of)?, theta.resolve(n), *t)?,
            Functional::WDprime { theta, t, of } => metrics::w_dprime(&r.target(*of)?, theta.resolve(n), *t)?,
            Functional::MetricToReference { metric, t, of } => {
                let p = r.target(*of)?;
                let q = r.reference(*of)?;
                let opts = MetricOptions::default();
                match metric {
                    BaseMetric::Uniform => metrics::uniform_distance(&p, &q, *t)?,
                    BaseMetric::J1 => metrics::j1_distance(&p, &q, *t, &opts)?,
                    BaseMetric::M1 => metrics::m1_distance(&p, &q, *t, &opts)?,
                }
            }
            Functional::Avci { delta, gamma, t } => {
                let w = metrics::consecutive_increment(&r.target(Target::H)?, &r.x, delta.resolve(n), *t)?;
                indicator(w > *gamma)
            }
            Functional::TvExceeds { r: level, t } => indicator(r.target(Target::A)?.total_variation(0.0, *t)?.total > *level),
            Functional::StoppedJump { c, t } => stopped_jump(&r.target(Target::M)?, *c, *t)?,
            Functional::SupDrift { t } => {
                let (_, _, d) = r.decomposition()?;
                check_time(&d, *t)?;
                d.sup_norm(*t)
            }
            Functional::RestartIncrement { delta, lambda, t } => {
                let epochs = r
                    .epochs
                    .as_ref()
                    .ok_or_else(|| Error::MissingInternals("construction exposes no jump epochs".into()))?;
                let ks = restart_events(&r.x, epochs, delta.resolve(n), *lambda, *t)?;
                return Ok((indicator(!ks.is_empty()), ks));
            }
        };
        Ok((v, Vec::new()))
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn check_time(p: &StepPath, t: f64) -> Result<()> {
    if t >= 0.0 && t <= p.horizon() {
        Ok(())
    } else {
        Err(Error::OutOfHorizon { t, horizon: p.horizon() })
    }
}

/// `|ΔM_{t ∧ τ_c}|`; `τ_c` is read off the breakpoints, where `|M|*` can first reach `c`.
pub fn stopped_jump(m: &StepPath, c: f64, t: f64) -> Result<f64> {
    check_time(m, t)?;
    if !(c > 0.0) {
        return Err(bad("c must be positive"));
    }
    let ts = m.breakpoints();
    let tau = (0..ts.len()).find(|&i| norm(m.value(i)) >= c).map(|i| ts[i]);
    let u = tau.map_or(t, |s| s.min(t));
    let (r, l) = (m.at(u), m.left_at(u));
    Ok(r.iter().zip(l).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// Range `(min, max)` of the first coordinate over `[a, b)` (`closed`: `[a, b]`).
fn range(x: &StepPath, a: f64, b: f64, closed: bool) -> (f64, f64) {
    let ts = x.breakpoints();
    let first = x.segment_at(a);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in first..ts.len() {
        if i > first && (ts[i] > b || (!closed && ts[i] >= b)) {
            break;
        }
        let v = x.value(i)[0];
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Restart windows `k` (with `σ_0 = 0`) whose increment exceeds `λ`.
pub fn restart_events(x: &StepPath, epochs: &[f64], delta: f64, lambda: f64, t: f64) -> Result<Vec<u64>> {
    if x.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: x.dim() });
    }
    if !(delta >= 0.0 && lambda > 0.0) {
        return Err(bad("need delta >= 0 and lambda > 0"));
    }
    check_time(x, t)?;
    let mut sig = vec![0.0];
    sig.extend(epochs.iter().copied().filter(|&s| s > 0.0));
    let mut out = Vec::new();
    for k in 0..sig.len().saturating_sub(1) {
        let (a, b) = (sig[k], sig[k + 1]);
        if b > t {
            break;
        }
        let (slo, shi) = range(x, a, b, false);
        let (rlo, rhi) = range(x, b, (b + delta).min(t), true);
        if (rhi - slo).max(shi - rlo) > lambda {
            out.push(k as u64);
        }
    }
    Ok(out)
}

/// Full description of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub construction: Construction,
    pub n_grid: Vec<u64>,
    pub replicas: u64,
    /// First replica index; disjoint ranges of one experiment merge exactly.
    #[serde(default)]
    pub replica_offset: u64,
    pub functionals: Vec<Functional>,
    pub seed: Seed,
    /// Output file (`.csv` for long CSV, JSON otherwise).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<String>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(bad("replicas must be at least 1"));
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("n_grid must be nonempty and strictly ascending"));
        }
        if self.functionals.is_empty() {
            return Err(bad("at least one functional is required"));
        }
        if !CONSTRUCTIONS.contains(&self.construction.id.as_str()) {
            return Err(Error::UnknownConstruction(self.construction.id.clone()));
        }
        Ok(())
    }

    /// SHA-256 of the spec without its replica range and sink, so that reports over
    /// disjoint replica ranges of one experiment share a hash.
    pub fn hash(&self) -> String {
        let mut core = self.clone();
        core.replicas = 0;
        core.replica_offset = 0;
        core.sink = None;
        let json = serde_json::to_string(&core).expect("spec serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Stream of replica `r` at scale `n`: `(n << 40) | r`, unique for `r < 2^40`, `n < 2^24`.
pub fn replica_seed(seed: Seed, n: u64, r: u64) -> Seed {
    seed.replica(n.wrapping_shl(40) | r)
}

/// Empirical probability with Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probability {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Wilson score interval for `k` successes in `m` trials.
pub fn wilson(k: u64, m: u64) -> Probability {
    let nf = m as f64;
    let p = k as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    Probability {
        estimate: p,
        lo: if k == 0 { 0.0 } else { (centre - half).max(0.0) },
        hi: if k == m { 1.0 } else { (centre + half).min(1.0) },
    }
}

/// Type-7 (linear interpolation) quantile of sorted data.
pub fn quantile(sorted: &[f64], level: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * level;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Distribution-free 95% CI for the median from order statistics.
pub fn median_ci(sorted: &[f64]) -> (f64, f64) {
    let m = sorted.len() as f64;
    let spread = Z95 * m.sqrt() / 2.0;
    let j = ((m / 2.0 - spread).floor() as i64).clamp(1, sorted.len() as i64) as usize;
    let k = ((1.0 + m / 2.0 + spread).ceil() as i64).clamp(1, sorted.len() as i64) as usize;
    (sorted[j - 1], sorted[k - 1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: u64,
    pub mean: f64,
    /// Sample standard deviation (0 for a single replica).
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    /// At [`LEVELS`].
    pub quantiles: Vec<f64>,
    pub median: f64,
    pub median_lo: f64,
    pub median_hi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<Probability>,
}

/// Statistics of one functional at one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub n: u64,
    pub param: String,
    pub functional: String,
    pub indicator: bool,
    /// `(replica, value)` sorted by replica.
    pub samples: Vec<(u64, f64)>,
    /// Restart windows that fired, per replica.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<(u64, Vec<u64>)>,
    pub summary: Summary,
}

impl Cell {
    fn new(n: u64, f: &Functional, samples: Vec<(u64, f64)>, events: Vec<(u64, Vec<u64>)>) -> Cell {
        let mut c = Cell {
            n,
            param: f.param(),
            functional: f.name().to_string(),
            indicator: f.is_indicator(),
            samples,
            events,
            summary: Summary {
                count: 0,
                mean: 0.0,
                sd: 0.0,
                min: 0.0,
                max: 0.0,
                quantiles: vec![],
                median: 0.0,
                median_lo: 0.0,
                median_hi: 0.0,
                probability: None,
            },
        };
        c.summarize();
        c
    }

    fn key(&self) -> (u64, String, String) {
        (self.n, self.functional.clone(), self.param.clone())
    }

    fn summarize(&mut self) {
        let vals: Vec<f64> = self.samples.iter().map(|s| s.1).collect();
        let m = vals.len();
        let mean = vals.iter().sum::<f64>() / m as f64;
        let sd = if m > 1 {
            (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        let (median_lo, median_hi) = median_ci(&sorted);
        let probability = if self.indicator {
            let k = if self.functional == "restart_increment" {
                let mut per_k: BTreeMap<u64, u64> = BTreeMap::new();
                for (_, ks) in &self.events {
                    for k in ks {
                        *per_k.entry(*k).or_default() += 1;
                    }
                }
                per_k.values().copied().max().unwrap_or(0)
            } else {
                vals.iter().filter(|&&v| v > 0.0).count() as u64
            };
            Some(wilson(k, m as u64))
        } else {
            None
        };
        self.summary = Summary {
            count: m as u64,
            mean,
            sd,
            min: sorted[0],
            max: sorted[m - 1],
            quantiles: LEVELS.iter().map(|&l| quantile(&sorted, l)).collect(),
            median: quantile(&sorted, 0.5),
            median_lo,
            median_hi,
            probability,
        };
    }
}

/// Monotonicity of medians across `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Increasing,
    Decreasing,
    Flat,
    /// Neither flat nor monotone with separated median intervals.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub functional: String,
    pub param: String,
    pub ns: Vec<u64>,
    pub medians: Vec<f64>,
    pub verdict: Verdict,
    /// Least-squares slope of `ln median` on `ln n` (positive medians only).
    pub slope: Option<f64>,
    /// Root-mean-square residual of that fit.
    pub residual: Option<f64>,
}

/// Verdict and log-log fit for medians with 95% intervals `(lo, hi)`.
pub fn trend(ns: &[u64], medians: &[f64], intervals: &[(f64, f64)]) -> Result<(Verdict, Option<f64>, Option<f64>)> {
    if ns.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, found: ns.len() });
    }
    let scale = medians.iter().fold(1.0f64, |a, m| a.max(m.abs()));
    let verdict = if medians.iter().all(|m| (m - medians[0]).abs() <= 1e-12 * scale) {
        Verdict::Flat
    } else if intervals.windows(2).all(|w| w[1].0 > w[0].1) {
        Verdict::Increasing
    } else if intervals.windows(2).all(|w| w[1].1 < w[0].0) {
        Verdict::Decreasing
    } else {
        Verdict::Inconclusive
    };
    if medians.iter().any(|&m| !(m > 0.0)) {
        return Ok((verdict, None, None));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    Ok((verdict, Some(slope), Some((rss / k).sqrt())))
}

/// Output of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub spec_hash: String,
    pub seed: Seed,
    pub cells: Vec<Cell>,
    /// One entry per `(functional, param)` when at least three scales were run.
    pub trends: Vec<TrendSummary>,
    #[serde(default)]
    pub flags: Vec<String>,
    /// Wall-clock time; kept out of serialized reports so they are reproducible.
    #[serde(skip)]
    pub runtime: Option<Duration>,
}

impl DiagnosticsReport {
    pub fn cell(&self, n: u64, functional: &str, param: &str) -> Option<&Cell> {
        self.cells
            .iter()
            .find(|c| c.n == n && c.functional == functional && c.param == param)
    }

    /// Cells of one `(functional, param)` in ascending `n`.
    pub fn series(&self, functional: &str, param: &str) -> Vec<&Cell> {
        let mut v: Vec<&Cell> = self
            .cells
            .iter()
            .filter(|c| c.functional == functional && c.param == param)
            .collect();
        v.sort_by_key(|c| c.n);
        v
    }

    fn refresh_trends(&mut self) {
        self.trends = convergence_trend(std::slice::from_ref(self)).unwrap_or_default();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Long format `n,param,functional,stat,value,lo,hi`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let sink = |e: csv::Error| Error::SinkError(e.to_string());
        w.write_record(["n", "param", "functional", "stat", "value", "lo", "hi"]).map_err(sink)?;
        for c in &self.cells {
            let s = &c.summary;
            let n = c.n.to_string();
            let mut row = |stat: &str, v: f64, lo: Option<f64>, hi: Option<f64>| {
                let f = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
                w.write_record([n.as_str(), &c.param, &c.functional, stat, &v.to_string(), &f(lo), &f(hi)])
            };
            let se = if s.count > 0 { Z95 * s.sd / (s.count as f64).sqrt() } else { 0.0 };
            row("count", s.count as f64, None, None).map_err(sink)?;
            row("mean", s.mean, Some(s.mean - se), Some(s.mean + se)).map_err(sink)?;
            row("sd", s.sd, None, None).map_err(sink)?;
            row("median", s.median, Some(s.median_lo), Some(s.median_hi)).map_err(sink)?;
            for (l, q) in LEVELS.iter().zip(&s.quantiles) {
                row(&format!("q{:02}", (l * 100.0).round() as u32), *q, None, None).map_err(sink)?;
            }
            if let Some(p) = s.probability {
                row("probability", p.estimate, Some(p.lo), Some(p.hi)).map_err(sink)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::SinkError(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::SinkError(e.to_string()))
    }

    fn write_sink(&self, path: &str) -> Result<()> {
        let body = if path.ends_with(".csv") { self.to_csv()? } else { self.to_json() };
        std::fs::write(path, body).map_err(|e| Error::SinkError(format!("{path}: {e}")))
    }
}

/// Union of two reports of the same experiment over disjoint replica ranges.
pub fn merge(a: &DiagnosticsReport, b: &DiagnosticsReport) -> Result<DiagnosticsReport> {
    if a.spec_hash != b.spec_hash || a.seed != b.seed {
        return Err(bad("reports come from different experiments"));
    }
    let mut cells: BTreeMap<(u64, String, String), Cell> = BTreeMap::new();
    let mut order = Vec::new();
    for c in a.cells.iter().chain(&b.cells) {
        let key = c.key();
        match cells.get_mut(&key) {
            None => {
                order.push(key.clone());
                cells.insert(key, c.clone());
            }
            Some(existing) => {
                let mut samples: BTreeMap<u64, f64> = existing.samples.iter().copied().collect();
                for &(r, v) in &c.samples {
                    if samples.insert(r, v).is_some() {
                        return Err(bad(format!("replica {r} appears in both reports")));
                    }
                }
                let mut events: BTreeMap<u64, Vec<u64>> = existing.events.iter().cloned().collect();
                events.extend(c.events.iter().cloned());
                existing.samples = samples.into_iter().collect();
                existing.events = events.into_iter().collect();
                existing.summarize();
            }
        }
    }
    // canonical order: by n, then functional and param
    order.sort();
    let mut flags: Vec<String> = a.flags.iter().chain(&b.flags).cloned().collect();
    flags.sort();
    flags.dedup();
    let mut out = DiagnosticsReport {
        spec_hash: a.spec_hash.clone(),
        seed: a.seed,
        cells: order.into_iter().map(|k| cells.remove(&k).unwrap()).collect(),
        trends: vec![],
        flags,
        runtime: None,
    };
    out.refresh_trends();
    Ok(out)
}

/// Per-functional monotonicity verdicts and log-log slopes across the scales present in
/// `reports` (cells of the same `(n, functional, param)` are taken from the first report).
pub fn convergence_trend(reports: &[DiagnosticsReport]) -> Result<Vec<TrendSummary>> {
    let mut groups: BTreeMap<(String, String), BTreeMap<u64, &Cell>> = BTreeMap::new();
    for rep in reports {
        for c in &rep.cells {
            groups
                .entry((c.functional.clone(), c.param.clone()))
                .or_default()
                .entry(c.n)
                .or_insert(c);
        }
    }
    let mut out = Vec::new();
    let mut fewest = usize::MAX;
    for ((functional, param), by_n) in groups {
        fewest = fewest.min(by_n.len());
        if by_n.len() < 3 {
            continue;
        }
        let ns: Vec<u64> = by_n.keys().copied().collect();
        let medians: Vec<f64> = by_n.values().map(|c| c.summary.median).collect();
        let cis: Vec<(f64, f64)> = by_n.values().map(|c| (c.summary.median_lo, c.summary.median_hi)).collect();
        let (verdict, slope, residual) = trend(&ns, &medians, &cis)?;
        out.push(TrendSummary {
            functional,
            param,
            ns,
            medians,
            verdict,
            slope,
            residual,
        });
    }
    if out.is_empty() {
        return Err(Error::InsufficientData {
            needed: 3,
            found: if fewest == usize::MAX { 0 } else { fewest },
        });
    }
    Ok(out)
}

fn pool() -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| bad(format!("thread pool: {e}")))
}

/// Runs every `(n, replica)` of `spec` and aggregates. Deterministic given the spec,
/// whatever the thread count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<DiagnosticsReport> {
    spec.validate()?;
    let start = Instant::now();
    let times: Vec<f64> = spec.functionals.iter().filter_map(|f| f.read_time()).collect();
    let pool = pool()?;
    let mut cells = Vec::new();
    for &n in &spec.n_grid {
        let replicas: Vec<u64> = (spec.replica_offset..spec.replica_offset + spec.replicas).collect();
        let rows: Vec<Result<Vec<(f64, Vec<u64>)>>> = pool.install(|| {
            replicas
                .par_iter()
                .map(|&r| {
                    let real = realize(&spec.construction, n, replica_seed(spec.seed, n, r), &times)?;
                    spec.functionals.iter().map(|f| f.evaluate(&real, n)).collect()
                })
                .collect()
        });
        let rows: Vec<Vec<(f64, Vec<u64>)>> = rows.into_iter().collect::<Result<_>>()?;
        for (j, f) in spec.functionals.iter().enumerate() {
            let samples = replicas.iter().zip(&rows).map(|(&r, row)| (r, row[j].0)).collect();
            let events = replicas
                .iter()
                .zip(&rows)
                .filter(|(_, row)| !row[j].1.is_empty())
                .map(|(&r, row)| (r, row[j].1.clone()))
                .collect();
            cells.push(Cell::new(n, f, samples, events));
        }
    }
    cells.sort_by_key(|c| c.key());
    let mut report = DiagnosticsReport {
        spec_hash: spec.hash(),
        seed: spec.seed,
        cells,
        trends: vec![],
        flags: vec![],
        runtime: None,
    };
    report.refresh_trends();
    report.runtime = Some(start.elapsed());
    if let Some(path) = &spec.sink {
        report.write_sink(path)?;
    }
    Ok(report)
}

fn spec_for(source: &Construction, functionals: Vec<Functional>, n_grid: &[u64], replicas: u64, seed: Seed) -> ExperimentSpec {
    ExperimentSpec {
        construction: source.clone(),
        n_grid: n_grid.to_vec(),
        replicas,
        replica_offset: 0,
        functionals,
        seed,
        sink: None,
    }
}

/// Good-decomposition diagnostics: `P(TV_{[0,t]}(A) > R)` per `R` and `|ΔM_{t∧τ_c}|` per `c`
/// (its mean estimates `E|ΔM_{t∧τ_c}|`), plus the drift size.
pub fn gd_diagnostics(
    source: &Construction,
    t: f64,
    c_grid: &[f64],
    r_grid: &[f64],
    n_grid: &[u64],
    replicas: u64,
    seed: Seed,
) -> Result<DiagnosticsReport> {
    let mut fs: Vec<Functional> = r_grid.iter().map(|&r| Functional::TvExceeds { r, t }).collect();
    fs.extend(c_grid.iter().map(|&c| Functional::StoppedJump { c, t }));
    fs.push(Functional::SupDrift { t });
    run_experiment(&spec_for(source, fs, n_grid, replicas, seed))
}

/// `P(ŵ_δ^T(H^n, X^n) > γ)` over the `(δ, n)` grid.
pub fn avci_estimate(
    source: &Construction,
    delta_grid: &[Window],
    gamma: f64,
    horizon: f64,
    n_grid: &[u64],
    replicas: u64,
    seed: Seed,
) -> Result<DiagnosticsReport> {
    if !(gamma > 0.0) {
        return Err(bad("gamma must be positive"));
    }
    let fs = delta_grid
        .iter()
        .map(|&delta| Functional::Avci { delta, gamma, t: horizon })
        .collect();
    run_experiment(&spec_for(source, fs, n_grid, replicas, seed))
}

/// Quantiles of `|H^n|*_T` and `N_δ^T(H^n)`; flags a functional whose 95% quantile at the
/// largest `n` exceeds `explosion_ratio` times its value at the smallest.
#[allow(clippy::too_many_arguments)]
pub fn f_conditions_report(
    source: &Construction,
    delta_grid: &[Window],
    horizon: f64,
    explosion_ratio: f64,
    n_grid: &[u64],
    replicas: u64,
    seed: Seed,
) -> Result<DiagnosticsReport> {
    let mut fs = vec![Functional::SupNorm { t: horizon, of: Target::H }];
    fs.extend(delta_grid.iter().map(|&delta| Functional::NDelta {
        delta,
        t: horizon,
        of: Target::H,
    }));
    let mut report = run_experiment(&spec_for(source, fs.clone(), n_grid, replicas, seed))?;
    for f in &fs {
        let s = report.series(f.name(), &f.param());
        if s.len() < 2 {
            continue;
        }
        let (first, last) = (s[0].summary.quantiles[4], s[s.len() - 1].summary.quantiles[4]);
        if last > explosion_ratio * first.max(f64::MIN_POSITIVE) {
            report
                .flags
                .push(format!("explosion: {} [{}] q95 {first} -> {last}", f.name(), f.param()));
        }
    }
    Ok(report)
}

/// Worst-over-`k` probability of a restart increment above `λ`, per `(n, δ)`.
#[allow(clippy::too_many_arguments)]
pub fn restart_increment_estimate(
    source: &Construction,
    delta_grid: &[Window],
    lambda: f64,
    horizon: f64,
    n_grid: &[u64],
    replicas: u64,
    seed: Seed,
) -> Result<DiagnosticsReport> {
    let fs = delta_grid
        .iter()
        .map(|&delta| Functional::RestartIncrement { delta, lambda, t: horizon })
        .collect();
    run_experiment(&spec_for(source, fs, n_grid, replicas, seed))
}

/// Quantiles of `w'(X^n, θ)`, `w''(X^n, θ)` and `|X^n|*_T` per `(n, θ)`.
pub fn tightness_report(
    source: &Construction,
    theta_grid: &[Window],
    horizon: f64,
    n_grid: &[u64],
    replicas: u64,
    seed: Seed,
) -> Result<DiagnosticsReport> {
    let mut fs = Vec::new();
    for &theta in theta_grid {
        fs.push(Functional::WPrime { theta, t: horizon, of: Target::X });
        fs.push(Functional::WDprime { theta, t: horizon, of: Target::X });
    }
    fs.push(Functional::SupNorm { t: horizon, of: Target::X });
    run_experiment(&spec_for(source, fs, n_grid, replicas, seed))
}

/// Ids accepted by [`reproduce`].
pub const REPRODUCE_IDS: [&str; 8] = [
    "alternating",
    "sawtooth",
    "fig6",
    "zigzag",
    "single-jump-martingale",
    "exploding-pair",
    "crossing-walk",
    "ctrw-gd",
];

/// Default master seed of the pinned specs.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// The pinned experiment behind a reproduction id (`n_grid` overridable).
pub fn reproduce_spec(id: &str, n_grid: Option<&[u64]>, seed: Option<u64>) -> Result<ExperimentSpec> {
    use serde_json::json;
    let (construction, grid, replicas, functionals): (Construction, Vec<u64>, u64, Vec<Functional>) = match id {
        "alternating" => (
            Construction::new("alternating", json!({})),
            vec![4, 10, 50],
            1,
            vec![
                Functional::QuadVar { t: 1.0, of: Target::X },
                Functional::SupNorm { t: 1.0, of: Target::X },
            ],
        ),
        "sawtooth" => (
            Construction::new("sawtooth", json!({})),
            vec![4, 16, 100],
            1,
            vec![Functional::IntegralAt { t: 1.0, abs: false }],
        ),
        "fig6" => (
            Construction::new("fig6", json!({})),
            vec![2, 8, 64],
            1,
            vec![Functional::IntegralAt { t: 2.0, abs: false }],
        ),
        "zigzag" => (
            Construction::new("zigzag", json!({})),
            vec![4, 16, 64],
            1,
            vec![
                Functional::MetricToReference {
                    metric: BaseMetric::M1,
                    t: 2.0,
                    of: Target::Pair,
                },
                Functional::IntegralAt { t: 2.0, abs: false },
            ],
        ),
        "single-jump-martingale" => (
            Construction::new(
                "single_jump_martingale",
                json!({"horizon": 1.0, "epsilon": 0.5, "per_oscillation": 0}),
            ),
            vec![1_000, 10_000],
            10_000,
            vec![
                Functional::ValueAt { t: 0.5, of: Target::X },
                Functional::ValueAt { t: 1.0, of: Target::X },
            ],
        ),
        "exploding-pair" => (
            Construction::new(
                "exploding_pair",
                json!({"alpha": 1.5, "epsilon": 0.25, "x_min": 1.0, "horizon": 1.0}),
            ),
            vec![100, 1_000, 10_000],
            200,
            vec![
                Functional::IntegralAt { t: 1.0, abs: false },
                Functional::IntegralAt { t: 1.0, abs: true },
                Functional::SupNorm { t: 1.0, of: Target::H },
            ],
        ),
        "crossing-walk" => (
            Construction::new("crossing_pair", json!({"horizon": 1.0})),
            vec![100, 10_000, 1_000_000],
            200,
            vec![Functional::NDelta {
                delta: Window::Abs(1.0),
                t: 1.0,
                of: Target::H,
            }],
        ),
        "ctrw-gd" => (
            Construction::new(
                "ctrw",
                json!({
                    "alpha": 1.5,
                    "waits": {"kind": "pareto", "beta": 0.8, "x_min": 1.0},
                    "innovations": {"kind": "pareto_rademacher", "alpha": 1.5, "x_min": 1.0},
                    "horizon": 1.0
                }),
            ),
            vec![100, 1_000, 10_000],
            200,
            vec![
                Functional::StoppedJump { c: 1.0, t: 1.0 },
                Functional::StoppedJump { c: 10.0, t: 1.0 },
                Functional::SupDrift { t: 1.0 },
                Functional::TvExceeds { r: 1.0, t: 1.0 },
                Functional::TvExceeds { r: 5.0, t: 1.0 },
            ],
        ),
        other => return Err(Error::UnknownId(other.to_string())),
    };
    let spec = ExperimentSpec {
        construction,
        n_grid: n_grid.map(|g| g.to_vec()).unwrap_or(grid),
        replicas,
        replica_offset: 0,
        functionals,
        seed: Seed::new(seed.unwrap_or(DEFAULT_SEED)),
        sink: None,
    };
    spec.validate()?;
    Ok(spec)
}

/// One pinned expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    pub value: f64,
    pub expected: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceOutcome {
    pub id: String,
    pub spec_hash: String,
    pub spec: ExperimentSpec,
    pub checks: Vec<Check>,
    pub all_pass: bool,
    pub report: DiagnosticsReport,
}

fn check(name: &str, n: Option<u64>, value: f64, expected: String, pass: bool) -> Check {
    Check {
        name: name.to_string(),
        n,
        value,
        expected,
        pass,
    }
}

fn cell<'a>(report: &'a DiagnosticsReport, n: u64, f: &Functional) -> Result<&'a Cell> {
    report
        .cell(n, f.name(), &f.param())
        .ok_or_else(|| Error::MissingInternals(format!("no cell {} [{}] at n = {n}", f.name(), f.param())))
}

/// Consecutive scales with strictly increasing medians and disjoint median intervals.
fn separated_increase(cells: &[&Cell]) -> bool {
    cells
        .windows(2)
        .all(|w| w[1].summary.median > w[0].summary.median && w[1].summary.median_lo > w[0].summary.median_hi)
}

/// Runs the pinned experiment for `id` and checks it against its pinned expectations.
pub fn reproduce(id: &str, n_grid: Option<&[u64]>, seed: Option<u64>) -> Result<ReproduceOutcome> {
    let spec = reproduce_spec(id, n_grid, seed)?;
    let report = run_experiment(&spec)?;
    let f = &spec.functionals;
    let mut checks = Vec::new();
    match id {
        "alternating" => {
            for &n in &spec.n_grid {
                let nf = n as f64;
                let qv = cell(&report, n, &f[0])?.summary.median;
                let exact = (nf * nf).floor() / (nf * nf);
                checks.push(check("quad_var", Some(n), qv, format!("{exact} ± 1e-12"), (qv - exact).abs() <= 1e-12));
                let sup = cell(&report, n, &f[1])?.summary.max;
                checks.push(check("sup_norm", Some(n), sup, format!("<= {}", 1.0 / nf), sup <= 1.0 / nf));
            }
        }
        "sawtooth" => {
            for &n in &spec.n_grid {
                let v = cell(&report, n, &f[0])?.summary.median;
                let e = (n as f64).sqrt() / 2.0;
                checks.push(check("integral", Some(n), v, format!("{e} ± 1e-12"), (v - e).abs() <= 1e-12));
            }
        }
        "fig6" => {
            for &n in &spec.n_grid {
                let v = cell(&report, n, &f[0])?.summary.median;
                checks.push(check("integral", Some(n), v, "0.25".into(), v == 0.25));
            }
            let (x, y) = processes::example_limit("fig6")?;
            let v = dot_integral(&x, &y, 2.0)?;
            checks.push(check("limit_integral", None, v, "0".into(), v == 0.0));
        }
        "zigzag" => {
            for &n in &spec.n_grid {
                let v = cell(&report, n, &f[0])?.summary.median;
                checks.push(check("m1_to_limit_pair", Some(n), v, ">= 0.5 - 1e-6".into(), v >= 0.5 - 1e-6));
            }
        }
        "single-jump-martingale" => {
            for &n in &spec.n_grid {
                for fun in f {
                    let s = &cell(&report, n, fun)?.summary;
                    let band = 4.0 * s.sd / (s.count as f64).sqrt();
                    checks.push(check(
                        &format!("mean_{}", fun.param()),
                        Some(n),
                        s.mean,
                        format!("|mean| <= {band}"),
                        s.mean.abs() <= band,
                    ));
                }
                let tv = processes::sj_compensator_tv(n, 1.0, 16);
                let bound = processes::sj_stated_tv_bound(n);
                checks.push(check("compensator_tv", Some(n), tv, format!(">= {bound}"), tv >= bound));
            }
        }
        "exploding-pair" => {
            let lit: Vec<&Cell> = spec.n_grid.iter().map(|&n| cell(&report, n, &f[0])).collect::<Result<_>>()?;
            let last = *spec.n_grid.last().unwrap();
            checks.push(check(
                "median_integral_increasing",
                Some(last),
                lit.last().unwrap().summary.median,
                "strictly increasing, separated intervals".into(),
                separated_increase(&lit),
            ));
            let abs: Vec<&Cell> = spec.n_grid.iter().map(|&n| cell(&report, n, &f[1])).collect::<Result<_>>()?;
            checks.push(check(
                "median_abs_integral_increasing",
                Some(last),
                abs.last().unwrap().summary.median,
                "strictly increasing, separated intervals".into(),
                separated_increase(&abs),
            ));
            let eps = 0.25;
            for &n in &spec.n_grid {
                let s = &cell(&report, n, &f[2])?.summary;
                let e = (n as f64).powf(-eps);
                checks.push(check("sup_h", Some(n), s.max, format!("{e}"), s.min == e && s.max == e));
            }
        }
        "crossing-walk" => {
            let cs: Vec<&Cell> = spec.n_grid.iter().map(|&n| cell(&report, n, &f[0])).collect::<Result<_>>()?;
            let q: Vec<f64> = cs.iter().map(|c| c.summary.quantiles[4]).collect();
            checks.push(check(
                "n_delta_q95_increasing",
                spec.n_grid.last().copied(),
                *q.last().unwrap(),
                "strictly increasing in n".into(),
                q.windows(2).all(|w| w[1] > w[0]),
            ));
        }
        "ctrw-gd" => {
            for fun in &f[..2] {
                let means: Vec<f64> = spec
                    .n_grid
                    .iter()
                    .map(|&n| cell(&report, n, fun).map(|c| c.summary.mean))
                    .collect::<Result<_>>()?;
                let (lo, hi) = means.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &m| (a.min(m), b.max(m)));
                // all-zero means are trivially bounded
                let ratio = if hi == 0.0 { 1.0 } else { hi / lo };
                checks.push(check(
                    &format!("stopped_jump_ratio_{}", fun.param()),
                    None,
                    ratio,
                    "< 3".into(),
                    ratio < 3.0,
                ));
            }
            for &n in &spec.n_grid {
                let s = &cell(&report, n, &f[2])?.summary;
                checks.push(check("drift_zero", Some(n), s.max, "0".into(), s.max == 0.0));
            }
        }
        _ => unreachable!("validated id"),
    }
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(ReproduceOutcome {
        id: id.to_string(),
        spec_hash: report.spec_hash.clone(),
        spec,
        checks,
        all_pass,
        report,
    })
}
