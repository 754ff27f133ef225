//! Random and deterministic path constructions: innovation samplers, moving averages,
//! continuous-time random walks, renewal counts, the inverse subordinator and the
//! named examples and counterexamples (alternating walk, sawtooth, zigzag, the
//! fig-6 pair, the single-jump martingale, the exploding moving-average pair and the
//! crossing-walk pair).
//!
//! Every generator is a pure function of its parameters and a [`Seed`]; each random
//! stream is a ChaCha8 generator keyed by SHA-256 of (master seed, replica, component),
//! so replicas can run in any order on any number of threads.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{bad, Error, Result};
use crate::paths::StepPath;

/// Counter-based stream identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub master: u64,
    #[serde(default)]
    pub replica: u64,
    #[serde(default)]
    pub component: u32,
}

/// Component tags separating the streams used inside one replica.
pub mod component {
    pub const INNOVATIONS: u32 = 1;
    pub const WAITS: u32 = 2;
    pub const SIGNS: u32 = 3;
    pub const TAU: u32 = 4;
    pub const COUPLED: u32 = 5;
    pub const MAGNITUDES: u32 = 6;
}

impl Seed {
    pub fn new(master: u64) -> Seed {
        Seed {
            master,
            replica: 0,
            component: 0,
        }
    }

    pub fn replica(self, replica: u64) -> Seed {
        Seed { replica, ..self }
    }

    pub fn component(self, component: u32) -> Seed {
        Seed { component, ..self }
    }

    /// The generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.master.to_le_bytes());
        h.update(self.replica.to_le_bytes());
        h.update(self.component.to_le_bytes());
        let key: [u8; 32] = h.finalize().into();
        ChaCha8Rng::from_seed(key)
    }
}

/// Uniform on `(0, 1]`, safe to raise to negative powers.
fn open_uniform<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Distribution of i.i.d. innovations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnovationModel {
    /// `ξ W` with `ξ` a fair sign and `W` Pareto: `P(W > x) = (x_min / x)^α`, `x >= x_min`.
    ParetoRademacher { alpha: f64, x_min: f64 },
    /// Stable law `S_α(scale, skew, 0)` (`α = 2` is `N(0, 2 scale²)`).
    Stable { alpha: f64, skew: f64, scale: f64 },
    Gaussian { sigma: f64 },
    Rademacher,
    Constant { c: f64 },
    /// Pareto with index `β` and minimum `x_min` (positive).
    ParetoPositive { beta: f64, x_min: f64 },
}

impl InnovationModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            InnovationModel::ParetoRademacher { alpha, x_min } => alpha > 0.0 && alpha <= 2.0 && x_min > 0.0,
            InnovationModel::Stable { alpha, skew, scale } => {
                alpha > 0.0 && alpha <= 2.0 && (-1.0..=1.0).contains(&skew) && scale > 0.0
            }
            InnovationModel::Gaussian { sigma } => sigma > 0.0 && sigma.is_finite(),
            InnovationModel::Rademacher => true,
            InnovationModel::Constant { c } => c.is_finite(),
            InnovationModel::ParetoPositive { beta, x_min } => beta > 0.0 && beta < 1.0 && x_min > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(bad(format!("invalid innovation model {self:?}")))
        }
    }

    /// One draw.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            InnovationModel::ParetoRademacher { alpha, x_min } => {
                let w = x_min * open_uniform(rng).powf(-1.0 / alpha);
                if rng.random::<bool>() {
                    w
                } else {
                    -w
                }
            }
            InnovationModel::Stable { alpha, skew, scale } => {
                let u = PI * (rng.random::<f64>() - 0.5);
                let e: f64 = Exp1.sample(rng);
                scale * stable_transform(alpha, skew, u, e)
            }
            InnovationModel::Gaussian { sigma } => Normal::new(0.0, sigma).expect("validated sigma").sample(rng),
            InnovationModel::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            InnovationModel::Constant { c } => c,
            InnovationModel::ParetoPositive { beta, x_min } => x_min * open_uniform(rng).powf(-1.0 / beta),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match *self {
            InnovationModel::ParetoRademacher { .. } | InnovationModel::Gaussian { .. } | InnovationModel::Rademacher => true,
            InnovationModel::Stable { skew, .. } => skew == 0.0,
            InnovationModel::Constant { c } => c == 0.0,
            InnovationModel::ParetoPositive { .. } => false,
        }
    }

    /// `E[s θ 1{|s θ| <= 1}]` for `s > 0`: 0 by odd symmetry, closed forms for the
    /// constant and Pareto laws, and midpoint quadrature over the two inputs of the
    /// stable transform otherwise.
    pub fn truncated_mean(&self, s: f64) -> f64 {
        if self.is_symmetric() {
            return 0.0;
        }
        match *self {
            InnovationModel::Constant { c } => {
                if (s * c).abs() <= 1.0 {
                    s * c
                } else {
                    0.0
                }
            }
            InnovationModel::ParetoPositive { beta, x_min } => {
                let top = 1.0 / s;
                if top <= x_min {
                    0.0
                } else {
                    s * beta * x_min.powf(beta) * (top.powf(1.0 - beta) - x_min.powf(1.0 - beta)) / (1.0 - beta)
                }
            }
            InnovationModel::Stable { alpha, skew, scale } => {
                let m = 1500;
                let mut acc = 0.0;
                for i in 0..m {
                    let u = PI * ((i as f64 + 0.5) / m as f64 - 0.5);
                    for j in 0..m {
                        let e = -(-(j as f64 + 0.5) / m as f64).ln_1p();
                        let v = s * scale * stable_transform(alpha, skew, u, e);
                        if v.abs() <= 1.0 {
                            acc += v;
                        }
                    }
                }
                acc / (m * m) as f64
            }
            _ => 0.0,
        }
    }
}

/// Trigonometric inversion for a standard stable variate from `u ~ U(-π/2, π/2)` and
/// `e ~ Exp(1)`:
/// for `α != 1`, `S sin(α(u + B)) / cos(u)^{1/α} · (cos(u − α(u + B)) / e)^{(1−α)/α}` with
/// `B = atan(β tan(πα/2)) / α`, `S = (1 + β² tan²(πα/2))^{1/(2α)}`;
/// for `α = 1`, `(2/π)[(π/2 + βu) tan u − β ln((π/2) e cos u / (π/2 + βu))]`.
pub fn stable_transform(alpha: f64, skew: f64, u: f64, e: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        let a = FRAC_PI_2 + skew * u;
        return (a * u.tan() - skew * (FRAC_PI_2 * e * u.cos() / a).ln()) / FRAC_PI_2;
    }
    let t = skew * (PI * alpha / 2.0).tan();
    let b = t.atan() / alpha;
    let s = (1.0 + t * t).powf(1.0 / (2.0 * alpha));
    s * (alpha * (u + b)).sin() / u.cos().powf(1.0 / alpha) * ((u - alpha * (u + b)).cos() / e).powf((1.0 - alpha) / alpha)
}

/// `count` i.i.d. draws from one stream.
pub fn sample_innovations(model: &InnovationModel, count: usize, seed: Seed) -> Result<Vec<f64>> {
    model.validate()?;
    if count == 0 {
        return Err(bad("count must be at least 1"));
    }
    let mut rng = seed.rng();
    Ok((0..count).map(|_| model.sample(&mut rng)).collect())
}

/// Waiting-time law between renewal epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Waits {
    /// Deterministic unit waits (the moving-average case); exponent convention `β = 1`.
    Unit,
    /// Pareto waits `P(J > x) = (x_min / x)^β`.
    Pareto {
        beta: f64,
        #[serde(default = "one")]
        x_min: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl Waits {
    pub fn beta(&self) -> f64 {
        match *self {
            Waits::Unit => 1.0,
            Waits::Pareto { beta, .. } => beta,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Waits::Unit => Ok(()),
            Waits::Pareto { beta, x_min } if beta > 0.0 && beta < 1.0 && x_min > 0.0 => Ok(()),
            w => Err(bad(format!("invalid waiting-time law {w:?}"))),
        }
    }
}

/// Dependence between waits and innovations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    #[default]
    Uncoupled,
    /// One uniform `U_k` drives both `J_k = x_min U^{-1/β}` and
    /// `θ_k = ξ_k x_min' U^{-1/α}`: long waits come with large jumps.
    /// Requires Pareto waits, Pareto–Rademacher innovations and no lags.
    Coupled,
}

/// Moving average / CTRW configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtrwConfig {
    pub alpha: f64,
    pub waits: Waits,
    /// Lag coefficients `c_0, …, c_J`.
    pub coeffs: Vec<f64>,
    /// Divide `ζ` by `Σ c_j`, so that the limit does not scale with the coefficients.
    #[serde(default = "yes")]
    pub normalize: bool,
    #[serde(default)]
    pub coupling: Coupling,
    pub scale_n: u64,
    pub horizon: f64,
    pub innovations: InnovationModel,
}

impl CtrwConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(bad(format!("alpha must lie in (0, 2], got {}", self.alpha)));
        }
        if self.coeffs.is_empty() || !(self.coeffs[0] > 0.0) {
            return Err(bad("c_0 must be positive"));
        }
        if self.coeffs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(bad("coefficients must be finite and nonnegative"));
        }
        if self.scale_n == 0 {
            return Err(bad("scale_n must be at least 1"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(bad("horizon must be positive and finite"));
        }
        self.waits.validate()?;
        self.innovations.validate()?;
        if self.coupling == Coupling::Coupled {
            let ok = matches!(self.waits, Waits::Pareto { .. })
                && matches!(self.innovations, InnovationModel::ParetoRademacher { .. })
                && self.coeffs.len() == 1;
            if !ok {
                return Err(bad(
                    "the coupled link needs Pareto waits, pareto_rademacher innovations and a single coefficient",
                ));
            }
        }
        Ok(())
    }

    fn lags(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn coeff_scale(&self) -> f64 {
        if self.normalize {
            self.coeffs.iter().sum()
        } else {
            1.0
        }
    }

    pub fn is_uncorrelated(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    /// The spatial scaling `n^{-β/α}` (with `β = 1` for unit waits).
    pub fn space_scale(&self) -> f64 {
        (self.scale_n as f64).powf(-self.waits.beta() / self.alpha)
    }
}

/// A generated CTRW with the internals needed by decompositions and readouts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtrwSample {
    pub path: StepPath,
    /// `t ↦ N(n t)`, the renewal count on the path's time scale.
    pub count: StepPath,
    /// Jump epochs `σ_k = L_k / n` within the horizon.
    pub epochs: Vec<f64>,
    /// Innovations `θ_{1-J}, …, θ_K`.
    pub thetas: Vec<f64>,
    /// Unscaled jump variables `ζ_1, …, ζ_K`.
    pub zetas: Vec<f64>,
    /// The shared uniforms of the coupled link, if coupled.
    pub uniforms: Option<Vec<f64>>,
}

/// Moving average `X_t = n^{-1/α} Σ_{k<=⌊nt⌋} ζ_k` with `ζ_i = Σ_j c_j θ_{i-j}` (divided by
/// `Σ c_j` when normalising); requires unit waits.
pub fn moving_average_path(config: &CtrwConfig, seed: Seed) -> Result<StepPath> {
    if config.waits != Waits::Unit {
        return Err(bad("moving averages use deterministic unit waits"));
    }
    Ok(ctrw_path(config, seed)?.path)
}

fn correlate(config: &CtrwConfig, thetas: &[f64], k: usize) -> f64 {
    // thetas[0] is θ_{1-J}; ζ_k = Σ_j c_j θ_{k-j} lives at thetas[k - 1 + J - j]
    let lag = config.lags();
    let z: f64 = config
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| c * thetas[k - 1 + lag - j])
        .sum();
    z / config.coeff_scale()
}

/// CTRW `X_t = n^{-β/α} Σ_{k<=N(nt)} ζ_k` with jumps at the scaled epochs `L_k / n`.
pub fn ctrw_path(config: &CtrwConfig, seed: Seed) -> Result<CtrwSample> {
    config.validate()?;
    let n = config.scale_n as f64;
    let limit = n * config.horizon;
    let lag = config.lags();
    let mut innov = seed.component(component::INNOVATIONS).rng();
    let mut waits = seed.component(component::WAITS).rng();
    let mut thetas: Vec<f64> = Vec::new();
    let mut renewal_times: Vec<f64> = Vec::new();
    let mut uniforms = None;
    match (config.waits, config.coupling) {
        (Waits::Unit, _) => {
            let k = limit.floor() as usize;
            thetas = (0..k + lag).map(|_| config.innovations.sample(&mut innov)).collect();
            renewal_times = (1..=k).map(|i| i as f64).collect();
        }
        (Waits::Pareto { beta, x_min }, Coupling::Uncoupled) => {
            let mut l = 0.0;
            for _ in 0..lag {
                thetas.push(config.innovations.sample(&mut innov));
            }
            loop {
                l += x_min * open_uniform(&mut waits).powf(-1.0 / beta);
                if l > limit {
                    break;
                }
                renewal_times.push(l);
                thetas.push(config.innovations.sample(&mut innov));
            }
        }
        (Waits::Pareto { beta, x_min }, Coupling::Coupled) => {
            let InnovationModel::ParetoRademacher { alpha: a, x_min: xm } = config.innovations else {
                unreachable!("validated")
            };
            let mut link = seed.component(component::COUPLED).rng();
            let mut us = Vec::new();
            let mut l = 0.0;
            loop {
                let u = open_uniform(&mut link);
                l += x_min * u.powf(-1.0 / beta);
                if l > limit {
                    break;
                }
                let sign = if innov.random::<bool>() { 1.0 } else { -1.0 };
                us.push(u);
                renewal_times.push(l);
                thetas.push(sign * xm * u.powf(-1.0 / a));
            }
            uniforms = Some(us);
        }
    }
    let s = config.space_scale();
    let k = renewal_times.len();
    let zetas: Vec<f64> = (1..=k).map(|i| correlate(config, &thetas, i)).collect();
    let mut times = vec![0.0];
    let mut values = vec![0.0];
    let mut counts = vec![0.0];
    let mut epochs = Vec::with_capacity(k);
    let mut acc = 0.0;
    for i in 0..k {
        let t = renewal_times[i] / n;
        acc += s * zetas[i];
        epochs.push(t);
        if t > *times.last().unwrap() {
            times.push(t);
            values.push(acc);
            counts.push((i + 1) as f64);
        } else {
            // epochs merged by rounding: accumulate into the same breakpoint
            *values.last_mut().unwrap() = acc;
            *counts.last_mut().unwrap() = (i + 1) as f64;
        }
    }
    Ok(CtrwSample {
        path: StepPath::scalar(config.horizon, times.clone(), values)?,
        count: StepPath::scalar(config.horizon, times, counts)?,
        epochs,
        thetas,
        zetas,
        uniforms,
    })
}

/// `X = M + (large jumps) + (drift)` for an uncorrelated CTRW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Compensated small-jump sum.
    pub martingale: StepPath,
    /// `Σ ζ^n_k 1{|ζ^n_k| > 1}`.
    pub large: StepPath,
    /// `N(n t) E[ζ^n_1 1{|ζ^n_1| <= 1}]`.
    pub drift: StepPath,
    /// `E[ζ^n_1 1{|ζ^n_1| <= 1}]`.
    pub truncated_mean: f64,
}

/// Splits an uncorrelated CTRW into compensated small jumps, large jumps and drift.
/// The three parts sum to the path up to floating-point rounding of the running sums.
pub fn ctrw_decompose(config: &CtrwConfig, sample: &CtrwSample) -> Result<Decomposition> {
    if !config.is_uncorrelated() {
        return Err(Error::NotUncorrelated);
    }
    let s = config.space_scale();
    // ζ^n = s ζ and ζ = c_0 θ / (Σ c) = θ under normalisation
    let m = config.innovations.truncated_mean(s * config.coeffs[0] / config.coeff_scale());
    let p = &sample.path;
    let ts = p.breakpoints();
    let (mut mv, mut lv, mut dv) = (vec![0.0], vec![0.0], vec![0.0]);
    let (mut small, mut large) = (0.0, 0.0);
    let mut z = 0usize;
    for i in 1..ts.len() {
        let count = sample.count.value(i)[0] as usize;
        while z < count {
            let j = s * sample.zetas[z];
            if j.abs() <= 1.0 {
                small += j;
            } else {
                large += j;
            }
            z += 1;
        }
        let drift = count as f64 * m;
        mv.push(small - drift);
        lv.push(large);
        dv.push(drift);
    }
    let h = p.horizon();
    Ok(Decomposition {
        martingale: StepPath::scalar(h, ts.to_vec(), mv)?,
        large: StepPath::scalar(h, ts.to_vec(), lv)?,
        drift: StepPath::scalar(h, ts.to_vec(), dv)?,
        truncated_mean: m,
    })
}

/// `D^{-1}(t) = N(n^{1/β} t) / n`: the right-continuous inverse of `s ↦ L(⌊ns⌋ + 1) / n^{1/β}`,
/// jumping by `1/n` at each `L_k / n^{1/β}`. Unit waits give `t ↦ ⌊nt⌋ / n`.
pub fn inverse_subordinator_from_waits(waits: &Waits, n: u64, horizon: f64, seed: Seed) -> Result<StepPath> {
    waits.validate()?;
    if n == 0 || !(horizon > 0.0) {
        return Err(bad("need n >= 1 and a positive horizon"));
    }
    let nf = n as f64;
    let time_scale = nf.powf(1.0 / waits.beta());
    let limit = time_scale * horizon;
    let mut rng = seed.component(component::WAITS).rng();
    let mut times = vec![0.0];
    let mut values = vec![0.0];
    let mut l = 0.0;
    let mut k = 0u64;
    loop {
        l += match *waits {
            Waits::Unit => 1.0,
            Waits::Pareto { beta, x_min } => x_min * open_uniform(&mut rng).powf(-1.0 / beta),
        };
        if l > limit {
            break;
        }
        k += 1;
        let t = l / time_scale;
        if t > *times.last().unwrap() {
            times.push(t);
            values.push(k as f64 / nf);
        } else {
            *values.last_mut().unwrap() = k as f64 / nf;
        }
    }
    StepPath::scalar(horizon, times, values)
}

/// Inverse subordinator for Pareto(`β`, 1) waits.
pub fn inverse_subordinator_path(beta: f64, n: u64, horizon: f64, seed: Seed) -> Result<StepPath> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(bad(format!("beta must lie in (0, 1), got {beta}")));
    }
    inverse_subordinator_from_waits(&Waits::Pareto { beta, x_min: 1.0 }, n, horizon, seed)
}

/// `f(t) = t^{-1} cos(t^{-1}) − sin(t^{-1})`, `f(0) = 0`.
pub fn sj_f(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        let w = 1.0 / t;
        w * w.cos() - w.sin()
    }
}

/// `g^n(t) = (T + 1/n − t) 1_{[T + 1/n − n^{-1/2}, T)}(t)`.
pub fn sj_g(n: f64, horizon: f64, t: f64) -> f64 {
    let a = horizon + 1.0 / n - 1.0 / n.sqrt();
    if t >= a && t < horizon {
        horizon + 1.0 / n - t
    } else {
        0.0
    }
}

/// `Λ^n(t) = g^n(t) sin(1 / g^n(t))`, 0 where `g^n` vanishes.
pub fn sj_lambda(n: f64, horizon: f64, t: f64) -> f64 {
    let g = sj_g(n, horizon, t);
    if g == 0.0 {
        0.0
    } else {
        g * (1.0 / g).sin()
    }
}

/// `Ψ^n(t) = f(g^n(t)) P((t, T]) / (1 − ε)` with `P((t, T]) = (1 − ε)(T − t)/T + ε` for `t < T`.
pub fn sj_psi(n: f64, horizon: f64, eps: f64, t: f64) -> f64 {
    let tail = if t < horizon {
        (1.0 - eps) * (horizon - t) / horizon + eps
    } else {
        0.0
    };
    sj_f(sj_g(n, horizon, t)) * tail / (1.0 - eps)
}

/// Continuous compensator profile: `Λ^n(t ∧ T−) − Λ^n(a)` for `t >= a = T + 1/n − n^{-1/2}`,
/// 0 before. `Λ^n` itself jumps at both ends of the window (by `n^{-1/2} sin(√n)` and
/// `n^{-1} sin(n)`), so `∫_0^t f(g^n(s)) ds` — the compensator density — is this shifted,
/// continuous version.
pub fn sj_compensator(n: f64, horizon: f64, t: f64) -> f64 {
    let a = horizon + 1.0 / n - 1.0 / n.sqrt();
    if t < a {
        return 0.0;
    }
    let phi = |g: f64| g * (1.0 / g).sin();
    let g = horizon + 1.0 / n - t.min(horizon);
    phi(g) - phi(1.0 / n.sqrt())
}

/// `M^n_t = Ψ^n(τ) 1{τ <= t} − C^n(t ∧ τ) / T` with `C^n` the continuous compensator
/// profile of [`sj_compensator`].
pub fn sj_martingale_value(n: f64, horizon: f64, eps: f64, tau: f64, t: f64) -> f64 {
    let jump = if tau <= t { sj_psi(n, horizon, eps, tau) } else { 0.0 };
    jump - sj_compensator(n, horizon, t.min(tau)) / horizon
}

fn sj_check(n: u64, horizon: f64, eps: f64) -> Result<()> {
    if n < 4 {
        return Err(bad("n must be at least 4"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(bad("epsilon must lie in (0, 1)"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(bad("horizon must be positive"));
    }
    // the oscillating window must sit inside [0, T]
    if horizon + 1.0 / n as f64 - 1.0 / (n as f64).sqrt() < 0.0 {
        return Err(bad("horizon too short for this n"));
    }
    Ok(())
}

/// Draws `τ`: equal to `T` with probability `ε`, otherwise uniform on `[0, T)`.
pub fn sj_draw_tau(horizon: f64, eps: f64, seed: Seed) -> f64 {
    let mut rng = seed.component(component::TAU).rng();
    if rng.random::<f64>() < eps {
        horizon
    } else {
        horizon * rng.random::<f64>()
    }
}

/// Sampling grid for `Λ^n` on `[0, T]`: uniform in `1/g` with `per_oscillation` points per
/// period of `sin(1/g)`, so the wavelength `~ 2π g²` (down to `n^{-2}` near `T`) is resolved.
pub fn sj_grid(n: u64, horizon: f64, per_oscillation: usize) -> Vec<f64> {
    let nf = n as f64;
    let a = horizon + 1.0 / nf - 1.0 / nf.sqrt();
    let mut out = vec![0.0];
    if a > 0.0 {
        out.push(a);
    }
    let step = 2.0 * PI / per_oscillation.max(2) as f64;
    let mut w = nf.sqrt() + step;
    while w < nf {
        let t = horizon + 1.0 / nf - 1.0 / w;
        if t > *out.last().unwrap() && t < horizon {
            out.push(t);
        }
        w += step;
    }
    out
}

/// The single-jump martingale with its jump time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleJumpSample {
    pub path: StepPath,
    pub tau: f64,
}

/// Grid-sampled `M^n` on `[0, T]` (default 16 points per oscillation of `Λ^n`).
pub fn single_jump_martingale(
    n: u64,
    horizon: f64,
    eps: f64,
    seed: Seed,
    per_oscillation: Option<usize>,
) -> Result<SingleJumpSample> {
    sj_check(n, horizon, eps)?;
    let nf = n as f64;
    let tau = sj_draw_tau(horizon, eps, seed);
    let grid = sj_grid(n, horizon, per_oscillation.unwrap_or(16));
    let mut times: Vec<f64> = grid.into_iter().filter(|&t| t < tau).collect();
    if tau > *times.last().unwrap() {
        times.push(tau);
    }
    let values = times.iter().map(|&t| sj_martingale_value(nf, horizon, eps, tau, t)).collect();
    Ok(SingleJumpSample {
        path: StepPath::scalar(horizon, times, values)?,
        tau,
    })
}

/// Total variation of the grid-sampled compensator `Λ^n(· ∧ T)` over `[T + 1/n − n^{-1/2}, T)`.
pub fn sj_compensator_tv(n: u64, horizon: f64, per_oscillation: usize) -> f64 {
    let nf = n as f64;
    let grid = sj_grid(n, horizon, per_oscillation);
    grid.windows(2)
        .map(|w| (sj_lambda(nf, horizon, w[1]) - sj_lambda(nf, horizon, w[0])).abs())
        .sum()
}

/// `2π Σ_{k=⌈√n/2π⌉}^{⌊n/2π⌋} k`, the lower bound displayed for the compensator's variation.
pub fn sj_stated_tv_bound(n: u64) -> f64 {
    let nf = n as f64;
    let lo = (nf.sqrt() / (2.0 * PI)).ceil() as u64;
    let hi = (nf / (2.0 * PI)).floor() as u64;
    if hi < lo {
        return 0.0;
    }
    2.0 * PI * ((lo + hi) * (hi - lo + 1)) as f64 / 2.0
}

/// Sign with `sgn(0) = 0`.
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Integrand/integrator pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPair {
    pub h: StepPath,
    pub x: StepPath,
}

/// The exploding pair for a single-delay moving average with Pareto–Rademacher innovations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplodingSample {
    pub h: StepPath,
    pub x: StepPath,
    /// `Z_0, …, Z_{⌊nT⌋}`.
    pub z: Vec<f64>,
    /// `h_k`: the integrand's value on `[k/n, (k+1)/n)`, which `∫ h(s-) dX` reads at `(k+1)/n`.
    pub levels: Vec<f64>,
}

/// Parameters of [`exploding_pair`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplodingParams {
    pub n: u64,
    pub alpha: f64,
    pub epsilon: f64,
    pub x_min: f64,
    pub horizon: f64,
    #[serde(default = "one")]
    pub c0: f64,
    #[serde(default = "one")]
    pub c1: f64,
}

/// `X` jumps at `k/n` by `n^{-1/α}(c_0 Z_k + c_1 Z_{k-1})/(c_0 + c_1)`; the integrand is 0 up to
/// `2/n` and afterwards flips between 0 and `−n^{-ε} sgn(Z_k)` exactly when the sign of `Z`
/// changes, so that `Z_k (h_{k-1} − h_k) = n^{-ε} |Z_k| 1{sgn Z_k ≠ sgn Z_{k-1}}`.
pub fn exploding_pair(p: &ExplodingParams, seed: Seed) -> Result<ExplodingSample> {
    if !(p.alpha > 1.0 && p.alpha < 2.0) {
        return Err(bad("alpha must lie in (1, 2)"));
    }
    if !(p.epsilon > 0.0 && 1.0 / p.alpha + p.epsilon < 1.0) {
        return Err(bad("need epsilon > 0 and 1/alpha + epsilon < 1"));
    }
    if !(p.x_min > 0.0 && p.c0 > 0.0 && p.c1 > 0.0 && p.horizon > 0.0 && p.n >= 1) {
        return Err(bad("x_min, c0, c1, horizon must be positive and n >= 1"));
    }
    let nf = p.n as f64;
    let k = (nf * p.horizon).floor() as usize;
    let model = InnovationModel::ParetoRademacher {
        alpha: p.alpha,
        x_min: p.x_min,
    };
    let mut rng = seed.component(component::INNOVATIONS).rng();
    let z: Vec<f64> = (0..=k).map(|_| model.sample(&mut rng)).collect();
    let scale = nf.powf(-1.0 / p.alpha) / (p.c0 + p.c1);
    let level = nf.powf(-p.epsilon);
    let mut levels = vec![0.0; k + 1];
    for i in 2..=k {
        levels[i] = if sgn(z[i]) == sgn(z[i - 1]) {
            levels[i - 1]
        } else if levels[i - 1] == 0.0 {
            -level * sgn(z[i])
        } else {
            0.0
        };
    }
    let times: Vec<f64> = (0..=k).map(|i| i as f64 / nf).collect();
    let mut xv = vec![0.0];
    for i in 1..=k {
        xv.push(xv[i - 1] + scale * (p.c0 * z[i] + p.c1 * z[i - 1]));
    }
    Ok(ExplodingSample {
        h: StepPath::scalar(p.horizon, times.clone(), levels.clone())?,
        x: StepPath::scalar(p.horizon, times, xv)?,
        z,
        levels,
    })
}

/// The crossing-walk pair with its zero count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingSample {
    pub h: StepPath,
    pub x: StepPath,
    /// Number of returns to zero strictly before the cap `2 n^{-1/4}`.
    pub r: usize,
    /// Start of the last, unfinished crossing window (equals the cap if none is open).
    pub last_start: f64,
    pub cap: f64,
}

/// Fair ±1 signs from the bits of 64-bit words.
struct Signs {
    rng: ChaCha8Rng,
    word: u64,
    left: u32,
}

impl Signs {
    fn next(&mut self) -> f64 {
        if self.left == 0 {
            self.word = self.rng.random();
            self.left = 64;
        }
        let b = self.word & 1;
        self.word >>= 1;
        self.left -= 1;
        if b == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

/// `X = n^{-1/2} Σ_{k<=⌊nt⌋} ξ_k`; `H = −sgn(X_{τ_{2k-1}})` on `[τ_{2k-1}, τ_{2k})` where
/// `τ_1 = 1/n`, `τ_{2k}` is the next zero of `X` (capped at `2 n^{-1/4}`) and
/// `τ_{2k+1} = τ_{2k} + 1/n` (capped); `H = 0` after the cap.
pub fn crossing_pair(n: u64, horizon: f64, seed: Seed) -> Result<CrossingSample> {
    if n < 16 {
        return Err(bad("n must be at least 16"));
    }
    let nf = n as f64;
    let cap = 2.0 * nf.powf(-0.25);
    if !(horizon >= cap) {
        return Err(bad(format!("horizon must reach the cap 2 n^(-1/4) = {cap}")));
    }
    let k = (nf * horizon).floor() as usize;
    let mut signs = Signs {
        rng: seed.component(component::SIGNS).rng(),
        word: 0,
        left: 0,
    };
    let mut s = vec![0i64; k + 1];
    for i in 1..=k {
        s[i] = s[i - 1] + signs.next() as i64;
    }
    let unit = nf.powf(-0.5);
    let times: Vec<f64> = (0..=k).map(|i| i as f64 / nf).collect();
    let xv: Vec<f64> = s.iter().map(|&v| v as f64 * unit).collect();
    let mut ht = vec![0.0];
    let mut hv = vec![0.0];
    let mut r = 0;
    let mut start = 1usize;
    let last_start;
    loop {
        let t0 = start as f64 / nf;
        if t0 >= cap || start > k {
            last_start = cap;
            break;
        }
        let level = -sgn(s[start] as f64);
        ht.push(t0);
        hv.push(level);
        let zero = (start + 1..=k).find(|&i| s[i] == 0);
        match zero {
            Some(z) if (z as f64 / nf) < cap => {
                r += 1;
                ht.push(z as f64 / nf);
                hv.push(0.0);
                start = z + 1;
            }
            _ => {
                ht.push(cap);
                hv.push(0.0);
                last_start = t0;
                break;
            }
        }
    }
    // a window closing at t and the next opening at t + 1/n never collide; drop a
    // closing breakpoint that coincides with the next opening only if the cap hits
    let mut t2 = vec![ht[0]];
    let mut v2 = vec![hv[0]];
    for i in 1..ht.len() {
        if ht[i] > *t2.last().unwrap() {
            t2.push(ht[i]);
            v2.push(hv[i]);
        } else {
            *v2.last_mut().unwrap() = hv[i];
        }
    }
    Ok(CrossingSample {
        h: StepPath::scalar(horizon, t2, v2)?,
        x: StepPath::scalar(horizon, times, xv)?,
        r,
        last_start,
        cap,
    })
}

/// Right-hand side of the crossing identity
/// `∫_0^t H_- dX = n^{-1/2} r − sgn(X_{τ_{2r+1}}) (X_c − X_{τ_{2r+1}})` for `t >= c`.
pub fn crossing_identity_rhs(sample: &CrossingSample, n: u64) -> f64 {
    let head = (n as f64).powf(-0.5) * sample.r as f64;
    if sample.last_start >= sample.cap {
        return head;
    }
    let x0 = sample.x.at(sample.last_start)[0];
    let xc = sample.x.at(sample.cap)[0];
    head - sgn(x0) * (xc - x0)
}

/// Closed-form example paths. For single-path examples `h` is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExamplePaths {
    pub h: Option<StepPath>,
    pub x: StepPath,
}

/// Identifiers accepted by [`deterministic_example`].
pub const EXAMPLE_IDS: [&str; 4] = ["alternating", "sawtooth", "zigzag", "fig6"];

/// `c_1 1_{[a, b)} + c_2 1_{[b, T]}` as a step path, tolerating `a = 0` and `c_1 = 0`.
fn two_level(horizon: f64, a: f64, b: f64, c1: f64, c2: f64) -> Result<StepPath> {
    let mut t = vec![0.0];
    let mut v = vec![0.0];
    if a > 0.0 {
        t.push(a);
        v.push(c1);
    } else {
        v[0] = c1;
    }
    if b > 0.0 && b > a {
        t.push(b);
        v.push(c2);
    } else {
        *v.last_mut().unwrap() = c2;
    }
    StepPath::scalar(horizon, t, v)
}

/// Exact example paths:
///
/// * `alternating`: `X_t = Σ_{k<=⌊n²t⌋} (−1)^k / n` on `[0, 1]`;
/// * `sawtooth`: on `[0, 1]`, `H = n^{-1/4}` on `[i/n, i/n + 1/(2n))` and the integrator is the
///   step version of the ramp `n^{-1/4}(nt − i)` sampled at `i/n`, `i/n + 1/(2n)`,
///   `i/n + 3/(4n)` (values 0, half and full height) and dropping back at `(i+1)/n`;
///   `∫_0^1 H_- dX = √n / 2`;
/// * `zigzag`: `h = x_n = ½ 1_{[1−1/n, 1)} + 1_{[1, 2]}`, `x = y_n = 1_{[1−2/n, 2]}` on `[0, 2]`;
/// * `fig6`: `h = x_n = ¼ 1_{[1−2/n, 1)} + ¾ 1_{[1, 2]}`, `x = y_n = ½ 1_{[1−1/n, 1)} + 1_{[1, 2]}`.
pub fn deterministic_example(id: &str, n: u64) -> Result<ExamplePaths> {
    if !EXAMPLE_IDS.contains(&id) {
        return Err(Error::UnknownId(id.to_string()));
    }
    if n < 2 {
        return Err(bad("n must be at least 2"));
    }
    let nf = n as f64;
    match id {
        "alternating" => {
            let m = n * n;
            let mf = m as f64;
            let mut t = Vec::with_capacity(m as usize + 1);
            let mut v = Vec::with_capacity(m as usize + 1);
            t.push(0.0);
            v.push(0.0);
            let mut acc = 0.0;
            for k in 1..=m {
                acc += if k % 2 == 0 { 1.0 / nf } else { -1.0 / nf };
                t.push(k as f64 / mf);
                v.push(acc);
            }
            Ok(ExamplePaths {
                h: None,
                x: StepPath::scalar(1.0, t, v)?,
            })
        }
        "sawtooth" => {
            let amp = nf.powf(-0.25);
            let (mut ht, mut hv, mut xt, mut xv) = (vec![], vec![], vec![], vec![]);
            for i in 0..n {
                let base = i as f64 / nf;
                let step = |q: f64| (4.0 * i as f64 + q) / (4.0 * nf);
                ht.extend([base, step(2.0)]);
                hv.extend([amp, 0.0]);
                xt.extend([base, step(2.0), step(3.0)]);
                xv.extend([0.0, amp / 2.0, amp]);
            }
            xt.push(1.0);
            xv.push(0.0);
            Ok(ExamplePaths {
                h: Some(StepPath::scalar(1.0, ht, hv)?),
                x: StepPath::scalar(1.0, xt, xv)?,
            })
        }
        "zigzag" => Ok(ExamplePaths {
            h: Some(two_level(2.0, 1.0 - 1.0 / nf, 1.0, 0.5, 1.0)?),
            x: two_level(2.0, 1.0 - 2.0 / nf, 1.0 - 2.0 / nf, 1.0, 1.0)?,
        }),
        _ => Ok(ExamplePaths {
            h: Some(two_level(2.0, 1.0 - 2.0 / nf, 1.0, 0.25, 0.75)?),
            x: two_level(2.0, 1.0 - 1.0 / nf, 1.0, 0.5, 1.0)?,
        }),
    }
}

/// Limits of the `zigzag` and `fig6` families: `(x, y)`.
pub fn example_limit(id: &str) -> Result<(StepPath, StepPath)> {
    match id {
        "zigzag" => {
            let x = StepPath::scalar(2.0, vec![0.0, 1.0], vec![0.0, 1.0])?;
            Ok((x.clone(), x))
        }
        "fig6" => Ok((
            StepPath::scalar(2.0, vec![0.0, 1.0], vec![0.0, 0.75])?,
            StepPath::scalar(2.0, vec![0.0, 1.0], vec![0.0, 1.0])?,
        )),
        other => Err(Error::UnknownId(other.to_string())),
    }
}

/// `H_t = Σ_i g(t_i, X(Ξ(t_i))) 1_{[t_i, t_{i+1})}` where `Ξ(t_i) = σ_{k−J}` for the last jump epoch
/// `σ_k <= t_i`, and `X(Ξ) = X(0−) = X(0)` when `k − J < 1`. Before the first readout time `H = 0`.
pub fn delayed_readout_integrand(
    x: &StepPath,
    epochs: Option<&[f64]>,
    times: &[f64],
    g: impl Fn(f64, &[f64]) -> Vec<f64>,
    delay: usize,
) -> Result<StepPath> {
    let epochs = epochs.ok_or_else(|| Error::MissingInternals("jump epochs of the integrator".into()))?;
    if times.is_empty() {
        return Err(bad("at least one readout time is required"));
    }
    let mut out_t = Vec::with_capacity(times.len() + 1);
    let mut out_v = Vec::new();
    let mut dim = None;
    if times[0] > 0.0 {
        out_t.push(0.0);
    }
    for &t in times {
        let k = epochs.partition_point(|&s| s <= t);
        let readout = if k > delay { x.at(epochs[k - delay - 1]) } else { x.start_value() };
        let v = g(t, readout);
        match dim {
            None => {
                dim = Some(v.len());
                if times[0] > 0.0 {
                    out_v.extend(std::iter::repeat_n(0.0, v.len()));
                }
            }
            Some(d) if d != v.len() => {
                return Err(Error::DimensionMismatch { expected: d, found: v.len() });
            }
            _ => {}
        }
        out_t.push(t);
        out_v.extend(v);
    }
    StepPath::from_flat(dim.unwrap_or(1), x.horizon(), out_t, out_v)
}
