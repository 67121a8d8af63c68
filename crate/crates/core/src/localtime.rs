//! Symmetric stable paths of the symmetrized process and box-kernel local
//! times.
//!
//! The process has exponent `2c|ξ|^β`, so one step of length `Δt` is a
//! symmetric stable variable with scale `σ = (2cΔt)^{1/β}`. For `β < 2` it
//! is drawn by Chambers–Mallows–Stuck from `V ~ U(-π/2, π/2)` then
//! `W ~ Exp(1)`; for `β = 2` it is `σ√2·Z`.
//!
//! On a path `X_k = X(kΔt)` the local time at `y` up to `s = nΔt + f` is
//!
//! ```text
//! L̂^y_s = (Δt·#{k < n : |X_k - y| < ε} + f·1{|X_n - y| < ε}) / (2ε).
//! ```
//!
//! Monte Carlo paths use `stream(seed, LOCAL_TIME, path)` and draw the
//! exponential time `S(α)` (when needed) before any increment.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

#[allow(unused_imports)] // float methods when std is absent
use num_traits::Float;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::kernel;
use crate::levy::LevyModel;
use crate::quad::{self, Tolerance};
use crate::rng::{self, domain, Stream};
use crate::stats::Moments;

/// Median of `|X|` for the symmetric stable law with `E e^{iξX} = e^{-|ξ|^β}`.
pub fn unit_median_abs(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(invalid("beta", "beta must lie in (0,2]"));
    }
    // P(|X| < m) = (2/π) ∫₀^∞ sin(mξ)/ξ · e^{-ξ^β} dξ
    let top = 45f64.powf(1.0 / beta);
    let cdf = |m: f64| -> Result<f64> {
        let f = |xi: f64| {
            let s = if xi == 0.0 { m } else { (m * xi).sin() / xi };
            s * (-xi.powf(beta)).exp()
        };
        let (v, _) =
            quad::integrate(f, 0.0, top, Tolerance::absolute(1e-12)).map_err(|e| e.into_error("stable median", 0))?;
        Ok(2.0 / PI * v)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while cdf(hi)? < 0.5 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid)? < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Unit symmetric stable draw (`E e^{iξX} = e^{-|ξ|^β}`), `β ∈ (0, 2]`.
pub fn unit_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    if beta == 2.0 {
        let z: f64 = rng.sample(StandardNormal);
        return core::f64::consts::SQRT_2 * z;
    }
    loop {
        let v = PI * (rng.random::<f64>() - 0.5);
        let w: f64 = rng.sample(Exp1);
        let cv = v.cos();
        if cv <= 0.0 || w <= 0.0 {
            continue;
        }
        if beta == 1.0 {
            return v.tan();
        }
        return (beta * v).sin() / cv.powf(1.0 / beta) * (((1.0 - beta) * v).cos() / w).powf((1.0 - beta) / beta);
    }
}

/// One increment over `Δt` of the process with exponent `2c|ξ|^β`.
pub fn stable_increment<R: Rng + ?Sized>(beta: f64, c: f64, dt: f64, rng: &mut R) -> f64 {
    (2.0 * c * dt).powf(1.0 / beta) * unit_stable(beta, rng)
}

/// Path parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    /// Index `β ∈ (1, 2]`.
    pub beta: f64,
    /// Scale: the exponent is `2c|ξ|^β`.
    pub c: f64,
    /// Step `Δt`.
    pub dt: f64,
    /// Horizon for fixed-time runs.
    pub horizon: f64,
    /// Start for fixed-time runs.
    pub x0: f64,
    /// Bandwidth `ε`.
    pub eps: f64,
    /// Root seed.
    pub seed: u64,
}

/// Over-smoothing limit: `ε` must stay below this multiple of the median
/// absolute increment.
pub const MAX_EPS_STEPS: f64 = 2.0;
/// Resolution limit: `ε` must be at least this fraction of the median
/// absolute increment.
pub const MIN_EPS_STEPS: f64 = 0.125;

impl PathConfig {
    /// Config with horizon 1, start 0, seed 0 and bandwidth `Δt^{1/β}`.
    pub fn new(beta: f64, c: f64, dt: f64) -> Result<Self> {
        let cfg = Self { beta, c, dt, horizon: 1.0, x0: 0.0, eps: dt.powf(1.0 / beta), seed: 0 };
        cfg.validate()?;
        Ok(cfg)
    }

    /// With another bandwidth.
    pub fn with_eps(self, eps: f64) -> Self {
        Self { eps, ..self }
    }

    /// With another root seed.
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    /// Parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 1.0 && self.beta <= 2.0) {
            return Err(invalid("beta", "local times need beta in (1,2]"));
        }
        for (name, v) in [("c", self.c), ("dt", self.dt), ("horizon", self.horizon), ("eps", self.eps)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be positive"));
            }
        }
        if !self.x0.is_finite() {
            return Err(invalid("x0", "must be finite"));
        }
        Ok(())
    }

    /// The single-process model whose symmetrization this path follows.
    pub fn model(&self) -> Result<LevyModel> {
        LevyModel::stable(self.beta, self.c)
    }

    /// Step scale `σ = (2cΔt)^{1/β}`.
    pub fn step_scale(&self) -> f64 {
        (2.0 * self.c * self.dt).powf(1.0 / self.beta)
    }
}

fn check_bandwidth(eps: f64, median: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::Bandwidth { eps, reason: "bandwidth must be positive".into() });
    }
    if eps >= MAX_EPS_STEPS * median {
        return Err(Error::Bandwidth {
            eps,
            reason: format!("over-smoothing: eps >= {MAX_EPS_STEPS} x median step {median:.3e}"),
        });
    }
    if eps < MIN_EPS_STEPS * median {
        return Err(Error::Bandwidth {
            eps,
            reason: format!("below step resolution: eps < {MIN_EPS_STEPS} x median step {median:.3e}"),
        });
    }
    Ok(())
}

/// Local time at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalTimeEstimate {
    /// Level `y`.
    pub level: f64,
    /// `L̂` (a path average when `paths > 1`).
    pub value: f64,
    /// Bandwidth.
    pub eps: f64,
    /// Number of paths.
    pub paths: u64,
}

/// A discretely observed path `X_0, …, X_n` over `[0, duration]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    dt: f64,
    duration: f64,
    positions: Vec<f64>,
    median_step: f64,
}

impl Path {
    /// Path from given positions; `median_step` sets the bandwidth limits.
    pub fn from_positions(dt: f64, duration: f64, positions: Vec<f64>, median_step: f64) -> Result<Self> {
        if !(dt > 0.0 && duration >= 0.0) {
            return Err(invalid("dt", "step must be positive and duration nonnegative"));
        }
        let need = (duration / dt).ceil() as usize + 1;
        if positions.len() < need {
            return Err(invalid("positions", "too few positions for the duration"));
        }
        Ok(Self { dt, duration, positions, median_step })
    }

    /// Positions.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Observed duration.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Box-kernel local time at `y` over `[0, s]`, `s ≤ duration`.
    pub fn local_time_until(&self, y: f64, eps: f64, s: f64) -> Result<f64> {
        check_bandwidth(eps, self.median_step)?;
        if !(0.0..=self.duration * (1.0 + 1e-12)).contains(&s) {
            return Err(invalid("s", "time outside the observed path"));
        }
        Ok(occupation(&self.positions, self.dt, y, eps, s))
    }

    /// Box-kernel local time at `y` over the whole path.
    pub fn local_time(&self, y: f64, eps: f64) -> Result<LocalTimeEstimate> {
        let value = self.local_time_until(y, eps, self.duration)?;
        Ok(LocalTimeEstimate { level: y, value, eps, paths: 1 })
    }

    /// Splits after `steps` steps into the head and the shifted tail.
    pub fn split(&self, steps: usize) -> Result<(Path, Path)> {
        let t = steps as f64 * self.dt;
        if t > self.duration || steps >= self.positions.len() {
            return Err(invalid("steps", "split point beyond the path"));
        }
        let head = Path { duration: t, positions: self.positions[..=steps].to_vec(), ..*self };
        let tail = Path { duration: self.duration - t, positions: self.positions[steps..].to_vec(), ..*self };
        Ok((head, tail))
    }
}

fn occupation(positions: &[f64], dt: f64, y: f64, eps: f64, s: f64) -> f64 {
    let full = ((s / dt).floor() as usize).min(positions.len() - 1);
    let frac = (s - full as f64 * dt).max(0.0);
    let count = positions[..full].iter().filter(|&&x| (x - y).abs() < eps).count();
    let last = if (positions[full] - y).abs() < eps { frac } else { 0.0 };
    (count as f64 * dt + last) / (2.0 * eps)
}

/// Path generator for one configuration.
#[derive(Debug, Clone, Copy)]
pub struct PathSampler {
    cfg: PathConfig,
    scale: f64,
    median_step: f64,
}

impl PathSampler {
    /// Validates the configuration and the bandwidth.
    pub fn new(cfg: PathConfig) -> Result<Self> {
        cfg.validate()?;
        let scale = cfg.step_scale();
        let median_step = scale * unit_median_abs(cfg.beta)?;
        check_bandwidth(cfg.eps, median_step)?;
        Ok(Self { cfg, scale, median_step })
    }

    /// Configuration.
    pub fn config(&self) -> &PathConfig {
        &self.cfg
    }

    /// Median absolute increment.
    pub fn median_step(&self) -> f64 {
        self.median_step
    }

    /// Path from `x` observed over `[0, duration]` (`⌈duration/Δt⌉` steps).
    pub fn path<R: Rng + ?Sized>(&self, x: f64, duration: f64, rng: &mut R) -> Path {
        let n = (duration / self.cfg.dt).ceil() as usize;
        let mut positions = Vec::with_capacity(n + 1);
        let mut cur = x;
        positions.push(cur);
        for _ in 0..n {
            cur += self.scale * unit_stable(self.cfg.beta, rng);
            positions.push(cur);
        }
        Path { dt: self.cfg.dt, duration, positions, median_step: self.median_step }
    }

    /// Stream of path `index`.
    pub fn stream(&self, index: u64) -> Stream {
        rng::stream(self.cfg.seed, domain::LOCAL_TIME, index)
    }

    /// First-order bias estimates `(ε-bias, Δt-bias)` of `E L̂^y_{S(α)}`
    /// started at `x`: the box-kernel average of `ū_α` around `x - y` minus
    /// `ū_α(x - y)`, and the weight `Δt/(2ε)` of a single step.
    pub fn bias_estimates(&self, alpha: f64, x: f64, y: f64) -> Result<(f64, f64)> {
        let model = self.cfg.model()?;
        let eps = self.cfg.eps;
        let d = (x - y).abs();
        let mut pieces = Vec::new();
        if d < eps {
            pieces.push((d - eps, d));
            pieces.push((d, d + eps));
        } else {
            pieces.push((d - eps, d + eps));
        }
        let mut avg = 0.0;
        let mut scratch = [0.0; 1];
        for (a, b) in pieces {
            let mut err = None;
            let mut f = |r: f64, out: &mut [f64]| match kernel::u_alpha(&model, alpha, r.abs()) {
                Ok(v) => out[0] = v,
                Err(e) => {
                    err.get_or_insert(e);
                    out[0] = 0.0;
                }
            };
            let mut out = [0.0; 1];
            quad::gauss_legendre(&mut f, a, b, &mut scratch, &mut out);
            if let Some(e) = err {
                return Err(e);
            }
            avg += out[0];
        }
        avg /= 2.0 * eps;
        let exact = kernel::u_alpha(&model, alpha, d)?;
        Ok((avg - exact, self.cfg.dt / (2.0 * eps)))
    }
}

/// Draws `S(α)` from a path stream.
fn exponential_time(alpha: f64, rng: &mut Stream) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / alpha
}

/// Moments over paths `paths` of `L̂^y_{S(α)}` started at `x`.
pub fn resolvent_moments(sampler: &PathSampler, alpha: f64, x: f64, y: f64, paths: Range<u64>) -> Result<Moments> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha", "alpha must be positive"));
    }
    let eps = sampler.config().eps;
    let mut m = Moments::new();
    for p in paths {
        let mut rng = sampler.stream(p);
        let s = exponential_time(alpha, &mut rng);
        let path = sampler.path(x, s, &mut rng);
        m.push(occupation(&path.positions, path.dt, y, eps, s));
    }
    Ok(m)
}

/// Resolvent normalization check `E^x L̂^y_{S(α)}` against `ū_α(x - y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventCheck {
    /// Path mean.
    pub estimate: f64,
    /// Its standard error.
    pub stderr: f64,
    /// `ū_α(x - y)` by quadrature.
    pub exact: f64,
    /// First-order bandwidth bias.
    pub eps_bias: f64,
    /// Single-step weight `Δt/(2ε)`.
    pub dt_bias: f64,
    /// Number of paths.
    pub paths: u64,
}

impl ResolventCheck {
    /// Assembles the check from accumulated path moments.
    pub fn from_moments(sampler: &PathSampler, alpha: f64, x: f64, y: f64, m: &Moments) -> Result<Self> {
        let exact = kernel::u_alpha(&sampler.config().model()?, alpha, (x - y).abs())?;
        let (eps_bias, dt_bias) = sampler.bias_estimates(alpha, x, y)?;
        Ok(Self { estimate: m.mean(), stderr: m.std_error(), exact, eps_bias, dt_bias, paths: m.count() })
    }

    /// `|estimate - target| ≤ rel·|target| + |ε-bias| + Δt-bias + 3 s.e.`
    pub fn within(&self, target: f64, rel: f64) -> bool {
        (self.estimate - target).abs() <= rel * target.abs() + self.eps_bias.abs() + self.dt_bias + 3.0 * self.stderr
    }
}

/// Serial resolvent check over `paths` paths.
pub fn resolvent_check(cfg: PathConfig, alpha: f64, x: f64, y: f64, paths: u64) -> Result<ResolventCheck> {
    let sampler = PathSampler::new(cfg)?;
    let m = resolvent_moments(&sampler, alpha, x, y, 0..paths)?;
    ResolventCheck::from_moments(&sampler, alpha, x, y, &m)
}

/// Moments over paths of `L̂^y_t` started at `x`.
pub fn fixed_time_moments(sampler: &PathSampler, x: f64, y: f64, t: f64, paths: Range<u64>) -> Result<Moments> {
    let eps = sampler.config().eps;
    let mut m = Moments::new();
    for p in paths {
        let mut rng = sampler.stream(p);
        let path = sampler.path(x, t, &mut rng);
        m.push(occupation(&path.positions, path.dt, y, eps, t));
    }
    Ok(m)
}

/// Conditioning experiment on the exponential time `S(α)`, started at `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalQuery {
    /// Rate of `S(α)`.
    pub alpha: f64,
    /// Start and first level.
    pub a: f64,
    /// Second level.
    pub b: f64,
    /// Conditioning threshold.
    pub t: f64,
    /// `None`: observe `D(S) = L̂^a_S - L̂^b_S`. `Some(h)`: observe the
    /// increment `D(S + h) - D(S)`.
    pub window: Option<f64>,
}

/// Minimum paths in each conditioning bin.
pub const MIN_BIN_HITS: usize = 500;

/// Observations split by `S(α) < t` and `S(α) ≥ t`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConditionalBins {
    /// Paths with `S(α) < t`.
    pub below: Moments,
    /// Paths with `S(α) ≥ t`.
    pub above: Moments,
}

/// Outcome of comparing the two conditional means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalOutcome {
    /// Mean given `S(α) ≥ t`.
    pub lhs: f64,
    /// Mean given `S(α) < t`.
    pub rhs: f64,
    /// Standard error of `lhs`.
    pub lhs_se: f64,
    /// Standard error of `rhs`.
    pub rhs_se: f64,
    /// `lhs ≤ rhs + 2·sqrt(lhs_se² + rhs_se²)`.
    pub pass: bool,
}

impl ConditionalBins {
    /// Combines with bins from other paths.
    pub fn merge(&mut self, other: &ConditionalBins) {
        self.below.merge(&other.below);
        self.above.merge(&other.above);
    }

    /// Compares the bins; fails when either holds fewer than `required` paths.
    pub fn outcome(&self, required: usize) -> Result<ConditionalOutcome> {
        let (below, above) = (self.below.count() as usize, self.above.count() as usize);
        if below < required || above < required {
            return Err(Error::Occupancy { below, above, required });
        }
        let (lhs, rhs) = (self.above.mean(), self.below.mean());
        let (lhs_se, rhs_se) = (self.above.std_error(), self.below.std_error());
        let pass = lhs <= rhs + 2.0 * (lhs_se * lhs_se + rhs_se * rhs_se).sqrt();
        Ok(ConditionalOutcome { lhs, rhs, lhs_se, rhs_se, pass })
    }
}

/// Runs paths `paths` of a conditioning experiment.
pub fn conditional_bins(sampler: &PathSampler, q: &ConditionalQuery, paths: Range<u64>) -> Result<ConditionalBins> {
    if !(q.alpha > 0.0 && q.t > 0.0) {
        return Err(invalid("alpha", "alpha and t must be positive"));
    }
    if let Some(h) = q.window {
        if !(h > 0.0) {
            return Err(invalid("window", "window must be positive"));
        }
    }
    let eps = sampler.config().eps;
    let dt = sampler.config().dt;
    let mut bins = ConditionalBins::default();
    for p in paths {
        let mut rng = sampler.stream(p);
        let s = exponential_time(q.alpha, &mut rng);
        let end = s + q.window.unwrap_or(0.0);
        let path = sampler.path(q.a, end, &mut rng);
        let diff = |u: f64| occupation(&path.positions, dt, q.a, eps, u) - occupation(&path.positions, dt, q.b, eps, u);
        let obs = match q.window {
            None => diff(s),
            Some(_) => diff(end) - diff(s),
        };
        if s >= q.t {
            bins.above.push(obs);
        } else {
            bins.below.push(obs);
        }
    }
    Ok(bins)
}

/// Describes a bandwidth choice for reports.
pub fn describe_bandwidth(sampler: &PathSampler) -> String {
    format!(
        "eps={:.4e} dt={:.1e} median_step={:.4e} (allowed [{:.4e}, {:.4e}))",
        sampler.cfg.eps,
        sampler.cfg.dt,
        sampler.median_step,
        MIN_EPS_STEPS * sampler.median_step,
        MAX_EPS_STEPS * sampler.median_step
    )
}
