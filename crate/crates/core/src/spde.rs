//! Heat (`α = 0`) and cable (`α > 0`) equations on a torus of circumference
//! `L`, advanced mode by mode with the exact Ornstein–Uhlenbeck transition.
//!
//! The field is `u(x) = Σ_n û_n e^{i k_n x}` with `k_n = 2πn/L`,
//! `|n| ≤ (N-1)/2`. Only `n ≥ 0` is stored; `û_{-n} = conj(û_n)` holds by
//! construction and `û_0` is real. One step maps
//!
//! ```text
//! û_n ← e^{-(ReΨ(k_n) + α/2)Δt} û_n + ζ_n,
//! Var Re ζ_n = Var Im ζ_n = (1 - e^{-λ_n Δt}) / (2 L λ_n),   λ_n = α + 2ReΨ(k_n),
//! ```
//!
//! and `ζ_0` is real with twice that variance. The point variance at time
//! `t` is therefore `(1/L) Σ_n (1 - e^{-λ_n t})/λ_n` for every step size.
//! Per step, path streams draw `ζ_0`, then `(Re ζ_n, Im ζ_n)` for
//! `n = 1, 2, …`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

#[allow(unused_imports)] // float methods when std is absent
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::kernel;
use crate::levy::LevyModel;
use crate::rng::{self, domain, Stream};
use crate::stats::Moments;

/// Torus discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusConfig {
    circumference: f64,
    modes: usize,
    alpha: f64,
    dt: f64,
}

impl TorusConfig {
    /// `N` must be odd; `L, Δt > 0`; `α ≥ 0`.
    pub fn new(circumference: f64, modes: usize, alpha: f64, dt: f64) -> Result<Self> {
        if !(circumference > 0.0 && circumference.is_finite()) {
            return Err(invalid("circumference", "must be positive"));
        }
        if modes.is_multiple_of(2) {
            return Err(invalid("modes", "mode count must be odd"));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", "must be nonnegative"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", "must be positive"));
        }
        Ok(Self { circumference, modes, alpha, dt })
    }

    /// Circumference `L`.
    pub fn circumference(&self) -> f64 {
        self.circumference
    }

    /// Total mode count `N`.
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Largest mode index `(N-1)/2`.
    pub fn half(&self) -> usize {
        (self.modes - 1) / 2
    }

    /// Killing rate.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Time step.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Same torus with another step.
    pub fn with_dt(self, dt: f64) -> Result<Self> {
        Self::new(self.circumference, self.modes, self.alpha, dt)
    }

    /// Wavenumber `k_n = 2πn/L`.
    pub fn wavenumber(&self, n: usize) -> f64 {
        2.0 * PI * n as f64 / self.circumference
    }

    /// `λ_n = α + 2ReΨ(k_n)` for `n = 0..=half`.
    pub fn rates(&self, model: &LevyModel) -> Result<Vec<f64>> {
        (0..=self.half()).map(|n| Ok(self.alpha + 2.0 * model.re_psi(self.wavenumber(n))?)).collect()
    }

    /// Number of steps to reach `t`, if `t` is a whole number of steps.
    pub fn steps_to(&self, t: f64) -> Result<u64> {
        let s = t / self.dt;
        let n = s.round();
        if !(t >= 0.0) || (s - n).abs() > 1e-9 * s.max(1.0) {
            return Err(invalid("t", "time must be a whole number of steps"));
        }
        Ok(n as u64)
    }
}

/// `(1 - e^{-λt})/λ`, equal to `t` at `λ = 0`.
fn relaxed(lambda: f64, t: f64) -> f64 {
    if lambda * t < 1e-12 {
        t
    } else {
        -(-lambda * t).exp_m1() / lambda
    }
}

/// Mode amplitudes at one time; `re[n], im[n]` for `n = 0..=half`, `im[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusState {
    /// Elapsed time.
    pub time: f64,
    /// Steps taken.
    pub steps: u64,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TorusState {
    /// Zero field at time 0.
    pub fn zero(cfg: &TorusConfig) -> Self {
        let n = cfg.half() + 1;
        Self { time: 0.0, steps: 0, re: vec![0.0; n], im: vec![0.0; n] }
    }

    /// Coefficient `û_n` for any `|n| ≤ half`, as `(re, im)`.
    pub fn mode(&self, n: i64) -> (f64, f64) {
        let k = n.unsigned_abs() as usize;
        if n < 0 {
            (self.re[k], -self.im[k])
        } else {
            (self.re[k], self.im[k])
        }
    }

    /// Sets `û_n` (and `û_{-n}` by conjugation). `û_0` must be real.
    pub fn set_mode(&mut self, n: usize, re: f64, im: f64) -> Result<()> {
        if n >= self.re.len() {
            return Err(invalid("n", "mode index outside the torus"));
        }
        if n == 0 && im != 0.0 {
            return Err(invalid("im", "zero mode must be real"));
        }
        self.re[n] = re;
        self.im[n] = im;
        Ok(())
    }

    /// Field values `u(x) = û_0 + 2 Σ_{n≥1} (Re û_n cos k_n x - Im û_n sin k_n x)`
    /// at points of `[0, L)`.
    pub fn snapshot(&self, cfg: &TorusConfig, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter()
            .map(|&x| {
                if !(0.0..cfg.circumference()).contains(&x) {
                    return Err(Error::Domain(alloc::format!(
                        "snapshot point {x} outside [0, {})",
                        cfg.circumference()
                    )));
                }
                let mut u = self.re[0];
                for n in 1..self.re.len() {
                    let (s, c) = (cfg.wavenumber(n) * x).sin_cos();
                    u += 2.0 * (self.re[n] * c - self.im[n] * s);
                }
                Ok(u)
            })
            .collect()
    }
}

/// Precomputed per-mode decay and noise scale for one model and torus.
#[derive(Debug, Clone)]
pub struct Stepper {
    cfg: TorusConfig,
    rates: Vec<f64>,
    decay: Vec<f64>,
    noise: Vec<f64>,
}

impl Stepper {
    /// Tabulates `e^{-λ_n Δt/2}` and the noise standard deviations.
    pub fn new(cfg: TorusConfig, model: &LevyModel) -> Result<Self> {
        let rates = cfg.rates(model)?;
        let l = cfg.circumference();
        let decay = rates.iter().map(|&r| (-0.5 * r * cfg.dt()).exp()).collect();
        let noise = rates
            .iter()
            .enumerate()
            .map(|(n, &r)| {
                let v = relaxed(r, cfg.dt()) / l;
                if n == 0 {
                    v.sqrt()
                } else {
                    (0.5 * v).sqrt()
                }
            })
            .collect();
        Ok(Self { cfg, rates, decay, noise })
    }

    /// Torus configuration.
    pub fn config(&self) -> &TorusConfig {
        &self.cfg
    }

    /// `λ_n` for `n = 0..=half`.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// `(e^{-λ_n Δt/2}, noise standard deviation per component)` of mode `n`.
    pub fn transition(&self, n: usize) -> (f64, f64) {
        (self.decay[n], self.noise[n])
    }

    /// One exact step.
    pub fn step(&self, state: &mut TorusState, rng: &mut Stream) {
        let z: f64 = rng.sample(StandardNormal);
        state.re[0] = self.decay[0] * state.re[0] + self.noise[0] * z;
        for n in 1..state.re.len() {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            state.re[n] = self.decay[n] * state.re[n] + self.noise[n] * a;
            state.im[n] = self.decay[n] * state.im[n] + self.noise[n] * b;
        }
        state.steps += 1;
        state.time = state.steps as f64 * self.cfg.dt();
    }

    /// `E|û_n|²` at time `t` from zero: `(1 - e^{-λ_n t})/(L λ_n)`.
    pub fn mode_variance(&self, n: usize, t: f64) -> f64 {
        relaxed(self.rates[n], t) / self.cfg.circumference()
    }

    /// Exact covariance of `u(t, x)` and `u(t, x + r)`:
    /// `(1/L) Σ_n cos(k_n r)(1 - e^{-λ_n t})/λ_n`.
    pub fn exact_covariance(&self, t: f64, r: f64) -> f64 {
        let mut s = self.mode_variance(0, t);
        for n in 1..self.rates.len() {
            s += 2.0 * (self.cfg.wavenumber(n) * r).cos() * self.mode_variance(n, t);
        }
        s
    }

    /// Exact point variance at time `t`.
    pub fn exact_variance(&self, t: f64) -> f64 {
        self.exact_covariance(t, 0.0)
    }

    /// Long-run point variance `(1/L) Σ_n 1/λ_n`; `None` for the heat equation.
    pub fn stationary_variance(&self) -> Option<f64> {
        if self.cfg.alpha() <= 0.0 {
            return None;
        }
        let l = self.cfg.circumference();
        Some(self.rates[0].recip() / l + self.rates[1..].iter().map(|r| 2.0 / (l * r)).sum::<f64>())
    }
}

/// Periodization error of the line kernel: `Σ_{m≠0} ū_α(mL) / ū_α(0)`,
/// summed until a term drops below `1e-4` of the running sum.
pub fn image_sum_ratio(model: &LevyModel, alpha: f64, circumference: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha", "image sums need a killing rate"));
    }
    let u0 = kernel::u_alpha(model, alpha, 0.0)?;
    let mut sum = 0.0;
    for m in 1..=10_000u32 {
        let term = 2.0 * kernel::u_alpha(model, alpha, m as f64 * circumference)?;
        sum += term;
        if term.abs() <= 1e-4 * sum.abs() || term.abs() < 1e-15 * u0 {
            break;
        }
    }
    Ok(sum / u0)
}

/// Largest image-sum ratio accepted by [`check_periodization`].
pub const MAX_IMAGE_RATIO: f64 = 0.01;

/// Fails when the torus is too small for the line kernel at this `α`.
pub fn check_periodization(model: &LevyModel, cfg: &TorusConfig) -> Result<f64> {
    let ratio = image_sum_ratio(model, cfg.alpha(), cfg.circumference())?;
    if ratio.abs() >= MAX_IMAGE_RATIO {
        return Err(invalid("circumference", "image-sum correction exceeds 1% of the kernel at 0; enlarge the torus"));
    }
    Ok(ratio)
}

/// Ensemble moments of a path run at recorded times and probe points.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentRun {
    /// Recording times.
    pub times: Vec<f64>,
    /// Probe points.
    pub probes: Vec<f64>,
    /// Per `(time, probe)`, row-major by time: moments of `u(t, x)`.
    pub values: Vec<Moments>,
    /// Per time: moments over paths of the probe-averaged `u(t, x)²`.
    pub pooled_square: Vec<Moments>,
    /// Per time and probe pair `(0, j)`: moments of `u(t, x_0) u(t, x_j)`.
    pub cross: Vec<Moments>,
}

impl MomentRun {
    fn empty(times: &[f64], probes: &[f64]) -> Self {
        let (nt, np) = (times.len(), probes.len());
        Self {
            times: times.to_vec(),
            probes: probes.to_vec(),
            values: vec![Moments::new(); nt * np],
            pooled_square: vec![Moments::new(); nt],
            cross: vec![Moments::new(); nt * np],
        }
    }

    /// Combines with a run over other paths.
    pub fn merge(&mut self, other: &MomentRun) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            a.merge(b);
        }
        for (a, b) in self.pooled_square.iter_mut().zip(&other.pooled_square) {
            a.merge(b);
        }
        for (a, b) in self.cross.iter_mut().zip(&other.cross) {
            a.merge(b);
        }
    }

    /// Moments of `u(times[i], probes[j])`.
    pub fn at(&self, i: usize, j: usize) -> &Moments {
        &self.values[i * self.probes.len() + j]
    }

    /// Number of paths.
    pub fn paths(&self) -> u64 {
        self.pooled_square.first().map_or(0, |m| m.count())
    }

    /// Probe-pooled point variance at `times[i]` and its standard error.
    pub fn point_variance(&self, i: usize) -> (f64, f64) {
        let m = &self.pooled_square[i];
        (m.mean(), m.std_error())
    }

    /// Relaxation check for `α > 0`: the pooled variances at `times[i]` and
    /// `times[j]` (`t_i < t_j`) differ by at most `e^{-α t_i}·var_η` plus
    /// three standard errors.
    pub fn stationarity(&self, i: usize, j: usize, alpha: f64, var_eta: f64) -> bool {
        let (a, sa) = self.point_variance(i);
        let (b, sb) = self.point_variance(j);
        (a - b).abs() <= (-alpha * self.times[i]).exp() * var_eta + 3.0 * (sa * sa + sb * sb).sqrt()
    }
}

/// Simulates paths with indices in `paths` from zero, recording probes at
/// `times` (whole multiples of `Δt`, increasing).
pub fn run_moments(
    stepper: &Stepper,
    seed: u64,
    paths: Range<u64>,
    times: &[f64],
    probes: &[f64],
) -> Result<MomentRun> {
    let cfg = stepper.config();
    let marks: Vec<u64> = times.iter().map(|&t| cfg.steps_to(t)).collect::<Result<_>>()?;
    if marks.windows(2).any(|w| w[0] >= w[1]) || marks.first() == Some(&0) {
        return Err(invalid("times", "recording times must be positive and increasing"));
    }
    TorusState::zero(cfg).snapshot(cfg, probes)?;
    let mut run = MomentRun::empty(times, probes);
    let np = probes.len();
    for p in paths {
        let mut rng = rng::stream(seed, domain::SPDE, p);
        let mut state = TorusState::zero(cfg);
        for (i, &mark) in marks.iter().enumerate() {
            while state.steps < mark {
                stepper.step(&mut state, &mut rng);
            }
            let u = state.snapshot(cfg, probes)?;
            let mut sq = 0.0;
            for (j, &v) in u.iter().enumerate() {
                run.values[i * np + j].push(v);
                run.cross[i * np + j].push(u[0] * v);
                sq += v * v;
            }
            run.pooled_square[i].push(sq / np as f64);
        }
    }
    Ok(run)
}
