//! Spectral synthesis of the stationary-in-space Gaussian fields `U(t,·)`,
//! `V_α(t,·)`, `S_α(t,·)`, `η_α` and spatial derivatives of `S_α`.
//!
//! A field with spectral density `f` (so that `Cov(x, x+r) = ∫_ℝ cos(ξr) f(ξ) dξ`)
//! is synthesized on midpoint frequencies `ξ_k = (k + ½)Δξ` as
//!
//! ```text
//! F(x) = Σ_k a_k (A_k cos ξ_k x + B_k sin ξ_k x),   a_k = sqrt(2 f(ξ_k) Δξ),
//! ```
//!
//! with independent standard normals `A_k, B_k`. The joint sampler draws
//! `(A^V, B^V, A^S, B^S)` per mode, in that order, from the replicate's
//! stream; `η = V + S` pointwise and the derivative field reuses the `S`
//! draws.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // float methods when std is absent
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::kernel::{self, KernelKind};
use crate::levy::LevyModel;
use crate::quad::Tolerance;
use crate::rng::{self, domain};
use crate::stats::{ols, Moments};

/// Truncated midpoint frequency grid `ξ_k = (k + ½)Δξ`, `Δξ = Ξ/K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    cutoff: f64,
    modes: usize,
}

impl SpectralGrid {
    /// Grid with cutoff `Ξ` and `K ≥ 2` modes.
    pub fn new(cutoff: f64, modes: usize) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(invalid("cutoff", "spectral cutoff must be positive"));
        }
        if modes < 2 {
            return Err(invalid("modes", "need at least two modes"));
        }
        Ok(Self { cutoff, modes })
    }

    /// Grid from a spacing `Δξ` and mode count.
    pub fn with_spacing(delta: f64, modes: usize) -> Result<Self> {
        Self::new(delta * modes as f64, modes)
    }

    /// Default grid `Ξ = 256 (α+1)^{1/β}`, `K = 2¹⁴`.
    pub fn default_for(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(256.0 * (alpha + 1.0).powf(1.0 / beta), 1 << 14)
    }

    /// Cutoff `Ξ`.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Mode count `K`.
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Spacing `Δξ`.
    pub fn delta(&self) -> f64 {
        self.cutoff / self.modes as f64
    }

    /// Frequency of mode `k`.
    pub fn freq(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.delta()
    }
}

/// Equispaced points `x_j = j Δx`, `j = 0..M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    dx: f64,
    points: usize,
}

impl SpatialGrid {
    /// Grid with spacing `Δx > 0` and `M ≥ 1` points.
    pub fn new(dx: f64, points: usize) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(invalid("dx", "spatial step must be positive"));
        }
        if points == 0 {
            return Err(invalid("points", "need at least one point"));
        }
        Ok(Self { dx, points })
    }

    /// Default `Δx = π/(2Ξ)`, a quarter of the Nyquist scale.
    pub fn default_for(grid: &SpectralGrid, points: usize) -> Result<Self> {
        Self::new(PI / (2.0 * grid.cutoff()), points)
    }

    /// Spacing.
    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Number of points.
    pub fn points(&self) -> usize {
        self.points
    }

    /// Location of point `j`.
    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }
}

/// Which field, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldKind {
    /// Heat solution `U(t, ·)`.
    U {
        /// Time.
        t: f64,
    },
    /// Cable solution `V_α(t, ·)`.
    V {
        /// Killing rate.
        alpha: f64,
        /// Time.
        t: f64,
    },
    /// Tail field `S_α(t, ·)`.
    S {
        /// Killing rate.
        alpha: f64,
        /// Time.
        t: f64,
    },
    /// Stationary field `η_α`.
    Eta {
        /// Killing rate.
        alpha: f64,
    },
    /// `n`-th spatial derivative of `S_α(t, ·)`.
    SDerivative {
        /// Order.
        n: u32,
        /// Killing rate.
        alpha: f64,
        /// Time.
        t: f64,
    },
}

impl FieldKind {
    /// The killing rate and covariance kernel of this field.
    pub fn kernel(&self) -> (f64, KernelKind) {
        match *self {
            Self::U { t } => (0.0, KernelKind::VarU { t }),
            Self::V { alpha, t } => (alpha, KernelKind::VarV { t }),
            Self::S { alpha, t } => (alpha, KernelKind::VarS { t }),
            Self::Eta { alpha } => (alpha, KernelKind::Potential),
            Self::SDerivative { n, alpha, t } => (alpha, KernelKind::DerivS { n, t }),
        }
    }

    /// Short label, e.g. `V(alpha=1,t=2)`.
    pub fn label(&self) -> String {
        match *self {
            Self::U { t } => format!("U(t={t})"),
            Self::V { alpha, t } => format!("V(alpha={alpha},t={t})"),
            Self::S { alpha, t } => format!("S(alpha={alpha},t={t})"),
            Self::Eta { alpha } => format!("eta(alpha={alpha})"),
            Self::SDerivative { n, alpha, t } => format!("S_derivative(n={n},alpha={alpha},t={t})"),
        }
    }

    fn time(&self) -> Option<f64> {
        match *self {
            Self::U { t } | Self::V { t, .. } | Self::S { t, .. } | Self::SDerivative { t, .. } => Some(t),
            Self::Eta { .. } => None,
        }
    }

    fn alpha(&self) -> Option<f64> {
        match *self {
            Self::U { .. } => None,
            Self::V { alpha, .. } | Self::S { alpha, .. } | Self::Eta { alpha } | Self::SDerivative { alpha, .. } => {
                Some(alpha)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(a) = self.alpha() {
            if !(a > 0.0 && a.is_finite()) {
                return Err(invalid("alpha", "alpha must be positive"));
            }
        }
        if let Some(t) = self.time() {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("t", "t must be positive"));
            }
        }
        Ok(())
    }
}

/// Spectral density `f(ξ)` of the field, so that
/// `Var = ∫_ℝ f = (1/π) ∫₀^∞ g` for the kernel weight `g = 2πf`.
/// At `ξ = 0` the heat density takes its limit `t/(2π)`.
pub fn spectral_density(kind: &FieldKind, model: &LevyModel, xi: f64) -> Result<f64> {
    spectral_density_from_exponent(kind, xi, model.re_psi(xi)?)
}

/// [`spectral_density`] given `ReΨ(ξ)`, so that one exponent evaluation
/// serves several fields.
pub fn spectral_density_from_exponent(kind: &FieldKind, xi: f64, re_psi: f64) -> Result<f64> {
    kind.validate()?;
    let (alpha, k) = kind.kernel();
    Ok(k.weight(alpha, xi, re_psi) / (2.0 * PI))
}

/// Amplitudes `sqrt(2 f(ξ_k) Δξ)` of one field on a grid.
fn amplitudes(kind: &FieldKind, grid: &SpectralGrid, psi: &[f64]) -> Vec<f64> {
    let (alpha, k) = kind.kernel();
    (0..grid.modes())
        .map(|i| {
            let xi = grid.freq(i);
            (2.0 * k.weight(alpha, xi, psi[i]) / (2.0 * PI) * grid.delta()).sqrt()
        })
        .collect()
}

fn exponent_table(model: &LevyModel, grid: &SpectralGrid) -> Result<Vec<f64>> {
    (0..grid.modes()).map(|k| model.re_psi(grid.freq(k))).collect()
}

/// Amplitude-scaled cosine and sine coefficients of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    /// `a_k A_k`.
    pub cos: Vec<f64>,
    /// `a_k B_k`.
    pub sin: Vec<f64>,
}

impl Coefficients {
    /// Coefficients of the `n`-th derivative: each mode is multiplied by
    /// `ξ_k^n` and rotated by the phase of `(iξ)^n`.
    pub fn derivative(&self, grid: &SpectralGrid, n: u32) -> Coefficients {
        let mut cos = Vec::with_capacity(self.cos.len());
        let mut sin = Vec::with_capacity(self.sin.len());
        for k in 0..self.cos.len() {
            let w = grid.freq(k).powi(n as i32);
            let (a, b) = (self.cos[k], self.sin[k]);
            let (da, db) = match n % 4 {
                0 => (a, b),
                1 => (b, -a),
                2 => (-a, -b),
                _ => (-b, a),
            };
            cos.push(w * da);
            sin.push(w * db);
        }
        Coefficients { cos, sin }
    }

    /// Direct evaluation `Σ_k (c_k cos ξ_k x_j + s_k sin ξ_k x_j)`.
    pub fn evaluate(&self, grid: &SpectralGrid, space: &SpatialGrid) -> Vec<f64> {
        // Angle-addition recurrence, reseeded every RESEED points.
        const RESEED: usize = 64;
        let m = space.points();
        let mut out = vec![0.0; m];
        for k in 0..self.cos.len() {
            let (c, s) = (self.cos[k], self.sin[k]);
            if c == 0.0 && s == 0.0 {
                continue;
            }
            let xi = grid.freq(k);
            let (sd, cd) = (xi * space.dx()).sin_cos();
            let (mut sj, mut cj) = (0.0, 1.0);
            for (j, o) in out.iter_mut().enumerate() {
                if j % RESEED == 0 {
                    (sj, cj) = (xi * space.x(j)).sin_cos();
                }
                *o += c * cj + s * sj;
                let next_c = cj * cd - sj * sd;
                sj = sj * cd + cj * sd;
                cj = next_c;
            }
        }
        out
    }
}

/// Precomputed `cos ξ_k x`, `sin ξ_k x` for evaluating many realizations at
/// a few fixed points.
#[derive(Debug, Clone)]
pub struct PointBasis {
    cos: Vec<Vec<f64>>,
    sin: Vec<Vec<f64>>,
}

impl PointBasis {
    /// Basis for the points `xs`.
    pub fn new(grid: &SpectralGrid, xs: &[f64]) -> Self {
        let mut cos = Vec::with_capacity(xs.len());
        let mut sin = Vec::with_capacity(xs.len());
        for &x in xs {
            let (s, c): (Vec<f64>, Vec<f64>) = (0..grid.modes()).map(|k| (grid.freq(k) * x).sin_cos()).unzip();
            cos.push(c);
            sin.push(s);
        }
        Self { cos, sin }
    }

    /// Field values at the basis points.
    pub fn apply(&self, c: &Coefficients) -> Vec<f64> {
        self.cos
            .iter()
            .zip(&self.sin)
            .map(|(cb, sb)| {
                let mut v = 0.0;
                for k in 0..c.cos.len() {
                    v += c.cos[k] * cb[k] + c.sin[k] * sb[k];
                }
                v
            })
            .collect()
    }
}

/// Discretization diagnostics: the synthesized field's exact variance
/// `Σ a_k²` against the continuum variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    /// Continuum variance by quadrature.
    pub exact: f64,
    /// Variance of the synthesized field.
    pub discrete: f64,
    /// Quadrature error of `exact`.
    pub quadrature_error: f64,
}

impl Discretization {
    /// `discrete - exact`: truncation plus Riemann error.
    pub fn bias(&self) -> f64 {
        self.discrete - self.exact
    }
}

/// One synthesized realization on a spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    /// Field and parameters.
    pub kind: FieldKind,
    /// Field values at `x_j`.
    pub values: Vec<f64>,
    /// Root seed.
    pub seed: u64,
    /// Replicate (stream) index.
    pub replicate: u64,
    /// Frequency grid.
    pub grid: SpectralGrid,
    /// Spatial grid.
    pub space: SpatialGrid,
}

fn discretization(model: &LevyModel, kind: &FieldKind, amps: &[f64]) -> Result<Discretization> {
    let (alpha, k) = kind.kernel();
    let v = kernel::covariance(model, alpha, k, 0.0, Tolerance::relative(1e-8))?;
    Ok(Discretization { exact: v.value, discrete: amps.iter().map(|a| a * a).sum(), quadrature_error: v.error })
}

/// Sampler for a single field; draws `(A_k, B_k)` per mode.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    kind: FieldKind,
    grid: SpectralGrid,
    amps: Vec<f64>,
    diagnostics: Discretization,
}

impl FieldSampler {
    /// Tabulates amplitudes. Fails with a non-convergence error when the
    /// continuum variance diverges (Dalang condition violated).
    pub fn new(model: &LevyModel, kind: FieldKind, grid: SpectralGrid) -> Result<Self> {
        kind.validate()?;
        let psi = exponent_table(model, &grid)?;
        let amps = amplitudes(&kind, &grid, &psi);
        let diagnostics = discretization(model, &kind, &amps)?;
        Ok(Self { kind, grid, amps, diagnostics })
    }

    /// Field kind.
    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// Frequency grid.
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// Amplitudes `a_k`.
    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    /// Variance diagnostics.
    pub fn diagnostics(&self) -> Discretization {
        self.diagnostics
    }

    /// Coefficients of replicate `replicate`.
    pub fn coefficients(&self, seed: u64, replicate: u64) -> Coefficients {
        let mut rng = rng::stream(seed, domain::SYNTH, replicate);
        let mut cos = Vec::with_capacity(self.amps.len());
        let mut sin = Vec::with_capacity(self.amps.len());
        for &a in &self.amps {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            cos.push(a * x);
            sin.push(a * y);
        }
        Coefficients { cos, sin }
    }

    /// Realization on `space` by direct summation.
    pub fn sample(&self, seed: u64, replicate: u64, space: &SpatialGrid) -> FieldSample {
        let values = self.coefficients(seed, replicate).evaluate(&self.grid, space);
        FieldSample { kind: self.kind, values, seed, replicate, grid: self.grid, space: *space }
    }

    /// Covariance of the synthesized field at lag `r`: `Σ a_k² cos ξ_k r`.
    pub fn discrete_covariance(&self, r: f64) -> f64 {
        discrete_cov(&self.grid, &self.amps, r)
    }
}

fn discrete_cov(grid: &SpectralGrid, amps: &[f64], r: f64) -> f64 {
    amps.iter().enumerate().map(|(k, a)| a * a * (grid.freq(k) * r).cos()).sum()
}

/// Sampler for `(V_α, S_α, η_α)` and optionally `S_α⁽ⁿ⁾`, from shared draws.
#[derive(Debug, Clone)]
pub struct JointSampler {
    alpha: f64,
    t: f64,
    grid: SpectralGrid,
    amp_v: Vec<f64>,
    amp_s: Vec<f64>,
    derivative: Option<u32>,
}

/// Coefficients of one joint realization.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCoefficients {
    /// `V_α` coefficients.
    pub v: Coefficients,
    /// `S_α` coefficients.
    pub s: Coefficients,
}

/// One joint realization.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSample {
    /// `V_α(t, ·)`.
    pub v: FieldSample,
    /// `S_α(t, ·)`.
    pub s: FieldSample,
    /// `η_α = V_α + S_α`.
    pub eta: FieldSample,
    /// `S_α⁽ⁿ⁾(t, ·)` when requested.
    pub s_derivative: Option<FieldSample>,
}

impl JointSampler {
    /// Tabulates the `V` and `S` amplitudes.
    pub fn new(model: &LevyModel, alpha: f64, t: f64, grid: SpectralGrid, derivative: Option<u32>) -> Result<Self> {
        FieldKind::V { alpha, t }.validate()?;
        let psi = exponent_table(model, &grid)?;
        let amp_v = amplitudes(&FieldKind::V { alpha, t }, &grid, &psi);
        let amp_s = amplitudes(&FieldKind::S { alpha, t }, &grid, &psi);
        Ok(Self { alpha, t, grid, amp_v, amp_s, derivative })
    }

    /// Frequency grid.
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// `V` and `S` amplitudes.
    pub fn amplitudes(&self) -> (&[f64], &[f64]) {
        (&self.amp_v, &self.amp_s)
    }

    /// Draws `(A^V, B^V, A^S, B^S)` per mode from the replicate's stream.
    pub fn coefficients(&self, seed: u64, replicate: u64) -> JointCoefficients {
        let mut rng = rng::stream(seed, domain::SYNTH, replicate);
        let k = self.grid.modes();
        let mut v = Coefficients { cos: Vec::with_capacity(k), sin: Vec::with_capacity(k) };
        let mut s = Coefficients { cos: Vec::with_capacity(k), sin: Vec::with_capacity(k) };
        for i in 0..k {
            let draws: [f64; 4] = core::array::from_fn(|_| rng.sample(StandardNormal));
            v.cos.push(self.amp_v[i] * draws[0]);
            v.sin.push(self.amp_v[i] * draws[1]);
            s.cos.push(self.amp_s[i] * draws[2]);
            s.sin.push(self.amp_s[i] * draws[3]);
        }
        JointCoefficients { v, s }
    }

    /// Assembles a joint sample from evaluated `V`, `S` and derivative values.
    pub fn assemble(
        &self,
        seed: u64,
        replicate: u64,
        space: &SpatialGrid,
        v: Vec<f64>,
        s: Vec<f64>,
        deriv: Option<Vec<f64>>,
    ) -> JointSample {
        let eta: Vec<f64> = v.iter().zip(&s).map(|(a, b)| a + b).collect();
        let (alpha, t) = (self.alpha, self.t);
        let mk = |kind, values| FieldSample { kind, values, seed, replicate, grid: self.grid, space: *space };
        JointSample {
            v: mk(FieldKind::V { alpha, t }, v),
            s: mk(FieldKind::S { alpha, t }, s),
            eta: mk(FieldKind::Eta { alpha }, eta),
            s_derivative: self.derivative.zip(deriv).map(|(n, d)| mk(FieldKind::SDerivative { n, alpha, t }, d)),
        }
    }

    /// Joint realization on `space` by direct summation.
    pub fn sample(&self, seed: u64, replicate: u64, space: &SpatialGrid) -> JointSample {
        let c = self.coefficients(seed, replicate);
        let v = c.v.evaluate(&self.grid, space);
        let s = c.s.evaluate(&self.grid, space);
        let d = self.derivative.map(|n| c.s.derivative(&self.grid, n).evaluate(&self.grid, space));
        self.assemble(seed, replicate, space, v, s, d)
    }

    /// Derivative order, if any.
    pub fn derivative(&self) -> Option<u32> {
        self.derivative
    }
}

/// Resolved band of lags for increment scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagBand {
    /// Smallest admissible lag.
    pub lower: f64,
    /// Largest admissible lag.
    pub upper: f64,
}

/// Minimum number of lags in a scaling fit.
pub const MIN_LAGS: usize = 8;
/// Minimum span of a scaling fit in decades.
pub const MIN_DECADES: f64 = 1.5;

impl LagBand {
    /// Band for a field: above one grid step and `64/Ξ` (spectral
    /// truncation), below an eighth of the field's correlation length, half
    /// the spatial window and an eighth of the synthesis period `2π/Δξ`.
    pub fn for_field(model: &LevyModel, kind: &FieldKind, grid: &SpectralGrid, space: &SpatialGrid) -> Result<Self> {
        let beta = model.tail_index()?;
        if beta <= 0.0 {
            return Err(invalid("model", "exponent does not grow; no scaling band"));
        }
        let time_len = kind.time().map(|t| (2.0 * t).powf(1.0 / beta));
        let kill_len = kind.alpha().map(|a| (2.0 / a).powf(1.0 / beta));
        let corr = match kind {
            FieldKind::U { .. } => time_len.unwrap_or(f64::INFINITY),
            FieldKind::Eta { .. } => kill_len.unwrap_or(f64::INFINITY),
            _ => time_len.unwrap_or(f64::INFINITY).min(kill_len.unwrap_or(f64::INFINITY)),
        };
        let lower = space.dx().max(64.0 / grid.cutoff());
        let upper = (corr / 8.0).min(0.5 * (space.points() - 1) as f64 * space.dx()).min(PI / (8.0 * grid.delta()));
        Ok(Self { lower, upper })
    }

    /// Checks that lags (in grid steps) lie in the band, number at least
    /// [`MIN_LAGS`] and span at least [`MIN_DECADES`].
    pub fn check(&self, lags: &[usize], space: &SpatialGrid) -> Result<()> {
        let (min, max) = match (lags.iter().min(), lags.iter().max()) {
            (Some(a), Some(b)) => (*a as f64 * space.dx(), *b as f64 * space.dx()),
            _ => return Err(invalid("lags", "no lags given")),
        };
        let fail = |reason: String| Err(Error::LagBand { min, max, lower: self.lower, upper: self.upper, reason });
        let mut sorted = lags.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() < MIN_LAGS {
            return fail(format!("need at least {MIN_LAGS} distinct lags, got {}", sorted.len()));
        }
        if min < self.lower * (1.0 - 1e-12) || max > self.upper * (1.0 + 1e-12) {
            return fail("lags leave the resolved band".into());
        }
        if (max / min).log10() < MIN_DECADES - 1e-12 {
            return fail(format!("lags span {:.2} decades, need {MIN_DECADES}", (max / min).log10()));
        }
        Ok(())
    }
}

/// Fitted increment-scaling exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    /// Slope of `ln E|F(x+r) - F(x)|²` against `ln r`.
    pub slope: f64,
    /// Standard error of the slope from batch means.
    pub stderr: f64,
    /// `(r, mean squared increment, standard error)` per lag.
    pub table: Vec<(f64, f64, f64)>,
}

/// Ensemble accumulator of mean squared increments at fixed lags, split
/// into batches (by replicate index) for the slope standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureAccumulator {
    lags: Vec<usize>,
    batches: Vec<Vec<Moments>>,
    pooled: Vec<Moments>,
}

/// Number of batches used for the slope standard error.
pub const SLOPE_BATCHES: usize = 20;

impl StructureAccumulator {
    /// Accumulator for lags given in grid steps.
    pub fn new(lags: Vec<usize>) -> Self {
        let n = lags.len();
        Self { lags, batches: vec![vec![Moments::new(); n]; SLOPE_BATCHES], pooled: vec![Moments::new(); n] }
    }

    /// Adds one realization: the spatial average of squared increments per lag.
    pub fn push(&mut self, replicate: u64, values: &[f64]) {
        let b = (replicate % SLOPE_BATCHES as u64) as usize;
        for (i, &m) in self.lags.iter().enumerate() {
            if m >= values.len() {
                continue;
            }
            let n = values.len() - m;
            let mean = (0..n).map(|j| (values[j + m] - values[j]).powi(2)).sum::<f64>() / n as f64;
            self.batches[b][i].push(mean);
            self.pooled[i].push(mean);
        }
    }

    /// Combines with another accumulator over the same lags.
    pub fn merge(&mut self, other: &StructureAccumulator) {
        for (a, b) in self.pooled.iter_mut().zip(&other.pooled) {
            a.merge(b);
        }
        for (ba, bb) in self.batches.iter_mut().zip(&other.batches) {
            for (a, b) in ba.iter_mut().zip(bb) {
                a.merge(b);
            }
        }
    }

    /// Least-squares slope on the pooled means, with the batch-means
    /// standard error.
    pub fn fit(&self, space: &SpatialGrid) -> Result<ScalingFit> {
        let x: Vec<f64> = self.lags.iter().map(|&m| (m as f64 * space.dx()).ln()).collect();
        let pooled: Vec<f64> = self.pooled.iter().map(|m| m.mean()).collect();
        if pooled.iter().any(|v| !(*v > 0.0)) {
            return Err(invalid("samples", "structure function is not positive at every lag"));
        }
        let y: Vec<f64> = pooled.iter().map(|v| v.ln()).collect();
        let (slope, _) = ols(&x, &y);
        let mut per_batch = Moments::new();
        for batch in &self.batches {
            let yb: Option<Vec<f64>> =
                batch.iter().map(|m| (m.count() > 0 && m.mean() > 0.0).then(|| m.mean().ln())).collect();
            if let Some(yb) = yb {
                per_batch.push(ols(&x, &yb).0);
            }
        }
        if per_batch.count() < 2 {
            return Err(invalid("samples", "need replicates in at least two batches"));
        }
        let table = self
            .lags
            .iter()
            .zip(&self.pooled)
            .map(|(&m, s)| (m as f64 * space.dx(), s.mean(), s.std_error()))
            .collect();
        Ok(ScalingFit { slope, stderr: per_batch.std_error(), table })
    }
}

/// Increment-scaling exponent of an ensemble of samples of one field over
/// lags given in grid steps, after checking the lags against the band.
pub fn increment_scaling_exponent(model: &LevyModel, samples: &[FieldSample], lags: &[usize]) -> Result<ScalingFit> {
    let first = samples.first().ok_or_else(|| invalid("samples", "no samples"))?;
    LagBand::for_field(model, &first.kind, &first.grid, &first.space)?.check(lags, &first.space)?;
    let mut acc = StructureAccumulator::new(lags.to_vec());
    for s in samples {
        acc.push(s.replicate, &s.values);
    }
    acc.fit(&first.space)
}

/// Exact structure function `2 Σ a_k² (1 - cos ξ_k r)` of a synthesized field.
pub fn discrete_structure(grid: &SpectralGrid, amps: &[f64], r: f64) -> f64 {
    amps.iter()
        .enumerate()
        .map(|(k, a)| {
            let s = (0.5 * grid.freq(k) * r).sin();
            4.0 * a * a * s * s
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_phase_rule_matches_finite_differences() {
        let grid = SpectralGrid::new(4.0, 4).unwrap();
        let c = Coefficients { cos: vec![0.3, -1.0, 0.5, 0.2], sin: vec![1.0, 0.4, -0.7, 0.1] };
        let h = 1e-4;
        let space = SpatialGrid::new(h, 3).unwrap();
        let f = c.evaluate(&grid, &space);
        let d1 = c.derivative(&grid, 1).evaluate(&grid, &space);
        let d2 = c.derivative(&grid, 2).evaluate(&grid, &space);
        assert!(((f[2] - f[0]) / (2.0 * h) - d1[1]).abs() < 1e-6);
        assert!(((f[2] - 2.0 * f[1] + f[0]) / (h * h) - d2[1]).abs() < 1e-4);
        let d3 = c.derivative(&grid, 3).evaluate(&grid, &space);
        let d2_again = c.derivative(&grid, 2).evaluate(&grid, &space);
        assert!(((d2_again[2] - d2_again[0]) / (2.0 * h) - d3[1]).abs() < 1e-5);
    }

    #[test]
    fn recurrence_matches_direct_trig() {
        let grid = SpectralGrid::new(50.0, 200).unwrap();
        let cos: Vec<f64> = (0..200).map(|k| ((k * 7) % 13) as f64 - 6.0).collect();
        let sin: Vec<f64> = (0..200).map(|k| ((k * 5) % 11) as f64 - 5.0).collect();
        let c = Coefficients { cos, sin };
        let space = SpatialGrid::new(0.013, 500).unwrap();
        let v = c.evaluate(&grid, &space);
        for j in [0, 63, 64, 200, 499] {
            let x = space.x(j);
            let direct: f64 =
                (0..200).map(|k| c.cos[k] * (grid.freq(k) * x).cos() + c.sin[k] * (grid.freq(k) * x).sin()).sum();
            assert!((v[j] - direct).abs() < 1e-11, "j={j}");
        }
    }
}
