//! Fourier-side kernels of the symmetrized process.
//!
//! Every kernel here is a cosine transform `(1/π) ∫₀^∞ cos(ξr) g(ξ) dξ` of a
//! nonnegative spectral weight built from `λ(ξ) = α + 2ReΨ(ξ)`:
//!
//! | kernel       | `g(ξ)`                          |
//! |--------------|---------------------------------|
//! | potential    | `1/λ`                           |
//! | `p̄_t`        | `exp(-2t ReΨ)`                  |
//! | `Var V(t)`   | `(1 - exp(-λt))/λ`              |
//! | `Var S(t)`   | `exp(-λt)/λ`                    |
//! | `Var U(t)`   | `(1 - exp(-2t ReΨ))/(2 ReΨ)`    |
//! | `S⁽ⁿ⁾(t)`    | `ξ²ⁿ exp(-λt)/λ`                |

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // float methods when std is absent
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::levy::LevyModel;
use crate::quad::{self, Cutoffs, Tolerance};

/// Default absolute tolerance for single kernel values.
pub const KERNEL_TOL: f64 = 1e-8;
/// Default relative tolerance for variance profiles.
pub const PROFILE_REL_TOL: f64 = 1e-6;
/// Below this value of `2t ReΨ` the `Var U` weight uses its series.
const SERIES_THRESHOLD: f64 = 1e-6;

/// Which covariance kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    /// The α-potential density `ū_α`.
    Potential,
    /// Transition density `p̄_t` of the symmetrized process.
    Pbar {
        /// Time.
        t: f64,
    },
    /// Covariance of the cable solution `V_α(t, ·)`.
    VarV {
        /// Time.
        t: f64,
    },
    /// Covariance of the tail field `S_α(t, ·)`.
    VarS {
        /// Time.
        t: f64,
    },
    /// Covariance of the heat solution `U(t, ·)`; ignores α.
    VarU {
        /// Time.
        t: f64,
    },
    /// Covariance of the `n`-th spatial derivative of `S_α(t, ·)`.
    DerivS {
        /// Derivative order.
        n: u32,
        /// Time.
        t: f64,
    },
}

impl KernelKind {
    /// Spectral weight `g(ξ)` given `ReΨ(ξ)`.
    pub fn weight(&self, alpha: f64, xi: f64, psi: f64) -> f64 {
        let lambda = alpha + 2.0 * psi;
        match *self {
            Self::Potential => 1.0 / lambda,
            Self::Pbar { t } => (-2.0 * t * psi).exp(),
            Self::VarV { t } => -(-lambda * t).exp_m1() / lambda,
            Self::VarS { t } => (-lambda * t).exp() / lambda,
            Self::VarU { t } => heat_weight(t, psi),
            Self::DerivS { n, t } => xi.abs().powi(2 * n as i32) * (-lambda * t).exp() / lambda,
        }
    }

    fn validate(&self, alpha: f64) -> Result<()> {
        let needs_alpha = !matches!(self, Self::Pbar { .. } | Self::VarU { .. });
        if needs_alpha && !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", "alpha must be positive"));
        }
        match *self {
            Self::Potential => Ok(()),
            Self::Pbar { t } | Self::VarV { t } | Self::VarS { t } | Self::VarU { t } | Self::DerivS { t, .. } => {
                if t > 0.0 && t.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("t", "t must be positive"))
                }
            }
        }
    }

    fn context(&self) -> &'static str {
        match self {
            Self::Potential => "potential density",
            Self::Pbar { .. } => "transition density",
            Self::VarV { .. } => "cable covariance",
            Self::VarS { .. } => "tail-field covariance",
            Self::VarU { .. } => "heat covariance",
            Self::DerivS { .. } => "derivative-field covariance",
        }
    }
}

/// `(1 - exp(-2tψ))/(2ψ)`, with the removable limit at `ψ = 0`.
pub fn heat_weight(t: f64, psi: f64) -> f64 {
    let x = 2.0 * t * psi;
    if x < SERIES_THRESHOLD {
        t * (1.0 - 0.5 * x)
    } else {
        -(-x).exp_m1() / (2.0 * psi)
    }
}

/// A kernel value with its quadrature diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    /// The value.
    pub value: f64,
    /// Quadrature error estimate.
    pub error: f64,
    /// Largest frequency integrated explicitly.
    pub cutoff: f64,
    /// Whether a slightly negative raw value was clamped to zero.
    pub clamped: bool,
}

/// `(1/π) ∫₀^∞ cos(ξr) g(ξ) dξ` for the given kernel.
pub fn covariance(model: &LevyModel, alpha: f64, kind: KernelKind, r: f64, tol: Tolerance) -> Result<KernelValue> {
    kind.validate(alpha)?;
    if !r.is_finite() {
        return Err(invalid("r", "lag must be finite"));
    }
    let result = quad::guarded(
        |xi| model.re_psi(xi).map(|psi| kind.weight(alpha, xi, psi)),
        |g| quad::cos_transform(g, 1, r.abs(), 0.0, tol.scaled(PI), Cutoffs::default()),
    )?;
    let v = result.map_err(|e| e.into_error(kind.context(), 0))?;
    Ok(KernelValue { value: v.value[0] / PI, error: v.error[0] / PI, cutoff: v.cutoff, clamped: false })
}

/// α-potential density `ū_α(r)`, to [`KERNEL_TOL`].
pub fn u_alpha(model: &LevyModel, alpha: f64, r: f64) -> Result<f64> {
    Ok(covariance(model, alpha, KernelKind::Potential, r, Tolerance::absolute(KERNEL_TOL))?.value)
}

/// Transition density `p̄_t(r)`. Raw values within the tolerance below zero
/// are clamped and flagged.
pub fn pbar_density(model: &LevyModel, t: f64, r: f64) -> Result<KernelValue> {
    let mut v = covariance(model, 0.0, KernelKind::Pbar { t }, r, Tolerance::absolute(KERNEL_TOL))?;
    if v.value < 0.0 {
        let slack = KERNEL_TOL.max(v.error);
        if v.value < -slack {
            return Err(Error::NonConvergence {
                context: "transition density is negative beyond tolerance",
                partial: v.value,
                error: v.error,
                cutoff: v.cutoff,
                ratio: None,
            });
        }
        v.value = 0.0;
        v.clamped = true;
    }
    Ok(v)
}

/// Killing rate, time and tolerances for [`variance_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    /// Killing rate α > 0.
    pub alpha: f64,
    /// Time t > 0.
    pub t: f64,
    /// Quadrature tolerance.
    pub tol: Tolerance,
    /// Frequency range explored before declaring non-convergence.
    pub cutoffs: Cutoffs,
}

impl KernelQuery {
    /// Query with the default relative tolerance [`PROFILE_REL_TOL`].
    pub fn new(alpha: f64, t: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", "alpha must be positive"));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("t", "t must be positive"));
        }
        Ok(Self { alpha, t, tol: Tolerance::relative(PROFILE_REL_TOL), cutoffs: Cutoffs::default() })
    }

    /// Replaces the tolerance.
    pub fn with_tolerance(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }
}

/// One-point variances of the four fields at `(α, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceProfile {
    /// `Var U(t, x)`.
    pub var_u: f64,
    /// `Var V_α(t, x)`.
    pub var_v: f64,
    /// `Var S_α(t, x)`.
    pub var_s: f64,
    /// `Var η_α(x) = ū_α(0)`.
    pub var_eta: f64,
    /// Error estimates in the same order.
    pub error: [f64; 4],
    /// Largest frequency integrated explicitly.
    pub cutoff: f64,
}

/// Variances of `U`, `V_α`, `S_α` and `η_α`, integrated on one shared mesh
/// so that `var_v + var_s = var_eta` up to rounding.
pub fn variance_profile(model: &LevyModel, q: &KernelQuery) -> Result<VarianceProfile> {
    let (alpha, t) = (q.alpha, q.t);
    let mut err = None;
    let result = {
        let mut g = |xi: f64, out: &mut [f64]| {
            let psi = match model.re_psi(xi) {
                Ok(p) => p,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            };
            out[0] = heat_weight(t, psi);
            out[1] = KernelKind::VarV { t }.weight(alpha, xi, psi);
            out[2] = KernelKind::VarS { t }.weight(alpha, xi, psi);
            out[3] = KernelKind::Potential.weight(alpha, xi, psi);
        };
        quad::half_line(&mut g, 4, q.tol, q.cutoffs)
    };
    if let Some(e) = err {
        return Err(e);
    }
    let v = result.map_err(|fail| {
        // Report the first component that failed to converge.
        let worst = (0..4).find(|&i| fail.partial.error[i] > q.tol.bound(fail.partial.value[i])).unwrap_or(3);
        let mut e = fail.into_error("variance profile", worst);
        if let Error::NonConvergence { partial, error, .. } = &mut e {
            *partial /= PI;
            *error /= PI;
        }
        e
    })?;
    let s = |i: usize| v.value[i] / PI;
    let e = |i: usize| v.error[i] / PI;
    Ok(VarianceProfile {
        var_u: s(0),
        var_v: s(1),
        var_s: s(2),
        var_eta: s(3),
        error: [e(0), e(1), e(2), e(3)],
        cutoff: v.cutoff,
    })
}

/// Finite signed measure `Σ cᵢ δ_{xᵢ}` with distinct locations and nonzero
/// weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

impl AtomicMeasure {
    /// Merges atoms at identical locations; rejects measures whose weights
    /// cancel completely.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut v: Vec<(f64, f64)> = atoms.into_iter().collect();
        if v.iter().any(|(x, c)| !x.is_finite() || !c.is_finite()) {
            return Err(invalid("atoms", "locations and weights must be finite"));
        }
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (x, c) in v {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += c,
                _ => merged.push((x, c)),
            }
        }
        merged.retain(|a| a.1 != 0.0);
        if merged.is_empty() {
            return Err(Error::DegenerateMeasure("atomic measure has zero total variation".into()));
        }
        Ok(Self { atoms: merged })
    }

    /// `δ_a`.
    pub fn dirac(a: f64) -> Result<Self> {
        Self::new([(a, 1.0)])
    }

    /// `δ_a - δ_b`.
    pub fn dipole(a: f64, b: f64) -> Result<Self> {
        Self::new([(a, 1.0), (b, -1.0)])
    }

    /// Merged atoms sorted by location.
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `Σ |cᵢ|`.
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.1.abs()).sum()
    }

    /// `|μ̂(ξ)|² = |Σ cⱼ exp(iξxⱼ)|²`.
    pub fn fourier_sq(&self, xi: f64) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for &(x, c) in &self.atoms {
            let (s, co) = (xi * x).sin_cos();
            re += c * co;
            im += c * s;
        }
        re * re + im * im
    }

    /// Distinct nonnegative lags `|xᵢ - xⱼ|` with their total weight
    /// `Σ cᵢcⱼ` over ordered pairs.
    pub fn lag_weights(&self) -> Vec<(f64, f64)> {
        let mut lags = Vec::with_capacity(self.atoms.len() * self.atoms.len());
        for (i, &(xi, ci)) in self.atoms.iter().enumerate() {
            lags.push((0.0, ci * ci));
            for &(xj, cj) in &self.atoms[i + 1..] {
                lags.push(((xj - xi).abs(), 2.0 * ci * cj));
            }
        }
        lags.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(lags.len());
        for (r, w) in lags {
            match merged.last_mut() {
                Some(last) if last.0 == r => last.1 += w,
                _ => merged.push((r, w)),
            }
        }
        merged
    }
}

/// `(μ, Kμ) = Σᵢ Σⱼ cᵢ cⱼ k(xᵢ - xⱼ)`, evaluated as a sum over distinct
/// lags of the kernel's cosine transform.
pub fn quadratic_form(model: &LevyModel, alpha: f64, mu: &AtomicMeasure, kind: KernelKind) -> Result<f64> {
    let tol = Tolerance::absolute(KERNEL_TOL / mu.total_variation().powi(2));
    let mut total = 0.0;
    for (r, w) in mu.lag_weights() {
        let k = covariance(model, alpha, kind, r, tol).map_err(|e| match e {
            Error::NonConvergence { partial, error, cutoff, ratio, .. } => {
                Error::NonConvergence { context: "quadratic form", partial, error, cutoff, ratio }
            }
            other => other,
        })?;
        total += w * k.value;
    }
    Ok(total)
}

/// Green-function bound constant `e(α + 2/α)`.
pub fn green_constant(alpha: f64) -> f64 {
    core::f64::consts::E * (alpha + 2.0 / alpha)
}

/// Closed-form `ū_α(r)` for Brownian motion with `ReΨ = κξ²`.
pub fn brownian_u_alpha(kappa: f64, alpha: f64, r: f64) -> f64 {
    let a = (alpha / (2.0 * kappa)).sqrt();
    (-a * r.abs()).exp() / (4.0 * kappa * a)
}

/// Describes a kernel for diagnostics, e.g. `VarV(t=1)`.
pub fn describe(kind: &KernelKind) -> alloc::string::String {
    match kind {
        KernelKind::Potential => "potential".into(),
        KernelKind::Pbar { t } => format!("pbar(t={t})"),
        KernelKind::VarV { t } => format!("varV(t={t})"),
        KernelKind::VarS { t } => format!("varS(t={t})"),
        KernelKind::VarU { t } => format!("varU(t={t})"),
        KernelKind::DerivS { n, t } => format!("derivS(n={n},t={t})"),
    }
}
