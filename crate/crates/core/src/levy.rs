//! Symmetric Lévy processes on the line, described through the real part of
//! their characteristic exponent, `E exp(iξX_t) = exp(-tΨ(ξ))`.
//!
//! The Lévy–Khintchine form used throughout is
//! `ReΨ(ξ) = σ²ξ²/2 + ∫(1 - cos zξ) ν(dz)` with `ν` symmetric, so the
//! integral is twice the one over `(0, ∞)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

#[allow(unused_imports)] // float methods when std is absent
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::quad::{self, Cutoffs, Failure, Tolerance};

const LEVY_REL_TOL: f64 = 1e-9;

/// Parametric families for the density of `ν` on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityFamily {
    /// `ρ(z) = scale · z^(-1-index)` on `[lower, upper]`, zero elsewhere.
    PowerLaw {
        /// Multiplicative constant.
        scale: f64,
        /// Tail index; the density decays like `z^(-1-index)`.
        index: f64,
        /// Lower cutoff (0 for infinite activity).
        lower: f64,
        /// Upper cutoff (`f64::INFINITY` for none).
        upper: f64,
    },
    /// `(z, ρ(z))` pairs interpolated linearly in `(ln z, ln ρ)`, zero
    /// outside the tabulated range.
    Tabulated(Vec<(f64, f64)>),
}

impl DensityFamily {
    fn support(&self) -> (f64, f64) {
        match self {
            Self::PowerLaw { lower, upper, .. } => (*lower, *upper),
            Self::Tabulated(points) => (points[0].0, points[points.len() - 1].0),
        }
    }

    fn eval(&self, z: f64) -> f64 {
        match self {
            Self::PowerLaw { scale, index, lower, upper } => {
                if z < *lower || z > *upper || z <= 0.0 {
                    0.0
                } else {
                    scale * z.powf(-1.0 - index)
                }
            }
            Self::Tabulated(points) => {
                let (first, last) = (points[0].0, points[points.len() - 1].0);
                if z < first || z > last {
                    return 0.0;
                }
                let k = points.partition_point(|p| p.0 <= z).clamp(1, points.len() - 1);
                let (z0, r0) = points[k - 1];
                let (z1, r1) = points[k];
                let s = (z.ln() - z0.ln()) / (z1.ln() - z0.ln());
                (r0.ln() + s * (r1.ln() - r0.ln())).exp()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::PowerLaw { scale, index, lower, upper } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(invalid("scale", "power-law scale must be positive and finite"));
                }
                if !index.is_finite() {
                    return Err(invalid("index", "power-law index must be finite"));
                }
                if !(*lower >= 0.0 && lower.is_finite()) {
                    return Err(invalid("lower", "lower cutoff must be finite and nonnegative"));
                }
                if upper.is_nan() || *upper <= *lower {
                    return Err(invalid("upper", "upper cutoff must exceed the lower cutoff"));
                }
                if *lower == 0.0 && *index >= 2.0 {
                    return Err(invalid("index", "index must be below 2 when the lower cutoff is 0"));
                }
                if upper.is_infinite() && *index <= 0.0 {
                    return Err(invalid("index", "index must be positive without an upper cutoff"));
                }
                Ok(())
            }
            Self::Tabulated(points) => {
                if points.len() < 2 {
                    return Err(invalid("table", "need at least two (z, density) pairs"));
                }
                for w in points.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(invalid("table", "abscissae must be strictly increasing"));
                    }
                }
                for (z, r) in points {
                    if !(z.is_finite() && *z > 0.0) {
                        return Err(invalid("table", format!("abscissa {z} must be positive")));
                    }
                    if !(r.is_finite() && *r > 0.0) {
                        return Err(invalid("table", format!("density {r} at z={z} must be positive")));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Symmetric Lévy measure `ν(dz) = ρ(|z|) dz`, checked at construction to
/// satisfy `∫ min(1, z²) ν(dz) < ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasure {
    family: DensityFamily,
    small_moment: f64,
    large_mass: f64,
}

impl LevyMeasure {
    /// Validates the family and certifies integrability by quadrature.
    pub fn new(family: DensityFamily) -> Result<Self> {
        family.validate()?;
        let mut m = Self { family, small_moment: 0.0, large_mass: 0.0 };
        m.small_moment = 2.0 * m.moment_below(1.0, "levy measure certificate")?;
        m.large_mass = 2.0 * m.mass_above(1.0, "levy measure certificate")?;
        if m.small_moment == 0.0 && m.large_mass == 0.0 {
            return Err(Error::DegenerateMeasure("Lévy measure has zero mass".into()));
        }
        Ok(m)
    }

    /// Measure with the density of a symmetric `β`-stable law whose exponent
    /// is `c|ξ|^β`, for `β ∈ (0, 2)`.
    pub fn stable(beta: f64, c: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 2.0) {
            return Err(invalid("beta", "stable Lévy measure needs beta in (0,2)"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("c", "scale must be positive"));
        }
        Self::new(DensityFamily::PowerLaw {
            scale: c / (2.0 * one_minus_cos_moment(beta)),
            index: beta,
            lower: 0.0,
            upper: f64::INFINITY,
        })
    }

    /// The density family.
    pub fn family(&self) -> &DensityFamily {
        &self.family
    }

    /// `ρ(|z|)`.
    pub fn density(&self, z: f64) -> f64 {
        self.family.eval(z.abs())
    }

    /// `(∫_{|z|≤1} z² ν(dz), ν{|z|>1})`, the integrability certificate.
    pub fn certificate(&self) -> (f64, f64) {
        (self.small_moment, self.large_mass)
    }

    /// `ν(ℝ)` when the support stays away from the origin.
    pub fn total_mass(&self) -> Result<Option<f64>> {
        let (a, _) = self.family.support();
        if a > 0.0 {
            Ok(Some(2.0 * self.mass_above(a, "total mass")?))
        } else {
            Ok(None)
        }
    }

    /// `∫₀^ε z² ρ(z) dz`.
    fn moment_below(&self, eps: f64, context: &'static str) -> Result<f64> {
        let (a, b) = self.family.support();
        let hi = eps.min(b);
        if hi <= a {
            return Ok(0.0);
        }
        let mut f = quad::scalar(|z: f64| z * z * self.family.eval(z));
        let tol = Tolerance::relative(LEVY_REL_TOL);
        let r = if a == 0.0 { quad::inward(&mut f, 1, hi, tol) } else { quad::adaptive(&mut f, 1, a, hi, tol) };
        r.map(|v| v.value[0]).map_err(|e| e.into_error(context, 0))
    }

    /// `∫_ε^∞ ρ(z) dz`.
    fn mass_above(&self, eps: f64, context: &'static str) -> Result<f64> {
        let (a, b) = self.family.support();
        let lo = eps.max(a);
        if lo >= b {
            return Ok(0.0);
        }
        let mut f = quad::scalar(|z: f64| self.family.eval(z));
        let tol = Tolerance::relative(LEVY_REL_TOL);
        let r = if b.is_finite() {
            quad::adaptive(&mut f, 1, lo, b, tol)
        } else {
            quad::outward(&mut f, 1, lo, tol, far_cutoffs(lo))
        };
        r.map(|v| v.value[0]).map_err(|e| e.into_error(context, 0))
    }

    /// `∫₀^∞ (1 - cos zξ) ρ(z) dz` for `ξ > 0`, split at `z = 1/ξ`.
    fn one_minus_cos(&self, xi: f64) -> Result<f64> {
        let (a, b) = self.family.support();
        let split = 1.0 / xi;
        let tol = Tolerance::relative(LEVY_REL_TOL);
        let mut total = 0.0;
        let head_hi = split.min(b);
        if head_hi > a {
            total += if a == 0.0 {
                let mut bump = quad::scalar(|z: f64| bump(z, xi, &self.family));
                quad::inward(&mut bump, 1, head_hi, tol).map_err(|e| e.into_error(LK_CONTEXT, 0))?.value[0]
            } else {
                self.bump_finite(xi, a, head_hi)?
            };
        }
        let lo = split.max(a);
        if lo < b {
            if b.is_finite() {
                total += self.bump_finite(xi, lo, b)?;
            } else {
                // In u = zξ the oscillation has unit frequency.
                let mass = self.mass_above(lo, LK_CONTEXT)?;
                let osc_tol = Tolerance { abs: LEVY_REL_TOL * (total + mass), rel: LEVY_REL_TOL };
                let mut g = quad::scalar(|u: f64| self.family.eval(u / xi) / xi);
                let from = lo * xi;
                let osc = quad::cos_transform(&mut g, 1, 1.0, from, osc_tol, far_cutoffs(from))
                    .map_err(|e: Failure| e.into_error(LK_CONTEXT, 0))?;
                total += mass - osc.value[0];
            }
        }
        Ok(total.max(0.0))
    }

    /// `∫_lo^hi (1 - cos zξ) ρ(z) dz` on a finite range: split at table
    /// knots, then summed over half periods when a piece holds many
    /// oscillations.
    fn bump_finite(&self, xi: f64, lo: f64, hi: f64) -> Result<f64> {
        let mut cuts = alloc::vec![lo];
        if let DensityFamily::Tabulated(points) = &self.family {
            cuts.extend(points.iter().map(|p| p.0).filter(|z| *z > lo && *z < hi));
        }
        cuts.push(hi);
        let period = PI / xi;
        let panels: f64 = (hi - lo) / period;
        if panels > MAX_LEVY_PANELS {
            return Err(Error::NonConvergence {
                context: "Lévy–Khintchine integral: too many oscillations on a bounded support",
                partial: 0.0,
                error: f64::INFINITY,
                cutoff: xi,
                ratio: None,
            });
        }
        let tol = Tolerance::relative(LEVY_REL_TOL);
        let mut f = quad::scalar(|z: f64| bump(z, xi, &self.family));
        let (mut scratch, mut out) = ([0.0], [0.0]);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (p, q) = (w[0], w[1]);
            let n = ((q - p) / period).floor();
            let mut start = p;
            if n > 16.0 {
                for k in 0..n as usize {
                    let end = p + (k + 1) as f64 * period;
                    quad::gauss_legendre(&mut f, start, end, &mut scratch, &mut out);
                    total += out[0];
                    start = end;
                }
            }
            if q > start {
                total += quad::adaptive(&mut f, 1, start, q, tol).map_err(|e| e.into_error(LK_CONTEXT, 0))?.value[0];
            }
        }
        Ok(total)
    }
}

const LK_CONTEXT: &str = "Lévy–Khintchine integral";
/// Half periods allowed when integrating over a bounded support.
const MAX_LEVY_PANELS: f64 = 4_194_304.0;

/// `(1 - cos zξ) ρ(z)`, written as `2 sin²(zξ/2) ρ(z)` to avoid cancellation.
fn bump(z: f64, xi: f64, family: &DensityFamily) -> f64 {
    let s = (0.5 * z * xi).sin();
    2.0 * s * s * family.eval(z)
}

fn far_cutoffs(from: f64) -> Cutoffs {
    Cutoffs { min: 16.0 * from, max: from * (2.0f64).powi(70) }
}

/// `∫₀^∞ (1 - cos u) u^(-1-β) du = -Γ(-β) cos(πβ/2)` (`π/2` at `β = 1`).
pub fn one_minus_cos_moment(beta: f64) -> f64 {
    if (beta - 1.0).abs() < 1e-12 {
        PI / 2.0
    } else {
        -libm::tgamma(-beta) * (PI * beta / 2.0).cos()
    }
}

/// Kind tag and parameters of a [`LevyModel`].
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// `ReΨ(ξ) = κξ²`.
    Brownian {
        /// Diffusion coefficient.
        kappa: f64,
    },
    /// `ReΨ(ξ) = c|ξ|^β`.
    Stable {
        /// Index in `(0, 2]`.
        beta: f64,
        /// Scale.
        c: f64,
    },
    /// `ReΨ(ξ) = σ²ξ²/2 + ∫(1 - cos zξ) ν(dz)`.
    Khintchine {
        /// Gaussian coefficient.
        sigma2: f64,
        /// Jump measure, if any.
        measure: Option<LevyMeasure>,
    },
}

/// Symmetric-in-law Lévy process given by `ReΨ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyModel {
    kind: ModelKind,
}

impl LevyModel {
    /// Brownian motion with `ReΨ(ξ) = κξ²`.
    pub fn brownian(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(invalid("kappa", "kappa must be positive"));
        }
        Ok(Self { kind: ModelKind::Brownian { kappa } })
    }

    /// Symmetric stable process with `ReΨ(ξ) = c|ξ|^β`.
    pub fn stable(beta: f64, c: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 2.0) {
            return Err(invalid("beta", "beta must lie in (0,2]"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("c", "c must be positive"));
        }
        Ok(Self { kind: ModelKind::Stable { beta, c } })
    }

    /// General symmetric exponent from a Gaussian part and a jump measure.
    pub fn khintchine(sigma2: f64, measure: Option<LevyMeasure>) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(invalid("sigma2", "sigma2 must be nonnegative"));
        }
        if sigma2 == 0.0 && measure.is_none() {
            return Err(Error::DegenerateMeasure("zero Gaussian part and no jump measure".into()));
        }
        Ok(Self { kind: ModelKind::Khintchine { sigma2, measure } })
    }

    /// Kind and parameters.
    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// Short label such as `stable(beta=1.5,c=1)`.
    pub fn label(&self) -> String {
        match &self.kind {
            ModelKind::Brownian { kappa } => format!("brownian(kappa={kappa})"),
            ModelKind::Stable { beta, c } => format!("stable(beta={beta},c={c})"),
            ModelKind::Khintchine { sigma2, measure } => match measure.as_ref().map(|m| &m.family) {
                None => format!("khintchine(sigma2={sigma2})"),
                Some(DensityFamily::PowerLaw { scale, index, lower, upper }) => format!(
                    "khintchine(sigma2={sigma2},power_law(scale={scale},index={index},lower={lower},upper={upper}))"
                ),
                Some(DensityFamily::Tabulated(p)) => {
                    format!("khintchine(sigma2={sigma2},tabulated({} points))", p.len())
                }
            },
        }
    }

    /// `ReΨ(ξ)`. Exactly even, and exactly zero at the origin.
    pub fn re_psi(&self, xi: f64) -> Result<f64> {
        let x = xi.abs();
        if x == 0.0 {
            return Ok(0.0);
        }
        match &self.kind {
            ModelKind::Brownian { kappa } => Ok(kappa * x * x),
            ModelKind::Stable { beta, c } => Ok(c * x.powf(*beta)),
            ModelKind::Khintchine { sigma2, measure } => {
                let jumps = match measure {
                    Some(m) => 2.0 * m.one_minus_cos(x)?,
                    None => 0.0,
                };
                Ok(0.5 * sigma2 * x * x + jumps)
            }
        }
    }

    /// The jump measure, with stable kinds mapped to their canonical
    /// measure. Errors for purely Gaussian models.
    pub fn levy_measure(&self) -> Result<LevyMeasure> {
        match &self.kind {
            ModelKind::Brownian { .. } => Err(Error::Domain("Brownian motion has no Lévy measure".into())),
            ModelKind::Stable { beta, .. } if *beta == 2.0 => {
                Err(Error::Domain("the 2-stable law has no Lévy measure".into()))
            }
            ModelKind::Stable { beta, c } => LevyMeasure::stable(*beta, *c),
            ModelKind::Khintchine { measure: Some(m), .. } => Ok(m.clone()),
            ModelKind::Khintchine { measure: None, .. } => Err(Error::Domain("model has no jump part".into())),
        }
    }

    /// Feller's functions `K(ε) = ε⁻² ∫_{|z|≤ε} z² ν(dz)` and
    /// `G(ε) = ν{|z| > ε}`.
    pub fn feller_functions(&self, eps: f64) -> Result<(f64, f64)> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Domain(format!("feller functions need eps > 0, got {eps}")));
        }
        let m = self.levy_measure()?;
        let k = 2.0 * m.moment_below(eps, "Feller K")? / (eps * eps);
        let g = 2.0 * m.mass_above(eps, "Feller G")?;
        Ok((k, g))
    }

    /// Averaged exponent `R(ξ) = ξ⁻¹ ∫₀^ξ ReΨ(z) dz`.
    pub fn averaged_exponent(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::Domain(format!("averaged exponent needs xi > 0, got {xi}")));
        }
        match &self.kind {
            ModelKind::Brownian { kappa } => Ok(kappa * xi * xi / 3.0),
            ModelKind::Stable { beta, c } => Ok(c * xi.powf(*beta) / (beta + 1.0)),
            ModelKind::Khintchine { .. } => {
                let r =
                    quad::guarded(|z| self.re_psi(z), |f| quad::adaptive(f, 1, 0.0, xi, Tolerance::relative(1e-8)))?;
                Ok(r.map_err(|e| e.into_error("averaged exponent", 0))?.value[0] / xi)
            }
        }
    }

    /// Effective index of `ReΨ` at high frequency: `2` with a Gaussian part,
    /// `β` for stable laws, otherwise the local log-slope at `ξ = 2¹⁰`.
    pub fn tail_index(&self) -> Result<f64> {
        match &self.kind {
            ModelKind::Brownian { .. } => Ok(2.0),
            ModelKind::Stable { beta, .. } => Ok(*beta),
            ModelKind::Khintchine { sigma2, .. } if *sigma2 > 0.0 => Ok(2.0),
            ModelKind::Khintchine { .. } => {
                let a = self.re_psi(1024.0)?;
                let b = self.re_psi(2048.0)?;
                if a <= 0.0 || b <= 0.0 {
                    return Ok(0.0);
                }
                Ok((b / a).log2())
            }
        }
    }

    /// Whether `ν` is absent (pure Gaussian exponent).
    pub fn is_gaussian(&self) -> bool {
        match &self.kind {
            ModelKind::Brownian { .. } => true,
            ModelKind::Stable { beta, .. } => *beta == 2.0,
            ModelKind::Khintchine { measure, .. } => measure.is_none(),
        }
    }

    /// Evaluates the existence and smoothness conditions on the given grids.
    pub fn condition_report(&self, alpha: f64, grids: &ConditionGrids) -> Result<ConditionReport> {
        ConditionReport::compute(self, alpha, grids)
    }
}

/// Numerical verdict on a limit condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The numerical trend supports the condition.
    Satisfied,
    /// The numerical trend contradicts the condition.
    Violated,
    /// The data are not decisive.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Satisfied => "satisfied-numerically",
            Self::Violated => "violated-numerically",
            Self::Inconclusive => "inconclusive",
        })
    }
}

/// Geometric grids for [`LevyModel::condition_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionGrids {
    /// Frequencies, all above 1, increasing.
    pub xi: Vec<f64>,
    /// Scales for `G/K`, increasing.
    pub eps: Vec<f64>,
}

impl ConditionGrids {
    /// `n` geometrically spaced points from `lo` to `hi` inclusive.
    pub fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n < 2 {
            return alloc::vec![lo];
        }
        let r = (hi / lo).ln() / (n - 1) as f64;
        (0..n).map(|k| if k + 1 == n { hi } else { lo * (r * k as f64).exp() }).collect()
    }
}

impl Default for ConditionGrids {
    fn default() -> Self {
        Self { xi: Self::geometric(4.0, 1e6, 25), eps: Self::geometric(1e-6, 1.0, 13) }
    }
}

/// Outcome of the Dalang integral `∫_ℝ dξ / (α + 2ReΨ(ξ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DalangIntegral {
    /// The integral, or `None` when the tail did not converge (read as `+∞`).
    pub value: Option<f64>,
    /// Quadrature error estimate. When divergent: the partial value, or the
    /// lower bound of the integrand for finite measures.
    pub error: f64,
    /// Largest frequency integrated explicitly.
    pub cutoff: f64,
    /// Ratio of consecutive dyadic pieces at the cutoff, when divergent.
    pub tail_ratio: Option<f64>,
}

/// Numerical evaluation of the existence and smoothness conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// Killing rate used in the Dalang integral.
    pub alpha: f64,
    /// Dalang integral.
    pub dalang_integral: DalangIntegral,
    /// `(ξ, ReΨ(ξ)/ln ξ)`.
    pub hawkes_trend: Vec<(f64, f64)>,
    /// `(z, ReΨ(2z) / sup_{[z,2z]} ReΨ)`.
    pub quasi_increasing_ratio: Vec<(f64, f64)>,
    /// `(ε, G(ε)/K(ε))`; `None` for a purely Gaussian exponent.
    pub kg_ratio: Option<Vec<(f64, f64)>>,
    /// Verdict on the Dalang condition.
    pub dalang: Verdict,
    /// Verdict on `ReΨ(ξ)/ln ξ → ∞`.
    pub hawkes: Verdict,
    /// Verdict on quasi-monotonicity of `ReΨ`.
    pub quasi_increasing: Verdict,
    /// Verdict on `limsup_{ε→0} G/K < ∞`.
    pub kg: Verdict,
}

/// Minimum growth of `ReΨ/ln ξ` over the top decade to call it unbounded.
const HAWKES_GROWTH: f64 = 1.5;
/// Smallest acceptable quasi-monotonicity ratio.
const QUASI_FLOOR: f64 = 0.1;
/// Largest spread of `G/K` over the smallest decade read as bounded.
const KG_SPREAD: f64 = 2.0;
/// Dyadic piece ratio read as a logarithmically divergent tail.
const DIVERGENT_RATIO: f64 = 0.99;
/// Sample points per `[z, 2z]` when approximating the supremum.
const SUP_SAMPLES: usize = 32;

impl ConditionReport {
    fn compute(model: &LevyModel, alpha: f64, grids: &ConditionGrids) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", "alpha must be positive"));
        }
        check_grid("xi", &grids.xi)?;
        check_grid("eps", &grids.eps)?;
        if grids.xi[0] <= 1.0 {
            return Err(invalid("xi", "frequency grid must start above 1"));
        }

        let (dalang_integral, dalang) = dalang(model, alpha)?;

        let mut hawkes_trend = Vec::with_capacity(grids.xi.len());
        for &xi in &grids.xi {
            hawkes_trend.push((xi, model.re_psi(xi)? / xi.ln()));
        }
        let hawkes = hawkes_verdict(&hawkes_trend);

        let mut quasi_increasing_ratio = Vec::with_capacity(grids.xi.len());
        for &z in &grids.xi {
            let mut sup = 0.0f64;
            for k in 0..=SUP_SAMPLES {
                sup = sup.max(model.re_psi(z * (1.0 + k as f64 / SUP_SAMPLES as f64))?);
            }
            let ratio = if sup > 0.0 { model.re_psi(2.0 * z)? / sup } else { 1.0 };
            quasi_increasing_ratio.push((z, ratio));
        }
        let quasi_increasing = quasi_verdict(&quasi_increasing_ratio);

        let kg_ratio = if model.is_gaussian() {
            None
        } else {
            let mut t = Vec::with_capacity(grids.eps.len());
            for &eps in &grids.eps {
                let (k, g) = model.feller_functions(eps)?;
                t.push((eps, if k > 0.0 { g / k } else { f64::INFINITY }));
            }
            Some(t)
        };
        let kg = kg_ratio.as_deref().map_or(Verdict::Inconclusive, kg_verdict);

        Ok(Self {
            alpha,
            dalang_integral,
            hawkes_trend,
            quasi_increasing_ratio,
            kg_ratio,
            dalang,
            hawkes,
            quasi_increasing,
            kg,
        })
    }
}

fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid(name, "grid must be nonempty"));
    }
    if grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(name, "grid must be positive and strictly increasing"));
    }
    Ok(())
}

fn dalang(model: &LevyModel, alpha: f64) -> Result<(DalangIntegral, Verdict)> {
    // Finite ν without a Gaussian part: ReΨ ≤ 2ν(ℝ), so the integrand is
    // bounded below and the integral diverges.
    if let ModelKind::Khintchine { sigma2, measure } = &model.kind {
        let bound = match measure {
            None => Some(0.0),
            Some(m) => m.total_mass()?,
        };
        if let (true, Some(mass)) = (*sigma2 == 0.0, bound) {
            let floor = 1.0 / (alpha + 4.0 * mass);
            return Ok((
                DalangIntegral { value: None, error: floor, cutoff: 0.0, tail_ratio: Some(1.0) },
                Verdict::Violated,
            ));
        }
    }
    let r = quad::guarded(
        |xi| model.re_psi(xi).map(|r| 1.0 / (alpha + 2.0 * r)),
        |f| quad::half_line(f, 1, Tolerance::relative(1e-8), Cutoffs::default()),
    )?;
    Ok(match r {
        Ok(v) => (
            DalangIntegral {
                value: Some(2.0 * v.value[0]),
                error: 2.0 * v.error[0],
                cutoff: v.cutoff,
                tail_ratio: None,
            },
            Verdict::Satisfied,
        ),
        Err(fail) => {
            let verdict = match fail.ratio {
                Some(q) if q >= DIVERGENT_RATIO => Verdict::Violated,
                _ => Verdict::Inconclusive,
            };
            (
                DalangIntegral {
                    value: None,
                    error: 2.0 * fail.partial.value[0],
                    cutoff: fail.partial.cutoff,
                    tail_ratio: fail.ratio,
                },
                verdict,
            )
        }
    })
}

fn top_decade(table: &[(f64, f64)]) -> &[(f64, f64)] {
    let top = table[table.len() - 1].0;
    let start = table.partition_point(|p| p.0 < top / 10.0);
    &table[start..]
}

fn hawkes_verdict(table: &[(f64, f64)]) -> Verdict {
    let top = top_decade(table);
    if top.len() < 2 {
        return Verdict::Inconclusive;
    }
    let increasing = top.windows(2).all(|w| w[1].1 > w[0].1);
    let decreasing = top.windows(2).all(|w| w[1].1 <= w[0].1);
    let growth = top[top.len() - 1].1 / top[0].1;
    if increasing && growth >= HAWKES_GROWTH {
        Verdict::Satisfied
    } else if decreasing {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    }
}

fn quasi_verdict(table: &[(f64, f64)]) -> Verdict {
    let min = table.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if min >= QUASI_FLOOR {
        return Verdict::Satisfied;
    }
    let top = top_decade(table);
    let decreasing = top.windows(2).all(|w| w[1].1 <= w[0].1);
    if decreasing && top[top.len() - 1].1 < QUASI_FLOOR {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    }
}

fn kg_verdict(table: &[(f64, f64)]) -> Verdict {
    let bottom_end = table.partition_point(|p| p.0 <= 10.0 * table[0].0);
    let bottom = &table[..bottom_end.max(1)];
    if bottom.iter().any(|p| p.1.is_infinite()) {
        return Verdict::Violated;
    }
    if bottom.len() < 2 {
        return Verdict::Inconclusive;
    }
    let max = bottom.iter().map(|p| p.1).fold(0.0, f64::max);
    let min = bottom.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    // Growth towards ε → 0 means the table is decreasing in ε.
    let growing = bottom.windows(2).all(|w| w[0].1 >= w[1].1);
    if max <= KG_SPREAD * min {
        Verdict::Satisfied
    } else if growing {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_constant_matches_direct_quadrature() {
        for beta in [0.5, 1.0, 1.5, 1.9] {
            let mut f = quad::scalar(|u: f64| {
                let s = (0.5 * u).sin();
                2.0 * s * s * u.powf(-1.0 - beta)
            });
            let head = quad::inward(&mut f, 1, 1.0, Tolerance::relative(1e-12)).unwrap().value[0];
            let mut g = quad::scalar(|u: f64| u.powf(-1.0 - beta));
            let mass = quad::outward(&mut g, 1, 1.0, Tolerance::relative(1e-12), far_cutoffs(1.0)).unwrap().value[0];
            let osc = quad::cos_transform(&mut g, 1, 1.0, 1.0, Tolerance::absolute(1e-12), far_cutoffs(1.0))
                .unwrap()
                .value[0];
            let direct = head + mass - osc;
            let closed = one_minus_cos_moment(beta);
            assert!((direct - closed).abs() < 1e-8 * closed, "beta={beta}: {direct} vs {closed}");
        }
    }

    #[test]
    fn tabulated_interpolates_log_linearly() {
        let fam = DensityFamily::Tabulated(alloc::vec![(1.0, 1.0), (4.0, 1.0 / 64.0)]);
        // Exact power law z^{-3} through both points.
        assert!((fam.eval(2.0) - 0.125).abs() < 1e-15);
        assert_eq!(fam.eval(0.5), 0.0);
        assert_eq!(fam.eval(5.0), 0.0);
    }

    #[test]
    fn verdict_helpers() {
        let up: Vec<(f64, f64)> = (1..=10).map(|k| (k as f64 * 10.0, k as f64)).collect();
        assert_eq!(hawkes_verdict(&up), Verdict::Satisfied);
        let down: Vec<(f64, f64)> = (1..=10).map(|k| (k as f64 * 10.0, 1.0 / k as f64)).collect();
        assert_eq!(hawkes_verdict(&down), Verdict::Violated);
        let flat: Vec<(f64, f64)> = (1..=10).map(|k| (k as f64, 1.0 / 3.0)).collect();
        assert_eq!(kg_verdict(&flat), Verdict::Satisfied);
    }
}
