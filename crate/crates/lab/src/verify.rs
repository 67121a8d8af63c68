//! Property suites behind the `verify` command.
//!
//! Generic properties run on the configured model; closed-form oracles run
//! on fixed reference models. Statistical comparisons use the configured
//! number of standard errors, and every property records its own detail
//! line with the numbers it compared.

use std::f64::consts::LN_2;
use std::fmt;
use std::time::Instant;

use dynkin_core::kernel::{self, variance_profile, AtomicMeasure, KernelKind, KernelQuery};
use dynkin_core::levy::ConditionGrids;
use dynkin_core::localtime::{
    conditional_bins, fixed_time_moments, resolvent_moments, stable_increment, ConditionalBins, ConditionalQuery,
    PathSampler, ResolventCheck,
};
use dynkin_core::quad::{self, Tolerance};
use dynkin_core::rng::{self, domain};
use dynkin_core::spde::{image_sum_ratio, run_moments, MomentRun, Stepper, MAX_IMAGE_RATIO};
use dynkin_core::stats::Moments;
use dynkin_core::synth::{FieldSampler, JointSampler, PointBasis};
use dynkin_core::{
    Error, FieldKind, LevyMeasure, LevyModel, PathConfig, Result, SpatialGrid, SpectralGrid, TorusConfig, TorusState,
    Verdict,
};
use rand::Rng;

use crate::config::{ExperimentConfig, ModelSpec};
use crate::run::par_chunks;

/// Result of one property.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// The property held.
    Pass,
    /// The property failed.
    Fail,
    /// Not applicable to the configured model.
    Skipped,
    /// A computation failed for another reason.
    Error,
    /// A quadrature did not converge.
    NonConvergence,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Skipped => "skipped",
            Outcome::Error => "error",
            Outcome::NonConvergence => "non-convergence",
        })
    }
}

/// One checked property.
#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    /// Suite name.
    pub suite: &'static str,
    /// Property name.
    pub name: String,
    /// Outcome.
    pub outcome: Outcome,
    /// Compared numbers or the error.
    pub detail: String,
    /// Wall time.
    pub seconds: f64,
}

enum Check {
    Verdict(bool, String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Result<Check> {
    Ok(Check::Verdict(ok, detail))
}

fn property(suite: &'static str, name: &str, f: impl FnOnce() -> Result<Check>) -> Property {
    let start = Instant::now();
    let (outcome, detail) = match f() {
        Ok(Check::Verdict(true, d)) => (Outcome::Pass, d),
        Ok(Check::Verdict(false, d)) => (Outcome::Fail, d),
        Ok(Check::Skip(d)) => (Outcome::Skipped, d),
        Err(e) if e.is_non_convergence() => (Outcome::NonConvergence, e.to_string()),
        Err(e) => (Outcome::Error, e.to_string()),
    };
    Property { suite, name: name.to_string(), outcome, detail, seconds: start.elapsed().as_secs_f64() }
}

struct Settings<'a> {
    model: &'a LevyModel,
    spec: &'a ModelSpec,
    seed: u64,
    sigmas: f64,
    tol: f64,
    reps: u64,
}

/// Runs the suites selected in `cfg.verify.suites`, in canonical order.
pub fn run_suites(cfg: &ExperimentConfig, model: &LevyModel) -> Vec<Property> {
    let s = Settings {
        model,
        spec: &cfg.model,
        seed: cfg.seed,
        sigmas: cfg.verify.sigmas,
        tol: cfg.verify.tol,
        reps: cfg.verify.replications,
    };
    let mut out = Vec::new();
    for name in crate::config::SUITES {
        if !cfg.verify.suites.iter().any(|x| x == name) {
            continue;
        }
        out.extend(match name {
            "levy" => levy(&s),
            "kernels" => kernels(&s),
            "synth" => synth(&s),
            "spde" => spde(&s),
            _ => localtime(&s),
        });
    }
    out
}

fn aux(seed: u64, index: u64) -> rng::Stream {
    rng::stream(seed, domain::AUX, index)
}

fn max_rel(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    pairs.into_iter().map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
}

fn stable_shape(beta: f64, c: f64) -> Result<LevyModel> {
    LevyModel::khintchine(0.0, Some(LevyMeasure::stable(beta, c)?))
}

fn levy(s: &Settings<'_>) -> Vec<Property> {
    const S: &str = "levy";
    let m = s.model;
    let mut v = vec![property(S, "exponent is even", || {
        let mut r = aux(s.seed, 1);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let xi = 10f64.powf(r.random_range(-3.0..3.0));
            let (a, b) = (m.re_psi(xi)?, m.re_psi(-xi)?);
            worst = worst.max((a - b).abs() / a.abs().max(f64::MIN_POSITIVE));
        }
        verdict(worst <= 1e-12, format!("max relative gap {worst:.1e} over 1000 frequencies"))
    })];
    v.push(property(S, "stable-shaped measure matches closed form", || {
        let mut worst = 0.0f64;
        for beta in [0.7, 1.5] {
            let (q, c) = (stable_shape(beta, 1.0)?, LevyModel::stable(beta, 1.0)?);
            for xi in ConditionGrids::geometric(0.1, 100.0, 30) {
                worst = worst.max(max_rel([(q.re_psi(xi)?, c.re_psi(xi)?)]));
            }
        }
        verdict(worst <= 1e-4, format!("max relative gap {worst:.1e} on [0.1, 100], beta in {{0.7, 1.5}}"))
    }));
    v.push(property(S, "averaged exponent closed forms", || {
        let b = LevyModel::brownian(1.0)?;
        let st = LevyModel::stable(1.5, 0.7)?;
        let q = stable_shape(1.5, 0.7)?;
        let mut pairs = Vec::new();
        for xi in [0.1, 1.0, 10.0] {
            pairs.push((b.averaged_exponent(xi)?, xi * xi / 3.0));
            pairs.push((st.averaged_exponent(xi)?, 0.7 * xi.powf(1.5) / 2.5));
            pairs.push((q.averaged_exponent(xi)?, 0.7 * xi.powf(1.5) / 2.5));
        }
        let w = max_rel(pairs);
        verdict(w <= 1e-6, format!("max relative error {w:.1e}"))
    }));
    v.push(property(S, "stable shape K/G ratio", || {
        let q = LevyModel::stable(1.5, 1.0)?;
        let mut pairs = Vec::new();
        for eps in [1e-3, 1.0, 10.0] {
            let (k, g) = q.feller_functions(eps)?;
            pairs.push((g / k, (2.0 - 1.5) / 1.5));
        }
        let w = max_rel(pairs);
        verdict(w <= 1e-4, format!("max relative error {w:.1e} against (2-beta)/beta"))
    }));

    let mut jump_models: Vec<(String, LevyModel)> = Vec::new();
    if !m.is_gaussian() && matches!(s.spec, ModelSpec::Stable { .. } | ModelSpec::Khintchine { sigma2: 0.0, .. }) {
        jump_models.push((s.spec.describe(), m.clone()));
    }
    if let Ok(q) = stable_shape(1.5, 1.0) {
        jump_models.push(("stable-shaped measure beta=1.5".into(), q));
    }
    if let Ok(mu) =
        LevyMeasure::new(dynkin_core::DensityFamily::PowerLaw { scale: 1.0, index: 1.7, lower: 0.0, upper: 2.0 })
    {
        if let Ok(q) = LevyModel::khintchine(0.0, Some(mu)) {
            jump_models.push(("power law index 1.7 cut at 2".into(), q));
        }
    }
    v.push(property(S, "exponent dominates K/3", || {
        let mut worst = f64::INFINITY;
        for (_, q) in &jump_models {
            for xi in ConditionGrids::geometric(0.05, 500.0, 13) {
                let (k, g) = q.feller_functions(1.0 / xi)?;
                let slack = q.re_psi(xi)? - k / 3.0 + s.tol * (k + g).max(1.0);
                worst = worst.min(slack);
            }
        }
        verdict(worst >= 0.0, format!("{} models, smallest slack {worst:.3e}", jump_models.len()))
    }));
    v.push(property(S, "averaged exponent below K/2 + G", || {
        let mut worst = f64::INFINITY;
        for (_, q) in &jump_models {
            for xi in ConditionGrids::geometric(0.05, 500.0, 13) {
                let (k, g) = q.feller_functions(1.0 / xi)?;
                let slack = 0.5 * k + g - q.averaged_exponent(xi)? + s.tol * (k + g).max(1.0);
                worst = worst.min(slack);
            }
        }
        verdict(worst >= 0.0, format!("{} models, smallest slack {worst:.3e}", jump_models.len()))
    }));
    v.push(property(S, "Dalang verdicts for stable laws", || {
        let grids = ConditionGrids::default();
        let a = LevyModel::stable(1.5, 1.0)?.condition_report(1.0, &grids)?.dalang;
        let b = LevyModel::stable(1.0, 1.0)?.condition_report(1.0, &grids)?.dalang;
        verdict(a == Verdict::Satisfied && b == Verdict::Violated, format!("beta=1.5: {a}; beta=1: {b}"))
    }));
    v.push(property(S, "condition report of configured model", || {
        let r = m.condition_report(1.0, &ConditionGrids::default())?;
        verdict(
            true,
            format!("dalang {}, hawkes {}, quasi-increasing {}, kg {}", r.dalang, r.hawkes, r.quasi_increasing, r.kg),
        )
    }));
    v
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    ConditionGrids::geometric(lo, hi, n)
}

fn kernels(s: &Settings<'_>) -> Vec<Property> {
    const S: &str = "kernels";
    let m = s.model;
    let tol = s.tol;
    let mut v = vec![property(S, "brownian potential closed form", || {
        let b = LevyModel::brownian(1.0)?;
        let mut worst = 0.0f64;
        for alpha in [0.5, 2.0, 8.0] {
            for r in [0.0, 0.5, 1.0, 2.0] {
                worst = worst.max((kernel::u_alpha(&b, alpha, r)? - kernel::brownian_u_alpha(1.0, alpha, r)).abs());
            }
        }
        verdict(worst <= 1e-6, format!("max abs error {worst:.1e}"))
    })];
    v.push(property(S, "brownian transition density closed form", || {
        let b = LevyModel::brownian(1.0)?;
        let g = |r: f64| (-r * r / 8.0).exp() / (2.0 * (2.0 * std::f64::consts::PI).sqrt());
        let w = [0.0, 2.0]
            .iter()
            .map(|&r| Ok((kernel::pbar_density(&b, 1.0, r)?.value - g(r)).abs()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        verdict(w <= 1e-6, format!("max abs error {w:.1e}"))
    }));
    v.push(property(S, "cable plus tail equals stationary", || {
        let mut worst = 0.0f64;
        for alpha in [0.5, 1.0, 2.0] {
            for t in [0.25, 1.0, 4.0] {
                let p = variance_profile(m, &KernelQuery::new(alpha, t)?)?;
                worst = worst.max(((p.var_v + p.var_s) - p.var_eta).abs() / p.var_eta);
            }
        }
        verdict(worst <= 1e-8, format!("max relative gap {worst:.1e}"))
    }));
    let alphas = grid(0.25, 4.0, 5);
    let times = grid(0.25, 4.0, 5);
    v.push(property(S, "existence sandwich", || {
        let mut worst = f64::INFINITY;
        for &alpha in &alphas {
            let u2 = kernel::covariance(m, 2.0 * alpha, KernelKind::Potential, 0.0, Tolerance::absolute(tol))?;
            for &t in &times {
                let p = variance_profile(m, &KernelQuery::new(alpha, t)?)?;
                let e = |i: usize| p.error[i] + u2.error + tol;
                let u = u2.value;
                for slack in [
                    p.var_v - (-(-t * alpha).exp_m1()) * u + e(1),
                    (t * alpha).exp() * u - p.var_v + e(1),
                    p.var_u - (-(-2.0 * t * alpha).exp_m1()) * u + e(0),
                    (2.0 * t * alpha).exp() * u - p.var_u + e(0),
                ] {
                    worst = worst.min(slack);
                }
            }
        }
        verdict(worst >= 0.0, format!("5x5 grid, smallest slack {worst:.3e}"))
    }));
    v.push(property(S, "Green bound", || {
        let u1 = kernel::u_alpha(m, 1.0, 0.0)?;
        let mut r = aux(s.seed, 2);
        let mut worst = f64::INFINITY;
        for _ in 0..100 {
            let alpha = r.random_range(0.1..10.0);
            let d: f64 = r.random_range(-5.0..5.0) - r.random_range(-5.0..5.0);
            worst = worst.min(kernel::green_constant(alpha) * u1 - kernel::u_alpha(m, alpha, d)? + tol);
        }
        verdict(worst >= 0.0, format!("100 random triples, smallest slack {worst:.3e}"))
    }));
    v.push(property(S, "heat and cable variances comparable", || {
        let mut worst = f64::INFINITY;
        for &alpha in &alphas {
            for &t in &times {
                let p = variance_profile(m, &KernelQuery::new(alpha, t)?)?;
                let e = p.error[0] + p.error[1] + tol;
                worst = worst.min(p.var_u - p.var_v + e).min(3.0 * (alpha * t).exp() * p.var_v - p.var_u + e);
            }
        }
        let mu = AtomicMeasure::dipole(0.0, 0.7)?;
        for alpha in [0.25, 1.0, 4.0] {
            for t in [0.25, 1.0, 4.0] {
                let qv = kernel::quadratic_form(m, alpha, &mu, KernelKind::VarV { t })?;
                let qu = kernel::quadratic_form(m, alpha, &mu, KernelKind::VarU { t })?;
                worst = worst.min(qu - qv + tol).min(3.0 * (alpha * t).exp() * qv - qu + tol);
            }
        }
        verdict(worst >= 0.0, format!("point and dipole forms, smallest slack {worst:.3e}"))
    }));
    v.push(property(S, "tail field dominated by cable field", || {
        let mut r = aux(s.seed, 3);
        let mut worst = f64::INFINITY;
        for alpha in [0.5, 1.0, 2.0] {
            let t = LN_2 / alpha;
            for _ in 0..8 {
                let n = r.random_range(2..=4);
                let atoms: Vec<(f64, f64)> =
                    (0..n).map(|_| (r.random_range(-3.0..3.0), r.random_range(-1.0..1.0))).collect();
                let mu = AtomicMeasure::new(atoms)?;
                let qs = kernel::quadratic_form(m, alpha, &mu, KernelKind::VarS { t })?;
                let qv = kernel::quadratic_form(m, alpha, &mu, KernelKind::VarV { t })?;
                worst = worst.min(qv / (t * alpha).exp_m1() - qs + tol);
            }
        }
        verdict(worst >= 0.0, format!("24 random measures, smallest slack {worst:.3e}"))
    }));
    v.push(property(S, "transition density nonincreasing in time", || {
        let mut prev = f64::INFINITY;
        let mut worst = f64::INFINITY;
        for t in grid(0.05, 20.0, 12) {
            let p = kernel::pbar_density(m, t, 0.0)?;
            worst = worst.min(prev - p.value + p.error + tol);
            prev = p.value;
        }
        verdict(worst >= 0.0, format!("12 times on [0.05, 20], smallest slack {worst:.3e}"))
    }));
    v
}

/// Frequency grid for the synthesis suite: wide enough for the
/// fourth-derivative spectrum, fine enough for lags up to a few units.
fn suite_grid() -> Result<SpectralGrid> {
    SpectralGrid::new(200.0, 4000)
}

fn synth(s: &Settings<'_>) -> Vec<Property> {
    const S: &str = "synth";
    let m = s.model;
    let (alpha, t) = (1.0, LN_2);
    let reps = s.reps;
    let mut v = vec![property(S, "sampling is deterministic", || {
        let j = JointSampler::new(m, alpha, t, suite_grid()?, Some(1))?;
        let space = SpatialGrid::new(0.05, 16)?;
        let (a, b) = (j.sample(s.seed, 3, &space), j.sample(s.seed, 3, &space));
        let bits = |x: &[f64]| x.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        let same = bits(&a.eta.values) == bits(&b.eta.values)
            && bits(&a.s_derivative.as_ref().unwrap().values) == bits(&b.s_derivative.as_ref().unwrap().values);
        verdict(same, "two draws of replicate 3 compared bitwise".into())
    })];
    v.push(property(S, "stationary field is cable plus tail", || {
        let j = JointSampler::new(m, alpha, t, suite_grid()?, None)?;
        let space = SpatialGrid::new(0.05, 64)?;
        let x = j.sample(s.seed, 0, &space);
        let ok = (0..64).all(|k| x.eta.values[k].to_bits() == (x.v.values[k] + x.s.values[k]).to_bits());
        verdict(ok, "64 points compared bitwise".into())
    }));
    v.push(property(S, "discrete variance converges in the mode count", || {
        let kind = FieldKind::V { alpha, t };
        let cutoff = 50.0;
        let (a, k) = kind.kernel();
        let head = {
            let mut err = None;
            let f = |xi: f64| match m.re_psi(xi) {
                Ok(p) => k.weight(a, xi, p),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            };
            let r = quad::integrate(f, 0.0, cutoff, Tolerance::relative(1e-12));
            if let Some(e) = err {
                return Err(e);
            }
            r.map_err(|_| Error::Domain("head integral failed".into()))?.0 / std::f64::consts::PI
        };
        let mut gaps = Vec::new();
        for modes in [256, 1024, 4096] {
            let f = FieldSampler::new(m, kind, SpectralGrid::new(cutoff, modes)?)?;
            gaps.push((f.diagnostics().discrete - head).abs() / head);
        }
        let ok = gaps.windows(2).all(|w| w[1] <= w[0]) && gaps[2] <= 1e-4;
        verdict(
            ok,
            format!(
                "relative gaps to the truncated integral {:?}",
                gaps.iter().map(|g| format!("{g:.1e}")).collect::<Vec<_>>()
            ),
        )
    }));
    v.push(property(S, "stationary covariance matches potential", || {
        let j = JointSampler::new(m, alpha, t, suite_grid()?, None)?;
        let xs = [0.0, 0.5, 1.0];
        let basis = PointBasis::new(j.grid(), &xs);
        let chunks = par_chunks(reps, |range| {
            let mut acc = [Moments::new(); 3];
            for rep in range {
                let c = j.coefficients(s.seed, rep);
                let (a, b) = (basis.apply(&c.v), basis.apply(&c.s));
                let eta: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
                for (i, m) in acc.iter_mut().enumerate() {
                    m.push(eta[0] * eta[i]);
                }
            }
            Ok(acc)
        })?;
        let acc = merge_arrays(chunks);
        let (av, as_) = j.amplitudes();
        let mut worst = 0.0f64;
        let mut detail = String::new();
        for (i, &r) in xs.iter().enumerate() {
            let d: f64 = (0..av.len()).map(|k| (av[k] * av[k] + as_[k] * as_[k]) * (j.grid().freq(k) * r).cos()).sum();
            let exact = kernel::u_alpha(m, alpha, r)?;
            let z = (acc[i].mean() - d).abs() / acc[i].std_error();
            worst = worst.max(z);
            detail += &format!(
                "r={r}: {:.5}±{:.5} (synthesized {d:.5}, continuum {exact:.5}); ",
                acc[i].mean(),
                acc[i].std_error()
            );
        }
        verdict(worst <= s.sigmas, format!("{detail}max |z| {worst:.2}, {reps} replications"))
    }));
    v.push(property(S, "tail field smoother than cable field", || {
        let j = JointSampler::new(m, alpha, t, suite_grid()?, None)?;
        let basis = PointBasis::new(j.grid(), &[0.0, 1.0]);
        let chunks = par_chunks(reps, |range| {
            let mut acc = [Moments::new(); 2];
            for rep in range {
                let c = j.coefficients(s.seed ^ 0x5eed, rep);
                let (a, b) = (basis.apply(&c.v), basis.apply(&c.s));
                acc[0].push((b[0] - b[1]).powi(2));
                acc[1].push((a[0] - a[1]).powi(2));
            }
            Ok(acc)
        })?;
        let acc = merge_arrays(chunks);
        let k = (t * alpha).exp_m1();
        let (es, ev) = (acc[0].mean(), acc[1].mean() / k);
        let se = (acc[0].std_error().powi(2) + (acc[1].std_error() / k).powi(2)).sqrt();
        verdict(
            es <= ev + s.sigmas * se,
            format!("E|S(mu)|^2 {es:.5}, E|V(mu)|^2/(e^(t alpha)-1) {ev:.5}, se {se:.1e}"),
        )
    }));
    for n in 1..=4u32 {
        v.push(property(S, &format!("derivative field variance n={n}"), || {
            let exact = match kernel::covariance(m, alpha, KernelKind::DerivS { n, t }, 0.0, Tolerance::relative(1e-8))
            {
                Ok(x) => x,
                Err(e) if e.is_non_convergence() => {
                    return Ok(Check::Skip(format!("derivative spectrum not integrable: {e}")));
                }
                Err(e) => return Err(e),
            };
            let j = JointSampler::new(m, alpha, t, suite_grid()?, None)?;
            let g = *j.grid();
            let basis = PointBasis::new(&g, &[0.0]);
            let reps = reps.min(20_000);
            let chunks = par_chunks(reps, |range| {
                let mut acc = Moments::new();
                for rep in range {
                    let c = j.coefficients(s.seed.wrapping_add(n as u64), rep);
                    acc.push(basis.apply(&c.s.derivative(&g, n))[0].powi(2));
                }
                Ok(acc)
            })?;
            let mut acc = Moments::new();
            for c in &chunks {
                acc.merge(c);
            }
            let (_, as_) = j.amplitudes();
            let discrete: f64 = (0..g.modes()).map(|k| (as_[k] * g.freq(k).powi(n as i32)).powi(2)).sum();
            let bias = (discrete - exact.value).abs();
            let ok = (acc.mean() - exact.value).abs() <= s.sigmas * acc.std_error() + bias;
            verdict(
                ok,
                format!(
                    "empirical {:.5e}±{:.1e}, exact {:.5e}, discretization bias {bias:.1e}",
                    acc.mean(),
                    acc.std_error(),
                    exact.value
                ),
            )
        }));
    }
    v
}

fn merge_arrays<const N: usize>(chunks: Vec<[Moments; N]>) -> [Moments; N] {
    let mut acc = [Moments::new(); N];
    for c in &chunks {
        for (a, b) in acc.iter_mut().zip(c) {
            a.merge(b);
        }
    }
    acc
}

fn merged_run(stepper: &Stepper, seed: u64, paths: u64, times: &[f64], probes: &[f64]) -> Result<MomentRun> {
    let mut runs = par_chunks(paths, |r| run_moments(stepper, seed, r, times, probes))?.into_iter();
    let mut run = runs.next().ok_or_else(|| Error::Domain("no paths".into()))?;
    for r in runs {
        run.merge(&r);
    }
    Ok(run)
}

fn spde(s: &Settings<'_>) -> Vec<Property> {
    const S: &str = "spde";
    let m = s.model;
    let paths = s.reps.min(4000);
    let mut v = vec![property(S, "torus large enough for the line kernel", || {
        let r = image_sum_ratio(m, 2.0, 32.0)?;
        verdict(r.abs() < MAX_IMAGE_RATIO, format!("image-sum ratio {r:.2e} at L=32, alpha=2"))
    })];
    v.push(property(S, "heat zero mode variance grows linearly", || {
        let cfg = TorusConfig::new(32.0, 5, 0.0, 0.01)?;
        let st = Stepper::new(cfg, m)?;
        let (d, sd) = st.transition(0);
        let mut var = 0.0;
        for _ in 0..1000 {
            var = d * d * var + sd * sd;
        }
        let exact = 10.0 / 32.0;
        let rel = (var - exact).abs() / exact;
        verdict(rel <= 1e-12, format!("recursion {var:.15} vs t/L {exact:.15}"))
    }));
    v.push(property(S, "Hermitian symmetry over 10^6 steps", || {
        let cfg = TorusConfig::new(8.0, 5, 1.0, 1e-3)?;
        let st = Stepper::new(cfg, m)?;
        let mut state = TorusState::zero(&cfg);
        let mut r = rng::stream(s.seed, domain::SPDE, u64::MAX);
        for _ in 0..1_000_000 {
            st.step(&mut state, &mut r);
        }
        let ok = (1..=2).all(|n: i64| {
            let (a, b) = (state.mode(n), state.mode(-n));
            a.0 == b.0 && a.1 == -b.1
        }) && state.mode(0).1 == 0.0;
        verdict(ok, format!("modes compared exactly after {} steps", state.steps))
    }));
    let times = [2.0, 4.0];
    let probes: Vec<f64> = (0..8).map(|j| 4.0 * j as f64).collect();
    v.push(property(S, "point variance independent of the step", || {
        let cfg = TorusConfig::new(32.0, 257, 2.0, 0.1)?;
        let coarse = Stepper::new(cfg, m)?;
        let fine = Stepper::new(cfg.with_dt(0.0125)?, m)?;
        let a = merged_run(&coarse, s.seed, paths, &times, &probes)?;
        let b = merged_run(&fine, s.seed.wrapping_add(1), paths, &times, &probes)?;
        let exact = coarse.exact_variance(4.0);
        let ((va, sa), (vb, sb)) = (a.point_variance(1), b.point_variance(1));
        let z_step = (va - vb).abs() / (sa * sa + sb * sb).sqrt();
        let z_exact = (va - exact).abs() / sa;
        let z_fine = (vb - exact).abs() / sb;
        let relax = a.stationarity(0, 1, 2.0, coarse.stationary_variance().unwrap_or(f64::INFINITY));
        verdict(
            z_step <= s.sigmas && z_exact <= s.sigmas && z_fine <= s.sigmas && relax,
            format!(
                "t=4: dt=0.1 {va:.5}±{sa:.5}, dt=0.0125 {vb:.5}±{sb:.5}, exact {exact:.5}, {paths} paths; relaxation {}",
                if relax { "ok" } else { "violated" }
            ),
        )
    }));
    v.push(property(S, "mode variances relax to the stationary spectrum", || {
        let cfg = TorusConfig::new(16.0, 9, 2.0, 0.5)?;
        let st = Stepper::new(cfg, m)?;
        let t = 10.0;
        let steps = cfg.steps_to(t)?;
        let chunks = par_chunks(paths, |range| {
            let mut acc = [Moments::new(); 5];
            for p in range {
                let mut r = rng::stream(s.seed, domain::SPDE, p);
                let mut state = TorusState::zero(&cfg);
                for _ in 0..steps {
                    st.step(&mut state, &mut r);
                }
                for (n, a) in acc.iter_mut().enumerate() {
                    let (re, im) = state.mode(n as i64);
                    a.push(re * re + im * im);
                }
            }
            Ok(acc)
        })?;
        let acc = merge_arrays(chunks);
        let mut worst_z = 0.0f64;
        let mut worst_limit = 0.0f64;
        for (n, a) in acc.iter().enumerate() {
            let exact = st.mode_variance(n, t);
            let limit = 1.0 / (cfg.circumference() * st.rates()[n]);
            worst_z = worst_z.max((a.mean() - exact).abs() / a.std_error());
            worst_limit = worst_limit.max((exact - limit).abs() / limit);
        }
        verdict(
            worst_z <= s.sigmas && worst_limit <= 1e-8,
            format!("max |z| {worst_z:.2} over 5 modes, max gap to 1/(L lambda) {worst_limit:.1e}"),
        )
    }));
    v.push(property(S, "cable mode variance below heat mode variance", || {
        let cable = Stepper::new(TorusConfig::new(32.0, 257, 2.0, 0.1)?, m)?;
        let heat = Stepper::new(TorusConfig::new(32.0, 257, 0.0, 0.1)?, m)?;
        let ok =
            [0.1, 1.0, 10.0].iter().all(|&t| (0..=128).all(|n| cable.mode_variance(n, t) <= heat.mode_variance(n, t)));
        verdict(ok, "129 modes at t in {0.1, 1, 10}".into())
    }));
    v
}

fn localtime(s: &Settings<'_>) -> Vec<Property> {
    const S: &str = "localtime";
    let (beta, c, note) = match s.spec.stable_parameters() {
        Some((b, c)) if b > 1.0 => (b, c, String::new()),
        _ => (1.5, 0.5, " (reference stable beta=1.5 c=0.5)".to_string()),
    };
    let seed = s.seed;
    let sampler = || -> Result<PathSampler> { PathSampler::new(PathConfig::new(beta, c, 1e-3)?.with_seed(seed)) };
    let paths = s.reps;
    let small = s.reps.min(3000);
    let mut v = vec![property(S, "increments are symmetric", || {
        let mut r = aux(seed, 10);
        let dt = 1e-2;
        let xs: Vec<f64> = (0..100_000).map(|_| stable_increment(beta, c, dt, &mut r)).collect();
        let sign: Moments = xs.iter().map(|x| x.signum()).collect();
        let mut ok = sign.mean().abs() <= s.sigmas * sign.std_error();
        let mut detail = format!("mean sign {:+.4}±{:.4}", sign.mean(), sign.std_error());
        if beta == 2.0 {
            let sq: Moments = xs.iter().map(|x| x * x).collect();
            ok &= (sq.mean() - 4.0 * c * dt).abs() <= s.sigmas * sq.std_error();
            detail += &format!(", variance {:.5e} vs 4c dt {:.5e}", sq.mean(), 4.0 * c * dt);
        }
        verdict(ok, detail + &note)
    })];
    v.push(property(S, "local time is additive and nondecreasing", || {
        let sp = sampler()?;
        let eps = sp.config().eps;
        let path = sp.path(0.0, 2.0, &mut aux(seed, 11));
        let (head, tail) = path.split(1000)?;
        let mut worst = 0.0f64;
        for y in [0.0, 0.05, -0.2] {
            let whole = path.local_time(y, eps)?.value;
            let parts = head.local_time(y, eps)?.value + tail.local_time(y, eps)?.value;
            worst = worst.max((whole - parts).abs() / whole.max(1.0));
        }
        let mut prev = 0.0;
        let mut monotone = true;
        for k in 0..=200 {
            let x = path.local_time_until(0.0, eps, k as f64 * 0.01)?;
            monotone &= x >= prev;
            prev = x;
        }
        verdict(worst <= 1e-12 && monotone, format!("additivity gap {worst:.1e}, monotone {monotone}{note}"))
    }));
    v.push(property(S, "resolvent normalization", || {
        let sp = sampler()?;
        let alpha = 1.0;
        let m = merge_moments(par_chunks(paths, |r| resolvent_moments(&sp, alpha, 0.0, 0.0, r))?);
        let chk = ResolventCheck::from_moments(&sp, alpha, 0.0, 0.0, &m)?;
        verdict(
            chk.within(chk.exact, 0.05),
            format!(
                "estimate {:.5}±{:.5}, exact {:.5}, eps bias {:+.1e}, dt bias {:.1e}, {paths} paths{note}",
                chk.estimate, chk.stderr, chk.exact, chk.eps_bias, chk.dt_bias
            ),
        )
    }));
    v.push(property(S, "resolvent decreases with the rate", || {
        let sp = sampler()?;
        let a = merge_moments(par_chunks(small, |r| resolvent_moments(&sp, 1.0, 0.0, 0.0, r))?);
        let b = merge_moments(par_chunks(small, |r| resolvent_moments(&sp, 4.0, 0.0, 0.0, r))?);
        verdict(a.mean() > b.mean(), format!("alpha=1 {:.5}, alpha=4 {:.5}{note}", a.mean(), b.mean()))
    }));
    v.push(property(S, "start level dominates", || {
        let sp = sampler()?;
        let at = merge_moments(par_chunks(small, |r| fixed_time_moments(&sp, 0.0, 0.0, 1.0, r))?);
        let off = merge_moments(par_chunks(small, |r| fixed_time_moments(&sp, 0.5, 0.0, 1.0, r))?);
        let se = (at.std_error().powi(2) + off.std_error().powi(2)).sqrt();
        let mut ok = off.mean() <= at.mean() + s.sigmas * se;
        let mut detail = format!("E^0.5 L^0_1 {:.4}, E^0 L^0_1 {:.4}", off.mean(), at.mean());
        for t in [1.0, 2.0, 4.0] {
            let x = merge_moments(par_chunks(small, |r| fixed_time_moments(&sp, 0.5, 0.0, t, r))?);
            ok &= x.mean() <= 2.0 * t * at.mean() + s.sigmas * x.std_error();
            detail += &format!("; t={t}: {:.4} vs {:.4}", x.mean(), 2.0 * t * at.mean());
        }
        verdict(ok, detail + &note)
    }));
    v.push(property(S, "identical levels give zero difference", || {
        let sp = sampler()?;
        let q = ConditionalQuery { alpha: 1.0, a: 0.0, b: 0.0, t: LN_2, window: None };
        let mut bins = ConditionalBins::default();
        for b in par_chunks(small, |r| conditional_bins(&sp, &q, r))? {
            bins.merge(&b);
        }
        let ok = bins.above.mean() == 0.0 && bins.below.mean() == 0.0;
        verdict(ok, format!("{} paths{note}", small))
    }));
    v
}

fn merge_moments(chunks: Vec<Moments>) -> Moments {
    let mut m = Moments::new();
    for c in &chunks {
        m.merge(c);
    }
    m
}
