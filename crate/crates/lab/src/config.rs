//! Experiment configuration: a JSON document with a model and one optional
//! block per command. Unknown keys are rejected, every value is validated
//! before any computation, and all problems are reported together with
//! their key paths.

use std::f64::consts::{LN_2, PI};
use std::fmt;

use dynkin_core::levy::ConditionGrids;
use dynkin_core::{DensityFamily, LevyMeasure, LevyModel};
use serde_json::{Map, Value};

/// One validation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    /// Dotted key path, e.g. `model.beta`.
    pub path: String,
    /// What is wrong.
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Why a configuration was rejected.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    /// Malformed JSON.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        /// 1-based line.
        line: usize,
        /// 1-based column.
        column: usize,
        /// Parser message.
        message: String,
    },
    /// Well-formed JSON that violates the schema.
    #[error("{} invalid configuration value(s):\n  {}", .0.len(), .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n  "))]
    Invalid(Vec<ConfigIssue>),
}

/// How the Lévy model was specified.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// `{"kind": "brownian", "kappa": κ}`.
    Brownian {
        /// Diffusion constant.
        kappa: f64,
    },
    /// `{"kind": "stable", "beta": β, "c": c}`.
    Stable {
        /// Index.
        beta: f64,
        /// Scale.
        c: f64,
    },
    /// `{"kind": "khintchine", "sigma2": σ², "measure": {...}}`.
    Khintchine {
        /// Gaussian part.
        sigma2: f64,
        /// Jump density, if any.
        measure: Option<DensityFamily>,
    },
}

impl ModelSpec {
    /// Builds the model.
    pub fn build(&self) -> dynkin_core::Result<LevyModel> {
        match self {
            Self::Brownian { kappa } => LevyModel::brownian(*kappa),
            Self::Stable { beta, c } => LevyModel::stable(*beta, *c),
            Self::Khintchine { sigma2, measure } => {
                let m = measure.clone().map(LevyMeasure::new).transpose()?;
                LevyModel::khintchine(*sigma2, m)
            }
        }
    }

    /// `(β, c)` of the single process for stable and Brownian models.
    pub fn stable_parameters(&self) -> Option<(f64, f64)> {
        match self {
            Self::Brownian { kappa } => Some((2.0, *kappa)),
            Self::Stable { beta, c } => Some((*beta, *c)),
            Self::Khintchine { .. } => None,
        }
    }

    /// `ReΨ` grows like `|ξ|^β_eff`; used for default grids.
    pub fn effective_index(&self) -> f64 {
        match self {
            Self::Brownian { .. } => 2.0,
            Self::Stable { beta, .. } => *beta,
            Self::Khintchine { sigma2, .. } if *sigma2 > 0.0 => 2.0,
            Self::Khintchine { measure, .. } => match measure {
                Some(DensityFamily::PowerLaw { index, lower, .. }) if *lower == 0.0 => *index,
                _ => 1.0,
            },
        }
    }

    /// Parameters as `key=value` pairs for file headers.
    pub fn describe(&self) -> String {
        match self {
            Self::Brownian { kappa } => format!("brownian kappa={kappa}"),
            Self::Stable { beta, c } => format!("stable beta={beta} c={c}"),
            Self::Khintchine { sigma2, measure } => match measure {
                None => format!("khintchine sigma2={sigma2}"),
                Some(DensityFamily::PowerLaw { scale, index, lower, upper }) => format!(
                    "khintchine sigma2={sigma2} power_law scale={scale} index={index} lower={lower} upper={upper}"
                ),
                Some(DensityFamily::Tabulated(points)) => {
                    let pts: Vec<String> = points.iter().map(|(z, r)| format!("{z}:{r}")).collect();
                    format!("khintchine sigma2={sigma2} tabulated {}", pts.join(","))
                }
            },
        }
    }
}

/// `check` block.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    /// Killing rate for the Dalang integral.
    pub alpha: f64,
    /// Frequency and scale grids.
    pub grids: ConditionGrids,
}

/// `kernel` block.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    /// Killing rates.
    pub alpha: Vec<f64>,
    /// Times.
    pub t: Vec<f64>,
    /// Lags.
    pub r: Vec<f64>,
    /// Absolute quadrature tolerance.
    pub tol: f64,
}

/// Which field the `synth` command samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldName {
    /// `U(t, ·)`.
    U,
    /// `V_α(t, ·)`.
    V,
    /// `S_α(t, ·)`.
    S,
    /// `η_α`.
    Eta,
    /// `S_α⁽ⁿ⁾(t, ·)`.
    SDerivative,
}

/// Evaluation method for synthesized fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Direct trigonometric sums.
    Direct,
    /// Folded inverse FFT of size `fft_size`.
    Fft,
}

/// `synth` block.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Field.
    pub field: FieldName,
    /// Killing rate.
    pub alpha: f64,
    /// Time.
    pub t: f64,
    /// Derivative order for `S_derivative`.
    pub n: u32,
    /// Spectral cutoff `Ξ`.
    pub cutoff: f64,
    /// Mode count `K`.
    pub modes: usize,
    /// Spatial points `M`.
    pub points: usize,
    /// Spatial step `Δx`.
    pub dx: f64,
    /// Replications.
    pub replications: u64,
    /// Lags (grid steps) for the scaling fit; empty (the default) skips it.
    pub scaling_lags: Vec<usize>,
    /// Lags (grid steps) for the covariance table.
    pub cov_lags: Vec<usize>,
    /// Evaluation method.
    pub method: Method,
    /// FFT size `P` (with `Δx·Δξ·P = 2π`).
    pub fft_size: usize,
}

/// `spde` block.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdeConfig {
    /// Circumference.
    pub circumference: f64,
    /// Odd mode count.
    pub modes: usize,
    /// Killing rate (0 for the heat equation).
    pub alpha: f64,
    /// Step.
    pub dt: f64,
    /// Recording times.
    pub times: Vec<f64>,
    /// Probe points in `[0, L)`.
    pub probes: Vec<f64>,
    /// Paths.
    pub paths: u64,
}

/// `localtime` block.
#[derive(Debug, Clone, PartialEq)]
pub struct LocaltimeConfig {
    /// Step.
    pub dt: f64,
    /// Bandwidth; default `Δt^{1/β}`.
    pub eps: Option<f64>,
    /// Rate of the exponential time.
    pub alpha: f64,
    /// Start and first level.
    pub a: f64,
    /// Second level.
    pub b: f64,
    /// Conditioning threshold.
    pub t: f64,
    /// Increment window; `None` compares the local times themselves.
    pub window: Option<f64>,
    /// Paths.
    pub paths: u64,
}

/// Suites of the `verify` command.
pub const SUITES: [&str; 5] = ["levy", "kernels", "synth", "spde", "localtime"];

/// `verify` block.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    /// Suites to run.
    pub suites: Vec<String>,
    /// Standard errors allowed in statistical comparisons.
    pub sigmas: f64,
    /// Absolute quadrature tolerance.
    pub tol: f64,
    /// Monte Carlo replications per statistical property.
    pub replications: u64,
}

/// A validated configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Root seed.
    pub seed: u64,
    /// Model.
    pub model: ModelSpec,
    /// `check` block.
    pub check: CheckConfig,
    /// `kernel` block.
    pub kernel: KernelConfig,
    /// `synth` block.
    pub synth: SynthConfig,
    /// `spde` block.
    pub spde: SpdeConfig,
    /// `localtime` block.
    pub localtime: LocaltimeConfig,
    /// `verify` block.
    pub verify: VerifyConfig,
}

/// Command-line overrides; flags win over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    /// Root seed.
    pub seed: Option<u64>,
    /// Monte Carlo count for every command (replications or paths).
    pub paths: Option<u64>,
    /// Absolute quadrature tolerance for `kernel` and `verify`.
    pub tol: Option<f64>,
    /// Suites for `verify`.
    pub suites: Vec<String>,
}

impl Overrides {
    /// Applies the overrides, validating them like file values.
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), ConfigError> {
        let mut cx = Cx { issues: Vec::new() };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(p) = self.paths {
            if p < 20 {
                cx.issue("--paths", "must be at least 20");
            }
            cfg.synth.replications = p;
            cfg.spde.paths = p;
            cfg.localtime.paths = p;
            cfg.verify.replications = p;
        }
        if let Some(t) = self.tol {
            if let Err(m) = Rule::Positive.check(t) {
                cx.issue("--tol", m);
            }
            cfg.kernel.tol = t;
            cfg.verify.tol = t;
        }
        if !self.suites.is_empty() {
            for (i, name) in self.suites.iter().enumerate() {
                if !SUITES.contains(&name.as_str()) {
                    cx.issue(&format!("--suite[{i}]"), format!("expected one of: {}", SUITES.join(", ")));
                }
            }
            cfg.verify.suites = self.suites.clone();
        }
        if cx.issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(cx.issues))
        }
    }

    /// `key=value` pairs of the overrides that are set.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if let Some(s) = self.seed {
            parts.push(format!("seed={s}"));
        }
        if let Some(p) = self.paths {
            parts.push(format!("paths={p}"));
        }
        if let Some(t) = self.tol {
            parts.push(format!("tol={t}"));
        }
        if !self.suites.is_empty() {
            parts.push(format!("suites={}", self.suites.join(",")));
        }
        parts.join(" ")
    }
}

struct Cx {
    issues: Vec<ConfigIssue>,
}

impl Cx {
    fn issue(&mut self, path: &str, message: impl Into<String>) {
        self.issues.push(ConfigIssue { path: path.to_string(), message: message.into() });
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// A JSON object together with its path; checks keys against an allow list.
struct Obj<'a> {
    path: String,
    map: Option<&'a Map<String, Value>>,
}

impl<'a> Obj<'a> {
    fn new(cx: &mut Cx, path: &str, v: Option<&'a Value>, allowed: &[&str]) -> Self {
        let map = match v {
            None | Some(Value::Null) => None,
            Some(Value::Object(m)) => {
                for k in m.keys() {
                    if !allowed.contains(&k.as_str()) {
                        cx.issue(&join(path, k), format!("unknown key (allowed: {})", allowed.join(", ")));
                    }
                }
                Some(m)
            }
            Some(_) => {
                cx.issue(path, "expected an object");
                None
            }
        };
        Self { path: path.to_string(), map }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.and_then(|m| m.get(key)).filter(|v| !v.is_null())
    }

    fn at(&self, key: &str) -> String {
        join(&self.path, key)
    }

    fn num(&self, cx: &mut Cx, key: &str, default: f64, rule: Rule) -> f64 {
        match self.get(key) {
            None => default,
            Some(v) => match v.as_f64() {
                Some(x) => {
                    if let Err(m) = rule.check(x) {
                        cx.issue(&self.at(key), m);
                    }
                    x
                }
                None => {
                    cx.issue(&self.at(key), "expected a number");
                    default
                }
            },
        }
    }

    fn opt_num(&self, cx: &mut Cx, key: &str, rule: Rule) -> Option<f64> {
        self.get(key).map(|_| self.num(cx, key, f64::NAN, rule))
    }

    fn int(&self, cx: &mut Cx, key: &str, default: u64, min: u64) -> u64 {
        match self.get(key) {
            None => default,
            Some(v) => match v.as_u64() {
                Some(x) if x >= min => x,
                Some(_) => {
                    cx.issue(&self.at(key), format!("must be at least {min}"));
                    default
                }
                None => {
                    cx.issue(&self.at(key), "expected a nonnegative integer");
                    default
                }
            },
        }
    }

    fn nums(&self, cx: &mut Cx, key: &str, default: &[f64], rule: Rule) -> Vec<f64> {
        match self.get(key) {
            None => default.to_vec(),
            Some(Value::Array(items)) => {
                if items.is_empty() {
                    cx.issue(&self.at(key), "list must be nonempty");
                }
                items
                    .iter()
                    .enumerate()
                    .filter_map(|(i, v)| {
                        let p = format!("{}[{i}]", self.at(key));
                        match v.as_f64() {
                            Some(x) => {
                                if let Err(m) = rule.check(x) {
                                    cx.issue(&p, m);
                                }
                                Some(x)
                            }
                            None => {
                                cx.issue(&p, "expected a number");
                                None
                            }
                        }
                    })
                    .collect()
            }
            Some(_) => {
                cx.issue(&self.at(key), "expected a list of numbers");
                default.to_vec()
            }
        }
    }

    fn ints(&self, cx: &mut Cx, key: &str, default: &[usize]) -> Vec<usize> {
        match self.get(key) {
            None => default.to_vec(),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .filter_map(|(i, v)| match v.as_u64() {
                    Some(x) => Some(x as usize),
                    None => {
                        cx.issue(&format!("{}[{i}]", self.at(key)), "expected a nonnegative integer");
                        None
                    }
                })
                .collect(),
            Some(_) => {
                cx.issue(&self.at(key), "expected a list of integers");
                default.to_vec()
            }
        }
    }

    fn string(&self, cx: &mut Cx, key: &str, default: &str, allowed: &[&str]) -> String {
        match self.get(key) {
            None => default.to_string(),
            Some(Value::String(s)) if allowed.contains(&s.as_str()) => s.clone(),
            Some(_) => {
                cx.issue(&self.at(key), format!("expected one of: {}", allowed.join(", ")));
                default.to_string()
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Rule {
    Positive,
    NonNegative,
    Finite,
    Beta,
}

impl Rule {
    fn check(self, x: f64) -> Result<(), String> {
        let ok = match self {
            Rule::Positive => x > 0.0 && x.is_finite(),
            Rule::NonNegative => x >= 0.0 && x.is_finite(),
            Rule::Finite => x.is_finite(),
            Rule::Beta => x > 0.0 && x <= 2.0,
        };
        if ok {
            return Ok(());
        }
        Err(match self {
            Rule::Positive => "must be positive".into(),
            Rule::NonNegative => "must be nonnegative".into(),
            Rule::Finite => "must be finite".into(),
            Rule::Beta => "beta must lie in (0,2]".into(),
        })
    }
}

const TOP_KEYS: [&str; 8] = ["seed", "model", "check", "kernel", "synth", "spde", "localtime", "verify"];

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut cx = Cx { issues: Vec::new() };
    if !root.is_object() {
        cx.issue("", "top level must be an object");
        return Err(ConfigError::Invalid(cx.issues));
    }
    let top = Obj::new(&mut cx, "", Some(&root), &TOP_KEYS);
    let seed = top.int(&mut cx, "seed", 0, 0);
    let model = parse_model(&mut cx, top.get("model"));
    let beta_eff = model.as_ref().map_or(2.0, |m| m.effective_index());

    let check = {
        let o = Obj::new(&mut cx, "check", top.get("check"), &["alpha", "xi", "eps"]);
        let d = ConditionGrids::default();
        CheckConfig {
            alpha: o.num(&mut cx, "alpha", 1.0, Rule::Positive),
            grids: ConditionGrids { xi: grid(&mut cx, &o, "xi", d.xi), eps: grid(&mut cx, &o, "eps", d.eps) },
        }
    };

    let kernel = {
        let o = Obj::new(&mut cx, "kernel", top.get("kernel"), &["alpha", "t", "r", "tol"]);
        KernelConfig {
            alpha: o.nums(&mut cx, "alpha", &[1.0], Rule::Positive),
            t: o.nums(&mut cx, "t", &[1.0], Rule::Positive),
            r: o.nums(&mut cx, "r", &[0.0, 0.5, 1.0, 2.0], Rule::Finite),
            tol: o.num(&mut cx, "tol", 1e-8, Rule::Positive),
        }
    };

    let synth = parse_synth(&mut cx, top.get("synth"), beta_eff);

    let spde = {
        let o = Obj::new(
            &mut cx,
            "spde",
            top.get("spde"),
            &["circumference", "modes", "alpha", "dt", "times", "probes", "paths"],
        );
        let circumference = o.num(&mut cx, "circumference", 64.0, Rule::Positive);
        let modes = o.int(&mut cx, "modes", 4097, 1) as usize;
        if modes.is_multiple_of(2) {
            cx.issue(&o.at("modes"), "mode count must be odd");
        }
        let default_probes: Vec<f64> = (0..16).map(|j| circumference * j as f64 / 16.0).collect();
        let probes = o.nums(&mut cx, "probes", &default_probes, Rule::NonNegative);
        for (i, p) in probes.iter().enumerate() {
            if *p >= circumference {
                cx.issue(&format!("spde.probes[{i}]"), "probe must lie in [0, circumference)");
            }
        }
        SpdeConfig {
            circumference,
            modes,
            alpha: o.num(&mut cx, "alpha", 2.0, Rule::NonNegative),
            dt: o.num(&mut cx, "dt", 0.1, Rule::Positive),
            times: o.nums(&mut cx, "times", &[3.0, 6.0], Rule::Positive),
            probes,
            paths: o.int(&mut cx, "paths", 1000, 2),
        }
    };

    let localtime = {
        let o = Obj::new(
            &mut cx,
            "localtime",
            top.get("localtime"),
            &["dt", "eps", "alpha", "a", "b", "t", "window", "paths"],
        );
        let lt = LocaltimeConfig {
            dt: o.num(&mut cx, "dt", 1e-3, Rule::Positive),
            eps: o.opt_num(&mut cx, "eps", Rule::Positive),
            alpha: o.num(&mut cx, "alpha", 1.0, Rule::Positive),
            a: o.num(&mut cx, "a", 0.0, Rule::Finite),
            b: o.num(&mut cx, "b", 1.0, Rule::Finite),
            t: o.num(&mut cx, "t", LN_2, Rule::Positive),
            window: o.opt_num(&mut cx, "window", Rule::Positive),
            paths: o.int(&mut cx, "paths", 20_000, 2),
        };
        if top.get("localtime").is_some() {
            if let Some(m) = &model {
                match m.stable_parameters() {
                    None => cx.issue("model.kind", "local-time runs need a stable or brownian model"),
                    Some((beta, _)) if beta <= 1.0 => cx.issue("model.beta", "local times need beta in (1,2]"),
                    _ => {}
                }
            }
        }
        lt
    };

    let verify = {
        let o = Obj::new(&mut cx, "verify", top.get("verify"), &["suites", "sigmas", "tol", "replications"]);
        let suites = match o.get("suites") {
            None => SUITES.iter().map(|s| s.to_string()).collect(),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .filter_map(|(i, v)| match v.as_str() {
                    Some(s) if SUITES.contains(&s) => Some(s.to_string()),
                    _ => {
                        cx.issue(&format!("verify.suites[{i}]"), format!("expected one of: {}", SUITES.join(", ")));
                        None
                    }
                })
                .collect(),
            Some(_) => {
                cx.issue("verify.suites", "expected a list of suite names");
                Vec::new()
            }
        };
        VerifyConfig {
            suites,
            sigmas: o.num(&mut cx, "sigmas", 3.0, Rule::Positive),
            tol: o.num(&mut cx, "tol", 1e-8, Rule::Positive),
            replications: o.int(&mut cx, "replications", 20_000, 20),
        }
    };

    match (cx.issues.is_empty(), model) {
        (true, Some(model)) => Ok(ExperimentConfig { seed, model, check, kernel, synth, spde, localtime, verify }),
        _ => Err(ConfigError::Invalid(cx.issues)),
    }
}

fn grid(cx: &mut Cx, parent: &Obj<'_>, key: &str, default: Vec<f64>) -> Vec<f64> {
    let o = Obj::new(cx, &parent.at(key), parent.get(key), &["lo", "hi", "n"]);
    if o.map.is_none() {
        return default;
    }
    let lo = o.num(cx, "lo", default[0], Rule::Positive);
    let hi = o.num(cx, "hi", default[default.len() - 1], Rule::Positive);
    let n = o.int(cx, "n", default.len() as u64, 2) as usize;
    if lo >= hi {
        cx.issue(&o.at("hi"), "must exceed lo");
        return default;
    }
    ConditionGrids::geometric(lo, hi, n)
}

fn parse_model(cx: &mut Cx, v: Option<&Value>) -> Option<ModelSpec> {
    if v.is_none() {
        cx.issue("model", "missing model");
        return None;
    }
    let kind = v.and_then(|m| m.get("kind")).and_then(Value::as_str).unwrap_or("");
    let spec = match kind {
        "brownian" => {
            let o = Obj::new(cx, "model", v, &["kind", "kappa"]);
            ModelSpec::Brownian { kappa: o.num(cx, "kappa", 1.0, Rule::Positive) }
        }
        "stable" => {
            let o = Obj::new(cx, "model", v, &["kind", "beta", "c"]);
            let beta = match o.get("beta") {
                None => {
                    cx.issue("model.beta", "missing");
                    f64::NAN
                }
                Some(_) => o.num(cx, "beta", f64::NAN, Rule::Beta),
            };
            ModelSpec::Stable { beta, c: o.num(cx, "c", 1.0, Rule::Positive) }
        }
        "khintchine" => {
            let o = Obj::new(cx, "model", v, &["kind", "sigma2", "measure"]);
            let sigma2 = o.num(cx, "sigma2", 0.0, Rule::NonNegative);
            let measure = o.get("measure").and_then(|m| parse_measure(cx, m));
            ModelSpec::Khintchine { sigma2, measure }
        }
        _ => {
            cx.issue("model.kind", "expected one of: brownian, stable, khintchine");
            return None;
        }
    };
    let before = cx.issues.len();
    if before == 0 {
        if let Err(e) = spec.build() {
            cx.issue("model", e.to_string());
        }
    }
    Some(spec)
}

fn parse_measure(cx: &mut Cx, v: &Value) -> Option<DensityFamily> {
    let family = v.get("family").and_then(Value::as_str).unwrap_or("");
    match family {
        "power_law" => {
            let o = Obj::new(cx, "model.measure", Some(v), &["family", "scale", "index", "lower", "upper"]);
            let upper = match o.get("upper") {
                Some(Value::String(s)) if s == "inf" => f64::INFINITY,
                _ => o.num(cx, "upper", f64::INFINITY, Rule::Positive),
            };
            Some(DensityFamily::PowerLaw {
                scale: o.num(cx, "scale", 1.0, Rule::Positive),
                index: o.num(cx, "index", 1.0, Rule::Finite),
                lower: o.num(cx, "lower", 0.0, Rule::NonNegative),
                upper,
            })
        }
        "tabulated" => {
            let _ = Obj::new(cx, "model.measure", Some(v), &["family", "points"]);
            let Some(Value::Array(items)) = v.get("points") else {
                cx.issue("model.measure.points", "expected a list of [z, density] pairs");
                return None;
            };
            let mut points = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                match item.as_array().map(|p| p.iter().map(Value::as_f64).collect::<Vec<_>>()) {
                    Some(p) if p.len() == 2 && p.iter().all(Option::is_some) => {
                        points.push((p[0].unwrap(), p[1].unwrap()))
                    }
                    _ => cx.issue(&format!("model.measure.points[{i}]"), "expected [z, density]"),
                }
            }
            Some(DensityFamily::Tabulated(points))
        }
        _ => {
            cx.issue("model.measure.family", "expected one of: power_law, tabulated");
            None
        }
    }
}

fn parse_synth(cx: &mut Cx, v: Option<&Value>, beta_eff: f64) -> SynthConfig {
    let o = Obj::new(
        cx,
        "synth",
        v,
        &[
            "field",
            "alpha",
            "t",
            "n",
            "cutoff",
            "modes",
            "points",
            "dx",
            "replications",
            "scaling_lags",
            "cov_lags",
            "method",
            "fft_size",
        ],
    );
    let field = match o.string(cx, "field", "eta", &["U", "V", "S", "eta", "S_derivative"]).as_str() {
        "U" => FieldName::U,
        "V" => FieldName::V,
        "S" => FieldName::S,
        "S_derivative" => FieldName::SDerivative,
        _ => FieldName::Eta,
    };
    let alpha = o.num(cx, "alpha", 1.0, Rule::Positive);
    let cutoff = o.num(cx, "cutoff", 256.0 * (alpha + 1.0).powf(1.0 / beta_eff), Rule::Positive);
    let modes = o.int(cx, "modes", 1 << 14, 2) as usize;
    let method = match o.string(cx, "method", "direct", &["direct", "fft"]).as_str() {
        "fft" => Method::Fft,
        _ => Method::Direct,
    };
    let fft_size = o.int(cx, "fft_size", 1024, 2) as usize;
    let delta = cutoff / modes as f64;
    let dx_default = match method {
        Method::Fft => 2.0 * PI / (delta * fft_size as f64),
        Method::Direct => PI / (2.0 * cutoff),
    };
    let dx = o.num(cx, "dx", dx_default, Rule::Positive);
    let points = o.int(cx, "points", 1024, 1) as usize;
    if method == Method::Fft {
        if (dx * delta * fft_size as f64 / (2.0 * PI) - 1.0).abs() > 1e-12 {
            cx.issue("synth.dx", "FFT evaluation needs dx * (cutoff/modes) * fft_size = 2π; omit dx to derive it");
        }
        if points > fft_size {
            cx.issue("synth.points", "cannot exceed fft_size");
        }
    }
    let n = o.int(cx, "n", 1, 0) as u32;
    if n > 8 {
        cx.issue("synth.n", "derivative order above 8 is not supported");
    }
    SynthConfig {
        field,
        alpha,
        t: o.num(cx, "t", 1.0, Rule::Positive),
        n,
        cutoff,
        modes,
        points,
        dx,
        replications: o.int(cx, "replications", 100, 1),
        scaling_lags: o.ints(cx, "scaling_lags", &[]),
        cov_lags: o.ints(cx, "cov_lags", &[0, 1, 2, 4, 8, 16]),
        method,
        fft_size,
    }
}
