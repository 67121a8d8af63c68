//! Subcommand runners.
//!
//! Monte Carlo work is split into fixed chunks of replicate or path indices.
//! Chunks run in parallel but are merged in index order, so every output is
//! bit-identical for a given seed regardless of the thread count.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::{Path, PathBuf};

use dynkin_core::kernel::{self, KernelKind};
use dynkin_core::localtime::{
    conditional_bins, describe_bandwidth, resolvent_moments, ConditionalBins, ConditionalQuery, PathSampler,
    ResolventCheck, MIN_BIN_HITS,
};
use dynkin_core::quad::Tolerance;
use dynkin_core::spde::{check_periodization, run_moments, MomentRun, Stepper};
use dynkin_core::stats::Moments;
use dynkin_core::synth::{discrete_structure, Coefficients, FieldSampler, JointSampler, LagBand, StructureAccumulator};
use dynkin_core::{FieldKind, LevyModel, PathConfig, SpatialGrid, SpectralGrid, TorusConfig};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, FieldName, Method, SynthConfig};
use crate::fft::FoldedIdft;
use crate::output::{num, write_atomic, Provenance, Table};
use crate::verify::{self, Outcome};
use crate::{LabError, Status};

/// Replicates or paths per parallel work item.
pub const CHUNK: u64 = 64;

/// Subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Condition report for the model.
    Check,
    /// Kernel tables.
    Kernel,
    /// Spectral field synthesis.
    Synth,
    /// Torus SPDE moment run.
    Spde,
    /// Local-time experiment.
    Localtime,
    /// Property suites.
    Verify,
}

impl Command {
    /// Lower-case name.
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Kernel => "kernel",
            Command::Synth => "synth",
            Command::Spde => "spde",
            Command::Localtime => "localtime",
            Command::Verify => "verify",
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Exit class.
    pub status: Status,
    /// Human-readable summary, also written to `summary.txt`.
    pub summary: String,
    /// Files written, summary last.
    pub files: Vec<PathBuf>,
}

/// Runs `f` over `0..n` in chunks of [`CHUNK`] and returns the results in
/// chunk order.
pub fn par_chunks<T, F>(n: u64, f: F) -> dynkin_core::Result<Vec<T>>
where
    T: Send,
    F: Fn(Range<u64>) -> dynkin_core::Result<T> + Sync + Send,
{
    let chunks: Vec<Range<u64>> = (0..n.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(n)).collect();
    chunks.into_par_iter().map(f).collect()
}

struct Ctx<'a> {
    command: Command,
    prov: &'a Provenance,
    out: &'a Path,
    files: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn core<T>(&self, context: impl FnOnce() -> String, r: dynkin_core::Result<T>) -> Result<T, LabError> {
        r.map_err(|source| LabError::Core {
            command: self.command.name(),
            config: self.prov.config_path.clone(),
            context: context(),
            source: Box::new(source),
        })
    }

    fn table(&self, columns: &[&str]) -> Table {
        Table::new(self.prov, columns)
    }

    fn save(&mut self, table: &Table, name: &str) -> Result<(), LabError> {
        let p = table
            .write(self.out, name)
            .map_err(|source| LabError::Io { context: format!("writing {name}"), source })?;
        self.files.push(p);
        Ok(())
    }

    fn finish(mut self, status: Status, body: String) -> Result<Report, LabError> {
        let mut text = String::new();
        for line in self.prov.header() {
            let _ = writeln!(text, "# {line}");
        }
        let _ = writeln!(text, "status: {status}");
        text.push_str(&body);
        let path = self.out.join("summary.txt");
        write_atomic(&path, text.as_bytes())
            .map_err(|source| LabError::Io { context: "writing summary.txt".into(), source })?;
        self.files.push(path);
        Ok(Report { status, summary: text, files: self.files })
    }
}

/// Runs `command` and writes its artifacts into `out`.
pub fn run(command: Command, cfg: &ExperimentConfig, prov: &Provenance, out: &Path) -> Result<Report, LabError> {
    let mut ctx = Ctx { command, prov, out, files: Vec::new() };
    let model = ctx.core(|| format!("model {}", cfg.model.describe()), cfg.model.build())?;
    let (status, body) = match command {
        Command::Check => check(&mut ctx, cfg, &model)?,
        Command::Kernel => kernels(&mut ctx, cfg, &model)?,
        Command::Synth => synth(&mut ctx, cfg, &model)?,
        Command::Spde => spde(&mut ctx, cfg, &model)?,
        Command::Localtime => localtime(&mut ctx, cfg)?,
        Command::Verify => verify_suites(&mut ctx, cfg, &model)?,
    };
    ctx.finish(status, body)
}

fn check(ctx: &mut Ctx<'_>, cfg: &ExperimentConfig, model: &LevyModel) -> Result<(Status, String), LabError> {
    let c = &cfg.check;
    let report = ctx.core(|| format!("alpha={}", c.alpha), model.condition_report(c.alpha, &c.grids))?;
    let mut t = ctx.table(&["table", "x", "value"]);
    t.comment(format!("model: {}", cfg.model.describe()));
    t.comment(format!("alpha={}", c.alpha));
    for (name, rows) in [("hawkes_trend", &report.hawkes_trend), ("quasi_increasing", &report.quasi_increasing_ratio)] {
        for &(x, v) in rows.iter() {
            t.row([name.to_string(), num(x), num(v)]);
        }
    }
    for &(x, v) in report.kg_ratio.iter().flatten() {
        t.row(["kg_ratio".to_string(), num(x), num(v)]);
    }
    ctx.save(&t, "condition.csv")?;

    let d = &report.dalang_integral;
    let mut s = String::new();
    let _ = writeln!(s, "model: {}", cfg.model.describe());
    let _ = writeln!(s, "alpha: {}", c.alpha);
    match d.value {
        Some(v) => {
            let _ = writeln!(s, "dalang integral: {v:.10e} (error {:.2e}, cutoff {:.3e})", d.error, d.cutoff);
        }
        None => {
            let _ = writeln!(
                s,
                "dalang integral: divergent (partial {:.4e}, cutoff {:.3e}, tail ratio {})",
                d.error,
                d.cutoff,
                d.tail_ratio.map_or("n/a".into(), |r| format!("{r:.4}"))
            );
        }
    }
    let _ = writeln!(s, "dalang: {}", report.dalang);
    let _ = writeln!(s, "hawkes: {}", report.hawkes);
    let _ = writeln!(s, "quasi_increasing: {}", report.quasi_increasing);
    let _ = writeln!(s, "kg: {}", report.kg);
    Ok((Status::Pass, s))
}

fn kernels(ctx: &mut Ctx<'_>, cfg: &ExperimentConfig, model: &LevyModel) -> Result<(Status, String), LabError> {
    let k = &cfg.kernel;
    let tol = Tolerance::absolute(k.tol);
    let mut t = ctx.table(&["alpha", "t", "r", "u_alpha", "pbar", "var_u", "var_v", "var_s", "max_error"]);
    t.comment(format!("model: {}", cfg.model.describe()));
    t.comment(format!("tolerance: absolute {}", k.tol));
    for &alpha in &k.alpha {
        for &time in &k.t {
            for &r in &k.r {
                let what = |kind: KernelKind| format!("{} alpha={alpha} t={time} r={r}", kernel::describe(&kind));
                let mut row = vec![num(alpha), num(time), num(r)];
                let mut worst = 0.0f64;
                let pbar = ctx.core(|| what(KernelKind::Pbar { t: time }), kernel::pbar_density(model, time, r))?;
                let mut push = |v: kernel::KernelValue, row: &mut Vec<String>| {
                    worst = worst.max(v.error);
                    row.push(num(v.value));
                };
                let pot = KernelKind::Potential;
                push(ctx.core(|| what(pot), kernel::covariance(model, alpha, pot, r, tol))?, &mut row);
                push(pbar, &mut row);
                for kind in [KernelKind::VarU { t: time }, KernelKind::VarV { t: time }, KernelKind::VarS { t: time }] {
                    push(ctx.core(|| what(kind), kernel::covariance(model, alpha, kind, r, tol))?, &mut row);
                }
                row.push(num(worst));
                t.row(row);
            }
        }
    }
    let rows = t.len();
    ctx.save(&t, "kernel.csv")?;
    let s = format!("model: {}\nrows: {rows}\ntolerance: {}\n", cfg.model.describe(), k.tol);
    Ok((Status::Pass, s))
}

/// How realizations are evaluated on the spatial grid.
enum Evaluator {
    Direct(SpectralGrid, SpatialGrid),
    Fft(FoldedIdft),
}

impl Evaluator {
    fn eval(&self, c: &Coefficients) -> Vec<f64> {
        match self {
            Evaluator::Direct(g, s) => c.evaluate(g, s),
            Evaluator::Fft(p) => p.evaluate(c),
        }
    }
}

enum Source {
    Single(FieldSampler),
    Joint(JointSampler),
}

fn field_kind(s: &SynthConfig) -> FieldKind {
    let (alpha, t, n) = (s.alpha, s.t, s.n);
    match s.field {
        FieldName::U => FieldKind::U { t },
        FieldName::V => FieldKind::V { alpha, t },
        FieldName::S => FieldKind::S { alpha, t },
        FieldName::Eta => FieldKind::Eta { alpha },
        FieldName::SDerivative => FieldKind::SDerivative { n, alpha, t },
    }
}

#[derive(Default)]
struct SynthAcc {
    cov: Vec<Moments>,
    structure: Option<StructureAccumulator>,
    first: Option<Vec<f64>>,
}

fn synth(ctx: &mut Ctx<'_>, cfg: &ExperimentConfig, model: &LevyModel) -> Result<(Status, String), LabError> {
    let s = &cfg.synth;
    let kind = field_kind(s);
    let grid_ctx = || format!("{} cutoff={} modes={} dx={} points={}", kind.label(), s.cutoff, s.modes, s.dx, s.points);
    let grid = ctx.core(grid_ctx, SpectralGrid::new(s.cutoff, s.modes))?;
    let space = ctx.core(grid_ctx, SpatialGrid::new(s.dx, s.points))?;
    let eval = match s.method {
        Method::Direct => Evaluator::Direct(grid, space),
        Method::Fft => Evaluator::Fft(ctx.core(grid_ctx, FoldedIdft::new(&grid, &space, s.fft_size))?),
    };
    if !s.scaling_lags.is_empty() {
        let band = ctx.core(grid_ctx, LagBand::for_field(model, &kind, &grid, &space))?;
        ctx.core(grid_ctx, band.check(&s.scaling_lags, &space))?;
    }
    let (source, weights) = match kind {
        FieldKind::U { .. } => {
            let f = ctx.core(grid_ctx, FieldSampler::new(model, kind, grid))?;
            let w = f.amplitudes().iter().map(|a| a * a).collect::<Vec<_>>();
            (Source::Single(f), w)
        }
        _ => {
            let deriv = matches!(kind, FieldKind::SDerivative { .. }).then_some(s.n);
            let j = ctx.core(grid_ctx, JointSampler::new(model, s.alpha, s.t, grid, deriv))?;
            let (av, as_) = j.amplitudes();
            let w: Vec<f64> = (0..grid.modes())
                .map(|k| match kind {
                    FieldKind::V { .. } => av[k] * av[k],
                    FieldKind::S { .. } => as_[k] * as_[k],
                    FieldKind::Eta { .. } => av[k] * av[k] + as_[k] * as_[k],
                    _ => (as_[k] * grid.freq(k).powi(s.n as i32)).powi(2),
                })
                .collect();
            (Source::Joint(j), w)
        }
    };
    let seed = cfg.seed;
    let realize = |rep: u64| -> Vec<f64> {
        match &source {
            Source::Single(f) => eval.eval(&f.coefficients(seed, rep)),
            Source::Joint(j) => {
                let c = j.coefficients(seed, rep);
                match kind {
                    FieldKind::V { .. } => eval.eval(&c.v),
                    FieldKind::S { .. } => eval.eval(&c.s),
                    FieldKind::Eta { .. } => {
                        let v = eval.eval(&c.v);
                        let sv = eval.eval(&c.s);
                        v.iter().zip(&sv).map(|(a, b)| a + b).collect()
                    }
                    _ => eval.eval(&c.s.derivative(&grid, s.n)),
                }
            }
        }
    };
    let lags: Vec<usize> = s.cov_lags.iter().copied().filter(|&m| m < s.points).collect();
    let chunks = par_chunks(s.replications, |range| {
        let mut acc = SynthAcc {
            cov: vec![Moments::new(); lags.len()],
            structure: (!s.scaling_lags.is_empty()).then(|| StructureAccumulator::new(s.scaling_lags.clone())),
            first: None,
        };
        for rep in range {
            let v = realize(rep);
            for (m, c) in lags.iter().zip(acc.cov.iter_mut()) {
                let n = v.len() - m;
                c.push((0..n).map(|j| v[j] * v[j + m]).sum::<f64>() / n as f64);
            }
            if let Some(st) = acc.structure.as_mut() {
                st.push(rep, &v);
            }
            if rep == 0 {
                acc.first = Some(v);
            }
        }
        Ok(acc)
    });
    let chunks = ctx.core(grid_ctx, chunks)?;
    let mut total = SynthAcc { cov: vec![Moments::new(); lags.len()], ..Default::default() };
    for c in chunks {
        for (a, b) in total.cov.iter_mut().zip(&c.cov) {
            a.merge(b);
        }
        match (&mut total.structure, c.structure) {
            (Some(t), Some(st)) => t.merge(&st),
            (t @ None, st) => *t = st,
            _ => {}
        }
        if total.first.is_none() {
            total.first = c.first;
        }
    }

    let header = |t: &mut Table| {
        t.comment(format!("model: {}", cfg.model.describe()));
        t.comment(format!("field: {}", kind.label()));
        t.comment(format!(
            "grid: cutoff={} modes={} dxi={} dx={} points={} method={:?} fft_size={}",
            s.cutoff,
            s.modes,
            grid.delta(),
            s.dx,
            s.points,
            s.method,
            s.fft_size
        ));
        t.comment(format!("replications={}", s.replications));
    };
    let mut field = ctx.table(&["x", "value"]);
    header(&mut field);
    field.comment("replicate 0");
    for (j, v) in total.first.iter().flatten().enumerate() {
        field.row([num(space.x(j)), num(*v)]);
    }
    ctx.save(&field, "field.csv")?;

    let (alpha, k) = kind.kernel();
    let tol = Tolerance::absolute(1e-8);
    let discrete = |r: f64| weights.iter().enumerate().map(|(i, w)| w * (grid.freq(i) * r).cos()).sum::<f64>();
    let mut cov = ctx.table(&["lag", "empirical_cov", "exact_cov", "stderr"]);
    header(&mut cov);
    cov.comment("exact_cov is the continuum kernel; discrete_cov (summary) is the synthesized covariance");
    let mut body = String::new();
    let _ = writeln!(body, "model: {}", cfg.model.describe());
    let _ = writeln!(body, "field: {}", kind.label());
    let _ = writeln!(body, "replications: {}", s.replications);
    let _ = writeln!(body, "lag  empirical  stderr  discrete  exact  z(discrete)");
    for (m, acc) in lags.iter().zip(&total.cov) {
        let r = *m as f64 * s.dx;
        let exact =
            ctx.core(|| format!("{} r={r}", kernel::describe(&k)), kernel::covariance(model, alpha, k, r, tol))?;
        cov.row([num(r), num(acc.mean()), num(exact.value), num(acc.std_error())]);
        let d = discrete(r);
        let _ = writeln!(
            body,
            "{r:.6}  {:.6e}  {:.2e}  {d:.6e}  {:.6e}  {:+.2}",
            acc.mean(),
            acc.std_error(),
            exact.value,
            (acc.mean() - d) / acc.std_error()
        );
    }
    ctx.save(&cov, "covariance.csv")?;

    if let Some(st) = &total.structure {
        let fit = ctx.core(grid_ctx, st.fit(&space))?;
        let amps: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let mut sc = ctx.table(&["lag", "structure", "stderr", "discrete_structure"]);
        header(&mut sc);
        sc.comment(format!("slope={} stderr={}", fit.slope, fit.stderr));
        for &(r, v, se) in &fit.table {
            sc.row([num(r), num(v), num(se), num(discrete_structure(&grid, &amps, r))]);
        }
        ctx.save(&sc, "scaling.csv")?;
        let _ = writeln!(body, "increment scaling slope: {:.4} ± {:.4}", fit.slope, fit.stderr);
    }
    Ok((Status::Pass, body))
}

fn spde(ctx: &mut Ctx<'_>, cfg: &ExperimentConfig, model: &LevyModel) -> Result<(Status, String), LabError> {
    let p = &cfg.spde;
    let what = || format!("L={} N={} alpha={} dt={}", p.circumference, p.modes, p.alpha, p.dt);
    let torus = ctx.core(what, TorusConfig::new(p.circumference, p.modes, p.alpha, p.dt))?;
    let image = if p.alpha > 0.0 { Some(ctx.core(what, check_periodization(model, &torus))?) } else { None };
    let stepper = ctx.core(what, Stepper::new(torus, model))?;
    let chunks = par_chunks(p.paths, |range| run_moments(&stepper, cfg.seed, range, &p.times, &p.probes));
    let mut runs = ctx.core(what, chunks)?.into_iter();
    let mut run: MomentRun = runs.next().expect("at least one chunk");
    for r in runs {
        run.merge(&r);
    }

    let mut t = ctx.table(&["t", "x", "mean", "var", "exact_var", "stderr", "paths"]);
    t.comment(format!("model: {}", cfg.model.describe()));
    t.comment(what());
    t.comment("stderr is the Gaussian standard error var*sqrt(2/(paths-1)) of the variance");
    let n = run.paths();
    for (i, &time) in run.times.iter().enumerate() {
        let exact = stepper.exact_variance(time);
        for (j, &x) in run.probes.iter().enumerate() {
            let m = run.at(i, j);
            let var = m.variance();
            t.row([
                num(time),
                num(x),
                num(m.mean()),
                num(var),
                num(exact),
                num(var * (2.0 / (n as f64 - 1.0)).sqrt()),
                n.to_string(),
            ]);
        }
    }
    ctx.save(&t, "moments.csv")?;

    let mut s = String::new();
    let _ = writeln!(s, "model: {}", cfg.model.describe());
    let _ = writeln!(s, "{}", what());
    let _ = writeln!(s, "paths: {n}");
    if let Some(r) = image {
        let _ = writeln!(s, "image-sum ratio: {r:.3e}");
    }
    for (i, &time) in run.times.iter().enumerate() {
        let (v, se) = run.point_variance(i);
        let exact = stepper.exact_variance(time);
        let _ = writeln!(s, "t={time}: pooled variance {v:.6} ± {se:.6}, exact {exact:.6}, z {:+.2}", (v - exact) / se);
    }
    if let (Some(var_eta), true) = (stepper.stationary_variance(), run.times.len() >= 2) {
        let ok = run.stationarity(0, run.times.len() - 1, p.alpha, var_eta);
        let _ =
            writeln!(s, "stationary variance: {var_eta:.6}; relaxation check: {}", if ok { "pass" } else { "fail" });
    }
    Ok((Status::Pass, s))
}

fn localtime(ctx: &mut Ctx<'_>, cfg: &ExperimentConfig) -> Result<(Status, String), LabError> {
    let l = &cfg.localtime;
    let (beta, c) = cfg.model.stable_parameters().ok_or_else(|| LabError::Core {
        command: "localtime",
        config: ctx.prov.config_path.clone(),
        context: cfg.model.describe(),
        source: Box::new(dynkin_core::Error::InvalidParameter {
            name: "model",
            reason: "local-time runs need a stable or brownian model".into(),
        }),
    })?;
    let what = || format!("beta={beta} c={c} dt={} eps={:?}", l.dt, l.eps);
    let mut pc = ctx.core(what, PathConfig::new(beta, c, l.dt))?.with_seed(cfg.seed);
    if let Some(e) = l.eps {
        pc = pc.with_eps(e);
    }
    let sampler = ctx.core(what, PathSampler::new(pc))?;
    let q = ConditionalQuery { alpha: l.alpha, a: l.a, b: l.b, t: l.t, window: l.window };
    let qs = || {
        format!("{} alpha={} a={} b={} t={} window={:?} paths={}", what(), l.alpha, l.a, l.b, l.t, l.window, l.paths)
    };
    let bins = ctx.core(qs, par_chunks(l.paths, |r| conditional_bins(&sampler, &q, r)))?;
    let mut all = ConditionalBins::default();
    for b in &bins {
        all.merge(b);
    }
    let out = ctx.core(qs, all.outcome(MIN_BIN_HITS))?;
    let res = ctx.core(qs, par_chunks(l.paths, |r| resolvent_moments(&sampler, l.alpha, l.a, l.a, r)))?;
    let mut m = Moments::new();
    for r in &res {
        m.merge(r);
    }
    let chk = ctx.core(qs, ResolventCheck::from_moments(&sampler, l.alpha, l.a, l.a, &m))?;

    let eps = sampler.config().eps;
    let verdict = if out.pass { "pass" } else { "fail" };
    let mut t = ctx.table(&["alpha", "t", "a", "b", "lhs", "rhs", "lhs_se", "rhs_se", "paths", "eps", "dt", "verdict"]);
    t.comment(format!("model: {} (beta={beta} c={c})", cfg.model.describe()));
    t.comment(describe_bandwidth(&sampler));
    t.comment(format!("window={:?}", l.window));
    t.row([
        num(l.alpha),
        num(l.t),
        num(l.a),
        num(l.b),
        num(out.lhs),
        num(out.rhs),
        num(out.lhs_se),
        num(out.rhs_se),
        l.paths.to_string(),
        num(eps),
        num(l.dt),
        verdict.to_string(),
    ]);
    ctx.save(&t, "experiment.csv")?;

    let mut r = ctx.table(&["alpha", "x", "y", "estimate", "exact", "stderr", "eps_bias", "dt_bias", "paths"]);
    r.comment(format!("model: {} (beta={beta} c={c})", cfg.model.describe()));
    r.comment(describe_bandwidth(&sampler));
    r.comment("estimate is the mean local time at the exponential time; exact is the potential density");
    r.row([
        num(l.alpha),
        num(l.a),
        num(l.a),
        num(chk.estimate),
        num(chk.exact),
        num(chk.stderr),
        num(chk.eps_bias),
        num(chk.dt_bias),
        chk.paths.to_string(),
    ]);
    ctx.save(&r, "resolvent.csv")?;

    let mut s = String::new();
    let _ = writeln!(s, "model: {} (beta={beta} c={c})", cfg.model.describe());
    let _ = writeln!(s, "{}", describe_bandwidth(&sampler));
    let _ = writeln!(
        s,
        "conditional: lhs {:.6} ± {:.6} (S >= t, {} paths), rhs {:.6} ± {:.6} (S < t, {} paths): {verdict}",
        out.lhs,
        out.lhs_se,
        all.above.count(),
        out.rhs,
        out.rhs_se,
        all.below.count()
    );
    let _ = writeln!(
        s,
        "resolvent: estimate {:.6} ± {:.6}, exact {:.6}, eps bias {:+.2e}, dt bias {:.2e}",
        chk.estimate, chk.stderr, chk.exact, chk.eps_bias, chk.dt_bias
    );
    Ok((if out.pass { Status::Pass } else { Status::PropertyFailure }, s))
}

fn verify_suites(ctx: &mut Ctx<'_>, cfg: &ExperimentConfig, model: &LevyModel) -> Result<(Status, String), LabError> {
    let props = verify::run_suites(cfg, model);
    let mut t = ctx.table(&["suite", "property", "outcome", "seconds", "detail"]);
    t.comment(format!("model: {}", cfg.model.describe()));
    t.comment(format!(
        "suites={} sigmas={} tol={} replications={}",
        cfg.verify.suites.join(","),
        cfg.verify.sigmas,
        cfg.verify.tol,
        cfg.verify.replications
    ));
    let mut s = String::new();
    let mut status = Status::Pass;
    for p in &props {
        t.row([
            p.suite.to_string(),
            p.name.clone(),
            p.outcome.to_string(),
            format!("{:.3}", p.seconds),
            p.detail.clone(),
        ]);
        let _ = writeln!(s, "{:<6} {}/{}: {}", p.outcome.to_string().to_uppercase(), p.suite, p.name, p.detail);
        status = status.max(match p.outcome {
            Outcome::Pass | Outcome::Skipped => Status::Pass,
            Outcome::Fail | Outcome::Error => Status::PropertyFailure,
            Outcome::NonConvergence => Status::NonConvergence,
        });
    }
    let passed = props.iter().filter(|p| p.outcome == Outcome::Pass).count();
    let _ = writeln!(s, "{passed} of {} properties passed", props.len());
    ctx.save(&t, "verify.csv")?;
    Ok((status, s))
}
