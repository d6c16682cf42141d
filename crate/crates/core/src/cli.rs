//! Command-line front end. Every analysis is a subcommand writing a stable
//! CSV, JSON or SVG document to stdout or `--out`.
//!
//! Settings resolve as built-in defaults, then `FLAGFLOW_SEED`, then the
//! `--config` file, then command-line flags. Exit codes: 0 success, 1 bad
//! arguments or configuration, 2 numerical failure, 3 a verification ran and
//! the property did not hold.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::compactify::{find_infinity_equilibria, Chart, SearchConfig};
use crate::dynamics::{
    integrate_compactified, integrate_with_events, CompactifiedConfig, Events, IntegratorConfig, QuadraticFlow,
    RicciFlow, Termination, VectorField3, DEFAULT_BLOW_UP_RADIUS,
};
use crate::experiments::{cylinder_basin, cylinder_points, line_lyapunov, no_interior_equilibria_scan, Table1Config};
use crate::model::{
    einstein_residual, flow_rhs, invariant_directions, poly_field, poly_rhs, reparam_check, ricci_components,
    tangency_defect, LineId, MetricParams,
};
use crate::plot::{render_svg, Polyline};
use crate::report;
use crate::{Error, Vec3};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

pub const DEFAULT_SEED: u64 = 7;
pub const SEED_ENV: &str = "FLAGFLOW_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum System {
    /// Ricci flow of the metric parameters.
    Ricci,
    /// Quadratic polynomial reparametrization of the Ricci flow.
    Poly,
}

#[derive(Debug, Parser)]
#[command(
    name = "flagflow",
    version,
    about = "Ricci flow of invariant metrics on the flag manifold SU(3)/T: Ricci components, \
             Poincare compactification, equilibria at infinity and Lyapunov exponents"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
struct GlobalFlags {
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format for tabular commands.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for sampled experiments (default 7, or FLAGFLOW_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Plain-text `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Relative integration tolerance.
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Absolute integration tolerance.
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    /// Largest integrator step.
    #[arg(long, global = true)]
    max_step: Option<f64>,
    /// Smallest integrator step before declaring a collapse.
    #[arg(long, global = true)]
    min_step: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ricci components r12, r13, r23 of the invariant metric (l12, l13, l23)
    /// on SU(3)/T, with the Ricci flow vector and the Einstein residual.
    Ricci {
        /// Metric parameters l12,l13,l23 (all positive).
        #[arg(long, allow_hyphen_values = true, value_name = "L12,L13,L23")]
        metric: String,
    },
    /// Trajectory of the Ricci flow system or of its quadratic polynomial
    /// reparametrization, in R^3 or on the Poincare ball (CSV).
    Integrate {
        #[arg(long, value_enum, default_value = "ricci")]
        system: System,
        /// Initial point a,b,c. Non-positive entries need `--system poly`.
        #[arg(long, allow_hyphen_values = true, value_name = "A,B,C")]
        x0: String,
        #[arg(long)]
        t_end: Option<f64>,
        /// Integrate the Poincare compactification of the quadratic system.
        #[arg(long)]
        compactified: bool,
        /// Ambient runs stop as finite-time blow-up once max |x_i| reaches this.
        #[arg(long)]
        blow_up_radius: Option<f64>,
    },
    /// Singularities at infinity of the Poincare compactification of the
    /// quadratic system: charts U1-U3, eigenvalues and stability.
    Infinity {
        /// Newton seeds per axis of each chart.
        #[arg(long)]
        grid: Option<usize>,
        /// Seeds cover [-L, L]^2.
        #[arg(long)]
        half_width: Option<f64>,
    },
    /// Lyapunov exponents of the compactified flow along the four invariant
    /// lines through the Einstein metrics (Lyapunov table).
    Lyapunov {
        /// Comma-separated charts, e.g. U1,U2,U3.
        #[arg(long, default_value = "U1")]
        charts: String,
        #[arg(long)]
        renorm_dt: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        /// Ambient radius of the base point on each line.
        #[arg(long)]
        base_radius: Option<f64>,
        /// Fraction of the run discarded as transient (0 = classical
        /// running average).
        #[arg(long)]
        transient_fraction: Option<f64>,
    },
    /// Checks: invariance of the four lines, Einstein metrics on them, the
    /// polynomial reparametrization identity and the absence of equilibria
    /// of the quadratic system in the first octant. Runs all when none given.
    Verify {
        #[arg(long)]
        lines: bool,
        #[arg(long)]
        einstein: bool,
        #[arg(long)]
        reparam: bool,
        #[arg(long)]
        scan: bool,
        /// Lattice resolution of the octant scan.
        #[arg(long)]
        resolution: Option<usize>,
        /// Random metrics for the reparametrization check.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Cylinder experiment: fraction of starts near an invariant line whose
    /// compactified trajectory reaches the line's equilibrium at infinity.
    Basin {
        /// Invariant line 1..=4.
        #[arg(long)]
        line: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Static SVG phase portrait of the Poincare ball viewed along (1,1,1),
    /// with equilibria at infinity and trajectories near the invariant lines.
    Plot {
        /// Trajectories per invariant line.
        #[arg(long)]
        per_line: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
    },
}

/// Values read from a `--config` file. Every field is optional; unknown keys
/// are rejected.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_step: Option<f64>,
    pub min_step: Option<f64>,
    pub t_end: Option<f64>,
    pub blow_up_radius: Option<f64>,
    pub grid: Option<usize>,
    pub half_width: Option<f64>,
    pub renorm_dt: Option<f64>,
    pub t_max: Option<f64>,
    pub base_radius: Option<f64>,
    pub transient_fraction: Option<f64>,
    pub resolution: Option<usize>,
    pub samples: Option<usize>,
    pub line: Option<usize>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub per_line: Option<usize>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("config line {line}: invalid value {value:?} for {key}"))
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut c = FileConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {n}: expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "out" => c.out = Some(PathBuf::from(value)),
                "format" => {
                    c.format = Some(
                        Format::from_str(value, true)
                            .map_err(|_| format!("config line {n}: unknown format {value:?}"))?,
                    )
                }
                "seed" => c.seed = Some(parse_value(key, value, n)?),
                "rel_tol" => c.rel_tol = Some(parse_value(key, value, n)?),
                "abs_tol" => c.abs_tol = Some(parse_value(key, value, n)?),
                "max_step" => c.max_step = Some(parse_value(key, value, n)?),
                "min_step" => c.min_step = Some(parse_value(key, value, n)?),
                "t_end" => c.t_end = Some(parse_value(key, value, n)?),
                "blow_up_radius" => c.blow_up_radius = Some(parse_value(key, value, n)?),
                "grid" => c.grid = Some(parse_value(key, value, n)?),
                "half_width" => c.half_width = Some(parse_value(key, value, n)?),
                "renorm_dt" => c.renorm_dt = Some(parse_value(key, value, n)?),
                "t_max" => c.t_max = Some(parse_value(key, value, n)?),
                "base_radius" => c.base_radius = Some(parse_value(key, value, n)?),
                "transient_fraction" => c.transient_fraction = Some(parse_value(key, value, n)?),
                "resolution" => c.resolution = Some(parse_value(key, value, n)?),
                "samples" => c.samples = Some(parse_value(key, value, n)?),
                "line" => c.line = Some(parse_value(key, value, n)?),
                "epsilon" => c.epsilon = Some(parse_value(key, value, n)?),
                "delta" => c.delta = Some(parse_value(key, value, n)?),
                "per_line" => c.per_line = Some(parse_value(key, value, n)?),
                other => return Err(format!("config line {n}: unknown key {other:?}")),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text)
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
    Verify(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Numerical(_) => EXIT_NUMERICAL,
            Failure::Verify(_) => EXIT_VERIFY,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

/// Resolved settings after layering defaults, environment, file and flags.
struct Settings {
    out: Option<PathBuf>,
    format: Option<Format>,
    seed: u64,
    file: FileConfig,
    flags: GlobalFlags,
}

impl Settings {
    fn resolve(flags: GlobalFlags, env_seed: Option<String>) -> Result<Self, Failure> {
        let mut seed = DEFAULT_SEED;
        if let Some(s) = env_seed {
            seed = s
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("{SEED_ENV} must be an unsigned integer, got {s:?}")))?;
        }
        let file = match &flags.config {
            Some(p) => FileConfig::load(p).map_err(Failure::Usage)?,
            None => FileConfig::default(),
        };
        let seed = flags.seed.or(file.seed).unwrap_or(seed);
        Ok(Self {
            out: flags.out.clone().or_else(|| file.out.clone()),
            format: flags.format.or(file.format),
            seed,
            file,
            flags,
        })
    }

    fn integrator(&self, base: IntegratorConfig) -> IntegratorConfig {
        let f = &self.flags;
        let c = &self.file;
        IntegratorConfig {
            rel_tol: f.rel_tol.or(c.rel_tol).unwrap_or(base.rel_tol),
            abs_tol: f.abs_tol.or(c.abs_tol).unwrap_or(base.abs_tol),
            max_step: f.max_step.or(c.max_step).unwrap_or(base.max_step),
            min_step: f.min_step.or(c.min_step).unwrap_or(base.min_step),
            t_end: c.t_end.unwrap_or(base.t_end),
        }
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

fn positive<T: PartialOrd + Default + std::fmt::Display>(name: &str, v: T) -> Result<T, Failure> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(Failure::Usage(format!("{name} must be positive, got {v}")))
    }
}

/// Parses `a,b,c` into three finite decimals.
pub fn parse_triple(s: &str) -> Result<Vec3, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got {s:?}"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        let x: f64 = p.parse().map_err(|_| format!("invalid number {p:?} in {s:?}"))?;
        if !x.is_finite() {
            return Err(format!("non-finite number {p:?} in {s:?}"));
        }
        *slot = x;
    }
    Ok(v)
}

/// Runs the CLI on `argv` (program name first), printing to the process's
/// stdout and stderr. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(
        argv,
        std::env::var(SEED_ENV).ok(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}

/// As [`run`], with the seed environment value and output streams supplied
/// by the caller.
pub fn run_with<I, T>(argv: I, env_seed: Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let settings = match Settings::resolve(cli.global, env_seed) {
        Ok(s) => s,
        Err(f) => return report_failure(f, stderr),
    };
    let (body, outcome) = match dispatch(&cli.command, &settings) {
        Ok(r) => r,
        Err(f) => return report_failure(f, stderr),
    };
    let written = match &settings.out {
        Some(p) => std::fs::write(p, &body).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => stdout.write_all(body.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        return report_failure(Failure::Usage(e), stderr);
    }
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => report_failure(f, stderr),
    }
}

fn report_failure(f: Failure, stderr: &mut dyn Write) -> i32 {
    let (kind, msg) = match &f {
        Failure::Usage(m) => ("error", m),
        Failure::Numerical(m) => ("numerical failure", m),
        Failure::Verify(m) => ("verification failed", m),
    };
    let _ = writeln!(stderr, "flagflow: {kind}: {msg}");
    f.code()
}

/// Output document plus the status to report after it has been written.
/// Failed verifications and numerical failures still emit their report.
type Outcome = (String, Result<(), Failure>);

fn dispatch(cmd: &Command, s: &Settings) -> Result<Outcome, Failure> {
    match cmd {
        Command::Ricci { metric } => cmd_ricci(metric, s),
        Command::Integrate {
            system,
            x0,
            t_end,
            compactified,
            blow_up_radius,
        } => cmd_integrate(*system, x0, *t_end, *compactified, *blow_up_radius, s),
        Command::Infinity { grid, half_width } => cmd_infinity(*grid, *half_width, s),
        Command::Lyapunov {
            charts,
            renorm_dt,
            t_max,
            base_radius,
            transient_fraction,
        } => cmd_lyapunov(charts, *renorm_dt, *t_max, *base_radius, *transient_fraction, s),
        Command::Verify {
            lines,
            einstein,
            reparam,
            scan,
            resolution,
            samples,
        } => {
            let any = *lines || *einstein || *reparam || *scan;
            let which = Checks {
                lines: *lines || !any,
                einstein: *einstein || !any,
                reparam: *reparam || !any,
                scan: *scan || !any,
            };
            cmd_verify(which, *resolution, *samples, s)
        }
        Command::Basin {
            line,
            epsilon,
            delta,
            samples,
            t_end,
        } => cmd_basin(*line, *epsilon, *delta, *samples, *t_end, s),
        Command::Plot { per_line, t_end } => cmd_plot(*per_line, *t_end, s),
    }
}

#[derive(Serialize)]
struct RicciReport {
    metric: Vec3,
    ricci: Vec3,
    flow: Vec3,
    einstein_constant: f64,
    einstein_residual: f64,
}

fn cmd_ricci(metric: &str, s: &Settings) -> Result<Outcome, Failure> {
    let v = parse_triple(metric).map_err(Failure::Usage)?;
    let m = MetricParams::from_array(v)?;
    let r = ricci_components(&m);
    let body = match s.format_or(Format::Csv) {
        Format::Csv => report::ricci_csv(&m, &r),
        Format::Json => {
            let fit = einstein_residual(&m);
            report::versioned_json(&RicciReport {
                metric: v,
                ricci: r.to_array(),
                flow: flow_rhs(&m),
                einstein_constant: fit.constant,
                einstein_residual: fit.residual,
            })
        }
    };
    Ok((body, Ok(())))
}

fn cmd_integrate(
    system: System,
    x0: &str,
    t_end: Option<f64>,
    compactified: bool,
    blow_up_radius: Option<f64>,
    s: &Settings,
) -> Result<Outcome, Failure> {
    let x0 = parse_triple(x0).map_err(Failure::Usage)?;
    if system == System::Ricci {
        MetricParams::from_array(x0)?;
    }
    let t_end = t_end.or(s.file.t_end);
    let tr = if compactified {
        if system != System::Poly {
            return Err(Failure::Usage(
                "--compactified needs --system poly (a polynomial field)".into(),
            ));
        }
        let mut cfg = CompactifiedConfig::default();
        cfg.integrator = s.integrator(cfg.integrator);
        if let Some(t) = t_end {
            cfg.integrator.t_end = positive("t_end", t)?;
        }
        integrate_compactified(&poly_field(), &x0, &cfg)?
    } else {
        let mut cfg = s.integrator(IntegratorConfig::default());
        if let Some(t) = t_end {
            cfg.t_end = positive("t_end", t)?;
        }
        let radius = positive(
            "blow_up_radius",
            blow_up_radius
                .or(s.file.blow_up_radius)
                .unwrap_or(DEFAULT_BLOW_UP_RADIUS),
        )?;
        let field: &dyn VectorField3 = match system {
            System::Ricci => &RicciFlow,
            System::Poly => &QuadraticFlow,
        };
        integrate_with_events(field, &x0, &cfg, &Events::blow_up(radius))?
    };
    let body = report::trajectory_csv(&tr);
    let last = tr.last();
    let outcome = match tr.termination {
        Termination::ReachedTEnd | Termination::ConvergedToPoint => Ok(()),
        Termination::BlowUpEvent => Err(Failure::Numerical(format!(
            "finite-time blow-up: max |x_i| reached {:.6e} at t = {:.9} before t_end",
            last.x.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            last.t
        ))),
        Termination::StepSizeCollapse => Err(Failure::Numerical(format!(
            "step size collapse at t = {:.9} (solution degenerates or blows up)",
            last.t
        ))),
    };
    Ok((body, outcome))
}

fn cmd_infinity(grid: Option<usize>, half_width: Option<f64>, s: &Settings) -> Result<Outcome, Failure> {
    let mut cfg = SearchConfig::default();
    if let Some(g) = grid.or(s.file.grid) {
        cfg.grid = g;
    }
    if let Some(l) = half_width.or(s.file.half_width) {
        cfg.half_width = l;
    }
    let eqs = find_infinity_equilibria(&poly_field(), &cfg)?;
    let body = match s.format_or(Format::Json) {
        Format::Json => report::equilibria_json(&eqs),
        Format::Csv => report::equilibria_csv(&eqs),
    };
    let outcome = if eqs.is_empty() {
        Err(Failure::Numerical(
            "no equilibria found; the seed grid is too coarse".into(),
        ))
    } else {
        Ok(())
    };
    Ok((body, outcome))
}

fn cmd_lyapunov(
    charts: &str,
    renorm_dt: Option<f64>,
    t_max: Option<f64>,
    base_radius: Option<f64>,
    transient_fraction: Option<f64>,
    s: &Settings,
) -> Result<Outcome, Failure> {
    let charts: Vec<Chart> = charts
        .split(',')
        .map(|c| c.trim().parse::<Chart>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Usage(format!("{e}")))?;
    let mut base = Table1Config::default();
    base.lyapunov.integrator = s.integrator(base.lyapunov.integrator);
    if let Some(v) = renorm_dt.or(s.file.renorm_dt) {
        base.lyapunov.renorm_dt = v;
    }
    if let Some(v) = t_max.or(s.file.t_max) {
        base.lyapunov.t_max = v;
        base.lyapunov.integrator.t_end = v;
    }
    if let Some(v) = base_radius.or(s.file.base_radius) {
        base.base_radius = positive("base_radius", v)?;
    }
    if let Some(v) = transient_fraction.or(s.file.transient_fraction) {
        base.lyapunov.transient_fraction = v;
    }
    let jobs: Vec<(Chart, LineId)> = charts.iter().flat_map(|&c| LineId::all().map(|l| (c, l))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(chart, line)| line_lyapunov(line, &Table1Config { chart, ..base }))
        .collect::<crate::Result<Vec<_>>>()?;
    let body = match s.format_or(Format::Csv) {
        Format::Csv => report::lyapunov_csv(&rows),
        Format::Json => report::lyapunov_json(&rows),
    };
    let stuck: Vec<String> = rows
        .iter()
        .filter(|r| !r.converged)
        .map(|r| format!("{} in {}", r.line, r.chart))
        .collect();
    let outcome = if stuck.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!(
            "Lyapunov averages did not converge for {}",
            stuck.join(", ")
        )))
    };
    Ok((body, outcome))
}

#[derive(Debug, Clone, Copy)]
struct Checks {
    lines: bool,
    einstein: bool,
    reparam: bool,
    scan: bool,
}

#[derive(Debug, Serialize)]
struct CheckResult {
    name: String,
    passed: bool,
    value: f64,
    threshold: f64,
    detail: String,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    seed: u64,
    checks: &'a [CheckResult],
}

pub const TANGENCY_THRESHOLD: f64 = 1e-13;
pub const EINSTEIN_THRESHOLD: f64 = 1e-12;
pub const REPARAM_THRESHOLD: f64 = 1e-12;

fn cmd_verify(
    which: Checks,
    resolution: Option<usize>,
    samples: Option<usize>,
    s: &Settings,
) -> Result<Outcome, Failure> {
    let mut checks = Vec::new();
    if which.lines {
        for (line, d) in LineId::all().into_iter().zip(invariant_directions()) {
            let v = tangency_defect(&d)?;
            checks.push(CheckResult {
                name: format!("line_{}", line.index()),
                passed: v <= TANGENCY_THRESHOLD,
                value: v,
                threshold: TANGENCY_THRESHOLD,
                detail: format!("tangency defect of the quadratic field along {line}"),
            });
        }
    }
    if which.einstein {
        for (line, d) in LineId::all().into_iter().zip(invariant_directions()) {
            let worst = [0.5, 1.0, 3.0]
                .iter()
                .map(|&k| {
                    let m = MetricParams::from_array(d.map(|c| k * c))?;
                    let fit = einstein_residual(&m);
                    let scale = ricci_components(&m)
                        .to_array()
                        .iter()
                        .fold(0.0f64, |a, r| a.max(r.abs()));
                    Ok(fit.residual / scale)
                })
                .collect::<crate::Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            checks.push(CheckResult {
                name: format!("einstein_{}", line.index()),
                passed: worst <= EINSTEIN_THRESHOLD,
                value: worst,
                threshold: EINSTEIN_THRESHOLD,
                detail: format!("relative residual of Ric = c g on {line} at scales 0.5, 1, 3"),
            });
        }
    }
    if which.reparam {
        let n = samples.or(s.file.samples).unwrap_or(1000);
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
        let mut worst: f64 = 0.0;
        for _ in 0..n {
            let v: Vec3 = std::array::from_fn(|_| rng.gen_range(0.1..10.0));
            let m = MetricParams::from_array(v)?;
            let scale = poly_rhs(&v).iter().fold(1.0f64, |a, p| a.max(p.abs()));
            worst = worst.max(reparam_check(&m) / scale);
        }
        checks.push(CheckResult {
            name: "reparametrization".into(),
            passed: worst <= REPARAM_THRESHOLD,
            value: worst,
            threshold: REPARAM_THRESHOLD,
            detail: format!("max relative gap between P and 12 l12 l13 l23 r over {n} random metrics"),
        });
    }
    if which.scan {
        let r = resolution.or(s.file.resolution).unwrap_or(400);
        let scan = no_interior_equilibria_scan(r)?;
        checks.push(CheckResult {
            name: "octant_scan".into(),
            passed: scan.min_norm > 0.0,
            value: scan.min_norm,
            threshold: 0.0,
            detail: format!(
                "min |P| on the closed first-octant sphere at resolution {r}, attained near ({:.4}, {:.4}, {:.4})",
                scan.argmin[0], scan.argmin[1], scan.argmin[2]
            ),
        });
    }
    let body = report::versioned_json(&VerifyReport {
        seed: s.seed,
        checks: &checks,
    });
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let outcome = if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(failed.join(", ")))
    };
    Ok((body, outcome))
}

fn cmd_basin(
    line: Option<usize>,
    epsilon: Option<f64>,
    delta: Option<f64>,
    samples: Option<usize>,
    t_end: Option<f64>,
    s: &Settings,
) -> Result<Outcome, Failure> {
    let line = LineId::new(line.or(s.file.line).unwrap_or(2))?;
    let epsilon = epsilon.or(s.file.epsilon).unwrap_or(0.05);
    let delta = delta.or(s.file.delta).unwrap_or(0.6);
    let n = samples.or(s.file.samples).unwrap_or(200);
    let mut cfg = CompactifiedConfig::default();
    cfg.integrator = s.integrator(cfg.integrator);
    if let Some(t) = t_end {
        cfg.integrator.t_end = positive("t_end", t)?;
    }
    let rep = cylinder_basin(line, epsilon, delta, n, s.seed, &cfg)?;
    let body = match s.format_or(Format::Json) {
        Format::Json => report::basin_json(&rep),
        Format::Csv => report::basin_csv(&rep),
    };
    let outcome = if rep.converged_fraction < 1.0 {
        Err(Failure::Verify(format!(
            "only {:.4} of the samples near {line} reached its equilibrium at infinity",
            rep.converged_fraction
        )))
    } else {
        Ok(())
    };
    Ok((body, outcome))
}

fn cmd_plot(per_line: Option<usize>, t_end: Option<f64>, s: &Settings) -> Result<Outcome, Failure> {
    let per_line = per_line.or(s.file.per_line).unwrap_or(3);
    let mut cfg = CompactifiedConfig::default();
    cfg.integrator = s.integrator(cfg.integrator);
    if let Some(t) = t_end {
        cfg.integrator.t_end = positive("t_end", t)?;
    }
    let field = poly_field();
    let eqs = find_infinity_equilibria(&field, &SearchConfig::default())?;
    let mut starts: Vec<(String, Vec3)> = Vec::new();
    for line in LineId::all() {
        for (i, x) in cylinder_points(line, 0.05, 0.6, per_line, s.seed)
            .into_iter()
            .enumerate()
        {
            starts.push((format!("{line} sample {i}"), x));
        }
    }
    let lines = starts
        .par_iter()
        .map(|(label, x)| {
            let tr = integrate_compactified(&field, x, &cfg)?;
            Ok(Polyline {
                label: label.clone(),
                points: tr.samples.iter().map(|p| p.x).collect(),
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok((render_svg(&eqs, &lines), Ok(())))
}
