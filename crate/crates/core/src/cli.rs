//! `heatbound` command line: argument parsing and dispatch.
//!
//! Exit status: 0 success, 1 a verified inequality failed, 2 usage or
//! domain error, 3 precision error.

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{
    li_yau_bounds, lower_bound, optimize_delta, upper_bound, BoundValue, DeltaOptimum, LiYauConstants,
    OptimizeSide,
};
use crate::error::{Error, Result};
use crate::geometry::ModelManifold;
use crate::kernels::{kernel_derivatives, log_heat_kernel, KernelEval, SeriesConfig};
use crate::report::{to_csv, to_json, write_atomic, GridSummary, SweepRecord, SweepReport};
use crate::verify::{
    asymptotic_diagnostics, default_catalog, parse_values, run_suite, sandwich_sweep, thread_pool,
    Grid, PathSpec, Suite, VerifyConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "heatbound", version, about = "Gaussian heat-kernel bounds on model manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bounds, reference kernel and derivatives at one (d, t)
    Eval(EvalArgs),
    /// lower ≤ H ≤ upper over a (d, t, δ) grid
    Sweep(SweepArgs),
    /// Run verification suites with default grids
    Verify(VerifyArgs),
    /// Choose δ to make the lower or upper bound tightest
    OptimizeDelta(OptimizeArgs),
    /// Large-time diagnostics along d(t) = scale · t^β
    Asymptotics(AsymptoticsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file (written atomically); stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; defaults from the --out extension, then the subcommand
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Inequality slack (signed, log scale)
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,
    /// Relative truncation tolerance of the kernel series
    #[arg(long = "series-tol")]
    series_tol: Option<f64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    manifold: String,
    #[arg(long)]
    d: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Li–Yau constant c₁ (illustrative)
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    /// Li–Yau constant c₂ (illustrative)
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    /// δ of the Li–Yau comparison, in (0, 1)
    #[arg(long = "ly-delta", default_value_t = 0.5)]
    ly_delta: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    manifold: String,
    /// Distances: comma list, log:a:b:k or lin:a:b:k
    #[arg(long)]
    d: String,
    /// Times: comma list, log:a:b:k or lin:a:b:k
    #[arg(long)]
    t: String,
    #[arg(long, default_value = "0.1,0.5,1,2,10")]
    delta: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// sandwich | gradient | classical | asymptotics | all
    #[arg(long, default_value = "all")]
    suite: String,
    /// Manifold spec; the whole catalog when absent
    #[arg(long)]
    manifold: Option<String>,
    /// α values for the α-mode estimates
    #[arg(long, default_value = "0.1,0.25,0.5,0.9")]
    alpha: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[arg(long)]
    manifold: String,
    #[arg(long)]
    d: f64,
    #[arg(long)]
    t: f64,
    /// lower | upper; both when absent
    #[arg(long)]
    side: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct AsymptoticsArgs {
    #[arg(long)]
    manifold: String,
    #[arg(long, default_value_t = 0.4)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value = "log:1:1e6:50")]
    t: String,
    #[command(flatten)]
    output: OutputArgs,
}

impl OutputArgs {
    fn config(&self) -> Result<VerifyConfig> {
        let mut cfg = VerifyConfig::default();
        if let Some(tol) = self.series_tol {
            cfg.series = SeriesConfig::with_tol(tol)?;
        }
        if let Some(slack) = self.rel_tol {
            if !(slack >= 0.0) || !slack.is_finite() {
                return Err(Error::usage(format!("--rel-tol must be non-negative, got {slack}")));
            }
            cfg.slack = slack;
        }
        Ok(cfg)
    }

    fn format(&self, fallback: Format) -> Format {
        if let Some(f) = self.format {
            return f;
        }
        match self.out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            _ => fallback,
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => write_atomic(path, text),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(text.as_bytes())
                    .and_then(|_| stdout.flush())
                    .map_err(|e| Error::usage(format!("cannot write to stdout: {e}")))
            }
        }
    }

    fn emit_reports(&self, reports: &[SweepReport], fallback: Format) -> Result<()> {
        let text = match self.format(fallback) {
            Format::Csv => to_csv(reports),
            Format::Json => to_json(reports)?,
        };
        self.emit(&text)
    }
}

fn manifold(spec: &str) -> Result<ModelManifold> {
    spec.parse()
}

fn exit_for(reports: &[SweepReport]) -> i32 {
    if reports.iter().all(SweepReport::passed) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn summarize(reports: &[SweepReport]) {
    for r in reports {
        eprintln!(
            "{} {}: {:?} ({} records, {} skipped)",
            r.suite,
            r.manifold,
            r.verdict,
            r.records.len(),
            r.skipped
        );
    }
}

#[derive(Serialize)]
struct EvalOutput {
    manifold: String,
    n: usize,
    d: f64,
    t: f64,
    delta: f64,
    reference: f64,
    ln_reference: f64,
    derivatives: Option<KernelEval>,
    lower: BoundValue,
    lower_symmetric: BoundValue,
    upper: BoundValue,
    upper_symmetric: BoundValue,
    li_yau: LiYauOutput,
    margin_lower: f64,
    margin_upper: f64,
    pass: bool,
}

#[derive(Serialize)]
struct LiYauOutput {
    c1: f64,
    c2: f64,
    delta: f64,
    illustrative: bool,
    lower: f64,
    upper: f64,
}

fn eval(args: &EvalArgs) -> Result<i32> {
    let cfg = args.output.config()?;
    let m = manifold(&args.manifold)?;
    let x = m.origin();
    let y = m.point_at_distance(args.d)?;
    if args.output.format(Format::Json) == Format::Csv {
        let grid = Grid::new(vec![args.d], vec![args.t])?;
        let report = sandwich_sweep(&m, &grid, &[args.delta], &cfg)?;
        if report.records.is_empty() {
            return Err(Error::precision("reference kernel unavailable at this point"));
        }
        args.output.emit(&to_csv(std::slice::from_ref(&report)))?;
        return Ok(exit_for(&[report]));
    }
    let ln_h = log_heat_kernel(&m, &x, &y, args.t, &cfg.series)?;
    let derivatives = kernel_derivatives(&m, &x, &y, args.t, &cfg.series).ok();
    let lower = lower_bound(&m, &x, &y, args.t, args.delta, false)?;
    let lower_symmetric = lower_bound(&m, &x, &y, args.t, args.delta, true)?;
    let upper = upper_bound(&m, &x, &y, args.t, args.delta, false)?;
    let upper_symmetric = upper_bound(&m, &x, &y, args.t, args.delta, true)?;
    let consts = LiYauConstants::new(args.c1, args.c2, args.ly_delta)?;
    let (ly_lo, ly_hi) = li_yau_bounds(&m, &x, &y, args.t, &consts)?;
    let margin_lower = ln_h - lower.ln_value;
    let margin_upper = upper.ln_value - ln_h;
    let pass = [
        margin_lower,
        margin_upper,
        ln_h - lower_symmetric.ln_value,
        upper_symmetric.ln_value - ln_h,
    ]
    .iter()
    .all(|&v| v >= -cfg.slack);
    let out = EvalOutput {
        manifold: m.tag(),
        n: m.dimension(),
        d: m.distance(&x, &y)?,
        t: args.t,
        delta: args.delta,
        reference: ln_h.exp(),
        ln_reference: ln_h,
        derivatives,
        lower,
        lower_symmetric,
        upper,
        upper_symmetric,
        li_yau: LiYauOutput {
            c1: consts.c1,
            c2: consts.c2,
            delta: consts.delta,
            illustrative: true,
            lower: ly_lo.value,
            upper: ly_hi.value,
        },
        margin_lower,
        margin_upper,
        pass,
    };
    let mut text = serde_json::to_string_pretty(&out).map_err(|e| Error::usage(e.to_string()))?;
    text.push('\n');
    args.output.emit(&text)?;
    Ok(if pass { EXIT_OK } else { EXIT_VIOLATION })
}

fn sweep(args: &SweepArgs) -> Result<i32> {
    let cfg = args.output.config()?;
    let m = manifold(&args.manifold)?;
    let grid = Grid::parse(&args.d, &args.t)?;
    let deltas = parse_values(&args.delta)?;
    let report = sandwich_sweep(&m, &grid, &deltas, &cfg)?;
    let reports = [report];
    summarize(&reports);
    args.output.emit_reports(&reports, Format::Csv)?;
    Ok(exit_for(&reports))
}

fn verify(args: &VerifyArgs) -> Result<i32> {
    let cfg = args.output.config()?;
    let suite: Suite = args.suite.parse()?;
    let alphas = parse_values(&args.alpha)?;
    let manifolds = match &args.manifold {
        Some(spec) => vec![manifold(spec)?],
        None => default_catalog(),
    };
    let mut reports = Vec::new();
    for m in &manifolds {
        reports.extend(run_suite(suite, m, &alphas, &cfg)?);
    }
    summarize(&reports);
    args.output.emit_reports(&reports, Format::Json)?;
    Ok(exit_for(&reports))
}

#[derive(Serialize)]
struct OptimizeOutput {
    manifold: String,
    n: usize,
    d: f64,
    t: f64,
    reference: f64,
    optima: Vec<DeltaOptimum>,
}

fn optimize(args: &OptimizeArgs) -> Result<i32> {
    let cfg = args.output.config()?;
    let m = manifold(&args.manifold)?;
    let x = m.origin();
    let y = m.point_at_distance(args.d)?;
    let sides = match &args.side {
        Some(s) => vec![s.parse::<OptimizeSide>()?],
        None => vec![OptimizeSide::Lower, OptimizeSide::Upper],
    };
    let ln_h = log_heat_kernel(&m, &x, &y, args.t, &cfg.series)?;
    let optima = sides
        .iter()
        .map(|&side| optimize_delta(&m, &x, &y, args.t, side))
        .collect::<Result<Vec<_>>>()?;
    let d = m.distance(&x, &y)?;
    match args.output.format(Format::Json) {
        Format::Json => {
            let out = OptimizeOutput { manifold: m.tag(), n: m.dimension(), d, t: args.t, reference: ln_h.exp(), optima };
            let mut text = serde_json::to_string_pretty(&out).map_err(|e| Error::usage(e.to_string()))?;
            text.push('\n');
            args.output.emit(&text)?;
        }
        Format::Csv => {
            let grid = GridSummary { d: vec![d], t: vec![args.t], delta: Vec::new() };
            let mut report = SweepReport::new("optimize_delta", m.tag(), m.dimension(), grid);
            for o in &optima {
                let is_lower = o.side == OptimizeSide::Lower;
                let margin = if is_lower { ln_h - o.bound.ln_value } else { o.bound.ln_value - ln_h };
                report.records.push(SweepRecord {
                    label: Some(format!("{:?}", o.side).to_lowercase()),
                    d,
                    t: args.t,
                    delta: Some(o.delta),
                    lower: is_lower.then_some(o.bound.value),
                    reference: ln_h.exp(),
                    upper: (!is_lower).then_some(o.bound.value),
                    margin_lower: is_lower.then_some(margin),
                    margin_upper: (!is_lower).then_some(margin),
                    pass: margin >= -cfg.slack,
                });
            }
            report.finalize(false);
            args.output.emit(&to_csv(&[report]))?;
        }
    }
    Ok(EXIT_OK)
}

fn asymptotics(args: &AsymptoticsArgs) -> Result<i32> {
    let cfg = args.output.config()?;
    let m = manifold(&args.manifold)?;
    let path = PathSpec::new(args.beta, args.scale)?;
    let times = parse_values(&args.t)?;
    if let Some(t) = times.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::usage(format!("times must be positive, got {t}")));
    }
    let report = asymptotic_diagnostics(&m, Some(path), &times, &cfg)?;
    let reports = [report];
    summarize(&reports);
    args.output.emit_reports(&reports, Format::Json)?;
    Ok(exit_for(&reports))
}

fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify(a),
        Command::OptimizeDelta(a) => optimize(a),
        Command::Asymptotics(a) => asymptotics(a),
    }
}

/// Parse `argv` (including the program name), run, and return the exit status.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("heatbound: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("heatbound: {e}");
            if e.is_precision() {
                EXIT_PRECISION
            } else {
                EXIT_USAGE
            }
        }
    }
}
