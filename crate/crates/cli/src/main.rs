mod config;
mod io;
mod manifest;
mod plot;
mod suites;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fracwill::curvature::{nmc_curve, nmc_region_oracle, RegionKind, RegionSpec};
use fracwill::energy::{willmore_energy, FracParams};
use fracwill::fracops::{gagliardo_seminorm, stein_ratio, t_operator};
use fracwill::minimize::{concentration_scan, lsc_check, minimize_descent, random_support, DescentConfig};
use fracwill::ArcCurve;
use serde::Serialize;

use crate::config::{parse_list, Config};
use crate::io::{read_json, write_json, CurveFile, CurveKind, FunctionFile};
use crate::manifest::{Check, Recorder};
use crate::plot::PlotKind;
use crate::suites::Suite;

/// Bad invocation or configuration; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Parser)]
#[command(name = "fracwill", version, about = "Fractional mean curvature and nonlocal Willmore energy of planar curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fractional mean curvature at every node of a curve.
    Nmc(NmcArgs),
    /// Nonlocal Willmore energy of a curve.
    Energy(EnergyArgs),
    /// Gagliardo seminorm with inner L² of a sampled function.
    Seminorm(SeminormArgs),
    /// Ratio of the seminorm to the L^p norm of the fractional Laplacian.
    Stein(SteinArgs),
    /// Singular-integral operator on an interval function.
    Toper(ToperArgs),
    /// Convexity-constrained descent of the critical energy.
    Minimize(MinimizeArgs),
    /// Sequence diagnostics.
    Diagnose {
        #[command(subcommand)]
        which: Diagnose,
    },
    /// Run a named verification suite.
    Suite(SuiteArgs),
    /// Turn result files into plot-ready text data.
    Plotdata(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Boundary,
    Region,
}

#[derive(Args)]
struct NmcArgs {
    #[arg(long)]
    curve: PathBuf,
    #[arg(long)]
    s: f64,
    #[arg(long, value_enum, default_value = "boundary")]
    method: MethodArg,
    /// Node count for polyline and support curves.
    #[arg(long, default_value_t = 512)]
    n: usize,
    /// Region-oracle grid spacing.
    #[arg(long, default_value_t = 1.0 / 400.0)]
    h: f64,
    /// Evaluate every k-th node only.
    #[arg(long, default_value_t = 1)]
    every: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnergyArgs {
    #[arg(long)]
    curve: PathBuf,
    #[arg(long)]
    s: f64,
    #[arg(long, required_unless_present = "critical")]
    p: Option<f64>,
    /// Use p = 1/s.
    #[arg(long, conflicts_with = "p")]
    critical: bool,
    /// Outer arc-length window `a,b`.
    #[arg(long, value_parser = window)]
    outer: Option<(f64, f64)>,
    /// Inner arc-length window `a,b`.
    #[arg(long, value_parser = window)]
    inner: Option<(f64, f64)>,
    #[arg(long)]
    absolute: bool,
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn window(raw: &str) -> std::result::Result<(f64, f64), String> {
    match parse_list(raw).as_deref() {
        Ok([a, b]) => Ok((*a, *b)),
        _ => Err(format!("expected a,b but got {raw:?}")),
    }
}

#[derive(Args)]
struct SeminormArgs {
    #[arg(long = "fn")]
    function: PathBuf,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SteinArgs {
    #[arg(long = "fn")]
    function: PathBuf,
    #[arg(long)]
    s: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ToperArgs {
    #[arg(long = "fn")]
    function: PathBuf,
    #[arg(long)]
    s: f64,
    /// Sample indices, comma separated; all samples by default.
    #[arg(long, value_delimiter = ',')]
    at: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MinimizeArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Diagnose {
    /// Energy of a limit curve against the tail of a sequence.
    Lsc {
        #[arg(long, num_args = 4.., required = true)]
        curves: Vec<PathBuf>,
        #[arg(long)]
        limit: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 1024)]
        n: usize,
    },
    /// Points where the local energy does not become small.
    Concentration {
        #[arg(long, num_args = 1.., required = true)]
        curves: Vec<PathBuf>,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.01,0.005")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 1024)]
        n: usize,
    },
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(value_enum)]
    name: Suite,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run directory; `runs/<suite>` by default.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, value_enum)]
    kind: PlotKind,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn load_curve(path: &Path, n: usize) -> Result<ArcCurve> {
    let file: CurveFile = read_json(path)?;
    file.to_curve(n).with_context(|| format!("realizing {}", path.display()))
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(p) => write_json(p, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn csv_sink(out: Option<&Path>) -> Result<csv::Writer<Box<dyn std::io::Write>>> {
    let sink: Box<dyn std::io::Write> = match out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn nmc(a: &NmcArgs) -> Result<bool> {
    let curve = load_curve(&a.curve, a.n)?;
    let mut w = csv_sink(a.out.as_deref())?;
    w.write_record(["node_index", "arc_param", "H_s", "method", "delta", "n", "h"])?;
    let every = a.every.max(1);
    match a.method {
        MethodArg::Boundary => {
            let v = nmc_curve(&curve, a.s)?;
            for i in (0..curve.len()).step_by(every) {
                w.serialize((i, curve.arc_param(i), v.values[i], "boundary", v.near_diag_cutoff, curve.len(), None::<f64>))?;
            }
        }
        MethodArg::Region => {
            // smooth inputs get a fine polygon so the set itself is resolved
            let file: CurveFile = read_json(&a.curve)?;
            let shape = match file.kind {
                CurveKind::Support => file.to_curve(a.n.max(16384))?,
                _ => curve.clone(),
            };
            let region = RegionSpec::new(RegionKind::CurveInterior(shape));
            let eps = [16.0 * a.h, 8.0 * a.h, 4.0 * a.h];
            for i in (0..curve.len()).step_by(every) {
                let o = nmc_region_oracle(&region, curve.nodes[i], a.s, &eps, a.h)?;
                w.serialize((i, curve.arc_param(i), o.value, "region", eps[2], curve.len(), Some(a.h)))?;
            }
        }
    }
    w.flush()?;
    Ok(true)
}

fn energy(a: &EnergyArgs) -> Result<bool> {
    let curve = load_curve(&a.curve, a.n)?;
    let params = match a.p {
        Some(p) => FracParams::new(a.s, p)?,
        None => FracParams::critical(a.s)?,
    };
    let e = willmore_energy(&curve, params, a.outer, a.inner, a.absolute)?;
    emit_json(a.out.as_deref(), &e)?;
    Ok(true)
}

#[derive(Serialize)]
struct ToperOut {
    s: f64,
    m: usize,
    at: Vec<usize>,
    x: Vec<f64>,
    values: Vec<f64>,
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Nmc(a) => nmc(&a),
        Command::Energy(a) => energy(&a),
        Command::Seminorm(a) => {
            let f = read_json::<FunctionFile>(&a.function)?.to_grid()?;
            emit_json(a.out.as_deref(), &gagliardo_seminorm(&f, a.t, a.p)?)?;
            Ok(true)
        }
        Command::Stein(a) => {
            let f = read_json::<FunctionFile>(&a.function)?.to_grid()?;
            let ratio = stein_ratio(&f, a.s)?;
            emit_json(a.out.as_deref(), &serde_json::json!({ "s": a.s, "m": f.len(), "ratio": ratio }))?;
            Ok(true)
        }
        Command::Toper(a) => {
            let f = read_json::<FunctionFile>(&a.function)?.to_grid()?;
            let at = a.at.clone().unwrap_or_else(|| (0..f.len()).collect());
            if let Some(&bad) = at.iter().find(|&&j| j >= f.len()) {
                return Err(Usage(format!("index {bad} out of range for {} samples", f.len())).into());
            }
            let values = t_operator(&f, a.s, &at)?;
            let x = at.iter().map(|&j| f.x(j)).collect();
            emit_json(a.out.as_deref(), &ToperOut { s: a.s, m: f.len(), at, x, values })?;
            Ok(true)
        }
        Command::Minimize(a) => minimize(&a),
        Command::Diagnose { which } => diagnose(which),
        Command::Suite(a) => {
            let cfg = Config::load(a.config.as_deref())?;
            let dir = a.out.clone().unwrap_or_else(|| suites::default_dir(a.name));
            let mut rec = Recorder::new(&dir)?;
            if let Some(p) = &a.config {
                rec.input(p);
            }
            suites::run(a.name, &cfg, &mut rec)?;
            warn_unused(&cfg);
            let m = rec.finish(cfg.snapshot())?;
            report(&m.checks);
            Ok(m.pass)
        }
        Command::Plotdata(a) => {
            for p in plot::emit(a.kind, &a.input, &a.out)? {
                println!("{}", p.display());
            }
            Ok(true)
        }
    }
}

fn minimize(a: &MinimizeArgs) -> Result<bool> {
    let cfg = Config::load(a.config.as_deref())?;
    let d = DescentConfig::default();
    let config = DescentConfig {
        s: cfg.get("s", d.s)?,
        k: cfg.get("k", d.k)?,
        n: cfg.get("n", d.n)?,
        step0: cfg.get("step0", d.step0)?,
        shrink: cfg.get("shrink", d.shrink)?,
        grow: cfg.get("grow", d.grow)?,
        max_iters: cfg.get("max_iters", d.max_iters)?,
        grad_tol: cfg.get("grad_tol", d.grad_tol)?,
        eps_kappa: cfg.get("eps_kappa", d.eps_kappa)?,
        seed: cfg.get("seed", d.seed)?,
        h_fd: cfg.get("h_fd", d.h_fd)?,
    };
    if let Err(e) = config.validate() {
        return Err(Usage(e.to_string()).into());
    }
    let mut rec = Recorder::new(&a.out)?;
    if let Some(p) = &a.config {
        rec.input(p);
    }
    rec.seeds.push(config.seed);
    let init_file = cfg.get("init", String::from("random"))?;
    let init = if init_file == "random" {
        random_support(config.k, cfg.get("amplitude", 0.15)?, config.seed)
    } else {
        let p = PathBuf::from(&init_file);
        rec.input(&p);
        read_json::<CurveFile>(&p)?.support_curve()?
    };
    let trace = minimize_descent(&config, &init)?;

    write_json(&rec.output("trace.json"), &trace)?;
    std::fs::create_dir_all(a.out.join("curves"))?;
    for (i, it) in trace.iterates.iter().enumerate() {
        write_json(&rec.output(&format!("curves/iter_{i:03}.json")), &CurveFile::support(&it.curve))?;
    }
    write_json(&rec.output("final.json"), &CurveFile::support(&trace.final_curve))?;
    let mut w = csv::Writer::from_path(rec.output("trace.csv"))?;
    w.write_record(["iter", "energy", "grad_norm", "step", "accepted", "n", "k"])?;
    for (i, it) in trace.iterates.iter().enumerate() {
        w.serialize((i, it.energy, it.grad_norm, it.step, it.accepted, config.n, config.k))?;
    }
    w.flush()?;

    let e = trace.accepted_energies();
    let monotone = e.windows(2).all(|w| w[1] <= w[0]);
    rec.check(Check::new(
        "monotone accepted energies",
        monotone,
        format!("{} accepted of {}, final {:.6}, {:?}", e.len(), trace.iterates.len(), trace.final_energy, trace.termination),
    ));
    warn_unused(&cfg);
    let m = rec.finish(cfg.snapshot())?;
    report(&m.checks);
    Ok(m.pass)
}

fn diagnose(which: Diagnose) -> Result<bool> {
    match which {
        Diagnose::Lsc { curves, limit, s, n } => {
            let seq = curves.iter().map(|p| load_curve(p, n)).collect::<Result<Vec<_>>>()?;
            let r = lsc_check(&seq, &load_curve(&limit, n)?, s)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(r.holds)
        }
        Diagnose::Concentration { curves, s, eps, radii, n } => {
            let seq = curves.iter().map(|p| load_curve(p, n)).collect::<Result<Vec<_>>>()?;
            let r = concentration_scan(&seq, s, eps, &radii)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(r.within_bound)
        }
    }
}

fn warn_unused(cfg: &Config) {
    for k in cfg.unused() {
        eprintln!("warning: config key {k:?} is not used");
    }
}

fn report(checks: &[Check]) {
    let mut out = std::io::stdout().lock();
    for c in checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "[{tag}] {}: {}", c.name, c.detail);
    }
}

fn threads() -> Result<()> {
    let Ok(raw) = std::env::var("FRACWILL_THREADS") else { return Ok(()) };
    let n: usize = match raw.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => bail!(Usage(format!("FRACWILL_THREADS must be a positive integer, got {raw:?}"))),
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match threads().and_then(|_| run(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
