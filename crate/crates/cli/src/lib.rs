//! Command-line driver: model verification, flow checks, point
//! classification, critical scans, nodal extraction and combined reports.
//!
//! Exit codes: 0 pass, 1 failed check or missing finding, 2 configuration
//! error, 3 numerical failure.

pub mod config;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use semitoric::critical::{classify_point, closure_check, csv_header, csv_row, find_critical, StratumMap};
use semitoric::localmodel::Check;
use semitoric::nodal::{analyze, NodalReport};
use semitoric::symplectic::Convention;
use semitoric::systems::MomentMapSystem;
use semitoric::verification::{flow_suite, model_suite, FlowSuiteOptions, ModelSuiteOptions, SuiteReport};
use semitoric::williamson::WilliamsonType;
use semitoric::Error;

use config::RunConfig;

/// Largest `n` the differentiation layer supports.
pub const MAX_N: usize = 4;

#[derive(Debug)]
pub enum Failure {
    /// A check failed or an expected object was not found.
    Check(String),
    Config(String),
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Check(m) => write!(f, "check failed: {m}"),
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidType(_) | Error::UnknownSystem(_) | Error::Dimension { .. } => Failure::Config(e.to_string()),
            Error::NoIntegerDirection(_) | Error::NotAGraph { .. } => Failure::Check(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "semitoric", version, about = "Williamson types, local models and nodal loci of integrable systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for grid scans.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Transition and pullback suite on a local model.
    ModelVerify(TypeArgs),
    /// Flow suite on a local model.
    Flows(FlowArgs),
    /// Rank and Williamson type at one point.
    Classify(ClassifyArgs),
    /// Grid scan for critical points.
    Scan(SystemArgs),
    /// Focus-focus-transverse value analysis.
    Nodal(NodalArgs),
    /// model-verify, flows, scan and nodal in one run.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
pub struct TypeArgs {
    /// Williamson type `k_e,k_f,k_h,k_x`.
    #[arg(long = "type", default_value = "0,1,0,1")]
    pub wtype: String,
    /// Expected number of degrees of freedom.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    #[command(flatten)]
    pub model: TypeArgs,
    /// Time horizon, e.g. `6.28`, `2pi` or `4π`.
    #[arg(long)]
    pub t_max: Option<String>,
    /// Flip the sign of the momentum equation (negative control).
    #[arg(long)]
    pub debug_wrong_convention: bool,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long)]
    pub chart: Option<String>,
    /// Comma-separated chart coordinates `(x_1..x_n, xi_1..xi_n)`.
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
}

#[derive(Args, Debug, Clone)]
pub struct SystemArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub system: Option<String>,
}

#[derive(Args, Debug)]
pub struct NodalArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, overrides_with = "no_svg")]
    pub svg: bool,
    #[arg(long)]
    pub no_svg: bool,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub model: TypeArgs,
    #[arg(long, overrides_with = "no_svg")]
    pub svg: bool,
    #[arg(long)]
    pub no_svg: bool,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: Value,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    pub details: Value,
}

impl RunReport {
    fn new(command: &str, config: Value, checks: Vec<Check>, artifacts: Vec<String>, details: Value) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        RunReport { command: command.into(), config, pass, checks, artifacts, details }
    }
}

/// Parses `2.5`, `pi`, `4pi` or `4π`.
pub fn parse_time(s: &str) -> Result<f64, Failure> {
    let t = s.trim();
    let bad = || Failure::Config(format!("cannot read time {s:?}"));
    let value = match t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) {
        Some(c) => {
            let c = c.trim().trim_end_matches('*');
            if c.is_empty() { PI } else { c.parse::<f64>().map_err(|_| bad())? * PI }
        }
        None => t.parse::<f64>().map_err(|_| bad())?,
    };
    if value.is_finite() && value > 0.0 { Ok(value) } else { Err(bad()) }
}

pub fn parse_type(args: &TypeArgs) -> Result<WilliamsonType, Failure> {
    let w: WilliamsonType = args.wtype.parse().map_err(|e: Error| Failure::Config(e.to_string()))?;
    if let Some(n) = args.n {
        WilliamsonType::with_n(w.k_e(), w.k_f(), w.k_h(), w.k_x(), n).map_err(|e| Failure::Config(e.to_string()))?;
    }
    if w.n() == 0 || w.n() > MAX_N {
        return Err(Failure::Config(format!("type {w} needs 1 <= n <= {MAX_N}")));
    }
    Ok(w)
}

fn parse_point(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Failure::Config(format!("bad coordinate {x:?}"))))
        .collect()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: PathBuf) -> Self {
        Outputs { dir, written: Vec::new() }
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        std::fs::create_dir_all(&self.dir)
            .map_err(|e| Failure::Config(format!("cannot create {}: {e}", self.dir.display())))?;
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<(), Failure> {
        let mut s = serde_json::to_string_pretty(v).expect("serializable");
        s.push('\n');
        self.write(name, &s)
    }
}

fn resolve_config(args: &SystemArgs, seed: Option<u64>) -> Result<RunConfig, Failure> {
    let mut cfg = match (&args.config, &args.system) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(name)) => RunConfig::for_system(name),
        (None, None) => return Err(Failure::Config("give --config or --system".into())),
    };
    if let (Some(_), Some(name)) = (&args.config, &args.system) {
        cfg.system = name.clone();
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn out_dir(cli_out: &Option<PathBuf>, cfg: Option<&RunConfig>) -> Option<PathBuf> {
    cli_out.clone().or_else(|| cfg.and_then(|c| c.outputs.dir.as_ref().map(PathBuf::from)))
}

fn suite_report(command: &str, config: Value, suite: &SuiteReport) -> RunReport {
    RunReport::new(command, config, suite.checks.clone(), Vec::new(), json!({ "skipped": suite.skipped, "type": suite.wtype }))
}

pub fn cmd_model_verify(args: &TypeArgs, seed: u64) -> Result<RunReport, Failure> {
    let w = parse_type(args)?;
    let suite = model_suite(w, seed, &ModelSuiteOptions::default())?;
    Ok(suite_report("model-verify", json!({ "type": w, "seed": seed }), &suite))
}

pub fn cmd_flows(args: &FlowArgs, seed: u64) -> Result<RunReport, Failure> {
    let w = parse_type(&args.model)?;
    let mut opts = FlowSuiteOptions::default();
    if let Some(t) = &args.t_max {
        opts.t_max = parse_time(t)?;
    }
    if args.debug_wrong_convention {
        opts.convention = Convention::FlippedMomentum;
    }
    let suite = flow_suite(w, seed, &opts)?;
    let config = json!({
        "type": w,
        "seed": seed,
        "t_max": opts.t_max,
        "convention": format!("{:?}", opts.convention),
    });
    Ok(suite_report("flows", config, &suite))
}

pub fn cmd_classify(args: &ClassifyArgs, seed: u64) -> Result<RunReport, Failure> {
    let mut cfg = RunConfig::for_system(&args.system);
    cfg.seed = seed;
    let sys = cfg.system()?;
    let chart = args.chart.clone().unwrap_or_else(|| sys.chart_ids()[0].clone());
    if !sys.chart_ids().contains(&chart) {
        return Err(Failure::Config(format!("{} has no chart {chart:?}", sys.name())));
    }
    let p = parse_point(&args.point)?;
    if p.len() != 2 * sys.n() {
        return Err(Failure::Config(format!("point needs {} coordinates", 2 * sys.n())));
    }
    if !sys.in_domain(&chart, &p) {
        return Err(Failure::Config("point lies outside the chart".into()));
    }
    let point = classify_point(&sys, &chart, &p, &cfg.scan_options())?;
    let checks = vec![Check::flag("eq1", point.wtype.is_none_or(|w| w.n() == sys.n() && w.k_x() == point.rank))];
    let config = json!({ "system": sys.name(), "chart": chart, "point": p, "seed": seed });
    Ok(RunReport::new("classify", config, checks, Vec::new(), to_value(&point)))
}

struct Scan {
    sys: MomentMapSystem,
    strata: StratumMap,
    report: RunReport,
}

fn run_scan(cfg: &RunConfig, out: &mut Option<Outputs>) -> Result<Scan, Failure> {
    let sys = cfg.system()?;
    let region = cfg.region(&sys)?;
    let opts = cfg.scan_options();
    let started = Instant::now();
    let found = find_critical(&sys, &region, &opts)?;
    log::info!(
        "scanned {} grid points of {}: {} candidates, {} unrefined, {} points in {:.2?}",
        found.grid_points,
        sys.name(),
        found.candidates,
        found.skipped,
        found.points.len(),
        started.elapsed()
    );
    let mut csv = csv_header(sys.n());
    csv.push('\n');
    for p in &found.points {
        csv.push_str(&csv_row(p));
        csv.push('\n');
    }
    let strata = StratumMap::from_points(sys.n(), found.points, Some(region.clone()));
    let closure = closure_check(&strata, cfg.tolerances.closure);
    let eq1 = strata.eq1_violations();
    let counts: Vec<Value> = strata.counts().iter().map(|(w, c)| json!({ "type": w, "count": c })).collect();
    let fixed: Vec<&_> = strata.strata.values().flatten().chain(&strata.degenerate).filter(|p| p.rank == 0).collect();
    let summary = json!({
        "system": sys.name(),
        "n": sys.n(),
        "region": region,
        "grid_points": found.grid_points,
        "candidates": found.candidates,
        "unrefined_candidates": found.skipped,
        "counts": counts,
        "degenerate": strata.degenerate.len(),
        "rank0": fixed,
        "closure": closure,
        "eq1_violations": eq1,
    });
    if let Some(o) = out.as_mut() {
        o.write(&cfg.outputs.csv, &csv)?;
        o.json(&cfg.outputs.strata, &summary)?;
    }
    let checks = vec![
        Check::at_most("eq1-violations", eq1 as f64, 0.0),
        Check::at_most("closure-violations", closure.violations as f64, 0.0),
    ];
    let report = RunReport::new("scan", to_value(cfg), checks, Vec::new(), summary);
    Ok(Scan { sys, strata, report })
}

pub fn cmd_scan(cfg: &RunConfig, dir: PathBuf) -> Result<RunReport, Failure> {
    let mut out = Some(Outputs::new(dir));
    let mut scan = run_scan(cfg, &mut out)?;
    let mut out = out.expect("set above");
    scan.report.artifacts = out.written.clone();
    scan.report.artifacts.push(cfg.outputs.report.clone());
    out.json(&cfg.outputs.report, &scan.report)?;
    Ok(scan.report)
}

fn run_nodal(cfg: &RunConfig, scan: &Scan, svg: bool, out: &mut Outputs) -> Result<NodalReport, Failure> {
    let report = analyze(&scan.sys, &scan.strata, &cfg.nodal, &cfg.scan_options())?
        .ok_or_else(|| Failure::Check(format!("no focus-focus points found for {}", scan.sys.name())))?;
    out.json(&cfg.outputs.nodal, &report)?;
    if svg {
        let axis = cfg.outputs.svg_axis.unwrap_or(scan.sys.n() - 1);
        out.write(&cfg.outputs.svg, &report.plot(axis).render())?;
    }
    Ok(report)
}

fn nodal_details(r: &NodalReport) -> Value {
    json!({
        "type": r.wtype,
        "P": r.surface.base,
        "v": r.surface.v,
        "plane_residual": r.surface.plane_residual,
        "graph_residual": r.surface.graph_residual,
        "degenerate_fit": r.surface.degenerate_fit,
        "cloud_size": r.cloud_size,
        "components": r.components,
        "isolated": r.isolation.isolated,
        "isolation_radius": r.isolation.radius,
        "trace_samples": r.trace.as_ref().map(|t| t.samples.len()),
        "known_error": r.known_error,
    })
}

pub fn cmd_nodal(cfg: &RunConfig, dir: PathBuf, svg: bool) -> Result<RunReport, Failure> {
    let mut out = Outputs::new(dir);
    let scan = run_scan(cfg, &mut None)?;
    let nodal = run_nodal(cfg, &scan, svg, &mut out)?;
    let mut artifacts = out.written.clone();
    artifacts.push(cfg.outputs.report.clone());
    let report = RunReport::new("nodal", to_value(cfg), nodal.checks.clone(), artifacts, nodal_details(&nodal));
    out.json(&cfg.outputs.report, &report)?;
    Ok(report)
}

pub fn cmd_report(args: &ReportArgs, cfg: &RunConfig, dir: PathBuf) -> Result<RunReport, Failure> {
    let svg = !args.no_svg;
    let model = cmd_model_verify(&args.model, cfg.seed)?;
    let flows = cmd_flows(&FlowArgs { model: args.model.clone(), t_max: None, debug_wrong_convention: false }, cfg.seed)?;
    let mut out = Some(Outputs::new(dir));
    let scan = run_scan(cfg, &mut out)?;
    let mut out = out.expect("set above");
    let nodal = match run_nodal(cfg, &scan, svg, &mut out) {
        Ok(r) => Some(r),
        Err(Failure::Check(msg)) if scan.strata.strata.keys().all(|w| w.k_f() != 1) => {
            log::info!("{msg}; nodal section skipped");
            None
        }
        Err(e) => return Err(e),
    };
    let prefixed = |section: &str, checks: &[Check]| -> Vec<Check> {
        checks.iter().map(|c| Check { name: format!("{section}/{}", c.name), ..c.clone() }).collect()
    };
    let mut checks = prefixed("model-verify", &model.checks);
    checks.extend(prefixed("flows", &flows.checks));
    checks.extend(prefixed("scan", &scan.report.checks));
    if let Some(n) = &nodal {
        checks.extend(prefixed("nodal", &n.checks));
    }
    let mut artifacts = out.written.clone();
    artifacts.push(cfg.outputs.report.clone());
    let details = json!({
        "model-verify": model.details,
        "flows": flows.details,
        "scan": scan.report.details,
        "nodal": nodal.as_ref().map(nodal_details),
    });
    let config = json!({ "run": to_value(cfg), "type": args.model.wtype });
    let report = RunReport::new("report", config, checks, artifacts, details);
    out.json(&cfg.outputs.report, &report)?;
    Ok(report)
}

fn with_out(report: RunReport, dir: Option<PathBuf>, name: &str) -> Result<RunReport, Failure> {
    if let Some(d) = dir {
        let mut out = Outputs::new(d);
        let mut report = report;
        report.artifacts.push(name.to_string());
        out.json(name, &report)?;
        return Ok(report);
    }
    Ok(report)
}

fn dispatch(cli: &Cli) -> Result<RunReport, Failure> {
    let seed = cli.seed.unwrap_or(0);
    let default_dir = || PathBuf::from("semitoric-out");
    match &cli.command {
        Command::ModelVerify(a) => with_out(cmd_model_verify(a, seed)?, cli.out.clone(), "report.json"),
        Command::Flows(a) => with_out(cmd_flows(a, seed)?, cli.out.clone(), "report.json"),
        Command::Classify(a) => with_out(cmd_classify(a, seed)?, cli.out.clone(), "report.json"),
        Command::Scan(a) => {
            let cfg = resolve_config(a, cli.seed)?;
            cmd_scan(&cfg, out_dir(&cli.out, Some(&cfg)).unwrap_or_else(default_dir))
        }
        Command::Nodal(a) => {
            let cfg = resolve_config(&a.system, cli.seed)?;
            cmd_nodal(&cfg, out_dir(&cli.out, Some(&cfg)).unwrap_or_else(default_dir), !a.no_svg)
        }
        Command::Report(a) => {
            let cfg = resolve_config(&a.system, cli.seed)?;
            cmd_report(a, &cfg, out_dir(&cli.out, Some(&cfg)).unwrap_or_else(default_dir))
        }
    }
}

fn init_logging() {
    let level = match std::env::var("SEMITORIC_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("debug") => log::LevelFilter::Debug,
        Ok("info") | Err(_) => log::LevelFilter::Info,
        Ok(other) => {
            eprintln!("SEMITORIC_LOG={other:?} is not quiet, info or debug; using info");
            log::LevelFilter::Info
        }
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
}

/// Runs the parsed command on a pool of `--workers` threads and returns the
/// process exit code.
pub fn run(cli: Cli) -> u8 {
    init_logging();
    let started = Instant::now();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("configuration error: --workers must be positive");
            return 2;
        }
        pool = pool.num_threads(w);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("numerical failure: cannot start workers: {e}");
            return 3;
        }
    };
    let result = pool.install(|| dispatch(&cli));
    log::info!("wall-clock {:.3?}", started.elapsed());
    match result {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            if report.pass {
                0
            } else {
                for c in report.checks.iter().filter(|c| !c.pass) {
                    eprintln!("check failed: {} (measured {:e}, tolerance {:e})", c.name, c.measured, c.tolerance);
                }
                1
            }
        }
        Err(f) => {
            eprintln!("{f}");
            f.code()
        }
    }
}
