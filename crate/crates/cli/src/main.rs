mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use vortexcert::cache::SpectrumCache;
use vortexcert::lattice::{Axis, Boundary};
use vortexcert::pipeline::{self, RunParams, SweepParams, Timings};
use vortexcert::verify::Verdict;
use vortexcert::Error;

use config::{Format, RunConfig};

#[derive(Parser)]
#[command(
    name = "vortexcert",
    version,
    about = "Certify vortex-free ground states of Majorana island lattices"
)]
#[command(
    after_help = "Any config field can also be set with a dotted flag, e.g. --lattice.lx 5 or --tolerances.topo=1e-6."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the lattice geometry and reflection
    Lattice(Opts),
    /// Run every check on one (lambda, beta) instance
    Certify(Opts),
    /// Tabulate checks over a lambda/beta grid
    Sweep(Opts),
    /// Ground energy, degeneracy and low spectrum
    Spectrum(Opts),
    /// Vortex expectation of every octagon in the ground space
    VortexMap(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct Opts {
    /// JSON config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lx: Option<usize>,
    #[arg(long)]
    ly: Option<usize>,
    #[arg(long)]
    boundary: Option<Boundary>,
    #[arg(long)]
    plane_axis: Option<Axis>,
    #[arg(long, allow_hyphen_values = true)]
    plane_coord: Option<f64>,
    /// A value, a list `a,b,c` or a range `from:to:steps`
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// A value or a list `a,b,c`
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol_rp: Option<f64>,
    #[arg(long)]
    tol_topo: Option<f64>,
    #[arg(long)]
    tol_pos: Option<f64>,
    #[arg(long)]
    gap_tol: Option<f64>,
    /// Random polynomials in the RP sample
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Check that must fail for the run to succeed (repeatable)
    #[arg(long)]
    expect_fail: Vec<String>,
    /// Spectrum cache directory (also VORTEXCERT_CACHE)
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Failure(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidLattice(_) | Error::InvalidPlane(_) | Error::InvalidReflection(_) | Error::Format(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

type Dotted = Vec<(String, String)>;

/// Pulls `--a.b value` and `--a.b=value` out of the argument list.
fn split_dotted(args: Vec<String>) -> Result<(Vec<String>, Dotted), CliError> {
    let mut rest = Vec::new();
    let mut dotted = Vec::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let Some(name) = a.strip_prefix("--") else {
            rest.push(a);
            continue;
        };
        let (key, inline) = match name.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (name.to_string(), None),
        };
        if !key.contains('.') {
            rest.push(a);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it
                .next()
                .ok_or_else(|| CliError::Usage(format!("--{key} needs a value")))?,
        };
        dotted.push((key, value));
    }
    Ok((rest, dotted))
}

fn load_config(opts: &Opts, dotted: &[(String, String)], needs_plane: bool) -> Result<RunConfig, CliError> {
    let mut v = config::defaults();
    if let Some(path) = &opts.config {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        let file: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        if !file.is_object() {
            return Err(CliError::Usage(format!(
                "config {}: expected a JSON object",
                path.display()
            )));
        }
        config::merge(&mut v, file);
    }
    let usage = CliError::Usage;
    for (k, raw) in dotted {
        let value = if k == "lambda" || k == "beta" {
            config::grid_value(raw).map_err(|e| usage(format!("{k}: {e}")))?
        } else {
            config::scalar(raw)
        };
        config::set_dotted(&mut v, k, value).map_err(usage)?;
    }
    let mut set = |k: &str, value: Value| config::set_dotted(&mut v, k, value).expect("static key");
    if let Some(x) = opts.lx {
        set("lattice.lx", json!(x));
    }
    if let Some(x) = opts.ly {
        set("lattice.ly", json!(x));
    }
    if let Some(x) = opts.boundary {
        set("lattice.boundary", json!(x));
    }
    if let Some(x) = opts.plane_axis {
        set("plane.axis", json!(x));
    }
    if let Some(x) = opts.plane_coord {
        set("plane.coordinate", json!(x));
    }
    if let Some(x) = &opts.lambda {
        set(
            "lambda",
            config::grid_value(x).map_err(|e| CliError::Usage(format!("lambda: {e}")))?,
        );
    }
    if let Some(x) = &opts.beta {
        set(
            "beta",
            config::grid_value(x).map_err(|e| CliError::Usage(format!("beta: {e}")))?,
        );
    }
    if let Some(x) = opts.seed {
        set("seed", json!(x));
    }
    if let Some(x) = opts.tol_rp {
        set("tolerances.rp", json!(x));
    }
    if let Some(x) = opts.tol_topo {
        set("tolerances.topo", json!(x));
    }
    if let Some(x) = opts.tol_pos {
        set("tolerances.pos", json!(x));
    }
    if let Some(x) = opts.gap_tol {
        set("tolerances.gap", json!(x));
    }
    if let Some(x) = opts.samples {
        set("samples", json!(x));
    }
    if let Some(x) = opts.max_degree {
        set("max_degree", json!(x));
    }
    if let Some(x) = &opts.out {
        set("output.path", json!(x));
    }
    if let Some(x) = opts.format {
        set(
            "output.format",
            json!(match x {
                FormatArg::Json => "json",
                FormatArg::Csv => "csv",
            }),
        );
    }
    if !opts.expect_fail.is_empty() {
        set("expect_fail", json!(opts.expect_fail));
    }
    if let Some(x) = &opts.cache_dir {
        set("cache_dir", json!(x));
    }
    let cfg = RunConfig::from_value(v).map_err(CliError::Usage)?;
    // Geometry errors are configuration errors too.
    let spec = cfg.lattice_spec();
    if needs_plane {
        spec.build()?;
    } else {
        spec.build_optional()?;
    }
    Ok(cfg)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("VORTEXCERT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("VORTEXCERT_THREADS: expected a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Failure(e.to_string()))
}

fn cache(cfg: &RunConfig) -> Result<Option<SpectrumCache>, CliError> {
    let dir = cfg
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os("VORTEXCERT_CACHE").map(PathBuf::from));
    Ok(match dir {
        Some(d) => Some(SpectrumCache::new(d)?),
        None => None,
    })
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report serializes");
    out.push(b'\n');
    out
}

fn csv_bytes<R: serde::Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Failure(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Failure(e.to_string()))
}

/// Wall-clock data lives next to the report so the report itself stays reproducible.
fn write_timing(out: Option<&Path>, command: &str, started: Instant, checks: &Timings) -> Result<(), CliError> {
    let Some(out) = out else { return Ok(()) };
    let mut name = out.as_os_str().to_owned();
    name.push(".timing.json");
    let body = json!({
        "command": command,
        "total_ms": started.elapsed().as_secs_f64() * 1e3,
        "checks": checks,
    });
    fs::write(PathBuf::from(name), json_bytes(&body))?;
    Ok(())
}

fn cmd_lattice(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let (lat, r) = cfg.lattice_spec().build_optional()?;
    let mut export = lat.export();
    export.reflection = r.map(|r| r.export());
    let bytes = match cfg.output.format {
        Format::Json => json_bytes(&export),
        Format::Csv => csv_bytes(export.islands.iter().map(|i| IslandRow {
            rank: i.rank,
            x: i.x,
            y: i.y,
            a: i.a.0,
            b: i.b.0,
            c: i.c.0,
            d: i.d.0,
        }))?,
    };
    emit(cfg.output.path.as_deref(), &bytes)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(serde::Serialize)]
struct IslandRow {
    rank: usize,
    x: i64,
    y: i64,
    a: u32,
    b: u32,
    c: u32,
    d: u32,
}

#[derive(serde::Serialize)]
struct CheckRow<'a> {
    check: &'a str,
    verdict: Verdict,
    asserted: bool,
    value_re: Option<f64>,
    value_im: Option<f64>,
    witness: Option<&'a str>,
}

fn cmd_certify(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let started = Instant::now();
    let params = RunParams {
        lattice: cfg.lattice_spec(),
        lambda: cfg.lambda.single("lambda").map_err(CliError::Usage)?,
        beta: cfg.beta.single("beta").map_err(CliError::Usage)?,
        seed: cfg.seed,
        tolerances: cfg.tolerances(),
        samples: cfg.samples,
        max_degree: cfg.max_degree,
        expect_fail: cfg.expect_fail.clone(),
    };
    let (bundle, timings) = pipeline::certify(&params, cache(cfg)?.as_ref())?;
    let bytes = match cfg.output.format {
        Format::Json => json_bytes(&bundle),
        Format::Csv => csv_bytes(bundle.reports.iter().map(|r| CheckRow {
            check: &r.check,
            verdict: r.verdict,
            asserted: r.asserted,
            value_re: r.worst.as_ref().map(|w| w.value_re),
            value_im: r.worst.as_ref().map(|w| w.value_im),
            witness: r.worst.as_ref().map(|w| w.witness.as_str()),
        }))?,
    };
    emit(cfg.output.path.as_deref(), &bytes)?;
    write_timing(cfg.output.path.as_deref(), "certify", started, &timings)?;
    for r in &bundle.reports {
        eprintln!(
            "{:<28} {:?}{}",
            r.check,
            r.verdict,
            if r.asserted { "" } else { " (not asserted)" }
        );
    }
    Ok(if bundle.verdict == Verdict::Pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_sweep(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let started = Instant::now();
    let params = SweepParams {
        lattice: cfg.lattice_spec(),
        lambdas: cfg.lambda.values("lambda").map_err(CliError::Usage)?,
        betas: cfg.beta.values("beta").map_err(CliError::Usage)?,
        seed: cfg.seed,
        tolerances: cfg.tolerances(),
        samples: cfg.samples,
        max_degree: cfg.max_degree,
    };
    let out = pipeline::sweep(&params)?;
    let bytes = match cfg.output.format {
        Format::Json => json_bytes(&out),
        Format::Csv => {
            let mut buf = Vec::new();
            pipeline::write_sweep_csv(&out.rows, &mut buf)?;
            buf
        }
    };
    emit(cfg.output.path.as_deref(), &bytes)?;
    write_timing(cfg.output.path.as_deref(), "sweep", started, &Timings::new())?;
    Ok(if out.any_error() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

#[derive(serde::Serialize)]
struct LevelRow {
    index: usize,
    eigenvalue: f64,
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let started = Instant::now();
    let lambda = cfg.lambda.single("lambda").map_err(CliError::Usage)?;
    let out = pipeline::spectrum(
        &cfg.lattice_spec(),
        lambda,
        cfg.seed,
        cfg.tolerances.gap,
        cache(cfg)?.as_ref(),
    )?;
    let bytes = match cfg.output.format {
        Format::Json => json_bytes(&out),
        Format::Csv => csv_bytes(
            out.eigenvalues
                .iter()
                .enumerate()
                .map(|(index, &eigenvalue)| LevelRow { index, eigenvalue }),
        )?,
    };
    emit(cfg.output.path.as_deref(), &bytes)?;
    write_timing(cfg.output.path.as_deref(), "spectrum", started, &Timings::new())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(serde::Serialize)]
struct VortexRow<'a> {
    octagon: usize,
    center_x: i64,
    center_y: i64,
    alpha: f64,
    deviation: f64,
    classification: &'a str,
}

fn cmd_vortex_map(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let started = Instant::now();
    let lambda = cfg.lambda.single("lambda").map_err(CliError::Usage)?;
    let out = pipeline::vortex_map_run(
        &cfg.lattice_spec(),
        lambda,
        cfg.seed,
        &cfg.tolerances(),
        cache(cfg)?.as_ref(),
    )?;
    let bytes = match cfg.output.format {
        Format::Json => json_bytes(&out),
        Format::Csv => csv_bytes(out.octagons.iter().map(|o| VortexRow {
            octagon: o.octagon,
            center_x: o.center[0],
            center_y: o.center[1],
            alpha: o.alpha,
            deviation: o.deviation,
            classification: o.classification.as_str(),
        }))?,
    };
    emit(cfg.output.path.as_deref(), &bytes)?;
    write_timing(cfg.output.path.as_deref(), "vortex-map", started, &Timings::new())?;
    Ok(ExitCode::SUCCESS)
}

fn run() -> Result<ExitCode, CliError> {
    let (args, dotted) = split_dotted(std::env::args().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return Ok(ExitCode::from(code));
        }
    };
    configure_threads()?;
    type Handler = fn(&RunConfig) -> Result<ExitCode, CliError>;
    let (opts, handler, needs_plane): (&Opts, Handler, bool) = match &cli.command {
        Command::Lattice(o) => (o, cmd_lattice, false),
        Command::Certify(o) => (o, cmd_certify, true),
        Command::Sweep(o) => (o, cmd_sweep, true),
        Command::Spectrum(o) => (o, cmd_spectrum, false),
        Command::VortexMap(o) => (o, cmd_vortex_map, false),
    };
    let cfg = load_config(opts, &dotted, needs_plane)?;
    handler(&cfg)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
