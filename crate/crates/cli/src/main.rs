//! `ordent`: simulate interval maps, symbolize orbits into ordinal patterns,
//! estimate Kolmogorov-Sinai entropy tables and run the property suites.
//!
//! Exit codes: 0 success, 1 suite failure, 2 config error, 3 insufficient data.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use ordent_core::cdf::rank_convergence_report;
use ordent_core::dynamics::{lyapunov, orbit, typical_points, BURN_IN};
use ordent_core::entropy::{ks_table, observable_series};
use ordent_core::partition::symbolize_multi;
use ordent_core::verify;
use ordent_core::{ObservableSpec, OrdError, SystemSpec, TableParams};

const LYAPUNOV_STEPS: usize = 1_000_000;

#[derive(Parser)]
#[command(name = "ordent", version, about = "Ordinal-pattern entropy toolkit")]
#[command(after_help = "Orbits start from points drawn from the invariant law where it is known \
(logistic:4, tent:2, rotations), otherwise from uniform draws iterated 1000 times, and are \
burnt in for 1000 steps. Long tent runs default to slope 1.9999: slope 2 collapses onto 0 \
in binary floating point.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an orbit and its observable series (CSV: t,x,obs...; no header).
    Simulate(Opts),
    /// Write the ordinal symbol sequence of degree --d-max.
    Symbolize(Opts),
    /// Estimate the entropy table and compare the KS estimate with the Lyapunov exponent.
    EntropyTable(Opts),
    /// Compare rank statistics I_d/d with F(x) over --trials typical points.
    Rank {
        #[command(flatten)]
        opts: Opts,
        /// Comma-separated window lengths.
        #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
        degrees: Vec<usize>,
    },
    /// Run a named property suite and print its JSON report.
    Verify {
        /// One of: ordinal, alpha, refinement, cdf, rank, entropy-monotonicity, noninjectivity.
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone, Debug, Default)]
struct Opts {
    /// TOML or JSON run config (by extension); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// logistic[:r], tent[:slope], rotation[:alpha], custom-table:x,y;x,y;...
    #[arg(long)]
    system: Option<String>,
    /// identity, affine:a,b, sin-cos, quadratic-fold[:c], custom:x,y;...
    #[arg(long)]
    observable: Option<String>,
    #[arg(long)]
    d_max: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Orbit length after burn-in.
    #[arg(long)]
    len: Option<usize>,
    /// Independent orbits pooled by entropy-table.
    #[arg(long)]
    orbits: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed; defaults to $ORDENT_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// A system or observable given either as `kind:params` text or as a table.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Spec<T> {
    Text(String),
    Table(T),
}

/// Run configuration file; every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    system: Option<Spec<SystemSpec>>,
    observable: Option<Spec<ObservableSpec>>,
    d_max: Option<usize>,
    k_max: Option<usize>,
    orbit_len: Option<usize>,
    orbits: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

/// Resolved settings; `len` and `format` defaults depend on the command.
struct RunConfig {
    system: SystemSpec,
    observable: ObservableSpec,
    d_max: usize,
    k_max: usize,
    len: Option<usize>,
    orbits: usize,
    trials: usize,
    seed: u64,
    out: Option<PathBuf>,
    format: Option<Format>,
}

enum Failure {
    Config(String),
    Insufficient(String),
    Suite,
}

impl From<OrdError> for Failure {
    fn from(e: OrdError) -> Self {
        match e {
            OrdError::InsufficientData { .. } => Failure::Insufficient(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn read_config(path: &Path) -> Result<FileConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "toml" => toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display()))),
        "json" => serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display()))),
        _ => Err(config_err(format!("config {} must end in .toml or .json", path.display()))),
    }
}

fn resolve<T>(flag: Option<&str>, file: Option<Spec<T>>, default: &str) -> Result<T, Failure>
where
    T: std::str::FromStr<Err = OrdError> + Validate,
{
    match (flag, file) {
        (Some(s), _) => Ok(s.parse()?),
        (None, Some(Spec::Text(s))) => Ok(s.parse()?),
        (None, Some(Spec::Table(t))) => {
            t.check()?;
            Ok(t)
        }
        (None, None) => Ok(default.parse()?),
    }
}

trait Validate {
    fn check(&self) -> ordent_core::Result<()>;
}

impl Validate for SystemSpec {
    fn check(&self) -> ordent_core::Result<()> {
        self.validate()
    }
}

impl Validate for ObservableSpec {
    fn check(&self) -> ordent_core::Result<()> {
        self.validate()
    }
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var("ORDENT_SEED") {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| config_err(format!("ORDENT_SEED=`{s}` is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn set_threads(n: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = n {
        if n == 0 {
            return Err(config_err("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config_err(format!("cannot start thread pool: {e}")))?;
    }
    Ok(())
}

fn build(opts: Opts) -> Result<RunConfig, Failure> {
    let file = match &opts.config {
        Some(p) => read_config(p)?,
        None => FileConfig::default(),
    };
    set_threads(opts.threads.or(file.threads))?;
    let seed = match opts.seed.or(file.seed) {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    };
    Ok(RunConfig {
        system: resolve(opts.system.as_deref(), file.system, "logistic:4")?,
        observable: resolve(opts.observable.as_deref(), file.observable, "identity")?,
        d_max: opts.d_max.or(file.d_max).unwrap_or(6),
        k_max: opts.k_max.or(file.k_max).unwrap_or(3),
        len: opts.len.or(file.orbit_len),
        orbits: opts.orbits.or(file.orbits).unwrap_or(1),
        trials: opts.trials.or(file.trials).unwrap_or(100),
        seed,
        out: opts.out.or(file.out),
        format: opts.format.or(file.format),
    })
}

fn emit(out: &Option<PathBuf>, bytes: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| config_err(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{bytes}");
            Ok(())
        }
    }
}

/// Status lines go to stdout when the artifact goes to a file, else to stderr.
fn report(cfg: &RunConfig, line: &str) {
    if cfg.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

#[derive(Serialize)]
struct SimulationOutput<'a> {
    system: &'a SystemSpec,
    observable: &'a ObservableSpec,
    seed: u64,
    x0: f64,
    x: &'a [f64],
    observable_series: &'a [Vec<f64>],
}

fn simulate(cfg: RunConfig) -> Result<(), Failure> {
    let len = cfg.len.unwrap_or(1000);
    if len == 0 {
        return Err(config_err("--len must be >= 1"));
    }
    let x0 = typical_points(&cfg.system, 1, cfg.seed)?[0];
    let full = orbit(&cfg.system, x0, BURN_IN + len)?;
    let xs = &full[BURN_IN..];
    let obs = cfg.observable.apply(xs);
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::with_capacity(len * 48);
            for (t, x) in xs.iter().enumerate() {
                write!(s, "{t},{x}").unwrap();
                for comp in &obs {
                    write!(s, ",{}", comp[t]).unwrap();
                }
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let o = SimulationOutput {
                system: &cfg.system,
                observable: &cfg.observable,
                seed: cfg.seed,
                x0,
                x: xs,
                observable_series: &obs,
            };
            serde_json::to_string(&o).expect("simulation serializes") + "\n"
        }
    };
    emit(&cfg.out, &text)
}

fn symbolize(cfg: RunConfig) -> Result<(), Failure> {
    let len = cfg.len.unwrap_or(10_000);
    let series = observable_series(&cfg.system, &cfg.observable, len, 1, cfg.seed)?;
    let s = symbolize_multi(&series[0], cfg.d_max)?;
    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => s.to_json() + "\n",
        Format::Csv => {
            let mut out = String::new();
            for (t, tuple) in s.tuples().enumerate() {
                write!(out, "{t}").unwrap();
                for v in tuple {
                    write!(out, ",{v}").unwrap();
                }
                out.push('\n');
            }
            out
        }
    };
    emit(&cfg.out, &text)
}

fn entropy_table(cfg: RunConfig) -> Result<(), Failure> {
    let params = TableParams {
        orbits: cfg.orbits,
        ..TableParams::new(cfg.d_max, cfg.k_max, cfg.len.unwrap_or(1_000_000), cfg.seed)
    };
    let table = ks_table(&cfg.system, &cfg.observable, &params)?;
    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => table.to_json() + "\n",
        Format::Csv => table.to_csv(),
    };
    emit(&cfg.out, &text)?;

    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    let oracle = typical_points(&cfg.system, 1, cfg.seed).and_then(|x| lyapunov(&cfg.system, x[0], LYAPUNOV_STEPS));
    match (&table.ks_estimate, &oracle) {
        (Some(e), Ok(l)) => report(
            &cfg,
            &format!(
                "ks_estimate {:.6} (d={}, k={})  lyapunov {:.6}  |difference| {:.6}",
                e.nats,
                e.d,
                e.k,
                l,
                (e.nats - l).abs()
            ),
        ),
        (Some(e), Err(err)) => report(&cfg, &format!("ks_estimate {:.6} (d={}, k={})  lyapunov n/a ({err})", e.nats, e.d, e.k)),
        (None, _) => report(&cfg, "ks_estimate n/a (no reliable cell)"),
    }
    Ok(())
}

fn rank(cfg: RunConfig, degrees: &[usize]) -> Result<(), Failure> {
    let r = rank_convergence_report(&cfg.system, &cfg.observable, degrees, cfg.trials, cfg.seed)?;
    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => r.to_json() + "\n",
        Format::Csv => {
            let mut s = String::from("d,mean_abs_dev,max_abs_dev\n");
            for row in &r.rows {
                writeln!(s, "{},{},{}", row.d, row.mean_abs_dev, row.max_abs_dev).unwrap();
            }
            s
        }
    };
    emit(&cfg.out, &text)
}

fn run_verify(suite: &str, out: &Option<PathBuf>, threads: Option<usize>) -> Result<(), Failure> {
    set_threads(threads)?;
    let r = verify::run_suite(suite)?;
    emit(out, &(r.to_json() + "\n"))?;
    for c in r.checks.iter().filter(|c| !c.passed) {
        eprintln!("FAIL {}: {}", c.name, c.detail);
    }
    if r.passed {
        Ok(())
    } else {
        Err(Failure::Suite)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate(o) => simulate(build(o)?),
        Command::Symbolize(o) => symbolize(build(o)?),
        Command::EntropyTable(o) => entropy_table(build(o)?),
        Command::Rank { opts, degrees } => rank(build(opts)?, &degrees),
        Command::Verify { suite, out, threads } => run_verify(&suite, &out, threads),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Suite) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Insufficient(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
