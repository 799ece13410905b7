//! Command-line front end: `sweep`, `fault-enum`, `validate` and `figure`.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{run_sweep, TrialBudget};
use crate::figures::{run_figure, Figure, FigureOptions};
use crate::noise::ErrorClassFilter;
use crate::oracle::{
    enumerate_logical_failures, validate_engines, FirstOrderTerm, LinearPolynomial, RatePolynomial, SecondOrderTerm,
};
use crate::protocols::{GadgetLibrary, ProtocolKind};
use crate::report::{write_records, write_records_to, Format, GridSpec, ResultRecord, RunConfig, DEFAULT_RERUN_CAP};

/// Default directory for output files when `--out` is not given.
pub const OUT_DIR_ENV: &str = "STEANE_FT_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "steane-ft", version, about = "Ancilla verification vs. ancilla decoding for the Steane code")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo logical error rates over a rate grid.
    Sweep(SweepArgs),
    /// Exact first- or second-order fault expansion as JSON.
    FaultEnum(FaultEnumArgs),
    /// Frame engine vs. stabilizer tableau equivalence suite.
    Validate(ValidateArgs),
    /// Preset sweep for one results figure, written as a plot-ready table.
    Figure(FigureArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file (default: stdout, or a file in $STEANE_FT_OUT_DIR).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json (default: from the file extension, else csv).
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fixed trials per point.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub protocols: Option<Vec<ProtocolKind>>,
    #[arg(long, value_delimiter = ',')]
    pub filter: Option<Vec<ErrorClassFilter>>,
    /// Equal-rate grid, replacing the config's grid.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[arg(long)]
    pub rerun_cap: Option<u32>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct FaultEnumArgs {
    /// 1 or 2.
    #[arg(long, default_value_t = 1)]
    pub order: u8,
    /// Protocols to expand (default: all).
    #[arg(long, value_delimiter = ',')]
    pub protocols: Option<Vec<ProtocolKind>>,
    /// Include every failing fault or fault pair in the report.
    #[arg(long)]
    pub terms: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 1000)]
    pub circuits: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// compare, ancilla, classes or surface.
    pub name: Figure,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Fixed trials per point (default: the preset's budget).
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub protocols: Option<Vec<ProtocolKind>>,
    #[arg(long, default_value_t = DEFAULT_RERUN_CAP)]
    pub rerun_cap: u32,
    /// Also write the per-basis result records to this file.
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<i32> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} worker threads: {e}", cli.jobs.unwrap_or(0))))?;
    pool.install(|| match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::FaultEnum(a) => fault_enum(a),
        Command::Validate(a) => validate(a),
        Command::Figure(a) => figure(a),
    })
}

/// `out`, else `$STEANE_FT_OUT_DIR/<default_name>`, else stdout (`None`).
fn resolve_out(out: Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
    out.or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| Path::new(&d).join(default_name)))
}

fn resolve_format(format: Option<Format>, out: Option<&Path>) -> Format {
    format.or_else(|| out.map(Format::for_path)).unwrap_or_default()
}

fn sweep(a: SweepArgs) -> Result<i32> {
    let mut config = match &a.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = a.seed {
        config.master_seed = Some(seed);
    }
    if let Some(n) = a.trials {
        config.trials = Some(TrialBudget::Fixed(n));
    }
    if let Some(p) = a.protocols {
        config.protocols = p;
    }
    if let Some(f) = a.filter {
        config.filters = f;
    }
    if let Some(p) = a.p {
        config.grid = GridSpec::uniform(p);
    }
    if let Some(cap) = a.rerun_cap {
        config.rerun_cap = Some(cap);
    }
    let spec = config.sweep_spec()?;
    let lib = GadgetLibrary::new(config.options)?;
    let records = ResultRecord::from_points(&run_sweep(&lib, &spec)?);

    let format_hint = a.output.format.or(config.format);
    let out = resolve_out(a.output.out.or(config.out), &format!("sweep.{}", format_hint.unwrap_or_default()));
    let format = resolve_format(format_hint, out.as_deref());
    match out {
        Some(path) => write_records(&records, &path, format)?,
        None => write_records_to(&records, io::stdout().lock(), format).map_err(stdout_error)?,
    }
    Ok(0)
}

fn stdout_error(source: io::Error) -> Error {
    Error::Io { path: "<stdout>".into(), source }
}

#[derive(Debug, Serialize)]
struct ClassCoefficients {
    class0: f64,
    class1: f64,
    class2: f64,
}

#[derive(Debug, Serialize)]
struct ProtocolExpansion {
    protocol: ProtocolKind,
    fault_tolerant: bool,
    single_faults: usize,
    first_order_failures: usize,
    c1: LinearPolynomial,
    c1_equal_rates: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    second_order: Option<SecondOrderSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_order_terms: Option<Vec<FirstOrderTerm>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    second_order_terms: Option<Vec<SecondOrderTerm>>,
}

#[derive(Debug, Serialize)]
struct SecondOrderSummary {
    pairs: u64,
    skipped_pairs: u64,
    failing_pairs: usize,
    c2: RatePolynomial,
    c2_equal_rates: f64,
    /// Equal-rate coefficient with only one error class switched on.
    class_coefficients: ClassCoefficients,
}

#[derive(Debug, Serialize)]
struct EnumerationReport {
    order: u8,
    /// Every protocol expected to be fault tolerant has no first-order
    /// failures, and every other protocol has some.
    certified: bool,
    protocols: Vec<ProtocolExpansion>,
}

fn fault_enum(a: FaultEnumArgs) -> Result<i32> {
    if !(1..=2).contains(&a.order) {
        return Err(Error::Config(format!("--order must be 1 or 2, got {}", a.order)));
    }
    let lib = GadgetLibrary::standard();
    let protocols = a.protocols.unwrap_or_else(|| ProtocolKind::ALL.to_vec());
    let mut report = EnumerationReport { order: a.order, certified: true, protocols: Vec::new() };
    for p in protocols {
        let e = enumerate_logical_failures(&lib, p, a.order)?;
        let failing = e.order1_failures().count();
        report.certified &= (failing == 0) == p.is_fault_tolerant();
        let second_order = (a.order == 2).then(|| SecondOrderSummary {
            pairs: e.n_pairs,
            skipped_pairs: e.n_skipped_pairs,
            failing_pairs: e.order2_failures.len(),
            c2_equal_rates: e.c2.at_equal_rates(),
            class_coefficients: ClassCoefficients {
                class0: e.c2.class_coefficient(ErrorClassFilter::Class0),
                class1: e.c2.class_coefficient(ErrorClassFilter::Class1),
                class2: e.c2.class_coefficient(ErrorClassFilter::Class2),
            },
            c2: e.c2.clone(),
        });
        report.protocols.push(ProtocolExpansion {
            protocol: p,
            fault_tolerant: failing == 0,
            single_faults: e.order1.len(),
            first_order_failures: failing,
            c1: e.c1,
            c1_equal_rates: e.c1.at_equal_rates(),
            second_order,
            first_order_terms: a.terms.then(|| e.order1_failures().copied().collect()),
            second_order_terms: (a.terms && a.order == 2).then(|| e.order2_failures.clone()),
        });
    }
    write_json(&report, resolve_out(a.out, &format!("fault-enum-order{}.json", a.order)).as_deref())?;
    Ok(if report.certified { 0 } else { 3 })
}

fn validate(a: ValidateArgs) -> Result<i32> {
    let lib = GadgetLibrary::standard();
    let report = validate_engines(&lib, a.circuits, a.seed)?;
    write_json(&report, None)?;
    if report.passed() {
        Ok(0)
    } else {
        eprintln!("error: frame engine and tableau disagree");
        Ok(3)
    }
}

fn figure(a: FigureArgs) -> Result<i32> {
    let lib = GadgetLibrary::standard();
    let mut opts = FigureOptions::new(a.seed);
    opts.budget = a.trials.map(TrialBudget::Fixed);
    opts.protocols = a.protocols;
    opts.rerun_cap = a.rerun_cap;
    let output = run_figure(a.name, &lib, &opts)?;

    let name = format!("{}.{}", a.name, a.output.format.unwrap_or_default());
    let out = resolve_out(a.output.out, &name);
    let format = resolve_format(a.output.format, out.as_deref());
    match out {
        Some(path) => output.table.write(&path, format)?,
        None => output.table.write_to(io::stdout().lock(), format).map_err(stdout_error)?,
    }
    if let Some(path) = a.records {
        write_records(&output.records, &path, Format::for_path(&path))?;
    }
    Ok(0)
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Contract(format!("serializing report: {e}")))?;
    match path {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.into(), source })?;
            }
            std::fs::write(path, text + "\n").map_err(|source| Error::Io { path: path.into(), source })
        }
        None => writeln!(io::stdout().lock(), "{text}").map_err(stdout_error),
    }
}
