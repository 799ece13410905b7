//! Run configuration, result records and plot-ready tables.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{AggregateResult, Basis, PointResult, SweepSpec, TrialBudget};
use crate::noise::{ErrorClassFilter, GateErrorRates};
use crate::protocols::{ProtocolKind, ProtocolOptions};

/// Output encoding of records and tables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    /// `json` for a `.json` extension, otherwise CSV.
    pub fn for_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown output format `{s}` (expected csv or json)"))),
        }
    }
}

/// One output row: a per-basis error rate, or the combined `P_L` when
/// `basis` is `combined`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub protocol: ProtocolKind,
    pub p_prep: f64,
    pub p_meas: f64,
    pub p_wait: f64,
    pub p_cnot: f64,
    pub filter: ErrorClassFilter,
    pub basis: String,
    pub trials: u64,
    pub failures: u64,
    pub reruns: u64,
    pub verification_failures: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
}

pub const COMBINED: &str = "combined";

impl ResultRecord {
    fn new(point: &PointResult, basis: String, agg: &AggregateResult) -> Self {
        ResultRecord {
            protocol: point.protocol,
            p_prep: point.rates.p_prep,
            p_meas: point.rates.p_meas,
            p_wait: point.rates.p_wait,
            p_cnot: point.rates.p_cnot,
            filter: point.filter,
            basis,
            trials: agg.trials,
            failures: agg.logical_failures,
            reruns: agg.reruns,
            verification_failures: agg.verification_failures,
            rate: agg.rate,
            ci_low: agg.ci.0,
            ci_high: agg.ci.1,
            master_seed: point.master_seed,
        }
    }

    /// The three per-basis records of a sweep point followed by the combined one.
    pub fn from_point(point: &PointResult) -> Vec<ResultRecord> {
        let mut out: Vec<ResultRecord> =
            Basis::ALL.iter().map(|&b| ResultRecord::new(point, b.to_string(), &point.tally.aggregate(b))).collect();
        out.push(ResultRecord::new(point, COMBINED.into(), &point.tally.combined()));
        out
    }

    pub fn from_points(points: &[PointResult]) -> Vec<ResultRecord> {
        points.iter().flat_map(ResultRecord::from_point).collect()
    }

    pub fn rates(&self) -> GateErrorRates {
        GateErrorRates { p_prep: self.p_prep, p_meas: self.p_meas, p_wait: self.p_wait, p_cnot: self.p_cnot }
    }
}

const RECORD_HEADER: [&str; 15] = [
    "protocol",
    "p_prep",
    "p_meas",
    "p_wait",
    "p_cnot",
    "filter",
    "basis",
    "trials",
    "failures",
    "reruns",
    "verification_failures",
    "rate",
    "ci_low",
    "ci_high",
    "master_seed",
];

fn csv_error(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::new(io::ErrorKind::InvalidData, format!("{other:?}")),
    }
}

/// Writes records as CSV (header always present) or a JSON array.
pub fn write_records_to<W: Write>(records: &[ResultRecord], out: W, format: Format) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(RECORD_HEADER).map_err(csv_error)?;
            for r in records {
                w.serialize(r).map_err(csv_error)?;
            }
            w.flush()
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)
        }
    }
}

pub fn write_records(records: &[ResultRecord], path: &Path, format: Format) -> Result<()> {
    with_file(path, |w| write_records_to(records, w, format))
}

pub fn read_records(path: &Path, format: Format) -> Result<Vec<ResultRecord>> {
    let file = File::open(path).map_err(|source| Error::Io { path: path.into(), source })?;
    let bad = |message: String| Error::Format { path: path.into(), message };
    match format {
        Format::Csv => csv::Reader::from_reader(file)
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(e.to_string())),
        Format::Json => serde_json::from_reader(io::BufReader::new(file)).map_err(|e| bad(e.to_string())),
    }
}

fn with_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<()> {
    let io_err = |source| Error::Io { path: path.into(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err)
}

/// A plain numeric table with named columns.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// CSV with shortest round-trip number formatting, or JSON
    /// `{"columns": [...], "rows": [[...]]}`.
    pub fn write_to<W: Write>(&self, out: W, format: Format) -> io::Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns).map_err(csv_error)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(|v| format!("{v:?}"))).map_err(csv_error)?;
                }
                w.flush()
            }
            Format::Json => {
                let mut out = out;
                serde_json::to_writer_pretty(&mut out, self)?;
                writeln!(out)
            }
        }
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        with_file(path, |w| self.write_to(w, format))
    }
}

/// `n` log-spaced values from `start` to `stop` inclusive.
pub fn log_range(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (a, b) = (start.ln(), stop.ln());
            (0..n)
                .map(|i| match i {
                    0 => start,
                    i if i == n - 1 => stop,
                    i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
                })
                .collect()
        }
    }
}

/// One rate axis of a grid: explicit values or a log range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    LogRange { log_start: f64, log_stop: f64, points: usize },
}

impl Axis {
    /// Explicit sorted, deduplicated values.
    pub fn expand(&self) -> Result<Vec<f64>> {
        let mut v = match self {
            Axis::Values(v) => v.clone(),
            Axis::LogRange { log_start, log_stop, points } => {
                if !(*log_start > 0.0 && *log_stop >= *log_start) || *points == 0 {
                    return Err(Error::Config(format!(
                        "log range needs 0 < log_start <= log_stop and points > 0, got {log_start}..{log_stop} x {points}"
                    )));
                }
                log_range(*log_start, *log_stop, *points)
            }
        };
        if let Some(bad) = v.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Config(format!("rate {bad} outside [0, 1]")));
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        if v.is_empty() {
            return Err(Error::Config("empty rate axis".into()));
        }
        Ok(v)
    }
}

/// Grid of rate points: either one `uniform` axis (all four rates equal) or
/// a product of per-rate axes, where a missing axis means rate 0.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_prep: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_meas: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_wait: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_cnot: Option<Axis>,
}

impl GridSpec {
    pub fn uniform(values: Vec<f64>) -> Self {
        GridSpec { uniform: Some(Axis::Values(values)), ..GridSpec::default() }
    }

    /// Points in order, the last listed axis (`p_cnot`) varying fastest.
    pub fn expand(&self) -> Result<Vec<GateErrorRates>> {
        let per_rate = [&self.p_prep, &self.p_meas, &self.p_wait, &self.p_cnot];
        if let Some(u) = &self.uniform {
            if per_rate.iter().any(|a| a.is_some()) {
                return Err(Error::Config("grid: `uniform` cannot be combined with per-rate axes".into()));
            }
            return Ok(u.expand()?.into_iter().map(GateErrorRates::uniform).collect());
        }
        let axes = per_rate
            .iter()
            .map(|a| a.as_ref().map_or(Ok(vec![0.0]), Axis::expand))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::new();
        for &p_prep in &axes[0] {
            for &p_meas in &axes[1] {
                for &p_wait in &axes[2] {
                    for &p_cnot in &axes[3] {
                        out.push(GateErrorRates { p_prep, p_meas, p_wait, p_cnot });
                    }
                }
            }
        }
        Ok(out)
    }
}

fn default_filters() -> Vec<ErrorClassFilter> {
    vec![ErrorClassFilter::All]
}

/// Declarative description of a sweep, loaded from JSON. Command-line flags
/// override individual fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub protocols: Vec<ProtocolKind>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "default_filters")]
    pub filters: Vec<ErrorClassFilter>,
    #[serde(default)]
    pub trials: Option<TrialBudget>,
    #[serde(default)]
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub rerun_cap: Option<u32>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub options: ProtocolOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            protocols: Vec::new(),
            grid: GridSpec::default(),
            filters: default_filters(),
            trials: None,
            master_seed: None,
            rerun_cap: None,
            out: None,
            format: None,
            options: ProtocolOptions::default(),
        }
    }
}

pub const DEFAULT_RERUN_CAP: u32 = 1000;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Resolves the grid and checks that everything a run needs is present.
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let master_seed = self.master_seed.ok_or_else(|| Error::Config("a master seed is required".into()))?;
        let budget = self.trials.ok_or_else(|| Error::Config("a trial budget is required".into()))?;
        if self.protocols.is_empty() {
            return Err(Error::Config("no protocols selected".into()));
        }
        if self.filters.is_empty() {
            return Err(Error::Config("no error-class filters selected".into()));
        }
        if self.grid == GridSpec::default() {
            return Err(Error::Config("the rate grid is empty".into()));
        }
        Ok(SweepSpec {
            points: self.grid.expand()?,
            protocols: self.protocols.clone(),
            filters: self.filters.clone(),
            budget,
            master_seed,
            rerun_cap: self.rerun_cap.unwrap_or(DEFAULT_RERUN_CAP),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_range_hits_endpoints() {
        let v = log_range(1e-5, 1e-4, 10);
        assert_eq!(v.len(), 10);
        assert_eq!(v[0], 1e-5);
        assert_eq!(v[9], 1e-4);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert!((v[1] / v[0] - 10f64.powf(1.0 / 9.0)).abs() < 1e-12);
    }

    #[test]
    fn axes_sort_and_dedup() {
        assert_eq!(Axis::Values(vec![3e-4, 1e-5, 3e-4]).expand().unwrap(), vec![1e-5, 3e-4]);
        assert!(Axis::Values(vec![1.5]).expand().is_err());
        assert!(Axis::LogRange { log_start: 0.0, log_stop: 1e-4, points: 3 }.expand().is_err());
    }

    #[test]
    fn grid_product_order() {
        let g: GridSpec = serde_json::from_str(
            r#"{"p_prep": [1e-5], "p_meas": [1e-5], "p_wait": [1e-5, 3e-4], "p_cnot": {"log_start": 1e-5, "log_stop": 3e-4, "points": 3}}"#,
        )
        .unwrap();
        let pts = g.expand().unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[0].p_wait, pts[0].p_cnot), (1e-5, 1e-5));
        assert_eq!((pts[2].p_wait, pts[2].p_cnot), (1e-5, 3e-4));
        assert_eq!(pts[3].p_wait, 3e-4);
    }

    #[test]
    fn uniform_excludes_per_rate_axes() {
        let g: GridSpec = serde_json::from_str(r#"{"uniform": [1e-4], "p_cnot": [1e-5]}"#).unwrap();
        assert!(g.expand().is_err());
    }

    #[test]
    fn config_requires_seed_and_budget() {
        let mut c: RunConfig =
            serde_json::from_str(r#"{"protocols": ["decoding"], "grid": {"uniform": [0]}, "trials": 10}"#).unwrap();
        assert!(matches!(c.sweep_spec(), Err(Error::Config(_))));
        c.master_seed = Some(1);
        let spec = c.sweep_spec().unwrap();
        assert_eq!(spec.budget, TrialBudget::Fixed(10));
        assert_eq!(spec.rerun_cap, DEFAULT_RERUN_CAP);
        let c: RunConfig = serde_json::from_str(
            r#"{"protocols": ["simple-series"], "grid": {"uniform": [1e-4]}, "master_seed": 3,
                "trials": {"min_failures": 5, "max_trials": 100}}"#,
        )
        .unwrap();
        assert_eq!(c.sweep_spec().unwrap().budget, TrialBudget::UntilFailures { min_failures: 5, max_trials: 100 });
        assert!(serde_json::from_str::<RunConfig>(r#"{"protocol": ["decoding"]}"#).is_err());
    }

    #[test]
    fn empty_records_give_header_only_csv() {
        let mut buf = Vec::new();
        write_records_to(&[], &mut buf, Format::Csv).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", RECORD_HEADER.join(",")));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(Format::for_path(Path::new("a/b.JSON")), Format::Json);
        assert_eq!(Format::for_path(Path::new("a/b.csv")), Format::Csv);
        assert_eq!(Format::for_path(Path::new("a/b")), Format::Csv);
    }

    #[test]
    fn table_csv_numbers_round_trip() {
        let mut t = Table::new(["p", "P_L"]);
        t.push(vec![1e-5, 1.0 / 3.0]);
        let mut buf = Vec::new();
        t.write_to(&mut buf, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().nth(1).unwrap();
        let parsed: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(parsed, vec![1e-5, 1.0 / 3.0]);
        assert_eq!(t.column("P_L"), Some(vec![1.0 / 3.0]));
    }
}
