//! Preset sweeps behind each results figure, emitted as plot-ready tables.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::experiments::{ancilla_failure_rate, run_sweep, PointResult, SweepSpec, TrialBudget};
use crate::noise::{ErrorClassFilter, GateErrorRates};
use crate::oracle::ancilla_rejection_weight;
use crate::protocols::{AncillaKind, GadgetLibrary, ProtocolKind};
use crate::report::{log_range, ResultRecord, Table, DEFAULT_RERUN_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Figure {
    /// `P_L` against a single equal rate for decoding and both verification variants.
    Compare,
    /// Rejection rate of verified |0_L⟩ preparation against p.
    Ancilla,
    /// `P_L` with one error class switched on at a time.
    Classes,
    /// `P_L` over the CNOT × wait rate plane, other rates fixed.
    Surface,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::Compare, Figure::Ancilla, Figure::Classes, Figure::Surface];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Compare => "compare",
            Figure::Ancilla => "ancilla",
            Figure::Classes => "classes",
            Figure::Surface => "surface",
        }
    }

    /// Protocols the preset runs unless overridden.
    pub fn default_protocols(self) -> Vec<ProtocolKind> {
        match self {
            Figure::Compare | Figure::Classes => {
                vec![ProtocolKind::Decoding, ProtocolKind::SimpleSeries, ProtocolKind::NaiveNoWait]
            }
            Figure::Ancilla => Vec::new(),
            Figure::Surface => vec![ProtocolKind::TwoAncillaSeries, ProtocolKind::Decoding],
        }
    }

    /// Trials per point unless overridden.
    pub fn default_budget(self) -> TrialBudget {
        match self {
            Figure::Compare | Figure::Surface => TrialBudget::UntilFailures { min_failures: 100, max_trials: 100_000_000 },
            Figure::Classes => TrialBudget::UntilFailures { min_failures: 100, max_trials: 20_000_000 },
            Figure::Ancilla => TrialBudget::Fixed(20_000_000),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown figure `{s}` (expected compare, ancilla, classes or surface)")))
    }
}

/// Equal-rate grid of the comparison and class figures.
pub fn compare_grid() -> Vec<f64> {
    log_range(1e-5, 1e-4, 10)
}

pub const ANCILLA_GRID: [f64; 4] = [1e-5, 2e-5, 4e-5, 8e-5];

/// Each axis of the CNOT × wait plane.
pub fn surface_axis() -> Vec<f64> {
    log_range(1e-5, 3e-4, 5)
}

/// Rate of the gates not varied on the surface.
pub const SURFACE_FIXED_RATE: f64 = 1e-5;

/// Surface points, `p_wait` varying fastest.
pub fn surface_points() -> Vec<GateErrorRates> {
    let axis = surface_axis();
    let mut out = Vec::new();
    for &p_cnot in &axis {
        for &p_wait in &axis {
            out.push(GateErrorRates { p_prep: SURFACE_FIXED_RATE, p_meas: SURFACE_FIXED_RATE, p_wait, p_cnot });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigureOptions {
    pub master_seed: u64,
    pub budget: Option<TrialBudget>,
    pub protocols: Option<Vec<ProtocolKind>>,
    pub rerun_cap: u32,
}

impl FigureOptions {
    pub fn new(master_seed: u64) -> Self {
        FigureOptions { master_seed, budget: None, protocols: None, rerun_cap: DEFAULT_RERUN_CAP }
    }

    pub fn with_budget(mut self, budget: TrialBudget) -> Self {
        self.budget = Some(budget);
        self
    }
}

/// A figure's table and, for the `P_L` figures, the records behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureOutput {
    pub table: Table,
    pub records: Vec<ResultRecord>,
}

pub fn run_figure(fig: Figure, lib: &GadgetLibrary, opts: &FigureOptions) -> Result<FigureOutput> {
    match fig {
        Figure::Ancilla => ancilla(lib, opts),
        Figure::Compare => compare(lib, opts),
        Figure::Classes => classes(lib, opts),
        Figure::Surface => surface(lib, opts),
    }
}

fn sweep(
    lib: &GadgetLibrary,
    fig: Figure,
    opts: &FigureOptions,
    points: Vec<GateErrorRates>,
    filters: Vec<ErrorClassFilter>,
) -> Result<(Vec<ProtocolKind>, Vec<PointResult>)> {
    let protocols = opts.protocols.clone().unwrap_or_else(|| fig.default_protocols());
    let spec = SweepSpec {
        points,
        protocols: protocols.clone(),
        filters,
        budget: opts.budget.unwrap_or_else(|| fig.default_budget()),
        master_seed: opts.master_seed,
        rerun_cap: opts.rerun_cap,
    };
    Ok((protocols, run_sweep(lib, &spec)?))
}

fn pl_columns(prefix: &str) -> [String; 3] {
    [format!("P_L_{prefix}"), format!("ci_low_{prefix}"), format!("ci_high_{prefix}")]
}

fn pl_cells(r: &PointResult) -> [f64; 3] {
    let c = r.tally.combined();
    [c.rate, c.ci.0, c.ci.1]
}

/// Columns `p`, then `P_L_<protocol>`, `ci_low_<protocol>`, `ci_high_<protocol>`.
pub fn compare(lib: &GadgetLibrary, opts: &FigureOptions) -> Result<FigureOutput> {
    let grid = compare_grid();
    let points = grid.iter().map(|&p| GateErrorRates::uniform(p)).collect();
    let (protocols, results) = sweep(lib, Figure::Compare, opts, points, vec![ErrorClassFilter::All])?;
    let mut table = Table::new(std::iter::once("p".to_string()).chain(protocols.iter().flat_map(|p| pl_columns(p.name()))));
    for (i, &p) in grid.iter().enumerate() {
        let mut row = vec![p];
        for r in &results[i * protocols.len()..(i + 1) * protocols.len()] {
            row.extend(pl_cells(r));
        }
        table.push(row);
    }
    Ok(FigureOutput { table, records: ResultRecord::from_points(&results) })
}

/// Columns `p`, then one `P_L` triple per (protocol, class), named
/// `<protocol>_<class>`.
pub fn classes(lib: &GadgetLibrary, opts: &FigureOptions) -> Result<FigureOutput> {
    let grid = compare_grid();
    let points = grid.iter().map(|&p| GateErrorRates::uniform(p)).collect();
    let filters = ErrorClassFilter::CLASSES.to_vec();
    let (protocols, results) = sweep(lib, Figure::Classes, opts, points, filters.clone())?;
    let names = protocols.iter().flat_map(|p| filters.iter().flat_map(move |f| pl_columns(&format!("{}_{}", p.name(), f))));
    let mut table = Table::new(std::iter::once("p".to_string()).chain(names));
    let per_point = protocols.len() * filters.len();
    for (i, &p) in grid.iter().enumerate() {
        let mut row = vec![p];
        for r in &results[i * per_point..(i + 1) * per_point] {
            row.extend(pl_cells(r));
        }
        table.push(row);
    }
    Ok(FigureOutput { table, records: ResultRecord::from_points(&results) })
}

/// Columns `p_cnot`, `p_wait`, then one `P_L` triple per protocol.
pub fn surface(lib: &GadgetLibrary, opts: &FigureOptions) -> Result<FigureOutput> {
    let points = surface_points();
    let (protocols, results) = sweep(lib, Figure::Surface, opts, points.clone(), vec![ErrorClassFilter::All])?;
    let names = protocols.iter().flat_map(|p| pl_columns(p.name()));
    let mut table = Table::new(["p_cnot".to_string(), "p_wait".to_string()].into_iter().chain(names));
    for (i, rates) in points.iter().enumerate() {
        let mut row = vec![rates.p_cnot, rates.p_wait];
        for r in &results[i * protocols.len()..(i + 1) * protocols.len()] {
            row.extend(pl_cells(r));
        }
        table.push(row);
    }
    Ok(FigureOutput { table, records: ResultRecord::from_points(&results) })
}

/// Columns `p`, `attempts`, `rejected`, `rate`, `ci_low`, `ci_high` and
/// `first_order` (the exact linear rejection rate).
pub fn ancilla(lib: &GadgetLibrary, opts: &FigureOptions) -> Result<FigureOutput> {
    let attempts = match opts.budget.unwrap_or_else(|| Figure::Ancilla.default_budget()) {
        TrialBudget::Fixed(n) => n,
        TrialBudget::UntilFailures { max_trials, .. } => max_trials,
    };
    let slope = ancilla_rejection_weight(lib, AncillaKind::Zero)?;
    let mut table = Table::new(["p", "attempts", "rejected", "rate", "ci_low", "ci_high", "first_order"]);
    for p in ANCILLA_GRID {
        let rates = GateErrorRates::uniform(p);
        let r = ancilla_failure_rate(lib, &rates, attempts, opts.master_seed)?;
        table.push(vec![p, r.trials as f64, r.logical_failures as f64, r.rate, r.ci.0, r.ci.1, slope.evaluate(&rates)]);
    }
    Ok(FigureOutput { table, records: Vec::new() })
}
