//! Monte Carlo estimation of logical error rates.
//!
//! Each trial starts from a noiseless logical eigenstate (an identity frame),
//! runs one full QEC cycle with sampled faults and classifies the residual
//! with an ideal decode. Because the Pauli-frame evolution does not depend on
//! the encoded state, one trial yields the outcome for all three bases at
//! once: a logical X or Y residual fails the Z basis, and so on.
//!
//! Trial `i` of a stream draws its faults from a generator seeded by
//! `(master_seed, i, rerun)` alone, so results are identical for any
//! thread count or chunking.

use std::fmt;
use std::ops::{Add, AddAssign, Range};
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{ErrorClassFilter, GateErrorRates, SegmentSampler};
use crate::protocols::{run_full_qec, AncillaKind, Executor, GadgetLibrary, ProtocolKind, SampledFaults, SamplerSet};
use crate::steane::LogicalClass;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Trials per work unit; fixed so that chunking never affects results.
const CHUNK: u64 = 1 << 14;

/// Logical eigenstate basis of the input data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    /// Whether a residual logical Pauli flips this basis' observable.
    pub fn fails(self, outcome: LogicalClass) -> bool {
        use LogicalClass as L;
        match self {
            Basis::Z => matches!(outcome, L::X | L::Y),
            Basis::X => matches!(outcome, L::Z | L::Y),
            Basis::Y => matches!(outcome, L::X | L::Z),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Basis::X),
            "Y" | "y" => Ok(Basis::Y),
            "Z" | "z" => Ok(Basis::Z),
            _ => Err(Error::Config(format!("unknown basis `{s}`"))),
        }
    }
}

/// Everything that determines a stream of trials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub protocol: ProtocolKind,
    pub rates: GateErrorRates,
    pub filter: ErrorClassFilter,
    pub master_seed: u64,
    /// Reruns allowed per trial when every ancilla attempt is rejected.
    pub rerun_cap: u32,
}

impl TrialConfig {
    pub fn new(protocol: ProtocolKind, rates: GateErrorRates, master_seed: u64) -> Self {
        TrialConfig { protocol, rates, filter: ErrorClassFilter::All, master_seed, rerun_cap: 1000 }
    }
}

fn splitmix(x: u64) -> u64 {
    SplitMix64::seed_from_u64(x).next_u64()
}

/// Seed of attempt `rerun` of trial `trial` in the stream keyed by `master_seed`.
pub fn trial_seed(master_seed: u64, trial: u64, rerun: u32) -> u64 {
    let stream = splitmix(master_seed ^ splitmix(u64::from(rerun)));
    splitmix(stream.wrapping_add(trial))
}

/// Result of one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub outcome: LogicalClass,
    pub reruns: u32,
    pub verification_failures: u32,
}

impl TrialOutcome {
    pub fn fails(&self, basis: Basis) -> bool {
        basis.fails(self.outcome)
    }
}

/// Integer counts over a set of trials. Merging is exact, so any grouping of
/// trials gives the same totals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tally {
    pub trials: u64,
    /// Trials ending with each logical class, indexed I, X, Y, Z.
    pub outcomes: [u64; 4],
    pub reruns: u64,
    pub verification_failures: u64,
}

impl Tally {
    pub fn record(&mut self, t: &TrialOutcome) {
        self.trials += 1;
        self.outcomes[t.outcome as usize] += 1;
        self.reruns += u64::from(t.reruns);
        self.verification_failures += u64::from(t.verification_failures);
    }

    pub fn count(&self, c: LogicalClass) -> u64 {
        self.outcomes[c as usize]
    }

    /// Trials that fail in `basis`.
    pub fn failures(&self, basis: Basis) -> u64 {
        [LogicalClass::X, LogicalClass::Y, LogicalClass::Z]
            .into_iter()
            .filter(|&c| basis.fails(c))
            .map(|c| self.count(c))
            .sum()
    }

    /// Trials with any logical error.
    pub fn logical_failures(&self) -> u64 {
        self.trials - self.count(LogicalClass::I)
    }

    pub fn aggregate(&self, basis: Basis) -> AggregateResult {
        AggregateResult::new(self.trials, self.failures(basis), self.reruns, self.verification_failures)
    }

    /// The trial-level logical error rate, `P_L`, as a binomial proportion.
    pub fn combined(&self) -> AggregateResult {
        AggregateResult::new(self.trials, self.logical_failures(), self.reruns, self.verification_failures)
    }

    pub fn estimate(&self) -> PLEstimate {
        PLEstimate::from_tally(self)
    }
}

impl Add for Tally {
    type Output = Tally;
    fn add(mut self, rhs: Tally) -> Tally {
        self += rhs;
        self
    }
}

impl AddAssign for Tally {
    fn add_assign(&mut self, rhs: Tally) {
        self.trials += rhs.trials;
        for (a, b) in self.outcomes.iter_mut().zip(rhs.outcomes) {
            *a += b;
        }
        self.reruns += rhs.reruns;
        self.verification_failures += rhs.verification_failures;
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// A binomial rate with its 95% Wilson interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub trials: u64,
    pub logical_failures: u64,
    /// Extra attempts made because a trial's QEC was skipped; not in `trials`.
    pub reruns: u64,
    pub verification_failures: u64,
    pub rate: f64,
    pub ci: (f64, f64),
}

impl AggregateResult {
    pub fn new(trials: u64, failures: u64, reruns: u64, verification_failures: u64) -> Self {
        let rate = if trials == 0 { 0.0 } else { failures as f64 / trials as f64 };
        AggregateResult {
            trials,
            logical_failures: failures,
            reruns,
            verification_failures,
            rate,
            ci: wilson_interval(failures, trials, Z95),
        }
    }

    /// Whether the two 95% intervals are disjoint with `self` below `other`.
    pub fn separated_below(&self, other: &AggregateResult) -> bool {
        self.ci.1 < other.ci.0
    }
}

/// Logical error components from per-basis rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PLEstimate {
    /// Error rate on Z-basis eigenstates (`P_X + P_Y`).
    pub e_x: f64,
    /// Error rate on Y-basis eigenstates (`P_X + P_Z`).
    pub e_y: f64,
    /// Error rate on X-basis eigenstates (`P_Y + P_Z`).
    pub e_z: f64,
    pub p_l: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    /// 95% interval of `p_l`.
    pub ci: (f64, f64),
}

impl PLEstimate {
    /// Solves `E_X = P_X + P_Y`, `E_Y = P_X + P_Z`, `E_Z = P_Y + P_Z`. The
    /// components may come out negative when rates are noisy.
    pub fn from_rates(e_x: f64, e_y: f64, e_z: f64) -> Self {
        let p_l = (e_x + e_y + e_z) / 2.0;
        PLEstimate {
            e_x,
            e_y,
            e_z,
            p_l,
            p_x: (e_x + e_y - e_z) / 2.0,
            p_y: (e_x + e_z - e_y) / 2.0,
            p_z: (e_y + e_z - e_x) / 2.0,
            ci: (p_l, p_l),
        }
    }

    /// From three independent per-basis runs; the interval combines the
    /// Wilson half-widths in quadrature.
    pub fn from_bases(x_basis: &AggregateResult, y_basis: &AggregateResult, z_basis: &AggregateResult) -> Self {
        let mut est = PLEstimate::from_rates(z_basis.rate, y_basis.rate, x_basis.rate);
        let half = |a: &AggregateResult| (a.ci.1 - a.ci.0) / 2.0;
        let h = 0.5 * (half(x_basis).powi(2) + half(y_basis).powi(2) + half(z_basis).powi(2)).sqrt();
        est.ci = ((est.p_l - h).max(0.0), est.p_l + h);
        est
    }

    /// From a joint run: `P_L` is then a plain binomial proportion.
    pub fn from_tally(t: &Tally) -> Self {
        let n = t.trials.max(1) as f64;
        let mut est = PLEstimate::from_rates(
            t.failures(Basis::Z) as f64 / n,
            t.failures(Basis::Y) as f64 / n,
            t.failures(Basis::X) as f64 / n,
        );
        est.ci = t.combined().ci;
        est
    }
}

/// Runs trials of one configuration against a shared gadget library.
#[derive(Debug)]
pub struct TrialRunner<'a> {
    lib: &'a GadgetLibrary,
    samplers: SamplerSet,
    config: TrialConfig,
}

impl<'a> TrialRunner<'a> {
    pub fn new(lib: &'a GadgetLibrary, config: TrialConfig) -> Result<Self> {
        config.rates.validate()?;
        Ok(TrialRunner { lib, samplers: SamplerSet::new(lib, &config.rates, config.filter), config })
    }

    pub fn config(&self) -> &TrialConfig {
        &self.config
    }

    /// Runs trial `index`, rerunning with fresh streams while QEC is skipped.
    pub fn run_trial(&self, index: u64) -> Result<TrialOutcome> {
        let mut exec = Executor::new(self.lib, self.source(index, 0));
        self.run_trial_with(&mut exec, index)
    }

    fn source(&self, index: u64, rerun: u32) -> SampledFaults<'_, Xoshiro256PlusPlus> {
        let rng = Xoshiro256PlusPlus::seed_from_u64(trial_seed(self.config.master_seed, index, rerun));
        SampledFaults { samplers: &self.samplers, rng }
    }

    fn run_trial_with(
        &self,
        exec: &mut Executor<'_, SampledFaults<'_, Xoshiro256PlusPlus>>,
        index: u64,
    ) -> Result<TrialOutcome> {
        let mut verification_failures = 0;
        for rerun in 0..=self.config.rerun_cap {
            exec.set_frame(Default::default());
            exec.source_mut().rng =
                Xoshiro256PlusPlus::seed_from_u64(trial_seed(self.config.master_seed, index, rerun));
            let out = run_full_qec(exec, self.config.protocol)?;
            verification_failures += out.verification_failures;
            if !out.skipped {
                return Ok(TrialOutcome { outcome: exec.logical_outcome(), reruns: rerun, verification_failures });
            }
        }
        Err(Error::RerunCap { trial: index, reruns: self.config.rerun_cap + 1, cap: self.config.rerun_cap })
    }

    /// Tallies trials `range` sequentially.
    pub fn run_range(&self, range: Range<u64>) -> Result<Tally> {
        let mut tally = Tally::default();
        let mut exec = Executor::new(self.lib, self.source(range.start, 0));
        for i in range {
            tally.record(&self.run_trial_with(&mut exec, i)?);
        }
        Ok(tally)
    }

    /// Tallies trials `range` across the current rayon pool.
    pub fn run_range_parallel(&self, range: Range<u64>) -> Result<Tally> {
        let chunks: Vec<Range<u64>> = (range.start..range.end)
            .step_by(CHUNK as usize)
            .map(|s| s..(s + CHUNK).min(range.end))
            .collect();
        chunks
            .into_par_iter()
            .map(|c| self.run_range(c))
            .try_reduce(Tally::default, |a, b| Ok(a + b))
    }

    /// Runs `trials` trials starting at index 0.
    pub fn run(&self, trials: u64) -> Result<Tally> {
        self.run_range_parallel(0..trials)
    }

    /// Runs batches of doubling size until at least `min_failures` trials
    /// fail or `max_trials` have run. The batch schedule depends only on the
    /// counts, so the result is deterministic.
    pub fn run_until(&self, min_failures: u64, max_trials: u64) -> Result<Tally> {
        let mut tally = Tally::default();
        let mut batch = CHUNK * 4;
        while tally.logical_failures() < min_failures && tally.trials < max_trials {
            let end = (tally.trials + batch).min(max_trials);
            tally += self.run_range_parallel(tally.trials..end)?;
            batch = (batch * 2).min(CHUNK * 4096);
        }
        Ok(tally)
    }
}

/// How many trials a sweep point gets. In JSON either a plain trial count
/// or `{"min_failures": .., "max_trials": ..}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrialBudget {
    Fixed(u64),
    /// Stop after `min_failures` logical failures or `max_trials` trials.
    UntilFailures { min_failures: u64, max_trials: u64 },
}

impl TrialBudget {
    pub fn run(&self, runner: &TrialRunner<'_>) -> Result<Tally> {
        match *self {
            TrialBudget::Fixed(n) => runner.run(n),
            TrialBudget::UntilFailures { min_failures, max_trials } => runner.run_until(min_failures, max_trials),
        }
    }
}

/// Trials needed for `target` expected failures at predicted rate `p_l`.
pub fn plan_trials(p_l: f64, target: u64) -> u64 {
    if p_l <= 0.0 {
        return u64::MAX;
    }
    (target as f64 / p_l).ceil() as u64
}

/// Result of one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub protocol: ProtocolKind,
    pub rates: GateErrorRates,
    pub filter: ErrorClassFilter,
    pub master_seed: u64,
    pub tally: Tally,
    pub estimate: PLEstimate,
}

/// A grid of rates × protocols × filters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub points: Vec<GateErrorRates>,
    pub protocols: Vec<ProtocolKind>,
    pub filters: Vec<ErrorClassFilter>,
    pub budget: TrialBudget,
    pub master_seed: u64,
    pub rerun_cap: u32,
}

/// Runs every (point, protocol, filter) combination in grid order.
pub fn run_sweep(lib: &GadgetLibrary, spec: &SweepSpec) -> Result<Vec<PointResult>> {
    if spec.points.is_empty() || spec.protocols.is_empty() || spec.filters.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let mut out = Vec::new();
    for rates in &spec.points {
        for &protocol in &spec.protocols {
            for &filter in &spec.filters {
                let config =
                    TrialConfig { protocol, rates: *rates, filter, master_seed: spec.master_seed, rerun_cap: spec.rerun_cap };
                let runner = TrialRunner::new(lib, config)?;
                let tally = spec.budget.run(&runner)?;
                out.push(PointResult {
                    protocol,
                    rates: *rates,
                    filter,
                    master_seed: spec.master_seed,
                    estimate: tally.estimate(),
                    tally,
                });
            }
        }
    }
    Ok(out)
}

/// Fraction of |0_L⟩ preparations rejected by verification.
pub fn ancilla_failure_rate(
    lib: &GadgetLibrary,
    rates: &GateErrorRates,
    trials: u64,
    master_seed: u64,
) -> Result<AggregateResult> {
    rates.validate()?;
    let id = lib.round(AncillaKind::Zero).prep_verify;
    let sampler = SegmentSampler::new(&lib.segment(id).circuit, rates, ErrorClassFilter::All);
    let chunks: Vec<Range<u64>> = (0..trials).step_by(CHUNK as usize).map(|s| s..(s + CHUNK).min(trials)).collect();
    let rejected = chunks
        .into_par_iter()
        .map(|range| -> Result<u64> {
            let mut rejected = 0;
            let mut faults = Vec::new();
            for i in range {
                let mut rng = Xoshiro256PlusPlus::seed_from_u64(trial_seed(master_seed, i, 0));
                faults.clear();
                sampler.sample_into(&mut rng, &mut faults);
                if faults.is_empty() {
                    continue;
                }
                let (_, rec) = crate::frame::propagate(&lib.segment(id).circuit, &faults)?;
                rejected += u64::from(!lib.accepted(AncillaKind::Zero, &rec));
            }
            Ok(rejected)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(AggregateResult::new(trials, rejected, 0, rejected))
}

/// Ordinary least-squares line through `(x, y)` points; returns
/// `(slope, intercept, r_squared)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_failure_rules() {
        use LogicalClass as L;
        assert!(Basis::Z.fails(L::X) && Basis::Z.fails(L::Y) && !Basis::Z.fails(L::Z));
        assert!(Basis::X.fails(L::Z) && Basis::X.fails(L::Y) && !Basis::X.fails(L::X));
        assert!(Basis::Y.fails(L::X) && Basis::Y.fails(L::Z) && !Basis::Y.fails(L::Y));
        for b in Basis::ALL {
            assert!(!b.fails(L::I));
        }
    }

    #[test]
    fn pl_from_rates() {
        let e = PLEstimate::from_rates(0.0, 0.0, 0.0);
        assert_eq!(e.p_l, 0.0);
        let e = PLEstimate::from_rates(0.002, 0.002, 0.002);
        assert!((e.p_l - 0.003).abs() < 1e-15);
        for p in [e.p_x, e.p_y, e.p_z] {
            assert!((p - 0.001).abs() < 1e-15);
        }
        // E_X = E_Y = e, E_Z = 0 is a pure logical-X error
        let e = PLEstimate::from_rates(0.01, 0.01, 0.0);
        assert!((e.p_x - 0.01).abs() < 1e-15);
        assert!(e.p_y.abs() < 1e-15 && e.p_z.abs() < 1e-15);
    }

    #[test]
    fn wilson_contains_rate() {
        for (k, n) in [(0, 10), (1, 10), (5, 10), (10, 10), (3, 1_000_000)] {
            let (lo, hi) = wilson_interval(k, n, Z95);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi, "{k}/{n}");
        }
        // textbook value: 0 of 10 → upper bound ≈ 0.2775
        assert!((wilson_interval(0, 10, Z95).1 - 0.2775).abs() < 1e-4);
    }

    #[test]
    fn zero_rates_never_fail() {
        let lib = GadgetLibrary::standard();
        for p in ProtocolKind::ALL {
            let runner = TrialRunner::new(&lib, TrialConfig::new(p, GateErrorRates::zero(), 1)).unwrap();
            let t = runner.run(1000).unwrap();
            assert_eq!(t.trials, 1000);
            assert_eq!(t.logical_failures(), 0);
            assert_eq!(t.reruns, 0);
        }
    }

    #[test]
    fn results_do_not_depend_on_chunking() {
        let lib = GadgetLibrary::standard();
        let cfg = TrialConfig::new(ProtocolKind::TwoAncillaSeries, GateErrorRates::uniform(3e-3), 7);
        let runner = TrialRunner::new(&lib, cfg).unwrap();
        let whole = runner.run_range(0..40_000).unwrap();
        let split = runner.run_range(0..12_345).unwrap() + runner.run_range(12_345..40_000).unwrap();
        assert_eq!(whole, split);
        assert_eq!(whole, runner.run(40_000).unwrap());
        assert!(whole.logical_failures() > 0);
        assert!(whole.reruns > 0);
    }

    #[test]
    fn single_trial_matches_range() {
        let lib = GadgetLibrary::standard();
        let cfg = TrialConfig::new(ProtocolKind::Decoding, GateErrorRates::uniform(1e-2), 3);
        let runner = TrialRunner::new(&lib, cfg).unwrap();
        let mut t = Tally::default();
        for i in 100..400 {
            t.record(&runner.run_trial(i).unwrap());
        }
        assert_eq!(t, runner.run_range(100..400).unwrap());
    }

    #[test]
    fn ancilla_failure_rate_zero_at_zero_noise() {
        let lib = GadgetLibrary::standard();
        let r = ancilla_failure_rate(&lib, &GateErrorRates::zero(), 1000, 1).unwrap();
        assert_eq!(r.logical_failures, 0);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let pts: Vec<(f64, f64)> = (1..5).map(|i| (i as f64, 3.0 * i as f64 + 1.0)).collect();
        let (m, c, r2) = linear_fit(&pts);
        assert!((m - 3.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
