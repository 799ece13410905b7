//! Exact first- and second-order fault expansions of a full QEC cycle.
//!
//! Every single fault, and every unordered pair of faults, is placed on the
//! path the protocol actually takes: the second fault of a pair is drawn
//! from the segments executed once the first fault has acted, so retries,
//! waits and swaps triggered by the first fault are enumerated too.

use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::noise::{enumerate_fault_space, ErrorClassFilter, FaultEvent, GateErrorRates, RateKind, Weight};
use crate::protocols::{run_full_qec, AncillaKind, Executor, GadgetLibrary, InjectedFaults, ProtocolKind, SegmentId};
use crate::steane::LogicalClass;

/// Common denominator of every second-order weight: `15 · 15`.
pub const PAIR_DENOMINATOR: u64 = 225;

/// Common denominator of every first-order weight.
pub const SINGLE_DENOMINATOR: u64 = 15;

const KIND_NAMES: [&str; 4] = ["p_prep", "p_meas", "p_wait", "p_cnot"];

/// Exact quadratic form `Σ_{i≤j} (c_ij / 225) p_i p_j` in the four rates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct RatePolynomial {
    numerators: [[u64; 4]; 4],
}

impl RatePolynomial {
    /// Adds the monomial of a pair of fault weights.
    pub fn add_pair(&mut self, a: Weight, b: Weight) {
        let (i, j) = (a.kind.index().min(b.kind.index()), a.kind.index().max(b.kind.index()));
        self.numerators[i][j] += PAIR_DENOMINATOR / u64::from(a.denominator * b.denominator);
    }

    /// Numerator (over 225) of `p_a · p_b`.
    pub fn numerator(&self, a: RateKind, b: RateKind) -> u64 {
        let (i, j) = (a.index().min(b.index()), a.index().max(b.index()));
        self.numerators[i][j]
    }

    pub fn evaluate(&self, rates: &GateErrorRates) -> f64 {
        self.terms().map(|(a, b, n)| n as f64 / PAIR_DENOMINATOR as f64 * rates.get(a) * rates.get(b)).sum()
    }

    /// Numerator of the coefficient of `p²` when every rate equals `p`.
    pub fn equal_rate_numerator(&self) -> u64 {
        self.terms().map(|(_, _, n)| n).sum()
    }

    /// Coefficient of `p²` when every rate equals `p`.
    pub fn at_equal_rates(&self) -> f64 {
        self.equal_rate_numerator() as f64 / PAIR_DENOMINATOR as f64
    }

    /// Equal-rate coefficient restricted to monomials whose two rates both
    /// belong to `filter`'s class: the second-order rate with only that class
    /// switched on.
    pub fn class_coefficient(&self, filter: ErrorClassFilter) -> f64 {
        self.terms()
            .filter(|&(a, b, _)| filter.enables(a) && filter.enables(b))
            .map(|(_, _, n)| n)
            .sum::<u64>() as f64
            / PAIR_DENOMINATOR as f64
    }

    /// Nonzero monomials as `(rate, rate, numerator over 225)`.
    pub fn terms(&self) -> impl Iterator<Item = (RateKind, RateKind, u64)> + '_ {
        (0..4).flat_map(move |i| {
            (i..4).filter_map(move |j| {
                let n = self.numerators[i][j];
                (n != 0).then(|| (RateKind::ALL[i], RateKind::ALL[j], n))
            })
        })
    }

    pub fn is_zero(&self) -> bool {
        self.terms().next().is_none()
    }
}

impl std::ops::AddAssign<&RatePolynomial> for RatePolynomial {
    fn add_assign(&mut self, rhs: &RatePolynomial) {
        for i in 0..4 {
            for j in 0..4 {
                self.numerators[i][j] += rhs.numerators[i][j];
            }
        }
    }
}

impl fmt::Display for RatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(a, b, n)| {
                let mono = if a == b {
                    format!("{}^2", KIND_NAMES[a.index()])
                } else {
                    format!("{}*{}", KIND_NAMES[a.index()], KIND_NAMES[b.index()])
                };
                format!("{n}/{PAIR_DENOMINATOR} {mono}")
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[derive(Serialize)]
struct MonomialRecord {
    monomial: String,
    numerator: u64,
    denominator: u64,
    value: f64,
}

impl Serialize for RatePolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<MonomialRecord> = self
            .terms()
            .map(|(a, b, n)| MonomialRecord {
                monomial: format!("{}*{}", KIND_NAMES[a.index()], KIND_NAMES[b.index()]),
                numerator: n,
                denominator: PAIR_DENOMINATOR,
                value: n as f64 / PAIR_DENOMINATOR as f64,
            })
            .collect();
        terms.serialize(s)
    }
}

/// Exact linear form `Σ (c_i / 15) p_i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LinearPolynomial {
    pub numerators: [u64; 4],
}

impl LinearPolynomial {
    pub fn add(&mut self, w: Weight) {
        self.numerators[w.kind.index()] += SINGLE_DENOMINATOR / u64::from(w.denominator);
    }

    pub fn evaluate(&self, rates: &GateErrorRates) -> f64 {
        RateKind::ALL.iter().map(|&k| self.numerators[k.index()] as f64 / SINGLE_DENOMINATOR as f64 * rates.get(k)).sum()
    }

    pub fn at_equal_rates(&self) -> f64 {
        self.numerators.iter().sum::<u64>() as f64 / SINGLE_DENOMINATOR as f64
    }
}

impl Serialize for LinearPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<MonomialRecord> = RateKind::ALL
            .iter()
            .filter(|k| self.numerators[k.index()] != 0)
            .map(|k| MonomialRecord {
                monomial: KIND_NAMES[k.index()].to_string(),
                numerator: self.numerators[k.index()],
                denominator: SINGLE_DENOMINATOR,
                value: self.numerators[k.index()] as f64 / SINGLE_DENOMINATOR as f64,
            })
            .collect();
        terms.serialize(s)
    }
}

/// Where a fault sits on an executed path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PlacedFault {
    /// Position of the segment in the executed sequence.
    pub instance: usize,
    pub segment: SegmentId,
    #[serde(serialize_with = "ser_event")]
    pub event: FaultEvent,
    #[serde(serialize_with = "ser_weight")]
    pub weight: Weight,
}

fn ser_event<S: Serializer>(e: &FaultEvent, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("layer {} location {} {:?}", e.layer, e.location, e.fault))
}

fn ser_weight<S: Serializer>(w: &Weight, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&w.to_string())
}

/// How a faulty cycle ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CycleOutcome {
    /// No usable ancilla; such runs are repeated and never count as failures.
    Skipped,
    Logical(LogicalClass),
}

impl CycleOutcome {
    pub fn is_failure(self) -> bool {
        matches!(self, CycleOutcome::Logical(c) if c.is_error())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FirstOrderTerm {
    pub fault: PlacedFault,
    pub outcome: CycleOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SecondOrderTerm {
    pub first: PlacedFault,
    pub second: PlacedFault,
    pub outcome: CycleOutcome,
}

/// Exact fault expansion of one protocol's QEC cycle.
#[derive(Clone, Debug, Default, Serialize)]
pub struct FaultOrderExpansion {
    pub protocol: Option<ProtocolKind>,
    pub order: u8,
    /// Every single fault on the fault-free path with its outcome.
    pub order1: Vec<FirstOrderTerm>,
    /// First-order failure weight (zero for a fault-tolerant protocol).
    pub c1: LinearPolynomial,
    /// Number of fault pairs enumerated (order 2 only).
    pub n_pairs: u64,
    pub n_skipped_pairs: u64,
    /// Pairs that leave a logical error (order 2 only).
    pub order2_failures: Vec<SecondOrderTerm>,
    /// Second-order coefficient of the probability of any logical error.
    pub c2: RatePolynomial,
    /// `c2` split by residual class, indexed X, Y, Z.
    pub c2_by_class: [RatePolynomial; 3],
}

impl FaultOrderExpansion {
    pub fn order1_failures(&self) -> impl Iterator<Item = &FirstOrderTerm> {
        self.order1.iter().filter(|t| t.outcome.is_failure())
    }

    /// Predicted `P_L ≈ c2(rates)` (the first-order part must vanish).
    pub fn predicted_pl(&self, rates: &GateErrorRates) -> f64 {
        self.c1.evaluate(rates) + self.c2.evaluate(rates)
    }

    /// Second-order coefficient of the error rate measured in `basis`-eigenstates
    /// (e.g. the Z basis sees X and Y residuals).
    pub fn c2_for_basis(&self, basis: crate::experiments::Basis) -> RatePolynomial {
        let mut out = RatePolynomial::default();
        for (i, c) in [LogicalClass::X, LogicalClass::Y, LogicalClass::Z].into_iter().enumerate() {
            if basis.fails(c) {
                out += &self.c2_by_class[i];
            }
        }
        out
    }
}

/// Runs one cycle with explicit faults; returns the outcome and the executed segments.
pub fn run_injected(
    lib: &GadgetLibrary,
    protocol: ProtocolKind,
    plan: Vec<(usize, FaultEvent)>,
) -> Result<(CycleOutcome, Vec<SegmentId>)> {
    let mut exec = Executor::new(lib, InjectedFaults::new(plan));
    let out = run_full_qec(&mut exec, protocol)?;
    let outcome = if out.skipped { CycleOutcome::Skipped } else { CycleOutcome::Logical(exec.logical_outcome()) };
    Ok((outcome, exec.into_source().trace().to_vec()))
}

struct FaultCatalog {
    per_segment: Vec<Vec<(FaultEvent, Weight)>>,
}

impl FaultCatalog {
    fn new(lib: &GadgetLibrary) -> Self {
        FaultCatalog {
            per_segment: lib.segments().iter().map(|s| enumerate_fault_space(&s.circuit, ErrorClassFilter::All)).collect(),
        }
    }

    fn on_path<'a>(&'a self, trace: &'a [SegmentId]) -> impl Iterator<Item = PlacedFault> + 'a {
        trace.iter().enumerate().flat_map(move |(instance, &segment)| {
            self.per_segment[segment].iter().map(move |&(event, weight)| PlacedFault { instance, segment, event, weight })
        })
    }
}

#[derive(Default)]
struct PairAccumulator {
    n_pairs: u64,
    n_skipped: u64,
    failures: Vec<SecondOrderTerm>,
    c2: RatePolynomial,
    by_class: [RatePolynomial; 3],
}

/// Enumerates every single fault (`order` 1) or additionally every fault
/// pair (`order` 2) of `protocol`'s QEC cycle.
pub fn enumerate_logical_failures(lib: &GadgetLibrary, protocol: ProtocolKind, order: u8) -> Result<FaultOrderExpansion> {
    if !(1..=2).contains(&order) {
        return Err(crate::Error::Config(format!("fault order {order} not supported (use 1 or 2)")));
    }
    let catalog = FaultCatalog::new(lib);
    let (_, clean) = run_injected(lib, protocol, Vec::new())?;
    let firsts: Vec<PlacedFault> = catalog.on_path(&clean).collect();

    let singles: Vec<(FirstOrderTerm, Vec<SegmentId>)> = firsts
        .par_iter()
        .map(|&f| {
            let (outcome, trace) = run_injected(lib, protocol, vec![(f.instance, f.event)])?;
            Ok((FirstOrderTerm { fault: f, outcome }, trace))
        })
        .collect::<Result<_>>()?;

    let mut exp = FaultOrderExpansion { protocol: Some(protocol), order, ..FaultOrderExpansion::default() };
    for (t, _) in &singles {
        if t.outcome.is_failure() {
            exp.c1.add(t.fault.weight);
        }
    }
    exp.order1 = singles.iter().map(|(t, _)| *t).collect();
    if order == 1 {
        return Ok(exp);
    }

    let parts: Vec<PairAccumulator> = singles
        .par_iter()
        .map(|(t1, trace)| {
            let f1 = t1.fault;
            let mut acc = PairAccumulator::default();
            for f2 in catalog.on_path(trace) {
                if (f2.instance, f2.event.location) <= (f1.instance, f1.event.location) {
                    continue;
                }
                let (outcome, _) = run_injected(lib, protocol, vec![(f1.instance, f1.event), (f2.instance, f2.event)])?;
                acc.n_pairs += 1;
                match outcome {
                    CycleOutcome::Skipped => acc.n_skipped += 1,
                    CycleOutcome::Logical(c) if c.is_error() => {
                        acc.c2.add_pair(f1.weight, f2.weight);
                        acc.by_class[c as usize - 1].add_pair(f1.weight, f2.weight);
                        acc.failures.push(SecondOrderTerm { first: f1, second: f2, outcome });
                    }
                    CycleOutcome::Logical(_) => {}
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    for p in parts {
        exp.n_pairs += p.n_pairs;
        exp.n_skipped_pairs += p.n_skipped;
        exp.order2_failures.extend(p.failures);
        exp.c2 += &p.c2;
        for (a, b) in exp.c2_by_class.iter_mut().zip(&p.by_class) {
            *a += b;
        }
    }
    Ok(exp)
}

/// First-order probability that a fresh ancilla of `kind` is rejected: the
/// summed weight of every single fault in the create-and-verify gadget that
/// trips the verifier.
pub fn ancilla_rejection_weight(lib: &GadgetLibrary, kind: AncillaKind) -> Result<LinearPolynomial> {
    let id = lib.round(kind).prep_verify;
    let circuit = &lib.segment(id).circuit;
    let mut out = LinearPolynomial::default();
    for (ev, w) in enumerate_fault_space(circuit, ErrorClassFilter::All) {
        let (_, rec) = crate::frame::propagate(circuit, &[ev])?;
        if !lib.accepted(kind, &rec) {
            out.add(w);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::RateKind;

    #[test]
    fn pair_numerators() {
        let mut p = RatePolynomial::default();
        p.add_pair(Weight::of(RateKind::Cnot), Weight::of(RateKind::Cnot));
        p.add_pair(Weight::of(RateKind::Wait), Weight::of(RateKind::Cnot));
        p.add_pair(Weight::of(RateKind::Meas), Weight::of(RateKind::Prep));
        assert_eq!(p.numerator(RateKind::Cnot, RateKind::Cnot), 1);
        assert_eq!(p.numerator(RateKind::Cnot, RateKind::Wait), 5);
        assert_eq!(p.numerator(RateKind::Prep, RateKind::Meas), 225);
        assert_eq!(p.equal_rate_numerator(), 231);
        assert_eq!(p.class_coefficient(ErrorClassFilter::Class0), 1.0);
        assert_eq!(p.class_coefficient(ErrorClassFilter::Class2), 1.0 / 225.0);
        assert_eq!(p.class_coefficient(ErrorClassFilter::Class1), 0.0);
    }

    #[test]
    fn non_ft_has_first_order_failures() {
        let lib = GadgetLibrary::standard();
        let e = enumerate_logical_failures(&lib, ProtocolKind::NonFt, 1).unwrap();
        assert!(e.order1_failures().count() > 0);
        assert!(e.c1.at_equal_rates() > 0.0);
    }

    #[test]
    fn decoding_pair_count_is_combinatorial() {
        let lib = GadgetLibrary::standard();
        let e = enumerate_logical_failures(&lib, ProtocolKind::Decoding, 2).unwrap();
        // no branching: pairs are all variant pairs at distinct locations
        let mut per_loc: Vec<u64> = Vec::new();
        let (_, trace) = run_injected(&lib, ProtocolKind::Decoding, Vec::new()).unwrap();
        for id in trace {
            for (_, _, g) in lib.segment(id).circuit.locations() {
                per_loc.push(crate::noise::fault_variants(g).len() as u64);
            }
        }
        let total: u64 = per_loc.iter().sum();
        let same: u64 = per_loc.iter().map(|v| v * v).sum();
        assert_eq!(e.order1.len() as u64, total);
        assert_eq!(e.n_pairs, (total * total - same) / 2);
        assert!(e.c1.at_equal_rates() == 0.0);
        assert!(e.c2.at_equal_rates() > 0.0);
    }
}
