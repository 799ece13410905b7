//! Stochastic gate-fault model and exhaustive fault enumeration.
//!
//! Four independent fault channels, one per gate family:
//!
//! * idle (`Wait`): X, Y or Z, each with probability `p_wait / 3`;
//! * preparation: the orthogonal state (|1⟩ for |0⟩, |−⟩ for |+⟩) with
//!   probability `p_prep`;
//! * measurement: the reported bit is flipped with probability `p_meas`;
//! * CNOT: the ideal gate followed by one of the 15 non-identity two-qubit
//!   Paulis, each with probability `p_cnot / 15`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Gate, GateKind, PauliOp, ScheduledCircuit};

/// Gate family that owns an independent error rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateKind {
    Prep,
    Meas,
    Wait,
    Cnot,
}

impl RateKind {
    pub const ALL: [RateKind; 4] = [RateKind::Prep, RateKind::Meas, RateKind::Wait, RateKind::Cnot];

    pub fn of(kind: GateKind) -> RateKind {
        match kind {
            GateKind::PrepZ | GateKind::PrepX => RateKind::Prep,
            GateKind::MeasZ | GateKind::MeasX => RateKind::Meas,
            GateKind::Wait => RateKind::Wait,
            GateKind::Cnot => RateKind::Cnot,
        }
    }

    /// Number of equally likely fault variants sharing the rate.
    pub fn variants(self) -> u32 {
        match self {
            RateKind::Prep | RateKind::Meas => 1,
            RateKind::Wait => 3,
            RateKind::Cnot => 15,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Per-family physical error probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateErrorRates {
    pub p_prep: f64,
    pub p_meas: f64,
    pub p_wait: f64,
    pub p_cnot: f64,
}

impl GateErrorRates {
    pub fn new(p_prep: f64, p_meas: f64, p_wait: f64, p_cnot: f64) -> Result<Self> {
        let r = GateErrorRates { p_prep, p_meas, p_wait, p_cnot };
        r.validate()?;
        Ok(r)
    }

    /// Every gate family at the same rate `p`.
    pub fn uniform(p: f64) -> Self {
        GateErrorRates { p_prep: p, p_meas: p, p_wait: p, p_cnot: p }
    }

    pub fn zero() -> Self {
        Self::uniform(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for k in RateKind::ALL {
            let p = self.get(k);
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{k:?} error rate {p} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn get(&self, k: RateKind) -> f64 {
        match k {
            RateKind::Prep => self.p_prep,
            RateKind::Meas => self.p_meas,
            RateKind::Wait => self.p_wait,
            RateKind::Cnot => self.p_cnot,
        }
    }

    pub fn with(mut self, k: RateKind, p: f64) -> Self {
        match k {
            RateKind::Prep => self.p_prep = p,
            RateKind::Meas => self.p_meas = p,
            RateKind::Wait => self.p_wait = p,
            RateKind::Cnot => self.p_cnot = p,
        }
        self
    }

    /// The rates with every family disabled by `filter` forced to zero.
    pub fn filtered(&self, filter: ErrorClassFilter) -> Self {
        let mut r = *self;
        for k in RateKind::ALL {
            if !filter.enables(k) {
                r = r.with(k, 0.0);
            }
        }
        r
    }
}

/// Restricts faults to one error class: 0 = preparation and measurement,
/// 1 = idles, 2 = CNOTs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorClassFilter {
    All,
    Class0,
    Class1,
    Class2,
}

impl ErrorClassFilter {
    pub const CLASSES: [ErrorClassFilter; 3] =
        [ErrorClassFilter::Class0, ErrorClassFilter::Class1, ErrorClassFilter::Class2];

    pub fn enables(self, k: RateKind) -> bool {
        match self {
            ErrorClassFilter::All => true,
            ErrorClassFilter::Class0 => matches!(k, RateKind::Prep | RateKind::Meas),
            ErrorClassFilter::Class1 => k == RateKind::Wait,
            ErrorClassFilter::Class2 => k == RateKind::Cnot,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorClassFilter::All => "all",
            ErrorClassFilter::Class0 => "class0",
            ErrorClassFilter::Class1 => "class1",
            ErrorClassFilter::Class2 => "class2",
        }
    }
}

impl fmt::Display for ErrorClassFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorClassFilter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(ErrorClassFilter::All),
            "class0" | "0" => Ok(ErrorClassFilter::Class0),
            "class1" | "1" => Ok(ErrorClassFilter::Class1),
            "class2" | "2" => Ok(ErrorClassFilter::Class2),
            other => Err(Error::Config(format!("unknown error class filter `{other}`"))),
        }
    }
}

/// What goes wrong at a faulty location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fault {
    /// Idle fault.
    Pauli(PauliOp),
    /// CNOT fault: Paulis on (control, target), not both identity.
    Pair(PauliOp, PauliOp),
    /// Orthogonal preparation or flipped measurement report.
    Flip,
}

/// The 15 two-qubit CNOT faults in canonical order (IX, IY, IZ, XI, ..., ZZ).
pub const CNOT_FAULTS: [Fault; 15] = {
    use PauliOp::*;
    [
        Fault::Pair(I, X),
        Fault::Pair(I, Y),
        Fault::Pair(I, Z),
        Fault::Pair(X, I),
        Fault::Pair(X, X),
        Fault::Pair(X, Y),
        Fault::Pair(X, Z),
        Fault::Pair(Y, I),
        Fault::Pair(Y, X),
        Fault::Pair(Y, Y),
        Fault::Pair(Y, Z),
        Fault::Pair(Z, I),
        Fault::Pair(Z, X),
        Fault::Pair(Z, Y),
        Fault::Pair(Z, Z),
    ]
};

const WAIT_FAULTS: [Fault; 3] = [Fault::Pauli(PauliOp::X), Fault::Pauli(PauliOp::Y), Fault::Pauli(PauliOp::Z)];
const FLIP_FAULT: [Fault; 1] = [Fault::Flip];

/// All faults a gate can suffer, in canonical order.
pub fn fault_variants(gate: &Gate) -> &'static [Fault] {
    match gate.kind() {
        GateKind::Wait => &WAIT_FAULTS,
        GateKind::Cnot => &CNOT_FAULTS,
        _ => &FLIP_FAULT,
    }
}

/// A fault at a specific circuit location (flat gate index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaultEvent {
    pub layer: usize,
    pub location: usize,
    pub fault: Fault,
}

/// First-order probability of one fault variant: `p_kind / variants`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight {
    pub kind: RateKind,
    pub denominator: u32,
}

impl Weight {
    pub fn of(kind: RateKind) -> Self {
        Weight { kind, denominator: kind.variants() }
    }

    pub fn evaluate(&self, rates: &GateErrorRates) -> f64 {
        rates.get(self.kind) / self.denominator as f64
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            RateKind::Prep => "p_prep",
            RateKind::Meas => "p_meas",
            RateKind::Wait => "p_wait",
            RateKind::Cnot => "p_cnot",
        };
        if self.denominator == 1 {
            f.write_str(name)
        } else {
            write!(f, "{name}/{}", self.denominator)
        }
    }
}

/// Every single fault the circuit admits under `filter`, with its weight.
/// Ordered by location (layer-major, then qubit) and then by variant.
pub fn enumerate_fault_space(circuit: &ScheduledCircuit, filter: ErrorClassFilter) -> Vec<(FaultEvent, Weight)> {
    let mut out = Vec::new();
    for (layer, location, gate) in circuit.locations() {
        let kind = RateKind::of(gate.kind());
        if !filter.enables(kind) {
            continue;
        }
        for &fault in fault_variants(gate) {
            out.push((FaultEvent { layer, location, fault }, Weight::of(kind)));
        }
    }
    out
}

/// Fault sampler for one circuit at fixed rates.
///
/// Rather than drawing one Bernoulli per location, it jumps straight to the
/// next faulty location by inverting the cumulative no-fault probability, so
/// a fault-free pass costs a single uniform draw.
#[derive(Clone, Debug)]
pub struct SegmentSampler {
    /// `log_survival[i]` = ln P(no fault in locations `0..i`).
    log_survival: Vec<f64>,
    p_none: f64,
    /// Used instead when some location faults with probability ≥ 1/2.
    per_location: Option<Vec<f64>>,
    layers: Vec<usize>,
    variants: Vec<&'static [Fault]>,
}

impl SegmentSampler {
    pub fn new(circuit: &ScheduledCircuit, rates: &GateErrorRates, filter: ErrorClassFilter) -> Self {
        let rates = rates.filtered(filter);
        let mut probs = Vec::with_capacity(circuit.n_locations());
        let mut layers = Vec::with_capacity(circuit.n_locations());
        let mut variants = Vec::with_capacity(circuit.n_locations());
        for (layer, _, gate) in circuit.locations() {
            probs.push(rates.get(RateKind::of(gate.kind())));
            layers.push(layer);
            variants.push(fault_variants(gate));
        }
        let mut log_survival = Vec::with_capacity(probs.len() + 1);
        let mut acc = 0.0f64;
        log_survival.push(acc);
        for &q in &probs {
            acc += (-q).ln_1p();
            log_survival.push(acc);
        }
        let per_location = probs.iter().any(|&q| q >= 0.5).then(|| probs.clone());
        SegmentSampler { p_none: acc.exp(), log_survival, per_location, layers, variants }
    }

    pub fn n_locations(&self) -> usize {
        self.layers.len()
    }

    /// Probability that the whole circuit runs fault-free.
    pub fn p_none(&self) -> f64 {
        self.p_none
    }

    /// Appends a sample of faults to `out` (in location order).
    #[inline]
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<FaultEvent>) {
        if let Some(probs) = &self.per_location {
            for (loc, &q) in probs.iter().enumerate() {
                if rng.gen::<f64>() < q {
                    self.push_variant(rng, loc, out);
                }
            }
            return;
        }
        if self.p_none >= 1.0 {
            return;
        }
        // u in (0, 1]
        let u = 1.0 - rng.gen::<f64>();
        if u <= self.p_none {
            return;
        }
        let n = self.layers.len();
        let mut pos = 0usize;
        let mut u = u;
        loop {
            let threshold = self.log_survival[pos] + u.ln();
            if threshold <= self.log_survival[n] {
                return;
            }
            // first j >= pos with log_survival[j + 1] < threshold
            let j = pos + self.log_survival[pos + 1..].partition_point(|&l| l >= threshold);
            self.push_variant(rng, j, out);
            pos = j + 1;
            if pos >= n {
                return;
            }
            u = 1.0 - rng.gen::<f64>();
        }
    }

    #[inline]
    fn push_variant<R: Rng + ?Sized>(&self, rng: &mut R, loc: usize, out: &mut Vec<FaultEvent>) {
        let vs = self.variants[loc];
        let fault = if vs.len() == 1 { vs[0] } else { vs[rng.gen_range(0..vs.len())] };
        out.push(FaultEvent { layer: self.layers[loc], location: loc, fault });
    }
}

/// Samples one independent fault pattern for `circuit`.
pub fn sample_faults<R: Rng + ?Sized>(
    circuit: &ScheduledCircuit,
    rates: &GateErrorRates,
    filter: ErrorClassFilter,
    rng: &mut R,
) -> Vec<FaultEvent> {
    let mut out = Vec::new();
    SegmentSampler::new(circuit, rates, filter).sample_into(rng, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::CircuitBuilder;
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn mixed_circuit() -> ScheduledCircuit {
        let mut b = CircuitBuilder::new(4);
        b.layer([Gate::PrepZ(0), Gate::PrepX(1), Gate::PrepZ(2), Gate::PrepZ(3)]);
        b.layer([Gate::cnot(1, 0)]);
        b.layer([Gate::cnot(1, 2), Gate::cnot(0, 3)]);
        b.layer([Gate::MeasZ(0), Gate::MeasX(1), Gate::MeasZ(2), Gate::MeasZ(3)]);
        b.build().unwrap()
    }

    #[test]
    fn zero_rates_never_fault() {
        let c = mixed_circuit();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
        for _ in 0..1000 {
            assert!(sample_faults(&c, &GateErrorRates::zero(), ErrorClassFilter::All, &mut rng).is_empty());
        }
    }

    #[test]
    fn class0_filter_on_wait_and_cnot_circuit() {
        let c = ScheduledCircuit::new(3, vec![vec![Gate::cnot(0, 1), Gate::Wait(2)], vec![Gate::Wait(0)]]).unwrap();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(2);
        for _ in 0..1000 {
            assert!(sample_faults(&c, &GateErrorRates::uniform(0.3), ErrorClassFilter::Class0, &mut rng).is_empty());
        }
    }

    #[test]
    fn fault_space_counts() {
        let wait = ScheduledCircuit::new(1, vec![vec![Gate::Wait(0)]]).unwrap();
        let space = enumerate_fault_space(&wait, ErrorClassFilter::All);
        assert_eq!(space.len(), 3);
        assert!(space.iter().all(|(_, w)| *w == Weight { kind: RateKind::Wait, denominator: 3 }));

        let cx = ScheduledCircuit::new(2, vec![vec![Gate::cnot(0, 1)]]).unwrap();
        let space = enumerate_fault_space(&cx, ErrorClassFilter::All);
        assert_eq!(space.len(), 15);
        assert!(space.iter().all(|(_, w)| w.to_string() == "p_cnot/15"));

        let c = mixed_circuit();
        let count = |k: GateKind| c.gates().iter().filter(|g| g.kind() == k).count();
        let expected = 3 * count(GateKind::Wait)
            + count(GateKind::PrepZ)
            + count(GateKind::PrepX)
            + count(GateKind::MeasZ)
            + count(GateKind::MeasX)
            + 15 * count(GateKind::Cnot);
        assert_eq!(enumerate_fault_space(&c, ErrorClassFilter::All).len(), expected);
        let classes: usize =
            ErrorClassFilter::CLASSES.iter().map(|&f| enumerate_fault_space(&c, f).len()).sum();
        assert_eq!(classes, expected);
    }

    #[test]
    fn fault_space_is_canonically_ordered() {
        let c = mixed_circuit();
        let space = enumerate_fault_space(&c, ErrorClassFilter::All);
        let keys: Vec<_> = space.iter().map(|(e, _)| (e.layer, c.gate(e.location).first_qubit(), e.fault)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn cnot_variant_frequencies() {
        let cx = ScheduledCircuit::new(2, vec![vec![Gate::cnot(0, 1)]]).unwrap();
        let rates = GateErrorRates::uniform(0.15);
        let sampler = SegmentSampler::new(&cx, &rates, ErrorClassFilter::All);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let n = 1_000_000u32;
        let mut counts = std::collections::HashMap::new();
        let mut buf = Vec::new();
        for _ in 0..n {
            buf.clear();
            sampler.sample_into(&mut rng, &mut buf);
            assert!(buf.len() <= 1);
            if let Some(e) = buf.first() {
                *counts.entry(e.fault).or_insert(0u32) += 1;
            }
        }
        assert_eq!(counts.len(), 15);
        let sigma = (0.01f64 * 0.99 / n as f64).sqrt();
        for (&f, &k) in &counts {
            let freq = k as f64 / n as f64;
            assert!((freq - 0.01).abs() < 4.0 * sigma, "{f:?}: {freq}");
        }
    }

    #[test]
    fn per_gate_kind_frequencies() {
        // 10^6 passes over a circuit with every gate kind; per-location rates
        // must match nominal within 4 sigma.
        let c = mixed_circuit();
        let rates = GateErrorRates::new(0.01, 0.02, 0.03, 0.04).unwrap();
        let sampler = SegmentSampler::new(&c, &rates, ErrorClassFilter::All);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(4);
        let n = 1_000_000u32;
        let mut hits = vec![0u32; c.n_locations()];
        let mut buf = Vec::new();
        for _ in 0..n {
            buf.clear();
            sampler.sample_into(&mut rng, &mut buf);
            for e in &buf {
                hits[e.location] += 1;
            }
        }
        for (loc, gate) in c.gates().iter().enumerate() {
            let q = rates.get(RateKind::of(gate.kind()));
            let sigma = (q * (1.0 - q) / n as f64).sqrt();
            let freq = hits[loc] as f64 / n as f64;
            assert!((freq - q).abs() < 4.0 * sigma, "{gate:?}: {freq} vs {q}");
        }
    }

    #[test]
    fn filter_equals_zeroed_rates_stream() {
        let c = mixed_circuit();
        let rates = GateErrorRates::new(0.05, 0.07, 0.02, 0.09).unwrap();
        for filter in ErrorClassFilter::CLASSES {
            let a = SegmentSampler::new(&c, &rates, filter);
            let b = SegmentSampler::new(&c, &rates.filtered(filter), ErrorClassFilter::All);
            let mut ra = Xoshiro256PlusPlus::seed_from_u64(9);
            let mut rb = Xoshiro256PlusPlus::seed_from_u64(9);
            let (mut va, mut vb) = (Vec::new(), Vec::new());
            for _ in 0..10_000 {
                a.sample_into(&mut ra, &mut va);
                b.sample_into(&mut rb, &mut vb);
            }
            assert_eq!(va, vb);
            assert!(va.iter().all(|e| filter.enables(RateKind::of(c.gate(e.location).kind()))));
        }
    }

    #[test]
    fn high_rate_fallback_is_exact() {
        let c = ScheduledCircuit::new(2, vec![vec![Gate::Wait(0), Gate::Wait(1)]; 3]).unwrap();
        let sampler = SegmentSampler::new(&c, &GateErrorRates::uniform(1.0), ErrorClassFilter::All);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        let mut buf = Vec::new();
        sampler.sample_into(&mut rng, &mut buf);
        assert_eq!(buf.len(), 6);
    }

    #[test]
    fn rate_validation() {
        assert!(GateErrorRates::new(0.0, 1.2, 0.0, 0.0).is_err());
        assert!(GateErrorRates::new(-0.1, 0.0, 0.0, 0.0).is_err());
        assert!("class1".parse::<ErrorClassFilter>().is_ok());
        assert!("class7".parse::<ErrorClassFilter>().is_err());
    }
}
