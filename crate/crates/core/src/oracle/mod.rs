//! Independent oracles: a stabilizer-tableau simulator to check the frame
//! engine, and exact low-order fault expansions to check the Monte Carlo.

mod expansion;
mod tableau;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use crate::error::Result;
use crate::frame::{apply_fault, apply_gate, propagate, Gate, PauliFrame, ScheduledCircuit};
use crate::noise::{enumerate_fault_space, fault_variants, ErrorClassFilter, FaultEvent};
use crate::protocols::GadgetLibrary;

pub use expansion::{
    ancilla_rejection_weight, enumerate_logical_failures, run_injected, CycleOutcome, FaultOrderExpansion,
    FirstOrderTerm, LinearPolynomial, PlacedFault, RatePolynomial, SecondOrderTerm, PAIR_DENOMINATOR,
    SINGLE_DENOMINATOR,
};
pub use tableau::{tableau_run, tableau_run_coupled, Tableau, TableauRun};

/// A random circuit on `n_qubits` with `n_layers` layers. Each layer pairs
/// some qubits into CNOTs (random orientation) and gives every other qubit a
/// random preparation, measurement or wait.
pub fn random_circuit<R: Rng + ?Sized>(rng: &mut R, n_qubits: usize, n_layers: usize) -> ScheduledCircuit {
    let mut layers = Vec::with_capacity(n_layers);
    let mut order: Vec<usize> = (0..n_qubits).collect();
    for _ in 0..n_layers {
        order.shuffle(rng);
        let mut layer = Vec::with_capacity(n_qubits);
        let mut i = 0;
        while i < n_qubits {
            let q = order[i];
            if i + 1 < n_qubits && rng.gen_bool(0.5) {
                layer.push(Gate::cnot(q, order[i + 1]));
                i += 2;
                continue;
            }
            layer.push(match rng.gen_range(0..5) {
                0 => Gate::PrepZ(q),
                1 => Gate::PrepX(q),
                2 => Gate::MeasZ(q),
                3 => Gate::MeasX(q),
                _ => Gate::Wait(q),
            });
            i += 1;
        }
        layers.push(layer);
    }
    ScheduledCircuit::new(n_qubits, layers).expect("random layers are well formed")
}

/// Independent random faults: each location faults with probability `density`.
pub fn random_faults<R: Rng + ?Sized>(rng: &mut R, circuit: &ScheduledCircuit, density: f64) -> Vec<FaultEvent> {
    let mut out = Vec::new();
    for (layer, location, gate) in circuit.locations() {
        if rng.gen_bool(density) {
            let vs = fault_variants(gate);
            out.push(FaultEvent { layer, location, fault: vs[rng.gen_range(0..vs.len())] });
        }
    }
    out
}

/// Outcome of running one faulted circuit through both engines.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineComparison {
    pub measurements: usize,
    /// Measurement slots whose flip bits differ.
    pub flip_mismatches: usize,
    /// Whether the frame engine's final frame explains the tableau's final state.
    pub final_state_agrees: bool,
}

impl EngineComparison {
    pub fn agrees(&self) -> bool {
        self.flip_mismatches == 0 && self.final_state_agrees
    }
}

/// Runs `circuit` with `faults` through the frame engine and the tableau
/// oracle and compares the measurement flips and the final error. Random
/// outcomes are paired as the frame engine predicts, so the flips that can
/// disagree are those of deterministic measurements.
pub fn compare_engines<R: Rng + ?Sized>(
    circuit: &ScheduledCircuit,
    faults: &[FaultEvent],
    rng: &mut R,
) -> Result<EngineComparison> {
    let (frame, flips) = propagate(circuit, faults)?;
    let coupling = frame_coupling(circuit, faults)?;
    let run = tableau_run_coupled(circuit, faults, Some(&coupling), rng)?;
    let measurements = circuit.n_measurements();
    let flip_mismatches = (0..measurements).filter(|&s| flips.get(s) != run.flips.get(s)).count();
    Ok(EngineComparison { measurements, flip_mismatches, final_state_agrees: run.frame_consistent(&frame) })
}

/// For every location, whether the frame just before it anticommutes with
/// the observable a measurement or preparation there collapses.
fn frame_coupling(circuit: &ScheduledCircuit, faults: &[FaultEvent]) -> Result<Vec<bool>> {
    let mut frame = PauliFrame::identity();
    let mut next = faults.iter().peekable();
    let mut out = Vec::with_capacity(circuit.n_locations());
    for (_, loc, gate) in circuit.locations() {
        out.push(match *gate {
            Gate::PrepZ(q) | Gate::PrepX(q) | Gate::MeasZ(q) => frame.x_mask() >> q & 1 == 1,
            Gate::MeasX(q) => frame.z_mask() >> q & 1 == 1,
            _ => false,
        });
        let mut flip = apply_gate(&mut frame, gate);
        while let Some(f) = next.next_if(|f| f.location == loc) {
            apply_fault(&mut frame, &mut flip, gate, &f.fault)?;
        }
    }
    Ok(out)
}

/// Totals of an engine-equivalence run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    /// Single faults injected into the gadget library's segments.
    pub library_cases: usize,
    pub library_mismatches: usize,
    pub random_circuits: usize,
    pub random_mismatches: usize,
    /// Measurement flips compared across both suites.
    pub measurements_compared: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.library_mismatches == 0 && self.random_mismatches == 0
    }
}

/// Compares the frame engine with the tableau on every single fault of every
/// library segment and on `random_circuits` random faulted circuits
/// (2–14 qubits, up to 30 layers, fault density 0.1).
pub fn validate_engines(lib: &GadgetLibrary, random_circuits: usize, seed: u64) -> Result<ValidationReport> {
    let mut report = ValidationReport { random_circuits, ..Default::default() };
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    for seg in lib.segments() {
        for (ev, _) in enumerate_fault_space(&seg.circuit, ErrorClassFilter::All) {
            let c = compare_engines(&seg.circuit, &[ev], &mut rng)?;
            report.library_cases += 1;
            report.measurements_compared += c.measurements;
            report.library_mismatches += usize::from(!c.agrees());
        }
    }
    for i in 0..random_circuits {
        let circuit = random_circuit(&mut rng, 2 + i % 13, 1 + i % 30);
        let faults = random_faults(&mut rng, &circuit, 0.1);
        let c = compare_engines(&circuit, &faults, &mut rng)?;
        report.measurements_compared += c.measurements;
        report.random_mismatches += usize::from(!c.agrees());
    }
    Ok(report)
}
