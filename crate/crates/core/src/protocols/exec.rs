use rand::Rng;

use crate::error::{Error, Result};
use crate::frame::{propagate_from, MeasurementRecord, PauliFrame, ScheduledCircuit};
use crate::noise::{ErrorClassFilter, FaultEvent, GateErrorRates, SegmentSampler};
use crate::steane::{self, LogicalClass, DECODER_SYNDROME_PIVOTS};

use super::gadgets::{GadgetLibrary, SegmentId};
use super::{AncillaKind, ProtocolKind};

/// Supplies the faults for each segment as it is executed.
pub trait FaultSource {
    fn faults_for(&mut self, id: SegmentId, circuit: &ScheduledCircuit, out: &mut Vec<FaultEvent>);
}

/// Noiseless execution.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoFaults;

impl FaultSource for NoFaults {
    fn faults_for(&mut self, _: SegmentId, _: &ScheduledCircuit, _: &mut Vec<FaultEvent>) {}
}

/// One [`SegmentSampler`] per library segment at fixed rates.
#[derive(Clone, Debug)]
pub struct SamplerSet {
    samplers: Vec<SegmentSampler>,
}

impl SamplerSet {
    pub fn new(lib: &GadgetLibrary, rates: &GateErrorRates, filter: ErrorClassFilter) -> Self {
        SamplerSet { samplers: lib.segments().iter().map(|s| SegmentSampler::new(&s.circuit, rates, filter)).collect() }
    }

    pub fn get(&self, id: SegmentId) -> &SegmentSampler {
        &self.samplers[id]
    }
}

/// Independent random faults drawn from a [`SamplerSet`].
#[derive(Debug)]
pub struct SampledFaults<'a, R> {
    pub samplers: &'a SamplerSet,
    pub rng: R,
}

impl<R: Rng> FaultSource for SampledFaults<'_, R> {
    #[inline]
    fn faults_for(&mut self, id: SegmentId, _: &ScheduledCircuit, out: &mut Vec<FaultEvent>) {
        self.samplers.samplers[id].sample_into(&mut self.rng, out);
    }
}

/// Explicit faults addressed by segment instance (the n-th segment executed)
/// and location. Records which segments ran, so an enumerator can place
/// further faults along the realised path.
#[derive(Clone, Debug, Default)]
pub struct InjectedFaults {
    plan: Vec<(usize, FaultEvent)>,
    next: usize,
    trace: Vec<SegmentId>,
}

impl InjectedFaults {
    pub fn new(mut plan: Vec<(usize, FaultEvent)>) -> Self {
        plan.sort_by_key(|&(i, ev)| (i, ev.location));
        InjectedFaults { plan, next: 0, trace: Vec::new() }
    }

    /// Segments executed so far, in order.
    pub fn trace(&self) -> &[SegmentId] {
        &self.trace
    }
}

impl FaultSource for InjectedFaults {
    fn faults_for(&mut self, id: SegmentId, _: &ScheduledCircuit, out: &mut Vec<FaultEvent>) {
        let i = self.next;
        self.next += 1;
        self.trace.push(id);
        out.extend(self.plan.iter().filter(|(k, _)| *k == i).map(|&(_, ev)| ev));
    }
}

/// Carries the Pauli frame of the whole register across segments.
#[derive(Debug)]
pub struct Executor<'a, S> {
    lib: &'a GadgetLibrary,
    source: S,
    frame: PauliFrame,
    buf: Vec<FaultEvent>,
}

impl<'a, S: FaultSource> Executor<'a, S> {
    pub fn new(lib: &'a GadgetLibrary, source: S) -> Self {
        Executor { lib, source, frame: PauliFrame::identity(), buf: Vec::new() }
    }

    pub fn library(&self) -> &'a GadgetLibrary {
        self.lib
    }

    pub fn frame(&self) -> PauliFrame {
        self.frame
    }

    pub fn set_frame(&mut self, frame: PauliFrame) {
        self.frame = frame;
    }

    /// Frame restricted to the data block.
    pub fn data_frame(&self) -> PauliFrame {
        self.frame.block(self.lib.layout.data)
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    pub fn source_mut(&mut self) -> &mut S {
        &mut self.source
    }

    pub fn into_source(self) -> S {
        self.source
    }

    /// Propagates one segment. Measured qubits leave the frame.
    pub fn run(&mut self, id: SegmentId) -> Result<MeasurementRecord> {
        let circuit = &self.lib.segment(id).circuit;
        self.buf.clear();
        self.source.faults_for(id, circuit, &mut self.buf);
        if self.buf.is_empty() && (self.frame.x_mask() | self.frame.z_mask()) & circuit.qubit_mask() == 0 {
            return Ok(MeasurementRecord::zero());
        }
        let (mut frame, record) = propagate_from(circuit, self.frame, &self.buf)?;
        frame.clear_mask(circuit.measured_mask());
        self.frame = frame;
        Ok(record)
    }

    fn correct_data(&mut self, t: steane::PauliType, pattern: u8) {
        t.xor_block(&mut self.frame, self.lib.layout.data, pattern);
    }

    /// Drops everything outside the data block (discarded ancillas).
    fn discard_ancillas(&mut self) {
        self.frame = self.data_frame();
    }

    /// Logical class of the data after ideal decoding.
    pub fn logical_outcome(&self) -> LogicalClass {
        steane::logical_outcome_at(&self.frame, self.lib.layout.data)
    }
}

/// What one QEC round did.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RoundOutcome {
    pub syndrome: u8,
    /// Correction of the syndrome component.
    pub correction: u8,
    /// Correction of the risk component (decoding round only).
    pub risk_correction: u8,
    pub verification_failures: u32,
    /// No usable ancilla: the data was not touched and the trial must be rerun.
    pub skipped: bool,
}

/// Result of a |0_L⟩ round followed by a |+_L⟩ round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QecRoundOutcome {
    pub rounds: [RoundOutcome; 2],
    pub skipped: bool,
    pub verification_failures: u32,
    /// Data frame after both rounds (and their corrections).
    pub data: PauliFrame,
}

/// Transversal CNOT between the ancilla at the first ancilla position and the
/// data, ancilla measurement, and lookup correction of the data.
pub fn run_steane_extraction<S: FaultSource>(exec: &mut Executor<'_, S>, kind: AncillaKind) -> Result<RoundOutcome> {
    let r = exec.lib.round(kind);
    let rec = exec.run(r.extraction)?;
    let syndrome = steane::syndrome(rec.pattern(&r.extraction_slots));
    let correction = steane::lookup_correction(syndrome);
    exec.correct_data(kind.syndrome_type(), correction);
    Ok(RoundOutcome { syndrome, correction, ..RoundOutcome::default() })
}

fn verify<S: FaultSource>(exec: &mut Executor<'_, S>, kind: AncillaKind) -> Result<bool> {
    let r = exec.lib.round(kind);
    let rec = exec.run(r.prep_verify)?;
    Ok(exec.lib.accepted(kind, &rec))
}

/// One round with an ancilla supplied by `protocol` (anything but `Decoding`).
pub fn run_verification_qec_round<S: FaultSource>(
    exec: &mut Executor<'_, S>,
    kind: AncillaKind,
    protocol: ProtocolKind,
) -> Result<RoundOutcome> {
    let r = exec.lib.round(kind);
    let cap = exec.lib.options.retry_cap;
    let mut failures = 0u32;
    match protocol {
        ProtocolKind::NonFt => {
            exec.run(r.encode)?;
        }
        ProtocolKind::SimpleSeries | ProtocolKind::NaiveNoWait => {
            while !verify(exec, kind)? {
                failures += 1;
                if failures >= cap {
                    return Err(Error::RetryCap { attempts: failures, cap });
                }
                if protocol == ProtocolKind::SimpleSeries {
                    exec.run(r.data_wait)?;
                }
            }
        }
        ProtocolKind::TwoAncillaSeries => {
            if verify(exec, kind)? {
                exec.run(r.ancilla_wait_series)?;
            } else if !verify(exec, kind)? {
                exec.discard_ancillas();
                return Ok(RoundOutcome { verification_failures: 2, skipped: true, ..RoundOutcome::default() });
            } else {
                failures = 1;
            }
        }
        ProtocolKind::TwoAncillaParallel => {
            let rec = exec.run(r.prep_verify_pair)?;
            let [s1, s2] = &r.pair_slots;
            let ok1 = super::verification_accepts(rec.pattern(s1));
            let ok2 = super::verification_accepts(rec.pattern(s2));
            failures = u32::from(!ok1) + u32::from(!ok2);
            if ok1 {
                exec.run(r.ancilla_wait_parallel)?;
            } else if ok2 {
                exec.run(r.swap)?;
            } else {
                exec.discard_ancillas();
                return Ok(RoundOutcome { verification_failures: failures, skipped: true, ..RoundOutcome::default() });
            }
        }
        ProtocolKind::Decoding => {
            return Err(Error::Contract("decoding rounds use run_decoding_qec_round".into()));
        }
    }
    let mut out = run_steane_extraction(exec, kind)?;
    out.verification_failures = failures;
    exec.discard_ancillas();
    Ok(out)
}

/// One round with an unverified ancilla that is decoded after extraction.
pub fn run_decoding_qec_round<S: FaultSource>(exec: &mut Executor<'_, S>, kind: AncillaKind) -> Result<RoundOutcome> {
    let r = exec.lib.round(kind);
    exec.run(r.encode)?;
    let rec = exec.run(r.decode)?;
    let pivots: [usize; 3] = DECODER_SYNDROME_PIVOTS.map(|q| r.decode_ancilla_slots[q]);
    let syndrome = rec.pattern(&pivots);
    let correction = steane::lookup_correction(syndrome);
    exec.correct_data(kind.syndrome_type(), correction);
    let risk_correction = r.decoding_table.correction_for(&rec);
    exec.correct_data(kind.risk_type(), risk_correction);
    exec.discard_ancillas();
    Ok(RoundOutcome { syndrome, correction, risk_correction, verification_failures: 0, skipped: false })
}

/// One round of either type under `protocol`.
pub fn run_qec_round<S: FaultSource>(
    exec: &mut Executor<'_, S>,
    kind: AncillaKind,
    protocol: ProtocolKind,
) -> Result<RoundOutcome> {
    match protocol {
        ProtocolKind::Decoding => run_decoding_qec_round(exec, kind),
        _ => run_verification_qec_round(exec, kind, protocol),
    }
}

/// A full QEC cycle: |0_L⟩ round, then |+_L⟩ round. Stops at the first
/// skipped round.
pub fn run_full_qec<S: FaultSource>(exec: &mut Executor<'_, S>, protocol: ProtocolKind) -> Result<QecRoundOutcome> {
    let mut out = QecRoundOutcome::default();
    for kind in AncillaKind::ROUNDS {
        let round = run_qec_round(exec, kind, protocol)?;
        out.rounds[kind.index()] = round;
        out.verification_failures += round.verification_failures;
        if round.skipped {
            out.skipped = true;
            break;
        }
    }
    out.data = exec.data_frame();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{Gate, PauliOp};
    use crate::noise::{enumerate_fault_space, Fault};
    use crate::protocols::ProtocolOptions;
    use crate::steane::N;

    fn lib() -> GadgetLibrary {
        GadgetLibrary::standard()
    }

    fn event(circuit: &ScheduledCircuit, gate: Gate, fault: Fault) -> FaultEvent {
        let location = circuit.gates().iter().position(|g| *g == gate).expect("gate present");
        FaultEvent { layer: circuit.layer_of(location), location, fault }
    }

    #[test]
    fn noiseless_cycle_is_trivial() {
        let lib = lib();
        for p in ProtocolKind::ALL {
            let mut exec = Executor::new(&lib, NoFaults);
            let out = run_full_qec(&mut exec, p).unwrap();
            assert!(!out.skipped);
            assert!(out.data.is_identity(), "{p}");
            assert_eq!(out.verification_failures, 0);
        }
    }

    #[test]
    fn extraction_corrects_incoming_single_errors() {
        let lib = lib();
        for p in ProtocolKind::ALL {
            for q in 0..N {
                for op in PauliOp::NON_IDENTITY {
                    let mut exec = Executor::new(&lib, NoFaults);
                    exec.set_frame(PauliFrame::single(q, op));
                    let out = run_full_qec(&mut exec, p).unwrap();
                    assert!(out.data.is_identity(), "{p} {op} on {q}: {:?}", out.data);
                }
            }
        }
    }

    /// Instances executed by the fault-free path of a protocol.
    fn clean_trace(lib: &GadgetLibrary, p: ProtocolKind) -> Vec<SegmentId> {
        let mut exec = Executor::new(lib, InjectedFaults::default());
        run_full_qec(&mut exec, p).unwrap();
        exec.into_source().trace().to_vec()
    }

    #[test]
    fn fault_free_paths() {
        let lib = lib();
        let z = lib.round(AncillaKind::Zero);
        let x = lib.round(AncillaKind::Plus);
        assert_eq!(clean_trace(&lib, ProtocolKind::SimpleSeries), vec![z.prep_verify, z.extraction, x.prep_verify, x.extraction]);
        assert_eq!(
            clean_trace(&lib, ProtocolKind::TwoAncillaSeries),
            vec![z.prep_verify, z.ancilla_wait_series, z.extraction, x.prep_verify, x.ancilla_wait_series, x.extraction]
        );
        assert_eq!(clean_trace(&lib, ProtocolKind::Decoding), vec![z.encode, z.decode, x.encode, x.decode]);
    }

    #[test]
    fn every_single_fault_is_harmless_for_fault_tolerant_protocols() {
        let lib = lib();
        for p in ProtocolKind::FAULT_TOLERANT {
            let trace = clean_trace(&lib, p);
            for (i, &id) in trace.iter().enumerate() {
                let circuit = &lib.segment(id).circuit;
                for (ev, _) in enumerate_fault_space(circuit, ErrorClassFilter::All) {
                    let mut exec = Executor::new(&lib, InjectedFaults::new(vec![(i, ev)]));
                    let out = run_full_qec(&mut exec, p).unwrap();
                    if !out.skipped {
                        assert!(!exec.logical_outcome().is_error(), "{p} {} {ev:?}", lib.segment(id).name);
                    }
                }
            }
        }
    }

    #[test]
    fn non_ft_fails_on_a_single_encoder_fault() {
        let lib = lib();
        let z = lib.round(AncillaKind::Zero);
        let enc = &lib.segment(z.encode).circuit;
        // X⊗X after encoder CNOT 7 (2 → 3) leaves X2X3 on the ancilla
        let a = lib.layout.ancilla;
        let ev = event(enc, Gate::cnot(a + 1, a + 2), Fault::Pair(PauliOp::X, PauliOp::X));
        let mut exec = Executor::new(&lib, InjectedFaults::new(vec![(0, ev)]));
        run_full_qec(&mut exec, ProtocolKind::NonFt).unwrap();
        assert_eq!(exec.logical_outcome(), LogicalClass::X);
    }

    #[test]
    fn verification_rejects_the_same_fault() {
        let lib = lib();
        let z = lib.round(AncillaKind::Zero);
        let pv = &lib.segment(z.prep_verify).circuit;
        let a = lib.layout.ancilla;
        let ev = event(pv, Gate::cnot(a + 1, a + 2), Fault::Pair(PauliOp::X, PauliOp::X));
        let mut exec = Executor::new(&lib, InjectedFaults::new(vec![(0, ev)]));
        let out = run_full_qec(&mut exec, ProtocolKind::SimpleSeries).unwrap();
        assert_eq!(out.verification_failures, 1);
        assert!(!exec.logical_outcome().is_error());
        let trace = exec.into_source().trace().to_vec();
        assert_eq!(trace[..3], [z.prep_verify, z.data_wait, z.prep_verify]);
    }

    #[test]
    fn skipped_round_leaves_data_untouched() {
        let lib = lib();
        let z = lib.round(AncillaKind::Zero);
        let pv = &lib.segment(z.prep_verify).circuit;
        let v = lib.layout.verifier;
        let ev = event(pv, Gate::MeasZ(v), Fault::Flip);
        let mut exec = Executor::new(&lib, InjectedFaults::new(vec![(0, ev), (1, ev)]));
        exec.set_frame(PauliFrame::single(3, PauliOp::Y));
        let out = run_full_qec(&mut exec, ProtocolKind::TwoAncillaSeries).unwrap();
        assert!(out.skipped);
        assert_eq!(out.data, PauliFrame::single(3, PauliOp::Y));
    }

    #[test]
    fn parallel_swap_delivers_second_ancilla() {
        let lib = lib();
        let z = lib.round(AncillaKind::Zero);
        let pair = &lib.segment(z.prep_verify_pair).circuit;
        let ev = event(pair, Gate::MeasZ(lib.layout.verifier), Fault::Flip);
        let mut exec = Executor::new(&lib, InjectedFaults::new(vec![(0, ev)]));
        let out = run_full_qec(&mut exec, ProtocolKind::TwoAncillaParallel).unwrap();
        assert!(!out.skipped);
        assert_eq!(out.verification_failures, 1);
        assert!(out.data.is_identity());
        assert_eq!(exec.into_source().trace()[1], z.swap);
    }

    #[test]
    fn retry_cap_is_enforced() {
        let opts = ProtocolOptions { retry_cap: 3, ..ProtocolOptions::default() };
        let lib = GadgetLibrary::new(opts).unwrap();
        let z = lib.round(AncillaKind::Zero);
        let pv = &lib.segment(z.prep_verify).circuit;
        let ev = event(pv, Gate::MeasZ(lib.layout.verifier), Fault::Flip);
        // attempts are instances 0, 2, 4 (data waits in between)
        let plan = vec![(0, ev), (2, ev), (4, ev)];
        let mut exec = Executor::new(&lib, InjectedFaults::new(plan));
        let err = run_full_qec(&mut exec, ProtocolKind::SimpleSeries).unwrap_err();
        assert!(matches!(err, Error::RetryCap { attempts: 3, cap: 3 }));
    }
}
