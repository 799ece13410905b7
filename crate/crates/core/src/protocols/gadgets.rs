use crate::error::Result;
use crate::frame::{CircuitBuilder, Gate, MeasurementRecord, Qubit, ScheduledCircuit};
use crate::steane::{self, block_range, LOGICAL, N, STABILIZERS};

use super::decoding::DecodingTable;
use super::{AncillaKind, ParallelLayout, ProtocolOptions};

/// Index of a segment in a [`GadgetLibrary`].
pub type SegmentId = usize;

/// Base qubit of each 7-qubit block in the shared register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub data: Qubit,
    pub ancilla: Qubit,
    /// Verifier of the first ancilla; doubles as the decoder's second block.
    pub verifier: Qubit,
    pub ancilla2: Qubit,
    pub verifier2: Qubit,
}

impl Layout {
    pub const STANDARD: Layout = Layout { data: 0, ancilla: 7, verifier: 14, ancilla2: 21, verifier2: 28 };
    pub const N_QUBITS: usize = 35;
}

/// One circuit executed as a unit, with the blocks it expects to be live on entry.
#[derive(Clone, Debug)]
pub struct Segment {
    pub name: String,
    pub circuit: ScheduledCircuit,
    pub inputs: u64,
    /// Live qubits that leave part-way through without being measured.
    pub exits: u64,
}

/// Segments used by one round type, plus the record slots its control flow reads.
#[derive(Clone, Debug)]
pub struct RoundGadgets {
    pub kind: AncillaKind,
    /// Encode the ancilla and its verifier, copy, measure the verifier.
    pub prep_verify: SegmentId,
    /// Two `prep_verify` gadgets side by side.
    pub prep_verify_pair: SegmentId,
    pub data_wait: SegmentId,
    pub ancilla_wait_series: SegmentId,
    pub ancilla_wait_parallel: SegmentId,
    pub swap: SegmentId,
    pub encode: SegmentId,
    pub extraction: SegmentId,
    pub decode: SegmentId,
    /// Verifier slots of `prep_verify`, in code-qubit order.
    pub verify_slots: [usize; N],
    pub pair_slots: [[usize; N]; 2],
    pub extraction_slots: [usize; N],
    pub decode_ancilla_slots: [usize; N],
    pub decode_second_slots: [usize; N],
    pub decoding_table: DecodingTable,
}

/// Every circuit fragment the protocols execute, for both round types.
#[derive(Clone, Debug)]
pub struct GadgetLibrary {
    pub layout: Layout,
    pub options: ProtocolOptions,
    segments: Vec<Segment>,
    rounds: [RoundGadgets; 2],
}

/// A verifier pattern is accepted when it is a codeword of the classical code
/// the transversal copy should produce: even overlap with every generator and
/// with the logical operator.
#[inline]
pub fn verification_accepts(pattern: u8) -> bool {
    STABILIZERS.iter().chain(&[LOGICAL]).all(|&g| (pattern & g).count_ones() % 2 == 0)
}

fn block_mask(base: Qubit) -> u64 {
    ((1u64 << N) - 1) << base
}

fn transversal(from: Qubit, to: Qubit) -> Vec<Gate> {
    (0..N).map(|i| Gate::cnot(from + i, to + i)).collect()
}

fn slots(circuit: &ScheduledCircuit, layer: usize, base: Qubit) -> [usize; N] {
    std::array::from_fn(|i| circuit.measurement_slot(layer, base + i).expect("block is measured in this layer"))
}

/// |0_L⟩ on `a` and on `v` in parallel, then `a → v` transversally, then
/// Z measurement of `v`.
fn prep_verify_layers(b: &mut CircuitBuilder, pairs: &[(Qubit, Qubit)]) {
    let enc: Vec<Vec<Vec<Gate>>> = pairs
        .iter()
        .flat_map(|&(a, v)| [steane::zero_encoder_layers(&block_range(a)), steane::zero_encoder_layers(&block_range(v))])
        .collect();
    for l in 0..4 {
        b.layer(enc.iter().flat_map(|e| e[l].iter().copied()));
    }
    b.layer(pairs.iter().flat_map(|&(a, v)| transversal(a, v)));
    b.layer(pairs.iter().flat_map(|&(_, v)| (0..N).map(move |i| Gate::MeasZ(v + i))));
}

impl GadgetLibrary {
    pub fn new(options: ProtocolOptions) -> Result<Self> {
        let layout = Layout::STANDARD;
        let mut segments = Vec::new();
        let zero = build_round(&mut segments, layout, &options, AncillaKind::Zero)?;
        let plus = build_round(&mut segments, layout, &options, AncillaKind::Plus)?;
        Ok(GadgetLibrary { layout, options, segments, rounds: [zero, plus] })
    }

    pub fn standard() -> Self {
        GadgetLibrary::new(ProtocolOptions::default()).expect("default gadgets are well formed")
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    #[inline]
    pub fn segment(&self, id: SegmentId) -> &Segment {
        &self.segments[id]
    }

    #[inline]
    pub fn round(&self, kind: AncillaKind) -> &RoundGadgets {
        &self.rounds[kind.index()]
    }

    pub fn n_qubits(&self) -> usize {
        Layout::N_QUBITS
    }

    /// Whether `prep_verify` of `kind` accepted, given its record.
    #[inline]
    pub fn accepted(&self, kind: AncillaKind, record: &MeasurementRecord) -> bool {
        verification_accepts(record.pattern(&self.round(kind).verify_slots))
    }
}

/// Builds the |0_L⟩-round gadgets and, for `Plus`, takes their duals.
fn build_round(
    segments: &mut Vec<Segment>,
    layout: Layout,
    options: &ProtocolOptions,
    kind: AncillaKind,
) -> Result<RoundGadgets> {
    let Layout { data: d, ancilla: a, verifier: v, ancilla2: a2, verifier2: v2 } = layout;
    let n = Layout::N_QUBITS;
    let tag = match kind {
        AncillaKind::Zero => "zero",
        AncillaKind::Plus => "plus",
    };
    let mut add = |name: &str, b: &CircuitBuilder, inputs: u64, exits: u64| -> Result<SegmentId> {
        let mut circuit = b.build()?;
        if kind == AncillaKind::Plus {
            circuit = circuit.dual();
        }
        circuit.check_liveness(inputs, exits)?;
        segments.push(Segment { name: format!("{tag}/{name}"), circuit, inputs, exits });
        Ok(segments.len() - 1)
    };

    let mut b = CircuitBuilder::new(n);
    prep_verify_layers(&mut b, &[(a, v)]);
    let prep_verify_circuit = b.build()?;
    let prep_verify = add("prep-verify", &b, 0, 0)?;

    let mut b = CircuitBuilder::new(n);
    prep_verify_layers(&mut b, &[(a, v), (a2, v2)]);
    let pair_circuit = b.build()?;
    let prep_verify_pair = add("prep-verify-pair", &b, 0, 0)?;

    let wait = |base: Qubit, steps: usize| {
        let mut b = CircuitBuilder::new(n).with_inputs(block_range(base));
        b.idle(steps);
        b
    };
    let data_wait = add("data-wait", &wait(d, options.timing.series_data_wait), block_mask(d), 0)?;
    let ancilla_wait_series = add("ancilla-wait-series", &wait(a, options.timing.series_ancilla_wait), block_mask(a), 0)?;
    let parallel_wait = match options.parallel_layout {
        ParallelLayout::SingleSwap => options.timing.parallel_ancilla_wait,
        ParallelLayout::DoubleSwap => 2 * options.timing.parallel_ancilla_wait,
    };
    let ancilla_wait_parallel = add("ancilla-wait-parallel", &wait(a, parallel_wait), block_mask(a), 0)?;

    // Three alternating transversal CNOTs exchange two blocks.
    let swap_inputs = match options.parallel_layout {
        ParallelLayout::SingleSwap => block_mask(a) | block_mask(a2),
        ParallelLayout::DoubleSwap => block_mask(a) | block_mask(a2) | block_mask(v),
    };
    let mut b = CircuitBuilder::new(n).with_inputs(crate::frame::mask_qubits(swap_inputs));
    match options.parallel_layout {
        ParallelLayout::SingleSwap => {
            b.layer(transversal(a2, a)).layer(transversal(a, a2)).layer(transversal(a2, a));
        }
        ParallelLayout::DoubleSwap => {
            b.layer(transversal(a2, v)).layer(transversal(v, a2)).layer(transversal(a2, v));
            b.layer(transversal(v, a)).layer(transversal(a, v)).layer(transversal(v, a));
        }
    }
    let swap = add("swap", &b, swap_inputs, 0)?;

    let mut b = CircuitBuilder::new(n);
    for layer in steane::zero_encoder_layers(&block_range(a)) {
        b.layer(layer);
    }
    let encode = add("encode", &b, 0, 0)?;

    let mut b = CircuitBuilder::new(n).with_inputs(block_range(a).into_iter().chain(block_range(d)));
    b.layer(transversal(a, d));
    b.release(block_range(d));
    b.layer((0..N).map(|i| Gate::MeasX(a + i)));
    let extraction_circuit = b.build()?;
    let extraction = add("extraction", &b, block_mask(a) | block_mask(d), block_mask(d))?;

    // Decoding round: the ancilla meets the data, copies onto a freshly
    // prepared second block `v` (measured at once), then is decoded.
    let mut b = CircuitBuilder::new(n).with_inputs(block_range(a).into_iter().chain(block_range(d)));
    b.layer(transversal(a, d).into_iter().chain((0..N).map(|i| Gate::PrepZ(v + i))));
    b.release(block_range(d));
    b.layer(transversal(a, v));
    let mut dec = steane::zero_decoder_layers(&block_range(a));
    b.layer(dec.remove(0).into_iter().chain((0..N).map(|i| Gate::MeasZ(v + i))));
    for layer in dec {
        b.layer(layer);
    }
    let decode_circuit = b.build()?;
    let decode = add("decode", &b, block_mask(a) | block_mask(d), block_mask(d))?;

    let last = decode_circuit.n_layers() - 1;
    let decoding_table = DecodingTable::build(
        &segments[encode].circuit,
        &segments[decode].circuit,
        d,
        kind.risk_type(),
        &slots(&decode_circuit, last, a),
        &slots(&decode_circuit, 2, v),
    )?;

    Ok(RoundGadgets {
        kind,
        prep_verify,
        prep_verify_pair,
        data_wait,
        ancilla_wait_series,
        ancilla_wait_parallel,
        swap,
        encode,
        extraction,
        decode,
        verify_slots: slots(&prep_verify_circuit, 5, v),
        pair_slots: [slots(&pair_circuit, 5, v), slots(&pair_circuit, 5, v2)],
        extraction_slots: slots(&extraction_circuit, 1, a),
        decode_ancilla_slots: slots(&decode_circuit, last, a),
        decode_second_slots: slots(&decode_circuit, 2, v),
        decoding_table,
    })
}
