//! The [[7,1,3]] Steane code.
//!
//! Within a block, qubit `i` (0-based) is code qubit `i + 1`. Error and
//! stabilizer supports are 7-bit patterns with bit `i` standing for qubit
//! `i + 1`. X- and Z-type generators share the supports
//!
//! ```text
//! G1 = {1,3,5,7}   G2 = {4,5,6,7}   G3 = {2,3,6,7}
//! ```
//!
//! so the syndrome of a single error on qubit `j` is the binary expansion of
//! `j` (bit 0 from G1, bit 1 from G3, bit 2 from G2).

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::frame::{Gate, PauliFrame, Qubit, ScheduledCircuit};

pub const N: usize = 7;

pub const G1: u8 = 0b101_0101;
pub const G2: u8 = 0b111_1000;
pub const G3: u8 = 0b110_0110;

/// Supports of the generators, in order G1, G2, G3 (syndrome bits 0, 1, 2).
pub const STABILIZERS: [u8; 3] = [G1, G2, G3];

/// Support of the transversal logical operators X^7 and Z^7.
pub const LOGICAL: u8 = 0x7f;

/// Qubits prepared in |+⟩ by the |0_L⟩ encoder (code qubits 1, 2, 4). Each
/// lies in exactly one generator: G1, G3 and G2 respectively.
pub const PIVOTS: [usize; 3] = [0, 1, 3];

/// The nine encoder CNOTs as `(control, target)`, numbered 1..=9 by position.
pub const ENCODER_CNOTS: [(usize, usize); 9] = [
    (0, 2), // 1: 1 -> 3
    (3, 5), // 2: 4 -> 6
    (1, 6), // 3: 2 -> 7
    (0, 4), // 4: 1 -> 5
    (3, 6), // 5: 4 -> 7
    (1, 5), // 6: 2 -> 6
    (1, 2), // 7: 2 -> 3
    (3, 4), // 8: 4 -> 5
    (0, 6), // 9: 1 -> 7
];

/// Output X error produced by X⊗X right after encoder CNOT `k` (index `k - 1`).
pub const CNOT_FAULT_PATTERNS: [u8; 9] = [
    pattern(&[1, 3, 5, 7]),
    pattern(&[4, 5, 6, 7]),
    pattern(&[2, 3, 6, 7]),
    pattern(&[1, 5, 7]),
    pattern(&[4, 5, 7]),
    pattern(&[2, 3, 6]),
    pattern(&[2, 3]),
    pattern(&[4, 5]),
    pattern(&[1, 7]),
];

/// Pattern from 1-based code-qubit labels.
pub const fn pattern(qubits: &[usize]) -> u8 {
    let mut p = 0u8;
    let mut i = 0;
    while i < qubits.len() {
        p |= 1 << (qubits[i] - 1);
        i += 1;
    }
    p
}

/// 1-based labels of the qubits in a pattern.
pub fn support(p: u8) -> Vec<usize> {
    (0..N).filter(|i| p >> i & 1 == 1).map(|i| i + 1).collect()
}

#[inline]
fn parity(x: u8) -> bool {
    x.count_ones() % 2 == 1
}

/// Which component of a Pauli error is being examined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliType {
    X,
    Z,
}

impl PauliType {
    pub fn other(self) -> PauliType {
        match self {
            PauliType::X => PauliType::Z,
            PauliType::Z => PauliType::X,
        }
    }

    /// 7-bit pattern of this component on the block at `base`.
    #[inline]
    pub fn block(self, frame: &PauliFrame, base: Qubit) -> u8 {
        match self {
            PauliType::X => frame.block_x(base),
            PauliType::Z => frame.block_z(base),
        }
    }

    #[inline]
    pub fn xor_block(self, frame: &mut PauliFrame, base: Qubit, p: u8) {
        match self {
            PauliType::X => frame.xor_block_x(base, p),
            PauliType::Z => frame.xor_block_z(base, p),
        }
    }
}

/// 3-bit syndrome of an error pattern (bit `i` = overlap parity with generator `i`).
#[inline]
pub fn syndrome(p: u8) -> u8 {
    STABILIZERS.iter().enumerate().fold(0, |s, (i, &g)| s | (parity(p & g) as u8) << i)
}

/// Syndrome of one component of the frame on a 7-qubit block at qubit 0.
/// X components are read by the Z-type generators and vice versa.
pub fn compute_syndrome(frame: &PauliFrame, component: PauliType) -> u8 {
    syndrome(component.block(frame, 0))
}

const fn build_lookup() -> [u8; 8] {
    let mut table = [0u8; 8];
    let mut q = 0;
    while q < N {
        let p = 1u8 << q;
        let s = ((p & G1).count_ones() % 2) as u8
            | (((p & G2).count_ones() % 2) as u8) << 1
            | (((p & G3).count_ones() % 2) as u8) << 2;
        table[s as usize] = p;
        q += 1;
    }
    table
}

const LOOKUP: [u8; 8] = build_lookup();

/// Weight-≤1 correction whose syndrome is `syn` (0 → no correction).
#[inline]
pub fn lookup_correction(syn: u8) -> u8 {
    LOOKUP[(syn & 7) as usize]
}

/// Applies syndrome decoding to a pattern, returning the residual.
#[inline]
pub fn correct(p: u8) -> u8 {
    p ^ lookup_correction(syndrome(p))
}

/// Every element of the stabilizer group ⟨G1, G2, G3⟩ (as supports).
pub fn stabilizer_group() -> [u8; 8] {
    let mut out = [0u8; 8];
    for (m, slot) in out.iter_mut().enumerate() {
        *slot = (0..3).filter(|i| m >> i & 1 == 1).fold(0, |acc, i| acc ^ STABILIZERS[i]);
    }
    out
}

fn reduction_table() -> &'static [u8; 128] {
    static TABLE: OnceLock<[u8; 128]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let group = stabilizer_group();
        let mut table = [0u8; 128];
        for (p, slot) in table.iter_mut().enumerate() {
            *slot = group
                .iter()
                .map(|g| p as u8 ^ g)
                .min_by_key(|&c| (c.count_ones(), support(c)))
                .unwrap();
        }
        table
    })
}

/// Canonical representative of `p · ⟨G1, G2, G3⟩`: minimum weight, ties
/// broken by the lexicographically smallest sorted support. Stabilizers map
/// to 0.
#[inline]
pub fn reduce_mod_stabilizers(p: u8) -> u8 {
    reduction_table()[(p & LOGICAL) as usize]
}

/// Logical Pauli class of a residual data error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LogicalClass {
    I,
    X,
    Y,
    Z,
}

impl LogicalClass {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => LogicalClass::I,
            (true, false) => LogicalClass::X,
            (true, true) => LogicalClass::Y,
            (false, true) => LogicalClass::Z,
        }
    }

    pub fn is_error(self) -> bool {
        self != LogicalClass::I
    }
}

impl fmt::Display for LogicalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Logical class left on the data block at `base` after one round of ideal
/// syndrome extraction and lookup correction of both components.
#[inline]
pub fn logical_outcome_at(frame: &PauliFrame, base: Qubit) -> LogicalClass {
    let x = correct(frame.block_x(base));
    let z = correct(frame.block_z(base));
    // residuals have trivial syndrome: stabilizers have even overlap with the
    // logical support, logical representatives odd
    LogicalClass::from_bits(parity(x & LOGICAL), parity(z & LOGICAL))
}

/// [`logical_outcome_at`] for a block at qubit 0.
pub fn logical_outcome(frame: &PauliFrame) -> LogicalClass {
    logical_outcome_at(frame, 0)
}

/// Stabilizers and logical operators of the code as Pauli frames on qubits 0..7.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeSpec {
    pub n: usize,
    pub x_stabilizers: [PauliFrame; 3],
    pub z_stabilizers: [PauliFrame; 3],
    pub logical_x: PauliFrame,
    pub logical_z: PauliFrame,
}

impl CodeSpec {
    pub fn steane() -> Self {
        let x = |p: u8| PauliFrame::from_masks(p as u64, 0);
        let z = |p: u8| PauliFrame::from_masks(0, p as u64);
        CodeSpec {
            n: N,
            x_stabilizers: STABILIZERS.map(x),
            z_stabilizers: STABILIZERS.map(z),
            logical_x: x(LOGICAL),
            logical_z: z(LOGICAL),
        }
    }
}

/// Four layers preparing |0_L⟩ on `block`: preparations, then CNOTs
/// {1,2,3}, {4,5,6}, {7,8,9}. Idles are left for the builder to fill.
pub fn zero_encoder_layers(block: &[Qubit; N]) -> Vec<Vec<Gate>> {
    let mut layers = Vec::with_capacity(4);
    layers.push(
        (0..N)
            .map(|i| if PIVOTS.contains(&i) { Gate::PrepX(block[i]) } else { Gate::PrepZ(block[i]) })
            .collect(),
    );
    for chunk in ENCODER_CNOTS.chunks(3) {
        layers.push(chunk.iter().map(|&(c, t)| Gate::cnot(block[c], block[t])).collect());
    }
    layers
}

/// Four layers undoing [`zero_encoder_layers`]: the CNOT layers in reverse
/// order, then X measurements where the encoder prepared |+⟩ and Z
/// measurements where it prepared |0⟩.
pub fn zero_decoder_layers(block: &[Qubit; N]) -> Vec<Vec<Gate>> {
    let mut layers: Vec<Vec<Gate>> = ENCODER_CNOTS
        .chunks(3)
        .rev()
        .map(|chunk| chunk.iter().rev().map(|&(c, t)| Gate::cnot(block[c], block[t])).collect())
        .collect();
    layers.push(
        (0..N)
            .map(|i| if PIVOTS.contains(&i) { Gate::MeasX(block[i]) } else { Gate::MeasZ(block[i]) })
            .collect(),
    );
    layers
}

/// Code qubits measured in Z by the |0_L⟩ decoder (those not in [`PIVOTS`]).
pub const DECODER_CHECK_QUBITS: [usize; 4] = [2, 4, 5, 6];

/// Pivot measured by the decoder for each syndrome bit: G1 → qubit 1,
/// G2 → qubit 4, G3 → qubit 2.
pub const DECODER_SYNDROME_PIVOTS: [usize; 3] = [0, 3, 1];

pub fn block_range(base: Qubit) -> [Qubit; N] {
    std::array::from_fn(|i| base + i)
}

/// Stand-alone |0_L⟩ encoding circuit on qubits 0..7.
pub fn zero_encoder() -> ScheduledCircuit {
    let mut b = crate::frame::CircuitBuilder::new(N);
    for layer in zero_encoder_layers(&block_range(0)) {
        b.layer(layer);
    }
    b.build().expect("encoder layers are well formed")
}

/// Stand-alone |+_L⟩ encoding circuit: the X/Z dual of [`zero_encoder`].
pub fn plus_encoder() -> ScheduledCircuit {
    zero_encoder().dual()
}

/// Location of encoder CNOT `k` (1..=9) in [`zero_encoder`] / [`plus_encoder`].
pub fn encoder_cnot_location(circuit: &ScheduledCircuit, k: usize) -> usize {
    let (c, t) = ENCODER_CNOTS[k - 1];
    circuit
        .gates()
        .iter()
        .position(|g| *g == Gate::cnot(c, t) || *g == Gate::cnot(t, c))
        .expect("encoder contains every numbered CNOT")
}

/// Canonical first-order X-error classes on a freshly encoded |0_L⟩: the
/// identity, the seven single-qubit errors and the distinct two-qubit classes
/// reachable from a single encoder CNOT fault.
pub fn first_order_classes() -> Vec<u8> {
    let mut classes: Vec<u8> = std::iter::once(0).chain((0..N).map(|i| 1 << i)).collect();
    for row in &CNOT_FAULT_PATTERNS[6..] {
        let c = reduce_mod_stabilizers(*row);
        if !classes.contains(&c) {
            classes.push(c);
        }
    }
    classes
}
