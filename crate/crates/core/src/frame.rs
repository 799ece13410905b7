//! Pauli-frame propagation through scheduled Clifford circuits.
//!
//! Every circuit in this crate is built from preparations, CNOTs, idles and
//! single-qubit measurements, and every fault is a Pauli. The quantum state
//! itself therefore never needs to be simulated: it is enough to carry the
//! accumulated Pauli error (the frame) through the circuit and to report, for
//! each measurement, whether the error flips its outcome relative to the
//! noiseless run.

use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use crate::error::{Error, Result};
use crate::noise::{Fault, FaultEvent};

/// Maximum register width. Frames are single machine words.
pub const MAX_QUBITS: usize = 64;

pub type Qubit = usize;

/// A single-qubit Pauli, phases dropped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    pub const NON_IDENTITY: [PauliOp; 3] = [PauliOp::X, PauliOp::Y, PauliOp::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliOp::I,
            (true, false) => PauliOp::X,
            (true, true) => PauliOp::Y,
            (false, true) => PauliOp::Z,
        }
    }

    #[inline]
    pub fn has_x(self) -> bool {
        matches!(self, PauliOp::X | PauliOp::Y)
    }

    #[inline]
    pub fn has_z(self) -> bool {
        matches!(self, PauliOp::Z | PauliOp::Y)
    }

    /// Product up to phase.
    pub fn mul(self, other: PauliOp) -> PauliOp {
        PauliOp::from_bits(self.has_x() ^ other.has_x(), self.has_z() ^ other.has_z())
    }

    pub fn anticommutes(self, other: PauliOp) -> bool {
        (self.has_x() & other.has_z()) ^ (self.has_z() & other.has_x())
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PauliOp::I => "I",
            PauliOp::X => "X",
            PauliOp::Y => "Y",
            PauliOp::Z => "Z",
        };
        f.write_str(s)
    }
}

/// Pauli error on up to [`MAX_QUBITS`] qubits, stored as an X mask and a Z mask.
///
/// Composition is XOR of both masks; the identity frame is all zeros.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PauliFrame {
    x: u64,
    z: u64,
}

impl PauliFrame {
    pub const fn identity() -> Self {
        PauliFrame { x: 0, z: 0 }
    }

    pub const fn from_masks(x: u64, z: u64) -> Self {
        PauliFrame { x, z }
    }

    pub fn single(q: Qubit, p: PauliOp) -> Self {
        let mut f = PauliFrame::identity();
        f.apply(q, p);
        f
    }

    #[inline]
    pub fn x_mask(&self) -> u64 {
        self.x
    }

    #[inline]
    pub fn z_mask(&self) -> u64 {
        self.z
    }

    #[inline]
    pub fn is_identity(&self) -> bool {
        (self.x | self.z) == 0
    }

    #[inline]
    pub fn get(&self, q: Qubit) -> PauliOp {
        PauliOp::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    /// Multiplies `p` onto qubit `q`.
    #[inline]
    pub fn apply(&mut self, q: Qubit, p: PauliOp) {
        self.x ^= (p.has_x() as u64) << q;
        self.z ^= (p.has_z() as u64) << q;
    }

    #[inline]
    pub fn clear(&mut self, q: Qubit) {
        let keep = !(1u64 << q);
        self.x &= keep;
        self.z &= keep;
    }

    #[inline]
    pub fn clear_mask(&mut self, mask: u64) {
        self.x &= !mask;
        self.z &= !mask;
    }

    /// Number of qubits carrying a non-identity Pauli.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// 7-bit X pattern of the block whose first qubit is `base`.
    #[inline]
    pub fn block_x(&self, base: Qubit) -> u8 {
        (self.x >> base & 0x7f) as u8
    }

    #[inline]
    pub fn block_z(&self, base: Qubit) -> u8 {
        (self.z >> base & 0x7f) as u8
    }

    /// XORs a 7-bit pattern of X (resp. Z) errors onto the block at `base`.
    #[inline]
    pub fn xor_block_x(&mut self, base: Qubit, pattern: u8) {
        self.x ^= ((pattern & 0x7f) as u64) << base;
    }

    #[inline]
    pub fn xor_block_z(&mut self, base: Qubit, pattern: u8) {
        self.z ^= ((pattern & 0x7f) as u64) << base;
    }

    /// The frame restricted to the 7-qubit block at `base`, re-based to qubit 0.
    pub fn block(&self, base: Qubit) -> PauliFrame {
        PauliFrame::from_masks(self.block_x(base) as u64, self.block_z(base) as u64)
    }

    /// Swaps the roles of X and Z on every qubit.
    pub fn dual(&self) -> PauliFrame {
        PauliFrame { x: self.z, z: self.x }
    }

    pub fn anticommutes_with(&self, other: &PauliFrame) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 1
    }
}

impl BitXor for PauliFrame {
    type Output = PauliFrame;
    fn bitxor(self, rhs: PauliFrame) -> PauliFrame {
        PauliFrame { x: self.x ^ rhs.x, z: self.z ^ rhs.z }
    }
}

impl BitXorAssign for PauliFrame {
    fn bitxor_assign(&mut self, rhs: PauliFrame) {
        self.x ^= rhs.x;
        self.z ^= rhs.z;
    }
}

impl fmt::Debug for PauliFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("PauliFrame(I)");
        }
        f.write_str("PauliFrame(")?;
        let mut first = true;
        for q in 0..MAX_QUBITS {
            let p = self.get(q);
            if p != PauliOp::I {
                if !first {
                    f.write_str(" ")?;
                }
                write!(f, "{p}{q}")?;
                first = false;
            }
        }
        f.write_str(")")
    }
}

/// The gate set: preparations, measurements, CNOT and idle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    PrepZ(Qubit),
    PrepX(Qubit),
    MeasZ(Qubit),
    MeasX(Qubit),
    Cnot { control: Qubit, target: Qubit },
    Wait(Qubit),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    PrepZ,
    PrepX,
    MeasZ,
    MeasX,
    Cnot,
    Wait,
}

impl Gate {
    pub fn cnot(control: Qubit, target: Qubit) -> Gate {
        Gate::Cnot { control, target }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::PrepZ(_) => GateKind::PrepZ,
            Gate::PrepX(_) => GateKind::PrepX,
            Gate::MeasZ(_) => GateKind::MeasZ,
            Gate::MeasX(_) => GateKind::MeasX,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Wait(_) => GateKind::Wait,
        }
    }

    /// Lowest-indexed qubit touched; used for canonical ordering inside a layer.
    pub fn first_qubit(&self) -> Qubit {
        match *self {
            Gate::Cnot { control, target } => control.min(target),
            Gate::PrepZ(q) | Gate::PrepX(q) | Gate::MeasZ(q) | Gate::MeasX(q) | Gate::Wait(q) => q,
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = Qubit> {
        let (a, b) = match *self {
            Gate::Cnot { control, target } => (control, Some(target)),
            Gate::PrepZ(q) | Gate::PrepX(q) | Gate::MeasZ(q) | Gate::MeasX(q) | Gate::Wait(q) => (q, None),
        };
        std::iter::once(a).chain(b)
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, Gate::MeasZ(_) | Gate::MeasX(_))
    }

    /// Same gate with X and Z exchanged: preparation and measurement bases
    /// swap and CNOT control and target trade places.
    pub fn dual(&self) -> Gate {
        match *self {
            Gate::PrepZ(q) => Gate::PrepX(q),
            Gate::PrepX(q) => Gate::PrepZ(q),
            Gate::MeasZ(q) => Gate::MeasX(q),
            Gate::MeasX(q) => Gate::MeasZ(q),
            Gate::Cnot { control, target } => Gate::Cnot { control: target, target: control },
            Gate::Wait(q) => Gate::Wait(q),
        }
    }
}

/// Conjugates `frame` by the ideal gate. Returns the outcome flip for
/// measurements, `None` otherwise.
#[inline]
pub fn apply_gate(frame: &mut PauliFrame, gate: &Gate) -> Option<bool> {
    match *gate {
        Gate::Cnot { control, target } => {
            frame.x ^= (frame.x >> control & 1) << target;
            frame.z ^= (frame.z >> target & 1) << control;
            None
        }
        Gate::PrepZ(q) | Gate::PrepX(q) => {
            frame.clear(q);
            None
        }
        // the post-measurement state is an eigenstate of the measured
        // observable, which therefore absorbs its own component
        Gate::MeasZ(q) => {
            frame.z &= !(1 << q);
            Some(frame.x >> q & 1 == 1)
        }
        Gate::MeasX(q) => {
            frame.x &= !(1 << q);
            Some(frame.z >> q & 1 == 1)
        }
        Gate::Wait(_) => None,
    }
}

/// A circuit arranged into unit-duration time steps.
///
/// Gates are stored flat, layer by layer, each layer sorted by lowest qubit
/// index; a gate's position in that order is its *location*.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduledCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    layer_starts: Vec<usize>,
    /// Location of each measurement, in order; indexes the measurement record.
    meas_locations: Vec<usize>,
    /// Measurement slot per location (`usize::MAX` for non-measurements).
    meas_slot: Vec<usize>,
    measured_mask: u64,
    touched_mask: u64,
}

impl ScheduledCircuit {
    /// Builds a circuit from explicit layers, checking register bounds and
    /// that no qubit is used twice within a layer.
    pub fn new(n_qubits: usize, layers: Vec<Vec<Gate>>) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::Contract(format!(
                "{n_qubits} qubits exceeds the {MAX_QUBITS}-qubit frame width"
            )));
        }
        let mut gates = Vec::new();
        let mut layer_starts = Vec::with_capacity(layers.len() + 1);
        for (l, mut layer) in layers.into_iter().enumerate() {
            layer.sort_by_key(|g| g.first_qubit());
            let mut used = 0u64;
            for g in &layer {
                if let Gate::Cnot { control, target } = g {
                    if control == target {
                        return Err(Error::Contract(format!("layer {l}: CNOT on a single qubit {control}")));
                    }
                }
                for q in g.qubits() {
                    if q >= n_qubits {
                        return Err(Error::Contract(format!(
                            "layer {l}: qubit {q} out of range for {n_qubits}-qubit circuit"
                        )));
                    }
                    if used >> q & 1 == 1 {
                        return Err(Error::Contract(format!("layer {l}: qubit {q} used twice")));
                    }
                    used |= 1 << q;
                }
            }
            layer_starts.push(gates.len());
            gates.extend(layer);
        }
        layer_starts.push(gates.len());
        let mut meas_locations = Vec::new();
        let mut meas_slot = vec![usize::MAX; gates.len()];
        let mut measured_mask = 0u64;
        let mut touched_mask = 0u64;
        for (loc, g) in gates.iter().enumerate() {
            for q in g.qubits() {
                touched_mask |= 1 << q;
            }
            if g.is_measurement() {
                meas_slot[loc] = meas_locations.len();
                meas_locations.push(loc);
                measured_mask |= 1 << g.first_qubit();
            }
        }
        Ok(ScheduledCircuit { n_qubits, gates, layer_starts, meas_locations, meas_slot, measured_mask, touched_mask })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_layers(&self) -> usize {
        self.layer_starts.len() - 1
    }

    pub fn n_locations(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, location: usize) -> &Gate {
        &self.gates[location]
    }

    pub fn layer(&self, l: usize) -> &[Gate] {
        &self.gates[self.layer_starts[l]..self.layer_starts[l + 1]]
    }

    pub fn layers(&self) -> impl Iterator<Item = &[Gate]> {
        (0..self.n_layers()).map(move |l| self.layer(l))
    }

    /// Layer containing `location`.
    pub fn layer_of(&self, location: usize) -> usize {
        self.layer_starts.partition_point(|&s| s <= location) - 1
    }

    /// `(layer, location)` for every gate, in location order.
    pub fn locations(&self) -> impl Iterator<Item = (usize, usize, &Gate)> {
        (0..self.n_layers()).flat_map(move |l| {
            (self.layer_starts[l]..self.layer_starts[l + 1]).map(move |loc| (l, loc, &self.gates[loc]))
        })
    }

    pub fn n_measurements(&self) -> usize {
        self.meas_locations.len()
    }

    /// Qubits measured anywhere in the circuit.
    pub fn measured_mask(&self) -> u64 {
        self.measured_mask
    }

    /// Qubits touched by any gate.
    pub fn qubit_mask(&self) -> u64 {
        self.touched_mask
    }

    /// Record slot of the measurement at `(layer, qubit)`.
    pub fn measurement_slot(&self, layer: usize, qubit: Qubit) -> Option<usize> {
        self.layer_range(layer)
            .find(|&loc| self.gates[loc].is_measurement() && self.gates[loc].first_qubit() == qubit)
            .map(|loc| self.meas_slot[loc])
    }

    /// Record slot of the (unique) measurement of `qubit`, if any.
    pub fn measurement_slot_of(&self, qubit: Qubit) -> Option<usize> {
        self.meas_locations
            .iter()
            .position(|&loc| self.gates[loc].first_qubit() == qubit)
    }

    /// `(layer, qubit)` of every measurement in slot order.
    pub fn measurement_keys(&self) -> Vec<(usize, Qubit)> {
        self.meas_locations.iter().map(|&loc| (self.layer_of(loc), self.gates[loc].first_qubit())).collect()
    }

    pub fn slot_of_location(&self, location: usize) -> Option<usize> {
        let s = self.meas_slot[location];
        (s != usize::MAX).then_some(s)
    }

    fn layer_range(&self, l: usize) -> std::ops::Range<usize> {
        self.layer_starts[l]..self.layer_starts[l + 1]
    }

    /// Exchanges X and Z throughout (see [`Gate::dual`]).
    pub fn dual(&self) -> ScheduledCircuit {
        let layers = self.layers().map(|l| l.iter().map(Gate::dual).collect()).collect();
        ScheduledCircuit::new(self.n_qubits, layers).expect("dual of a valid circuit is valid")
    }

    /// Number of `Wait` gates on qubit `q`.
    pub fn waits_on(&self, q: Qubit) -> usize {
        self.gates.iter().filter(|g| **g == Gate::Wait(q)).count()
    }

    /// Checks that every live qubit (an input, or prepared and not yet
    /// measured) is touched exactly once in every layer, and that no dead
    /// qubit is touched by anything other than a preparation.
    ///
    /// Qubits in `exits` may stop being touched part-way through (they are
    /// handed on unmeasured); once they do, they count as dead.
    pub fn check_liveness(&self, inputs: u64, exits: u64) -> Result<()> {
        let mut live = inputs;
        for (l, layer) in self.layers().enumerate() {
            let mut touched = 0u64;
            let mut born = 0u64;
            let mut died = 0u64;
            for g in layer {
                for q in g.qubits() {
                    touched |= 1 << q;
                }
                match *g {
                    Gate::PrepZ(q) | Gate::PrepX(q) => born |= 1 << q,
                    Gate::MeasZ(q) | Gate::MeasX(q) => died |= 1 << q,
                    _ => {}
                }
            }
            live &= !(live & !touched & exits);
            let idle = live & !touched;
            if idle != 0 {
                return Err(Error::Contract(format!(
                    "layer {l}: live qubits {:?} have no gate",
                    mask_qubits(idle)
                )));
            }
            let dead_use = touched & !live & !born;
            if dead_use != 0 {
                return Err(Error::Contract(format!(
                    "layer {l}: qubits {:?} used while not live",
                    mask_qubits(dead_use)
                )));
            }
            live = (live | born) & !died;
        }
        Ok(())
    }
}

pub(crate) fn mask_qubits(mask: u64) -> Vec<Qubit> {
    (0..MAX_QUBITS).filter(|q| mask >> q & 1 == 1).collect()
}

/// Builds a [`ScheduledCircuit`] layer by layer, filling every idle live
/// qubit with an explicit `Wait`.
#[derive(Clone, Debug)]
pub struct CircuitBuilder {
    n_qubits: usize,
    live: u64,
    layers: Vec<Vec<Gate>>,
}

impl CircuitBuilder {
    pub fn new(n_qubits: usize) -> Self {
        CircuitBuilder { n_qubits, live: 0, layers: Vec::new() }
    }

    /// Declares qubits that carry state into the circuit.
    pub fn with_inputs(mut self, qubits: impl IntoIterator<Item = Qubit>) -> Self {
        for q in qubits {
            self.live |= 1 << q;
        }
        self
    }

    /// Appends one time step.
    pub fn layer(&mut self, gates: impl IntoIterator<Item = Gate>) -> &mut Self {
        let mut layer: Vec<Gate> = gates.into_iter().collect();
        let mut touched = 0u64;
        let mut born = 0u64;
        let mut died = 0u64;
        for g in &layer {
            for q in g.qubits() {
                touched |= 1 << q;
            }
            match *g {
                Gate::PrepZ(q) | Gate::PrepX(q) => born |= 1 << q,
                Gate::MeasZ(q) | Gate::MeasX(q) => died |= 1 << q,
                _ => {}
            }
        }
        for q in mask_qubits(self.live & !touched) {
            layer.push(Gate::Wait(q));
        }
        self.live = (self.live | born) & !died;
        self.layers.push(layer);
        self
    }

    /// `steps` layers of pure idling for every live qubit.
    pub fn idle(&mut self, steps: usize) -> &mut Self {
        for _ in 0..steps {
            self.layer([]);
        }
        self
    }

    /// Stops tracking `qubits` as live (they leave the circuit without being
    /// measured, e.g. data handed on to the next gadget).
    pub fn release(&mut self, qubits: impl IntoIterator<Item = Qubit>) -> &mut Self {
        for q in qubits {
            self.live &= !(1 << q);
        }
        self
    }

    pub fn live_mask(&self) -> u64 {
        self.live
    }

    pub fn build(&self) -> Result<ScheduledCircuit> {
        ScheduledCircuit::new(self.n_qubits, self.layers.clone())
    }
}

/// Per-measurement outcome flips relative to the noiseless circuit, indexed
/// by measurement slot. An empty record means "no flips".
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct MeasurementRecord {
    words: Vec<u64>,
}

impl MeasurementRecord {
    pub fn zero() -> Self {
        MeasurementRecord { words: Vec::new() }
    }

    #[inline]
    pub fn get(&self, slot: usize) -> bool {
        self.words.get(slot / 64).is_some_and(|w| w >> (slot % 64) & 1 == 1)
    }

    pub fn flip(&mut self, slot: usize) {
        let w = slot / 64;
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] ^= 1 << (slot % 64);
    }

    pub fn set(&mut self, slot: usize, value: bool) {
        if self.get(slot) != value {
            self.flip(slot);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Flip at `(layer, qubit)`; `None` when that gate is not a measurement.
    pub fn at(&self, circuit: &ScheduledCircuit, layer: usize, qubit: Qubit) -> Option<bool> {
        circuit.measurement_slot(layer, qubit).map(|s| self.get(s))
    }

    /// Gathers up to 8 slots into a bit pattern (bit `i` = `slots[i]`).
    #[inline]
    pub fn pattern(&self, slots: &[usize]) -> u8 {
        if self.words.is_empty() {
            return 0;
        }
        slots.iter().enumerate().fold(0u8, |acc, (i, &s)| acc | (self.get(s) as u8) << i)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(w, &bits)| (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b))
    }
}

impl BitXor for &MeasurementRecord {
    type Output = MeasurementRecord;
    fn bitxor(self, rhs: &MeasurementRecord) -> MeasurementRecord {
        let n = self.words.len().max(rhs.words.len());
        let words = (0..n)
            .map(|i| self.words.get(i).copied().unwrap_or(0) ^ rhs.words.get(i).copied().unwrap_or(0))
            .collect();
        MeasurementRecord { words }
    }
}

impl fmt::Debug for MeasurementRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ones()).finish()
    }
}

/// Propagates faults through `circuit` starting from the identity frame.
pub fn propagate(circuit: &ScheduledCircuit, faults: &[FaultEvent]) -> Result<(PauliFrame, MeasurementRecord)> {
    propagate_from(circuit, PauliFrame::identity(), faults)
}

/// Propagates an incoming frame plus `faults` through `circuit`.
///
/// At each location the ideal gate acts first; the fault (if any) is then
/// applied to the gate's outputs. Faults must be sorted by location, at most
/// one per location.
pub fn propagate_from(
    circuit: &ScheduledCircuit,
    incoming: PauliFrame,
    faults: &[FaultEvent],
) -> Result<(PauliFrame, MeasurementRecord)> {
    if let Some(bad) = faults.iter().find(|f| f.location >= circuit.n_locations()) {
        return Err(Error::Contract(format!(
            "fault at location {} of a {}-location circuit",
            bad.location,
            circuit.n_locations()
        )));
    }
    let mut frame = incoming;
    let mut record = MeasurementRecord::zero();
    let mut next = faults.iter().peekable();
    for (loc, gate) in circuit.gates.iter().enumerate() {
        let mut flip = apply_gate(&mut frame, gate);
        while let Some(f) = next.next_if(|f| f.location == loc) {
            apply_fault(&mut frame, &mut flip, gate, &f.fault)?;
        }
        if flip == Some(true) {
            record.flip(circuit.meas_slot[loc]);
        }
    }
    if let Some(f) = next.next() {
        return Err(Error::Contract(format!("fault list not sorted by location (at {})", f.location)));
    }
    Ok((frame, record))
}

pub(crate) fn apply_fault(frame: &mut PauliFrame, flip: &mut Option<bool>, gate: &Gate, fault: &Fault) -> Result<()> {
    match (*gate, *fault) {
        (Gate::Wait(q), Fault::Pauli(p)) => frame.apply(q, p),
        (Gate::Cnot { control, target }, Fault::Pair(pc, pt)) => {
            frame.apply(control, pc);
            frame.apply(target, pt);
        }
        (Gate::PrepZ(q), Fault::Flip) => frame.apply(q, PauliOp::X),
        (Gate::PrepX(q), Fault::Flip) => frame.apply(q, PauliOp::Z),
        (Gate::MeasZ(_) | Gate::MeasX(_), Fault::Flip) => {
            if let Some(b) = flip.as_mut() {
                *b ^= true;
            }
        }
        (g, f) => return Err(Error::Contract(format!("fault {f:?} does not fit gate {g:?}"))),
    }
    Ok(())
}
