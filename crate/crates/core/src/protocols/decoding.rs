use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::frame::{propagate, propagate_from, MeasurementRecord, Qubit, ScheduledCircuit};
use crate::noise::{enumerate_fault_space, ErrorClassFilter};
use crate::steane::{reduce_mod_stabilizers, PauliType, DECODER_CHECK_QUBITS, N};

const SIGNATURE_BITS: usize = DECODER_CHECK_QUBITS.len() + N;

/// One row of a [`DecodingTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecodingEntry {
    pub signature: u16,
    pub correction: u8,
    /// Single faults (plus the fault-free run) that produce this signature.
    pub n_sources: usize,
}

/// Maps the decoder's check bits and the second block's outcomes to a
/// correction for the error the ancilla may have copied onto the data.
///
/// Built by propagating every single fault of the encoder and the decoding
/// gadget: for each observed signature the chosen correction leaves every
/// fault that produced it with a residual of weight at most one modulo the
/// stabilizers, preferring residuals that vanish outright. Signatures never
/// produced by a single fault map to no correction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodingTable {
    corrections: Vec<u8>,
    entries: Vec<DecodingEntry>,
    check_slots: [usize; 4],
    second_slots: [usize; N],
}

impl DecodingTable {
    /// `ancilla_slots` / `second_slots` are the decode circuit's record slots
    /// for the decoded ancilla and the second block, in code-qubit order.
    pub fn build(
        encode: &ScheduledCircuit,
        decode: &ScheduledCircuit,
        data: Qubit,
        risk: PauliType,
        ancilla_slots: &[usize; N],
        second_slots: &[usize; N],
    ) -> Result<Self> {
        let check_slots = DECODER_CHECK_QUBITS.map(|q| ancilla_slots[q]);
        let mut table =
            DecodingTable { corrections: vec![0; 1 << SIGNATURE_BITS], entries: Vec::new(), check_slots, second_slots: *second_slots };

        let mut seen: BTreeMap<u16, Vec<(u8, f64)>> = BTreeMap::new();
        seen.entry(0).or_default().push((0, 1.0));
        let (clean, _) = propagate(encode, &[])?;
        for (ev, w) in enumerate_fault_space(encode, ErrorClassFilter::All) {
            let (f, _) = propagate(encode, &[ev])?;
            let (f, rec) = propagate_from(decode, f, &[])?;
            seen.entry(table.signature(&rec)).or_default().push((risk.block(&f, data), 1.0 / w.denominator as f64));
        }
        for (ev, w) in enumerate_fault_space(decode, ErrorClassFilter::All) {
            let (f, rec) = propagate_from(decode, clean, &[ev])?;
            seen.entry(table.signature(&rec)).or_default().push((risk.block(&f, data), 1.0 / w.denominator as f64));
        }

        for (&sig, sources) in &seen {
            let mut candidates: Vec<u8> = sources.iter().map(|&(d, _)| reduce_mod_stabilizers(d)).collect();
            candidates.push(0);
            candidates.sort_unstable();
            candidates.dedup();
            let score = |c: u8| {
                let mut worst = 0;
                let mut residual_weight = 0.0;
                for &(d, w) in sources {
                    let r = reduce_mod_stabilizers(d ^ c);
                    worst = worst.max(r.count_ones());
                    if r != 0 {
                        residual_weight += w;
                    }
                }
                (worst, residual_weight)
            };
            let (best, (worst, _)) = candidates
                .iter()
                .map(|&c| (c, score(c)))
                .min_by(|(_, a), (_, b)| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)))
                .expect("candidates never empty");
            if worst > 1 {
                return Err(Error::DecoderCollision { signature: sig });
            }
            table.corrections[sig as usize] = best;
            table.entries.push(DecodingEntry { signature: sig, correction: best, n_sources: sources.len() });
        }
        Ok(table)
    }

    /// Packs the 4 check bits (low) and the 7 second-block bits (high).
    #[inline]
    pub fn signature(&self, record: &MeasurementRecord) -> u16 {
        record.pattern(&self.check_slots) as u16 | (record.pattern(&self.second_slots) as u16) << 4
    }

    #[inline]
    pub fn correction(&self, signature: u16) -> u8 {
        self.corrections[signature as usize]
    }

    /// Signatures produced by at most one fault, with their corrections.
    pub fn entries(&self) -> &[DecodingEntry] {
        &self.entries
    }

    /// Correction for a decode-segment record.
    #[inline]
    pub fn correction_for(&self, record: &MeasurementRecord) -> u8 {
        self.correction(self.signature(record))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::PauliFrame;

    /// The risk component of `frame` on the data block after applying a table
    /// correction, reduced modulo the stabilizers.
    fn residual(frame: &PauliFrame, data: Qubit, risk: PauliType, correction: u8) -> u8 {
        reduce_mod_stabilizers(risk.block(frame, data) ^ correction)
    }
    use crate::protocols::{AncillaKind, GadgetLibrary};

    fn check_round(kind: AncillaKind) {
        let lib = GadgetLibrary::standard();
        let r = lib.round(kind);
        let encode = &lib.segment(r.encode).circuit;
        let decode = &lib.segment(r.decode).circuit;
        let table = &r.decoding_table;
        let risk = kind.risk_type();
        let (clean, _) = propagate(encode, &[]).unwrap();

        for (ev, _) in enumerate_fault_space(encode, ErrorClassFilter::All) {
            let (f, _) = propagate(encode, &[ev]).unwrap();
            let (f, rec) = propagate_from(decode, f, &[]).unwrap();
            assert!(residual(&f, 0, risk, table.correction_for(&rec)).count_ones() <= 1, "{ev:?}");
        }
        for (ev, _) in enumerate_fault_space(decode, ErrorClassFilter::All) {
            let (f, rec) = propagate_from(decode, clean, &[ev]).unwrap();
            assert!(residual(&f, 0, risk, table.correction_for(&rec)).count_ones() <= 1, "{ev:?}");
        }
        assert_eq!(table.correction(0), 0);
    }

    #[test]
    fn zero_round_table_is_complete() {
        check_round(AncillaKind::Zero);
    }

    #[test]
    fn plus_round_table_is_complete() {
        check_round(AncillaKind::Plus);
    }

    #[test]
    fn weight_two_classes_are_corrected() {
        let lib = GadgetLibrary::standard();
        let table = &lib.round(AncillaKind::Zero).decoding_table;
        let nontrivial: Vec<_> = table.entries().iter().filter(|e| e.correction.count_ones() == 2).collect();
        assert!(!nontrivial.is_empty());
    }
}
