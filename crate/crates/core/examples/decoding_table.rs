//! The lookup table that replaces verification in the decoding protocol:
//! the decoded ancilla's four check bits and the second block's seven
//! outcomes select a correction for the error the ancilla copied onto the
//! data.

use steane_ft::protocols::{AncillaKind, GadgetLibrary};
use steane_ft::steane::support;

fn main() {
    let lib = GadgetLibrary::standard();
    for kind in AncillaKind::ROUNDS {
        let table = &lib.round(kind).decoding_table;
        let entries = table.entries();
        let correcting = entries.iter().filter(|e| e.correction != 0).count();
        println!("{kind:?} round: {} signatures seen, {correcting} with a correction", entries.len());
        for e in entries.iter().filter(|e| e.correction.count_ones() >= 2) {
            let qubits: Vec<String> = support(e.correction).iter().map(|q| q.to_string()).collect();
            println!(
                "  checks {:04b} second block {:07b} -> {:?} on qubits {} ({} faults)",
                e.signature & 0xf,
                e.signature >> 4,
                kind.risk_type(),
                qubits.join(","),
                e.n_sources
            );
        }
    }
}
