//! Propagates an X⊗X fault placed after each CNOT of the |0_L⟩ encoder and
//! prints the resulting data error, both raw and reduced modulo the
//! stabilizers. Rows 1–3 vanish, 4–6 leave one error, 7–9 leave two.

use steane_ft::frame::{propagate, PauliOp};
use steane_ft::noise::{Fault, FaultEvent};
use steane_ft::steane::{encoder_cnot_location, reduce_mod_stabilizers, support, zero_encoder, ENCODER_CNOTS};

fn show(p: u8) -> String {
    if p == 0 {
        return "I".into();
    }
    support(p).iter().map(|q| format!("X{q}")).collect::<Vec<_>>().join(" ")
}

fn main() {
    let enc = zero_encoder();
    println!("{:>4}  {:>8}  {:<16} {}", "CNOT", "gate", "data error", "mod stabilizers");
    for (k, (c, t)) in ENCODER_CNOTS.iter().enumerate() {
        let loc = encoder_cnot_location(&enc, k + 1);
        let fault = FaultEvent { layer: enc.layer_of(loc), location: loc, fault: Fault::Pair(PauliOp::X, PauliOp::X) };
        let (frame, _) = propagate(&enc, &[fault]).expect("encoder fault is in range");
        let err = frame.block_x(0);
        println!("{:>4}  {:>8}  {:<16} {}", k + 1, format!("{}->{}", c + 1, t + 1), show(err), show(reduce_mod_stabilizers(err)));
    }
}
