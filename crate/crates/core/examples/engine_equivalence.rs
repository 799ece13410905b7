//! Cross-checks the Pauli-frame engine against a stabilizer tableau: the
//! full gadget library under every single fault, plus random faulted
//! Clifford circuits.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use steane_ft::frame::propagate;
use steane_ft::oracle::{compare_engines, random_circuit, random_faults, validate_engines};
use steane_ft::protocols::GadgetLibrary;

fn main() -> steane_ft::Result<()> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
    let circuit = random_circuit(&mut rng, 4, 6);
    let faults = random_faults(&mut rng, &circuit, 0.3);
    let (frame, flips) = propagate(&circuit, &faults)?;
    println!("random circuit: {} locations, {} faults", circuit.n_locations(), faults.len());
    println!("  frame engine: final error {frame:?}, flipped slots {flips:?}");
    println!("  {:?}", compare_engines(&circuit, &faults, &mut rng)?);

    let report = validate_engines(&GadgetLibrary::standard(), 1000, 0)?;
    println!("{report:#?}");
    assert!(report.passed(), "engines disagree");
    Ok(())
}
