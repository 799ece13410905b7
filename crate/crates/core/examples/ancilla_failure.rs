//! Rejection rate of verified |0_L⟩ preparation. The rate is linear in p at
//! low rates, with slope equal to the total weight of single faults the
//! verifier detects.

use steane_ft::experiments::{ancilla_failure_rate, linear_fit};
use steane_ft::figures::ANCILLA_GRID;
use steane_ft::noise::GateErrorRates;
use steane_ft::oracle::ancilla_rejection_weight;
use steane_ft::protocols::{AncillaKind, GadgetLibrary};

fn main() -> steane_ft::Result<()> {
    let lib = GadgetLibrary::standard();
    let slope = ancilla_rejection_weight(&lib, AncillaKind::Zero)?.at_equal_rates();
    let mut points = Vec::new();
    for p in ANCILLA_GRID {
        let r = ancilla_failure_rate(&lib, &GateErrorRates::uniform(p), 5_000_000, 3)?;
        println!("p {p:.0e}  rejected {:.4e}  [{:.4e}, {:.4e}]  first order {:.4e}", r.rate, r.ci.0, r.ci.1, slope * p);
        points.push((p, r.rate));
    }
    let (fit, intercept, r2) = linear_fit(&points);
    println!("fit slope {fit:.3} (exact first order {slope:.3}), intercept {intercept:.2e}, R^2 {r2:.6}");
    Ok(())
}
