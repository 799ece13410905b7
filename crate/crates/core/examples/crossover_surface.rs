//! Two-ancilla series verification against decoding over the CNOT × wait
//! rate plane (preparation and measurement fixed at 1e-5), from the exact
//! second-order polynomials. `<` marks points where verification wins.

use steane_ft::figures::{surface_axis, SURFACE_FIXED_RATE};
use steane_ft::noise::GateErrorRates;
use steane_ft::oracle::enumerate_logical_failures;
use steane_ft::protocols::{GadgetLibrary, ProtocolKind};

fn main() -> steane_ft::Result<()> {
    let lib = GadgetLibrary::standard();
    let tas = enumerate_logical_failures(&lib, ProtocolKind::TwoAncillaSeries, 2)?;
    let dec = enumerate_logical_failures(&lib, ProtocolKind::Decoding, 2)?;
    let axis = surface_axis();

    print!("{:>10}", "cnot\\wait");
    for w in &axis {
        print!("{w:>20.2e}");
    }
    println!();
    for &p_cnot in &axis {
        print!("{p_cnot:>10.2e}");
        for &p_wait in &axis {
            let r = GateErrorRates { p_prep: SURFACE_FIXED_RATE, p_meas: SURFACE_FIXED_RATE, p_wait, p_cnot };
            let (a, b) = (tas.predicted_pl(&r), dec.predicted_pl(&r));
            print!("{:>9.2e} {} {:>8.2e}", a, if a < b { '<' } else { '>' }, b);
        }
        println!();
    }
    println!("\nwait^2 coefficients: two-ancilla-series {:.2}, decoding {:.2}", wait_sq(&tas.c2), wait_sq(&dec.c2));
    Ok(())
}

fn wait_sq(c2: &steane_ft::oracle::RatePolynomial) -> f64 {
    c2.evaluate(&GateErrorRates { p_prep: 0.0, p_meas: 0.0, p_wait: 1.0, p_cnot: 0.0 })
}
