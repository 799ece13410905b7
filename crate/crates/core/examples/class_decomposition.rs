//! Which gate type dominates the logical error rate? Exact per-class
//! coefficients, then a Monte Carlo check with one class switched on.

use steane_ft::experiments::{TrialConfig, TrialRunner};
use steane_ft::noise::{ErrorClassFilter, GateErrorRates};
use steane_ft::oracle::enumerate_logical_failures;
use steane_ft::protocols::{GadgetLibrary, ProtocolKind};

fn main() -> steane_ft::Result<()> {
    let lib = GadgetLibrary::standard();
    let p = 3e-4;
    let rates = GateErrorRates::uniform(p);
    for protocol in [ProtocolKind::NaiveNoWait, ProtocolKind::SimpleSeries, ProtocolKind::Decoding] {
        let c2 = enumerate_logical_failures(&lib, protocol, 2)?.c2;
        println!("{protocol}");
        for filter in ErrorClassFilter::CLASSES {
            let coeff = c2.class_coefficient(filter);
            let mut config = TrialConfig::new(protocol, rates, 5);
            config.filter = filter;
            let c = TrialRunner::new(&lib, config)?.run(2_000_000)?.combined();
            println!("  {filter}: exact {:>7.2} p^2 = {:.2e}   MC {:.2e} [{:.2e}, {:.2e}]", coeff, coeff * p * p, c.rate, c.ci.0, c.ci.1);
        }
    }
    Ok(())
}
