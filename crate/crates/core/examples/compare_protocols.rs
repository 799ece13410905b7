//! Monte Carlo logical error rate of ancilla decoding against verification
//! (with and without holding the data after a rejection), next to the
//! second-order prediction.
//!
//! ```text
//! cargo run --release --example compare_protocols -- 2000000
//! ```

use steane_ft::experiments::{TrialConfig, TrialRunner};
use steane_ft::noise::GateErrorRates;
use steane_ft::oracle::enumerate_logical_failures;
use steane_ft::protocols::{GadgetLibrary, ProtocolKind};

fn main() -> steane_ft::Result<()> {
    let trials: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1_000_000);
    let lib = GadgetLibrary::standard();
    let protocols = [ProtocolKind::Decoding, ProtocolKind::SimpleSeries, ProtocolKind::NaiveNoWait];

    for p in [1e-4, 2e-4, 4e-4] {
        let rates = GateErrorRates::uniform(p);
        println!("p = {p:e}");
        for protocol in protocols {
            let predicted = enumerate_logical_failures(&lib, protocol, 2)?.predicted_pl(&rates);
            let tally = TrialRunner::new(&lib, TrialConfig::new(protocol, rates, 1))?.run(trials)?;
            let est = tally.estimate();
            println!(
                "  {:<14} P_L {:.3e}  95% [{:.3e}, {:.3e}]  c2 p^2 {:.3e}  rejections {}",
                protocol.name(),
                est.p_l,
                est.ci.0,
                est.ci.1,
                predicted,
                tally.verification_failures
            );
        }
    }
    Ok(())
}
