//! Drives a sweep from a JSON configuration and writes the records as CSV,
//! the same path the `sweep` subcommand takes.

use steane_ft::experiments::run_sweep;
use steane_ft::protocols::GadgetLibrary;
use steane_ft::report::{read_records, write_records, Format, ResultRecord, RunConfig};

const CONFIG: &str = r#"{
    "protocols": ["decoding", "two-ancilla-parallel"],
    "grid": {
        "p_prep": [1e-5],
        "p_meas": [1e-5],
        "p_wait": [1e-5],
        "p_cnot": {"log_start": 1e-4, "log_stop": 1e-3, "points": 3}
    },
    "filters": ["all"],
    "trials": {"min_failures": 50, "max_trials": 2000000},
    "master_seed": 2024
}"#;

fn main() -> steane_ft::Result<()> {
    let config: RunConfig = serde_json::from_str(CONFIG).expect("example config parses");
    let spec = config.sweep_spec()?;
    let lib = GadgetLibrary::new(config.options)?;
    let records = ResultRecord::from_points(&run_sweep(&lib, &spec)?);

    let path = std::env::temp_dir().join("steane-ft-sweep.csv");
    write_records(&records, &path, Format::Csv)?;
    for r in read_records(&path, Format::Csv)?.iter().filter(|r| r.basis == "combined") {
        println!("{:<22} p_cnot {:.2e}  P_L {:.3e}  ({} / {})", r.protocol.name(), r.p_cnot, r.rate, r.failures, r.trials);
    }
    println!("records written to {}", path.display());
    Ok(())
}
