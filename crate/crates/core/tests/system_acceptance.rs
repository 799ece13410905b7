//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (no libtest harness) so every line is printed.
//! `STEANE_FT_SMOKE=1` shrinks the Monte Carlo budgets; the verdicts are
//! then indicative only.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use steane_ft::experiments::{linear_fit, ancilla_failure_rate, run_sweep, SweepSpec, TrialBudget, TrialConfig, TrialRunner};
use steane_ft::figures::{self, FigureOptions};
use steane_ft::frame::{propagate, PauliOp};
use steane_ft::noise::{enumerate_fault_space, ErrorClassFilter, Fault, FaultEvent, GateErrorRates};
use steane_ft::oracle::{ancilla_rejection_weight, enumerate_logical_failures, validate_engines};
use steane_ft::protocols::{AncillaKind, GadgetLibrary, ProtocolKind};
use steane_ft::steane::{encoder_cnot_location, plus_encoder, reduce_mod_stabilizers, zero_encoder, PauliType};

/// Rate at which Monte Carlo is compared with the exact second-order coefficient.
const ORACLE_P: f64 = 1e-5;
const ORACLE_MIN_FAILURES: u64 = 50;
const ORACLE_MAX_TRIALS: u64 = 1_000_000_000;
/// Comparison figure: CI separation is required from this rate up.
const COMPARE_SEPARATION_FROM: f64 = 5e-5;
const COMPARE_RATIO: (f64, f64) = (1.5, 3.0);
const ANCILLA_SLOPE_TOLERANCE: f64 = 0.10;
const ANCILLA_MIN_R2: f64 = 0.999;
const ANCILLA_ATTEMPTS: u64 = 20_000_000;
const SURFACE_LOW: f64 = 1e-5;
const SURFACE_HIGH: f64 = 3e-4;
const RANDOM_CIRCUITS: usize = 1000;

/// Rows of the paper's encoder table: data errors left by X⊗X after CNOT k,
/// qubits numbered from 1.
const ENCODER_TABLE: [&[usize]; 9] =
    [&[1, 3, 5, 7], &[4, 5, 6, 7], &[2, 3, 6, 7], &[1, 5, 7], &[4, 5, 7], &[2, 3, 6], &[2, 3], &[4, 5], &[1, 7]];

type Verdict = Result<String, String>;

fn smoke() -> bool {
    std::env::var_os("STEANE_FT_SMOKE").is_some_and(|v| v != "0")
}

fn pattern(qubits: &[usize]) -> u8 {
    qubits.iter().fold(0, |p, &q| p | 1 << (q - 1))
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_steane-ft"))
}

fn ft_certificate() -> Verdict {
    let out = bin().args(["fault-enum", "--order", "1"]).output().map_err(|e| e.to_string())?;
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let mut failures = Vec::new();
    let mut details = Vec::new();
    for entry in report["protocols"].as_array().ok_or("no protocols in report")? {
        let name = entry["protocol"].as_str().unwrap_or("?");
        let failing = entry["first_order_failures"].as_u64().ok_or("missing failure count")?;
        let expect_ft = name.parse::<ProtocolKind>().map_err(|e| e.to_string())?.is_fault_tolerant();
        details.push(format!("{name}={failing}"));
        if (failing == 0) != expect_ft {
            failures.push(name.to_string());
        }
    }
    check(
        failures.is_empty() && out.status.success() && details.len() == ProtocolKind::ALL.len(),
        format!("first-order failing faults: {}", details.join(" ")),
    )
}

fn encoder_table() -> Verdict {
    let mut bad = Vec::new();
    for (enc, (fault, ty)) in [
        (zero_encoder(), (Fault::Pair(PauliOp::X, PauliOp::X), PauliType::X)),
        (plus_encoder(), (Fault::Pair(PauliOp::Z, PauliOp::Z), PauliType::Z)),
    ] {
        for (k, row) in ENCODER_TABLE.iter().enumerate() {
            let loc = encoder_cnot_location(&enc, k + 1);
            let ev = FaultEvent { layer: enc.layer_of(loc), location: loc, fault };
            let (frame, _) = propagate(&enc, &[ev]).map_err(|e| e.to_string())?;
            let got = reduce_mod_stabilizers(ty.block(&frame, 0));
            let other = ty.other().block(&frame, 0);
            let want = reduce_mod_stabilizers(pattern(row));
            if got != want || other != 0 || (k < 3 && got != 0) {
                bad.push(format!("{ty:?} row {}", k + 1));
            }
        }
    }
    check(bad.is_empty(), if bad.is_empty() { "9 rows, both encoders".into() } else { bad.join(", ") })
}

fn verification_soundness() -> Verdict {
    let lib = GadgetLibrary::standard();
    let mut checked = 0;
    let mut bad = Vec::new();
    for kind in AncillaKind::ROUNDS {
        let seg = &lib.segment(lib.round(kind).prep_verify).circuit;
        let (_, clean) = propagate(seg, &[]).map_err(|e| e.to_string())?;
        if !lib.accepted(kind, &clean) {
            bad.push(format!("{kind:?} fault-free rejected"));
        }
        for (ev, _) in enumerate_fault_space(seg, ErrorClassFilter::All) {
            let (frame, rec) = propagate(seg, &[ev]).map_err(|e| e.to_string())?;
            let class = reduce_mod_stabilizers(kind.risk_type().block(&frame, lib.layout.ancilla));
            if class.count_ones() >= 2 {
                checked += 1;
                if lib.accepted(kind, &rec) {
                    bad.push(format!("{kind:?} {ev:?}"));
                }
            }
        }
    }
    check(bad.is_empty(), format!("{checked} high-weight single faults, {} accepted", bad.len()))
}

fn oracle_agreement() -> Verdict {
    let lib = GadgetLibrary::standard();
    let (min_failures, max_trials) = if smoke() { (5, 20_000_000) } else { (ORACLE_MIN_FAILURES, ORACLE_MAX_TRIALS) };
    let rates = GateErrorRates::uniform(ORACLE_P);
    let mut ok = true;
    let mut parts = Vec::new();
    for p in ProtocolKind::ALL {
        let predicted = enumerate_logical_failures(&lib, p, 2).map_err(|e| e.to_string())?.predicted_pl(&rates);
        let runner = TrialRunner::new(&lib, TrialConfig::new(p, rates, 0xACCE_0004)).map_err(|e| e.to_string())?;
        let tally = runner.run_until(min_failures, max_trials).map_err(|e| e.to_string())?;
        let c = tally.combined();
        let inside = c.ci.0 <= predicted && predicted <= c.ci.1;
        ok &= inside;
        parts.push(format!(
            "{p}: {}/{} = {:.3e} [{:.3e}, {:.3e}] vs {:.3e}{}",
            c.logical_failures,
            c.trials,
            c.rate,
            c.ci.0,
            c.ci.1,
            predicted,
            if inside { "" } else { " OUTSIDE" }
        ));
    }
    check(ok, parts.join("; "))
}

fn compare_figure() -> Verdict {
    let lib = GadgetLibrary::standard();
    let budget = if smoke() {
        TrialBudget::UntilFailures { min_failures: 20, max_trials: 2_000_000 }
    } else {
        TrialBudget::UntilFailures { min_failures: 100, max_trials: 50_000_000 }
    };
    let out = figures::compare(&lib, &FigureOptions::new(42).with_budget(budget)).map_err(|e| e.to_string())?;
    let col = |name: &str| out.table.column(name).ok_or_else(|| format!("missing column {name}"));
    let (p, dec, ss, naive) = (col("p")?, col("P_L_decoding")?, col("P_L_simple-series")?, col("P_L_naive-no-wait")?);
    let (dec_hi, ss_lo) = (col("ci_high_decoding")?, col("ci_low_simple-series")?);
    let mut problems = Vec::new();
    for i in 0..p.len() {
        if dec[i] >= ss[i] {
            problems.push(format!("decoding >= simple-series at p={:.2e}", p[i]));
        }
        if p[i] >= COMPARE_SEPARATION_FROM * (1.0 - 1e-9) && dec_hi[i] >= ss_lo[i] {
            problems.push(format!("CIs overlap at p={:.2e}", p[i]));
        }
        if naive[i] >= dec[i] {
            problems.push(format!("naive >= decoding at p={:.2e}", p[i]));
        }
    }
    let top = p.len() - 1;
    let ratio = ss[top] / dec[top];
    if !(COMPARE_RATIO.0..=COMPARE_RATIO.1).contains(&ratio) {
        problems.push(format!("top ratio {ratio:.3} outside [{}, {}]", COMPARE_RATIO.0, COMPARE_RATIO.1));
    }
    let summary = format!(
        "at p={:.0e}: decoding {:.3e}, simple-series {:.3e}, naive {:.3e}, ratio {ratio:.3}",
        p[top], dec[top], ss[top], naive[top]
    );
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", problems.join("; ")))
    }
}

fn ancilla_linearity() -> Verdict {
    let lib = GadgetLibrary::standard();
    let attempts = if smoke() { 2_000_000 } else { ANCILLA_ATTEMPTS };
    let slope_oracle = ancilla_rejection_weight(&lib, AncillaKind::Zero).map_err(|e| e.to_string())?.at_equal_rates();
    let mut pts = Vec::new();
    for p in figures::ANCILLA_GRID {
        let r = ancilla_failure_rate(&lib, &GateErrorRates::uniform(p), attempts, 0xACCE_0006).map_err(|e| e.to_string())?;
        pts.push((p, r.rate));
    }
    let (slope, _, r2) = linear_fit(&pts);
    let rel = (slope - slope_oracle).abs() / slope_oracle;
    check(
        rel <= ANCILLA_SLOPE_TOLERANCE && r2 > ANCILLA_MIN_R2,
        format!("slope {slope:.3} vs first-order {slope_oracle:.3} ({:.1}% off), R^2 {r2:.6}", rel * 100.0),
    )
}

fn class_decomposition() -> Verdict {
    let lib = GadgetLibrary::standard();
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, want) in [
        (ProtocolKind::SimpleSeries, ErrorClassFilter::Class1),
        (ProtocolKind::Decoding, ErrorClassFilter::Class2),
        (ProtocolKind::NaiveNoWait, ErrorClassFilter::Class2),
    ] {
        let c2 = enumerate_logical_failures(&lib, p, 2).map_err(|e| e.to_string())?.c2;
        let coeffs = ErrorClassFilter::CLASSES.map(|f| (f, c2.class_coefficient(f)));
        let largest = coeffs.iter().max_by(|a, b| a.1.total_cmp(&b.1)).expect("three classes").0;
        ok &= largest == want;
        parts.push(format!(
            "{p}: {:.2}/{:.2}/{:.2} largest {largest} (want {want})",
            coeffs[0].1, coeffs[1].1, coeffs[2].1
        ));
    }
    check(ok, parts.join("; "))
}

fn surface_crossover() -> Verdict {
    let lib = GadgetLibrary::standard();
    let corner = |p_cnot, p_wait| GateErrorRates { p_prep: SURFACE_LOW, p_meas: SURFACE_LOW, p_wait, p_cnot };
    let low_cnot_high_wait = corner(SURFACE_LOW, SURFACE_HIGH);
    let high_cnot_low_wait = corner(SURFACE_HIGH, SURFACE_LOW);
    let grid = figures::surface_points();
    if !grid.contains(&low_cnot_high_wait) || !grid.contains(&high_cnot_low_wait) {
        return Err("corners missing from the surface preset".into());
    }
    let spec = SweepSpec {
        points: vec![low_cnot_high_wait, high_cnot_low_wait],
        protocols: vec![ProtocolKind::TwoAncillaSeries, ProtocolKind::Decoding],
        filters: vec![ErrorClassFilter::All],
        budget: if smoke() {
            TrialBudget::UntilFailures { min_failures: 20, max_trials: 5_000_000 }
        } else {
            TrialBudget::UntilFailures { min_failures: 200, max_trials: 100_000_000 }
        },
        master_seed: 0xACCE_0008,
        rerun_cap: 1000,
    };
    let r = run_sweep(&lib, &spec).map_err(|e| e.to_string())?;
    let (tas_a, dec_a, tas_b, dec_b) = (r[0].tally.combined(), r[1].tally.combined(), r[2].tally.combined(), r[3].tally.combined());
    let verification_wins = tas_a.separated_below(&dec_a);
    let decoding_wins = dec_b.rate < tas_b.rate;
    check(
        verification_wins && decoding_wins,
        format!(
            "(cnot 1e-5, wait 3e-4): two-ancilla-series {:.3e} vs decoding {:.3e}{}; (cnot 3e-4, wait 1e-5): decoding {:.3e} vs two-ancilla-series {:.3e}{}",
            tas_a.rate,
            dec_a.rate,
            if verification_wins { "" } else { " (verification not below)" },
            dec_b.rate,
            tas_b.rate,
            if decoding_wins { "" } else { " (decoding not below)" },
        ),
    )
}

fn engine_equivalence() -> Verdict {
    let lib = GadgetLibrary::standard();
    let r = validate_engines(&lib, RANDOM_CIRCUITS, 0xACCE_0009).map_err(|e| e.to_string())?;
    check(
        r.passed() && r.random_circuits == RANDOM_CIRCUITS,
        format!(
            "library {}/{} mismatches, random {}/{} mismatches, {} flips compared",
            r.library_mismatches, r.library_cases, r.random_mismatches, r.random_circuits, r.measurements_compared
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |jobs: &str, file: &Path| -> Result<Vec<u8>, String> {
        let status = bin()
            .args(["figure", "compare", "--seed", "42", "--trials", "300000", "--jobs", jobs, "--out"])
            .arg(file)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("figure compare --jobs {jobs} exited with {status}"));
        }
        std::fs::read(file).map_err(|e| e.to_string())
    };
    let a = run("1", &dir.path().join("jobs1.csv"))?;
    let b = run("4", &dir.path().join("jobs4.csv"))?;
    check(a == b && !a.is_empty(), format!("{} bytes, --jobs 1 vs --jobs 4 {}", a.len(), if a == b { "identical" } else { "differ" }))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("1 FT certificate", ft_certificate),
        ("2 encoder CNOT fault table", encoder_table),
        ("3 verification soundness", verification_soundness),
        ("9 engine equivalence", engine_equivalence),
        ("7 class decomposition", class_decomposition),
        ("10 determinism", determinism),
        ("6 ancilla failure linearity", ancilla_linearity),
        ("8 surface crossover", surface_crossover),
        ("5 comparison figure", compare_figure),
        ("4 oracle agreement", oracle_agreement),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS  criterion {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name} ({secs:.1}s): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
