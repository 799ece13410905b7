//! Fault-tolerant QEC gadgets: ancilla preparation with verification or
//! decoding, Steane syndrome extraction, and the timing rules of each
//! ancilla-supply protocol.
//!
//! A full QEC cycle is a |0_L⟩ round (extracts the Z-error syndrome of the
//! data, risks copying X errors onto it) followed by the X/Z-dual |+_L⟩
//! round. Each round is executed as a sequence of [`Segment`]s; which
//! segments run depends on verification outcomes, so the executor decides
//! the next segment only after the previous one has been propagated.

mod decoding;
mod exec;
mod gadgets;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::steane::PauliType;

pub use decoding::{DecodingEntry, DecodingTable};
pub use exec::{
    run_decoding_qec_round, run_full_qec, run_steane_extraction, run_verification_qec_round, Executor, FaultSource,
    InjectedFaults, NoFaults, QecRoundOutcome, RoundOutcome, SampledFaults, SamplerSet,
};
pub use gadgets::{verification_accepts, GadgetLibrary, Layout, RoundGadgets, Segment, SegmentId};

/// Ancilla-supply strategy for each QEC round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    /// Encoded ancilla used unverified (not fault tolerant).
    NonFt,
    /// Verify until success; the data idles through every failed attempt.
    SimpleSeries,
    /// As `SimpleSeries` but the data never idles (optimistic bound).
    NaiveNoWait,
    /// Two sequential attempts; a passing first ancilla idles until the
    /// second attempt would have finished.
    TwoAncillaSeries,
    /// Two simultaneous attempts; the second is swapped into place if only it passes.
    TwoAncillaParallel,
    /// No verification: the ancilla is decoded after use and any first-order
    /// error it copied onto the data is corrected.
    Decoding,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 6] = [
        ProtocolKind::NonFt,
        ProtocolKind::SimpleSeries,
        ProtocolKind::NaiveNoWait,
        ProtocolKind::TwoAncillaSeries,
        ProtocolKind::TwoAncillaParallel,
        ProtocolKind::Decoding,
    ];

    pub const FAULT_TOLERANT: [ProtocolKind; 5] = [
        ProtocolKind::SimpleSeries,
        ProtocolKind::NaiveNoWait,
        ProtocolKind::TwoAncillaSeries,
        ProtocolKind::TwoAncillaParallel,
        ProtocolKind::Decoding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::NonFt => "non-ft",
            ProtocolKind::SimpleSeries => "simple-series",
            ProtocolKind::NaiveNoWait => "naive-no-wait",
            ProtocolKind::TwoAncillaSeries => "two-ancilla-series",
            ProtocolKind::TwoAncillaParallel => "two-ancilla-parallel",
            ProtocolKind::Decoding => "decoding",
        }
    }

    pub fn uses_verification(self) -> bool {
        !matches!(self, ProtocolKind::NonFt | ProtocolKind::Decoding)
    }

    pub fn is_fault_tolerant(self) -> bool {
        self != ProtocolKind::NonFt
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        ProtocolKind::ALL
            .into_iter()
            .find(|p| p.name() == norm)
            .or(match norm.as_str() {
                "nonft" => Some(ProtocolKind::NonFt),
                "series" => Some(ProtocolKind::SimpleSeries),
                "naive" => Some(ProtocolKind::NaiveNoWait),
                "parallel" => Some(ProtocolKind::TwoAncillaParallel),
                _ => None,
            })
            .ok_or_else(|| Error::Config(format!("unknown protocol `{s}`")))
    }
}

/// Which encoded ancilla a round uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AncillaKind {
    /// |0_L⟩: CNOT ancilla → data, X measurement; finds data Z errors.
    Zero,
    /// |+_L⟩: CNOT data → ancilla, Z measurement; finds data X errors.
    Plus,
}

impl AncillaKind {
    pub const ROUNDS: [AncillaKind; 2] = [AncillaKind::Zero, AncillaKind::Plus];

    /// Error component on the data that this round's syndrome corrects.
    pub fn syndrome_type(self) -> PauliType {
        match self {
            AncillaKind::Zero => PauliType::Z,
            AncillaKind::Plus => PauliType::X,
        }
    }

    /// Error component the ancilla can copy onto the data.
    pub fn risk_type(self) -> PauliType {
        self.syndrome_type().other()
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Idle durations, in time steps, of the verification protocols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Timing {
    /// Data idle per failed verification in `SimpleSeries` (one create-and-verify).
    pub series_data_wait: usize,
    /// Idle of a passing first ancilla in `TwoAncillaSeries`.
    pub series_ancilla_wait: usize,
    /// Idle of a passing first ancilla in `TwoAncillaParallel` (one SWAP).
    pub parallel_ancilla_wait: usize,
}

impl Default for Timing {
    fn default() -> Self {
        Timing { series_data_wait: 6, series_ancilla_wait: 6, parallel_ancilla_wait: 3 }
    }
}

/// How the second parallel ancilla reaches the data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParallelLayout {
    /// The second ancilla sits next to the first: one transversal SWAP.
    #[default]
    SingleSwap,
    /// The second ancilla sits beyond the first verifier: two SWAPs, and a
    /// passing first ancilla idles for both.
    DoubleSwap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolOptions {
    pub timing: Timing,
    pub parallel_layout: ParallelLayout,
    /// Hard limit on consecutive failed verifications in the unbounded
    /// series protocols.
    pub retry_cap: u32,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions { timing: Timing::default(), parallel_layout: ParallelLayout::default(), retry_cap: 100 }
    }
}
