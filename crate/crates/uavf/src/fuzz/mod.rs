//! Coverage-guided fuzzing: corpus management, mutational and generational
//! input creation, the campaign loop with stuck detection, and crash
//! minimization. All randomness flows from a single 64-bit seed, so
//! campaigns are reproducible.

mod campaign;
pub mod grammar;
pub mod mutate;
mod minimize;

pub use campaign::{
    campaign, compare_modes, CampaignConfig, CompareReport, CompareRow, FrontierBranch, Mode,
    StuckReport, DEFAULT_STUCK_WINDOW,
};
pub use grammar::{tello_spec, ProtocolSpec, DEFAULT_ANOMALY_RATE};
pub use minimize::{minimize, NonReproducible};

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::exec::ExecOutcome;

/// Upper bound on test-case length.
pub const MAX_TESTCASE_LEN: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Seed,
    Mutated { parent: usize, operator: String },
    Generated { trace: Vec<String> },
    BmcModel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub bytes: Vec<u8>,
    pub origin: Origin,
    /// Campaign execution counter at discovery.
    pub tick: u64,
    /// Edges newly covered when this case was admitted.
    pub new_edges: u32,
}

impl TestCase {
    pub fn seed(bytes: Vec<u8>) -> Self {
        TestCase { bytes, origin: Origin::Seed, tick: 0, new_edges: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrashRecord {
    pub case: TestCase,
    pub outcome: ExecOutcome,
    pub minimized: Option<Vec<u8>>,
}

/// The fuzzer's working set: admitted test cases, the global edge-coverage
/// map, the explored PathSet Π, and recorded crashes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub cases: Vec<TestCase>,
    pub coverage: BTreeSet<u32>,
    /// Path id -> branch decision list.
    pub paths: HashMap<u64, Vec<(u32, bool)>>,
    pub crashes: Vec<CrashRecord>,
}

impl Corpus {
    /// Path ids explored so far, for use as a BMC exclusion set.
    pub fn path_set(&self) -> std::collections::HashSet<u64> {
        self.paths.keys().copied().collect()
    }

    /// Distinct fault locations among recorded crashes.
    pub fn fault_locations(&self) -> BTreeSet<(String, crate::mini_ir::Loc)> {
        self.crashes
            .iter()
            .filter_map(|c| match &c.outcome.status {
                crate::exec::ExecStatus::Fault { kind, loc } => Some((kind.to_string(), *loc)),
                _ => None,
            })
            .collect()
    }
}

/// How raw message bytes are presented to the target program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputFraming {
    /// Bytes go to the program as-is.
    Raw,
    /// `[len: u32 LE][bytes]`, the layout the endpoint handler reads.
    LenPrefixed,
}

impl InputFraming {
    pub fn frame(self, msg: &[u8]) -> Vec<u8> {
        match self {
            InputFraming::Raw => msg.to_vec(),
            InputFraming::LenPrefixed => {
                let mut out = (msg.len() as u32).to_le_bytes().to_vec();
                out.extend_from_slice(msg);
                out
            }
        }
    }
}
