//! Labeled circuit corpora: structure sampling, parameter optimization, balancing and JSONL I/O.

mod balance;
mod corpus;
mod io;
mod optimize;
mod structure;

pub use balance::BalanceSpec;
pub use corpus::{build_corpus, CorpusConfig, LabeledCircuit, Provenance};
pub use io::{read_corpus, write_corpus};
pub use optimize::{optimize_params, rotosolve_angle, Objective};
pub(crate) use optimize::Scorer;
pub use structure::{ghz_skeleton, sample_structure};

use serde::{Deserialize, Serialize};

/// What a circuit is scored on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Ghz,
    Ml,
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TaskKind::Ghz => "ghz",
            TaskKind::Ml => "ml",
        })
    }
}

impl std::str::FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ghz" => Ok(TaskKind::Ghz),
            "ml" => Ok(TaskKind::Ml),
            _ => Err(format!("unknown task '{s}' (expected ghz or ml)")),
        }
    }
}
