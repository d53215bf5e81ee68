use std::path::PathBuf;

use clap::ValueEnum;
use grassmannian::grassmann::Tolerances;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Everything that determines a run. Identical configurations give
/// identical reports apart from the timestamp.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub pairs: Option<usize>,
    pub inputs: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub force_failure: bool,
    pub antiunitary: bool,
    pub stars: usize,
}

/// Tolerance injected by `--force-failure`; no numerical check meets it.
pub const FORCED_TOLERANCE: f64 = 1e-30;

impl RunConfig {
    pub fn tol(&self) -> Tolerances {
        if self.force_failure {
            Tolerances { rank: FORCED_TOLERANCE, angle: FORCED_TOLERANCE, commutator: FORCED_TOLERANCE }
        } else {
            self.tolerances
        }
    }

    pub fn pairs_or(&self, default: usize) -> usize {
        self.pairs.unwrap_or(default)
    }

    /// Independent sub-seeds for the parts of one run.
    pub fn sub_seed(&self, part: u64) -> u64 {
        self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(part.wrapping_mul(0xbf58_476d_1ce4_e5b9))
    }
}
