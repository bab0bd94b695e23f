//! Symbolic rank-one systems: building blocks W_n, their statistics, the
//! cylinder measure and infinite/degenerate diagnostics.

mod blocks;
mod diagnostics;
mod params;

pub use blocks::{
    build_blocks, limit_prefix, occurrence_count, occurrence_offsets, BlockStats, Word,
    DEFAULT_LENGTH_CAP,
};
pub use diagnostics::{
    cylinder_measure, is_infinite, normalized_cylinder, periodicity_report, prime_condition,
    CylinderSeries, InfinityReport, InfinityVerdict, NormalizedCylinder, PeriodicityReport,
    PeriodicityStatus, RatioPoint,
};
pub use params::{Cutting, RankOneParams, Rule, Spacers, StageSpec, Tower};

/// A cylinder O_{v,k}: sequences showing the word `v` at position `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderSpec {
    pub word: Word,
    pub position: i64,
}

impl CylinderSpec {
    pub fn new(word: Word, position: i64) -> crate::Result<Self> {
        if word.is_empty() {
            return Err(crate::Error::InvalidArgument(
                "cylinder word must be nonempty".into(),
            ));
        }
        Ok(CylinderSpec { word, position })
    }
}
