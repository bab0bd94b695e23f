use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::blocks::{build_blocks, limit_prefix, occurrence_count, Word};
use super::params::{RankOneParams, Tower};
use crate::error::{invalid, Error, Result};

/// fr(v, W_n) / fr(0, W_n) at one stage, kept exact.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioPoint {
    pub stage: usize,
    pub occurrences: BigUint,
    pub zeros: BigUint,
    pub value: f64,
}

impl RatioPoint {
    fn new(stage: usize, occurrences: BigUint, zeros: BigUint) -> Self {
        let value = big_ratio_f64(&occurrences, &zeros);
        RatioPoint {
            stage,
            occurrences,
            zeros,
            value,
        }
    }

    pub fn exact(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.occurrences.clone()),
            BigInt::from(self.zeros.clone()),
        )
    }
}

pub(crate) fn big_ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
        .to_f64()
        .unwrap_or(f64::INFINITY)
}

/// Ratio series whose last value estimates μ(O_{v,0}) (normalized so that
/// μ(O_{0,0}) = 1).
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderSeries {
    pub word: Word,
    pub points: Vec<RatioPoint>,
}

impl CylinderSeries {
    pub fn estimate(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.value)
    }
}

/// fr(v, W_n)/fr(0, W_n) for n = 0..=K.
///
/// Single-symbol words use the exact recurrence counts at every stage. Longer
/// words are counted in materialized blocks, so the series stops at the last
/// stage whose block fits in `length_cap`.
pub fn cylinder_measure(
    params: &RankOneParams,
    v: &str,
    stages: usize,
    length_cap: usize,
) -> Result<CylinderSeries> {
    let word: Word = v.parse()?;
    if word.is_empty() {
        return invalid("cylinder word must be nonempty");
    }
    let blocks = build_blocks(params, stages.max(1), length_cap)?;
    let mut points = Vec::new();
    for b in blocks.iter().take(stages + 1) {
        let occ = match (word.bits(), &b.word) {
            ([0], _) => b.zeros.clone(),
            ([1], _) => b.ones.clone(),
            (_, Some(w)) => BigUint::from(occurrence_count(&word, w)?),
            (_, None) => break,
        };
        points.push(RatioPoint::new(b.stage, occ, b.zeros.clone()));
    }
    Ok(CylinderSeries { word, points })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfinityVerdict {
    FiniteSuspected,
    InfiniteSuspected,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfinityReport {
    /// fr(1, W_n)/fr(0, W_n) for n = 0..=K.
    pub curve: Vec<RatioPoint>,
    pub verdict: InfinityVerdict,
}

/// Flags the spacer symbol as carrying infinite mass when the ratio
/// fr(1, W_K)/fr(0, W_K) exceeds `threshold` and has increased over the last
/// three stages. A numerical diagnostic only.
pub fn is_infinite(
    params: &RankOneParams,
    stages: usize,
    threshold: f64,
) -> Result<InfinityReport> {
    if stages < 3 {
        return invalid("at least three stages are required");
    }
    let series = cylinder_measure(params, "1", stages, 1)?;
    let curve = series.points;
    let k = curve.len() - 1;
    let increasing = (k - 2..k).all(|i| curve[i].exact() < curve[i + 1].exact());
    let verdict = if curve[k].value > threshold && increasing {
        InfinityVerdict::InfiniteSuspected
    } else {
        InfinityVerdict::FiniteSuspected
    };
    Ok(InfinityReport { curve, verdict })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeriodicityStatus {
    AperiodicityWitnessed,
    /// The prefix is periodic with this (smallest) period up to the depth.
    PeriodicUpToDepth {
        period: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicityReport {
    pub depth: usize,
    pub status: PeriodicityStatus,
    /// For each candidate period q = 1..=P, the first i with
    /// W_∞[i] ≠ W_∞[i + q], or `None` if none below depth − q.
    pub witnesses: Vec<(usize, Option<usize>)>,
}

/// Tests every period q ≤ `max_period` on the length-`depth` prefix of W_∞.
/// Never claims degeneracy, only periodicity up to the depth.
pub fn periodicity_report(
    params: &RankOneParams,
    depth: usize,
    max_period: usize,
    length_cap: usize,
) -> Result<PeriodicityReport> {
    if max_period == 0 {
        return invalid("max_period must be positive");
    }
    if depth <= max_period {
        return invalid(format!("depth {depth} must exceed max_period {max_period}"));
    }
    if depth > length_cap {
        return Err(Error::LengthCap {
            len: depth.to_string(),
            cap: length_cap,
        });
    }
    let prefix = limit_prefix(params, depth)?;
    let bits = prefix.bits();
    let witnesses: Vec<(usize, Option<usize>)> = (1..=max_period)
        .map(|q| (q, (0..depth - q).find(|&i| bits[i] != bits[i + q])))
        .collect();
    let status = witnesses
        .iter()
        .find(|(_, w)| w.is_none())
        .map_or(PeriodicityStatus::AperiodicityWitnessed, |&(q, _)| {
            PeriodicityStatus::PeriodicUpToDepth { period: q }
        });
    Ok(PeriodicityReport {
        depth,
        status,
        witnesses,
    })
}

/// True iff q does not divide (p_n − 1)·h_n + Σ_j s(n, j).
pub fn prime_condition(params: &RankOneParams, n: usize, q: u64) -> Result<bool> {
    if q < 2 {
        return invalid(format!("q = {q} must be at least 2"));
    }
    let tower = Tower::build(params, n + 1)?;
    let spec = &tower.stages[n];
    let quantity = &tower.heights[n] * (spec.cutting - 1) + spec.spacer_total();
    Ok(!(quantity % q).is_zero())
}

/// Cylinder [B_n] (W_n at position 0) with the constant 1/√μ([B_n]).
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedCylinder {
    pub word: Word,
    pub position: i64,
    pub measure: f64,
    pub normalization: f64,
}

/// f_n = 1_{[B_n]} / √μ([B_n]); μ([B_n]) is estimated by the ratio
/// fr(W_n, W_m)/fr(0, W_m) at `estimate_stage` m.
pub fn normalized_cylinder(
    params: &RankOneParams,
    n: usize,
    estimate_stage: usize,
    length_cap: usize,
) -> Result<NormalizedCylinder> {
    if estimate_stage < n {
        return invalid("estimate stage must not precede the cylinder stage");
    }
    let blocks = build_blocks(params, n.max(1), length_cap)?;
    let word = blocks[n].word.clone().ok_or_else(|| Error::LengthCap {
        len: blocks[n].height.to_string(),
        cap: length_cap,
    })?;
    let series = cylinder_measure(params, &word.to_string(), estimate_stage, length_cap)?;
    if series.points.len() <= estimate_stage {
        return Err(Error::LengthCap {
            len: format!("W_{estimate_stage}"),
            cap: length_cap,
        });
    }
    let measure = series.estimate();
    if measure <= 0.0 {
        return Err(Error::DegenerateCylinder(format!(
            "μ([B_{n}]) estimate is zero at stage {estimate_stage}"
        )));
    }
    Ok(NormalizedCylinder {
        word,
        position: 0,
        measure,
        normalization: 1.0 / measure.sqrt(),
    })
}
