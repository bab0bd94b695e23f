use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::params::{RankOneParams, Tower};
use crate::error::{invalid, Error, Result};

/// Default cap on materialized word length (symbols).
pub const DEFAULT_LENGTH_CAP: usize = 10_000_000;

/// A finite word over {0, 1}, one byte per symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn from_bits(bits: Vec<u8>) -> Result<Word> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return invalid(format!("symbol {b} outside {{0, 1}}"));
        }
        Ok(Word(bits))
    }

    pub fn zero() -> Word {
        Word(vec![0])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }

    pub fn count_symbol(&self, symbol: u8) -> usize {
        self.0.iter().filter(|&&b| b == symbol).count()
    }

    pub fn contains_zero(&self) -> bool {
        self.0.contains(&0)
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Word> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => invalid(format!("symbol {other:?} outside {{0, 1}}")),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self
            .0
            .iter()
            .map(|&b| if b == 0 { '0' } else { '1' })
            .collect();
        f.write_str(&s)
    }
}

/// Statistics of the building block W_n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStats {
    pub stage: usize,
    pub height: BigUint,
    pub zeros: BigUint,
    pub ones: BigUint,
    /// W_n itself, present while h_n is within the length cap.
    pub word: Option<Word>,
}

/// Builds W_0, …, W_K with exact counts. Words are materialized while
/// h_n ≤ `length_cap`; counts continue through the recurrences.
///
/// W_0 = 0 and W_{n+1} = W_n 1^{s(n,0)} W_n 1^{s(n,1)} ⋯ W_n 1^{s(n,p_n−1)}.
pub fn build_blocks(
    params: &RankOneParams,
    stages: usize,
    length_cap: usize,
) -> Result<Vec<BlockStats>> {
    if stages == 0 {
        return invalid("at least one stage is required");
    }
    if length_cap == 0 {
        return invalid("length cap must be positive");
    }
    let tower = Tower::build(params, stages)?;
    let mut out = Vec::with_capacity(stages + 1);
    out.push(BlockStats {
        stage: 0,
        height: BigUint::one(),
        zeros: BigUint::one(),
        ones: BigUint::zero(),
        word: Some(Word::zero()),
    });
    for n in 0..stages {
        let level = &tower.stages[n];
        let prev = &out[n];
        let total = level.spacer_total();
        let zeros = &prev.zeros * level.cutting;
        let ones = &prev.ones * level.cutting + &total;
        let height = tower.heights[n + 1].clone();
        debug_assert_eq!(&zeros + &ones, height);
        let word = match (&prev.word, height.to_usize()) {
            (Some(w), Some(h)) if h <= length_cap => Some(concatenate(w, &level.spacers, h)),
            _ => None,
        };
        out.push(BlockStats {
            stage: n + 1,
            height,
            zeros,
            ones,
            word,
        });
    }
    Ok(out)
}

/// W_n 1^{s_0} W_n 1^{s_1} ⋯ truncated to `limit` symbols.
fn concatenate(block: &Word, spacers: &[BigUint], limit: usize) -> Word {
    let mut bits = Vec::with_capacity(limit);
    for s in spacers {
        if bits.len() >= limit {
            break;
        }
        let take = block.len().min(limit - bits.len());
        bits.extend_from_slice(&block.bits()[..take]);
        let room = limit - bits.len();
        let run = s.to_usize().map_or(room, |s| s.min(room));
        bits.resize(bits.len() + run, 1);
    }
    Word(bits)
}

/// The first `len` symbols of W_∞ (the common extension of all W_n).
pub fn limit_prefix(params: &RankOneParams, len: usize) -> Result<Word> {
    let mut word = Word::zero();
    let mut height = BigUint::one();
    let mut n = 0;
    while word.len() < len {
        let level = params.stage(n, &height)?;
        height = &height * level.cutting + level.spacer_total();
        let target = height.to_usize().map_or(len, |h| h.min(len));
        word = concatenate(&word, &level.spacers, target);
        n += 1;
    }
    word.0.truncate(len);
    Ok(word)
}

/// Number of (overlapping) occurrences of `v` in `w`.
pub fn occurrence_count(v: &Word, w: &Word) -> Result<u64> {
    if v.is_empty() {
        return invalid("pattern word must be nonempty");
    }
    if v.len() > w.len() {
        return Ok(0);
    }
    Ok(w.bits()
        .windows(v.len())
        .filter(|win| *win == v.bits())
        .count() as u64)
}

/// Positions j·h_n + s̃(n, j) where the copies of W_n start inside W_{n+1}.
pub fn occurrence_offsets(params: &RankOneParams, n: usize) -> Result<Vec<BigUint>> {
    let tower = Tower::build(params, n + 1)?;
    Ok(tower.offsets(n))
}
