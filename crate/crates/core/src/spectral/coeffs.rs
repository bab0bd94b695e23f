use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use super::atomic::AtomicMeasure;
use super::PRUNE_BELOW;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Fourier coefficients μ̂(n) = ∫ e^{−2πint} dμ(t), looked up by frequency.
pub trait FourierCoefficients<T: Real> {
    fn coefficient(&self, freq: &BigInt) -> Complex<T>;
}

/// Finitely many nonzero Fourier coefficients, sorted by frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMap<T> {
    entries: Vec<(i64, Complex<T>)>,
}

// Target number of candidate terms per frequency range in a convolution.
const RANGE_TARGET: usize = 1 << 16;

impl<T: Real> CoefficientMap<T> {
    /// The constant density 1.
    pub fn one() -> Self {
        CoefficientMap {
            entries: vec![(0, Complex::new(T::one(), T::zero()))],
        }
    }

    /// Builds a map from arbitrary (frequency, amplitude) pairs; duplicate
    /// frequencies are summed in input order and tiny amplitudes pruned.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, Complex<T>)>) -> Self {
        let mut tagged: Vec<(i64, usize, Complex<T>)> = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (f, c))| (f, i, c))
            .collect();
        tagged.sort_by_key(|&(f, i, _)| (f, i));
        Self::from_sorted_tagged(tagged)
    }

    fn from_sorted_tagged(tagged: Vec<(i64, usize, Complex<T>)>) -> Self {
        let mut entries: Vec<(i64, Complex<T>)> = Vec::with_capacity(tagged.len());
        for (f, _, c) in tagged {
            match entries.last_mut() {
                Some((lf, lc)) if *lf == f => *lc = *lc + c,
                _ => entries.push((f, c)),
            }
        }
        let prune = T::lit(PRUNE_BELOW);
        entries.retain(|(_, c)| c.norm() >= prune);
        CoefficientMap { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(i64, Complex<T>)] {
        &self.entries
    }

    pub fn get(&self, freq: i64) -> Complex<T> {
        self.entries
            .binary_search_by_key(&freq, |&(f, _)| f)
            .map_or_else(|_| Complex::zero(), |i| self.entries[i].1)
    }

    pub fn max_frequency(&self) -> u64 {
        self.entries
            .iter()
            .map(|&(f, _)| f.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Largest deviation from ĉ(−n) = conj(ĉ(n)).
    pub fn hermitian_defect(&self) -> T {
        self.entries
            .iter()
            .map(|&(f, c)| (self.get(-f) - c.conj()).norm())
            .fold(T::zero(), T::max)
    }

    /// Sparse convolution (product of the underlying densities).
    ///
    /// The output frequency line is cut into ranges of fixed expected size;
    /// ranges are merged independently (in parallel) and concatenated, and
    /// within a range every frequency sums its terms in the order of `other`.
    /// The result is therefore independent of the thread count.
    pub fn convolve(&self, other: &Self, budget: usize) -> Result<Self> {
        let bound = self.len().saturating_mul(other.len());
        if bound > budget {
            return Err(Error::Budget {
                needed: bound,
                budget,
            });
        }
        if self.is_empty() || other.is_empty() {
            return Ok(CoefficientMap { entries: vec![] });
        }
        let lo = self.entries[0].0 + other.entries[0].0;
        let hi = self.entries.last().unwrap().0 + other.entries.last().unwrap().0;
        let ranges = bound.div_ceil(RANGE_TARGET).max(1);
        let width = ((hi - lo) as u64 / ranges as u64 + 1) as i64;

        let parts: Vec<Vec<(i64, Complex<T>)>> = (0..ranges)
            .into_par_iter()
            .map(|r| {
                let r_lo = lo + r as i64 * width;
                let r_hi = r_lo + width;
                let mut tagged = Vec::new();
                for (bi, &(fb, cb)) in other.entries.iter().enumerate() {
                    let start = self.entries.partition_point(|&(fa, _)| fa + fb < r_lo);
                    for &(fa, ca) in &self.entries[start..] {
                        let f = fa + fb;
                        if f >= r_hi {
                            break;
                        }
                        tagged.push((f, bi, ca * cb));
                    }
                }
                tagged.sort_unstable_by_key(|&(f, bi, _)| (f, bi));
                Self::from_sorted_tagged(tagged).entries
            })
            .collect();
        Ok(CoefficientMap {
            entries: parts.into_iter().flatten().collect(),
        })
    }

    /// ĉ'(n) = ĉ(n/m) when m | n, else 0.
    pub fn pseudo_dilate(&self, m: u64) -> Result<Self> {
        if m == 0 {
            return invalid("dilation factor must be positive");
        }
        let m = m as i64;
        let entries = self
            .entries
            .iter()
            .map(|&(f, c)| {
                f.checked_mul(m)
                    .map(|g| (g, c))
                    .ok_or_else(|| Error::InvalidArgument(format!("frequency {f}·{m} overflows")))
            })
            .collect::<Result<_>>()?;
        Ok(CoefficientMap { entries })
    }

    /// ĉ'(n) = ĉ(p·n): the image under z ↦ z^p.
    pub fn power_pushforward(&self, p: u64) -> Result<Self> {
        if p == 0 {
            return invalid("power must be positive");
        }
        let p = p as i64;
        Ok(CoefficientMap {
            entries: self
                .entries
                .iter()
                .filter(|(f, _)| f.is_multiple_of(&p))
                .map(|&(f, c)| (f / p, c))
                .collect(),
        })
    }
}

impl<T: Real> FourierCoefficients<T> for CoefficientMap<T> {
    fn coefficient(&self, freq: &BigInt) -> Complex<T> {
        freq.to_i64().map_or_else(Complex::zero, |f| self.get(f))
    }
}

/// σ_(m) of any coefficient source, evaluated lazily.
#[derive(Clone, Copy, Debug)]
pub struct Dilated<'a, S: ?Sized> {
    pub inner: &'a S,
    pub factor: u64,
}

impl<'a, S: ?Sized> Dilated<'a, S> {
    pub fn new(inner: &'a S, factor: u64) -> Result<Self> {
        if factor == 0 {
            return invalid("dilation factor must be positive");
        }
        Ok(Dilated { inner, factor })
    }
}

impl<T: Real, S: FourierCoefficients<T> + ?Sized> FourierCoefficients<T> for Dilated<'_, S> {
    fn coefficient(&self, freq: &BigInt) -> Complex<T> {
        let (q, r) = freq.div_rem(&BigInt::from(self.factor));
        if r.is_zero() {
            self.inner.coefficient(&q)
        } else {
            Complex::zero()
        }
    }
}

/// A measure on the torus given either by density coefficients or by atoms.
#[derive(Clone, Debug, PartialEq)]
pub enum SparseSpectrum<T> {
    Density(CoefficientMap<T>),
    Atomic(AtomicMeasure),
}

impl<T: Real> SparseSpectrum<T> {
    pub fn pseudo_dilate(&self, m: u64) -> Result<Self> {
        Ok(match self {
            SparseSpectrum::Density(c) => SparseSpectrum::Density(c.pseudo_dilate(m)?),
            SparseSpectrum::Atomic(a) => SparseSpectrum::Atomic(a.pseudo_dilate(m)?),
        })
    }

    pub fn power_pushforward(&self, p: u64) -> Result<Self> {
        Ok(match self {
            SparseSpectrum::Density(c) => SparseSpectrum::Density(c.power_pushforward(p)?),
            SparseSpectrum::Atomic(a) => SparseSpectrum::Atomic(a.power_pushforward(p)?),
        })
    }
}

impl<T: Real> FourierCoefficients<T> for SparseSpectrum<T> {
    fn coefficient(&self, freq: &BigInt) -> Complex<T> {
        match self {
            SparseSpectrum::Density(c) => c.coefficient(freq),
            SparseSpectrum::Atomic(a) => a.coefficient(freq),
        }
    }
}
