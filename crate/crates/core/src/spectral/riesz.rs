//! Generalized Riesz products Π |P_n(t)|², with
//! P_n(t) = p_n^{-1/2} Σ_j e^{2πi (j h_n + s̃(n,j)) t}.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex;
use num_traits::{Signed, ToPrimitive, Zero};

use super::coeffs::{CoefficientMap, FourierCoefficients};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symbolic::{RankOneParams, Tower};

/// One factor P_n of the product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RieszFactor {
    pub stage: usize,
    /// Strictly increasing, starting at 0.
    pub exponents: Vec<BigUint>,
}

impl RieszFactor {
    pub fn new(stage: usize, exponents: Vec<BigUint>) -> Result<Self> {
        if exponents.first().is_none_or(|e| !e.is_zero()) {
            return Err(Error::InvalidArgument("exponents must start at 0".into()));
        }
        if exponents.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "exponents must be strictly increasing".into(),
            ));
        }
        Ok(RieszFactor { stage, exponents })
    }

    /// p_n.
    pub fn cutting(&self) -> usize {
        self.exponents.len()
    }

    /// 1/√p_n.
    pub fn weight<T: Real>(&self) -> T {
        T::from_count(self.cutting() as u64).sqrt().recip()
    }

    /// The factor t ↦ P_n(m t), i.e. all exponents multiplied by m.
    pub fn dilate(&self, m: u64) -> Self {
        RieszFactor {
            stage: self.stage,
            exponents: self.exponents.iter().map(|e| e * m).collect(),
        }
    }

    pub fn exponents_i64(&self) -> Result<Vec<i64>> {
        self.exponents
            .iter()
            .map(|e| {
                e.to_i64().ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "exponent {e} of stage {} exceeds 64-bit frequencies",
                        self.stage
                    ))
                })
            })
            .collect()
    }

    /// Differences e_j − e_k with their multiplicities, sorted.
    fn differences(&self) -> Vec<(BigInt, u64)> {
        let mut diffs: Vec<BigInt> = Vec::with_capacity(self.cutting() * self.cutting());
        for a in &self.exponents {
            for b in &self.exponents {
                diffs.push(BigInt::from(a.clone()) - BigInt::from(b.clone()));
            }
        }
        diffs.sort();
        let mut out: Vec<(BigInt, u64)> = Vec::new();
        for d in diffs {
            match out.last_mut() {
                Some((last, count)) if *last == d => *count += 1,
                _ => out.push((d, 1)),
            }
        }
        out
    }
}

/// P_n for stage n; the exponents are the copy offsets of W_n in W_{n+1}.
pub fn riesz_factor(params: &RankOneParams, n: usize) -> Result<RieszFactor> {
    let tower = Tower::build(params, n + 1)?;
    RieszFactor::new(n, tower.offsets(n))
}

/// Factors for the given stages, sharing one tower.
pub fn riesz_factors(params: &RankOneParams, stages: &[usize]) -> Result<Vec<RieszFactor>> {
    let depth = stages.iter().max().map_or(0, |&m| m + 1);
    let tower = Tower::build(params, depth)?;
    stages
        .iter()
        .map(|&n| RieszFactor::new(n, tower.offsets(n)))
        .collect()
}

/// Coefficients of |P_n|² = (1/p) Σ_{j,k} e^{2πi (e_j − e_k) t}.
/// ĉ(0) = p/p = 1 exactly.
pub fn factor_square_coeffs<T: Real>(factor: &RieszFactor) -> Result<CoefficientMap<T>> {
    let p = T::from_count(factor.cutting() as u64);
    factor.exponents_i64()?;
    let pairs = factor.differences().into_iter().map(|(d, count)| {
        (
            d.to_i64().expect("checked above"),
            Complex::new(T::from_count(count) / p, T::zero()),
        )
    });
    Ok(CoefficientMap::from_pairs(pairs))
}

/// Sparse coefficient map of Π |P_n|² over the given factors. The empty
/// product is the constant density 1.
pub fn product_coeffs<T: Real>(
    factors: &[RieszFactor],
    budget: usize,
) -> Result<CoefficientMap<T>> {
    let mut acc = CoefficientMap::one();
    for f in factors {
        acc = acc.convolve(&factor_square_coeffs(f)?, budget)?;
    }
    Ok(acc)
}

/// Π |P_n|² kept in factored form; single coefficients are computed exactly
/// (up to rounding of the rational weights) at arbitrarily large frequencies.
///
/// A lookup at m walks the factors from the highest stage down, keeping only
/// partial remainders that the lower factors can still reach.
#[derive(Clone, Debug)]
pub struct RieszProduct<T> {
    // per factor: (difference, weight) sorted by difference
    factors: Vec<Vec<(BigInt, T)>>,
    // reach[i] = Σ_{k<i} max |difference of factor k|
    reach: Vec<BigInt>,
}

impl<T: Real> RieszProduct<T> {
    pub fn new(factors: &[RieszFactor]) -> Self {
        let mut sorted: Vec<&RieszFactor> = factors.iter().collect();
        sorted.sort_by_key(|f| f.exponents.last().cloned());
        let mut tables = Vec::with_capacity(sorted.len());
        let mut reach = Vec::with_capacity(sorted.len());
        let mut acc = BigInt::zero();
        for f in sorted {
            let p = T::from_count(f.cutting() as u64);
            reach.push(acc.clone());
            acc += BigInt::from(f.exponents.last().unwrap().clone());
            tables.push(
                f.differences()
                    .into_iter()
                    .map(|(d, c)| (d, T::from_count(c) / p))
                    .collect(),
            );
        }
        RieszProduct {
            factors: tables,
            reach,
        }
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    fn lookup(&self, level: usize, m: &BigInt) -> T {
        if level == 0 {
            return if m.is_zero() { T::one() } else { T::zero() };
        }
        let i = level - 1;
        let reach = &self.reach[i];
        let mut acc = T::zero();
        for (d, w) in &self.factors[i] {
            let rest = m - d;
            if rest.abs() <= *reach {
                acc = acc + *w * self.lookup(i, &rest);
            }
        }
        acc
    }
}

impl<T: Real> FourierCoefficients<T> for RieszProduct<T> {
    fn coefficient(&self, freq: &BigInt) -> Complex<T> {
        Complex::new(self.lookup(self.factors.len(), freq), T::zero())
    }
}
