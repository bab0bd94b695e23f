//! Orbit models, observables and weighted ergodic averages.
//!
//! All averages evaluate the orbit once, as the sequence f(Tⁿx) for
//! n = 1..=N_max, and accumulate in index order, so results do not depend on
//! how independent runs are scheduled.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::numtheory::{check_checkpoints, is_prime, sieve};
use crate::scalar::Real;
use crate::symbolic::{limit_prefix, RankOneParams, Word};

/// Iterates closer to zero than this abort a Boole orbit.
pub const BOOLE_ZERO_GUARD: f64 = 1e-12;

/// Starting point of a rank-one subshift orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasePoint {
    /// W_∞ read at coordinates 0, 1, 2, ….
    Canonical,
    /// The fixed point 𝟙 = …111….
    Ones,
}

/// A dynamical system together with a starting point.
#[derive(Clone, Debug, PartialEq)]
pub enum OrbitModel<T> {
    RankOneSubshift {
        params: RankOneParams,
        base: BasePoint,
    },
    /// n ↦ n + 1 on ℤ.
    IntegerShift { start: i64 },
    /// x ↦ x − 1/x on ℝ∖{0}.
    BooleMap { x0: T },
}

impl<T: Real> fmt::Display for OrbitModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitModel::RankOneSubshift { params, base } => {
                let base = match base {
                    BasePoint::Canonical => "canonical",
                    BasePoint::Ones => "ones",
                };
                write!(f, "rank-one:{}:{base}", params.name)
            }
            OrbitModel::IntegerShift { start } => write!(f, "integer-shift:{start}"),
            OrbitModel::BooleMap { x0 } => write!(f, "boole:{x0}"),
        }
    }
}

/// Functions evaluated along an orbit.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable<T> {
    /// Any model.
    Constant(T),
    /// 1 if `word` occurs at offset `position` (rank-one models).
    CylinderIndicator { word: Word, position: i64 },
    /// The cylinder indicator minus its value at 𝟙 (rank-one models).
    CylinderIndicatorCentered { word: Word, position: i64 },
    /// Finitely supported function on ℤ (integer shift).
    FinitelySupported(BTreeMap<i64, T>),
    /// n ↦ μ(n) for n ≥ 1, 0 otherwise (integer shift).
    Mobius,
    /// Indicator of the closed interval [a, b] (Boole map).
    IndicatorInterval { a: T, b: T },
    /// scale · num(x)/den(x) with ascending polynomial coefficients (Boole
    /// map). The Cauchy density 1/(π(1+x²)) is the usual positive weight.
    RationalDensity {
        scale: T,
        numerator: Vec<T>,
        denominator: Vec<T>,
    },
}

impl<T: Real> Observable<T> {
    pub fn cylinder(word: &str, position: i64) -> Result<Self> {
        let word: Word = word.parse()?;
        if word.is_empty() {
            return invalid("cylinder word must be nonempty");
        }
        Ok(Observable::CylinderIndicator { word, position })
    }

    pub fn centered_cylinder(word: &str, position: i64) -> Result<Self> {
        let word: Word = word.parse()?;
        if word.is_empty() {
            return invalid("cylinder word must be nonempty");
        }
        Ok(Observable::CylinderIndicatorCentered { word, position })
    }

    /// 1/(π(1+x²)), a probability density on ℝ.
    pub fn cauchy() -> Self {
        Observable::RationalDensity {
            scale: T::one() / T::PI(),
            numerator: vec![T::one()],
            denominator: vec![T::one(), T::zero(), T::one()],
        }
    }

    /// sup |f| over the orbit's state space, where finite.
    pub fn sup_abs(&self) -> Option<T> {
        match self {
            Observable::Constant(c) => Some(c.abs()),
            Observable::CylinderIndicator { .. }
            | Observable::CylinderIndicatorCentered { .. }
            | Observable::Mobius
            | Observable::IndicatorInterval { .. } => Some(T::one()),
            Observable::FinitelySupported(m) => {
                Some(m.values().fold(T::zero(), |acc, v| acc.max(v.abs())))
            }
            Observable::RationalDensity { .. } => None,
        }
    }
}

impl<T: Real> fmt::Display for Observable<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Constant(c) => write!(f, "constant:{c}"),
            Observable::CylinderIndicator { word, position } => {
                write!(f, "cylinder:{word}@{position}")
            }
            Observable::CylinderIndicatorCentered { word, position } => {
                write!(f, "centered-cylinder:{word}@{position}")
            }
            Observable::FinitelySupported(m) => write!(f, "finite-support:{}", m.len()),
            Observable::Mobius => f.write_str("mobius"),
            Observable::IndicatorInterval { a, b } => write!(f, "interval:[{a},{b}]"),
            Observable::RationalDensity { .. } => f.write_str("rational-density"),
        }
    }
}

/// Arithmetic weight w(n) in a weighted average.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Weight {
    Mobius,
    Liouville,
    None,
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weight::Mobius => "mobius",
            Weight::Liouville => "liouville",
            Weight::None => "none",
        })
    }
}

impl std::str::FromStr for Weight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Weight> {
        match s {
            "mobius" => Ok(Weight::Mobius),
            "liouville" => Ok(Weight::Liouville),
            "none" => Ok(Weight::None),
            other => invalid(format!("unknown weight {other:?}")),
        }
    }
}

/// Running averages sampled at checkpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct AverageSeries<T> {
    pub checkpoints: Vec<u64>,
    pub values: Vec<T>,
    pub weight: Weight,
}

/// w(1..=n) with w[0] unused.
fn weight_values(weight: Weight, n: usize) -> Result<Option<Vec<i8>>> {
    Ok(match weight {
        Weight::None => None,
        Weight::Mobius => Some(sieve(n)?.mobius_slice().to_vec()),
        Weight::Liouville => Some(sieve(n)?.liouville_values()),
    })
}

fn horner<T: Real>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

fn cylinder_hits(prefix: &[u8], word: &Word, start: usize) -> bool {
    &prefix[start..start + word.len()] == word.bits()
}

/// f(Tⁿx) for n = 1..=len, as a vector indexed from 0 (entry i is n = i + 1).
pub fn orbit_values<T: Real>(
    model: &OrbitModel<T>,
    f: &Observable<T>,
    len: usize,
) -> Result<Vec<T>> {
    let mismatch = || {
        invalid(format!(
            "observable {f} cannot be evaluated on model {model}"
        ))
    };
    if let Observable::Constant(c) = f {
        if let OrbitModel::BooleMap { x0 } = model {
            // the orbit must still exist
            boole_orbit(*x0, len)?;
        }
        return Ok(vec![*c; len]);
    }
    match model {
        OrbitModel::RankOneSubshift { params, base } => {
            let (word, position, centered) = match f {
                Observable::CylinderIndicator { word, position } => (word, *position, false),
                Observable::CylinderIndicatorCentered { word, position } => (word, *position, true),
                _ => return mismatch(),
            };
            let at_ones = if word.contains_zero() {
                T::zero()
            } else {
                T::one()
            };
            let shift = T::from_count(centered as u64) * at_ones;
            match base {
                BasePoint::Ones => Ok(vec![at_ones - shift; len]),
                BasePoint::Canonical => {
                    if position < -1 {
                        return invalid(format!(
                            "position {position} reaches before coordinate 0 at n = 1"
                        ));
                    }
                    let first = (1 + position) as usize;
                    let prefix = limit_prefix(params, first + len + word.len())?;
                    Ok((0..len)
                        .map(|i| {
                            let hit = cylinder_hits(prefix.bits(), word, first + i);
                            T::from_count(hit as u64) - shift
                        })
                        .collect())
                }
            }
        }
        OrbitModel::IntegerShift { start } => match f {
            Observable::FinitelySupported(map) => Ok((1..=len as i64)
                .map(|n| map.get(&(start + n)).copied().unwrap_or_else(T::zero))
                .collect()),
            Observable::Mobius => {
                let top = start + len as i64;
                let table = if top >= 1 {
                    Some(sieve(top as usize)?)
                } else {
                    None
                };
                Ok((1..=len as i64)
                    .map(|n| {
                        let s = start + n;
                        match &table {
                            Some(t) if s >= 1 => T::from_i8(t.mobius(s as usize)).unwrap(),
                            _ => T::zero(),
                        }
                    })
                    .collect())
            }
            _ => mismatch(),
        },
        OrbitModel::BooleMap { x0 } => {
            let xs = boole_orbit(*x0, len)?;
            match f {
                Observable::IndicatorInterval { a, b } => Ok(xs
                    .iter()
                    .map(|&x| {
                        if *a <= x && x <= *b {
                            T::one()
                        } else {
                            T::zero()
                        }
                    })
                    .collect()),
                Observable::RationalDensity {
                    scale,
                    numerator,
                    denominator,
                } => xs
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| {
                        let den = horner(denominator, x);
                        if den == T::zero() {
                            Err(Error::Orbit {
                                n: i as u64 + 1,
                                reason: "density denominator vanishes".into(),
                            })
                        } else {
                            Ok(*scale * horner(numerator, x) / den)
                        }
                    })
                    .collect(),
                _ => mismatch(),
            }
        }
    }
}

/// x_1, …, x_len of the Boole orbit x_{n} = x_{n−1} − 1/x_{n−1}.
pub fn boole_orbit<T: Real>(x0: T, len: usize) -> Result<Vec<T>> {
    let guard = T::lit(BOOLE_ZERO_GUARD);
    let mut out = Vec::with_capacity(len);
    let mut x = x0;
    for n in 1..=len as u64 {
        if x.abs() < guard || !x.is_finite() {
            return Err(Error::Orbit {
                n,
                reason: format!("iterate x_{} = {x} is (numerically) zero", n - 1),
            });
        }
        x = x - x.recip();
        out.push(x);
    }
    Ok(out)
}

/// (1/N) Σ_{n=1}^{N} w(n) f(Tⁿx) at each checkpoint N.
pub fn weighted_average<T: Real>(
    model: &OrbitModel<T>,
    f: &Observable<T>,
    checkpoints: &[u64],
    weight: Weight,
) -> Result<AverageSeries<T>> {
    check_checkpoints(checkpoints)?;
    let n_max = *checkpoints.last().unwrap() as usize;
    let values = orbit_values(model, f, n_max)?;
    let weights = weight_values(weight, n_max)?;
    let sums = running_sums(&values, weights.as_deref(), checkpoints);
    Ok(AverageSeries {
        checkpoints: checkpoints.to_vec(),
        values: sums
            .into_iter()
            .zip(checkpoints)
            .map(|(s, &n)| s / T::from_count(n))
            .collect(),
        weight,
    })
}

/// Σ_{n≤N} w(n) v_n at each checkpoint, one pass in index order.
fn running_sums<T: Real>(values: &[T], weights: Option<&[i8]>, checkpoints: &[u64]) -> Vec<T> {
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut acc = T::zero();
    let mut cps = checkpoints.iter().peekable();
    for (i, &v) in values.iter().enumerate() {
        let n = i + 1;
        let term = match weights {
            Some(w) => match w[n] {
                0 => T::zero(),
                1 => v,
                _ => -v,
            },
            None => v,
        };
        acc = acc + term;
        while cps.peek().is_some_and(|&&c| c as usize == n) {
            out.push(acc);
            cps.next();
        }
    }
    out
}

/// (1/N) Σ_{n=1}^{N} (f(Tⁿx) − z) at each checkpoint.
pub fn cesaro_deviation<T: Real>(
    model: &OrbitModel<T>,
    f: &Observable<T>,
    z_value: T,
    checkpoints: &[u64],
) -> Result<AverageSeries<T>> {
    check_checkpoints(checkpoints)?;
    let n_max = *checkpoints.last().unwrap() as usize;
    let values: Vec<T> = orbit_values(model, f, n_max)?
        .into_iter()
        .map(|v| v - z_value)
        .collect();
    let sums = running_sums(&values, None, checkpoints);
    Ok(AverageSeries {
        checkpoints: checkpoints.to_vec(),
        values: sums
            .into_iter()
            .zip(checkpoints)
            .map(|(s, &n)| s / T::from_count(n))
            .collect(),
        weight: Weight::None,
    })
}

/// Hopf ratio averages with the optional reference bound ∫|f| / ∫p.
#[derive(Clone, Debug, PartialEq)]
pub struct HopfSeries<T> {
    pub series: AverageSeries<T>,
    pub bound: Option<T>,
}

/// Σ_{n≤N} w(n) f(Tⁿx) / Σ_{n≤N} p(Tⁿx) at each checkpoint.
///
/// `integrals = (∫|f|, ∫p)` adds the maximal-inequality reference value to the
/// result; it is reported, not enforced.
pub fn hopf_ratio<T: Real>(
    model: &OrbitModel<T>,
    f: &Observable<T>,
    p: &Observable<T>,
    checkpoints: &[u64],
    weight: Weight,
    integrals: Option<(T, T)>,
) -> Result<HopfSeries<T>> {
    check_checkpoints(checkpoints)?;
    let n_max = *checkpoints.last().unwrap() as usize;
    let fv = orbit_values(model, f, n_max)?;
    let pv = orbit_values(model, p, n_max)?;
    let weights = weight_values(weight, n_max)?;
    let num = running_sums(&fv, weights.as_deref(), checkpoints);
    let den = running_sums(&pv, None, checkpoints);
    let mut values = Vec::with_capacity(checkpoints.len());
    for ((a, b), &n) in num.into_iter().zip(den).zip(checkpoints) {
        if b == T::zero() {
            return Err(Error::UndefinedRatio(format!(
                "Σ p(Tⁿx) vanishes up to N = {n}"
            )));
        }
        values.push(a / b);
    }
    let bound = integrals.map(|(f_int, p_int)| f_int / p_int);
    Ok(HopfSeries {
        series: AverageSeries {
            checkpoints: checkpoints.to_vec(),
            values,
            weight,
        },
        bound,
    })
}

/// (1/N) Σ_{n=1}^{N} f(T^{pn}x) f(T^{qn}x) at each checkpoint.
pub fn dkbsz_correlation<T: Real>(
    model: &OrbitModel<T>,
    f: &Observable<T>,
    p: u64,
    q: u64,
    checkpoints: &[u64],
) -> Result<AverageSeries<T>> {
    if p == q {
        return invalid("p and q must be distinct");
    }
    if !is_prime(p) || !is_prime(q) {
        return invalid(format!("p = {p} and q = {q} must be prime"));
    }
    check_checkpoints(checkpoints)?;
    let n_max = *checkpoints.last().unwrap() as usize;
    let values = orbit_values(model, f, n_max * p.max(q) as usize)?;
    let products: Vec<T> = (1..=n_max)
        .map(|n| values[n * p as usize - 1] * values[n * q as usize - 1])
        .collect();
    let sums = running_sums(&products, None, checkpoints);
    Ok(AverageSeries {
        checkpoints: checkpoints.to_vec(),
        values: sums
            .into_iter()
            .zip(checkpoints)
            .map(|(s, &n)| s / T::from_count(n))
            .collect(),
        weight: Weight::None,
    })
}
