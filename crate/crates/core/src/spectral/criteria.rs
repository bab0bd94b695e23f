//! Singularity diagnostics: Klemes–Reinhold frequencies, Peyrière series,
//! the residue-class divergence step and the Bourgain/Hellinger bound.

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::ToPrimitive;

use super::coeffs::{CoefficientMap, FourierCoefficients};
use super::density::{empirical_spectral_density_real, hellinger};
use super::riesz::{factor_square_coeffs, riesz_factors};
use crate::error::{invalid, Error, Result};
use crate::numtheory::is_prime;
use crate::scalar::Real;
use crate::symbolic::{RankOneParams, Tower};

/// Stages n_0 < n_1 < … selected for a subsequence Riesz product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsequencePlan {
    indices: Vec<usize>,
    residue: Option<usize>,
}

impl SubsequencePlan {
    /// n_j = step·j + η for j < count, with step ≥ 3.
    pub fn arithmetic(step: usize, eta: usize, count: usize) -> Result<Self> {
        if step < 3 {
            return Err(Error::InvalidPlan(format!(
                "step {step} violates the gap condition n_(j+1) ≥ n_j + 3"
            )));
        }
        let plan = Self::gapped((0..count).map(|j| step * j + eta).collect())?;
        Ok(SubsequencePlan {
            residue: (step == 3).then_some(eta % 3),
            ..plan
        })
    }

    /// An explicit plan obeying n_{j+1} ≥ n_j + 3.
    pub fn gapped(indices: Vec<usize>) -> Result<Self> {
        if let Some(w) = indices.windows(2).find(|w| w[1] < w[0] + 3) {
            return Err(Error::InvalidPlan(format!(
                "n_(j+1) = {} < n_j + 3 = {}",
                w[1],
                w[0] + 3
            )));
        }
        Ok(SubsequencePlan {
            indices,
            residue: None,
        })
    }

    /// Any strictly increasing plan (no gap condition), as for subsequence
    /// products of the maximal spectral type.
    pub fn increasing(indices: Vec<usize>) -> Result<Self> {
        if indices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPlan(
                "indices must be strictly increasing".into(),
            ));
        }
        Ok(SubsequencePlan {
            indices,
            residue: None,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn residue(&self) -> Option<usize> {
        self.residue
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn has_gaps(&self) -> bool {
        self.indices.windows(2).all(|w| w[1] >= w[0] + 3)
    }
}

/// Which formula produces the frequencies m_j.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MjReading {
    /// m_j = h_{n_j+1} − h_{n_j} − s(n_j, p_{n_j}−1), the largest copy offset
    /// of P_{n_j}; the subsequence product then has coefficient 1/p_{n_j}
    /// at m_j.
    #[default]
    LastOffset,
    /// m_j = h_{n_{j+1}} − h_{n_j} − s(n_j, p_{n_j}−1), taken literally
    /// (defined for j < len − 1).
    AsPrinted,
}

/// The frequencies m_j of a gapped plan.
pub fn mj_sequence(
    params: &RankOneParams,
    plan: &SubsequencePlan,
    reading: MjReading,
) -> Result<Vec<BigInt>> {
    if !plan.has_gaps() {
        return Err(Error::InvalidPlan(
            "the plan violates n_(j+1) ≥ n_j + 3".into(),
        ));
    }
    let depth = plan.indices.last().map_or(0, |&n| n + 1);
    let tower = Tower::build(params, depth)?;
    let h = |n: usize| BigInt::from(tower.heights[n].clone());
    let last_spacer = |n: usize| BigInt::from(tower.stages[n].last_spacer().clone());
    let idx = &plan.indices;
    Ok(match reading {
        MjReading::LastOffset => idx
            .iter()
            .map(|&n| h(n + 1) - h(n) - last_spacer(n))
            .collect(),
        MjReading::AsPrinted => idx
            .windows(2)
            .map(|w| h(w[1]) - h(w[0]) - last_spacer(w[0]))
            .collect(),
    })
}

/// One row of the Klemes–Reinhold table, for frequency index j at truncation
/// K (the product of the first K plan factors).
#[derive(Clone, Debug, PartialEq)]
pub struct KlemesRecord<T> {
    pub j: usize,
    pub truncation: usize,
    pub m_j: BigInt,
    pub coeff: Complex<T>,
    pub coeff_neg: Complex<T>,
    /// 1/p_{n_j}.
    pub predicted: T,
    /// α̂_K(m_j + m_{j+1}) and α̂_K(m_j − m_{j+1}), when j + 1 exists.
    pub coeff_sum: Option<Complex<T>>,
    pub coeff_diff: Option<Complex<T>>,
    /// α̂_K(m_j)·α̂_K(m_{j+1}).
    pub product: Option<Complex<T>>,
    /// |α̂_K(m_j) − α̂_{K−1}(m_j)| (K ≥ 2).
    pub increment: Option<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KlemesReport<T> {
    pub m: Vec<BigInt>,
    /// Deepest truncation whose product fits in the budget.
    pub deepest: usize,
    pub records: Vec<KlemesRecord<T>>,
}

impl<T: Real> KlemesReport<T> {
    pub fn record(&self, j: usize, truncation: usize) -> Option<&KlemesRecord<T>> {
        self.records
            .iter()
            .find(|r| r.j == j && r.truncation == truncation)
    }
}

fn lookup<T: Real>(map: &CoefficientMap<T>, f: &BigInt) -> Complex<T> {
    map.coefficient(f)
}

/// Truncated products α_K = Π_{j<K} |P_{n_j}|² for K = 1, 2, … until the
/// coefficient budget is exhausted, with their coefficients at the m_j.
pub fn klemes_reinhold_check<T: Real>(
    params: &RankOneParams,
    plan: &SubsequencePlan,
    reading: MjReading,
    budget: usize,
) -> Result<KlemesReport<T>> {
    let m = mj_sequence(params, plan, reading)?;
    let factors = riesz_factors(params, plan.indices())?;
    let cuttings: Vec<usize> = factors.iter().map(|f| f.cutting()).collect();

    let mut records = Vec::new();
    let mut product = CoefficientMap::<T>::one();
    let mut previous: Option<CoefficientMap<T>> = None;
    let mut deepest = 0;
    for (k, factor) in factors.iter().enumerate() {
        let square = match factor_square_coeffs::<T>(factor) {
            Ok(s) => s,
            Err(_) if deepest > 0 => break,
            Err(e) => return Err(e),
        };
        product = match product.convolve(&square, budget) {
            Ok(p) => p,
            Err(Error::Budget { .. }) if deepest > 0 => break,
            Err(e) => return Err(e),
        };
        deepest = k + 1;
        for j in 0..m.len() {
            let coeff = lookup(&product, &m[j]);
            let next = m.get(j + 1);
            let neighbour = next.map(|mk| lookup(&product, mk));
            records.push(KlemesRecord {
                j,
                truncation: deepest,
                m_j: m[j].clone(),
                coeff,
                coeff_neg: lookup(&product, &-&m[j]),
                predicted: T::from_count(cuttings[j] as u64).recip(),
                coeff_sum: next.map(|mk| lookup(&product, &(&m[j] + mk))),
                coeff_diff: next.map(|mk| lookup(&product, &(&m[j] - mk))),
                product: neighbour.map(|c| coeff * c),
                increment: previous
                    .as_ref()
                    .map(|prev| (coeff - lookup(prev, &m[j])).norm()),
            });
        }
        previous = Some(product.clone());
    }
    Ok(KlemesReport {
        m,
        deepest,
        records,
    })
}

/// Truncations of the (Br1)/(Br2) series for φ_n(z) = z^{f_n}.
///
/// Entry t of each vector is the partial value with the first t + 1
/// frequencies. ∫ φ_n dμ = μ̂(−f_n) and ∫ φ_n φ_m dμ = μ̂(−f_n − f_m).
#[derive(Clone, Debug, PartialEq)]
pub struct PeyriereSeries<T> {
    pub br1_a: Vec<T>,
    pub br1_b: Vec<T>,
    pub br2: Vec<T>,
}

fn br1_partials<T: Real, S: FourierCoefficients<T> + ?Sized>(
    measure: &S,
    freqs: &[BigInt],
) -> Vec<T> {
    let j = freqs.len();
    let single: Vec<Complex<T>> = freqs.iter().map(|f| measure.coefficient(&-f)).collect();
    // defect[n][k] for n + k < J
    let defect: Vec<Vec<T>> = (0..j)
        .map(|n| {
            (0..j - n)
                .map(|k| {
                    let joint = measure.coefficient(&-(&freqs[n] + &freqs[n + k]));
                    (joint - single[n] * single[n + k]).norm()
                })
                .collect()
        })
        .collect();
    (1..=j)
        .map(|t| {
            (0..t)
                .map(|k| (0..t - k).map(|n| defect[n][k]).fold(T::zero(), T::max))
                .sum()
        })
        .collect()
}

/// Evaluates the Peyrière/Brown–Hewitt series for two measures at the test
/// frequencies, truncated at `truncation` terms.
pub fn peyriere_diagnostics<T, A, B>(
    spec_a: &A,
    spec_b: &B,
    frequencies: &[BigInt],
    truncation: usize,
) -> Result<PeyriereSeries<T>>
where
    T: Real,
    A: FourierCoefficients<T> + ?Sized,
    B: FourierCoefficients<T> + ?Sized,
{
    if truncation == 0 || truncation > frequencies.len() {
        return invalid(format!(
            "truncation {truncation} must lie in 1..={}",
            frequencies.len()
        ));
    }
    let freqs = &frequencies[..truncation];
    let mut br2 = Vec::with_capacity(truncation);
    let mut acc = T::zero();
    for f in freqs {
        let d = spec_a.coefficient(&-f) - spec_b.coefficient(&-f);
        acc = acc + d.norm_sqr();
        br2.push(acc);
    }
    Ok(PeyriereSeries {
        br1_a: br1_partials(spec_a, freqs),
        br1_b: br1_partials(spec_b, freqs),
        br2,
    })
}

/// Partial sums Σ_{n≤H, n≡η (mod m)} 1/p_n² for every residue η.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidueSums<T> {
    pub modulus: usize,
    pub horizon: usize,
    pub sums: Vec<T>,
    /// Residue class with the largest partial sum (smallest η on ties).
    pub best: usize,
}

pub fn divergence_residue<T: Real>(
    params: &RankOneParams,
    modulus: usize,
    horizon: usize,
) -> Result<ResidueSums<T>> {
    if modulus == 0 {
        return invalid("modulus must be positive");
    }
    if horizon < modulus {
        return invalid(format!(
            "horizon {horizon} must be at least the modulus {modulus}"
        ));
    }
    let tower = Tower::build(params, horizon + 1)?;
    let mut sums = vec![T::zero(); modulus];
    for (n, spec) in tower.stages.iter().enumerate() {
        let p = T::from_count(spec.cutting);
        sums[n % modulus] = sums[n % modulus] + (p * p).recip();
    }
    let best = (0..modulus).fold(0, |b, i| if sums[i] > sums[b] { i } else { b });
    Ok(ResidueSums {
        modulus,
        horizon,
        sums,
        best,
    })
}

/// Both sides of |(1/Ñ) Σ_{n≤Ñ} f(T^{pn}x) f(T^{qn}x)| ≤ (N/Ñ)·H(σ_{f,(p),N}, σ_{f,(q),N}).
#[derive(Clone, Debug, PartialEq)]
pub struct DkbszBound<T> {
    pub n: usize,
    pub n_tilde: usize,
    pub lhs: T,
    pub affinity: T,
    pub rhs: T,
    pub holds: bool,
}

/// Slack allowed in `lhs ≤ rhs`.
pub const DKBSZ_SLACK: f64 = 1e-6;

/// `orbit_values[i]` is f(T^{i+1}x); the first `n` are used.
pub fn dkbsz_bound<T: Real>(
    orbit_values: &[T],
    p: u64,
    q: u64,
    n: usize,
    grid_size: usize,
) -> Result<DkbszBound<T>> {
    if p == q {
        return invalid("p and q must be distinct");
    }
    if !is_prime(p) || !is_prime(q) {
        return invalid(format!("p = {p} and q = {q} must be prime"));
    }
    if orbit_values.len() < n {
        return invalid(format!(
            "{} orbit values supplied, {n} needed",
            orbit_values.len()
        ));
    }
    let top = p.max(q) as usize;
    let n_tilde = n / top;
    if n_tilde == 0 {
        return invalid(format!("Ñ = ⌊{n}/{top}⌋ must be at least 1"));
    }
    if (grid_size as u128) <= 2 * top as u128 * n as u128 {
        return invalid(format!(
            "grid size {grid_size} must exceed 2·max(p, q)·N = {}",
            2 * top * n
        ));
    }
    let a = &orbit_values[..n];
    let sum: T = (1..=n_tilde)
        .map(|k| a[k * p as usize - 1] * a[k * q as usize - 1])
        .sum();
    let lhs = (sum / T::from_count(n_tilde as u64)).abs();
    let sp = empirical_spectral_density_real(a, p, grid_size)?;
    let sq = empirical_spectral_density_real(a, q, grid_size)?;
    let affinity = hellinger(&sp, &sq)?;
    let rhs = T::from_count(n as u64) / T::from_count(n_tilde as u64) * affinity;
    Ok(DkbszBound {
        n,
        n_tilde,
        lhs,
        affinity,
        rhs,
        holds: lhs <= rhs + T::lit(DKBSZ_SLACK),
    })
}

/// Stage heights converted for reporting.
pub fn heights_f64(params: &RankOneParams, stages: usize) -> Result<Vec<f64>> {
    let tower = Tower::build(params, stages)?;
    Ok(tower
        .heights
        .iter()
        .map(|h| h.to_f64().unwrap_or(f64::INFINITY))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::coeffs::Dilated;
    use crate::spectral::riesz::RieszProduct;

    #[test]
    fn plan_gap_condition() {
        assert!(SubsequencePlan::arithmetic(3, 1, 5).is_ok());
        assert!(SubsequencePlan::arithmetic(2, 0, 5).is_err());
        assert!(matches!(
            SubsequencePlan::gapped(vec![0, 2]),
            Err(Error::InvalidPlan(_))
        ));
        assert!(SubsequencePlan::increasing(vec![0, 1, 2]).is_ok());
        assert!(SubsequencePlan::increasing(vec![0, 0]).is_err());
        let plan = SubsequencePlan::increasing(vec![0, 2]).unwrap();
        assert!(matches!(
            mj_sequence(&RankOneParams::chacon(), &plan, MjReading::LastOffset),
            Err(Error::InvalidPlan(_))
        ));
    }

    #[test]
    fn mj_examples() {
        let chacon = RankOneParams::chacon();
        let plan = SubsequencePlan::arithmetic(3, 0, 3).unwrap();
        let printed = mj_sequence(&chacon, &plan, MjReading::AsPrinted).unwrap();
        assert_eq!(printed[0], BigInt::from(39));
        assert_eq!(printed.len(), 2);
        let last = mj_sequence(&chacon, &plan, MjReading::LastOffset).unwrap();
        // 2 h_n + 1 with h = 1, 40, 1093
        assert_eq!(last, [3, 81, 2187].map(BigInt::from));

        let odo = RankOneParams::odometer(2);
        let plan = SubsequencePlan::gapped(vec![0, 3, 7]).unwrap();
        let printed = mj_sequence(&odo, &plan, MjReading::AsPrinted).unwrap();
        assert_eq!(printed, [8 - 1, 128 - 8].map(BigInt::from));
    }

    #[test]
    fn klemes_chacon_small() {
        let plan = SubsequencePlan::arithmetic(3, 0, 4).unwrap();
        let report = klemes_reinhold_check::<f64>(
            &RankOneParams::chacon(),
            &plan,
            MjReading::LastOffset,
            1_000_000,
        )
        .unwrap();
        assert_eq!(report.deepest, 4);
        for r in &report.records {
            assert_eq!(r.coeff, r.coeff_neg.conj());
            if r.j < r.truncation {
                assert!((r.coeff.re - 1.0 / 3.0).abs() < 1e-12);
                if let (Some(s), Some(p)) = (r.coeff_sum, r.product) {
                    if r.j + 1 < r.truncation {
                        assert!((s - p).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn klemes_budget_limits_depth() {
        let plan = SubsequencePlan::arithmetic(3, 0, 6).unwrap();
        let report = klemes_reinhold_check::<f64>(
            &RankOneParams::chacon(),
            &plan,
            MjReading::LastOffset,
            400,
        )
        .unwrap();
        // 7, 49, 343 entries; 343·7 > 400
        assert_eq!(report.deepest, 3);
        assert!(klemes_reinhold_check::<f64>(
            &RankOneParams::chacon(),
            &plan,
            MjReading::LastOffset,
            3
        )
        .is_err());
    }

    #[test]
    fn peyriere_identical_measures() {
        let factors = riesz_factors(&RankOneParams::chacon(), &[0, 3, 6]).unwrap();
        let alpha = RieszProduct::<f64>::new(&factors);
        let freqs: Vec<BigInt> = [3, 81, 2187].map(BigInt::from).to_vec();
        let s = peyriere_diagnostics(&alpha, &alpha, &freqs, 3).unwrap();
        assert!(s.br2.iter().all(|&v| v == 0.0));
        assert_eq!(s.br1_a, s.br1_b);
        assert!(peyriere_diagnostics(&alpha, &alpha, &freqs, 4).is_err());
    }

    #[test]
    fn peyriere_single_term() {
        let factors = riesz_factors(&RankOneParams::chacon(), &[0, 3, 6]).unwrap();
        let alpha = RieszProduct::<f64>::new(&factors);
        let a2 = Dilated::new(&alpha, 2).unwrap();
        let a3 = Dilated::new(&alpha, 3).unwrap();
        let f = BigInt::from(2 * 81);
        let s = peyriere_diagnostics(&a2, &a3, std::slice::from_ref(&f), 1).unwrap();
        let direct = (a2.coefficient(&-&f) - a3.coefficient(&-&f)).norm_sqr();
        assert_eq!(s.br2, [direct]);
        assert!((direct - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn residue_sums() {
        let r = divergence_residue::<f64>(&RankOneParams::odometer(3), 3, 30).unwrap();
        assert!((r.sums[0] - 11.0 / 9.0).abs() < 1e-12);
        assert!((r.sums[1] - 10.0 / 9.0).abs() < 1e-12);
        assert_eq!(r.best, 0);
        assert!(divergence_residue::<f64>(&RankOneParams::odometer(3), 3, 2).is_err());
    }

    #[test]
    fn dkbsz_bound_trivial_cases() {
        let zeros = vec![0.0f64; 100];
        let b = dkbsz_bound(&zeros, 2, 3, 100, 1024).unwrap();
        assert_eq!((b.lhs, b.rhs), (0.0, 0.0));
        assert!(b.holds);
        let alt: Vec<f64> = (1..=100)
            .map(|n| if n % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let b = dkbsz_bound(&alt, 2, 3, 100, 1024).unwrap();
        assert!(b.holds, "{b:?}");
        assert!(dkbsz_bound(&alt, 2, 3, 100, 512).is_err());
        assert!(dkbsz_bound(&alt, 3, 3, 100, 1024).is_err());
        assert!(dkbsz_bound(&alt, 2, 3, 2, 1024).is_err());
    }
}
