//! Densities sampled on the grid {k/G : 0 ≤ k < G} of the torus.

use num_bigint::BigUint;
use num_complex::Complex;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::coeffs::CoefficientMap;
use super::riesz::RieszFactor;
use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Nonnegative samples of a density at t = k/G.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity<T> {
    samples: Vec<T>,
}

impl<T: Real> GridDensity<T> {
    /// Negative samples (roundoff) are clamped to 0.
    pub fn from_samples(samples: Vec<T>) -> Result<Self> {
        if samples.is_empty() {
            return invalid("a grid density needs at least one sample");
        }
        Ok(GridDensity {
            samples: samples.into_iter().map(|s| s.max(T::zero())).collect(),
        })
    }

    /// The constant density 1.
    pub fn uniform(grid_size: usize) -> Self {
        GridDensity {
            samples: vec![T::one(); grid_size],
        }
    }

    pub fn grid_size(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    /// Grid point of sample k.
    pub fn t(&self, k: usize) -> T {
        T::from_count(k as u64) / T::from_count(self.samples.len() as u64)
    }

    /// Grid mean, the quadrature of ∫ density dt.
    pub fn mean(&self) -> T {
        mean(&self.samples)
    }
}

fn mean<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::from_count(xs.len() as u64)
}

fn check_grid(grid_size: usize) -> Result<()> {
    if grid_size < 2 {
        return invalid(format!("grid size {grid_size} must be at least 2"));
    }
    Ok(())
}

/// cos/sin of 2πr/G for r < G.
fn twiddles<T: Real>(grid_size: usize) -> Vec<Complex<T>> {
    let g = T::from_count(grid_size as u64);
    (0..grid_size)
        .map(|r| Complex::from_polar(T::one(), T::TAU() * T::from_count(r as u64) / g))
        .collect()
}

/// Π_n |P_n(k/G)|² at every grid point, evaluated point by point.
///
/// Phases are reduced exactly: e_j·k mod G is computed in integers before the
/// table lookup, so large exponents lose no accuracy.
pub fn evaluate_density<T: Real>(
    factors: &[RieszFactor],
    grid_size: usize,
) -> Result<GridDensity<T>> {
    check_grid(grid_size)?;
    let g = BigUint::from(grid_size);
    let residues: Vec<Vec<u64>> = factors
        .iter()
        .map(|f| {
            f.exponents
                .iter()
                .map(|e| (e % &g).to_u64().unwrap())
                .collect()
        })
        .collect();
    let weights: Vec<T> = factors
        .iter()
        .map(|f| T::from_count(f.cutting() as u64).recip())
        .collect();
    let table = twiddles::<T>(grid_size);
    let g = grid_size as u128;
    let samples: Vec<T> = (0..grid_size)
        .into_par_iter()
        .map(|k| {
            let mut value = T::one();
            for (res, &w) in residues.iter().zip(&weights) {
                let z: Complex<T> = res
                    .iter()
                    .map(|&e| table[((e as u128 * k as u128) % g) as usize])
                    .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
                value = value * z.norm_sqr() * w;
            }
            value
        })
        .collect();
    GridDensity::from_samples(samples)
}

/// Σ_n ĉ(n) e^{2πi n k/G} (real part) at every grid point.
pub fn evaluate_spectrum<T: Real>(
    coeffs: &CoefficientMap<T>,
    grid_size: usize,
) -> Result<GridDensity<T>> {
    check_grid(grid_size)?;
    let mut buckets = vec![Complex::new(T::zero(), T::zero()); grid_size];
    let g = grid_size as i64;
    for &(f, c) in coeffs.entries() {
        let r = f.rem_euclid(g) as usize;
        buckets[r] = buckets[r] + c;
    }
    FftPlanner::new()
        .plan_fft_inverse(grid_size)
        .process(&mut buckets);
    GridDensity::from_samples(buckets.into_iter().map(|z| z.re).collect())
}

/// |N^{-1/2} Σ_{n=1}^{N} a_n e^{2πi m n t}|² on the grid, with dilation m.
///
/// Since the phase only depends on m·n mod G, values are bucketed by residue
/// and one inverse FFT gives every grid point exactly (no aliasing error).
pub fn empirical_spectral_density_dilated<T: Real>(
    orbit_values: &[Complex<T>],
    dilation: u64,
    grid_size: usize,
) -> Result<GridDensity<T>> {
    check_grid(grid_size)?;
    if orbit_values.is_empty() {
        return invalid("at least one orbit value is required");
    }
    if dilation == 0 {
        return invalid("dilation must be positive");
    }
    let g = grid_size as u128;
    let mut buckets = vec![Complex::new(T::zero(), T::zero()); grid_size];
    for (i, &a) in orbit_values.iter().enumerate() {
        let r = ((i as u128 + 1) * dilation as u128 % g) as usize;
        buckets[r] = buckets[r] + a;
    }
    FftPlanner::new()
        .plan_fft_inverse(grid_size)
        .process(&mut buckets);
    let n = T::from_count(orbit_values.len() as u64);
    GridDensity::from_samples(buckets.into_iter().map(|z| z.norm_sqr() / n).collect())
}

/// σ_{f,T,N}: |N^{-1/2} Σ_{n=1}^{N} f(Tⁿx) e^{2πint}|² on the grid.
pub fn empirical_spectral_density<T: Real>(
    orbit_values: &[Complex<T>],
    grid_size: usize,
) -> Result<GridDensity<T>> {
    empirical_spectral_density_dilated(orbit_values, 1, grid_size)
}

/// Real-valued orbit convenience wrapper.
pub fn empirical_spectral_density_real<T: Real>(
    orbit_values: &[T],
    dilation: u64,
    grid_size: usize,
) -> Result<GridDensity<T>> {
    let values: Vec<Complex<T>> = orbit_values
        .iter()
        .map(|&v| Complex::new(v, T::zero()))
        .collect();
    empirical_spectral_density_dilated(&values, dilation, grid_size)
}

/// Grid mean of √(a·b): the Hellinger affinity with the grid's normalized
/// counting measure as reference.
pub fn hellinger<T: Real>(a: &GridDensity<T>, b: &GridDensity<T>) -> Result<T> {
    if a.grid_size() != b.grid_size() {
        return invalid(format!(
            "grid sizes differ: {} vs {}",
            a.grid_size(),
            b.grid_size()
        ));
    }
    let roots: Vec<T> = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(&x, &y)| (x * y).sqrt())
        .collect();
    Ok(mean(&roots))
}
