//! Arithmetic kernel: Möbius and Liouville tables, Mertens sums, squarefree
//! density and twisted exponential sums.
//!
//! The main table is produced by a linear (Euler) sieve, which touches every
//! composite exactly once through its smallest prime factor. Storage is one
//! signed byte for μ, four bytes for the Mertens prefix sums and one bit for λ.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Default checkpoints for twisted-sum scans and Möbius averages.
pub const DEFAULT_CHECKPOINTS: [u64; 4] = [1_000, 10_000, 100_000, 1_000_000];

const CACHE_MAGIC: &[u8; 4] = b"MOBS";
const CACHE_VERSION: u32 = 1;

/// μ, λ and Mertens values for `1..=limit`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArithmeticTable {
    limit: usize,
    // index 0 is unused and stored as 0
    mobius: Vec<i8>,
    // bit n set <=> λ(n) = -1
    liouville_neg: Vec<u64>,
    mertens: Vec<i32>,
}

impl ArithmeticTable {
    pub fn limit(&self) -> usize {
        self.limit
    }

    /// μ(n) for `1 <= n <= limit`. Panics outside that range.
    pub fn mobius(&self, n: usize) -> i8 {
        assert!(
            (1..=self.limit).contains(&n),
            "n = {n} outside 1..={}",
            self.limit
        );
        self.mobius[n]
    }

    /// λ(n) for `1 <= n <= limit`. Panics outside that range.
    pub fn liouville(&self, n: usize) -> i8 {
        assert!(
            (1..=self.limit).contains(&n),
            "n = {n} outside 1..={}",
            self.limit
        );
        if self.liouville_neg[n / 64] >> (n % 64) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    /// M(n) = Σ_{k≤n} μ(k). `mertens(0)` is 0.
    pub fn mertens(&self, n: usize) -> i64 {
        assert!(n <= self.limit, "n = {n} exceeds limit {}", self.limit);
        self.mertens[n] as i64
    }

    /// μ values with a leading 0 at index 0, so `slice[n] = μ(n)`.
    pub fn mobius_slice(&self) -> &[i8] {
        &self.mobius
    }

    pub fn liouville_values(&self) -> Vec<i8> {
        let mut out = vec![0i8; self.limit + 1];
        for (n, v) in out.iter_mut().enumerate().skip(1) {
            *v = self.liouville(n);
        }
        out
    }

    pub fn squarefree_count(&self) -> usize {
        self.mobius[1..].iter().filter(|&&m| m != 0).count()
    }
}

/// Builds the arithmetic table for `1..=limit` with a linear sieve.
pub fn sieve(limit: usize) -> Result<ArithmeticTable> {
    if limit == 0 {
        return invalid("sieve limit must be at least 1");
    }
    let words = limit / 64 + 1;
    let mut composite = vec![0u64; words];
    let mut liouville_neg = vec![0u64; words];
    let mut mobius = vec![0i8; limit + 1];
    let mut primes: Vec<usize> = Vec::new();

    mobius[1] = 1;
    for i in 2..=limit {
        if composite[i / 64] >> (i % 64) & 1 == 0 {
            primes.push(i);
            mobius[i] = -1;
            liouville_neg[i / 64] |= 1 << (i % 64);
        }
        let lam_i_neg = liouville_neg[i / 64] >> (i % 64) & 1;
        for &p in &primes {
            let m = match i.checked_mul(p) {
                Some(m) if m <= limit => m,
                _ => break,
            };
            composite[m / 64] |= 1 << (m % 64);
            if lam_i_neg == 0 {
                liouville_neg[m / 64] |= 1 << (m % 64);
            }
            if i % p == 0 {
                mobius[m] = 0;
                break;
            }
            mobius[m] = -mobius[i];
        }
    }

    let mut mertens = vec![0i32; limit + 1];
    let mut acc = 0i32;
    for n in 1..=limit {
        acc += mobius[n] as i32;
        mertens[n] = acc;
    }

    Ok(ArithmeticTable {
        limit,
        mobius,
        liouville_neg,
        mertens,
    })
}

/// μ(1..=limit) by a segmented Eratosthenes sieve, independent of [`sieve`].
///
/// Each segment multiplies out the primes up to √limit; a leftover cofactor
/// larger than 1 is a single prime above √limit.
pub fn segmented_mobius(limit: usize, segment: usize) -> Result<Vec<i8>> {
    if limit == 0 || segment == 0 {
        return invalid("limit and segment size must be positive");
    }
    let root = (limit as f64).sqrt() as usize + 1;
    let mut small = vec![true; root + 1];
    let mut primes = Vec::new();
    for i in 2..=root {
        if small[i] {
            primes.push(i);
            let mut j = i * i;
            while j <= root {
                small[j] = false;
                j += i;
            }
        }
    }

    let mut out = vec![0i8; limit + 1];
    let mut lo = 1;
    while lo <= limit {
        let hi = (lo + segment).min(limit + 1);
        let len = hi - lo;
        let mut mu = vec![1i8; len];
        let mut rest: Vec<usize> = (lo..hi).collect();
        for &p in &primes {
            if p * p > hi {
                break;
            }
            let first = lo.div_ceil(p) * p;
            let mut m = first;
            while m < hi {
                let idx = m - lo;
                if mu[idx] != 0 {
                    let mut r = rest[idx] / p;
                    if r.is_multiple_of(p) {
                        mu[idx] = 0;
                    } else {
                        mu[idx] = -mu[idx];
                        while r.is_multiple_of(p) {
                            r /= p;
                        }
                    }
                    rest[idx] = r;
                }
                m += p;
            }
        }
        for idx in 0..len {
            if mu[idx] != 0 && rest[idx] > 1 {
                mu[idx] = -mu[idx];
            }
            out[lo + idx] = mu[idx];
        }
        lo = hi;
    }
    Ok(out)
}

/// #{n ≤ limit : μ(n) ≠ 0} / limit.
pub fn squarefree_density(limit: usize) -> Result<f64> {
    let table = sieve(limit)?;
    Ok(table.squarefree_count() as f64 / limit as f64)
}

/// Deterministic primality test by trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub(crate) fn check_checkpoints(checkpoints: &[u64]) -> Result<()> {
    if checkpoints.is_empty() {
        return invalid("at least one checkpoint is required");
    }
    if checkpoints[0] == 0 {
        return invalid("checkpoints must be positive");
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("checkpoints must be strictly ascending");
    }
    Ok(())
}

/// Result of [`twisted_sum_scan`].
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedScan<T> {
    pub grid_size: usize,
    pub checkpoints: Vec<u64>,
    /// max_k |Σ_{n≤N} μ(n) e(n k / G)| per checkpoint.
    pub supremum: Vec<T>,
    /// Grid point k/G realizing the supremum (first one on ties).
    pub argmax_t: Vec<T>,
    /// Least-squares slope of log(sup) against log(N); `None` with fewer than
    /// two checkpoints.
    pub loglog_slope: Option<T>,
}

/// Scans |Σ_{n≤N} μ(n) e^{2πint}| over t ∈ {k/G} at each checkpoint N.
///
/// The phase only depends on n mod G, so μ is bucketed by residue and each
/// checkpoint costs one inverse FFT of length G. The grid values are exact up
/// to FFT roundoff regardless of how N compares with G.
pub fn twisted_sum_scan<T: Real>(
    table: &ArithmeticTable,
    checkpoints: &[u64],
    grid_size: usize,
) -> Result<TwistedScan<T>> {
    if grid_size < 2 {
        return invalid("grid_size must be at least 2");
    }
    check_checkpoints(checkpoints)?;
    let last = *checkpoints.last().unwrap() as usize;
    if last > table.limit() {
        return invalid(format!(
            "checkpoint {last} exceeds sieve limit {}",
            table.limit()
        ));
    }

    let fft = FftPlanner::<T>::new().plan_fft_inverse(grid_size);
    let mut buckets = vec![0i64; grid_size];
    let mut n = 1usize;
    let mut supremum = Vec::with_capacity(checkpoints.len());
    let mut argmax_t = Vec::with_capacity(checkpoints.len());
    for &cp in checkpoints {
        while n <= cp as usize {
            buckets[n % grid_size] += table.mobius(n) as i64;
            n += 1;
        }
        let mut buf: Vec<Complex<T>> = buckets
            .iter()
            .map(|&b| Complex::new(T::from_i64(b).unwrap(), T::zero()))
            .collect();
        fft.process(&mut buf);
        let (mut best_k, mut best) = (0usize, T::neg_infinity());
        for (k, z) in buf.iter().enumerate() {
            let v = z.norm();
            if v > best {
                best = v;
                best_k = k;
            }
        }
        supremum.push(best);
        argmax_t.push(T::from_count(best_k as u64) / T::from_count(grid_size as u64));
    }

    let loglog_slope = (checkpoints.len() >= 2).then(|| {
        let xs: Vec<T> = checkpoints.iter().map(|&c| T::from_count(c).ln()).collect();
        let ys: Vec<T> = supremum.iter().map(|s| s.ln()).collect();
        least_squares_slope(&xs, &ys)
    });

    Ok(TwistedScan {
        grid_size,
        checkpoints: checkpoints.to_vec(),
        supremum,
        argmax_t,
        loglog_slope,
    })
}

pub(crate) fn least_squares_slope<T: Real>(xs: &[T], ys: &[T]) -> T {
    let n = T::from_count(xs.len() as u64);
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let mut num = T::zero();
    let mut den = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        num = num + (x - mx) * (y - my);
        den = den + (x - mx) * (x - mx);
    }
    num / den
}

/// Writes μ(1..=limit) as a little-endian cache file:
/// `"MOBS"`, version `u32`, limit `u64`, then `limit` signed bytes.
pub fn write_mobius_cache(table: &ArithmeticTable, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    w.write_all(&(table.limit() as u64).to_le_bytes())?;
    let bytes: Vec<u8> = table.mobius[1..].iter().map(|&m| m as u8).collect();
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

/// Reads a cache written by [`write_mobius_cache`]. The returned vector has
/// a leading 0 so that `v[n] = μ(n)`.
pub fn read_mobius_cache(path: impl AsRef<Path>) -> Result<Vec<i8>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[0..4] != CACHE_MAGIC {
        return Err(Error::Parse("bad magic in Möbius cache".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != CACHE_VERSION {
        return Err(Error::Parse(format!("unsupported cache version {version}")));
    }
    let limit = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    let mut body = vec![0u8; limit];
    r.read_exact(&mut body)?;
    let mut out = Vec::with_capacity(limit + 1);
    out.push(0i8);
    for b in body {
        let m = b as i8;
        if !(-1..=1).contains(&m) {
            return Err(Error::Parse(format!("invalid μ byte {b:#x}")));
        }
        out.push(m);
    }
    Ok(out)
}
