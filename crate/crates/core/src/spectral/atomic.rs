//! Purely atomic measures on the torus with rational atoms and exact masses.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::coeffs::FourierCoefficients;
use crate::error::{invalid, Result};
use crate::scalar::Real;

pub type Rational = Ratio<i64>;

/// Reduces a rational position into [0, 1).
pub fn wrap(x: Rational) -> Rational {
    x - x.floor()
}

/// Finite sum of point masses at rational positions of [0, 1).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AtomicMeasure {
    atoms: BTreeMap<Rational, Rational>,
}

impl AtomicMeasure {
    /// Atoms are wrapped into [0, 1); repeated positions accumulate.
    pub fn new(atoms: impl IntoIterator<Item = (Rational, Rational)>) -> Result<Self> {
        let mut out = AtomicMeasure::default();
        for (x, m) in atoms {
            if m.is_negative() {
                return invalid(format!("negative mass {m} at {x}"));
            }
            out.add_atom(x, m);
        }
        Ok(out)
    }

    pub fn dirac(x: Rational) -> Self {
        let mut out = AtomicMeasure::default();
        out.add_atom(x, Rational::one());
        out
    }

    fn add_atom(&mut self, x: Rational, m: Rational) {
        if m.is_zero() {
            return;
        }
        *self.atoms.entry(wrap(x)).or_insert_with(Rational::zero) += m;
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.atoms.iter()
    }

    pub fn mass_at(&self, x: Rational) -> Rational {
        self.atoms
            .get(&wrap(x))
            .copied()
            .unwrap_or_else(Rational::zero)
    }

    pub fn total_mass(&self) -> Rational {
        self.atoms.values().copied().sum()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn support_disjoint(&self, other: &AtomicMeasure) -> bool {
        self.atoms.keys().all(|x| !other.atoms.contains_key(x))
    }

    /// σ_(m) = (1/m) Σ_j (σ scaled by 1/m) ∗ δ_{j/m}.
    pub fn pseudo_dilate(&self, m: u64) -> Result<Self> {
        if m == 0 {
            return invalid("dilation factor must be positive");
        }
        let m = m as i64;
        let mut out = AtomicMeasure::default();
        for (&x, &mass) in &self.atoms {
            for j in 0..m {
                out.add_atom((x + j) / m, mass / m);
            }
        }
        Ok(out)
    }

    /// Image under x ↦ p·x mod 1.
    pub fn power_pushforward(&self, p: u64) -> Result<Self> {
        if p == 0 {
            return invalid("power must be positive");
        }
        let mut out = AtomicMeasure::default();
        for (&x, &mass) in &self.atoms {
            out.add_atom(x * p as i64, mass);
        }
        Ok(out)
    }

    /// σ ∗ δ_y.
    pub fn rotate(&self, y: Rational) -> Self {
        let mut out = AtomicMeasure::default();
        for (&x, &mass) in &self.atoms {
            out.add_atom(x + y, mass);
        }
        out
    }

    pub fn scale(&self, c: Rational) -> Self {
        let mut out = AtomicMeasure::default();
        for (&x, &mass) in &self.atoms {
            out.add_atom(x, mass * c);
        }
        out
    }

    pub fn sum(&self, other: &AtomicMeasure) -> Self {
        let mut out = self.clone();
        for (&x, &mass) in &other.atoms {
            out.add_atom(x, mass);
        }
        out
    }
}

impl<T: Real> FourierCoefficients<T> for AtomicMeasure {
    /// Σ mass · e^{−2πi n x}, with the phase n·x reduced exactly mod 1.
    fn coefficient(&self, freq: &BigInt) -> Complex<T> {
        let mut acc = Complex::zero();
        for (x, mass) in &self.atoms {
            let den = BigInt::from(*x.denom());
            let num = (freq * BigInt::from(*x.numer())).mod_floor(&den);
            let phase =
                T::from_i64(num.to_i64().unwrap()).unwrap() / T::from_i64(*x.denom()).unwrap();
            let m = T::from_i64(*mass.numer()).unwrap() / T::from_i64(*mass.denom()).unwrap();
            let angle = -T::TAU() * phase;
            acc = acc + Complex::from_polar(m, angle);
        }
        acc
    }
}

fn ratio_to_real<T: Real>(x: Rational) -> T {
    T::from_i64(*x.numer()).unwrap() / T::from_i64(*x.denom()).unwrap()
}

/// Σ over common atoms of √(m_a · m_b). Zero iff the supports are disjoint.
pub fn hellinger_atomic<T: Real>(a: &AtomicMeasure, b: &AtomicMeasure) -> Result<T> {
    for (name, m) in [("a", a), ("b", b)] {
        if m.total_mass() != Rational::one() {
            return invalid(format!(
                "{name} has total mass {} instead of 1",
                m.total_mass()
            ));
        }
    }
    Ok(a.atoms
        .iter()
        .filter_map(|(x, &ma)| b.atoms.get(x).map(|&mb| ratio_to_real::<T>(ma * mb).sqrt()))
        .sum())
}

/// Outcome of comparing the two singularity criteria of a coprime pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThouvenotVerdict {
    /// a_q ⊥ b_p (push-forwards under z ↦ z^q and z ↦ z^p).
    pub singular_pushforwards: bool,
    /// a_(p) ⊥ b_(q) (pseudo-dilations).
    pub singular_dilations: bool,
    pub agree: bool,
}

/// Decides a_q ⊥ b_p and a_(p) ⊥ b_(q) exactly for coprime p, q. For
/// atomic measures the two are equivalent: (x+j)/p ≡ (y+k)/q (mod 1) for some
/// j, k exactly when q·x ≡ p·y (mod 1).
pub fn thouvenot_check(
    a: &AtomicMeasure,
    b: &AtomicMeasure,
    p: u64,
    q: u64,
) -> Result<ThouvenotVerdict> {
    if p == 0 || q == 0 {
        return invalid("p and q must be positive");
    }
    if p.gcd(&q) != 1 {
        return invalid(format!("gcd({p}, {q}) ≠ 1"));
    }
    let singular_pushforwards = a
        .power_pushforward(q)?
        .support_disjoint(&b.power_pushforward(p)?);
    let singular_dilations = a.pseudo_dilate(p)?.support_disjoint(&b.pseudo_dilate(q)?);
    Ok(ThouvenotVerdict {
        singular_pushforwards,
        singular_dilations,
        agree: singular_pushforwards == singular_dilations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn atoms_wrap_and_accumulate() {
        let m = AtomicMeasure::new([(r(5, 4), r(1, 2)), (r(1, 4), r(1, 4)), (r(-1, 2), r(1, 4))])
            .unwrap();
        assert_eq!(m.mass_at(r(1, 4)), r(3, 4));
        assert_eq!(m.mass_at(r(1, 2)), r(1, 4));
        assert_eq!(m.total_mass(), Rational::one());
        assert!(AtomicMeasure::new([(r(0, 1), r(-1, 2))]).is_err());
    }

    #[test]
    fn dilation_of_dirac_zero() {
        let d = AtomicMeasure::dirac(r(0, 1)).pseudo_dilate(2).unwrap();
        let expected = AtomicMeasure::new([(r(0, 1), r(1, 2)), (r(1, 2), r(1, 2))]).unwrap();
        assert_eq!(d, expected);
        for n in -6i64..=6 {
            let c: Complex<f64> = d.coefficient(&BigInt::from(n));
            let want = if n % 2 == 0 { 1.0 } else { 0.0 };
            assert!((c.re - want).abs() < 1e-12 && c.im.abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn pushforward_of_third() {
        let d = AtomicMeasure::dirac(r(1, 3)).power_pushforward(3).unwrap();
        assert_eq!(d, AtomicMeasure::dirac(r(0, 1)));
    }

    #[test]
    fn dilation_is_rotation_invariant() {
        let s = AtomicMeasure::new([(r(1, 7), r(1, 3)), (r(2, 5), r(2, 3))]).unwrap();
        for m in 1..6 {
            let d = s.pseudo_dilate(m).unwrap();
            assert_eq!(d.rotate(r(1, m as i64)), d);
        }
    }

    #[test]
    fn hellinger_atomic_examples() {
        let a = AtomicMeasure::new([(r(0, 1), r(1, 2)), (r(1, 2), r(1, 2))]).unwrap();
        let b = AtomicMeasure::new([(r(0, 1), r(1, 2)), (r(1, 3), r(1, 2))]).unwrap();
        assert!((hellinger_atomic::<f64>(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(hellinger_atomic::<f64>(&a, &b).unwrap(), 0.5);
        let d0 = AtomicMeasure::dirac(r(0, 1));
        let dh = AtomicMeasure::dirac(r(1, 2));
        assert_eq!(hellinger_atomic::<f64>(&d0, &dh).unwrap(), 0.0);
        assert!(hellinger_atomic::<f64>(&d0, &d0.scale(r(1, 2))).is_err());
    }

    #[test]
    fn thouvenot_examples() {
        let v = thouvenot_check(
            &AtomicMeasure::dirac(r(1, 7)),
            &AtomicMeasure::dirac(r(2, 7)),
            2,
            3,
        )
        .unwrap();
        assert!(v.singular_pushforwards && v.singular_dilations && v.agree);

        let d0 = AtomicMeasure::dirac(r(0, 1));
        for (p, q) in [(1, 1), (2, 3), (5, 4)] {
            let v = thouvenot_check(&d0, &d0, p, q).unwrap();
            assert!(!v.singular_pushforwards && !v.singular_dilations);
        }

        // δ_0 vs δ_{1/2}, (2, 3): the dilations share the atom 1/2
        let v = thouvenot_check(&d0, &AtomicMeasure::dirac(r(1, 2)), 2, 3).unwrap();
        assert!(!v.singular_dilations);
        assert!(!v.singular_pushforwards);
        assert!(v.agree);

        assert!(thouvenot_check(&d0, &d0, 2, 4).is_err());
    }
}
