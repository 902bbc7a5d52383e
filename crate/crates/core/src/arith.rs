//! Exact big-integer and rational arithmetic plus the elementary number
//! theory every other module consumes: extended Euclid, modular inverses,
//! the Chinese remainder theorem and Sylvester's sequence.
//!
//! All scalar quantities in this crate are either `BigInt` or [`Rational`];
//! nothing is ever rounded. Determinants of the lower-bound instances and
//! Sylvester numbers grow far past any fixed-width integer, so arbitrary
//! precision is not optional here.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// The universal exact scalar: an arbitrary-precision fraction kept in
/// canonical form (positive denominator, reduced) by construction.
pub type Rational = BigRational;

/// Shorthand for small rational constants, mostly in tests.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigInt {
    BigInt::from(n)
}

/// Fractional part `x - floor(x)`, always in `[0, 1)`.
pub fn fract(x: &Rational) -> Rational {
    x - x.floor()
}

/// Exact ceiling as a `BigInt`.
pub fn ceil_int(x: &Rational) -> BigInt {
    x.ceil().to_integer()
}

/// Exact floor as a `BigInt`.
pub fn floor_int(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

/// A congruence class `value mod modulus` with `0 <= value < modulus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residue {
    value: BigInt,
    modulus: BigInt,
}

impl Residue {
    pub fn new(value: impl Into<BigInt>, modulus: impl Into<BigInt>) -> Result<Self> {
        let modulus = modulus.into();
        if modulus < BigInt::one() {
            return Err(Error::invalid("modulus must be >= 1"));
        }
        let value = value.into().mod_floor(&modulus);
        Ok(Residue { value, modulus })
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }
}

impl std::fmt::Display for Residue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

/// Extended Euclid over a nonempty list: returns `(g, coeffs)` with
/// `g = gcd(values)` and `sum(coeffs[i] * values[i]) = g`.
///
/// The coefficients are the ones produced by folding the iterative
/// two-term chain left to right; no minimality beyond the identity itself.
pub fn ext_gcd(values: &[BigInt]) -> Result<(BigInt, Vec<BigInt>)> {
    if values.is_empty() {
        return Err(Error::invalid("ext_gcd needs at least one value"));
    }
    if values.iter().all(|v| v.is_zero()) {
        return Err(Error::invalid("ext_gcd of all-zero list"));
    }
    let mut g = values[0].clone();
    let mut coeffs = vec![BigInt::one()];
    for v in &values[1..] {
        let e = g.extended_gcd(v);
        for c in coeffs.iter_mut() {
            *c *= &e.x;
        }
        coeffs.push(e.y);
        g = e.gcd;
    }
    // with negative inputs the chain can end on a negative gcd; negating
    // every coefficient preserves the identity
    if g.is_negative() {
        g = -g;
        for c in coeffs.iter_mut() {
            *c = -(c.clone());
        }
    }
    debug_assert!(g.is_positive());
    Ok((g, coeffs))
}

/// Multiplicative inverse of `x` modulo `a >= 2`. Negative `x` is first
/// normalized into `[0, a)` so inverses of negated quantities are
/// well-defined.
pub fn mod_inverse(x: &BigInt, a: &BigInt) -> Result<Residue> {
    if *a < int(2) {
        return Err(Error::invalid("modulus must be >= 2"));
    }
    let xr = x.mod_floor(a);
    let e = xr.extended_gcd(a);
    if !e.gcd.is_one() {
        return Err(Error::NotInvertible {
            value: x.clone(),
            modulus: a.clone(),
        });
    }
    Residue::new(e.x, a.clone())
}

/// Solve a system of simultaneous congruences with pairwise coprime moduli.
/// Returns the unique solution modulo the product of the moduli.
pub fn crt_solve(residues: &[Residue]) -> Result<Residue> {
    if residues.is_empty() {
        return Err(Error::invalid("crt_solve needs at least one congruence"));
    }
    for (i, r) in residues.iter().enumerate() {
        for s in &residues[i + 1..] {
            if !r.modulus.gcd(&s.modulus).is_one() {
                return Err(Error::invalid(format!(
                    "moduli {} and {} are not coprime",
                    r.modulus, s.modulus
                )));
            }
        }
    }
    let mut x = residues[0].value.clone();
    let mut m = residues[0].modulus.clone();
    for r in &residues[1..] {
        // x' = x + m * t with x' ≡ r.value (mod r.modulus)
        if r.modulus.is_one() {
            continue;
        }
        let inv = mod_inverse(&m, &r.modulus)?;
        let t = ((&r.value - &x) * inv.value()).mod_floor(&r.modulus);
        x += &m * t;
        m *= &r.modulus;
        x = x.mod_floor(&m);
    }
    Residue::new(x, m)
}

/// Sylvester's sequence: `S_1 = 2`, `S_j = 1 + S_1 * ... * S_{j-1}`.
/// Doubly exponential; the result is exact.
pub fn sylvester(n: u32) -> Result<BigInt> {
    if n < 1 {
        return Err(Error::invalid("sylvester index must be >= 1"));
    }
    let mut s = int(2);
    let mut product = int(2);
    for _ in 2..=n {
        s = &product + 1;
        product *= &s;
    }
    Ok(s)
}

/// `sum_{i=1}^{j-1} 1/S_i`, exact. Equals `1 - 1/(S_j - 1)`.
pub fn sylvester_reciprocal_sum(j: u32) -> Result<Rational> {
    let mut sum = Rational::zero();
    for i in 1..j {
        sum += Rational::new(BigInt::one(), sylvester(i)?);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ints(vals: &[i64]) -> Vec<BigInt> {
        vals.iter().map(|&v| int(v)).collect()
    }

    #[test]
    fn ext_gcd_basics() {
        let (g, c) = ext_gcd(&ints(&[4, 3])).unwrap();
        assert_eq!(g, int(1));
        assert_eq!(c, ints(&[1, -1]));

        let (g, c) = ext_gcd(&ints(&[2, 4])).unwrap();
        assert_eq!(g, int(2));
        assert_eq!(c, ints(&[1, 0]));

        let (g, c) = ext_gcd(&ints(&[6, 10, 15])).unwrap();
        assert_eq!(g, int(1));
        let total: BigInt = c
            .iter()
            .zip(ints(&[6, 10, 15]).iter())
            .map(|(a, b)| a * b)
            .sum();
        assert_eq!(total, int(1));
    }

    #[test]
    fn ext_gcd_rejects_empty_and_zero() {
        assert!(ext_gcd(&[]).is_err());
        assert!(ext_gcd(&ints(&[0, 0])).is_err());
    }

    #[test]
    fn ext_gcd_random_bezout() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let vals: Vec<BigInt> = (0..rng.gen_range(1..5))
                .map(|_| int(rng.gen_range(-500..500)))
                .collect();
            if vals.iter().all(|v| v.is_zero()) {
                continue;
            }
            let (g, c) = ext_gcd(&vals).unwrap();
            let total: BigInt = c.iter().zip(vals.iter()).map(|(a, b)| a * b).sum();
            assert_eq!(total, g);
            let gcd = vals.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
            assert_eq!(g, gcd);
        }
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(*mod_inverse(&int(3), &int(4)).unwrap().value(), int(3));
        assert_eq!(*mod_inverse(&int(1), &int(97)).unwrap().value(), int(1));
        assert!(matches!(
            mod_inverse(&int(2), &int(4)),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn mod_inverse_normalizes_negatives() {
        // (-37)^{-1} mod 75: -37 ≡ 38, and 38 * 2 = 76 ≡ 1.
        let inv = mod_inverse(&int(-37), &int(75)).unwrap();
        assert_eq!(*inv.value(), int(2));
    }

    #[test]
    fn mod_inverse_exhaustive_small() {
        // every coprime pair with a <= 200, checked against the definition
        for a in 2i64..=200 {
            for x in 1..a {
                let g = int(x).gcd(&int(a));
                let got = mod_inverse(&int(x), &int(a));
                if g.is_one() {
                    let v = got.unwrap();
                    assert_eq!((v.value() * int(x)).mod_floor(&int(a)), int(1));
                } else {
                    assert!(got.is_err());
                }
            }
        }
    }

    #[test]
    fn crt_examples() {
        let r = crt_solve(&[
            Residue::new(2, 3).unwrap(),
            Residue::new(1, 4).unwrap(),
        ])
        .unwrap();
        assert_eq!((r.value().clone(), r.modulus().clone()), (int(5), int(12)));

        let r = crt_solve(&[Residue::new(0, 17).unwrap()]).unwrap();
        assert_eq!((r.value().clone(), r.modulus().clone()), (int(0), int(17)));

        let r = crt_solve(&[
            Residue::new(1, 2).unwrap(),
            Residue::new(1, 3).unwrap(),
            Residue::new(1, 5).unwrap(),
        ])
        .unwrap();
        assert_eq!((r.value().clone(), r.modulus().clone()), (int(1), int(30)));

        assert!(crt_solve(&[
            Residue::new(1, 4).unwrap(),
            Residue::new(0, 6).unwrap(),
        ])
        .is_err());
    }

    #[test]
    fn crt_random_against_scan() {
        let mut rng = StdRng::seed_from_u64(11);
        'outer: for _ in 0..100 {
            let mut moduli: Vec<i64> = Vec::new();
            for _ in 0..rng.gen_range(1..4) {
                let m = rng.gen_range(2..50);
                if moduli.iter().any(|&e| int(e).gcd(&int(m)) != int(1)) {
                    continue 'outer;
                }
                moduli.push(m);
            }
            let rs: Vec<Residue> = moduli
                .iter()
                .map(|&m| Residue::new(rng.gen_range(0..m), m).unwrap())
                .collect();
            let sol = crt_solve(&rs).unwrap();
            let prod: i64 = moduli.iter().product();
            assert_eq!(*sol.modulus(), int(prod));
            // exhaustive scan oracle
            let mut expected = None;
            for x in 0..prod {
                if rs
                    .iter()
                    .all(|r| int(x).mod_floor(r.modulus()) == *r.value())
                {
                    expected = Some(x);
                    break;
                }
            }
            assert_eq!(*sol.value(), int(expected.unwrap()));
        }
    }

    #[test]
    fn sylvester_values() {
        assert_eq!(sylvester(1).unwrap(), int(2));
        assert_eq!(sylvester(2).unwrap(), int(3));
        assert_eq!(sylvester(3).unwrap(), int(7));
        assert_eq!(sylvester(4).unwrap(), int(43));
        assert_eq!(sylvester(5).unwrap(), int(1807));
        assert!(sylvester(0).is_err());
    }

    #[test]
    fn sylvester_reciprocal_identity() {
        for j in 2..=10 {
            let lhs = sylvester_reciprocal_sum(j).unwrap();
            let rhs = Rational::one()
                - Rational::new(BigInt::one(), sylvester(j).unwrap() - 1);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn rational_canonical_and_laws() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..300 {
            let a = rat(rng.gen_range(-30..30), rng.gen_range(1..30));
            let b = rat(rng.gen_range(-30..30), rng.gen_range(1..30));
            let c = rat(rng.gen_range(-30..30), rng.gen_range(1..30));
            assert_eq!(&a + &b, &b + &a);
            assert_eq!(&a * &b, &b * &a);
            assert_eq!((&a + &b) + &c, &a + (&b + &c));
            assert_eq!((&a * &b) * &c, &a * (&b * &c));
            let s = &a + &b;
            assert!(s.denom().is_positive());
            assert_eq!(s.numer().gcd(s.denom()), BigInt::one());
        }
    }

    #[test]
    fn fract_in_unit_interval() {
        for n in -20i64..20 {
            for d in 1i64..12 {
                let f = fract(&rat(n, d));
                assert!(f >= Rational::zero() && f < Rational::one());
                assert!((rat(n, d) - &f).is_integer());
            }
        }
    }
}
