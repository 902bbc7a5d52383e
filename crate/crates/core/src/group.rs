//! The fundamental parallelepiped of a diagonal vertex basis and the
//! finite abelian group living on its lattice points.
//!
//! For unit-fraction sizes `s_i = 1/a_i` the hull vertices are the axis
//! points `a_i e_i`. Reducing any nonnegative integer vector componentwise
//! modulo `a_i` lands in the half-open box `[0, a_1) x ... x [0, a_d)`;
//! with componentwise addition mod `a_i` that box is a group of order
//! `det = a_1 * ... * a_d`. When the `a_i` are pairwise coprime the group
//! is cyclic, the fractional part of the size `sum pi_i / a_i` indexes the
//! elements bijectively, and the element of fractional size
//! `(det-1)/det` generates everything.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{ext_gcd, mod_inverse, Rational};
use crate::error::{Error, Result};
use crate::polytope::{Configuration, VertexSet};

/// Denominator vector `a`, its determinant and cofactors
/// `R_i = det / a_i`. The coprimality flag gates the cyclic-group
/// operations; residues and sizes are well-defined without it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalBasis {
    a: Vec<BigInt>,
    det: BigInt,
    cofactors: Vec<BigInt>,
    coprime: bool,
}

/// A lattice point of the half-open parallelepiped: `0 <= r_i < a_i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    residues: Vec<BigInt>,
}

impl GroupElement {
    pub fn residues(&self) -> &[BigInt] {
        &self.residues
    }

    pub fn dim(&self) -> usize {
        self.residues.len()
    }

    pub fn is_zero(&self) -> bool {
        self.residues.iter().all(|r| r.is_zero())
    }

    pub fn to_configuration(&self) -> Configuration {
        Configuration(self.residues.clone())
    }
}

impl std::fmt::Display for GroupElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_configuration())
    }
}

impl DiagonalBasis {
    pub fn new(a: Vec<BigInt>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid("need at least one denominator"));
        }
        if a.iter().any(|x| *x < BigInt::one()) {
            return Err(Error::invalid("denominators must be >= 1"));
        }
        let det: BigInt = a.iter().product();
        let cofactors: Vec<BigInt> = a.iter().map(|x| &det / x).collect();
        let mut coprime = true;
        'outer: for i in 0..a.len() {
            for j in i + 1..a.len() {
                if !a[i].gcd(&a[j]).is_one() {
                    coprime = false;
                    break 'outer;
                }
            }
        }
        Ok(DiagonalBasis {
            a,
            det,
            cofactors,
            coprime,
        })
    }

    /// Build from unit-fraction sizes `1/a_i`.
    pub fn from_sizes(sizes: &[Rational]) -> Result<Self> {
        let a = sizes
            .iter()
            .map(|s| {
                if s.numer().is_one() {
                    Ok(s.denom().clone())
                } else {
                    Err(Error::invalid(format!("size {s} is not a unit fraction")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        DiagonalBasis::new(a)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn denominators(&self) -> &[BigInt] {
        &self.a
    }

    pub fn determinant(&self) -> &BigInt {
        &self.det
    }

    pub fn cofactors(&self) -> &[BigInt] {
        &self.cofactors
    }

    pub fn is_coprime(&self) -> bool {
        self.coprime
    }

    /// The item sizes `1/a_i` this basis belongs to.
    pub fn sizes(&self) -> Vec<Rational> {
        self.a
            .iter()
            .map(|x| Rational::new(BigInt::one(), x.clone()))
            .collect()
    }

    /// The basis vertex `a_i e_i`.
    pub fn vertex(&self, i: usize) -> Configuration {
        Configuration::axis(self.dim(), i, self.a[i].clone())
    }

    /// `{0, B_1, ..., B_d}` in that order, for barycentric work.
    pub fn simplex_basis(&self) -> Vec<Configuration> {
        let mut out = vec![Configuration::zero(self.dim())];
        for i in 0..self.dim() {
            out.push(self.vertex(i));
        }
        out
    }

    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::new(self.dim(), self.simplex_basis())
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::invalid(format!(
                "dimension mismatch: basis has {}, got {}",
                self.dim(),
                len
            )));
        }
        Ok(())
    }

    /// Componentwise residue `[b]` of a nonnegative integer vector; the
    /// difference `b - [b]` is a nonnegative integer combination of the
    /// basis vertices.
    pub fn residue_map(&self, b: &[BigInt]) -> Result<GroupElement> {
        self.check_dim(b.len())?;
        if b.iter().any(|x| x.is_negative()) {
            return Err(Error::invalid("residue_map needs a nonnegative vector"));
        }
        Ok(GroupElement {
            residues: b
                .iter()
                .zip(&self.a)
                .map(|(x, m)| x.mod_floor(m))
                .collect(),
        })
    }

    /// The vertex multiples `floor(b_i / a_i)` with
    /// `b = sum_i q_i B_i + [b]`.
    pub fn integral_part(&self, b: &[BigInt]) -> Result<Vec<BigInt>> {
        self.check_dim(b.len())?;
        Ok(b.iter().zip(&self.a).map(|(x, m)| x.div_floor(m)).collect())
    }

    /// Group law: componentwise sum reduced mod `a_i`.
    pub fn add(&self, p: &GroupElement, q: &GroupElement) -> Result<GroupElement> {
        self.check_dim(p.dim())?;
        self.check_dim(q.dim())?;
        Ok(GroupElement {
            residues: p
                .residues
                .iter()
                .zip(&q.residues)
                .zip(&self.a)
                .map(|((x, y), m)| (x + y).mod_floor(m))
                .collect(),
        })
    }

    pub fn inverse(&self, p: &GroupElement) -> Result<GroupElement> {
        self.check_dim(p.dim())?;
        Ok(GroupElement {
            residues: p
                .residues
                .iter()
                .zip(&self.a)
                .map(|(x, m)| (-x).mod_floor(m))
                .collect(),
        })
    }

    pub fn scalar_mul(&self, k: &BigInt, p: &GroupElement) -> Result<GroupElement> {
        self.check_dim(p.dim())?;
        Ok(GroupElement {
            residues: p
                .residues
                .iter()
                .zip(&self.a)
                .map(|(x, m)| (k * x).mod_floor(m))
                .collect(),
        })
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            residues: vec![BigInt::zero(); self.dim()],
        }
    }

    /// `sum_i v_i / a_i` as one exact fraction `dot(v, R) / det`.
    pub fn size_of(&self, v: &[BigInt]) -> Result<Rational> {
        self.check_dim(v.len())?;
        let num: BigInt = v.iter().zip(&self.cofactors).map(|(x, r)| x * r).sum();
        Ok(Rational::new(num, self.det.clone()))
    }

    /// `k` with fractional size `k/det`, i.e. `dot(v, R) mod det`.
    pub fn fractional_size_index(&self, e: &GroupElement) -> Result<BigInt> {
        self.check_dim(e.dim())?;
        let num: BigInt = e
            .residues
            .iter()
            .zip(&self.cofactors)
            .map(|(x, r)| x * r)
            .sum();
        Ok(num.mod_floor(&self.det))
    }

    fn require_coprime(&self) -> Result<()> {
        if !self.coprime {
            return Err(Error::invalid(
                "denominators are not pairwise coprime; the cyclic-group \
                 operations are undefined",
            ));
        }
        Ok(())
    }

    /// The full generator: the unique element whose size has fractional
    /// part `(det-1)/det`, computed componentwise as
    /// `g_i = -R_i^{-1} mod a_i`.
    pub fn full_generator(&self) -> Result<GroupElement> {
        self.require_coprime()?;
        if self.a.iter().any(|x| *x < BigInt::from(2)) {
            return Err(Error::invalid("full generator needs all denominators >= 2"));
        }
        let residues = self
            .a
            .iter()
            .zip(&self.cofactors)
            .map(|(m, r)| {
                let inv = mod_inverse(r, m)?;
                Ok((-inv.value()).mod_floor(m))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupElement { residues })
    }

    /// The unique element whose size has fractional part `k/det`, for
    /// `0 <= k < det`. Built from a Bezout certificate over the cofactors,
    /// independently of [`DiagonalBasis::full_generator`].
    pub fn element_of_fractional_size(&self, k: &BigInt) -> Result<GroupElement> {
        self.require_coprime()?;
        if k.is_negative() || *k >= self.det {
            return Err(Error::invalid(format!(
                "fractional size index {k} out of range [0, {})",
                self.det
            )));
        }
        let (g, coeffs) = ext_gcd(&self.cofactors)?;
        debug_assert!(g.is_one());
        // unit element: x_i = (v_i R_i mod det)/det sums to 1/det + z and
        // B x is integral
        let base: Vec<BigInt> = coeffs
            .iter()
            .zip(&self.cofactors)
            .zip(&self.a)
            .map(|((v, r), ai)| {
                let vi = (v * r).mod_floor(&self.det);
                let num = ai * vi;
                debug_assert!((&num % &self.det).is_zero());
                num / &self.det
            })
            .collect();
        Ok(GroupElement {
            residues: base
                .iter()
                .zip(&self.a)
                .map(|(x, m)| (k * x).mod_floor(m))
                .collect(),
        })
    }

    /// `[K g]` for the full generator `g`; its size has fractional part
    /// `((det - K) mod det)/det`.
    pub fn generator_orbit(&self, k: &BigInt) -> Result<GroupElement> {
        if k.is_negative() {
            return Err(Error::invalid("orbit multiplicity must be >= 0"));
        }
        let g = self.full_generator()?;
        self.scalar_mul(k, &g)
    }

    /// All elements of the parallelepiped in lexicographic order;
    /// `det` many.
    pub fn elements(&self) -> GroupElements {
        GroupElements {
            a: self.a.clone(),
            next: Some(vec![BigInt::zero(); self.dim()]),
        }
    }
}

pub struct GroupElements {
    a: Vec<BigInt>,
    next: Option<Vec<BigInt>>,
}

impl Iterator for GroupElements {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        // odometer with the last coordinate fastest keeps lex order
        for i in (0..succ.len()).rev() {
            succ[i] += 1;
            if succ[i] < self.a[i] {
                self.next = Some(succ);
                break;
            }
            succ[i] = BigInt::zero();
        }
        Some(GroupElement { residues: current })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn basis(a: &[i64]) -> DiagonalBasis {
        DiagonalBasis::new(a.iter().map(|&x| int(x)).collect()).unwrap()
    }

    fn elem(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn residue_map_examples() {
        let b = basis(&[2, 3]);
        assert_eq!(b.residue_map(&elem(&[3, 1])).unwrap().residues(), elem(&[1, 1]));
        assert_eq!(b.residue_map(&elem(&[2, 0])).unwrap().residues(), elem(&[0, 0]));
        assert_eq!(b.residue_map(&elem(&[4, 5])).unwrap().residues(), elem(&[0, 2]));
        assert!(b.residue_map(&elem(&[-1, 0])).is_err());
    }

    #[test]
    fn residue_reconstruction() {
        let b = basis(&[3, 4]);
        let v = elem(&[10, 7]);
        let r = b.residue_map(&v).unwrap();
        let q = b.integral_part(&v).unwrap();
        for i in 0..2 {
            assert_eq!(&q[i] * &b.denominators()[i] + &r.residues()[i], v[i]);
            assert!(!q[i].is_negative());
        }
    }

    #[test]
    fn add_examples() {
        let b = basis(&[3, 4]);
        let p = b.residue_map(&elem(&[2, 3])).unwrap();
        let q = b.residue_map(&elem(&[2, 2])).unwrap();
        assert_eq!(b.add(&p, &q).unwrap().residues(), elem(&[1, 1]));
        assert_eq!(b.add(&p, &b.zero()).unwrap(), p);
        let inv = b.inverse(&p).unwrap();
        assert!(b.add(&p, &inv).unwrap().is_zero());
    }

    #[test]
    fn size_examples() {
        let b = basis(&[3, 4]);
        assert_eq!(b.size_of(&elem(&[2, 1])).unwrap(), rat(11, 12));
        assert_eq!(b.size_of(&elem(&[0, 0])).unwrap(), rat(0, 1));
        // basis vertices have size exactly 1
        for i in 0..2 {
            assert_eq!(b.size_of(b.vertex(i).counts()).unwrap(), rat(1, 1));
        }
    }

    #[test]
    fn full_generator_examples() {
        assert_eq!(basis(&[3, 4]).full_generator().unwrap().residues(), elem(&[2, 1]));
        assert_eq!(basis(&[2, 3]).full_generator().unwrap().residues(), elem(&[1, 1]));
        assert!(basis(&[2, 4]).full_generator().is_err());
        assert!(basis(&[1, 3]).full_generator().is_err());
    }

    #[test]
    fn full_generator_matches_brute_force() {
        for a in [[3i64, 4], [2, 3], [5, 7], [3, 8]] {
            let b = basis(&a);
            let g = b.full_generator().unwrap();
            let want = b.determinant() - 1;
            let found: Vec<GroupElement> = b
                .elements()
                .filter(|e| b.fractional_size_index(e).unwrap() == want)
                .collect();
            assert_eq!(found, vec![g]);
        }
    }

    #[test]
    fn element_of_fractional_size_examples() {
        let b = basis(&[3, 4]);
        assert!(b.element_of_fractional_size(&int(0)).unwrap().is_zero());
        assert_eq!(
            b.element_of_fractional_size(&int(11)).unwrap(),
            b.full_generator().unwrap()
        );
        assert_eq!(
            b.element_of_fractional_size(&int(10)).unwrap().residues(),
            elem(&[1, 2])
        );
        assert!(b.element_of_fractional_size(&int(12)).is_err());
        assert!(b.element_of_fractional_size(&int(-1)).is_err());
    }

    #[test]
    fn orbit_examples() {
        let b = basis(&[3, 4]);
        assert_eq!(b.generator_orbit(&int(1)).unwrap().residues(), elem(&[2, 1]));
        assert!(b.generator_orbit(&int(12)).unwrap().is_zero());
        let two = b.generator_orbit(&int(2)).unwrap();
        assert_eq!(two.residues(), elem(&[1, 2]));
        assert_eq!(b.fractional_size_index(&two).unwrap(), int(10));
    }

    #[test]
    fn orbit_is_iterated_addition_and_covers_group() {
        for a in [[2i64, 3], [3, 4], [4, 5]] {
            let b = basis(&a);
            let g = b.full_generator().unwrap();
            let mut acc = b.zero();
            let mut seen = std::collections::BTreeSet::new();
            let det: i64 = a.iter().product();
            for k in 0..det {
                assert_eq!(b.generator_orbit(&int(k)).unwrap(), acc);
                seen.insert(acc.clone());
                acc = b.add(&acc, &g).unwrap();
            }
            assert!(acc.is_zero());
            assert_eq!(seen.len() as i64, det);
        }
    }

    #[test]
    fn size_bijection_small() {
        for a in [[2i64, 3], [3, 4], [5, 6]] {
            let b = basis(&a);
            let det: i64 = a.iter().product();
            let mut seen = vec![false; det as usize];
            for e in b.elements() {
                let k = b.fractional_size_index(&e).unwrap();
                let k: usize = k.to_string().parse().unwrap();
                assert!(!seen[k]);
                seen[k] = true;
                assert_eq!(b.element_of_fractional_size(&int(k as i64)).unwrap(), e);
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn group_order_is_determinant() {
        for a in [[2i64, 3], [3, 4], [4, 9]] {
            let b = basis(&a);
            let det: i64 = a.iter().product();
            assert_eq!(b.elements().count() as i64, det);
        }
    }
}
