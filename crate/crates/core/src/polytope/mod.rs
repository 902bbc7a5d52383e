//! Knapsack instances, their configurations (lattice points of the knapsack
//! polytope), integer-hull vertex sets and exact barycentric coordinates.

pub mod hull;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{floor_int, Rational};
use crate::error::{Error, Result};
use crate::linalg;

pub use hull::{hull_vertices, hull_vertices_direct, hull_vertices_incremental};

/// A bin packing instance: item sizes in `(0, 1]` and a nonnegative demand
/// (multiplicity) vector of the same length. The demand vector is at the
/// same time a point of the integer cone under study.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    sizes: Vec<Rational>,
    multiplicities: Vec<BigInt>,
}

impl Instance {
    pub fn new(sizes: Vec<Rational>, multiplicities: Vec<BigInt>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::invalid("instance needs at least one item size"));
        }
        if sizes.len() != multiplicities.len() {
            return Err(Error::invalid(format!(
                "{} sizes but {} multiplicities",
                sizes.len(),
                multiplicities.len()
            )));
        }
        if sizes.iter().any(|s| !s.is_positive() || *s > Rational::one()) {
            return Err(Error::invalid("item sizes must lie in (0, 1]"));
        }
        if multiplicities.iter().any(|m| m.is_negative()) {
            return Err(Error::invalid("multiplicities must be nonnegative"));
        }
        Ok(Instance {
            sizes,
            multiplicities,
        })
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[Rational] {
        &self.sizes
    }

    pub fn multiplicities(&self) -> &[BigInt] {
        &self.multiplicities
    }

    /// Total item volume `sum_i s_i b_i`; a lower bound for any packing.
    pub fn total_size(&self) -> Rational {
        weighted_size(&self.multiplicities, &self.sizes)
    }

    /// The denominators `a_i` when every size is a unit fraction `1/a_i`.
    pub fn unit_fraction_denominators(&self) -> Option<Vec<BigInt>> {
        self.sizes
            .iter()
            .map(|s| s.numer().is_one().then(|| s.denom().clone()))
            .collect()
    }

    pub fn with_multiplicities(&self, multiplicities: Vec<BigInt>) -> Result<Self> {
        Instance::new(self.sizes.clone(), multiplicities)
    }

    pub fn configurations(&self, cap: u64) -> Result<Vec<Configuration>> {
        enumerate_configs(&self.sizes, cap)
    }
}

/// A feasible single-bin content: an integer vector `p >= 0` with
/// `sum_i s_i p_i <= 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration(pub Vec<BigInt>);

impl Configuration {
    pub fn zero(dim: usize) -> Self {
        Configuration(vec![BigInt::zero(); dim])
    }

    /// The axis configuration `count * e_i`.
    pub fn axis(dim: usize, i: usize, count: BigInt) -> Self {
        let mut v = vec![BigInt::zero(); dim];
        v[i] = count;
        Configuration(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn counts(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn size(&self, sizes: &[Rational]) -> Rational {
        weighted_size(&self.0, sizes)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<BigInt>> for Configuration {
    fn from(v: Vec<BigInt>) -> Self {
        Configuration(v)
    }
}

/// `sum_i sizes_i * counts_i`, exact.
pub fn weighted_size(counts: &[BigInt], sizes: &[Rational]) -> Rational {
    assert_eq!(counts.len(), sizes.len(), "dimension mismatch");
    counts
        .iter()
        .zip(sizes)
        .map(|(c, s)| Rational::from_integer(c.clone()) * s)
        .sum()
}

/// Membership test for the knapsack polytope: `p >= 0` and `s . p <= 1`.
pub fn is_config(sizes: &[Rational], counts: &[BigInt]) -> Result<bool> {
    if counts.len() != sizes.len() {
        return Err(Error::invalid("dimension mismatch"));
    }
    if counts.iter().any(|c| c.is_negative()) {
        return Err(Error::invalid("negative component"));
    }
    Ok(weighted_size(counts, sizes) <= Rational::one())
}

/// The vertex set of the integer hull, lexicographically sorted. Always
/// contains the origin when sizes are positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    dim: usize,
    vertices: Vec<Configuration>,
}

impl VertexSet {
    pub fn new(dim: usize, mut vertices: Vec<Configuration>) -> Self {
        vertices.sort();
        vertices.dedup();
        VertexSet { dim, vertices }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Configuration] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, c: &Configuration) -> bool {
        self.vertices.binary_search(c).is_ok()
    }
}

/// Exact barycentric coordinates of a lattice point inside a simplex
/// spanned by `d+1` configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexCoords {
    coords: Vec<Rational>,
    basis: Vec<Configuration>,
}

impl SimplexCoords {
    pub fn new(coords: Vec<Rational>, basis: Vec<Configuration>) -> Self {
        debug_assert_eq!(coords.len(), basis.len());
        SimplexCoords { coords, basis }
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn basis(&self) -> &[Configuration] {
        &self.basis
    }

    /// Recombine `sum_i coords_i * basis_i`; exact, for round-trip checks.
    pub fn point(&self) -> Vec<Rational> {
        let dim = self.basis[0].dim();
        let mut p = vec![Rational::zero(); dim];
        for (x, b) in self.coords.iter().zip(&self.basis) {
            for (acc, c) in p.iter_mut().zip(b.counts()) {
                *acc += x * Rational::from_integer(c.clone());
            }
        }
        p
    }
}

/// Solve for the barycentric coordinates of `gamma` in the simplex spanned
/// by `basis` (which must consist of `d+1` affinely independent points).
pub fn barycentric(gamma: &Configuration, basis: &[Configuration]) -> Result<SimplexCoords> {
    let d = gamma.dim();
    if basis.len() != d + 1 {
        return Err(Error::invalid(format!(
            "simplex basis in dimension {d} needs {} points, got {}",
            d + 1,
            basis.len()
        )));
    }
    if basis.iter().any(|b| b.dim() != d) {
        return Err(Error::invalid("basis dimension mismatch"));
    }
    // rows: the affine constraint sum x_i = 1, then one row per coordinate
    let mut a = vec![vec![Rational::one(); d + 1]];
    for row in 0..d {
        a.push(
            basis
                .iter()
                .map(|b| Rational::from_integer(b.counts()[row].clone()))
                .collect(),
        );
    }
    let mut rhs = vec![Rational::one()];
    rhs.extend(
        gamma
            .counts()
            .iter()
            .map(|c| Rational::from_integer(c.clone())),
    );
    let x = linalg::solve_square(&a, &rhs).ok_or(Error::SingularBasis)?;
    if x.iter().any(|c| c.is_negative()) {
        return Err(Error::NotInSimplex);
    }
    Ok(SimplexCoords::new(x, basis.to_vec()))
}

/// Find a vertex simplex of `vertices` containing `gamma`, trying the
/// `d+1`-subsets in lexicographic order. Deterministic.
pub fn containing_simplex(gamma: &Configuration, vertices: &VertexSet) -> Result<SimplexCoords> {
    let d = gamma.dim();
    let n = vertices.len();
    if n < d + 1 {
        return Err(Error::invalid("vertex set too small for a simplex"));
    }
    let mut pick: Vec<usize> = (0..=d).collect();
    loop {
        let basis: Vec<Configuration> = pick
            .iter()
            .map(|&i| vertices.vertices()[i].clone())
            .collect();
        match barycentric(gamma, &basis) {
            Ok(coords) => return Ok(coords),
            Err(Error::SingularBasis) | Err(Error::NotInSimplex) => {}
            Err(e) => return Err(e),
        }
        // next (d+1)-combination of 0..n
        let mut i = d;
        loop {
            if pick[i] + 1 <= n - 1 - (d - i) {
                pick[i] += 1;
                for j in i + 1..=d {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return Err(Error::NotInSimplex);
            }
            i -= 1;
        }
    }
}

/// Enumerate every configuration of the given sizes in lexicographic
/// order, starting with the zero configuration. Fails loudly when the
/// count would exceed `cap`.
pub fn enumerate_configs(sizes: &[Rational], cap: u64) -> Result<Vec<Configuration>> {
    validate_sizes(sizes)?;
    let box_bound = box_estimate(sizes);
    #[cfg(feature = "parallel")]
    {
        if box_bound > BigInt::from(4096u32) {
            return enumerate_configs_par(sizes, cap, &box_bound);
        }
    }
    enumerate_configs_seq_capped(sizes, cap, &box_bound)
}

/// Single-threaded enumeration; same contract and output as
/// [`enumerate_configs`].
pub fn enumerate_configs_seq(sizes: &[Rational], cap: u64) -> Result<Vec<Configuration>> {
    validate_sizes(sizes)?;
    let box_bound = box_estimate(sizes);
    enumerate_configs_seq_capped(sizes, cap, &box_bound)
}

fn validate_sizes(sizes: &[Rational]) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::invalid("need at least one size"));
    }
    if sizes.iter().any(|s| !s.is_positive() || *s > Rational::one()) {
        return Err(Error::invalid("item sizes must lie in (0, 1]"));
    }
    Ok(())
}

/// Product of the per-coordinate count ranges; an upper bound on the
/// number of configurations.
fn box_estimate(sizes: &[Rational]) -> BigInt {
    sizes
        .iter()
        .map(|s| floor_int(&(Rational::one() / s)) + 1)
        .product()
}

fn cap_error(cap: u64, box_bound: &BigInt) -> Error {
    Error::limit(format!(
        "configuration count exceeds cap {cap} (box estimate {box_bound})"
    ))
}

fn enumerate_configs_seq_capped(
    sizes: &[Rational],
    cap: u64,
    box_bound: &BigInt,
) -> Result<Vec<Configuration>> {
    let mut out = Vec::new();
    let mut prefix = vec![BigInt::zero(); sizes.len()];
    enumerate_rec(sizes, 0, Rational::one(), &mut prefix, cap, &mut out)
        .map_err(|_| cap_error(cap, box_bound))?;
    Ok(out)
}

// Err(()) signals the cap was hit.
fn enumerate_rec(
    sizes: &[Rational],
    i: usize,
    remaining: Rational,
    prefix: &mut Vec<BigInt>,
    cap: u64,
    out: &mut Vec<Configuration>,
) -> std::result::Result<(), ()> {
    let max = floor_int(&(&remaining / &sizes[i]));
    let mut c = BigInt::zero();
    while c <= max {
        prefix[i] = c.clone();
        let rest = &remaining - &sizes[i] * Rational::from_integer(c.clone());
        if i + 1 == sizes.len() {
            if out.len() as u64 >= cap {
                return Err(());
            }
            out.push(Configuration(prefix.clone()));
        } else {
            enumerate_rec(sizes, i + 1, rest, prefix, cap, out)?;
        }
        c += 1;
    }
    prefix[i] = BigInt::zero();
    Ok(())
}

#[cfg(feature = "parallel")]
fn enumerate_configs_par(
    sizes: &[Rational],
    cap: u64,
    box_bound: &BigInt,
) -> Result<Vec<Configuration>> {
    use num_traits::ToPrimitive;
    use rayon::prelude::*;
    use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

    let max0 = floor_int(&(Rational::one() / &sizes[0]));
    let Some(max0) = max0.to_u64() else {
        return Err(cap_error(cap, box_bound));
    };
    if sizes.len() == 1 {
        return enumerate_configs_seq_capped(sizes, cap, box_bound);
    }
    let counter = AtomicU64::new(0);
    let over = AtomicBool::new(false);
    let slices: Vec<Vec<Configuration>> = (0..=max0)
        .into_par_iter()
        .map(|c0| {
            if over.load(Ordering::Relaxed) {
                return Vec::new();
            }
            let c0 = BigInt::from(c0);
            let remaining =
                Rational::one() - &sizes[0] * Rational::from_integer(c0.clone());
            let mut prefix = vec![BigInt::zero(); sizes.len()];
            prefix[0] = c0;
            let mut out = Vec::new();
            let res = enumerate_rec(
                &sizes[..],
                1,
                remaining,
                &mut prefix,
                u64::MAX,
                &mut out,
            );
            debug_assert!(res.is_ok());
            if counter.fetch_add(out.len() as u64, Ordering::Relaxed) + out.len() as u64 > cap {
                over.store(true, Ordering::Relaxed);
            }
            out
        })
        .collect();
    if over.load(Ordering::Relaxed) {
        return Err(cap_error(cap, box_bound));
    }
    // slices are indexed by the first coordinate, so concatenation in order
    // preserves the lexicographic output contract
    Ok(slices.into_iter().flatten().collect())
}
