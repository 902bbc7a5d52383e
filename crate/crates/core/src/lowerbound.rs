//! Construction and verification of bin packing instances whose unique
//! optimal packing pins a large vertex distance.
//!
//! The denominators are chosen so that the full generator g of the
//! parallelepiped group sits inside narrow windows below the reciprocals
//! of Sylvester numbers (the long-run property). Then `[K g]` stays
//! outside the knapsack polytope for `K = 2 .. S_d - 2`, so the lifted
//! demand `(K, K g)` can only be packed as `K` copies of `g`: a certified
//! vertex distance of `K`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{crt_solve, mod_inverse, sylvester, Rational, Residue};
use crate::error::{Error, Result};
use crate::group::{DiagonalBasis, GroupElement};
use crate::polytope::Instance;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A denominator tuple with Sylvester-window structure: the generator of
/// its group is a configuration whose leading coordinates sit just below
/// `1/S_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SylvesterInstance {
    pub dim: usize,
    pub epsilon: Rational,
    pub denominators: Vec<BigInt>,
    /// `m_i`: the window numerators; `m_i = g_i` for `i < d`.
    pub windows: Vec<BigInt>,
    pub generator: GroupElement,
    pub determinant: BigInt,
}

impl SylvesterInstance {
    pub fn basis(&self) -> DiagonalBasis {
        DiagonalBasis::new(self.denominators.clone()).expect("valid denominators")
    }

    pub fn sizes(&self) -> Vec<Rational> {
        self.basis().sizes()
    }

    /// The demand vector `K * g`.
    pub fn demand(&self, k: &BigInt) -> Vec<BigInt> {
        self.generator
            .residues()
            .iter()
            .map(|g| g * k)
            .collect()
    }

    pub fn instance(&self, k: &BigInt) -> Result<Instance> {
        Instance::new(self.sizes(), self.demand(k))
    }

    /// Barycentric coordinates of the generator in the vertex simplex,
    /// slack coordinate first: `(1 - sum g_i/a_i, g_1/a_1, ..., g_d/a_d)`.
    pub fn generator_coords(&self) -> Vec<Rational> {
        let mut coords = vec![Rational::zero()];
        let mut rest = Rational::one();
        for (g, a) in self
            .generator
            .residues()
            .iter()
            .zip(&self.denominators)
        {
            let x = Rational::new(g.clone(), a.clone());
            rest -= &x;
            coords.push(x);
        }
        coords[0] = rest;
        coords
    }
}

/// The largest simple epsilon below the `1/(S_d - 1)^2` bound:
/// `1/((S_d-1)^2 + 1)`.
pub fn default_epsilon(d: u32) -> Result<Rational> {
    let s = sylvester(d)?;
    let denom = (&s - 1) * (&s - 1) + 1;
    Ok(Rational::new(BigInt::one(), denom))
}

fn epsilon_bound(d: u32) -> Result<Rational> {
    let s = sylvester(d)?;
    Ok(Rational::new(BigInt::one(), (&s - 1) * (&s - 1)))
}

/// Options for [`construct_sylvester_instance`].
#[derive(Debug, Clone)]
pub struct ConstructOptions {
    /// How many candidates to scan per denominator before giving up.
    pub search_bound: u64,
    /// Skip the window requirement on the last index `d`.
    pub relax_final_window: bool,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        ConstructOptions {
            search_bound: 1_000_000,
            relax_final_window: false,
        }
    }
}

/// Smallest integer strictly greater than `x`.
fn least_above(x: &Rational) -> BigInt {
    x.floor().to_integer() + 1
}

fn in_window(m: &BigInt, a: &BigInt, s: &BigInt, epsilon: &Rational) -> bool {
    // (1 - eps)/s <= m/a < 1/s
    let ratio = Rational::new(m.clone(), a.clone());
    let upper = Rational::new(BigInt::one(), s.clone());
    let lower = (Rational::one() - epsilon) / Rational::from_integer(s.clone());
    lower <= ratio && ratio < upper
}

/// Deterministic smallest-admissible construction: each `a_{i+1}` is the
/// least integer above `S_{i+1}/eps` in the congruence class fixed by the
/// two defining conditions, not a multiple of `S_{i+1}`, whose window
/// numerator `floor(a_{i+1}/S_{i+1})` satisfies the window inequalities
/// (and is coprime to `a_{i+1}` for indices below `d`).
pub fn construct_sylvester_instance(
    d: u32,
    epsilon: &Rational,
    opts: &ConstructOptions,
) -> Result<SylvesterInstance> {
    if d < 3 {
        return Err(Error::invalid("construction needs d >= 3"));
    }
    if !epsilon.is_positive() || *epsilon >= epsilon_bound(d)? {
        return Err(Error::invalid(format!(
            "epsilon must lie in (0, 1/(S_d - 1)^2), got {epsilon}"
        )));
    }

    let mut a: Vec<BigInt> = Vec::with_capacity(d as usize);
    let mut m: Vec<BigInt> = Vec::with_capacity(d as usize);

    for idx in 1..=d {
        let s = sylvester(idx)?;
        let start = least_above(&(Rational::from_integer(s.clone()) / epsilon));
        let (class, modulus) = if idx == 1 {
            (BigInt::zero(), BigInt::one())
        } else {
            // a_{idx} ≡ (prod_{j<i} a_j)^{-1} (−m_i)^{-1} mod a_i for the
            // previous index i, and ≡ 1 mod every a_j before that
            let i = idx as usize - 2;
            let prefix: BigInt = a[..i].iter().product();
            let inv_prefix = mod_inverse(&prefix, &a[i])?;
            let inv_neg_m = mod_inverse(&(-&m[i]), &a[i])?;
            let target = (inv_prefix.value() * inv_neg_m.value()).mod_floor(&a[i]);
            let mut congruences = vec![Residue::new(target, a[i].clone())?];
            for aj in &a[..i] {
                congruences.push(Residue::new(BigInt::one(), aj.clone())?);
            }
            let sol = crt_solve(&congruences)?;
            (sol.value().clone(), sol.modulus().clone())
        };

        // first candidate >= start within the class
        let mut candidate = if modulus.is_one() {
            start.clone()
        } else {
            let k = (&start - &class).div_ceil(&modulus).max(BigInt::zero());
            &class + k * &modulus
        };
        let is_last = idx == d;
        let mut found = None;
        for _ in 0..opts.search_bound {
            if !(&candidate % &s).is_zero() {
                let mi = candidate.div_floor(&s);
                let window_ok = in_window(&mi, &candidate, &s, epsilon);
                let gcd_ok = is_last || mi.gcd(&candidate).is_one();
                let window_required = !is_last || !opts.relax_final_window;
                if (!window_required || window_ok) && gcd_ok {
                    found = Some((candidate.clone(), mi));
                    break;
                }
            }
            candidate += modulus.clone().max(BigInt::one());
        }
        let Some((ai, mi)) = found else {
            return Err(Error::limit(format!(
                "no admissible denominator for index {idx} within {} candidates",
                opts.search_bound
            )));
        };
        a.push(ai);
        m.push(mi);
    }

    finish_instance(d, epsilon, a, Some(m))
}

/// Build the instance record and verify every claim: pairwise
/// coprimality, the congruence chain `g_i = m_i` for `i < d`, the window
/// inequalities, and that the generator is a configuration of size
/// exactly `(det - 1)/det`.
fn finish_instance(
    d: u32,
    epsilon: &Rational,
    a: Vec<BigInt>,
    m: Option<Vec<BigInt>>,
) -> Result<SylvesterInstance> {
    let basis = DiagonalBasis::new(a.clone())?;
    if !basis.is_coprime() {
        return Err(Error::invalid(
            "constructed denominators are not pairwise coprime",
        ));
    }
    let g = basis.full_generator()?;
    let det = basis.determinant().clone();

    let windows = match m {
        Some(m) => {
            for i in 0..(d as usize - 1) {
                if g.residues()[i] != m[i] {
                    return Err(Error::invalid(format!(
                        "generator component {} is {} but the window numerator is {}",
                        i + 1,
                        g.residues()[i],
                        m[i]
                    )));
                }
            }
            m
        }
        None => {
            let mut m: Vec<BigInt> = g.residues()[..d as usize - 1].to_vec();
            let s = sylvester(d)?;
            m.push(a[d as usize - 1].div_floor(&s));
            m
        }
    };

    let size = basis.size_of(g.residues())?;
    let expected = Rational::new(&det - 1, det.clone());
    if size != expected {
        return Err(Error::invalid(format!(
            "generator size is {size}, expected {expected}"
        )));
    }
    if !check_long_run(&g, &a, epsilon)? {
        return Err(Error::invalid(
            "generator misses a long-run window",
        ));
    }
    Ok(SylvesterInstance {
        dim: d as usize,
        epsilon: epsilon.clone(),
        denominators: a,
        windows,
        generator: g,
        determinant: det,
    })
}

/// Window inequalities `(1-eps)/S_i <= g_i/a_i < 1/S_i` for
/// `i = 1 .. d-1`, checked exactly.
pub fn check_long_run(g: &GroupElement, a: &[BigInt], epsilon: &Rational) -> Result<bool> {
    if g.dim() != a.len() {
        return Err(Error::invalid("dimension mismatch"));
    }
    for i in 0..a.len().saturating_sub(1) {
        let s = sylvester(i as u32 + 1)?;
        if !in_window(&g.residues()[i], &a[i], &s, epsilon) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Both readings of the long-run data: the definitional windows on
/// coordinates `1 .. d-1`, plus the derived bounds on the last coordinate
/// and the slack coordinate (`< 1/(S_d - 2)` each) used by the
/// uniqueness argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LongRunReport {
    pub windows: Vec<bool>,
    pub last_coordinate_bounded: bool,
    pub slack_bounded: bool,
    pub holds: bool,
}

pub fn long_run_report(inst: &SylvesterInstance) -> Result<LongRunReport> {
    let d = inst.dim;
    let mut windows = Vec::new();
    for i in 0..d - 1 {
        let s = sylvester(i as u32 + 1)?;
        windows.push(in_window(
            &inst.generator.residues()[i],
            &inst.denominators[i],
            &s,
            &inst.epsilon,
        ));
    }
    let holds = windows.iter().all(|&w| w);
    let coords = inst.generator_coords();
    let bound = Rational::new(BigInt::one(), sylvester(d as u32)? - 2);
    let last_coordinate_bounded = coords[d] < bound;
    let slack_bounded = coords[0] < bound;
    Ok(LongRunReport {
        windows,
        last_coordinate_bounded,
        slack_bounded,
        holds,
    })
}

/// The orbit elements `[K g]` for `K = 2 ..= k_max` with their exact
/// sizes. `unique` is true when none of them is a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniquenessWitness {
    pub unique: bool,
    pub entries: Vec<OrbitEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitEntry {
    pub multiplicity: BigInt,
    pub element: GroupElement,
    pub size: Rational,
    pub is_configuration: bool,
}

pub fn check_uniqueness(inst: &SylvesterInstance, k_max: &BigInt) -> Result<UniquenessWitness> {
    let basis = inst.basis();
    let mut entries = Vec::new();
    let mut unique = true;
    let mut element = inst.generator.clone();
    let mut k = BigInt::from(2);
    while k <= *k_max {
        element = basis.add(&element, &inst.generator)?;
        let size = basis.size_of(element.residues())?;
        let is_configuration = size <= Rational::one();
        unique &= !is_configuration;
        entries.push(OrbitEntry {
            multiplicity: k.clone(),
            element: element.clone(),
            size,
            is_configuration,
        });
        k += 1;
    }
    Ok(UniquenessWitness { unique, entries })
}

/// A machine-checkable certificate that the lifted demand `(K, K g)` has
/// vertex distance exactly `K`: the generator is a non-vertex
/// configuration, no smaller orbit multiple is a configuration, and the
/// `K` bins leave total free space `K/det`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistCertificate {
    pub dim: usize,
    pub epsilon: Rational,
    pub denominators: Vec<BigInt>,
    pub generator: Vec<BigInt>,
    pub determinant: BigInt,
    pub multiplicity: BigInt,
    /// `(K, K g)`: bin-count row prepended to the demand.
    pub lifted_demand: Vec<BigInt>,
    pub distance: BigInt,
    pub free_space: Rational,
    pub generator_size: Rational,
    pub long_run: LongRunReport,
    pub uniqueness: UniquenessWitness,
}

pub fn dist_certificate(inst: &SylvesterInstance, k: &BigInt) -> Result<DistCertificate> {
    if inst.dim < 3 {
        return Err(Error::NoCertificate(
            "certificates require d >= 3".into(),
        ));
    }
    if !k.is_positive() {
        return Err(Error::NoCertificate("multiplicity must be >= 1".into()));
    }
    let long_run = long_run_report(inst)?;
    if !long_run.holds {
        return Err(Error::NoCertificate(
            "generator misses a long-run window".into(),
        ));
    }
    let basis = inst.basis();
    let generator_size = basis.size_of(inst.generator.residues())?;
    if generator_size > Rational::one() {
        return Err(Error::NoCertificate(
            "generator is not a configuration".into(),
        ));
    }
    let uniqueness = check_uniqueness(inst, k)?;
    if !uniqueness.unique {
        return Err(Error::NoCertificate(format!(
            "some orbit multiple up to {k} is a configuration"
        )));
    }
    let mut lifted = vec![k.clone()];
    lifted.extend(inst.demand(k));
    Ok(DistCertificate {
        dim: inst.dim,
        epsilon: inst.epsilon.clone(),
        denominators: inst.denominators.clone(),
        generator: inst.generator.residues().to_vec(),
        determinant: inst.determinant.clone(),
        multiplicity: k.clone(),
        lifted_demand: lifted,
        distance: k.clone(),
        free_space: Rational::new(k.clone(), inst.determinant.clone()),
        generator_size,
        long_run,
        uniqueness,
    })
}

/// Recheck a certificate from its raw numbers alone.
pub fn verify_certificate(cert: &DistCertificate) -> Result<()> {
    let basis = DiagonalBasis::new(cert.denominators.clone())?;
    let g = basis.full_generator()?;
    if g.residues() != cert.generator.as_slice() {
        return Err(Error::NoCertificate(
            "generator does not match the congruence formula".into(),
        ));
    }
    let inst = SylvesterInstance {
        dim: cert.denominators.len(),
        epsilon: cert.epsilon.clone(),
        denominators: cert.denominators.clone(),
        windows: cert.generator[..cert.denominators.len() - 1].to_vec(),
        generator: g,
        determinant: basis.determinant().clone(),
    };
    if inst.determinant != cert.determinant {
        return Err(Error::NoCertificate("determinant mismatch".into()));
    }
    let again = dist_certificate(&inst, &cert.multiplicity)?;
    if again != *cert {
        return Err(Error::NoCertificate(
            "recomputed certificate differs".into(),
        ));
    }
    Ok(())
}

/// Search for the pairwise-coprime tuple of minimal determinant (ties:
/// lexicographically smallest) within `det_bound` whose full generator is
/// a configuration satisfying the long-run windows. Returns `None` when
/// no tuple qualifies.
pub fn search_min_instance(
    d: u32,
    epsilon: &Rational,
    det_bound: u64,
) -> Result<Option<SylvesterInstance>> {
    if d < 2 {
        return Err(Error::invalid("search needs d >= 2"));
    }
    if det_bound > (1 << 31) {
        return Err(Error::invalid("determinant bound above 2^31 is unsupported"));
    }
    if !epsilon.is_positive() || *epsilon >= epsilon_bound(d)? {
        return Err(Error::invalid(format!(
            "epsilon must lie in (0, 1/(S_d - 1)^2), got {epsilon}"
        )));
    }
    let (Some(eps_num), Some(eps_den)) = (epsilon.numer().to_u64(), epsilon.denom().to_u64())
    else {
        return Err(Error::invalid(
            "search mode needs an epsilon with word-sized numerator and denominator",
        ));
    };
    let sylvesters: Vec<u64> = (1..=d)
        .map(|i| sylvester(i).map(|s| s.to_u64().expect("small sylvester number")))
        .collect::<Result<Vec<_>>>()?;

    let search = SearchContext {
        d: d as usize,
        eps_num,
        eps_den,
        det_bound,
        sylvesters,
    };
    let first_candidates: Vec<u64> = (2..=det_bound)
        .filter(|&a1| search.window_admissible(a1, 0))
        .collect();

    #[cfg(feature = "parallel")]
    let best = first_candidates
        .par_iter()
        .filter_map(|&a1| search.best_with_first(a1))
        .reduce_with(|x, y| if cmp_tuple(&x, &y) { x } else { y });
    #[cfg(not(feature = "parallel"))]
    let best = first_candidates
        .iter()
        .filter_map(|&a1| search.best_with_first(a1))
        .fold(None::<(u64, Vec<u64>)>, |acc, x| match acc {
            None => Some(x),
            Some(y) => Some(if cmp_tuple(&x, &y) { x } else { y }),
        });

    match best {
        None => Ok(None),
        Some((_, a)) => {
            let a: Vec<BigInt> = a.into_iter().map(BigInt::from).collect();
            Ok(Some(finish_instance(d, epsilon, a, None)?))
        }
    }
}

/// True when `x` is a strictly better (smaller determinant, then lex)
/// tuple than `y`.
fn cmp_tuple(x: &(u64, Vec<u64>), y: &(u64, Vec<u64>)) -> bool {
    x.0 < y.0 || (x.0 == y.0 && x.1 < y.1)
}

struct SearchContext {
    d: usize,
    eps_num: u64,
    eps_den: u64,
    det_bound: u64,
    sylvesters: Vec<u64>,
}

impl SearchContext {
    /// Best qualifying tuple starting with `a1`, scanning the remaining
    /// coordinates in lexicographic order.
    fn best_with_first(&self, a1: u64) -> Option<(u64, Vec<u64>)> {
        let mut prefix = vec![a1];
        let mut best: Option<(u64, Vec<u64>)> = None;
        self.recurse(&mut prefix, a1, &mut best);
        best
    }

    fn recurse(&self, prefix: &mut Vec<u64>, product: u64, best: &mut Option<(u64, Vec<u64>)>) {
        if prefix.len() == self.d {
            if let Some(g) = self.generator(prefix) {
                if self.qualifies(prefix, &g) {
                    let cand = (product, prefix.clone());
                    if best.as_ref().map_or(true, |b| cmp_tuple(&cand, b)) {
                        *best = Some(cand);
                    }
                }
            }
            return;
        }
        let coord = prefix.len();
        let mut next = 2u64;
        loop {
            let Some(p) = product.checked_mul(next) else {
                break;
            };
            if p > self.det_bound {
                break;
            }
            // candidates appear in lexicographic order, so an equal
            // determinant cannot displace the incumbent
            if best.as_ref().map_or(false, |(bd, _)| p >= *bd) {
                break;
            }
            if self.window_admissible(next, coord)
                && prefix.iter().all(|&a| gcd_u64(a, next) == 1)
            {
                prefix.push(next);
                self.recurse(prefix, p, best);
                prefix.pop();
            }
            next += 1;
        }
    }

    /// Can coordinate `coord` (0-based) with denominator `a` host any
    /// integer in its long-run window? Coordinates from `d-1` on are
    /// unconstrained.
    fn window_admissible(&self, a: u64, coord: usize) -> bool {
        if coord >= self.d - 1 {
            return true;
        }
        let s = self.sylvesters[coord];
        // smallest m with (1-eps)/s <= m/a, then require m/a < 1/s
        let num = (self.eps_den - self.eps_num) as u128 * a as u128;
        let den = self.eps_den as u128 * s as u128;
        let m0 = num.div_ceil(den);
        m0 * (s as u128) < a as u128
    }

    /// Componentwise `g_i = -R_i^{-1} mod a_i` in word arithmetic.
    fn generator(&self, a: &[u64]) -> Option<Vec<u64>> {
        let det: u64 = a.iter().product();
        a.iter()
            .map(|&ai| {
                if ai < 2 {
                    return None;
                }
                let r = (det / ai) % ai;
                let inv = inv_mod_u64(r, ai)?;
                Some((ai - inv) % ai)
            })
            .collect()
    }

    fn qualifies(&self, a: &[u64], g: &[u64]) -> bool {
        // long-run windows on coordinates 1 .. d-1
        for i in 0..self.d - 1 {
            let s = self.sylvesters[i];
            // g_i / a_i < 1/s  and  (1-eps)/s <= g_i / a_i
            if (g[i] as u128) * (s as u128) >= a[i] as u128 {
                return false;
            }
            let lhs = (self.eps_den - self.eps_num) as u128 * a[i] as u128;
            let rhs = self.eps_den as u128 * s as u128 * g[i] as u128;
            if lhs > rhs {
                return false;
            }
        }
        // generator is a configuration: sum g_i R_i == det - 1 exactly
        let det: u64 = a.iter().product();
        let total: u128 = a
            .iter()
            .zip(g)
            .map(|(&ai, &gi)| (det / ai) as u128 * gi as u128)
            .sum();
        total == det as u128 - 1
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

fn inv_mod_u64(x: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (x % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}
