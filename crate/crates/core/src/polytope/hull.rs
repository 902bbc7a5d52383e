//! Integer-hull vertex computation.
//!
//! Three routes, all exact:
//!   * a closed-form fast path for unit-fraction sizes, where the hull is
//!     the simplex spanned by the origin and the axis points `a_i e_i`;
//!   * an incremental scheme that grows a vertex set facet by facet,
//!     maximizing each facet normal over the enumerated lattice points
//!     with an exhaustive oracle and re-hulling the accumulated points;
//!   * a direct hull of all enumerated lattice points, used as the
//!     cross-check mode.
//!
//! Facet enumeration is gift-wrapping in dimensions <= 3 and a double
//! description step in higher dimension. Ties are broken
//! lexicographically so outputs are deterministic.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{floor_int, Rational};
use crate::error::{Error, Result};
use crate::linalg;

use super::{enumerate_configs, Configuration, Instance, VertexSet};

/// An outward facet inequality `normal . x <= offset` in primitive
/// integer form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Facet {
    pub normal: Vec<BigInt>,
    pub offset: BigInt,
}

impl Facet {
    fn canonical(mut normal: Vec<BigInt>, mut offset: BigInt) -> Facet {
        let mut g = normal.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        g = g.gcd(&offset);
        if !g.is_zero() && !g.is_one() {
            for x in normal.iter_mut() {
                *x /= &g;
            }
            offset /= &g;
        }
        Facet { normal, offset }
    }

    pub fn eval(&self, p: &Configuration) -> BigInt {
        dot(&self.normal, p.counts())
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn cross3(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    vec![
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

/// The vertex set of the integer hull of the instance's knapsack polytope.
///
/// Unit-fraction sizes take the closed-form path; everything else runs the
/// incremental facet algorithm over the enumerated lattice points.
pub fn hull_vertices(instance: &Instance, cap: u64) -> Result<VertexSet> {
    let d = instance.dim();
    if let Some(a) = instance.unit_fraction_denominators() {
        let mut v = vec![Configuration::zero(d)];
        for (i, ai) in a.iter().enumerate() {
            v.push(Configuration::axis(d, i, ai.clone()));
        }
        return Ok(VertexSet::new(d, v));
    }
    hull_vertices_incremental(instance, cap)
}

/// Direct mode: hull of every enumerated lattice point. Serves as the
/// cross-check for the incremental route.
pub fn hull_vertices_direct(instance: &Instance, cap: u64) -> Result<VertexSet> {
    let d = instance.dim();
    let points = enumerate_configs(instance.sizes(), cap)?;
    let vertices = vertex_set_of_points(&points, d)?;
    Ok(VertexSet::new(d, vertices))
}

/// Incremental mode: start from the origin and the axis maxima, compute
/// the facets of the current hull, and push each facet outward with an
/// exhaustive maximization oracle over the lattice points until no facet
/// can be improved. New points are absorbed by re-hulling the accumulated
/// set each round.
pub fn hull_vertices_incremental(instance: &Instance, cap: u64) -> Result<VertexSet> {
    let d = instance.dim();
    let sizes = instance.sizes();
    if d == 1 {
        let m = floor_int(&(Rational::one() / &sizes[0]));
        return Ok(VertexSet::new(
            1,
            vec![Configuration::zero(1), Configuration(vec![m])],
        ));
    }
    let points = enumerate_configs(sizes, cap)?;
    let mut current: Vec<Configuration> = vec![Configuration::zero(d)];
    for i in 0..d {
        let m = floor_int(&(Rational::one() / &sizes[i]));
        current.push(Configuration::axis(d, i, m));
    }
    current.sort();
    current.dedup();
    loop {
        let facets = facets_of_points(&current, d)?;
        let mut added: Vec<Configuration> = Vec::new();
        for f in &facets {
            // exhaustive optimization oracle in place of an ILP solver:
            // maximize the facet normal over all lattice points
            let mut best: Option<(&Configuration, BigInt)> = None;
            for p in &points {
                let v = f.eval(p);
                if best.as_ref().map_or(true, |(_, bv)| v > *bv) {
                    best = Some((p, v));
                }
            }
            let (p, v) = best.expect("lattice point set is nonempty");
            if v > f.offset {
                added.push(p.clone());
            }
        }
        if added.is_empty() {
            break;
        }
        current.extend(added);
        current.sort();
        current.dedup();
        current = vertex_set_of_points(&current, d)?;
    }
    Ok(VertexSet::new(d, current))
}

/// Vertices of the convex hull of an explicit point set.
pub(crate) fn vertex_set_of_points(
    points: &[Configuration],
    d: usize,
) -> Result<Vec<Configuration>> {
    match d {
        0 => Err(Error::invalid("dimension must be positive")),
        1 => {
            let mut pts: Vec<Configuration> = points.to_vec();
            pts.sort();
            pts.dedup();
            let mut out = Vec::new();
            if let Some(first) = pts.first() {
                out.push(first.clone());
            }
            if let Some(last) = pts.last() {
                if Some(last) != pts.first() {
                    out.push(last.clone());
                }
            }
            Ok(out)
        }
        2 => Ok(hull_2d(points)),
        3 => {
            let facets = facets_3d(points)?;
            let mut set = BTreeSet::new();
            for f in facets {
                set.extend(f.polygon);
            }
            Ok(set.into_iter().collect())
        }
        _ => {
            let facets = facets_dd(points, d)?;
            let mut out = Vec::new();
            for p in dedup_points(points) {
                let tight: Vec<Vec<Rational>> = facets
                    .iter()
                    .filter(|f| f.eval(&p) == f.offset)
                    .map(|f| {
                        f.normal
                            .iter()
                            .map(|x| Rational::from_integer(x.clone()))
                            .collect()
                    })
                    .collect();
                if linalg::rank(&tight) == d {
                    out.push(p);
                }
            }
            Ok(out)
        }
    }
}

/// Outward facets of the convex hull of a point set.
pub(crate) fn facets_of_points(points: &[Configuration], d: usize) -> Result<Vec<Facet>> {
    match d {
        0 => Err(Error::invalid("dimension must be positive")),
        1 => {
            let lo = points.iter().map(|p| p.counts()[0].clone()).min();
            let hi = points.iter().map(|p| p.counts()[0].clone()).max();
            let (lo, hi) = (lo.unwrap(), hi.unwrap());
            Ok(vec![
                Facet::canonical(vec![BigInt::from(-1)], -lo),
                Facet::canonical(vec![BigInt::one()], hi),
            ])
        }
        2 => {
            let cycle = hull_2d(points);
            if cycle.len() < 3 {
                return Err(Error::invalid("degenerate 2d point set"));
            }
            let mut facets = Vec::new();
            for i in 0..cycle.len() {
                let u = &cycle[i];
                let v = &cycle[(i + 1) % cycle.len()];
                // ccw cycle: outward normal is the edge direction rotated
                // clockwise
                let n = vec![
                    &v.counts()[1] - &u.counts()[1],
                    &u.counts()[0] - &v.counts()[0],
                ];
                let c = dot(&n, u.counts());
                facets.push(Facet::canonical(n, c));
            }
            facets.sort();
            Ok(facets)
        }
        3 => {
            let mut facets: Vec<Facet> =
                facets_3d(points)?.into_iter().map(|f| f.facet).collect();
            facets.sort();
            Ok(facets)
        }
        _ => facets_dd(points, d),
    }
}

fn dedup_points(points: &[Configuration]) -> Vec<Configuration> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    pts
}

/// Strict 2D hull (no collinear points) in counterclockwise order.
fn hull_2d(points: &[Configuration]) -> Vec<Configuration> {
    let pts = dedup_points(points);
    if pts.len() <= 2 {
        return pts;
    }
    fn cross(o: &Configuration, a: &Configuration, b: &Configuration) -> BigInt {
        (&a.0[0] - &o.0[0]) * (&b.0[1] - &o.0[1]) - (&a.0[1] - &o.0[1]) * (&b.0[0] - &o.0[0])
    }
    let mut lower: Vec<Configuration> = Vec::new();
    for p in &pts {
        while lower.len() >= 2
            && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= BigInt::zero()
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Configuration> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= BigInt::zero()
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

struct Facet3 {
    facet: Facet,
    polygon: Vec<Configuration>,
}

/// Gift wrapping in dimension 3. The point sets this crate produces all
/// contain the origin and a positive multiple of every unit vector, which
/// makes `x_0 = 0` a valid starting facet; that assumption is checked.
fn facets_3d(points: &[Configuration]) -> Result<Vec<Facet3>> {
    let pts = dedup_points(points);
    if pts.iter().any(|p| p.counts().iter().any(|c| c.is_negative())) {
        return Err(Error::invalid("gift wrapping expects nonnegative points"));
    }
    for i in 0..3 {
        if !pts
            .iter()
            .any(|p| p.counts()[i].is_positive() && (0..3).all(|j| j == i || p.counts()[j].is_zero()))
        {
            return Err(Error::invalid("gift wrapping expects axis points"));
        }
    }

    let start = Facet::canonical(
        vec![BigInt::from(-1), BigInt::zero(), BigInt::zero()],
        BigInt::zero(),
    );
    let mut visited: BTreeSet<Facet> = BTreeSet::new();
    let mut queue: VecDeque<Facet> = VecDeque::new();
    visited.insert(start.clone());
    queue.push_back(start);
    let mut out = Vec::new();

    while let Some(facet) = queue.pop_front() {
        let tight: Vec<Configuration> = pts
            .iter()
            .filter(|p| facet.eval(p) == facet.offset)
            .cloned()
            .collect();
        let polygon = facet_polygon(&facet, &tight)?;
        for i in 0..polygon.len() {
            let u = &polygon[i];
            let v = &polygon[(i + 1) % polygon.len()];
            let z = polygon
                .iter()
                .find(|w| *w != u && *w != v)
                .expect("facet polygon has at least three vertices");
            let next = pivot_over_edge(&facet, u, v, z, &pts)?;
            if visited.insert(next.clone()) {
                queue.push_back(next);
            }
        }
        out.push(Facet3 { facet, polygon });
    }
    Ok(out)
}

/// Vertices of one facet, in cyclic order, via a 2D hull of the tight
/// points projected along a coordinate the normal does not vanish on.
fn facet_polygon(facet: &Facet, tight: &[Configuration]) -> Result<Vec<Configuration>> {
    let k = facet
        .normal
        .iter()
        .position(|x| !x.is_zero())
        .expect("facet normal is nonzero");
    let keep: Vec<usize> = (0..3).filter(|&j| j != k).collect();
    let projected: Vec<Configuration> = tight
        .iter()
        .map(|p| Configuration(vec![p.0[keep[0]].clone(), p.0[keep[1]].clone()]))
        .collect();
    let cycle = hull_2d(&projected);
    if cycle.len() < 3 {
        return Err(Error::invalid("tight set of a facet is degenerate"));
    }
    // the projection is injective on the facet plane, so each hull vertex
    // lifts back to exactly one tight point
    let lift = |q: &Configuration| -> Configuration {
        tight
            .iter()
            .find(|p| p.0[keep[0]] == q.0[0] && p.0[keep[1]] == q.0[1])
            .expect("projected point lifts back")
            .clone()
    };
    Ok(cycle.iter().map(lift).collect())
}

/// Rotate the supporting plane around edge `(u, v)` away from the current
/// facet and return the neighboring facet. `z` is a third point of the
/// current facet fixing the outward orientation.
fn pivot_over_edge(
    facet: &Facet,
    u: &Configuration,
    v: &Configuration,
    z: &Configuration,
    points: &[Configuration],
) -> Result<Facet> {
    let dir = sub(v.counts(), u.counts());
    let zu = sub(z.counts(), u.counts());
    let mut best: Option<(Vec<BigInt>, &Configuration)> = None;
    for w in points {
        if facet.eval(w) == facet.offset {
            continue;
        }
        let better = match &best {
            None => true,
            Some((m, _)) => dot(m, &sub(w.counts(), u.counts())).is_positive(),
        };
        if better {
            let mut m = cross3(&dir, &sub(w.counts(), u.counts()));
            debug_assert!(m.iter().any(|x| !x.is_zero()));
            if dot(&m, &zu).is_positive() {
                for x in m.iter_mut() {
                    *x = -x.clone();
                }
            }
            best = Some((m, w));
        }
    }
    let (m, _) = best.ok_or_else(|| Error::invalid("point set is not full-dimensional"))?;
    let c = dot(&m, u.counts());
    debug_assert!(points.iter().all(|p| dot(&m, p.counts()) <= c));
    Ok(Facet::canonical(m, c))
}

/// Ray of the dual cone during double description, with the set of
/// inserted constraints it is tight on.
struct Ray {
    v: Vec<Rational>,
    zero: Vec<u64>,
}

fn bit_set(words: &mut [u64], i: usize) {
    words[i / 64] |= 1 << (i % 64);
}

fn bits_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn bits_and(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn rat_dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Scale to a primitive integer vector without flipping the direction.
fn normalize_ray(v: &mut [Rational]) {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut ints: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in ints.iter_mut() {
            *x /= &g;
        }
    }
    for (slot, x) in v.iter_mut().zip(ints) {
        *slot = Rational::from_integer(x);
    }
}

/// Facets of the convex hull of `points` by double description on the
/// dual of the lifted cone spanned by `(1, p)`. Works in any dimension;
/// the crate uses it for d >= 4 and as a cross-check below that.
pub(crate) fn facets_dd(points: &[Configuration], d: usize) -> Result<Vec<Facet>> {
    let pts = dedup_points(points);
    let n = pts.len();
    let words = n.div_ceil(64);
    let mut lineality: Vec<Vec<Rational>> = (0..=d)
        .map(|i| {
            (0..=d)
                .map(|j| {
                    if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();

    for (idx, p) in pts.iter().enumerate() {
        let mut h: Vec<Rational> = Vec::with_capacity(d + 1);
        h.push(Rational::one());
        h.extend(
            p.counts()
                .iter()
                .map(|c| Rational::from_integer(c.clone())),
        );

        if let Some(pos) = lineality.iter().position(|l| !rat_dot(&h, l).is_zero()) {
            let mut l = lineality.remove(pos);
            let mut hv = rat_dot(&h, &l);
            if hv.is_negative() {
                for x in l.iter_mut() {
                    *x = -x.clone();
                }
                hv = -hv;
            }
            for l2 in lineality.iter_mut() {
                let c = rat_dot(&h, l2);
                if !c.is_zero() {
                    let f = &c / &hv;
                    for (a, b) in l2.iter_mut().zip(&l) {
                        *a -= &f * b;
                    }
                }
            }
            for r in rays.iter_mut() {
                let c = rat_dot(&h, &r.v);
                if !c.is_zero() {
                    let f = &c / &hv;
                    for (a, b) in r.v.iter_mut().zip(&l) {
                        *a -= &f * b;
                    }
                }
                bit_set(&mut r.zero, idx);
            }
            let mut zero = vec![0u64; words];
            for j in 0..idx {
                bit_set(&mut zero, j);
            }
            let mut v = l;
            normalize_ray(&mut v);
            rays.push(Ray { v, zero });
            continue;
        }

        let vals: Vec<Rational> = rays.iter().map(|r| rat_dot(&h, &r.v)).collect();
        if vals.iter().all(|c| !c.is_negative()) {
            for (r, c) in rays.iter_mut().zip(&vals) {
                if c.is_zero() {
                    bit_set(&mut r.zero, idx);
                }
            }
            continue;
        }
        let mut new_rays: Vec<Ray> = Vec::new();
        for (i, ci) in vals.iter().enumerate() {
            if !ci.is_positive() {
                continue;
            }
            for (j, cj) in vals.iter().enumerate() {
                if !cj.is_negative() {
                    continue;
                }
                let common = bits_and(&rays[i].zero, &rays[j].zero);
                let adjacent = !rays.iter().enumerate().any(|(k, r)| {
                    k != i && k != j && bits_subset(&common, &r.zero)
                });
                if !adjacent {
                    continue;
                }
                let mut v: Vec<Rational> = rays[i]
                    .v
                    .iter()
                    .zip(&rays[j].v)
                    .map(|(a, b)| ci * b - cj * a)
                    .collect();
                normalize_ray(&mut v);
                let mut zero = common;
                bit_set(&mut zero, idx);
                new_rays.push(Ray { v, zero });
            }
        }
        let mut kept: Vec<Ray> = Vec::new();
        for (r, c) in rays.into_iter().zip(&vals) {
            if c.is_positive() {
                kept.push(r);
            } else if c.is_zero() {
                let mut r = r;
                bit_set(&mut r.zero, idx);
                kept.push(r);
            }
        }
        kept.extend(new_rays);
        rays = kept;
    }

    if !lineality.is_empty() {
        return Err(Error::invalid("point set is not full-dimensional"));
    }
    let mut facets: Vec<Facet> = rays
        .into_iter()
        .map(|r| {
            let offset = r.v[0].to_integer();
            let normal: Vec<BigInt> = r.v[1..].iter().map(|x| -x.to_integer()).collect();
            Facet::canonical(normal, offset)
        })
        .collect();
    facets.sort();
    facets.dedup();
    Ok(facets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn cfg(v: &[i64]) -> Configuration {
        Configuration(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    fn inst(sizes: &[Rational]) -> Instance {
        Instance::new(sizes.to_vec(), vec![BigInt::zero(); sizes.len()]).unwrap()
    }

    #[test]
    fn hull_half_third() {
        let vs = hull_vertices(&inst(&[rat(1, 2), rat(1, 3)]), 1000).unwrap();
        assert_eq!(vs.vertices(), &[cfg(&[0, 0]), cfg(&[0, 3]), cfg(&[2, 0])]);
    }

    #[test]
    fn hull_two_thirds_one_third() {
        let vs = hull_vertices(&inst(&[rat(2, 3), rat(1, 3)]), 1000).unwrap();
        assert_eq!(
            vs.vertices(),
            &[cfg(&[0, 0]), cfg(&[0, 3]), cfg(&[1, 0]), cfg(&[1, 1])]
        );
    }

    #[test]
    fn hull_single_size() {
        let vs = hull_vertices(&inst(&[rat(1, 4)]), 1000).unwrap();
        assert_eq!(vs.vertices(), &[cfg(&[0]), cfg(&[4])]);
        let vs = hull_vertices(&inst(&[rat(2, 7)]), 1000).unwrap();
        assert_eq!(vs.vertices(), &[cfg(&[0]), cfg(&[3])]);
    }

    #[test]
    fn hull_unit_fraction_fast_path() {
        let vs = hull_vertices(&inst(&[rat(1, 3), rat(1, 4), rat(1, 5)]), 10).unwrap();
        assert_eq!(
            vs.vertices(),
            &[
                cfg(&[0, 0, 0]),
                cfg(&[0, 0, 5]),
                cfg(&[0, 4, 0]),
                cfg(&[3, 0, 0]),
            ]
        );
    }

    #[test]
    fn incremental_matches_direct_2d() {
        for sizes in [
            vec![rat(2, 3), rat(1, 3)],
            vec![rat(2, 5), rat(1, 4)],
            vec![rat(3, 7), rat(2, 9)],
            vec![rat(5, 11), rat(5, 13)],
        ] {
            let i = inst(&sizes);
            let a = hull_vertices_incremental(&i, 100_000).unwrap();
            let b = hull_vertices_direct(&i, 100_000).unwrap();
            assert_eq!(a, b, "sizes {sizes:?}");
        }
    }

    #[test]
    fn incremental_matches_direct_3d() {
        for sizes in [
            vec![rat(1, 2), rat(1, 3), rat(2, 5)],
            vec![rat(2, 3), rat(2, 5), rat(3, 7)],
            vec![rat(1, 4), rat(2, 7), rat(3, 5)],
        ] {
            let i = inst(&sizes);
            let a = hull_vertices_incremental(&i, 100_000).unwrap();
            let b = hull_vertices_direct(&i, 100_000).unwrap();
            assert_eq!(a, b, "sizes {sizes:?}");
        }
    }

    #[test]
    fn dd_matches_gift_wrapping() {
        for sizes in [
            vec![rat(2, 3), rat(1, 3)],
            vec![rat(2, 5), rat(1, 4)],
            vec![rat(1, 2), rat(1, 3), rat(2, 5)],
            vec![rat(2, 3), rat(2, 5), rat(3, 7)],
        ] {
            let d = sizes.len();
            let points = enumerate_configs(&sizes, 100_000).unwrap();
            let a = facets_dd(&points, d).unwrap();
            let b = facets_of_points(&points, d).unwrap();
            assert_eq!(a, b, "sizes {sizes:?}");
        }
    }

    #[test]
    fn four_dimensional_hull() {
        // sizes (1/2, 1/2, 1/2, 2/3): hull vertices found by the dd route
        let i = inst(&[rat(1, 2), rat(1, 2), rat(1, 2), rat(2, 3)]);
        let vs = hull_vertices_incremental(&i, 100_000).unwrap();
        let direct = hull_vertices_direct(&i, 100_000).unwrap();
        assert_eq!(vs, direct);
        assert!(vs.contains(&cfg(&[0, 0, 0, 0])));
        assert!(vs.contains(&cfg(&[2, 0, 0, 0])));
        assert!(vs.contains(&cfg(&[0, 0, 0, 1])));
    }

    #[test]
    fn origin_is_always_a_vertex() {
        for sizes in [
            vec![rat(2, 3), rat(1, 3)],
            vec![rat(1, 2), rat(1, 3), rat(2, 5)],
        ] {
            let vs = hull_vertices(&inst(&sizes), 100_000).unwrap();
            assert!(vs.contains(&Configuration::zero(sizes.len())));
        }
    }

    #[test]
    fn every_vertex_is_a_configuration() {
        let sizes = vec![rat(2, 5), rat(3, 7), rat(1, 3)];
        let vs = hull_vertices(&inst(&sizes), 100_000).unwrap();
        for v in vs.vertices() {
            assert!(super::super::is_config(&sizes, v.counts()).unwrap());
        }
    }
}
