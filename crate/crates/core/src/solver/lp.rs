//! Exact fractional bin packing by column generation: a restricted master
//! solved with an exact-pivot simplex (Bland's rule on the generated
//! columns) and a pricing step that maximizes the dual value over all
//! configurations with an exact knapsack solve. Optimality is certified
//! by the pricing bound, i.e. nonpositive reduced cost over the whole
//! column set, not just the generated part.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{floor_int, Rational};
use crate::error::{Error, Result};
use crate::linalg::solve_square;
use crate::polytope::{Configuration, Instance};

use super::{Budget, FractionalPacking};

/// Exact optimum of the fractional relaxation.
pub fn solve_lp(instance: &Instance, budget: &Budget) -> Result<FractionalPacking> {
    let lambda = lp_basis_solution(instance, budget)?;
    let mut weights = BTreeMap::new();
    let mut value = Rational::zero();
    for (c, w) in lambda {
        if w.is_positive() {
            value += &w;
            weights.insert(c, w);
        }
    }
    Ok(FractionalPacking { weights, value })
}

/// Exact LP value only; used as a bound inside the integral search.
pub fn lp_value(instance: &Instance, budget: &Budget) -> Result<Rational> {
    // unit-fraction sizes admit the closed form: the axis vertices give a
    // fractional packing of value sum b_i/a_i, and the item volume is a
    // matching lower bound
    if instance.unit_fraction_denominators().is_some() {
        return Ok(instance.total_size());
    }
    Ok(solve_lp(instance, budget)?.value)
}

fn lp_basis_solution(
    instance: &Instance,
    budget: &Budget,
) -> Result<Vec<(Configuration, Rational)>> {
    let d = instance.dim();
    let b: Vec<Rational> = instance
        .multiplicities()
        .iter()
        .map(|x| Rational::from_integer(x.clone()))
        .collect();
    if b.iter().all(|x| x.is_zero()) {
        return Ok(Vec::new());
    }

    // unit vectors are configurations for any sizes in (0, 1], so the
    // identity basis is a feasible start; no artificial phase needed
    let mut columns: Vec<Configuration> = (0..d)
        .map(|i| Configuration::axis(d, i, BigInt::one()))
        .collect();
    let mut basis: Vec<usize> = (0..d).collect();

    for _ in 0..budget.pivot_cap {
        let bmat: Vec<Vec<Rational>> = (0..d)
            .map(|row| {
                basis
                    .iter()
                    .map(|&j| Rational::from_integer(columns[j].counts()[row].clone()))
                    .collect()
            })
            .collect();
        // duals from B^T y = 1
        let bt: Vec<Vec<Rational>> = (0..d)
            .map(|i| (0..d).map(|j| bmat[j][i].clone()).collect())
            .collect();
        let ones = vec![Rational::one(); d];
        let duals = solve_square(&bt, &ones).ok_or(Error::SingularBasis)?;

        // Bland: the generated column of smallest index with negative
        // reduced cost enters; fresh pricing columns get the next index
        let entering = columns.iter().enumerate().position(|(j, c)| {
            !basis.contains(&j) && {
                let rc = Rational::one()
                    - c.counts()
                        .iter()
                        .zip(&duals)
                        .map(|(x, y)| Rational::from_integer(x.clone()) * y)
                        .sum::<Rational>();
                rc.is_negative()
            }
        });
        let entering = match entering {
            Some(j) => j,
            None => {
                let (cfg, best) = price(instance.sizes(), &duals, budget)?;
                if best <= Rational::one() {
                    // reduced costs are nonnegative over every
                    // configuration: optimal
                    let lambda = solve_square(&bmat, &b).ok_or(Error::SingularBasis)?;
                    return Ok(basis
                        .iter()
                        .zip(lambda)
                        .map(|(&j, w)| (columns[j].clone(), w))
                        .collect());
                }
                columns.push(cfg);
                columns.len() - 1
            }
        };

        let enter_col: Vec<Rational> = columns[entering]
            .counts()
            .iter()
            .map(|x| Rational::from_integer(x.clone()))
            .collect();
        let direction = solve_square(&bmat, &enter_col).ok_or(Error::SingularBasis)?;
        let values = solve_square(&bmat, &b).ok_or(Error::SingularBasis)?;
        // lexicographic Bland tie-break: smallest ratio, then smallest
        // basic column index
        let mut leave: Option<(Rational, usize, usize)> = None;
        for i in 0..d {
            if direction[i].is_positive() {
                let ratio = &values[i] / &direction[i];
                let key = (ratio, basis[i], i);
                if leave
                    .as_ref()
                    .map_or(true, |(r, bj, _)| key.0 < *r || (key.0 == *r && key.1 < *bj))
                {
                    leave = Some(key);
                }
            }
        }
        let Some((_, _, row)) = leave else {
            return Err(Error::invalid(
                "fractional relaxation is unbounded, which cannot happen \
                 for nonnegative demands",
            ));
        };
        basis[row] = entering;
    }
    Err(Error::limit(format!(
        "simplex did not finish within {} pivots",
        budget.pivot_cap
    )))
}

/// Exact knapsack pricing: maximize `sum duals_i p_i` over configurations
/// `p`. Dynamic programming over the size-denominator LCM when that is
/// small, branch and bound otherwise.
pub fn price(
    sizes: &[Rational],
    duals: &[Rational],
    budget: &Budget,
) -> Result<(Configuration, Rational)> {
    let lcm: BigInt = sizes
        .iter()
        .fold(BigInt::one(), |acc, s| num_integer::lcm(acc, s.denom().clone()));
    if let Some(q) = lcm.to_u64() {
        if q <= budget.dp_cap {
            return Ok(price_dp(sizes, duals, q));
        }
    }
    price_branch_bound(sizes, duals, budget)
}

fn price_dp(sizes: &[Rational], duals: &[Rational], q: u64) -> (Configuration, Rational) {
    let d = sizes.len();
    let weights: Vec<u64> = sizes
        .iter()
        .map(|s| {
            let w = s.numer() * BigInt::from(q) / s.denom();
            w.to_u64().expect("scaled weight fits")
        })
        .collect();

    #[derive(Clone)]
    enum Step {
        Start,
        Carry,
        Item(usize),
    }
    let mut value = vec![Rational::zero(); (q + 1) as usize];
    let mut step = vec![Step::Start; (q + 1) as usize];
    for c in 1..=q as usize {
        value[c] = value[c - 1].clone();
        step[c] = Step::Carry;
        for i in 0..d {
            if duals[i].is_positive() && weights[i] as usize <= c {
                let cand = &value[c - weights[i] as usize] + &duals[i];
                if cand > value[c] {
                    value[c] = cand;
                    step[c] = Step::Item(i);
                }
            }
        }
    }
    let mut counts = vec![BigInt::zero(); d];
    let mut c = q as usize;
    loop {
        match step[c] {
            Step::Start => break,
            Step::Carry => c -= 1,
            Step::Item(i) => {
                counts[i] += 1;
                c -= weights[i] as usize;
            }
        }
    }
    let best = value[q as usize].clone();
    (Configuration(counts), best)
}

fn price_branch_bound(
    sizes: &[Rational],
    duals: &[Rational],
    budget: &Budget,
) -> Result<(Configuration, Rational)> {
    let d = sizes.len();
    // profitable items by density, best first
    let mut order: Vec<usize> = (0..d).filter(|&i| duals[i].is_positive()).collect();
    order.sort_by(|&i, &j| {
        let di = &duals[i] / &sizes[i];
        let dj = &duals[j] / &sizes[j];
        dj.cmp(&di).then(i.cmp(&j))
    });

    struct Search<'a> {
        sizes: &'a [Rational],
        duals: &'a [Rational],
        order: &'a [usize],
        best: Rational,
        best_counts: Vec<BigInt>,
        nodes: u64,
        node_cap: u64,
    }
    impl Search<'_> {
        fn run(
            &mut self,
            pos: usize,
            cap_left: Rational,
            value: Rational,
            counts: &mut Vec<BigInt>,
        ) -> Result<()> {
            self.nodes += 1;
            if self.nodes > self.node_cap {
                return Err(Error::limit(format!(
                    "pricing exceeded {} nodes",
                    self.node_cap
                )));
            }
            if pos == self.order.len() {
                if value > self.best {
                    self.best = value;
                    self.best_counts = counts.clone();
                }
                return Ok(());
            }
            let i = self.order[pos];
            // density bound: remaining items are no denser than this one
            let bound = &value + &cap_left * (&self.duals[i] / &self.sizes[i]);
            if bound <= self.best {
                return Ok(());
            }
            let max = floor_int(&(&cap_left / &self.sizes[i]));
            let mut c = max;
            while !c.is_negative() {
                let used = &self.sizes[i] * Rational::from_integer(c.clone());
                counts[i] = c.clone();
                self.run(
                    pos + 1,
                    &cap_left - used,
                    &value + &self.duals[i] * Rational::from_integer(c.clone()),
                    counts,
                )?;
                counts[i] = BigInt::zero();
                c -= 1;
            }
            Ok(())
        }
    }

    let mut search = Search {
        sizes,
        duals,
        order: &order,
        best: Rational::zero(),
        best_counts: vec![BigInt::zero(); d],
        nodes: 0,
        node_cap: budget.node_cap,
    };
    let mut counts = vec![BigInt::zero(); d];
    search.run(0, Rational::one(), Rational::zero(), &mut counts)?;
    Ok((Configuration(search.best_counts), search.best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn inst(sizes: &[Rational], b: &[i64]) -> Instance {
        Instance::new(sizes.to_vec(), b.iter().map(|&x| int(x)).collect()).unwrap()
    }

    #[test]
    fn lp_examples() {
        let budget = Budget::default();
        let p = solve_lp(&inst(&[rat(1, 2), rat(1, 3)], &[2, 3]), &budget).unwrap();
        assert_eq!(p.value, rat(2, 1));

        let p = solve_lp(&inst(&[rat(1, 2), rat(1, 5)], &[1, 0]), &budget).unwrap();
        assert_eq!(p.value, rat(1, 2));

        let p = solve_lp(&inst(&[rat(1, 2), rat(1, 3)], &[0, 0]), &budget).unwrap();
        assert_eq!(p.value, rat(0, 1));
        assert!(p.weights.is_empty());
    }

    #[test]
    fn lp_weights_reproduce_demand() {
        let budget = Budget::default();
        let instance = inst(&[rat(2, 5), rat(3, 7)], &[4, 3]);
        let p = solve_lp(&instance, &budget).unwrap();
        let mut total = vec![rat(0, 1), rat(0, 1)];
        for (c, w) in &p.weights {
            for (acc, x) in total.iter_mut().zip(c.counts()) {
                *acc += w * Rational::from_integer(x.clone());
            }
        }
        assert_eq!(total, vec![rat(4, 1), rat(3, 1)]);
        // volume bound
        assert!(p.value >= instance.total_size());
    }

    #[test]
    fn lp_unit_fraction_closed_form() {
        let budget = Budget::default();
        let instance = inst(&[rat(1, 3), rat(1, 4)], &[5, 7]);
        let p = solve_lp(&instance, &budget).unwrap();
        assert_eq!(p.value, instance.total_size());
        assert_eq!(lp_value(&instance, &budget).unwrap(), p.value);
    }

    #[test]
    fn pricing_dp_matches_branch_bound() {
        let sizes = [rat(1, 3), rat(2, 7), rat(1, 4)];
        let duals = [rat(1, 2), rat(2, 5), rat(1, 3)];
        let budget = Budget::default();
        let (_, dp_val) = price_dp(&sizes, &duals, 84);
        let (_, bb_val) = price_branch_bound(&sizes, &duals, &budget).unwrap();
        assert_eq!(dp_val, bb_val);
    }

    #[test]
    fn pricing_ignores_nonpositive_duals() {
        let sizes = [rat(1, 2), rat(1, 3)];
        let duals = [rat(-1, 1), rat(0, 1)];
        let (cfg, val) = price(&sizes, &duals, &Budget::default()).unwrap();
        assert!(val.is_zero());
        assert!(cfg.is_zero());
    }
}
