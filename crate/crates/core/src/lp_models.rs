//! The configuration LP, the CAP2 bundling LP with its dual, and the
//! single-bidder menu LP.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{bell, blocks_of, set_partitions, welfare_opt_budget, ItemSet, Market, Outcome, DEFAULT_BUDGET};
use crate::numeric::{LinearProgram, LpSolution, LpStatus, Rational, Rel, Sense};

/// Solution of the configuration LP next to the integral optimum.
#[derive(Clone, Debug)]
pub struct ConfigLpResult {
    pub fractional: Rational,
    /// Positive primal entries `(consumer, set, x)`.
    pub support: Vec<(usize, ItemSet, Rational)>,
    pub integral: Rational,
    pub integral_allocation: Vec<ItemSet>,
    pub is_integral: bool,
    /// Dual of the item rows: supporting item prices when the LP is integral.
    pub item_prices: Vec<Rational>,
    /// Dual of the consumer rows.
    pub utilities: Vec<Rational>,
}

pub fn config_lp(market: &Market) -> Result<ConfigLpResult> {
    config_lp_budget(market, DEFAULT_BUDGET)
}

pub fn config_lp_budget(market: &Market, budget: u128) -> Result<ConfigLpResult> {
    let (m, n) = (market.m(), market.n());
    let needed = (n as u128) << m;
    if needed > budget.min(1 << 16) {
        return Err(Error::Budget { what: "config_lp columns", needed, budget: budget.min(1 << 16) });
    }
    let (integral, integral_allocation) = welfare_opt_budget(market, budget)?;
    let tables = market.value_tables();
    // Columns with zero value never help the primal and their dual rows hold trivially.
    let mut cols: Vec<(usize, ItemSet)> = Vec::new();
    for (i, t) in tables.iter().enumerate() {
        for s in ItemSet::full(m).subsets().skip(1) {
            if t[s.idx()].is_positive() {
                cols.push((i, s));
            }
        }
    }
    let obj = cols.iter().map(|(i, s)| tables[*i][s.idx()].clone()).collect();
    let mut lp = LinearProgram::new(Sense::Max, obj);
    for j in 0..m {
        let row = cols.iter().enumerate().filter(|(_, (_, s))| s.contains(j)).map(|(c, _)| (c, Rational::one())).collect();
        lp.add(row, Rel::Le, Rational::one());
    }
    for i in 0..n {
        let row = cols.iter().enumerate().filter(|(_, (k, _))| *k == i).map(|(c, _)| (c, Rational::one())).collect();
        lp.add(row, Rel::Le, Rational::one());
    }
    let sol = lp.solve();
    assert_eq!(sol.status, LpStatus::Optimal, "configuration LP is bounded and feasible");
    let support = cols
        .iter()
        .zip(&sol.primal)
        .filter(|(_, x)| x.is_positive())
        .map(|((i, s), x)| (*i, *s, x.clone()))
        .collect();
    assert!(sol.value >= integral, "fractional optimum below integral optimum");
    Ok(ConfigLpResult {
        is_integral: sol.value == integral,
        fractional: sol.value,
        support,
        integral,
        integral_allocation,
        item_prices: sol.dual[..m].to_vec(),
        utilities: sol.dual[m..].to_vec(),
    })
}

/// Solution of CAP2 and its dual.
#[derive(Clone, Debug)]
pub struct Cap2Result {
    pub fractional: Rational,
    pub integral: Rational,
    pub integral_allocation: Vec<ItemSet>,
    pub is_integral: bool,
    /// Positive `x_{i,S}` entries.
    pub x: Vec<(usize, ItemSet, Rational)>,
    /// Positive `z_B` entries, each bundling listed by its blocks.
    pub z: Vec<(Vec<ItemSet>, Rational)>,
    pub pi0: Rational,
    pub pi: Vec<Rational>,
    /// Subset prices `p_S`, indexed by bitmask (`p_∅ = 0`).
    pub p: Vec<Rational>,
    pub lp_solution: LpSolution,
}

pub fn cap2_lp(market: &Market) -> Result<Cap2Result> {
    cap2_lp_budget(market, DEFAULT_BUDGET)
}

pub fn cap2_lp_budget(market: &Market, budget: u128) -> Result<Cap2Result> {
    let (m, n) = (market.m(), market.n());
    let needed = bell(m).saturating_add((n as u128) << m);
    let cap = budget.min(20_000);
    if needed > cap {
        return Err(Error::Budget { what: "cap2_lp columns", needed, budget: cap });
    }
    let (integral, integral_allocation) = welfare_opt_budget(market, budget)?;
    let tables = market.value_tables();
    let mut xcols: Vec<(usize, ItemSet)> = Vec::new();
    for (i, t) in tables.iter().enumerate() {
        for s in ItemSet::full(m).subsets().skip(1) {
            if t[s.idx()].is_positive() {
                xcols.push((i, s));
            }
        }
    }
    let partitions: Vec<Vec<ItemSet>> = set_partitions(m).iter().map(|g| blocks_of(g)).collect();
    let nx = xcols.len();
    let mut obj: Vec<Rational> = xcols.iter().map(|(i, s)| tables[*i][s.idx()].clone()).collect();
    obj.extend(std::iter::repeat_n(Rational::zero(), partitions.len()));
    let mut lp = LinearProgram::new(Sense::Max, obj);
    for i in 0..n {
        let row = xcols.iter().enumerate().filter(|(_, (k, _))| *k == i).map(|(c, _)| (c, Rational::one())).collect();
        lp.add(row, Rel::Le, Rational::one());
    }
    let subsets: Vec<ItemSet> = ItemSet::full(m).subsets().skip(1).collect();
    let mut rows_of: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); 1 << m];
    for (c, (_, s)) in xcols.iter().enumerate() {
        rows_of[s.idx()].push((c, Rational::one()));
    }
    for (k, blocks) in partitions.iter().enumerate() {
        for b in blocks {
            rows_of[b.idx()].push((nx + k, -Rational::one()));
        }
    }
    for s in &subsets {
        lp.add(std::mem::take(&mut rows_of[s.idx()]), Rel::Le, Rational::zero());
    }
    lp.add((0..partitions.len()).map(|k| (nx + k, Rational::one())).collect(), Rel::Le, Rational::one());
    let sol = lp.solve();
    assert_eq!(sol.status, LpStatus::Optimal, "CAP2 is bounded and feasible");
    assert!(sol.value >= integral, "fractional optimum below integral optimum");
    let pi = sol.dual[..n].to_vec();
    let mut p = vec![Rational::zero(); 1 << m];
    for (k, s) in subsets.iter().enumerate() {
        p[s.idx()] = sol.dual[n + k].clone();
    }
    let pi0 = sol.dual[n + subsets.len()].clone();
    let x = xcols
        .iter()
        .zip(&sol.primal[..nx])
        .filter(|(_, v)| v.is_positive())
        .map(|((i, s), v)| (*i, *s, v.clone()))
        .collect();
    let z = partitions
        .iter()
        .zip(&sol.primal[nx..])
        .filter(|(_, v)| v.is_positive())
        .map(|(b, v)| (b.clone(), v.clone()))
        .collect();
    Ok(Cap2Result {
        is_integral: sol.value == integral,
        fractional: sol.value.clone(),
        integral,
        integral_allocation,
        x,
        z,
        pi0,
        pi,
        p,
        lp_solution: sol,
    })
}

/// Reads off an efficient bundling equilibrium from an integral CAP2 optimum:
/// the positive-value optimal parts become bundles priced by the dual subset
/// prices. Remaining items form one free bundle handed to the first consumer,
/// who is indifferent to it since `p_{S ∪ R} ≤ p_S + p_R` on the dual.
pub fn nlpe_to_cbe(market: &Market, cap2: &Cap2Result) -> Result<Outcome> {
    if !cap2.is_integral {
        return Err(Error::Precondition("CAP2 optimum is not integral".into()));
    }
    let alloc = &cap2.integral_allocation;
    let mut bundles = Vec::new();
    let mut allocation = vec![ItemSet::EMPTY; market.n()];
    let mut rest = market.full();
    for (i, s) in alloc.iter().enumerate() {
        if !s.is_empty() && market.value(i, *s).is_positive() {
            allocation[i] = ItemSet::singleton(bundles.len());
            bundles.push(*s);
            rest = rest.minus(*s);
        }
    }
    if !rest.is_empty() {
        bundles.push(rest);
    }
    // Complementary slackness of the integral primal (with the bundling above)
    // against the dual. Subsets outside the bundling may carry any price.
    let blocks_price: Rational = bundles.iter().map(|b| &cap2.p[b.idx()]).sum();
    assert_eq!(blocks_price, cap2.pi0, "complementary slackness: π₀ = Σ_{{S∈B}} p_S");
    if !rest.is_empty() {
        assert!(cap2.p[rest.idx()].is_zero(), "complementary slackness: the unsold bundle is free");
    }
    for (i, a) in allocation.iter().enumerate() {
        let expect = match a.first() {
            None => Rational::zero(),
            Some(k) => market.value(i, bundles[k]) - &cap2.p[bundles[k].idx()],
        };
        assert_eq!(cap2.pi[i], expect, "complementary slackness on consumer {i}");
    }
    if !rest.is_empty() {
        allocation[0] = allocation[0].with(bundles.len() - 1);
    }
    let prices = bundles.iter().map(|b| cap2.p[b.idx()].clone()).collect();
    Ok(Outcome { bundles, prices, allocation })
}

/// A menu of (allocation probability, price) options, one per type.
#[derive(Clone, Debug, Serialize)]
pub struct MenuMechanism {
    pub values: Vec<Rational>,
    pub options: Vec<(Rational, Rational)>,
    pub revenue: Rational,
}

/// Revenue-maximal IC and IR menu for a bidder whose value is uniform over
/// `values`, with every allocation probability at most `cap`.
pub fn menu_lp(values: &[Rational], cap: &Rational) -> Result<MenuMechanism> {
    let k = values.len();
    if k == 0 || values.iter().any(|v| !v.is_positive()) {
        return Err(Error::InvalidParameter("menu_lp needs positive values".into()));
    }
    if (1..k).any(|a| values[..a].contains(&values[a])) {
        return Err(Error::InvalidParameter("menu_lp needs distinct values".into()));
    }
    if cap.is_negative() || *cap > Rational::one() {
        return Err(Error::InvalidParameter("cap must lie in [0, 1]".into()));
    }
    // Variables: x_0..x_{k-1}, then p_0..p_{k-1}.
    let weight = Rational::from(k).recip();
    let mut obj = vec![Rational::zero(); k];
    obj.extend(std::iter::repeat_n(weight, k));
    let mut lp = LinearProgram::new(Sense::Max, obj);
    for (a, va) in values.iter().enumerate() {
        lp.add(vec![(a, va.clone()), (k + a, -Rational::one())], Rel::Ge, Rational::zero());
        for b in 0..k {
            if b != a {
                let row = vec![(a, va.clone()), (k + a, -Rational::one()), (b, -va.clone()), (k + b, Rational::one())];
                lp.add(row, Rel::Ge, Rational::zero());
            }
        }
        lp.add(vec![(a, Rational::one())], Rel::Le, cap.clone());
    }
    let sol = lp.solve();
    assert_eq!(sol.status, LpStatus::Optimal);
    let options = (0..k).map(|a| (sol.primal[a].clone(), sol.primal[k + a].clone())).collect();
    Ok(MenuMechanism { values: values.to_vec(), options, revenue: sol.value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{equal_revenue_values, ex81, ex82, prop22, table1};
    use crate::market::Valuation;
    use crate::numeric::r;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn nlpe_hands_worthless_items_to_a_consumer() {
        // Item b is worth nothing to anyone, so the optimum leaves it unsold.
        let vals = vec![
            Valuation::Explicit(vec![q(0), q(2), q(0), q(2)]),
            Valuation::Explicit(vec![q(0), q(1), q(0), q(1)]),
        ];
        let market = Market::with_default_labels(2, vals).unwrap();
        let cap = cap2_lp(&market).unwrap();
        assert!(cap.is_integral);
        let out = nlpe_to_cbe(&market, &cap).unwrap();
        let v = crate::equilibrium::verify_cbe(&market, &out).unwrap();
        assert!(v.pass);
        assert_eq!(v.welfare, q(2));
        assert_eq!(out.allocated(), ItemSet::full(out.bundles.len()));
    }

    #[test]
    fn config_lp_gap_on_complement_market() {
        let res = config_lp(&prop22(&r(1, 10)).unwrap()).unwrap();
        assert_eq!(res.fractional, r(61, 20));
        assert_eq!(res.integral, q(3));
        assert!(!res.is_integral);
    }

    #[test]
    fn config_lp_gap_on_budget_market() {
        // The a→1, b→2, c→3 optimum needs δ ≤ ε/2; otherwise c→1, b→2, a→3 earns 5 − ε.
        let (e, d) = (r(1, 100), r(1, 1000));
        let res = config_lp(&table1(&e, &d).unwrap()).unwrap();
        assert_eq!(res.fractional, q(5) - &e / 2);
        assert_eq!(res.integral, q(5) - &e / 2 - &d);
        let res = config_lp(&table1(&e, &e).unwrap()).unwrap();
        assert_eq!(res.fractional, q(5) - &e / 2);
        assert_eq!(res.integral, q(5) - &e);
    }

    #[test]
    fn single_additive_consumer_is_integral() {
        let mk = Market::with_default_labels(3, vec![Valuation::Additive(vec![q(1), q(2), r(1, 2)])]).unwrap();
        let res = config_lp(&mk).unwrap();
        assert!(res.is_integral);
        assert_eq!(res.fractional, r(7, 2));
        let c = cap2_lp(&mk).unwrap();
        assert!(c.is_integral);
        assert_eq!(c.fractional, r(7, 2));
    }

    #[test]
    fn cap2_examples() {
        let a = cap2_lp(&ex81()).unwrap();
        assert_eq!((a.fractional, a.integral), (q(11), q(8)));
        let b = cap2_lp(&ex82()).unwrap();
        assert_eq!((b.fractional, b.integral), (q(4), r(7, 2)));
    }

    #[test]
    fn menu_examples() {
        let m = menu_lp(&equal_revenue_values(3), &q(1)).unwrap();
        assert_eq!(m.revenue, r(1, 3));
        assert_eq!(menu_lp(&equal_revenue_values(5), &q(0)).unwrap().revenue, q(0));
        let half = menu_lp(&equal_revenue_values(5), &r(1, 2)).unwrap();
        assert!(half.revenue <= r(1, 8));
    }
}
