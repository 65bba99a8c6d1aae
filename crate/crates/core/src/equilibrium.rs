//! Exact verification of (bundling) equilibria, CE existence, and exhaustive
//! search over bundlings.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp_models::config_lp_budget;
use crate::market::{
    bell, blocks_of, bundle_table, demand_from_table, induced_market, set_partitions, welfare_opt_filtered, ItemSet,
    Market, Outcome, DEFAULT_BUDGET,
};
use crate::numeric::{LinearProgram, LpStatus, Rational, Rel, Sense};

#[derive(Clone, Debug, Serialize)]
pub struct ConsumerCheck {
    pub consumer: usize,
    pub maximizes: bool,
    pub payoff: Rational,
    pub best_payoff: Rational,
    /// A strictly better bundle-index set when `maximizes` is false.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub better: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub consumers: Vec<ConsumerCheck>,
    pub clears: bool,
    /// Indices of bundles nobody holds.
    pub unallocated: Vec<usize>,
    pub welfare: Rational,
    pub revenue: Rational,
}

/// Profit-maximization check against explicit per-consumer tables over bundle sets.
pub fn check_tables(tables: &[Vec<Rational>], prices: &[Rational], allocation: &[ItemSet]) -> VerificationReport {
    let k = prices.len();
    let mut consumers = Vec::with_capacity(tables.len());
    let mut welfare = Rational::zero();
    for (i, (t, s)) in tables.iter().zip(allocation).enumerate() {
        let d = demand_from_table(t, prices);
        let cost: Rational = s.iter().map(|b| &prices[b]).sum();
        let payoff = &t[s.idx()] - cost;
        welfare += &t[s.idx()];
        let maximizes = payoff == d.payoff;
        consumers.push(ConsumerCheck {
            consumer: i,
            better: (!maximizes).then(|| d.canonical().to_vec()),
            maximizes,
            payoff,
            best_payoff: d.payoff,
        });
    }
    let held = allocation.iter().fold(ItemSet::EMPTY, |a, s| a.union(*s));
    let unallocated = ItemSet::full(k).minus(held).to_vec();
    let revenue = held.iter().map(|b| &prices[b]).sum();
    let clears = unallocated.is_empty();
    VerificationReport { pass: clears && consumers.iter().all(|c| c.maximizes), consumers, clears, unallocated, welfare, revenue }
}

/// Checks profit maximization (by brute-force demand) and market clearance.
/// Structurally malformed outcomes are errors; equilibrium failures are report content.
pub fn verify_cbe(market: &Market, outcome: &Outcome) -> Result<VerificationReport> {
    outcome.validate(market.m(), market.n())?;
    let tables: Vec<Vec<Rational>> =
        market.consumers().iter().map(|c| bundle_table(&c.valuation, &outcome.bundles)).collect();
    Ok(check_tables(&tables, &outcome.prices, &outcome.allocation))
}

/// Item-price competitive equilibrium check: the singleton-bundling case of `verify_cbe`.
pub fn verify_ce(market: &Market, prices: &[Rational], allocation: &[ItemSet]) -> Result<VerificationReport> {
    verify_cbe(market, &singleton_outcome(market.m(), prices, allocation))
}

/// Wraps item prices and an item allocation as an outcome over singleton bundles.
pub fn singleton_outcome(m: usize, prices: &[Rational], allocation: &[ItemSet]) -> Outcome {
    Outcome { bundles: (0..m).map(ItemSet::singleton).collect(), prices: prices.to_vec(), allocation: allocation.to_vec() }
}

/// Outcome of the CE existence test.
#[derive(Clone, Debug)]
pub struct CeResult {
    pub exists: bool,
    /// Item prices and allocation of a verified CE when one exists.
    pub prices: Option<Vec<Rational>>,
    pub allocation: Vec<ItemSet>,
    pub fractional: Rational,
    pub integral: Rational,
}

/// A CE exists iff the configuration LP has an integral optimum. When it does,
/// the dual item prices support the welfare-optimal allocation.
pub fn ce_exists(market: &Market) -> Result<CeResult> {
    ce_exists_budget(market, DEFAULT_BUDGET)
}

pub fn ce_exists_budget(market: &Market, budget: u128) -> Result<CeResult> {
    let lp = config_lp_budget(market, budget)?;
    let prices = if lp.is_integral {
        let rep = verify_ce(market, &lp.item_prices, &lp.integral_allocation)?;
        assert!(rep.pass, "dual prices of an integral configuration LP must support the optimum");
        Some(lp.item_prices)
    } else {
        None
    };
    Ok(CeResult {
        exists: prices.is_some(),
        prices,
        allocation: lp.integral_allocation,
        fractional: lp.fractional,
        integral: lp.integral,
    })
}

/// Largest total bundle price over all equilibrium price vectors of a market
/// with a CE: the item-price face of the optimal dual of the configuration LP.
pub fn max_ce_revenue(market: &Market, opt: &Rational) -> Rational {
    let (m, n) = (market.m(), market.n());
    // Variables: p_0..p_{m-1}, then π_0..π_{n-1}.
    let mut obj = vec![Rational::one(); m];
    obj.extend(std::iter::repeat_n(Rational::zero(), n));
    let mut lp = LinearProgram::new(Sense::Max, obj);
    for (i, t) in market.value_tables().iter().enumerate() {
        for s in ItemSet::full(m).subsets().skip(1) {
            if t[s.idx()].is_positive() {
                let mut row: Vec<(usize, Rational)> = s.iter().map(|j| (j, Rational::one())).collect();
                row.push((m + i, Rational::one()));
                lp.add(row, Rel::Ge, t[s.idx()].clone());
            }
        }
    }
    lp.add((0..m + n).map(|c| (c, Rational::one())).collect(), Rel::Le, opt.clone());
    let sol = lp.solve();
    assert_eq!(sol.status, LpStatus::Optimal, "a CE exists, so the optimal dual face is nonempty");
    sol.value
}

/// One row of the exhaustive bundling table.
#[derive(Clone, Debug)]
pub struct BundlingRow {
    pub bundles: Vec<ItemSet>,
    pub ce_exists: bool,
    pub fractional: Rational,
    /// Optimal welfare of the induced market.
    pub induced_opt: Rational,
    /// A verified CBE with this bundling (dual prices), when one exists.
    pub outcome: Option<Outcome>,
    /// Largest revenue of any CBE with this bundling.
    pub max_revenue: Option<Rational>,
    /// Whether every CBE with this bundling gives all items to consumer 0.
    pub first_gets_all: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct CbeSearchResult {
    pub best_welfare: Rational,
    pub witness: Outcome,
    /// Indices into `table` of every welfare-maximizing bundling.
    pub maximizers: Vec<usize>,
    pub best_revenue: Rational,
    pub revenue_maximizers: Vec<usize>,
    pub table: Vec<BundlingRow>,
}

/// Default cap on the number of bundlings examined (Bell(6)).
pub const DEFAULT_MAX_BUNDLINGS: u128 = 203;

pub fn cbe_search(market: &Market) -> Result<CbeSearchResult> {
    cbe_search_with(market, DEFAULT_MAX_BUNDLINGS)
}

/// Examines every bundling of the items. Work items run in parallel; the table
/// is kept in canonical (restricted-growth) order, so results do not depend on
/// the number of workers.
pub fn cbe_search_with(market: &Market, max_bundlings: u128) -> Result<CbeSearchResult> {
    let m = market.m();
    let needed = bell(m);
    if needed > max_bundlings {
        return Err(Error::Budget { what: "cbe_search bundlings", needed, budget: max_bundlings });
    }
    let table: Vec<BundlingRow> = set_partitions(m)
        .par_iter()
        .map(|rgs| examine_bundling(market, blocks_of(rgs)))
        .collect::<Result<Vec<_>>>()?;
    let best_welfare =
        table.iter().filter(|r| r.ce_exists).map(|r| r.induced_opt.clone()).max().expect("the grand bundle admits a CE");
    let maximizers: Vec<usize> =
        (0..table.len()).filter(|&k| table[k].ce_exists && table[k].induced_opt == best_welfare).collect();
    let best_revenue = table.iter().filter_map(|r| r.max_revenue.clone()).max().unwrap();
    let revenue_maximizers =
        (0..table.len()).filter(|&k| table[k].max_revenue.as_ref() == Some(&best_revenue)).collect();
    let witness = table[maximizers[0]].outcome.clone().unwrap();
    Ok(CbeSearchResult { best_welfare, witness, maximizers, best_revenue, revenue_maximizers, table })
}

fn examine_bundling(market: &Market, bundles: Vec<ItemSet>) -> Result<BundlingRow> {
    let induced = induced_market(market, &bundles)?;
    let ce = ce_exists(&induced)?;
    let mut row = BundlingRow {
        bundles: bundles.clone(),
        ce_exists: ce.exists,
        fractional: ce.fractional.clone(),
        induced_opt: ce.integral.clone(),
        outcome: None,
        max_revenue: None,
        first_gets_all: None,
    };
    if let Some(prices) = ce.prices {
        let outcome = Outcome { bundles: bundles.clone(), prices, allocation: ce.allocation.clone() };
        let rep = verify_cbe(market, &outcome)?;
        assert!(rep.pass && rep.welfare == ce.integral, "induced CE must be a CBE of the original market");
        row.max_revenue = Some(max_ce_revenue(&induced, &ce.integral));
        // CE allocations are exactly the welfare-optimal ones, so consumer 0 holds
        // everything in every CBE iff no optimum without that exists.
        let all = ItemSet::full(bundles.len());
        let tables = induced.value_tables();
        let others = welfare_opt_filtered(&tables, bundles.len(), |i, s| i != 0 || s != all);
        row.first_gets_all = Some(others.is_none_or(|(w, _)| w < ce.integral));
        row.outcome = Some(outcome);
    }
    Ok(row)
}

/// The equal-price property of a CBE in which the lowest-index allocated
/// consumer `i'` is not consumer 0: every allocated bundle has the same price,
/// and that price is at most `i'`'s value for it. Returns `None` when `i' = 0`,
/// where the property says nothing.
pub fn equal_price_property(market: &Market, outcome: &Outcome) -> Option<bool> {
    let first = outcome.allocation.iter().position(|s| !s.is_empty())?;
    if first == 0 {
        return None;
    }
    let held: Vec<usize> = outcome.allocation.iter().flat_map(|s| s.iter()).collect();
    let p = &outcome.prices[held[0]];
    let same = held.iter().all(|&b| outcome.prices[b] == *p);
    let within = outcome.allocation[first].iter().all(|b| outcome.prices[b] <= market.value(first, outcome.bundles[b]));
    Some(same && within)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{ex81, prop22};
    use crate::market::Valuation;
    use crate::numeric::r;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn grand_bundle_to_complement_consumer() {
        let mk = prop22(&r(1, 10)).unwrap();
        let grand = |holder: usize, price: Rational| {
            let mut allocation = vec![ItemSet::EMPTY; 2];
            allocation[holder] = ItemSet::singleton(0);
            Outcome { bundles: vec![ItemSet::full(2)], prices: vec![price], allocation }
        };
        let rep = verify_cbe(&mk, &grand(0, q(2))).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.welfare, r(21, 10));
        for p in [q(0), q(1), q(2), r(21, 10)] {
            assert!(!verify_cbe(&mk, &grand(1, p)).unwrap().pass);
        }
    }

    #[test]
    fn failures_are_reported() {
        let mk = prop22(&r(1, 10)).unwrap();
        let o = singleton_outcome(2, &[q(0), q(0)], &[ItemSet::EMPTY, ItemSet::full(2)]);
        let rep = verify_cbe(&mk, &o).unwrap();
        assert!(!rep.pass);
        assert!(!rep.consumers[0].maximizes);
        assert_eq!(rep.consumers[0].better, Some(vec![0, 1]));
        let short = Outcome { allocation: vec![ItemSet::EMPTY], ..o };
        assert!(verify_cbe(&mk, &short).is_err());
    }

    #[test]
    fn ce_existence() {
        assert!(!ce_exists(&prop22(&r(1, 10)).unwrap()).unwrap().exists);
        let ex = ce_exists(&ex81()).unwrap();
        assert!(!ex.exists && ex.fractional > q(8));
        let mk = Market::with_default_labels(
            2,
            vec![Valuation::Additive(vec![q(3), q(1)]), Valuation::Additive(vec![q(1), q(2)])],
        )
        .unwrap();
        let ce = ce_exists(&mk).unwrap();
        assert!(ce.exists);
        assert_eq!(ce.integral, q(5));
    }

    #[test]
    fn supporting_prices_for_case_one_instance() {
        let x = Valuation::Explicit(vec![q(0), q(3), q(0), r(7, 2)]);
        let y = Valuation::Explicit(vec![q(0), q(2), q(3), r(7, 2)]);
        let mk = Market::with_default_labels(2, vec![x, y]).unwrap();
        let a = ItemSet::singleton;
        assert!(verify_ce(&mk, &[q(3), q(2)], &[a(0), a(1)]).unwrap().pass);
    }

    #[test]
    fn complement_market_search() {
        let res = cbe_search(&prop22(&r(1, 10)).unwrap()).unwrap();
        assert_eq!(res.best_welfare, r(21, 10));
        assert_eq!(res.witness.bundles, vec![ItemSet::full(2)]);
        assert_eq!(res.witness.allocation[0], ItemSet::singleton(0));
    }
}
