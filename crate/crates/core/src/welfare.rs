//! Bundling-equilibrium constructions with welfare guarantees for specific
//! market classes.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{at_least_over_log, at_least_over_sqrt, ceil_cbrt, ceil_sqrt, BoundCheck};
use crate::equilibrium::{cbe_search, ce_exists, verify_cbe};
use crate::error::{Error, Result};
use crate::lifting::{lift_high_demand, lift_partial, log_bin, BinMode, PartialCbe};
use crate::lp_models::{cap2_lp, nlpe_to_cbe};
use crate::market::{
    check_subadditive, induced_market, lex_cmp, table_subadditive, table_superadditive, welfare_opt,
    welfare_opt_filtered, ItemSet, Market, Outcome, PricedBundling, Valuation, DEFAULT_BUDGET,
};
use crate::numeric::Rational;

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

/// The grand bundle sold to the consumer valuing it most (lowest index on ties)
/// at that value.
pub fn grand_bundle_outcome(market: &Market) -> Outcome {
    let full = market.full();
    let mut best = 0;
    for i in 1..market.n() {
        if market.value(i, full) > market.value(best, full) {
            best = i;
        }
    }
    let mut allocation = vec![ItemSet::EMPTY; market.n()];
    allocation[best] = ItemSet::singleton(0);
    Outcome { bundles: vec![full], prices: vec![market.value(best, full)], allocation }
}

fn assert_equilibrium(market: &Market, outcome: &Outcome, what: &str) -> Rational {
    let report = verify_cbe(market, outcome).expect("well-formed outcome");
    assert!(report.pass, "{what} produced an outcome that is not a bundling equilibrium");
    report.welfare
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoConsumerRoute {
    /// The optimum gives everything to one consumer.
    SingleBundle,
    BothSubadditive,
    BothSuperadditive,
    GrandBundle,
    /// Item prices `(x_a, (x_a + y_b)/3)`: the higher-valued consumer is superadditive.
    SuperadditiveFirst,
    /// Item prices `((x_a + y_b)/3, y_b)`: the higher-valued consumer is subadditive.
    SubadditiveFirst,
}

#[derive(Clone, Debug)]
pub struct TwoConsumerResult {
    pub outcome: Outcome,
    pub route: TwoConsumerRoute,
    pub opt: Rational,
    pub welfare: Rational,
}

/// A bundling equilibrium with welfare at least two thirds of the optimum in a
/// two-consumer market, built on the two parts of an optimal allocation.
pub fn two_consumer_cbe(market: &Market) -> Result<TwoConsumerResult> {
    if market.n() != 2 {
        return Err(Error::Precondition(format!("two consumers required, got {}", market.n())));
    }
    let (opt, alloc) = welfare_opt(market)?;
    let (outcome, route) = if alloc.iter().any(|s| s.is_empty()) {
        (grand_bundle_outcome(market), TwoConsumerRoute::SingleBundle)
    } else {
        two_part_cbe(market, &opt, [alloc[0], alloc[1]])?
    };
    let welfare = assert_equilibrium(market, &outcome, "two_consumer_cbe");
    assert!(&welfare * q(3) >= &opt * q(2), "two-consumer welfare below two thirds of the optimum");
    Ok(TwoConsumerResult { outcome, route, opt, welfare })
}

fn two_part_cbe(market: &Market, opt: &Rational, parts: [ItemSet; 2]) -> Result<(Outcome, TwoConsumerRoute)> {
    let bundles = parts.to_vec();
    let induced = induced_market(market, &bundles)?;
    let t = [induced.valuation(0).table(2), induced.valuation(1).table(2)];
    let sub = [table_subadditive(&t[0], 2), table_subadditive(&t[1], 2)];
    let sup = [table_superadditive(&t[0], 2), table_superadditive(&t[1], 2)];
    if sub[0] && sub[1] {
        let ce = ce_exists(&induced)?;
        let prices = ce.prices.expect("two-item subadditive markets have a competitive equilibrium");
        return Ok((Outcome { bundles, prices, allocation: ce.allocation }, TwoConsumerRoute::BothSubadditive));
    }
    if sup[0] && sup[1] {
        let cap = cap2_lp(&induced)?;
        let out = if cap.is_integral {
            nlpe_to_cbe(&induced, &cap)?
        } else {
            cbe_search(&induced)?.witness
        };
        let lifted = Outcome {
            bundles: out.bundles.iter().map(|b| b.iter().fold(ItemSet::EMPTY, |a, k| a.union(bundles[k]))).collect(),
            prices: out.prices,
            allocation: out.allocation,
        };
        return Ok((lifted, TwoConsumerRoute::BothSuperadditive));
    }
    // Consumer "1" is the one whose optimal part is worth more; item a is that part.
    let own = [t[0][1].clone(), t[1][2].clone()];
    let firsts: Vec<usize> = if own[0] > own[1] {
        vec![0]
    } else if own[0] < own[1] {
        vec![1]
    } else {
        vec![0, 1]
    };
    let two_thirds = opt * q(2) / q(3);
    let mut best: Option<(Outcome, TwoConsumerRoute, Rational)> = None;
    for c1 in firsts {
        let c2 = 1 - c1;
        let (a, b) = (1usize << c1, 1usize << c2);
        let (xa, xb, xab) = (&t[c1][a], &t[c1][b], &t[c1][3]);
        let (yb, yab) = (&t[c2][b], &t[c2][3]);
        let (out, route) = if *xab >= two_thirds || *yab >= two_thirds {
            (grand_bundle_outcome(market), TwoConsumerRoute::GrandBundle)
        } else {
            let third = (xa + yb) / q(3);
            let (pa, pb, route) = if *xab >= xa + xb {
                (xa.clone(), third, TwoConsumerRoute::SuperadditiveFirst)
            } else {
                (third, yb.clone(), TwoConsumerRoute::SubadditiveFirst)
            };
            let mut prices = vec![Rational::zero(); 2];
            prices[c1] = pa;
            prices[c2] = pb;
            let mut allocation = vec![ItemSet::EMPTY; 2];
            allocation[c1] = ItemSet::singleton(c1);
            allocation[c2] = ItemSet::singleton(c2);
            (Outcome { bundles: bundles.clone(), prices, allocation }, route)
        };
        let report = verify_cbe(market, &out)?;
        if report.pass && best.as_ref().is_none_or(|(_, _, w)| report.welfare > *w) {
            best = Some((out, route, report.welfare));
        }
    }
    let (out, route, _) = best.expect("one of the two-consumer constructions is an equilibrium");
    Ok((out, route))
}

/// For subadditive markets: bundle the most valuable optimal part against the
/// rest and take a competitive equilibrium of the induced two-item market.
pub fn subadditive_n_over_2(market: &Market) -> Result<Outcome> {
    let m = market.m();
    if let Some(i) = (0..market.n()).find(|&i| !check_subadditive(market.valuation(i), m)) {
        return Err(Error::Precondition(format!("consumer {i} is not subadditive")));
    }
    let (_, alloc) = welfare_opt(market)?;
    let mut order: Vec<usize> = (0..market.n()).collect();
    order.sort_by(|&a, &b| market.value(b, alloc[b]).cmp(&market.value(a, alloc[a])));
    let first = alloc[order[0]];
    let bundles: Vec<ItemSet> = [first, market.full().minus(first)].into_iter().filter(|b| !b.is_empty()).collect();
    let induced = induced_market(market, &bundles)?;
    let ce = ce_exists(&induced)?;
    let prices = ce.prices.expect("induced two-item subadditive market must have a competitive equilibrium");
    let outcome = Outcome { bundles, prices, allocation: ce.allocation };
    let welfare = assert_equilibrium(market, &outcome, "subadditive_n_over_2");
    let top2: Rational = order.iter().take(2).map(|&i| market.value(i, alloc[i])).sum();
    assert!(welfare >= top2);
    Ok(outcome)
}

#[derive(Clone, Debug)]
pub struct MultiUnitResult {
    pub outcome: Outcome,
    pub opt: Rational,
    pub welfare: Rational,
    /// Bin value from log binning; `None` if everything is worth zero.
    pub v: Option<Rational>,
    /// Consumers left nonempty after binning.
    pub n_prime: usize,
    /// Number of equal bundles; 0 when the grand bundle is sold directly.
    pub k: usize,
    pub epsilon: Option<Rational>,
    /// The high-demand priced bundling that was lifted.
    pub high_demand: Option<PricedBundling>,
    /// Pre-bundles used in value-query mode.
    pub pre_bundles: Option<Vec<ItemSet>>,
    pub bound: BoundCheck,
}

struct MultiUnitPlan {
    v: Option<Rational>,
    n_prime: usize,
    k: usize,
    epsilon: Option<Rational>,
    /// Equal-size chunks of units `[start, start+len)`, priced `v − ε`.
    chunks: Vec<(usize, usize)>,
}

fn multi_unit_curves(market: &Market) -> Result<Vec<Vec<Rational>>> {
    market
        .consumers()
        .iter()
        .enumerate()
        .map(|(i, c)| match &c.valuation {
            Valuation::MultiUnit(v) => Ok(v.clone()),
            _ => Err(Error::Precondition(format!("consumer {i} is not multi-unit"))),
        })
        .collect()
}

fn plan_multi_unit(units: &Market, eps: Option<&Rational>) -> Result<MultiUnitPlan> {
    let (_, o) = welfare_opt(units)?;
    let lb = log_bin(units, &o, BinMode::ByValue);
    let mut sizes: Vec<usize> = lb.filtered.iter().map(|s| s.len()).filter(|&s| s > 0).collect();
    sizes.sort_by(|a, b| b.cmp(a));
    let n_prime = sizes.len();
    let Some(v) = lb.v.clone().filter(|_| n_prime > 1) else {
        return Ok(MultiUnitPlan { v: lb.v, n_prime, k: 0, epsilon: None, chunks: vec![] });
    };
    let k = n_prime / 2;
    let eps = eps.cloned().unwrap_or_else(|| &v * Rational::pow2(-10));
    // k(v−ε) ≥ 2v(2k+1)/10 is what the guarantee needs from ε.
    let kq = Rational::from(k);
    if !eps.is_positive() || eps >= v || &kq * (&v - &eps) * q(10) < q(2) * &v * (q(2) * &kq + q(1)) {
        return Err(Error::InvalidParameter(format!("epsilon {eps} is outside (0, v) or too large for the guarantee")));
    }
    let m = units.m();
    let size = m / k;
    let chunks: Vec<(usize, usize)> =
        (0..k).map(|j| (j * size, if j + 1 == k { m - j * size } else { size })).collect();
    assert!(chunks.iter().all(|&(_, len)| len >= sizes[k]), "every bundle must be at least as large as O'_(k+1)");
    Ok(MultiUnitPlan { v: Some(v), n_prime, k, epsilon: Some(eps), chunks })
}

fn finish_multi_unit(
    market: &Market,
    plan: MultiUnitPlan,
    chunk_items: impl Fn(usize, usize) -> ItemSet,
    opt: Rational,
    factor: i64,
    pre_bundles: Option<Vec<ItemSet>>,
) -> Result<MultiUnitResult> {
    let (outcome, high_demand) = if plan.chunks.is_empty() {
        (grand_bundle_outcome(market), None)
    } else {
        let price = plan.v.as_ref().unwrap() - plan.epsilon.as_ref().unwrap();
        let bundles: Vec<ItemSet> = plan.chunks.iter().map(|&(s, l)| chunk_items(s, l)).collect();
        let pb = PricedBundling::new(bundles, vec![price; plan.chunks.len()]);
        (lift_high_demand(market, &pb)?, Some(pb))
    };
    let welfare = assert_equilibrium(market, &outcome, "multiunit_cbe");
    let mu = Rational::from(market.mu());
    let holds = at_least_over_log(&welfare, &opt, &q(factor), &mu, &q(2));
    let bound = BoundCheck::new(format!("welfare >= OPT/({factor}(log2 mu + 2))"), &welfare, &opt, holds);
    Ok(MultiUnitResult {
        outcome,
        opt,
        welfare,
        v: plan.v,
        n_prime: plan.n_prime,
        k: plan.k,
        epsilon: plan.epsilon,
        high_demand,
        pre_bundles,
        bound,
    })
}

/// Multi-unit markets: log-bin an optimal allocation, split the units into
/// `⌊n′/2⌋` equal bundles priced just below the bin value, and lift.
pub fn multiunit_cbe(market: &Market, eps: Option<&Rational>) -> Result<MultiUnitResult> {
    multi_unit_curves(market)?;
    let (opt, _) = welfare_opt(market)?;
    let plan = plan_multi_unit(market, eps)?;
    finish_multi_unit(market, plan, |s, l| ItemSet::from_items(s..s + l), opt, 20, None)
}

/// `q = min(n², m)` pre-bundles of `⌊m/q⌋` units, leftovers in the last one.
pub fn pre_bundles(m: usize, n: usize) -> Vec<ItemSet> {
    let count = (n * n).min(m).max(1);
    let size = m / count;
    (0..count).map(|j| ItemSet::from_items(j * size..if j + 1 == count { m } else { (j + 1) * size })).collect()
}

/// The multi-unit construction run on pre-bundles of equal size, using only
/// value queries: the coarse market counts pre-bundles, valued at
/// `v_i(c·size)`, and ignores leftover units until the final lift.
pub fn multiunit_value_query_mode(market: &Market, eps: Option<&Rational>) -> Result<MultiUnitResult> {
    let curves = multi_unit_curves(market)?;
    let pre = pre_bundles(market.m(), market.n());
    let count = pre.len();
    let size = market.m() / count;
    let coarse = Market::with_default_labels(
        count,
        curves.iter().map(|c| Valuation::MultiUnit((0..=count).map(|j| c[j * size].clone()).collect())).collect(),
    )?;
    let (opt, _) = welfare_opt(market)?;
    let plan = plan_multi_unit(&coarse, eps)?;
    let items = |s: usize, l: usize| pre[s..s + l].iter().fold(ItemSet::EMPTY, |a, b| a.union(*b));
    finish_multi_unit(market, plan, items, opt, 40, Some(pre.clone()))
}

#[derive(Clone, Debug)]
pub struct SqrtResult {
    pub outcome: Outcome,
    pub high_demand: PricedBundling,
    pub r: usize,
    pub epsilon: Rational,
    pub aggregate: Rational,
    pub bound: BoundCheck,
}

/// Groups `r` parts worth `[v, 2v)` each into bundles of `⌈√r⌉` parts priced
/// just below `v`, which is high-demand, and lifts.
pub fn general_sqrt(market: &Market, s: &[ItemSet], v: &Rational) -> Result<SqrtResult> {
    if s.len() != market.n() || !v.is_positive() {
        return Err(Error::Precondition("one part per consumer and a positive value are required".into()));
    }
    let mut seen = ItemSet::EMPTY;
    let mut parts = Vec::new();
    let mut total = Rational::zero();
    for (i, si) in s.iter().enumerate() {
        if si.is_empty() {
            continue;
        }
        let val = market.value(i, *si);
        if !si.is_disjoint(seen) || val < *v || val >= v * q(2) {
            return Err(Error::Precondition(format!("part of consumer {i} is not disjoint or not worth [v, 2v)")));
        }
        seen = seen.union(*si);
        total += val;
        parts.push(*si);
    }
    let r = parts.len();
    if r == 0 {
        return Err(Error::Precondition("no nonempty parts".into()));
    }
    let per = ceil_sqrt(r);
    let nb = r / per;
    let mut bundles: Vec<ItemSet> = (0..nb)
        .map(|j| {
            let end = if j + 1 == nb { r } else { (j + 1) * per };
            parts[j * per..end].iter().fold(ItemSet::EMPTY, |a, p| a.union(*p))
        })
        .collect();
    let leftover = market.full().minus(seen);
    bundles[nb - 1] = bundles[nb - 1].union(leftover);
    let rq = Rational::from(r);
    let mut eps = v * Rational::pow2(-10);
    let aggregate = loop {
        let agg = Rational::from(nb) * (v - &eps);
        if at_least_over_sqrt(&agg, &total, &q(4), &q(4), &rq) {
            break agg;
        }
        eps = eps * Rational::pow2(-1);
    };
    let pb = PricedBundling::new(bundles, vec![v - &eps; nb]);
    let outcome = lift_high_demand(market, &pb)?;
    let welfare = assert_equilibrium(market, &outcome, "general_sqrt");
    assert!(welfare >= aggregate);
    let bound = BoundCheck::new("aggregate price >= sum/(4 sqrt(r) + 4)", &aggregate, &total, true);
    Ok(SqrtResult { outcome, high_demand: pb, r, epsilon: eps, aggregate, bound })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AkTrace {
    pub k: usize,
    /// Per-consumer allocation; consumers not chosen hold nothing.
    pub allocation: Vec<ItemSet>,
    /// Chosen `(consumer, bundle, value)` per step.
    pub steps: Vec<(usize, ItemSet, Rational)>,
    /// Unallocated items before the first step and after every step.
    pub remaining: Vec<ItemSet>,
}

impl AkTrace {
    pub fn welfare(&self) -> Rational {
        self.steps.iter().map(|(_, _, v)| v).sum()
    }
}

/// Greedy over (unallocated consumer, bundle of size in `[k, 2k)` from the
/// remaining items), taking the highest value each step, lowest consumer then
/// lexicographically smallest bundle on ties.
pub fn greedy_ak(market: &Market, k: usize) -> Result<AkTrace> {
    let (m, n) = (market.m(), market.n());
    if k == 0 || k > m {
        return Err(Error::InvalidParameter(format!("bundle size {k} outside [1, {m}]")));
    }
    let needed = (n as u128) * (n as u128) << m;
    if needed > DEFAULT_BUDGET {
        return Err(Error::Budget { what: "greedy subset enumeration", needed, budget: DEFAULT_BUDGET });
    }
    let mut pool = market.full();
    let mut free: Vec<usize> = (0..n).collect();
    let mut trace = AkTrace { k, allocation: vec![ItemSet::EMPTY; n], steps: vec![], remaining: vec![pool] };
    while pool.len() >= k && !free.is_empty() {
        let mut best: Option<(usize, ItemSet, Rational)> = None;
        for &i in &free {
            for a in pool.subsets() {
                if a.len() < k || a.len() >= 2 * k {
                    continue;
                }
                let val = market.value(i, a);
                let better = match &best {
                    None => true,
                    Some((bi, ba, bv)) => val > *bv || (val == *bv && i == *bi && lex_cmp(a, *ba).is_lt()),
                };
                if better {
                    best = Some((i, a, val));
                }
            }
        }
        let (i, a, val) = best.expect("the pool holds at least k items");
        free.retain(|&x| x != i);
        pool = pool.minus(a);
        trace.allocation[i] = a;
        trace.steps.push((i, a, val));
        trace.remaining.push(pool);
    }
    Ok(trace)
}

/// Best welfare of an allocation of `items` to `consumers` in which every
/// nonempty part has size in `[k, 2k)`; items may stay unallocated.
pub fn restricted_w(market: &Market, k: usize, items: ItemSet, consumers: ItemSet) -> Rational {
    let m = market.m();
    let mut tables = market.value_tables();
    tables.push(vec![Rational::zero(); 1 << m]);
    let n = market.n();
    let allowed = |i: usize, s: ItemSet| {
        i == n || s.is_empty() || (consumers.contains(i) && s.is_subset(items) && s.len() >= k && s.len() < 2 * k)
    };
    welfare_opt_filtered(&tables, m, allowed).expect("leaving everything unallocated is allowed").0
}

#[derive(Clone, Debug)]
pub struct M23Result {
    pub outcome: Outcome,
    pub welfare: Rational,
    /// `(label, welfare)` of every verified candidate, grand bundle first.
    pub candidates: Vec<(String, Rational)>,
    pub chosen: usize,
    /// `welfare ≥ OPT/(40·m^{2/3}·log₂ m)`, checked in floating point and
    /// only reported; `None` when the optimum was not computed.
    pub logged_bound: Option<BoundCheck>,
}

/// Runs greedy → log binning → square-root bundling for every
/// `k ≤ ⌈m^{1/3}⌉` and keeps the best of those and the grand bundle.
pub fn general_m23(market: &Market) -> Result<M23Result> {
    let ks: Vec<usize> = (1..=ceil_cbrt(market.m())).collect();
    let per_k: Vec<Result<Option<(String, Outcome)>>> = ks
        .par_iter()
        .map(|&k| {
            let trace = greedy_ak(market, k)?;
            let lb = log_bin(market, &trace.allocation, BinMode::ByValue);
            let Some(v) = lb.v else { return Ok(None) };
            let res = general_sqrt(market, &lb.filtered, &v)?;
            Ok(Some((format!("k={k}"), res.outcome)))
        })
        .collect();
    let mut cands = vec![("grand".to_string(), grand_bundle_outcome(market))];
    for c in per_k {
        if let Some(c) = c? {
            cands.push(c);
        }
    }
    let mut candidates: Vec<(String, Rational)> = Vec::new();
    let mut chosen = 0;
    for (j, (label, out)) in cands.iter().enumerate() {
        let w = assert_equilibrium(market, out, "general_m23");
        if j > 0 && w > candidates[chosen].1 {
            chosen = j;
        }
        candidates.push((label.clone(), w));
    }
    let welfare = candidates[chosen].1.clone();
    let logged_bound = welfare_opt(market).ok().map(|(opt, _)| {
        let m = market.m() as f64;
        let factor = 40.0 * m.powf(2.0 / 3.0) * m.log2().max(1.0);
        let holds = welfare.to_f64() * factor >= opt.to_f64() * (1.0 - 1e-12);
        BoundCheck::new("welfare >= OPT/(40 m^(2/3) log2 m) [floating point]", &welfare, &opt, holds)
    });
    Ok(M23Result { outcome: cands.swap_remove(chosen).1, welfare, candidates, chosen, logged_bound })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreedySplit {
    pub allocation: Vec<ItemSet>,
    /// Consumers whose budget is exhausted by their greedy share.
    pub exhausted: ItemSet,
    pub non_exhausted: ItemSet,
    pub case: u8,
    /// Case 1: the price shared by the chosen budget bin.
    pub bin_value: Option<Rational>,
    /// Case 1: consumers of the chosen bin.
    pub bin: Vec<usize>,
    /// Case 2: the consumer whose bundle absorbs the leftover items.
    pub sink: Option<usize>,
    /// Case 2: the sink had to be merged with other bundles to keep an equilibrium.
    pub repaired: bool,
}

#[derive(Clone, Debug)]
pub struct BudgetAdditiveResult {
    pub outcome: Outcome,
    pub split: GreedySplit,
    pub partial: PartialCbe,
    pub opt: Rational,
    pub welfare: Rational,
    /// Greedy welfare is at least OPT/4.
    pub greedy_bound: BoundCheck,
    /// The case-specific guarantee on the partial revenue.
    pub case_bound: BoundCheck,
    pub bound: BoundCheck,
}

fn budget_parts(market: &Market) -> Result<Vec<(&Vec<Rational>, &Rational)>> {
    market
        .consumers()
        .iter()
        .enumerate()
        .map(|(i, c)| match &c.valuation {
            Valuation::BudgetAdditive { weights, budget } => Ok((weights, budget)),
            _ => Err(Error::Precondition(format!("consumer {i} is not budget-additive"))),
        })
        .collect()
}

/// Items in label order, each to the consumer with the largest marginal value
/// under doubled budgets (lowest index on ties).
pub fn budget_greedy(market: &Market) -> Result<Vec<ItemSet>> {
    let parts = budget_parts(market)?;
    let n = market.n();
    let mut alloc = vec![ItemSet::EMPTY; n];
    let mut sums = vec![Rational::zero(); n];
    for j in 0..market.m() {
        let mut best: Option<(usize, Rational)> = None;
        for (i, (w, b)) in parts.iter().enumerate() {
            let cap = *b * q(2);
            let after = Rational::min_of(&(&sums[i] + &w[j]), &cap).clone();
            let before = Rational::min_of(&sums[i], &cap).clone();
            let gain = after - before;
            if best.as_ref().is_none_or(|(_, g)| gain > *g) {
                best = Some((i, gain));
            }
        }
        let (i, _) = best.expect("at least one consumer");
        alloc[i] = alloc[i].with(j);
        sums[i] += &parts[i].0[j];
    }
    Ok(alloc)
}

/// For non-exhausted consumers, every item they hold is worth at least as much
/// to them as to any other non-exhausted consumer.
pub fn greedy_item_dominance(market: &Market, split: &GreedySplit) -> bool {
    split.non_exhausted.iter().all(|i| {
        split.allocation[i].iter().all(|j| {
            let s = ItemSet::singleton(j);
            split.non_exhausted.iter().all(|h| market.value(i, s) >= market.value(h, s))
        })
    })
}

/// Budget-additive markets: greedy under doubled budgets, then either sell the
/// shares of a budget class at a common price or sell each non-exhausted
/// consumer its share at value, and lift the resulting partial equilibrium.
pub fn budget_additive_cbe(market: &Market) -> Result<BudgetAdditiveResult> {
    let parts = budget_parts(market)?;
    let (opt, _) = welfare_opt(market)?;
    let alloc = budget_greedy(market)?;
    let m = market.m();
    let vals: Vec<Rational> = alloc.iter().enumerate().map(|(i, a)| market.value(i, *a)).collect();
    let total: Rational = vals.iter().sum();
    let exhausted = ItemSet::from_items((0..market.n()).filter(|&i| vals[i] == *parts[i].1));
    let non_exhausted = ItemSet::full(market.n()).minus(exhausted);
    let w_e: Rational = exhausted.iter().map(|i| &vals[i]).sum();
    let greedy_bound = BoundCheck::new("greedy welfare >= OPT/4", &total, &opt, &total * q(4) >= opt);
    let mut split = GreedySplit {
        allocation: alloc.clone(),
        exhausted,
        non_exhausted,
        case: 0,
        bin_value: None,
        bin: vec![],
        sink: None,
        repaired: false,
    };
    let partial = if !total.is_positive() {
        let out = grand_bundle_outcome(market);
        PartialCbe { pb: out.priced(), allocation: out.allocation, members: ItemSet::full(market.n()) }
    } else if &w_e * q(2) >= total {
        split.case = 1;
        case_one(market, &parts, &alloc, &w_e, &mut split)
    } else {
        split.case = 2;
        case_two(market, &alloc, &mut split)
    };
    partial.validate(market)?;
    let revenue = partial.revenue();
    let case_bound = match split.case {
        1 => BoundCheck::new(
            "partial revenue >= OPT/(32(log2 m + 2))",
            &revenue,
            &opt,
            at_least_over_log(&revenue, &opt, &q(32), &Rational::from(m.max(1)), &q(2)),
        ),
        2 => BoundCheck::new("partial revenue >= OPT/8", &revenue, &opt, &revenue * q(8) >= opt),
        _ => BoundCheck::new("zero market", &revenue, &opt, true),
    };
    let outcome = lift_partial(market, &partial)?;
    let welfare = assert_equilibrium(market, &outcome, "budget_additive_cbe");
    let holds = at_least_over_log(&welfare, &opt, &q(32), &Rational::from(m.max(1)), &q(2));
    let bound = BoundCheck::new("welfare >= OPT/(32(log2 m + 2))", &welfare, &opt, holds);
    Ok(BudgetAdditiveResult { outcome, split, partial, opt, welfare, greedy_bound, case_bound, bound })
}

fn case_one(
    market: &Market,
    parts: &[(&Vec<Rational>, &Rational)],
    alloc: &[ItemSet],
    w_e: &Rational,
    split: &mut GreedySplit,
) -> PartialCbe {
    let tau = w_e / Rational::from(2 * market.m());
    let mut bins: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in split.exhausted.iter() {
        let b = parts[i].1;
        if b.is_positive() && *b >= tau {
            let mut j = 0;
            while *b >= &tau * Rational::pow2(j as i64 + 1) {
                j += 1;
            }
            bins.entry(j).or_default().push(i);
        }
    }
    let mut best: Option<(Rational, usize)> = None;
    for (j, members) in &bins {
        let sum: Rational = members.iter().map(|&i| parts[i].1).sum();
        if best.as_ref().is_none_or(|(s, _)| sum >= *s) {
            best = Some((sum, *j));
        }
    }
    let members = bins[&best.expect("some exhausted consumer has a large budget").1].clone();
    let price = members.iter().map(|&i| parts[i].1.clone()).min().unwrap();
    let mut bundles: Vec<ItemSet> = members.iter().map(|&i| alloc[i]).collect();
    let covered = bundles.iter().fold(ItemSet::EMPTY, |a, b| a.union(*b));
    bundles[0] = bundles[0].union(market.full().minus(covered));
    let mut allocation = vec![ItemSet::EMPTY; market.n()];
    for (k, &i) in members.iter().enumerate() {
        allocation[i] = ItemSet::singleton(k);
    }
    split.bin_value = Some(price.clone());
    split.bin = members.clone();
    PartialCbe {
        pb: PricedBundling::new(bundles, vec![price; members.len()]),
        allocation,
        members: ItemSet::from_items(members),
    }
}

fn priced_at_value(market: &Market, owners: &[(usize, ItemSet)], members: ItemSet) -> PartialCbe {
    let mut allocation = vec![ItemSet::EMPTY; market.n()];
    let mut bundles = Vec::new();
    let mut prices = Vec::new();
    for &(i, b) in owners {
        allocation[i] = ItemSet::singleton(bundles.len());
        bundles.push(b);
        prices.push(market.value(i, b));
    }
    PartialCbe { pb: PricedBundling::new(bundles, prices), allocation, members }
}

fn case_two(market: &Market, alloc: &[ItemSet], split: &mut GreedySplit) -> PartialCbe {
    let ebar = split.non_exhausted;
    let held = ebar.iter().fold(ItemSet::EMPTY, |a, i| a.union(alloc[i]));
    let rest = market.full().minus(held);
    let first_max = |f: &dyn Fn(usize) -> Rational| {
        let mut best: Option<(usize, Rational)> = None;
        for i in ebar.iter() {
            let v = f(i);
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((i, v));
            }
        }
        best.unwrap().0
    };
    let sink = first_max(&|i| market.value(i, alloc[i].union(rest)));
    let build = |c: usize| {
        let owners: Vec<(usize, ItemSet)> = ebar
            .iter()
            .map(|i| (i, if i == c { alloc[i].union(rest) } else { alloc[i] }))
            .filter(|(_, b)| !b.is_empty())
            .collect();
        priced_at_value(market, &owners, ebar)
    };
    for c in std::iter::once(sink).chain(ebar.iter()) {
        let p = build(c);
        if p.validate(market).is_ok() {
            split.sink = Some(c);
            return p;
        }
    }
    // Grow the sink bundle by the shares of whoever values it most until its
    // top valuer already contributes to it.
    let mut bundle = alloc[sink].union(rest);
    let mut absorbed = ItemSet::singleton(sink);
    let holder = loop {
        let h = first_max(&|i| market.value(i, bundle));
        let h = if market.value(sink, bundle) == market.value(h, bundle) { sink } else { h };
        if absorbed.contains(h) || alloc[h].is_empty() {
            break h;
        }
        absorbed = absorbed.with(h);
        bundle = bundle.union(alloc[h]);
    };
    let mut owners: Vec<(usize, ItemSet)> =
        ebar.iter().filter(|i| !absorbed.contains(*i) && !alloc[*i].is_empty()).map(|i| (i, alloc[i])).collect();
    owners.push((holder, bundle));
    owners.sort_by_key(|(i, _)| *i);
    split.sink = Some(holder);
    split.repaired = true;
    priced_at_value(market, &owners, ebar)
}
