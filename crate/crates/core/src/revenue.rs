//! Revenue guarantees for weighted matroid rank valuations: equilibria with a
//! reserve price, the uniform-matroid construction, and the extra-consumer
//! iteration for consumers sharing one matroid.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::Serialize;

use crate::bounds::{at_least_over_log, floor_log2, BoundCheck};
use crate::equilibrium::{ce_exists, verify_cbe, verify_ce};
use crate::error::{Error, Result};
use crate::lifting::{lift_partial, PartialCbe};
use crate::market::{welfare_opt, welfare_opt_tables, ItemSet, Market, Matroid, Outcome, PricedBundling, Valuation};
use crate::numeric::Rational;

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

/// Constant `c` in the guarantee `revenue ≥ OPT/(c(log₂ m + 2))`.
pub const REVENUE_CONSTANT: i64 = 4;

fn matroid_parts(market: &Market) -> Result<Vec<(&Matroid, &Vec<Rational>)>> {
    market
        .consumers()
        .iter()
        .map(|c| match &c.valuation {
            Valuation::MatroidRank { matroid, weights } => Ok((matroid, weights)),
            other => Err(Error::Precondition(format!(
                "consumer {} has a {} valuation; weighted matroid rank is required",
                c.name,
                other.kind()
            ))),
        })
        .collect()
}

/// Greedy maximum-weight independent subset of `s` over positive weights; its
/// weight is the valuation of `s`.
fn greedy_basis(matroid: &Matroid, weights: &[Rational], s: ItemSet) -> ItemSet {
    let mut items: Vec<usize> = s.iter().filter(|&j| weights[j].is_positive()).collect();
    items.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));
    let mut acc = ItemSet::EMPTY;
    for j in items {
        if matroid.is_independent(acc.with(j)) {
            acc = acc.with(j);
        }
    }
    acc
}

fn weight_of(weights: &[Rational], s: ItemSet) -> Rational {
    s.iter().map(|j| &weights[j]).sum()
}

fn price_of(prices: &[Rational], s: ItemSet) -> Rational {
    s.iter().map(|j| &prices[j]).sum()
}

/// Items of an optimal allocation binned by the weight their holder gets from them.
#[derive(Clone, Debug)]
pub struct ItemBin {
    /// Smallest weight in the heaviest bin; `None` when the optimum is zero.
    pub v: Option<Rational>,
    /// `(item, consumer)` pairs in the heaviest bin.
    pub members: Vec<(usize, usize)>,
    pub weight: Rational,
    /// `2(⌊log₂ m⌋ + 2)`: the binned weight is at least `OPT/alpha`.
    pub alpha: Rational,
}

/// Drops items worth less than `OPT/2m` to their holder, groups the rest into
/// doubling bins anchored at `OPT/2m`, and keeps the heaviest bin (the higher
/// one on ties).
pub fn item_bin(market: &Market, allocation: &[ItemSet]) -> Result<ItemBin> {
    let parts = matroid_parts(market)?;
    let m = market.m();
    let alpha = q(2 * (floor_log2(m.max(1)) as i64 + 2));
    let mut weighted = Vec::new();
    for (i, (mat, w)) in parts.iter().enumerate() {
        for j in greedy_basis(mat, w, allocation[i]).iter() {
            weighted.push((j, i, w[j].clone()));
        }
    }
    let total: Rational = weighted.iter().map(|(_, _, w)| w).sum();
    if !total.is_positive() {
        return Ok(ItemBin { v: None, members: Vec::new(), weight: Rational::zero(), alpha });
    }
    let tau = &total / q(2 * m as i64);
    let mut bins: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (k, (_, _, w)) in weighted.iter().enumerate() {
        if *w >= tau {
            let mut b = 0;
            while *w >= &tau * Rational::pow2(b as i64 + 1) {
                b += 1;
            }
            bins.entry(b).or_default().push(k);
        }
    }
    let mut best: Option<(Rational, usize)> = None;
    for (b, ks) in &bins {
        let s: Rational = ks.iter().map(|&k| &weighted[k].2).sum();
        if best.as_ref().is_none_or(|(t, _)| s >= *t) {
            best = Some((s, *b));
        }
    }
    let (weight, b) = best.expect("a positive total leaves some item above OPT/2m");
    let ks = &bins[&b];
    let v = ks.iter().map(|&k| weighted[k].2.clone()).min();
    let members = ks.iter().map(|&k| (weighted[k].0, weighted[k].1)).collect();
    assert!(&weight * &alpha >= total, "heaviest bin below OPT/alpha");
    Ok(ItemBin { v, members, weight, alpha })
}

/// A competitive equilibrium in which every item costs at least `q`, and
/// unsold items cost exactly `q`.
#[derive(Clone, Debug)]
pub struct ReserveEquilibrium {
    pub q: Rational,
    pub prices: Vec<Rational>,
    pub allocation: Vec<ItemSet>,
    pub unallocated: ItemSet,
    pub opt: Rational,
    pub bin: ItemBin,
}

impl ReserveEquilibrium {
    pub fn unallocated_count(&self) -> usize {
        self.unallocated.len()
    }

    pub fn revenue(&self) -> Rational {
        self.allocation.iter().map(|s| price_of(&self.prices, *s)).sum()
    }

    /// The allocation in the market with the extra reserve consumer appended.
    pub fn augmented_allocation(&self) -> Vec<ItemSet> {
        let mut a = self.allocation.clone();
        a.push(self.unallocated);
        a
    }

    pub fn bound(&self, m: usize) -> BoundCheck {
        let rev = self.revenue();
        let holds = at_least_over_log(&rev, &self.opt, &q(REVENUE_CONSTANT), &Rational::from(m), &q(2));
        BoundCheck::new(format!("reserve revenue >= OPT/({REVENUE_CONSTANT}(log2 m + 2))"), &rev, &self.opt, holds)
    }
}

/// The consumers `members` of `market` plus one additive consumer valuing every item at `v`.
pub fn augmented_market(market: &Market, members: &[usize], v: &Rational) -> Market {
    let mut vals: Vec<Valuation> = members.iter().map(|&i| market.valuation(i).clone()).collect();
    vals.push(Valuation::Additive(vec![v.clone(); market.m()]));
    Market::with_default_labels(market.m(), vals).expect("augmenting a valid market")
}

/// CE of an augmented market that, among welfare-optimal allocations, leaves
/// the fewest items with the reserve consumer. Items it holds are priced at `v`.
fn reserve_ce(aug: &Market, v: &Rational) -> Result<(Vec<Rational>, Vec<ItemSet>)> {
    let m = aug.m();
    let extra = aug.n() - 1;
    let ce = ce_exists(aug)?;
    let mut prices = ce.prices.expect("the augmented market has gross-substitutes valuations, so its configuration LP is integral");
    let tables = aug.value_tables();
    // Welfare values are multiples of 1/D, so a bonus of ρ|S| with ρ(m+1) < 1/D
    // only breaks ties among optima.
    let d = tables.iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let rho = Rational::from_big(BigInt::one(), d * BigInt::from(m + 1)).expect("nonzero denominator");
    let shifted: Vec<Vec<Rational>> = tables
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if i == extra {
                t.clone()
            } else {
                t.iter().enumerate().map(|(s, x)| x + &rho * Rational::from(ItemSet(s as u32).len())).collect()
            }
        })
        .collect();
    let (_, alloc) = welfare_opt_tables(&shifted, m, |_, _| true);
    assert_eq!(aug.welfare(&alloc), ce.integral, "tie-breaking bonus changed the optimum");
    for j in alloc[extra].iter() {
        assert!(prices[j] <= *v, "reserve consumer holds an item priced above v");
        prices[j] = v.clone();
    }
    assert!(prices.iter().all(|p| p >= v), "an item sold to an original consumer is priced below the reserve");
    let rep = verify_ce(aug, &prices, &alloc)?;
    assert!(rep.pass, "reserve prices do not support the augmented optimum");
    Ok((prices, alloc))
}

/// Equilibrium with reserve `v`, where `v` is the floor of the heaviest
/// per-item weight bin of an optimal allocation.
pub fn reserve_equilibrium(market: &Market) -> Result<ReserveEquilibrium> {
    matroid_parts(market)?;
    let (opt, opt_alloc) = welfare_opt(market)?;
    let bin = item_bin(market, &opt_alloc)?;
    let v = bin.v.clone().unwrap_or_else(Rational::zero);
    let members: Vec<usize> = (0..market.n()).collect();
    let aug = augmented_market(market, &members, &v);
    let (prices, mut alloc) = reserve_ce(&aug, &v)?;
    let unallocated = alloc.pop().expect("reserve consumer");
    let two_v_count = &v * q(2 * bin.members.len() as i64);
    assert!(two_v_count >= bin.weight, "binned weights exceed twice the bin floor");
    Ok(ReserveEquilibrium { q: v, prices, allocation: alloc, unallocated, opt, bin })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RevenueRoute {
    /// Every value is zero; the grand bundle is given away.
    Zero,
    /// Most reserve revenue comes from consumers that exhaust their rank.
    Exhausted,
    /// Most reserve revenue comes from consumers below their rank.
    Slack,
    /// The extra-consumer iteration for a common matroid.
    ExtraConsumer,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum ExtraStep {
    /// A leftover item joins a bundle without raising its rank.
    Absorb { item: usize, consumer: usize },
    /// The most valuable leftover item joins a bundle whose price rises by its weight.
    Raise { item: usize, consumer: usize, weight: Rational },
}

#[derive(Clone, Debug)]
pub struct MatroidRevenueResult {
    pub outcome: Outcome,
    pub route: RevenueRoute,
    pub reserve: ReserveEquilibrium,
    /// Revenue of the partial equilibrium (or extra-consumer solution) that was lifted.
    pub partial_revenue: Rational,
    /// Consumer holding the leftover items, for the uniform construction.
    pub sink: Option<usize>,
    /// The literal sink choice failed and another consumer was used.
    pub sink_repaired: bool,
    pub steps: Vec<ExtraStep>,
    pub opt: Rational,
    pub welfare: Rational,
    pub revenue: Rational,
    pub bound: BoundCheck,
}

fn zero_outcome(market: &Market) -> Outcome {
    let mut allocation = vec![ItemSet::EMPTY; market.n()];
    allocation[0] = ItemSet::singleton(0);
    Outcome { bundles: vec![market.full()], prices: vec![Rational::zero()], allocation }
}

fn finish(
    market: &Market,
    outcome: Outcome,
    route: RevenueRoute,
    reserve: ReserveEquilibrium,
    partial_revenue: Rational,
) -> MatroidRevenueResult {
    let report = verify_cbe(market, &outcome).expect("well-formed outcome");
    assert!(report.pass, "revenue construction produced an outcome that is not a bundling equilibrium");
    let revenue = outcome.revenue();
    assert!(revenue >= partial_revenue, "lifting lowered the revenue");
    assert!(revenue <= report.welfare, "revenue above welfare in equilibrium");
    let opt = reserve.opt.clone();
    let holds = at_least_over_log(&revenue, &opt, &q(REVENUE_CONSTANT), &Rational::from(market.m()), &q(2));
    let bound = BoundCheck::new(format!("revenue >= OPT/({REVENUE_CONSTANT}(log2 m + 2))"), &revenue, &opt, holds);
    MatroidRevenueResult {
        outcome,
        route,
        reserve,
        partial_revenue,
        sink: None,
        sink_repaired: false,
        steps: Vec::new(),
        opt,
        welfare: report.welfare,
        revenue,
        bound,
    }
}

fn partial_from(market: &Market, owners: &[(usize, ItemSet, Rational)], members: ItemSet) -> PartialCbe {
    let mut allocation = vec![ItemSet::EMPTY; market.n()];
    let mut bundles = Vec::new();
    let mut prices = Vec::new();
    for (i, b, p) in owners {
        if b.is_empty() {
            continue;
        }
        allocation[*i] = allocation[*i].with(bundles.len());
        bundles.push(*b);
        prices.push(p.clone());
    }
    PartialCbe { pb: PricedBundling::new(bundles, prices), allocation, members }
}

fn first_max(candidates: impl Iterator<Item = usize>, f: impl Fn(usize) -> Rational) -> Option<usize> {
    let mut best: Option<(usize, Rational)> = None;
    for i in candidates {
        let v = f(i);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Bundling equilibrium for consumers with weighted rank functions of
/// (possibly different) uniform matroids.
pub fn uniform_matroid_revenue_cbe(market: &Market) -> Result<MatroidRevenueResult> {
    let parts = matroid_parts(market)?;
    let ranks: Vec<usize> = parts
        .iter()
        .map(|(mat, _)| match mat {
            Matroid::Uniform(k) => Ok(*k),
            Matroid::Family(_) => Err(Error::Precondition("every matroid must be uniform".into())),
        })
        .collect::<Result<_>>()?;
    let reserve = reserve_equilibrium(market)?;
    if !reserve.opt.is_positive() {
        let out = zero_outcome(market);
        return Ok(finish(market, out, RevenueRoute::Zero, reserve, Rational::zero()));
    }
    let n = market.n();
    let w = &reserve.allocation;
    let p = &reserve.prices;
    let exhausted = ItemSet::from_items((0..n).filter(|&i| w[i].len() == ranks[i]));
    let slack = ItemSet::full(n).minus(exhausted);
    let rev_of = |set: ItemSet| -> Rational { set.iter().map(|i| price_of(p, w[i])).sum() };
    let total = reserve.revenue();
    let take_exhausted = !exhausted.is_empty() && (slack.is_empty() || rev_of(exhausted) * q(2) >= total);
    if take_exhausted {
        let members: Vec<usize> = exhausted.iter().collect();
        let aug = augmented_market(market, &members, &reserve.q);
        let (prices, alloc) = reserve_ce(&aug, &reserve.q)?;
        for (k, &i) in members.iter().enumerate() {
            assert_eq!(alloc[k].len(), ranks[i], "extending the item set left consumer {i} below its rank");
        }
        let rest = *alloc.last().unwrap();
        let sink = first_max(members.iter().copied(), |i| Rational::from(ranks[i])).unwrap();
        let owners: Vec<(usize, ItemSet, Rational)> = members
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let b = if i == sink { alloc[k].union(rest) } else { alloc[k] };
                (i, b, price_of(&prices, alloc[k]))
            })
            .collect();
        let partial = partial_from(market, &owners, exhausted);
        partial.validate(market)?;
        let partial_revenue = partial.revenue();
        let out = lift_partial(market, &partial)?;
        let mut res = finish(market, out, RevenueRoute::Exhausted, reserve, partial_revenue);
        res.sink = Some(sink);
        return Ok(res);
    }
    let held = slack.iter().fold(ItemSet::EMPTY, |a, i| a.union(w[i]));
    let rest = market.full().minus(held);
    let sink = first_max(slack.iter(), |i| market.value(i, w[i].union(rest))).unwrap();
    let build = |c: usize| {
        let owners: Vec<(usize, ItemSet, Rational)> = slack
            .iter()
            .map(|i| {
                if i == c {
                    let b = w[i].union(rest);
                    (i, b, market.value(i, b))
                } else {
                    (i, w[i], price_of(p, w[i]))
                }
            })
            .collect();
        partial_from(market, &owners, slack)
    };
    let mut chosen = None;
    for c in std::iter::once(sink).chain(slack.iter()) {
        let partial = build(c);
        if partial.validate(market).is_ok() {
            chosen = Some((c, partial));
            break;
        }
    }
    let (c, partial) = match chosen {
        Some(found) => found,
        None => merged_sink(market, w, p, slack, w[sink].union(rest), sink),
    };
    let partial_revenue = partial.revenue();
    let out = lift_partial(market, &partial)?;
    let mut res = finish(market, out, RevenueRoute::Slack, reserve, partial_revenue);
    res.sink = Some(c);
    res.sink_repaired = c != sink;
    Ok(res)
}

/// Grows `bundle` by the holdings of whoever values it most until that
/// consumer's own holding is already inside; the top valuer then buys it at
/// its value. Slack consumers value every item outside their holding at no
/// more than its price, so the remaining bundles stay unattractive.
fn merged_sink(
    market: &Market,
    w: &[ItemSet],
    p: &[Rational],
    slack: ItemSet,
    mut bundle: ItemSet,
    start: usize,
) -> (usize, PartialCbe) {
    let mut absorbed = ItemSet::singleton(start);
    let holder = loop {
        let top = first_max(slack.iter(), |i| market.value(i, bundle)).unwrap();
        let best = market.value(top, bundle);
        let h = absorbed.iter().find(|&i| market.value(i, bundle) == best).unwrap_or(top);
        if absorbed.contains(h) || w[h].is_empty() {
            break h;
        }
        absorbed = absorbed.with(h);
        bundle = bundle.union(w[h]);
    };
    let mut owners: Vec<(usize, ItemSet, Rational)> = slack
        .iter()
        .filter(|&i| !absorbed.contains(i) && i != holder)
        .map(|i| (i, w[i], price_of(p, w[i])))
        .collect();
    owners.push((holder, bundle, market.value(holder, bundle)));
    owners.sort_by_key(|(i, _, _)| *i);
    let partial = partial_from(market, &owners, slack);
    if let Err(e) = partial.validate(market) {
        panic!("merged leftover bundle is not a partial equilibrium: {e}");
    }
    (holder, partial)
}

/// An allocation of the items to the consumers plus a reserve holder, with
/// item prices, bundle prices and the reserve `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtraConsumerState {
    pub bundles: Vec<ItemSet>,
    pub extra: ItemSet,
    pub item_prices: Vec<Rational>,
    pub bundle_prices: Vec<Rational>,
    pub q: Rational,
    pub ranks: Vec<usize>,
    pub weights: Vec<Vec<Rational>>,
    pub matroid: Matroid,
}

impl ExtraConsumerState {
    pub fn revenue(&self) -> Rational {
        self.bundle_prices.iter().sum()
    }

    pub fn is_terminal(&self) -> bool {
        self.extra.is_empty() || self.q.is_zero()
    }

    fn m(&self) -> usize {
        self.item_prices.len()
    }

    pub fn value(&self, i: usize, s: ItemSet) -> Rational {
        weight_of(&self.weights[i], greedy_basis(&self.matroid, &self.weights[i], s))
    }

    /// Checks the three defining properties by enumerating independent sets.
    pub fn check_properties(&self) -> std::result::Result<(), String> {
        let m = self.m();
        let independent = self.matroid.independent_sets(m);
        for i in 0..self.bundles.len() {
            let own = self.value(i, self.bundles[i]) - &self.bundle_prices[i];
            // Prices are nonnegative, so some independent set attains the best item-price profit.
            for u in &independent {
                let alt = weight_of(&self.weights[i], *u) - price_of(&self.item_prices, *u);
                if alt > own {
                    return Err(format!("consumer {i} prefers {u:?} at item prices"));
                }
                if u.is_subset(self.bundles[i]) && price_of(&self.item_prices, *u) > self.bundle_prices[i] {
                    return Err(format!("bundle {i} is cheaper than its independent subset {u:?}"));
                }
            }
            if self.ranks[i] != self.matroid.rank(self.bundles[i]) {
                return Err(format!("stale rank for consumer {i}"));
            }
        }
        for j in 0..m {
            if self.extra.contains(j) && self.item_prices[j] != self.q {
                return Err(format!("leftover item {j} is not priced at the reserve"));
            }
            if self.item_prices[j] < self.q {
                return Err(format!("item {j} is priced below the reserve"));
            }
        }
        Ok(())
    }
}

fn common_matroid(market: &Market) -> Result<(Matroid, Vec<Vec<Rational>>)> {
    let parts = matroid_parts(market)?;
    let mat = parts[0].0;
    if parts.iter().any(|(m, _)| *m != mat) {
        return Err(Error::Precondition("all consumers must share one matroid".into()));
    }
    Ok((mat.clone(), parts.iter().map(|(_, w)| (*w).clone()).collect()))
}

/// Starting extra-consumer solution: the reserve equilibrium with additive bundle prices.
pub fn extra_consumer_start(market: &Market) -> Result<(ExtraConsumerState, ReserveEquilibrium)> {
    let (matroid, weights) = common_matroid(market)?;
    let reserve = reserve_equilibrium(market)?;
    let state = ExtraConsumerState {
        bundles: reserve.allocation.clone(),
        extra: reserve.unallocated,
        item_prices: reserve.prices.clone(),
        bundle_prices: reserve.allocation.iter().map(|s| price_of(&reserve.prices, *s)).collect(),
        q: reserve.q.clone(),
        ranks: reserve.allocation.iter().map(|s| matroid.rank(*s)).collect(),
        weights,
        matroid,
    };
    if let Err(e) = state.check_properties() {
        panic!("starting extra-consumer solution is invalid: {e}");
    }
    Ok((state, reserve))
}

/// One iteration: moves a leftover item to a consumer, lowering the reserve if needed.
pub fn extra_consumer_step(state: &ExtraConsumerState) -> Result<(ExtraConsumerState, ExtraStep)> {
    if state.is_terminal() {
        return Err(Error::Precondition("the step needs leftover items and a positive reserve".into()));
    }
    let n = state.bundles.len();
    let mut next = state.clone();
    let absorb = state
        .extra
        .iter()
        .find_map(|j| (0..n).find(|&i| state.matroid.rank(state.bundles[i].with(j)) == state.ranks[i]).map(|i| (j, i)));
    let step = if let Some((j, i)) = absorb {
        next.bundles[i] = state.bundles[i].with(j);
        next.extra = state.extra.without(j);
        ExtraStep::Absorb { item: j, consumer: i }
    } else {
        let mut best: Option<(usize, usize)> = None;
        for i in 0..n {
            for j in state.extra.iter() {
                if best.is_none_or(|(bi, bj)| state.weights[i][j] > state.weights[bi][bj]) {
                    best = Some((i, j));
                }
            }
        }
        let (i, j) = best.expect("leftover items exist");
        let wij = state.weights[i][j].clone();
        assert!(wij <= state.q, "a leftover item is worth more than the reserve");
        let grown = state.bundles[i].with(j);
        assert_eq!(state.value(i, grown), state.value(i, state.bundles[i]) + &wij, "rank-raising item did not add its weight");
        next.bundles[i] = grown;
        next.ranks[i] += 1;
        next.extra = state.extra.without(j);
        next.bundle_prices[i] += &wij;
        next.item_prices[j] = wij.clone();
        for k in next.extra.iter() {
            next.item_prices[k] = wij.clone();
        }
        next.q = wij.clone();
        ExtraStep::Raise { item: j, consumer: i, weight: wij }
    };
    if let Err(e) = next.check_properties() {
        panic!("extra-consumer step broke the invariants: {e}");
    }
    assert!(next.revenue() >= state.revenue(), "extra-consumer step lowered the revenue");
    Ok((next, step))
}

/// Converts a terminal extra-consumer solution into a bundling equilibrium. A
/// nonempty zero-priced leftover bundle goes to the consumer with the largest
/// marginal value for it.
pub fn extra_consumer_to_cbe(market: &Market, state: &ExtraConsumerState) -> Result<Outcome> {
    if !state.is_terminal() {
        return Err(Error::Precondition("leftover items remain at a positive reserve".into()));
    }
    let n = market.n();
    let mut bundles = Vec::new();
    let mut prices = Vec::new();
    let mut allocation = vec![ItemSet::EMPTY; n];
    for i in 0..n {
        if !state.bundles[i].is_empty() {
            allocation[i] = ItemSet::singleton(bundles.len());
            bundles.push(state.bundles[i]);
            prices.push(state.bundle_prices[i].clone());
        }
    }
    let mut out = Outcome { bundles, prices, allocation };
    if state.extra.is_empty() {
        let rep = verify_cbe(market, &out)?;
        assert!(rep.pass, "extra-consumer solution without leftovers is not an equilibrium");
        return Ok(out);
    }
    let k = out.bundles.len();
    out.bundles.push(state.extra);
    out.prices.push(Rational::zero());
    let mut order: Vec<usize> = (0..n).collect();
    let gain = |i: usize| state.value(i, state.bundles[i].union(state.extra)) - state.value(i, state.bundles[i]);
    order.sort_by_key(|&i| std::cmp::Reverse(gain(i)));
    for c in order {
        let mut cand = out.clone();
        cand.allocation[c] = cand.allocation[c].with(k);
        if verify_cbe(market, &cand)?.pass {
            return Ok(cand);
        }
    }
    panic!("no consumer can absorb the zero-priced leftover bundle");
}

/// Bundling equilibrium for consumers sharing one matroid, via the extra-consumer iteration.
pub fn common_matroid_revenue_cbe(market: &Market) -> Result<MatroidRevenueResult> {
    let (mut state, reserve) = extra_consumer_start(market)?;
    let start = state.revenue();
    let mut steps = Vec::new();
    while !state.is_terminal() {
        let (next, step) = extra_consumer_step(&state)?;
        state = next;
        steps.push(step);
        assert!(steps.len() <= market.m() + 1, "extra-consumer iteration exceeded m + 1 steps");
    }
    let out = extra_consumer_to_cbe(market, &state)?;
    assert_eq!(out.revenue(), state.revenue(), "conversion changed the revenue");
    let route = if reserve.opt.is_positive() { RevenueRoute::ExtraConsumer } else { RevenueRoute::Zero };
    let mut res = finish(market, out, route, reserve, start);
    res.steps = steps;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::cbe_search;
    use crate::instances::named;
    use crate::numeric::r;

    fn uniform(k: usize, w: &[i64]) -> Valuation {
        Valuation::MatroidRank { matroid: Matroid::Uniform(k), weights: w.iter().map(|&x| q(x)).collect() }
    }

    fn rank_one(m: usize) -> Matroid {
        let sets: Vec<ItemSet> = ItemSet::full(m).subsets().filter(|s| s.len() <= 1).collect();
        Matroid::family(m, &sets).unwrap()
    }

    fn free(m: usize) -> Matroid {
        Matroid::family(m, &ItemSet::full(m).subsets().collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn two_unit_demand_consumers() {
        let m = Market::with_default_labels(2, vec![uniform(1, &[1, 1]), uniform(1, &[1, 1])]).unwrap();
        let res = reserve_equilibrium(&m).unwrap();
        assert_eq!(res.q, q(1));
        assert_eq!(res.prices, vec![q(1), q(1)]);
        assert_eq!(res.unallocated_count(), 0);
        assert_eq!(res.revenue(), q(2));
        assert_eq!(res.opt, q(2));
        let aug = augmented_market(&m, &[0, 1], &res.q);
        assert!(verify_ce(&aug, &res.prices, &res.augmented_allocation()).unwrap().pass);
    }

    #[test]
    fn single_consumer_reserve() {
        let m = Market::with_default_labels(3, vec![uniform(2, &[4, 3, 1])]).unwrap();
        let res = reserve_equilibrium(&m).unwrap();
        assert!(res.prices.iter().all(|p| *p >= res.q));
        assert!(res.revenue() >= &res.q * q(res.allocation[0].len() as i64));
    }

    #[test]
    fn lower_bound_family_reserve_revenue_at_most_one() {
        for n in 2..=5 {
            let m = named::revenue_lb(n).unwrap();
            let res = reserve_equilibrium(&m).unwrap();
            assert!(res.revenue() <= q(1), "n = {n}: {}", res.revenue());
            assert!(res.bound(n).holds);
        }
    }

    #[test]
    fn item_bin_keeps_heaviest() {
        let m = Market::with_default_labels(3, vec![uniform(3, &[8, 1, 1])]).unwrap();
        let bin = item_bin(&m, &[ItemSet::full(3)]).unwrap();
        assert_eq!(bin.v, Some(q(8)));
        assert_eq!(bin.members, vec![(0, 0)]);
        assert_eq!(bin.alpha, q(6));
    }

    #[test]
    fn uniform_all_rank_one() {
        let m = Market::with_default_labels(2, vec![uniform(1, &[2, 2]), uniform(1, &[2, 2])]).unwrap();
        let res = uniform_matroid_revenue_cbe(&m).unwrap();
        assert_eq!(res.route, RevenueRoute::Exhausted);
        assert_eq!(res.revenue, q(4));
        assert!(res.bound.holds);
    }

    #[test]
    fn uniform_additive_plus_unit_demand() {
        let m = Market::with_default_labels(3, vec![uniform(3, &[1, 1, 1]), uniform(1, &[3, 2, 2])]).unwrap();
        let res = uniform_matroid_revenue_cbe(&m).unwrap();
        assert!(verify_cbe(&m, &res.outcome).unwrap().pass);
        assert!(res.bound.holds);
        assert!(res.revenue <= res.welfare);
    }

    #[test]
    fn uniform_lower_bound_family() {
        let m = named::revenue_lb(4).unwrap();
        let res = uniform_matroid_revenue_cbe(&m).unwrap();
        assert!(res.bound.holds);
        let best = cbe_search(&m).unwrap().best_revenue;
        assert!(res.revenue <= best);
        assert!(best <= q(1));
        assert!(res.opt > r(2, 1));
    }

    #[test]
    fn uniform_rejects_general_matroid() {
        let m = Market::with_default_labels(2, vec![Valuation::MatroidRank { matroid: rank_one(2), weights: vec![q(1), q(1)] }])
            .unwrap();
        assert!(matches!(uniform_matroid_revenue_cbe(&m), Err(Error::Precondition(_))));
    }

    #[test]
    fn free_matroid_start_gives_each_item_to_top_weight() {
        let mat = free(3);
        let vals = vec![
            Valuation::MatroidRank { matroid: mat.clone(), weights: vec![q(5), q(1), q(2)] },
            Valuation::MatroidRank { matroid: mat, weights: vec![q(1), q(4), q(3)] },
        ];
        let m = Market::with_default_labels(3, vals).unwrap();
        let (state, _) = extra_consumer_start(&m).unwrap();
        // Item 2 is worth 3 < v = 4 to its best consumer, so the reserve holder keeps it.
        assert_eq!(state.q, q(4));
        assert_eq!(state.bundles, vec![ItemSet::singleton(0), ItemSet::singleton(1)]);
        assert_eq!(state.extra, ItemSet::singleton(2));
        assert!(state.check_properties().is_ok());
        let (next, step) = extra_consumer_step(&state).unwrap();
        assert_eq!(step, ExtraStep::Raise { item: 2, consumer: 1, weight: q(3) });
        let out = extra_consumer_to_cbe(&m, &next).unwrap();
        assert_eq!(out.revenue(), next.revenue());
        assert_eq!(out.revenue(), state.revenue() + q(3));
    }

    #[test]
    fn rank_one_common_matroid_start() {
        let mat = rank_one(3);
        let vals = (0..3)
            .map(|i| Valuation::MatroidRank { matroid: mat.clone(), weights: vec![q(3 - i), q(2), q(1)] })
            .collect();
        let m = Market::with_default_labels(3, vals).unwrap();
        let (state, _) = extra_consumer_start(&m).unwrap();
        assert!(state.bundles.iter().all(|b| b.len() <= 1));
        let res = common_matroid_revenue_cbe(&m).unwrap();
        assert!(res.bound.holds);
    }

    fn hand_state(bundles: Vec<ItemSet>, extra: ItemSet, matroid: Matroid, weights: Vec<Vec<Rational>>, qv: Rational) -> ExtraConsumerState {
        let m = weights[0].len();
        let item_prices = vec![qv.clone(); m];
        ExtraConsumerState {
            bundle_prices: bundles.iter().map(|b| price_of(&item_prices, *b)).collect(),
            ranks: bundles.iter().map(|b| matroid.rank(*b)).collect(),
            bundles,
            extra,
            item_prices,
            q: qv,
            weights,
            matroid,
        }
    }

    #[test]
    fn case_one_absorbs_without_price_change() {
        let st = hand_state(vec![ItemSet::singleton(0)], ItemSet::singleton(1), rank_one(2), vec![vec![q(2), q(1)]], q(2));
        assert!(st.check_properties().is_ok());
        let (next, step) = extra_consumer_step(&st).unwrap();
        assert_eq!(step, ExtraStep::Absorb { item: 1, consumer: 0 });
        assert_eq!(next.bundle_prices, st.bundle_prices);
        assert_eq!(next.item_prices, st.item_prices);
        assert!(next.is_terminal());
    }

    #[test]
    fn case_two_lowers_reserve() {
        let st = hand_state(vec![ItemSet::singleton(0)], ItemSet::singleton(1), free(2), vec![vec![q(3), q(1)]], q(2));
        assert!(st.check_properties().is_ok());
        let (next, step) = extra_consumer_step(&st).unwrap();
        assert_eq!(step, ExtraStep::Raise { item: 1, consumer: 0, weight: q(1) });
        assert_eq!(next.q, q(1));
        assert_eq!(next.bundle_prices[0], q(3));
        assert!(extra_consumer_step(&next).is_err());
    }

    #[test]
    fn case_two_boundary_keeps_reserve() {
        let st = hand_state(
            vec![ItemSet::singleton(0), ItemSet::EMPTY],
            ItemSet::from_items([1, 2]),
            free(3),
            vec![vec![q(3), q(2), q(1)], vec![q(0), q(1), q(1)]],
            q(2),
        );
        assert!(st.check_properties().is_ok());
        let (next, _) = extra_consumer_step(&st).unwrap();
        assert_eq!(next.q, q(2));
        assert_eq!(next.item_prices[2], q(2));
    }

    #[test]
    fn zero_reserve_leftover_absorbed() {
        let st = hand_state(vec![ItemSet::singleton(0)], ItemSet::singleton(1), free(2), vec![vec![q(3), q(0)]], q(0));
        let m = Market::with_default_labels(2, vec![Valuation::MatroidRank { matroid: free(2), weights: vec![q(3), q(0)] }])
            .unwrap();
        let out = extra_consumer_to_cbe(&m, &st).unwrap();
        assert!(verify_cbe(&m, &out).unwrap().pass);
        assert_eq!(out.allocation[0], ItemSet::from_items([0, 1]));
    }
}
