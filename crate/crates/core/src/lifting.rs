//! Lifting a priced bundling to a bundling equilibrium: the price-raising
//! coarsening lift, its partial-equilibrium and high-demand corollaries, and
//! logarithmic binning of allocations.

use std::collections::BTreeMap;

use crate::bounds::floor_log2;
use crate::equilibrium::{check_tables, verify_cbe};
use crate::error::{Error, Result};
use crate::market::{blocks_of, bundle_table, demand_from_table, ItemSet, Market, Outcome, PricedBundling};
use crate::numeric::{LinearProgram, LpStatus, Rational, Rel, Sense};

/// Default number of candidate (coarsening, assignment) pairs examined by the exhaustive search.
pub const DEFAULT_LIFT_BUDGET: u128 = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FglStrategy {
    /// Exhaustive search for at most 6 input bundles, merge-and-raise (with the
    /// exhaustive search as fallback) above that.
    Auto,
    MergeRaise,
    Exhaustive,
}

#[derive(Clone, Debug)]
pub struct FglOptions {
    pub strategy: FglStrategy,
    /// Price increment for merge-and-raise; defaults to 2^-20 times the
    /// smallest positive gap between values.
    pub delta: Option<Rational>,
    pub budget: u128,
    /// Only accept outputs that allocate every bundle.
    pub require_full: bool,
    pub max_rounds: usize,
}

impl Default for FglOptions {
    fn default() -> Self {
        FglOptions { strategy: FglStrategy::Auto, delta: None, budget: DEFAULT_LIFT_BUDGET, require_full: false, max_rounds: 10_000 }
    }
}

/// Output of the coarsening lift. `groups[g]` lists the input bundles merged
/// into output bundle `g`; `allocation[i]` holds output-bundle indices.
#[derive(Clone, Debug, PartialEq)]
pub struct FglOutput {
    pub pb: PricedBundling,
    pub allocation: Vec<ItemSet>,
    pub groups: Vec<ItemSet>,
}

impl FglOutput {
    pub fn outcome(&self) -> Outcome {
        Outcome::from_parts(self.pb.clone(), self.allocation.clone())
    }
}

/// Lift over explicit tables: `tables[i][T]` is consumer `i`'s value for the
/// union of input bundles `T`.
#[derive(Clone, Debug, PartialEq)]
struct Lifted {
    groups: Vec<ItemSet>,
    prices: Vec<Rational>,
    allocation: Vec<ItemSet>,
}

pub fn fgl_lift(market: &Market, pb: &PricedBundling) -> Result<FglOutput> {
    fgl_lift_with(market, pb, &FglOptions::default())
}

pub fn fgl_lift_with(market: &Market, pb: &PricedBundling, opts: &FglOptions) -> Result<FglOutput> {
    pb.validate(market.m())?;
    let tables: Vec<Vec<Rational>> = market.consumers().iter().map(|c| bundle_table(&c.valuation, &pb.bundles)).collect();
    let lifted = lift_tables(&tables, &pb.prices, opts)?;
    let out = to_output(pb, lifted);
    if let Err(e) = check_fgl_properties(market, pb, &out) {
        panic!("lift produced an invalid output: {e}");
    }
    Ok(out)
}

fn to_output(pb: &PricedBundling, l: Lifted) -> FglOutput {
    let bundles = l.groups.iter().map(|g| pb.items_of(*g)).collect();
    FglOutput { pb: PricedBundling::new(bundles, l.prices), allocation: l.allocation, groups: l.groups }
}

/// Checks coarsening, price monotonicity of merged bundles, unallocated bundles
/// keeping their input price, and that every consumer holds a demand set.
pub fn check_fgl_properties(market: &Market, input: &PricedBundling, out: &FglOutput) -> std::result::Result<(), String> {
    let k = input.bundles.len();
    let mut covered = ItemSet::EMPTY;
    for (g, grp) in out.groups.iter().enumerate() {
        if grp.is_empty() || !grp.is_disjoint(covered) || !grp.is_subset(ItemSet::full(k)) {
            return Err(format!("output bundle {g} is not a block of a coarsening"));
        }
        covered = covered.union(*grp);
        if out.pb.bundles[g] != input.items_of(*grp) {
            return Err(format!("output bundle {g} does not match its constituents"));
        }
    }
    if covered != ItemSet::full(k) {
        return Err("output bundles do not cover the input".into());
    }
    let outcome = out.outcome();
    outcome.validate(market.m(), market.n()).map_err(|e| e.to_string())?;
    let held = outcome.allocated();
    for (g, grp) in out.groups.iter().enumerate() {
        let base = input.price_of(*grp);
        if held.contains(g) {
            if out.pb.prices[g] < base {
                return Err(format!("allocated bundle {g} priced {} below constituent sum {base}", out.pb.prices[g]));
            }
        } else if grp.len() != 1 || out.pb.prices[g] != base {
            return Err(format!("unallocated bundle {g} is not an input bundle at its input price"));
        }
    }
    let tables: Vec<Vec<Rational>> =
        market.consumers().iter().map(|c| bundle_table(&c.valuation, &out.pb.bundles)).collect();
    let report = check_tables(&tables, &out.pb.prices, &out.allocation);
    if let Some(c) = report.consumers.iter().find(|c| !c.maximizes) {
        return Err(format!("consumer {} does not receive a demand set", c.consumer));
    }
    Ok(())
}

fn lift_tables(tables: &[Vec<Rational>], p: &[Rational], opts: &FglOptions) -> Result<Lifted> {
    let k = p.len();
    let merge_first = match opts.strategy {
        FglStrategy::Auto => k > 6,
        FglStrategy::MergeRaise => true,
        FglStrategy::Exhaustive => false,
    };
    if merge_first {
        let delta = opts.delta.clone().unwrap_or_else(|| default_delta(tables));
        if let Some(l) = merge_and_raise(tables, p, &delta, opts.max_rounds) {
            if !opts.require_full || l.allocation.iter().fold(0, |a, s| a + s.len()) == l.groups.len() {
                return Ok(l);
            }
        }
    }
    let mut search = Search::new(tables, p, opts.require_full, opts.budget);
    search.run()?.ok_or_else(|| Error::Precondition("no lift exists for this priced bundling".into()))
}

/// `2^-20` times the smallest positive gap between distinct table values.
fn default_delta(tables: &[Vec<Rational>]) -> Rational {
    let mut vals: Vec<&Rational> = tables.iter().flatten().collect();
    vals.sort();
    vals.dedup();
    let gap = vals.windows(2).map(|w| w[1] - w[0]).min().unwrap_or_else(Rational::one);
    gap * Rational::pow2(-20)
}

/// Table over output groups: `v(∪ groups in T)` for every set `T` of groups.
fn group_table(table: &[Rational], groups: &[ItemSet]) -> Vec<Rational> {
    let mut unions = vec![ItemSet::EMPTY; 1 << groups.len()];
    for t in 1..unions.len() {
        unions[t] = unions[t & (t - 1)].union(groups[t.trailing_zeros() as usize]);
    }
    unions.into_iter().map(|u| table[u.idx()].clone()).collect()
}

/// Repeatedly hand the first unsatisfied consumer a demanded set, merged into
/// one bundle priced at the constituent sum plus `delta`. Bundles that lose
/// their holder fall back to the input bundles at input prices.
fn merge_and_raise(tables: &[Vec<Rational>], p: &[Rational], delta: &Rational, max_rounds: usize) -> Option<Lifted> {
    let n = tables.len();
    let k = p.len();
    let mut groups: Vec<ItemSet> = (0..k).map(ItemSet::singleton).collect();
    let mut prices = p.to_vec();
    let mut owner: Vec<Option<usize>> = vec![None; k];
    for _ in 0..max_rounds {
        let holding = |owner: &[Option<usize>], i: usize| {
            ItemSet::from_items(owner.iter().enumerate().filter(|(_, o)| **o == Some(i)).map(|(g, _)| g))
        };
        let mut unhappy = None;
        for (i, table) in tables.iter().enumerate() {
            let d = demand_from_table(&group_table(table, &groups), &prices);
            if !d.contains(holding(&owner, i)) {
                unhappy = Some((i, d.canonical()));
                break;
            }
        }
        let Some((i, want)) = unhappy else {
            let allocation = (0..n).map(|i| holding(&owner, i)).collect();
            return Some(Lifted { groups, prices, allocation });
        };
        let mut next_groups = Vec::new();
        let mut next_prices = Vec::new();
        let mut next_owner = Vec::new();
        let mut released = ItemSet::EMPTY;
        for g in 0..groups.len() {
            if want.contains(g) {
                continue;
            }
            let lost = owner[g] == Some(i) || owner[g].is_some_and(|o| !holding(&owner, o).is_disjoint(want));
            if lost {
                released = released.union(groups[g]);
            } else {
                next_groups.push(groups[g]);
                next_prices.push(prices[g].clone());
                next_owner.push(owner[g]);
            }
        }
        if !want.is_empty() {
            let merged = want.iter().fold(ItemSet::EMPTY, |a, g| a.union(groups[g]));
            let price: Rational = want.iter().map(|g| &prices[g]).sum::<Rational>() + delta;
            next_groups.push(merged);
            next_prices.push(price);
            next_owner.push(Some(i));
        }
        for b in released.iter() {
            next_groups.push(ItemSet::singleton(b));
            next_prices.push(p[b].clone());
            next_owner.push(None);
        }
        // Keep groups ordered by their first input bundle.
        let mut order: Vec<usize> = (0..next_groups.len()).collect();
        order.sort_by_key(|&g| next_groups[g].first());
        groups = order.iter().map(|&g| next_groups[g]).collect();
        prices = order.iter().map(|&g| next_prices[g].clone()).collect();
        owner = order.iter().map(|&g| next_owner[g]).collect();
    }
    None
}

/// Exhaustive search over coarsenings (in restricted-growth order) and
/// assignments of at most one output bundle per consumer, with an LP for prices.
struct Search<'a> {
    tables: &'a [Vec<Rational>],
    p: &'a [Rational],
    require_full: bool,
    budget: u128,
    steps: u128,
}

impl<'a> Search<'a> {
    fn new(tables: &'a [Vec<Rational>], p: &'a [Rational], require_full: bool, budget: u128) -> Self {
        Search { tables, p, require_full, budget, steps: 0 }
    }

    fn run(&mut self) -> Result<Option<Lifted>> {
        let k = self.p.len();
        let n = self.tables.len();
        if k == 0 {
            return Ok(Some(Lifted { groups: vec![], prices: vec![], allocation: vec![ItemSet::EMPTY; n] }));
        }
        let mut rgs = vec![0usize; k];
        loop {
            let groups = blocks_of(&rgs);
            let merged = groups.iter().filter(|g| g.len() > 1).count();
            let must = if self.require_full { groups.len() } else { merged };
            if must <= n {
                let base: Vec<Rational> = groups.iter().map(|g| g.iter().map(|b| &self.p[b]).sum()).collect();
                let mut owner = vec![None; groups.len()];
                let mut holding = vec![None; n];
                if let Some(l) = self.assign(0, &groups, &base, &mut owner, &mut holding)? {
                    return Ok(Some(l));
                }
            }
            if !next_rgs(&mut rgs) {
                return Ok(None);
            }
        }
    }

    fn assign(
        &mut self,
        i: usize,
        groups: &[ItemSet],
        base: &[Rational],
        owner: &mut Vec<Option<usize>>,
        holding: &mut Vec<Option<usize>>,
    ) -> Result<Option<Lifted>> {
        let n = self.tables.len();
        let open = (0..groups.len()).filter(|&g| owner[g].is_none() && (self.require_full || groups[g].len() > 1)).count();
        if open > n - i {
            return Ok(None);
        }
        if i == n {
            self.steps += 1;
            if self.steps > self.budget {
                return Err(Error::Budget { what: "lift search candidates", needed: self.steps, budget: self.budget });
            }
            return Ok(candidate_prices(self.tables, self.p, groups, base, owner, holding).map(|prices| Lifted {
                groups: groups.to_vec(),
                prices,
                allocation: holding.iter().map(|h| h.map_or(ItemSet::EMPTY, ItemSet::singleton)).collect(),
            }));
        }
        for g in 0..groups.len() {
            if owner[g].is_some() || self.tables[i][groups[g].idx()] < base[g] {
                continue;
            }
            owner[g] = Some(i);
            holding[i] = Some(g);
            let found = self.assign(i + 1, groups, base, owner, holding)?;
            owner[g] = None;
            holding[i] = None;
            if found.is_some() {
                return Ok(found);
            }
        }
        if open < n - i {
            return self.assign(i + 1, groups, base, owner, holding);
        }
        Ok(None)
    }
}

/// Advances a restricted-growth string; false after the last one.
fn next_rgs(a: &mut [usize]) -> bool {
    for i in (1..a.len()).rev() {
        let max_before = *a[..i].iter().max().unwrap();
        if a[i] <= max_before {
            a[i] += 1;
            a[i + 1..].iter_mut().for_each(|x| *x = 0);
            return true;
        }
    }
    false
}

/// Prices for a fixed coarsening and assignment: allocated bundles cost at
/// least their constituent sum, unallocated ones keep the input price, and
/// every consumer's holding maximizes payoff. Returns the least-total feasible
/// prices, or `None`.
fn candidate_prices(
    tables: &[Vec<Rational>],
    p: &[Rational],
    groups: &[ItemSet],
    base: &[Rational],
    owner: &[Option<usize>],
    holding: &[Option<usize>],
) -> Option<Vec<Rational>> {
    let ng = groups.len();
    let mut var_of = vec![None; ng];
    let mut vars = Vec::new();
    for g in 0..ng {
        if owner[g].is_some() {
            var_of[g] = Some(vars.len());
            vars.push(g);
        }
    }
    let fixed: Vec<Rational> =
        (0..ng).map(|g| if owner[g].is_some() { Rational::zero() } else { p[groups[g].first().unwrap()].clone() }).collect();
    // Rows: Σ_{g∈plus} y_g − y_minus ≥ rhs, with prices q = base + y and y ≥ 0.
    let mut rows: BTreeMap<(u32, Option<usize>), Rational> = BTreeMap::new();
    for (table, h) in tables.iter().zip(holding) {
        let gt = group_table(table, groups);
        let hmask = h.map_or(ItemSet::EMPTY, ItemSet::singleton);
        let held_val = &gt[hmask.idx()];
        let mut fixed_cost = vec![Rational::zero(); 1 << ng];
        for t in 1..(1usize << ng) {
            let low = t.trailing_zeros() as usize;
            fixed_cost[t] = &fixed_cost[t & (t - 1)] + &fixed[low];
        }
        for t in 0..(1usize << ng) {
            let tm = ItemSet(t as u32);
            if tm == hmask {
                continue;
            }
            // v(T) − q(T) ≤ v(H) − q(H)  ⟺  q(T∖H) − q(H∖T) ≥ v(T) − v(H)
            let mut rhs = &gt[t] - held_val - &fixed_cost[t];
            let mut plus = 0u32;
            for g in tm.minus(hmask).iter() {
                if let Some(j) = var_of[g] {
                    plus |= 1 << j;
                    rhs -= &base[g];
                }
            }
            let minus = hmask.minus(tm).first().map(|g| {
                rhs += &base[g];
                var_of[g].unwrap()
            });
            if plus == 0 && minus.is_none() {
                if rhs.is_positive() {
                    return None;
                }
                continue;
            }
            if minus.is_none() && !rhs.is_positive() {
                continue;
            }
            let e = rows.entry((plus, minus)).or_insert_with(|| rhs.clone());
            if rhs > *e {
                *e = rhs;
            }
        }
    }
    let nv = vars.len();
    let mut y = vec![Rational::zero(); nv];
    if !rows.is_empty() {
        // Dual of  min Σy  s.t. rows, y ≥ 0:  max Σ rhs·w  s.t.  Aᵀw ≤ 1, w ≥ 0.
        let keys: Vec<&(u32, Option<usize>)> = rows.keys().collect();
        let mut lp = LinearProgram::new(Sense::Max, rows.values().cloned().collect());
        for j in 0..nv {
            let coeffs = keys
                .iter()
                .enumerate()
                .filter_map(|(r, (plus, minus))| {
                    if plus & (1 << j) != 0 {
                        Some((r, Rational::one()))
                    } else if *minus == Some(j) {
                        Some((r, -Rational::one()))
                    } else {
                        None
                    }
                })
                .collect();
            lp.add(coeffs, Rel::Le, Rational::one());
        }
        let sol = lp.solve();
        if sol.status != LpStatus::Optimal {
            return None;
        }
        y = sol.dual;
        for ((plus, minus), rhs) in &rows {
            let lhs: Rational = ItemSet(*plus).iter().map(|j| &y[j]).sum::<Rational>() - minus.map_or(Rational::zero(), |j| y[j].clone());
            assert!(lhs >= *rhs, "price LP returned an infeasible point");
        }
    }
    Some((0..ng).map(|g| match var_of[g] { Some(j) => &base[g] + &y[j], None => fixed[g].clone() }).collect())
}

/// A bundling equilibrium with respect to the consumers in `members`; other
/// consumers hold nothing and are treated as valuing everything at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialCbe {
    pub pb: PricedBundling,
    pub allocation: Vec<ItemSet>,
    pub members: ItemSet,
}

impl PartialCbe {
    pub fn outcome(&self) -> Outcome {
        Outcome::from_parts(self.pb.clone(), self.allocation.clone())
    }

    pub fn revenue(&self) -> Rational {
        self.outcome().revenue()
    }

    pub fn validate(&self, market: &Market) -> Result<()> {
        let out = self.outcome();
        out.validate(market.m(), market.n())?;
        let tables: Vec<Vec<Rational>> = (0..market.n())
            .map(|i| {
                if self.members.contains(i) {
                    bundle_table(market.valuation(i), &self.pb.bundles)
                } else {
                    vec![Rational::zero(); 1 << self.pb.bundles.len()]
                }
            })
            .collect();
        if let Some(i) = (0..market.n()).find(|&i| !self.members.contains(i) && !self.allocation[i].is_empty()) {
            return Err(Error::Precondition(format!("consumer {i} is outside the member set but holds bundles")));
        }
        let report = check_tables(&tables, &self.pb.prices, &self.allocation);
        if !report.pass {
            return Err(Error::Precondition("not an equilibrium with respect to the member consumers".into()));
        }
        Ok(())
    }
}

/// Lifts a partial equilibrium to a full one whose welfare is at least the
/// partial revenue. Members' values for their own holdings are raised by
/// `ε_t = ε₀/2^t` until two consecutive lifts agree on the structure; that
/// structure is then priced exactly at `ε = 0`.
pub fn lift_partial(market: &Market, partial: &PartialCbe) -> Result<Outcome> {
    lift_partial_with(market, partial, DEFAULT_LIFT_BUDGET)
}

pub fn lift_partial_with(market: &Market, partial: &PartialCbe, budget: u128) -> Result<Outcome> {
    partial.validate(market)?;
    let input = partial.outcome();
    if verify_cbe(market, &input)?.pass {
        return Ok(input);
    }
    let pb = &partial.pb;
    let tables: Vec<Vec<Rational>> = market.consumers().iter().map(|c| bundle_table(&c.valuation, &pb.bundles)).collect();
    let eps0 = default_delta(&tables) * Rational::pow2(10);
    let opts = FglOptions { require_full: true, budget, ..FglOptions::default() };
    let mut previous: Option<(Vec<ItemSet>, Vec<ItemSet>)> = None;
    let mut result = None;
    for t in 0..12 {
        let eps = &eps0 * Rational::pow2(-t);
        let mut shifted = tables.clone();
        for i in partial.members.iter() {
            let s = partial.allocation[i];
            if !s.is_empty() {
                shifted[i][s.idx()] += &eps;
            }
        }
        let l = lift_tables(&shifted, &pb.prices, &opts)?;
        let structure = (l.groups.clone(), l.allocation.clone());
        if previous.as_ref() == Some(&structure) {
            let owner = owners(&l.groups, &l.allocation);
            let holding: Vec<Option<usize>> = l.allocation.iter().map(|s| s.first()).collect();
            let base: Vec<Rational> = l.groups.iter().map(|g| pb.price_of(*g)).collect();
            if let Some(prices) = candidate_prices(&tables, &pb.prices, &l.groups, &base, &owner, &holding) {
                result = Some(Lifted { groups: l.groups, prices, allocation: l.allocation });
                break;
            }
        }
        previous = Some(structure);
    }
    let lifted = match result {
        Some(l) => l,
        None => lift_tables(&tables, &pb.prices, &opts)?,
    };
    let out = to_output(pb, lifted).outcome();
    let report = verify_cbe(market, &out)?;
    assert!(report.pass, "partial lift output is not an equilibrium");
    assert!(report.welfare >= partial.revenue(), "partial lift lost welfare");
    Ok(out)
}

fn owners(groups: &[ItemSet], allocation: &[ItemSet]) -> Vec<Option<usize>> {
    let mut owner = vec![None; groups.len()];
    for (i, s) in allocation.iter().enumerate() {
        for g in s.iter() {
            owner[g] = Some(i);
        }
    }
    owner
}

/// Consumers for whom bundle `b` is strictly profitable on its own.
pub fn profitable_count(market: &Market, pb: &PricedBundling, b: usize) -> usize {
    (0..market.n()).filter(|&i| market.value(i, pb.bundles[b]) > pb.prices[b]).count()
}

/// Every bundle is strictly profitable for at least as many consumers as there are bundles.
pub fn is_high_demand(market: &Market, pb: &PricedBundling) -> bool {
    (0..pb.bundles.len()).all(|b| profitable_count(market, pb, b) >= pb.bundles.len())
}

/// Lifts a high-demand priced bundling to an equilibrium allocating every
/// input bundle, so welfare is at least the aggregate price.
pub fn lift_high_demand(market: &Market, pb: &PricedBundling) -> Result<Outcome> {
    lift_high_demand_with(market, pb, DEFAULT_LIFT_BUDGET)
}

pub fn lift_high_demand_with(market: &Market, pb: &PricedBundling, budget: u128) -> Result<Outcome> {
    pb.validate(market.m())?;
    if !is_high_demand(market, pb) {
        return Err(Error::Precondition("priced bundling is not high-demand".into()));
    }
    let opts = FglOptions { require_full: true, budget, ..FglOptions::default() };
    let out = fgl_lift_with(market, pb, &opts)?;
    let outcome = out.outcome();
    let report = verify_cbe(market, &outcome)?;
    assert!(report.pass, "high-demand lift output is not an equilibrium");
    assert!(report.welfare >= pb.total_price(), "high-demand lift lost welfare");
    assert_eq!(outcome.allocated(), ItemSet::full(out.groups.len()));
    Ok(outcome)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinMode {
    ByValue,
    BySize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogBinResult {
    /// Lower end of the chosen bin: a value for `ByValue`, a size for `BySize`.
    /// `None` when nothing has positive value.
    pub v: Option<Rational>,
    pub filtered: Vec<ItemSet>,
    /// The factor the kept value is guaranteed to be within:
    /// `2(⌊log₂ μ⌋ + 2)` by value, `⌊log₂ m⌋ + 1` by size.
    pub alpha: Rational,
    pub r: usize,
}

/// Keeps one class of parts of an allocation. By value: parts worth less than
/// `W/2μ` are dropped, the rest are binned into `[τ2^j, τ2^{j+1})` and the
/// heaviest bin survives (ties to the higher bin); `v` is the smallest
/// surviving value, so every survivor lies in `[v, 2v)`. By size: parts are
/// binned by `|S_i| ∈ [2^j, 2^{j+1})`.
pub fn log_bin(market: &Market, s: &[ItemSet], mode: BinMode) -> LogBinResult {
    let n = s.len();
    let values: Vec<Rational> = s.iter().enumerate().map(|(i, si)| market.value(i, *si)).collect();
    let w: Rational = values.iter().sum();
    let alpha = match mode {
        BinMode::ByValue => Rational::from(2 * (floor_log2(market.mu().max(1)) + 2)),
        BinMode::BySize => Rational::from(floor_log2(market.m().max(1)) + 1),
    };
    let empty = LogBinResult { v: None, filtered: vec![ItemSet::EMPTY; n], alpha: alpha.clone(), r: 0 };
    if !w.is_positive() {
        return empty;
    }
    let mut bins: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    match mode {
        BinMode::ByValue => {
            let tau = &w / Rational::from(2 * market.mu());
            for (i, v) in values.iter().enumerate() {
                if v.is_positive() && *v >= tau {
                    let mut j = 0;
                    while *v >= &tau * Rational::pow2(j as i64 + 1) {
                        j += 1;
                    }
                    bins.entry(j).or_default().push(i);
                }
            }
        }
        BinMode::BySize => {
            for (i, si) in s.iter().enumerate() {
                if values[i].is_positive() {
                    bins.entry(floor_log2(si.len())).or_default().push(i);
                }
            }
        }
    }
    let mut best: Option<(Rational, usize)> = None;
    for (j, members) in &bins {
        let total: Rational = members.iter().map(|&i| &values[i]).sum();
        if best.as_ref().is_none_or(|(b, _)| total >= *b) {
            best = Some((total, *j));
        }
    }
    let Some((_, j)) = best else { return empty };
    let members = &bins[&j];
    let mut filtered = vec![ItemSet::EMPTY; n];
    for &i in members {
        filtered[i] = s[i];
    }
    let v = match mode {
        BinMode::ByValue => members.iter().map(|&i| values[i].clone()).min().unwrap(),
        BinMode::BySize => Rational::pow2(j as i64),
    };
    LogBinResult { v: Some(v), filtered, alpha, r: members.len() }
}
