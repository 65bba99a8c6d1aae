use super::{lex_cmp, ItemSet, PricedBundling, Valuation};
use crate::numeric::Rational;

/// All payoff-maximizing bundle-index sets and the maximum payoff.
#[derive(Clone, Debug, PartialEq)]
pub struct Demand {
    pub payoff: Rational,
    /// Sorted lexicographically by bundle-index list.
    pub sets: Vec<ItemSet>,
}

impl Demand {
    /// The lexicographically first maximizer.
    pub fn canonical(&self) -> ItemSet {
        self.sets[0]
    }

    pub fn contains(&self, t: ItemSet) -> bool {
        self.sets.contains(&t)
    }
}

/// `v(∪T)` for every set `T` of bundle indices.
pub fn bundle_table(v: &Valuation, bundles: &[ItemSet]) -> Vec<Rational> {
    let k = bundles.len();
    let mut unions = vec![ItemSet::EMPTY; 1 << k];
    for t in 1..unions.len() {
        let low = t.trailing_zeros() as usize;
        unions[t] = unions[t & (t - 1)].union(bundles[low]);
    }
    unions.into_iter().map(|s| v.value(s)).collect()
}

/// Brute-force demand over an explicit table indexed by bundle-index sets.
pub fn demand_from_table(table: &[Rational], prices: &[Rational]) -> Demand {
    let k = prices.len();
    debug_assert_eq!(table.len(), 1 << k);
    let mut cost = vec![Rational::zero(); 1 << k];
    let mut best: Option<Rational> = None;
    let mut sets = Vec::new();
    for t in 0..table.len() {
        if t > 0 {
            let low = t.trailing_zeros() as usize;
            cost[t] = &cost[t & (t - 1)] + &prices[low];
        }
        let pay = &table[t] - &cost[t];
        match &best {
            Some(b) if pay < *b => {}
            Some(b) if pay == *b => sets.push(ItemSet(t as u32)),
            _ => {
                best = Some(pay);
                sets.clear();
                sets.push(ItemSet(t as u32));
            }
        }
    }
    sets.sort_by(|a, b| lex_cmp(*a, *b));
    Demand { payoff: best.unwrap(), sets }
}

/// Brute-force demand query over all `2^|bundles|` bundle sets.
pub fn demand_query(v: &Valuation, pb: &PricedBundling) -> Demand {
    demand_from_table(&bundle_table(v, &pb.bundles), &pb.prices)
}

/// Polynomial-time demand for the classes that admit one: returns the maximum
/// payoff and one maximizing bundle set, or `None` for other classes.
pub fn demand_query_fast(v: &Valuation, pb: &PricedBundling) -> Option<(Rational, ItemSet)> {
    match v {
        Valuation::Additive(_) => {
            let mut pay = Rational::zero();
            let mut set = ItemSet::EMPTY;
            for (k, b) in pb.bundles.iter().enumerate() {
                let gain = v.value(*b) - &pb.prices[k];
                if gain.is_positive() {
                    pay += gain;
                    set = set.with(k);
                }
            }
            Some((pay, set))
        }
        Valuation::UnitDemand(_) => {
            // Prices are nonnegative, so a payoff maximizer needs at most one bundle.
            let mut pay = Rational::zero();
            let mut set = ItemSet::EMPTY;
            for (k, b) in pb.bundles.iter().enumerate() {
                let gain = v.value(*b) - &pb.prices[k];
                if gain > pay {
                    pay = gain;
                    set = ItemSet::singleton(k);
                }
            }
            Some((pay, set))
        }
        Valuation::MultiUnit(values) => {
            let sizes: Vec<usize> = pb.bundles.iter().map(|b| b.len()).collect();
            Some(multi_unit_demand_dp(values, &sizes, &pb.prices))
        }
        _ => None,
    }
}

/// Demand for a per-count valuation via a knapsack over bundle sizes: for every
/// unit count, the cheapest bundle set supplying exactly that many units.
pub fn multi_unit_demand_dp(values: &[Rational], sizes: &[usize], prices: &[Rational]) -> (Rational, ItemSet) {
    let total: usize = sizes.iter().sum();
    let mut best: Vec<Option<(Rational, ItemSet)>> = vec![None; total + 1];
    best[0] = Some((Rational::zero(), ItemSet::EMPTY));
    for (k, &s) in sizes.iter().enumerate() {
        for c in (s..=total).rev() {
            let Some((p, set)) = &best[c - s] else { continue };
            let cand = (p + &prices[k], set.with(k));
            let better = match &best[c] {
                None => true,
                Some((q, _)) => cand.0 < *q,
            };
            if better {
                best[c] = Some(cand);
            }
        }
    }
    let mut out = (Rational::zero(), ItemSet::EMPTY);
    for (c, entry) in best.iter().enumerate() {
        if let Some((p, set)) = entry {
            let pay = &values[c.min(values.len() - 1)] - p;
            if pay > out.0 {
                out = (pay, *set);
            }
        }
    }
    out
}
