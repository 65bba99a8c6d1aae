use super::{ItemSet, Market};
use crate::error::{Error, Result};
use crate::numeric::Rational;

/// A bundling with one price per bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct PricedBundling {
    pub bundles: Vec<ItemSet>,
    pub prices: Vec<Rational>,
}

/// A priced bundling plus an allocation. `allocation[i]` is a set of bundle
/// indices (bit `k` set means consumer `i` holds bundle `k`).
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub bundles: Vec<ItemSet>,
    pub prices: Vec<Rational>,
    pub allocation: Vec<ItemSet>,
}

impl PricedBundling {
    pub fn new(bundles: Vec<ItemSet>, prices: Vec<Rational>) -> Self {
        PricedBundling { bundles, prices }
    }

    /// Checks that the bundles partition the `m` items and prices are nonnegative.
    pub fn validate(&self, m: usize) -> Result<()> {
        validate_bundling(&self.bundles, m)?;
        if self.prices.len() != self.bundles.len() {
            return Err(Error::InvalidOutcome("one price per bundle is required".into()));
        }
        if self.prices.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidOutcome("bundle prices must be nonnegative".into()));
        }
        Ok(())
    }

    /// Items covered by a set of bundle indices.
    pub fn items_of(&self, t: ItemSet) -> ItemSet {
        t.iter().fold(ItemSet::EMPTY, |acc, k| acc.union(self.bundles[k]))
    }

    pub fn price_of(&self, t: ItemSet) -> Rational {
        t.iter().map(|k| &self.prices[k]).sum()
    }

    pub fn total_price(&self) -> Rational {
        self.prices.iter().sum()
    }
}

pub fn validate_bundling(bundles: &[ItemSet], m: usize) -> Result<()> {
    if bundles.len() > 32 {
        return Err(Error::InvalidOutcome("at most 32 bundles are supported".into()));
    }
    let mut seen = ItemSet::EMPTY;
    for b in bundles {
        if b.is_empty() {
            return Err(Error::InvalidOutcome("bundles must be nonempty".into()));
        }
        if !b.is_disjoint(seen) {
            return Err(Error::InvalidOutcome("bundles must be pairwise disjoint".into()));
        }
        seen = seen.union(*b);
    }
    if seen != ItemSet::full(m) {
        return Err(Error::InvalidOutcome("bundles must cover every item".into()));
    }
    Ok(())
}

impl Outcome {
    pub fn priced(&self) -> PricedBundling {
        PricedBundling { bundles: self.bundles.clone(), prices: self.prices.clone() }
    }

    pub fn from_parts(pb: PricedBundling, allocation: Vec<ItemSet>) -> Self {
        Outcome { bundles: pb.bundles, prices: pb.prices, allocation }
    }

    /// Structural checks: valid priced bundling, one entry per consumer, disjoint bundle sets.
    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        self.priced().validate(m)?;
        if self.allocation.len() != n {
            return Err(Error::InvalidOutcome(format!("allocation has {} entries for {n} consumers", self.allocation.len())));
        }
        let all = ItemSet::full(self.bundles.len());
        let mut seen = ItemSet::EMPTY;
        for s in &self.allocation {
            if !s.is_subset(all) {
                return Err(Error::InvalidOutcome("allocation refers to a missing bundle".into()));
            }
            if !s.is_disjoint(seen) {
                return Err(Error::InvalidOutcome("a bundle is allocated twice".into()));
            }
            seen = seen.union(*s);
        }
        Ok(())
    }

    pub fn items_of(&self, i: usize) -> ItemSet {
        self.allocation[i].iter().fold(ItemSet::EMPTY, |acc, k| acc.union(self.bundles[k]))
    }

    pub fn item_allocation(&self) -> Vec<ItemSet> {
        (0..self.allocation.len()).map(|i| self.items_of(i)).collect()
    }

    pub fn welfare(&self, market: &Market) -> Rational {
        (0..self.allocation.len()).map(|i| market.value(i, self.items_of(i))).sum()
    }

    /// Total price of the allocated bundles.
    pub fn revenue(&self) -> Rational {
        self.allocation.iter().flat_map(|s| s.iter()).map(|k| &self.prices[k]).sum()
    }

    pub fn allocated(&self) -> ItemSet {
        self.allocation.iter().fold(ItemSet::EMPTY, |a, s| a.union(*s))
    }
}

/// Bell numbers `B(k)`, saturating at `u128::MAX`.
pub fn bell(k: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..k {
        let mut next = vec![*row.last().unwrap()];
        for x in &row {
            let v = next.last().unwrap().saturating_add(*x);
            next.push(v);
        }
        row = next;
    }
    row[0]
}

/// All set partitions of `0..k` as restricted-growth strings, in lexicographic order.
pub fn set_partitions(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut a = vec![0usize; k];
    let mut maxes = vec![0usize; k];
    loop {
        out.push(a.clone());
        // Find the rightmost position that can be incremented.
        let mut i = k - 1;
        loop {
            if i == 0 {
                return out;
            }
            if a[i] <= maxes[i - 1] {
                break;
            }
            i -= 1;
        }
        a[i] += 1;
        maxes[i] = maxes[i - 1].max(a[i]);
        for j in i + 1..k {
            a[j] = 0;
            maxes[j] = maxes[i];
        }
    }
}

/// Converts a restricted-growth string into blocks of element indices.
pub fn blocks_of(rgs: &[usize]) -> Vec<ItemSet> {
    let nb = rgs.iter().max().map_or(0, |x| x + 1);
    let mut blocks = vec![ItemSet::EMPTY; nb];
    for (e, &b) in rgs.iter().enumerate() {
        blocks[b] = blocks[b].with(e);
    }
    blocks
}
