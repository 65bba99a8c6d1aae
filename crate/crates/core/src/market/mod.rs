//! Items, valuations, bundlings and the value/demand oracles.

mod bundling;
mod demand;
mod itemset;
mod matroid;
mod opt;
mod props;
mod valuation;

pub use bundling::{bell, set_partitions, blocks_of, Outcome, PricedBundling};
pub use demand::{bundle_table, demand_from_table, demand_query, demand_query_fast, multi_unit_demand_dp, Demand};
pub use itemset::{lex_cmp, ItemSet};
pub use matroid::Matroid;
pub use opt::{welfare_opt, welfare_opt_budget, welfare_opt_filtered, welfare_opt_tables, DEFAULT_BUDGET};
pub use props::{check_gross_substitutes, check_subadditive, check_superadditive, induced_market, table_subadditive, table_superadditive};
pub use valuation::Valuation;

use crate::error::{Error, Result};
use crate::numeric::Rational;

/// Largest supported item count.
pub const MAX_ITEMS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct Consumer {
    pub name: String,
    pub valuation: Valuation,
}

/// An immutable market: labelled items and an ordered list of consumers.
#[derive(Clone, Debug, PartialEq)]
pub struct Market {
    items: Vec<String>,
    consumers: Vec<Consumer>,
}

impl Market {
    pub fn new(items: Vec<String>, consumers: Vec<Consumer>) -> Result<Self> {
        let m = items.len();
        if m == 0 || consumers.is_empty() {
            return Err(Error::InvalidMarket("a market needs at least one item and one consumer".into()));
        }
        if m > MAX_ITEMS {
            return Err(Error::InvalidMarket(format!("at most {MAX_ITEMS} items are supported")));
        }
        for (a, la) in items.iter().enumerate() {
            if la.is_empty() || items[..a].contains(la) {
                return Err(Error::InvalidMarket(format!("item labels must be nonempty and unique ({la:?})")));
            }
        }
        for c in &consumers {
            c.valuation.validate(m).map_err(|e| Error::InvalidMarket(format!("consumer {}: {e}", c.name)))?;
        }
        Ok(Market { items, consumers })
    }

    /// Market with items labelled `a, b, c, ...` and consumers named `1..n`.
    pub fn with_default_labels(m: usize, valuations: Vec<Valuation>) -> Result<Self> {
        let consumers = valuations
            .into_iter()
            .enumerate()
            .map(|(i, valuation)| Consumer { name: format!("{}", i + 1), valuation })
            .collect();
        Market::new(default_labels(m), consumers)
    }

    pub fn m(&self) -> usize {
        self.items.len()
    }

    pub fn n(&self) -> usize {
        self.consumers.len()
    }

    pub fn mu(&self) -> usize {
        self.m().min(self.n())
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn consumers(&self) -> &[Consumer] {
        &self.consumers
    }

    pub fn valuation(&self, i: usize) -> &Valuation {
        &self.consumers[i].valuation
    }

    pub fn full(&self) -> ItemSet {
        ItemSet::full(self.m())
    }

    pub fn value(&self, i: usize, s: ItemSet) -> Rational {
        self.consumers[i].valuation.value(s)
    }

    pub fn value_tables(&self) -> Vec<Vec<Rational>> {
        self.consumers.iter().map(|c| c.valuation.table(self.m())).collect()
    }

    pub fn all_multi_unit(&self) -> bool {
        self.consumers.iter().all(|c| matches!(c.valuation, Valuation::MultiUnit(_)))
    }

    pub fn set_label(&self, s: ItemSet) -> String {
        let mut labels: Vec<&str> = s.iter().map(|j| self.items[j].as_str()).collect();
        labels.sort_unstable();
        labels.concat()
    }

    /// Welfare of an item allocation.
    pub fn welfare(&self, alloc: &[ItemSet]) -> Rational {
        alloc.iter().enumerate().map(|(i, s)| self.value(i, *s)).sum()
    }

    /// Same market with every consumer outside `keep` valuing everything at zero.
    pub fn restricted(&self, keep: ItemSet) -> Market {
        let m = self.m();
        let consumers = self
            .consumers
            .iter()
            .enumerate()
            .map(|(i, c)| Consumer {
                name: c.name.clone(),
                valuation: if keep.contains(i) { c.valuation.clone() } else { Valuation::Additive(vec![Rational::zero(); m]) },
            })
            .collect();
        Market { items: self.items.clone(), consumers }
    }
}

/// Labels `a, b, c, ...` for the first `m ≤ MAX_ITEMS` items.
pub fn default_labels(m: usize) -> Vec<String> {
    assert!(m <= MAX_ITEMS);
    (0..m).map(|j| ((b'a' + j as u8) as char).to_string()).collect()
}
