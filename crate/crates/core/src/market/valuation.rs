use super::{ItemSet, Matroid};
use crate::error::{Error, Result};
use crate::numeric::Rational;

/// A consumer valuation over the items `0..m`.
#[derive(Clone, Debug, PartialEq)]
pub enum Valuation {
    /// Full table indexed by bitmask; length `2^m`.
    Explicit(Vec<Rational>),
    Additive(Vec<Rational>),
    UnitDemand(Vec<Rational>),
    BudgetAdditive { weights: Vec<Rational>, budget: Rational },
    /// Value per number of units, `0..=m`.
    MultiUnit(Vec<Rational>),
    MatroidRank { matroid: Matroid, weights: Vec<Rational> },
}

impl Valuation {
    pub fn kind(&self) -> &'static str {
        match self {
            Valuation::Explicit(_) => "explicit",
            Valuation::Additive(_) => "additive",
            Valuation::UnitDemand(_) => "unit_demand",
            Valuation::BudgetAdditive { .. } => "budget_additive",
            Valuation::MultiUnit(_) => "multi_unit",
            Valuation::MatroidRank { .. } => "matroid_rank",
        }
    }

    pub fn value(&self, s: ItemSet) -> Rational {
        match self {
            Valuation::Explicit(t) => t[s.idx()].clone(),
            Valuation::Additive(w) => s.iter().map(|j| &w[j]).sum(),
            Valuation::UnitDemand(w) => s.iter().map(|j| &w[j]).max().cloned().unwrap_or_else(Rational::zero),
            Valuation::BudgetAdditive { weights, budget } => {
                let t: Rational = s.iter().map(|j| &weights[j]).sum();
                if t < *budget {
                    t
                } else {
                    budget.clone()
                }
            }
            Valuation::MultiUnit(c) => c[s.len()].clone(),
            Valuation::MatroidRank { matroid, weights } => {
                let mut items: Vec<usize> = s.iter().filter(|&j| weights[j].is_positive()).collect();
                items.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));
                let mut acc = ItemSet::EMPTY;
                let mut total = Rational::zero();
                for j in items {
                    if matroid.is_independent(acc.with(j)) {
                        acc = acc.with(j);
                        total += &weights[j];
                    }
                }
                total
            }
        }
    }

    /// Value table over all `2^m` subsets.
    pub fn table(&self, m: usize) -> Vec<Rational> {
        match self {
            Valuation::Explicit(t) => t.clone(),
            _ => ItemSet::full(m).subsets().map(|s| self.value(s)).collect(),
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidValuation(msg));
        let nonneg = |w: &[Rational], what: &str| -> Result<()> {
            if w.len() != m {
                return Err(Error::InvalidValuation(format!("{what}: expected {m} weights, got {}", w.len())));
            }
            if let Some(j) = w.iter().position(|x| x.is_negative()) {
                return Err(Error::InvalidValuation(format!("{what}: negative weight on item {j}")));
            }
            Ok(())
        };
        match self {
            Valuation::Explicit(t) => {
                if t.len() != 1 << m {
                    return bad(format!("explicit table needs {} entries, got {}", 1usize << m, t.len()));
                }
                if !t[0].is_zero() {
                    return bad("explicit table is not normalized: v(∅) ≠ 0".into());
                }
                for s in 1..t.len() {
                    let set = ItemSet(s as u32);
                    if let Some(j) = set.iter().find(|&j| t[set.without(j).idx()] > t[s]) {
                        return bad(format!("explicit table is not monotone: removing item {j} from {set:?} raises the value"));
                    }
                }
                Ok(())
            }
            Valuation::Additive(w) => nonneg(w, "additive"),
            Valuation::UnitDemand(w) => nonneg(w, "unit_demand"),
            Valuation::BudgetAdditive { weights, budget } => {
                nonneg(weights, "budget_additive")?;
                if budget.is_negative() {
                    return bad("budget_additive: negative budget".into());
                }
                Ok(())
            }
            Valuation::MultiUnit(c) => {
                if c.len() != m + 1 {
                    return bad(format!("multi_unit needs {} values, got {}", m + 1, c.len()));
                }
                if !c[0].is_zero() {
                    return bad("multi_unit is not normalized".into());
                }
                if let Some(k) = (1..c.len()).find(|&k| c[k] < c[k - 1]) {
                    return bad(format!("multi_unit is not monotone at {k} units"));
                }
                Ok(())
            }
            Valuation::MatroidRank { matroid, weights } => {
                nonneg(weights, "matroid_rank")?;
                matroid.validate(m)
            }
        }
    }
}
