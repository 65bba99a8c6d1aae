use super::ItemSet;
use crate::error::{Error, Result};

/// A matroid over the item set `0..m`.
#[derive(Clone, Debug, PartialEq)]
pub enum Matroid {
    Uniform(usize),
    /// Independence indicator indexed by bitmask.
    Family(Vec<bool>),
}

impl Matroid {
    /// Builds an explicit-family matroid over `m` items, checking the matroid axioms.
    pub fn family(m: usize, independent: &[ItemSet]) -> Result<Self> {
        let mut ind = vec![false; 1 << m];
        for s in independent {
            if !s.is_subset(ItemSet::full(m)) {
                return Err(Error::InvalidValuation("independent set outside the ground set".into()));
            }
            ind[s.idx()] = true;
        }
        let mat = Matroid::Family(ind);
        mat.validate(m)?;
        Ok(mat)
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        let Matroid::Family(ind) = self else { return Ok(()) };
        let bad = |msg: &str| Err(Error::InvalidValuation(format!("matroid: {msg}")));
        if ind.len() != 1 << m {
            return bad("family table has the wrong size");
        }
        if !ind[0] {
            return bad("the empty set must be independent");
        }
        for s in 0..ind.len() {
            if !ind[s] {
                continue;
            }
            let s = ItemSet(s as u32);
            if s.iter().any(|j| !ind[s.without(j).idx()]) {
                return bad("family is not downward closed");
            }
        }
        // With downward closure, exchange reduces to: |I| < |J| implies some j ∈ J∖I extends I.
        for a in 0..ind.len() {
            if !ind[a] {
                continue;
            }
            for b in 0..ind.len() {
                if !ind[b] || b.count_ones() <= a.count_ones() {
                    continue;
                }
                let (ia, ib) = (ItemSet(a as u32), ItemSet(b as u32));
                if !ib.minus(ia).iter().any(|j| ind[ia.with(j).idx()]) {
                    return bad("exchange property fails");
                }
            }
        }
        Ok(())
    }

    pub fn is_independent(&self, s: ItemSet) -> bool {
        match self {
            Matroid::Uniform(k) => s.len() <= *k,
            Matroid::Family(ind) => ind[s.idx()],
        }
    }

    pub fn rank(&self, s: ItemSet) -> usize {
        match self {
            Matroid::Uniform(k) => s.len().min(*k),
            Matroid::Family(_) => {
                let mut acc = ItemSet::EMPTY;
                for j in s.iter() {
                    if self.is_independent(acc.with(j)) {
                        acc = acc.with(j);
                    }
                }
                acc.len()
            }
        }
    }

    /// Every independent set, in increasing bitmask order.
    pub fn independent_sets(&self, m: usize) -> Vec<ItemSet> {
        ItemSet::full(m).subsets().filter(|s| self.is_independent(*s)).collect()
    }
}
