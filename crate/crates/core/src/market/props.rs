use super::{bundle_table, Consumer, ItemSet, Market, Valuation};
use crate::error::Result;
use crate::numeric::Rational;

/// `v(T) + v(U) ≥ v(T ∪ U)` for all disjoint `T, U` (equivalent to all pairs for monotone `v`).
pub fn check_subadditive(v: &Valuation, m: usize) -> bool {
    table_subadditive(&v.table(m), m)
}

/// `v(T) + v(U) ≤ v(T ∪ U)` for all disjoint `T, U`.
pub fn check_superadditive(v: &Valuation, m: usize) -> bool {
    table_superadditive(&v.table(m), m)
}

fn disjoint_pairs(m: usize, mut f: impl FnMut(usize, usize) -> bool) -> bool {
    let full = ItemSet::full(m);
    for s in full.subsets() {
        for t in s.subsets() {
            let u = s.minus(t);
            if t.0 < u.0 && !f(t.idx(), u.idx()) {
                return false;
            }
        }
    }
    true
}

pub fn table_subadditive(t: &[Rational], m: usize) -> bool {
    disjoint_pairs(m, |a, b| &t[a] + &t[b] >= t[a | b])
}

pub fn table_superadditive(t: &[Rational], m: usize) -> bool {
    disjoint_pairs(m, |a, b| &t[a] + &t[b] <= t[a | b])
}

/// Gross substitutes via the local exchange conditions: for every `S` and
/// distinct `i, j, k ∉ S`,
/// `v(S+i+j) + v(S) ≤ v(S+i) + v(S+j)` and
/// `v(S+i+j) + v(S+k) ≤ max(v(S+i+k) + v(S+j), v(S+j+k) + v(S+i))`.
pub fn check_gross_substitutes(v: &Valuation, m: usize) -> bool {
    let t = v.table(m);
    let full = ItemSet::full(m);
    let val = |s: ItemSet| &t[s.idx()];
    for s in full.subsets() {
        let rest: Vec<usize> = full.minus(s).to_vec();
        for (a, &i) in rest.iter().enumerate() {
            for &j in &rest[a + 1..] {
                let sij = val(s.with(i).with(j));
                if sij + val(s) > val(s.with(i)) + val(s.with(j)) {
                    return false;
                }
                for &k in &rest {
                    if k == i || k == j {
                        continue;
                    }
                    let lhs = sij + val(s.with(k));
                    let x = val(s.with(i).with(k)) + val(s.with(j));
                    let y = val(s.with(j).with(k)) + val(s.with(i));
                    if lhs > x && lhs > y {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// The market whose goods are the bundles: `v'_i(T) = v_i(∪_{B∈T} B)`.
/// Goods are labelled by the concatenated labels of their items.
pub fn induced_market(market: &Market, bundles: &[ItemSet]) -> Result<Market> {
    let labels: Vec<String> = bundles.iter().map(|b| market.set_label(*b)).collect();
    let consumers = market
        .consumers()
        .iter()
        .map(|c| Consumer { name: c.name.clone(), valuation: Valuation::Explicit(bundle_table(&c.valuation, bundles)) })
        .collect();
    Market::new(labels, consumers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::Matroid;
    use crate::numeric::r;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn additive_is_both() {
        let v = Valuation::Additive(vec![q(1), q(2), q(3)]);
        assert!(check_subadditive(&v, 3));
        assert!(check_superadditive(&v, 3));
        assert!(check_gross_substitutes(&v, 3));
    }

    #[test]
    fn complement_is_not_subadditive() {
        let v = Valuation::Explicit(vec![q(0), q(1), q(1), r(21, 10)]);
        assert!(!check_subadditive(&v, 2));
        assert!(check_superadditive(&v, 2));
        assert!(!check_gross_substitutes(&v, 2));
    }

    #[test]
    fn matroid_rank_is_gross_substitutes() {
        let fam: Vec<ItemSet> = ItemSet::full(4).subsets().filter(|s| s.len() <= 2).collect();
        let v = Valuation::MatroidRank { matroid: Matroid::family(4, &fam).unwrap(), weights: vec![q(4), q(1), q(3), q(2)] };
        assert!(check_gross_substitutes(&v, 4));
    }

    #[test]
    fn induced_grand_bundle() {
        let mk = Market::with_default_labels(2, vec![Valuation::Additive(vec![q(1), q(2)])]).unwrap();
        let ind = induced_market(&mk, &[ItemSet::full(2)]).unwrap();
        assert_eq!(ind.m(), 1);
        assert_eq!(ind.items()[0], "ab");
        assert_eq!(ind.value(0, ItemSet::full(1)), q(3));
    }
}
