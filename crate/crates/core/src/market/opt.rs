use super::{ItemSet, Market, Valuation};
use crate::error::{Error, Result};
use crate::numeric::Rational;

/// Default bound on the number of elementary steps of exhaustive procedures.
pub const DEFAULT_BUDGET: u128 = 500_000_000;

/// Maximum welfare over complete item allocations, with the first optimal
/// allocation found by the subset dynamic program. Because valuations are
/// monotone, restricting to complete allocations loses nothing.
pub fn welfare_opt(market: &Market) -> Result<(Rational, Vec<ItemSet>)> {
    welfare_opt_budget(market, DEFAULT_BUDGET)
}

pub fn welfare_opt_budget(market: &Market, budget: u128) -> Result<(Rational, Vec<ItemSet>)> {
    let (m, n) = (market.m(), market.n());
    if market.all_multi_unit() {
        return Ok(multi_unit_opt(market));
    }
    let needed = (n as u128).saturating_mul(3u128.saturating_pow(m as u32));
    if needed > budget {
        return Err(Error::Budget { what: "welfare_opt", needed, budget });
    }
    let tables = market.value_tables();
    Ok(welfare_opt_tables(&tables, m, |_, _| true))
}

/// Like `welfare_opt`, but consumer `i` may only receive sets with `allowed(i, S)`.
/// Returns `None` when no complete allocation respects the filter.
pub fn welfare_opt_filtered(
    tables: &[Vec<Rational>],
    m: usize,
    allowed: impl Fn(usize, ItemSet) -> bool,
) -> Option<(Rational, Vec<ItemSet>)> {
    subset_dp(tables, m, allowed)
}

/// Subset dynamic program over explicit tables; every set is allowed.
pub fn welfare_opt_tables(
    tables: &[Vec<Rational>],
    m: usize,
    allowed: impl Fn(usize, ItemSet) -> bool,
) -> (Rational, Vec<ItemSet>) {
    subset_dp(tables, m, allowed).expect("some complete allocation is allowed")
}

fn subset_dp(
    tables: &[Vec<Rational>],
    m: usize,
    allowed: impl Fn(usize, ItemSet) -> bool,
) -> Option<(Rational, Vec<ItemSet>)> {
    let n = tables.len();
    let size = 1usize << m;
    // f[S]: best welfare of consumers 0..=i sharing exactly S.
    let mut f: Vec<Option<Rational>> =
        (0..size).map(|s| allowed(0, ItemSet(s as u32)).then(|| tables[0][s].clone())).collect();
    let mut choice: Vec<Vec<u32>> = vec![(0..size as u32).collect()];
    for (i, table) in tables.iter().enumerate().skip(1) {
        let mut g: Vec<Option<Rational>> = vec![None; size];
        let mut ch = vec![0u32; size];
        for s in 0..size {
            for t in ItemSet(s as u32).subsets() {
                if !allowed(i, t) {
                    continue;
                }
                let Some(rest) = &f[s & !(t.idx())] else { continue };
                let val = &table[t.idx()] + rest;
                if g[s].as_ref().is_none_or(|b| val > *b) {
                    g[s] = Some(val);
                    ch[s] = t.0;
                }
            }
        }
        f = g;
        choice.push(ch);
    }
    let best = f[size - 1].clone()?;
    let mut alloc = vec![ItemSet::EMPTY; n];
    let mut s = (size - 1) as u32;
    for i in (0..n).rev() {
        let t = choice[i][s as usize];
        alloc[i] = ItemSet(t);
        s &= !t;
    }
    Some((best, alloc))
}

/// Count dynamic program for markets of identical units. Units are handed out
/// in label order: consumer 0 gets the first block of items, and so on.
fn multi_unit_opt(market: &Market) -> (Rational, Vec<ItemSet>) {
    let m = market.m();
    let curves: Vec<&Vec<Rational>> = market
        .consumers()
        .iter()
        .map(|c| match &c.valuation {
            Valuation::MultiUnit(v) => v,
            _ => unreachable!(),
        })
        .collect();
    let (value, counts) = multi_unit_counts(&curves, m);
    let mut alloc = Vec::with_capacity(counts.len());
    let mut next = 0;
    for k in counts {
        alloc.push(ItemSet::from_items(next..next + k));
        next += k;
    }
    (value, alloc)
}

/// Optimal split of `m` units among per-count valuation curves. Among optimal
/// splits, one serving the most consumers is preferred, then smaller shares for
/// later consumers.
pub(crate) fn multi_unit_counts(curves: &[&Vec<Rational>], m: usize) -> (Rational, Vec<usize>) {
    let n = curves.len();
    let served = |k: usize| usize::from(k > 0);
    let mut f: Vec<(Rational, usize)> = (0..=m).map(|c| (curves[0][c].clone(), served(c))).collect();
    let mut choice = vec![(0..=m).collect::<Vec<usize>>()];
    for curve in &curves[1..] {
        let mut g = vec![(Rational::zero(), 0); m + 1];
        let mut ch = vec![0usize; m + 1];
        for c in 0..=m {
            let mut best: Option<(Rational, usize)> = None;
            for k in 0..=c {
                let val = (&curve[k] + &f[c - k].0, f[c - k].1 + served(k));
                if best.as_ref().is_none_or(|b| val > *b) {
                    best = Some(val);
                    ch[c] = k;
                }
            }
            g[c] = best.unwrap();
        }
        f = g;
        choice.push(ch);
    }
    let mut counts = vec![0; n];
    let mut c = m;
    for i in (0..n).rev() {
        counts[i] = choice[i][c];
        c -= counts[i];
    }
    (f[m].0.clone(), counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::r;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn complement_versus_unit_demand() {
        let v1 = Valuation::Explicit(vec![q(0), q(1), q(1), r(21, 10)]);
        let v2 = Valuation::UnitDemand(vec![q(2), q(2)]);
        let mk = Market::with_default_labels(2, vec![v1, v2]).unwrap();
        let (w, alloc) = welfare_opt(&mk).unwrap();
        assert_eq!(w, q(3));
        assert_eq!(mk.welfare(&alloc), q(3));
    }

    #[test]
    fn single_consumer_takes_everything() {
        let mk = Market::with_default_labels(3, vec![Valuation::Additive(vec![q(1), q(2), q(3)])]).unwrap();
        assert_eq!(welfare_opt(&mk).unwrap(), (q(6), vec![ItemSet::full(3)]));
    }

    #[test]
    fn count_dp_agrees_with_subset_dp() {
        let a = Valuation::MultiUnit(vec![q(0), q(3), q(4), q(4)]);
        let b = Valuation::MultiUnit(vec![q(0), q(1), q(5), q(6)]);
        let mk = Market::with_default_labels(3, vec![a, b]).unwrap();
        let (w, alloc) = welfare_opt(&mk).unwrap();
        let (w2, _) = welfare_opt_tables(&mk.value_tables(), 3, |_, _| true);
        assert_eq!(w, w2);
        assert_eq!(mk.welfare(&alloc), w);
    }

    #[test]
    fn budget_guard() {
        let mk = Market::with_default_labels(8, vec![Valuation::Additive(vec![q(1); 8]); 3]).unwrap();
        assert!(matches!(welfare_opt_budget(&mk, 100), Err(Error::Budget { .. })));
    }
}
