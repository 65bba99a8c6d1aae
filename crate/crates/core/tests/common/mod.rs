#![allow(dead_code)]

use cbe_core::instances::gen_random;
use cbe_core::market::{ItemSet, Market};
use cbe_core::Rational;
use proptest::prelude::*;

pub const GENERAL: [&str; 5] = ["explicit-monotone", "additive", "unit-demand", "budget-additive", "superadditive"];

pub fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

/// A random market of one of `classes`, with `m` and `n` in the given ranges.
pub fn market_of(classes: &'static [&'static str], m: std::ops::RangeInclusive<usize>, n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Market> {
    (0..classes.len(), m, n, any::<u64>()).prop_map(move |(c, m, n, seed)| gen_random(classes[c], m, n, seed).unwrap())
}

/// Optimal welfare by enumerating every assignment of items to consumers or to nobody.
pub fn brute_opt(market: &Market) -> Rational {
    let (m, n) = (market.m(), market.n());
    let mut best = Rational::zero();
    let total = (n + 1).pow(m as u32);
    for code in 0..total {
        let mut parts = vec![ItemSet::EMPTY; n + 1];
        let mut c = code;
        for j in 0..m {
            parts[c % (n + 1)] = parts[c % (n + 1)].with(j);
            c /= n + 1;
        }
        let w: Rational = (0..n).map(|i| market.value(i, parts[i])).sum();
        if w > best {
            best = w;
        }
    }
    best
}

/// Quarter-integral rational in `[0, max/4]`.
pub fn quarter(max: i64) -> impl Strategy<Value = Rational> + Clone {
    (0..=max).prop_map(|k| cbe_core::r(k, 4))
}
