mod common;

use cbe_core::equilibrium::verify_ce;
use cbe_core::instances::gen_random;
use cbe_core::market::{
    check_gross_substitutes, check_subadditive, check_superadditive, demand_query, demand_query_fast, induced_market,
    welfare_opt, ItemSet, Market, PricedBundling, Valuation,
};
use cbe_core::Rational;
use common::{brute_opt, market_of, quarter, GENERAL};
use proptest::prelude::*;

fn valuation(m: usize) -> impl Strategy<Value = Valuation> {
    let w = prop::collection::vec(quarter(16), m);
    prop_oneof![
        w.clone().prop_map(Valuation::Additive),
        w.clone().prop_map(Valuation::UnitDemand),
        (w.clone(), quarter(40)).prop_map(|(weights, budget)| Valuation::BudgetAdditive { weights, budget }),
        prop::collection::vec(quarter(8), m).prop_map(|steps| {
            let mut c = vec![Rational::zero()];
            for s in steps {
                let next = c.last().unwrap() + s;
                c.push(next);
            }
            Valuation::MultiUnit(c)
        }),
    ]
}

fn priced_bundling(m: usize) -> impl Strategy<Value = PricedBundling> {
    (prop::collection::vec(0..m, m), prop::collection::vec(quarter(24), m)).prop_map(move |(label, prices)| {
        let mut bundles: Vec<ItemSet> = Vec::new();
        let mut seen: Vec<usize> = Vec::new();
        for (j, l) in label.into_iter().enumerate() {
            match seen.iter().position(|&x| x == l) {
                Some(k) => bundles[k] = bundles[k].with(j),
                None => {
                    seen.push(l);
                    bundles.push(ItemSet::singleton(j));
                }
            }
        }
        let k = bundles.len();
        PricedBundling::new(bundles, prices[..k].to_vec())
    })
}

fn monotone_two_item() -> impl Strategy<Value = Valuation> {
    (quarter(16), quarter(16), quarter(16)).prop_map(|(a, b, extra)| {
        let top = Rational::max_of(&a, &b).clone();
        Valuation::Explicit(vec![Rational::zero(), a, b, top + extra])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn value_queries_match_the_explicit_table(m in 1usize..=6, v in (1usize..=6).prop_flat_map(valuation)) {
        let m = m.min(match &v { Valuation::MultiUnit(c) => c.len() - 1, Valuation::Additive(w) | Valuation::UnitDemand(w) => w.len(), Valuation::BudgetAdditive { weights, .. } => weights.len(), _ => m });
        let t = v.table(m);
        for s in ItemSet::full(m).subsets() {
            prop_assert_eq!(&v.value(s), &t[s.idx()]);
        }
    }

    #[test]
    fn fast_demand_matches_brute_force((v, pb) in (1usize..=6).prop_flat_map(|m| (valuation(m), priced_bundling(m)))) {
        if let Some((pay, set)) = demand_query_fast(&v, &pb) {
            let slow = demand_query(&v, &pb);
            prop_assert_eq!(pay, slow.payoff.clone());
            prop_assert!(slow.contains(set));
        }
    }

    #[test]
    fn additive_is_both_sub_and_superadditive(v in (1usize..=5).prop_flat_map(|m| prop::collection::vec(quarter(16), m))) {
        let m = v.len();
        let v = Valuation::Additive(v);
        prop_assert!(check_subadditive(&v, m) && check_superadditive(&v, m));
    }

    #[test]
    fn two_item_subadditivity_is_gross_substitutes(v in monotone_two_item()) {
        prop_assert_eq!(check_subadditive(&v, 2), check_gross_substitutes(&v, 2));
    }

    #[test]
    fn welfare_opt_matches_enumeration(market in market_of(&GENERAL, 1..=5, 1..=3)) {
        prop_assert_eq!(welfare_opt(&market).unwrap().0, brute_opt(&market));
    }

    #[test]
    fn induced_market_keeps_the_optimum_under_refinement(market in market_of(&GENERAL, 1..=5, 1..=3)) {
        let (opt, alloc) = welfare_opt(&market).unwrap();
        let mut bundles: Vec<ItemSet> = alloc.iter().copied().filter(|s| !s.is_empty()).collect();
        let rest = alloc.iter().fold(market.full(), |acc, s| acc.minus(*s));
        bundles.extend(rest.iter().map(ItemSet::singleton));
        let induced = induced_market(&market, &bundles).unwrap();
        prop_assert_eq!(welfare_opt(&induced).unwrap().0, opt);
    }

    #[test]
    fn matroid_rank_valuations_are_gross_substitutes(class in 0usize..2, m in 1usize..=5, n in 1usize..=2, seed in any::<u64>()) {
        let market: Market = gen_random(["matroid-rank-uniform", "matroid-rank-common"][class], m, n, seed).unwrap();
        for i in 0..n {
            prop_assert!(check_gross_substitutes(market.valuation(i), m));
        }
    }

    #[test]
    fn gross_substitutes_markets_have_item_price_equilibria(class in 0usize..3, m in 1usize..=4, n in 1usize..=3, seed in any::<u64>()) {
        let market = gen_random(["additive", "unit-demand", "matroid-rank-uniform"][class], m, n, seed).unwrap();
        let ce = cbe_core::equilibrium::ce_exists(&market).unwrap();
        prop_assert!(ce.exists);
        let report = verify_ce(&market, ce.prices.as_ref().unwrap(), &ce.allocation).unwrap();
        prop_assert!(report.pass);
        prop_assert_eq!(report.welfare, welfare_opt(&market).unwrap().0);
    }
}
