mod common;

use cbe_core::bounds::at_least_over_log;
use cbe_core::equilibrium::verify_cbe;
use cbe_core::lifting::{fgl_lift, log_bin, BinMode};
use cbe_core::market::{welfare_opt, ItemSet, PricedBundling};
use cbe_core::revenue::{
    common_matroid_revenue_cbe, extra_consumer_start, extra_consumer_step, uniform_matroid_revenue_cbe, ExtraStep,
};
use cbe_core::welfare::{greedy_ak, multiunit_cbe, restricted_w, subadditive_n_over_2};
use cbe_core::Rational;
use common::{market_of, q, GENERAL};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fgl_lift_is_deterministic(market in market_of(&GENERAL, 1..=4, 1..=3), cut in any::<u32>(), scale in 0i64..=4) {
        let m = market.m();
        let a = ItemSet(cut & ((1 << m) - 1));
        let bundles: Vec<ItemSet> = [a, market.full().minus(a)].into_iter().filter(|b| !b.is_empty()).collect();
        let prices = bundles.iter().map(|b| market.value(0, *b) * cbe_core::r(scale, 4)).collect();
        let pb = PricedBundling::new(bundles, prices);
        prop_assert_eq!(fgl_lift(&market, &pb).unwrap(), fgl_lift(&market, &pb).unwrap());
    }

    #[test]
    fn log_binning_keeps_a_logarithmic_share(market in market_of(&GENERAL, 1..=5, 1..=4)) {
        let (_, alloc) = welfare_opt(&market).unwrap();
        let total: Rational = (0..market.n()).map(|i| market.value(i, alloc[i])).sum();
        let lb = log_bin(&market, &alloc, BinMode::ByValue);
        let kept: Rational = (0..market.n()).map(|i| market.value(i, lb.filtered[i])).sum();
        let mu = Rational::from(market.mu());
        prop_assert!(at_least_over_log(&kept, &total, &q(2), &mu, &q(2)));
        if let Some(v) = &lb.v {
            for (i, s) in lb.filtered.iter().enumerate().filter(|(_, s)| !s.is_empty()) {
                let val = market.value(i, *s);
                prop_assert!(val >= *v && val < v * q(2));
            }
        }
    }

    #[test]
    fn greedy_steps_lose_at_most_2k_times_their_gain(market in market_of(&GENERAL, 1..=5, 1..=3), k in 1usize..=3) {
        prop_assume!(k <= market.m());
        let trace = greedy_ak(&market, k).unwrap();
        let mut free = ItemSet::full(market.n());
        let mut before = restricted_w(&market, k, trace.remaining[0], free);
        let step_bound = Rational::from(2 * k);
        for (t, (i, _, gain)) in trace.steps.iter().enumerate() {
            free = free.without(*i);
            let after = restricted_w(&market, k, trace.remaining[t + 1], free);
            prop_assert!(&before - &after <= &step_bound * gain);
            before = after;
        }
        prop_assert!(before.is_zero());
    }

    #[test]
    fn subadditive_split_verifies(market in market_of(&["additive", "unit-demand", "budget-additive"], 1..=4, 1..=4)) {
        let out = subadditive_n_over_2(&market).unwrap();
        prop_assert!(verify_cbe(&market, &out).unwrap().pass);
    }

    #[test]
    fn multi_unit_outputs_verify(market in market_of(&["multi-unit"], 1..=10, 1..=5)) {
        let res = multiunit_cbe(&market, None).unwrap();
        let v = verify_cbe(&market, &res.outcome).unwrap();
        prop_assert!(v.pass && res.bound.holds);
        prop_assert_eq!(v.welfare, res.welfare);
    }

    #[test]
    fn revenue_never_exceeds_welfare(uniform in any::<bool>(), market in market_of(&["matroid-rank-uniform"], 1..=5, 1..=4), other in market_of(&["matroid-rank-common"], 1..=5, 1..=4)) {
        let (market, res) = if uniform {
            let res = uniform_matroid_revenue_cbe(&market).unwrap();
            (market, res)
        } else {
            let res = common_matroid_revenue_cbe(&other).unwrap();
            (other, res)
        };
        let v = verify_cbe(&market, &res.outcome).unwrap();
        prop_assert!(v.pass && res.bound.holds);
        prop_assert!(v.revenue <= v.welfare);
        prop_assert!(res.revenue >= res.partial_revenue);
    }

    #[test]
    fn extra_consumer_steps_keep_the_definition(market in market_of(&["matroid-rank-common"], 1..=5, 1..=4)) {
        let (mut state, _) = extra_consumer_start(&market).unwrap();
        prop_assert!(state.check_properties().is_ok());
        let mut steps = 0;
        let mut last = (state.extra.len(), !state.q.is_zero());
        while !state.is_terminal() {
            let (next, step) = extra_consumer_step(&state).unwrap();
            if let ExtraStep::Raise { item, consumer, weight } = &step {
                let grown = next.bundles[*consumer];
                prop_assert!(grown.contains(*item));
                prop_assert_eq!(next.value(*consumer, grown), state.value(*consumer, state.bundles[*consumer]) + weight);
            }
            prop_assert!(next.check_properties().is_ok());
            let key = (next.extra.len(), !next.q.is_zero());
            prop_assert!(key < last);
            last = key;
            state = next;
            steps += 1;
            prop_assert!(steps <= market.m() + 1);
        }
    }
}
