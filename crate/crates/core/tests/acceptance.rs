//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! summary is always printed; exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use cbe_core::bounds::{at_least_over_log, at_least_over_sqrt, ceil_cbrt};
use cbe_core::equilibrium::{cbe_search_with, ce_exists, verify_cbe};
use cbe_core::instances::{equal_revenue_values, ex81, ex82, gen_random, prop22, revenue_lb, table1, thm42};
use cbe_core::lifting::{check_fgl_properties, fgl_lift, is_high_demand, lift_high_demand, lift_partial, log_bin, BinMode, PartialCbe};
use cbe_core::lp_models::{cap2_lp, config_lp, menu_lp, nlpe_to_cbe};
use cbe_core::market::{
    bell, blocks_of, check_gross_substitutes, check_subadditive, demand_query, demand_query_fast, set_partitions,
    Consumer, ItemSet, Market, Outcome, PricedBundling, Valuation,
};
use cbe_core::numeric::{LinearProgram, LpStatus, Rel, Sense};
use cbe_core::revenue::{
    common_matroid_revenue_cbe, extra_consumer_start, extra_consumer_step, uniform_matroid_revenue_cbe, MatroidRevenueResult,
};
use cbe_core::welfare::{budget_additive_cbe, budget_greedy, general_m23, general_sqrt, greedy_ak, greedy_item_dominance, multiunit_cbe, restricted_w, two_consumer_cbe};
use cbe_core::{r, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Check = Result<String, String>;

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn eq(what: &str, expected: &Rational, actual: &Rational) -> Result<(), String> {
    ensure(expected == actual, || format!("{what}: expected {expected}, got {actual}"))
}

fn verified(market: &Market, out: &Outcome, what: &str) -> Result<Rational, String> {
    let v = verify_cbe(market, out).map_err(|e| format!("{what}: {e}"))?;
    ensure(v.pass, || format!("{what}: outcome is not a bundling equilibrium"))?;
    Ok(v.welfare)
}

fn err<E: std::fmt::Display>(what: &str) -> impl Fn(E) -> String + '_ {
    move |e| format!("{what}: {e}")
}

/// Optimal welfare by direct enumeration of item assignments (n^m).
fn brute_opt(market: &Market) -> Rational {
    let (m, n) = (market.m(), market.n());
    let mut best = Rational::zero();
    let mut owner = vec![0usize; m];
    loop {
        let mut parts = vec![ItemSet::EMPTY; n];
        for (j, &i) in owner.iter().enumerate() {
            parts[i] = parts[i].with(j);
        }
        let w: Rational = (0..n).map(|i| market.value(i, parts[i])).sum();
        if w > best {
            best = w;
        }
        let mut j = 0;
        while j < m {
            owner[j] += 1;
            if owner[j] < n {
                break;
            }
            owner[j] = 0;
            j += 1;
        }
        if j == m {
            return best;
        }
    }
}

fn harmonic(from: usize, to: usize) -> Rational {
    (from..=to).map(|i| r(1, i as i64)).sum()
}

fn ac1() -> Check {
    let e = r(1, 10);
    let market = prop22(&e).map_err(err("prop22"))?;
    eq("welfare_opt", &q(3), &brute_opt(&market))?;
    eq("config LP", &r(61, 20), &config_lp(&market).map_err(err("config_lp"))?.fractional)?;
    let ce = ce_exists(&market).map_err(err("ce_exists"))?;
    ensure(!ce.exists, || "a CE was reported".into())?;
    let s = cbe_search_with(&market, bell(2)).map_err(err("search"))?;
    eq("best CBE welfare", &r(21, 10), &s.best_welfare)?;
    let w = &s.witness;
    ensure(w.bundles == vec![ItemSet::full(2)] && w.allocation[0] == ItemSet::singleton(0), || {
        "best CBE is not the grand bundle sold to consumer 1".into()
    })?;
    let ratio = q(3) / &s.best_welfare;
    eq("ratio", &r(10, 7), &ratio)?;
    ensure(ratio < r(3, 2), || "ratio is not below 3/2".into())?;
    Ok("OPT 3, LP 61/20, no CE, best 21/10, ratio 10/7".into())
}

fn ac2() -> Check {
    let e = r(1, 10);
    let mut failures = Vec::new();
    for m in 3..=5 {
        let market = thm42(m, &e).map_err(err("thm42"))?;
        let s = cbe_search_with(&market, bell(m)).map_err(err("search"))?;
        let rows: Vec<_> = s.table.iter().filter(|row| row.ce_exists).collect();
        ensure(!rows.is_empty(), || format!("m={m}: no bundling admits a CE"))?;
        ensure(rows.iter().all(|row| row.first_gets_all == Some(true)), || {
            format!("m={m}: some CBE does not give every unit to consumer 1")
        })?;
        eq(&format!("m={m} best CBE welfare"), &((q(1) + &e) * q(2)), &s.best_welfare)?;
        let stated = q(1) + &e + harmonic(2, m);
        let opt = brute_opt(&market);
        if opt != stated {
            failures.push(format!("m={m} welfare_opt: expected {stated}, got {opt}"));
        }
    }
    if failures.is_empty() {
        Ok("m=3,4,5: every CBE gives consumer 1 all units, best 11/5, OPT as stated".into())
    } else {
        Err(failures.join("; "))
    }
}

fn ac3() -> Check {
    let (e, d) = (r(1, 100), r(1, 100));
    let market = table1(&e, &d).map_err(err("table1"))?;
    eq("config LP", &(q(5) - &e / q(2)), &config_lp(&market).map_err(err("config_lp"))?.fractional)?;
    let s = cbe_search_with(&market, bell(market.m())).map_err(err("search"))?;
    eq("best CBE welfare", &q(4), &s.best_welfare)?;
    // Convergence of OPT/best to 5/4 along samples where the stated optimum is attained.
    for (e, d) in [(r(1, 100), r(1, 1000)), (r(1, 1000), r(1, 10000)), (r(1, 10000), r(1, 100000))] {
        let market = table1(&e, &d).map_err(err("table1"))?;
        let opt = brute_opt(&market);
        eq(&format!("welfare_opt at eps={e}, delta={d}"), &(q(5) - &e / q(2) - &d), &opt)?;
        let best = cbe_search_with(&market, bell(market.m())).map_err(err("search"))?.best_welfare;
        eq("distance of the ratio from 5/4", &((&e / q(2) + &d) / q(4)), &(r(5, 4) - &opt / &best))?;
    }
    let stated = q(5) - &e / q(2) - &d;
    eq("welfare_opt at eps=delta=1/100", &stated, &brute_opt(&market))?;
    Ok("OPT 5-e/2-d, LP 5-e/2, best 4, ratio gap (e/2+d)/4".into())
}

fn ac4() -> Check {
    for (name, market, f, i) in [("8.1", ex81(), q(11), q(8)), ("8.2", ex82(), q(4), r(7, 2))] {
        let res = cap2_lp(&market).map_err(err("cap2"))?;
        eq(&format!("{name} fractional"), &f, &res.fractional)?;
        eq(&format!("{name} integral"), &i, &res.integral)?;
        eq(&format!("{name} integral vs brute force"), &brute_opt(&market), &res.integral)?;
    }
    let mut integral = 0;
    let mut seed = 0;
    while integral < 50 {
        ensure(seed < 5000, || format!("only {integral} cap2-integral instances in 5000 draws"))?;
        let m = 1 + (seed as usize % 4);
        let n = 1 + (seed as usize / 4 % 3);
        let market = gen_random("superadditive", m, n, seed).map_err(err("gen"))?;
        seed += 1;
        let res = cap2_lp(&market).map_err(err("cap2"))?;
        if !res.is_integral {
            continue;
        }
        integral += 1;
        let out = nlpe_to_cbe(&market, &res).map_err(err("nlpe_to_cbe"))?;
        let w = verified(&market, &out, "nlpe_to_cbe")?;
        eq(&format!("seed {} welfare", seed - 1), &brute_opt(&market), &w)?;
    }
    Ok(format!("goldens 11/8 and 4/(7/2); {integral} integral instances from {seed} draws reach OPT"))
}

fn two_item_values() -> Vec<[Rational; 4]> {
    let grid: Vec<Rational> = (0..=8).map(|k| r(k, 2)).collect();
    let mut out = Vec::new();
    for a in &grid {
        for b in &grid {
            for ab in &grid {
                if ab >= a && ab >= b {
                    out.push([Rational::zero(), a.clone(), b.clone(), ab.clone()]);
                }
            }
        }
    }
    out
}

fn two_consumer_case(market: &Market) -> Result<(), String> {
    let res = two_consumer_cbe(market).map_err(err("two_consumer_cbe"))?;
    let w = verified(market, &res.outcome, "two_consumer_cbe")?;
    let full = market.full();
    let opt = full.subsets().map(|s| market.value(0, s) + market.value(1, full.minus(s))).max().unwrap();
    eq("OPT", &opt, &res.opt)?;
    ensure(&w * q(3) >= &opt * q(2), || format!("welfare {w} below 2/3 of {opt}"))?;
    let m = market.m();
    if (0..2).all(|i| check_subadditive(market.valuation(i), m)) {
        eq("both-subadditive welfare", &opt, &w)?;
    }
    Ok(())
}

fn ac5() -> Check {
    let tables = two_item_values();
    let grid: Result<usize, String> = tables
        .par_iter()
        .map(|t1| {
            for t2 in &tables {
                let market = Market::with_default_labels(2, vec![Valuation::Explicit(t1.to_vec()), Valuation::Explicit(t2.to_vec())])
                    .map_err(err("market"))?;
                two_consumer_case(&market).map_err(|e| format!("{t1:?} / {t2:?}: {e}"))?;
            }
            Ok(tables.len())
        })
        .sum();
    let grid = grid?;
    for seed in 0..200u64 {
        let m = 1 + (seed as usize % 5);
        let market = gen_random("explicit-monotone", m, 2, 1000 + seed).map_err(err("gen"))?;
        two_consumer_case(&market).map_err(|e| format!("random seed {seed}: {e}"))?;
    }
    Ok(format!("{grid} grid markets and 200 random markets"))
}

/// Multi-unit OPT by a DP over unit counts, independent of the item-level search.
fn multi_unit_opt(curves: &[Vec<Rational>], m: usize) -> Rational {
    let mut best = vec![Rational::zero(); m + 1];
    for c in curves {
        let mut next = best.clone();
        for used in 0..=m {
            for k in 0..=m - used {
                let cand = &best[used] + &c[k];
                if cand > next[used + k] {
                    next[used + k] = cand;
                }
            }
        }
        best = next;
    }
    best.into_iter().max().unwrap()
}

fn same_demand(market: &Market, pb: &PricedBundling) -> Result<usize, String> {
    for i in 0..market.n() {
        let v = market.valuation(i);
        let (pay, set) = demand_query_fast(v, pb).ok_or("no fast demand path")?;
        let slow = demand_query(v, pb);
        ensure(pay == slow.payoff && slow.contains(set), || format!("consumer {i}: DP demand differs from brute force"))?;
    }
    Ok(market.n())
}

fn ac6() -> Check {
    let results: Result<Vec<usize>, String> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let m = 1 + (seed as usize % 12);
            let n = 1 + (seed as usize / 12 % 6);
            let market = gen_random("multi-unit", m, n, 2000 + seed).map_err(err("gen"))?;
            let res = multiunit_cbe(&market, None).map_err(err("multiunit_cbe"))?;
            let w = verified(&market, &res.outcome, "multiunit_cbe")?;
            let curves: Vec<Vec<Rational>> = (0..n)
                .map(|i| match market.valuation(i) {
                    Valuation::MultiUnit(c) => c.clone(),
                    _ => unreachable!(),
                })
                .collect();
            let opt = multi_unit_opt(&curves, m);
            eq(&format!("seed {seed} OPT"), &opt, &res.opt)?;
            let mu = Rational::from(m.min(n));
            ensure(at_least_over_log(&w, &opt, &q(20), &mu, &q(2)), || {
                format!("seed {seed}: welfare {w} below OPT/(20(log2 mu + 2)) with OPT {opt}")
            })?;
            let mut queries = same_demand(&market, &res.outcome.priced())?;
            if let Some(hd) = &res.high_demand {
                queries += same_demand(&market, hd)?;
            }
            Ok(queries)
        })
        .collect();
    let queries: usize = results?.iter().sum();
    Ok(format!("200 markets, {queries} DP demand queries match brute force"))
}

const GENERAL_CLASSES: [&str; 5] = ["explicit-monotone", "additive", "unit-demand", "budget-additive", "superadditive"];

fn ac7() -> Check {
    let results: Result<Vec<(usize, usize)>, String> = (0..120u64)
        .into_par_iter()
        .map(|seed| {
            let m = 1 + (seed as usize % 6);
            let n = 1 + (seed as usize / 6 % 4);
            let class = GENERAL_CLASSES[seed as usize % GENERAL_CLASSES.len()];
            let market = gen_random(class, m, n, 3000 + seed).map_err(err("gen"))?;
            let all = ItemSet::full(n);
            let mut sqrt_runs = 0;
            for k in 1..=m {
                let trace = greedy_ak(&market, k).map_err(err("greedy_ak"))?;
                let got: Rational = (0..n).map(|i| market.value(i, trace.allocation[i])).sum();
                let w = restricted_w(&market, k, market.full(), all);
                ensure(&got * Rational::from(2 * k) >= w, || format!("seed {seed} k={k}: greedy {got} below W/2k, W = {w}"))?;
                if k > ceil_cbrt(m) {
                    continue;
                }
                let lb = log_bin(&market, &trace.allocation, BinMode::ByValue);
                let Some(v) = lb.v else { continue };
                let res = general_sqrt(&market, &lb.filtered, &v).map_err(err("general_sqrt"))?;
                verified(&market, &res.outcome, "general_sqrt")?;
                let total: Rational = (0..n).map(|i| market.value(i, lb.filtered[i])).sum();
                let r_parts = Rational::from(lb.filtered.iter().filter(|s| !s.is_empty()).count());
                ensure(at_least_over_sqrt(&res.aggregate, &total, &q(4), &q(4), &r_parts), || {
                    format!("seed {seed} k={k}: aggregate {} below {total}/(4 sqrt(r) + 4)", res.aggregate)
                })?;
                sqrt_runs += 1;
            }
            let res = general_m23(&market).map_err(err("general_m23"))?;
            verified(&market, &res.outcome, "general_m23")?;
            Ok((m, sqrt_runs))
        })
        .collect();
    let results = results?;
    let ks: usize = results.iter().map(|(m, _)| m).sum();
    let sqrt: usize = results.iter().map(|(_, s)| s).sum();
    Ok(format!("120 markets: {ks} greedy runs, {sqrt} square-root bundlings, all m23 outputs verified"))
}

fn ac8() -> Check {
    let results: Result<Vec<()>, String> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let m = 1 + (seed as usize % 6);
            let n = 1 + (seed as usize / 6 % 4);
            let market = gen_random("budget-additive", m, n, 4000 + seed).map_err(err("gen"))?;
            let res = budget_additive_cbe(&market).map_err(err("budget_additive_cbe"))?;
            let w = verified(&market, &res.outcome, "budget_additive_cbe")?;
            let opt = brute_opt(&market);
            ensure(at_least_over_log(&w, &opt, &q(32), &Rational::from(m), &q(2)), || {
                format!("seed {seed}: welfare {w} below OPT/(32(log2 m + 2)), OPT {opt}")
            })?;
            let greedy = budget_greedy(&market).map_err(err("budget_greedy"))?;
            let gw = market.welfare(&greedy);
            ensure(&gw * q(4) >= opt, || format!("seed {seed}: greedy welfare {gw} below OPT/4"))?;
            ensure(greedy_item_dominance(&market, &res.split), || format!("seed {seed}: greedy item dominance fails"))?;
            Ok(())
        })
        .collect();
    results?;
    Ok("200 markets verified, bound and both greedy claims hold".into())
}

fn revenue_case(market: &Market, res: &MatroidRevenueResult, tag: &str) -> Result<(), String> {
    verified(market, &res.outcome, tag)?;
    let rev = res.outcome.revenue();
    let opt = brute_opt(market);
    let m = market.m();
    let holds = if m >= 2 {
        at_least_over_log(&rev, &opt, &q(12), &Rational::from(m), &q(0))
    } else {
        at_least_over_log(&rev, &opt, &q(4), &q(1), &q(2))
    };
    ensure(holds, || format!("{tag}: revenue {rev} too small against OPT {opt}"))
}

fn ac9() -> Check {
    let uniform: Result<Vec<()>, String> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let m = 1 + (seed as usize % 5);
            let n = 1 + (seed as usize / 5 % 4);
            let market = gen_random("matroid-rank-uniform", m, n, 5000 + seed).map_err(err("gen"))?;
            let res = uniform_matroid_revenue_cbe(&market).map_err(err("uniform"))?;
            revenue_case(&market, &res, &format!("uniform seed {seed}"))
        })
        .collect();
    uniform?;
    let common: Result<Vec<usize>, String> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let m = 1 + (seed as usize % 5);
            let n = 1 + (seed as usize / 5 % 4);
            let tag = format!("common seed {seed}");
            let market = gen_random("matroid-rank-common", m, n, 6000 + seed).map_err(err("gen"))?;
            let res = common_matroid_revenue_cbe(&market).map_err(err("common"))?;
            revenue_case(&market, &res, &tag)?;
            let (mut state, _) = extra_consumer_start(&market).map_err(err("start"))?;
            state.check_properties().map_err(|e| format!("{tag} start: {e}"))?;
            let mut steps = 0;
            while !state.is_terminal() {
                ensure(steps <= m, || format!("{tag}: more than m+1 steps"))?;
                state = extra_consumer_step(&state).map_err(err("step"))?.0;
                steps += 1;
                state.check_properties().map_err(|e| format!("{tag} step {steps}: {e}"))?;
            }
            ensure(steps <= m + 1 && res.steps.len() == steps, || format!("{tag}: {steps} steps"))?;
            Ok(steps)
        })
        .collect();
    let steps: usize = common?.iter().sum();
    Ok(format!("100 uniform + 100 common markets, revenue >= OPT/(12 log2 m) for m >= 2, {steps} extra-consumer steps checked"))
}

fn ac10() -> Check {
    for n in 1..=5 {
        let market = revenue_lb(n).map_err(err("revenue_lb"))?;
        eq(&format!("n={n} OPT"), &harmonic(1, n), &brute_opt(&market))?;
        let s = cbe_search_with(&market, bell(n)).map_err(err("search"))?;
        ensure(s.best_revenue <= q(2), || format!("n={n}: CBE revenue {} above 2", s.best_revenue))?;
    }
    Ok("n=1..5: max CBE revenue <= 2, OPT = H_n".into())
}

fn ac11() -> Check {
    let caps = [q(0), r(1, 4), r(1, 2), r(3, 4), q(1)];
    for n in 2..=8 {
        let values = equal_revenue_values(n);
        let types = Rational::from(n - 1);
        for cap in &caps {
            let res = menu_lp(&values, cap).map_err(err("menu_lp"))?;
            ensure(res.revenue <= cap / &types, || format!("n={n} cap={cap}: revenue {}", res.revenue))?;
        }
        let oracle = values
            .iter()
            .map(|p| p * Rational::from(values.iter().filter(|v| *v >= p).count()) / &types)
            .max()
            .unwrap();
        let full = menu_lp(&values, &q(1)).map_err(err("menu_lp"))?;
        eq(&format!("n={n} reserve oracle"), &oracle, &full.revenue)?;
        eq(&format!("n={n} cap 1"), &r(1, n as i64), &full.revenue)?;
    }
    Ok("n=2..8, five caps each".into())
}

fn random_bundling(rng: &mut ChaCha8Rng, m: usize) -> Vec<ItemSet> {
    let parts = set_partitions(m);
    blocks_of(&parts[rng.gen_range(0..parts.len())])
}

fn zeroed(market: &Market, members: ItemSet) -> Market {
    let consumers = market
        .consumers()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if members.contains(i) {
                c.clone()
            } else {
                Consumer { name: c.name.clone(), valuation: Valuation::Additive(vec![Rational::zero(); market.m()]) }
            }
        })
        .collect();
    Market::new(market.items().to_vec(), consumers).expect("same shape")
}

fn ac12() -> Check {
    let results: Result<Vec<(bool, bool)>, String> = (0..500u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(7000 + seed);
            let m = rng.gen_range(1..=4);
            let n = rng.gen_range(1..=4);
            let class = GENERAL_CLASSES[rng.gen_range(0..GENERAL_CLASSES.len())];
            let market = gen_random(class, m, n, 8000 + seed).map_err(err("gen"))?;
            let tag = format!("seed {seed}");
            let bundles = random_bundling(&mut rng, m);

            let prices = bundles
                .iter()
                .map(|b| {
                    let top = (0..n).map(|i| market.value(i, *b)).max().unwrap();
                    top * r(rng.gen_range(0..=5), 4)
                })
                .collect();
            let pb = PricedBundling::new(bundles.clone(), prices);
            let out = fgl_lift(&market, &pb).map_err(err("fgl_lift"))?;
            check_fgl_properties(&market, &pb, &out).map_err(|e| format!("{tag}: {e}"))?;

            let k = bundles.len();
            let hd_prices = bundles
                .iter()
                .map(|b| {
                    let mut vals: Vec<Rational> = (0..n).map(|i| market.value(i, *b)).collect();
                    vals.sort_by(|a, b| b.cmp(a));
                    vals.get(k - 1).cloned().unwrap_or_default() / q(2)
                })
                .collect();
            let hd = PricedBundling::new(bundles.clone(), hd_prices);
            let high = is_high_demand(&market, &hd);
            if high {
                let out = lift_high_demand(&market, &hd).map_err(err("lift_high_demand"))?;
                let w = verified(&market, &out, &format!("{tag} high demand"))?;
                ensure(out.allocated() == ItemSet::full(out.bundles.len()), || format!("{tag}: high-demand lift left a bundle unsold"))?;
                ensure(w >= hd.prices.iter().sum::<Rational>(), || format!("{tag}: high-demand welfare below aggregate price"))?;
            }

            let members = ItemSet(rng.gen_range(1..(1u32 << n)));
            let restricted = zeroed(&market, members);
            let s = cbe_search_with(&restricted, bell(m)).map_err(err("search"))?;
            let mut allocation = s.witness.allocation.clone();
            for (i, a) in allocation.iter_mut().enumerate() {
                if !members.contains(i) {
                    *a = ItemSet::EMPTY;
                }
            }
            let partial = PartialCbe { pb: s.witness.priced(), allocation, members };
            let ok = partial.validate(&market).is_ok();
            if ok {
                let out = lift_partial(&market, &partial).map_err(err("lift_partial"))?;
                let w = verified(&market, &out, &format!("{tag} partial"))?;
                ensure(w >= partial.revenue(), || format!("{tag}: lifted welfare below partial revenue"))?;
            }
            Ok((high, ok))
        })
        .collect();
    let results = results?;
    let high = results.iter().filter(|r| r.0).count();
    let partial = results.iter().filter(|r| r.1).count();
    ensure(high >= 100 && partial >= 100, || format!("too few inputs exercised: {high} high-demand, {partial} partial"))?;
    Ok(format!("500 FGL lifts, {high} high-demand lifts, {partial} partial lifts"))
}

fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let vars = rng.gen_range(1..=5);
    let mut lp = LinearProgram::new(Sense::Max, (0..vars).map(|_| r(rng.gen_range(-3..=6), rng.gen_range(1..=3))).collect());
    for _ in 0..rng.gen_range(1..=5) {
        let coeffs = (0..vars).map(|j| (j, r(rng.gen_range(0..=4), rng.gen_range(1..=2)))).collect();
        let rel = [Rel::Le, Rel::Le, Rel::Ge, Rel::Eq][rng.gen_range(0..4)];
        lp.add(coeffs, rel, q(rng.gen_range(0..=8)));
    }
    lp.add((0..vars).map(|j| (j, q(1))).collect(), Rel::Le, q(10));
    lp
}

fn ac13() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9000);
    let mut demand = 0;
    for seed in 0..300u64 {
        let class = ["additive", "unit-demand", "multi-unit"][seed as usize % 3];
        let m = rng.gen_range(1..=6);
        let market = gen_random(class, m, 2, 9000 + seed).map_err(err("gen"))?;
        let bundles = random_bundling(&mut rng, m);
        let prices = bundles.iter().map(|_| r(rng.gen_range(0..=16), 4)).collect();
        demand += same_demand(&market, &PricedBundling::new(bundles, prices))?;
    }
    let tables = two_item_values();
    for t in &tables {
        let v = Valuation::Explicit(t.to_vec());
        ensure(check_subadditive(&v, 2) == check_gross_substitutes(&v, 2), || format!("{t:?}: subadditivity and GS disagree"))?;
    }
    let mut solved = 0;
    for _ in 0..300 {
        let lp = random_lp(&mut rng);
        let sol = lp.solve();
        if sol.status != LpStatus::Optimal {
            continue;
        }
        lp.check_certificate(&sol)?;
        let dual = lp.dual().solve();
        ensure(dual.status == LpStatus::Optimal && dual.value == sol.value, || "LP and its dual disagree".into())?;
        solved += 1;
    }
    for seed in 0..60u64 {
        let market = gen_random(GENERAL_CLASSES[seed as usize % 5], 1 + seed as usize % 4, 1 + seed as usize % 3, 9500 + seed)
            .map_err(err("gen"))?;
        let lp = config_lp(&market).map_err(err("config_lp"))?;
        let dual: Rational = lp.utilities.iter().chain(&lp.item_prices).sum();
        eq(&format!("seed {seed} config LP dual objective"), &lp.fractional, &dual)?;
        let cap2 = cap2_lp(&market).map_err(err("cap2"))?;
        eq(&format!("seed {seed} cap2 value"), &cap2.fractional, &cap2.lp_solution.value)?;
    }
    ensure(solved >= 100, || format!("only {solved} random LPs were optimal"))?;
    Ok(format!("{demand} fast demand queries, {} two-item GS checks, {solved} LP/dual pairs, 60 config/cap2 duals", tables.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 13] = [
        ("two-item lower bound", ac1),
        ("multi-unit lower bound", ac2),
        ("three-consumer table", ac3),
        ("CAP2 goldens and nonlinear pricing", ac4),
        ("two-consumer sweep", ac5),
        ("multi-unit bound", ac6),
        ("general-market bounds", ac7),
        ("budget-additive", ac8),
        ("matroid revenue", ac9),
        ("revenue upper bound family", ac10),
        ("capped menu revenue", ac11),
        ("lifting properties", ac12),
        ("cross-oracle identities", ac13),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("AC {:>2} PASS  {name}: {detail} ({secs:.1}s)", k + 1),
            Err(detail) => {
                failed += 1;
                println!("AC {:>2} FAIL  {name}: {detail} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
