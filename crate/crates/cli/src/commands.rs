use std::path::Path;

use cbe_core::equilibrium::{cbe_search_with, ce_exists, verify_cbe, DEFAULT_MAX_BUNDLINGS};
use cbe_core::error::{Error, Result};
use cbe_core::instances::io::{load_market, market_from_json, market_to_string, outcome_from_json, outcome_to_json};
use cbe_core::instances::{equal_revenue_values, gen_named, gen_random, thm42_one_each_welfare, InstanceSpec};
use cbe_core::lp_models::{cap2_lp_budget, config_lp_budget, menu_lp, nlpe_to_cbe};
use cbe_core::market::{welfare_opt, ItemSet, Market, Outcome, DEFAULT_BUDGET};
use cbe_core::revenue::{common_matroid_revenue_cbe, uniform_matroid_revenue_cbe};
use cbe_core::welfare::{
    budget_additive_cbe, general_m23, multiunit_cbe, multiunit_value_query_mode, subadditive_n_over_2, two_consumer_cbe,
};
use cbe_core::{r, Rational};
use clap::ValueEnum;
use serde_json::{json, Value};

use crate::report::{Output, Report};
use crate::{Algo, GenerateArgs, LpArgs, LpModel, Params, ReproduceArgs, SearchArgs, Setting, SolveArgs, VerifyArgs};

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

fn s(x: &Rational) -> Value {
    Value::String(x.to_string())
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Schema { path: path.display().to_string(), msg: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: format!("{} line {} column {}", path.display(), e.line(), e.column()),
        msg: e.to_string(),
    })
}

fn spec(name: &str, p: &Params) -> InstanceSpec {
    InstanceSpec {
        name: name.to_string(),
        epsilon: p.epsilon.clone(),
        delta: p.delta.clone(),
        m: p.m,
        n: p.n,
        seed: p.seed,
    }
}

pub fn generate(a: &GenerateArgs) -> Result<Output> {
    let market = match (&a.name, &a.class) {
        (Some(name), _) => gen_named(&spec(name, &a.params))?,
        (None, Some(class)) => {
            let p = &a.params;
            gen_random(class, p.m.unwrap_or(4), p.n.unwrap_or(3), p.seed.unwrap_or(0))?
        }
        (None, None) => unreachable!("clap requires --name or --class"),
    };
    Ok(Output::Raw(market_to_string(&market)))
}

/// Outcome, verification and the standard welfare/revenue figures.
fn add_outcome(rep: &mut Report, market: &Market, outcome: &Outcome) -> Result<()> {
    let v = verify_cbe(market, outcome)?;
    rep.set("outcome", outcome_to_json(market, outcome));
    rep.set("welfare", s(&v.welfare));
    rep.set("revenue", s(&v.revenue));
    rep.check("verify_cbe", true, v.pass, v.pass);
    Ok(())
}

fn add_bound(rep: &mut Report, b: &cbe_core::bounds::BoundCheck) {
    rep.check(&b.label, "holds", if b.holds { "holds" } else { "violated" }, b.holds);
}

pub fn solve(a: &SolveArgs) -> Result<Output> {
    let market = load_market(&a.input)?;
    let mut rep = Report::for_market("solve", &market);
    let algo = a.algo.to_possible_value().unwrap().get_name().to_string();
    rep.set("algo", algo);
    match a.algo {
        Algo::TwoConsumer => {
            let res = two_consumer_cbe(&market)?;
            rep.set("route", json!(res.route));
            rep.set("opt", s(&res.opt));
            add_outcome(&mut rep, &market, &res.outcome)?;
            let holds = &res.welfare * q(3) >= &res.opt * q(2);
            rep.check("welfare >= 2/3 OPT", "holds", if holds { "holds" } else { "violated" }, holds);
        }
        Algo::SubadditiveN2 => {
            let out = subadditive_n_over_2(&market)?;
            let (opt, _) = welfare_opt(&market)?;
            rep.set("opt", s(&opt));
            add_outcome(&mut rep, &market, &out)?;
            let w = out.welfare(&market);
            let holds = &w * Rational::from(market.n()) >= &opt * q(2);
            rep.check("welfare >= 2/n OPT", "holds", if holds { "holds" } else { "violated" }, holds);
        }
        Algo::Multiunit => {
            let res = if a.value_queries {
                multiunit_value_query_mode(&market, a.epsilon.as_ref())?
            } else {
                multiunit_cbe(&market, a.epsilon.as_ref())?
            };
            rep.set("opt", s(&res.opt));
            rep.set("v", res.v.as_ref().map_or(Value::Null, s));
            rep.set("n_prime", res.n_prime);
            rep.set("k", res.k);
            rep.set("epsilon", res.epsilon.as_ref().map_or(Value::Null, s));
            add_outcome(&mut rep, &market, &res.outcome)?;
            add_bound(&mut rep, &res.bound);
        }
        Algo::GeneralM23 => {
            let res = general_m23(&market)?;
            let cands: Vec<Value> = res.candidates.iter().map(|(l, w)| json!({"candidate": l, "welfare": s(w)})).collect();
            rep.set("candidates", cands);
            rep.set("chosen", res.chosen);
            add_outcome(&mut rep, &market, &res.outcome)?;
            if let Some(b) = &res.logged_bound {
                rep.set("logged_bound", json!(b));
            }
        }
        Algo::BudgetAdditive => {
            let res = budget_additive_cbe(&market)?;
            rep.set("opt", s(&res.opt));
            rep.set("case", res.split.case);
            rep.set("exhausted", res.split.exhausted.to_vec());
            rep.set("sink", json!(res.split.sink));
            rep.set("sink_repaired", res.split.repaired);
            rep.set("partial_revenue", s(&res.partial.revenue()));
            add_outcome(&mut rep, &market, &res.outcome)?;
            add_bound(&mut rep, &res.greedy_bound);
            add_bound(&mut rep, &res.case_bound);
            add_bound(&mut rep, &res.bound);
        }
        Algo::MatroidRevenue => {
            let res = match a.setting {
                Setting::Uniform => uniform_matroid_revenue_cbe(&market)?,
                Setting::Common => common_matroid_revenue_cbe(&market)?,
            };
            rep.set("setting", if a.setting == Setting::Uniform { "uniform" } else { "common" });
            rep.set("route", json!(res.route));
            rep.set("opt", s(&res.opt));
            rep.set("reserve", s(&res.reserve.q));
            rep.set("reserve_revenue", s(&res.reserve.revenue()));
            rep.set("partial_revenue", s(&res.partial_revenue));
            rep.set("sink", json!(res.sink));
            rep.set("sink_repaired", res.sink_repaired);
            rep.set("steps", json!(res.steps));
            add_outcome(&mut rep, &market, &res.outcome)?;
            add_bound(&mut rep, &res.bound);
        }
    }
    Ok(Output::Report(rep))
}

pub fn verify(a: &VerifyArgs) -> Result<Output> {
    let (market, outcome) = match (&a.input, &a.market, &a.outcome) {
        (Some(path), _, _) => {
            let v = read_json(path)?;
            let market = market_from_json(v.get("market").ok_or_else(|| Error::Schema {
                path: "$".into(),
                msg: "missing field \"market\"".into(),
            })?)?;
            let ov = v.get("outcome").ok_or_else(|| Error::Schema { path: "$".into(), msg: "missing field \"outcome\"".into() })?;
            let outcome = outcome_from_json(&market, ov, "$.outcome")?;
            (market, outcome)
        }
        (None, Some(mp), Some(op)) => {
            let market = load_market(mp)?;
            let outcome = outcome_from_json(&market, &read_json(op)?, "$")?;
            (market, outcome)
        }
        _ => unreachable!("clap enforces the file arguments"),
    };
    let mut rep = Report::for_market("verify", &market);
    let v = verify_cbe(&market, &outcome)?;
    let consumers: Vec<Value> = v
        .consumers
        .iter()
        .map(|c| {
            let mut o = json!({
                "consumer": market.consumers()[c.consumer].name,
                "maximizes": c.maximizes,
                "payoff": s(&c.payoff),
                "best_payoff": s(&c.best_payoff),
            });
            if let Some(b) = &c.better {
                let items = b.iter().fold(ItemSet::EMPTY, |acc, &k| acc.union(outcome.bundles[k]));
                o["better_bundles"] = json!(b);
                o["better_items"] = json!(market.set_label(items));
            }
            o
        })
        .collect();
    rep.set("consumers", consumers);
    rep.set("clears", v.clears);
    rep.set("unallocated_bundles", json!(v.unallocated));
    rep.set("welfare", s(&v.welfare));
    rep.set("revenue", s(&v.revenue));
    rep.check("verify_cbe", true, v.pass, v.pass);
    Ok(Output::Report(rep))
}

pub fn search(a: &SearchArgs) -> Result<Output> {
    let market = load_market(&a.input)?;
    let mut rep = Report::for_market("search", &market);
    let res = cbe_search_with(&market, a.budget.unwrap_or(DEFAULT_MAX_BUNDLINGS))?;
    let (opt, _) = welfare_opt(&market)?;
    rep.set("opt", s(&opt));
    rep.set("bundlings", res.table.len());
    rep.set("with_ce", res.table.iter().filter(|r| r.ce_exists).count());
    rep.set("best_welfare", s(&res.best_welfare));
    rep.set("best_revenue", s(&res.best_revenue));
    rep.set("witness", outcome_to_json(&market, &res.witness));
    let label = |bs: &[ItemSet]| bs.iter().map(|b| market.set_label(*b)).collect::<Vec<_>>().join("|");
    rep.set("welfare_maximizers", res.maximizers.iter().map(|&k| label(&res.table[k].bundles)).collect::<Vec<_>>());
    if a.table {
        let rows: Vec<Value> = res
            .table
            .iter()
            .map(|row| {
                json!({
                    "bundling": label(&row.bundles),
                    "ce_exists": row.ce_exists,
                    "fractional": s(&row.fractional),
                    "induced_opt": s(&row.induced_opt),
                    "max_revenue": row.max_revenue.as_ref().map_or(Value::Null, s),
                })
            })
            .collect();
        rep.set("table", rows);
    }
    Ok(Output::Report(rep))
}

pub fn lp(a: &LpArgs) -> Result<Output> {
    let budget = a.budget.unwrap_or(DEFAULT_BUDGET);
    let market = || load_market(a.input.as_deref().expect("clap requires --input"));
    let rep = match a.model {
        LpModel::Config => {
            let mk = market()?;
            let mut rep = Report::for_market("lp", &mk);
            let res = config_lp_budget(&mk, budget)?;
            rep.set("model", "config");
            rep.set("fractional", s(&res.fractional));
            rep.set("integral", s(&res.integral));
            rep.set("is_integral", res.is_integral);
            let support: Vec<Value> = res
                .support
                .iter()
                .map(|(i, set, x)| json!({"consumer": mk.consumers()[*i].name, "set": mk.set_label(*set), "x": s(x)}))
                .collect();
            rep.set("support", support);
            if res.is_integral {
                rep.set("item_prices", res.item_prices.iter().map(s).collect::<Vec<_>>());
            }
            rep
        }
        LpModel::Cap2 => {
            let mk = market()?;
            let mut rep = Report::for_market("lp", &mk);
            let res = cap2_lp_budget(&mk, budget)?;
            rep.set("model", "cap2");
            rep.set("fractional", s(&res.fractional));
            rep.set("integral", s(&res.integral));
            rep.set("is_integral", res.is_integral);
            if res.is_integral {
                let out = nlpe_to_cbe(&mk, &res)?;
                add_outcome(&mut rep, &mk, &out)?;
            }
            rep
        }
        LpModel::Menu => {
            let values = if a.values.is_empty() { equal_revenue_values(a.n) } else { a.values.clone() };
            let mut rep = Report::new("lp");
            let res = menu_lp(&values, &a.cap)?;
            rep.set("model", "menu");
            rep.set("cap", s(&a.cap));
            rep.set("values", values.iter().map(s).collect::<Vec<_>>());
            let menu: Vec<Value> = res.options.iter().map(|(x, p)| json!({"x": s(x), "p": s(p)})).collect();
            rep.set("menu", menu);
            rep.set("revenue", s(&res.revenue));
            rep
        }
    };
    Ok(Output::Report(rep))
}

fn eq_check(rep: &mut Report, name: &str, expected: &Rational, actual: &Rational) {
    rep.check(name, s(expected), s(actual), expected == actual);
}

pub fn reproduce(a: &ReproduceArgs) -> Result<Output> {
    let p = &a.params;
    let case = a.case.as_str();
    if case == "myerson" {
        return Ok(Output::Report(reproduce_myerson(p.n.unwrap_or(3))?));
    }
    let market = gen_named(&spec(case, p))?;
    let mut rep = Report::for_market("reproduce", &market);
    rep.set("case", case);
    match case {
        "prop22" => {
            let e = p.epsilon.clone().unwrap_or(r(1, 10));
            let (opt, _) = welfare_opt(&market)?;
            let lp = config_lp_budget(&market, DEFAULT_BUDGET)?;
            let ce = ce_exists(&market)?;
            let search = cbe_search_with(&market, DEFAULT_MAX_BUNDLINGS)?;
            eq_check(&mut rep, "welfare_opt", &q(3), &opt);
            eq_check(&mut rep, "config_lp fractional", &(q(3) + &e / 2), &lp.fractional);
            rep.check("ce_exists", false, ce.exists, !ce.exists);
            eq_check(&mut rep, "best CBE welfare", &(q(2) + &e), &search.best_welfare);
            let w = &search.witness;
            let grand = w.bundles.len() == 1 && !w.allocation[0].is_empty();
            rep.check("best CBE sells the grand bundle to consumer 1", true, grand, grand);
            let ratio = &opt / &search.best_welfare;
            rep.check("OPT / best CBE < 3/2", "< 3/2", s(&ratio), ratio < r(3, 2));
        }
        "thm42" => {
            let e = p.epsilon.clone().unwrap_or(r(1, 10));
            let m = market.m();
            let search = cbe_search_with(&market, DEFAULT_MAX_BUNDLINGS.max(cbe_core::market::bell(m)))?;
            let all_first = search.table.iter().filter(|r| r.ce_exists).all(|r| r.first_gets_all == Some(true));
            rep.check("every CBE gives all units to consumer 1", true, all_first, all_first);
            eq_check(&mut rep, "best CBE welfare", &((q(1) + &e) * q(2)), &search.best_welfare);
            let (opt, _) = welfare_opt(&market)?;
            eq_check(&mut rep, "welfare_opt", &thm42_one_each_welfare(m, &e), &opt);
        }
        "table1" => {
            let e = p.epsilon.clone().unwrap_or(r(1, 100));
            let d = p.delta.clone().unwrap_or(r(1, 100));
            let (opt, _) = welfare_opt(&market)?;
            let lp = config_lp_budget(&market, DEFAULT_BUDGET)?;
            let search = cbe_search_with(&market, DEFAULT_MAX_BUNDLINGS)?;
            eq_check(&mut rep, "welfare_opt", &(q(5) - &e / 2 - &d), &opt);
            eq_check(&mut rep, "config_lp fractional", &(q(5) - &e / 2), &lp.fractional);
            eq_check(&mut rep, "best CBE welfare", &q(4), &search.best_welfare);
        }
        "ex81" | "ex82" => {
            let (f, i) = if case == "ex81" { (q(11), q(8)) } else { (q(4), r(7, 2)) };
            let res = cap2_lp_budget(&market, DEFAULT_BUDGET)?;
            eq_check(&mut rep, "cap2 fractional", &f, &res.fractional);
            eq_check(&mut rep, "integral optimum", &i, &res.integral);
        }
        "revenue-lb" => {
            let n = market.n();
            let (opt, _) = welfare_opt(&market)?;
            let harmonic: Rational = (1..=n).map(|i| r(1, i as i64)).sum();
            eq_check(&mut rep, "welfare_opt", &harmonic, &opt);
            let search = cbe_search_with(&market, DEFAULT_MAX_BUNDLINGS.max(cbe_core::market::bell(market.m())))?;
            let cap = q(2);
            rep.check("max CBE revenue <= 1 + max value", s(&cap), s(&search.best_revenue), search.best_revenue <= cap);
            let res = uniform_matroid_revenue_cbe(&market)?;
            rep.set("pipeline_revenue", s(&res.revenue));
            add_bound(&mut rep, &res.bound);
        }
        _ => unreachable!("gen_named rejects unknown cases"),
    }
    Ok(Output::Report(rep))
}

fn reproduce_myerson(n: usize) -> Result<Report> {
    if n < 2 {
        return Err(Error::InvalidParameter("myerson needs n ≥ 2".into()));
    }
    let mut rep = Report::new("reproduce");
    rep.set("case", "myerson");
    rep.set("n", n);
    let values = equal_revenue_values(n);
    let types = Rational::from(n - 1);
    let mut rows = Vec::new();
    for cap in [q(0), r(1, 4), r(1, 2), r(3, 4), q(1)] {
        let res = menu_lp(&values, &cap)?;
        let bound = &cap / &types;
        rep.check(&format!("revenue at cap {cap} <= cap/(n-1)"), s(&bound), s(&res.revenue), res.revenue <= bound);
        rows.push(json!({"cap": s(&cap), "revenue": s(&res.revenue)}));
    }
    rep.set("menus", rows);
    // Best posted price: reserve 1/k sells to the k − 1 types valued at least 1/k.
    let oracle = (2..=n).map(|k| r(k as i64 - 1, k as i64) / &types).max().unwrap();
    let full = menu_lp(&values, &q(1))?;
    eq_check(&mut rep, "cap 1 revenue equals the best reserve price", &oracle, &full.revenue);
    eq_check(&mut rep, "cap 1 revenue equals 1/n", &r(1, n as i64), &full.revenue);
    Ok(rep)
}
