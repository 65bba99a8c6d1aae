//! WebAssembly bindings for the demo page in `www/`.
//!
//! Every export takes plain strings or integers and returns a JSON string.
//! Failures come back as `{"error": "..."}` so the page never has to catch.

use cbe_core::equilibrium::{cbe_search_with, ce_exists};
use cbe_core::instances::io::{market_from_json, outcome_to_json};
use cbe_core::instances::{equal_revenue_values, prop22, thm42};
use cbe_core::lp_models::menu_lp;
use cbe_core::market::{bell, welfare_opt, Market};
use cbe_core::welfare::two_consumer_cbe;
use cbe_core::{Rational, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn s(x: &Rational) -> Value {
    Value::String(x.to_string())
}

fn num(x: &Rational) -> Value {
    json!(x.to_f64())
}

fn parse(label: &str, text: &str) -> Result<Rational> {
    text.trim()
        .parse::<Rational>()
        .map_err(|e| cbe_core::Error::InvalidParameter(format!("{label}: {e}")))
}

fn respond(res: Result<Value>) -> String {
    match res {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn two_item_market(first: [Rational; 3], second: [Rational; 3]) -> Result<Market> {
    let consumer = |name: &str, [a, b, ab]: [Rational; 3]| {
        json!({
            "name": name,
            "valuation": {"type": "explicit", "values": {"a": s(&a), "b": s(&b), "ab": s(&ab)}}
        })
    };
    market_from_json(&json!({
        "items": ["a", "b"],
        "consumers": [consumer("1", first), consumer("2", second)],
    }))
}

/// Two consumers over items a and b, each given by v(a), v(b), v(ab).
pub fn two_consumer_json(values: [&str; 6]) -> Result<Value> {
    let names = ["v1(a)", "v1(b)", "v1(ab)", "v2(a)", "v2(b)", "v2(ab)"];
    let v: Vec<Rational> = names.iter().zip(values).map(|(n, t)| parse(n, t)).collect::<Result<_>>()?;
    let market = two_item_market(
        [v[0].clone(), v[1].clone(), v[2].clone()],
        [v[3].clone(), v[4].clone(), v[5].clone()],
    )?;
    let res = two_consumer_cbe(&market)?;
    let search = cbe_search_with(&market, bell(2))?;
    let ce = ce_exists(&market)?;
    Ok(json!({
        "opt": s(&res.opt),
        "route": res.route,
        "welfare": s(&res.welfare),
        "ratio": num(&(&res.welfare / &res.opt)),
        "outcome": outcome_to_json(&market, &res.outcome),
        "ce_exists": ce.exists,
        "best_cbe_welfare": s(&search.best_welfare),
        "best_cbe": outcome_to_json(&market, &search.witness),
    }))
}

/// Optimal welfare against the best bundling equilibrium on the two
/// lower-bound families, for ε on a grid and the chosen number of units.
pub fn lower_bound_json(eps: &str, m: usize) -> Result<Value> {
    let e = parse("epsilon", eps)?;
    if !(2..=6).contains(&m) {
        return Err(cbe_core::Error::InvalidParameter("units must be between 2 and 6".into()));
    }
    let row = |market: Market| -> Result<Value> {
        let (opt, _) = welfare_opt(&market)?;
        let best = cbe_search_with(&market, bell(market.m()))?.best_welfare;
        Ok(json!({"opt": s(&opt), "best_cbe": s(&best), "ratio": num(&(&opt / &best))}))
    };
    Ok(json!({
        "epsilon": s(&e),
        "two_items": row(prop22(&e)?)?,
        "units": m,
        "multi_unit": row(thm42(m, &e)?)?,
    }))
}

/// Revenue-optimal menu for n − 1 equally likely values 1/2, ..., 1/n with
/// allocation probabilities capped at `cap`.
pub fn myerson_json(n: usize, cap: &str) -> Result<Value> {
    let c = parse("cap", cap)?;
    if !(2..=12).contains(&n) {
        return Err(cbe_core::Error::InvalidParameter("n must be between 2 and 12".into()));
    }
    let values = equal_revenue_values(n);
    let res = menu_lp(&values, &c)?;
    let menu: Vec<Value> = values
        .iter()
        .zip(&res.options)
        .map(|(v, (x, p))| json!({"value": s(v), "x": s(x), "p": s(p)}))
        .collect();
    Ok(json!({"cap": s(&c), "menu": menu, "revenue": s(&res.revenue), "revenue_f64": num(&res.revenue)}))
}

#[wasm_bindgen]
pub fn two_consumer(a1: &str, b1: &str, ab1: &str, a2: &str, b2: &str, ab2: &str) -> String {
    respond(two_consumer_json([a1, b1, ab1, a2, b2, ab2]))
}

#[wasm_bindgen]
pub fn lower_bound(eps: &str, m: usize) -> String {
    respond(lower_bound_json(eps, m))
}

#[wasm_bindgen]
pub fn myerson(n: usize, cap: &str) -> String {
    respond(myerson_json(n, cap))
}
