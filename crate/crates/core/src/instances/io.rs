//! JSON (de)serialization of markets and outcomes.
//!
//! Rationals are strings `"p/q"` (or `"p"`). Explicit tables are objects keyed
//! by the concatenation of a subset's labels in sorted order; the empty set may
//! be omitted.

use std::collections::HashMap;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::market::{ItemSet, Consumer, Market, Matroid, Outcome, Valuation};
use crate::numeric::Rational;

fn schema(path: &str, msg: impl Into<String>) -> Error {
    Error::Schema { path: path.to_string(), msg: msg.into() }
}

fn rational(v: &Value, path: &str) -> Result<Rational> {
    match v {
        Value::String(s) => s.parse().map_err(|e: Error| schema(path, e.to_string())),
        Value::Number(n) if n.is_i64() => Ok(Rational::from_int(n.as_i64().unwrap())),
        _ => Err(schema(path, "expected a rational string \"p/q\"")),
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| schema(path, format!("missing field {key:?}")))
}

fn only_keys(obj: &Map<String, Value>, keys: &[&str], path: &str) -> Result<()> {
    match obj.keys().find(|k| !keys.contains(&k.as_str())) {
        Some(k) => Err(schema(path, format!("unknown field {k:?}"))),
        None => Ok(()),
    }
}

fn rationals(v: &Value, path: &str, len: usize) -> Result<Vec<Rational>> {
    let a = array(v, path)?;
    if a.len() != len {
        return Err(schema(path, format!("expected {len} entries, got {}", a.len())));
    }
    a.iter().enumerate().map(|(k, x)| rational(x, &format!("{path}[{k}]"))).collect()
}

fn label_set(v: &Value, path: &str, index: &HashMap<&str, usize>) -> Result<ItemSet> {
    let mut s = ItemSet::EMPTY;
    for (k, l) in array(v, path)?.iter().enumerate() {
        let p = format!("{path}[{k}]");
        let l = l.as_str().ok_or_else(|| schema(&p, "expected an item label"))?;
        let j = *index.get(l).ok_or_else(|| schema(&p, format!("unknown item {l:?}")))?;
        if s.contains(j) {
            return Err(schema(&p, format!("item {l:?} repeated")));
        }
        s = s.with(j);
    }
    Ok(s)
}

/// Parses a market from a JSON value.
pub fn market_from_json(v: &Value) -> Result<Market> {
    let root = object(v, "$")?;
    only_keys(root, &["items", "consumers"], "$")?;
    let items: Vec<String> = array(field(root, "items", "$")?, "$.items")?
        .iter()
        .enumerate()
        .map(|(k, l)| l.as_str().map(str::to_string).ok_or_else(|| schema(&format!("$.items[{k}]"), "expected a string")))
        .collect::<Result<_>>()?;
    let m = items.len();
    if m == 0 || m > crate::market::MAX_ITEMS {
        return Err(schema("$.items", format!("need between 1 and {} items", crate::market::MAX_ITEMS)));
    }
    let index: HashMap<&str, usize> = items.iter().enumerate().map(|(j, l)| (l.as_str(), j)).collect();
    if index.len() != m {
        return Err(schema("$.items", "item labels must be unique"));
    }
    // Sorted-concatenation keys must identify subsets unambiguously.
    let probe = Market::new(items.clone(), vec![Consumer { name: String::new(), valuation: Valuation::Additive(vec![Rational::zero(); m]) }])
        .map_err(|e| schema("$.items", e.to_string()))?;
    let mut keys: HashMap<String, ItemSet> = HashMap::new();
    for s in ItemSet::full(m).subsets() {
        if keys.insert(probe.set_label(s), s).is_some() {
            return Err(schema("$.items", "labels make explicit-table keys ambiguous"));
        }
    }
    let consumers = array(field(root, "consumers", "$")?, "$.consumers")?;
    let mut out = Vec::with_capacity(consumers.len());
    for (i, c) in consumers.iter().enumerate() {
        let path = format!("$.consumers[{i}]");
        let obj = object(c, &path)?;
        only_keys(obj, &["name", "valuation"], &path)?;
        let name = field(obj, "name", &path)?
            .as_str()
            .ok_or_else(|| schema(&format!("{path}.name"), "expected a string"))?
            .to_string();
        let vpath = format!("{path}.valuation");
        let valuation = valuation_from_json(field(obj, "valuation", &path)?, &vpath, m, &index, &keys)?;
        valuation.validate(m).map_err(|e| schema(&vpath, e.to_string()))?;
        out.push(Consumer { name, valuation });
    }
    Market::new(items, out).map_err(|e| schema("$", e.to_string()))
}

fn valuation_from_json(
    v: &Value,
    path: &str,
    m: usize,
    index: &HashMap<&str, usize>,
    keys: &HashMap<String, ItemSet>,
) -> Result<Valuation> {
    let obj = object(v, path)?;
    let ty = field(obj, "type", path)?.as_str().ok_or_else(|| schema(&format!("{path}.type"), "expected a string"))?;
    let weights = |k: &str| rationals(field(obj, k, path)?, &format!("{path}.{k}"), m);
    Ok(match ty {
        "explicit" => {
            only_keys(obj, &["type", "values"], path)?;
            let vpath = format!("{path}.values");
            let table = object(field(obj, "values", path)?, &vpath)?;
            let mut t: Vec<Option<Rational>> = vec![None; 1 << m];
            t[0] = Some(Rational::zero());
            for (k, x) in table {
                let s = keys.get(k).ok_or_else(|| schema(&vpath, format!("unknown subset key {k:?}")))?;
                t[s.idx()] = Some(rational(x, &format!("{vpath}.{k:?}"))?);
            }
            if let Some(s) = t.iter().position(Option::is_none) {
                let mut labels: Vec<&str> =
                    ItemSet(s as u32).iter().map(|j| *index.iter().find(|(_, &x)| x == j).unwrap().0).collect();
                labels.sort_unstable();
                return Err(schema(&vpath, format!("missing subset {:?}", labels.concat())));
            }
            Valuation::Explicit(t.into_iter().map(Option::unwrap).collect())
        }
        "additive" => {
            only_keys(obj, &["type", "weights"], path)?;
            Valuation::Additive(weights("weights")?)
        }
        "unit_demand" => {
            only_keys(obj, &["type", "weights"], path)?;
            Valuation::UnitDemand(weights("weights")?)
        }
        "budget_additive" => {
            only_keys(obj, &["type", "weights", "budget"], path)?;
            let budget = rational(field(obj, "budget", path)?, &format!("{path}.budget"))?;
            Valuation::BudgetAdditive { weights: weights("weights")?, budget }
        }
        "multi_unit" => {
            only_keys(obj, &["type", "values"], path)?;
            Valuation::MultiUnit(rationals(field(obj, "values", path)?, &format!("{path}.values"), m + 1)?)
        }
        "matroid_rank" => {
            only_keys(obj, &["type", "matroid", "weights"], path)?;
            let mpath = format!("{path}.matroid");
            let mo = object(field(obj, "matroid", path)?, &mpath)?;
            let kind = field(mo, "kind", &mpath)?.as_str().unwrap_or_default();
            let matroid = match kind {
                "uniform" => {
                    only_keys(mo, &["kind", "rank"], &mpath)?;
                    let k = field(mo, "rank", &mpath)?
                        .as_u64()
                        .ok_or_else(|| schema(&format!("{mpath}.rank"), "expected a nonnegative integer"))?;
                    Matroid::Uniform(k as usize)
                }
                "family" => {
                    only_keys(mo, &["kind", "independent"], &mpath)?;
                    let ipath = format!("{mpath}.independent");
                    let sets = array(field(mo, "independent", &mpath)?, &ipath)?
                        .iter()
                        .enumerate()
                        .map(|(k, s)| label_set(s, &format!("{ipath}[{k}]"), index))
                        .collect::<Result<Vec<_>>>()?;
                    Matroid::family(m, &sets).map_err(|e| schema(&ipath, e.to_string()))?
                }
                other => return Err(schema(&format!("{mpath}.kind"), format!("unknown matroid kind {other:?}"))),
            };
            Valuation::MatroidRank { matroid, weights: weights("weights")? }
        }
        other => return Err(schema(&format!("{path}.type"), format!("unknown valuation type {other:?}"))),
    })
}

fn strs(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.to_string())).collect())
}

fn labels(market_items: &[String], s: ItemSet) -> Value {
    Value::Array(s.iter().map(|j| Value::String(market_items[j].clone())).collect())
}

/// Canonical JSON form of a market.
pub fn market_to_json(market: &Market) -> Value {
    let m = market.m();
    let consumers: Vec<Value> = market
        .consumers()
        .iter()
        .map(|c| {
            let val = match &c.valuation {
                Valuation::Explicit(t) => {
                    let mut map = Map::new();
                    for s in ItemSet::full(m).subsets().skip(1) {
                        map.insert(market.set_label(s), Value::String(t[s.idx()].to_string()));
                    }
                    json!({"type": "explicit", "values": map})
                }
                Valuation::Additive(w) => json!({"type": "additive", "weights": strs(w)}),
                Valuation::UnitDemand(w) => json!({"type": "unit_demand", "weights": strs(w)}),
                Valuation::BudgetAdditive { weights, budget } => {
                    json!({"type": "budget_additive", "weights": strs(weights), "budget": budget.to_string()})
                }
                Valuation::MultiUnit(c) => json!({"type": "multi_unit", "values": strs(c)}),
                Valuation::MatroidRank { matroid, weights } => {
                    let mj = match matroid {
                        Matroid::Uniform(k) => json!({"kind": "uniform", "rank": k}),
                        Matroid::Family(_) => {
                            let sets: Vec<Value> =
                                matroid.independent_sets(m).into_iter().map(|s| labels(market.items(), s)).collect();
                            json!({"kind": "family", "independent": sets})
                        }
                    };
                    json!({"type": "matroid_rank", "matroid": mj, "weights": strs(weights)})
                }
            };
            json!({"name": c.name, "valuation": val})
        })
        .collect();
    json!({"items": market.items(), "consumers": consumers})
}

/// Canonical pretty-printed text of a market (with a trailing newline).
pub fn market_to_string(market: &Market) -> String {
    let mut s = serde_json::to_string_pretty(&market_to_json(market)).expect("serializable");
    s.push('\n');
    s
}

pub fn market_from_str(s: &str) -> Result<Market> {
    let v: Value = serde_json::from_str(s)
        .map_err(|e| schema(&format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    market_from_json(&v)
}

pub fn load_market(path: &std::path::Path) -> Result<Market> {
    let text = std::fs::read_to_string(path).map_err(|e| schema(&path.display().to_string(), e.to_string()))?;
    market_from_str(&text)
}

pub fn save_market(market: &Market, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, market_to_string(market)).map_err(|e| schema(&path.display().to_string(), e.to_string()))
}

pub fn outcome_to_json(market: &Market, o: &Outcome) -> Value {
    json!({
        "bundles": o.bundles.iter().map(|b| labels(market.items(), *b)).collect::<Vec<_>>(),
        "prices": strs(&o.prices),
        "allocation": o.allocation.iter().map(|s| s.to_vec()).collect::<Vec<_>>(),
    })
}

/// Parses an outcome against a market; structural validity is checked by the verifier.
pub fn outcome_from_json(market: &Market, v: &Value, path: &str) -> Result<Outcome> {
    let obj = object(v, path)?;
    only_keys(obj, &["bundles", "prices", "allocation"], path)?;
    let index: HashMap<&str, usize> = market.items().iter().enumerate().map(|(j, l)| (l.as_str(), j)).collect();
    let bpath = format!("{path}.bundles");
    let bundles = array(field(obj, "bundles", path)?, &bpath)?
        .iter()
        .enumerate()
        .map(|(k, b)| label_set(b, &format!("{bpath}[{k}]"), &index))
        .collect::<Result<Vec<_>>>()?;
    if bundles.len() > 32 {
        return Err(schema(&bpath, "at most 32 bundles are supported"));
    }
    let prices = rationals(field(obj, "prices", path)?, &format!("{path}.prices"), bundles.len())?;
    let apath = format!("{path}.allocation");
    let mut allocation = Vec::new();
    for (i, a) in array(field(obj, "allocation", path)?, &apath)?.iter().enumerate() {
        let p = format!("{apath}[{i}]");
        let mut s = ItemSet::EMPTY;
        for (k, x) in array(a, &p)?.iter().enumerate() {
            let idx = x
                .as_u64()
                .filter(|&x| (x as usize) < bundles.len())
                .ok_or_else(|| schema(&format!("{p}[{k}]"), "expected a bundle index"))?;
            s = s.with(idx as usize);
        }
        allocation.push(s);
    }
    Ok(Outcome { bundles, prices, allocation })
}
