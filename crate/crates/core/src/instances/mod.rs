//! Named reference instances, seeded random markets, and JSON I/O.

pub mod io;
pub mod named;
pub mod random;

pub use named::{equal_revenue_values, ex81, ex82, prop22, revenue_lb, table1, thm42, thm42_one_each_welfare};
pub use random::{gen_random, RANDOM_CLASSES};

use crate::error::{Error, Result};
use crate::market::Market;
use crate::numeric::{r, Rational};

/// Parameters for [`gen_named`]; unset fields take the documented defaults
/// (ε = δ = 1/10 for prop22/thm42, 1/100 for table1; m = n = 4).
#[derive(Clone, Debug, Default)]
pub struct InstanceSpec {
    pub name: String,
    pub epsilon: Option<Rational>,
    pub delta: Option<Rational>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
}

pub const NAMED: [&str; 6] = ["prop22", "thm42", "table1", "ex81", "ex82", "revenue-lb"];

pub fn gen_named(spec: &InstanceSpec) -> Result<Market> {
    let eps = |d: Rational| spec.epsilon.clone().unwrap_or(d);
    match spec.name.as_str() {
        "prop22" => prop22(&eps(r(1, 10))),
        "thm42" => thm42(spec.m.or(spec.n).unwrap_or(4), &eps(r(1, 10))),
        "table1" => table1(&eps(r(1, 100)), &spec.delta.clone().unwrap_or(r(1, 100))),
        "ex81" => Ok(ex81()),
        "ex82" => Ok(ex82()),
        "revenue-lb" => revenue_lb(spec.n.or(spec.m).unwrap_or(4)),
        other => Err(Error::InvalidParameter(format!("unknown named instance {other:?}"))),
    }
}
