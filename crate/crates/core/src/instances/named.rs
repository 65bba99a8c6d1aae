use crate::error::{Error, Result};
use crate::market::{ItemSet, Market, Matroid, Valuation};
use crate::numeric::{r, Rational};

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

fn positive(x: &Rational, what: &str) -> Result<()> {
    if x.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be positive, got {x}")))
    }
}

/// Two items; consumer 1 values each item at 1 and the pair at 2+ε, consumer 2
/// is unit-demand with value 2.
pub fn prop22(eps: &Rational) -> Result<Market> {
    positive(eps, "epsilon")?;
    let v1 = Valuation::Explicit(vec![q(0), q(1), q(1), q(2) + eps]);
    let v2 = Valuation::UnitDemand(vec![q(2), q(2)]);
    Market::with_default_labels(2, vec![v1, v2])
}

/// `m` identical units and `m` consumers: consumer 1 values any proper nonempty
/// subset at 1+ε and all units at 2+2ε; consumer `i ≥ 2` is unit-demand at `1/i`.
pub fn thm42(m: usize, eps: &Rational) -> Result<Market> {
    positive(eps, "epsilon")?;
    if m < 2 {
        return Err(Error::InvalidParameter("thm42 needs m ≥ 2".into()));
    }
    let mut v1 = vec![q(0)];
    v1.extend((1..m).map(|_| q(1) + eps));
    v1.push((q(1) + eps) * 2);
    let mut vals = vec![Valuation::MultiUnit(v1)];
    for i in 2..=m {
        let mut c = vec![q(0)];
        c.extend((1..=m).map(|_| r(1, i as i64)));
        vals.push(Valuation::MultiUnit(c));
    }
    Market::with_default_labels(m, vals)
}

/// Three budget-additive consumers over items a, b, c.
pub fn table1(eps: &Rational, delta: &Rational) -> Result<Market> {
    positive(eps, "epsilon")?;
    positive(delta, "delta")?;
    let two_minus = q(2) - eps;
    let c3 = q(1) - eps / 2 - delta;
    if !c3.is_positive() {
        return Err(Error::InvalidParameter("table1 needs ε/2 + δ < 1".into()));
    }
    let vals = vec![
        Valuation::BudgetAdditive { weights: vec![q(2), q(1), q(1)], budget: q(2) },
        Valuation::BudgetAdditive { weights: vec![q(0), q(2), q(2)], budget: q(2) },
        Valuation::BudgetAdditive { weights: vec![two_minus.clone(), q(0), c3], budget: two_minus },
    ];
    Market::with_default_labels(3, vals)
}

/// Two items; consumer 1 values only the pair (at 8), consumer 2 is unit-demand at 7.
pub fn ex81() -> Market {
    let v1 = Valuation::Explicit(vec![q(0), q(0), q(0), q(8)]);
    let v2 = Valuation::UnitDemand(vec![q(7), q(7)]);
    Market::with_default_labels(2, vec![v1, v2]).expect("valid market")
}

/// Four items, two submodular consumers with complementary favourite pairs.
pub fn ex82() -> Market {
    let table = |good: [[usize; 2]; 2]| {
        let mut t = vec![q(0); 16];
        for s in 1..16usize {
            let set = ItemSet(s as u32);
            t[s] = match set.len() {
                1 => q(1),
                2 if good.iter().any(|p| set == ItemSet::from_items(p.iter().copied())) => q(2),
                2 => r(3, 2),
                _ => q(2),
            };
        }
        Valuation::Explicit(t)
    };
    // Items a, b, c, d are 0, 1, 2, 3.
    let v1 = table([[0, 1], [2, 3]]);
    let v2 = table([[0, 3], [1, 2]]);
    Market::with_default_labels(4, vec![v1, v2]).expect("valid market")
}

/// `n` items and `n` unit-demand consumers, consumer `i` valuing any item at `1/i`;
/// encoded as rank-one uniform matroid valuations.
pub fn revenue_lb(n: usize) -> Result<Market> {
    if n == 0 {
        return Err(Error::InvalidParameter("revenue-lb needs n ≥ 1".into()));
    }
    let vals = (1..=n)
        .map(|i| Valuation::MatroidRank { matroid: Matroid::Uniform(1), weights: vec![r(1, i as i64); n] })
        .collect();
    Market::with_default_labels(n, vals)
}

/// Support `{1/2, ..., 1/n}` of the equal-revenue distribution.
pub fn equal_revenue_values(n: usize) -> Vec<Rational> {
    (2..=n).map(|i| r(1, i as i64)).collect()
}

/// Harmonic tail `(1+ε) + Σ_{i=2}^m 1/i`.
pub fn thm42_one_each_welfare(m: usize, eps: &Rational) -> Rational {
    let tail: Rational = (2..=m).map(|i| r(1, i as i64)).sum();
    q(1) + eps + tail
}
