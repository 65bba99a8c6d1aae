use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::market::{ItemSet, Market, Matroid, Valuation};
use crate::numeric::{r, Rational};

/// Random valuation classes understood by [`gen_random`].
pub const RANDOM_CLASSES: [&str; 8] = [
    "explicit-monotone",
    "additive",
    "unit-demand",
    "budget-additive",
    "multi-unit",
    "matroid-rank-uniform",
    "matroid-rank-common",
    "superadditive",
];

/// Quarter-integral value in `[0, max/4]`.
fn quarter(rng: &mut ChaCha8Rng, max: i64) -> Rational {
    r(rng.gen_range(0..=max), 4)
}

fn weights(rng: &mut ChaCha8Rng, m: usize) -> Vec<Rational> {
    (0..m).map(|_| quarter(rng, 16)).collect()
}

/// Deterministic random market of the given class, drawn from ChaCha8 seeded with `seed`.
pub fn gen_random(class: &str, m: usize, n: usize, seed: u64) -> Result<Market> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter("m and n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let explicit_cap = 12;
    let vals: Vec<Valuation> = match class {
        "additive" => (0..n).map(|_| Valuation::Additive(weights(&mut rng, m))).collect(),
        "unit-demand" => (0..n).map(|_| Valuation::UnitDemand(weights(&mut rng, m))).collect(),
        "budget-additive" => (0..n)
            .map(|_| {
                let w = weights(&mut rng, m);
                let total: Rational = w.iter().sum();
                // Budgets between a quarter and all of the additive total.
                let budget = &total * r(rng.gen_range(1..=4), 4);
                Valuation::BudgetAdditive { weights: w, budget }
            })
            .collect(),
        "multi-unit" => (0..n)
            .map(|_| {
                let mut c = vec![Rational::zero()];
                for _ in 0..m {
                    let step = quarter(&mut rng, 8);
                    let next = c.last().unwrap() + step;
                    c.push(next);
                }
                Valuation::MultiUnit(c)
            })
            .collect(),
        "explicit-monotone" | "superadditive" => {
            if m > explicit_cap {
                return Err(Error::InvalidParameter(format!("{class} supports m ≤ {explicit_cap}")));
            }
            (0..n)
                .map(|_| {
                    if class == "superadditive" {
                        superadditive_table(&mut rng, m)
                    } else {
                        monotone_table(&mut rng, m)
                    }
                })
                .map(Valuation::Explicit)
                .collect()
        }
        "matroid-rank-uniform" => (0..n)
            .map(|_| {
                let k = rng.gen_range(1..=m);
                Valuation::MatroidRank { matroid: Matroid::Uniform(k), weights: weights(&mut rng, m) }
            })
            .collect(),
        "matroid-rank-common" => {
            if m > explicit_cap {
                return Err(Error::InvalidParameter(format!("{class} supports m ≤ {explicit_cap}")));
            }
            let matroid = random_matroid(&mut rng, m);
            (0..n).map(|_| Valuation::MatroidRank { matroid: matroid.clone(), weights: weights(&mut rng, m) }).collect()
        }
        other => return Err(Error::InvalidParameter(format!("unknown random class {other:?}"))),
    };
    Market::with_default_labels(m, vals)
}

/// Monotone closure of random seeds: `v(S) = max_{T ⊆ S} seed(T)`.
fn monotone_table(rng: &mut ChaCha8Rng, m: usize) -> Vec<Rational> {
    let size = 1usize << m;
    let mut t: Vec<Rational> = (0..size).map(|s| if s == 0 { Rational::zero() } else { quarter(rng, 16) }).collect();
    for s in 1..size {
        for j in ItemSet(s as u32).iter() {
            let sub = s & !(1 << j);
            if t[sub] > t[s] {
                t[s] = t[sub].clone();
            }
        }
    }
    t
}

/// Superadditive closure: singletons and a few larger sets get random seed
/// values, and `v(S)` is the best split of `S` into seeded parts.
fn superadditive_table(rng: &mut ChaCha8Rng, m: usize) -> Vec<Rational> {
    let size = 1usize << m;
    let seed: Vec<Rational> = (0..size)
        .map(|s| {
            let len = (s as u32).count_ones();
            if len == 0 || (len > 1 && !rng.gen_bool(0.3)) {
                Rational::zero()
            } else {
                quarter(rng, 8 * len as i64)
            }
        })
        .collect();
    let mut t = vec![Rational::zero(); size];
    for s in 1..size {
        let set = ItemSet(s as u32);
        let low = set.first().unwrap();
        let mut best = seed[s].clone();
        // Split off the part containing the lowest item.
        for part in set.without(low).subsets() {
            let part = part.with(low);
            if part == set {
                continue;
            }
            let val = &t[part.idx()] + &t[set.minus(part).idx()];
            if val > best {
                best = val;
            }
        }
        t[s] = best;
    }
    t
}

/// A random uniform, partition or graphic matroid, as an explicit family.
fn random_matroid(rng: &mut ChaCha8Rng, m: usize) -> Matroid {
    let full = ItemSet::full(m);
    let indep: Vec<ItemSet> = match rng.gen_range(0..3) {
        0 => {
            let k = rng.gen_range(1..=m);
            full.subsets().filter(|s| s.len() <= k).collect()
        }
        1 => {
            let groups = rng.gen_range(1..=m);
            let group: Vec<usize> = (0..m).map(|_| rng.gen_range(0..groups)).collect();
            let caps: Vec<usize> = (0..groups).map(|_| rng.gen_range(1..=2)).collect();
            full.subsets()
                .filter(|s| (0..groups).all(|g| s.iter().filter(|&j| group[j] == g).count() <= caps[g]))
                .collect()
        }
        _ => {
            // Items are edges of a random multigraph; independent sets are forests.
            let verts = rng.gen_range(2..=m.max(2));
            let edges: Vec<(usize, usize)> = (0..m)
                .map(|_| {
                    let a = rng.gen_range(0..verts);
                    let mut b = rng.gen_range(0..verts - 1);
                    if b >= a {
                        b += 1;
                    }
                    (a, b)
                })
                .collect();
            full.subsets().filter(|s| is_forest(verts, s.iter().map(|j| edges[j]))).collect()
        }
    };
    Matroid::family(m, &indep).expect("generated family is a matroid")
}

fn is_forest(verts: usize, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    let mut parent: Vec<usize> = (0..verts).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return false;
        }
        parent[ra] = rb;
    }
    true
}
