//! Exact comparisons against bounds that involve `log₂` and square roots.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::numeric::Rational;

/// Outcome of checking `value ≥ reference / factor` for a guarantee `label`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub label: String,
    pub value: Rational,
    pub reference: Rational,
    pub holds: bool,
}

impl BoundCheck {
    pub fn new(label: impl Into<String>, value: &Rational, reference: &Rational, holds: bool) -> Self {
        BoundCheck { label: label.into(), value: value.clone(), reference: reference.clone(), holds }
    }
}

/// Compares `log₂ x` with `y` exactly, for `x > 0`.
pub fn log2_cmp(x: &Rational, y: &Rational) -> Ordering {
    assert!(x.is_positive(), "log₂ of a nonpositive number");
    let approx = x.to_f64().log2() - y.to_f64();
    if approx.is_finite() && approx.abs() > 1e-9 {
        return if approx > 0.0 { Ordering::Greater } else { Ordering::Less };
    }
    // log₂(p/q) ≥ a/b  ⟺  p^b ≥ 2^a · q^b  (b > 0).
    let (a, b) = (y.numer().clone(), y.denom().clone());
    let b = b.to_u32().expect("denominator small enough for exact comparison");
    let pb = num_traits::pow(x.numer().clone(), b as usize);
    let qb = num_traits::pow(x.denom().clone(), b as usize);
    let shift = a.abs().to_usize().expect("exponent small enough");
    let (lhs, rhs) = if a.is_negative() { (pb << shift, qb) } else { (pb, qb << shift) };
    lhs.cmp(&rhs)
}

/// `value ≥ total / (c · (log₂ x + k))`, decided exactly. Requires `c > 0` and
/// `log₂ x + k > 0`.
pub fn at_least_over_log(value: &Rational, total: &Rational, c: &Rational, x: &Rational, k: &Rational) -> bool {
    if !value.is_positive() {
        return !total.is_positive();
    }
    // value·c·(log₂x + k) ≥ total  ⟺  log₂x ≥ total/(value·c) − k
    log2_cmp(x, &(total / (value * c) - k)) != Ordering::Less
}

/// `value ≥ total / (a·√r + b)`, decided exactly for `a, b ≥ 0` not both zero.
pub fn at_least_over_sqrt(value: &Rational, total: &Rational, a: &Rational, b: &Rational, r: &Rational) -> bool {
    if !value.is_positive() {
        return !total.is_positive();
    }
    // a·√r ≥ total/value − b
    let rhs = total / value - b;
    if !rhs.is_positive() {
        return true;
    }
    a * a * r >= &rhs * &rhs
}

/// `⌊log₂ n⌋` for `n ≥ 1`.
pub fn floor_log2(n: usize) -> usize {
    assert!(n >= 1);
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

/// `⌈√n⌉`.
pub fn ceil_sqrt(n: usize) -> usize {
    let mut s = (n as f64).sqrt() as usize;
    while s * s < n {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) >= n {
        s -= 1;
    }
    s
}

/// `⌈∛n⌉`.
pub fn ceil_cbrt(n: usize) -> usize {
    let mut s = 0;
    while s * s * s < n {
        s += 1;
    }
    s
}

/// `2^k` as a big integer.
pub fn pow2(k: usize) -> BigInt {
    BigInt::one() << k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::r;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn exact_log_comparisons() {
        assert_eq!(log2_cmp(&q(8), &q(3)), Ordering::Equal);
        assert_eq!(log2_cmp(&q(8), &r(301, 100)), Ordering::Less);
        assert_eq!(log2_cmp(&r(1, 4), &q(-2)), Ordering::Equal);
        assert_eq!(log2_cmp(&q(2), &r(1, 2)), Ordering::Greater);
        // log₂ 3 ≈ 1.58496
        assert_eq!(log2_cmp(&q(3), &r(158496, 100000)), Ordering::Greater);
        assert_eq!(log2_cmp(&q(3), &r(158497, 100000)), Ordering::Less);
    }

    #[test]
    fn bounds() {
        // 1 ≥ 6/(2·(log₂4 + 1)) = 1
        assert!(at_least_over_log(&q(1), &q(6), &q(2), &q(4), &q(1)));
        assert!(!at_least_over_log(&r(99, 100), &q(6), &q(2), &q(4), &q(1)));
        // r = 4 parts of value v: 2v ≥ 4v/(4·2 + 4)
        assert!(at_least_over_sqrt(&q(2), &q(4), &q(4), &q(4), &q(4)));
        assert!(!at_least_over_sqrt(&q(1), &q(13), &q(4), &q(4), &q(4)));
        assert_eq!((floor_log2(1), floor_log2(5), floor_log2(8)), (0, 2, 3));
        assert_eq!((ceil_sqrt(4), ceil_sqrt(5), ceil_sqrt(1)), (2, 3, 1));
        assert_eq!((ceil_cbrt(8), ceil_cbrt(9), ceil_cbrt(1)), (2, 3, 1));
    }
}
