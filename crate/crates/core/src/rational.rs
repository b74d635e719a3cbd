//! Exact rational scalars and the combinatorial integers built from them.
//!
//! * [`Rat`] - arbitrary-precision rational, always reduced, denominator > 0
//!   (both guaranteed by the backing `num` implementation)
//! * [`factorial`], [`binomial`], [`multinomial`] - exact integer
//!   combinatorics with a process-wide factorial memo
//! * [`parse_rat`] / [`format_rat`] - the `p/q` string form used everywhere
//!   a rational crosses a text or JSON boundary

use std::cell::RefCell;

use num::bigint::Sign;
use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number. Construction through `num` keeps it reduced with a
/// positive denominator; equality and hashing are value-based.
pub type Rat = BigRational;

/// `n` as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `n/d` as a rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    assert!(d != 0, "zero denominator");
    Rat::new(BigInt::from(n), BigInt::from(d))
}

thread_local! {
    // factorial(k) = FACTORIALS[k]; grown on demand, never shrunk.
    static FACTORIALS: RefCell<Vec<BigInt>> = RefCell::new(vec![BigInt::one()]);
}

/// `n!` as a big integer, memoized up to the largest argument seen.
pub fn factorial(n: u64) -> BigInt {
    let n = n as usize;
    FACTORIALS.with(|cell| {
        let mut table = cell.borrow_mut();
        while table.len() <= n {
            let next = table.last().unwrap() * BigInt::from(table.len());
            table.push(next);
        }
        table[n].clone()
    })
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Multinomial coefficient `(sum b)! / prod b_i!`.
///
/// Entries are signed so callers can feed differences directly: any negative
/// entry makes the coefficient zero by convention.
pub fn multinomial(parts: &[i64]) -> BigInt {
    if parts.iter().any(|&b| b < 0) {
        return BigInt::zero();
    }
    let total: u64 = parts.iter().map(|&b| b as u64).sum();
    let mut value = factorial(total);
    for &b in parts {
        value /= factorial(b as u64);
    }
    value
}

/// Renders a rational as `p/q`, or just `p` when the denominator is one.
pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses the `p/q` (or plain integer) form accepted on every text boundary.
pub fn parse_rat(s: &str) -> Result<Rat> {
    s.trim()
        .parse::<Rat>()
        .map_err(|_| Error::InvalidInput(format!("malformed rational {s:?} (expected p or p/q)")))
}

/// Natural log of a positive big integer.
///
/// Large arguments are split as `x = top * 2^shift` with `top` carrying the
/// leading 53 bits, so the result stays accurate long after `x` stops being
/// representable as a float.
pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.sign() == Sign::Plus, "ln of non-positive integer");
    let bits = x.bits();
    if bits <= 53 {
        return x.to_string().parse::<f64>().unwrap().ln();
    }
    let shift = bits - 53;
    let top: BigInt = x >> shift;
    let top = top.to_string().parse::<f64>().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational, as `ln(numerator) - ln(denominator)`.
pub fn ln_rat(x: &Rat) -> f64 {
    assert!(x.is_positive(), "ln of non-positive rational");
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}
