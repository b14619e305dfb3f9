//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary precision rational number.
pub type Rational = BigRational;

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"a/b"` or `"a"`.
pub fn parse(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a rational: {text:?}"));
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(text.parse().map_err(|_| bad())?)),
    }
}

/// Formats as `"a/b"`, including integers (`"1/1"`, `"0/1"`).
pub fn format(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Least common multiple of the denominators.
pub fn lcm_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Closest rational to `x` with denominator at most `max_den`.
///
/// Walks the continued fraction expansion of `x` (taken exactly from its
/// binary value) and compares the last admissible convergent with the best
/// semiconvergent. Ties go to the convergent.
pub fn best_approximation(x: f64, max_den: u64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::Rationalize(format!("non-finite value {x}")));
    }
    if max_den == 0 {
        return Err(Error::OutOfRange("max_den must be positive".into()));
    }
    let exact = Rational::from_float(x).expect("finite float");
    if exact.denom() <= &BigInt::from(max_den) {
        return Ok(exact);
    }
    let bound = BigInt::from(max_den);

    // convergents p/q with (p_prev, q_prev) = (1, 0), (p_cur, q_cur) = (a0, 1)
    let mut rest = exact.clone();
    let a0 = rest.floor();
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p_cur, mut q_cur) = (a0.to_integer(), BigInt::one());
    rest -= a0;
    loop {
        if rest.is_zero() {
            return Ok(Rational::new(p_cur, q_cur));
        }
        rest = rest.recip();
        let a = rest.floor();
        rest -= &a;
        let a = a.to_integer();
        let q_next = &a * &q_cur + &q_prev;
        if q_next > bound {
            // largest t with t*q_cur + q_prev <= bound
            let t = (&bound - &q_prev) / &q_cur;
            let semi = Rational::new(&t * &p_cur + &p_prev, &t * &q_cur + &q_prev);
            let conv = Rational::new(p_cur, q_cur);
            let semi_err = (&semi - &exact).abs();
            let conv_err = (&conv - &exact).abs();
            return Ok(if t.is_positive() && semi_err < conv_err {
                semi
            } else {
                conv
            });
        }
        let p_next = &a * &p_cur + &p_prev;
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);
    }
}
