//! Exact rational values. All fairness comparisons in this crate are exact;
//! no floating point is used anywhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

use crate::error::Error;

/// The value type used throughout: arbitrary-precision rationals.
pub type Q = BigRational;

/// Shorthand for an integer rational.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Shorthand for `p/q`.
pub fn qf(p: i64, q: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(q))
}

/// Parses "p", "p/q", or "-p/q". Whitespace is not tolerated.
pub fn parse_rational(s: &str) -> Result<Q, Error> {
    let parse_int = |t: &str| -> Result<BigInt, Error> {
        t.parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("invalid rational literal: {s:?}")))
    };
    match s.split_once('/') {
        None => Ok(Q::from_integer(parse_int(s)?)),
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in rational: {s:?}")));
            }
            Ok(Q::new(parse_int(p)?, den))
        }
    }
}

/// Canonical text form: "p" for integers, "p/q" otherwise.
pub fn format_rational(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Reads a rational from its JSON encoding: an integer number or a "p/q" string.
pub fn rational_from_json(v: &Value) -> Result<Q, Error> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(qi(i))
            } else if let Some(u) = n.as_u64() {
                Ok(Q::from_integer(BigInt::from(u)))
            } else {
                Err(Error::Parse(format!(
                    "non-integer JSON number {n} is not a valid rational; use a \"p/q\" string"
                )))
            }
        }
        Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!("expected rational, found {other}"))),
    }
}

/// Canonical JSON form: integer-valued rationals become JSON integers when they
/// fit in i64, everything else becomes a "p/q" string.
pub fn rational_to_json(x: &Q) -> Value {
    if x.denom().is_one() {
        if let Ok(i) = i64::try_from(x.numer().clone()) {
            return Value::from(i);
        }
    }
    Value::from(format_rational(x))
}

/// Checks `x >= 0`.
pub fn is_nonnegative(x: &Q) -> bool {
    !x.is_negative()
}
