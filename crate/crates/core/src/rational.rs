//! Exact rational helpers. Quotients, cell masses and frequencies are all
//! ratios of small integers, so `Ratio<i64>` is plenty.

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

/// Always `p/q`, including integers (`2/1`), so the wire format is uniform.
pub fn format_q(v: &Q) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            Ok(Ratio::new(a, b))
        }
        None => Ok(Ratio::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Best rational approximation of a float with a bounded denominator.
pub fn from_f64(v: f64) -> Result<Q> {
    if !v.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite value {v}")));
    }
    Ratio::approximate_float(v).ok_or_else(|| Error::InvalidParameter(format!("cannot represent {v}")))
}

pub fn abs_diff(a: &Q, b: &Q) -> Q {
    (a - b).abs()
}

pub fn max_q(values: impl IntoIterator<Item = Q>) -> Q {
    values.into_iter().fold(Q::zero(), |m, v| if v > m { v } else { m })
}

/// Floor of `v / pitch` for a positive pitch.
pub fn floor_div(v: &Q, pitch: &Q) -> i64 {
    (v / pitch).floor().to_integer()
}

/// `#[serde(with = "crate::rational::as_str")]` for `Q` fields.
pub mod as_str {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use super::{format_q, parse_q, Q};

    pub fn serialize<S: Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        parse_q(&String::deserialize(d)?).map_err(D::Error::custom)
    }
}

/// Like [`as_str`] for `Vec<Q>`.
pub mod vec_as_str {
    use serde::{de::Error as _, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    use super::{format_q, parse_q, Q};

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&format_q(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        Vec::<String>::deserialize(d)?.iter().map(|s| parse_q(s).map_err(D::Error::custom)).collect()
    }
}
