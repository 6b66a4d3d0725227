//! Exact integer helpers shared by the counting modules.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// `C(m, k)` as an exact big integer; zero when `k > m`.
pub fn binomial(m: u64, k: u64) -> BigUint {
    if k > m {
        return BigUint::zero();
    }
    let k = k.min(m - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= m - i;
        acc /= i + 1;
    }
    acc
}

/// The full row `C(m, 0..=m)`.
pub fn binomial_row(m: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(m as usize + 1);
    let mut cur = BigUint::one();
    row.push(cur.clone());
    for k in 0..m {
        cur *= m - k;
        cur /= k + 1;
        row.push(cur.clone());
    }
    row
}

/// `C(m, 0..=kmax)` (truncated row), padded with zeros past `m`.
pub fn binomial_prefix(m: u64, kmax: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(kmax as usize + 1);
    let mut cur = BigUint::one();
    for k in 0..=kmax {
        if k > m {
            row.push(BigUint::zero());
            continue;
        }
        if k > 0 {
            cur *= m - (k - 1);
            cur /= k;
        }
        row.push(cur.clone());
    }
    row
}

pub fn pow2(k: u64) -> BigUint {
    BigUint::one() << k
}

/// Base-2 logarithm of a positive big integer, accurate to f64 precision.
pub fn log2_big(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "log2 of zero");
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64-bit head");
    (top as f64).log2() + shift as f64
}

/// Natural logarithm of a positive big integer.
pub fn ln_big(x: &BigUint) -> f64 {
    log2_big(x) * std::f64::consts::LN_2
}

/// Serde adapter writing big integers as decimal strings.
pub mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| D::Error::custom("bad decimal"))
    }
}
