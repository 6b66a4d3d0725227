//! Spectra: homogeneous trivariate polynomials `Σ C_{p,q,r} x^p y^q z^r` with
//! big-integer coefficients, keyed by `(p, q)` with `r` implied by the degree.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::boolfn::OrbitKey;
use crate::cnf::{BlockKind, Composition};
use crate::numeric::{binomial_prefix, decimal};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spectrum {
    degree: usize,
    terms: BTreeMap<(usize, usize), BigUint>,
}

impl Spectrum {
    /// The constant polynomial `1`.
    pub fn one() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, 0), BigUint::one());
        Self { degree: 0, terms }
    }

    pub fn monomial(coeff: BigUint, p: usize, q: usize, r: usize) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert((p, q), coeff);
        }
        Self {
            degree: p + q + r,
            terms,
        }
    }

    /// Builds a spectrum from `(key, coefficient)` pairs; zero coefficients are dropped.
    pub fn from_terms(degree: usize, terms: impl IntoIterator<Item = (OrbitKey, BigUint)>) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (k, c) in terms {
            if k.n() != degree {
                return Err(Error::Precondition(format!(
                    "term {k} has degree {} != {degree}",
                    k.n()
                )));
            }
            if !c.is_zero() {
                *out.entry((k.p, k.q)).or_insert_with(BigUint::zero) += c;
            }
        }
        Ok(Self { degree, terms: out })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in `(p, q)` order.
    pub fn terms(&self) -> impl Iterator<Item = (OrbitKey, &BigUint)> {
        let n = self.degree;
        self.terms
            .iter()
            .map(move |(&(p, q), c)| (OrbitKey::new(p, q, n - p - q), c))
    }

    /// Sum of all coefficients, i.e. the number of solutions.
    pub fn total(&self) -> BigUint {
        self.terms.values().sum()
    }

    pub fn coeff(&self, k: &OrbitKey) -> Result<BigUint> {
        if k.n() != self.degree {
            return Err(Error::CoordinateMismatch {
                expected: self.degree,
                found: k.n(),
            });
        }
        Ok(self.terms.get(&(k.p, k.q)).cloned().unwrap_or_default())
    }

    pub fn mul(&self, other: &Spectrum) -> Spectrum {
        let mut terms: BTreeMap<(usize, usize), BigUint> = BTreeMap::new();
        for (&(p1, q1), c1) in &self.terms {
            for (&(p2, q2), c2) in &other.terms {
                *terms.entry((p1 + p2, q1 + q2)).or_insert_with(BigUint::zero) += c1 * c2;
            }
        }
        Spectrum {
            degree: self.degree + other.degree,
            terms,
        }
    }

    pub fn pow(&self, mut e: usize) -> Spectrum {
        let mut acc = Spectrum::one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SpectrumJson::from(self)).expect("spectrum serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: SpectrumJson = serde_json::from_str(s)?;
        Self::from_terms(
            j.degree,
            j.terms.into_iter().map(|t| (OrbitKey::new(t.p, t.q, t.r), t.c)),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    p: usize,
    q: usize,
    r: usize,
    #[serde(with = "decimal")]
    c: BigUint,
}

#[derive(Serialize, Deserialize)]
struct SpectrumJson {
    degree: usize,
    terms: Vec<TermJson>,
}

impl From<&Spectrum> for SpectrumJson {
    fn from(s: &Spectrum) -> Self {
        Self {
            degree: s.degree,
            terms: s
                .terms()
                .map(|(k, c)| TermJson {
                    p: k.p,
                    q: k.q,
                    r: k.r,
                    c: c.clone(),
                })
                .collect(),
        }
    }
}

impl Serialize for Spectrum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpectrumJson::from(self).serialize(s)
    }
}

pub fn block_spectrum(kind: BlockKind) -> Spectrum {
    let t = |c: u32, p, q, r| (OrbitKey::new(p, q, r), BigUint::from(c));
    let terms = match kind {
        BlockKind::Id2 => vec![t(1, 1, 0, 0)],
        BlockKind::Id1 => vec![t(2, 0, 1, 0)],
        BlockKind::Id0 => vec![t(1, 0, 0, 1)],
        BlockKind::Nand => vec![t(2, 0, 1, 0), t(1, 0, 0, 1)],
        BlockKind::Matching => vec![t(1, 2, 0, 0), t(2, 0, 2, 0), t(1, 0, 0, 2)],
        BlockKind::TwoImp => vec![t(1, 2, 0, 0), t(1, 0, 2, 0), t(2, 0, 1, 1), t(1, 0, 0, 2)],
    };
    Spectrum::from_terms(kind.arity(), terms).expect("block spectra are homogeneous")
}

/// Full product `Π block_spectrum(k)^count(k)`. Quartic in `n`; use
/// [`coeff_fast`] when only a few coefficients are needed.
pub fn composition_spectrum(c: &Composition) -> Spectrum {
    BlockKind::ALL
        .iter()
        .filter(|&&k| c.count(k) > 0)
        .fold(Spectrum::one(), |acc, &k| acc.mul(&block_spectrum(k).pow(c.count(k))))
}

/// Which closed-form convolution [`coeff_fast`] uses for the core `(a, b, c)` counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProductFamily {
    /// `Matching^A Nand^{2C}`
    MatchingNand,
    /// `TwoImp^B Nand^{2C}`
    TwoImpNand,
    /// `Matching^A TwoImp^B Nand^{2C}`
    Full,
}

impl ProductFamily {
    pub fn of(c: &Composition) -> Self {
        match (c.matching, c.two_imp) {
            (_, 0) => ProductFamily::MatchingNand,
            (0, _) => ProductFamily::TwoImpNand,
            _ => ProductFamily::Full,
        }
    }
}

/// `(1+v)^{2l}` times `(2v+1)^c`, truncated to degree `q`.
fn initial_window(l: usize, c: usize, q: usize) -> Vec<BigUint> {
    let left = binomial_prefix(2 * l as u64, q as u64);
    let right: Vec<BigUint> = binomial_prefix(c as u64, q as u64)
        .into_iter()
        .enumerate()
        .map(|(t, b)| b << t)
        .collect();
    (0..=q)
        .map(|m| (0..=m).map(|s| &left[s] * &right[m - s]).sum())
        .collect()
}

/// `C(a,j) 2^j` for `j = 0..=jmax`.
fn doubled_binomials(a: usize, jmax: usize) -> Vec<BigUint> {
    binomial_prefix(a as u64, jmax as u64)
        .into_iter()
        .enumerate()
        .map(|(j, b)| b << j)
        .collect()
}

/// `[u^P v^q] (u + 2v² + 1)^a (u + (1+v)²)^b (2v+1)^c` where `u` stands for `x²`.
fn core_coeff(a: usize, b: usize, c: usize, p: usize, q: usize) -> BigUint {
    if p % 2 == 1 {
        return BigUint::zero();
    }
    let big_p = p / 2;
    if big_p > a + b || 2 * (a + b) + c < p + q {
        return BigUint::zero();
    }
    let lo = big_p.saturating_sub(b);
    let hi = a.min(big_p);
    let binom_a = binomial_prefix(a as u64, hi as u64);
    let binom_b = binomial_prefix(b as u64, big_p as u64);
    let mut w = initial_window(b + lo - big_p, c, q);
    let mut total = BigUint::zero();
    for i in lo..=hi {
        if i > lo {
            // W <- W * (1 + v)^2, in place from the top down
            for m in (0..=q).rev() {
                let mut add = BigUint::zero();
                if m >= 1 {
                    add += &w[m - 1] << 1;
                }
                if m >= 2 {
                    add += &w[m - 2];
                }
                w[m] += add;
            }
        }
        let weights = doubled_binomials(a - i, q / 2);
        let inner: BigUint = weights
            .iter()
            .enumerate()
            .filter(|(_, wt)| !wt.is_zero())
            .map(|(j, wt)| wt * &w[q - 2 * j])
            .sum();
        if !inner.is_zero() {
            total += &binom_a[i] * &binom_b[big_p - i] * inner;
        }
    }
    total
}

/// Exact `coeff(composition_spectrum(c), k)` without expanding the product.
///
/// Identity blocks only shift the key: `Id2` eats one `p`, `Id1` one `q` (times 2)
/// and `Id0` one `r`. The remaining `Matching^a TwoImp^b Nand^c` core is a
/// one-dimensional convolution over the `x²` split between Matching and TwoImp.
pub fn coeff_fast(c: &Composition, k: &OrbitKey) -> Result<BigUint> {
    if c.n() != k.n() {
        return Err(Error::CoordinateMismatch {
            expected: c.n(),
            found: k.n(),
        });
    }
    let (Some(p), Some(q), Some(_)) = (k.p.checked_sub(c.id2), k.q.checked_sub(c.id1), k.r.checked_sub(c.id0)) else {
        return Ok(BigUint::zero());
    };
    Ok(core_coeff(c.matching, c.two_imp, c.nand, p, q) << c.id1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(p: usize, q: usize, r: usize) -> OrbitKey {
        OrbitKey::new(p, q, r)
    }

    #[test]
    fn block_spectra_match_definitions() {
        let nand = block_spectrum(BlockKind::Nand);
        assert_eq!(nand.coeff(&key(0, 1, 0)).unwrap(), BigUint::from(2u32));
        assert_eq!(nand.coeff(&key(0, 0, 1)).unwrap(), BigUint::one());
        assert_eq!(nand.len(), 2);
        let id1 = block_spectrum(BlockKind::Id1);
        assert_eq!(id1.len(), 1);
        assert_eq!(id1.coeff(&key(0, 1, 0)).unwrap(), BigUint::from(2u32));
        let ti = block_spectrum(BlockKind::TwoImp);
        assert_eq!(ti.coeff(&key(0, 1, 1)).unwrap(), BigUint::from(2u32));
        assert_eq!(ti.total(), BigUint::from(5u32));
    }

    #[test]
    fn mul_examples() {
        let xy = block_spectrum(BlockKind::Id2).mul(&block_spectrum(BlockKind::Id1));
        assert_eq!(xy.coeff(&key(1, 1, 0)).unwrap(), BigUint::from(2u32));
        let m = block_spectrum(BlockKind::Matching);
        assert_eq!(m.mul(&m).coeff(&key(2, 2, 0)).unwrap(), BigUint::from(4u32));
        assert_eq!(m.mul(&Spectrum::one()), m);
        assert!(m.coeff(&key(1, 1, 1)).is_err());
    }

    #[test]
    fn identity_compositions_are_monomials() {
        let c = Composition::parse("Id2:3, Id1:2, Id0:1").unwrap();
        let s = composition_spectrum(&c);
        assert_eq!(s.len(), 1);
        assert_eq!(s.coeff(&key(3, 2, 1)).unwrap(), BigUint::from(4u32));
    }

    #[test]
    fn region2_closed_form() {
        // {Matching:n/2} at (p,q,r) is C(n/2,p/2) C((n-p)/2,q/2) 2^{q/2}
        let c = Composition::parse("Matching:6").unwrap();
        let expect = crate::numeric::binomial(6, 2) * crate::numeric::binomial(4, 2) * 4u32;
        assert_eq!(coeff_fast(&c, &key(4, 4, 4)).unwrap(), expect);
        assert!(coeff_fast(&c, &key(3, 4, 5)).unwrap().is_zero());
    }

    #[test]
    fn coeff_fast_matches_full_product_small() {
        for a in 0..=3 {
            for b in 0..=3 {
                for c in 0..=4 {
                    for i in 0..=2 {
                        let comp = Composition::default()
                            .with(BlockKind::Matching, a)
                            .with(BlockKind::TwoImp, b)
                            .with(BlockKind::Nand, c)
                            .with(BlockKind::Id2, i)
                            .with(BlockKind::Id1, 1)
                            .with(BlockKind::Id0, 2 - i);
                        let s = composition_spectrum(&comp);
                        for k in crate::boolfn::enumerate_orbits(comp.n()) {
                            assert_eq!(coeff_fast(&comp, &k).unwrap(), s.coeff(&k).unwrap(), "{comp} at {k}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let s = composition_spectrum(&Composition::parse("Matching:1, Nand:2").unwrap());
        let text = s.to_json();
        assert!(text.starts_with("{\"degree\":4,\"terms\":["));
        assert!(text.contains("\"c\":\"8\""));
        assert_eq!(Spectrum::from_json(&text).unwrap(), s);
    }
}
