//! Searches over 2-CNF-definable sets: Pareto-optimal building blocks, the exact
//! optimum `mu` at tiny `n`, and the exhaustive composition search behind `c(n)`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::boolfn::{enumerate_orbits, orbit_key, orbit_size, Assignment, OrbitKey};
use crate::cnf::{BlockKind, Composition, TwoCnf};
use crate::numeric::{binomial, decimal, log2_big};
use crate::spectrum::{coeff_fast, Spectrum};
use crate::{Error, Result};

#[inline]
fn majority(a: u64, b: u64, c: u64) -> u64 {
    (a & b) | (b & c) | (a & c)
}

/// Smallest superset of `set` closed under bitwise majority of any three members.
pub fn median_closure(set: &BTreeSet<u64>) -> BTreeSet<u64> {
    let mut out = set.clone();
    let mut frontier: Vec<u64> = out.iter().copied().collect();
    while !frontier.is_empty() {
        let members: Vec<u64> = out.iter().copied().collect();
        let mut fresh = Vec::new();
        for &a in &frontier {
            for (i, &b) in members.iter().enumerate() {
                for &c in &members[i..] {
                    let m = majority(a, b, c);
                    if !out.contains(&m) && !fresh.contains(&m) {
                        fresh.push(m);
                    }
                }
            }
        }
        out.extend(fresh.iter().copied());
        frontier = fresh;
    }
    out
}

pub fn is_median_closed(set: &[u64]) -> bool {
    let lookup: BTreeSet<u64> = set.iter().copied().collect();
    set.iter().enumerate().all(|(i, &a)| {
        set[i..]
            .iter()
            .enumerate()
            .all(|(j, &b)| set[i + j..].iter().all(|&c| lookup.contains(&majority(a, b, c))))
    })
}

/// Assignments of `n` coordinates on which the parity of `p` equals `b`.
fn parity_universe(n: usize, b: u8) -> Vec<u64> {
    (0..1u64 << (2 * n))
        .filter(|&bits| orbit_key(&Assignment::from_bits(n, bits)).parity() == b)
        .collect()
}

/// Every non-empty median-closed subset of the parity-`b` assignments.
fn closed_subsets(n: usize, b: u8) -> Result<Vec<Vec<u64>>> {
    if n == 0 || n > 2 {
        return Err(Error::Precondition(format!(
            "median-closed enumeration supports 1 or 2 coordinates, got {n}"
        )));
    }
    let universe = parity_universe(n, b);
    Ok((1u64..1 << universe.len())
        .map(|mask| {
            universe
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &a)| a)
                .collect::<Vec<u64>>()
        })
        .filter(|s| is_median_closed(s))
        .collect())
}

fn census(n: usize, set: &[u64]) -> Spectrum {
    let mut counts: BTreeMap<OrbitKey, BigUint> = BTreeMap::new();
    for &bits in set {
        *counts.entry(orbit_key(&Assignment::from_bits(n, bits))).or_default() += 1u32;
    }
    Spectrum::from_terms(n, counts).expect("census keys are homogeneous")
}

/// `a` dominates `b` when every coefficient of `a` is at least `b`'s.
pub fn dominates(a: &Spectrum, b: &Spectrum) -> bool {
    b.terms().all(|(k, c)| a.coeff(&k).is_ok_and(|ac| &ac >= c))
}

#[derive(Debug, Clone, Serialize)]
pub struct ParetoEntry {
    pub spectrum: Spectrum,
    #[serde(serialize_with = "ser_dimacs")]
    pub witness: TwoCnf,
    pub parity: u8,
}

fn ser_dimacs<S: serde::Serializer>(f: &TwoCnf, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&f.to_dimacs())
}

/// Non-dominated spectra among all 2-CNF-definable sets of `n_coords`
/// coordinates consistent with parity `b`, one witness each.
pub fn pareto_blocks(n_coords: usize, b: u8) -> Result<Vec<ParetoEntry>> {
    let mut by_spectrum: Vec<(Spectrum, Vec<u64>)> = Vec::new();
    for set in closed_subsets(n_coords, b)? {
        let s = census(n_coords, &set);
        if !by_spectrum.iter().any(|(t, _)| *t == s) {
            by_spectrum.push((s, set));
        }
    }
    let mut out: Vec<ParetoEntry> = by_spectrum
        .iter()
        .filter(|(s, _)| !by_spectrum.iter().any(|(t, _)| t != s && dominates(t, s)))
        .map(|(s, set)| ParetoEntry {
            spectrum: s.clone(),
            witness: TwoCnf::from_solution_set(n_coords, set),
            parity: b,
        })
        .collect();
    out.sort_by_key(|e| e.spectrum.to_json());
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct MuResult {
    pub key: OrbitKey,
    #[serde(with = "decimal")]
    pub mu: BigUint,
    #[serde(with = "decimal")]
    pub orbit_size: BigUint,
    /// Solutions of one optimal consistent 2-CNF.
    pub witness: Vec<u64>,
}

/// `max |M ∩ S(k)|` over median-closed `M` inside the parity-`b` assignments.
pub fn exact_mu(n: usize, k: &OrbitKey, b: u8) -> Result<MuResult> {
    if k.n() != n {
        return Err(Error::CoordinateMismatch {
            expected: n,
            found: k.n(),
        });
    }
    let mut best: (usize, Vec<u64>) = (0, Vec::new());
    for set in closed_subsets(n, b)? {
        let hits = set
            .iter()
            .filter(|&&bits| orbit_key(&Assignment::from_bits(n, bits)) == *k)
            .count();
        if hits > best.0 {
            best = (hits, set);
        }
    }
    Ok(MuResult {
        key: *k,
        mu: BigUint::from(best.0),
        orbit_size: orbit_size(*k),
        witness: best.1,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RhoStar {
    pub n: usize,
    pub parity: u8,
    /// `max |S| / mu` over orbits of the given parity.
    pub rho: f64,
    pub per_orbit: Vec<MuResult>,
}

pub fn rho_star(n: usize, b: u8) -> Result<RhoStar> {
    let per_orbit: Vec<MuResult> = enumerate_orbits(n)
        .into_iter()
        .filter(|k| k.parity() == b)
        .map(|k| exact_mu(n, &k, b))
        .collect::<Result<_>>()?;
    let rho = per_orbit
        .iter()
        .map(|m| {
            let size: f64 = m.orbit_size.to_string().parse().unwrap_or(f64::INFINITY);
            let mu: f64 = m.mu.to_string().parse().unwrap_or(0.0);
            size / mu
        })
        .fold(0.0, f64::max);
    Ok(RhoStar {
        n,
        parity: b,
        rho,
        per_orbit,
    })
}

/// Default cap on `n` for [`compose_search`].
pub const DEFAULT_SEARCH_CAP: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct SearchEntry {
    pub key: OrbitKey,
    pub composition: Composition,
    #[serde(with = "decimal")]
    pub captured: BigUint,
    #[serde(with = "decimal")]
    pub orbit_size: BigUint,
    pub exponent: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub n: usize,
    pub parity: u8,
    pub blocks: Vec<BlockKind>,
    /// `max log₂(|S| / captured) / n` over orbits of the target parity.
    pub c: f64,
    pub worst: OrbitKey,
    pub compositions_examined: usize,
    pub entries: Vec<SearchEntry>,
}

impl SearchResult {
    pub fn best_for(&self, k: &OrbitKey) -> Option<&SearchEntry> {
        self.entries.iter().find(|e| e.key == *k)
    }
}

/// Dense `(P, q)` table of `M^a T^b` with `P = p/2`; `r` is implied.
struct CoreTable {
    stride: usize,
    data: Vec<f64>,
}

impl CoreTable {
    fn unit(max_pairs: usize) -> Self {
        let stride = 2 * max_pairs + 1;
        let mut data = vec![0.0; (max_pairs + 1) * stride];
        data[0] = 1.0;
        Self { stride, data }
    }

    #[inline]
    fn at(&self, big_p: usize, q: usize) -> f64 {
        self.data[big_p * self.stride + q]
    }

    /// Multiplies in place by `x² w_x + 2y² w_y + ...`: Matching has
    /// `(x², y², yz, z²) = (1, 2, 0, 1)`, TwoImp `(1, 1, 2, 1)`. `deg` is the
    /// current pair count.
    fn mul_pair(&mut self, deg: usize, yy: f64, yz: f64) {
        let s = self.stride;
        for big_p in (0..=deg + 1).rev() {
            for q in (0..=2 * (deg + 1)).rev() {
                let mut v = if big_p <= deg { self.data[big_p * s + q] } else { 0.0 };
                if big_p >= 1 {
                    v += self.data[(big_p - 1) * s + q];
                }
                if q >= 2 && big_p <= deg {
                    v += yy * self.data[big_p * s + q - 2];
                }
                if q >= 1 && big_p <= deg {
                    v += yz * self.data[big_p * s + q - 1];
                }
                self.data[big_p * s + q] = v;
            }
        }
    }
}

/// How the coordinates left over after Matching, TwoImp and Id2 are filled.
#[derive(Debug, Clone, Copy)]
enum Remainder {
    /// `Nand^rem`: convolve with `C(rem, s) 2^s`.
    Nand,
    /// `Id1^s Id0^{rem-s}`, one split per orbit: take the best single term.
    Identity { id1: bool, id0: bool },
}

/// Exhaustive search over compositions of `blocks` with `n` coordinates and
/// parity `parity`, recording for every orbit of that parity the composition
/// capturing the most solutions.
///
/// Dominated configurations are skipped: Nand's `2y + z` dominates Id1 and Id0,
/// and Matching dominates two Id2 copies, so when those blocks are available
/// the search needs no Id1/Id0 and at most one Id2. Scores are compared in
/// `f64`; every winner's capture is then recomputed exactly.
pub fn compose_search(n: usize, blocks: &[BlockKind], parity: u8, cap: usize) -> Result<SearchResult> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    let has = |k: BlockKind| blocks.contains(&k);
    let remainder = if has(BlockKind::Nand) {
        Remainder::Nand
    } else {
        Remainder::Identity {
            id1: has(BlockKind::Id1),
            id0: has(BlockKind::Id0),
        }
    };
    let id2_choices: Vec<usize> = if has(BlockKind::Matching) || !has(BlockKind::Id2) {
        if parity == 1 && !has(BlockKind::Id2) {
            Vec::new()
        } else {
            vec![parity as usize]
        }
    } else {
        (0..=n).filter(|i| i % 2 == parity as usize).collect()
    };
    let max_a = if has(BlockKind::Matching) { n / 2 } else { 0 };
    let max_b = if has(BlockKind::TwoImp) { n / 2 } else { 0 };

    // binomial rows C(rem, s) 2^s as f64, indexed by rem
    let nand_rows: Vec<Vec<f64>> = (0..=n)
        .map(|rem| {
            (0..=rem)
                .map(|s| {
                    binomial(rem as u64, s as u64)
                        .to_string()
                        .parse::<f64>()
                        .expect("finite")
                        * 2f64.powi(s as i32)
                })
                .collect()
        })
        .collect();

    let side = n + 1;
    let mut best_val = vec![0.0f64; side * side];
    let mut best_comp = vec![Composition::default(); side * side];
    let mut examined = 0usize;

    let mut m_pow = CoreTable::unit(n / 2);
    for a in 0..=max_a {
        if 2 * a > n {
            break;
        }
        if a > 0 {
            m_pow.mul_pair(a - 1, 2.0, 0.0);
        }
        let mut core = CoreTable {
            stride: m_pow.stride,
            data: m_pow.data.clone(),
        };
        for b in 0..=max_b {
            let pairs = a + b;
            if 2 * pairs > n {
                break;
            }
            if b > 0 {
                core.mul_pair(pairs - 1, 1.0, 2.0);
            }
            for &i2 in &id2_choices {
                if 2 * pairs + i2 > n {
                    continue;
                }
                let rem = n - 2 * pairs - i2;
                let comp_base = Composition::default()
                    .with(BlockKind::Matching, a)
                    .with(BlockKind::TwoImp, b)
                    .with(BlockKind::Id2, i2);
                let comp = match remainder {
                    Remainder::Nand => comp_base.with(BlockKind::Nand, rem),
                    Remainder::Identity { id1, id0 } => {
                        if rem > 0 && !id1 && !id0 {
                            continue;
                        }
                        comp_base
                    }
                };
                examined += 1;
                for big_p in 0..=pairs {
                    let p = 2 * big_p + i2;
                    for q in 0..=n - p {
                        let val = match remainder {
                            Remainder::Nand => {
                                let row = &nand_rows[rem];
                                let lo = q.saturating_sub(2 * pairs - 2 * big_p);
                                (lo..=q.min(rem)).map(|s| core.at(big_p, q - s) * row[s]).sum::<f64>()
                            }
                            Remainder::Identity { id1, id0 } => {
                                let lo = q.saturating_sub(2 * pairs - 2 * big_p);
                                (lo..=q.min(rem))
                                    .filter(|&s| (id1 || s == 0) && (id0 || s == rem))
                                    .map(|s| core.at(big_p, q - s) * 2f64.powi(s as i32))
                                    .fold(0.0, f64::max)
                            }
                        };
                        let idx = p * side + q;
                        if val > best_val[idx] {
                            best_val[idx] = val;
                            best_comp[idx] = comp;
                        }
                    }
                }
            }
        }
    }

    let mut entries = Vec::new();
    for k in enumerate_orbits(n).into_iter().filter(|k| k.parity() == parity) {
        let idx = k.p * side + k.q;
        let mut comp = best_comp[idx];
        if let Remainder::Identity { .. } = remainder {
            comp = best_identity_split(comp, &k, n)?;
        }
        let captured = if best_val[idx] > 0.0 {
            coeff_fast(&comp, &k)?
        } else {
            BigUint::zero()
        };
        let size = orbit_size(k);
        let exponent = if captured.is_zero() {
            f64::INFINITY
        } else {
            (log2_big(&size) - log2_big(&captured)) / n as f64
        };
        entries.push(SearchEntry {
            key: k,
            composition: comp,
            captured,
            orbit_size: size,
            exponent,
        });
    }
    if let Some(e) = entries.iter().find(|e| e.captured.is_zero()) {
        return Err(Error::ZeroCapture(e.key));
    }
    let worst = entries
        .iter()
        .max_by(|a, b| a.exponent.total_cmp(&b.exponent).then(b.key.cmp(&a.key)))
        .ok_or_else(|| Error::Precondition(format!("no orbit of parity {parity} is reachable with these blocks")))?;
    Ok(SearchResult {
        n,
        parity,
        blocks: blocks.to_vec(),
        c: worst.exponent,
        worst: worst.key,
        compositions_examined: examined,
        entries,
    })
}

/// Fills the remainder of an identity-only composition with the `Id1`/`Id0`
/// split that captures the most at `k`.
fn best_identity_split(base: Composition, k: &OrbitKey, n: usize) -> Result<Composition> {
    let rem = n - base.n();
    let mut best = (BigUint::zero(), base.with(BlockKind::Id0, rem));
    for s in 0..=rem {
        let c = base.with(BlockKind::Id1, s).with(BlockKind::Id0, rem - s);
        let v = coeff_fast(&c, k)?;
        if v > best.0 {
            best = (v, c);
        }
    }
    Ok(best.1)
}

pub fn search_to_csv(res: &SearchResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "p", "q", "r", "composition", "captured", "orbit_size", "exponent"])?;
    for e in &res.entries {
        w.write_record([
            res.n.to_string(),
            e.key.p.to_string(),
            e.key.q.to_string(),
            e.key.r.to_string(),
            e.composition.to_string(),
            e.captured.to_string(),
            e.orbit_size.to_string(),
            format!("{:.9}", e.exponent),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::block_spectrum;

    #[test]
    fn median_closure_examples() {
        let two: BTreeSet<u64> = [0b000, 0b111].into();
        assert_eq!(median_closure(&two), two);
        let three: BTreeSet<u64> = [0b110, 0b101, 0b011].into();
        assert!(median_closure(&three).contains(&0b111));
        let closed = median_closure(&three);
        assert_eq!(median_closure(&closed), closed);
    }

    #[test]
    fn block_solution_sets_are_median_closed() {
        for kind in BlockKind::ALL {
            let f = crate::cnf::block_cnf(kind);
            let sols: BTreeSet<u64> = crate::boolfn::all_assignments(kind.arity())
                .filter(|a| f.eval(a))
                .map(|a| a.bits())
                .collect();
            assert_eq!(median_closure(&sols), sols, "{kind:?}");
        }
    }

    #[test]
    fn pareto_two_coordinates_even() {
        let got: Vec<Spectrum> = pareto_blocks(2, 0).unwrap().into_iter().map(|e| e.spectrum).collect();
        let nand = block_spectrum(BlockKind::Nand);
        let mut want = vec![
            block_spectrum(BlockKind::Matching),
            block_spectrum(BlockKind::TwoImp),
            nand.mul(&nand),
        ];
        want.sort_by_key(Spectrum::to_json);
        assert_eq!(got, want);
    }

    #[test]
    fn pareto_one_coordinate() {
        let even = pareto_blocks(1, 0).unwrap();
        assert_eq!(even.len(), 1);
        assert_eq!(even[0].spectrum, block_spectrum(BlockKind::Nand));
        let odd = pareto_blocks(1, 1).unwrap();
        assert_eq!(odd.len(), 1);
        assert_eq!(odd[0].spectrum, block_spectrum(BlockKind::Id2));
        assert!(pareto_blocks(3, 0).is_err());
    }

    #[test]
    fn pareto_witnesses_are_consistent() {
        for b in 0..2 {
            for e in pareto_blocks(2, b).unwrap() {
                assert!(crate::cnf::is_consistent(&e.witness, b, 6).unwrap());
                let census = crate::cnf::count_solutions_by_orbit(&e.witness, 6).unwrap();
                assert_eq!(Spectrum::from_terms(2, census).unwrap(), e.spectrum);
            }
        }
    }

    #[test]
    fn mu_examples() {
        assert_eq!(exact_mu(1, &OrbitKey::new(0, 1, 0), 0).unwrap().mu, BigUint::from(2u32));
        assert_eq!(exact_mu(2, &OrbitKey::new(2, 0, 0), 0).unwrap().mu, BigUint::from(1u32));
        assert_eq!(rho_star(2, 1).unwrap().rho, 2.0);
    }

    fn exhaustive_c(n: usize, parity: u8) -> f64 {
        let mut best: BTreeMap<OrbitKey, BigUint> = BTreeMap::new();
        for a in 0..=n / 2 {
            for b in 0..=(n / 2 - a) {
                let rest = n - 2 * a - 2 * b;
                for c in 0..=rest {
                    for i2 in 0..=rest - c {
                        if i2 % 2 != parity as usize {
                            continue;
                        }
                        for i1 in 0..=rest - c - i2 {
                            let comp = Composition::default()
                                .with(BlockKind::Matching, a)
                                .with(BlockKind::TwoImp, b)
                                .with(BlockKind::Nand, c)
                                .with(BlockKind::Id2, i2)
                                .with(BlockKind::Id1, i1)
                                .with(BlockKind::Id0, rest - c - i2 - i1);
                            for k in enumerate_orbits(n).into_iter().filter(|k| k.parity() == parity) {
                                let v = coeff_fast(&comp, &k).unwrap();
                                let e = best.entry(k).or_default();
                                if v > *e {
                                    *e = v;
                                }
                            }
                        }
                    }
                }
            }
        }
        best.iter()
            .map(|(k, v)| (log2_big(&orbit_size(*k)) - log2_big(v)) / n as f64)
            .fold(0.0, f64::max)
    }

    #[test]
    fn pruned_search_matches_exhaustive() {
        for n in 1..=7 {
            for parity in 0..2 {
                let got = compose_search(n, &BlockKind::ALL, parity, 200).unwrap();
                assert!((got.c - exhaustive_c(n, parity)).abs() < 1e-12, "n={n} b={parity}");
            }
        }
    }

    #[test]
    fn search_respects_block_sets() {
        let ids = [BlockKind::Id2, BlockKind::Id1, BlockKind::Id0];
        let res = compose_search(6, &ids, 0, 200).unwrap();
        for e in &res.entries {
            assert_eq!(e.captured, BigUint::from(1u32) << e.key.q);
        }
        assert!(compose_search(4, &[BlockKind::Matching], 1, 200).is_err());
        assert!(compose_search(300, &BlockKind::ALL, 0, 200).is_err());
    }

    #[test]
    fn search_dominates_nothing_it_cannot_reach() {
        let mu = rho_star(2, 0).unwrap();
        let res = compose_search(2, &BlockKind::ALL, 0, 200).unwrap();
        for m in &mu.per_orbit {
            assert!(res.best_for(&m.key).unwrap().captured <= m.mu);
        }
    }
}
