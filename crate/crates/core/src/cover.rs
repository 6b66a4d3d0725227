//! Randomized orbit covers and assembly of full depth-3 circuits for `IP_n`.
//!
//! Each orbit `S` of accepting inputs is covered by `t = ⌈2|S| ln|S| / |sol(F) ∩ S|⌉`
//! random automorphic copies of one consistent 2-CNF `F`; the circuit is the OR
//! of all copies over all orbits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boolfn::{enumerate_orbits, ip_eval, orbit_members, Assignment, Automorphism, OrbitKey};
use crate::cnf::{compose, Composition, TwoCnf};
use crate::regions::{certify_key, RegionConfig};
use crate::search::{compose_search, DEFAULT_SEARCH_CAP};
use crate::{BlockKind, Error, Result};

/// Hard limit for exhaustive circuit verification (`4^n` inputs).
pub const VERIFY_CAP: usize = 10;
pub const DEFAULT_ROUNDS: usize = 10;

/// SplitMix64 finalizer, used to derive independent child seeds.
pub fn derive_seed(root: u64, a: u64, b: u64) -> u64 {
    let mut z = root ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn orbit_seed(root: u64, k: &OrbitKey) -> u64 {
    derive_seed(root, (k.p as u64) << 32 | k.q as u64, k.r as u64)
}

/// `⌈2|S| ln|S| / captured⌉`, at least 1.
pub fn cover_target(orbit_size: u64, captured: u64) -> Result<u64> {
    if captured == 0 {
        return Err(Error::Precondition("cannot cover with zero capture".into()));
    }
    let s = orbit_size as f64;
    Ok(((2.0 * s * s.ln() / captured as f64).ceil() as u64).max(1))
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverReport {
    pub key: OrbitKey,
    pub base: String,
    pub captured: u64,
    pub orbit_size: u64,
    pub t_target: u64,
    pub rounds: usize,
    pub covered: bool,
    /// Seed of every batch tried; the last one produced the cover.
    pub seeds: Vec<u64>,
    #[serde(skip)]
    pub automorphisms: Vec<Automorphism>,
}

/// Covers orbit `k` with random copies of `f`, resampling the whole batch when
/// some orbit member is missed.
pub fn cover_orbit(f: &TwoCnf, k: &OrbitKey, seed: u64, max_rounds: usize, cap: usize) -> Result<CoverReport> {
    let n = k.n();
    if f.n_coords() != n {
        return Err(Error::CoordinateMismatch {
            expected: n,
            found: f.n_coords(),
        });
    }
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    let members = orbit_members(*k);
    let compiled = f.compile();
    let captured = members.iter().filter(|a| compiled.eval(a.bits())).count() as u64;
    if captured == 0 {
        return Err(Error::ZeroCapture(*k));
    }
    let size = members.len() as u64;
    let t = cover_target(size, captured)?;
    let mut seeds = Vec::new();
    for round in 0..max_rounds {
        let round_seed = derive_seed(seed, round as u64, 0);
        seeds.push(round_seed);
        let mut rng = ChaCha8Rng::seed_from_u64(round_seed);
        let batch: Vec<Automorphism> = (0..t).map(|_| Automorphism::sample(n, &mut rng)).collect();
        let copies: Vec<_> = batch.iter().map(|g| f.permuted(g).compile()).collect();
        let covered = members.iter().all(|a| copies.iter().any(|c| c.eval(a.bits())));
        if covered {
            return Ok(CoverReport {
                key: *k,
                base: String::new(),
                captured,
                orbit_size: size,
                t_target: t,
                rounds: round + 1,
                covered: true,
                seeds,
                automorphisms: batch,
            });
        }
    }
    Err(Error::RoundsExhausted {
        key: *k,
        rounds: max_rounds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberOrigin {
    pub orbit: OrbitKey,
    pub composition: Composition,
    pub seed: u64,
    pub index: usize,
}

/// Disjunction of 2-CNFs over `n` coordinates.
#[derive(Debug, Clone)]
pub struct Sigma3Circuit {
    pub n: usize,
    pub members: Vec<TwoCnf>,
    pub origins: Vec<MemberOrigin>,
}

impl Sigma3Circuit {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            members: Vec::new(),
            origins: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let members: Vec<_> = self
            .members
            .iter()
            .zip(&self.origins)
            .map(|(f, o)| {
                serde_json::json!({
                    "orbit": o.orbit,
                    "composition": o.composition,
                    "seed": o.seed.to_string(),
                    "index": o.index,
                    "dimacs": f.to_dimacs(),
                })
            })
            .collect();
        serde_json::json!({ "n": self.n, "members": members })
    }
}

pub fn circuit_eval(c: &Sigma3Circuit, a: &Assignment) -> bool {
    c.members.iter().any(|f| f.eval(a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strategy {
    /// Region recipes with padding.
    Regions,
    /// Best compositions from the exhaustive composition search.
    Search,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regions" => Ok(Strategy::Regions),
            "search" => Ok(Strategy::Search),
            _ => Err(Error::Precondition(format!(
                "unknown strategy {s:?}; use regions or search"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Assembly {
    pub n: usize,
    pub strategy: Strategy,
    pub members: usize,
    /// `Σ t(S)` over the covered orbits.
    pub t_total: u64,
    /// Largest observed `|S| / captured`.
    pub rho_hat: f64,
    /// `n · |orb| · rho_hat`, the shape of the upper bound.
    pub bound_shape: f64,
    pub covers: Vec<CoverReport>,
    #[serde(skip)]
    pub circuit: Sigma3Circuit,
}

/// Base composition per orbit of odd `p` (the accepting inputs of IP).
fn base_compositions(n: usize, strategy: Strategy) -> Result<Vec<(OrbitKey, Composition)>> {
    let keys: Vec<OrbitKey> = enumerate_orbits(n).into_iter().filter(|k| k.parity() == 1).collect();
    match strategy {
        Strategy::Regions => {
            let cfg = RegionConfig::default();
            keys.into_iter()
                .map(|k| certify_key(&k, &cfg).map(|rep| (k, rep.composition)))
                .collect()
        }
        Strategy::Search => {
            let res = compose_search(n, &BlockKind::ALL, 1, DEFAULT_SEARCH_CAP)?;
            Ok(keys
                .into_iter()
                .map(|k| (k, res.best_for(&k).expect("every odd orbit is searched").composition))
                .collect())
        }
    }
}

/// Builds a circuit computing `IP_n` orbit by orbit.
pub fn assemble_circuit(n: usize, strategy: Strategy, seed: u64) -> Result<Assembly> {
    if n == 0 || n > VERIFY_CAP {
        return Err(Error::EnumerationCap { n, cap: VERIFY_CAP });
    }
    let bases = base_compositions(n, strategy)?;
    let covers: Vec<CoverReport> = bases
        .par_iter()
        .map(|(k, comp)| {
            let f = compose(comp, n)?;
            let mut rep = cover_orbit(&f, k, orbit_seed(seed, k), DEFAULT_ROUNDS, VERIFY_CAP)?;
            rep.base = comp.to_string();
            Ok(rep)
        })
        .collect::<Result<_>>()?;
    let mut circuit = Sigma3Circuit::empty(n);
    for ((k, comp), rep) in bases.iter().zip(&covers) {
        let f = compose(comp, n)?;
        let seed = *rep.seeds.last().expect("a successful round");
        for (index, g) in rep.automorphisms.iter().enumerate() {
            circuit.members.push(f.permuted(g));
            circuit.origins.push(MemberOrigin {
                orbit: *k,
                composition: *comp,
                seed,
                index,
            });
        }
    }
    let rho_hat = covers
        .iter()
        .map(|c| c.orbit_size as f64 / c.captured as f64)
        .fold(0.0, f64::max);
    Ok(Assembly {
        n,
        strategy,
        members: circuit.len(),
        t_total: covers.iter().map(|c| c.t_target).sum(),
        rho_hat,
        bound_shape: n as f64 * enumerate_orbits(n).iter().filter(|k| k.parity() == 1).count() as f64 * rho_hat,
        covers,
        circuit,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub n: usize,
    pub inputs: u64,
    pub agreed: u64,
    /// First few disagreeing inputs.
    pub mismatches: Vec<String>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.agreed == self.inputs
    }
}

/// Compares the circuit with `IP_n` on all `4^n` inputs.
pub fn verify_circuit(c: &Sigma3Circuit) -> Result<Verification> {
    let n = c.n;
    if n > VERIFY_CAP {
        return Err(Error::EnumerationCap { n, cap: VERIFY_CAP });
    }
    let compiled: Vec<_> = c.members.iter().map(TwoCnf::compile).collect();
    let inputs = 1u64 << (2 * n);
    let bad: Vec<u64> = (0..inputs)
        .into_par_iter()
        .filter(|&bits| {
            let a = Assignment::from_bits(n, bits);
            compiled.iter().any(|f| f.eval(bits)) != ip_eval(&a, false)
        })
        .collect();
    Ok(Verification {
        n,
        inputs,
        agreed: inputs - bad.len() as u64,
        mismatches: bad
            .iter()
            .take(5)
            .map(|&b| Assignment::from_bits(n, b).to_string())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::block_cnf;

    #[test]
    fn cover_target_examples() {
        assert_eq!(cover_target(24, 4).unwrap(), 39);
        assert_eq!(cover_target(1, 1).unwrap(), 1);
        assert!(cover_target(5, 0).is_err());
    }

    #[test]
    fn cover_matching_orbit() {
        let f = compose(&Composition::parse("Matching:2").unwrap(), 4).unwrap();
        let rep = cover_orbit(&f, &OrbitKey::new(2, 2, 0), 1, 10, 6).unwrap();
        assert_eq!((rep.orbit_size, rep.captured, rep.t_target), (24, 4, 39));
        assert!(rep.covered);
        assert_eq!(rep.automorphisms.len(), 39);
    }

    #[test]
    fn cover_rejects_uncaptured_orbit() {
        let f = block_cnf(BlockKind::Id2);
        assert!(matches!(
            cover_orbit(&f, &OrbitKey::new(0, 1, 0), 1, 10, 6),
            Err(Error::ZeroCapture(_))
        ));
    }

    #[test]
    fn empty_and_single_circuits() {
        let empty = Sigma3Circuit::empty(2);
        assert!(crate::boolfn::all_assignments(2).all(|a| !circuit_eval(&empty, &a)));
        let f = block_cnf(BlockKind::Matching);
        let single = Sigma3Circuit {
            n: 2,
            members: vec![f.clone()],
            origins: Vec::new(),
        };
        assert!(crate::boolfn::all_assignments(2).all(|a| circuit_eval(&single, &a) == f.eval(&a)));
    }

    #[test]
    fn assemble_small() {
        for strategy in [Strategy::Regions, Strategy::Search] {
            for n in [1, 2, 4] {
                let asm = assemble_circuit(n, strategy, 42).unwrap();
                assert!(verify_circuit(&asm.circuit).unwrap().passed(), "n={n} {strategy:?}");
                assert!(asm.members as u64 <= asm.t_total);
            }
        }
        let asm = assemble_circuit(4, Strategy::Regions, 42).unwrap();
        assert!(circuit_eval(&asm.circuit, &Assignment::parse("1000", "1000").unwrap()));
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = assemble_circuit(3, Strategy::Regions, 9).unwrap();
        let b = assemble_circuit(3, Strategy::Regions, 9).unwrap();
        assert_eq!(a.circuit.to_json(), b.circuit.to_json());
    }
}
