//! Inner Product, assignments, orbit keys and the automorphism group of `IP_n`.
//!
//! Variables are interleaved: `x_i` lives at bit `2i` and `y_i` at bit `2i + 1`
//! of [`Assignment::bits`]. Every module that numbers variables (CNF clauses,
//! DIMACS export, permuted copies) uses this layout.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::numeric::{binomial, pow2};
use crate::{Error, Result, MAX_COORDS};

/// One input `(x, y)` of `IP_n`, packed into a bit vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    n: usize,
    bits: u64,
}

impl Assignment {
    pub fn from_bits(n: usize, bits: u64) -> Self {
        assert!((1..=MAX_COORDS).contains(&n), "n must be in 1..={MAX_COORDS}");
        let mask = if n == 32 { u64::MAX } else { (1u64 << (2 * n)) - 1 };
        Self { n, bits: bits & mask }
    }

    pub fn new(x: &[bool], y: &[bool]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::CoordinateMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if x.is_empty() || x.len() > MAX_COORDS {
            return Err(Error::Precondition(format!(
                "assignment needs 1..={MAX_COORDS} coordinates, got {}",
                x.len()
            )));
        }
        let mut bits = 0u64;
        for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
            bits |= (xi as u64) << (2 * i);
            bits |= (yi as u64) << (2 * i + 1);
        }
        Ok(Self { n: x.len(), bits })
    }

    /// Parses bit strings such as `x = "1010"`, `y = "1110"`; the first
    /// character is coordinate 0.
    pub fn parse(x: &str, y: &str) -> Result<Self> {
        let bit = |c: char| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("invalid bit {other:?}"),
            }),
        };
        let xs = x.chars().map(bit).collect::<Result<Vec<_>>>()?;
        let ys = y.chars().map(bit).collect::<Result<Vec<_>>>()?;
        Self::new(&xs, &ys)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn x(&self, i: usize) -> bool {
        self.bits >> (2 * i) & 1 == 1
    }

    pub fn y(&self, i: usize) -> bool {
        self.bits >> (2 * i + 1) & 1 == 1
    }

    /// Bit value of variable `v` in the interleaved layout.
    pub fn var(&self, v: usize) -> bool {
        self.bits >> v & 1 == 1
    }

    /// Lexicographically smallest assignment (reading `x` then `y`) of an orbit:
    /// `r` zero coordinates, then `q` coordinates `(0, 1)`, then `p` coordinates `(1, 1)`.
    pub fn representative(key: OrbitKey) -> Self {
        let n = key.n();
        let mut x = vec![false; n];
        let mut y = vec![false; n];
        for i in key.r..n {
            y[i] = true;
        }
        for xi in x.iter_mut().skip(key.r + key.q) {
            *xi = true;
        }
        Self::new(&x, &y).expect("valid key")
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let xs: String = (0..self.n).map(|i| if self.x(i) { '1' } else { '0' }).collect();
        let ys: String = (0..self.n).map(|i| if self.y(i) { '1' } else { '0' }).collect();
        write!(f, "x={xs},y={ys}")
    }
}

/// Iterates over all `4^n` assignments of `n` coordinates.
pub fn all_assignments(n: usize) -> impl Iterator<Item = Assignment> {
    assert!(n <= 16, "exhaustive iteration limited to n <= 16");
    (0..1u64 << (2 * n)).map(move |b| Assignment::from_bits(n, b))
}

/// Orbit of `IP_n`: `p` coordinates with `x_i = y_i = 1`, `q` with `x_i != y_i`,
/// `r` with `x_i = y_i = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitKey {
    pub p: usize,
    pub q: usize,
    pub r: usize,
}

impl OrbitKey {
    pub const fn new(p: usize, q: usize, r: usize) -> Self {
        Self { p, q, r }
    }

    pub const fn n(&self) -> usize {
        self.p + self.q + self.r
    }

    /// Value of `IP_n` on every member of the orbit.
    pub const fn parity(&self) -> u8 {
        (self.p % 2) as u8
    }
}

impl fmt::Display for OrbitKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.q, self.r)
    }
}

/// `IP_n(x, y)`, complemented when `complement` is set.
pub fn ip_eval(a: &Assignment, complement: bool) -> bool {
    let x = a.bits & 0x5555_5555_5555_5555;
    let y = (a.bits >> 1) & 0x5555_5555_5555_5555;
    let ip = (x & y).count_ones() % 2 == 1;
    ip ^ complement
}

pub fn orbit_key(a: &Assignment) -> OrbitKey {
    let x = a.bits & 0x5555_5555_5555_5555;
    let y = (a.bits >> 1) & 0x5555_5555_5555_5555;
    let p = (x & y).count_ones() as usize;
    let q = (x ^ y).count_ones() as usize;
    OrbitKey::new(p, q, a.n - p - q)
}

/// `|S(p, q, r)| = C(n, p) C(n - p, r) 2^q`.
pub fn orbit_size(k: OrbitKey) -> BigUint {
    let n = k.n() as u64;
    binomial(n, k.p as u64) * binomial(n - k.p as u64, k.r as u64) * pow2(k.q as u64)
}

/// All `C(n + 2, 2)` orbit keys, ordered by `(p, q)`.
pub fn enumerate_orbits(n: usize) -> Vec<OrbitKey> {
    let mut out = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for p in 0..=n {
        for q in 0..=n - p {
            out.push(OrbitKey::new(p, q, n - p - q));
        }
    }
    out
}

/// Element of `Aut(IP_n)`: coordinate `i` is moved to `perm[i]`, with `x_i` and
/// `y_i` exchanged first when `swap[i]` is set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Automorphism {
    perm: Vec<usize>,
    swap: Vec<bool>,
}

impl Automorphism {
    pub fn new(perm: Vec<usize>, swap: Vec<bool>) -> Result<Self> {
        let n = perm.len();
        if swap.len() != n {
            return Err(Error::CoordinateMismatch {
                expected: n,
                found: swap.len(),
            });
        }
        let mut seen = vec![false; n];
        for &t in &perm {
            if t >= n || std::mem::replace(&mut seen[t], true) {
                return Err(Error::Precondition("coordinate map is not a bijection".into()));
            }
        }
        Ok(Self { perm, swap })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            swap: vec![false; n],
        }
    }

    /// Uniform element: Fisher-Yates coordinate permutation plus `n` fair swap bits.
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        let swap = (0..n).map(|_| rng.gen::<bool>()).collect();
        Self { perm, swap }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn swaps(&self) -> &[bool] {
        &self.swap
    }

    /// Image of variable `v` (interleaved layout).
    pub fn map_var(&self, v: usize) -> usize {
        let i = v / 2;
        let side = (v % 2) ^ self.swap[i] as usize;
        2 * self.perm[i] + side
    }

    pub fn apply(&self, a: &Assignment) -> Assignment {
        debug_assert_eq!(a.n(), self.n());
        let mut bits = 0u64;
        for v in 0..2 * a.n() {
            if a.var(v) {
                bits |= 1 << self.map_var(v);
            }
        }
        Assignment::from_bits(a.n(), bits)
    }

    pub fn inverse(&self) -> Self {
        let n = self.n();
        let mut perm = vec![0; n];
        let mut swap = vec![false; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
            swap[self.perm[i]] = self.swap[i];
        }
        Self { perm, swap }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let n = self.n();
        let mut perm = vec![0; n];
        let mut swap = vec![false; n];
        for i in 0..n {
            let mid = other.perm[i];
            perm[i] = self.perm[mid];
            swap[i] = other.swap[i] ^ self.swap[mid];
        }
        Self { perm, swap }
    }

    /// Index in `0..n!·2^n`, used for frequency tests on small groups.
    pub fn index(&self) -> u64 {
        let n = self.n();
        let mut rank = 0u64;
        let mut avail: Vec<usize> = (0..n).collect();
        for i in 0..n {
            let pos = avail.iter().position(|&v| v == self.perm[i]).unwrap();
            rank = rank * (n - i) as u64 + pos as u64;
            avail.remove(pos);
        }
        let swaps = self
            .swap
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &s)| acc | (s as u64) << i);
        (rank << n) | swaps
    }
}

pub fn sample_automorphism(n: usize, seed: u64) -> Automorphism {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Automorphism::sample(n, &mut rng)
}

/// Some automorphism `g` with `g · a = b`, when the two keys agree.
pub fn connecting_automorphism(a: &Assignment, b: &Assignment) -> Option<Automorphism> {
    if a.n() != b.n() || orbit_key(a) != orbit_key(b) {
        return None;
    }
    let n = a.n();
    // coordinate class: 0 = (0,0), 1 = differing, 2 = (1,1)
    let class = |s: &Assignment, i: usize| s.x(i) as u8 + s.y(i) as u8;
    let mut targets: [Vec<usize>; 3] = Default::default();
    for i in 0..n {
        targets[class(b, i) as usize].push(i);
    }
    let mut perm = vec![0; n];
    let mut swap = vec![false; n];
    for i in (0..n).rev() {
        let c = class(a, i) as usize;
        let j = targets[c].pop()?;
        perm[i] = j;
        swap[i] = c == 1 && a.x(i) != b.x(j);
    }
    Automorphism::new(perm, swap).ok()
}

/// Abstract action of a finite group on assignments. IP's hyperoctahedral
/// group is the only implementation today.
pub trait GroupAction {
    type Element;
    fn act(&self, g: &Self::Element, a: &Assignment) -> Assignment;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::Element;
    fn inverse(&self, g: &Self::Element) -> Self::Element;
    /// Members of the orbit of `a` (exhaustive).
    fn orbit_of(&self, a: &Assignment) -> Vec<Assignment>;
}

#[derive(Debug, Clone, Copy)]
pub struct IpGroup {
    pub n: usize,
}

impl GroupAction for IpGroup {
    type Element = Automorphism;

    fn act(&self, g: &Automorphism, a: &Assignment) -> Assignment {
        g.apply(a)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Automorphism {
        Automorphism::sample(self.n, rng)
    }

    fn inverse(&self, g: &Automorphism) -> Automorphism {
        g.inverse()
    }

    fn orbit_of(&self, a: &Assignment) -> Vec<Assignment> {
        orbit_members(orbit_key(a))
    }
}

/// Every assignment of an orbit, generated directly from its key.
pub fn orbit_members(key: OrbitKey) -> Vec<Assignment> {
    let n = key.n();
    let mut out = Vec::new();
    // classes per coordinate: 0 = (0,0), 1 = (1,0), 2 = (0,1), 3 = (1,1)
    fn rec(i: usize, n: usize, p: usize, q: usize, r: usize, bits: u64, out: &mut Vec<Assignment>) {
        if i == n {
            out.push(Assignment::from_bits(n, bits));
            return;
        }
        if r > 0 {
            rec(i + 1, n, p, q, r - 1, bits, out);
        }
        if q > 0 {
            rec(i + 1, n, p, q - 1, r, bits | 1 << (2 * i), out);
            rec(i + 1, n, p, q - 1, r, bits | 1 << (2 * i + 1), out);
        }
        if p > 0 {
            rec(i + 1, n, p - 1, q, r, bits | 3 << (2 * i), out);
        }
    }
    rec(0, n, key.p, key.q, key.r, 0, &mut out);
    out
}

/// Empirical and exact `Pr_g[a ∈ g·T]`.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipEstimate {
    pub trials: usize,
    pub hits: usize,
    pub empirical: f64,
    /// `|G·a ∩ T|`
    pub exact_numerator: usize,
    /// `|G·a|`
    pub exact_denominator: usize,
}

impl MembershipEstimate {
    pub fn exact(&self) -> f64 {
        self.exact_numerator as f64 / self.exact_denominator as f64
    }
}

pub fn membership_prob(
    a: &Assignment,
    set: &HashSet<Assignment>,
    trials: usize,
    seed: u64,
    cap: usize,
) -> Result<MembershipEstimate> {
    let n = a.n();
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    if let Some(t) = set.iter().find(|t| t.n() != n) {
        return Err(Error::CoordinateMismatch {
            expected: n,
            found: t.n(),
        });
    }
    let group = IpGroup { n };
    let orbit = group.orbit_of(a);
    let exact_numerator = orbit.iter().filter(|b| set.contains(b)).count();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    for _ in 0..trials {
        let g = group.sample(&mut rng);
        // a ∈ g·T  ⟺  g⁻¹·a ∈ T
        if set.contains(&group.act(&group.inverse(&g), a)) {
            hits += 1;
        }
    }
    Ok(MembershipEstimate {
        trials,
        hits,
        empirical: if trials == 0 { 0.0 } else { hits as f64 / trials as f64 },
        exact_numerator,
        exact_denominator: orbit.len(),
    })
}
