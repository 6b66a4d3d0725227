//! 2-CNF formulas over the interleaved `(x_i, y_i)` variable layout, the six
//! building blocks, disjoint conjunction and brute-force orbit censuses.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolfn::{all_assignments, orbit_key, Assignment, Automorphism, OrbitKey};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub const fn pos(var: usize) -> Self {
        Self { var, positive: true }
    }

    pub const fn neg(var: usize) -> Self {
        Self { var, positive: false }
    }

    fn shifted(self, by: usize) -> Self {
        Self {
            var: self.var + by,
            ..self
        }
    }

    fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }
}

/// Disjunction of one or two literals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    first: Literal,
    second: Option<Literal>,
}

impl Clause {
    pub fn unit(l: Literal) -> Self {
        Self { first: l, second: None }
    }

    /// Two-literal clause; a repeated literal collapses to a unit clause.
    pub fn pair(a: Literal, b: Literal) -> Self {
        if a == b {
            Self::unit(a)
        } else {
            Self {
                first: a,
                second: Some(b),
            }
        }
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> {
        std::iter::once(self.first).chain(self.second)
    }

    fn map(self, f: impl Fn(Literal) -> Literal) -> Self {
        Self {
            first: f(self.first),
            second: self.second.map(f),
        }
    }

    /// `(positive mask, negative mask)` over the packed assignment bits.
    fn masks(&self) -> (u64, u64) {
        self.literals().fold((0, 0), |(pos, neg), l| {
            if l.positive {
                (pos | 1 << l.var, neg)
            } else {
                (pos, neg | 1 << l.var)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TwoCnf {
    n_coords: usize,
    clauses: Vec<Clause>,
}

impl TwoCnf {
    pub fn new(n_coords: usize, clauses: Vec<Clause>) -> Result<Self> {
        for c in &clauses {
            if let Some(l) = c.literals().find(|l| l.var >= 2 * n_coords) {
                return Err(Error::Precondition(format!(
                    "variable {} out of range for {n_coords} coordinates",
                    l.var
                )));
            }
        }
        Ok(Self { n_coords, clauses })
    }

    /// The formula with no clauses (accepts everything).
    pub fn empty(n_coords: usize) -> Self {
        Self {
            n_coords,
            clauses: Vec::new(),
        }
    }

    pub fn n_coords(&self) -> usize {
        self.n_coords
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn compile(&self) -> CompiledCnf {
        CompiledCnf {
            masks: self.clauses.iter().map(Clause::masks).collect(),
        }
    }

    pub fn eval(&self, a: &Assignment) -> bool {
        self.compile().eval(a.bits())
    }

    /// The copy `F^g` whose solutions are `g · sol(F)`.
    pub fn permuted(&self, g: &Automorphism) -> Self {
        assert_eq!(g.n(), self.n_coords);
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                c.map(|l| Literal {
                    var: g.map_var(l.var),
                    positive: l.positive,
                })
            })
            .collect();
        Self {
            n_coords: self.n_coords,
            clauses,
        }
    }

    /// All clauses of width ≤ 2 satisfied by every member of `set`. When `set` is
    /// median-closed the result accepts exactly `set`.
    pub fn from_solution_set(n_coords: usize, set: &[u64]) -> Self {
        let nv = 2 * n_coords;
        let lits: Vec<Literal> = (0..nv).flat_map(|v| [Literal::pos(v), Literal::neg(v)]).collect();
        let sat = |l: Literal, bits: u64| (bits >> l.var & 1 == 1) == l.positive;
        let mut clauses = Vec::new();
        for &a in &lits {
            if set.iter().all(|&s| sat(a, s)) {
                clauses.push(Clause::unit(a));
            }
        }
        for (i, &a) in lits.iter().enumerate() {
            for &b in &lits[i + 1..] {
                if a.var == b.var {
                    continue;
                }
                if set.iter().all(|&s| sat(a, s) || sat(b, s)) {
                    clauses.push(Clause::pair(a, b));
                }
            }
        }
        Self { n_coords, clauses }
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", 2 * self.n_coords, self.clauses.len());
        for c in &self.clauses {
            for l in c.literals() {
                out.push_str(&l.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }

    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut pending: Vec<Literal> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let line_no = idx + 1;
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: line_no, msg };
            if line.starts_with('p') {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 4 || parts[1] != "cnf" {
                    return Err(err("expected `p cnf <vars> <clauses>`".into()));
                }
                let vars: usize = parts[2].parse().map_err(|_| err("bad variable count".into()))?;
                let m: usize = parts[3].parse().map_err(|_| err("bad clause count".into()))?;
                if !vars.is_multiple_of(2) {
                    return Err(err(format!("odd variable count {vars}")));
                }
                header = Some((vars, m));
                continue;
            }
            let (vars, _) = header.ok_or_else(|| err("clause before header".into()))?;
            for tok in line.split_whitespace() {
                let v: i64 = tok.parse().map_err(|_| err(format!("bad literal {tok:?}")))?;
                if v == 0 {
                    let clause = match pending.as_slice() {
                        [a] => Clause::unit(*a),
                        [a, b] => Clause::pair(*a, *b),
                        [] => return Err(err("empty clause".into())),
                        _ => return Err(err("clause wider than 2".into())),
                    };
                    clauses.push(clause);
                    pending.clear();
                } else {
                    let var = v.unsigned_abs() as usize - 1;
                    if var >= vars {
                        return Err(err(format!("variable {} exceeds header", var + 1)));
                    }
                    pending.push(Literal { var, positive: v > 0 });
                }
            }
        }
        let (vars, m) = header.ok_or(Error::Parse {
            line: 0,
            msg: "missing header".into(),
        })?;
        if !pending.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "unterminated clause".into(),
            });
        }
        if clauses.len() != m {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header announces {m} clauses, found {}", clauses.len()),
            });
        }
        Self::new(vars / 2, clauses)
    }
}

/// Clause masks for fast repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledCnf {
    masks: Vec<(u64, u64)>,
}

impl CompiledCnf {
    #[inline]
    pub fn eval(&self, bits: u64) -> bool {
        self.masks.iter().all(|&(pos, neg)| bits & pos != 0 || !bits & neg != 0)
    }
}

/// Variable-disjoint conjunction: `f2`'s coordinates follow `f1`'s.
pub fn disjoint_and(f1: &TwoCnf, f2: &TwoCnf) -> TwoCnf {
    let shift = 2 * f1.n_coords;
    let mut clauses = f1.clauses.clone();
    clauses.extend(f2.clauses.iter().map(|c| c.map(|l| l.shifted(shift))));
    TwoCnf {
        n_coords: f1.n_coords + f2.n_coords,
        clauses,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockKind {
    Matching,
    TwoImp,
    Nand,
    Id2,
    Id1,
    Id0,
}

impl BlockKind {
    /// Canonical order used when composing.
    pub const ALL: [BlockKind; 6] = [
        BlockKind::Matching,
        BlockKind::TwoImp,
        BlockKind::Nand,
        BlockKind::Id2,
        BlockKind::Id1,
        BlockKind::Id0,
    ];

    pub const fn arity(self) -> usize {
        match self {
            BlockKind::Matching | BlockKind::TwoImp => 2,
            _ => 1,
        }
    }

    /// IP value on every accepted input.
    pub const fn parity(self) -> u8 {
        match self {
            BlockKind::Id2 => 1,
            _ => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BlockKind::Matching => "Matching",
            BlockKind::TwoImp => "TwoImp",
            BlockKind::Nand => "Nand",
            BlockKind::Id2 => "Id2",
            BlockKind::Id1 => "Id1",
            BlockKind::Id0 => "Id0",
        }
    }
}

impl std::str::FromStr for BlockKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BlockKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Precondition(format!("unknown block {s:?}")))
    }
}

pub fn block_cnf(kind: BlockKind) -> TwoCnf {
    use Literal as L;
    let (x1, y1, x2, y2) = (0, 1, 2, 3);
    let eq = |a, b| [Clause::pair(L::neg(a), L::pos(b)), Clause::pair(L::pos(a), L::neg(b))];
    let clauses: Vec<Clause> = match kind {
        BlockKind::Id2 => vec![Clause::unit(L::pos(x1)), Clause::unit(L::pos(y1))],
        BlockKind::Id1 => vec![
            Clause::pair(L::pos(x1), L::pos(y1)),
            Clause::pair(L::neg(x1), L::neg(y1)),
        ],
        BlockKind::Id0 => vec![Clause::unit(L::neg(x1)), Clause::unit(L::neg(y1))],
        BlockKind::Nand => vec![Clause::pair(L::neg(x1), L::neg(y1))],
        BlockKind::Matching => eq(x1, x2).into_iter().chain(eq(y1, y2)).collect(),
        BlockKind::TwoImp => eq(x1, x2)
            .into_iter()
            .chain([
                Clause::pair(L::neg(x1), L::pos(y1)),
                Clause::pair(L::neg(x2), L::pos(y2)),
            ])
            .collect(),
    };
    TwoCnf {
        n_coords: kind.arity(),
        clauses,
    }
}

/// Multiset of building blocks combined by disjoint conjunction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Composition {
    #[serde(default)]
    pub matching: usize,
    #[serde(default)]
    pub two_imp: usize,
    #[serde(default)]
    pub nand: usize,
    #[serde(default)]
    pub id2: usize,
    #[serde(default)]
    pub id1: usize,
    #[serde(default)]
    pub id0: usize,
}

impl Composition {
    pub fn count(&self, kind: BlockKind) -> usize {
        match kind {
            BlockKind::Matching => self.matching,
            BlockKind::TwoImp => self.two_imp,
            BlockKind::Nand => self.nand,
            BlockKind::Id2 => self.id2,
            BlockKind::Id1 => self.id1,
            BlockKind::Id0 => self.id0,
        }
    }

    pub fn count_mut(&mut self, kind: BlockKind) -> &mut usize {
        match kind {
            BlockKind::Matching => &mut self.matching,
            BlockKind::TwoImp => &mut self.two_imp,
            BlockKind::Nand => &mut self.nand,
            BlockKind::Id2 => &mut self.id2,
            BlockKind::Id1 => &mut self.id1,
            BlockKind::Id0 => &mut self.id0,
        }
    }

    pub fn with(mut self, kind: BlockKind, count: usize) -> Self {
        *self.count_mut(kind) = count;
        self
    }

    /// Coordinate total `2a + 2b + c + i2 + i1 + i0`.
    pub fn n(&self) -> usize {
        BlockKind::ALL.iter().map(|&k| k.arity() * self.count(k)).sum()
    }

    pub fn parity(&self) -> u8 {
        (self.id2 % 2) as u8
    }

    /// The same composition with the identity padding removed.
    pub fn core(&self) -> Self {
        Self {
            id2: 0,
            id1: 0,
            id0: 0,
            ..*self
        }
    }

    /// Parses `Matching:2,Nand:6` style lists, with or without the braces
    /// `Display` adds.
    pub fn parse(s: &str) -> Result<Self> {
        let mut c = Self::default();
        let s = s.trim();
        let s = s.strip_prefix('{').and_then(|t| t.strip_suffix('}')).unwrap_or(s);
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, count) = part
                .split_once(':')
                .ok_or_else(|| Error::Precondition(format!("expected Block:count, got {part:?}")))?;
            let kind: BlockKind = name.trim().parse()?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| Error::Precondition(format!("bad count in {part:?}")))?;
            *c.count_mut(kind) += count;
        }
        Ok(c)
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = BlockKind::ALL
            .iter()
            .filter(|&&k| self.count(k) > 0)
            .map(|&k| format!("{}:{}", k.name(), self.count(k)))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Builds the disjoint conjunction of `c` in canonical block order.
pub fn compose(c: &Composition, n: usize) -> Result<TwoCnf> {
    if c.n() != n {
        return Err(Error::CoordinateMismatch {
            expected: n,
            found: c.n(),
        });
    }
    let mut out = TwoCnf::empty(0);
    for kind in BlockKind::ALL {
        let block = block_cnf(kind);
        for _ in 0..c.count(kind) {
            out = disjoint_and(&out, &block);
        }
    }
    Ok(out)
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::EnumerationCap { n, cap })
    } else {
        Ok(())
    }
}

/// Whether `f` is consistent with `IP^b`: every solution has `IP = b`.
pub fn is_consistent(f: &TwoCnf, b: u8, cap: usize) -> Result<bool> {
    check_cap(f.n_coords, cap)?;
    let compiled = f.compile();
    let n = f.n_coords;
    Ok((0..1u64 << (2 * n))
        .into_par_iter()
        .all(|bits| !compiled.eval(bits) || orbit_key(&Assignment::from_bits(n, bits)).parity() == b))
}

/// Brute-force census `C_{p,q,r}` of a formula's solutions.
pub fn count_solutions_by_orbit(f: &TwoCnf, cap: usize) -> Result<BTreeMap<OrbitKey, BigUint>> {
    check_cap(f.n_coords, cap)?;
    let n = f.n_coords;
    if n == 0 {
        return Ok(BTreeMap::new());
    }
    let compiled = f.compile();
    let side = n + 1;
    let counts = (0..1u64 << (2 * n))
        .into_par_iter()
        .fold(
            || vec![0u64; side * side],
            |mut acc, bits| {
                if compiled.eval(bits) {
                    let k = orbit_key(&Assignment::from_bits(n, bits));
                    acc[k.p * side + k.q] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; side * side],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut out = BTreeMap::new();
    for p in 0..=n {
        for q in 0..=n - p {
            let c = counts[p * side + q];
            if c > 0 {
                out.insert(OrbitKey::new(p, q, n - p - q), BigUint::from(c));
            }
        }
    }
    Ok(out)
}

/// Number of satisfying assignments.
pub fn count_solutions(f: &TwoCnf, cap: usize) -> Result<u64> {
    check_cap(f.n_coords, cap)?;
    let compiled = f.compile();
    Ok(all_assignments(f.n_coords).filter(|a| compiled.eval(a.bits())).count() as u64)
}
