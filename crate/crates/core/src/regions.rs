//! The six overlapping orbit regions, their construction recipes, padding to
//! multiples of a modulus, and exact capture ratios.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::boolfn::{enumerate_orbits, orbit_size, OrbitKey};
use crate::cnf::{BlockKind, Composition};
use crate::numeric::{decimal, log2_big};
use crate::spectrum::coeff_fast;
use crate::{Error, Result};

pub const REGIONS: [u8; 6] = [1, 2, 3, 4, 5, 6];

/// `log₂(9/5)`, the target exponent.
pub fn target_exponent() -> f64 {
    (9.0f64 / 5.0).log2()
}

/// Exact membership test, with every inequality scaled to integers.
pub fn in_region(rid: u8, k: &OrbitKey) -> bool {
    let (n, p, r) = (k.n() as i64, k.p as i64, k.r as i64);
    let low_p = 16 * n - 25 * p >= 0;
    match rid {
        1 => low_p && 40 * n - 25 * p - 200 * r >= 0 && -40 * n + 50 * p + 200 * r >= 0,
        2 => 16 * n - 25 * p <= 0,
        3 => low_p && 40 * n - 25 * p - 200 * r <= 0 && n - 4 * p <= 0,
        4 => low_p && -20 * n + 25 * p + 100 * r <= 0 && -n + 20 * r >= 0 && n - 4 * p <= 0,
        5 => low_p && -n + 20 * r <= 0,
        6 => n - 4 * p >= 0,
        _ => false,
    }
}

pub fn classify(k: &OrbitKey) -> Vec<u8> {
    REGIONS.into_iter().filter(|&rid| in_region(rid, k)).collect()
}

/// Per-region moduli and recipe constants. Fractions of `n` are stored in
/// thousandths so integrality can be checked exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionConfig {
    pub moduli: [usize; 6],
    /// R3 candidates `(B, C)`: `B` TwoImp copies and `2C` Nand copies.
    pub r3: [(u64, u64); 2],
    /// R4 candidates `(A, C)`: `A` Matching copies and `2C` Nand copies.
    pub r4: [(u64, u64); 2],
    /// R5 recipe `(A, C)`.
    pub r5: (u64, u64),
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            moduli: [32, 4, 2000, 2000, 2000, 2000],
            r3: [(340, 160), (465, 35)],
            r4: [(340, 160), (355, 145)],
            r5: (355, 145),
        }
    }
}

impl RegionConfig {
    pub fn modulus(&self, rid: u8) -> usize {
        self.moduli[rid as usize - 1]
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(m) = self.moduli.iter().find(|&&m| m == 0 || m % 2 == 1) {
            return Err(Error::Precondition(format!(
                "moduli must be positive and even, got {m}"
            )));
        }
        Ok(())
    }
}

fn mc(a: usize, b: usize, nand: usize) -> Composition {
    Composition::default()
        .with(BlockKind::Matching, a)
        .with(BlockKind::TwoImp, b)
        .with(BlockKind::Nand, nand)
}

/// Real-valued `(A, B, Nand)` counts as `(numerator, denominator)` pairs.
type Fractional = (i64, i64, i64, i64);

fn fractional_recipes(rid: u8, k: &OrbitKey, cfg: &RegionConfig) -> Vec<Fractional> {
    let (n, p, r) = (k.n() as i64, k.p as i64, k.r as i64);
    let thousandths = |(x, c): (u64, u64)| (n * x as i64, n * 2 * c as i64);
    match rid {
        1 => vec![(
            40 * n - 25 * p - 200 * r,
            -40 * n + 50 * p + 200 * r,
            2 * (16 * n - 25 * p),
            32,
        )],
        2 => vec![(n, 0, 0, 2)],
        3 => cfg
            .r3
            .iter()
            .map(|&bc| {
                let (b, nand) = thousandths(bc);
                (0, b, nand, 1000)
            })
            .collect(),
        4 => cfg
            .r4
            .iter()
            .map(|&ac| {
                let (a, nand) = thousandths(ac);
                (a, 0, nand, 1000)
            })
            .collect(),
        5 => {
            let (a, nand) = thousandths(cfg.r5);
            vec![(a, 0, nand, 1000)]
        }
        6 => vec![(p, 0, 2 * (n - p), 2)],
        _ => Vec::new(),
    }
}

/// The exact recipe(s) for region `rid` at `k`. Fails if `k` is outside the
/// region or a count is not integral.
pub fn region_composition(rid: u8, k: &OrbitKey, cfg: &RegionConfig) -> Result<Vec<Composition>> {
    if !in_region(rid, k) {
        return Err(Error::NotInRegion { region: rid, key: *k });
    }
    if rid == 3 && k.r == k.n() {
        return Ok(vec![Composition::default().with(BlockKind::Id0, k.n())]);
    }
    fractional_recipes(rid, k, cfg)
        .into_iter()
        .map(|(a, b, nand, d)| {
            if a % d != 0 || b % d != 0 || nand % d != 0 {
                return Err(Error::Divisibility {
                    region: rid,
                    key: *k,
                    detail: format!("counts ({a}, {b}, {nand})/{d} are not integral"),
                });
            }
            Ok(mc((a / d) as usize, (b / d) as usize, (nand / d) as usize))
        })
        .collect()
}

/// Integer approximation of the recipe(s): Matching and TwoImp counts are
/// floored and the leftover coordinates go to Nand. Equal to
/// [`region_composition`] whenever that succeeds.
pub fn rounded_composition(rid: u8, k: &OrbitKey, cfg: &RegionConfig) -> Result<Vec<Composition>> {
    if !in_region(rid, k) {
        return Err(Error::NotInRegion { region: rid, key: *k });
    }
    if rid == 3 && k.r == k.n() {
        return Ok(vec![Composition::default().with(BlockKind::Id0, k.n())]);
    }
    let n = k.n();
    Ok(fractional_recipes(rid, k, cfg)
        .into_iter()
        .map(|(a, b, _, d)| {
            let a = (a / d) as usize;
            let b = (b / d) as usize;
            mc(a, b, n - 2 * a - 2 * b)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Padding {
    pub core: OrbitKey,
    /// Identity blocks only: `Id2: p - p'`, `Id1: q - q'`, `Id0: r - r'`.
    pub padding: Composition,
}

/// Rounds each of `p, q, r` down to a multiple of `m`; the remainder becomes
/// identity blocks.
pub fn pad_construction(k: &OrbitKey, m: usize) -> Result<Padding> {
    if m == 0 {
        return Err(Error::Precondition("modulus must be positive".into()));
    }
    let core = OrbitKey::new(k.p - k.p % m, k.q - k.q % m, k.r - k.r % m);
    let padding = Composition::default()
        .with(BlockKind::Id2, k.p % m)
        .with(BlockKind::Id1, k.q % m)
        .with(BlockKind::Id0, k.r % m);
    Ok(Padding { core, padding })
}

fn add(a: &Composition, b: &Composition) -> Composition {
    let mut out = *a;
    for kind in BlockKind::ALL {
        *out.count_mut(kind) += b.count(kind);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub key: OrbitKey,
    /// Region whose recipe produced `composition` (0 when not region-derived).
    pub region: u8,
    pub route: String,
    pub composition: Composition,
    #[serde(with = "decimal")]
    pub captured: BigUint,
    #[serde(with = "decimal")]
    pub orbit_size: BigUint,
    /// `orbit_size / captured` in lowest terms; `None` when nothing is captured.
    #[serde(serialize_with = "ser_ratio")]
    pub ratio: Option<Ratio<BigUint>>,
    /// `log₂(ratio) / n`; infinite when nothing is captured.
    #[serde(serialize_with = "ser_exponent")]
    pub exponent: f64,
}

fn ser_ratio<S: serde::Serializer>(r: &Option<Ratio<BigUint>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format!("{}/{}", r.numer(), r.denom())),
        None => s.serialize_str("inf"),
    }
}

fn ser_exponent<S: serde::Serializer>(e: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if e.is_finite() {
        s.serialize_f64(*e)
    } else {
        s.serialize_str("inf")
    }
}

impl RatioReport {
    pub fn is_captured(&self) -> bool {
        !self.captured.is_zero()
    }
}

/// Exact capture report of one composition at `k`.
pub fn ratio(c: &Composition, k: &OrbitKey) -> Result<RatioReport> {
    let captured = coeff_fast(c, k)?;
    let size = orbit_size(*k);
    let (ratio, exponent) = if captured.is_zero() {
        (None, f64::INFINITY)
    } else {
        let e = (log2_big(&size) - log2_big(&captured)) / k.n() as f64;
        (Some(Ratio::new(size.clone(), captured.clone())), e)
    };
    Ok(RatioReport {
        key: *k,
        region: 0,
        route: "given".into(),
        composition: *c,
        captured,
        orbit_size: size,
        ratio,
        exponent,
    })
}

/// Best of several candidates (largest capture; earliest wins ties).
pub fn ratio_best(cands: &[Composition], k: &OrbitKey) -> Result<RatioReport> {
    let mut best: Option<RatioReport> = None;
    for c in cands {
        let rep = ratio(c, k)?;
        if best.as_ref().is_none_or(|b| rep.captured > b.captured) {
            best = Some(rep);
        }
    }
    best.ok_or_else(|| Error::Precondition("no candidate compositions".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SamplingPolicy {
    /// Every orbit.
    All,
    /// `per_region` random orbits from each region plus fixed hard anchors.
    Stratified { per_region: usize, seed: u64 },
}

impl SamplingPolicy {
    /// All orbits up to `n = 200`, ten per region above.
    pub fn auto(n: usize, seed: u64) -> Self {
        if n <= 200 {
            SamplingPolicy::All
        } else {
            SamplingPolicy::Stratified { per_region: 10, seed }
        }
    }
}

/// Hatted `(p, r)` points near the worst exponent: the R1 saddle `(4/9, 1/9)`
/// and the observed maximizers of the R3 and R4 objectives.
const ANCHORS: [(f64, f64); 3] = [(4.0 / 9.0, 1.0 / 9.0), (0.448, 0.144), (0.444, 0.089)];

pub fn sample_keys(n: usize, policy: SamplingPolicy) -> Vec<OrbitKey> {
    match policy {
        SamplingPolicy::All => enumerate_orbits(n),
        SamplingPolicy::Stratified { per_region, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = BTreeSet::new();
            for rid in REGIONS {
                let mut picked = BTreeSet::new();
                let mut attempts = 0usize;
                while picked.len() < per_region && attempts < 10_000_000 {
                    attempts += 1;
                    let p = rng.gen_range(0..=n);
                    let q = rng.gen_range(0..=n - p);
                    let k = OrbitKey::new(p, q, n - p - q);
                    if in_region(rid, &k) {
                        picked.insert(k);
                    }
                }
                out.extend(picked);
            }
            for (ph, rh) in ANCHORS {
                let p = (ph * n as f64).round() as usize;
                let r = ((rh * n as f64).round() as usize).min(n - p);
                for dp in 0..2 {
                    if p + dp + r <= n {
                        out.insert(OrbitKey::new(p + dp, n - p - dp - r, r));
                    }
                }
            }
            out.into_iter().collect()
        }
    }
}

/// Candidate constructions for `k`, in preference order for ties.
///
/// Padded route: for each region, round `k` down to multiples of its modulus and
/// apply the exact recipe to the core if the core lies in the region. Direct
/// route: strip one `Id2` when `p` is odd and apply the (rounded) recipe of
/// every region containing the remaining key.
pub fn candidates(k: &OrbitKey, cfg: &RegionConfig) -> Vec<(u8, &'static str, Composition)> {
    let mut out = Vec::new();
    for rid in REGIONS {
        let Ok(pad) = pad_construction(k, cfg.modulus(rid)) else {
            continue;
        };
        if pad.core.n() == 0 {
            out.push((rid, "padded", pad.padding));
            continue;
        }
        if let Ok(cs) = region_composition(rid, &pad.core, cfg) {
            out.extend(cs.iter().map(|c| (rid, "padded", add(c, &pad.padding))));
        }
    }
    let strip = k.p % 2;
    let core = OrbitKey::new(k.p - strip, k.q, k.r);
    let lead = Composition::default().with(BlockKind::Id2, strip);
    if core.n() > 0 {
        for rid in classify(&core) {
            if let Ok(cs) = rounded_composition(rid, &core, cfg) {
                out.extend(cs.iter().map(|c| (rid, "direct", add(c, &lead))));
            }
        }
    } else {
        out.push((0, "direct", lead));
    }
    out
}

/// Best construction across all applicable regions and routes. Ties go to the
/// lower region index.
pub fn certify_key(k: &OrbitKey, cfg: &RegionConfig) -> Result<RatioReport> {
    let mut best: Option<RatioReport> = None;
    for (rid, route, c) in candidates(k, cfg) {
        let mut rep = ratio(&c, k)?;
        rep.region = rid;
        rep.route = route.into();
        let better = match &best {
            None => true,
            Some(b) => rep.captured > b.captured || (rep.captured == b.captured && rid < b.region),
        };
        if better {
            best = Some(rep);
        }
    }
    let best = best.ok_or(Error::ZeroCapture(*k))?;
    if !best.is_captured() {
        return Err(Error::ZeroCapture(*k));
    }
    Ok(best)
}

pub fn certify_keys(keys: &[OrbitKey], cfg: &RegionConfig) -> Result<Vec<RatioReport>> {
    cfg.validate()?;
    keys.par_iter().map(|k| certify_key(k, cfg)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Certification {
    pub n: usize,
    pub threshold: f64,
    pub max_exponent: f64,
    pub worst: OrbitKey,
    pub passed: bool,
    pub reports: Vec<RatioReport>,
}

/// Certifies every sampled orbit of `IP_n` against `log₂(9/5) + slack`.
pub fn certify(n: usize, policy: SamplingPolicy, cfg: &RegionConfig, slack: f64) -> Result<Certification> {
    if n < 2 {
        return Err(Error::Precondition("certify needs n >= 2".into()));
    }
    let keys = sample_keys(n, policy);
    let reports = certify_keys(&keys, cfg)?;
    let worst = reports
        .iter()
        .max_by(|a, b| a.exponent.total_cmp(&b.exponent))
        .expect("at least one orbit");
    let threshold = target_exponent() + slack;
    Ok(Certification {
        n,
        threshold,
        max_exponent: worst.exponent,
        worst: worst.key,
        passed: worst.exponent <= threshold,
        reports,
    })
}

impl fmt::Display for RatioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} R{} {} {} captured={} size={} exponent={:.7}",
            self.key, self.region, self.route, self.composition, self.captured, self.orbit_size, self.exponent
        )
    }
}

pub fn reports_to_csv(reports: &[RatioReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "n",
        "p",
        "q",
        "r",
        "region",
        "composition",
        "captured",
        "orbit_size",
        "exponent",
    ])?;
    for rep in reports {
        w.write_record([
            rep.key.n().to_string(),
            rep.key.p.to_string(),
            rep.key.q.to_string(),
            rep.key.r.to_string(),
            rep.region.to_string(),
            rep.composition.to_string(),
            rep.captured.to_string(),
            rep.orbit_size.to_string(),
            if rep.exponent.is_finite() {
                format!("{:.9}", rep.exponent)
            } else {
                "inf".into()
            },
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}
