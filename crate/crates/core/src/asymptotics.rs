//! Entropy bounds, saddle-point coefficient estimates, the bounded objectives of
//! the balanced regions, and the region 5/6 analytic checks.
//!
//! Everything here is `f64` in log scale; exact counterparts come from
//! [`crate::spectrum::coeff_fast`] and [`crate::numeric`].

use num_bigint::BigUint;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::boolfn::OrbitKey;
use crate::cnf::{BlockKind, Composition};
use crate::numeric::{binomial, decimal, log2_big};
use crate::spectrum::coeff_fast;
use crate::{Error, Result};

/// `x log₂ x` with the limit `0` at `x = 0`.
fn xlog2(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `x log₂ y` with `0 log 0 = 0`.
fn xlog2y(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.log2()
    }
}

/// Binary entropy.
pub fn entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Precondition(format!("entropy argument {x} outside [0, 1]")));
    }
    Ok(-xlog2(x) - xlog2(1.0 - x))
}

#[derive(Debug, Clone, Serialize)]
pub struct BinomialBounds {
    pub m: u64,
    pub k: u64,
    #[serde(with = "decimal")]
    pub exact: BigUint,
    pub log2_lower: f64,
    pub log2_exact: f64,
    pub log2_upper: f64,
}

impl BinomialBounds {
    /// Whether `2^{mH}/(m+1) ≤ C(m,k) ≤ 2^{mH}` holds (with `1e-9` float slack).
    pub fn holds(&self) -> bool {
        const EPS: f64 = 1e-9;
        self.log2_lower <= self.log2_exact + EPS && self.log2_exact <= self.log2_upper + EPS
    }
}

pub fn binomial_bounds(m: u64, k: u64) -> Result<BinomialBounds> {
    if k > m {
        return Err(Error::Precondition(format!("need k <= m, got m={m} k={k}")));
    }
    let exact = binomial(m, k);
    let upper = if m == 0 {
        0.0
    } else {
        m as f64 * entropy(k as f64 / m as f64)?
    };
    Ok(BinomialBounds {
        m,
        k,
        log2_exact: log2_big(&exact),
        exact,
        log2_lower: upper - ((m + 1) as f64).log2(),
        log2_upper: upper,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    /// `Matching^A TwoImp^B Nand^{2C}`
    R1,
    /// `TwoImp^B Nand^{2C}`
    R3,
    /// `Matching^A Nand^{2C}`
    R4,
}

/// Block counts and target key. `c` is the number of Nand copies (the `2C` of
/// the recipes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl SaddleParams {
    pub fn from_composition(comp: &Composition, k: &OrbitKey) -> Self {
        Self {
            a: comp.matching as f64,
            b: comp.two_imp as f64,
            c: comp.nand as f64,
            p: k.p as f64,
            q: k.q as f64,
            r: k.r as f64,
        }
    }

    pub fn n(&self) -> f64 {
        self.p + self.q + self.r
    }

    /// Each factor of `f(u, v) = g1^a g2^b g3^c`.
    fn factors(&self, u: f64, v: f64) -> (f64, f64, f64) {
        (u + 2.0 * v * v + 1.0, u + (v + 1.0).powi(2), 2.0 * v + 1.0)
    }

    pub fn ln_f(&self, u: f64, v: f64) -> f64 {
        let (g1, g2, g3) = self.factors(u, v);
        self.a * g1.ln() + self.b * g2.ln() + self.c * g3.ln()
    }

    /// `h(u, v) = ln f − (p/2) ln u − q ln v`.
    pub fn h(&self, u: f64, v: f64) -> f64 {
        self.ln_f(u, v) - 0.5 * self.p * u.ln() - self.q * v.ln()
    }

    pub fn gradient(&self, u: f64, v: f64) -> [f64; 2] {
        let (g1, g2, g3) = self.factors(u, v);
        [
            self.a / g1 + self.b / g2 - 0.5 * self.p / u,
            self.a * 4.0 * v / g1 + self.b * 2.0 * (v + 1.0) / g2 + self.c * 2.0 / g3 - self.q / v,
        ]
    }

    /// Gradient scaled by the magnitude of its largest term in each component.
    pub fn relative_residual(&self, u: f64, v: f64) -> f64 {
        let [gu, gv] = self.gradient(u, v);
        let su = (0.5 * self.p / u).abs().max(f64::MIN_POSITIVE);
        let sv = (self.q / v).abs().max(f64::MIN_POSITIVE);
        (gu / su).abs().max((gv / sv).abs())
    }

    /// Analytic Hessian of `h` in `(u, v)`.
    pub fn hessian(&self, u: f64, v: f64) -> [[f64; 2]; 2] {
        let (g1, g2, g3) = self.factors(u, v);
        let (g1s, g2s, g3s) = (g1 * g1, g2 * g2, g3 * g3);
        let huu = -self.a / g1s - self.b / g2s + 0.5 * self.p / (u * u);
        let huv = -4.0 * self.a * v / g1s - 2.0 * self.b * (v + 1.0) / g2s;
        let hvv = self.a * (4.0 * g1 - 16.0 * v * v) / g1s + self.b * (2.0 * g2 - 4.0 * (v + 1.0).powi(2)) / g2s
            - 4.0 * self.c / g3s
            + self.q / (v * v);
        [[huu, huv], [huv, hvv]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddlePoint {
    pub family: Family,
    pub params: SaddleParams,
    pub u0: f64,
    pub v0: f64,
    pub ln_f: f64,
    pub hessian_det: f64,
}

/// Non-negative root of `4r x³ + (4A − 2p − 2q) x² + (4C − 2q) x − q` where `C`
/// is half the Nand count. Bracketing from `Q(0) = −q < 0`, bisection, then two
/// Newton steps.
pub fn r4_cubic_root(a: f64, c_half: f64, p: f64, q: f64, r: f64) -> Result<f64> {
    let coeffs = [4.0 * r, 4.0 * a - 2.0 * p - 2.0 * q, 4.0 * c_half - 2.0 * q, -q];
    let eval = |x: f64| ((coeffs[0] * x + coeffs[1]) * x + coeffs[2]) * x + coeffs[3];
    let deriv = |x: f64| (3.0 * coeffs[0] * x + 2.0 * coeffs[1]) * x + coeffs[2];
    if q == 0.0 {
        return Ok(0.0);
    }
    if r <= 0.0 {
        return Err(Error::Precondition("cubic needs r > 0".into()));
    }
    let mut hi = 1.0;
    while eval(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Bracketing("no sign change below 1e12".into()));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if eval(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2 {
        let d = deriv(x);
        if d != 0.0 {
            x -= eval(x) / d;
        }
    }
    Ok(x)
}

/// Positive root `v` of `2r v² + β v − q = 0` with `β = 2c + (2B − p) − 3q`.
pub fn r3_root(b: f64, c_half: f64, p: f64, q: f64, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::Precondition("region 3 root needs r > 0".into()));
    }
    let beta = 4.0 * c_half + (2.0 * b - p) - 3.0 * q;
    // rationalized form, stable when beta is large and positive
    let disc = (beta * beta + 8.0 * r * q).sqrt();
    Ok(if beta > 0.0 {
        2.0 * q / (beta + disc)
    } else {
        (-beta + disc) / (4.0 * r)
    })
}

pub fn critical_point(family: Family, params: SaddleParams) -> Result<SaddlePoint> {
    let SaddleParams { a, b, c, p, q, r } = params;
    if p <= 0.0 || q <= 0.0 {
        return Err(Error::Precondition("saddle point needs p > 0 and q > 0".into()));
    }
    let (u0, v0) = match family {
        Family::R1 => (16.0, 2.0),
        Family::R3 => {
            if a != 0.0 || 2.0 * b <= p {
                return Err(Error::Precondition("region 3 needs A = 0 and 2B > p".into()));
            }
            let v = r3_root(b, 0.5 * c, p, q, r)?;
            (p * (v + 1.0).powi(2) / (2.0 * b - p), v)
        }
        Family::R4 => {
            if b != 0.0 || 2.0 * a <= p {
                return Err(Error::Precondition("region 4 needs B = 0 and 2A > p".into()));
            }
            let v = r4_cubic_root(a, 0.5 * c, p, q, r)?;
            (p * (2.0 * v * v + 1.0) / (2.0 * a - p), v)
        }
    };
    let residual = params.relative_residual(u0, v0);
    if residual > 1e-9 {
        return Err(Error::Precondition(format!(
            "gradient residual {residual:e} at ({u0}, {v0}); parameters do not fit the {family:?} family"
        )));
    }
    let [[huu, huv], [_, hvv]] = params.hessian(u0, v0);
    Ok(SaddlePoint {
        family,
        params,
        u0,
        v0,
        ln_f: params.ln_f(u0, v0),
        hessian_det: huu * hvv - huv * huv,
    })
}

impl SaddlePoint {
    pub fn hessian(&self) -> [[f64; 2]; 2] {
        self.params.hessian(self.u0, self.v0)
    }

    pub fn composition(&self) -> Composition {
        Composition::default()
            .with(BlockKind::Matching, self.params.a as usize)
            .with(BlockKind::TwoImp, self.params.b as usize)
            .with(BlockKind::Nand, self.params.c as usize)
    }

    pub fn key(&self) -> OrbitKey {
        OrbitKey::new(self.params.p as usize, self.params.q as usize, self.params.r as usize)
    }
}

/// `log₂` of `f(u0,v0) / (2π u0^{p/2+1} v0^{q+1} √det H_h)`.
pub fn saddle_estimate(sp: &SaddlePoint) -> Result<f64> {
    if !(sp.hessian_det > 0.0) || sp.hessian()[0][0] <= 0.0 {
        return Err(Error::NotPositiveDefinite { det: sp.hessian_det });
    }
    let SaddleParams { p, q, .. } = sp.params;
    let ln = sp.ln_f
        - (2.0 * std::f64::consts::PI).ln()
        - (0.5 * p + 1.0) * sp.u0.ln()
        - (q + 1.0) * sp.v0.ln()
        - 0.5 * sp.hessian_det.ln();
    Ok(ln / std::f64::consts::LN_2)
}

#[derive(Debug, Clone, Serialize)]
pub struct SaddleReport {
    pub point: SaddlePoint,
    pub key: OrbitKey,
    pub composition: Composition,
    pub log2_estimate: f64,
    pub log2_exact: f64,
    #[serde(with = "decimal")]
    pub exact: BigUint,
    /// `|estimate / exact − 1|`
    pub relative_error: f64,
    /// `√((p/2)² + q²)`, the scale of the `O(1/λ)` error term.
    pub lambda: f64,
    /// `log₂(estimate) − (n log₂ 5 − 2p − q)`; only meaningful for R1.
    pub leading_order_gap: f64,
}

/// Estimate plus the exact big-integer coefficient it approximates.
pub fn saddle_compare(sp: &SaddlePoint) -> Result<SaddleReport> {
    let est = saddle_estimate(sp)?;
    let comp = sp.composition();
    let key = sp.key();
    let exact = coeff_fast(&comp, &key)?;
    if exact.bits() == 0 {
        return Err(Error::ZeroCapture(key));
    }
    let log2_exact = log2_big(&exact);
    let SaddleParams { p, q, .. } = sp.params;
    Ok(SaddleReport {
        point: *sp,
        key,
        composition: comp,
        log2_estimate: est,
        log2_exact,
        exact,
        relative_error: ((est - log2_exact) * std::f64::consts::LN_2).exp_m1().abs(),
        lambda: (0.25 * p * p + q * q).sqrt(),
        leading_order_gap: est - (sp.params.n() * 5f64.log2() - 2.0 * p - q),
    })
}

/// The R1 recipe at `n·(p̂, q̂, r̂)` (counts rounded to integers).
pub fn r1_params(n: usize, p_hat: f64, r_hat: f64) -> SaddleParams {
    let nf = n as f64;
    let p = (p_hat * nf).round();
    let r = (r_hat * nf).round();
    let a = (40.0 * nf - 25.0 * p - 200.0 * r) / 32.0;
    let b = (-40.0 * nf + 50.0 * p + 200.0 * r) / 32.0;
    SaddleParams {
        a,
        b,
        c: nf - 2.0 * a - 2.0 * b,
        p,
        q: nf - p - r,
        r,
    }
}

/// Region 3 or 4 objective at hatted `(p̂, r̂)`; `consts` are the two `(B̂, Ĉ)` or
/// `(Â, Ĉ)` recipe pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveParams {
    pub region: u8,
    pub p_hat: f64,
    pub r_hat: f64,
    pub consts: [(f64, f64); 2],
}

pub const R3_CONSTS: [(f64, f64); 2] = [(0.34, 0.16), (0.465, 0.035)];
pub const R4_CONSTS: [(f64, f64); 2] = [(0.34, 0.16), (0.355, 0.145)];

impl ObjectiveParams {
    pub fn new(region: u8, p_hat: f64, r_hat: f64) -> Result<Self> {
        let consts = match region {
            3 => R3_CONSTS,
            4 => R4_CONSTS,
            _ => {
                return Err(Error::Precondition(format!(
                    "objective defined for regions 3 and 4, not {region}"
                )))
            }
        };
        Ok(Self {
            region,
            p_hat,
            r_hat,
            consts,
        })
    }

    pub fn q_hat(&self) -> f64 {
        1.0 - self.p_hat - self.r_hat
    }

    /// The hatted constraints of the region (with `1e-12` slack).
    pub fn feasible(&self) -> bool {
        const EPS: f64 = 1e-12;
        let (p, r, q) = (self.p_hat, self.r_hat, self.q_hat());
        let base = p >= -EPS && r >= -EPS && q >= -EPS && 0.5 - 25.0 / 32.0 * p >= -EPS && p >= 0.25 - EPS;
        base && match self.region {
            3 => 1.25 - 25.0 / 32.0 * p - 6.25 * r <= EPS,
            4 => -1.25 + 25.0 / 16.0 * p + 6.25 * r <= EPS && r >= 0.05 - EPS,
            _ => false,
        }
    }
}

fn entropy3(p: f64, q: f64, r: f64) -> f64 {
    -xlog2(p) - xlog2(q) - xlog2(r)
}

fn t_region3(p: f64, q: f64, r: f64, b: f64, c: f64) -> f64 {
    let v = r3_root(b, c, p, q, r).expect("r > 0 inside region 3");
    let d = 2.0 * b - p;
    entropy3(p, q, r) + q + xlog2y(q, v) - 2.0 * c * (2.0 * v + 1.0).log2() - d * (v + 1.0).log2()
        + 0.5 * xlog2(d)
        + 0.5 * xlog2(p)
        - b * (2.0 * b).log2()
}

fn t_region4(p: f64, q: f64, r: f64, a: f64, c: f64) -> f64 {
    let v = r4_cubic_root(a, c, p, q, r).expect("r > 0 inside region 4");
    let u = p * (2.0 * v * v + 1.0) / (2.0 * a - p);
    entropy3(p, q, r) + q - 2.0 * c * (2.0 * v + 1.0).log2() - a * (u + 2.0 * v * v + 1.0).log2()
        + xlog2y(0.5 * p, u)
        + xlog2y(q, v)
}

/// `(T₁, T₂)` for the region's two recipes.
pub fn objective_t(params: &ObjectiveParams) -> Result<(f64, f64)> {
    if !params.feasible() {
        return Err(Error::Precondition(format!(
            "(p̂, r̂) = ({}, {}) violates the region {} constraints",
            params.p_hat, params.r_hat, params.region
        )));
    }
    let (p, q, r) = (params.p_hat, params.q_hat().max(0.0), params.r_hat);
    let t = |(x, c): (f64, f64)| match params.region {
        3 => t_region3(p, q, r, x, c),
        _ => t_region4(p, q, r, x, c),
    };
    Ok((t(params.consts[0]), t(params.consts[1])))
}

fn min_t(region: u8, p: f64, r: f64) -> Option<f64> {
    let params = ObjectiveParams::new(region, p, r).ok()?;
    objective_t(&params).ok().map(|(a, b)| a.min(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HatPoint {
    pub p_hat: f64,
    pub r_hat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizeReport {
    pub region: u8,
    pub grid_step: f64,
    /// Largest value found by the scan; not a certified bound.
    pub observed_max: f64,
    pub argmax: HatPoint,
    pub reference_bound: f64,
    pub evaluations: usize,
}

/// Grid scan of `min(T₁, T₂)` over the feasible `(p̂, r̂)` polygon followed by
/// coordinate refinement from the best cell.
pub fn maximize_min_t(region: u8, grid_step: f64, refine_iters: usize) -> Result<OptimizeReport> {
    if !(grid_step > 0.0) {
        return Err(Error::Precondition("grid step must be positive".into()));
    }
    let reference_bound = match region {
        3 => 0.841,
        4 => 0.845,
        _ => {
            return Err(Error::Precondition(format!(
                "objective defined for regions 3 and 4, not {region}"
            )))
        }
    };
    let steps = (1.0 / grid_step).ceil() as usize;
    let best = (0..=steps)
        .into_par_iter()
        .filter_map(|i| {
            let p = (i as f64 * grid_step).min(1.0);
            let mut local: Option<(f64, f64, f64, usize)> = None;
            let mut evals = 0;
            for j in 0..=steps {
                let r = (j as f64 * grid_step).min(1.0);
                if p + r > 1.0 + 1e-12 {
                    break;
                }
                if let Some(t) = min_t(region, p, r) {
                    evals += 1;
                    if local.is_none_or(|(bt, _, _, _)| t > bt) {
                        local = Some((t, p, r, 0));
                    }
                }
            }
            local.map(|(t, p, r, _)| (t, p, r, evals))
        })
        .reduce_with(|x, y| {
            let evals = x.3 + y.3;
            // deterministic: larger value, then lexicographically smaller argmax
            let pick = if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) {
                y
            } else {
                x
            };
            (pick.0, pick.1, pick.2, evals)
        })
        .ok_or_else(|| Error::Precondition("grid contains no feasible point".into()))?;
    let (mut t, mut p, mut r, mut evals) = best;
    let mut h = grid_step;
    for _ in 0..refine_iters {
        let mut improved = false;
        for (dp, dr) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h), (h, -h), (-h, h)] {
            evals += 1;
            if let Some(nt) = min_t(region, p + dp, r + dr) {
                if nt > t {
                    (t, p, r) = (nt, p + dp, r + dr);
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
            if h < 1e-12 {
                break;
            }
        }
    }
    Ok(OptimizeReport {
        region,
        grid_step,
        observed_max: t,
        argmax: HatPoint { p_hat: p, r_hat: r },
        reference_bound,
        evaluations: evals,
    })
}

pub const R5_EPS: f64 = 1.0 / 20.0;
pub const R5_A: f64 = 0.355;

/// `g(y) = H(y) + ε H(ε) + a − y/2 − a H(y/2a)` with `ε = 1/20`, `a = 0.355`.
pub fn region5_g(y: f64) -> Result<f64> {
    if !(y > 0.0 && y <= 0.64) {
        return Err(Error::Precondition(format!("g is defined on (0, 0.64], got {y}")));
    }
    Ok(entropy(y)? + R5_EPS * entropy(R5_EPS)? + R5_A - 0.5 * y - R5_A * entropy(y / (2.0 * R5_A))?)
}

/// `g′(y) = log₂((1 − y) / √(2y(2a − y)))`.
pub fn region5_g_prime(y: f64) -> f64 {
    ((1.0 - y) / (2.0 * y * (2.0 * R5_A - y)).sqrt()).log2()
}

#[derive(Debug, Clone, Serialize)]
pub struct Region5Report {
    pub g_at_max: f64,
    pub bound: f64,
    pub grid_points: usize,
    pub min_g_prime: f64,
    /// `(4a + 2)² − 12` as an exact fraction.
    pub discriminant: String,
    pub discriminant_negative: bool,
    pub passed: bool,
}

pub fn region5_check(grid_points: usize) -> Result<Region5Report> {
    let g_at_max = region5_g(0.64)?;
    let min_g_prime = (1..=grid_points)
        .map(|i| region5_g_prime(0.64 * i as f64 / grid_points as f64))
        .fold(f64::INFINITY, f64::min);
    let a = Ratio::new(355i64, 1000);
    let disc = (a * 4 + 2) * (a * 4 + 2) - 12;
    let negative = disc < Ratio::from_integer(0);
    Ok(Region5Report {
        g_at_max,
        bound: 0.828,
        grid_points,
        min_g_prime,
        discriminant: disc.to_string(),
        discriminant_negative: negative,
        passed: g_at_max <= 0.828 && min_g_prime > 0.0 && negative,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Region6Bound {
    pub n: usize,
    pub p: usize,
    /// `log₂ C(n, p) / n`
    pub exponent: f64,
    /// `H(1/4)`
    pub bound: f64,
}

pub fn region6_bound(n: usize, p: usize) -> Result<Region6Bound> {
    if n == 0 || 4 * p > n {
        return Err(Error::Precondition(format!("region 6 needs p <= n/4, got n={n} p={p}")));
    }
    Ok(Region6Bound {
        n,
        p,
        exponent: log2_big(&binomial(n as u64, p as u64)) / n as f64,
        bound: entropy(0.25)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(0.5).unwrap(), 1.0);
        assert_eq!(entropy(0.0).unwrap(), 0.0);
        assert!((entropy(0.25).unwrap() - 0.811278).abs() < 1e-6);
        assert!(entropy(1.5).is_err());
    }

    #[test]
    fn binomial_bounds_examples() {
        for (m, k) in [(4, 2), (7, 7), (100, 37), (0, 0)] {
            let b = binomial_bounds(m, k).unwrap();
            assert!(b.holds(), "{m} {k}");
        }
        assert!(binomial_bounds(3, 4).is_err());
    }

    #[test]
    fn r1_critical_point_is_16_2() {
        let params = r1_params(512, 0.5, 0.125);
        assert_eq!((params.a, params.b, params.c), (40.0, 160.0, 112.0));
        let sp = critical_point(Family::R1, params).unwrap();
        assert_eq!((sp.u0, sp.v0), (16.0, 2.0));
        assert!((sp.ln_f - 512.0 * 5f64.ln()).abs() < 1e-9);
        assert!(sp.hessian_det > 0.0);
    }

    #[test]
    fn r3_critical_point_example() {
        let params = SaddleParams {
            a: 0.0,
            b: 680.0,
            c: 640.0,
            p: 600.0,
            q: 1000.0,
            r: 400.0,
        };
        let sp = critical_point(Family::R3, params).unwrap();
        assert!((sp.v0 - 1.8689).abs() < 1e-3, "{}", sp.v0);
        assert!(params.relative_residual(sp.u0, sp.v0) < 1e-9);
    }

    #[test]
    fn r4_cubic_example() {
        let v = r4_cubic_root(0.34, 0.16, 0.4, 0.54, 0.06).unwrap();
        assert!((v - 3.02).abs() < 0.01, "{v}");
        let q = 0.24 * v * v * v - 0.52 * v * v - 0.44 * v - 0.54;
        assert!(q.abs() < 1e-9);
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let params = r1_params(1024, 0.45, 0.12);
        let (u, v) = (16.0, 2.0);
        let step = 1e-6;
        let grad = |u, v| params.gradient(u, v);
        let hu = grad(u + step, v);
        let hu_ = grad(u - step, v);
        let hv = grad(u, v + step);
        let hv_ = grad(u, v - step);
        let fd = [
            [(hu[0] - hu_[0]) / (2.0 * step), (hv[0] - hv_[0]) / (2.0 * step)],
            [(hu[1] - hu_[1]) / (2.0 * step), (hv[1] - hv_[1]) / (2.0 * step)],
        ];
        let h = params.hessian(u, v);
        for i in 0..2 {
            for j in 0..2 {
                assert!((h[i][j] - fd[i][j]).abs() <= 1e-4 * h[i][j].abs().max(1.0), "{i}{j}");
            }
        }
    }

    #[test]
    fn saddle_estimate_r1_close_to_exact() {
        let sp = critical_point(Family::R1, r1_params(512, 0.5, 0.125)).unwrap();
        let rep = saddle_compare(&sp).unwrap();
        assert!(rep.relative_error < 0.25, "{}", rep.relative_error);
        assert!(rep.leading_order_gap.abs() < 3.0 * 512f64.log2());
    }

    #[test]
    fn objective_examples() {
        let (t1, t2) = objective_t(&ObjectiveParams::new(3, 0.32, 0.16).unwrap()).unwrap();
        assert!(t1.min(t2) <= 0.841);
        let near_zero_q = ObjectiveParams::new(3, 0.4, 0.6 - 1e-9).unwrap();
        let (a, b) = objective_t(&near_zero_q).unwrap();
        assert!(a.is_finite() && b.is_finite());
        let zero_q = ObjectiveParams::new(3, 0.4, 0.6).unwrap();
        let (c, d) = objective_t(&zero_q).unwrap();
        assert!((a - c).abs() < 1e-6 && (b - d).abs() < 1e-6);
        assert!(objective_t(&ObjectiveParams::new(3, 0.1, 0.1).unwrap()).is_err());
    }

    #[test]
    fn region5_values() {
        assert!((region5_g(0.64).unwrap() - 0.8271).abs() < 1e-3);
        assert!(region5_g_prime(0.01) > 0.0 && region5_g_prime(0.64) > 0.0);
        let rep = region5_check(1000).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.discriminant, "-759/2500");
    }

    #[test]
    fn region6_values() {
        let b = region6_bound(32, 8).unwrap();
        assert!((b.exponent - 0.728950).abs() < 1e-6 && b.exponent <= b.bound);
        assert_eq!(region6_bound(10, 0).unwrap().exponent, 0.0);
        assert!(region6_bound(2000, 500).unwrap().exponent <= 0.8113);
        assert!(region6_bound(8, 3).is_err());
    }
}
