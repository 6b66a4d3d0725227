//! Acceptance suite. One PASS/FAIL line per criterion; run with
//! `cargo test -p orbitforge --test acceptance -- --nocapture` to see them.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use orbitforge::asymptotics::{self, Family};
use orbitforge::boolfn::{all_assignments, enumerate_orbits, orbit_key, orbit_size};
use orbitforge::cnf::{block_cnf, compose, count_solutions_by_orbit};
use orbitforge::cover::{assemble_circuit, verify_circuit, Strategy};
use orbitforge::numeric::binomial;
use orbitforge::regions::{self, RegionConfig, SamplingPolicy};
use orbitforge::search::{compose_search, pareto_blocks, rho_star};
use orbitforge::spectrum::{coeff_fast, composition_spectrum};
use orbitforge::{BlockKind, Composition, OrbitKey, Spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and budgets.
const C50_REFERENCE: f64 = 0.8344320;
const C100_REFERENCE: f64 = 0.8414042;
const C_TOL: f64 = 1e-2;
const CERTIFY_CEILING: f64 = 0.858;
const SADDLE_MAX_REL: f64 = 0.25;
const R3_BOUND: f64 = 0.841;
const R4_BOUND: f64 = 0.845;
const HALVING_TOL: f64 = 1e-3;
const SEED: u64 = 20_240_905;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn spectrum(degree: usize, terms: &[(u32, usize, usize, usize)]) -> Spectrum {
    Spectrum::from_terms(
        degree,
        terms
            .iter()
            .map(|&(c, p, q, r)| (OrbitKey::new(p, q, r), BigUint::from(c))),
    )
    .unwrap()
}

fn census(f: &orbitforge::TwoCnf) -> Spectrum {
    let counts = count_solutions_by_orbit(f, 6).unwrap();
    Spectrum::from_terms(f.n_coords(), counts).unwrap()
}

fn c1_block_spectra() -> Outcome {
    // x = (1,1), y = differing, z = (0,0)
    let expected = [
        (BlockKind::Id2, spectrum(1, &[(1, 1, 0, 0)])),
        (BlockKind::Id1, spectrum(1, &[(2, 0, 1, 0)])),
        (BlockKind::Id0, spectrum(1, &[(1, 0, 0, 1)])),
        (BlockKind::Nand, spectrum(1, &[(2, 0, 1, 0), (1, 0, 0, 1)])),
        (
            BlockKind::Matching,
            spectrum(2, &[(1, 2, 0, 0), (2, 0, 2, 0), (1, 0, 0, 2)]),
        ),
        (
            BlockKind::TwoImp,
            spectrum(2, &[(1, 2, 0, 0), (1, 0, 2, 0), (2, 0, 1, 1), (1, 0, 0, 2)]),
        ),
    ];
    let bad: Vec<_> = expected
        .iter()
        .filter(|(k, s)| census(&block_cnf(*k)) != *s)
        .map(|(k, _)| k.name())
        .collect();
    check(bad.is_empty(), format!("6 blocks, mismatches {bad:?}"))
}

fn c2_spectrum_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut done = 0;
    while done < 200 {
        let mut c = Composition::default();
        for &k in &BlockKind::ALL {
            *c.count_mut(k) = rng.gen_range(0..=2);
        }
        if c.n() == 0 || c.n() > 6 {
            continue;
        }
        let f = compose(&c, c.n()).unwrap();
        if composition_spectrum(&c) != census(&f) {
            return Err(format!("mismatch for {c}"));
        }
        done += 1;
    }
    Ok(format!("{done} random compositions, n <= 6"))
}

fn c3_orbit_sizes() -> Outcome {
    for n in 1..=6 {
        let mut counted = std::collections::BTreeMap::<OrbitKey, u64>::new();
        for a in all_assignments(n) {
            *counted.entry(orbit_key(&a)).or_default() += 1;
        }
        let mut total = BigUint::from(0u32);
        for k in enumerate_orbits(n) {
            let s = orbit_size(k);
            if s != BigUint::from(counted.get(&k).copied().unwrap_or(0)) {
                return Err(format!("size mismatch at {k}"));
            }
            total += s;
        }
        if total != BigUint::from(1u64 << (2 * n)) {
            return Err(format!("sizes sum to {total} at n={n}"));
        }
    }
    Ok("n = 1..6, sizes match enumeration and sum to 4^n".into())
}

fn c4_pareto() -> Outcome {
    let got: BTreeSet<String> = pareto_blocks(2, 0)
        .unwrap()
        .iter()
        .map(|e| format!("{:?}", e.spectrum.terms().collect::<Vec<_>>()))
        .collect();
    let want: BTreeSet<String> = [
        spectrum(2, &[(1, 2, 0, 0), (2, 0, 2, 0), (1, 0, 0, 2)]),
        spectrum(2, &[(1, 2, 0, 0), (1, 0, 2, 0), (2, 0, 1, 1), (1, 0, 0, 2)]),
        spectrum(2, &[(4, 0, 2, 0), (4, 0, 1, 1), (1, 0, 0, 2)]),
    ]
    .iter()
    .map(|s| format!("{:?}", s.terms().collect::<Vec<_>>()))
    .collect();
    check(got == want, format!("{} Pareto spectra", got.len()))
}

fn c5_compose_search() -> Outcome {
    let r50 = compose_search(50, &BlockKind::ALL, 0, 200).map_err(|e| e.to_string())?;
    let r100 = compose_search(100, &BlockKind::ALL, 0, 200).map_err(|e| e.to_string())?;
    let ok = (r50.c - C50_REFERENCE).abs() <= C_TOL;
    let stretch = (r100.c - C100_REFERENCE).abs() <= C_TOL;
    check(
        ok,
        format!(
            "c(50) = {:.7} (reference {C50_REFERENCE}), stretch c(100) = {:.7} (reference {C100_REFERENCE}) {}",
            r50.c,
            r100.c,
            if stretch { "within tol" } else { "outside tol" }
        ),
    )
}

fn c6_region_coverage() -> Outcome {
    let mut orbits = 0u64;
    for n in 1..=400 {
        for p in 0..=n {
            for q in 0..=n - p {
                let k = OrbitKey::new(p, q, n - p - q);
                if regions::classify(&k).is_empty() {
                    return Err(format!("{k} is in no region"));
                }
                orbits += 1;
            }
        }
    }
    Ok(format!("{orbits} orbits, n <= 400"))
}

fn c7_certify() -> Outcome {
    let policy = SamplingPolicy::Stratified {
        per_region: 10,
        seed: SEED,
    };
    let cert = regions::certify(
        2000,
        policy,
        &RegionConfig::default(),
        CERTIFY_CEILING - regions::target_exponent(),
    )
    .map_err(|e| e.to_string())?;
    let per_region: Vec<usize> = regions::REGIONS
        .iter()
        .map(|&rid| cert.reports.iter().filter(|r| regions::in_region(rid, &r.key)).count())
        .collect();
    let ok = cert.reports.len() >= 60
        && per_region.iter().all(|&c| c >= 10)
        && cert.reports.iter().all(|r| r.exponent <= CERTIFY_CEILING);
    check(
        ok,
        format!(
            "{} orbits (per region {per_region:?}), max exponent {:.5} at {}",
            cert.reports.len(),
            cert.max_exponent,
            cert.worst
        ),
    )
}

fn c8_region_identities() -> Outcome {
    let cfg = RegionConfig::default();
    let (mut r6, mut r2) = (0, 0);
    for n in 1..=24usize {
        for k in enumerate_orbits(n) {
            if regions::in_region(6, &k) && k.p % 2 == 0 {
                let c = Composition::default()
                    .with(BlockKind::Matching, k.p / 2)
                    .with(BlockKind::Nand, n - k.p);
                let rep = regions::ratio(&c, &k).unwrap();
                let want = num_rational::Ratio::from_integer(binomial(n as u64, k.p as u64));
                if rep.ratio != Some(want) {
                    return Err(format!("R6 ratio at {k}"));
                }
                r6 += 1;
            }
            if regions::in_region(2, &k) && n % 2 == 0 && k.p % 2 == 0 && k.q % 2 == 0 {
                let c = Composition::default().with(BlockKind::Matching, n / 2);
                let want = binomial(n as u64 / 2, k.p as u64 / 2)
                    * binomial((n - k.p) as u64 / 2, k.q as u64 / 2)
                    * (BigUint::from(1u32) << (k.q / 2));
                if coeff_fast(&c, &k).unwrap() != want {
                    return Err(format!("R2 capture at {k}"));
                }
                r2 += 1;
            }
        }
    }
    // the recipe entry points must agree with the direct compositions
    let k = OrbitKey::new(2, 10, 4);
    let via_recipe = regions::ratio_best(&regions::region_composition(6, &k, &cfg).unwrap(), &k).unwrap();
    check(
        via_recipe.ratio == Some(num_rational::Ratio::from_integer(binomial(16, 2))) && r6 > 0 && r2 > 0,
        format!("{r6} R6 orbits, {r2} R2 orbits, n <= 24"),
    )
}

fn c9_saddle() -> Outcome {
    let mut errs = Vec::new();
    for n in [512usize, 1024, 2048] {
        let params = asymptotics::r1_params(n, 0.5, 0.125);
        let sp = asymptotics::critical_point(Family::R1, params).map_err(|e| e.to_string())?;
        errs.push(
            asymptotics::saddle_compare(&sp)
                .map_err(|e| e.to_string())?
                .relative_error,
        );
    }
    let ok = errs.iter().all(|&e| e < SADDLE_MAX_REL) && errs.windows(2).all(|w| w[1] < w[0]);
    check(ok, format!("relative errors {errs:.5?} at n = 512, 1024, 2048"))
}

fn c10_optimize() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (region, bound) in [(3u8, R3_BOUND), (4, R4_BOUND)] {
        let a = asymptotics::maximize_min_t(region, 1e-3, 200).map_err(|e| e.to_string())?;
        let b = asymptotics::maximize_min_t(region, 5e-4, 200).map_err(|e| e.to_string())?;
        let drift = (a.observed_max - b.observed_max).abs();
        ok &= a.observed_max <= bound && drift < HALVING_TOL;
        detail.push(format!(
            "R{region} max {:.5} (bound {bound}, halving drift {drift:.1e})",
            a.observed_max
        ));
    }
    check(ok, detail.join(", "))
}

fn c11_region56() -> Outcome {
    let r5 = asymptotics::region5_check(10_000).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for n in 1..=200 {
        for p in 0..=n / 4 {
            let b = asymptotics::region6_bound(n, p).map_err(|e| e.to_string())?;
            if b.exponent > b.bound {
                return Err(format!("region 6 exponent {} > H(1/4) at n={n} p={p}", b.exponent));
            }
            worst = worst.max(b.exponent);
        }
    }
    check(
        r5.passed,
        format!(
            "g(0.64) = {:.5}, min g' = {:.4}, discriminant {}, R6 max exponent {worst:.5}",
            r5.g_at_max, r5.min_g_prime, r5.discriminant
        ),
    )
}

fn c12_circuits() -> Outcome {
    let mut detail = Vec::new();
    for n in [2usize, 4, 6, 8] {
        let t = Instant::now();
        let asm = assemble_circuit(n, Strategy::Regions, SEED).map_err(|e| e.to_string())?;
        let v = verify_circuit(&asm.circuit).map_err(|e| e.to_string())?;
        let secs = t.elapsed().as_secs_f64();
        if !v.passed() || (n == 8 && secs > 60.0) {
            return Err(format!("n={n}: {}/{} in {secs:.1}s", v.agreed, v.inputs));
        }
        detail.push(format!("n={n} {}/{}", v.agreed, v.inputs));
    }
    Ok(detail.join(", "))
}

fn c13_mu_sandwich() -> Outcome {
    let n = 2;
    let rho = rho_star(n, 1).map_err(|e| e.to_string())?;
    let asm = assemble_circuit(n, Strategy::Regions, SEED).map_err(|e| e.to_string())?;
    // every composition on 2 coordinates consistent with IP^1
    let mut checked = 0;
    let blocks = BlockKind::ALL;
    let mut counts = [0usize; 6];
    loop {
        let c = blocks
            .iter()
            .zip(counts)
            .fold(Composition::default(), |c, (&k, v)| c.with(k, v));
        if c.n() == n && c.parity() == 1 {
            for m in &rho.per_orbit {
                if coeff_fast(&c, &m.key).unwrap() > m.mu {
                    return Err(format!("{c} captures more than mu at {}", m.key));
                }
            }
            checked += 1;
        }
        let mut i = 0;
        while i < 6 {
            counts[i] += 1;
            if counts[i] <= 2 {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
        if i == 6 {
            break;
        }
    }
    check(
        rho.rho <= asm.members as f64 && checked > 0,
        format!(
            "rho* = {}, circuit members = {}, {checked} compositions within mu",
            rho.rho, asm.members
        ),
    )
}

fn c14_binomials() -> Outcome {
    for m in 0..=500u64 {
        for k in 0..=m {
            let b = asymptotics::binomial_bounds(m, k).map_err(|e| e.to_string())?;
            if !b.holds() {
                return Err(format!("entropy sandwich fails at C({m},{k})"));
            }
        }
    }
    for m in (0..=400u64).step_by(2) {
        let h = m / 2;
        let factor = BigUint::from((h + 1) * (h + 1));
        for k in (0..=m).step_by(2) {
            let half = binomial(h, k / 2);
            if binomial(m, k) > &factor * &half * &half {
                return Err(format!("even-split inequality fails at C({m},{k})"));
            }
        }
    }
    Ok("entropy sandwich m <= 500, even-split inequality even m <= 400".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, u64, fn() -> Outcome); 14] = [
        ("block spectra", 1, c1_block_spectra),
        ("spectrum vs census", 120, c2_spectrum_oracle),
        ("orbit sizes", 60, c3_orbit_sizes),
        ("Pareto blocks", 60, c4_pareto),
        ("composition search c(n)", 600, c5_compose_search),
        ("region coverage", 60, c6_region_coverage),
        ("certify n=2000", 600, c7_certify),
        ("region identities", 60, c8_region_identities),
        ("saddle estimate", 120, c9_saddle),
        ("objective optimum", 600, c10_optimize),
        ("region 5/6 analytics", 60, c11_region56),
        ("end-to-end circuits", 300, c12_circuits),
        ("exact mu sandwich", 60, c13_mu_sandwich),
        ("binomial inequalities", 60, c14_binomials),
    ];
    println!();
    let mut failed = Vec::new();
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let took = t.elapsed();
        let res = match res {
            Ok(d) if took > Duration::from_secs(*budget) => Err(format!("{d}; over budget {budget}s")),
            r => r,
        };
        let (tag, detail) = match &res {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("[{tag}] {:>2}. {name}: {detail} ({:.2}s)", i + 1, took.as_secs_f64());
        if res.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
