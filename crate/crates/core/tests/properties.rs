use std::collections::BTreeSet;

use num_bigint::BigUint;
use orbitforge::boolfn::{orbit_key, Automorphism};
use orbitforge::cnf::{compose, count_solutions_by_orbit, is_consistent};
use orbitforge::search::{is_median_closed, median_closure};
use orbitforge::spectrum::{coeff_fast, composition_spectrum};
use orbitforge::{Assignment, BlockKind, Composition, OrbitKey, Spectrum, TwoCnf};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn composition(max_n: usize) -> impl Strategy<Value = Composition> {
    prop::array::uniform6(0usize..=3)
        .prop_map(|counts| {
            BlockKind::ALL
                .iter()
                .zip(counts)
                .fold(Composition::default(), |c, (&k, v)| c.with(k, v))
        })
        .prop_filter("size", move |c| c.n() >= 1 && c.n() <= max_n)
}

fn automorphism(n: usize) -> impl Strategy<Value = Automorphism> {
    any::<u64>().prop_map(move |s| Automorphism::sample(n, &mut ChaCha8Rng::seed_from_u64(s)))
}

fn spectrum_of(c: &Composition) -> Spectrum {
    composition_spectrum(c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dimacs_round_trip(c in composition(6), g in any::<u64>()) {
        let f = compose(&c, c.n()).unwrap();
        let f = f.permuted(&Automorphism::sample(c.n(), &mut ChaCha8Rng::seed_from_u64(g)));
        let back = TwoCnf::parse_dimacs(&f.to_dimacs()).unwrap();
        prop_assert_eq!(back.to_dimacs(), f.to_dimacs());
    }

    #[test]
    fn spectrum_product_commutes(a in composition(8), b in composition(8)) {
        let (sa, sb) = (spectrum_of(&a), spectrum_of(&b));
        prop_assert_eq!(sa.mul(&sb), sb.mul(&sa));
    }

    #[test]
    fn spectrum_total_is_solution_count(c in composition(10)) {
        // solutions multiply across disjoint blocks
        let per_block = |k: BlockKind| match k {
            BlockKind::Id2 | BlockKind::Id0 => 1u32,
            BlockKind::Id1 => 2,
            BlockKind::Nand => 3,
            BlockKind::Matching => 4,
            BlockKind::TwoImp => 5,
        };
        let want: BigUint = BlockKind::ALL
            .iter()
            .map(|&k| BigUint::from(per_block(k)).pow(c.count(k) as u32))
            .product();
        prop_assert_eq!(spectrum_of(&c).total(), want);
    }

    #[test]
    fn coeff_fast_matches_full_product(c in composition(12), p in 0usize..12, q in 0usize..12) {
        let n = c.n();
        prop_assume!(p + q <= n);
        let k = OrbitKey::new(p, q, n - p - q);
        prop_assert_eq!(coeff_fast(&c, &k).unwrap(), spectrum_of(&c).coeff(&k).unwrap());
    }

    #[test]
    fn automorphisms_preserve_orbits(n in 1usize..=8, bits in any::<u64>(), g in automorphism(8)) {
        let g = Automorphism::sample(n, &mut ChaCha8Rng::seed_from_u64(g.index()));
        let a = Assignment::from_bits(n, bits & ((1u64 << (2 * n)) - 1));
        prop_assert_eq!(orbit_key(&g.apply(&a)), orbit_key(&a));
        prop_assert_eq!(g.inverse().apply(&g.apply(&a)), a);
    }

    #[test]
    fn permutation_preserves_census(c in composition(5), g in automorphism(5)) {
        let n = c.n();
        let g = Automorphism::sample(n, &mut ChaCha8Rng::seed_from_u64(g.index()));
        let f = compose(&c, n).unwrap();
        prop_assert_eq!(
            count_solutions_by_orbit(&f, 6).unwrap(),
            count_solutions_by_orbit(&f.permuted(&g), 6).unwrap()
        );
    }

    #[test]
    fn compositions_are_consistent_with_their_parity(c in composition(5)) {
        let f = compose(&c, c.n()).unwrap();
        prop_assert!(is_consistent(&f, c.parity(), 6).unwrap());
    }

    #[test]
    fn median_closure_is_idempotent(set in prop::collection::btree_set(0u64..64, 0..10)) {
        let once = median_closure(&set);
        prop_assert!(once.is_superset(&set));
        let v: Vec<u64> = once.iter().copied().collect();
        prop_assert!(is_median_closed(&v));
        prop_assert_eq!(median_closure(&once), once);
    }

    #[test]
    fn solution_sets_of_two_cnfs_are_median_closed(c in composition(3), g in automorphism(3)) {
        let n = c.n();
        let g = Automorphism::sample(n, &mut ChaCha8Rng::seed_from_u64(g.index()));
        let f = compose(&c, n).unwrap().permuted(&g).compile();
        let sol: Vec<u64> = (0..1u64 << (2 * n)).filter(|&b| f.eval(b)).collect();
        prop_assert!(is_median_closed(&sol));
        let rebuilt = TwoCnf::from_solution_set(n, &sol).compile();
        let again: BTreeSet<u64> = (0..1u64 << (2 * n)).filter(|&b| rebuilt.eval(b)).collect();
        prop_assert_eq!(again, sol.into_iter().collect::<BTreeSet<_>>());
    }

    #[test]
    fn spectrum_json_round_trip(c in composition(8)) {
        let s = spectrum_of(&c);
        prop_assert_eq!(Spectrum::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn composition_display_parses_back(c in composition(20)) {
        prop_assert_eq!(Composition::parse(&c.to_string()).unwrap(), c);
    }
}
