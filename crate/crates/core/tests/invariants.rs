//! Property-based invariants: randomized checks of the structural laws the
//! library relies on — heredity, witness soundness, form agreements, and
//! monotonicities.

use std::sync::OnceLock;

use divprod::arith::{build_table, PrimeTable};
use divprod::asymptotics::{alpha_bracket, tn_exact, tn_grouped};
use divprod::basis::{build_basis, expressible};
use divprod::constructions::{seeded_h2_family, seeded_h3plus_family, Cut, FamilySpec};
use divprod::enumeration::{count_exact, extremal_size};
use divprod::property::{possesses_ph, possesses_rs, IntegerSet, Witness};
use proptest::prelude::*;

static TABLE: OnceLock<PrimeTable> = OnceLock::new();

fn table() -> &'static PrimeTable {
    TABLE.get_or_init(|| build_table(200_000).expect("prime table"))
}

/// Random subsets of [1, 40] with at most 10 elements: small enough for the
/// exact checker, large enough to hit both verdicts often.
fn small_set() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::btree_set(1u64..=40, 0..=10).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #[test]
    fn subsets_inherit_the_property(elems in small_set(), h in 2u32..=4, keep in any::<u16>()) {
        let a = IntegerSet::new(elems.clone()).unwrap();
        if possesses_ph(&a, h, table()).unwrap().0 {
            let sub: Vec<u64> = elems
                .iter()
                .enumerate()
                .filter(|&(i, _)| keep >> i & 1 == 1)
                .map(|(_, &x)| x)
                .collect();
            let sub = IntegerSet::new(sub).unwrap();
            prop_assert!(
                possesses_ph(&sub, h, table()).unwrap().0,
                "subset {:?} of good set {:?} is bad at h={h}",
                sub.elements(),
                elems
            );
        }
    }

    #[test]
    fn violation_witnesses_revalidate(elems in small_set(), h in 2u32..=4) {
        let a = IntegerSet::new(elems).unwrap();
        let (good, witness) = possesses_ph(&a, h, table()).unwrap();
        if good {
            prop_assert!(witness.is_none());
        } else {
            let w = witness.expect("violation must carry a witness");
            prop_assert!(w.validate(&a).is_ok(), "witness fails revalidation: {w:?}");
            match w {
                Witness::Pivot { ref cofactors, .. } => {
                    prop_assert_eq!(cofactors.len(), h as usize);
                }
                Witness::Split { .. } => prop_assert!(false, "order check must emit pivot form"),
            }
        }
    }

    #[test]
    fn split_form_with_one_left_agrees(elems in small_set(), h in 2u32..=4) {
        let a = IntegerSet::new(elems).unwrap();
        let direct = possesses_ph(&a, h, table()).unwrap().0;
        let (split, witness) = possesses_rs(&a, 1, h).unwrap();
        prop_assert_eq!(direct, split, "split form disagrees on {:?}", a.elements());
        if let Some(w) = witness {
            prop_assert!(w.validate(&a).is_ok());
        }
    }

    #[test]
    fn factorization_reconstructs(m in 2u64..=200_000) {
        let factors = table().factorize(m).unwrap();
        let mut product = 1u64;
        for &(p, e) in &factors {
            prop_assert!(table().is_prime(p), "factor {p} of {m} is not prime");
            product *= p.pow(e);
        }
        prop_assert_eq!(product, m);
        prop_assert!(factors.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn interval_product_forms_agree(n in 1u64..=200_000) {
        prop_assert_eq!(tn_exact(n, table()).unwrap(), tn_grouped(n, table()).unwrap());
    }

    #[test]
    fn counts_grow_with_the_universe(n in 1u64..=15, h in 2u32..=3) {
        let small = count_exact(n, h, 1).unwrap();
        let large = count_exact(n + 1, h, 1).unwrap();
        prop_assert!(small <= large, "H_{h}({n}) > H_{h}({})", n + 1);
    }

    #[test]
    fn expressible_is_monotone_in_factor_count(
        n in 2u64..=300,
        h in 2u32..=4,
        m_seed in any::<u64>(),
        k in 1u32..=6,
    ) {
        let basis = build_basis(n, h, table()).unwrap();
        let m = m_seed % n + 1;
        if expressible(m, &basis, k, table()).unwrap() {
            prop_assert!(
                expressible(m, &basis, k + 1, table()).unwrap(),
                "{m} expressible with {k} factors but not {} at n={n}, h={h}",
                k + 1
            );
        }
    }

    #[test]
    fn alpha_brackets_nest(t1 in 1u64..=4_999, extra in 1u64..=4_000) {
        let t2 = t1 + extra;
        let (lo1, hi1) = alpha_bracket(t1);
        let (lo2, hi2) = alpha_bracket(t2);
        prop_assert!(lo1 <= lo2, "lower bound shrinks: {lo1} > {lo2}");
        prop_assert!(hi2 <= hi1, "upper bound grows: {hi2} > {hi1}");
        prop_assert!(lo2 <= hi2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn seeded_families_always_verify(n in 30u64..=1_500, seed in any::<u64>(), h in 3u32..=5) {
        let fam = seeded_h2_family(n, seed, table()).unwrap();
        prop_assert!(possesses_ph(&fam, 2, table()).unwrap().0);

        let spec = FamilySpec::new(n, h, Cut::default(), seed).unwrap();
        let fam = seeded_h3plus_family(&spec, table()).unwrap();
        prop_assert!(possesses_ph(&fam, h, table()).unwrap().0);
    }

    #[test]
    fn extremal_sets_are_good_and_monotone(n in 2u64..=18, h in 2u32..=3) {
        let (size, set) = extremal_size(n, h).unwrap();
        prop_assert_eq!(set.len(), size);
        prop_assert!(possesses_ph(&set, h, table()).unwrap().0);
        let (next, _) = extremal_size(n + 1, h).unwrap();
        prop_assert!(size <= next, "extremal size drops from {size} to {next} at n={n}");
    }
}
