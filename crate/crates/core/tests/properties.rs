use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use dyadisc::classical::{l2_warnock, local_discrepancy, star_discrepancy};
use dyadisc::haar::{mu_all_at_level, mu_discrepancy, HaarIndex};
use dyadisc::pointsets::{
    hammersley_type, is_net, reflect, symmetrize_full, Axis, Point, PointMultiset, SignPattern,
};
use dyadisc::Dyadic;

fn dyadic() -> impl Strategy<Value = Dyadic> {
    (-(1i128 << 80)..(1i128 << 80), -90i64..90).prop_map(|(m, e)| Dyadic::new(m, e))
}

fn rat(d: &Dyadic) -> BigRational {
    d.to_rational()
}

/// `2^k <= 16` points on the grid of resolution `r <= 6`, coordinates in `[0, 1]`.
fn small_set() -> impl Strategy<Value = PointMultiset> {
    (1u32..=6, 0usize..=4).prop_flat_map(|(r, k)| {
        let side = 1u64 << r;
        prop::collection::vec((0..=side, 0..=side), 1 << k)
            .prop_map(move |grid| PointMultiset::from_grid(r, grid).unwrap())
    })
}

fn frac(num: u64, r: u32) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(1u64 << r))
}

proptest! {
    #[test]
    fn dyadic_ring_ops_match_rationals(a in dyadic(), b in dyadic(), c in dyadic()) {
        prop_assert_eq!(rat(&(&a + &b)), rat(&a) + rat(&b));
        prop_assert_eq!(rat(&(&a - &b)), rat(&a) - rat(&b));
        prop_assert_eq!(rat(&(&a * &b)), rat(&a) * rat(&b));
        prop_assert_eq!(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)));
        prop_assert_eq!(a.cmp(&b), rat(&a).cmp(&rat(&b)));
    }

    #[test]
    fn dyadic_text_round_trip(a in dyadic()) {
        let back: Dyadic = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn warnock_matches_direct_double_sum(set in small_set()) {
        let r = set.resolution();
        let one = BigRational::one();
        let n = BigRational::from_integer(BigInt::from(set.len()));
        let mut single = BigRational::zero();
        let mut pair = BigRational::zero();
        for &(a, b) in set.grid() {
            let (x, y) = (frac(a, r), frac(b, r));
            single += (&one - &x * &x) * (&one - &y * &y);
            for &(c, d) in set.grid() {
                pair += (&one - frac(a.max(c), r)) * (&one - frac(b.max(d), r));
            }
        }
        let expected = BigRational::new(1.into(), 9.into())
            - single / (BigRational::from_integer(2.into()) * &n)
            + pair / (&n * &n);
        prop_assert_eq!(l2_warnock(&set).unwrap(), expected);
    }

    #[test]
    fn star_bounds_every_local_value(set in small_set(), a in 0u64..=64, b in 0u64..=64) {
        let t = Point::dyadic(i128::from(a), i128::from(b), 6);
        let local = local_discrepancy(&set, &t).unwrap();
        prop_assert!(local.abs() <= star_discrepancy(&set).unwrap());
    }

    #[test]
    fn level_sweep_matches_single_coefficients(set in small_set(), j1 in -1i32..4, j2 in -1i32..4) {
        let level = mu_all_at_level(&set, j1, j2).unwrap();
        let per_axis = |j: i32| if j < 0 { 1 } else { 1u64 << j };
        for m1 in 0..per_axis(j1) {
            for m2 in 0..per_axis(j2) {
                let idx = HaarIndex::new(j1, j2, m1, m2).unwrap();
                prop_assert_eq!(level.get(m1, m2), mu_discrepancy(&set, &idx).unwrap());
            }
        }
    }

    #[test]
    fn full_symmetrization_is_reflection_invariant(set in small_set()) {
        let sym = symmetrize_full(&set);
        for axis in [Axis::X, Axis::Y, Axis::XY] {
            prop_assert!(reflect(&sym, axis).same_multiset(&sym));
        }
        prop_assert!(reflect(&reflect(&set, Axis::XY), Axis::XY).same_multiset(&set));
    }

    #[test]
    fn every_sign_pattern_gives_a_net(flips in prop::collection::vec(any::<bool>(), 1..=10)) {
        let n = flips.len();
        let sigma = SignPattern::new(flips).unwrap();
        let set = hammersley_type(n, &sigma).unwrap();
        prop_assert_eq!(set.len(), 1 << n);
        prop_assert!(is_net(&set, n as u32).unwrap());
    }
}
