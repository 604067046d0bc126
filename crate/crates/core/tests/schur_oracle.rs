//! The Schur-basis actions against the functional recursions, evaluated
//! at random rational points.

mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::Rational;
use xxxdm::schur_engine::*;

#[test]
fn actions_match_functional_recursions() {
    let bad = letter_action_mismatches(6, 4, 11);
    assert!(bad.is_empty(), "{bad:?}");
}

fn elementary(j: usize, x: &[Rational]) -> Rational {
    let mut e = vec![Rational::new(); x.len() + 1];
    e[0] = Rational::from(1);
    for xi in x {
        for k in (1..e.len()).rev() {
            let t = Rational::from(&e[k - 1] * xi);
            e[k] += t;
        }
    }
    e.get(j).cloned().unwrap_or_default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pieri_is_multiplication_by_e_j(seed in 0u64..10_000, q in 1usize..5, j in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = rand_vector(&mut rng, q);
        let pts: Vec<Rational> = (0..q).map(|i| rnd(&mut rng) * 3u32 + Rational::from((i as i64, 11))).collect();
        prop_assume!((0..q).all(|i| (0..i).all(|k| pts[i] != pts[k])));
        let lhs = eval_schur(&pieri(j, &y).unwrap(), &pts).unwrap();
        let rhs = elementary(j, &pts) * eval_schur(&y, &pts).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn fock_roundtrip(parts in proptest::collection::vec(1u32..20, 0..6), extra in 0usize..4) {
        let mut parts = parts;
        parts.sort_unstable_by(|a, b| b.cmp(a));
        let p = Partition(parts);
        let q = p.len() + extra;
        let k = partition_to_fock(&p, q).unwrap();
        prop_assert_eq!(fock_to_partition(&k).unwrap(), p);
    }
}
