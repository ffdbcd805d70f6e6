use eucdyn::euclid::{branch_eval, expand, reconstruct, total_cost, word_cost};
use eucdyn::{AlgorithmKind, CostFunction, Digit, Sign};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = AlgorithmKind> {
    prop_oneof![Just(AlgorithmKind::Standard), Just(AlgorithmKind::Centred), Just(AlgorithmKind::Odd)]
}

fn coprime_pair(kind: AlgorithmKind) -> impl Strategy<Value = (u64, u64)> {
    (2u64..1_000_000_000_000).prop_flat_map(move |v| {
        let hi = if kind == AlgorithmKind::Centred { v / 2 } else { v };
        (1..=hi).prop_filter_map("coprime", move |u| (u.gcd(&v) == 1).then_some((u, v)))
    })
}

fn digit(kind: AlgorithmKind) -> impl Strategy<Value = Digit> {
    (1u64..2000, any::<bool>()).prop_filter_map("admissible", move |(m, plus)| {
        let q = Digit { m, eps: if plus { Sign::Plus } else { Sign::Minus } };
        kind.is_admissible(q).then_some(q)
    })
}

proptest! {
    #[test]
    fn round_trip((kind, (u, v)) in kind().prop_flat_map(|k| (Just(k), coprime_pair(k)))) {
        let e = expand(u, v, kind).unwrap();
        prop_assert_eq!(reconstruct(&e), BigRational::new(BigInt::from(u), BigInt::from(v)));
        prop_assert!(kind.is_final(e.last_digit()));
        prop_assert!(e.digits.iter().all(|&q| kind.is_admissible(q)));
        prop_assert!((e.depth() as f64) <= 5.0 * (v as f64).ln() + 2.0);
    }

    #[test]
    fn cost_is_additive((kind, (u, v)) in kind().prop_flat_map(|k| (Just(k), coprime_pair(k)))) {
        let e = expand(u, v, kind).unwrap();
        let c = CostFunction::binary_length();
        let split = e.depth() / 2;
        let total = word_cost(&e.digits[..split], &c) + word_cost(&e.digits[split..], &c);
        prop_assert_eq!(total, total_cost(&e, &c));
    }

    #[test]
    fn branches_invert_the_map((kind, q) in kind().prop_flat_map(|k| (Just(k), digit(k))), t in 0.001f64..0.999) {
        let iv = kind.interval();
        let x = iv.lo + t * (iv.hi - iv.lo);
        let (y, d) = branch_eval(q, x).unwrap();
        prop_assert!((d - y * y).abs() <= 1e-15 * d);
        // distortion |h''| / |h'| = 2 / (m + eps x)
        prop_assert!(2.0 * y <= 2.0 + 1e-12);
        // away from cylinder ends the interval map undoes the branch
        let back = kind.apply_t(y).unwrap();
        let (lo, hi) = (branch_eval(q, iv.lo).unwrap().0, branch_eval(q, iv.hi).unwrap().0);
        let edge = (y - lo).abs().min((y - hi).abs());
        if edge > 1e-9 * y {
            prop_assert!((back - x).abs() <= 1e-12, "{:?} {} {}", q, x, back);
        }
    }
}
