use std::collections::BTreeMap;

use arakelov_demailly::factor::{factor_form, factor_integer, is_irreducible, is_probable_prime, is_squarefree_form};
use arakelov_demailly::form::IntForm;
use num_bigint::BigInt;
use num_integer::Integer;
use proptest::prelude::*;

fn form(c: &[i64]) -> IntForm {
    IntForm::from_i64(c)
}

/// `t^n - 1` as a form of degree `n`; index is the power of z0, so `t = z1 / z0`.
fn cyclotomic_product(n: usize) -> IntForm {
    let mut c = vec![0i64; n + 1];
    c[0] = 1;
    c[n] = -1;
    form(&c)
}

#[test]
fn cyclotomic_splitting() {
    // t^n - 1 splits into one irreducible factor per divisor of n
    for n in [4usize, 6, 12, 15, 30] {
        let fac = factor_form(&cyclotomic_product(n)).unwrap();
        let divisors = (1..=n).filter(|d| n % d == 0).count();
        assert_eq!(fac.factors.len(), divisors, "n = {n}");
        assert!(fac.factors.iter().all(|(_, m)| *m == 1));
        assert_eq!(fac.expand(n), cyclotomic_product(n));
    }
    // t^4 + 1 is reducible modulo every prime
    assert!(is_irreducible(&form(&[1, 0, 0, 0, 1])).unwrap());
    assert!(!is_irreducible(&form(&[2, 0, 2])).unwrap());
}

#[test]
fn multiplicities_and_content() {
    // 12 (z0 - z1)^3 (z0^2 + z1^2)^2
    let a = form(&[-1, 1]).power(3);
    let b = form(&[1, 0, 1]).power(2);
    let f = a.product(&b).scale(&BigInt::from(12));
    let fac = factor_form(&f).unwrap();
    // the unit carries the sign of the first nonzero coefficient, here -1
    assert_eq!(fac.unit, BigInt::from(-12));
    let mults: Vec<(usize, u32)> = fac.factors.iter().map(|(g, m)| (g.degree(), *m)).collect();
    assert_eq!(mults, [(1, 3), (2, 2)]);
    assert_eq!(fac.expand(7), f);
    assert!(!is_squarefree_form(&f));
    assert!(is_squarefree_form(&form(&[1, 0, 1])));
    // z0^2 divides: a double point at [0:1]
    assert!(!is_squarefree_form(&form(&[0, 0, 1])));
    assert!(factor_form(&form(&[0, 0, 0])).is_err());

    let neg = factor_form(&form(&[3, 0, -3])).unwrap();
    assert_eq!(neg.unit, BigInt::from(3));
    assert_eq!(neg.expand(2), form(&[3, 0, -3]));
}

#[test]
fn integer_factorization_and_primality() {
    let p = BigInt::from(2_147_483_647u64);
    assert!(is_probable_prime(&p));
    assert!(!is_probable_prime(&(&p * &p)));
    let n = BigInt::from(2u32).pow(61) - 1u32;
    assert!(is_probable_prime(&n));
    let m = BigInt::from(600_851_475_143u64);
    let f = factor_integer(&m);
    let ps: Vec<u64> = f.iter().map(|(p, _)| p.try_into().unwrap()).collect();
    assert_eq!(ps, [71, 839, 1471, 6857]);
    assert!(factor_integer(&BigInt::from(1)).is_empty());
    assert_eq!(factor_integer(&BigInt::from(-8)), vec![(BigInt::from(2), 3)]);
}

fn small_form(max_deg: usize) -> impl Strategy<Value = Vec<i64>> {
    (1..=max_deg).prop_flat_map(|d| prop::collection::vec(-6i64..=6, d + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factorization_roundtrip(parts in prop::collection::vec(small_form(3), 1..4)) {
        let mut f = form(&[1]);
        for c in &parts {
            let g = form(c);
            prop_assume!(!g.is_zero());
            f = f.product(&g);
        }
        let n = f.degree();
        let fac = factor_form(&f).unwrap();
        prop_assert_eq!(fac.expand(n), f.clone());
        for (g, _) in &fac.factors {
            prop_assert!(g.content() == BigInt::from(1));
            prop_assert!(is_squarefree_form(g));
        }
        prop_assert!(n == 0 || !fac.factors.is_empty());
    }

    #[test]
    fn linear_products_split_completely(roots in prop::collection::vec((-5i64..=5, 1i64..=4), 1..7)) {
        // each root a/b gives the factor b z1 - a z0 (normalized up to sign)
        let mut f = form(&[1]);
        let mut expected: BTreeMap<(i64, i64), u32> = BTreeMap::new();
        for &(a, b) in &roots {
            let g = a.gcd(&b);
            let key = (a / g, b / g);
            *expected.entry(key).or_default() += 1;
            f = f.product(&form(&[b, -a]));
        }
        let fac = factor_form(&f).unwrap();
        prop_assert_eq!(fac.expand(f.degree()), f.clone());
        let mut got: Vec<u32> = fac.factors.iter().map(|(g, m)| { assert_eq!(g.degree(), 1); *m }).collect();
        let mut want: Vec<u32> = expected.values().copied().collect();
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
    }
}
