use arakelov_demailly::finite_field::{
    content_and_reduction, for_each_nonzero_form, is_smooth_divisor, is_smooth_divisor_naive, smooth_divisor_density,
    smooth_divisor_density_sampled, zeta_inverse, DensityMode, FpForm, PrimeField,
};
use arakelov_demailly::form::IntForm;
use arakelov_demailly::Error;
use proptest::prelude::*;

fn field(p: u64) -> PrimeField {
    PrimeField::new(p).unwrap()
}

#[test]
fn smoothness_fixtures() {
    let f3 = field(3);
    // z0 * z1
    assert!(is_smooth_divisor(&FpForm::from_i64(f3, &[0, 1, 0])).unwrap());
    assert!(!is_smooth_divisor(&FpForm::from_i64(f3, &[0, 0, 1])).unwrap());
    // z0^2 + z1^2 = (z0 + z1)^2 in characteristic 2
    assert!(!is_smooth_divisor(&FpForm::from_i64(field(2), &[1, 0, 1])).unwrap());
    // z0^3 - z1^3 = (z0 - z1)^3 over F_3: derivative of t^3 - 1 vanishes
    assert!(!is_smooth_divisor(&FpForm::from_i64(f3, &[-1, 0, 0, 1])).unwrap());
    // z0 (z1^3 - z0^2 z1 - z0^3): [0:1] once, then the irreducible t^3 - t - 1
    assert!(is_smooth_divisor(&FpForm::from_i64(f3, &[0, 1, 0, -1, -1])).unwrap());
    assert!(!is_smooth_divisor(&FpForm::from_i64(f3, &[0, 0, 1, 0, -1, -1])).unwrap());
    assert!(matches!(
        is_smooth_divisor(&FpForm::from_i64(f3, &[0, 0])),
        Err(Error::ZeroForm(_))
    ));
    assert!(matches!(PrimeField::new(9), Err(Error::NotPrime(9))));
    assert!(PrimeField::new(10_007).is_err());
}

#[test]
fn density_fixtures() {
    let d = smooth_divisor_density(3, 2).unwrap();
    assert_eq!((d.total, d.hits), (26, 18));
    assert_eq!((d.density_num, d.density_den), (9, 13));
    assert_eq!(d.mode, DensityMode::Exhaustive);

    let d = smooth_divisor_density(3, 4).unwrap();
    assert_eq!((d.density_num, d.density_den), (72, 121));

    let lin = smooth_divisor_density(2, 1).unwrap();
    assert_eq!((lin.hits, lin.total), (3, 3));

    let d = smooth_divisor_density(5, 6).unwrap();
    assert!((d.density() - 0.768).abs() <= 0.05, "{}", d.density());
    assert_eq!(d.reference, zeta_inverse(5, 2).unwrap());

    assert!(matches!(
        smooth_divisor_density(97, 6),
        Err(Error::BudgetExceeded { .. })
    ));
}

#[test]
fn exhaustive_counts_match_naive_oracle() {
    for p in [2u64, 3, 5] {
        for n in 1..=6usize {
            if p.pow(n as u32 + 1) > 100_000 {
                continue;
            }
            let mut naive = 0u64;
            for_each_nonzero_form(field(p), n, |f| {
                if is_smooth_divisor_naive(f).unwrap() {
                    naive += 1;
                }
            });
            let d = smooth_divisor_density(p, n).unwrap();
            assert_eq!(d.hits, naive, "p = {p}, n = {n}");
            assert_eq!(d.total, p.pow(n as u32 + 1) - 1);
        }
    }
}

#[test]
fn density_stabilizes_in_degree() {
    let d: Vec<f64> = (2..=8)
        .map(|n| smooth_divisor_density(3, n).unwrap().density())
        .collect();
    // index i holds n = i + 2; compare consecutive gaps from n = 3 on
    let gaps: Vec<f64> = d.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    for w in gaps[1..].windows(2) {
        assert!(w[1] <= w[0] * 1.1 + 1e-15, "{gaps:?}");
    }
}

#[test]
fn sampled_density_is_reproducible() {
    let a = smooth_divisor_density_sampled(7, 10, 20_000, 5).unwrap();
    let b = smooth_divisor_density_sampled(7, 10, 20_000, 5).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.seed, Some(5));
    assert_eq!(a.mode, DensityMode::Sampled);
    assert!((a.density() - zeta_inverse(7, 2).unwrap()).abs() < 0.02);
}

#[test]
fn zeta_fixtures() {
    assert!((zeta_inverse(5, 2).unwrap() - 0.768).abs() < 1e-15);
    assert!((zeta_inverse(2, 2).unwrap() - 0.375).abs() < 1e-15);
    assert!(zeta_inverse(997, 2).unwrap() >= 0.998);
    assert!(matches!(zeta_inverse(3, 1), Err(Error::ZetaPole(1))));
}

#[test]
fn content_fixtures() {
    let f = |c: &[i64]| IntForm::from_i64(c);
    // coefficient index is the power of z0
    let (v, r) = content_and_reduction(&f(&[4, 2]), 2).unwrap();
    assert_eq!((v, r.coeffs()), (1, &[0u64, 1][..]));
    let (v, r) = content_and_reduction(&f(&[1, 1]), 7).unwrap();
    assert_eq!((v, r.coeffs()), (0, &[1u64, 1][..]));
    let (v, r) = content_and_reduction(&f(&[0, 0, 12]), 2).unwrap();
    assert_eq!((v, r.coeffs()), (2, &[0u64, 0, 1][..]));
    assert!(!r.is_zero());
    assert!(content_and_reduction(&f(&[0, 0]), 3).is_err());
}

#[test]
fn content_divisibility_density() {
    let big = 10i64;
    for p in [2u64, 3] {
        for n in 2..=3usize {
            let width = (2 * big + 1) as usize;
            let total = width.pow(n as u32 + 1);
            let mut hits = 0usize;
            let mut seen = 0usize;
            for idx in 0..total {
                let mut r = idx;
                let coeffs: Vec<i64> = (0..=n)
                    .map(|_| {
                        let c = (r % width) as i64 - big;
                        r /= width;
                        c
                    })
                    .collect();
                if coeffs.iter().all(|&c| c == 0) {
                    continue;
                }
                seen += 1;
                if content_and_reduction(&IntForm::from_i64(&coeffs), p).unwrap().0 >= 1 {
                    hits += 1;
                }
            }
            let rho = hits as f64 / seen as f64;
            let limit = (1.0 / p as f64).powi(n as i32 + 1);
            assert!((rho - limit).abs() <= 0.02, "p = {p}, n = {n}: {rho} vs {limit}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn smoothness_is_pgl2_invariant(
        p in prop::sample::select(vec![2u64, 3, 5, 7]),
        c in prop::collection::vec(0u64..7, 2..8),
        m in prop::array::uniform4(0u64..7),
    ) {
        let fp = field(p);
        let f = FpForm::new(fp, c);
        prop_assume!(!f.is_zero());
        let det = (m[0] % p * (m[3] % p) + p * p - m[1] % p * (m[2] % p)) % p;
        prop_assume!(det != 0);
        let g = f.substitute(m);
        prop_assert!(!g.is_zero());
        prop_assert_eq!(is_smooth_divisor(&f).unwrap(), is_smooth_divisor(&g).unwrap());
    }

    #[test]
    fn smoothness_matches_naive(
        p in prop::sample::select(vec![2u64, 3, 5, 7, 11]),
        c in prop::collection::vec(0u64..11, 2..9),
    ) {
        let f = FpForm::new(field(p), c);
        prop_assume!(!f.is_zero());
        prop_assert_eq!(is_smooth_divisor(&f).unwrap(), is_smooth_divisor_naive(&f).unwrap());
    }
}
