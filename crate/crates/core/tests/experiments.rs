use std::f64::consts::LN_2;
use std::sync::OnceLock;

use arakelov_demailly::arakelov::{decompose_divisor, height_of_point, ClosedPoint, HermitianBundle};
use arakelov_demailly::bergman::ScheduleConfig;
use arakelov_demailly::experiments::{
    ess_sup_inf_estimate, essmin_experiment, good_section_search, min_height_point, EssMinConfig, EssMinReport,
    GoodSectionCriteria,
};
use arakelov_demailly::factor::factor_form;
use arakelov_demailly::form::IntForm;
use arakelov_demailly::lattice::SectionLattice;
use arakelov_demailly::projective::{MetricData, QuadratureGrid};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn grid() -> &'static QuadratureGrid {
    static G: OnceLock<QuadratureGrid> = OnceLock::new();
    G.get_or_init(|| QuadratureGrid::fibonacci(100_000).unwrap())
}

fn form(c: &[i64]) -> IntForm {
    IntForm::from_i64(c)
}

fn fs2() -> SectionLattice {
    SectionLattice::new(2, MetricData::fubini_study()).unwrap()
}

fn p(x0: i64, x1: i64) -> ClosedPoint {
    ClosedPoint::rational(x0, x1).unwrap()
}

#[test]
fn good_section_fixtures() {
    let center = form(&[0, 1, 0]);
    // vanishing at [1:0] means a zero z0^2 coefficient
    let crit = GoodSectionCriteria {
        avoid_set: vec![p(1, 0)],
        ball_radius: 1.2,
        ..Default::default()
    };
    let g = good_section_search(&center, &fs2(), &crit).unwrap();
    assert_eq!(g.section, form(&[0, 1, -1]));
    assert_eq!(g.distance, 1.0);
    assert_eq!((g.rates.candidates, g.rates.all), (6, 1));

    let none = GoodSectionCriteria {
        ball_radius: 1.2,
        ..Default::default()
    };
    let g = good_section_search(&center, &fs2(), &none).unwrap();
    assert_eq!((g.section, g.distance), (center.clone(), 0.0));

    let content = GoodSectionCriteria {
        require_no_vertical: true,
        ball_radius: 1.2,
        ..Default::default()
    };
    let doubled = form(&[0, 2, 0]);
    let g = good_section_search(&doubled, &fs2(), &content).unwrap();
    assert_ne!(g.section, doubled);
    assert!(g.section.content().is_one());

    // radius too small for any passing point
    let tight = GoodSectionCriteria {
        avoid_set: vec![p(1, 0)],
        ball_radius: 0.1,
        ..Default::default()
    };
    assert!(good_section_search(&center, &fs2(), &tight).is_err());
}

#[test]
fn min_height_fixtures() {
    let b = HermitianBundle::fubini_study();
    let (pt, h) = min_height_point(&decompose_divisor(&form(&[0, -1, 1])).unwrap(), &b).unwrap();
    assert_eq!((pt.form(), h), (&form(&[0, 1]), 0.0));
    // z0 z1: both coordinate points have height 0; z0 is lexicographically first
    let (pt, h) = min_height_point(&decompose_divisor(&form(&[0, 1, 0])).unwrap(), &b).unwrap();
    assert_eq!((pt.form(), h), (&form(&[0, 1]), 0.0));
    let (pt, h) = min_height_point(&decompose_divisor(&form(&[1, 0, 1])).unwrap(), &b).unwrap();
    assert_eq!(pt.form(), &form(&[1, 0, 1]));
    assert!((h - 0.5 * LN_2).abs() < 1e-9);
}

#[test]
fn sup_inf_fixtures() {
    let a = (p(1, 1), 0.5 * LN_2);
    let b = (p(1, 0), 0.0);
    assert_eq!(ess_sup_inf_estimate(std::slice::from_ref(&a), &[]).unwrap(), a.1);
    let pts = [a.clone(), b.clone()];
    let base = ess_sup_inf_estimate(&pts, &[]).unwrap();
    assert_eq!(base, 0.0);
    let raised = ess_sup_inf_estimate(&pts, &[vec![b.0.clone()]]).unwrap();
    assert!(raised >= base);
    assert_eq!(raised, a.1);
    assert!(ess_sup_inf_estimate(&[], &[]).is_err());

    // points of t^12 - 1 under FS
    let fsb = HermitianBundle::fubini_study();
    let mut c = vec![0i64; 13];
    c[0] = 1;
    c[12] = -1;
    let pts: Vec<(ClosedPoint, f64)> = decompose_divisor(&form(&c))
        .unwrap()
        .horizontal
        .into_iter()
        .map(|h| {
            let v = height_of_point(&h.point, &fsb);
            (h.point, v)
        })
        .collect();
    let history: Vec<Vec<ClosedPoint>> = vec![vec![p(1, 1)], vec![p(1, 1), p(1, -1)]];
    let e = ess_sup_inf_estimate(&pts, &history).unwrap();
    assert!((0.0..=0.5 * LN_2 + 1e-12).contains(&e), "{e}");
}

/// Content, squarefreeness and avoidance recomputed without the search code.
fn independently_good(f: &IntForm, avoid: &[ClosedPoint]) -> bool {
    let content = f.coeffs().iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    let fac = factor_form(f).unwrap();
    let avoid_ok = avoid.iter().all(|x| match x.as_rational() {
        Some((a, b)) => !f.eval(&a, &b).is_zero(),
        None => fac.factors.iter().all(|(g, _)| g != x.form()),
    });
    content.is_one() && fac.factors.iter().all(|(_, m)| *m == 1) && avoid_ok
}

fn check_report(r: &EssMinReport, cfg: &EssMinConfig) {
    assert!(!r.stages.is_empty());
    for s in &r.stages {
        assert!(
            independently_good(&s.section, &cfg.criteria.avoid_set),
            "stage {}",
            s.index
        );
        assert_eq!(s.section.degree(), s.degree);
        assert!(s.min_height >= -1e-12);
        assert_eq!(s.vertical.violations, 0);
    }
    let k = r.window.min(r.stages.len());
    let tail = r.stages[r.stages.len() - k..]
        .iter()
        .map(|s| s.min_height)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(r.liminf_estimate, tail);
    assert_eq!(r.rhs, r.stages.last().unwrap().stage_rhs);
}

#[test]
fn essmin_inequality_at_desk_scale() {
    let cfg = EssMinConfig::new(HermitianBundle::twisted(0.2), HermitianBundle::fubini_study());
    let r = essmin_experiment(&cfg, grid()).unwrap();
    check_report(&r, &cfg);
    assert!(r.inequality_holds);
    assert!(r.liminf_estimate <= r.rhs + 0.05, "{} vs {}", r.liminf_estimate, r.rhs);
    // L(0.2) . N = 1/2 + 0.2
    assert!((r.rhs - 0.7).abs() <= 5e-3, "{}", r.rhs);
    let rem: Vec<f64> = r.stages.iter().map(|s| s.archimedean_remainder.abs()).collect();
    for w in rem.windows(2) {
        assert!(w[1] <= w[0] * 1.1, "{rem:?}");
    }
    assert!(*rem.last().unwrap() <= 0.05, "{rem:?}");
    assert!(r.ess_estimate >= r.stages.iter().map(|s| s.min_height).fold(f64::INFINITY, f64::min));
}

#[test]
fn essmin_with_equal_bundles_and_avoid_set() {
    let l = HermitianBundle::twisted(0.2);
    let mut cfg = EssMinConfig::new(l.clone(), l);
    cfg.schedule = ScheduleConfig {
        tolerances: vec![0.2, 0.1],
        ..ScheduleConfig::default()
    };
    let avoid = vec![p(1, 0), p(1, 1)];
    cfg.criteria = GoodSectionCriteria::all(avoid.clone(), 1.0);
    let r = essmin_experiment(&cfg, grid()).unwrap();
    check_report(&r, &cfg);
    // L(0.2) . L(0.2) = 1/2 + 0.4, heights at least the twist
    assert!((r.rhs - 0.9).abs() <= 5e-3, "{}", r.rhs);
    for s in &r.stages {
        assert!(s.min_height >= 0.2 - 1e-12);
        assert!(avoid.iter().all(|x| x.form().to_string() != s.min_height_point));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn min_height_point_ignores_sign(c in prop::collection::vec(-7i64..=7, 2..6)) {
        let f = form(&c);
        prop_assume!(!f.is_zero() && f.degree() > 0);
        let b = HermitianBundle::twisted(0.1);
        let a = min_height_point(&decompose_divisor(&f).unwrap(), &b).unwrap();
        let n = min_height_point(&decompose_divisor(&f.scale(&BigInt::from(-1))).unwrap(), &b).unwrap();
        prop_assert_eq!(a.0.form(), n.0.form());
        prop_assert_eq!(a.1, n.1);
    }
}
