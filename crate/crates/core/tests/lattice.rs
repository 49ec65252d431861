use approx::assert_relative_eq;
use arakelov_demailly::bergman::{demailly_schedule, real_section, ScheduleConfig};
use arakelov_demailly::finite_field::is_smooth_divisor;
use arakelov_demailly::form::{IntForm, RealForm};
use arakelov_demailly::lattice::{
    ball_count, ball_growth_ratio, count_small_sections, density_transfer_check, restriction_kernel_density,
    round_to_integral, rounding_bound, sampled_kernel_density, successive_minima_estimate, volume_estimate, Constraint,
    MinimaMode, SectionLattice,
};
use arakelov_demailly::projective::{l1_log_norm_scaled, sup_norm, MetricData, QuadratureGrid};
use arakelov_demailly::Error;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fs(n: usize) -> SectionLattice {
    SectionLattice::new(n, MetricData::fubini_study()).unwrap()
}

fn zero(n: usize) -> RealForm {
    RealForm::zero(n)
}

#[test]
fn ball_count_fixtures() {
    let lat = fs(1);
    assert_eq!(ball_count(&lat, &zero(1), 1.0).unwrap().count, 5);
    assert_eq!(ball_count(&lat, &zero(1), 2.0).unwrap().count, 13);
    assert_eq!(ball_count(&lat, &zero(1), 1.9).unwrap().count, 9);
    let shifted = RealForm::new(vec![1.0, 1.0]);
    assert_eq!(ball_count(&lat, &shifted, 1.0).unwrap().count, 5);
    assert!(ball_count(&lat, &zero(1), 1.0).unwrap().enumerated);
    // (13 - 9) / 5 would need radius 1.9 < 2; count(1.9) = 9 gives (9 - 5) / 5
    assert_relative_eq!(
        ball_growth_ratio(&lat, &zero(1), 1.0, 0.9).unwrap(),
        0.8,
        epsilon = 1e-15
    );
    assert_eq!(ball_growth_ratio(&lat, &zero(1), 1.0, 0.0).unwrap(), 0.0);
    // z0^2 +- z0 z1 - z1^2 and negatives have sup sqrt(5)/2 < 1 + e^-2
    let growth = |n: usize| ball_growth_ratio(&fs(n), &zero(n), 1.0, (-(n as f64)).exp()).unwrap();
    assert_eq!(growth(2), 4.0 / 13.0);
    assert_eq!(growth(1), 0.0);
    assert_eq!(growth(3), 0.0);
}

#[test]
fn too_large_for_exhaustion() {
    let lat = fs(9);
    assert!(matches!(
        ball_count(&lat, &zero(9), 1.0),
        Err(Error::DimensionTooLarge(9))
    ));
    assert!(matches!(
        successive_minima_estimate(&lat, MinimaMode::Exhaustive),
        Err(Error::DimensionTooLarge(9))
    ));
}

#[test]
fn restriction_density_fixtures() {
    let lat = fs(1);
    let v = restriction_kernel_density(&lat, &Constraint::VanishAt(0, 1), &zero(1), 2.0).unwrap();
    assert_eq!((v.hits, v.total), (5, 13));
    let d = restriction_kernel_density(&lat, &Constraint::DivisibleBy(2), &zero(1), 2.0).unwrap();
    assert_eq!((d.hits, d.total), (5, 13));
    assert_eq!(d.density, 5.0 / 13.0);
    // coarse bound on the divisibility density
    let lambda1 = successive_minima_estimate(&lat, MinimaMode::Exhaustive).unwrap()[0];
    let bound = (2.0 * 2.0 / (2.0 * lambda1) + 1.0f64).powi(2) / 13.0;
    assert!(d.density <= bound);

    // vanishing at [1:1] gets rarer as n grows
    let mut prev = 1.0;
    for n in 1..=4 {
        let k = restriction_kernel_density(&fs(n), &Constraint::VanishAt(1, 1), &zero(n), 2.0).unwrap();
        assert!(k.density < prev, "n = {n}: {} !< {prev}", k.density);
        prev = k.density;
    }
}

#[test]
fn density_transfer_fixtures() {
    let lat = fs(1);
    let (up, down) = density_transfer_check(&lat, 2, |f| !f.is_zero(), &zero(1), 2.0).unwrap();
    // the 13 points reduce to zero mod 2 exactly for the 5 even ones
    assert_eq!(up, 8.0 / 13.0);
    assert_eq!(down, 0.75);
    let (up, down) = density_transfer_check(&lat, 2, |_| true, &zero(1), 2.0).unwrap();
    assert_eq!((up, down), (1.0, 1.0));
    let smooth = |f: &arakelov_demailly::finite_field::FpForm| is_smooth_divisor(f).unwrap_or(false);
    let (up, down) = density_transfer_check(&fs(4), 3, smooth, &zero(4), 3.0).unwrap();
    assert!((up - down).abs() <= 0.15, "{up} vs {down}");
}

#[test]
fn small_sections_and_volume() {
    let counts: Vec<u64> = (1..=5).map(|n| count_small_sections(&fs(n)).unwrap().count).collect();
    assert_eq!(counts, [5, 13, 29, 193, 1657]);
    let s0 = count_small_sections(&fs(0)).unwrap();
    assert_eq!(s0.count, 3);
    let tw = SectionLattice::new(1, MetricData::twisted(1.0)).unwrap();
    // a^2 + b^2 <= e^2
    assert_eq!(count_small_sections(&tw).unwrap().count, 21);
    assert_relative_eq!(count_small_sections(&fs(1)).unwrap().h0, 5f64.ln(), epsilon = 1e-15);

    let v1 = volume_estimate(&MetricData::twisted(0.2), &[2, 3]).unwrap();
    let v2 = volume_estimate(&MetricData::twisted(0.4), &[2, 3]).unwrap();
    for (a, b) in v1.iter().zip(&v2) {
        assert!(b.normalized > a.normalized);
        assert!(a.normalized.is_finite() && a.normalized < 10.0);
    }
}

#[test]
fn minima_fixtures() {
    let m = successive_minima_estimate(&fs(1), MinimaMode::Exhaustive).unwrap();
    assert_relative_eq!(m[0], 1.0, epsilon = 1e-9);
    assert_relative_eq!(m[1], 1.0, epsilon = 1e-9);
    let eps = 0.4;
    let t = successive_minima_estimate(
        &SectionLattice::new(1, MetricData::twisted(eps)).unwrap(),
        MinimaMode::Exhaustive,
    )
    .unwrap();
    assert_relative_eq!(t[0], (-eps).exp(), max_relative = 1e-9);
    assert_relative_eq!(t[1], (-eps).exp(), max_relative = 1e-9);

    // rescaling and monotonicity at n = 3
    let a = successive_minima_estimate(&fs(3), MinimaMode::Exhaustive).unwrap();
    let b = successive_minima_estimate(
        &SectionLattice::new(3, MetricData::twisted(0.2)).unwrap(),
        MinimaMode::Exhaustive,
    )
    .unwrap();
    assert!(a.windows(2).all(|w| w[0] <= w[1]));
    for (x, y) in a.iter().zip(&b) {
        assert_relative_eq!(*y, x * (-0.6f64).exp(), max_relative = 1e-9);
    }
    let r = successive_minima_estimate(&fs(3), MinimaMode::Reduction).unwrap();
    for (x, y) in a.iter().zip(&r) {
        assert!(*y >= x * (1.0 - 1e-9));
    }
}

#[test]
fn last_minimum_decays_with_twist() {
    let ns = [2usize, 4, 6];
    let logs: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let lat = SectionLattice::new(n, MetricData::twisted(0.3)).unwrap();
            let m = successive_minima_estimate(&lat, MinimaMode::Exhaustive).unwrap();
            m.last().unwrap().ln()
        })
        .collect();
    let xm = ns.iter().sum::<usize>() as f64 / 3.0;
    let ym = logs.iter().sum::<f64>() / 3.0;
    let num: f64 = ns.iter().zip(&logs).map(|(&x, y)| (x as f64 - xm) * (y - ym)).sum();
    let den: f64 = ns.iter().map(|&x| (x as f64 - xm).powi(2)).sum();
    let slope = num / den;
    assert!(slope <= -0.3 * 0.8, "slope {slope}");
}

#[test]
fn rounding_fixtures() {
    let lat = fs(1);
    let (r, d) = round_to_integral(&RealForm::new(vec![0.6, 1.4]), &lat).unwrap();
    assert_eq!(r, IntForm::from_i64(&[1, 1]));
    assert!(d <= 0.8);
    let (r, d) = round_to_integral(&RealForm::new(vec![3.0, -2.0]), &lat).unwrap();
    assert_eq!((r, d), (IntForm::from_i64(&[3, -2]), 0.0));
    let (r, _) = round_to_integral(&RealForm::new(vec![0.5, -2.5]), &lat).unwrap();
    assert_eq!(r, IntForm::from_i64(&[0, -2]));

    let lat10 = SectionLattice::new(10, MetricData::twisted(0.2)).unwrap();
    assert!(rounding_bound(&lat10) <= 5.5 * (-2.0f64).exp());
}

#[test]
fn rounding_bound_on_random_sections() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (n, eps) in [(3, 0.0), (10, 0.2)] {
        let lat = SectionLattice::new(n, MetricData::twisted(eps)).unwrap();
        let bound = rounding_bound(&lat);
        for _ in 0..1000 {
            let s = RealForm::new((0..=n).map(|_| rng.random_range(-20.0..20.0)).collect());
            let (_, d) = round_to_integral(&s, &lat).unwrap();
            assert!(d <= bound, "n = {n}: {d} > {bound}");
        }
    }
}

#[test]
fn translation_invariance_on_random_centers() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [1usize, 2] {
        let lat = fs(n);
        let base = ball_count(&lat, &zero(n), 2.0).unwrap().count;
        for _ in 0..100 {
            let c = RealForm::new((0..=n).map(|_| rng.random_range(-40i64..=40) as f64).collect());
            assert_eq!(ball_count(&lat, &c, 2.0).unwrap().count, base);
        }
    }
}

#[test]
fn sampled_mode() {
    let lat = fs(2);
    let k = Constraint::VanishAt(1, -1);
    let exact = restriction_kernel_density(&lat, &k, &zero(2), 3.0).unwrap();
    let s = sampled_kernel_density(&lat, &k, &zero(2), 3.0, 50_000, 3).unwrap();
    assert!((s.density - exact.density).abs() <= 3.0 * s.ci_halfwidth.max(1e-3));
    assert_eq!(s, sampled_kernel_density(&lat, &k, &zero(2), 3.0, 50_000, 3).unwrap());
    let big = SectionLattice::new(12, MetricData::twisted(0.1)).unwrap();
    let s = sampled_kernel_density(&big, &Constraint::DivisibleBy(2), &zero(12), 1.0, 2_000, 1).unwrap();
    assert!(s.accepted > 0 && s.density <= 1.0);
}

#[test]
fn rounded_demailly_stages() {
    let q = QuadratureGrid::fibonacci(100_000).unwrap();
    let m = MetricData::twisted(0.2);
    let cfg = ScheduleConfig {
        tolerances: vec![0.2, 0.1],
        ..ScheduleConfig::default()
    };
    let seq = demailly_schedule(&m, &q, &cfg).unwrap();
    let last = seq.stages.last().unwrap();
    let deg = last.degree();
    let real = real_section(last.section()).unwrap();
    let scale = real.max_abs();
    // put the real section on the lattice scale, where coefficients are large
    let lat = SectionLattice::new(deg, m.clone()).unwrap();
    let (int, d) = round_to_integral(&real, &lat).unwrap();
    assert!(scale > 1.0);
    let sup = sup_norm(&int, &m, &q).unwrap();
    assert!(sup >= (-0.1f64).exp() && sup <= 1.0 + rounding_bound(&lat), "sup {sup}");
    assert!(d <= rounding_bound(&lat));
    let l1 = l1_log_norm_scaled(&int, &m, &q, 1.0 / deg as f64).unwrap();
    assert!(l1 <= last.tolerance + d.ln_1p() / deg as f64 + 1e-9, "l1 {l1}");
    assert!(int.coeffs().iter().any(|c| c.to_f64().unwrap().abs() > 1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn counts_are_symmetric_under_negation(c in prop::collection::vec(-3.0..3.0f64, 3), r in 0.5..2.5f64) {
        let lat = fs(2);
        let a = ball_count(&lat, &RealForm::new(c.clone()), r).unwrap().count;
        let b = ball_count(&lat, &RealForm::new(c.iter().map(|x| -x).collect()), r).unwrap().count;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn counts_grow_with_radius(r in 0.1..2.5f64, dr in 0.0..1.0f64) {
        let lat = fs(2);
        let a = ball_count(&lat, &zero(2), r).unwrap().count;
        let b = ball_count(&lat, &zero(2), r + dr).unwrap().count;
        prop_assert!(a <= b);
        prop_assert!(a >= 1);
    }
}
