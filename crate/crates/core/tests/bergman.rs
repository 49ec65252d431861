use std::sync::OnceLock;

use approx::assert_relative_eq;
use arakelov_demailly::bergman::{
    bergman_kernel, conjugate_form, demailly_schedule, max_kernel, orthonormalize, power_sum_section,
    power_sum_section_exact, realify, ScheduleConfig,
};
use arakelov_demailly::form::ComplexForm;
use arakelov_demailly::projective::{
    l1_log_norm, l2_inner, log_norms_on_grid, sup_norm, MetricData, PerturbationTerm, ProjectivePoint, QuadratureGrid,
};
use arakelov_demailly::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn grid() -> &'static QuadratureGrid {
    static G: OnceLock<QuadratureGrid> = OnceLock::new();
    G.get_or_init(|| QuadratureGrid::fibonacci(100_000).unwrap())
}

fn small_grid() -> &'static QuadratureGrid {
    static G: OnceLock<QuadratureGrid> = OnceLock::new();
    G.get_or_init(|| QuadratureGrid::fibonacci(4_000).unwrap())
}

fn bumpy() -> MetricData {
    MetricData::new(vec![PerturbationTerm::new(1, 1, 2, 0.15).unwrap()], 0.0, grid()).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

#[test]
fn orthonormal_bases_under_fs() {
    let fs = MetricData::fubini_study();
    let q = grid();
    let b1 = orthonormalize(1, &fs, q).unwrap();
    assert!(b1.gram_residual() <= 1e-8);
    // the two sections are sqrt(2) z0 and sqrt(2) z1 up to a unitary mix
    let mut total = [0.0; 2];
    for s in b1.sections() {
        for (k, t) in total.iter_mut().enumerate() {
            *t += s.coeff(k).norm_sqr();
        }
    }
    assert_relative_eq!(total[0], 2.0, epsilon = 1e-6);
    assert_relative_eq!(total[1], 2.0, epsilon = 1e-6);

    let b5 = orthonormalize(5, &fs, q).unwrap();
    assert_eq!(b5.sections().len(), 6);
    for s in b5.sections() {
        assert_relative_eq!(l2_inner(s, s, &fs, q).unwrap().re, 1.0, epsilon = 1e-8);
    }

    // FS orthonormal basis is the scaled monomial basis
    let b2 = orthonormalize(2, &fs, q).unwrap();
    for (k, s) in b2.sections().iter().enumerate() {
        let expected = (3.0 * binom(2, k)).sqrt();
        assert_relative_eq!(s.coeff(k).norm(), expected, max_relative = 1e-5);
        assert!(s.coeff(k).im.abs() < 1e-12 && s.coeff(k).re > 0.0);
    }
}

#[test]
fn kernels_under_fs() {
    let fs = MetricData::fubini_study();
    let q = grid();
    for n in [1, 4, 9] {
        let b = orthonormalize(n, &fs, q).unwrap();
        for x in q.points().iter().step_by(1009) {
            assert_relative_eq!(bergman_kernel(&b, x, &fs), (n + 1) as f64, max_relative = 1e-6);
        }
    }
    let b1 = orthonormalize(1, &fs, q).unwrap();
    let pole = ProjectivePoint::real(1.0, 0.0).unwrap();
    assert_relative_eq!(max_kernel(&b1, &pole, &fs), 2.0, epsilon = 1e-6);
    let b2 = orthonormalize(2, &fs, q).unwrap();
    let mid = ProjectivePoint::real(1.0, 1.0).unwrap();
    assert_relative_eq!(max_kernel(&b2, &mid, &fs), 1.5, epsilon = 1e-6);
}

#[test]
fn twist_leaves_the_kernel_invariant() {
    let q = grid();
    let b0 = orthonormalize(6, &MetricData::fubini_study(), q).unwrap();
    let m = MetricData::twisted(0.7);
    let bt = orthonormalize(6, &m, q).unwrap();
    for x in q.points().iter().step_by(2003) {
        let a = bergman_kernel(&b0, x, &MetricData::fubini_study());
        assert_relative_eq!(bergman_kernel(&bt, x, &m), a, max_relative = 1e-8);
    }
}

#[test]
fn perturbed_kernel_sandwich_and_positivity() {
    let q = grid();
    let m = bumpy();
    for n in [5, 12, 20] {
        let b = orthonormalize(n, &m, q).unwrap();
        assert!(b.gram_residual() <= 1e-8);
        for x in q.points().iter().step_by(97) {
            let bn = bergman_kernel(&b, x, &m);
            let un = max_kernel(&b, x, &m);
            assert!(bn > 0.0);
            let r = bn / un;
            assert!(
                (1.0 - 1e-12..=(n + 1) as f64 * (1.0 + 1e-12)).contains(&r),
                "n={n}: {r}"
            );
        }
        // Gromov chain: 1 = ||sigma||_2 <= ||sigma||_inf
        for s in b.sections() {
            assert!(sup_norm(s, &m, q).unwrap() >= 1.0 - 1e-9);
        }
    }
}

#[test]
fn kernel_density_of_states_trend() {
    let q = grid();
    let m = bumpy();
    let mut prev = f64::INFINITY;
    let mut last = 0.0;
    for n in [5, 10, 20, 40] {
        let b = orthonormalize(n, &m, q).unwrap();
        let (logb, _) = b.log_kernels_on_grid(q);
        let r = ((n + 1) as f64).ln();
        let dev = logb.iter().map(|l| ((l - r) / n as f64).abs()).fold(0.0, f64::max);
        assert!(dev <= prev * 1.1, "n = {n}: {dev} after {prev}");
        prev = dev;
        last = dev;
    }
    assert!(last < 0.05, "{last}");
}

#[test]
fn power_sums() {
    let fs = MetricData::fubini_study();
    let q = grid();
    let b1 = orthonormalize(1, &fs, q).unwrap();
    let s = power_sum_section(&b1, 2).unwrap();
    assert_relative_eq!(s.coeff(0).re, 2.0, epsilon = 1e-6);
    assert!(s.coeff(1).norm() < 1e-6);
    assert_relative_eq!(s.coeff(2).re, 2.0, epsilon = 1e-6);
    assert_relative_eq!(sup_norm(&s, &fs, q).unwrap(), 2.0, epsilon = 1e-5);

    let b3 = orthonormalize(3, &bumpy(), q).unwrap();
    let lin = power_sum_section(&b3, 1).unwrap();
    let direct = b3
        .sections()
        .iter()
        .skip(1)
        .fold(b3.sections()[0].clone(), |a, x| a.try_add(x).unwrap());
    for k in 0..=3 {
        assert!((lin.coeff(k) - direct.coeff(k)).norm() < 1e-12);
    }
    let exact = power_sum_section_exact(&b3, 5).unwrap();
    let float = power_sum_section(&b3, 5).unwrap();
    for k in 0..=15 {
        assert!((exact.coeff(k) - float.coeff(k)).norm() <= 1e-9 * exact.max_abs());
    }
}

#[test]
fn power_sum_tracks_max_kernel_in_ell() {
    let q = grid();
    let m = bumpy();
    let n = 6;
    let b = orthonormalize(n, &m, q).unwrap();
    let (_, logu) = b.log_kernels_on_grid(q);
    let mut prev = f64::INFINITY;
    for ell in [1u32, 2, 4, 8, 16] {
        let s = power_sum_section(&b, ell).unwrap();
        let logs = log_norms_on_grid(&s, &m, q);
        let gap = q.integrate(|i, _| (logs[i] / ell as f64 - 0.5 * logu[i]).abs());
        assert!(gap <= prev * 1.1, "ell = {ell}: {gap} after {prev}");
        prev = gap;
    }
}

#[test]
fn conjugation_and_realification() {
    let f = ComplexForm::new(vec![c(0.0, 0.0), c(1.0, 1.0)]);
    let g = ComplexForm::new(vec![c(1.0, 0.0), c(1.0, 1.0)]);
    assert_eq!(conjugate_form(&g).coeffs(), &[c(1.0, 0.0), c(1.0, -1.0)]);
    assert_eq!(conjugate_form(&conjugate_form(&g)), g);
    let real = ComplexForm::new(vec![c(2.0, 0.0), c(-1.0, 0.0)]);
    assert_eq!(conjugate_form(&real), real);
    // ((1+i) z0 + z1)((1-i) z0 + z1)
    let r = realify(&g).unwrap();
    assert_eq!(r.coeffs(), &[1.0, 2.0, 2.0]);
    assert_eq!(
        realify(&ComplexForm::new(vec![c(0.0, 0.0), c(1.0, 0.0)]))
            .unwrap()
            .coeffs(),
        &[0.0, 0.0, 1.0]
    );
    assert!(realify(&ComplexForm::zero(2)).is_err());
    let fs = MetricData::fubini_study();
    let q = grid();
    let rf = realify(&f.try_add(&g).unwrap()).unwrap();
    let sf = sup_norm(&f.try_add(&g).unwrap(), &fs, q).unwrap();
    assert!(sup_norm(&rf, &fs, q).unwrap() <= sf * sf * (1.0 + 1e-9));
}

#[test]
fn schedule_under_fs() {
    let q = grid();
    let cfg = ScheduleConfig {
        tolerances: vec![0.2, 0.1],
        ..ScheduleConfig::default()
    };
    let seq = demailly_schedule(&MetricData::fubini_study(), q, &cfg).unwrap();
    assert_eq!(seq.stages.len(), 2);
    for (s, tol) in seq.stages.iter().zip([0.2, 0.1]) {
        assert!((s.sup_norm_value - 1.0).abs() <= 1e-9);
        assert!(s.l1_value <= tol, "{} > {tol}", s.l1_value);
        assert_eq!(s.section().degree(), s.n * s.ell as usize);
    }
    assert!(seq.stages[1].l1_value <= seq.stages[0].l1_value * 1.1);

    let tight = ScheduleConfig {
        tolerances: vec![0.2, 0.01],
        n_max: 20,
        ..ScheduleConfig::default()
    };
    match demailly_schedule(&MetricData::fubini_study(), q, &tight) {
        Err(Error::ScheduleExhausted { best, .. }) => assert_eq!(best.unwrap().index, 0),
        other => panic!("expected exhaustion, got {other:?}"),
    }
    let bad = ScheduleConfig {
        tolerances: vec![0.1, 0.2],
        ..ScheduleConfig::default()
    };
    assert!(demailly_schedule(&MetricData::fubini_study(), q, &bad).is_err());
}

#[test]
fn fs_max_kernel_l1_decreases() {
    let q = grid();
    let fs = MetricData::fubini_study();
    let mut prev = f64::INFINITY;
    for n in [1, 2, 4, 8, 16] {
        let b = orthonormalize(n, &fs, q).unwrap();
        let (_, logu) = b.log_kernels_on_grid(q);
        let v = q.integrate(|i, _| (logu[i] / (2 * n) as f64).abs());
        assert!(v < prev);
        prev = v;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn realify_is_conjugation_symmetrized(a in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 4)) {
        let f = ComplexForm::new(a.iter().map(|&(x, y)| c(x, y)).collect());
        prop_assume!(f.max_abs() > 1e-2);
        let m = MetricData::fubini_study();
        let q = small_grid();
        let logs = log_norms_on_grid(&f, &m, q);
        // grid point 2j + 1 is the conjugate of point 2j
        let sym = q.integrate(|i, _| (logs[i] + logs[i ^ 1]).abs());
        let r = realify(&f).unwrap();
        prop_assert!((l1_log_norm(&r, &m, q).unwrap() - sym).abs() <= 1e-9);
    }
}
