//! Quick invariant suite behind `demailly-lab verify`.
//!
//! Every check compares a computed value with an independent oracle.

use std::f64::consts::LN_2;

use num_bigint::BigInt;
use serde::Serialize;

use crate::arakelov::{
    height_of_point, intersection_via_section, rational_point_height, vertical_prime_check, ClosedPoint,
    HermitianBundle,
};
use crate::bergman::{bergman_kernel, orthonormalize};
use crate::error::Result;
use crate::factor::factor_form;
use crate::finite_field::{
    for_each_nonzero_form, is_smooth_divisor, is_smooth_divisor_naive, smooth_divisor_density, zeta_inverse, PrimeField,
};
use crate::form::{IntForm, RealForm};
use crate::lattice::{
    ball_count, restriction_kernel_density, round_to_integral, rounding_bound, Constraint, SectionLattice,
};
use crate::projective::{l2_inner, MetricData, QuadratureGrid};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &'static str, value: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            expected,
            tolerance,
            pass: (value - expected).abs() <= tolerance,
        }
    }

    /// One-sided: passes when `value <= bound`.
    fn at_most(name: &'static str, value: f64, bound: f64) -> Self {
        Self {
            name,
            value,
            expected: bound,
            tolerance: 0.0,
            pass: value <= bound,
        }
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

pub fn invariant_suite(q: &QuadratureGrid) -> Result<Vec<Check>> {
    let fs = MetricData::fubini_study();
    let mut out = Vec::new();

    let n = 5;
    let basis = orthonormalize(n, &fs, q)?;
    let dev = q
        .points()
        .iter()
        .map(|x| (bergman_kernel(&basis, x, &fs) / (n + 1) as f64 - 1.0).abs())
        .fold(0.0, f64::max);
    out.push(Check::at_most("bergman_balanced_n5", dev, 1e-3));

    let mut worst = 0.0f64;
    for k in 0..=n {
        let m = RealForm::monomial(n, k, 1.0);
        let v = l2_inner(&m, &m, &fs, q)?.re;
        let exact = factorial(k) * factorial(n - k) / factorial(n + 1);
        worst = worst.max((v / exact - 1.0).abs());
    }
    out.push(Check::at_most("monomial_l2_beta_n5", worst, 1e-3));

    let lat = SectionLattice::new(1, fs.clone())?;
    let zero = RealForm::zero(1);
    out.push(Check::new(
        "ball_count_n1_r1",
        ball_count(&lat, &zero, 1.0)?.count as f64,
        5.0,
        0.0,
    ));
    out.push(Check::new(
        "ball_count_n1_r2",
        ball_count(&lat, &zero, 2.0)?.count as f64,
        13.0,
        0.0,
    ));
    let kd = restriction_kernel_density(&lat, &Constraint::DivisibleBy(2), &zero, 2.0)?;
    out.push(Check::new("divisible2_density_n1_r2", kd.density, 5.0 / 13.0, 0.0));

    let lat10 = SectionLattice::new(10, MetricData::twisted(0.2))?;
    let s = RealForm::new((0..=10).map(|k| ((k * 7919) % 13) as f64 / 3.0 - 2.0).collect());
    let (_, dist) = round_to_integral(&s, &lat10)?;
    out.push(Check::at_most("rounding_bound_n10", dist, rounding_bound(&lat10)));

    let field = PrimeField::new(3)?;
    let mut disagreements = 0u32;
    for_each_nonzero_form(field, 4, |f| {
        if is_smooth_divisor(f).ok() != is_smooth_divisor_naive(f).ok() {
            disagreements += 1;
        }
    });
    out.push(Check::new("smoothness_oracle_p3_n4", disagreements as f64, 0.0, 0.0));
    let d = smooth_divisor_density(5, 6)?;
    out.push(Check::new("density_p5_n6", d.density(), zeta_inverse(5, 2)?, 0.05));

    let fs1 = HermitianBundle::fubini_study();
    let h0 = rational_point_height(&BigInt::from(1), &BigInt::from(0), &fs1)?;
    out.push(Check::new("height_1_0", h0, 0.0, 0.0));
    let h11 = height_of_point(&ClosedPoint::rational(1, 1)?, &fs1);
    out.push(Check::new("height_1_1", h11, 0.5 * LN_2, 1e-9));
    let q2 = ClosedPoint::new(IntForm::from_i64(&[1, 0, 1]))?;
    out.push(Check::new(
        "height_z0sq_plus_z1sq",
        height_of_point(&q2, &fs1),
        0.5 * LN_2,
        1e-6,
    ));

    let z0 = IntForm::from_i64(&[0, 1]);
    let i = intersection_via_section(&fs1, &fs1, &z0, q)?;
    out.push(Check::new("fs_self_intersection_z0", i.value, 0.5, 1e-3));

    let a = IntForm::from_i64(&[3, 0, -2]);
    let b = IntForm::from_i64(&[1, 5, 0, 7]);
    let f = a.product(&b).scale(&BigInt::from(6));
    let fac = factor_form(&f)?;
    out.push(Check::new(
        "factorization_roundtrip",
        f64::from(u8::from(fac.expand(f.degree()) == f && fac.factors.len() == 2)),
        1.0,
        0.0,
    ));
    let vp = vertical_prime_check(&f, &fs1, q)?;
    out.push(Check::new("vertical_prime_violations", vp.violations as f64, 0.0, 0.0));

    Ok(out)
}
