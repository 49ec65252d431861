//! Heights of rational and algebraic points, and ampleness diagnostics.
//!
//! `cargo run --release --example heights`

use arakelov_demailly::arakelov::{
    ampleness_diagnostics, height_of_point, rational_point_height, sample_points, ClosedPoint, HermitianBundle,
};
use arakelov_demailly::form::IntForm;
use arakelov_demailly::projective::QuadratureGrid;
use num_bigint::BigInt;

fn main() -> arakelov_demailly::Result<()> {
    let fs = HermitianBundle::fubini_study();
    for (a, b) in [(1, 0), (1, 1), (2, 3), (-5, 7)] {
        let p = ClosedPoint::rational(a, b)?;
        let exact = rational_point_height(&BigInt::from(a), &BigInt::from(b), &fs)?;
        println!(
            "[{a}:{b}]  roots {:.12}  product formula {:.12}",
            height_of_point(&p, &fs),
            exact
        );
    }
    for coeffs in [[1, 0, 1], [1, 1, 1], [-2, 0, 1]] {
        let p = ClosedPoint::new(IntForm::from_i64(&coeffs))?;
        println!(
            "{}: h = {:.9}, twisted by 0.2: {:.9}",
            p.form(),
            height_of_point(&p, &fs),
            height_of_point(&p, &HermitianBundle::twisted(0.2))
        );
    }
    let q = QuadratureGrid::fibonacci(20_000)?;
    for eps in [0.0, 0.2] {
        let r = ampleness_diagnostics(&HermitianBundle::twisted(eps), &q, &sample_points());
        println!(
            "eps {eps}: min curvature {:.4}, min sample height {:.4}, ample {}",
            r.min_curvature_density,
            r.min_sample_height,
            r.is_ample()
        );
    }
    Ok(())
}
