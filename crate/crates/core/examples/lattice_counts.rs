//! Exact lattice-ball counts, small sections and successive minima.
//!
//! `cargo run --release --example lattice_counts`

use arakelov_demailly::form::RealForm;
use arakelov_demailly::lattice::{
    ball_count, count_small_sections, restriction_kernel_density, successive_minima_estimate, Constraint, MinimaMode,
    SectionLattice,
};
use arakelov_demailly::projective::MetricData;

fn main() -> arakelov_demailly::Result<()> {
    let lat = SectionLattice::new(1, MetricData::fubini_study())?;
    let zero = RealForm::zero(1);
    for r in [1.0, 1.9, 2.0, 3.0] {
        println!("n = 1, radius {r}: {} points", ball_count(&lat, &zero, r)?.count);
    }
    for k in [Constraint::DivisibleBy(2), Constraint::VanishAt(1, 1)] {
        let d = restriction_kernel_density(&lat, &k, &zero, 2.0)?;
        println!("{k} at radius 2: {}/{}", d.hits, d.total);
    }

    println!("small sections under FS:");
    for n in 1..=5 {
        let s = count_small_sections(&SectionLattice::new(n, MetricData::fubini_study())?)?;
        println!(
            "  n = {n}: {} (h0 = {:.4}, h0/n^2 = {:.4})",
            s.count,
            s.h0,
            s.h0 / (n * n) as f64
        );
    }

    for n in [2, 4] {
        let lat = SectionLattice::new(n, MetricData::twisted(0.3))?;
        let m = successive_minima_estimate(&lat, MinimaMode::Exhaustive)?;
        let last = m.last().copied().unwrap_or(f64::NAN);
        println!(
            "eps 0.3, n = {n}: minima {m:.4?}, log(last)/n = {:.4}",
            last.ln() / n as f64
        );
    }
    Ok(())
}
