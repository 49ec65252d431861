//! Orthonormal bases and Bergman kernels, unperturbed and perturbed.
//!
//! `cargo run --release --example bergman_kernel`

use arakelov_demailly::bergman::{bergman_kernel, orthonormalize};
use arakelov_demailly::projective::{MetricData, PerturbationTerm, QuadratureGrid};

fn main() -> arakelov_demailly::Result<()> {
    let q = QuadratureGrid::fibonacci(50_000)?;
    let fs = MetricData::fubini_study();
    let bumpy = MetricData::new(vec![PerturbationTerm::new(1, 1, 2, 0.15)?], 0.0, &q)?;

    println!("{:>4} {:>14} {:>14} {:>14}", "n", "FS dev", "bumpy min", "bumpy max");
    for n in [2, 5, 10, 20, 40] {
        let ratio = |m: &MetricData| -> arakelov_demailly::Result<(f64, f64)> {
            let b = orthonormalize(n, m, &q)?;
            Ok(q.points().iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| {
                let r = bergman_kernel(&b, x, m) / (n + 1) as f64;
                (lo.min(r), hi.max(r))
            }))
        };
        let (lo, hi) = ratio(&fs)?;
        let (blo, bhi) = ratio(&bumpy)?;
        println!(
            "{n:>4} {:>14.3e} {blo:>14.6} {bhi:>14.6}",
            (lo - 1.0).abs().max(hi - 1.0)
        );
    }
    let (lo, hi) = q.points().iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| {
        let c = bumpy.curvature_density(x);
        (lo.min(c), hi.max(c))
    });
    println!("curvature density of the bumpy metric ranges over [{lo:.6}, {hi:.6}]");
    Ok(())
}
