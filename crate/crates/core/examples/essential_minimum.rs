//! The full pipeline: approximating sequence, rounding, good-section search,
//! divisor decomposition and the essential-minimum inequality.
//!
//! `cargo run --release --example essential_minimum`

use arakelov_demailly::arakelov::HermitianBundle;
use arakelov_demailly::experiments::{essmin_experiment, EssMinConfig};
use arakelov_demailly::projective::QuadratureGrid;

fn main() -> arakelov_demailly::Result<()> {
    let q = QuadratureGrid::fibonacci(100_000)?;
    let cfg = EssMinConfig::new(HermitianBundle::twisted(0.2), HermitianBundle::fubini_study());
    let r = essmin_experiment(&cfg, &q)?;
    for s in &r.stages {
        println!(
            "deg {:>4}: rounding {:.2e}, min height {:.6} (point of degree {}), rhs {:.6}, remainder {:+.6}",
            s.degree, s.rounding_distance, s.min_height, s.min_height_degree, s.stage_rhs, s.archimedean_remainder
        );
    }
    println!(
        "liminf {:.6} <= rhs {:.6} + {}: {}",
        r.liminf_estimate, r.rhs, r.tolerance, r.inequality_holds
    );
    Ok(())
}
