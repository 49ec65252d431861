//! Rounding real sections to integral ones and the rounding bound.
//!
//! `cargo run --release --example integral_rounding`

use arakelov_demailly::form::RealForm;
use arakelov_demailly::lattice::{round_to_integral, rounding_bound, SectionLattice};
use arakelov_demailly::projective::MetricData;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> arakelov_demailly::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for eps in [0.0, 0.2] {
        for n in [4, 10, 16] {
            let lat = SectionLattice::new(n, MetricData::twisted(eps))?;
            let bound = rounding_bound(&lat);
            let mut worst = 0.0f64;
            for _ in 0..200 {
                let s = RealForm::new((0..=n).map(|_| rng.random_range(-50.0..50.0)).collect());
                let (_, d) = round_to_integral(&s, &lat)?;
                worst = worst.max(d);
            }
            println!("eps {eps:.1} n {n:>2}: worst distance {worst:.5} <= bound {bound:.5}");
        }
    }
    Ok(())
}
