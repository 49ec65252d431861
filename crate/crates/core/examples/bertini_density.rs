//! Smooth divisor densities over prime fields against the zeta value.
//!
//! `cargo run --release --example bertini_density`

use arakelov_demailly::finite_field::{smooth_divisor_density, smooth_divisor_density_sampled};

fn main() -> arakelov_demailly::Result<()> {
    for p in [2u64, 3, 5] {
        for n in 2..=6 {
            let r = smooth_divisor_density(p, n)?;
            println!(
                "p = {p}, n = {n}: {:>6}/{:<6} = {:.6}   zeta^-1 = {:.6}",
                r.density_num,
                r.density_den,
                r.density(),
                r.reference
            );
        }
    }
    let r = smooth_divisor_density_sampled(101, 8, 200_000, 1)?;
    println!("sampled p = 101, n = 8: {:.5} vs {:.5}", r.density(), r.reference);
    Ok(())
}
