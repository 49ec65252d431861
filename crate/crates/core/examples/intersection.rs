//! Intersection numbers from one section, for several sections.
//!
//! `cargo run --release --example intersection`

use arakelov_demailly::arakelov::{intersection_via_section, HermitianBundle};
use arakelov_demailly::form::parse_form;
use arakelov_demailly::projective::QuadratureGrid;

fn main() -> arakelov_demailly::Result<()> {
    let q = QuadratureGrid::fibonacci(100_000)?;
    let fs = HermitianBundle::fubini_study();
    let tw = HermitianBundle::twisted(0.2);
    for lit in [
        "z0",
        "z0 - z1",
        "z0^2 + z1^2",
        "2*z0^3 - z0*z1^2 + 3*z1^3",
        "z0^4 - 10*z0^2*z1^2 + z1^4",
    ] {
        let s = parse_form(lit)?.to_integer().expect("integral literal");
        let a = intersection_via_section(&fs, &fs, &s, &q)?;
        let b = intersection_via_section(&tw, &fs, &s, &q)?;
        println!(
            "{lit:<28} FS.FS = {:.6}   FS(0.2).FS = {:.6}   ({} factor(s))",
            a.value, b.value, a.num_factors
        );
    }
    Ok(())
}
