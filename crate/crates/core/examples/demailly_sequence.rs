//! The complex approximating sequence for a twisted Fubini–Study metric.
//!
//! `cargo run --release --example demailly_sequence`

use arakelov_demailly::bergman::{demailly_schedule, ScheduleConfig};
use arakelov_demailly::projective::{MetricData, QuadratureGrid};

fn main() -> arakelov_demailly::Result<()> {
    let q = QuadratureGrid::fibonacci(100_000)?;
    let m = MetricData::twisted(0.1);
    let seq = demailly_schedule(&m, &q, &ScheduleConfig::default())?;
    println!(
        "{:>5} {:>4} {:>4} {:>6} {:>14} {:>12} {:>12} {:>9}",
        "tol", "n", "ell", "deg", "sup", "L1 log/deg", "measure", "ms"
    );
    for s in &seq.stages {
        println!(
            "{:>5} {:>4} {:>4} {:>6} {:>14.12} {:>12.6} {:>12.6} {:>9}",
            s.tolerance,
            s.n,
            s.ell,
            s.degree(),
            s.sup_norm_value,
            s.l1_value,
            s.measure_value,
            s.wall_time_ms
        );
    }
    Ok(())
}
