//! SARG04 against the BB84 baseline on the same QND-filtered coherent
//! sources.

use mdi_sarg04::scenario::{run_sweep, DistanceGrid, ScenarioConfig};

fn main() -> mdi_sarg04::Result<()> {
    let config = ScenarioConfig { distance: DistanceGrid { start_km: 0.0, stop_km: 100.0, step_km: 10.0 }, ..Default::default() };
    println!("{:>6} {:>9} {:>12} {:>9} {:>12} {:>8}", "km", "mu", "SARG04", "mu bb84", "BB84", "ratio");
    for p in run_sweep(&config)? {
        let bb84 = p.bb84_total.unwrap_or(0.0);
        let ratio = if bb84 > 0.0 { p.total / bb84 } else { f64::NAN };
        println!(
            "{:>6.1} {:>9.4} {:>12.4e} {:>9.4} {:>12.4e} {:>8.4}",
            p.distance_km,
            p.mu_opt,
            p.total,
            p.bb84_mu_opt.unwrap_or(f64::NAN),
            bb84,
            ratio
        );
    }
    Ok(())
}
