//! Case (i): weak coherent pulses with a QND filter at the relay.
//!
//! Prints the optimised rate with and without the (1,2)/(2,1) terms, the
//! MDI-BB84 comparison, and the optimal mean photon numbers.
//!
//!     cargo run --release --example qnd_rate_curve -- [stop_km] [step_km]

use mdi_sarg04::rate::PhotonTerms;
use mdi_sarg04::scenario::{run_sweep, DistanceGrid, Scenario, ScenarioConfig};

fn main() -> mdi_sarg04::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let stop = args.first().copied().unwrap_or(60.0);
    let step = args.get(1).copied().unwrap_or(5.0);
    let base = ScenarioConfig {
        scenario: Scenario::QndCoherent,
        distance: DistanceGrid { start_km: 0.0, stop_km: stop, step_km: step },
        ..Default::default()
    };
    let full = run_sweep(&base)?;
    let single = run_sweep(&ScenarioConfig { photon_terms: PhotonTerms::OneOneOnly, compare_bb84: false, ..base })?;

    println!("{:>6} {:>10} {:>12} {:>10} {:>12} {:>10} {:>12}", "km", "mu", "G(full)", "mu(1,1)", "G(1,1)", "mu_bb84", "G_bb84");
    for (f, s) in full.iter().zip(&single) {
        println!(
            "{:>6.1} {:>10.4} {:>12.4e} {:>10.4} {:>12.4e} {:>10.4} {:>12.4e}",
            f.distance_km,
            f.mu_opt,
            f.total,
            s.mu_opt,
            s.total,
            f.bb84_mu_opt.unwrap_or(f64::NAN),
            f.bb84_total.unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
