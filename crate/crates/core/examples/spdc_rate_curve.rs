//! Case (ii): heralded down-conversion sources, no QND filter.
//!
//! Rates are reported per heralded pulse pair and per pump pulse pair; the
//! pump strength is optimised for the latter.
//!
//!     cargo run --release --example spdc_rate_curve -- [stop_km] [step_km] [thermal|poisson]

use mdi_sarg04::rate::TypeSelection;
use mdi_sarg04::scenario::{run_sweep, DistanceGrid, Scenario, ScenarioConfig};
use mdi_sarg04::sources::PairStatistics;

fn main() -> mdi_sarg04::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let num = |i: usize, d: f64| args.get(i).and_then(|a| a.parse().ok()).unwrap_or(d);
    let stats = match args.get(2).map(String::as_str) {
        Some("poisson") => PairStatistics::Poisson,
        _ => PairStatistics::Thermal,
    };
    let cfg = ScenarioConfig {
        scenario: Scenario::SpdcHeralded,
        pair_statistics: stats,
        distance: DistanceGrid { start_km: 0.0, stop_km: num(0, 100.0), step_km: num(1, 10.0) },
        ..Default::default()
    };
    let both = run_sweep(&cfg)?;
    let type1 = run_sweep(&ScenarioConfig { type_selection: TypeSelection::Type1Only, compare_bb84: false, ..cfg })?;

    println!(
        "{:>6} {:>9} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}",
        "km", "mu", "G1", "G2", "per pump", "p_herald", "Type1 only", "BB84"
    );
    for (p, t) in both.iter().zip(&type1) {
        println!(
            "{:>6.1} {:>9.4} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e} {:>11.4e}",
            p.distance_km,
            p.mu_opt,
            p.g1,
            p.g2,
            p.total_per_pump,
            p.p_herald,
            t.total_per_pump,
            p.bb84_total_per_pump.unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
