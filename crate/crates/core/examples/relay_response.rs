//! Relay yields and bit errors per photon-number pair, with and without QND
//! filtering, at one distance.
//!
//!     cargo run --example relay_response -- [distance_km]

use mdi_sarg04::optics::{ChannelParams, DetectorParams, LosslessTable, MuResponse, Protocol, MAX_PHOTONS};
use mdi_sarg04::Announcement;

fn main() -> mdi_sarg04::Result<()> {
    let km: f64 = std::env::args().nth(1).map(|a| a.parse().expect("distance")).unwrap_or(20.0);
    let det = DetectorParams::GYS;
    let channel = ChannelParams { loss_db_per_km: 0.21, distance_km: km };
    let t = channel.t_arm();
    println!("distance {km} km, arm transmittance {t:.4e}, eta {}, dark {}", det.eta, det.dark);

    let table = LosslessTable::new(Protocol::Sarg04, det.dark, MAX_PHOTONS)?;
    let plain = MuResponse::through_channel(&table, 3, t, det.eta, false)?;
    let qnd_table = LosslessTable::new(Protocol::Sarg04, det.dark, 1)?;
    let qnd = MuResponse::through_channel(&qnd_table, 3, t, det.eta, true)?;

    println!("{:>3} {:>3} {:>11} {:>8} {:>11} {:>8} | {:>11} {:>11}", "n", "m", "Y1", "e1", "Y2", "e2", "Y1 qnd", "Y2 qnd");
    for n in 0..=3 {
        for m in 0..=3 {
            let p = plain.entry(n, m);
            let q = qnd.entry(n, m);
            println!(
                "{n:>3} {m:>3} {:>11.4e} {:>8.5} {:>11.4e} {:>8.5} | {:>11.4e} {:>11.4e}",
                p.yield_of(Announcement::Type1),
                p.ebit_of(Announcement::Type1),
                p.yield_of(Announcement::Type2),
                p.ebit_of(Announcement::Type2),
                q.yield_of(Announcement::Type1),
                q.yield_of(Announcement::Type2),
            );
        }
    }
    Ok(())
}
