//! Without QND filtering the multi-photon pulses drive the error rate of
//! both Types toward 1/4 and the rate vanishes; with it the relay only sees
//! single photons.

use mdi_sarg04::optics::{ChannelParams, DetectorParams, Protocol};
use mdi_sarg04::rate::{assemble_gains, key_rate, RateOptions};
use mdi_sarg04::sources::poisson_source;
use mdi_sarg04::Announcement;

fn main() -> mdi_sarg04::Result<()> {
    let det = DetectorParams::GYS;
    let channel = ChannelParams { loss_db_per_km: 0.21, distance_km: 10.0 };
    println!("{:>6} {:>5} {:>10} {:>10} {:>12}", "mu", "qnd", "E1", "E2", "G");
    for mu in [0.01, 0.1, 0.5, 1.0, 2.0] {
        let src = poisson_source(mu, 30)?;
        for qnd in [false, true] {
            let gains = assemble_gains(&src, &src, &channel, &det, qnd, Protocol::Sarg04)?;
            let rate = key_rate(&gains, 1.22, RateOptions::default())?;
            println!(
                "{mu:>6.2} {:>5} {:>10.5} {:>10.5} {:>12.4e}",
                qnd,
                gains.e_tot(Announcement::Type1),
                gains.e_tot(Announcement::Type2),
                rate.total
            );
        }
    }
    Ok(())
}
