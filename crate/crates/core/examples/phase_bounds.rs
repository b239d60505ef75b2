//! Phase-error bounds versus bit error rate for every case with a bound,
//! plus the optimal slope found for the two-photon cases.

use mdi_sarg04::bounds::{f_type1, g_type2, phase_bound};
use mdi_sarg04::{Announcement, PhotonCase};

fn main() -> mdi_sarg04::Result<()> {
    println!("{:>6} {:>8} {:>8} {:>10} {:>8} {:>10} {:>8}", "e_bit", "11 T1", "11 T2", "12 T1", "s*", "12 T2", "s*");
    for i in 0..=20 {
        let e = 0.01 * i as f64;
        let b11_1 = phase_bound(PhotonCase::OneOne, Announcement::Type1, e)?;
        let b11_2 = phase_bound(PhotonCase::OneOne, Announcement::Type2, e)?;
        let b12_1 = phase_bound(PhotonCase::OneTwo, Announcement::Type1, e)?;
        let b12_2 = phase_bound(PhotonCase::OneTwo, Announcement::Type2, e)?;
        println!(
            "{e:>6.2} {:>8.4} {:>8.4} {:>10.6} {:>8.3} {:>10.6} {:>8.3}",
            b11_1.e_ph, b11_2.e_ph, b12_1.e_ph, b12_1.s_star, b12_2.e_ph, b12_2.s_star
        );
    }

    println!("\nfrontier offsets (ph <= s bit + t fil)");
    println!("{:>6} {:>10} {:>10}", "s", "f(s)", "g(s)");
    for s in [0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 50.0] {
        println!("{s:>6.1} {:>10.6} {:>10.6}", f_type1(s), g_type2(s)?);
    }
    Ok(())
}
