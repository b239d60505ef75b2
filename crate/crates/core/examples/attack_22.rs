//! The (2,2) attack: states whose bit error vanishes or sits at 1/2 while
//! the phase error stays at 1/2, and a heralded preparation of them.

use mdi_sarg04::povm::{attack_state_22, bell_ancilla_projection, build_povm, error_rates};
use mdi_sarg04::quantum::DensityOperator;
use mdi_sarg04::{Announcement, PhotonCase};

fn main() -> mdi_sarg04::Result<()> {
    let t1 = build_povm(PhotonCase::TwoTwo, Announcement::Type1);
    for which in 1..=2 {
        let mu = attack_state_22(Announcement::Type1, which)?;
        let e = error_rates(&t1, &DensityOperator::pure(&mu)?)?;
        let heralded = bell_ancilla_projection(&mu)?;
        println!(
            "Type1 mu{which}: e_bit {:.6} e_ph {:.6} p_fil {:.6}  bell-ancilla success {:.6} (1/16 = {:.6})",
            e.e_bit,
            e.e_ph,
            e.p_fil,
            heralded.norm_sqr(),
            1.0 / 16.0
        );
    }

    let t2 = build_povm(PhotonCase::TwoTwo, Announcement::Type2);
    let nu = |i| attack_state_22(Announcement::Type2, i).and_then(|v| DensityOperator::pure(&v));
    let (n1, n2, n3, n4) = (nu(1)?, nu(2)?, nu(3)?, nu(4)?);
    let mixes = [
        ("1/4 nu1 + 3/4 nu2", DensityOperator::mixture(&[(0.25, &n1), (0.75, &n2)])?),
        ("3/4 nu3 + 1/4 nu4", DensityOperator::mixture(&[(0.75, &n3), (0.25, &n4)])?),
    ];
    for (label, rho) in &mixes {
        let e = error_rates(&t2, rho)?;
        println!("Type2 {label}: e_bit {:.6} e_ph {:.6} p_fil {:.6}", e.e_bit, e.e_ph, e.p_fil);
    }
    println!("\nphase error 1/2 at zero bit error: no key from (2,2) pulses");
    Ok(())
}
