//! Runs the full identity suite, optionally with a perturbed filter angle.
//!
//!     cargo run --example verify_povms -- [angle_offset]

use mdi_sarg04::verify::{verify_suite_with, VerifyOptions};

fn main() {
    let offset: f64 = std::env::args().nth(1).map(|a| a.parse().expect("angle offset")).unwrap_or(0.0);
    let report = verify_suite_with(VerifyOptions { filter_angle_offset: offset });
    println!("{report}");
    if !report.all_passed() {
        std::process::exit(1);
    }
}
