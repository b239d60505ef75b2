//! Numerical verification of the security bounds of measurement-device-independent
//! SARG04 quantum key distribution, and asymptotic key-rate simulation for the
//! two relay/source setups that make it practical.
//!
//! Layers, bottom up:
//!
//! - [`quantum`]: small dense state/operator algebra and the protocol's symbols.
//! - [`povm`]: filtering and error POVMs, Eve's (2,2) attack.
//! - [`bounds`]: binary entropy and the phase-error bounds `f`, `g`.
//! - [`optics`]: photon-number-exact model of the relay's linear-optics Bell measurement.
//! - [`sources`]: coherent and heralded-SPDC photon statistics, QND post-selection.
//! - [`rate`]: gains, error rates and the key-rate formula.
//! - [`scenario`]: configuration, mean-photon-number optimisation, sweeps, CSV, verification.
//! - [`search`]: golden-section and grid helpers.
//! - [`verify`]: the named check battery behind `mdisarg verify`.

pub mod bounds;
pub mod error;
pub mod optics;
pub mod povm;
pub mod quantum;
pub mod rate;
pub mod scenario;
pub mod search;
pub mod sources;
pub mod verify;

pub use error::{Error, Result};
pub use povm::{Announcement, PhotonCase};
