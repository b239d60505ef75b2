//! Photon-number-exact model of the relay's Bell measurement: a 50/50 beam
//! splitter, a polarising beam splitter at ±45° on each output port, and
//! four threshold detectors.
//!
//! Output modes are indexed `LD, LA, RD, RA` (left/right port, diagonal
//! `0x` / antidiagonal `1x` polarisation). Alice's creation operator maps to
//! `(L + R)/sqrt 2`, Bob's to `(L - R)/sqrt 2`. Detector inefficiency and
//! channel loss are applied together as binomial thinning before the beam
//! splitter; dark counts fire each detector independently.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::povm::Announcement;
use crate::quantum::{basis_ket, phi_state, rotation, BasisLabel, StateVector};
use crate::sources::thinning_weights;

/// Largest surviving photon number per arm simulated exactly.
pub const MAX_PHOTONS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorParams {
    pub eta: f64,
    pub dark: f64,
}

impl DetectorParams {
    pub const GYS: DetectorParams = DetectorParams { eta: 0.045, dark: 8.5e-7 };
    pub const IDEAL: DetectorParams = DetectorParams { eta: 1.0, dark: 0.0 };

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(invalid(format!("detector efficiency {} outside (0, 1]", self.eta)));
        }
        if !(self.dark >= 0.0 && self.dark < 1.0) {
            return Err(invalid(format!("dark-count probability {} outside [0, 1)", self.dark)));
        }
        Ok(())
    }
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self::GYS
    }
}

/// Fibre between each sender and the relay at the midpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    pub loss_db_per_km: f64,
    /// Total Alice–Bob separation.
    pub distance_km: f64,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.loss_db_per_km >= 0.0 && self.loss_db_per_km.is_finite()) {
            return Err(invalid(format!("fibre loss {} dB/km must be nonnegative", self.loss_db_per_km)));
        }
        if !(self.distance_km >= 0.0 && self.distance_km.is_finite()) {
            return Err(invalid(format!("distance {} km must be nonnegative", self.distance_km)));
        }
        Ok(())
    }

    /// Transmittance of one arm (half the distance).
    pub fn t_arm(&self) -> f64 {
        10f64.powf(-self.loss_db_per_km * self.distance_km / 2.0 / 10.0)
    }
}

pub const DETECTOR_NAMES: [&str; 4] = ["LD", "LA", "RD", "RA"];

/// Which of the four detectors fired; bit `j` is detector `DETECTOR_NAMES[j]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClickPattern(pub u8);

impl ClickPattern {
    pub const LD: u8 = 1;
    pub const LA: u8 = 2;
    pub const RD: u8 = 4;
    pub const RA: u8 = 8;

    pub fn all() -> impl Iterator<Item = ClickPattern> {
        (0..16).map(ClickPattern)
    }

    pub fn from_flags(flags: [bool; 4]) -> Self {
        Self(flags.iter().enumerate().fold(0, |acc, (j, &f)| acc | ((f as u8) << j)))
    }

    pub fn fired(self, detector: usize) -> bool {
        self.0 >> detector & 1 == 1
    }

    /// Exactly two detectors, cross pairs for Type1, same-port pairs for Type2.
    pub fn classify(self) -> Option<Announcement> {
        match self.0 {
            x if x == Self::LD | Self::RA || x == Self::RD | Self::LA => Some(Announcement::Type1),
            x if x == Self::LD | Self::LA || x == Self::RD | Self::RA => Some(Announcement::Type2),
            _ => None,
        }
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = (0..4).filter(|&j| self.fired(j)).map(|j| DETECTOR_NAMES[j]).collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join("&"))
        }
    }
}

/// Probability of each of the 16 click patterns, indexed by `ClickPattern.0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClickDistribution(pub [f64; 16]);

impl ClickDistribution {
    pub fn prob(&self, p: ClickPattern) -> f64 {
        self.0[p.0 as usize]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn announcement_prob(&self, ann: Announcement) -> f64 {
        ClickPattern::all().filter(|p| p.classify() == Some(ann)).map(|p| self.prob(p)).sum()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Compositions `k` of `n` into four parts, each with weight `n!/prod(k!) prod(c^k)`.
fn expand_power(form: &[C64; 4], n: usize) -> Vec<([usize; 4], C64)> {
    let mut out = Vec::new();
    let nf = factorial(n);
    for k0 in 0..=n {
        for k1 in 0..=n - k0 {
            for k2 in 0..=n - k0 - k1 {
                let k3 = n - k0 - k1 - k2;
                let k = [k0, k1, k2, k3];
                let mut c = C64::new(nf, 0.0);
                for j in 0..4 {
                    c *= form[j].powu(k[j] as u32) / factorial(k[j]);
                }
                if c != C64::new(0.0, 0.0) {
                    out.push((k, c));
                }
            }
        }
    }
    out
}

fn polarisation(v: &StateVector) -> Result<[C64; 2]> {
    if v.qubits() != 1 {
        return Err(invalid("polarisation must be a single-qubit state"));
    }
    let a = v.amplitudes();
    Ok([a[0], a[1]])
}

/// Click statistics when exactly `a` photons of polarisation `u` leave
/// Alice's arm and `b` of polarisation `v` leave Bob's, before thinning.
fn lossless_clicks(a: usize, b: usize, u: &[C64; 2], v: &[C64; 2], dark: f64) -> [f64; 16] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let alice = [u[0] * h, u[1] * h, u[0] * h, u[1] * h];
    let bob = [v[0] * h, v[1] * h, -v[0] * h, -v[1] * h];
    let side = a + b + 1;
    let idx = |n: [usize; 4]| ((n[0] * side + n[1]) * side + n[2]) * side + n[3];
    let mut coeff = vec![C64::new(0.0, 0.0); side.pow(4)];
    let pa = expand_power(&alice, a);
    let pb = expand_power(&bob, b);
    for (k, ck) in &pa {
        for (l, cl) in &pb {
            let n = [k[0] + l[0], k[1] + l[1], k[2] + l[2], k[3] + l[3]];
            coeff[idx(n)] += ck * cl;
        }
    }
    // amplitude of |n> is coeff * sqrt(prod n_j!) / sqrt(a! b!)
    let norm = factorial(a) * factorial(b);
    let mut by_mask = [0.0; 16];
    for n0 in 0..side {
        for n1 in 0..side - n0 {
            for n2 in 0..side - n0 - n1 {
                for n3 in 0..side - n0 - n1 - n2 {
                    let n = [n0, n1, n2, n3];
                    let c = coeff[idx(n)];
                    if c == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let p = c.norm_sqr() * n.iter().map(|&x| factorial(x)).product::<f64>() / norm;
                    let mask = n.iter().enumerate().fold(0usize, |m, (j, &x)| m | ((x > 0) as usize) << j);
                    by_mask[mask] += p;
                }
            }
        }
    }
    apply_dark_counts(&by_mask, dark)
}

fn apply_dark_counts(by_mask: &[f64; 16], dark: f64) -> [f64; 16] {
    let mut out = [0.0; 16];
    for (mask, &p) in by_mask.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for pattern in 0..16usize {
            if pattern & mask != mask {
                continue;
            }
            let mut w = p;
            for j in 0..4 {
                if mask >> j & 1 == 0 {
                    w *= if pattern >> j & 1 == 1 { dark } else { 1.0 - dark };
                }
            }
            out[pattern] += w;
        }
    }
    out
}

fn check_photons(n: usize, m: usize) -> Result<()> {
    if n > MAX_PHOTONS || m > MAX_PHOTONS {
        return Err(invalid(format!("photon numbers ({n},{m}) exceed the optics cap {MAX_PHOTONS}")));
    }
    Ok(())
}

/// Click-pattern distribution for `n` and `m` emitted photons of the given
/// polarisations, each surviving with probability `t_arm·eta`.
pub fn mu_click_distribution(
    n: usize,
    m: usize,
    pol_a: &StateVector,
    pol_b: &StateVector,
    det: &DetectorParams,
    t_arm: f64,
) -> Result<ClickDistribution> {
    check_photons(n, m)?;
    det.validate()?;
    if !(t_arm > 0.0 && t_arm <= 1.0) {
        return Err(invalid(format!("arm transmittance {t_arm} outside (0, 1]")));
    }
    let (u, v) = (polarisation(pol_a)?, polarisation(pol_b)?);
    let tau = t_arm * det.eta;
    let (wa, wb) = (thinning_weights(n, tau), thinning_weights(m, tau));
    let mut out = [0.0; 16];
    for (a, &x) in wa.iter().enumerate() {
        for (b, &y) in wb.iter().enumerate() {
            if x * y == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(lossless_clicks(a, b, &u, &v, det.dark)) {
                *o += x * y * p;
            }
        }
    }
    Ok(ClickDistribution(out))
}

/// Encoding and sifting rule applied to the relay's announcements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// `R_k|phi_i>`, Type1 sifted on `k = k'`, Type2 on `k = k' in {0, 2}`.
    Sarg04,
    /// BB84 key basis, `|i_x>`.
    Bb84Key,
    /// BB84 test basis, `|i_z>`.
    Bb84Test,
}

impl Protocol {
    pub fn state(self, bit: usize, k: usize) -> Result<StateVector> {
        match self {
            Protocol::Sarg04 => rotation(k)?.apply(&phi_state(bit)?),
            Protocol::Bb84Key => Ok(basis_ket(BasisLabel::x(bit as u8))),
            Protocol::Bb84Test => Ok(basis_ket(BasisLabel::z(bit as u8))),
        }
    }

    pub fn rotations(self, ann: Announcement) -> &'static [usize] {
        match self {
            Protocol::Sarg04 => ann.accepted_rotations(),
            _ => &[0],
        }
    }

    /// Whether sifted bits disagree, after Alice's flip where the rule has one.
    pub fn is_error(self, ann: Announcement, i: usize, j: usize) -> bool {
        match (self, ann) {
            (Protocol::Sarg04, Announcement::Type1) => i == j,
            (Protocol::Sarg04, Announcement::Type2) => i != j,
            (Protocol::Bb84Key, _) => i == j,
            (Protocol::Bb84Test, Announcement::Type1) => i == j,
            (Protocol::Bb84Test, Announcement::Type2) => i != j,
        }
    }

    /// Probability that the public basis/rotation comparison keeps the round.
    pub fn sift(self, ann: Announcement) -> f64 {
        match (self, ann) {
            (Protocol::Sarg04, Announcement::Type1) => 0.25,
            (Protocol::Sarg04, Announcement::Type2) => 0.125,
            _ => 0.25,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Sarg04 => "sarg04",
            Protocol::Bb84Key => "bb84_key",
            Protocol::Bb84Test => "bb84_test",
        })
    }
}

impl FromStr for Protocol {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "sarg04" => Ok(Protocol::Sarg04),
            "bb84_key" | "bb84" => Ok(Protocol::Bb84Key),
            "bb84_test" => Ok(Protocol::Bb84Test),
            other => Err(invalid(format!("unknown protocol `{other}`"))),
        }
    }
}

/// Yield and conditional bit error of each announcement for one photon-number pair.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MuEntry {
    pub yields: [f64; 2],
    pub ebits: [f64; 2],
}

impl MuEntry {
    pub fn yield_of(&self, ann: Announcement) -> f64 {
        self.yields[ann.slot()]
    }

    pub fn ebit_of(&self, ann: Announcement) -> f64 {
        self.ebits[ann.slot()]
    }

    fn from_sums(y: [f64; 2], ye: [f64; 2]) -> Self {
        let e = |k: usize| if y[k] > 0.0 { (ye[k] / y[k]).clamp(0.0, 1.0) } else { 0.0 };
        Self { yields: y, ebits: [e(0), e(1)] }
    }
}

/// Bit/rotation-averaged yields for every surviving photon-number pair up
/// to the cap, at a fixed dark-count rate. Thinning is applied afterwards.
#[derive(Clone, Debug)]
pub struct LosslessTable {
    protocol: Protocol,
    dark: f64,
    cap: usize,
    /// `(yield, yield·error)` per announcement.
    cells: Vec<[(f64, f64); 2]>,
}

impl LosslessTable {
    pub fn new(protocol: Protocol, dark: f64, cap: usize) -> Result<Self> {
        if cap > MAX_PHOTONS {
            return Err(invalid(format!("optics cap {cap} above {MAX_PHOTONS}")));
        }
        if !(0.0..1.0).contains(&dark) {
            return Err(invalid(format!("dark-count probability {dark} outside [0, 1)")));
        }
        let mut states = [[[C64::new(0.0, 0.0); 2]; 4]; 2];
        for (bit, row) in states.iter_mut().enumerate() {
            for (k, s) in row.iter_mut().enumerate() {
                *s = polarisation(&protocol.state(bit, k)?)?;
            }
        }
        let mut cells = Vec::with_capacity((cap + 1) * (cap + 1));
        for a in 0..=cap {
            for b in 0..=cap {
                let mut cell = [(0.0, 0.0); 2];
                for k in 0..4 {
                    let used: Vec<Announcement> =
                        Announcement::ALL.into_iter().filter(|&t| protocol.rotations(t).contains(&k)).collect();
                    if used.is_empty() {
                        continue;
                    }
                    for i in 0..2 {
                        for j in 0..2 {
                            let clicks = lossless_clicks(a, b, &states[i][k], &states[j][k], dark);
                            let dist = ClickDistribution(clicks);
                            for &t in &used {
                                let w = 0.25 / protocol.rotations(t).len() as f64;
                                let y = dist.announcement_prob(t) * w;
                                cell[t.slot()].0 += y;
                                if protocol.is_error(t, i, j) {
                                    cell[t.slot()].1 += y;
                                }
                            }
                        }
                    }
                }
                cells.push(cell);
            }
        }
        Ok(Self { protocol, dark, cap, cells })
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn dark(&self) -> f64 {
        self.dark
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn cell(&self, a: usize, b: usize) -> &[(f64, f64); 2] {
        &self.cells[a * (self.cap + 1) + b]
    }

    /// Response for `n` and `m` photons each surviving with probability `tau`.
    ///
    /// Weight on more than `cap` survivors in an arm is booked as a
    /// guaranteed announcement split evenly between the Types with error 1/2.
    pub fn response(&self, n: usize, m: usize, tau: f64) -> MuEntry {
        let (y, ye) = self.sums(n, m, tau);
        MuEntry::from_sums(y, ye)
    }

    fn sums(&self, n: usize, m: usize, tau: f64) -> ([f64; 2], [f64; 2]) {
        let wa = thinning_weights(n, tau);
        let wb = thinning_weights(m, tau);
        let mut y = [0.0; 2];
        let mut ye = [0.0; 2];
        let mut covered = 0.0;
        for (a, &x) in wa.iter().enumerate().take(self.cap + 1) {
            for (b, &z) in wb.iter().enumerate().take(self.cap + 1) {
                let w = x * z;
                if w == 0.0 {
                    continue;
                }
                covered += w;
                for (t, (cy, cye)) in self.cell(a, b).iter().enumerate() {
                    y[t] += w * cy;
                    ye[t] += w * cye;
                }
            }
        }
        let overflow = (1.0 - covered).max(0.0);
        if overflow > 1e-15 {
            for t in 0..2 {
                y[t] += 0.5 * overflow;
                ye[t] += 0.25 * overflow;
            }
        }
        (y, ye)
    }
}

/// Yields and bit errors for one `(n, m)` without a precomputed table.
pub fn yields_and_errors(n: usize, m: usize, det: &DetectorParams, t_arm: f64, protocol: Protocol) -> Result<MuEntry> {
    check_photons(n, m)?;
    det.validate()?;
    if !(t_arm > 0.0 && t_arm <= 1.0) {
        return Err(invalid(format!("arm transmittance {t_arm} outside (0, 1]")));
    }
    Ok(LosslessTable::new(protocol, det.dark, n.max(m))?.response(n, m, t_arm * det.eta))
}

/// Type1 SARG04 response restricted to one rotation `k = k'`.
pub fn sarg04_rotation_response(n: usize, m: usize, det: &DetectorParams, t_arm: f64, k: usize) -> Result<MuEntry> {
    let mut y = [0.0; 2];
    let mut ye = [0.0; 2];
    for i in 0..2 {
        for j in 0..2 {
            let a = Protocol::Sarg04.state(i, k)?;
            let b = Protocol::Sarg04.state(j, k)?;
            let dist = mu_click_distribution(n, m, &a, &b, det, t_arm)?;
            for t in Announcement::ALL {
                let p = 0.25 * dist.announcement_prob(t);
                y[t.slot()] += p;
                if Protocol::Sarg04.is_error(t, i, j) {
                    ye[t.slot()] += p;
                }
            }
        }
    }
    Ok(MuEntry::from_sums(y, ye))
}

/// Per emitted `(n, m)` yields after the channel, optionally with the
/// relay's QND filter admitting at most one arriving photon per arm.
#[derive(Clone, Debug, PartialEq)]
pub struct MuResponse {
    protocol: Protocol,
    n_max: usize,
    entries: Vec<MuEntry>,
}

impl MuResponse {
    /// Build the response for senders emitting up to `n_max` photons.
    pub fn through_channel(table: &LosslessTable, n_max: usize, t_arm: f64, eta: f64, qnd: bool) -> Result<Self> {
        if !(t_arm > 0.0 && t_arm <= 1.0) {
            return Err(invalid(format!("arm transmittance {t_arm} outside (0, 1]")));
        }
        let mut entries = Vec::with_capacity((n_max + 1) * (n_max + 1));
        if qnd {
            // arrivals are thinned by the fibre, filtered, then by the detector
            let arrived: Vec<[MuEntry; 2]> = (0..=1)
                .map(|a| [table.response(a, 0, eta), table.response(a, 1, eta)])
                .collect();
            for n in 0..=n_max {
                let wn = thinning_weights(n, t_arm);
                for m in 0..=n_max {
                    let wm = thinning_weights(m, t_arm);
                    let mut y = [0.0; 2];
                    let mut ye = [0.0; 2];
                    for a in 0..=n.min(1) {
                        for b in 0..=m.min(1) {
                            let w = wn[a] * wm[b];
                            let e = &arrived[a][b];
                            for t in 0..2 {
                                y[t] += w * e.yields[t];
                                ye[t] += w * e.yields[t] * e.ebits[t];
                            }
                        }
                    }
                    entries.push(MuEntry::from_sums(y, ye));
                }
            }
        } else {
            let tau = t_arm * eta;
            for n in 0..=n_max {
                for m in 0..=n_max {
                    entries.push(table.response(n, m, tau));
                }
            }
        }
        Ok(Self { protocol: table.protocol(), n_max, entries })
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn entry(&self, n: usize, m: usize) -> MuEntry {
        assert!(n <= self.n_max && m <= self.n_max, "({n},{m}) outside response table");
        self.entries[n * (self.n_max + 1) + m]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const IDEAL: DetectorParams = DetectorParams::IDEAL;

    #[test]
    fn vacuum_never_clicks() {
        let phi0 = phi_state(0).unwrap();
        let d = mu_click_distribution(0, 0, &phi0, &phi0, &IDEAL, 1.0).unwrap();
        assert_eq!(d.prob(ClickPattern(0)), 1.0);
    }

    #[test]
    fn hong_ou_mandel_suppresses_singlet() {
        let phi0 = phi_state(0).unwrap();
        let d = mu_click_distribution(1, 1, &phi0, &phi0, &IDEAL, 1.0).unwrap();
        assert_abs_diff_eq!(d.announcement_prob(Announcement::Type1), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_photons_give_bell_statistics() {
        // |0x>|1x> = (psi+ + psi-)/sqrt 2, each Bell state detected with prob 1/2
        let (h, v) = (basis_ket(BasisLabel::X0), basis_ket(BasisLabel::X1));
        let d = mu_click_distribution(1, 1, &h, &v, &IDEAL, 1.0).unwrap();
        assert_abs_diff_eq!(d.announcement_prob(Announcement::Type1), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(d.announcement_prob(Announcement::Type2), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn conservation_over_inputs() {
        let det = DetectorParams { eta: 0.3, dark: 1e-2 };
        for n in 0..=3 {
            for m in 0..=3 {
                let a = phi_state(n % 4).unwrap();
                let b = phi_state((m + 1) % 4).unwrap();
                let d = mu_click_distribution(n, m, &a, &b, &det, 0.7).unwrap();
                assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ideal_error_rates() {
        let one_one = yields_and_errors(1, 1, &IDEAL, 1.0, Protocol::Sarg04).unwrap();
        assert_abs_diff_eq!(one_one.ebits[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(one_one.ebits[1], 0.0, epsilon = 1e-12);
        assert!(one_one.yields[0] > 0.0 && one_one.yields[1] > 0.0);
        for (n, m) in [(2, 0), (0, 2)] {
            let e = yields_and_errors(n, m, &IDEAL, 1.0, Protocol::Sarg04).unwrap();
            assert_abs_diff_eq!(e.ebits[0], 0.5, epsilon = 1e-10);
            assert_abs_diff_eq!(e.ebits[1], 0.5, epsilon = 1e-10);
        }
    }

    #[test]
    fn dark_only_coincidences() {
        let det = DetectorParams { eta: 0.5, dark: 1e-3 };
        let e = yields_and_errors(0, 0, &det, 1.0, Protocol::Sarg04).unwrap();
        let pair = 2.0 * det.dark.powi(2) * (1.0 - det.dark).powi(2);
        assert_abs_diff_eq!(e.yields[0], pair, epsilon = 1e-18);
        assert_abs_diff_eq!(e.yields[1], pair, epsilon = 1e-18);
        assert_abs_diff_eq!(e.ebits[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn singlet_detection_is_rotation_covariant() {
        let det = DetectorParams { eta: 0.6, dark: 0.0 };
        let base = sarg04_rotation_response(1, 1, &det, 0.8, 0).unwrap();
        for k in 1..4 {
            let r = sarg04_rotation_response(1, 1, &det, 0.8, k).unwrap();
            assert_abs_diff_eq!(r.yields[0], base.yields[0], epsilon = 1e-12);
            assert_abs_diff_eq!(r.ebits[0], base.ebits[0], epsilon = 1e-12);
        }
        // a bunched pair plus a dark click can mimic Type1, at order d
        let noisy = DetectorParams { eta: 0.6, dark: 1e-4 };
        let base = sarg04_rotation_response(1, 1, &noisy, 0.8, 0).unwrap();
        let r = sarg04_rotation_response(1, 1, &noisy, 0.8, 1).unwrap();
        assert!((r.yields[0] - base.yields[0]).abs() < 10.0 * noisy.dark);
    }

    #[test]
    fn loss_composes() {
        let det = DetectorParams { eta: 0.5, dark: 1e-5 };
        let table = LosslessTable::new(Protocol::Sarg04, det.dark, 3).unwrap();
        for (n, m) in [(1, 2), (3, 1), (2, 2)] {
            let direct = table.response(n, m, 0.3 * 0.4);
            let two_stage = {
                // thin by 0.3, then by 0.4, via the intermediate survivor numbers
                let mut y = [0.0; 2];
                let (wn, wm) = (thinning_weights(n, 0.3), thinning_weights(m, 0.3));
                for (a, x) in wn.iter().enumerate() {
                    for (b, z) in wm.iter().enumerate() {
                        let e = table.response(a, b, 0.4);
                        for t in 0..2 {
                            y[t] += x * z * e.yields[t];
                        }
                    }
                }
                y
            };
            assert_abs_diff_eq!(direct.yields[0], two_stage[0], epsilon = 1e-12);
            assert_abs_diff_eq!(direct.yields[1], two_stage[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn arm_swap_symmetry() {
        let table = LosslessTable::new(Protocol::Sarg04, 1e-3, 3).unwrap();
        for (n, m) in [(1, 2), (0, 3), (1, 3)] {
            let a = table.response(n, m, 0.5);
            let b = table.response(m, n, 0.5);
            for t in 0..2 {
                assert_abs_diff_eq!(a.yields[t], b.yields[t], epsilon = 1e-12);
                assert_abs_diff_eq!(a.ebits[t], b.ebits[t], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn qnd_blocks_multiphoton_without_loss() {
        let table = LosslessTable::new(Protocol::Sarg04, 0.0, 2).unwrap();
        let r = MuResponse::through_channel(&table, 3, 1.0, 0.5, true).unwrap();
        assert_eq!(r.entry(1, 2).yields, [0.0, 0.0]);
        assert_eq!(r.entry(2, 1).yields, [0.0, 0.0]);
        assert!(r.entry(1, 1).yields[0] > 0.0);
    }

    #[test]
    fn patterns() {
        assert_eq!(ClickPattern(ClickPattern::LD | ClickPattern::RA).classify(), Some(Announcement::Type1));
        assert_eq!(ClickPattern(ClickPattern::RD | ClickPattern::RA).classify(), Some(Announcement::Type2));
        assert_eq!(ClickPattern(ClickPattern::LD | ClickPattern::RD).classify(), None);
        assert_eq!(ClickPattern(7).classify(), None);
        assert_eq!(ClickPattern::from_flags([true, false, false, true]).to_string(), "LD&RA");
        assert_eq!(ClickPattern::all().filter(|p| p.classify().is_some()).count(), 4);
    }

    #[test]
    fn channel_transmittance() {
        let c = ChannelParams { loss_db_per_km: 0.2, distance_km: 100.0 };
        assert_abs_diff_eq!(c.t_arm(), 0.1, epsilon = 1e-15);
    }
}
