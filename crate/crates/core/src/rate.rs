//! Gains, total error rates and the asymptotic key rate.
//!
//! With infinitely many decoy intensities every `Q^(n,m)` and `e^(n,m)` is
//! known, so the gains are computed directly from the photon-number
//! distributions and the relay response.

use serde::{Deserialize, Serialize};

use crate::bounds::{binary_entropy, phase_bound, saturated_entropy};
use crate::error::{invalid, Result};
use crate::optics::{ChannelParams, DetectorParams, LosslessTable, MuResponse, Protocol, MAX_PHOTONS};
use crate::povm::{Announcement, PhotonCase};
use crate::sources::PhotonNumberDist;

/// `Q_i^(n,m)` and `e_i^(n,m)` per announcement, sifting included.
#[derive(Clone, Debug, PartialEq)]
pub struct GainTable {
    protocol: Protocol,
    n_max: usize,
    q: [Vec<f64>; 2],
    e: [Vec<f64>; 2],
    pub q_tot: [f64; 2],
    pub e_tot: [f64; 2],
}

impl GainTable {
    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn at(&self, n: usize, m: usize) -> Option<usize> {
        (n <= self.n_max && m <= self.n_max).then(|| n * (self.n_max + 1) + m)
    }

    pub fn q(&self, ann: Announcement, n: usize, m: usize) -> f64 {
        self.at(n, m).map_or(0.0, |i| self.q[ann.slot()][i])
    }

    pub fn e(&self, ann: Announcement, n: usize, m: usize) -> f64 {
        self.at(n, m).map_or(0.0, |i| self.e[ann.slot()][i])
    }

    pub fn q_tot(&self, ann: Announcement) -> f64 {
        self.q_tot[ann.slot()]
    }

    pub fn e_tot(&self, ann: Announcement) -> f64 {
        self.e_tot[ann.slot()]
    }
}

/// Combine the senders' photon statistics with a relay response.
pub fn gains_from_response(a: &PhotonNumberDist, b: &PhotonNumberDist, response: &MuResponse) -> Result<GainTable> {
    let n_max = a.cutoff().max(b.cutoff());
    if n_max > response.n_max() {
        return Err(invalid(format!(
            "photon distributions reach n = {n_max} but the response table stops at {}",
            response.n_max()
        )));
    }
    let protocol = response.protocol();
    let size = (n_max + 1) * (n_max + 1);
    let mut q = [vec![0.0; size], vec![0.0; size]];
    let mut e = [vec![0.0; size], vec![0.0; size]];
    let mut q_tot = [0.0; 2];
    let mut qe_tot = [0.0; 2];
    for n in 0..=n_max {
        for m in 0..=n_max {
            let weight = a.p(n) * b.p(m);
            let entry = response.entry(n, m);
            for ann in Announcement::ALL {
                let t = ann.slot();
                let gain = weight * protocol.sift(ann) * entry.yields[t];
                q[t][n * (n_max + 1) + m] = gain;
                e[t][n * (n_max + 1) + m] = entry.ebits[t];
                q_tot[t] += gain;
                qe_tot[t] += gain * entry.ebits[t];
            }
        }
    }
    let e_tot = [0, 1].map(|t| if q_tot[t] > 0.0 { qe_tot[t] / q_tot[t] } else { 0.0 });
    Ok(GainTable { protocol, n_max, q, e, q_tot, e_tot })
}

/// Gains for two senders through a symmetric channel, building the relay
/// response from scratch. Sweeps should reuse a [`LosslessTable`] instead.
pub fn assemble_gains(
    source_a: &PhotonNumberDist,
    source_b: &PhotonNumberDist,
    channel: &ChannelParams,
    det: &DetectorParams,
    qnd: bool,
    protocol: Protocol,
) -> Result<GainTable> {
    channel.validate()?;
    det.validate()?;
    let n_max = source_a.cutoff().max(source_b.cutoff());
    let cap = if qnd { 1 } else { n_max.min(MAX_PHOTONS) };
    let table = LosslessTable::new(protocol, det.dark, cap)?;
    let response = MuResponse::through_channel(&table, n_max, channel.t_arm(), det.eta, qnd)?;
    gains_from_response(source_a, source_b, &response)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonTerms {
    /// Only `(1,1)` contributes key.
    OneOneOnly,
    /// `(1,1)`, `(1,2)` and `(2,1)` contribute key.
    #[default]
    UpToTwo,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeSelection {
    Type1Only,
    Type2Only,
    #[default]
    Both,
}

impl TypeSelection {
    pub fn includes(self, ann: Announcement) -> bool {
        matches!(
            (self, ann),
            (TypeSelection::Both, _) | (TypeSelection::Type1Only, Announcement::Type1) | (TypeSelection::Type2Only, Announcement::Type2)
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateOptions {
    #[serde(default)]
    pub photon_terms: PhotonTerms,
    #[serde(default)]
    pub type_selection: TypeSelection,
}

/// One privacy-amplified term `Q [1 - h(e_ph)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contribution {
    pub announcement: Announcement,
    pub case: PhotonCase,
    pub gain: f64,
    pub e_bit: f64,
    pub e_ph: f64,
    pub term: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeyRateBreakdown {
    /// Per-Type rate, clamped at zero.
    pub g: [f64; 2],
    /// Per-Type rate before clamping.
    pub raw: [f64; 2],
    pub total: f64,
    pub contributions: Vec<Contribution>,
    /// `f_EC Q_tot h(e_tot)` per Type.
    pub ec_cost: [f64; 2],
}

impl KeyRateBreakdown {
    pub fn zero() -> Self {
        Self { g: [0.0; 2], raw: [0.0; 2], total: 0.0, contributions: Vec::new(), ec_cost: [0.0; 2] }
    }

    pub fn g_of(&self, ann: Announcement) -> f64 {
        self.g[ann.slot()]
    }
}

fn check_ec(ec_inefficiency: f64) -> Result<()> {
    if !(ec_inefficiency >= 1.0 && ec_inefficiency.is_finite()) {
        return Err(invalid(format!("error-correction inefficiency {ec_inefficiency} must be >= 1")));
    }
    Ok(())
}

/// `G_i = sum_(n,m) Q_i^(n,m) [1 - h(e_ph)] - f_EC Q_i^tot h(e_i^tot)`.
pub fn key_rate(gains: &GainTable, ec_inefficiency: f64, options: RateOptions) -> Result<KeyRateBreakdown> {
    check_ec(ec_inefficiency)?;
    let cases: &[PhotonCase] = match options.photon_terms {
        PhotonTerms::OneOneOnly => &[PhotonCase::OneOne],
        PhotonTerms::UpToTwo => &[PhotonCase::OneOne, PhotonCase::OneTwo, PhotonCase::TwoOne],
    };
    let mut out = KeyRateBreakdown::zero();
    for ann in Announcement::ALL {
        if !options.type_selection.includes(ann) {
            continue;
        }
        let t = ann.slot();
        let mut key = 0.0;
        for &case in cases {
            let (n, m) = case.counts();
            let gain = gains.q(ann, n, m);
            if gain <= 0.0 {
                continue;
            }
            let e_bit = gains.e(ann, n, m);
            let e_ph = phase_bound(case, ann, e_bit)?.e_ph;
            let term = gain * (1.0 - saturated_entropy(e_ph));
            key += term;
            out.contributions.push(Contribution { announcement: ann, case, gain, e_bit, e_ph, term });
        }
        let ec = ec_inefficiency * gains.q_tot(ann) * binary_entropy(gains.e_tot(ann))?;
        out.ec_cost[t] = ec;
        out.raw[t] = key - ec;
        out.g[t] = out.raw[t].max(0.0);
    }
    out.total = out.g.iter().sum();
    Ok(out)
}

/// MDI-BB84 comparison rate: per Type,
/// `Q_key^(1,1) [1 - h(e_test^(1,1))] - f_EC Q_key^tot h(E_key^tot)`, clamped
/// at zero and summed.
pub fn bb84_baseline_rate(key: &GainTable, test: &GainTable, ec_inefficiency: f64) -> Result<KeyRateBreakdown> {
    check_ec(ec_inefficiency)?;
    if key.protocol() != Protocol::Bb84Key || test.protocol() != Protocol::Bb84Test {
        return Err(invalid("BB84 baseline needs key-basis and test-basis gain tables"));
    }
    let mut out = KeyRateBreakdown::zero();
    for ann in Announcement::ALL {
        let t = ann.slot();
        let gain = key.q(ann, 1, 1);
        let e_ph = test.e(ann, 1, 1);
        let term = gain * (1.0 - saturated_entropy(e_ph));
        if gain > 0.0 {
            out.contributions.push(Contribution {
                announcement: ann,
                case: PhotonCase::OneOne,
                gain,
                e_bit: key.e(ann, 1, 1),
                e_ph,
                term,
            });
        }
        let ec = ec_inefficiency * key.q_tot(ann) * binary_entropy(key.e_tot(ann))?;
        out.ec_cost[t] = ec;
        out.raw[t] = term - ec;
        out.g[t] = out.raw[t].max(0.0);
    }
    out.total = out.g.iter().sum();
    Ok(out)
}
