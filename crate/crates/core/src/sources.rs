//! Photon-number statistics of the senders.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::optics::DetectorParams;

/// Largest tail mass tolerated before the cutoff is raised.
pub const TAIL_TOLERANCE: f64 = 1e-6;
/// Hard ceiling for automatic cutoff raising.
pub const MAX_CUTOFF: usize = 80;

/// `P(n)` for `n = 0..=cutoff` plus the mass beyond the cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonNumberDist {
    probs: Vec<f64>,
    tail_mass: f64,
}

impl PhotonNumberDist {
    pub fn new(probs: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("empty photon-number distribution"));
        }
        if probs.iter().chain([&tail_mass]).any(|p| !p.is_finite() || *p < -1e-15) {
            return Err(invalid("photon-number probabilities must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().sum::<f64>() + tail_mass;
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("photon-number distribution sums to {total}")));
        }
        Ok(Self { probs: probs.into_iter().map(|p| p.max(0.0)).collect(), tail_mass: tail_mass.max(0.0) })
    }

    pub fn delta(n: usize) -> Self {
        let mut probs = vec![0.0; n + 1];
        probs[n] = 1.0;
        Self { probs, tail_mass: 0.0 }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn p(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn cutoff(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

/// Binomial thinning weights `w[k] = C(n,k) t^k (1-t)^(n-k)` for `k = 0..=n`.
pub fn thinning_weights(n: usize, t: f64) -> Vec<f64> {
    let mut coeff = 1.0;
    (0..=n)
        .map(|k| {
            if k > 0 {
                coeff = coeff * (n - k + 1) as f64 / k as f64;
            }
            coeff * t.powi(k as i32) * (1.0 - t).powi((n - k) as i32)
        })
        .collect()
}

fn truncate_with_tail<F: Fn(usize) -> f64>(pmf: F, tail: impl Fn(usize) -> f64, cutoff: usize) -> Result<PhotonNumberDist> {
    let mut cutoff = cutoff.max(1);
    while tail(cutoff) > TAIL_TOLERANCE {
        if cutoff >= MAX_CUTOFF {
            return Err(invalid(format!("photon-number tail exceeds {TAIL_TOLERANCE} even at cutoff {MAX_CUTOFF}")));
        }
        cutoff += 1;
    }
    let probs: Vec<f64> = (0..=cutoff).map(&pmf).collect();
    let tail_mass = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    PhotonNumberDist::new(probs, tail_mass)
}

/// Phase-randomised coherent state of mean photon number `mu`.
///
/// The cutoff is raised until the tail mass is at most [`TAIL_TOLERANCE`].
pub fn poisson_source(mu: f64, cutoff: usize) -> Result<PhotonNumberDist> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(invalid(format!("mean photon number {mu} must be nonnegative")));
    }
    let pmf = |n: usize| {
        if mu == 0.0 {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        (-mu + n as f64 * mu.ln() - ln_factorial(n)).exp()
    };
    let tail = |c: usize| {
        // direct summation of the tail avoids 1 - (1 - tiny) cancellation
        let mut sum = 0.0;
        let mut n = c + 1;
        loop {
            let term = pmf(n);
            sum += term;
            if term < 1e-18 || n > c + 400 {
                break sum;
            }
            n += 1;
        }
    };
    truncate_with_tail(pmf, tail, cutoff)
}

/// Single-mode thermal pair-number distribution `mu^n / (1+mu)^(n+1)`.
pub fn thermal_source(mu: f64, cutoff: usize) -> Result<PhotonNumberDist> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(invalid(format!("mean pair number {mu} must be nonnegative")));
    }
    let r = mu / (1.0 + mu);
    let pmf = |n: usize| r.powi(n as i32) / (1.0 + mu);
    truncate_with_tail(pmf, |c| r.powi(c as i32 + 1), cutoff)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Pair-number statistics of the down-converter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatistics {
    #[default]
    Thermal,
    Poisson,
}

/// A down-conversion source whose idler is detected by a threshold detector.
#[derive(Clone, Debug, PartialEq)]
pub struct HeraldedSource {
    pub pump_mu: f64,
    pub herald_det: DetectorParams,
    pub p_herald: f64,
    /// Signal photon number given a herald click.
    pub conditional: PhotonNumberDist,
}

/// Heralded signal statistics for pump strength `pump_mu`.
///
/// Returns [`Error::Degenerate`] when the herald never fires.
pub fn spdc_heralded(
    pump_mu: f64,
    herald: DetectorParams,
    cutoff: usize,
    statistics: PairStatistics,
) -> Result<HeraldedSource> {
    herald.validate()?;
    let click = |n: usize| 1.0 - (1.0 - herald.dark) * (1.0 - herald.eta).powi(n as i32);
    let mut cutoff = cutoff;
    loop {
        let pairs = match statistics {
            PairStatistics::Thermal => thermal_source(pump_mu, cutoff)?,
            PairStatistics::Poisson => poisson_source(pump_mu, cutoff)?,
        };
        let c = pairs.cutoff();
        // tail photons click at least as often as those at the cutoff
        let tail_click = pairs.tail_mass() * click(c + 1);
        let weighted: Vec<f64> = pairs.probs().iter().enumerate().map(|(n, p)| p * click(n)).collect();
        let p_herald = weighted.iter().sum::<f64>() + tail_click;
        if p_herald <= 0.0 {
            return Err(Error::Degenerate(format!("herald never fires at pump mean {pump_mu} with dark count {}", herald.dark)));
        }
        let tail = tail_click / p_herald;
        if tail > TAIL_TOLERANCE && c < MAX_CUTOFF {
            cutoff = c + 1;
            continue;
        }
        let probs = weighted.iter().map(|w| w / p_herald).collect::<Vec<_>>();
        let total: f64 = probs.iter().sum::<f64>();
        let conditional = PhotonNumberDist::new(probs, (1.0 - total).max(0.0))?;
        return Ok(HeraldedSource { pump_mu, herald_det: herald, p_herald, conditional });
    }
}

/// Per-arm QND filter that passes zero or one photon.
///
/// Returns the acceptance probability and the distribution given acceptance.
pub fn qnd_accept_probability(arriving: &PhotonNumberDist) -> Result<(f64, PhotonNumberDist)> {
    let (p0, p1) = (arriving.p(0), arriving.p(1));
    let accept = p0 + p1;
    if accept <= 0.0 {
        return Err(Error::Degenerate("QND filter rejects every arriving pulse".into()));
    }
    Ok((accept, PhotonNumberDist { probs: vec![p0 / accept, p1 / accept], tail_mass: 0.0 }))
}

/// Binomial thinning through a channel of transmittance `t`.
///
/// The tail mass is carried over unchanged.
pub fn propagate_through_loss(dist: &PhotonNumberDist, t: f64) -> Result<PhotonNumberDist> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(invalid(format!("transmittance {t} outside (0, 1]")));
    }
    let mut out = vec![0.0; dist.probs.len()];
    for (n, &p) in dist.probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (k, w) in thinning_weights(n, t).into_iter().enumerate() {
            out[k] += p * w;
        }
    }
    Ok(PhotonNumberDist { probs: out, tail_mass: dist.tail_mass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn total(d: &PhotonNumberDist) -> f64 {
        d.probs().iter().sum::<f64>() + d.tail_mass()
    }

    #[test]
    fn poisson_basics() {
        let vac = poisson_source(0.0, 6).unwrap();
        assert_eq!(vac.p(0), 1.0);
        let d = poisson_source(0.1, 6).unwrap();
        assert_abs_diff_eq!(d.p(1) / d.p(2), 20.0, epsilon = 1e-12);
        assert_abs_diff_eq!(total(&d), 1.0, epsilon = 1e-12);
        assert!(d.tail_mass() <= TAIL_TOLERANCE);
        assert!(poisson_source(-0.1, 6).is_err());
    }

    #[test]
    fn cutoff_raised_for_bright_pulses() {
        let d = poisson_source(1.5, 6).unwrap();
        assert!(d.cutoff() > 6);
        assert!(d.tail_mass() <= TAIL_TOLERANCE);
        let t = thermal_source(1.5, 6).unwrap();
        assert!(t.tail_mass() <= TAIL_TOLERANCE);
        assert_abs_diff_eq!(t.mean(), 1.5, epsilon = 1e-4);
    }

    #[test]
    fn thinning_matches_poisson_identity() {
        let d = poisson_source(0.4, 12).unwrap();
        let thinned = propagate_through_loss(&d, 0.3).unwrap();
        let direct = poisson_source(0.12, thinned.cutoff()).unwrap();
        for n in 0..=thinned.cutoff() {
            assert_abs_diff_eq!(thinned.p(n), direct.p(n), epsilon = 1e-12);
        }
    }

    #[test]
    fn thinning_edge_cases() {
        let d = PhotonNumberDist::delta(1);
        let t = propagate_through_loss(&d, 0.5).unwrap();
        assert_eq!(t.probs(), &[0.5, 0.5]);
        let same = propagate_through_loss(&poisson_source(0.2, 6).unwrap(), 1.0).unwrap();
        assert_eq!(same, poisson_source(0.2, 6).unwrap());
        assert!(propagate_through_loss(&d, 0.0).is_err());
        assert!(propagate_through_loss(&d, 1.1).is_err());
    }

    #[test]
    fn qnd_window() {
        let arriving = poisson_source(0.01 * 0.5, 6).unwrap();
        let (acc, cond) = qnd_accept_probability(&arriving).unwrap();
        assert_abs_diff_eq!(acc, arriving.p(0) + arriving.p(1), epsilon = 1e-15);
        assert!(1.0 - acc < 0.005f64.powi(2));
        assert_abs_diff_eq!(cond.p(0) + cond.p(1), 1.0, epsilon = 1e-15);
        assert!(qnd_accept_probability(&PhotonNumberDist::delta(2)).is_err());
        let (acc, cond) = qnd_accept_probability(&PhotonNumberDist::delta(1)).unwrap();
        assert_eq!((acc, cond.p(1)), (1.0, 1.0));
    }

    #[test]
    fn heralding() {
        let gys = DetectorParams { eta: 0.045, dark: 8.5e-7 };
        let none = DetectorParams { eta: 0.045, dark: 0.0 };
        assert!(matches!(spdc_heralded(0.0, none, 6, PairStatistics::Thermal), Err(Error::Degenerate(_))));
        let dark_only = spdc_heralded(0.0, gys, 6, PairStatistics::Thermal).unwrap();
        assert_eq!(dark_only.conditional.p(0), 1.0);
        let perfect = spdc_heralded(0.3, DetectorParams { eta: 1.0, dark: 0.0 }, 6, PairStatistics::Thermal).unwrap();
        assert_eq!(perfect.conditional.p(0), 0.0);
        assert_abs_diff_eq!(total(&perfect.conditional), 1.0, epsilon = 1e-12);
        // Poisson pairs at unit efficiency: herald probability is 1 - e^-mu
        let pois = spdc_heralded(0.3, DetectorParams { eta: 1.0, dark: 0.0 }, 6, PairStatistics::Poisson).unwrap();
        assert_abs_diff_eq!(pois.p_herald, 1.0 - (-0.3f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn single_photon_fraction_grows_as_pump_falls() {
        let det = DetectorParams { eta: 0.045, dark: 0.0 };
        let mut last = 0.0;
        for mu in [1.0, 0.5, 0.2, 0.1, 0.01, 0.001] {
            let h = spdc_heralded(mu, det, 6, PairStatistics::Thermal).unwrap();
            assert!(h.conditional.p(1) > last);
            last = h.conditional.p(1);
        }
    }

    #[test]
    fn binomial_weights() {
        let w = thinning_weights(4, 0.25);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[2], 6.0 * 0.0625 * 0.5625, epsilon = 1e-15);
    }
}
