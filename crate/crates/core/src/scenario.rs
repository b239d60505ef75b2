//! Scenario configuration, mean-photon-number optimisation, distance
//! sweeps and CSV output.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{f_type1, g_type2, phase_bound};
use crate::error::{Error, Result};
use crate::optics::{ChannelParams, DetectorParams, LosslessTable, MuResponse, Protocol, MAX_PHOTONS};
use crate::povm::{Announcement, PhotonCase};
use crate::rate::{bb84_baseline_rate, gains_from_response, key_rate, GainTable, KeyRateBreakdown, PhotonTerms, RateOptions, TypeSelection};
use crate::search::{argmin, golden_section_min, log_grid};
use crate::sources::{poisson_source, spdc_heralded, PairStatistics, PhotonNumberDist, MAX_CUTOFF};

/// Environment variable holding the sweep worker count.
pub const THREADS_ENV: &str = "MDISARG_THREADS";

const MU_GRID_POINTS: usize = 40;
const MU_REL_TOL: f64 = 1e-4;
const MAX_GRID_POINTS: usize = 100_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Weak coherent pulses, QND filter at the relay.
    #[default]
    QndCoherent,
    /// Heralded down-conversion sources, no QND.
    SpdcHeralded,
    /// MDI-BB84 with weak coherent pulses.
    Bb84Baseline,
}

impl Scenario {
    pub fn uses_qnd(self) -> bool {
        self == Scenario::QndCoherent
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::QndCoherent => "qnd_coherent",
            Scenario::SpdcHeralded => "spdc_heralded",
            Scenario::Bb84Baseline => "bb84_baseline",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "qnd_coherent" => Ok(Scenario::QndCoherent),
            "spdc_heralded" => Ok(Scenario::SpdcHeralded),
            "bb84_baseline" => Ok(Scenario::Bb84Baseline),
            other => Err(Error::Config(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceGrid {
    pub start_km: f64,
    pub stop_km: f64,
    pub step_km: f64,
}

impl DistanceGrid {
    pub fn single(km: f64) -> Self {
        Self { start_km: km, stop_km: km, step_km: 1.0 }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_km - self.start_km) / self.step_km + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start_km + i as f64 * self.step_km).collect()
    }
}

impl Default for DistanceGrid {
    fn default() -> Self {
        Self { start_km: 0.0, stop_km: 60.0, step_km: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuRange {
    pub min: f64,
    pub max: f64,
    /// Skip optimisation and evaluate at this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<f64>,
}

impl Default for MuRange {
    fn default() -> Self {
        Self { min: 1e-4, max: 1.5, fixed: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub detector: DetectorParams,
    /// Herald detector of the down-conversion source; defaults to `detector`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub herald_detector: Option<DetectorParams>,
    pub loss_db_per_km: f64,
    pub ec_inefficiency: f64,
    pub distance: DistanceGrid,
    pub mu: MuRange,
    pub type_selection: TypeSelection,
    pub photon_terms: PhotonTerms,
    pub n_cutoff: usize,
    pub pair_statistics: PairStatistics,
    /// Also optimise and report the MDI-BB84 rate with the same sources.
    pub compare_bb84: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            detector: DetectorParams::GYS,
            herald_detector: None,
            loss_db_per_km: 0.21,
            ec_inefficiency: 1.22,
            distance: DistanceGrid::default(),
            mu: MuRange::default(),
            type_selection: TypeSelection::Both,
            photon_terms: PhotonTerms::UpToTwo,
            n_cutoff: 6,
            pair_statistics: PairStatistics::Thermal,
            compare_bb84: true,
            output: None,
        }
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::InvalidArgument(msg) => Error::Config(msg),
        other => other,
    }
}

impl ScenarioConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn herald(&self) -> DetectorParams {
        self.herald_detector.unwrap_or(self.detector)
    }

    pub fn rate_options(&self) -> RateOptions {
        RateOptions { photon_terms: self.photon_terms, type_selection: self.type_selection }
    }

    pub fn validate(&self) -> Result<()> {
        self.detector.validate().map_err(config_err)?;
        self.herald().validate().map_err(config_err)?;
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.loss_db_per_km >= 0.0 && self.loss_db_per_km.is_finite()) {
            return bad(format!("loss_db_per_km = {} must be nonnegative", self.loss_db_per_km));
        }
        if !(self.ec_inefficiency >= 1.0 && self.ec_inefficiency.is_finite()) {
            return bad(format!("ec_inefficiency = {} must be >= 1", self.ec_inefficiency));
        }
        let d = &self.distance;
        if !(d.start_km >= 0.0 && d.stop_km >= d.start_km && d.step_km > 0.0 && d.stop_km.is_finite()) {
            return bad(format!("distance grid {}..{} step {} is empty or invalid", d.start_km, d.stop_km, d.step_km));
        }
        if (d.stop_km - d.start_km) / d.step_km > MAX_GRID_POINTS as f64 {
            return bad(format!("distance grid has more than {MAX_GRID_POINTS} points"));
        }
        let m = &self.mu;
        if !(m.min > 0.0 && m.max > m.min && m.max.is_finite()) {
            return bad(format!("mu range [{}, {}] must satisfy 0 < min < max", m.min, m.max));
        }
        if let Some(f) = m.fixed {
            if !(f > 0.0 && f.is_finite()) {
                return bad(format!("fixed mu {f} must be positive"));
            }
        }
        if !(2..=MAX_CUTOFF).contains(&self.n_cutoff) {
            return bad(format!("n_cutoff = {} outside 2..={MAX_CUTOFF}", self.n_cutoff));
        }
        Ok(())
    }
}

/// Which key-rate formula a rate evaluation uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Sarg04,
    Bb84,
}

/// A key rate at one mean photon number.
#[derive(Clone, Debug, PartialEq)]
pub struct RateEval {
    pub mu: f64,
    pub breakdown: KeyRateBreakdown,
    /// Key-basis gains.
    pub gains: GainTable,
    /// Herald probability per source (1 without heralding).
    pub p_herald: f64,
}

impl RateEval {
    /// Rate per pump pulse pair: per heralded pair times `p_herald^2`.
    pub fn per_pump(&self) -> f64 {
        self.breakdown.total * self.p_herald * self.p_herald
    }
}

/// Relay responses shared by every distance of a sweep.
#[derive(Clone, Debug)]
pub struct Engine {
    config: ScenarioConfig,
    sarg: LosslessTable,
    bb84: (LosslessTable, LosslessTable),
}

impl Engine {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let cap = if config.scenario.uses_qnd() { 1 } else { MAX_PHOTONS };
        let dark = config.detector.dark;
        Ok(Self {
            sarg: LosslessTable::new(Protocol::Sarg04, dark, cap)?,
            bb84: (LosslessTable::new(Protocol::Bb84Key, dark, cap)?, LosslessTable::new(Protocol::Bb84Test, dark, cap)?),
            config,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    /// The scenario's own key-rate formula.
    pub fn primary_family(&self) -> Family {
        if self.config.scenario == Scenario::Bb84Baseline {
            Family::Bb84
        } else {
            Family::Sarg04
        }
    }

    pub fn at_distance(&self, distance_km: f64) -> Result<DistancePoint<'_>> {
        let channel = ChannelParams { loss_db_per_km: self.config.loss_db_per_km, distance_km };
        channel.validate().map_err(config_err)?;
        Ok(DistancePoint { engine: self, channel, sarg: None, bb84: None })
    }

    /// Sender photon statistics and herald probability at `mu`.
    pub fn source(&self, mu: f64) -> Result<(PhotonNumberDist, f64)> {
        match self.config.scenario {
            Scenario::QndCoherent | Scenario::Bb84Baseline => Ok((poisson_source(mu, self.config.n_cutoff)?, 1.0)),
            Scenario::SpdcHeralded => {
                let h = spdc_heralded(mu, self.config.herald(), self.config.n_cutoff, self.config.pair_statistics)?;
                Ok((h.conditional, h.p_herald))
            }
        }
    }
}

/// Per-distance evaluator; caches relay responses as photon cutoffs grow.
pub struct DistancePoint<'a> {
    engine: &'a Engine,
    channel: ChannelParams,
    sarg: Option<MuResponse>,
    bb84: Option<(MuResponse, MuResponse)>,
}

impl DistancePoint<'_> {
    pub fn channel(&self) -> ChannelParams {
        self.channel
    }

    fn response(&self, table: &LosslessTable, n_max: usize) -> Result<MuResponse> {
        let cfg = &self.engine.config;
        MuResponse::through_channel(table, n_max, self.channel.t_arm(), cfg.detector.eta, cfg.scenario.uses_qnd())
    }

    pub fn evaluate(&mut self, family: Family, mu: f64) -> Result<RateEval> {
        let (dist, p_herald) = self.engine.source(mu)?;
        let n = dist.cutoff();
        let cfg = &self.engine.config;
        match family {
            Family::Sarg04 => {
                if self.sarg.as_ref().is_none_or(|r| r.n_max() < n) {
                    self.sarg = Some(self.response(&self.engine.sarg, n + 2)?);
                }
                let gains = gains_from_response(&dist, &dist, self.sarg.as_ref().expect("filled above"))?;
                let breakdown = key_rate(&gains, cfg.ec_inefficiency, cfg.rate_options())?;
                Ok(RateEval { mu, breakdown, gains, p_herald })
            }
            Family::Bb84 => {
                if self.bb84.as_ref().is_none_or(|r| r.0.n_max() < n) {
                    let (k, t) = &self.engine.bb84;
                    self.bb84 = Some((self.response(k, n + 2)?, self.response(t, n + 2)?));
                }
                let (kr, tr) = self.bb84.as_ref().expect("filled above");
                let key = gains_from_response(&dist, &dist, kr)?;
                let test = gains_from_response(&dist, &dist, tr)?;
                let breakdown = bb84_baseline_rate(&key, &test, cfg.ec_inefficiency)?;
                Ok(RateEval { mu, breakdown, gains: key, p_herald })
            }
        }
    }

    /// Maximise the per-pump-pulse rate over `mu` (or evaluate the fixed `mu`).
    pub fn optimize(&mut self, family: Family) -> Result<MuOptimum> {
        let range = self.engine.config.mu;
        if let Some(mu) = range.fixed {
            let eval = self.evaluate(family, mu)?;
            return Ok(MuOptimum { zero_rate: eval.breakdown.total <= 0.0, eval });
        }
        let grid = log_grid(range.min, range.max, MU_GRID_POINTS);
        let mut evals = Vec::with_capacity(grid.len());
        for &mu in &grid {
            evals.push(self.evaluate(family, mu)?);
        }
        let neg: Vec<f64> = evals.iter().map(|e| -e.per_pump()).collect();
        if neg.iter().all(|&v| v >= 0.0) {
            let eval = evals.swap_remove(0);
            return Ok(MuOptimum { eval, zero_rate: true });
        }
        let j = argmin(&neg);
        let lo = grid[j.saturating_sub(1)].ln();
        let hi = grid[(j + 1).min(grid.len() - 1)].ln();
        let mut failure = None;
        let refined = golden_section_min(
            |x| match self.evaluate(family, x.exp()) {
                Ok(e) => -e.per_pump(),
                Err(err) => {
                    failure.get_or_insert(err);
                    f64::INFINITY
                }
            },
            lo,
            hi,
            MU_REL_TOL,
        );
        if let Some(err) = failure {
            return Err(err);
        }
        let eval = if refined.value < neg[j] { self.evaluate(family, refined.x.exp())? } else { evals.swap_remove(j) };
        Ok(MuOptimum { eval, zero_rate: false })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MuOptimum {
    pub eval: RateEval,
    /// Set when every probed `mu` gives zero key.
    pub zero_rate: bool,
}

impl MuOptimum {
    pub fn mu(&self) -> f64 {
        self.eval.mu
    }
}

/// Optimal `mu` and its rate breakdown for the scenario's own protocol.
pub fn optimize_mu(config: &ScenarioConfig, distance_km: f64) -> Result<MuOptimum> {
    let engine = Engine::new(config.clone())?;
    let family = engine.primary_family();
    engine.at_distance(distance_km)?.optimize(family)
}

/// One row of a rate curve.
#[derive(Clone, Debug, PartialEq)]
pub struct RateCurvePoint {
    pub distance_km: f64,
    pub mu_opt: f64,
    pub g1: f64,
    pub g2: f64,
    /// Per sender pulse pair, or per heralded pair with heralding.
    pub total: f64,
    pub e_tot_1: f64,
    pub e_tot_2: f64,
    pub p_herald: f64,
    pub total_per_pump: f64,
    pub zero_rate: bool,
    pub bb84_mu_opt: Option<f64>,
    pub bb84_total: Option<f64>,
    pub bb84_total_per_pump: Option<f64>,
}

impl RateCurvePoint {
    fn from_optimum(distance_km: f64, opt: &MuOptimum, bb84: Option<&MuOptimum>) -> Self {
        let e = &opt.eval;
        Self {
            distance_km,
            mu_opt: e.mu,
            g1: e.breakdown.g_of(Announcement::Type1),
            g2: e.breakdown.g_of(Announcement::Type2),
            total: e.breakdown.total,
            e_tot_1: e.gains.e_tot(Announcement::Type1),
            e_tot_2: e.gains.e_tot(Announcement::Type2),
            p_herald: e.p_herald,
            total_per_pump: e.per_pump(),
            zero_rate: opt.zero_rate,
            bb84_mu_opt: bb84.map(|b| b.mu()),
            bb84_total: bb84.map(|b| b.eval.breakdown.total),
            bb84_total_per_pump: bb84.map(|b| b.eval.per_pump()),
        }
    }
}

/// Optimise at one distance with an existing engine.
pub fn rate_point(engine: &Engine, distance_km: f64) -> Result<RateCurvePoint> {
    let mut point = engine.at_distance(distance_km)?;
    let family = engine.primary_family();
    let opt = point.optimize(family)?;
    let bb84 = if engine.config.compare_bb84 {
        Some(if family == Family::Bb84 { opt.clone() } else { point.optimize(Family::Bb84)? })
    } else {
        None
    };
    Ok(RateCurvePoint::from_optimum(distance_km, &opt, bb84.as_ref()))
}

fn worker_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Evaluate every distance of the grid; rows come back in distance order.
pub fn run_sweep(config: &ScenarioConfig) -> Result<Vec<RateCurvePoint>> {
    let engine = Engine::new(config.clone())?;
    let distances = config.distance.points();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Internal(format!("worker pool: {e}")))?;
    pool.install(|| distances.par_iter().map(|&d| rate_point(&engine, d)).collect())
}

/// C `%.12g`.
pub fn format_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn rate_curve_csv(points: &[RateCurvePoint], with_bb84: bool) -> String {
    let mut out = String::from(
        "distance_km,mu_opt,g1,g2,total,e_tot_1,e_tot_2,p_herald,total_per_pump,zero_rate",
    );
    if with_bb84 {
        out.push_str(",bb84_mu_opt,bb84_total,bb84_total_per_pump");
    }
    out.push('\n');
    for p in points {
        let cols = [p.distance_km, p.mu_opt, p.g1, p.g2, p.total, p.e_tot_1, p.e_tot_2, p.p_herald, p.total_per_pump];
        let row: Vec<String> = cols.iter().map(|&v| format_g(v)).collect();
        out.push_str(&row.join(","));
        out.push_str(if p.zero_rate { ",1" } else { ",0" });
        if with_bb84 {
            for v in [p.bb84_mu_opt, p.bb84_total, p.bb84_total_per_pump] {
                let _ = write!(out, ",{}", v.map_or(String::new(), format_g));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Relay response table at one distance, for the scenario's channel.
pub fn mu_table_csv(config: &ScenarioConfig, distance_km: f64, protocol: Protocol, n_max: usize) -> Result<String> {
    config.validate()?;
    let channel = ChannelParams { loss_db_per_km: config.loss_db_per_km, distance_km };
    channel.validate().map_err(config_err)?;
    let qnd = config.scenario.uses_qnd();
    let cap = if qnd { 1 } else { n_max.min(MAX_PHOTONS) };
    let table = LosslessTable::new(protocol, config.detector.dark, cap)?;
    let r = MuResponse::through_channel(&table, n_max, channel.t_arm(), config.detector.eta, qnd)?;
    let mut out = String::from("n,m,yield_t1,ebit_t1,yield_t2,ebit_t2\n");
    for n in 0..=n_max {
        for m in 0..=n_max {
            let e = r.entry(n, m);
            let _ = writeln!(
                out,
                "{n},{m},{},{},{},{}",
                format_g(e.yields[0]),
                format_g(e.ebits[0]),
                format_g(e.yields[1]),
                format_g(e.ebits[1])
            );
        }
    }
    Ok(out)
}

/// `s, f(s), g(s)` on `0, step, ..., s_max`.
pub fn bound_offsets_csv(s_max: f64, step: f64) -> Result<String> {
    let grid = DistanceGrid { start_km: 0.0, stop_km: s_max, step_km: step };
    if !(step > 0.0 && s_max >= 0.0) {
        return Err(Error::Config(format!("bad s grid 0..{s_max} step {step}")));
    }
    let mut out = String::from("s,f,g\n");
    for s in grid.points() {
        let _ = writeln!(out, "{},{},{}", format_g(s), format_g(f_type1(s)), format_g(g_type2(s)?));
    }
    Ok(out)
}

/// Minimised phase-error bounds per case and Type on `0, step, ..., e_max`.
pub fn phase_bound_csv(e_max: f64, step: f64) -> Result<String> {
    if !(step > 0.0 && (0.0..=1.0).contains(&e_max)) {
        return Err(Error::Config(format!("bad e_bit grid 0..{e_max} step {step}")));
    }
    let grid = DistanceGrid { start_km: 0.0, stop_km: e_max, step_km: step };
    let mut out = String::from("e_bit,e_ph_11_t1,e_ph_11_t2,e_ph_12_t1,e_ph_12_t2\n");
    for e in grid.points() {
        let mut row = vec![format_g(e)];
        for case in [PhotonCase::OneOne, PhotonCase::OneTwo] {
            for ann in Announcement::ALL {
                row.push(format_g(phase_bound(case, ann, e.min(1.0))?.e_ph));
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}
