//! One PASS/FAIL line per acceptance criterion; exits non-zero on any failure.
//!
//!     cargo test --test acceptance

use std::process::Command;
use std::time::{Duration, Instant};

use mdi_sarg04::bounds::{eval_cubic, f_type1, g_cubic_coefficients, g_type2, phase_bound, S_CAP};
use mdi_sarg04::optics::{yields_and_errors, ChannelParams, DetectorParams, Protocol};
use mdi_sarg04::povm::{attack_state_22, bell_ancilla_projection, build_povm, certificate_min_eigenvalue, error_rates};
use mdi_sarg04::quantum::{min_eigenvalue, DensityOperator};
use mdi_sarg04::rate::{assemble_gains, PhotonTerms};
use mdi_sarg04::scenario::{rate_point, DistanceGrid, Engine, Family, ScenarioConfig};
use mdi_sarg04::sources::poisson_source;
use mdi_sarg04::{Announcement, PhotonCase, Result};

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn povm_identity() -> Result<Outcome> {
    let start = Instant::now();
    let p = build_povm(PhotonCase::OneOne, Announcement::Type1);
    let mut dev: f64 = 0.0;
    let dim = p.ph.dim();
    for r in 0..dim {
        for c in 0..dim {
            dev = dev.max((p.ph.entry(r, c) - p.bit.entry(r, c) * 1.5).norm());
        }
    }
    let t = start.elapsed();
    outcome(dev <= 1e-12 && within(t, 1.0), format!("max |ph - 1.5 bit| = {dev:.3e} in {t:.2?}"))
}

fn type2_bound() -> Result<Outcome> {
    let start = Instant::now();
    let p = build_povm(PhotonCase::OneOne, Announcement::Type2);
    let at3 = min_eigenvalue(&(&(&p.bit * 3.0) - &p.ph))?;
    let at29 = min_eigenvalue(&(&(&p.bit * 2.9) - &p.ph))?;
    let t = start.elapsed();
    outcome(
        at3 >= -1e-10 && at29 <= -1e-6 && within(t, 1.0),
        format!("min eig(3 bit - ph) = {at3:.3e}, min eig(2.9 bit - ph) = {at29:.3e} in {t:.2?}"),
    )
}

fn frontiers() -> Result<Outcome> {
    let start = Instant::now();
    let grid: Vec<f64> = (0..=20).map(|i| 0.25 * i as f64).collect();
    let mut valid = true;
    let mut worst: f64 = f64::INFINITY;
    let mut tight = [false; 2];
    for (slot, ann) in Announcement::ALL.into_iter().enumerate() {
        let p = build_povm(PhotonCase::OneTwo, ann);
        for &s in &grid {
            let t = match ann {
                Announcement::Type1 => f_type1(s),
                Announcement::Type2 => g_type2(s)?,
            };
            let ev = certificate_min_eigenvalue(&p, s, t * (1.0 + 1e-6))?;
            worst = worst.min(ev);
            valid &= ev >= -1e-9;
            if certificate_min_eigenvalue(&p, s, t * (1.0 - 1e-2))? < -1e-9 {
                tight[slot] = true;
            }
        }
    }
    let mut residual: f64 = 0.0;
    for &s in &grid {
        residual = residual.max(eval_cubic(&g_cubic_coefficients(s), g_type2(s)?).abs());
    }
    let g0 = g_type2(0.0)?;
    let t = start.elapsed();
    outcome(
        valid && tight == [true, true] && residual <= 1e-10 && (g0 - 1.0).abs() <= 1e-10 && within(t, 5.0),
        format!(
            "worst certificate eig {worst:.3e}, tight (f, g) = {tight:?}, cubic residual {residual:.3e}, g(0) - 1 = {:.3e} in {t:.2?}",
            g0 - 1.0
        ),
    )
}

fn attack_22() -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    let mut track = |e: mdi_sarg04::povm::ErrorPair, bit: f64, ph: f64| {
        dev = dev.max((e.e_bit - bit).abs()).max((e.e_ph - ph).abs());
    };
    let t1 = build_povm(PhotonCase::TwoTwo, Announcement::Type1);
    let mu1 = attack_state_22(Announcement::Type1, 1)?;
    let mu2 = attack_state_22(Announcement::Type1, 2)?;
    track(error_rates(&t1, &DensityOperator::pure(&mu1)?)?, 0.0, 0.5);
    track(error_rates(&t1, &DensityOperator::pure(&mu2)?)?, 0.5, 0.5);

    let t2 = build_povm(PhotonCase::TwoTwo, Announcement::Type2);
    let nu = |i| attack_state_22(Announcement::Type2, i).and_then(|v| DensityOperator::pure(&v));
    let (n1, n2, n3, n4) = (nu(1)?, nu(2)?, nu(3)?, nu(4)?);
    track(error_rates(&t2, &DensityOperator::mixture(&[(0.25, &n1), (0.75, &n2)])?)?, 0.0, 0.5);
    track(error_rates(&t2, &DensityOperator::mixture(&[(0.75, &n3), (0.25, &n4)])?)?, 0.5, 0.5);

    let mut herald: f64 = 0.0;
    for mu in [&mu1, &mu2] {
        herald = herald.max((bell_ancilla_projection(mu)?.norm_sqr() - 1.0 / 16.0).abs());
    }
    outcome(
        dev <= 1e-12 && herald <= 1e-12,
        format!("max error-rate deviation {dev:.3e}, max |p_success - 1/16| = {herald:.3e}"),
    )
}

fn error_floor() -> Result<Outcome> {
    let ideal = DetectorParams { eta: 1.0, dark: 0.0 };
    let channel = ChannelParams { loss_db_per_km: 0.21, distance_km: 0.0 };
    let src = poisson_source(0.01, 6)?;
    let gains = assemble_gains(&src, &src, &channel, &ideal, false, Protocol::Sarg04)?;
    let e_tot = Announcement::ALL.map(|a| gains.e_tot(a));
    let floor_ok = e_tot.iter().all(|e| (0.24..=0.26).contains(e));
    let e20 = yields_and_errors(2, 0, &ideal, 1.0, Protocol::Sarg04)?;
    let e02 = yields_and_errors(0, 2, &ideal, 1.0, Protocol::Sarg04)?;
    let e11 = yields_and_errors(1, 1, &ideal, 1.0, Protocol::Sarg04)?;
    let multi = e20.ebits.iter().chain(&e02.ebits).fold(0.0f64, |m, e| m.max((e - 0.5).abs()));
    let single = e11.ebits.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    outcome(
        floor_ok && multi <= 1e-10 && single <= 1e-12,
        format!(
            "e_tot = ({:.5}, {:.5}), max |e(2,0|0,2) - 1/2| = {multi:.3e}, max e(1,1) = {single:.3e}",
            e_tot[0], e_tot[1]
        ),
    )
}

fn rate_curve_properties() -> Result<Outcome> {
    let start = Instant::now();
    let grid = DistanceGrid { start_km: 0.0, stop_km: 60.0, step_km: 2.0 };
    let full = Engine::new(ScenarioConfig { distance: grid, ..Default::default() })?;
    let one_one = Engine::new(ScenarioConfig {
        distance: grid,
        photon_terms: PhotonTerms::OneOneOnly,
        compare_bb84: false,
        ..Default::default()
    })?;

    // serial on purpose: the criterion is single-threaded
    let mut below_bb84 = true;
    let mut above_one_one = true;
    let mut mu_monotone = true;
    let mut prev_mu = f64::INFINITY;
    let mut worst_rise: f64 = 0.0;
    for d in grid.points() {
        let f = rate_point(&full, d)?;
        let o = rate_point(&one_one, d)?;
        below_bb84 &= f.total <= f.bb84_total.expect("compare_bb84 is on");
        above_one_one &= f.total >= o.total;
        if o.mu_opt > prev_mu {
            mu_monotone = false;
            worst_rise = worst_rise.max(o.mu_opt - prev_mu);
        }
        prev_mu = o.mu_opt;
    }

    let mut at_zero = full.at_distance(0.0)?;
    let best = at_zero.optimize(Family::Sarg04)?;
    let q_multi = Announcement::ALL
        .into_iter()
        .map(|a| best.eval.gains.q(a, 1, 2).abs() + best.eval.gains.q(a, 2, 1).abs())
        .fold(0.0, f64::max);
    let o0 = rate_point(&one_one, 0.0)?;
    let gap = (best.eval.breakdown.total - o0.total).abs();
    let t = start.elapsed();
    outcome(
        below_bb84 && above_one_one && mu_monotone && q_multi == 0.0 && gap <= 1e-9 && within(t, 120.0),
        format!(
            "sarg<=bb84 {below_bb84}, full>=(1,1) {above_one_one}, (1,1) mu non-increasing {mu_monotone} (worst rise {worst_rise:.2e}), \
             0 km Q(1,2)+Q(2,1) = {q_multi:.1e}, rate gap {gap:.2e} in {t:.2?}"
        ),
    )
}

fn determinism() -> Result<Outcome> {
    let dir = tempfile::tempdir().map_err(|e| mdi_sarg04::Error::Internal(e.to_string()))?;
    let config = dir.path().join("config.json");
    let cfg = ScenarioConfig { distance: DistanceGrid { start_km: 0.0, stop_km: 60.0, step_km: 2.0 }, ..Default::default() };
    std::fs::write(&config, cfg.to_json_string()).map_err(|e| mdi_sarg04::Error::Internal(e.to_string()))?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_mdisarg"))
            .args(["rate-curve", "--config"])
            .arg(&config)
            .arg("--output")
            .arg(&out)
            .status()
            .map_err(|e| mdi_sarg04::Error::Internal(e.to_string()))?;
        if !status.success() {
            return outcome(false, format!("rate-curve run {run} exited with {status}"));
        }
        outputs.push(std::fs::read(&out).map_err(|e| mdi_sarg04::Error::Internal(e.to_string()))?);
    }
    let rows = outputs[0].iter().filter(|&&b| b == b'\n').count();
    outcome(!outputs[0].is_empty() && outputs[0] == outputs[1], format!("{rows} lines, {} bytes, identical {}", outputs[0].len(), outputs[0] == outputs[1]))
}

fn bound_oracle() -> Result<Outcome> {
    const STEP: f64 = 1e-5;
    let n = (S_CAP / STEP).round() as usize;
    let es = [0.0, 0.05, 0.1];
    let mut best_f = [f64::INFINITY; 3];
    let mut best_g = [f64::INFINITY; 3];
    for i in 0..=n {
        let s = i as f64 * STEP;
        let (f, g) = (f_type1(s), g_type2(s)?);
        for (k, &e) in es.iter().enumerate() {
            best_f[k] = best_f[k].min(s * e + f);
            best_g[k] = best_g[k].min(s * e + g);
        }
    }
    let mut worst: f64 = 0.0;
    for (k, &e) in es.iter().enumerate() {
        let b1 = phase_bound(PhotonCase::OneTwo, Announcement::Type1, e)?.e_ph;
        let b2 = phase_bound(PhotonCase::OneTwo, Announcement::Type2, e)?.e_ph;
        worst = worst.max((b1 - best_f[k].clamp(0.0, 1.0)).abs()).max((b2 - best_g[k].clamp(0.0, 1.0)).abs());
    }
    outcome(worst <= 1e-6, format!("max |bound - dense grid| = {worst:.3e} over e in {es:?}, both Types"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("povm_identity", povm_identity),
        ("type2_one_one_bound", type2_bound),
        ("one_two_frontiers", frontiers),
        ("two_two_attack", attack_22),
        ("error_floor", error_floor),
        ("rate_curve_properties", rate_curve_properties),
        ("determinism", determinism),
        ("bound_function_oracle", bound_oracle),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!("{} {} {name}: {detail}", if passed { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} criteria, {failed} failed", criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
