//! Named numerical checks of the POVM identities, bound certificates and
//! attack constructions.

use std::fmt;

use crate::bounds::{cubic_real_roots_companion, eval_cubic, f_type1, g_cubic_coefficients, g_type2, g_type2_with, CubicSolver};
use crate::error::Result;
use crate::optics::{yields_and_errors, DetectorParams, Protocol};
use crate::povm::{
    attack_state_22, bell_ancilla_projection, build_povm_with_angle, certificate_min_eigenvalue, error_rates, Announcement,
    PhotonCase, PovmSet, FILTER_ANGLE,
};
use crate::quantum::{filter1_with_angle, filter2_with_angle, min_eigenvalue, phi_state, rotation, DensityOperator, Operator};

/// Certificate grid `0, 0.25, ..., 5`.
fn s_grid() -> impl Iterator<Item = f64> {
    (0..=20).map(|i| i as f64 * 0.25)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VerifyOptions {
    /// Added to the filter angle `pi/8`; nonzero values should make checks fail.
    pub filter_angle_offset: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {:<32} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

struct Suite {
    angle: f64,
    checks: Vec<CheckResult>,
}

impl Suite {
    fn run(&mut self, name: &'static str, check: impl FnOnce(&Suite) -> Result<(bool, String)>) {
        let (passed, detail) = match check(self) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        self.checks.push(CheckResult { name, passed, detail });
    }

    fn povm(&self, case: PhotonCase, ann: Announcement) -> PovmSet {
        build_povm_with_angle(case, ann, self.angle)
    }
}

fn worst_frontier(suite: &Suite, case: PhotonCase, ann: Announcement, scale: f64) -> Result<(f64, f64)> {
    let p = suite.povm(case, ann);
    let mut worst = (f64::INFINITY, 0.0);
    for s in s_grid() {
        let t = match ann {
            Announcement::Type1 => f_type1(s),
            Announcement::Type2 => g_type2(s)?,
        };
        let ev = certificate_min_eigenvalue(&p, s, t * scale)?;
        if ev < worst.0 {
            worst = (ev, s);
        }
    }
    Ok(worst)
}

/// Run every check with the protocol's filter angle.
pub fn verify_suite() -> VerifyReport {
    verify_suite_with(VerifyOptions::default())
}

pub fn verify_suite_with(options: VerifyOptions) -> VerifyReport {
    let mut suite = Suite { angle: FILTER_ANGLE + options.filter_angle_offset, checks: Vec::new() };

    suite.run("phi_rotation_cycle", |_| {
        let r = rotation(1)?;
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            let ov = phi_state((i + 1) % 4)?.overlap(&r.apply(&phi_state(i)?)?)?;
            worst = worst.max((1.0 - ov).abs());
        }
        Ok((worst <= 1e-12, format!("max |1 - overlap| = {worst:.3e}")))
    });

    suite.run("rotations_orthogonal", |_| {
        let mut worst: f64 = 0.0;
        for k in 0..4 {
            let r = rotation(k)?;
            worst = worst.max(r.compose(&r.transpose())?.max_abs_diff(&Operator::identity(1)?)?);
        }
        Ok((worst <= 1e-12, format!("max |R R^T - I| = {worst:.3e}")))
    });

    suite.run("filters_contractive", |s| {
        let f1 = filter1_with_angle(s.angle);
        let f2 = filter2_with_angle(s.angle);
        let e1 = min_eigenvalue(&(&Operator::identity(1)? - &f1.adjoint().compose(&f1)?))?;
        let e2 = min_eigenvalue(&(&Operator::identity(2)? - &f2.adjoint().compose(&f2)?))?;
        let worst = e1.min(e2);
        Ok((worst >= -1e-12, format!("min eig(I - F^dag F) = {worst:.3e}")))
    });

    suite.run("povm_positive_and_nested", |s| {
        let mut worst = f64::INFINITY;
        for case in [PhotonCase::OneOne, PhotonCase::OneTwo, PhotonCase::TwoOne, PhotonCase::TwoTwo] {
            for ann in Announcement::ALL {
                let p = s.povm(case, ann);
                for op in [&p.fil, &p.bit, &p.ph, &(&p.fil - &p.bit), &(&p.fil - &p.ph)] {
                    worst = worst.min(min_eigenvalue(op)?);
                }
            }
        }
        Ok((worst >= -1e-10, format!("min eigenvalue over all cases = {worst:.3e}")))
    });

    suite.run("type1_phase_is_1.5_bit", |s| {
        let p = s.povm(PhotonCase::OneOne, Announcement::Type1);
        let d = p.ph.max_abs_diff(&(&p.bit * 1.5))?;
        Ok((d <= 1e-12, format!("max |ph - 1.5 bit| = {d:.3e}")))
    });

    suite.run("type2_s3_certificate", |s| {
        let ev = certificate_min_eigenvalue(&s.povm(PhotonCase::OneOne, Announcement::Type2), 3.0, 0.0)?;
        Ok((ev >= -1e-10, format!("min eig(3 bit - ph) = {ev:.3e}")))
    });

    suite.run("type2_s2.9_fails", |s| {
        let ev = certificate_min_eigenvalue(&s.povm(PhotonCase::OneOne, Announcement::Type2), 2.9, 0.0)?;
        Ok((ev <= -1e-6, format!("min eig(2.9 bit - ph) = {ev:.3e}")))
    });

    for (name, ann) in [("frontier_f_valid", Announcement::Type1), ("frontier_g_valid", Announcement::Type2)] {
        suite.run(name, |s| {
            let (ev, at) = worst_frontier(s, PhotonCase::OneTwo, ann, 1.0 + 1e-6)?;
            Ok((ev >= -1e-9, format!("worst min eigenvalue {ev:.3e} at s = {at}")))
        });
    }

    for (name, ann) in [("frontier_f_tight", Announcement::Type1), ("frontier_g_tight", Announcement::Type2)] {
        suite.run(name, |s| {
            let (ev, at) = worst_frontier(s, PhotonCase::OneTwo, ann, 1.0 - 1e-2)?;
            Ok((ev <= -1e-8, format!("min eigenvalue {ev:.3e} at s = {at} with t scaled by 0.99")))
        });
    }

    suite.run("two_one_mirrors_one_two", |s| {
        let mut gap: f64 = 0.0;
        let mut worst = f64::INFINITY;
        for ann in Announcement::ALL {
            let (a, b) = (s.povm(PhotonCase::OneTwo, ann), s.povm(PhotonCase::TwoOne, ann));
            for sv in s_grid() {
                let t = match ann {
                    Announcement::Type1 => f_type1(sv),
                    Announcement::Type2 => g_type2(sv)?,
                } * (1.0 + 1e-6);
                let (ea, eb) = (certificate_min_eigenvalue(&a, sv, t)?, certificate_min_eigenvalue(&b, sv, t)?);
                gap = gap.max((ea - eb).abs());
                worst = worst.min(eb);
            }
        }
        Ok((gap <= 1e-9 && worst >= -1e-9, format!("max eigenvalue gap {gap:.3e}, worst (2,1) {worst:.3e}")))
    });

    suite.run("g_cubic_roots", |_| {
        let g0 = g_type2(0.0)?;
        let mut residual: f64 = 0.0;
        let mut agree: f64 = 0.0;
        for s2 in [0.1, 0.5, 1.0, 2.0, 5.0] {
            residual = residual.max(eval_cubic(&g_cubic_coefficients(s2), g_type2(s2)?).abs());
            agree = agree.max((g_type2_with(s2, CubicSolver::Companion)? - g_type2_with(s2, CubicSolver::Cardano)?).abs());
        }
        let roots_at_zero = cubic_real_roots_companion(&g_cubic_coefficients(0.0)).len();
        let ok = (g0 - 1.0).abs() <= 1e-10 && residual <= 1e-10 && agree <= 1e-9 && roots_at_zero == 3;
        Ok((ok, format!("g(0) = {g0:.12}, max residual {residual:.3e}, solver gap {agree:.3e}")))
    });

    suite.run("mu_attack_type1", |s| {
        let p = s.povm(PhotonCase::TwoTwo, Announcement::Type1);
        let mu1 = attack_state_22(Announcement::Type1, 1)?;
        let mu2 = attack_state_22(Announcement::Type1, 2)?;
        let e1 = error_rates(&p, &DensityOperator::pure(&mu1)?)?;
        let e2 = error_rates(&p, &DensityOperator::pure(&mu2)?)?;
        let dev = [e1.e_bit, e1.e_ph - 0.5, e2.e_bit - 0.5, e2.e_ph - 0.5, mu1.inner(&mu2)?.norm()]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        Ok((dev <= 1e-12, format!("mu1 ({:.6}, {:.6}), mu2 ({:.6}, {:.6})", e1.e_bit, e1.e_ph, e2.e_bit, e2.e_ph)))
    });

    suite.run("nu_mixtures_type2", |s| {
        let p = s.povm(PhotonCase::TwoTwo, Announcement::Type2);
        let rho = |i| -> Result<DensityOperator> { DensityOperator::pure(&attack_state_22(Announcement::Type2, i)?) };
        let (r1, r2, r3, r4) = (rho(1)?, rho(2)?, rho(3)?, rho(4)?);
        let a = error_rates(&p, &DensityOperator::mixture(&[(0.25, &r1), (0.75, &r2)])?)?;
        let b = error_rates(&p, &DensityOperator::mixture(&[(0.75, &r3), (0.25, &r4)])?)?;
        let dev = [a.e_bit, a.e_ph - 0.5, b.e_bit - 0.5, b.e_ph - 0.5].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok((dev <= 1e-12, format!("first ({:.6}, {:.6}), second ({:.6}, {:.6})", a.e_bit, a.e_ph, b.e_bit, b.e_ph)))
    });

    suite.run("bell_ancilla_sixteenth", |_| {
        let mut worst: f64 = 0.0;
        for which in 1..=2 {
            let mu = attack_state_22(Announcement::Type1, which)?;
            let heralded = bell_ancilla_projection(&mu)?;
            worst = worst.max((heralded.norm_sqr() - 1.0 / 16.0).abs());
            worst = worst.max((mu.overlap(&heralded)? - 0.25).abs());
        }
        Ok((worst <= 1e-12, format!("max deviation from 1/16 success = {worst:.3e}")))
    });

    suite.run("relay_honest_bit_errors", |_| {
        let ideal = DetectorParams::IDEAL;
        let e11 = yields_and_errors(1, 1, &ideal, 1.0, Protocol::Sarg04)?;
        let e20 = yields_and_errors(2, 0, &ideal, 1.0, Protocol::Sarg04)?;
        let e02 = yields_and_errors(0, 2, &ideal, 1.0, Protocol::Sarg04)?;
        let ok = e11.ebits.iter().all(|e| e.abs() <= 1e-12)
            && e20.ebits.iter().chain(&e02.ebits).all(|e| (e - 0.5).abs() <= 1e-10);
        let show = |e: &[f64; 2]| format!("[{:.3e}, {:.3e}]", e[0], e[1]);
        Ok((ok, format!("e(1,1) = {}, e(2,0) = {}, e(0,2) = {}", show(&e11.ebits), show(&e20.ebits), show(&e02.ebits))))
    });

    VerifyReport { checks: suite.checks }
}
