//! Phase-error-rate bounds.
//!
//! For one photon from each party the phase error follows linearly from the
//! bit error (factor 3/2 for Type1, 3 for Type2). When one party emits two
//! photons the bound is the lower envelope
//! `e_ph <= min_{s >= 0} { s·e_bit + F(s) }` with `F = f` (Type1, closed
//! form) or `F = g` (Type2, largest real root of a cubic).
//!
//! Both `f` and `g` decrease monotonically towards `(2 - sqrt 2)/4`, so for
//! vanishing `e_bit` the envelope is approached only as `s` grows without
//! bound. The search therefore runs on a window that starts at
//! [`S_WINDOW`] and widens tenfold while the optimum sits on its upper edge,
//! up to [`S_CAP`]. Any `s` gives a valid upper bound, so the cap only
//! costs tightness (at most `~6e-4` at `e_bit = 0`).

use nalgebra::Matrix3;

use crate::error::{invalid, Error, Result};
use crate::povm::{Announcement, PhotonCase};
use crate::search::{argmin, golden_section_min};

/// Initial upper edge of the `s` search window.
pub const S_WINDOW: f64 = 10.0;
/// Largest `s` the minimiser will consider.
pub const S_CAP: f64 = 100.0;
/// Coarse-grid intervals per window; step 0.01 on the initial window.
const GRID_INTERVALS: usize = 1000;
/// Golden-section stopping width in `s`.
pub const S_TOL: f64 = 1e-6;

const ROOT_RESIDUAL_TOL: f64 = 1e-10;

/// Binary Shannon entropy in bits.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&x) || x.is_nan() {
        return Err(invalid(format!("binary entropy argument {x} outside [0, 1]")));
    }
    let x = x.clamp(0.0, 1.0);
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// Entropy of an error rate with values above 1/2 saturated at one bit.
///
/// An upper bound at or beyond 1/2 means no privacy can be certified; the
/// plain entropy would fold back and reward larger error bounds.
pub(crate) fn saturated_entropy(e: f64) -> f64 {
    if e >= 0.5 {
        1.0
    } else {
        binary_entropy(e.max(0.0)).expect("clamped into range")
    }
}

/// Radicand of `f`; its minimum `3/2` sits at `s = 3 sqrt 2 / 4`.
pub fn f_discriminant(s1: f64) -> f64 {
    6.0 - 6.0 * std::f64::consts::SQRT_2 * s1 + 4.0 * s1 * s1
}

/// Type1 offset function for one- and two-photon emission.
pub fn f_type1(s1: f64) -> f64 {
    (3.0 - 2.0 * s1 + f_discriminant(s1).sqrt()) / 6.0
}

/// Coefficients `[c3, c2, c1, c0]` of the cubic whose largest root is `g(s2)`.
pub fn g_cubic_coefficients(s2: f64) -> [f64; 4] {
    let r2 = std::f64::consts::SQRT_2;
    [
        4.0 * r2,
        2.0 * (1.0 - 3.0 * r2 + 3.0 * r2 * s2),
        2.0 * (-1.0 + r2 + (1.0 - 3.0 * r2) * s2 + r2 * s2 * s2),
        (r2 - 1.0) * s2 + (1.0 - r2) * s2 * s2,
    ]
}

pub fn eval_cubic(c: &[f64; 4], x: f64) -> f64 {
    ((c[0] * x + c[1]) * x + c[2]) * x + c[3]
}

fn eval_cubic_derivative(c: &[f64; 4], x: f64) -> f64 {
    (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2]
}

fn newton_polish(c: &[f64; 4], mut x: f64) -> f64 {
    for _ in 0..4 {
        let d = eval_cubic_derivative(c, x);
        if d == 0.0 {
            break;
        }
        let step = eval_cubic(c, x) / d;
        let next = x - step;
        if !next.is_finite() || eval_cubic(c, next).abs() > eval_cubic(c, x).abs() {
            break;
        }
        x = next;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// How the `g` cubic is solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CubicSolver {
    /// Eigenvalues of the companion matrix.
    Companion,
    /// Trigonometric / Cardano closed form.
    Cardano,
}

/// Real roots of `c3 x^3 + c2 x^2 + c1 x + c0` via companion-matrix eigenvalues.
pub fn cubic_real_roots_companion(c: &[f64; 4]) -> Vec<f64> {
    let (b, cc, d) = (c[1] / c[0], c[2] / c[0], c[3] / c[0]);
    let companion = Matrix3::new(-b, -cc, -d, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let scale = 1.0 + b.abs().max(cc.abs()).max(d.abs());
    let mut roots: Vec<f64> = companion
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * scale)
        .map(|z| newton_polish(c, z.re))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

/// Real roots of the cubic via the depressed-cubic closed forms.
pub fn cubic_real_roots_cardano(c: &[f64; 4]) -> Vec<f64> {
    let (b, cc, d) = (c[1] / c[0], c[2] / c[0], c[3] / c[0]);
    // x = t - b/3  ->  t^3 + p t + q = 0
    let p = cc - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + d;
    let shift = -b / 3.0;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let mut roots = if p < 0.0 && disc <= 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
            .collect::<Vec<_>>()
    } else {
        let sq = disc.max(0.0).sqrt();
        vec![(-q / 2.0 + sq).cbrt() + (-q / 2.0 - sq).cbrt() + shift]
    };
    for r in roots.iter_mut() {
        *r = newton_polish(c, *r);
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Type2 offset function: the maximal real root of the `g` cubic.
pub fn g_type2(s2: f64) -> Result<f64> {
    g_type2_with(s2, CubicSolver::Cardano)
}

pub fn g_type2_with(s2: f64, solver: CubicSolver) -> Result<f64> {
    let c = g_cubic_coefficients(s2);
    let roots = match solver {
        CubicSolver::Companion => cubic_real_roots_companion(&c),
        CubicSolver::Cardano => cubic_real_roots_cardano(&c),
    };
    let g = *roots
        .last()
        .ok_or_else(|| Error::Internal(format!("g cubic has no real root at s2 = {s2}")))?;
    let residual = eval_cubic(&c, g).abs();
    if residual > ROOT_RESIDUAL_TOL {
        return Err(Error::Internal(format!("g cubic residual {residual:e} at s2 = {s2}")));
    }
    Ok(g)
}

/// Minimised phase-error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundResult {
    pub e_ph: f64,
    /// Minimising slope (the fixed factor for the linear bounds).
    pub s_star: f64,
    /// Final bracket width of the `s` refinement; zero for the linear bounds.
    pub slack: f64,
}

/// Upper bound on the phase error rate of `case` given its bit error rate.
pub fn phase_bound(case: PhotonCase, announcement: Announcement, e_bit: f64) -> Result<BoundResult> {
    if !(-1e-12..=1.0 + 1e-12).contains(&e_bit) || e_bit.is_nan() {
        return Err(invalid(format!("bit error rate {e_bit} outside [0, 1]")));
    }
    let e = e_bit.clamp(0.0, 1.0);
    let linear = |s: f64| BoundResult { e_ph: (s * e).clamp(0.0, 1.0), s_star: s, slack: 0.0 };
    match (case, announcement) {
        (PhotonCase::OneOne, Announcement::Type1) => Ok(linear(1.5)),
        (PhotonCase::OneOne, Announcement::Type2) => Ok(linear(3.0)),
        (PhotonCase::OneTwo | PhotonCase::TwoOne, Announcement::Type1) => Ok(envelope_min(e, |s| Ok(f_type1(s)))?),
        (PhotonCase::OneTwo | PhotonCase::TwoOne, Announcement::Type2) => envelope_min(e, g_type2),
        (PhotonCase::TwoTwo, _) => Err(invalid("the (2,2) case admits no phase-error bound")),
    }
}

fn envelope_min<F: Fn(f64) -> Result<f64>>(e: f64, offset: F) -> Result<BoundResult> {
    let objective = |s: f64| offset(s).map(|v| s * e + v);
    let mut window = S_WINDOW;
    loop {
        let step = window / GRID_INTERVALS as f64;
        let values = (0..=GRID_INTERVALS)
            .map(|j| objective(j as f64 * step))
            .collect::<Result<Vec<_>>>()?;
        let j = argmin(&values);
        if j == GRID_INTERVALS && window < S_CAP {
            window = (window * 10.0).min(S_CAP);
            continue;
        }
        let lo = j.saturating_sub(1) as f64 * step;
        let hi = ((j + 1).min(GRID_INTERVALS)) as f64 * step;
        // `offset` cannot fail inside a bracket whose grid points succeeded
        // except through the residual check, which is re-raised below.
        let mut failure = None;
        let refined = golden_section_min(
            |s| match objective(s) {
                Ok(v) => v,
                Err(err) => {
                    failure.get_or_insert(err);
                    f64::INFINITY
                }
            },
            lo,
            hi,
            S_TOL,
        );
        if let Some(err) = failure {
            return Err(err);
        }
        let (s_star, best) = if refined.value <= values[j] { (refined.x, refined.value) } else { (j as f64 * step, values[j]) };
        return Ok(BoundResult { e_ph: best.clamp(0.0, 1.0), s_star, slack: refined.width });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // 40-digit evaluation: 0.4999159581645279956404995941302756626364
        assert_abs_diff_eq!(binary_entropy(0.11).unwrap(), 0.499_915_958_164_528, epsilon = 1e-12);
        assert!(binary_entropy(-0.01).is_err());
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn entropy_saturates_past_half() {
        assert_eq!(saturated_entropy(0.7), 1.0);
        assert_eq!(saturated_entropy(0.5), 1.0);
        assert_abs_diff_eq!(saturated_entropy(0.11), binary_entropy(0.11).unwrap());
    }

    #[test]
    fn f_closed_form() {
        assert_abs_diff_eq!(f_type1(0.0), (3.0 + 6f64.sqrt()) / 6.0, epsilon = 1e-15);
        let s_min = 3.0 * std::f64::consts::SQRT_2 / 4.0;
        assert_abs_diff_eq!(f_discriminant(s_min), 1.5, epsilon = 1e-14);
        // vertex of the quadratic: neighbours are larger
        assert!(f_discriminant(s_min - 1e-3) > 1.5 && f_discriminant(s_min + 1e-3) > 1.5);
    }

    #[test]
    fn f_decreasing_and_envelope_convex() {
        let h = 1e-3;
        for i in 1..2000 {
            let s = i as f64 * 0.005;
            assert!(f_type1(s + h) < f_type1(s));
            for e in [0.0, 0.05, 0.2] {
                let phi = |x: f64| x * e + f_type1(x);
                let second = phi(s + h) - 2.0 * phi(s) + phi(s - h);
                assert!(second >= -1e-12, "concave at s = {s}");
            }
        }
    }

    #[test]
    fn g_at_zero_is_one() {
        let c = g_cubic_coefficients(0.0);
        assert_abs_diff_eq!(eval_cubic(&c, 1.0), 0.0, epsilon = 1e-14);
        let roots = cubic_real_roots_companion(&c);
        // roots 0, (2 - sqrt 2)/4, 1
        assert_eq!(roots.len(), 3);
        assert_abs_diff_eq!(roots[1], (2.0 - std::f64::consts::SQRT_2) / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g_type2(0.0).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn g_residuals_and_solver_agreement() {
        for s2 in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let g = g_type2(s2).unwrap();
            assert!(eval_cubic(&g_cubic_coefficients(s2), g).abs() <= 1e-10);
        }
        for i in 0..=1000 {
            let s2 = i as f64 * 0.1;
            let a = g_type2_with(s2, CubicSolver::Companion).unwrap();
            let b = g_type2_with(s2, CubicSolver::Cardano).unwrap();
            assert!((a - b).abs() <= 1e-9, "s2 = {s2}: {a} vs {b}");
        }
    }

    #[test]
    fn linear_cases() {
        let r = phase_bound(PhotonCase::OneOne, Announcement::Type1, 0.1).unwrap();
        assert_abs_diff_eq!(r.e_ph, 0.15, epsilon = 1e-15);
        assert_eq!(phase_bound(PhotonCase::OneOne, Announcement::Type2, 0.0).unwrap().e_ph, 0.0);
        assert_eq!(phase_bound(PhotonCase::OneOne, Announcement::Type2, 0.5).unwrap().e_ph, 1.0);
        assert!(phase_bound(PhotonCase::TwoTwo, Announcement::Type1, 0.1).is_err());
        assert!(phase_bound(PhotonCase::OneTwo, Announcement::Type1, 1.2).is_err());
    }

    #[test]
    fn envelope_at_zero_error_reaches_cap() {
        let r = phase_bound(PhotonCase::OneTwo, Announcement::Type1, 0.0).unwrap();
        assert_abs_diff_eq!(r.e_ph, f_type1(S_CAP), epsilon = 1e-12);
        let floor = (2.0 - std::f64::consts::SQRT_2) / 4.0;
        assert!(r.e_ph >= floor && r.e_ph - floor < 7e-4);
    }

    #[test]
    fn two_one_matches_one_two() {
        for ann in Announcement::ALL {
            let a = phase_bound(PhotonCase::OneTwo, ann, 0.07).unwrap();
            let b = phase_bound(PhotonCase::TwoOne, ann, 0.07).unwrap();
            assert_eq!(a, b);
        }
    }
}
