//! Filtering, bit-error and phase-error POVMs of the virtual
//! entanglement-distillation protocol, and Eve's explicit (2,2) attack.
//!
//! A party that emits one photon is represented by a single primed qubit
//! (`A1'` or `B1'`), one that emits two photons by a pair (`A1' A3'` or
//! `B1' B3'`). Registers are ordered Alice's primed modes first, then Bob's,
//! each in ascending index.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quantum::{
    basis_ket, bell_state, filter1_with_angle, filter2_with_angle, kron_all, min_eigenvalue,
    partial_bell_project, rotation, BasisLabel, BellLabel, DensityOperator, Operator, StateVector,
};

/// Threshold below which the filtering probability counts as zero.
pub const P_FIL_FLOOR: f64 = 1e-12;

/// Filter angle of the SARG04 encoding.
pub const FILTER_ANGLE: f64 = std::f64::consts::FRAC_PI_8;

/// Announced success class of the relay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Announcement {
    /// Cross-port coincidence, heralds `|psi->`; kept for every `k = k'`.
    Type1,
    /// Same-port coincidence, heralds `|psi+>`; kept only for `k = k'` in {0, 2}.
    Type2,
}

impl Announcement {
    pub const ALL: [Announcement; 2] = [Announcement::Type1, Announcement::Type2];

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Self::Type1),
            2 => Ok(Self::Type2),
            _ => Err(invalid(format!("announcement type {i} is not 1 or 2"))),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Self::Type1 => 1,
            Self::Type2 => 2,
        }
    }

    /// Zero-based position, for per-Type arrays.
    pub fn slot(self) -> usize {
        self.index() - 1
    }

    /// Rotation labels that survive sifting.
    pub fn accepted_rotations(self) -> &'static [usize] {
        match self {
            Self::Type1 => &[0, 1, 2, 3],
            Self::Type2 => &[0, 2],
        }
    }

    fn prefactor(self) -> f64 {
        1.0 / self.accepted_rotations().len() as f64
    }
}

impl fmt::Display for Announcement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Type{}", self.index())
    }
}

/// Photon numbers `(n, m)` emitted by Alice and Bob.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhotonCase {
    OneOne,
    OneTwo,
    TwoOne,
    TwoTwo,
}

impl PhotonCase {
    pub fn from_counts(n: usize, m: usize) -> Result<Self> {
        match (n, m) {
            (1, 1) => Ok(Self::OneOne),
            (1, 2) => Ok(Self::OneTwo),
            (2, 1) => Ok(Self::TwoOne),
            (2, 2) => Ok(Self::TwoTwo),
            _ => Err(invalid(format!("no POVM construction for ({n},{m})"))),
        }
    }

    pub fn counts(self) -> (usize, usize) {
        match self {
            Self::OneOne => (1, 1),
            Self::OneTwo => (1, 2),
            Self::TwoOne => (2, 1),
            Self::TwoTwo => (2, 2),
        }
    }

    pub fn qubits(self) -> usize {
        let (n, m) = self.counts();
        n + m
    }
}

impl fmt::Display for PhotonCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, m) = self.counts();
        write!(f, "({n},{m})")
    }
}

/// `(fil, bit, ph)` for one photon-number case and announcement.
#[derive(Clone, Debug)]
pub struct PovmSet {
    pub case: PhotonCase,
    pub announcement: Announcement,
    pub fil: Operator,
    pub bit: Operator,
    pub ph: Operator,
}

/// Conditional error rates of a state that passed the filter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorPair {
    pub e_bit: f64,
    pub e_ph: f64,
    pub p_fil: f64,
}

pub fn build_povm(case: PhotonCase, announcement: Announcement) -> PovmSet {
    build_povm_with_angle(case, announcement, FILTER_ANGLE)
}

/// As [`build_povm`] but with the filter angle exposed; only the default
/// angle yields the protocol's POVMs.
pub fn build_povm_with_angle(case: PhotonCase, announcement: Announcement, angle: f64) -> PovmSet {
    let (n, m) = case.counts();
    let f1t = filter1_with_angle(angle).transpose();
    let f2t = filter2_with_angle(angle).transpose();
    let x0 = basis_ket(BasisLabel::X0);

    // R_k F1^T for one photon, (R_k ⊗ R_k) F2^T for two.
    let party_map = |photons: usize, k: usize| -> Operator {
        let r = rotation(k).expect("k in 0..=3");
        match photons {
            1 => r.compose(&f1t).expect("2x2"),
            _ => r.kron(&r).expect("4x4").compose(&f2t).expect("4x4"),
        }
    };
    // Target ket, padded with |0_x> on the ancillary mode of a two-photon party.
    let target = |photons: usize, label: BasisLabel| -> StateVector {
        let ket = basis_ket(label);
        match photons {
            1 => ket,
            _ => ket.kron(&x0).expect("2 qubits"),
        }
    };

    let dim = 1usize << case.qubits();
    let zero = Operator::from_real_rows(dim, &vec![0.0; dim * dim]).expect("square");
    let mut fil = zero.clone();
    let mut bit = zero.clone();
    let mut ph = zero;
    let w = announcement.prefactor();

    for &k in announcement.accepted_rotations() {
        let joint = party_map(n, k).kron(&party_map(m, k)).expect("<= 4 qubits");
        fil = &fil + &(&joint.gram() * w);
        for i in 0..2u8 {
            // Type1 distils psi- (anti-correlated in Z), so a bit error is
            // equal Z values; Type2 distils psi+ and errs on opposite values.
            let bob_z = match announcement {
                Announcement::Type1 => i,
                Announcement::Type2 => i ^ 1,
            };
            let bit_target = target(n, BasisLabel::z(i)).kron(&target(m, BasisLabel::z(bob_z))).expect("fits");
            let ph_target = target(n, BasisLabel::x(i)).kron(&target(m, BasisLabel::x(i))).expect("fits");
            bit = &bit + &(&joint.apply(&bit_target).expect("sub-normalised").projector() * w);
            ph = &ph + &(&joint.apply(&ph_target).expect("sub-normalised").projector() * w);
        }
    }

    PovmSet { case, announcement, fil, bit, ph }
}

pub fn error_rates(povms: &PovmSet, rho: &DensityOperator) -> Result<ErrorPair> {
    if rho.dim() != povms.fil.dim() {
        return Err(Error::DimensionMismatch { expected: povms.fil.dim(), found: rho.dim() });
    }
    let p_fil = povms.fil.expectation(rho)?;
    if p_fil <= P_FIL_FLOOR {
        return Err(Error::FilteredOut { p_fil });
    }
    Ok(ErrorPair {
        e_bit: povms.bit.expectation(rho)? / p_fil,
        e_ph: povms.ph.expectation(rho)? / p_fil,
        p_fil,
    })
}

/// Minimum eigenvalue of `s·Π_bit + t·Π_fil − Π_ph`; a value `>= -tol`
/// certifies `e_ph <= s·e_bit + t` for every state.
pub fn verify_bound_certificate(case: PhotonCase, announcement: Announcement, s: f64, t: f64) -> Result<f64> {
    let p = build_povm(case, announcement);
    certificate_min_eigenvalue(&p, s, t)
}

pub fn certificate_min_eigenvalue(p: &PovmSet, s: f64, t: f64) -> Result<f64> {
    let h = &(&(&p.bit * s) + &(&p.fil * t)) - &p.ph;
    min_eigenvalue(&h)
}

/// Primed modes of the four-photon register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    A1,
    A3,
    B1,
    B3,
}

pub const CANONICAL_22: [Mode; 4] = [Mode::A1, Mode::A3, Mode::B1, Mode::B3];

/// Reorder a four-qubit state declared in `declared` order into `A1' A3' B1' B3'`.
pub fn to_canonical(v: &StateVector, declared: &[Mode; 4]) -> Result<StateVector> {
    let order: Vec<usize> = CANONICAL_22
        .iter()
        .map(|c| declared.iter().position(|d| d == c).ok_or_else(|| invalid("mode missing")))
        .collect::<Result<_>>()?;
    v.permute_qubits(&order)
}

/// Eve's conclusive four-photon states: `mu_1, mu_2` for Type1 and
/// `nu_1..nu_4` for Type2, in canonical order.
pub fn attack_state_22(announcement: Announcement, which: usize) -> Result<StateVector> {
    let x = |i: u8| basis_ket(BasisLabel::x(i));
    let z = |i: u8| basis_ket(BasisLabel::z(i));
    let psi_minus = bell_state(BellLabel::PsiMinus);
    let psi_plus = bell_state(BellLabel::PsiPlus);
    use Mode::*;
    match (announcement, which) {
        (Announcement::Type1, 1) => {
            let v = kron_all(&[&psi_minus, &x(0), &x(1)])?;
            to_canonical(&v, &[A1, B3, A3, B1])
        }
        (Announcement::Type1, 2) => {
            // already written in A1' A3' B1' B3' order
            let a = kron_all(&[&z(0), &z(0), &z(1), &z(0)])?;
            let b = kron_all(&[&z(1), &z(0), &z(0), &z(1)])?;
            let r = std::f64::consts::FRAC_1_SQRT_2;
            StateVector::normalized_sum(&[(r.into(), &a), (r.into(), &b)])
        }
        (Announcement::Type2, 1..=4) => {
            let (bell, a3, b3) = match which {
                1 => (&psi_plus, 0, 0),
                2 => (&psi_plus, 0, 1),
                3 => (&psi_plus, 1, 0),
                _ => (&psi_minus, 0, 0),
            };
            let v = kron_all(&[bell, &x(a3), &x(b3)])?;
            to_canonical(&v, &[A1, B1, A3, B3])
        }
        (a, w) => Err(invalid(format!("no attack state {w} for {a}"))),
    }
}

/// Projects Eve's four photons `A2 B2 A4 B4` of `|phi+>^{⊗4}` onto `bra`
/// (given in canonical order) and returns the heralded primed state, in
/// canonical order and unnormalised. Its squared norm is the success
/// probability of the preparation.
pub fn bell_ancilla_projection(bra: &StateVector) -> Result<StateVector> {
    if bra.qubits() != 4 {
        return Err(Error::DimensionMismatch { expected: 16, found: bra.dim() });
    }
    // Layout: 0 A1', 1 A2, 2 B1', 3 B2, 4 A3', 5 A4, 6 B3', 7 B4.
    let phi = bell_state(BellLabel::PhiPlus);
    let register = kron_all(&[&phi, &phi, &phi, &phi])?;
    // bra factor for A1' acts on its partner A2, and so on
    let heralded = partial_bell_project(bra, &register, &[1, 5, 3, 7])?;
    // remaining qubits come out as A1', B1', A3', B3'
    to_canonical(&heralded, &[Mode::A1, Mode::B1, Mode::A3, Mode::B3])
}
