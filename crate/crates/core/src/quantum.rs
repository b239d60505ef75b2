//! Dense complex linear algebra on small qubit registers.
//!
//! Storage convention: every single-qubit factor is expanded in the
//! diagonal basis `{|0_x>, |1_x>}` (±45° polarisation), and multi-qubit
//! registers use big-endian tensor order, i.e. qubit 0 is the first factor
//! of the `kron` chain and the most significant bit of the amplitude index.
//! Transposes are taken in this basis, which is the basis in which
//! `|phi+> = (|0_x 0_x> + |1_x 1_x>)/sqrt(2)` is written.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

/// Largest register (in qubits) a [`StateVector`] or [`Operator`] may span.
///
/// The POVMs never exceed four qubits; state vectors need eight for the
/// Bell-ancilla contraction of the (2,2) attack.
pub const MAX_QUBITS: usize = 8;

/// Operators handed to the eigen-solver are expected to stay at or below this.
pub const POVM_QUBIT_LIMIT: usize = 4;

const NORM_SLACK: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(invalid(format!("dimension {dim} is not a power of two >= 2")));
    }
    let q = dim.trailing_zeros() as usize;
    if q > MAX_QUBITS {
        return Err(invalid(format!("{q} qubits exceeds the {MAX_QUBITS}-qubit cap")));
    }
    Ok(q)
}

/// Pure (possibly sub-normalised) state of a qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        Self::from_dvector(DVector::from_vec(amps))
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    fn from_dvector(amps: DVector<C64>) -> Result<Self> {
        qubits_for_dim(amps.len())?;
        let n2 = amps.norm_squared();
        if !n2.is_finite() || n2 > 1.0 + NORM_SLACK {
            return Err(invalid(format!("state norm^2 {n2} exceeds 1")));
        }
        Ok(Self { amps })
    }

    /// Normalised superposition `sum_j c_j |v_j>`.
    pub fn normalized_sum(terms: &[(C64, &StateVector)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| invalid("empty superposition"))?;
        let mut acc = DVector::<C64>::zeros(first.1.dim());
        for (c, v) in terms {
            if v.dim() != acc.len() {
                return Err(Error::DimensionMismatch { expected: acc.len(), found: v.dim() });
            }
            acc += &v.amps * *c;
        }
        let norm = acc.norm();
        if norm == 0.0 {
            return Err(invalid("superposition vanishes"));
        }
        Self::from_dvector(acc / C64::new(norm, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|<self|other>|`, the quantity that is insensitive to global phase.
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        self.inner(other).map(|c| c.norm())
    }

    pub fn kron(&self, other: &StateVector) -> Result<StateVector> {
        qubits_for_dim(self.dim() * other.dim())?;
        Ok(Self { amps: self.amps.kronecker(&other.amps) })
    }

    /// Reorders tensor factors: qubit `j` of the result is qubit `order[j]` of `self`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<StateVector> {
        let q = self.qubits();
        check_permutation(order, q)?;
        let mut out = DVector::<C64>::zeros(self.dim());
        for (idx, amp) in self.amps.iter().enumerate() {
            let mut new_idx = 0usize;
            for (j, &src) in order.iter().enumerate() {
                let bit = (idx >> (q - 1 - src)) & 1;
                new_idx |= bit << (q - 1 - j);
            }
            out[new_idx] = *amp;
        }
        Ok(Self { amps: out })
    }

    /// Unnormalised projector `P(v) = |v><v|`.
    pub fn projector(&self) -> Operator {
        Operator {
            m: &self.amps * self.amps.adjoint(),
            hermitian_hint: true,
        }
    }
}

fn check_permutation(order: &[usize], q: usize) -> Result<()> {
    let mut seen = vec![false; q];
    if order.len() != q {
        return Err(invalid(format!("permutation of length {} for {q} qubits", order.len())));
    }
    for &o in order {
        if o >= q || seen[o] {
            return Err(invalid(format!("{order:?} is not a permutation of 0..{q}")));
        }
        seen[o] = true;
    }
    Ok(())
}

/// Square matrix acting on a qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    m: DMatrix<C64>,
    hermitian_hint: bool,
}

impl Operator {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(invalid(format!("operator is {}x{}, not square", m.nrows(), m.ncols())));
        }
        qubits_for_dim(m.nrows())?;
        Ok(Self { m, hermitian_hint: false })
    }

    /// Row-major real entries.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: rows.len() });
        }
        Self::new(DMatrix::from_row_iterator(dim, dim, rows.iter().map(|&r| C64::new(r, 0.0))))
    }

    pub fn identity(qubits: usize) -> Result<Self> {
        let dim = 1usize
            .checked_shl(qubits as u32)
            .ok_or_else(|| invalid("qubit count overflow"))?;
        qubits_for_dim(dim)?;
        Ok(Self { m: DMatrix::identity(dim, dim), hermitian_hint: true })
    }

    /// `sum_j w_j |v_j><v_j|` with real weights.
    pub fn diag_projectors(terms: &[(f64, &StateVector)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| invalid("empty projector sum"))?;
        let mut acc = Operator::zeros_like_dim(first.1.dim());
        for (w, v) in terms {
            if v.dim() != acc.dim() {
                return Err(Error::DimensionMismatch { expected: acc.dim(), found: v.dim() });
            }
            acc = &acc + &(&v.projector() * *w);
        }
        Ok(acc)
    }

    fn zeros_like_dim(dim: usize) -> Self {
        Self { m: DMatrix::zeros(dim, dim), hermitian_hint: true }
    }

    /// `|ket><bra|` with coefficient.
    pub fn outer(coeff: f64, ket: &StateVector, bra: &StateVector) -> Result<Self> {
        if ket.dim() != bra.dim() {
            return Err(Error::DimensionMismatch { expected: ket.dim(), found: bra.dim() });
        }
        Self::new(&ket.amps * bra.amps.adjoint() * C64::new(coeff, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.m[(row, col)]
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn adjoint(&self) -> Operator {
        Self { m: self.m.adjoint(), hermitian_hint: self.hermitian_hint }
    }

    /// Transpose in the storage (x-product) basis.
    pub fn transpose(&self) -> Operator {
        Self { m: self.m.transpose(), hermitian_hint: false }
    }

    pub fn kron(&self, other: &Operator) -> Result<Operator> {
        qubits_for_dim(self.dim() * other.dim())?;
        Ok(Self {
            m: self.m.kronecker(&other.m),
            hermitian_hint: self.hermitian_hint && other.hermitian_hint,
        })
    }

    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(Self { m: &self.m * &other.m, hermitian_hint: false })
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if self.dim() != v.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.dim() });
        }
        StateVector::from_dvector(&self.m * &v.amps)
    }

    /// `M M^dagger`, the operator form of `P(M)`.
    pub fn gram(&self) -> Operator {
        Self { m: &self.m * self.m.adjoint(), hermitian_hint: true }
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// `Re tr(self * rho)`.
    pub fn expectation(&self, rho: &DensityOperator) -> Result<f64> {
        let r = rho.as_operator();
        if self.dim() != r.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: r.dim() });
        }
        // tr(AB) = sum_ij A_ij B_ji
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.m[(i, j)] * r.m[(j, i)];
            }
        }
        Ok(acc.re)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.m.iter().zip(other.m.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Largest entry of `|A - A^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.m[(i, j)] - self.m[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch in addition");
        Operator { m: &self.m + &rhs.m, hermitian_hint: self.hermitian_hint && rhs.hermitian_hint }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch in subtraction");
        Operator { m: &self.m - &rhs.m, hermitian_hint: self.hermitian_hint && rhs.hermitian_hint }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        Operator { m: &self.m * C64::new(rhs, 0.0), hermitian_hint: self.hermitian_hint }
    }
}

/// Tensor product over either states or operators.
pub trait Kron: Sized {
    fn kron_with(&self, other: &Self) -> Result<Self>;
}

impl Kron for StateVector {
    fn kron_with(&self, other: &Self) -> Result<Self> {
        self.kron(other)
    }
}

impl Kron for Operator {
    fn kron_with(&self, other: &Self) -> Result<Self> {
        self.kron(other)
    }
}

pub fn kron<T: Kron>(a: &T, b: &T) -> Result<T> {
    a.kron_with(b)
}

/// Left-to-right tensor product of all factors.
pub fn kron_all<T: Kron + Clone>(factors: &[&T]) -> Result<T> {
    let (first, rest) = factors.split_first().ok_or_else(|| invalid("empty kron product"))?;
    rest.iter().try_fold((*first).clone(), |acc, f| acc.kron_with(f))
}

/// Normalised, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    inner: Operator,
}

impl DensityOperator {
    pub fn new(op: Operator) -> Result<Self> {
        let defect = op.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(invalid(format!("density operator not Hermitian (defect {defect:e})")));
        }
        let tr = op.trace().re;
        if (tr - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("density operator trace {tr} != 1")));
        }
        let lo = min_eigenvalue(&op)?;
        if lo < -1e-9 {
            return Err(invalid(format!("density operator has eigenvalue {lo}")));
        }
        Ok(Self { inner: Operator { hermitian_hint: true, ..op } })
    }

    pub fn pure(v: &StateVector) -> Result<Self> {
        Self::new(v.projector())
    }

    pub fn maximally_mixed(qubits: usize) -> Result<Self> {
        let id = Operator::identity(qubits)?;
        let d = id.dim() as f64;
        Self::new(&id * (1.0 / d))
    }

    /// Convex combination; weights must be non-negative and sum to one.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| invalid("empty mixture"))?;
        let mut acc = Operator::zeros_like_dim(first.1.inner.dim());
        for (w, rho) in parts {
            if *w < 0.0 {
                return Err(invalid(format!("negative mixture weight {w}")));
            }
            if rho.inner.dim() != acc.dim() {
                return Err(Error::DimensionMismatch { expected: acc.dim(), found: rho.inner.dim() });
            }
            acc = &acc + &(&rho.inner * *w);
        }
        Self::new(acc)
    }

    pub fn as_operator(&self) -> &Operator {
        &self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }
}

/// Sorted eigenvalues of a Hermitian operator.
pub fn hermitian_eigenvalues(h: &Operator) -> Result<Vec<f64>> {
    let defect = h.hermiticity_defect();
    if defect > 1e-10 {
        return Err(invalid(format!("operator is not Hermitian (defect {defect:e})")));
    }
    // Symmetrise so the solver sees an exactly Hermitian input.
    let sym = (&h.m + h.m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn min_eigenvalue(h: &Operator) -> Result<f64> {
    hermitian_eigenvalues(h).map(|ev| ev[0])
}

/// Single-qubit basis labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    Z0,
    Z1,
    X0,
    X1,
}

impl BasisLabel {
    pub fn z(bit: u8) -> Self {
        if bit & 1 == 0 { Self::Z0 } else { Self::Z1 }
    }

    pub fn x(bit: u8) -> Self {
        if bit & 1 == 0 { Self::X0 } else { Self::X1 }
    }
}

impl FromStr for BasisLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0z" => Ok(Self::Z0),
            "1z" => Ok(Self::Z1),
            "0x" => Ok(Self::X0),
            "1x" => Ok(Self::X1),
            other => Err(invalid(format!("unknown basis label {other:?}"))),
        }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Z0 => "0z",
            Self::Z1 => "1z",
            Self::X0 => "0x",
            Self::X1 => "1x",
        };
        f.write_str(s)
    }
}

fn real2(a: f64, b: f64) -> StateVector {
    StateVector { amps: DVector::from_vec(vec![C64::new(a, 0.0), C64::new(b, 0.0)]) }
}

pub fn basis_ket(label: BasisLabel) -> StateVector {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match label {
        BasisLabel::X0 => real2(1.0, 0.0),
        BasisLabel::X1 => real2(0.0, 1.0),
        // |i_x> = (|0_z> + (-1)^i |1_z>)/sqrt 2, inverted
        BasisLabel::Z0 => real2(r, r),
        BasisLabel::Z1 => real2(r, -r),
    }
}

/// The four SARG04 signal polarisations.
pub fn phi_state(i: usize) -> Result<StateVector> {
    let (c, s) = (PI_8.cos(), PI_8.sin());
    match i {
        0 => Ok(real2(c, s)),
        1 => Ok(real2(c, -s)),
        2 => Ok(real2(s, -c)),
        3 => Ok(real2(s, c)),
        _ => Err(invalid(format!("phi index {i} not in 0..=3"))),
    }
}

const PI_8: f64 = std::f64::consts::FRAC_PI_8;

/// Real rotation by -pi/4 in the x basis: maps `|phi_i>` to `±|phi_{i+1 mod 4}>`.
pub fn base_rotation() -> Operator {
    let (c, s) = (std::f64::consts::FRAC_PI_4.cos(), std::f64::consts::FRAC_PI_4.sin());
    let mut op = Operator::from_real_rows(2, &[c, s, -s, c]).expect("2x2 rotation");
    op.hermitian_hint = false;
    op
}

/// `R^k` for `k` in `0..=3`.
pub fn rotation(k: usize) -> Result<Operator> {
    if k > 3 {
        return Err(invalid(format!("rotation index {k} not in 0..=3")));
    }
    let r = base_rotation();
    let mut acc = Operator::identity(1)?;
    for _ in 0..k {
        acc = r.compose(&acc)?;
    }
    acc.hermitian_hint = k == 0;
    Ok(acc)
}

/// Single-photon filter with a free angle; the protocol uses `pi/8`.
pub fn filter1_with_angle(theta: f64) -> Operator {
    let mut op = Operator::from_real_rows(2, &[theta.cos(), 0.0, 0.0, theta.sin()]).expect("2x2");
    op.hermitian_hint = true;
    op
}

pub fn filter1() -> Operator {
    filter1_with_angle(PI_8)
}

/// Two-photon filter on a pair of modes, output register `(B1, B3)`.
pub fn filter2_with_angle(theta: f64) -> Operator {
    let (c, s) = (theta.cos(), theta.sin());
    let x00 = basis_ket(BasisLabel::X0).kron(&basis_ket(BasisLabel::X0)).expect("2 qubits");
    let x11 = basis_ket(BasisLabel::X1).kron(&basis_ket(BasisLabel::X1)).expect("2 qubits");
    let x10 = basis_ket(BasisLabel::X1).kron(&basis_ket(BasisLabel::X0)).expect("2 qubits");
    let psi_plus = bell_state(BellLabel::PsiPlus);
    let terms = [
        Operator::outer(c * c, &x00, &x00),
        Operator::outer(s * s, &x00, &x11),
        Operator::outer(std::f64::consts::SQRT_2 * c * s, &x10, &psi_plus),
    ];
    terms
        .into_iter()
        .map(|t| t.expect("4x4 outer product"))
        .reduce(|a, b| &a + &b)
        .expect("three terms")
}

pub fn filter2() -> Operator {
    filter2_with_angle(PI_8)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellLabel {
    PsiPlus,
    PsiMinus,
    PhiPlus,
}

impl FromStr for BellLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi_plus" => Ok(Self::PsiPlus),
            "psi_minus" => Ok(Self::PsiMinus),
            "phi_plus" => Ok(Self::PhiPlus),
            other => Err(invalid(format!("unknown Bell label {other:?}"))),
        }
    }
}

/// Bell states written in the x⊗x basis.
pub fn bell_state(label: BellLabel) -> StateVector {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let amps = match label {
        BellLabel::PsiPlus => [0.0, r, r, 0.0],
        BellLabel::PsiMinus => [0.0, r, -r, 0.0],
        BellLabel::PhiPlus => [r, 0.0, 0.0, r],
    };
    StateVector::from_real(&amps).expect("two-qubit Bell state")
}

/// Contracts `bra` against the qubits `modes` of `state` (in that order); the
/// result lives on the remaining qubits, kept in ascending order.
pub fn partial_bell_project(bra: &StateVector, state: &StateVector, modes: &[usize]) -> Result<StateVector> {
    let q = state.qubits();
    if modes.len() != bra.qubits() {
        return Err(invalid(format!(
            "bra spans {} qubits but {} modes were declared",
            bra.qubits(),
            modes.len()
        )));
    }
    if modes.len() >= q {
        return Err(invalid("projection must leave at least one qubit"));
    }
    let mut used = vec![false; q];
    for &m in modes {
        if m >= q || used[m] {
            return Err(invalid(format!("invalid or repeated mode {m} for a {q}-qubit state")));
        }
        used[m] = true;
    }
    let rest: Vec<usize> = (0..q).filter(|j| !used[*j]).collect();
    let nb = modes.len();
    let nr = rest.len();
    let mut out = DVector::<C64>::zeros(1 << nr);
    for (idx, amp) in state.amps.iter().enumerate() {
        if *amp == C64::new(0.0, 0.0) {
            continue;
        }
        let bit = |j: usize| (idx >> (q - 1 - j)) & 1;
        let b_idx = modes.iter().enumerate().fold(0, |acc, (p, &m)| acc | (bit(m) << (nb - 1 - p)));
        let r_idx = rest.iter().enumerate().fold(0, |acc, (p, &m)| acc | (bit(m) << (nr - 1 - p)));
        out[r_idx] += bra.amps[b_idx].conj() * amp;
    }
    StateVector::from_dvector(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn x(i: u8) -> StateVector {
        basis_ket(BasisLabel::x(i))
    }

    #[test]
    fn basis_kets() {
        let z0 = basis_ket("0z".parse().unwrap());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(z0.amplitudes(), &[C64::new(r, 0.0), C64::new(r, 0.0)]);
        assert_eq!(x(0).amplitudes(), &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert_eq!(x(0).inner(&x(1)).unwrap().norm(), 0.0);
        assert!("2z".parse::<BasisLabel>().is_err());
    }

    #[test]
    fn phi_overlaps() {
        let p: Vec<_> = (0..4).map(|i| phi_state(i).unwrap()).collect();
        assert_abs_diff_eq!(p[0].overlap(&p[1]).unwrap(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(p[0].overlap(&p[2]).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[3].norm_sqr(), 1.0, epsilon = 1e-15);
        assert!(phi_state(4).is_err());
    }

    #[test]
    fn rotation_cycles_phi_states() {
        let r1 = rotation(1).unwrap();
        for i in 0..4 {
            let img = r1.apply(&phi_state(i).unwrap()).unwrap();
            let next = phi_state((i + 1) % 4).unwrap();
            assert_abs_diff_eq!(img.overlap(&next).unwrap(), 1.0, epsilon = 1e-12);
        }
        assert_eq!(rotation(0).unwrap(), Operator::identity(1).unwrap());
        let r4 = r1.compose(&r1).unwrap().compose(&r1).unwrap().compose(&r1).unwrap();
        let id = Operator::identity(1).unwrap();
        let err = r4.max_abs_diff(&id).unwrap().min(r4.max_abs_diff(&(&id * -1.0)).unwrap());
        assert!(err < 1e-12);
        assert!(rotation(4).is_err());
    }

    #[test]
    fn rotations_are_orthogonal() {
        for k in 0..4 {
            let r = rotation(k).unwrap();
            let rrt = r.compose(&r.transpose()).unwrap();
            assert!(rrt.max_abs_diff(&Operator::identity(1).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn filters() {
        let f1 = filter1();
        let out = f1.apply(&x(0)).unwrap();
        assert_abs_diff_eq!(out.amplitudes()[0].re, PI_8.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitudes()[1].norm(), 0.0);

        let f2 = filter2();
        let psi = bell_state(BellLabel::PsiPlus);
        assert_abs_diff_eq!(f2.apply(&psi).unwrap().norm_sqr().sqrt(), 0.5, epsilon = 1e-15);
        let x10 = x(1).kron(&x(0)).unwrap();
        // |1x0x> is orthogonal to <0x0x|, <1x1x| and <psi+| only in part:
        // <psi+|1x0x> = 1/sqrt2, so F2 maps it onto cos.sin |1x0x>
        let img = f2.apply(&x10).unwrap();
        let expected = std::f64::consts::SQRT_2 * PI_8.cos() * PI_8.sin() * std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(img.norm_sqr().sqrt(), expected, epsilon = 1e-15);
        // the singlet is the one two-qubit direction F2 annihilates
        let killed = f2.apply(&bell_state(BellLabel::PsiMinus)).unwrap();
        assert_abs_diff_eq!(killed.norm_sqr(), 0.0, epsilon = 1e-30);

        for f in [&f1, &f2] {
            let id = Operator::identity(f.qubits()).unwrap();
            let slack = &id - &f.adjoint().compose(f).unwrap();
            assert!(min_eigenvalue(&slack).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn bell_states_and_rotation_invariance() {
        let plus = bell_state(BellLabel::PsiPlus);
        let minus = bell_state(BellLabel::PsiMinus);
        assert_eq!(minus.inner(&plus).unwrap().norm(), 0.0);
        let r2 = rotation(2).unwrap();
        let rr = r2.kron(&r2).unwrap();
        assert_abs_diff_eq!(rr.apply(&plus).unwrap().overlap(&plus).unwrap(), 1.0, epsilon = 1e-12);
        for k in 0..4 {
            let r = rotation(k).unwrap();
            let rr = r.kron(&r).unwrap();
            assert_abs_diff_eq!(rr.apply(&minus).unwrap().overlap(&minus).unwrap(), 1.0, epsilon = 1e-12);
        }
        assert!("psi".parse::<BellLabel>().is_err());
    }

    #[test]
    fn kron_layout_and_associativity() {
        let id = Operator::identity(1).unwrap();
        assert_eq!(kron(&id, &id).unwrap(), Operator::identity(2).unwrap());
        let v = kron(&x(0), &x(1)).unwrap();
        assert_eq!(v.amplitudes()[1], C64::new(1.0, 0.0));

        let a = rotation(1).unwrap();
        let b = filter1();
        let c = rotation(3).unwrap();
        let left = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let right = kron(&a, &kron(&b, &c).unwrap()).unwrap();
        assert!(left.max_abs_diff(&right).unwrap() <= 1e-15);
    }

    #[test]
    fn eigenvalues() {
        assert_abs_diff_eq!(min_eigenvalue(&Operator::identity(2).unwrap()).unwrap(), 1.0, epsilon = 1e-12);
        let d = Operator::from_real_rows(2, &[2.0, 0.0, 0.0, -3.0]).unwrap();
        assert_abs_diff_eq!(min_eigenvalue(&d).unwrap(), -3.0, epsilon = 1e-12);
        let p = bell_state(BellLabel::PsiMinus).projector();
        let ev = hermitian_eigenvalues(&p).unwrap();
        assert_abs_diff_eq!(ev[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[3], 1.0, epsilon = 1e-12);
        let skew = Operator::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(min_eigenvalue(&skew), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn partial_projection() {
        let v = kron(&x(0), &x(1)).unwrap();
        let out = partial_bell_project(&x(0), &v, &[0]).unwrap();
        assert_eq!(out, x(1));

        let psi = bell_state(BellLabel::PsiPlus);
        let out = partial_bell_project(&psi, &kron_all(&[&x(0), &x(1), &x(0)]).unwrap(), &[0, 1]).unwrap();
        assert_abs_diff_eq!(out.amplitudes()[0].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);

        assert!(partial_bell_project(&psi, &v, &[0]).is_err());
        assert!(partial_bell_project(&x(0), &v, &[2]).is_err());
    }

    #[test]
    fn permutation_moves_factors() {
        let v = kron_all(&[&x(0), &x(1), &basis_ket(BasisLabel::Z0)]).unwrap();
        let p = v.permute_qubits(&[2, 0, 1]).unwrap();
        let expected = kron_all(&[&basis_ket(BasisLabel::Z0), &x(0), &x(1)]).unwrap();
        assert!(p.inner(&expected).unwrap().re > 1.0 - 1e-15);
        assert!(v.permute_qubits(&[0, 0, 1]).is_err());
    }

    #[test]
    fn density_validation() {
        assert!(DensityOperator::maximally_mixed(2).is_ok());
        let bad = Operator::from_real_rows(2, &[1.5, 0.0, 0.0, -0.5]).unwrap();
        assert!(DensityOperator::new(bad).is_err());
        let half = Operator::from_real_rows(2, &[0.5, 0.0, 0.0, 0.0]).unwrap();
        assert!(DensityOperator::new(half).is_err());
    }

    #[test]
    fn oversize_state_rejected() {
        let big = vec![C64::new(0.0, 0.0); 512];
        assert!(StateVector::new(big).is_err());
        assert!(StateVector::from_real(&[1.0, 1.0]).is_err());
        assert!(StateVector::from_real(&[1.0, 0.0, 0.0]).is_err());
    }
}
