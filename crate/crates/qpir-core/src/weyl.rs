//! Discrete Weyl operators over `Z_ℓ`, the maximally entangled state,
//! vectorization, and the generalized Bell basis.
//!
//! The operator `W(a,b) = X^a Z^b` acts on an ℓ-dimensional system as
//! `W(a,b) = Σ_i ω^{ib} |i+a⟩⟨i|` with `ω = exp(2πi/ℓ)`. Composition only
//! moves labels and a phase exponent:
//!
//! ```text
//! W(a1,b1) · W(a2,b2) = ω^{b1·a2} · W(a1+a2, b1+b2)
//! W(a,b)†             = ω^{b·a}   · W(−a,−b)
//! ```
//!
//! Phases are tracked as exact integer exponents in `Z_ℓ` and converted to
//! complex scalars only when a matrix or amplitude is materialized.

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, Ket, C64};

/// An element of `Z_ℓ`; arithmetic stays closed modulo ℓ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModInt {
    value: u64,
    modulus: u64,
}

impl ModInt {
    /// Reduces any signed value into `[0, ℓ)`.
    pub fn new(value: i64, modulus: u64) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        let m = modulus as i64;
        let v = value.rem_euclid(m) as u64;
        Self { value: v, modulus }
    }

    pub fn zero(modulus: u64) -> Self {
        Self::new(0, modulus)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn add(&self, other: &ModInt) -> ModInt {
        assert_eq!(self.modulus, other.modulus, "modulus mismatch");
        ModInt::new((self.value + other.value) as i64, self.modulus)
    }

    pub fn sub(&self, other: &ModInt) -> ModInt {
        assert_eq!(self.modulus, other.modulus, "modulus mismatch");
        ModInt::new(self.value as i64 - other.value as i64, self.modulus)
    }

    pub fn mul(&self, other: &ModInt) -> ModInt {
        assert_eq!(self.modulus, other.modulus, "modulus mismatch");
        ModInt::new(((self.value * other.value) % self.modulus) as i64, self.modulus)
    }

    pub fn neg(&self) -> ModInt {
        ModInt::new(-(self.value as i64), self.modulus)
    }
}

/// A pair `(a, b)` in `Z_ℓ × Z_ℓ`: the index of a discrete Weyl operator,
/// doubling as a file value in `Z_ℓ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeylLabel {
    pub a: ModInt,
    pub b: ModInt,
}

impl WeylLabel {
    pub fn new(a: ModInt, b: ModInt) -> Self {
        assert_eq!(a.modulus(), b.modulus(), "modulus mismatch");
        Self { a, b }
    }

    pub fn from_parts(a: i64, b: i64, ell: u64) -> Self {
        Self::new(ModInt::new(a, ell), ModInt::new(b, ell))
    }

    /// Canonical bijection from a value `m ∈ {0, …, ℓ²−1}`:
    /// `a = ⌊m/ℓ⌋`, `b = m mod ℓ`.
    pub fn from_value(m: u64, ell: u64) -> Self {
        let m = m % (ell * ell);
        Self::from_parts((m / ell) as i64, (m % ell) as i64, ell)
    }

    /// Inverse of [`WeylLabel::from_value`]: `m = a·ℓ + b`.
    pub fn value(&self) -> u64 {
        self.a.value() * self.modulus() + self.b.value()
    }

    pub fn modulus(&self) -> u64 {
        self.a.modulus()
    }

    pub fn zero(ell: u64) -> Self {
        Self::from_parts(0, 0, ell)
    }

    /// Componentwise group addition in `Z_ℓ²`.
    pub fn add(&self, other: &WeylLabel) -> WeylLabel {
        WeylLabel::new(self.a.add(&other.a), self.b.add(&other.b))
    }

    pub fn sub(&self, other: &WeylLabel) -> WeylLabel {
        WeylLabel::new(self.a.sub(&other.a), self.b.sub(&other.b))
    }

    pub fn neg(&self) -> WeylLabel {
        WeylLabel::new(self.a.neg(), self.b.neg())
    }
}

/// `ω^k = exp(2πi·k/ℓ)`, evaluated per entry from the reduced exponent so
/// phases do not drift at larger ℓ.
pub fn omega_power(ell: u64, k: u64) -> C64 {
    let e = (k % ell) as f64;
    let theta = 2.0 * std::f64::consts::PI * e / ell as f64;
    c64(theta.cos(), theta.sin())
}

/// The ℓ×ℓ unitary `W(a,b) = Σ_i ω^{ib} |i+a⟩⟨i|`.
pub fn weyl_matrix(label: &WeylLabel) -> CMatrix {
    let ell = label.modulus();
    let (a, b) = (label.a.value(), label.b.value());
    let n = ell as usize;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..ell {
        let row = ((i + a) % ell) as usize;
        m.set(row, i as usize, omega_power(ell, i * b));
    }
    m
}

/// Composition rule `W(a1,b1)·W(a2,b2) = ω^{b1·a2}·W(a1+a2, b1+b2)`,
/// returned as the phase exponent and the composed label.
pub fn weyl_compose(l1: &WeylLabel, l2: &WeylLabel) -> Result<(ModInt, WeylLabel)> {
    if l1.modulus() != l2.modulus() {
        return Err(Error::ModulusMismatch(l1.modulus(), l2.modulus()));
    }
    let phase = l1.b.mul(&l2.a);
    Ok((phase, l1.add(l2)))
}

/// Adjoint rule `W(a,b)† = ω^{b·a}·W(−a,−b)`.
pub fn weyl_adjoint(label: &WeylLabel) -> (ModInt, WeylLabel) {
    (label.b.mul(&label.a), label.neg())
}

/// Maximally entangled state `|Φ⟩ = (1/√ℓ) Σ_i |i⟩⊗|i⟩` on `A⊗A`.
pub fn max_entangled(ell: u64) -> Ket {
    assert!(ell >= 2, "ℓ must be at least 2");
    let n = ell as usize;
    let mut amps = vec![c64(0.0, 0.0); n * n];
    let w = 1.0 / (ell as f64).sqrt();
    for i in 0..n {
        amps[i * n + i] = c64(w, 0.0);
    }
    Ket::new(amps)
}

/// Vectorization `|T⟩ = Σ_ij t_ij |i⟩⊗|j⟩` of a square matrix.
pub fn vectorize(t: &CMatrix) -> Ket {
    assert!(t.is_square(), "vectorization requires a square matrix");
    let n = t.rows();
    let mut amps = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            amps.push(t.get(i, j));
        }
    }
    Ket::new(amps)
}

/// The generalized Bell state `(W(a,b) ⊗ I)|Φ⟩`, built from the defining
/// sum: amplitude `ω^{ib}/√ℓ` at index `(i+a)·ℓ + i`.
pub fn bell_state(label: &WeylLabel) -> Ket {
    let ell = label.modulus();
    let n = ell as usize;
    let (a, b) = (label.a.value(), label.b.value());
    let w = 1.0 / (ell as f64).sqrt();
    let mut amps = vec![c64(0.0, 0.0); n * n];
    for i in 0..ell {
        let row = ((i + a) % ell) as usize;
        amps[row * n + i as usize] = omega_power(ell, i * b).scale(w);
    }
    Ket::new(amps)
}

/// Overlap `⟨(W(a,b)⊗I)Φ | ψ⟩` contracted in O(ℓ) without materializing
/// the basis vector.
pub fn bell_component(label: &WeylLabel, psi: &Ket) -> C64 {
    let ell = label.modulus();
    let n = ell as usize;
    assert_eq!(psi.dim(), n * n, "state dimension must be ℓ²");
    let (a, b) = (label.a.value(), label.b.value());
    let w = 1.0 / (ell as f64).sqrt();
    let mut acc = c64(0.0, 0.0);
    for i in 0..ell {
        let row = ((i + a) % ell) as usize;
        acc += omega_power(ell, i * b).conj() * psi.amp(row * n + i as usize);
    }
    acc.scale(w)
}

/// The ℓ² generalized Bell states `(W(a,b)⊗I)|Φ⟩`, ordered by label value
/// `a·ℓ + b`. They form an orthonormal basis of `A⊗A`.
pub fn bell_basis(ell: u64) -> Vec<Ket> {
    assert!(ell >= 2, "ℓ must be at least 2");
    (0..ell * ell)
        .map(|m| bell_state(&WeylLabel::from_value(m, ell)))
        .collect()
}
