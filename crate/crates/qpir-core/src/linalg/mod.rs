//! Dense complex linear algebra for exact state simulation and entropy
//! computation.
//!
//! Everything is stored dense and row-major; the systems handled here are
//! small enough (dimension up to a few hundred) that sparsity and BLAS-level
//! performance are irrelevant. All values are immutable after construction
//! and every operation is a pure function, so they can be shared freely
//! across parallel workers.

mod eig;
pub mod sampling;

pub use eig::hermitian_eig;

use crate::error::{Error, Result};
use num_complex::Complex;

/// Double-precision complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

/// Shorthand for `C64::new`.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Entrywise tolerance for Hermiticity and trace checks on constructed states.
pub const STATE_TOL: f64 = 1e-9;

/// Eigenvalues at or below this are treated as outside the support when
/// taking negative or fractional matrix powers and when computing entropies.
pub const DEFAULT_KERNEL_CUTOFF: f64 = 1e-10;

/// A pure state: a complex amplitude vector of fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amps: Vec<C64>,
}

impl Ket {
    pub fn new(amps: Vec<C64>) -> Self {
        assert!(!amps.is_empty(), "ket must have positive dimension");
        Self { amps }
    }

    /// Computational basis state `|i⟩` in the given dimension.
    pub fn basis(dim: usize, i: usize) -> Self {
        assert!(i < dim, "basis index out of range");
        let mut amps = vec![c64(0.0, 0.0); dim];
        amps[i] = c64(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amp(&self, i: usize) -> C64 {
        self.amps[i]
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product `⟨self|other⟩` (conjugate-linear in `self`).
    pub fn inner(&self, other: &Ket) -> C64 {
        assert_eq!(self.dim(), other.dim(), "ket dimension mismatch");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, z: C64) -> Ket {
        Ket::new(self.amps.iter().map(|a| a * z).collect())
    }

    /// Kronecker product `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &Ket) -> Ket {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ket::new(amps)
    }

    /// Rank-one projector `|self⟩⟨self|`.
    pub fn outer(&self) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m.set(i, j, self.amps[i] * self.amps[j].conj());
            }
        }
        m
    }

    /// True when all amplitudes are finite.
    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

/// A dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![c64(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, c64(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Self {
        let r = rows.len();
        assert!(r > 0);
        let c = rows[0].len();
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == c64(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, z: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * z).collect(),
        }
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Matrix-vector product.
    pub fn apply(&self, ket: &Ket) -> Ket {
        assert_eq!(self.cols, ket.dim(), "matrix-vector dimension mismatch");
        let mut amps = vec![c64(0.0, 0.0); self.rows];
        for (i, out) in amps.iter_mut().enumerate() {
            let mut acc = c64(0.0, 0.0);
            for j in 0..self.cols {
                acc += self.get(i, j) * ket.amp(j);
            }
            *out = acc;
        }
        Ket::new(amps)
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of `self` from its own conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

/// Kronecker product `a ⊗ b`; output dimensions multiply.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a.get(i, j);
            if aij == c64(0.0, 0.0) {
                continue;
            }
            for k in 0..b.rows() {
                for m in 0..b.cols() {
                    out.set(i * b.rows() + k, j * b.cols() + m, aij * b.get(k, m));
                }
            }
        }
    }
    out
}

/// Applies `op ⊗ I_d2` to a ket on a bipartite space of dimensions `(op.dim, d2)`.
pub fn apply_on_first(op: &CMatrix, ket: &Ket, d2: usize) -> Ket {
    assert!(op.is_square());
    let d1 = op.rows();
    assert_eq!(d1 * d2, ket.dim(), "bipartite dimension mismatch");
    let mut amps = vec![c64(0.0, 0.0); ket.dim()];
    for j in 0..d2 {
        for i in 0..d1 {
            let mut acc = c64(0.0, 0.0);
            for k in 0..d1 {
                acc += op.get(i, k) * ket.amp(k * d2 + j);
            }
            amps[i * d2 + j] = acc;
        }
    }
    Ket::new(amps)
}

/// Applies `I_d1 ⊗ op` to a ket on a bipartite space of dimensions `(d1, op.dim)`.
pub fn apply_on_second(op: &CMatrix, ket: &Ket, d1: usize) -> Ket {
    assert!(op.is_square());
    let d2 = op.rows();
    assert_eq!(d1 * d2, ket.dim(), "bipartite dimension mismatch");
    let mut amps = vec![c64(0.0, 0.0); ket.dim()];
    for i in 0..d1 {
        for j in 0..d2 {
            let mut acc = c64(0.0, 0.0);
            for k in 0..d2 {
                acc += op.get(j, k) * ket.amp(i * d2 + k);
            }
            amps[i * d2 + j] = acc;
        }
    }
    Ket::new(amps)
}

/// A Hermitian, unit-trace matrix representing a quantum state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace (both within [`STATE_TOL`]).
    ///
    /// Spectrum nonnegativity is checked by the operations that
    /// eigendecompose the state (entropy, matrix powers), where it is free.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidDensity(format!(
                "matrix is {}x{}, not square",
                mat.rows(),
                mat.cols()
            )));
        }
        if !mat.is_finite() {
            return Err(Error::InvalidDensity("non-finite entries".into()));
        }
        let defect = mat.hermiticity_defect();
        if defect > STATE_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidDensity(format!(
                "trace = {:+.3e}{:+.3e}i, expected 1",
                tr.re, tr.im
            )));
        }
        Ok(Self { mat })
    }

    /// `|ψ⟩⟨ψ|` for a (normalized) pure state.
    pub fn from_pure(ket: &Ket) -> Result<Self> {
        let n = ket.norm();
        if (n - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidDensity(format!(
                "pure state norm = {n}, expected 1"
            )));
        }
        Self::new(ket.outer())
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let m = CMatrix::identity(dim).scale(c64(1.0 / dim as f64, 0.0));
        Self { mat: m }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }

    /// `Tr ρ²`; equals 1 exactly for pure states.
    pub fn purity(&self) -> f64 {
        self.mat.mul(&self.mat).trace().re
    }

    /// Convex mixture of states on a common dimension. Weights must be
    /// nonnegative and sum to 1 within [`STATE_TOL`].
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidDensity("empty mixture".into()));
        }
        let dim = parts[0].1.dim();
        let mut total = 0.0;
        let mut acc = CMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimMismatch(format!(
                    "mixture components of dims {dim} and {}",
                    rho.dim()
                )));
            }
            if *w < -STATE_TOL {
                return Err(Error::InvalidDensity(format!("negative weight {w}")));
            }
            total += w;
            acc = acc.add(&rho.mat.scale(c64(*w, 0.0)));
        }
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidDensity(format!(
                "mixture weights sum to {total}"
            )));
        }
        Self::new(acc)
    }
}

/// Partial trace of `rho` over the factors *not* listed in `keep`.
///
/// `dims` lists the tensor-factor dimensions (their product must equal the
/// state dimension); `keep` lists the factor indices of the reduced state,
/// in increasing order.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if total != rho.dim() {
        return Err(Error::DimMismatch(format!(
            "factor dims product {total} != state dim {}",
            rho.dim()
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam("keep indices must be strictly increasing".into()));
    }
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::IndexOutOfRange(format!(
            "keep index exceeds {} factors",
            dims.len()
        )));
    }

    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let keep_dim: usize = keep.iter().map(|&i| dims[i]).product();
    let trace_dim: usize = traced.iter().map(|&i| dims[i]).product();

    // Strides of each factor in the flattened index.
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }

    let expand = |multi: usize, factors: &[usize]| -> usize {
        let mut rem = multi;
        let mut flat = 0;
        for &f in factors.iter().rev() {
            flat += (rem % dims[f]) * strides[f];
            rem /= dims[f];
        }
        flat
    };

    let mut out = CMatrix::zeros(keep_dim, keep_dim);
    for ik in 0..keep_dim {
        let base_i = expand(ik, keep);
        for jk in 0..keep_dim {
            let base_j = expand(jk, keep);
            let mut acc = c64(0.0, 0.0);
            for t in 0..trace_dim {
                let off = expand(t, &traced);
                acc += rho.mat().get(base_i + off, base_j + off);
            }
            out.set(ik, jk, acc);
        }
    }
    DensityMatrix::new(out)
}

/// Reduced state of a bipartite pure state, contracted directly from the
/// amplitudes. `keep_first` selects which factor survives.
pub fn ket_partial_trace(
    ket: &Ket,
    dims: (usize, usize),
    keep_first: bool,
) -> Result<DensityMatrix> {
    let (d1, d2) = dims;
    if d1 * d2 != ket.dim() {
        return Err(Error::DimMismatch(format!(
            "bipartite dims {d1}x{d2} != ket dim {}",
            ket.dim()
        )));
    }
    let kept = if keep_first { d1 } else { d2 };
    let mut out = CMatrix::zeros(kept, kept);
    if keep_first {
        for i in 0..d1 {
            for ip in 0..d1 {
                let mut acc = c64(0.0, 0.0);
                for j in 0..d2 {
                    acc += ket.amp(i * d2 + j) * ket.amp(ip * d2 + j).conj();
                }
                out.set(i, ip, acc);
            }
        }
    } else {
        for j in 0..d2 {
            for jp in 0..d2 {
                let mut acc = c64(0.0, 0.0);
                for i in 0..d1 {
                    acc += ket.amp(i * d2 + j) * ket.amp(i * d2 + jp).conj();
                }
                out.set(j, jp, acc);
            }
        }
    }
    DensityMatrix::new(out)
}

/// Spectral power `ρ^p` computed on the support only: eigenvalues at or
/// below `kernel_cutoff` are mapped to zero, which makes negative powers
/// well-defined on rank-deficient states.
pub fn matrix_power(rho: &DensityMatrix, p: f64, kernel_cutoff: f64) -> Result<CMatrix> {
    let (evals, vecs) = hermitian_eig(rho.mat())?;
    let dim = rho.dim();
    let mut out = CMatrix::zeros(dim, dim);
    for (k, &lambda) in evals.iter().enumerate() {
        if lambda <= kernel_cutoff {
            continue;
        }
        let w = lambda.powf(p);
        for i in 0..dim {
            let vi = vecs.get(i, k);
            if vi == c64(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                let v = out.get(i, j) + vi * vecs.get(j, k).conj() * w;
                out.set(i, j, v);
            }
        }
    }
    Ok(out)
}
