//! Hermitian eigendecomposition by cyclic Jacobi rotations.
//!
//! Each sweep visits every off-diagonal pair (p, q) and applies a complex
//! plane rotation that zeroes the entry. The phase of the pivot is absorbed
//! into the rotation so the underlying 2x2 problem is the classical real
//! symmetric one. Convergence is declared when the off-diagonal Frobenius
//! norm drops to 1e-12 (absolute; every matrix handled here is O(1)).

use super::{c64, CMatrix, C64};
use crate::error::{Error, Result};

const OFF_DIAG_TARGET: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Input Hermiticity tolerance.
const HERMITIAN_TOL: f64 = 1e-9;

/// Eigenvalues (ascending) and eigenvectors (as matrix columns) of a
/// Hermitian matrix, satisfying `m ≈ V diag(λ) V†`.
pub fn hermitian_eig(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !m.is_square() {
        return Err(Error::DimMismatch(format!(
            "eigendecomposition of {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.rows();

    // Work on the Hermitian average (A + A†)/2 so roundoff asymmetry in the
    // input cannot accumulate through the sweeps.
    let mut a: Vec<C64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            a.push((m.get(i, j) + m.get(j, i).conj()) * c64(0.5, 0.0));
        }
    }
    let mut v = CMatrix::identity(n);

    let mut sweeps = 0;
    while off_diag_norm(&a, n) > OFF_DIAG_TARGET {
        if sweeps >= MAX_SWEEPS {
            return Err(Error::NoConvergence(sweeps));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let evals_raw: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    order.sort_by(|&i, &j| evals_raw[i].partial_cmp(&evals_raw[j]).unwrap());

    let evals: Vec<f64> = order.iter().map(|&i| evals_raw[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vecs.set(row, col, v.get(row, src));
        }
    }
    Ok((evals, vecs))
}

fn off_diag_norm(a: &[C64], n: usize) -> f64 {
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            sum += 2.0 * a[p * n + q].norm_sqr();
        }
    }
    sum.sqrt()
}

/// One complex Jacobi rotation zeroing a[p,q], updating A ← U† A U and V ← V U.
fn rotate(a: &mut [C64], v: &mut CMatrix, n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    // Unit phase of the pivot: apq = b·u.
    let u = apq / b;

    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let tau = (aqq - app) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Column update: A ← A·U with U[p,p]=c, U[p,q]=s·u, U[q,p]=−s·ū, U[q,q]=c.
    let su = c64(s, 0.0) * u;
    let su_conj = su.conj();
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * c - akq * su_conj;
        a[k * n + q] = akp * su + akq * c;
    }
    // Row update: A ← U†·A.
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * c - aqk * su;
        a[q * n + k] = apk * su_conj + aqk * c;
    }
    // Clean the pivot pair: exact zeros off-diagonal, real diagonal.
    a[p * n + q] = c64(0.0, 0.0);
    a[q * n + p] = c64(0.0, 0.0);
    a[p * n + p] = c64(a[p * n + p].re, 0.0);
    a[q * n + q] = c64(a[q * n + q].re, 0.0);

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * c - vkq * su_conj);
        v.set(k, q, vkp * su + vkq * c);
    }
}
