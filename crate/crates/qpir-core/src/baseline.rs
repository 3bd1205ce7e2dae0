//! Classical two-server PIR baseline and the capacity formulas used for
//! the quantitative comparison tables.
//!
//! The baseline runs the same queries as the quantum protocol, but the
//! servers answer their masked sums `H1, H2 ∈ Z_ℓ²` in the clear and the
//! user recovers `±(A1 − A2)`. Downloading two group elements for one
//! makes the classical rate exactly 1/2 on matched file alphabets, against
//! rate 1 for the entanglement-assisted protocol.

use crate::error::{Error, Result};
use crate::protocol::{gen_queries, FileSet, QueryPair};
use crate::weyl::WeylLabel;
use serde::Serialize;

/// One run of the classical baseline.
#[derive(Debug, Clone)]
pub struct ClassicalTranscript {
    pub ell: u64,
    pub f: usize,
    pub k: usize,
    pub r_user_mask: u64,
    pub queries: QueryPair,
    /// Clear-text answers: the masked sums over `Q1` and `Q2`.
    pub a1: WeylLabel,
    pub a2: WeylLabel,
    pub recovered: WeylLabel,
}

impl ClassicalTranscript {
    /// Two group elements of `Z_ℓ²` travel back: `2·log₂ M` bits.
    pub fn download_bits(&self) -> f64 {
        2.0 * 2.0 * (self.ell as f64).log2()
    }

    /// `log₂ M` retrieved over `2·log₂ M` downloaded.
    pub fn rate(&self) -> f64 {
        let log_m = 2.0 * (self.ell as f64).log2();
        log_m / self.download_bits()
    }
}

/// Runs the classical baseline: same queries, answers in the clear,
/// recovery by group subtraction. Always recovers `W_K`.
pub fn classical_run(files: &FileSet, k: usize, r_user: u64) -> Result<ClassicalTranscript> {
    let queries = gen_queries(files.count(), k, r_user)?;
    let a1 = files.masked_sum(queries.q1);
    let a2 = files.masked_sum(queries.q2);
    let recovered = if queries.k_in_q1(k) {
        a1.sub(&a2)
    } else {
        a2.sub(&a1)
    };
    Ok(ClassicalTranscript {
        ell: files.ell(),
        f: files.count(),
        k,
        r_user_mask: r_user,
        queries,
        a1,
        a2,
        recovered,
    })
}

/// Classical PIR capacity `(1 − 1/N)/(1 − (1/N)^F)` for `N` servers and
/// `F` files.
pub fn classical_capacity(n: u64, f: u64) -> Result<f64> {
    if n < 2 || f < 2 {
        return Err(Error::InvalidParam(format!(
            "capacity needs N ≥ 2 and F ≥ 2, got N={n} F={f}"
        )));
    }
    let n = n as f64;
    Ok((1.0 - 1.0 / n) / (1.0 - n.powi(-(f as i32))))
}

/// Symmetric classical PIR capacity `1 − 1/N`.
pub fn symmetric_capacity(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParam(format!("capacity needs N ≥ 2, got N={n}")));
    }
    Ok(1.0 - 1.0 / n as f64)
}

/// One comparison row: capacities, upload costs, and the matched file
/// sizes at parameter ℓ.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityTable {
    pub n: u64,
    #[serde(rename = "F")]
    pub f: u64,
    pub c_pir: f64,
    pub c_sym: f64,
    /// Entanglement-assisted capacity; 1 regardless of `(N, F)`.
    pub c_qpir: f64,
    /// `N·(F−1)·log₂ N` bits for the minimum-upload classical scheme.
    pub upload_classical_bits: f64,
    /// `2F` bits for the quantum protocol.
    pub upload_quantum_bits: f64,
    /// Quantum file sizes are squares: `ℓ²`.
    pub file_size_quantum: u64,
    /// The classical comparison scheme needs `ℓ^{N−1}`.
    pub file_size_classical: u64,
}

impl CapacityTable {
    pub fn csv_header() -> &'static str {
        "n,F,c_pir,c_sym,c_qpir,upload_classical_bits,upload_quantum_bits,file_size_quantum,file_size_classical"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.f,
            self.c_pir,
            self.c_sym,
            self.c_qpir,
            self.upload_classical_bits,
            self.upload_quantum_bits,
            self.file_size_quantum,
            self.file_size_classical
        )
    }
}

/// Builds the comparison row for `(N, F)` at file-size parameter ℓ.
pub fn comparison_table(n: u64, f: u64, ell: u64) -> Result<CapacityTable> {
    if ell < 2 {
        return Err(Error::InvalidParam(format!("ℓ = {ell}, need ℓ ≥ 2")));
    }
    Ok(CapacityTable {
        n,
        f,
        c_pir: classical_capacity(n, f)?,
        c_sym: symmetric_capacity(n)?,
        c_qpir: 1.0,
        upload_classical_bits: n as f64 * (f - 1) as f64 * (n as f64).log2(),
        upload_quantum_bits: 2.0 * f as f64,
        file_size_quantum: ell * ell,
        file_size_classical: ell.pow((n - 1) as u32),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{exhaustive_file_sets, run};
    use std::collections::HashMap;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {b}, got {a}");
    }

    #[test]
    fn classical_run_worked_example() {
        // W = ((1,1), (1,0)) at ℓ=2, K=1, R_user = {2}:
        // A1 = W_2 = (1,0); A2 = W_1 + W_2 = (0,1); K ∉ Q1 so the
        // recovery is A2 − A1 = (1,1) = W_1 over Z₂².
        let files = FileSet::new(2, &[3, 2]).unwrap();
        let t = classical_run(&files, 1, 0b10).unwrap();
        assert_eq!(t.a1, WeylLabel::from_parts(1, 0, 2));
        assert_eq!(t.a2, WeylLabel::from_parts(0, 1, 2));
        assert_eq!(t.recovered, WeylLabel::from_parts(1, 1, 2));
        assert_eq!(t.recovered, files.file(1));
    }

    #[test]
    fn classical_run_all_zero_files() {
        let files = FileSet::new(3, &[0, 0]).unwrap();
        let t = classical_run(&files, 2, 0b01).unwrap();
        assert_eq!(t.recovered, WeylLabel::zero(3));
    }

    #[test]
    fn classical_exhaustive_zero_error_and_uniform_queries() {
        let mut q1_counts: HashMap<u64, u32> = HashMap::new();
        for files in exhaustive_file_sets(2, 2) {
            for k in 1..=2 {
                for mask in 0..4u64 {
                    let t = classical_run(&files, k, mask).unwrap();
                    assert_eq!(t.recovered, files.file(k));
                    // Answer-difference invariant A1 − A2 = ±W_K.
                    let diff = t.a1.sub(&t.a2);
                    let expect = if t.queries.k_in_q1(k) {
                        files.file(k)
                    } else {
                        files.file(k).neg()
                    };
                    assert_eq!(diff, expect);
                    *q1_counts.entry(t.queries.q1).or_insert(0) += 1;
                }
            }
        }
        assert_eq!(q1_counts.len(), 4);
        let first = q1_counts[&0];
        assert!(q1_counts.values().all(|&c| c == first));
    }

    #[test]
    fn classical_and_quantum_recover_identical_values() {
        // The quantum protocol is the classical one with the answers
        // carried by Weyl phases.
        for f in [2usize, 3] {
            for files in exhaustive_file_sets(2, f) {
                for k in 1..=f {
                    for mask in 0..(1u64 << f) {
                        let classical = classical_run(&files, k, mask).unwrap();
                        let quantum = run(&files, k, mask).unwrap();
                        assert_eq!(classical.recovered.value(), quantum.outcome);
                    }
                }
            }
        }
    }

    #[test]
    fn classical_rate_is_half() {
        for ell in [2u64, 3, 5] {
            let files = FileSet::new(ell, &[1, 2]).unwrap();
            let t = classical_run(&files, 1, 0).unwrap();
            assert_eq!(t.rate(), 0.5);
            assert_close(t.download_bits(), 4.0 * (ell as f64).log2(), 1e-12);
        }
    }

    #[test]
    fn capacity_formula_values() {
        assert_close(classical_capacity(2, 2).unwrap(), 2.0 / 3.0, 1e-12);
        assert_close(classical_capacity(3, 3).unwrap(), 18.0 / 26.0, 1e-12);
        assert_close(symmetric_capacity(2).unwrap(), 0.5, 1e-15);
        assert_close(symmetric_capacity(4).unwrap(), 0.75, 1e-15);
        assert!(classical_capacity(1, 2).is_err());
        assert!(symmetric_capacity(1).is_err());
    }

    #[test]
    fn capacity_limits() {
        // N → ∞ at fixed F.
        assert_close(classical_capacity(1_000_000, 2).unwrap(), 1.0, 1e-5);
        // F → ∞ at N = 2.
        assert_close(classical_capacity(2, 60).unwrap(), 0.5, 1e-12);
    }

    #[test]
    fn capacity_monotonicity_and_strictness() {
        for f in 2..=64u64 {
            for n in 2..=64u64 {
                let c = classical_capacity(n, f).unwrap();
                assert!(c > 0.0 && c < 1.0, "capacity {c} at N={n} F={f}");
                if n > 2 {
                    assert!(c > classical_capacity(n - 1, f).unwrap());
                }
                if f > 2 {
                    let shorter = classical_capacity(n, f - 1).unwrap();
                    // Strict decrease in F whenever N^{-F} is still
                    // representable next to 1.
                    if (n as f64).powi(-((f - 1) as i32)) > 1e-12 {
                        assert!(c < shorter);
                    } else {
                        assert!(c <= shorter);
                    }
                }
                assert!(symmetric_capacity(n).unwrap() <= c);
            }
        }
        let mut prev = 0.0;
        for n in 2..=16u64 {
            let s = symmetric_capacity(n).unwrap();
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn comparison_table_rows() {
        let row = comparison_table(2, 2, 2).unwrap();
        assert_close(row.c_pir, 2.0 / 3.0, 1e-12);
        assert_close(row.c_sym, 0.5, 1e-15);
        assert_eq!(row.c_qpir, 1.0);
        assert_eq!(row.upload_classical_bits, 2.0);
        assert_eq!(row.upload_quantum_bits, 4.0);
        assert_eq!(row.file_size_quantum, 4);
        assert_eq!(row.file_size_classical, 2);

        let row = comparison_table(3, 3, 2).unwrap();
        assert_close(row.c_pir, 18.0 / 26.0, 1e-12);

        // c_qpir is constant across all (N, F).
        for n in 2..=64u64 {
            for f in 2..=64u64 {
                assert_eq!(comparison_table(n, f, 2).unwrap().c_qpir, 1.0);
            }
        }
    }

    #[test]
    fn comparison_table_csv_shape() {
        let row = comparison_table(2, 2, 3).unwrap();
        assert_eq!(CapacityTable::csv_header().split(',').count(), 9);
        assert_eq!(row.csv_row().split(',').count(), 9);
    }
}
