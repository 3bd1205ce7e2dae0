//! The two-server rate-one retrieval protocol and its multi-round
//! repetition wrapper.
//!
//! One round, retrieving file `K` out of `F` files valued in `Z_ℓ²`:
//!
//! 1. The user draws a uniform subset `R_user ⊆ {1,…,F}`, sets
//!    `Q1 := R_user` and `Q2 := Q1 Δ {K}`.
//! 2. The queries go out; each alone is a uniform subset, independent of K.
//! 3. Server 1 applies `W(H1)` with `H1 = Σ_{i∈Q1} W_i` to its half of the
//!    shared state `|Φ⟩`; server 2 applies `conj(W(H2))` with
//!    `H2 = Σ_{i∈Q2} W_i`.
//! 4. Both halves are sent to the user.
//! 5. The user measures in the generalized Bell basis (sign-flipped when
//!    `K ∉ Q1`) and reads off `W_K` with probability 1.
//!
//! Subsets are encoded as bitmasks with file index `i` on bit `i−1`, fixing
//! byte-reproducible transcripts. Execution is either exhaustive (enumerate
//! all randomness and files, exact probabilities) or sampled (seeded draws).

use crate::error::{Error, Result};
use crate::linalg::{apply_on_first, apply_on_second, DensityMatrix, Ket};
use crate::weyl::{bell_component, max_entangled, weyl_matrix, WeylLabel};
use serde_json::{json, Value};

/// A database: `F ≥ 2` files, each a value in `Z_ℓ²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileSet {
    ell: u64,
    files: Vec<WeylLabel>,
}

impl FileSet {
    pub fn new(ell: u64, values: &[u64]) -> Result<Self> {
        if ell < 2 {
            return Err(Error::InvalidParam(format!("ℓ = {ell}, need ℓ ≥ 2")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidParam(format!(
                "F = {}, need at least 2 files",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v >= ell * ell) {
            return Err(Error::IndexOutOfRange(format!(
                "file value {v} outside Z_{}",
                ell * ell
            )));
        }
        Ok(Self {
            ell,
            files: values.iter().map(|&v| WeylLabel::from_value(v, ell)).collect(),
        })
    }

    pub fn from_labels(files: Vec<WeylLabel>) -> Result<Self> {
        if files.len() < 2 {
            return Err(Error::InvalidParam("need at least 2 files".into()));
        }
        let ell = files[0].modulus();
        if let Some(l) = files.iter().find(|l| l.modulus() != ell) {
            return Err(Error::ModulusMismatch(ell, l.modulus()));
        }
        Ok(Self { ell, files })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    /// Number of files `F`.
    pub fn count(&self) -> usize {
        self.files.len()
    }

    /// File `W_i` by 1-based index.
    pub fn file(&self, i: usize) -> WeylLabel {
        self.files[i - 1]
    }

    /// Group sum `Σ_{i∈mask} W_i` in `Z_ℓ²`.
    pub fn masked_sum(&self, mask: u64) -> WeylLabel {
        let mut acc = WeylLabel::zero(self.ell);
        for (idx, file) in self.files.iter().enumerate() {
            if mask >> idx & 1 == 1 {
                acc = acc.add(file);
            }
        }
        acc
    }
}

/// The query pair `(Q1, Q2)` as F-bit masks; the honest pair satisfies
/// `Q1 Δ Q2 = {K}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryPair {
    pub q1: u64,
    pub q2: u64,
}

impl QueryPair {
    pub fn k_in_q1(&self, k: usize) -> bool {
        self.q1 >> (k - 1) & 1 == 1
    }
}

/// Which server applies its masked Weyl sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Server1,
    Server2,
}

/// Step 1: `Q1 = R_user`, `Q2 = Q1 Δ {K}`.
///
/// Over uniform `R_user`, each of `Q1` and `Q2` alone is uniform over all
/// `2^F` subsets, hiding `K` from each server individually.
pub fn gen_queries(f: usize, k: usize, r_user: u64) -> Result<QueryPair> {
    if !(2..=63).contains(&f) {
        return Err(Error::InvalidParam(format!("F = {f} out of supported range")));
    }
    if k < 1 || k > f {
        return Err(Error::IndexOutOfRange(format!("K = {k} not in 1..={f}")));
    }
    if r_user >> f != 0 {
        return Err(Error::IndexOutOfRange(format!(
            "R_user mask {r_user:#x} has bits beyond F = {f}"
        )));
    }
    Ok(QueryPair {
        q1: r_user,
        q2: r_user ^ (1 << (k - 1)),
    })
}

/// Step 3, one side: server 1 applies `W(H)⊗I`, server 2 applies
/// `I⊗conj(W(H))`. Norm is preserved.
pub fn server_encode(side: Side, h: &WeylLabel, joint: &Ket) -> Ket {
    let n = h.modulus() as usize;
    assert_eq!(joint.dim(), n * n, "joint state must live on A1⊗A2");
    match side {
        Side::Server1 => apply_on_first(&weyl_matrix(h), joint, n),
        Side::Server2 => apply_on_second(&weyl_matrix(h).conj(), joint, n),
    }
}

/// Step 5: outcome distribution of the Bell measurement, indexed by label
/// value. The POVM element for outcome `(a,b)` projects onto
/// `(W(a,b)⊗I)|Φ⟩` when `K ∈ Q1` and onto `(W(−a,−b)⊗I)|Φ⟩` otherwise.
pub fn decode(k_in_q1: bool, ell: u64, state: &Ket) -> Vec<f64> {
    let m = ell * ell;
    assert_eq!(state.dim(), m as usize, "state dimension must be ℓ²");
    (0..m)
        .map(|v| {
            let label = WeylLabel::from_value(v, ell);
            let eff = if k_in_q1 { label } else { label.neg() };
            bell_component(&eff, state).norm_sqr()
        })
        .collect()
}

/// One full protocol run.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub ell: u64,
    pub f: usize,
    pub k: usize,
    pub r_user_mask: u64,
    pub queries: QueryPair,
    pub h1: WeylLabel,
    pub h2: WeylLabel,
    /// Joint state on `A1⊗A2` after both server encodings.
    pub post_state: Ket,
    /// Measured value in `{0,…,ℓ²−1}`; `ℓ²` is reserved as the failure
    /// sentinel and never produced by the honest decoder.
    pub outcome: u64,
}

impl Transcript {
    pub fn outcome_label(&self) -> Option<WeylLabel> {
        (self.outcome < self.ell * self.ell).then(|| WeylLabel::from_value(self.outcome, self.ell))
    }

    /// JSON form; amplitudes are included only on request.
    pub fn to_json(&self, dump_state: bool) -> Value {
        let mut obj = json!({
            "ell": self.ell,
            "F": self.f,
            "K": self.k,
            "r_user_mask": self.r_user_mask,
            "q1_mask": self.queries.q1,
            "q2_mask": self.queries.q2,
            "h1": [self.h1.a.value(), self.h1.b.value()],
            "h2": [self.h2.a.value(), self.h2.b.value()],
            "outcome": match self.outcome_label() {
                Some(l) => json!([l.a.value(), l.b.value()]),
                None => Value::Null,
            },
        });
        if dump_state {
            let amps: Vec<Value> = self
                .post_state
                .amps()
                .iter()
                .map(|a| json!([a.re, a.im]))
                .collect();
            obj.as_object_mut()
                .expect("transcript serializes to an object")
                .insert("state".into(), Value::Array(amps));
        }
        obj
    }
}

/// Runs one round with explicit queries (used by audits that probe
/// off-protocol query pairs); servers always follow the protocol.
pub fn run_with_queries(
    files: &FileSet,
    k: usize,
    r_user: u64,
    queries: QueryPair,
) -> Result<Transcript> {
    let f = files.count();
    if k < 1 || k > f {
        return Err(Error::IndexOutOfRange(format!("K = {k} not in 1..={f}")));
    }
    let ell = files.ell();
    let h1 = files.masked_sum(queries.q1);
    let h2 = files.masked_sum(queries.q2);

    let shared = max_entangled(ell);
    let after_1 = server_encode(Side::Server1, &h1, &shared);
    let post_state = server_encode(Side::Server2, &h2, &after_1);
    debug_assert!((post_state.norm() - 1.0).abs() <= 1e-9);

    let probs = decode(queries.k_in_q1(k), ell, &post_state);
    let outcome = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("probabilities are finite"))
        .map(|(i, _)| i as u64)
        .expect("distribution is nonempty");

    Ok(Transcript {
        ell,
        f,
        k,
        r_user_mask: r_user,
        queries,
        h1,
        h2,
        post_state,
        outcome,
    })
}

/// Runs one honest round: deterministic given `(files, K, R_user)` and
/// always outputs `M = W_K`.
pub fn run(files: &FileSet, k: usize, r_user: u64) -> Result<Transcript> {
    let queries = gen_queries(files.count(), k, r_user)?;
    run_with_queries(files, k, r_user, queries)
}

/// Upload/download costs and the rate of one round.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ProtocolCosts {
    /// Two F-bit subsets.
    pub upload_bits: f64,
    /// `log₂ dim(A1⊗A2) = 2·log₂ ℓ`.
    pub download_bits: f64,
    /// `log₂ M / download`; identically 1 for this protocol.
    pub rate: f64,
}

pub fn costs(f: usize, ell: u64) -> ProtocolCosts {
    let download_bits = 2.0 * (ell as f64).log2();
    let log_m = 2.0 * (ell as f64).log2();
    ProtocolCosts {
        upload_bits: 2.0 * f as f64,
        download_bits,
        rate: log_m / download_bits,
    }
}

/// `R` independent rounds, fresh entanglement each round.
#[derive(Debug, Clone)]
pub struct MultiRoundTranscript {
    pub rounds: Vec<Transcript>,
    pub per_round_targets: Vec<usize>,
}

impl MultiRoundTranscript {
    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    /// `Σ_i log₂ dim A^i = R · 2 log₂ ℓ`.
    pub fn aggregate_download_bits(&self) -> f64 {
        self.rounds
            .iter()
            .map(|t| 2.0 * (t.ell as f64).log2())
            .sum()
    }

    /// Aggregate retrieved bits over aggregate download; 1 for the honest
    /// repetition protocol.
    pub fn aggregate_rate(&self) -> f64 {
        let retrieved: f64 = self
            .rounds
            .iter()
            .map(|t| 2.0 * (t.ell as f64).log2())
            .sum();
        retrieved / self.aggregate_download_bits()
    }
}

/// Runs the rate-one protocol `R` times; round `i` retrieves
/// `targets[i]` using `randomness[i]` as its fresh query mask.
pub fn run_multiround(
    files: &FileSet,
    targets: &[usize],
    randomness: &[u64],
) -> Result<MultiRoundTranscript> {
    if targets.is_empty() {
        return Err(Error::InvalidParam("need at least one round".into()));
    }
    if targets.len() != randomness.len() {
        return Err(Error::InvalidParam(format!(
            "{} targets but {} randomness masks",
            targets.len(),
            randomness.len()
        )));
    }
    let rounds = targets
        .iter()
        .zip(randomness)
        .map(|(&k, &r)| run(files, k, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiRoundTranscript {
        rounds,
        per_round_targets: targets.to_vec(),
    })
}

/// The rank-one state delivered to the user in Steps 3-4, as a density
/// matrix. Up to a global phase it is `(W(±W_K)⊗I)|Φ⟩⟨Φ|(W(±W_K)⊗I)†`,
/// independent of every non-target file.
pub fn answer_state(files: &FileSet, k: usize, queries: QueryPair) -> Result<DensityMatrix> {
    let t = run_with_queries(files, k, 0, queries)?;
    DensityMatrix::from_pure(&t.post_state)
}

/// All `M^F` file assignments for given `(ℓ, F)`, in lexicographic order.
pub fn exhaustive_file_sets(ell: u64, f: usize) -> impl Iterator<Item = FileSet> {
    let m = ell * ell;
    let total = m.pow(f as u32);
    (0..total).map(move |mut code| {
        let mut values = vec![0u64; f];
        for slot in values.iter_mut().rev() {
            *slot = code % m;
            code /= m;
        }
        FileSet::new(ell, &values).expect("enumerated values are in range")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, tensor, CMatrix};
    use crate::weyl::{bell_state, omega_power};
    use std::collections::HashMap;

    #[test]
    fn gen_queries_worked_examples() {
        // F=2, K=1, R_user = {} → Q1 = {}, Q2 = {1}.
        let q = gen_queries(2, 1, 0b00).unwrap();
        assert_eq!((q.q1, q.q2), (0b00, 0b01));
        // F=2, K=1, R_user = {1,2} → Q1 = {1,2}, Q2 = {2}.
        let q = gen_queries(2, 1, 0b11).unwrap();
        assert_eq!((q.q1, q.q2), (0b11, 0b10));
    }

    #[test]
    fn gen_queries_rejects_bad_inputs() {
        assert!(gen_queries(2, 0, 0).is_err());
        assert!(gen_queries(2, 3, 0).is_err());
        assert!(gen_queries(2, 1, 0b100).is_err());
    }

    #[test]
    fn query_marginals_are_uniform() {
        // F=3, any K: over the 8 masks, each of Q1 and Q2 takes every
        // subset value exactly once.
        for k in 1..=3 {
            let mut q1_counts = HashMap::new();
            let mut q2_counts = HashMap::new();
            for mask in 0..8u64 {
                let q = gen_queries(3, k, mask).unwrap();
                *q1_counts.entry(q.q1).or_insert(0u32) += 1;
                *q2_counts.entry(q.q2).or_insert(0u32) += 1;
            }
            assert_eq!(q1_counts.len(), 8);
            assert_eq!(q2_counts.len(), 8);
            assert!(q1_counts.values().all(|&c| c == 1));
            assert!(q2_counts.values().all(|&c| c == 1));
        }
    }

    #[test]
    fn server_encode_identity_is_noop() {
        let phi = max_entangled(3);
        let out = server_encode(Side::Server1, &WeylLabel::zero(3), &phi);
        for i in 0..9 {
            assert!((out.amp(i) - phi.amp(i)).norm() <= 1e-15);
        }
    }

    #[test]
    fn server_encode_matches_matrix_vector_oracle() {
        // Oracle: build the full ℓ²×ℓ² operator and multiply.
        let phi = max_entangled(2);
        let h = WeylLabel::from_parts(1, 0, 2);

        let got = server_encode(Side::Server1, &h, &phi);
        let oracle = tensor(&weyl_matrix(&h), &CMatrix::identity(2)).apply(&phi);
        for i in 0..4 {
            assert!((got.amp(i) - oracle.amp(i)).norm() <= 1e-14);
        }
        // (1/√2)(|10⟩ + |01⟩)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((got.amp(1) - c64(s, 0.0)).norm() <= 1e-14);
        assert!((got.amp(2) - c64(s, 0.0)).norm() <= 1e-14);

        let got2 = server_encode(Side::Server2, &h, &phi);
        let oracle2 = tensor(&CMatrix::identity(2), &weyl_matrix(&h).conj()).apply(&phi);
        for i in 0..4 {
            assert!((got2.amp(i) - oracle2.amp(i)).norm() <= 1e-14);
        }
    }

    #[test]
    fn step3_state_is_phased_bell_state_of_target() {
        // W(H1)⊗conj(W(H2))|Φ⟩ = ω^{∓b_W·a_H2} (W(±W_K)⊗I)|Φ⟩.
        for ell in [2u64, 3, 5] {
            let m = ell * ell;
            for w_k in 0..m {
                for h2_val in 0..m {
                    for sign_plus in [true, false] {
                        let target = WeylLabel::from_value(w_k, ell);
                        let h2 = WeylLabel::from_value(h2_val, ell);
                        let signed = if sign_plus { target } else { target.neg() };
                        let h1 = signed.add(&h2);

                        let phi = max_entangled(ell);
                        let got = server_encode(
                            Side::Server2,
                            &h2,
                            &server_encode(Side::Server1, &h1, &phi),
                        );

                        let phase_exp = signed.b.mul(&h2.a).neg();
                        let expected =
                            bell_state(&signed).scale(omega_power(ell, phase_exp.value()));
                        for i in 0..(m as usize) {
                            assert!(
                                (got.amp(i) - expected.amp(i)).norm() <= 1e-12,
                                "ℓ={ell} w={w_k} h2={h2_val} plus={sign_plus}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn decode_point_masses() {
        let ell = 3u64;
        for w in 0..9u64 {
            let state = bell_state(&WeylLabel::from_value(w, ell));
            let probs = decode(true, ell, &state);
            assert!((probs[w as usize] - 1.0).abs() <= 1e-12);
            assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
        // |Φ⟩ decodes to (0,0) on either branch.
        let phi = max_entangled(ell);
        for branch in [true, false] {
            let probs = decode(branch, ell, &phi);
            assert!((probs[0] - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn decode_ignores_global_phase() {
        let ell = 2u64;
        let state = bell_state(&WeylLabel::from_value(3, ell));
        let rotated = state.scale(c64(0.6, 0.8));
        let p1 = decode(false, ell, &state);
        let p2 = decode(false, ell, &rotated);
        for (a, b) in p1.iter().zip(&p2) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn run_retrieves_target_file_example() {
        // W = ((1,0), (0,1)) at ℓ=2, K=2: outcome is (0,1), value 1,
        // for every randomness mask.
        let files = FileSet::new(2, &[2, 1]).unwrap();
        assert_eq!(files.file(1), WeylLabel::from_parts(1, 0, 2));
        assert_eq!(files.file(2), WeylLabel::from_parts(0, 1, 2));
        for mask in 0..4u64 {
            let t = run(&files, 2, mask).unwrap();
            assert_eq!(t.outcome, 1);
            assert_eq!(t.outcome_label().unwrap(), WeylLabel::from_parts(0, 1, 2));
        }
    }

    #[test]
    fn run_with_all_zero_files() {
        let files = FileSet::new(3, &[0, 0, 0]).unwrap();
        let t = run(&files, 2, 0b101).unwrap();
        assert_eq!(t.outcome, 0);
    }

    #[test]
    fn exhaustive_sweep_has_zero_error_and_consistent_sums() {
        // All 4²·2·4 = 128 cases at ℓ=2, F=2, plus the transcript
        // invariant H1 − H2 = ±W_K.
        let mut cases = 0;
        for files in exhaustive_file_sets(2, 2) {
            for k in 1..=2 {
                for mask in 0..4u64 {
                    let t = run(&files, k, mask).unwrap();
                    assert_eq!(t.outcome, files.file(k).value());
                    let diff = t.h1.sub(&t.h2);
                    let expect = if t.queries.k_in_q1(k) {
                        files.file(k)
                    } else {
                        files.file(k).neg()
                    };
                    assert_eq!(diff, expect);
                    cases += 1;
                }
            }
        }
        assert_eq!(cases, 128);
    }

    #[test]
    fn transcript_sum_invariant_at_ell_3() {
        for files in exhaustive_file_sets(3, 2) {
            for k in 1..=2 {
                for mask in 0..4u64 {
                    let t = run(&files, k, mask).unwrap();
                    let diff = t.h1.sub(&t.h2);
                    let expect = if t.queries.k_in_q1(k) {
                        files.file(k)
                    } else {
                        files.file(k).neg()
                    };
                    assert_eq!(diff, expect);
                    assert_eq!(t.outcome, files.file(k).value());
                }
            }
        }
    }

    #[test]
    fn costs_match_formulas() {
        let c = costs(2, 2);
        assert_eq!(c.upload_bits, 4.0);
        assert_eq!(c.download_bits, 2.0);
        assert_eq!(c.rate, 1.0);

        let c = costs(5, 3);
        assert_eq!(c.upload_bits, 10.0);
        assert!((c.download_bits - 2.0 * 3f64.log2()).abs() <= 1e-15);
        assert_eq!(c.rate, 1.0);

        // Rate does not depend on F.
        assert_eq!(costs(2, 4).rate, costs(17, 4).rate);
    }

    #[test]
    fn answer_state_is_pure_bell_state_of_target() {
        let files = FileSet::new(2, &[3, 2]).unwrap();
        for k in 1..=2 {
            for mask in 0..4u64 {
                let queries = gen_queries(2, k, mask).unwrap();
                let rho = answer_state(&files, k, queries).unwrap();
                assert!((rho.purity() - 1.0).abs() <= 1e-12);
                let signed = if queries.k_in_q1(k) {
                    files.file(k)
                } else {
                    files.file(k).neg()
                };
                let expect = DensityMatrix::from_pure(&bell_state(&signed)).unwrap();
                assert!(rho.mat().max_abs_diff(expect.mat()) <= 1e-12);
            }
        }
    }

    #[test]
    fn answer_state_is_independent_of_non_target_files() {
        let ell = 3u64;
        let queries = gen_queries(2, 1, 0b01).unwrap();
        let reference = answer_state(&FileSet::new(ell, &[5, 0]).unwrap(), 1, queries).unwrap();
        for other in 0..9u64 {
            let rho = answer_state(&FileSet::new(ell, &[5, other]).unwrap(), 1, queries).unwrap();
            assert!(rho.mat().max_abs_diff(reference.mat()) <= 1e-12);
        }
    }

    #[test]
    fn answer_states_cover_exactly_m_orthogonal_pure_states() {
        // Over all (W_K, branch) pairs the answer hits exactly ℓ² distinct
        // mutually orthogonal pure states.
        let ell = 2u64;
        let m = ell * ell;
        let mut reps: Vec<DensityMatrix> = Vec::new();
        for w in 0..m {
            for k_in_q1 in [true, false] {
                let files = FileSet::new(ell, &[w, 0]).unwrap();
                let queries = if k_in_q1 {
                    gen_queries(2, 1, 0b01).unwrap()
                } else {
                    gen_queries(2, 1, 0b00).unwrap()
                };
                let rho = answer_state(&files, 1, queries).unwrap();
                if !reps.iter().any(|r| r.mat().max_abs_diff(rho.mat()) <= 1e-9) {
                    reps.push(rho);
                }
            }
        }
        assert_eq!(reps.len(), m as usize);
        for i in 0..reps.len() {
            for j in 0..i {
                let overlap = reps[i].mat().mul(reps[j].mat()).trace().norm();
                assert!(overlap <= 1e-12);
            }
        }
    }

    #[test]
    fn multiround_single_round_matches_run() {
        let files = FileSet::new(2, &[1, 2]).unwrap();
        let mrt = run_multiround(&files, &[1], &[0b10]).unwrap();
        let single = run(&files, 1, 0b10).unwrap();
        assert_eq!(mrt.rounds[0].outcome, single.outcome);
        assert_eq!(mrt.round_count(), 1);
    }

    #[test]
    fn multiround_three_rounds_all_correct() {
        let files = FileSet::new(2, &[3, 1]).unwrap();
        let mrt = run_multiround(&files, &[1, 2, 1], &[0b00, 0b11, 0b01]).unwrap();
        assert_eq!(mrt.rounds[0].outcome, 3);
        assert_eq!(mrt.rounds[1].outcome, 1);
        assert_eq!(mrt.rounds[2].outcome, 3);
        assert_eq!(mrt.per_round_targets, vec![1, 2, 1]);
    }

    #[test]
    fn multiround_aggregate_rate_is_one() {
        let files = FileSet::new(3, &[4, 7]).unwrap();
        for r in 1..=8usize {
            let targets: Vec<usize> = (0..r).map(|i| 1 + i % 2).collect();
            let masks = vec![0u64; r];
            let mrt = run_multiround(&files, &targets, &masks).unwrap();
            assert!((mrt.aggregate_rate() - 1.0).abs() <= 1e-12);
            assert!((mrt.aggregate_download_bits() - r as f64 * 2.0 * 3f64.log2()).abs() <= 1e-9);
        }
    }

    #[test]
    fn per_round_average_answer_state_is_maximally_mixed() {
        // Averaging (W(w)⊗I)|Φ⟩⟨Φ|(...)† over uniform w gives I/ℓ² by
        // completeness of the Bell basis.
        let ell = 2u64;
        let m = ell * ell;
        let dim = m as usize;
        let mut acc = CMatrix::zeros(dim, dim);
        let mut count = 0.0;
        for w in 0..m {
            for mask in 0..4u64 {
                let files = FileSet::new(ell, &[w, 0]).unwrap();
                let t = run(&files, 1, mask).unwrap();
                acc = acc.add(&t.post_state.outer());
                count += 1.0;
            }
        }
        let avg = acc.scale(c64(1.0 / count, 0.0));
        let uniform = CMatrix::identity(dim).scale(c64(1.0 / m as f64, 0.0));
        assert!(avg.max_abs_diff(&uniform) <= 1e-12);
    }

    #[test]
    fn transcript_json_shape() {
        let files = FileSet::new(2, &[2, 1]).unwrap();
        let t = run(&files, 2, 0b01).unwrap();
        let v = t.to_json(false);
        let obj = v.as_object().unwrap();
        let keys: Vec<&str> = obj.keys().map(|s| s.as_str()).collect();
        assert_eq!(
            keys,
            vec!["F", "K", "ell", "h1", "h2", "outcome", "q1_mask", "q2_mask", "r_user_mask"]
        );
        assert_eq!(v["outcome"], json!([0, 1]));
        assert!(t.to_json(true).get("state").is_some());
        assert_eq!(t.to_json(true)["state"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn exhaustive_file_sets_counts() {
        assert_eq!(exhaustive_file_sets(2, 2).count(), 16);
        assert_eq!(exhaustive_file_sets(3, 2).count(), 81);
    }
}
