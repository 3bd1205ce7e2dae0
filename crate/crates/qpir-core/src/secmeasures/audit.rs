//! Exhaustive security audits of the retrieval protocol: error
//! probability, server secrecy, user secrecy, the malicious-user
//! identity, and the sampled entropic inequality on cq states with pure
//! conditionals.

use super::{classical_mutual_info, CqEnsemble, CqEntry, Part, StateRep};
use crate::error::{Error, Result};
use crate::linalg::sampling::{random_pure_state, trial_rng};
use crate::linalg::Ket;
use crate::protocol::{
    costs, decode, exhaustive_file_sets, gen_queries, run_with_queries, QueryPair,
};
use crate::weyl::{bell_state, WeylLabel};
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Exhaustive audits refuse configurations with answer dimension `ℓ²`
/// above this.
pub const EXHAUSTIVE_MAX_ANSWER_DIM: u64 = 16;

/// Exhaustive audits refuse configurations with more than this many file
/// assignments `M^F`.
pub const EXHAUSTIVE_MAX_FILE_TUPLES: u64 = 4096;

/// Query generation used by an audit run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryStrategy {
    /// The protocol's Step 1.
    Honest,
    /// Broken control: `Q1 = {K}`, `Q2 = ∅`. Retrieval still succeeds but
    /// `Q1` names the target outright, so a leak auditor must flag it.
    SingletonLeak,
}

impl QueryStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            QueryStrategy::Honest => "honest",
            QueryStrategy::SingletonLeak => "singleton-leak",
        }
    }

    fn queries(&self, f: usize, k: usize, r_user: u64) -> Result<QueryPair> {
        match self {
            QueryStrategy::Honest => gen_queries(f, k, r_user),
            QueryStrategy::SingletonLeak => Ok(QueryPair {
                q1: 1 << (k - 1),
                q2: 0,
            }),
        }
    }
}

/// The audited security tuple of one protocol configuration.
#[derive(Debug, Clone, Serialize)]
pub struct SecurityReport {
    pub ell: u64,
    #[serde(rename = "F")]
    pub f: usize,
    pub p_err: f64,
    pub s_serv_bits: f64,
    pub s_user_bits: f64,
    pub upload_bits: f64,
    pub download_logdim: f64,
    pub rate: f64,
    pub notes: String,
}

fn check_caps(ell: u64, f: usize) -> Result<()> {
    if ell < 2 {
        return Err(Error::InvalidParam(format!("ℓ = {ell}, need ℓ ≥ 2")));
    }
    if f < 2 {
        return Err(Error::InvalidParam(format!("F = {f}, need F ≥ 2")));
    }
    let m = ell * ell;
    if m > EXHAUSTIVE_MAX_ANSWER_DIM {
        return Err(Error::EnumerationCap(format!(
            "answer dimension ℓ² = {m} exceeds exhaustive cap {EXHAUSTIVE_MAX_ANSWER_DIM}"
        )));
    }
    let tuples = m.checked_pow(f as u32).unwrap_or(u64::MAX);
    if tuples > EXHAUSTIVE_MAX_FILE_TUPLES {
        return Err(Error::EnumerationCap(format!(
            "file assignments M^F = {tuples} exceed exhaustive cap {EXHAUSTIVE_MAX_FILE_TUPLES}"
        )));
    }
    Ok(())
}

fn clamp_report(x: f64) -> f64 {
    if (-1e-9..0.0).contains(&x) {
        0.0
    } else {
        x
    }
}

/// Shared cache of canonical answer states, keyed by the Bell label
/// `H1 − H2`. Each simulated post-state is verified against its canonical
/// representative (fidelity 1 within 1e-12) before the label is trusted;
/// a mismatch means the encoding chain is broken.
struct AnswerCache {
    ell: u64,
    states: BTreeMap<u64, Arc<StateRep>>,
}

impl AnswerCache {
    fn new(ell: u64) -> Self {
        Self {
            ell,
            states: BTreeMap::new(),
        }
    }

    fn canonical(&mut self, diff: WeylLabel, simulated: &Ket) -> Result<Arc<StateRep>> {
        let entry = self
            .states
            .entry(diff.value())
            .or_insert_with(|| Arc::new(StateRep::Pure(bell_state(&diff))));
        let fidelity = match &**entry {
            StateRep::Pure(k) => k.inner(simulated).norm_sqr(),
            StateRep::Dense(_) => unreachable!("cache holds pure states"),
        };
        if (fidelity - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidEnsemble(format!(
                "answer state disagrees with its Bell label (fidelity {fidelity}) at ℓ = {}",
                self.ell
            )));
        }
        Ok(Arc::clone(entry))
    }
}

/// Exhaustive cq ensemble of one target index `k`: labels
/// `(w_1, …, w_F, q1, q2)` over uniform files and uniform user randomness,
/// with the delivered answer state attached.
fn answer_ensemble(ell: u64, f: usize, k: usize, strategy: QueryStrategy) -> Result<CqEnsemble> {
    let m = ell * ell;
    let mask_count = 1u64 << f;
    let weight = 1.0 / (m.pow(f as u32) * mask_count) as f64;
    let mut cache = AnswerCache::new(ell);
    let mut entries = Vec::new();
    for files in exhaustive_file_sets(ell, f) {
        for mask in 0..mask_count {
            let queries = strategy.queries(f, k, mask)?;
            let t = run_with_queries(&files, k, mask, queries)?;
            let state = cache.canonical(t.h1.sub(&t.h2), &t.post_state)?;
            let mut label: Vec<usize> =
                (1..=f).map(|i| files.file(i).value() as usize).collect();
            label.push(queries.q1 as usize);
            label.push(queries.q2 as usize);
            entries.push(CqEntry {
                label,
                prob: weight,
                state,
            });
        }
    }
    CqEnsemble::new(entries)
}

/// Audits the honest protocol at `(ℓ, F)` by exhaustive enumeration.
pub fn audit(ell: u64, f: usize) -> Result<SecurityReport> {
    audit_with_strategy(ell, f, QueryStrategy::Honest)
}

/// Audits the protocol with a chosen query strategy.
///
/// - `p_err`: average over uniform `(W, K, R_user)` of the analytic
///   probability that the decoder misses the target.
/// - `s_serv`: `I(W_{K^c}; A, Q | K)` over the exhaustive cq ensemble,
///   decomposed as `Σ_k Pr[K=k] · I(W_{k^c}; A, Q)`.
/// - `s_user`: `max_t I(K; Q_t)` — server `t` ends the protocol holding
///   `(Q_t, W)` and `W` is independent of `(K, Q)`, so the classical
///   query marginal carries all of its information about `K`.
pub fn audit_with_strategy(ell: u64, f: usize, strategy: QueryStrategy) -> Result<SecurityReport> {
    check_caps(ell, f)?;
    let m = ell * ell;
    let mask_count = 1u64 << f;

    let mut err_acc = 0.0;
    let mut runs = 0u64;
    let mut q1_joint: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    let mut q2_joint: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    for files in exhaustive_file_sets(ell, f) {
        for k in 1..=f {
            for mask in 0..mask_count {
                let queries = strategy.queries(f, k, mask)?;
                let t = run_with_queries(&files, k, mask, queries)?;
                let probs = decode(queries.k_in_q1(k), ell, &t.post_state);
                err_acc += 1.0 - probs[files.file(k).value() as usize];
                runs += 1;
                let w = 1.0 / (m.pow(f as u32) * f as u64 * mask_count) as f64;
                *q1_joint.entry((k as u64, queries.q1)).or_insert(0.0) += w;
                *q2_joint.entry((k as u64, queries.q2)).or_insert(0.0) += w;
            }
        }
    }
    let p_err_raw = err_acc / runs as f64;

    let mut s_serv_raw = 0.0;
    for k in 1..=f {
        let ensemble = answer_ensemble(ell, f, k, strategy)?;
        let others: Vec<usize> = (0..f).filter(|&i| i != k - 1).collect();
        let info = ensemble.mutual_info(
            &Part::classical_only(&others),
            &Part::with_quantum(&[f, f + 1]),
            &Part::empty(),
        )?;
        s_serv_raw += info / f as f64;
    }

    let s_user_raw = classical_mutual_info(&q1_joint).max(classical_mutual_info(&q2_joint));

    let c = costs(f, ell);
    Ok(SecurityReport {
        ell,
        f,
        p_err: clamp_report(p_err_raw),
        s_serv_bits: clamp_report(s_serv_raw),
        s_user_bits: clamp_report(s_user_raw),
        upload_bits: c.upload_bits,
        download_logdim: c.download_bits,
        rate: c.rate,
        notes: format!(
            "strategy={}; raw p_err={:.3e} s_serv={:.3e} s_user={:.3e}; negatives in (-1e-9,0) clamped to 0",
            strategy.name(),
            p_err_raw,
            s_serv_raw,
            s_user_raw
        ),
    })
}

/// The malicious-user identity: with honest servers and an arbitrary
/// (possibly off-protocol) query pair, the delivered system carries no
/// information about the non-target files beyond the one group element the
/// user decodes.
///
/// Computed as `I(A; W_{K^c} | W_K, M, K)` over uniform files and uniform
/// `K`, where `M` is the decoder output. Conditioning on the obtained
/// value `M` expresses the premise that the user ends the protocol holding
/// one file-sized value; for honest queries `M = W_K` and the conditioning
/// collapses to the plain `(W_K, K, Q)` form.
pub fn malicious_user_identity(ell: u64, f: usize, queries: QueryPair) -> Result<f64> {
    check_caps(ell, f)?;
    let m = ell * ell;
    let weight = 1.0 / m.pow(f as u32) as f64;

    let mut total = 0.0;
    for k in 1..=f {
        let mut cache = AnswerCache::new(ell);
        let mut entries = Vec::new();
        for files in exhaustive_file_sets(ell, f) {
            let t = run_with_queries(&files, k, 0, queries)?;
            let state = cache.canonical(t.h1.sub(&t.h2), &t.post_state)?;
            let mut label: Vec<usize> =
                (1..=f).map(|i| files.file(i).value() as usize).collect();
            label.push(t.outcome as usize);
            entries.push(CqEntry {
                label,
                prob: weight,
                state,
            });
        }
        let ensemble = CqEnsemble::new(entries)?;
        let others: Vec<usize> = (0..f).filter(|&i| i != k - 1).collect();
        let cmi = ensemble.mutual_info(
            &Part::quantum_only(),
            &Part::classical_only(&others),
            &Part::classical_only(&[k - 1, f]),
        )?;
        total += cmi / f as f64;
    }
    Ok(total)
}

/// Monte Carlo check of the entropic inequality
/// `I(W;ABF) + H(AB|WF) ≤ H(A) + I(W;BF) + H(B|WF)`
/// on random cq states `Σ p(w,f)|w,f⟩⟨w,f| ⊗ τ_{AB|wf}` with *pure*
/// conditionals. Returns the largest `lhs − rhs` observed (≤ 0 up to
/// roundoff when the inequality holds).
pub fn lemma3_check(seed: u64, trials: usize) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial as u64);
        let dim_a = rng.gen_range(2..=4usize);
        let dim_b = rng.gen_range(2..=4usize);
        let n_w = rng.gen_range(2..=4usize);
        let n_f = rng.gen_range(2..=4usize);

        let mut probs: Vec<f64> = (0..n_w * n_f).map(|_| -rng.gen::<f64>().ln()).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);

        let entries: Vec<CqEntry> = probs
            .iter()
            .enumerate()
            .map(|(i, &p)| CqEntry {
                label: vec![i / n_f, i % n_f],
                prob: p,
                state: Arc::new(StateRep::Pure(random_pure_state(&mut rng, dim_a * dim_b))),
            })
            .collect();
        let slack = lemma3_slack(&CqEnsemble::new(entries)?, dim_a, dim_b)?;
        worst = worst.max(slack);
    }
    Ok(worst)
}

/// `lhs − rhs` of the inequality for one cq state with labels `(w, f)`.
pub fn lemma3_slack(ensemble: &CqEnsemble, dim_a: usize, dim_b: usize) -> Result<f64> {
    let w_part = Part::classical_only(&[0]);
    let f_part = Part::classical_only(&[1]);

    let i_w_abf = ensemble.mutual_info(&w_part, &Part::with_quantum(&[1]), &Part::empty())?;
    let h_ab_wf = ensemble.entropy(&[0, 1], true)? - ensemble.entropy(&[0, 1], false)?;

    let on_a = ensemble.reduce_quantum(&[dim_a, dim_b], &[0])?;
    let h_a = on_a.entropy(&[], true)?;

    let on_b = ensemble.reduce_quantum(&[dim_a, dim_b], &[1])?;
    let i_w_bf = on_b.mutual_info(&w_part, &Part::with_quantum(&[1]), &Part::empty())?;
    let h_b_wf = on_b.entropy(&[0, 1], true)? - on_b.entropy(&[0, 1], false)?;

    let _ = f_part;
    Ok((i_w_abf + h_ab_wf) - (h_a + i_w_bf + h_b_wf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sampling::seeded_rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {b}, got {a}");
    }

    #[test]
    fn audit_honest_protocol_is_perfectly_secure() {
        for (ell, f) in [(2, 2), (3, 2)] {
            let r = audit(ell, f).unwrap();
            assert!(r.p_err.abs() <= 1e-9, "p_err at ℓ={ell}");
            assert!(r.s_serv_bits.abs() <= 1e-9, "s_serv = {}", r.s_serv_bits);
            assert!(r.s_user_bits.abs() <= 1e-9, "s_user = {}", r.s_user_bits);
            assert_eq!(r.rate, 1.0);
            assert_eq!(r.upload_bits, 2.0 * f as f64);
        }
    }

    #[test]
    fn audit_zeros_across_supported_range() {
        for ell in [2u64, 3, 4] {
            for f in [2usize, 3] {
                let r = audit(ell, f).unwrap();
                assert!(r.p_err.abs() <= 1e-9, "p_err at ℓ={ell} F={f}");
                assert!(r.s_serv_bits.abs() <= 1e-9, "s_serv at ℓ={ell} F={f}");
                assert!(r.s_user_bits.abs() <= 1e-9, "s_user at ℓ={ell} F={f}");
                assert_eq!(r.rate, 1.0);
            }
        }
    }

    #[test]
    fn audit_detects_singleton_query_leak() {
        let r = audit_with_strategy(2, 2, QueryStrategy::SingletonLeak).unwrap();
        // Q1 = {K} names the index: I(K; Q1) = log₂ F = 1 bit at F = 2.
        assert_close(r.s_user_bits, 1.0, 1e-9);
        assert!(r.s_user_bits >= 0.5);
        // The leak is one-sided; retrieval itself still works.
        assert!(r.p_err.abs() <= 1e-9);
    }

    #[test]
    fn audit_refuses_over_cap_configs() {
        assert!(matches!(audit(5, 2), Err(Error::EnumerationCap(_))));
        assert!(matches!(audit(4, 4), Err(Error::EnumerationCap(_))));
        assert!(matches!(audit(2, 7), Err(Error::EnumerationCap(_))));
    }

    #[test]
    fn malicious_user_identity_honest_queries() {
        for mask in 0..4u64 {
            let queries = gen_queries(2, 1, mask).unwrap();
            let v = malicious_user_identity(2, 2, queries).unwrap();
            assert!(v.abs() <= 1e-9, "honest queries leaked {v}");
        }
    }

    #[test]
    fn malicious_user_identity_all_query_pairs() {
        // Every (Q1, Q2) ∈ 2^F × 2^F at ℓ=2, F=2, including pairs with
        // Q1 Δ Q2 ≠ {K}.
        for q1 in 0..4u64 {
            for q2 in 0..4u64 {
                let v = malicious_user_identity(2, 2, QueryPair { q1, q2 }).unwrap();
                assert!(v.abs() <= 1e-9, "query pair ({q1},{q2}) leaked {v}");
            }
        }
    }

    #[test]
    fn lemma3_product_conditionals() {
        // τ = α_{wf} ⊗ β_{wf}: evaluate the slack directly.
        let mut rng = seeded_rng(100);
        let (dim_a, dim_b) = (3, 2);
        let mut probs: Vec<f64> = (0..4).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let entries: Vec<CqEntry> = probs
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let alpha = random_pure_state(&mut rng, dim_a);
                let beta = random_pure_state(&mut rng, dim_b);
                CqEntry {
                    label: vec![i / 2, i % 2],
                    prob: p,
                    state: Arc::new(StateRep::Pure(alpha.tensor(&beta))),
                }
            })
            .collect();
        let slack = lemma3_slack(&CqEnsemble::new(entries).unwrap(), dim_a, dim_b).unwrap();
        assert!(slack <= 1e-8, "slack {slack}");
    }

    #[test]
    fn lemma3_w_independent_conditionals_reduce_to_subadditivity() {
        // Conditionals depend only on f: both I(W;·) terms vanish and the
        // inequality reads H(AB|F) ≤ H(A) + H(B|F).
        let mut rng = seeded_rng(101);
        let (dim_a, dim_b) = (2, 3);
        let shared: Vec<Arc<StateRep>> = (0..2)
            .map(|_| Arc::new(StateRep::Pure(random_pure_state(&mut rng, dim_a * dim_b))))
            .collect();
        let entries: Vec<CqEntry> = (0..4)
            .map(|i| CqEntry {
                label: vec![i / 2, i % 2],
                prob: 0.25,
                state: Arc::clone(&shared[i % 2]),
            })
            .collect();
        let ensemble = CqEnsemble::new(entries).unwrap();

        let i_w_abf = ensemble
            .mutual_info(
                &Part::classical_only(&[0]),
                &Part::with_quantum(&[1]),
                &Part::empty(),
            )
            .unwrap();
        assert_close(i_w_abf, 0.0, 1e-9);

        let slack = lemma3_slack(&ensemble, dim_a, dim_b).unwrap();
        assert!(slack <= 1e-8, "slack {slack}");
    }

    #[test]
    fn lemma3_monte_carlo_sweep() {
        let worst = lemma3_check(2024, 1000).unwrap();
        assert!(worst <= 1e-8, "worst slack {worst}");
    }
}
