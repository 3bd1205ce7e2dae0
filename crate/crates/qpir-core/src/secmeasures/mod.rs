//! Entropic machinery over classical-quantum ensembles, and the protocol
//! security audits built on it.
//!
//! A [`CqEnsemble`] is a weighted list of (classical label tuple, state)
//! pairs representing `ρ̃ = Σ_x Pr[X=x] · ρ_x ⊗ |x⟩⟨x|`. All entropies are
//! computed from the block-diagonal structure,
//! `H = H(classical marginal) + Σ_x p_x H(ρ_x)`, without ever materializing
//! the full classical⊗quantum matrix; mixtures of pure states additionally
//! go through the Gram-matrix spectrum when that is smaller than the dense
//! average. All quantities are in bits.

mod audit;

pub use audit::{
    audit, audit_with_strategy, lemma3_check, malicious_user_identity, QueryStrategy,
    SecurityReport, EXHAUSTIVE_MAX_ANSWER_DIM, EXHAUSTIVE_MAX_FILE_TUPLES,
};

use crate::error::{Error, Result};
use crate::linalg::{
    c64, hermitian_eig, ket_partial_trace, partial_trace, CMatrix, DensityMatrix, Ket,
};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Eigenvalues at or below this contribute nothing to an entropy.
const ENTROPY_EIG_CUTOFF: f64 = 1e-12;

/// Probabilities at or below this contribute nothing to a Shannon entropy.
const PROB_CUTOFF: f64 = 1e-15;

/// Binary entropy `h₂(x) = −x log₂ x − (1−x) log₂(1−x)`, with `0·log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParam(format!("h₂ argument {x} outside [0,1]")));
    }
    let mut h = 0.0;
    if x > 0.0 {
        h -= x * x.log2();
    }
    if x < 1.0 {
        h -= (1.0 - x) * (1.0 - x).log2();
    }
    Ok(h)
}

/// Shannon entropy of a (sub)distribution in bits.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > PROB_CUTOFF)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Von Neumann entropy `−Σ λ log₂ λ` over the spectrum, in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let (evals, _) = hermitian_eig(rho.mat())?;
    if let Some(&bad) = evals.iter().find(|&&l| l < -1e-9) {
        return Err(Error::InvalidDensity(format!(
            "negative eigenvalue {bad:.3e}"
        )));
    }
    let h: f64 = evals
        .iter()
        .filter(|&&l| l > ENTROPY_EIG_CUTOFF)
        .map(|&l| -l * l.log2())
        .sum();
    Ok(h.max(0.0))
}

/// Mutual information of a finite joint distribution over label pairs,
/// computed in ratio form so exact product distributions give exact zeros.
pub fn classical_mutual_info(joint: &BTreeMap<(u64, u64), f64>) -> f64 {
    let mut pa: BTreeMap<u64, f64> = BTreeMap::new();
    let mut pb: BTreeMap<u64, f64> = BTreeMap::new();
    for (&(a, b), &p) in joint {
        *pa.entry(a).or_insert(0.0) += p;
        *pb.entry(b).or_insert(0.0) += p;
    }
    let mut info = 0.0;
    for (&(a, b), &p) in joint {
        if p > PROB_CUTOFF {
            info += p * (p / (pa[&a] * pb[&b])).log2();
        }
    }
    info
}

/// One quantum state attached to a classical label: pure states keep their
/// amplitudes so mixtures of few pure states can be diagonalized through
/// their Gram matrix.
#[derive(Debug, Clone)]
pub enum StateRep {
    Pure(Ket),
    Dense(DensityMatrix),
}

impl StateRep {
    pub fn dim(&self) -> usize {
        match self {
            StateRep::Pure(k) => k.dim(),
            StateRep::Dense(d) => d.dim(),
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        match self {
            StateRep::Pure(k) => DensityMatrix::from_pure(k),
            StateRep::Dense(d) => Ok(d.clone()),
        }
    }
}

/// One ensemble member.
#[derive(Debug, Clone)]
pub struct CqEntry {
    pub label: Vec<usize>,
    pub prob: f64,
    pub state: Arc<StateRep>,
}

/// A classical-quantum state as a weighted list of labeled states.
///
/// Entries may repeat a label; they are merged by the grouping that every
/// entropy computation performs.
#[derive(Debug, Clone)]
pub struct CqEnsemble {
    arity: usize,
    dim: usize,
    entries: Vec<CqEntry>,
}

/// A marginal selection: a set of classical label positions, optionally
/// together with the quantum system.
#[derive(Debug, Clone, Default)]
pub struct Part {
    pub classical: Vec<usize>,
    pub quantum: bool,
}

impl Part {
    pub fn classical_only(positions: &[usize]) -> Self {
        Self {
            classical: positions.to_vec(),
            quantum: false,
        }
    }

    pub fn quantum_only() -> Self {
        Self {
            classical: Vec::new(),
            quantum: true,
        }
    }

    pub fn with_quantum(positions: &[usize]) -> Self {
        Self {
            classical: positions.to_vec(),
            quantum: true,
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    fn is_empty(&self) -> bool {
        self.classical.is_empty() && !self.quantum
    }

    fn union(&self, other: &Part) -> Part {
        let mut classical = self.classical.clone();
        classical.extend_from_slice(&other.classical);
        classical.sort_unstable();
        classical.dedup();
        Part {
            classical,
            quantum: self.quantum || other.quantum,
        }
    }
}

impl CqEnsemble {
    pub fn new(entries: Vec<CqEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidEnsemble("no entries".into()));
        }
        let arity = entries[0].label.len();
        let dim = entries[0].state.dim();
        let mut total = 0.0;
        for e in &entries {
            if e.label.len() != arity {
                return Err(Error::InvalidEnsemble(format!(
                    "label arity {} != {arity}",
                    e.label.len()
                )));
            }
            if e.state.dim() != dim {
                return Err(Error::DimMismatch(format!(
                    "ensemble states of dims {dim} and {}",
                    e.state.dim()
                )));
            }
            if e.prob < -1e-9 || !e.prob.is_finite() {
                return Err(Error::InvalidEnsemble(format!(
                    "invalid probability {}",
                    e.prob
                )));
            }
            total += e.prob;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidEnsemble(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { arity, dim, entries })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[CqEntry] {
        &self.entries
    }

    /// The ensemble-average state `Σ p_x ρ_x`.
    pub fn average_state(&self) -> Result<DensityMatrix> {
        let weighted: Vec<(f64, Arc<StateRep>)> = self
            .entries
            .iter()
            .map(|e| (e.prob, Arc::clone(&e.state)))
            .collect();
        densify_mixture(&weighted, self.dim)
    }

    /// Entropy of the marginal spanned by the chosen classical positions
    /// and, optionally, the quantum system:
    /// `H = H(classical marginal) + Σ_g p_g H(ρ_g)`.
    pub fn entropy(&self, classical: &[usize], include_quantum: bool) -> Result<f64> {
        if classical.is_empty() && !include_quantum {
            return Err(Error::InvalidParam("empty marginal selection".into()));
        }
        self.check_positions(classical)?;

        let groups = self.group_by(classical);
        let mut h = 0.0;
        for members in groups.values() {
            let p_g: f64 = members.iter().map(|(w, _)| w).sum();
            if p_g <= PROB_CUTOFF {
                continue;
            }
            h -= p_g * p_g.log2();
            if include_quantum {
                let normalized: Vec<(f64, Arc<StateRep>)> = members
                    .iter()
                    .map(|(w, s)| (w / p_g, Arc::clone(s)))
                    .collect();
                h += p_g * entropy_of_mixture(&normalized, self.dim)?;
            }
        }
        Ok(h)
    }

    /// Conditional mutual information `I(A;B|C) = H(AC) + H(BC) − H(ABC) − H(C)`.
    ///
    /// Parts must not overlap: classical positions pairwise disjoint and
    /// the quantum system in at most one part.
    pub fn mutual_info(&self, part_a: &Part, part_b: &Part, cond: &Part) -> Result<f64> {
        let parts = [part_a, part_b, cond];
        for (i, x) in parts.iter().enumerate() {
            for y in parts.iter().skip(i + 1) {
                if x.classical.iter().any(|p| y.classical.contains(p)) {
                    return Err(Error::InvalidParam(
                        "overlapping classical positions across parts".into(),
                    ));
                }
            }
        }
        if parts.iter().filter(|p| p.quantum).count() > 1 {
            return Err(Error::InvalidParam(
                "quantum system assigned to more than one part".into(),
            ));
        }
        if part_a.is_empty() || part_b.is_empty() {
            return Err(Error::InvalidParam("empty mutual-information part".into()));
        }

        let h = |p: &Part| -> Result<f64> {
            if p.is_empty() {
                Ok(0.0)
            } else {
                self.entropy(&p.classical, p.quantum)
            }
        };
        let ac = part_a.union(cond);
        let bc = part_b.union(cond);
        let abc = ac.union(part_b);
        Ok(h(&ac)? + h(&bc)? - h(&abc)? - h(cond)?)
    }

    /// Partially traces every member state. `dims` factors the quantum
    /// system; `keep` lists the surviving factors.
    pub fn reduce_quantum(&self, dims: &[usize], keep: &[usize]) -> Result<CqEnsemble> {
        let total: usize = dims.iter().product();
        if total != self.dim {
            return Err(Error::DimMismatch(format!(
                "factor dims product {total} != ensemble dim {}",
                self.dim
            )));
        }
        let mut cache: Vec<(*const StateRep, Arc<StateRep>)> = Vec::new();
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let key = Arc::as_ptr(&e.state);
            let reduced = match cache.iter().find(|(k, _)| *k == key) {
                Some((_, r)) => Arc::clone(r),
                None => {
                    let r = Arc::new(reduce_state(&e.state, dims, keep)?);
                    cache.push((key, Arc::clone(&r)));
                    r
                }
            };
            entries.push(CqEntry {
                label: e.label.clone(),
                prob: e.prob,
                state: reduced,
            });
        }
        CqEnsemble::new(entries)
    }

    fn check_positions(&self, positions: &[usize]) -> Result<()> {
        for &p in positions {
            if p >= self.arity {
                return Err(Error::IndexOutOfRange(format!(
                    "label position {p} with arity {}",
                    self.arity
                )));
            }
        }
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != positions.len() {
            return Err(Error::InvalidParam("repeated label position".into()));
        }
        Ok(())
    }

    fn group_by(&self, positions: &[usize]) -> BTreeMap<Vec<usize>, Vec<(f64, Arc<StateRep>)>> {
        let mut groups: BTreeMap<Vec<usize>, Vec<(f64, Arc<StateRep>)>> = BTreeMap::new();
        for e in &self.entries {
            let key: Vec<usize> = positions.iter().map(|&p| e.label[p]).collect();
            groups
                .entry(key)
                .or_default()
                .push((e.prob, Arc::clone(&e.state)));
        }
        groups
    }
}

fn reduce_state(state: &StateRep, dims: &[usize], keep: &[usize]) -> Result<StateRep> {
    if let (StateRep::Pure(ket), [d1, d2], [k]) = (state, dims, keep) {
        return Ok(StateRep::Dense(ket_partial_trace(ket, (*d1, *d2), *k == 0)?));
    }
    let dense = state.to_density()?;
    Ok(StateRep::Dense(partial_trace(&dense, dims, keep)?))
}

/// Entropy of `Σ w_i ρ_i` with `Σ w_i = 1`.
///
/// Identical `Arc`s are merged first. A mixture of r pure states with
/// r ≤ dim is diagonalized through its r×r Gram matrix
/// `G_ij = √(w_i w_j)·⟨ψ_i|ψ_j⟩`, whose nonzero spectrum equals that of the
/// average state; otherwise the dense average is decomposed directly.
fn entropy_of_mixture(weighted: &[(f64, Arc<StateRep>)], dim: usize) -> Result<f64> {
    let mut merged: Vec<(f64, Arc<StateRep>)> = Vec::new();
    for (w, s) in weighted {
        if *w <= PROB_CUTOFF {
            continue;
        }
        match merged.iter_mut().find(|(_, t)| Arc::ptr_eq(t, s)) {
            Some((acc, _)) => *acc += w,
            None => merged.push((*w, Arc::clone(s))),
        }
    }
    if merged.is_empty() {
        return Ok(0.0);
    }

    let all_pure = merged.iter().all(|(_, s)| matches!(**s, StateRep::Pure(_)));
    if all_pure && merged.len() <= dim {
        if merged.len() == 1 {
            return Ok(0.0);
        }
        let r = merged.len();
        let mut gram = CMatrix::zeros(r, r);
        for i in 0..r {
            let (wi, si) = &merged[i];
            let ki = match &**si {
                StateRep::Pure(k) => k,
                StateRep::Dense(_) => unreachable!(),
            };
            for (j, (wj, sj)) in merged.iter().enumerate() {
                let kj = match &**sj {
                    StateRep::Pure(k) => k,
                    StateRep::Dense(_) => unreachable!(),
                };
                gram.set(i, j, ki.inner(kj).scale((wi * wj).sqrt()));
            }
        }
        let (evals, _) = hermitian_eig(&gram)?;
        let h: f64 = evals
            .iter()
            .filter(|&&l| l > ENTROPY_EIG_CUTOFF)
            .map(|&l| -l * l.log2())
            .sum();
        return Ok(h.max(0.0));
    }

    von_neumann_entropy(&densify_mixture(&merged, dim)?)
}

fn densify_mixture(weighted: &[(f64, Arc<StateRep>)], dim: usize) -> Result<DensityMatrix> {
    let mut acc = CMatrix::zeros(dim, dim);
    for (w, s) in weighted {
        if *w <= PROB_CUTOFF {
            continue;
        }
        let mat = match &**s {
            StateRep::Pure(k) => k.outer(),
            StateRep::Dense(d) => d.mat().clone(),
        };
        acc = acc.add(&mat.scale(c64(*w, 0.0)));
    }
    DensityMatrix::new(acc)
}
