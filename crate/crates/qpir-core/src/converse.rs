//! Numerical strong- and weak-converse machinery.
//!
//! Single-round route: the Rényi relative entropy
//! `D_{1+s}(ρ‖σ) = (1/s)·log₂ Tr ρ^{1+s} σ^{−s}` (stored in log form; its
//! exponentiated form `2^{s·D}` is the trace functional the bound chain
//! manipulates) satisfies the data-processing inequality under
//! measurements. Applied to the block state pairing messages with answer
//! states and to the decoder POVM this yields, per side information `z`,
//!
//! ```text
//! (1 − P_err,z)^{1+s} · M^s  ≤  (1/M) Σ_w Tr ρ_{w,z}^{1+s} σ_z^{−s},
//! σ_z = (1/M) Σ_w ρ_{w,z},
//! ```
//!
//! and with `max_σ Tr σ^{1−s} = d^s` (attained by the uniform state) the
//! explicit success bound `1 − P_err ≤ (d/M)^{s/(1+s)}`.
//!
//! Multi-round route: for an exhaustive ensemble of R-round runs,
//! `(1−ε)·R·log₂ M ≤ Σ_i H(ρ̄^{A_i}) + h₂(ε)` with `ρ̄^{A_i}` the round-i
//! answer system averaged over the message; the honest repetition protocol
//! meets it with equality, certifying rate-1 tightness.

use crate::error::{Error, Result};
use crate::linalg::{
    c64, hermitian_eig, matrix_power, sampling, CMatrix, DensityMatrix, DEFAULT_KERNEL_CUTOFF,
};
use crate::protocol::{FileSet, MultiRoundTranscript};
use crate::secmeasures::{binary_entropy, von_neumann_entropy};
use crate::weyl::bell_basis;
use serde::Serialize;

/// Order parameter `s ∈ (0,1)` (the divergence order is `1+s`) and the
/// spectral cutoff below which eigenvalues count as outside the support.
#[derive(Debug, Clone, Copy)]
pub struct RenyiParams {
    s: f64,
    kernel_cutoff: f64,
}

impl RenyiParams {
    pub fn new(s: f64) -> Result<Self> {
        Self::with_cutoff(s, DEFAULT_KERNEL_CUTOFF)
    }

    pub fn with_cutoff(s: f64, kernel_cutoff: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParam(format!("s = {s} outside (0,1)")));
        }
        if !kernel_cutoff.is_finite() || kernel_cutoff <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "kernel cutoff {kernel_cutoff} must be positive"
            )));
        }
        Ok(Self { s, kernel_cutoff })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn kernel_cutoff(&self) -> f64 {
        self.kernel_cutoff
    }
}

/// Maximum probability weight of ρ outside supp(σ) before the divergence
/// is declared undefined.
const SUPPORT_LOSS_TOL: f64 = 1e-9;

/// `D_{1+s}(ρ‖σ) = (1/s)·log₂ Tr ρ^{1+s} σ^{−s}` in bits.
///
/// ρ is projected onto supp(σ) and renormalized when the projection loses
/// at most [`SUPPORT_LOSS_TOL`] of its weight; more loss is a support
/// violation.
pub fn renyi_rel_entropy(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    params: &RenyiParams,
) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch(format!(
            "ρ dim {} vs σ dim {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let dim = rho.dim();
    let (evals, vecs) = hermitian_eig(sigma.mat())?;

    let mut projector = CMatrix::zeros(dim, dim);
    let mut sigma_neg = CMatrix::zeros(dim, dim);
    for (k, &lambda) in evals.iter().enumerate() {
        if lambda <= params.kernel_cutoff {
            continue;
        }
        let w = lambda.powf(-params.s);
        for i in 0..dim {
            let vi = vecs.get(i, k);
            for j in 0..dim {
                let vv = vi * vecs.get(j, k).conj();
                projector.set(i, j, projector.get(i, j) + vv);
                sigma_neg.set(i, j, sigma_neg.get(i, j) + vv.scale(w));
            }
        }
    }

    let projected = projector.mul(rho.mat()).mul(&projector);
    let kept = projected.trace().re;
    let loss = 1.0 - kept;
    if loss > SUPPORT_LOSS_TOL {
        return Err(Error::SupportViolation(loss));
    }
    let rho_in_support = DensityMatrix::new(projected.scale(c64(1.0 / kept, 0.0)))?;

    let rho_pow = matrix_power(&rho_in_support, 1.0 + params.s, params.kernel_cutoff)?;
    let functional = rho_pow.mul(&sigma_neg).trace().re;
    if functional <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "trace functional {functional} not positive"
        )));
    }
    Ok(functional.log2() / params.s)
}

/// Classical order-(1+s) Rényi divergence `(1/s)·log₂ Σ p^{1+s} q^{−s}`
/// with the same support convention as the quantum form.
pub fn classical_renyi(p: &[f64], q: &[f64], params: &RenyiParams) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimMismatch(format!(
            "distributions of lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    let mut loss = 0.0;
    let mut kept = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if qi <= params.kernel_cutoff {
            loss += pi.max(0.0);
        } else {
            kept += pi.max(0.0);
        }
    }
    if loss > SUPPORT_LOSS_TOL {
        return Err(Error::SupportViolation(loss));
    }
    let sum: f64 = p
        .iter()
        .zip(q)
        .filter(|(_, &qi)| qi > params.kernel_cutoff)
        .map(|(&pi, &qi)| (pi.max(0.0) / kept).powf(1.0 + params.s) * qi.powf(-params.s))
        .sum();
    if sum <= 0.0 {
        return Err(Error::InvalidParam(format!("trace sum {sum} not positive")));
    }
    Ok(sum.log2() / params.s)
}

fn validate_povm(povm: &[CMatrix], dim: usize) -> Result<()> {
    if povm.is_empty() {
        return Err(Error::InvalidPovm("no elements".into()));
    }
    let mut total = CMatrix::zeros(dim, dim);
    for (i, e) in povm.iter().enumerate() {
        if !e.is_square() || e.rows() != dim {
            return Err(Error::DimMismatch(format!(
                "POVM element {i} is {}x{}, expected {dim}x{dim}",
                e.rows(),
                e.cols()
            )));
        }
        if e.hermiticity_defect() > 1e-9 {
            return Err(Error::InvalidPovm(format!("element {i} not Hermitian")));
        }
        let (evals, _) = hermitian_eig(e)?;
        if evals.first().copied().unwrap_or(0.0) < -1e-9 {
            return Err(Error::InvalidPovm(format!(
                "element {i} has negative eigenvalue {}",
                evals[0]
            )));
        }
        total = total.add(e);
    }
    if total.max_abs_diff(&CMatrix::identity(dim)) > 1e-9 {
        return Err(Error::InvalidPovm("elements do not sum to identity".into()));
    }
    Ok(())
}

/// Data-processing slack `D_{1+s}(ρ‖σ) − D_{1+s}(P_ρ^M ‖ P_σ^M) ≥ 0` for a
/// measurement `M`; returns the slack.
pub fn dpi_check(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    povm: &[CMatrix],
    params: &RenyiParams,
) -> Result<f64> {
    validate_povm(povm, rho.dim())?;
    let quantum = renyi_rel_entropy(rho, sigma, params)?;
    let p: Vec<f64> = povm
        .iter()
        .map(|e| rho.mat().mul(e).trace().re.max(0.0))
        .collect();
    let q: Vec<f64> = povm
        .iter()
        .map(|e| sigma.mat().mul(e).trace().re.max(0.0))
        .collect();
    let classical = classical_renyi(&p, &q, params)?;
    Ok(quantum - classical)
}

/// One grid point of a bound check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundRow {
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// Bound values across an s-grid. `max_violation` is the largest
/// `lhs − rhs` before any clamping (negative when the bound holds
/// everywhere); `tightest_s` is where the slack is smallest.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub max_violation: f64,
    pub tightest_s: f64,
}

impl BoundReport {
    fn from_rows(rows: Vec<BoundRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParam("empty s-grid".into()));
        }
        let mut max_violation = f64::NEG_INFINITY;
        let mut tightest_s = rows[0].s;
        let mut tightest_slack = f64::INFINITY;
        for r in &rows {
            max_violation = max_violation.max(r.lhs - r.rhs);
            if r.slack < tightest_slack {
                tightest_slack = r.slack;
                tightest_s = r.s;
            }
        }
        Ok(Self {
            rows,
            max_violation,
            tightest_s,
        })
    }

    /// CSV rows under the `s,lhs,rhs,slack` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,lhs,rhs,slack\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.s, r.lhs, r.rhs, r.slack));
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "max_violation": self.max_violation,
            "tightest_s": self.tightest_s,
        })
    }
}

/// Checks the message-averaging bound
/// `(1 − P_err)^{1+s} · M^s ≤ (1/M) Σ_w Tr ρ_w^{1+s} σ^{−s}` for one
/// family of message states and one decoder POVM (`M` or `M+1` elements,
/// the optional last one catching failure). Returns `rhs − lhs`.
pub fn feff_check(
    states: &[DensityMatrix],
    decoder: &[CMatrix],
    params: &RenyiParams,
) -> Result<f64> {
    let (lhs, rhs) = feff_sides(states, decoder, params)?;
    Ok(rhs - lhs)
}

fn feff_sides(
    states: &[DensityMatrix],
    decoder: &[CMatrix],
    params: &RenyiParams,
) -> Result<(f64, f64)> {
    if states.is_empty() {
        return Err(Error::InvalidParam("no message states".into()));
    }
    let m = states.len();
    let dim = states[0].dim();
    if states.iter().any(|s| s.dim() != dim) {
        return Err(Error::DimMismatch("message states of unequal dims".into()));
    }
    if decoder.len() != m && decoder.len() != m + 1 {
        return Err(Error::DimMismatch(format!(
            "decoder has {} elements for {m} messages",
            decoder.len()
        )));
    }
    validate_povm(decoder, dim)?;

    let uniform = 1.0 / m as f64;
    let parts: Vec<(f64, &DensityMatrix)> = states.iter().map(|s| (uniform, s)).collect();
    let sigma = DensityMatrix::mixture(&parts)?;

    let success: f64 = states
        .iter()
        .zip(decoder)
        .map(|(rho, y)| rho.mat().mul(y).trace().re)
        .sum::<f64>()
        * uniform;
    let p_err = (1.0 - success).clamp(0.0, 1.0);

    let lhs = (1.0 - p_err).powf(1.0 + params.s) * (m as f64).powf(params.s);

    let sigma_neg = matrix_power(&sigma, -params.s, params.kernel_cutoff)?;
    let rhs: f64 = states
        .iter()
        .map(|rho| {
            matrix_power(rho, 1.0 + params.s, params.kernel_cutoff)
                .map(|p| p.mul(&sigma_neg).trace().re)
        })
        .sum::<Result<f64>>()?
        * uniform;
    Ok((lhs, rhs))
}

/// [`feff_check`] across an s-grid, packaged for plotting.
pub fn feff_sweep(
    states: &[DensityMatrix],
    decoder: &[CMatrix],
    s_grid: &[f64],
    kernel_cutoff: f64,
) -> Result<BoundReport> {
    let rows = s_grid
        .iter()
        .map(|&s| {
            let params = RenyiParams::with_cutoff(s, kernel_cutoff)?;
            let (lhs, rhs) = feff_sides(states, decoder, &params)?;
            Ok(BoundRow {
                s,
                lhs,
                rhs,
                slack: rhs - lhs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    BoundReport::from_rows(rows)
}

/// The honest protocol instance at dimension `ℓ`: the ℓ² orthogonal Bell
/// answer states and the Bell decoder that distinguishes them.
pub fn honest_instance(ell: u64) -> Result<(Vec<DensityMatrix>, Vec<CMatrix>)> {
    let states = bell_basis(ell)
        .iter()
        .map(DensityMatrix::from_pure)
        .collect::<Result<Vec<_>>>()?;
    let decoder: Vec<CMatrix> = bell_basis(ell).iter().map(|k| k.outer()).collect();
    Ok((states, decoder))
}

/// Verifies `max_σ Tr σ^{1−s} = d^s`: the uniform state must attain `d^s`
/// within 1e-10 and no sampled state may exceed it by more than 1e-8.
pub fn uniform_maximizer_check(d: usize, s: f64, trials: usize, seed: u64) -> Result<bool> {
    if d < 2 {
        return Err(Error::InvalidParam(format!("d = {d}, need d ≥ 2")));
    }
    let params = RenyiParams::new(s)?;
    let target = (d as f64).powf(s);

    let uniform = DensityMatrix::maximally_mixed(d);
    let attained = matrix_power(&uniform, 1.0 - s, params.kernel_cutoff)?
        .trace()
        .re;
    if (attained - target).abs() > 1e-10 {
        return Ok(false);
    }

    for trial in 0..trials {
        let mut rng = sampling::trial_rng(seed, trial as u64);
        let sigma = sampling::random_density_matrix(&mut rng, d);
        let val = matrix_power(&sigma, 1.0 - s, params.kernel_cutoff)?
            .trace()
            .re;
        if val > target + 1e-8 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The explicit success bound `1 − P_err ≤ (d/M)^{s/(1+s)}` in log
/// arguments: `2^{(total_log_dim − log_m)·s/(1+s)}`.
pub fn strong_converse_bound(total_log_dim: f64, log_m: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParam(format!("s = {s} outside (0,1)")));
    }
    Ok(((total_log_dim - log_m) * s / (1.0 + s)).exp2())
}

/// One member of a multi-round ensemble: the database it ran against and
/// the full transcript.
#[derive(Debug, Clone)]
pub struct MultiRoundRun {
    pub files: FileSet,
    pub transcript: MultiRoundTranscript,
}

/// Result of the multi-round entropic check.
#[derive(Debug, Clone, Serialize)]
pub struct MultiRoundReport {
    pub rounds: usize,
    pub ensemble_size: u64,
    pub epsilon: f64,
    pub lhs_bits: f64,
    pub per_round_entropy_bits: Vec<f64>,
    pub rhs_bits: f64,
    /// `rhs − lhs`; nonnegative when the bound holds, ~0 for the honest
    /// repetition protocol.
    pub gap: f64,
}

/// Checks `(1−ε)·R·log₂M ≤ Σ_i H(ρ̄^{A_i}) + h₂(ε)` over an exhaustive
/// ensemble: all `M^F` file assignments × all `(2^F)^R` randomness tuples
/// for fixed per-round targets. `ε` is the fraction of runs in which any
/// round missed its target; `ρ̄^{A_i}` is the round-i answer state averaged
/// over the ensemble.
pub fn multiround_converse_check<I>(runs: I) -> Result<MultiRoundReport>
where
    I: IntoIterator<Item = MultiRoundRun>,
{
    let mut iter = runs.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidEnsemble("empty multi-round ensemble".into()))?;
    let ell = first.files.ell();
    let f = first.files.count();
    let rounds = first.transcript.round_count();
    let m = ell * ell;
    let dim = m as usize;

    let expected = (m.pow(f as u32) as u128) * (1u128 << f).pow(rounds as u32);

    let mut accumulators = vec![CMatrix::zeros(dim, dim); rounds];
    let mut errors = 0u64;
    let mut count = 0u64;

    let mut absorb = |run: &MultiRoundRun| -> Result<()> {
        if run.transcript.round_count() != rounds || run.files.ell() != ell {
            return Err(Error::InvalidEnsemble(
                "inconsistent rounds or dimension across ensemble".into(),
            ));
        }
        let mut any_wrong = false;
        for (i, t) in run.transcript.rounds.iter().enumerate() {
            accumulators[i] = accumulators[i].add(&t.post_state.outer());
            let target = run.transcript.per_round_targets[i];
            if t.outcome != run.files.file(target).value() {
                any_wrong = true;
            }
        }
        if any_wrong {
            errors += 1;
        }
        count += 1;
        Ok(())
    };

    absorb(&first)?;
    for run in iter {
        absorb(&run)?;
    }

    if count as u128 != expected {
        return Err(Error::InvalidEnsemble(format!(
            "ensemble has {count} runs, exhaustive enumeration needs {expected}"
        )));
    }

    let epsilon = errors as f64 / count as f64;
    let log_m = 2.0 * (ell as f64).log2();
    let lhs_bits = (1.0 - epsilon) * rounds as f64 * log_m;

    let per_round_entropy_bits = accumulators
        .into_iter()
        .map(|acc| {
            let avg = DensityMatrix::new(acc.scale(c64(1.0 / count as f64, 0.0)))?;
            von_neumann_entropy(&avg)
        })
        .collect::<Result<Vec<f64>>>()?;
    let rhs_bits = per_round_entropy_bits.iter().sum::<f64>() + binary_entropy(epsilon)?;

    Ok(MultiRoundReport {
        rounds,
        ensemble_size: count,
        epsilon,
        lhs_bits,
        per_round_entropy_bits,
        rhs_bits,
        gap: rhs_bits - lhs_bits,
    })
}

/// Streams the exhaustive multi-round ensemble for fixed targets: every
/// file assignment crossed with every per-round randomness tuple.
pub fn exhaustive_multiround_runs(
    ell: u64,
    f: usize,
    targets: &[usize],
) -> Result<impl Iterator<Item = MultiRoundRun> + '_> {
    if targets.is_empty() {
        return Err(Error::InvalidParam("need at least one round".into()));
    }
    if let Some(&k) = targets.iter().find(|&&k| k < 1 || k > f) {
        return Err(Error::IndexOutOfRange(format!("target {k} not in 1..={f}")));
    }
    let rounds = targets.len() as u32;
    let m = ell * ell;
    let tuples = m.checked_pow(f as u32).unwrap_or(u64::MAX) as u128;
    let mask_tuples = (1u128 << f).pow(rounds);
    let total = tuples.saturating_mul(mask_tuples);
    if total > 1 << 18 {
        return Err(Error::EnumerationCap(format!(
            "multi-round ensemble of {total} runs exceeds cap {}",
            1u64 << 18
        )));
    }

    let mask_count = 1u64 << f;
    let iter = crate::protocol::exhaustive_file_sets(ell, f).flat_map(move |files| {
        (0..mask_tuples as u64).map(move |mut code| {
            let masks: Vec<u64> = (0..rounds)
                .map(|_| {
                    let mask = code % mask_count;
                    code /= mask_count;
                    mask
                })
                .collect();
            let transcript = crate::protocol::run_multiround(&files, targets, &masks)
                .expect("enumerated inputs are valid");
            MultiRoundRun {
                files: files.clone(),
                transcript,
            }
        })
    });
    Ok(iter)
}
