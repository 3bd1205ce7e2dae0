//! Seeded random states, unitaries, and measurements for Monte Carlo
//! checks.
//!
//! All sampling goes through a counter-based ChaCha12 generator: a root
//! seed fixes the experiment and the stream index separates trials, so
//! sweeps can be partitioned across workers without overlapping draws.

use super::{c64, hermitian_eig, CMatrix, DensityMatrix, Ket};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Name of the generator recorded in report headers.
pub const RNG_NAME: &str = "chacha12";

/// Root generator for a given seed (stream 0).
pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Independent generator for one trial: same seed, distinct stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn gaussian_c64<R: Rng>(rng: &mut R) -> super::C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im)
}

/// Haar-ish random pure state: normalized complex Gaussian vector.
pub fn random_pure_state<R: Rng>(rng: &mut R, dim: usize) -> Ket {
    loop {
        let amps: Vec<_> = (0..dim).map(|_| gaussian_c64(rng)).collect();
        let ket = Ket::new(amps);
        let n = ket.norm();
        if n > 1e-6 {
            return ket.scale(c64(1.0 / n, 0.0));
        }
    }
}

/// Random full-rank density matrix `GG†/Tr(GG†)` with Ginibre `G`.
pub fn random_density_matrix<R: Rng>(rng: &mut R, dim: usize) -> DensityMatrix {
    let mut g = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            g.set(i, j, gaussian_c64(rng));
        }
    }
    let gg = g.mul(&g.adjoint());
    let tr = gg.trace().re;
    DensityMatrix::new(gg.scale(c64(1.0 / tr, 0.0))).expect("Ginibre construction is a valid state")
}

/// Haar random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let cols: Vec<Ket> = (0..dim).map(|_| random_pure_state(rng, dim)).collect();
    let mut ortho: Vec<Ket> = Vec::with_capacity(dim);
    for mut v in cols {
        for u in &ortho {
            let coeff = u.inner(&v);
            let amps: Vec<_> = (0..dim).map(|i| v.amp(i) - coeff * u.amp(i)).collect();
            v = Ket::new(amps);
        }
        let n = v.norm();
        // A Ginibre set is linearly independent almost surely; renormalize.
        ortho.push(v.scale(c64(1.0 / n, 0.0)));
    }
    let mut u = CMatrix::zeros(dim, dim);
    for (j, col) in ortho.iter().enumerate() {
        for i in 0..dim {
            u.set(i, j, col.amp(i));
        }
    }
    u
}

/// Random POVM with `outcomes` elements: Ginibre Gram blocks whitened by
/// the inverse square root of their sum, so completeness holds exactly up
/// to roundoff.
pub fn random_povm<R: Rng>(rng: &mut R, dim: usize, outcomes: usize) -> Vec<CMatrix> {
    assert!(outcomes >= 1);
    let blocks: Vec<CMatrix> = (0..outcomes)
        .map(|_| {
            let mut g = CMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    g.set(i, j, gaussian_c64(rng));
                }
            }
            g.mul(&g.adjoint())
        })
        .collect();
    let mut total = CMatrix::zeros(dim, dim);
    for b in &blocks {
        total = total.add(b);
    }
    let (evals, vecs) = hermitian_eig(&total).expect("Gram sum is Hermitian");
    let mut inv_sqrt = CMatrix::zeros(dim, dim);
    for (k, &lambda) in evals.iter().enumerate() {
        let w = 1.0 / lambda.sqrt();
        for i in 0..dim {
            for j in 0..dim {
                let v = inv_sqrt.get(i, j) + vecs.get(i, k) * vecs.get(j, k).conj() * c64(w, 0.0);
                inv_sqrt.set(i, j, v);
            }
        }
    }
    blocks
        .into_iter()
        .map(|b| inv_sqrt.mul(&b).mul(&inv_sqrt))
        .collect()
}
