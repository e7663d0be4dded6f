//! Seeded random unitaries and symplectic matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{bogoliubov, full_qr};
use crate::exec::derive_seed;
use crate::matrix::{direct_sum, CMat, RMat, C64};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Haar-distributed `dim × dim` unitary: QR of a complex Ginibre matrix with
/// the phases of `R`'s diagonal pushed back into `Q`.
pub fn random_unitary(dim: usize, seed: u64) -> CMat {
    assert!(dim >= 1, "unitary dimension must be positive");
    let mut rng = seeded_rng(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = CMat::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re * scale, im * scale)
    });
    let (mut q, r) = full_qr(&g);
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random passive matrix on `n_modes` modes.
pub fn random_passive(n_modes: usize, seed: u64) -> RMat {
    bogoliubov(&random_unitary(n_modes, seed))
}

/// Random symplectic matrix `K₁ · ⊕ diag(e^{r_j}, e^{−r_j}) · K₂` with passive
/// `K₁, K₂` and squeezing exponents `r_j` uniform in `[−1, 1]`.
pub fn random_symplectic(n_modes: usize, seed: u64) -> RMat {
    let k1 = random_passive(n_modes, derive_seed(seed, 1));
    let k2 = random_passive(n_modes, derive_seed(seed, 2));
    let mut rng = seeded_rng(derive_seed(seed, 3));
    let squeezes: Vec<RMat> = (0..n_modes)
        .map(|_| {
            let r: f64 = rng.random_range(-1.0..=1.0);
            super::squeezer(r.exp())
        })
        .collect();
    k1 * direct_sum(&squeezes) * k2
}
