//! Symplectic linear algebra on mode-major phase space.
//!
//! A passive (orthogonal symplectic) `2d × 2d` matrix `K` corresponds to a
//! `d × d` unitary `U` through the Bogoliubov representation. With ladder
//! operators `a = (x + ip)/√2`, the `(j, k)` 2×2 block of `K(U)` is
//!
//! ```text
//! [  Re U_jk   Im U_jk ]
//! [ -Im U_jk   Re U_jk ]
//! ```
//!
//! so that the phase shift `U = [e^{iφ}]` maps to the rotation
//! `D_φ = [[cos φ, sin φ], [−sin φ, cos φ]]` and a real beam splitter
//! `[[cos θ, sin θ], [−sin θ, cos θ]]` maps to the same rotation applied to the
//! `x` and `p` quadratures of the two modes. The map is a group homomorphism.

mod decomp;
mod random;
mod williamson;

pub use decomp::{
    cosine_sine_decompose, full_qr, reduce_to_square_bath, triangularize_offdiagonal,
    CosineSineForm, Triangularized,
};
pub use random::{random_passive, random_symplectic, random_unitary, seeded_rng};
pub use williamson::{symplectic_eigenvalues, williamson, WilliamsonForm};

use crate::error::{GtoError, Result};
use crate::matrix::{max_abs_diff, require_even_square, require_unitary, CMat, RMat, C64};

/// Default tolerance for structural checks (symplectic, unitary, passive).
pub const STRUCTURAL_TOL: f64 = 1e-9;
/// Default tolerance for reconstruction checks.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// `Ω = Ω₁^{⊕n}` with `Ω₁ = [[0, 1], [−1, 0]]`.
pub fn omega(n_modes: usize) -> RMat {
    let mut om = RMat::zeros(2 * n_modes, 2 * n_modes);
    for j in 0..n_modes {
        om[(2 * j, 2 * j + 1)] = 1.0;
        om[(2 * j + 1, 2 * j)] = -1.0;
    }
    om
}

/// Phase-space rotation `D_φ`.
pub fn rotation(phi: f64) -> RMat {
    let (s, c) = phi.sin_cos();
    RMat::from_row_slice(2, 2, &[c, s, -s, c])
}

/// Single-mode squeezer `diag(s, 1/s)`; acting by congruence on the vacuum it
/// produces `diag(s², 1/s²)`.
pub fn squeezer(s: f64) -> RMat {
    RMat::from_row_slice(2, 2, &[s, 0.0, 0.0, 1.0 / s])
}

/// Two-mode real beam splitter of angle `θ` (mode 1 ↔ mode 2).
pub fn beam_splitter(theta: f64) -> RMat {
    let (s, c) = theta.sin_cos();
    let u = CMat::from_row_slice(
        2,
        2,
        &[
            C64::new(c, 0.0),
            C64::new(s, 0.0),
            C64::new(-s, 0.0),
            C64::new(c, 0.0),
        ],
    );
    bogoliubov(&u)
}

pub fn is_symplectic(s: &RMat, tol: f64) -> Result<bool> {
    let n = require_even_square(s, "symplectic candidate")?;
    let om = omega(n);
    Ok(max_abs_diff(&(s * &om * s.transpose()), &om) <= tol)
}

pub fn is_passive(s: &RMat, tol: f64) -> Result<bool> {
    if !is_symplectic(s, tol)? {
        return Ok(false);
    }
    let dim = s.nrows();
    Ok(max_abs_diff(&(s * s.transpose()), &RMat::identity(dim, dim)) <= tol)
}

/// Real representation of `U` without validation.
pub(crate) fn bogoliubov(u: &CMat) -> RMat {
    let d = u.nrows();
    let mut k = RMat::zeros(2 * d, 2 * d);
    for j in 0..d {
        for l in 0..d {
            let z = u[(j, l)];
            k[(2 * j, 2 * l)] = z.re;
            k[(2 * j, 2 * l + 1)] = z.im;
            k[(2 * j + 1, 2 * l)] = -z.im;
            k[(2 * j + 1, 2 * l + 1)] = z.re;
        }
    }
    k
}

/// Orthogonal symplectic matrix representing the unitary `U`.
pub fn unitary_to_passive(u: &CMat) -> Result<RMat> {
    require_unitary(u, STRUCTURAL_TOL)?;
    Ok(bogoliubov(u))
}

/// Inverse of [`unitary_to_passive`].
pub fn passive_to_unitary(k: &RMat) -> Result<CMat> {
    let d = require_even_square(k, "passive matrix")?;
    if !is_passive(k, STRUCTURAL_TOL)? {
        return Err(GtoError::invalid("matrix is not orthogonal symplectic"));
    }
    Ok(CMat::from_fn(d, d, |j, l| {
        C64::new(k[(2 * j, 2 * l)], k[(2 * j, 2 * l + 1)])
    }))
}

/// Element of the isotropy group of `⊕_l ω_l 𝟙_{2d_l}`: the direct sum of the
/// passive matrices of `blocks[l]`, one per eigenfrequency sector.
pub fn build_isotropy_element(multiplicities: &[usize], blocks: &[CMat]) -> Result<RMat> {
    if multiplicities.len() != blocks.len() {
        return Err(GtoError::dim(format!(
            "{} multiplicities but {} blocks",
            multiplicities.len(),
            blocks.len()
        )));
    }
    let mut parts = Vec::with_capacity(blocks.len());
    for (l, (&d, b)) in multiplicities.iter().zip(blocks).enumerate() {
        if d == 0 || b.nrows() != d || b.ncols() != d {
            return Err(GtoError::dim(format!(
                "sector {l}: block is {}x{}, multiplicity {d}",
                b.nrows(),
                b.ncols()
            )));
        }
        parts.push(unitary_to_passive(b)?);
    }
    Ok(crate::matrix::direct_sum(&parts))
}

/// Inverse of a symplectic matrix via `S⁻¹ = −Ω Sᵀ Ω`.
pub fn symplectic_inverse(s: &RMat) -> RMat {
    let om = omega(s.nrows() / 2);
    -(&om * s.transpose() * &om)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn omega_single_mode() {
        assert_eq!(omega(1), RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
    }

    #[test]
    fn omega_two_modes_is_direct_sum() {
        let om = omega(2);
        let expect = crate::matrix::direct_sum(&[omega(1), omega(1)]);
        assert_eq!(om, expect);
    }

    #[test]
    fn omega_squares_to_minus_identity() {
        let om = omega(3);
        assert_eq!(&om * &om, -RMat::identity(6, 6));
    }

    #[test]
    fn symplectic_checks() {
        assert!(is_symplectic(&RMat::identity(4, 4), 1e-12).unwrap());
        assert!(is_symplectic(&squeezer(2.0), 1e-12).unwrap());
        let scaled = RMat::from_diagonal_element(2, 2, 2.0);
        assert!(!is_symplectic(&scaled, 1e-9).unwrap());
        assert!(is_symplectic(&RMat::identity(3, 3), 1e-9).is_err());
        assert!(is_symplectic(&RMat::zeros(2, 4), 1e-9).is_err());
    }

    #[test]
    fn passivity_checks() {
        assert!(is_passive(&rotation(0.3), 1e-12).unwrap());
        assert!(!is_passive(&squeezer(2.0), 1e-9).unwrap());
        assert!(is_passive(&beam_splitter(0.4), 1e-12).unwrap());
    }

    #[test]
    fn identity_and_phase_map_to_identity_and_rotation() {
        let one = CMat::identity(1, 1);
        assert_eq!(unitary_to_passive(&one).unwrap(), RMat::identity(2, 2));
        let phi = 0.83;
        let u = CMat::from_element(1, 1, C64::from_polar(1.0, phi));
        let k = unitary_to_passive(&u).unwrap();
        assert!(max_abs_diff(&k, &rotation(phi)) < 1e-15);
    }

    #[test]
    fn non_unitary_is_rejected() {
        let u = CMat::from_element(1, 1, C64::new(2.0, 0.0));
        assert!(matches!(
            unitary_to_passive(&u),
            Err(GtoError::Validation(_))
        ));
        assert!(matches!(
            passive_to_unitary(&squeezer(1.5)),
            Err(GtoError::Validation(_))
        ));
    }

    #[test]
    fn passive_round_trip_and_homomorphism() {
        for seed in 0..100 {
            let u1 = random_unitary(3, seed);
            let u2 = random_unitary(3, seed + 1000);
            let k1 = unitary_to_passive(&u1).unwrap();
            assert!(is_passive(&k1, STRUCTURAL_TOL).unwrap());
            let back = passive_to_unitary(&k1).unwrap();
            assert!(crate::matrix::max_abs_c(&(back - &u1)) < 1e-14);
            let k2 = unitary_to_passive(&u2).unwrap();
            let k12 = unitary_to_passive(&(&u1 * &u2)).unwrap();
            assert!(max_abs_diff(&k12, &(&k1 * &k2)) < 1e-13);
        }
    }

    #[test]
    fn symplectic_inverse_inverts() {
        let s = random_symplectic(2, 5);
        let prod = &s * symplectic_inverse(&s);
        assert!(max_abs_diff(&prod, &RMat::identity(4, 4)) < 1e-10);
    }

    #[test]
    fn isotropy_identity_block() {
        let k = build_isotropy_element(&[2], &[CMat::identity(2, 2)]).unwrap();
        assert_eq!(k, RMat::identity(4, 4));
    }

    #[test]
    fn isotropy_preserves_normal_form_and_commutes() {
        for seed in 0..20 {
            let blocks = vec![random_unitary(1, seed), random_unitary(2, seed + 50)];
            let k = build_isotropy_element(&[1, 2], &blocks).unwrap();
            let y = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                1.0, 1.0, 2.0, 2.0, 2.0, 2.0,
            ]));
            let kyk = &k * &y * k.transpose();
            assert!(max_abs_diff(&kyk, &y) < 1e-10);
            let yo = &y * omega(3);
            let comm = &k * &yo - &yo * &k;
            assert!(crate::matrix::max_abs(&comm) < 1e-10);
        }
    }

    #[test]
    fn cross_sector_mixer_breaks_isotropy() {
        // beam splitter between modes of different frequency
        let k = beam_splitter(0.7);
        let y = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 2.0, 2.0]));
        let kyk = &k * &y * k.transpose();
        assert!(max_abs_diff(&kyk, &y) > 1e-3);
    }

    #[test]
    fn isotropy_dimension_mismatch() {
        let err = build_isotropy_element(&[2], &[CMat::identity(3, 3)]);
        assert!(matches!(err, Err(GtoError::Dimension(_))));
        let err = build_isotropy_element(&[1, 1], &[CMat::identity(1, 1)]);
        assert!(matches!(err, Err(GtoError::Dimension(_))));
    }

    #[test]
    fn beam_splitter_pi_half_swaps() {
        let k = beam_splitter(std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(k[(0, 2)], 1.0, epsilon = 1e-15);
        assert_relative_eq!(k[(2, 0)], -1.0, epsilon = 1e-15);
        assert_relative_eq!(k[(0, 0)], 0.0, epsilon = 1e-15);
    }
}
