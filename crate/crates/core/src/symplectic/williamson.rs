//! Williamson normal form of a real positive-definite matrix.
//!
//! With `A = P^{1/2} Ω P^{1/2}` (real antisymmetric), the Hermitian matrix `iA`
//! has eigenvalues `±ν_j`. For each positive eigenvalue with eigenvector
//! `v = (x + iy)/√2` one has `A x = ν y` and `A y = −ν x`, so the orthogonal `O`
//! with columns `(y₁, x₁, y₂, x₂, …)` brings `A` to `⊕ ν_j Ω₁`. Then
//! `S = P^{1/2} O D^{−1/2}` with `D = ⊕ ν_j 𝟙₂` is symplectic and `S D Sᵀ = P`.
//! Degenerate `ν` need no special care: the Hermitian eigensolver returns an
//! orthonormal basis of each eigenspace, and the real and imaginary parts of
//! such a basis are mutually orthonormal because `v̄` lies in the `−ν` space.

use serde::{Deserialize, Serialize};

use super::omega;
use crate::error::{GtoError, Result};
use crate::matrix::{max_abs, require_even_square, symmetry_defect, RMat, C64};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WilliamsonForm {
    #[serde(rename = "S", with = "crate::matrix::real_matrix")]
    pub s: RMat,
    /// Symplectic eigenvalues, sorted descending.
    pub nus: Vec<f64>,
}

impl WilliamsonForm {
    /// `⊕ ν_j 𝟙₂`.
    pub fn normal_form(&self) -> RMat {
        let diag: Vec<f64> = self.nus.iter().flat_map(|&v| [v, v]).collect();
        RMat::from_diagonal(&nalgebra::DVector::from_vec(diag))
    }

    /// `S (⊕ ν_j 𝟙₂) Sᵀ`.
    pub fn reconstruct(&self) -> RMat {
        &self.s * self.normal_form() * self.s.transpose()
    }
}

struct SpectralParts {
    sqrt: RMat,
    // (ν, x, y) per mode, ν descending
    modes: Vec<(f64, nalgebra::DVector<f64>, nalgebra::DVector<f64>)>,
}

fn spectral_parts(p: &RMat, tol: f64) -> Result<SpectralParts> {
    let n = require_even_square(p, "Williamson input")?;
    if p.iter().any(|v| !v.is_finite()) {
        return Err(GtoError::invalid("matrix has non-finite entries"));
    }
    let scale = max_abs(p).max(1.0);
    let asym = symmetry_defect(p);
    if asym > tol * scale {
        return Err(GtoError::invalid(format!(
            "matrix is not symmetric (defect {asym:e})"
        )));
    }
    let sym = (p + p.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let min_ev = eig.eigenvalues.min();
    if min_ev <= 0.0 {
        return Err(GtoError::invalid(format!(
            "matrix is not positive definite (smallest eigenvalue {min_ev:e})"
        )));
    }
    let root = eig.eigenvalues.map(f64::sqrt);
    let sqrt = &eig.eigenvectors
        * RMat::from_diagonal(&root)
        * eig.eigenvectors.transpose();

    let a = &sqrt * omega(n) * &sqrt;
    let herm = a.map(|v| C64::new(0.0, v));
    let heig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| heig.eigenvalues[j].total_cmp(&heig.eigenvalues[i]));

    let sqrt2 = std::f64::consts::SQRT_2;
    let modes = order[..n]
        .iter()
        .map(|&idx| {
            let v = heig.eigenvectors.column(idx);
            let x = v.map(|z| z.re * sqrt2);
            let y = v.map(|z| z.im * sqrt2);
            (heig.eigenvalues[idx], x, y)
        })
        .collect::<Vec<_>>();
    if let Some((nu, _, _)) = modes.last() {
        if *nu <= 0.0 {
            return Err(GtoError::invalid("degenerate symplectic spectrum"));
        }
    }
    Ok(SpectralParts { sqrt, modes })
}

/// Symplectic `S` and eigenvalues `ν` (descending) with `S (⊕ ν_j 𝟙₂) Sᵀ = P`.
///
/// `tol` bounds the accepted asymmetry of `P`, relative to `max(1, ‖P‖_max)`.
pub fn williamson(p: &RMat, tol: f64) -> Result<WilliamsonForm> {
    let parts = spectral_parts(p, tol)?;
    let dim = p.nrows();
    let mut o = RMat::zeros(dim, dim);
    let mut inv_root = Vec::with_capacity(dim);
    for (j, (nu, x, y)) in parts.modes.iter().enumerate() {
        o.set_column(2 * j, y);
        o.set_column(2 * j + 1, x);
        let r = 1.0 / nu.sqrt();
        inv_root.extend([r, r]);
    }
    let d_inv_half = RMat::from_diagonal(&nalgebra::DVector::from_vec(inv_root));
    let s = &parts.sqrt * o * d_inv_half;
    Ok(WilliamsonForm {
        s,
        nus: parts.modes.iter().map(|m| m.0).collect(),
    })
}

/// Symplectic eigenvalues of `P`, sorted descending.
pub fn symplectic_eigenvalues(p: &RMat) -> Result<Vec<f64>> {
    Ok(spectral_parts(p, super::STRUCTURAL_TOL)?
        .modes
        .into_iter()
        .map(|m| m.0)
        .collect())
}
