//! Unitary decompositions used to put passive system–bath couplings into
//! beam-splitter normal form.

use serde::{Deserialize, Serialize};

use super::STRUCTURAL_TOL;
use crate::error::{GtoError, Result};
use crate::matrix::{direct_sum_c, require_unitary, CMat, C64};

/// Full QR factorisation `A = Q R` with square unitary `Q` (`m × m`) and
/// upper-trapezoidal `R` (`m × n`), for any shape of `A`.
pub fn full_qr(a: &CMat) -> (CMat, CMat) {
    let (m, n) = a.shape();
    // Householder QR of [A | 𝟙_m] has an m×m Q; its first n columns of R
    // factor A itself.
    let mut aug = CMat::zeros(m, n + m);
    aug.view_mut((0, 0), (m, n)).copy_from(a);
    aug.view_mut((0, n), (m, m)).fill_with_identity();
    let qr = aug.qr();
    let q = qr.q();
    let r = qr.r().columns(0, n).into_owned();
    (q, r)
}

#[derive(Debug, Clone)]
pub struct Triangularized {
    /// Left bath unitary `U_m`.
    pub u_m: CMat,
    /// Right bath unitary `V_m`.
    pub v_m: CMat,
    /// `(𝟙ₙ ⊕ U_m) U (𝟙ₙ ⊕ V_m)`.
    pub reduced: CMat,
}

/// Bath-local unitaries that make the off-diagonal blocks of an
/// `(n+m) × (n+m)` unitary lower triangular.
///
/// In the result, the top-right `n × m` block `β` has `β[i][j] = 0` for
/// `j > i`, and the bottom-left `m × n` block `γᵀ` has `γᵀ[j][i] = 0` for
/// `j > i`; i.e. both couple the system only to the first `n` bath modes.
pub fn triangularize_offdiagonal(u: &CMat, n: usize, m: usize) -> Result<Triangularized> {
    if u.nrows() != n + m || u.ncols() != n + m {
        return Err(GtoError::dim(format!(
            "expected a {0}x{0} unitary, got {1}x{2}",
            n + m,
            u.nrows(),
            u.ncols()
        )));
    }
    if m < n {
        return Err(GtoError::UnsupportedShape(format!(
            "bath dimension {m} smaller than system dimension {n}"
        )));
    }
    require_unitary(u, STRUCTURAL_TOL)?;

    // β V_m lower trapezoidal: βᴴ = Q R ⇒ β Q = Rᴴ.
    let beta = u.view((0, n), (n, m)).into_owned();
    let (v_m, _) = full_qr(&beta.adjoint());
    // U_m γᵀ upper trapezoidal: γᵀ = Q R ⇒ Qᴴ γᵀ = R.
    let gamma_t = u.view((n, 0), (m, n)).into_owned();
    let (q, _) = full_qr(&gamma_t);
    let u_m = q.adjoint();

    let left = direct_sum_c(&[CMat::identity(n, n), u_m.clone()]);
    let right = direct_sum_c(&[CMat::identity(n, n), v_m.clone()]);
    let reduced = left * u * right;
    Ok(Triangularized { u_m, v_m, reduced })
}

/// Replace a system–bath unitary on `n + m` modes (`m ≥ n`) by a `2n × 2n`
/// unitary that induces the same channel on the system when every bath mode
/// starts in the same thermal state.
///
/// After triangularisation the system rows only touch the system and the first
/// `n` bath columns; those `n` orthonormal rows are completed to a unitary.
pub fn reduce_to_square_bath(u: &CMat, n: usize, m: usize) -> Result<CMat> {
    let tri = triangularize_offdiagonal(u, n, m)?;
    let rows = tri.reduced.view((0, 0), (n, 2 * n)).into_owned();
    // Rowsᴴ = Q R with R n×n diagonal-unitary; the remaining columns of Q
    // span the orthogonal complement.
    let (q, _) = full_qr(&rows.adjoint());
    let mut out = CMat::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, 2 * n)).copy_from(&rows);
    let complement = q.columns(n, n).adjoint();
    out.view_mut((n, 0), (n, 2 * n)).copy_from(&complement);
    Ok(out)
}

/// `U = (W ⊕ X) · (⊕_j R_jj) · (Z ⊕ Y)` where `R_jj` is the real beam splitter
/// `[[cos θ_j, sin θ_j], [−sin θ_j, cos θ_j]]` between system mode `j` and bath
/// mode `j`.
///
/// Gauge produced by [`cosine_sine_decompose`]: angles lie in `[0, π/2]` with
/// cosines ascending; `Z` is the right singular basis of the top-left block
/// (so the left phase freedom of `Z` is fixed by the SVD routine); `W` the
/// matching left singular basis; `X` carries the phases that make the sines
/// non-negative.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CosineSineForm {
    #[serde(rename = "W", with = "crate::matrix::complex_matrix")]
    pub w: CMat,
    #[serde(rename = "X", with = "crate::matrix::complex_matrix")]
    pub x: CMat,
    #[serde(rename = "Z", with = "crate::matrix::complex_matrix")]
    pub z: CMat,
    #[serde(rename = "Y", with = "crate::matrix::complex_matrix")]
    pub y: CMat,
    pub thetas: Vec<f64>,
}

impl CosineSineForm {
    /// The beam-splitter layer `⊕_j R_jj` as a `2n × 2n` matrix.
    pub fn mixer(&self) -> CMat {
        let n = self.thetas.len();
        let mut r = CMat::zeros(2 * n, 2 * n);
        for (j, &t) in self.thetas.iter().enumerate() {
            let (s, c) = t.sin_cos();
            r[(j, j)] = C64::new(c, 0.0);
            r[(j, n + j)] = C64::new(s, 0.0);
            r[(n + j, j)] = C64::new(-s, 0.0);
            r[(n + j, n + j)] = C64::new(c, 0.0);
        }
        r
    }

    pub fn reconstruct(&self) -> CMat {
        let left = direct_sum_c(&[self.w.clone(), self.x.clone()]);
        let right = direct_sum_c(&[self.z.clone(), self.y.clone()]);
        left * self.mixer() * right
    }
}

pub fn cosine_sine_decompose(u: &CMat) -> Result<CosineSineForm> {
    let dim = u.nrows();
    if !u.is_square() || dim == 0 || !dim.is_multiple_of(2) {
        return Err(GtoError::invalid(format!(
            "cosine-sine decomposition needs an even square unitary, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    require_unitary(u, STRUCTURAL_TOL)?;
    let n = dim / 2;
    let u00 = u.view((0, 0), (n, n)).into_owned();
    let u01 = u.view((0, n), (n, n)).into_owned();
    let u10 = u.view((n, 0), (n, n)).into_owned();
    let u11 = u.view((n, n), (n, n)).into_owned();

    // u00 = W C Z with cosines ascending. Z comes from the Hermitian
    // eigenproblem of u00ᴴu00 and W from a QR of u00 Zᴴ; nalgebra's complex
    // SVD leaves residuals near 1e-10 on some inputs.
    let z0 = (u00.adjoint() * &u00).symmetric_eigen().eigenvectors.adjoint();
    let (mut w0, r0) = full_qr(&(&u00 * z0.adjoint()));
    let mut c = vec![0.0; n];
    for j in 0..n {
        let d = r0[(j, j)];
        let mag = d.norm();
        if mag > 0.0 {
            let phase = d / mag;
            for i in 0..n {
                w0[(i, j)] *= phase;
            }
        }
        c[j] = mag;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| c[a].total_cmp(&c[b]));
    let w = CMat::from_fn(n, n, |i, j| w0[(i, order[j])]);
    let z = CMat::from_fn(n, n, |i, j| z0[(order[i], j)]);
    c = order.iter().map(|&k| c[k].min(1.0)).collect();

    // u10 Zᴴ = L S with S diagonal (sines descending); L is the lower-left
    // unitary up to the sign convention of the mixer.
    let (mut l1, r) = full_qr(&(&u10 * z.adjoint()));
    let mut s = vec![0.0; n];
    for j in 0..n {
        let d = r[(j, j)];
        let mag = d.norm();
        if mag > 0.0 {
            let phase = d / mag;
            for i in 0..n {
                l1[(i, j)] *= phase;
            }
        }
        s[j] = mag.min(1.0);
    }

    // Right bath unitary from whichever block is better conditioned per row:
    //   u01 = W S Y  and  u11 = −L C Y   (X = −L).
    let w_u01 = w.adjoint() * &u01;
    let l_u11 = l1.adjoint() * &u11;
    let mut y = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            y[(i, j)] = if s[i] > c[i] {
                w_u01[(i, j)] / s[i]
            } else {
                -l_u11[(i, j)] / c[i]
            };
        }
    }
    let x = -l1;
    let thetas = c.iter().zip(&s).map(|(&ci, &si)| si.atan2(ci)).collect();
    Ok(CosineSineForm { w, x, z, y, thetas })
}
