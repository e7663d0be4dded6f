//! Gaussian CP maps and the Gaussian thermal operations among them.
//!
//! A channel acts as `σ ↦ XσXᵀ + Y`, `r ↦ Xr + d`. A GTO on a Hamiltonian with
//! normal-mode frame `S` is, sector by sector, a passive `Z_l`, independent
//! beam splitters with thermal bath modes at the sector frequency, and a passive
//! `W_l`. [`gto_to_channel`] builds `(X, Y)` in closed form; [`dilate_and_trace`]
//! and [`gto_dilation_apply`] build the same map by explicit dilation and are
//! used as an oracle for it.

use serde::{Deserialize, Serialize};

use crate::error::{GtoError, Result};
use crate::matrix::{
    direct_sum, direct_sum_c, max_abs, symmetry_defect, to_complex, CMat, RMat, RVec, C64,
};
use crate::states::{nu_of, validate_state, FrequencySpectrum, GaussianState};
use crate::symplectic::{
    bogoliubov, is_passive, is_symplectic, omega, rotation, symplectic_inverse, STRUCTURAL_TOL,
};

/// Default tolerance on the smallest eigenvalue of `Y + iΩ − iXΩXᵀ`.
pub const CHANNEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianChannel {
    #[serde(rename = "X", with = "crate::matrix::real_matrix")]
    pub x: RMat,
    #[serde(rename = "Y", with = "crate::matrix::real_matrix")]
    pub y: RMat,
    #[serde(with = "crate::matrix::real_vector")]
    pub d: RVec,
}

impl GaussianChannel {
    pub fn identity(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        GaussianChannel {
            x: RMat::identity(dim, dim),
            y: RMat::zeros(dim, dim),
            d: RVec::zeros(dim),
        }
    }

    /// Replace every input by the isotropic thermal state `ν_b 𝟙`.
    pub fn thermalizing(n_modes: usize, nu_b: f64) -> Self {
        let dim = 2 * n_modes;
        GaussianChannel {
            x: RMat::zeros(dim, dim),
            y: RMat::identity(dim, dim) * nu_b,
            d: RVec::zeros(dim),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.x.nrows() / 2
    }

    fn check_dims(&self) -> Result<usize> {
        let dim = self.x.nrows();
        if dim == 0
            || !dim.is_multiple_of(2)
            || self.x.shape() != (dim, dim)
            || self.y.shape() != (dim, dim)
            || self.d.len() != dim
        {
            return Err(GtoError::dim(format!(
                "channel blocks have inconsistent shapes: X {:?}, Y {:?}, d {}",
                self.x.shape(),
                self.y.shape(),
                self.d.len()
            )));
        }
        Ok(dim / 2)
    }
}

/// True iff `Y` is symmetric and `Y + iΩ − iXΩXᵀ ≥ −tol`.
pub fn validate_channel(ch: &GaussianChannel, tol: f64) -> Result<bool> {
    let n = ch.check_dims()?;
    if ch.x.iter().chain(ch.y.iter()).chain(ch.d.iter()).any(|v| !v.is_finite()) {
        return Ok(false);
    }
    if symmetry_defect(&ch.y) > tol * max_abs(&ch.y).max(1.0) {
        return Ok(false);
    }
    let om = omega(n);
    let anti = &om - &ch.x * &om * ch.x.transpose();
    let y_sym = (&ch.y + ch.y.transpose()) * 0.5;
    let herm = CMat::from_fn(2 * n, 2 * n, |i, j| C64::new(y_sym[(i, j)], anti[(i, j)]));
    let min_ev = herm.symmetric_eigenvalues().min();
    Ok(min_ev >= -tol)
}

pub fn apply_channel(ch: &GaussianChannel, state: &GaussianState) -> Result<GaussianState> {
    let n = ch.check_dims()?;
    state.check_dims()?;
    if state.n_modes != n {
        return Err(GtoError::dim(format!(
            "channel acts on {n} modes, state has {}",
            state.n_modes
        )));
    }
    if !validate_channel(ch, CHANNEL_TOL)? {
        return Err(GtoError::invalid("channel is not completely positive"));
    }
    if !validate_state(state, STRUCTURAL_TOL)? {
        return Err(GtoError::invalid("input is not a valid Gaussian state"));
    }
    Ok(apply_unchecked(ch, state))
}

pub(crate) fn apply_unchecked(ch: &GaussianChannel, state: &GaussianState) -> GaussianState {
    let cm = &ch.x * &state.cm * ch.x.transpose() + &ch.y;
    GaussianState {
        n_modes: state.n_modes,
        first_moments: &ch.x * &state.first_moments + &ch.d,
        cm: (&cm + cm.transpose()) * 0.5,
    }
}

/// Passive maps and beam-splitter angles for one eigenfrequency sector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorOp {
    #[serde(rename = "Z", with = "crate::matrix::complex_matrix")]
    pub z: CMat,
    pub thetas: Vec<f64>,
    #[serde(rename = "W", with = "crate::matrix::complex_matrix")]
    pub w: CMat,
}

impl SectorOp {
    pub fn identity(multiplicity: usize) -> Self {
        SectorOp {
            z: CMat::identity(multiplicity, multiplicity),
            thetas: vec![0.0; multiplicity],
            w: CMat::identity(multiplicity, multiplicity),
        }
    }

    /// System–bath unitary `(W ⊕ 𝟙)(⊕_k R_kk)(Z ⊕ 𝟙)` on `2n_l` modes.
    pub fn dilation_unitary(&self) -> CMat {
        let n = self.thetas.len();
        let mut mixer = CMat::zeros(2 * n, 2 * n);
        for (k, &t) in self.thetas.iter().enumerate() {
            let (s, c) = t.sin_cos();
            mixer[(k, k)] = C64::new(c, 0.0);
            mixer[(k, n + k)] = C64::new(s, 0.0);
            mixer[(n + k, k)] = C64::new(-s, 0.0);
            mixer[(n + k, n + k)] = C64::new(c, 0.0);
        }
        let id = CMat::identity(n, n);
        direct_sum_c(&[self.w.clone(), id.clone()]) * mixer * direct_sum_c(&[self.z.clone(), id])
    }
}

/// Parametrisation of a multimode GTO.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GtoSpec {
    pub spectrum: FrequencySpectrum,
    pub beta: f64,
    pub sectors: Vec<SectorOp>,
}

impl GtoSpec {
    pub fn identity(spectrum: FrequencySpectrum, beta: f64) -> Self {
        let sectors = spectrum
            .sectors
            .iter()
            .map(|s| SectorOp::identity(s.multiplicity))
            .collect();
        GtoSpec { spectrum, beta, sectors }
    }

    pub fn check(&self) -> Result<()> {
        self.spectrum.check()?;
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(GtoError::domain(format!("β must be positive, got {}", self.beta)));
        }
        if self.sectors.len() != self.spectrum.sectors.len() {
            return Err(GtoError::invalid(format!(
                "{} sector operations for {} frequency sectors",
                self.sectors.len(),
                self.spectrum.sectors.len()
            )));
        }
        for (l, (op, sec)) in self.sectors.iter().zip(&self.spectrum.sectors).enumerate() {
            let d = sec.multiplicity;
            if op.z.shape() != (d, d) || op.w.shape() != (d, d) || op.thetas.len() != d {
                return Err(GtoError::invalid(format!(
                    "sector {l}: operation dimensions do not match multiplicity {d}"
                )));
            }
            if op.thetas.iter().any(|t| !t.is_finite()) {
                return Err(GtoError::invalid(format!("sector {l}: non-finite angle")));
            }
            crate::matrix::require_unitary(&op.z, STRUCTURAL_TOL)
                .and_then(|_| crate::matrix::require_unitary(&op.w, STRUCTURAL_TOL))
                .map_err(|e| GtoError::invalid(format!("sector {l}: {e}")))?;
        }
        Ok(())
    }

    fn sector_nus(&self) -> Result<Vec<f64>> {
        self.spectrum
            .sectors
            .iter()
            .map(|s| nu_of(self.beta, s.omega))
            .collect()
    }
}

/// Closed-form `(X, Y)` of a GTO:
/// `X = S (⊕_l K(W_l) C_l K(Z_l)) S⁻¹`, `Y = S (⊕_l ν_l K(W_l) S_l² K(W_l)ᵀ) Sᵀ`
/// with `C_l = ⊕_k cos θ_lk 𝟙₂`, `S_l² = ⊕_k sin² θ_lk 𝟙₂`.
pub fn gto_to_channel(spec: &GtoSpec) -> Result<GaussianChannel> {
    spec.check()?;
    let nus = spec.sector_nus()?;
    let mut xs = Vec::with_capacity(spec.sectors.len());
    let mut ys = Vec::with_capacity(spec.sectors.len());
    for (op, &nu) in spec.sectors.iter().zip(&nus) {
        let kw = bogoliubov(&op.w);
        let kz = bogoliubov(&op.z);
        let cos: Vec<f64> = op.thetas.iter().flat_map(|t| [t.cos(); 2]).collect();
        let sin2: Vec<f64> = op.thetas.iter().flat_map(|t| [nu * t.sin().powi(2); 2]).collect();
        let c = RMat::from_diagonal(&RVec::from_vec(cos));
        let s2 = RMat::from_diagonal(&RVec::from_vec(sin2));
        xs.push(&kw * c * kz);
        ys.push(&kw * s2 * kw.transpose());
    }
    let frame = &spec.spectrum.s;
    let frame_inv = symplectic_inverse(frame);
    let x = frame * direct_sum(&xs) * frame_inv;
    let y = frame * direct_sum(&ys) * frame.transpose();
    let dim = x.nrows();
    Ok(GaussianChannel {
        x,
        y: (&y + y.transpose()) * 0.5,
        d: RVec::zeros(dim),
    })
}

/// Apply a GTO by explicit dilation: bring the CM to the normal-mode frame,
/// append one thermal bath mode per system mode, act with the global passive
/// coupling, pinch out the system and return to the original frame.
pub fn gto_dilation_apply(spec: &GtoSpec, cm: &RMat) -> Result<RMat> {
    spec.check()?;
    let n = spec.spectrum.n_modes();
    if cm.shape() != (2 * n, 2 * n) {
        return Err(GtoError::dim("covariance matrix does not match the spec"));
    }
    let nus = spec.sector_nus()?;
    // global unitary: system modes 0..n, bath modes n..2n, sector blocks aligned
    let mut global = CMat::zeros(2 * n, 2 * n);
    let mut bath_nus = Vec::with_capacity(n);
    let mut offset = 0;
    for (op, &nu) in spec.sectors.iter().zip(&nus) {
        let d = op.thetas.len();
        let u = op.dilation_unitary();
        for i in 0..2 * d {
            for j in 0..2 * d {
                let gi = if i < d { offset + i } else { n + offset + i - d };
                let gj = if j < d { offset + j } else { n + offset + j - d };
                global[(gi, gj)] = u[(i, j)];
            }
        }
        bath_nus.extend(std::iter::repeat_n(nu, d));
        offset += d;
    }
    let frame = &spec.spectrum.s;
    let frame_inv = symplectic_inverse(frame);
    let normal = &frame_inv * cm * frame_inv.transpose();
    let out = dilate_and_trace(&normal, &bogoliubov(&global), &bath_nus)?;
    Ok(frame * out * frame.transpose())
}

/// `Tr_b[O (σ ⊕ ⊕_j ν_j 𝟙₂) Oᵀ]`: the leading `2n × 2n` block after a global
/// passive `O` on system plus `m = bath_nus.len()` thermal bath modes.
pub fn dilate_and_trace(system_cm: &RMat, o: &RMat, bath_nus: &[f64]) -> Result<RMat> {
    let sys_dim = system_cm.nrows();
    let m = bath_nus.len();
    if !system_cm.is_square() || !sys_dim.is_multiple_of(2) || o.shape() != (sys_dim + 2 * m, sys_dim + 2 * m)
    {
        return Err(GtoError::dim(format!(
            "system CM {:?} and {m} bath modes do not match coupling {:?}",
            system_cm.shape(),
            o.shape()
        )));
    }
    if !is_passive(o, STRUCTURAL_TOL)? {
        return Err(GtoError::invalid("coupling is not passive"));
    }
    if let Some(bad) = bath_nus.iter().find(|&&v| !(v >= 1.0)) {
        return Err(GtoError::domain(format!("bath symplectic eigenvalue {bad} < 1")));
    }
    let bath: Vec<RMat> = bath_nus.iter().map(|&v| RMat::identity(2, 2) * v).collect();
    let mut blocks = vec![system_cm.clone()];
    blocks.extend(bath);
    let joint = direct_sum(&blocks);
    let out = o * joint * o.transpose();
    Ok(out.view((0, 0), (sys_dim, sys_dim)).into_owned())
}

/// Single-mode GTO `σ ↦ S(p D_φ S⁻¹σS⁻ᵀ D_φᵀ + (1−p) ν_b 𝟙₂)Sᵀ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleModeGto {
    pub p: f64,
    #[serde(default)]
    pub phi: f64,
    pub nu_b: f64,
    #[serde(
        rename = "S",
        with = "crate::matrix::real_matrix",
        default = "identity_2x2"
    )]
    pub s: RMat,
}

fn identity_2x2() -> RMat {
    RMat::identity(2, 2)
}

impl SingleModeGto {
    pub fn to_channel(&self) -> Result<GaussianChannel> {
        single_mode_gto(self.p, self.phi, self.nu_b, &self.s)
    }
}

/// `X = √p S D_φ S⁻¹`, `Y = (1 − p) ν_b S Sᵀ`.
pub fn single_mode_gto(p: f64, phi: f64, nu_b: f64, s: &RMat) -> Result<GaussianChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GtoError::domain(format!("p must lie in [0, 1], got {p}")));
    }
    if !(nu_b >= 1.0) || !nu_b.is_finite() || !phi.is_finite() {
        return Err(GtoError::domain(format!("need finite φ and ν_b ≥ 1, got ν_b={nu_b}")));
    }
    if s.shape() != (2, 2) || !is_symplectic(s, STRUCTURAL_TOL)? {
        return Err(GtoError::invalid("normal-mode frame must be a 2x2 symplectic"));
    }
    let s_inv = symplectic_inverse(s);
    Ok(GaussianChannel {
        x: s * rotation(phi) * s_inv * p.sqrt(),
        y: s * s.transpose() * ((1.0 - p) * nu_b),
        d: RVec::zeros(2),
    })
}

/// Shift a GTO defined for a Hamiltonian centred at the origin to one centred
/// at `center`: `d' = d + (𝟙 − X) center`.
pub fn displaced_gto(ch: &GaussianChannel, center: &RVec) -> Result<GaussianChannel> {
    let n = ch.check_dims()?;
    if center.len() != 2 * n {
        return Err(GtoError::dim("center length does not match channel"));
    }
    let shift = center - &ch.x * center;
    Ok(GaussianChannel {
        x: ch.x.clone(),
        y: ch.y.clone(),
        d: &ch.d + shift,
    })
}

/// `ch2 ∘ ch1`.
pub fn compose(ch2: &GaussianChannel, ch1: &GaussianChannel) -> Result<GaussianChannel> {
    let n2 = ch2.check_dims()?;
    let n1 = ch1.check_dims()?;
    if n1 != n2 {
        return Err(GtoError::dim(format!("cannot compose {n2}-mode after {n1}-mode channel")));
    }
    Ok(GaussianChannel {
        x: &ch2.x * &ch1.x,
        y: &ch2.x * &ch1.y * ch2.x.transpose() + &ch2.y,
        d: &ch2.x * &ch1.d + &ch2.d,
    })
}

/// Embed a real orthogonal 2n×2n mixing matrix given as a unitary on modes.
pub fn passive_from_real_unitary(u: &RMat) -> RMat {
    bogoliubov(&to_complex(u))
}
