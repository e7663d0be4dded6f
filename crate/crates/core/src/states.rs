//! Gaussian states, thermal states and single-mode thermodynamic quantities.

use serde::{Deserialize, Serialize};

use crate::error::{GtoError, Result};
use crate::matrix::{max_abs, require_even_square, symmetry_defect, RMat, RVec};
use crate::symplectic::{rotation, symplectic_eigenvalues, williamson};

/// Default relative tolerance for grouping degenerate eigenfrequencies.
pub const FREQ_TOL: f64 = 1e-9;

/// First moments and covariance matrix of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub n_modes: usize,
    #[serde(with = "crate::matrix::real_vector")]
    pub first_moments: RVec,
    #[serde(with = "crate::matrix::real_matrix")]
    pub cm: RMat,
}

impl GaussianState {
    /// State with zero first moments.
    pub fn centered(cm: RMat) -> Result<Self> {
        let n = require_even_square(&cm, "covariance matrix")?;
        Ok(GaussianState {
            n_modes: n,
            first_moments: RVec::zeros(2 * n),
            cm,
        })
    }

    pub fn vacuum(n_modes: usize) -> Self {
        GaussianState {
            n_modes,
            first_moments: RVec::zeros(2 * n_modes),
            cm: RMat::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Isotropic thermal state `ν 𝟙₂` on one mode.
    pub fn thermal_single_mode(nu: f64) -> Self {
        GaussianState {
            n_modes: 1,
            first_moments: RVec::zeros(2),
            cm: RMat::identity(2, 2) * nu,
        }
    }

    pub fn check_dims(&self) -> Result<()> {
        let dim = 2 * self.n_modes;
        if self.n_modes == 0
            || self.cm.shape() != (dim, dim)
            || self.first_moments.len() != dim
        {
            return Err(GtoError::dim(format!(
                "state declares {} modes but has a {}x{} covariance matrix and {} first moments",
                self.n_modes,
                self.cm.nrows(),
                self.cm.ncols(),
                self.first_moments.len()
            )));
        }
        Ok(())
    }
}

/// True iff the covariance matrix is symmetric and every symplectic eigenvalue
/// is at least `1 − tol` (equivalently `σ + iΩ ≥ 0`).
pub fn validate_state(state: &GaussianState, tol: f64) -> Result<bool> {
    state.check_dims()?;
    if state.cm.iter().chain(state.first_moments.iter()).any(|v| !v.is_finite()) {
        return Ok(false);
    }
    if symmetry_defect(&state.cm) > tol * max_abs(&state.cm).max(1.0) {
        return Ok(false);
    }
    match symplectic_eigenvalues(&state.cm) {
        Ok(nus) => Ok(nus.iter().all(|&nu| nu >= 1.0 - tol)),
        // not positive definite
        Err(GtoError::Validation(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Thermal symplectic eigenvalue `(e^{βω} + 1)/(e^{βω} − 1) = coth(βω/2)`.
pub fn nu_of(beta: f64, omega: f64) -> Result<f64> {
    if !(beta > 0.0 && omega > 0.0) || !(beta * omega).is_finite() {
        return Err(GtoError::domain(format!(
            "need β > 0 and ω > 0, got β={beta}, ω={omega}"
        )));
    }
    Ok(1.0 / (0.5 * beta * omega).tanh())
}

/// Quadratic Hamiltonian `½ (r − d)ᵀ H (r − d)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub n_modes: usize,
    #[serde(rename = "H", with = "crate::matrix::real_matrix")]
    pub h: RMat,
    #[serde(with = "crate::matrix::real_vector")]
    pub center: RVec,
}

impl HamiltonianSpec {
    pub fn new(h: RMat) -> Result<Self> {
        let n = require_even_square(&h, "Hamiltonian matrix")?;
        Ok(HamiltonianSpec {
            n_modes: n,
            h,
            center: RVec::zeros(2 * n),
        })
    }

    pub fn with_center(mut self, center: RVec) -> Result<Self> {
        if center.len() != 2 * self.n_modes {
            return Err(GtoError::dim("Hamiltonian center has wrong length"));
        }
        self.center = center;
        Ok(self)
    }

    fn check(&self) -> Result<()> {
        let dim = 2 * self.n_modes;
        if self.n_modes == 0 || self.h.shape() != (dim, dim) || self.center.len() != dim {
            return Err(GtoError::dim("Hamiltonian dimensions inconsistent"));
        }
        let sym = (&self.h + self.h.transpose()) * 0.5;
        let min_ev = sym.symmetric_eigenvalues().min();
        if min_ev <= 0.0 || symmetry_defect(&self.h) > 1e-9 * max_abs(&self.h).max(1.0) {
            return Err(GtoError::domain(
                "Hamiltonian matrix must be symmetric and strictly positive definite",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySector {
    pub omega: f64,
    pub multiplicity: usize,
    /// Normal-mode indices belonging to this sector (contiguous).
    pub mode_indices: Vec<usize>,
}

/// Normal-mode frame `S` and eigenfrequency sectors of a Hamiltonian:
/// `S⁻¹ H S⁻ᵀ = ⊕_l ω_l 𝟙_{2n_l}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencySpectrum {
    #[serde(rename = "S", with = "crate::matrix::real_matrix")]
    pub s: RMat,
    pub sectors: Vec<FrequencySector>,
}

impl FrequencySpectrum {
    pub fn n_modes(&self) -> usize {
        self.sectors.iter().map(|s| s.multiplicity).sum()
    }

    /// Spectrum with `S = 𝟙` and a single degenerate sector.
    pub fn uniform(omega: f64, n_modes: usize) -> Self {
        FrequencySpectrum {
            s: RMat::identity(2 * n_modes, 2 * n_modes),
            sectors: vec![FrequencySector {
                omega,
                multiplicity: n_modes,
                mode_indices: (0..n_modes).collect(),
            }],
        }
    }

    /// `⊕_l ω_l 𝟙_{2n_l}` in the normal-mode frame.
    pub fn normal_form(&self) -> RMat {
        let diag: Vec<f64> = self
            .sectors
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.omega, 2 * s.multiplicity))
            .collect();
        RMat::from_diagonal(&RVec::from_vec(diag))
    }

    pub fn check(&self) -> Result<()> {
        let n = self.n_modes();
        if n == 0 || self.s.shape() != (2 * n, 2 * n) {
            return Err(GtoError::dim("spectrum frame does not match its sectors"));
        }
        let mut next = 0;
        for sec in &self.sectors {
            if !(sec.omega > 0.0) || sec.multiplicity == 0 {
                return Err(GtoError::invalid("sector frequencies must be positive"));
            }
            let expect: Vec<usize> = (next..next + sec.multiplicity).collect();
            if sec.mode_indices != expect {
                return Err(GtoError::invalid(
                    "sector mode indices must be contiguous and in order",
                ));
            }
            next += sec.multiplicity;
        }
        if !crate::symplectic::is_symplectic(&self.s, crate::symplectic::STRUCTURAL_TOL * 10.0)? {
            return Err(GtoError::invalid("spectrum frame is not symplectic"));
        }
        Ok(())
    }
}

/// Williamson-decompose `H` and group frequencies equal within relative
/// tolerance `freq_tol` into sectors (ordered as the Williamson output,
/// i.e. descending frequency).
pub fn normal_mode_spectrum(ham: &HamiltonianSpec, freq_tol: f64) -> Result<FrequencySpectrum> {
    ham.check()?;
    let w = williamson(&ham.h, crate::symplectic::STRUCTURAL_TOL)?;
    let mut sectors: Vec<FrequencySector> = Vec::new();
    for (idx, &om) in w.nus.iter().enumerate() {
        match sectors.last_mut() {
            Some(sec) if (sec.omega - om).abs() <= freq_tol * sec.omega.max(om) => {
                // running mean keeps the representative centred in the cluster
                let k = sec.multiplicity as f64;
                sec.omega = (sec.omega * k + om) / (k + 1.0);
                sec.multiplicity += 1;
                sec.mode_indices.push(idx);
            }
            _ => sectors.push(FrequencySector {
                omega: om,
                multiplicity: 1,
                mode_indices: vec![idx],
            }),
        }
    }
    Ok(FrequencySpectrum { s: w.s, sectors })
}

/// Gibbs state of `ham` at inverse temperature `beta`.
pub fn thermal_state(beta: f64, ham: &HamiltonianSpec) -> Result<GaussianState> {
    let spec = normal_mode_spectrum(ham, FREQ_TOL)?;
    thermal_state_from_spectrum(beta, &spec, ham.center.clone())
}

pub(crate) fn thermal_state_from_spectrum(
    beta: f64,
    spec: &FrequencySpectrum,
    center: RVec,
) -> Result<GaussianState> {
    let mut diag = Vec::with_capacity(2 * spec.n_modes());
    for sec in &spec.sectors {
        let nu = nu_of(beta, sec.omega)?;
        diag.extend(std::iter::repeat_n(nu, 2 * sec.multiplicity));
    }
    let normal = RMat::from_diagonal(&RVec::from_vec(diag));
    let cm = &spec.s * normal * spec.s.transpose();
    Ok(GaussianState {
        n_modes: spec.n_modes(),
        first_moments: center,
        cm,
    })
}

/// Single-mode CM as `ν D_φ diag(z, 1/z) D_φᵀ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleModeNormalForm {
    pub nu: f64,
    pub z: f64,
    pub phi: f64,
}

impl SingleModeNormalForm {
    pub fn reconstruct(&self) -> RMat {
        let d = rotation(self.phi);
        &d * RMat::from_row_slice(2, 2, &[self.z, 0.0, 0.0, 1.0 / self.z]) * d.transpose()
            * self.nu
    }
}

/// Squeezing below this is reported as `z = 1`, `φ = 0`.
const ISOTROPIC_TOL: f64 = 1e-12;

/// Decompose a single-mode CM into `(ν, z, φ)` with `z ≥ 1` and `φ ∈ [0, π)`.
pub fn single_mode_decompose(cm: &RMat) -> Result<SingleModeNormalForm> {
    if cm.shape() != (2, 2) {
        return Err(GtoError::dim(format!(
            "single-mode CM must be 2x2, got {}x{}",
            cm.nrows(),
            cm.ncols()
        )));
    }
    let state = GaussianState::centered(cm.clone())?;
    if !validate_state(&state, crate::symplectic::STRUCTURAL_TOL)? {
        return Err(GtoError::invalid("not a valid single-mode covariance matrix"));
    }
    let (a, b, d) = (cm[(0, 0)], 0.5 * (cm[(0, 1)] + cm[(1, 0)]), cm[(1, 1)]);
    let nu = (a * d - b * b).sqrt();
    // z − 1/z = √((a − d)² + 4b²)/ν, free of the cancellation in tr/ν − 2
    let w = (a - d).hypot(2.0 * b) / nu;
    if w <= ISOTROPIC_TOL {
        return Ok(SingleModeNormalForm { nu, z: 1.0, phi: 0.0 });
    }
    let z = 0.5 * (w + (w * w + 4.0).sqrt());
    // principal axis (cos α, sin α) = (cos φ, −sin φ)
    let alpha = 0.5 * (2.0 * b).atan2(a - d);
    let pi = std::f64::consts::PI;
    let mut phi = (-alpha).rem_euclid(pi);
    if phi >= pi {
        phi -= pi;
    }
    Ok(SingleModeNormalForm { nu, z, phi })
}

/// Von Neumann entropy (nats) of a mode with symplectic eigenvalue `ν`.
pub fn entropy(nu: f64) -> Result<f64> {
    if !(nu >= 1.0) || !nu.is_finite() {
        return Err(GtoError::domain(format!("entropy needs ν ≥ 1, got {nu}")));
    }
    let xlogx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    Ok(xlogx(0.5 * (nu + 1.0)) - xlogx(0.5 * (nu - 1.0)))
}

/// Free energy `¼ ω ν (z + 1/z) − S(ν)/β` of a single mode in its normal frame.
pub fn free_energy(nu: f64, z: f64, beta: f64, omega: f64) -> Result<f64> {
    if !(z >= 1.0) || !(beta > 0.0) || !(omega > 0.0) {
        return Err(GtoError::domain(format!(
            "free energy needs z ≥ 1, β > 0, ω > 0; got z={z}, β={beta}, ω={omega}"
        )));
    }
    Ok(0.25 * omega * nu * (z + 1.0 / z) - entropy(nu)? / beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::max_abs_diff;
    use crate::symplectic::{random_symplectic, squeezer};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn validity_examples() {
        assert!(validate_state(&GaussianState::vacuum(1), 1e-9).unwrap());
        let bad = GaussianState::centered(RMat::from_diagonal_element(2, 2, 0.5)).unwrap();
        assert!(!validate_state(&bad, 1e-9).unwrap());
        // ν = √(4·0.3) = √1.2
        let ok = GaussianState::centered(RMat::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 0.3]))
            .unwrap();
        assert!(validate_state(&ok, 1e-9).unwrap());
        assert_relative_eq!(
            symplectic_eigenvalues(&ok.cm).unwrap()[0],
            1.2_f64.sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn validate_dimension_mismatch() {
        let mut s = GaussianState::vacuum(1);
        s.n_modes = 2;
        assert!(matches!(validate_state(&s, 1e-9), Err(GtoError::Dimension(_))));
    }

    #[test]
    fn nu_of_values() {
        assert_relative_eq!(nu_of(3.0_f64.ln(), 1.0).unwrap(), 2.0, epsilon = 1e-15);
        // (e + 1)/(e − 1)
        assert_relative_eq!(nu_of(1.0, 1.0).unwrap(), 2.163_953_413_738_653, epsilon = 1e-14);
        assert_relative_eq!(nu_of(100.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(nu_of(0.0, 1.0).is_err());
        assert!(nu_of(1.0, -1.0).is_err());
        let grid: Vec<f64> = (1..200).map(|k| nu_of(0.05 * k as f64, 1.0).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[1] < w[0]));
        assert!(grid.iter().all(|&v| v > 1.0));
    }

    #[test]
    fn thermal_state_examples() {
        let beta = 3.0_f64.ln();
        let ham = HamiltonianSpec::new(RMat::identity(2, 2)).unwrap();
        let st = thermal_state(beta, &ham).unwrap();
        assert!(max_abs_diff(&st.cm, &(RMat::identity(2, 2) * 2.0)) < 1e-14);

        // H = S Sᵀ with S = diag(2, 1/2): cm = 2 S Sᵀ = 2 diag(4, 1/4)
        let s = squeezer(2.0);
        let ham = HamiltonianSpec::new(&s * s.transpose()).unwrap();
        let st = thermal_state(beta, &ham).unwrap();
        let expect = RMat::from_row_slice(2, 2, &[8.0, 0.0, 0.0, 0.5]);
        assert!(max_abs_diff(&st.cm, &expect) < 1e-12);
        assert!(validate_state(&st, 1e-9).unwrap());

        let cold = thermal_state(200.0, &ham).unwrap();
        assert!(max_abs_diff(&cold.cm, &(&s * s.transpose())) < 1e-12);
    }

    #[test]
    fn thermal_state_keeps_center() {
        let ham = HamiltonianSpec::new(RMat::identity(2, 2))
            .unwrap()
            .with_center(RVec::from_vec(vec![1.0, -2.0]))
            .unwrap();
        let st = thermal_state(1.0, &ham).unwrap();
        assert_eq!(st.first_moments, RVec::from_vec(vec![1.0, -2.0]));
    }

    #[test]
    fn non_positive_hamiltonian_is_rejected() {
        let ham = HamiltonianSpec::new(RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!(matches!(thermal_state(1.0, &ham), Err(GtoError::Domain(_))));
    }

    #[test]
    fn spectrum_examples() {
        let one = normal_mode_spectrum(&HamiltonianSpec::new(RMat::identity(4, 4)).unwrap(), FREQ_TOL)
            .unwrap();
        assert_eq!(one.sectors.len(), 1);
        assert_eq!(one.sectors[0].multiplicity, 2);
        assert_relative_eq!(one.sectors[0].omega, 1.0, epsilon = 1e-12);

        let h = RMat::from_diagonal(&RVec::from_vec(vec![1.0, 1.0, 2.0, 2.0]));
        let two = normal_mode_spectrum(&HamiltonianSpec::new(h).unwrap(), FREQ_TOL).unwrap();
        assert_eq!(two.sectors.len(), 2);
        let mut oms: Vec<f64> = two.sectors.iter().map(|s| s.omega).collect();
        oms.sort_by(f64::total_cmp);
        assert_relative_eq!(oms[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(oms[1], 2.0, epsilon = 1e-12);
        assert!(two.sectors.iter().all(|s| s.multiplicity == 1));

        let s = random_symplectic(2, 4);
        let h = &s * s.transpose();
        let spec = normal_mode_spectrum(&HamiltonianSpec::new(h.clone()).unwrap(), FREQ_TOL).unwrap();
        assert_eq!(spec.sectors.len(), 1);
        assert_eq!(spec.sectors[0].multiplicity, 2);
        // S⁻¹ H S⁻ᵀ = ⊕ ω 𝟙
        let sinv = crate::symplectic::symplectic_inverse(&spec.s);
        let normal = &sinv * &h * sinv.transpose();
        assert!(max_abs_diff(&normal, &spec.normal_form()) < 1e-9);
        spec.check().unwrap();
    }

    #[test]
    fn single_mode_decompose_examples() {
        let f = single_mode_decompose(&(RMat::identity(2, 2) * 3.0)).unwrap();
        assert_eq!(f, SingleModeNormalForm { nu: 3.0, z: 1.0, phi: 0.0 });
        let f = single_mode_decompose(&RMat::from_row_slice(2, 2, &[8.0, 0.0, 0.0, 0.5])).unwrap();
        assert_relative_eq!(f.nu, 2.0, epsilon = 1e-14);
        assert_relative_eq!(f.z, 4.0, epsilon = 1e-14);
        assert_relative_eq!(f.phi, 0.0, epsilon = 1e-14);
        let orig = SingleModeNormalForm { nu: 2.0, z: 4.0, phi: 1.1 };
        let back = single_mode_decompose(&orig.reconstruct()).unwrap();
        assert_relative_eq!(back.nu, 2.0, epsilon = 1e-12);
        assert_relative_eq!(back.z, 4.0, epsilon = 1e-12);
        assert_relative_eq!(back.phi, 1.1, epsilon = 1e-12);
        assert!(single_mode_decompose(&RMat::identity(2, 2).scale(0.5)).is_err());
        assert!(single_mode_decompose(&RMat::identity(4, 4)).is_err());
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(1.0).unwrap(), 0.0);
        assert_relative_eq!(entropy(3.0).unwrap(), 2.0 * 2.0_f64.ln(), epsilon = 1e-15);
        assert!(entropy(0.99).is_err());
        let grid: Vec<f64> = (0..=900).map(|k| entropy(1.01 + 0.01 * k as f64).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
        assert!(entropy(1.0 + 1e-12).unwrap() < 1e-9);
    }

    #[test]
    fn free_energy_values() {
        assert_relative_eq!(free_energy(1.0, 1.0, 2.0, 1.5).unwrap(), 0.75, epsilon = 1e-15);
        let f1 = free_energy(2.0, 1.5, 1.0, 1.0).unwrap();
        let f2 = free_energy(2.0, 2.5, 1.0, 1.0).unwrap();
        assert!(f2 > f1);
        assert!(free_energy(2.0, 0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn free_energy_minimised_at_bath_value() {
        let (beta, omega) = (0.7, 1.3);
        let target = nu_of(beta, omega).unwrap();
        let step = 1e-4;
        let best = (0..200_000)
            .map(|k| 1.0 + step * k as f64)
            .min_by(|a, b| {
                free_energy(*a, 1.0, beta, omega)
                    .unwrap()
                    .total_cmp(&free_energy(*b, 1.0, beta, omega).unwrap())
            })
            .unwrap();
        assert!((best - target).abs() <= step);
    }

    proptest! {
        #[test]
        fn decompose_round_trip(nu in 1.0f64..20.0, z in 1.0f64..50.0, phi in 0.0f64..std::f64::consts::PI) {
            let orig = SingleModeNormalForm { nu, z, phi };
            let back = single_mode_decompose(&orig.reconstruct()).unwrap();
            prop_assert!((back.nu - nu).abs() <= 1e-10 * nu);
            prop_assert!(max_abs_diff(&back.reconstruct(), &orig.reconstruct()) <= 1e-10 * nu * z);
        }

        #[test]
        fn entropy_invariant_under_gaussian_unitaries(nu in 1.0f64..10.0, seed in 0u64..1000) {
            let s = random_symplectic(1, seed);
            let cm = &s * (RMat::identity(2, 2) * nu) * s.transpose();
            let back = single_mode_decompose(&cm).unwrap();
            prop_assert!((back.nu - nu).abs() <= 1e-9 * nu);
            prop_assert!((entropy(back.nu.max(1.0)).unwrap() - entropy(nu).unwrap()).abs() <= 1e-9 * (1.0 + entropy(nu).unwrap()));
        }

        #[test]
        fn thermal_states_are_valid(beta in 0.05f64..10.0, seed in 0u64..500) {
            let s = random_symplectic(2, seed);
            let ham = HamiltonianSpec::new(&s * s.transpose()).unwrap();
            let st = thermal_state(beta, &ham).unwrap();
            prop_assert!(validate_state(&st, 1e-9).unwrap());
        }
    }
}
