//! Algorithmic cooling of a single mode with Gaussian unitaries interleaved
//! with GTOs, and the sideband swap that escapes the resulting entropy bound.

use serde::{Deserialize, Serialize};

use crate::channels::{apply_unchecked, dilate_and_trace, single_mode_gto};
use crate::error::{GtoError, Result};
use crate::exec::ExecMode;
use crate::matrix::RMat;
use crate::states::{entropy, nu_of, validate_state, GaussianState};
use crate::symplectic::{
    beam_splitter, is_symplectic, rotation, squeezer, symplectic_inverse, STRUCTURAL_TOL,
};

/// Entropy slack used for the `violated` flag.
pub const ENTROPY_TOL: f64 = 1e-9;

/// Number of rotation angles tried per adversary round.
pub const ADVERSARY_ROTATIONS: usize = 32;
/// Number of `p` values tried per adversary round.
pub const ADVERSARY_PS: usize = 64;
/// Upper end of the log-spaced squeeze-factor grid.
pub const ADVERSARY_MAX_SQUEEZE: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct ProtocolStep {
    pub unitary: RMat,
    pub gto_p: f64,
    pub gto_phi: f64,
}

impl ProtocolStep {
    pub fn new(unitary: RMat, gto_p: f64, gto_phi: f64) -> Result<Self> {
        if unitary.shape() != (2, 2) || !is_symplectic(&unitary, STRUCTURAL_TOL)? {
            return Err(GtoError::invalid("step unitary must be a 2x2 symplectic"));
        }
        if !(0.0..=1.0).contains(&gto_p) || !gto_phi.is_finite() {
            return Err(GtoError::invalid(format!("need p in [0, 1] and finite φ, got p={gto_p}")));
        }
        Ok(ProtocolStep { unitary, gto_p, gto_phi })
    }
}

/// Wire format of a step: unitary `D_rotate · diag(e^r, e^{−r})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    #[serde(default)]
    pub squeeze: f64,
    #[serde(default)]
    pub rotate: f64,
    pub p: f64,
    #[serde(default)]
    pub phi: f64,
}

impl StepParams {
    pub fn to_step(&self) -> Result<ProtocolStep> {
        if !self.squeeze.is_finite() || !self.rotate.is_finite() {
            return Err(GtoError::invalid("squeeze and rotate must be finite"));
        }
        ProtocolStep::new(
            rotation(self.rotate) * squeezer(self.squeeze.exp()),
            self.p,
            self.phi,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub nu: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoolingTrace {
    /// Row 0 is the initial state.
    pub steps: Vec<TraceRow>,
    pub bound: f64,
    pub violated: bool,
}

impl CoolingTrace {
    fn new(nu_0: f64, nu_b: f64) -> Result<Self> {
        Ok(CoolingTrace {
            steps: vec![TraceRow { step: 0, nu: nu_0, entropy: entropy(nu_0.max(1.0))? }],
            bound: entropy_lower_bound(nu_0.max(1.0), nu_b)?,
            violated: false,
        })
    }

    fn push(&mut self, nu: f64) -> Result<()> {
        let s = entropy(nu.max(1.0))?;
        if s < self.bound - ENTROPY_TOL {
            self.violated = true;
        }
        self.steps.push(TraceRow { step: self.steps.len(), nu, entropy: s });
        Ok(())
    }

    pub fn final_nu(&self) -> f64 {
        self.steps.last().map(|r| r.nu).unwrap_or(f64::NAN)
    }

    pub fn min_nu(&self) -> f64 {
        self.steps.iter().map(|r| r.nu).fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,nu,entropy,bound,violated\n");
        for r in &self.steps {
            let bad = r.entropy < self.bound - ENTROPY_TOL;
            out.push_str(&format!("{},{},{},{},{}\n", r.step, r.nu, r.entropy, self.bound, bad));
        }
        out
    }
}

fn single_mode_nu(cm: &RMat) -> f64 {
    (cm[(0, 0)] * cm[(1, 1)] - cm[(0, 1)] * cm[(1, 0)]).max(0.0).sqrt()
}

/// `ν` after `σ ↦ p σ + (1 − p) ν_b 𝟙` in the bath frame, from
/// `det(pA + q𝟙) = p² det A + p q tr A + q²`. Unlike `ad − b²` this has no
/// cancellation when `σ` is strongly squeezed.
fn mixed_nu(nu: f64, trace: f64, p: f64, nu_b: f64) -> f64 {
    let q = (1.0 - p) * nu_b;
    (p * p * nu * nu + p * q * trace + q * q).sqrt()
}

/// `S(min(ν₀, ν_b))`.
pub fn entropy_lower_bound(nu_0: f64, nu_b: f64) -> Result<f64> {
    if !(nu_0 >= 1.0) || !(nu_b >= 1.0) {
        return Err(GtoError::domain(format!("need ν₀, ν_b ≥ 1, got {nu_0}, {nu_b}")));
    }
    entropy(nu_0.min(nu_b))
}

/// Alternate `σ ↦ UσUᵀ` with the single-mode GTO `(p, φ, ν_b, S)` per step.
pub fn run_protocol(
    initial: &GaussianState,
    steps: &[ProtocolStep],
    nu_b: f64,
    s: &RMat,
) -> Result<CoolingTrace> {
    initial.check_dims()?;
    if initial.n_modes != 1 {
        return Err(GtoError::dim("cooling protocols act on a single mode"));
    }
    if !validate_state(initial, STRUCTURAL_TOL)? {
        return Err(GtoError::invalid("initial state is not valid"));
    }
    let mut nu = single_mode_nu(&initial.cm);
    let mut trace = CoolingTrace::new(nu, nu_b)?;
    let mut state = initial.clone();
    let s_inv = symplectic_inverse(s);
    for (k, step) in steps.iter().enumerate() {
        let ch = single_mode_gto(step.gto_p, step.gto_phi, nu_b, s)
            .map_err(|e| GtoError::invalid(format!("step {k}: {e}")))?;
        let u = &step.unitary;
        state.cm = u * &state.cm * u.transpose();
        state.first_moments = u * &state.first_moments;
        let frame_trace = (&s_inv * &state.cm * s_inv.transpose()).trace();
        nu = mixed_nu(nu, frame_trace, step.gto_p, nu_b);
        state = apply_unchecked(&ch, &state);
        trace.push(nu)?;
    }
    Ok(trace)
}

/// Candidate squeeze factors `10^{k/(count−1)}`, or just `1` when `count = 1`.
fn squeeze_grid(count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![1.0];
    }
    let top = ADVERSARY_MAX_SQUEEZE.ln();
    (0..count)
        .map(|k| (top * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Greedy search over `(squeeze, rotation, p)` minimising the post-step `ν`,
/// starting from the thermal state `ν₀` with an unsqueezed bath frame.
///
/// The GTO phase is fixed to zero since it cannot change `ν`. Candidates are
/// scored with the closed-form `ν` of `p σ_U + (1 − p) ν_b 𝟙`; ties go to the
/// lowest candidate index, so the result does not depend on `mode`.
pub fn greedy_adversary(
    nu_0: f64,
    nu_b: f64,
    n_steps: usize,
    search_grid: usize,
    mode: ExecMode,
) -> Result<(CoolingTrace, Vec<StepParams>)> {
    if n_steps == 0 {
        return Err(GtoError::domain("adversary needs at least one step"));
    }
    let mut state = GaussianState::thermal_single_mode(nu_0);
    let mut trace = CoolingTrace::new(nu_0, nu_b)?;
    let squeezes = squeeze_grid(search_grid);
    let n_unitaries = squeezes.len() * ADVERSARY_ROTATIONS;
    let mut chosen = Vec::with_capacity(n_steps);
    let mut nu = nu_0;
    for _ in 0..n_steps {
        let cm = state.cm.clone();
        let best_per_unitary = mode.map_indexed(n_unitaries, |idx| {
            let (si, ri) = (idx / ADVERSARY_ROTATIONS, idx % ADVERSARY_ROTATIONS);
            let angle = std::f64::consts::PI * ri as f64 / ADVERSARY_ROTATIONS as f64;
            let u = rotation(angle) * squeezer(squeezes[si]);
            let tr = (&u * &cm * u.transpose()).trace();
            let mut best = (f64::INFINITY, 0usize);
            for pi in 0..ADVERSARY_PS {
                let p = pi as f64 / (ADVERSARY_PS - 1) as f64;
                let cand = mixed_nu(nu, tr, p, nu_b);
                if cand < best.0 {
                    best = (cand, pi);
                }
            }
            (best.0, idx * ADVERSARY_PS + best.1)
        });
        let (best_nu, flat) = best_per_unitary
            .into_iter()
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .expect("non-empty candidate grid");
        let (idx, pi) = (flat / ADVERSARY_PS, flat % ADVERSARY_PS);
        let (si, ri) = (idx / ADVERSARY_ROTATIONS, idx % ADVERSARY_ROTATIONS);
        let params = StepParams {
            squeeze: squeezes[si].ln(),
            rotate: std::f64::consts::PI * ri as f64 / ADVERSARY_ROTATIONS as f64,
            p: pi as f64 / (ADVERSARY_PS - 1) as f64,
            phi: 0.0,
        };
        let step = params.to_step()?;
        let ch = single_mode_gto(step.gto_p, 0.0, nu_b, &RMat::identity(2, 2))?;
        state.cm = &step.unitary * &state.cm * step.unitary.transpose();
        state = apply_unchecked(&ch, &state);
        nu = best_nu;
        trace.push(nu)?;
        chosen.push(params);
    }
    Ok((trace, chosen))
}

/// Swap the system with a thermal ancilla at frequency `ω_a` through a full
/// beam splitter. Returns the new system state and its symplectic eigenvalue.
pub fn sideband_swap(
    system: &GaussianState,
    beta: f64,
    omega_ancilla: f64,
) -> Result<(GaussianState, f64)> {
    system.check_dims()?;
    if system.n_modes != 1 {
        return Err(GtoError::dim("sideband swap acts on a single system mode"));
    }
    if !validate_state(system, STRUCTURAL_TOL)? {
        return Err(GtoError::invalid("system state is not valid"));
    }
    let nu_a = nu_of(beta, omega_ancilla)?;
    let swap = beam_splitter(std::f64::consts::FRAC_PI_2);
    let cm = dilate_and_trace(&system.cm, &swap, &[nu_a])?;
    let first_moments = swap.view((0, 0), (2, 2)) * &system.first_moments;
    let nu = single_mode_nu(&cm);
    Ok((GaussianState { n_modes: 1, first_moments, cm }, nu))
}
