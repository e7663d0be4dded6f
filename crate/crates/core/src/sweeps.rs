//! Seeded batch checks.
//!
//! Each suite draws every case from `derive_seed(seed, index)` and fans the
//! cases out through an [`ExecMode`], so reports are identical whichever mode
//! runs them. The `selftest` command, the acceptance tests and the benches all
//! drive these functions.

use rand::Rng;
use serde::Serialize;

use crate::channels::{apply_channel, dilate_and_trace, gto_to_channel, single_mode_gto, GtoSpec, SectorOp};
use crate::cooling::{greedy_adversary, run_protocol, sideband_swap, StepParams};
use crate::exec::{derive_seed, ExecMode};
use crate::feasibility::{single_mode_feasible, TransformQuery, FEASIBILITY_TOL};
use crate::matrix::{direct_sum, max_abs, max_abs_c, max_abs_diff, RMat, RVec};
use crate::states::{
    free_energy, nu_of, single_mode_decompose, FrequencySpectrum, GaussianState, SingleModeNormalForm,
};
use crate::symplectic::{
    beam_splitter, build_isotropy_element, cosine_sine_decompose, is_symplectic, omega,
    passive_to_unitary, random_passive, random_symplectic, random_unitary, seeded_rng, williamson,
    RECONSTRUCTION_TOL,
};
use crate::thermo::{cross_check, cutoff_for, DEFAULT_TAIL_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest error seen, in the suite's own units.
    pub max_error: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }

    fn from_errors(name: &'static str, errors: &[f64], limit: f64) -> Self {
        SuiteReport {
            name,
            cases: errors.len(),
            failures: errors.iter().filter(|e| !(**e <= limit)).count(),
            max_error: errors.iter().cloned().fold(0.0, f64::max),
        }
    }

    fn from_flags(name: &'static str, ok: &[bool]) -> Self {
        SuiteReport {
            name,
            cases: ok.len(),
            failures: ok.iter().filter(|b| !**b).count(),
            max_error: 0.0,
        }
    }
}

/// Symmetric positive CM `S (⊕ ν_j 𝟙₂) Sᵀ` with random `S` and `ν_j ∈ [1, 5]`.
pub fn random_cm(n_modes: usize, seed: u64) -> RMat {
    let mut rng = seeded_rng(derive_seed(seed, 0));
    let nus: Vec<RMat> = (0..n_modes)
        .map(|_| RMat::identity(2, 2) * rng.random_range(1.0..5.0))
        .collect();
    let s = random_symplectic(n_modes, derive_seed(seed, 1));
    &s * direct_sum(&nus) * s.transpose()
}

/// Worked example: `(ν, z) = (2, 4) → (5/2, 2)` with `ν_b = 2` at `p = 1/2`,
/// checked both as a feasibility verdict and by forward simulation.
pub fn worked_example() -> SuiteReport {
    let q = TransformQuery::new(2.0, 4.0, 2.5, 2.0, 2.0);
    let p_err = match single_mode_feasible(&q, FEASIBILITY_TOL) {
        Ok(r) if r.feasible => (r.p.unwrap_or(f64::NAN) - 0.5).abs(),
        _ => f64::INFINITY,
    };
    let input = SingleModeNormalForm { nu: 2.0, z: 4.0, phi: 0.0 }.reconstruct();
    let target = SingleModeNormalForm { nu: 2.5, z: 2.0, phi: 0.0 }.reconstruct();
    let sim_err = single_mode_gto(0.5, 0.0, 2.0, &RMat::identity(2, 2))
        .and_then(|ch| apply_channel(&ch, &GaussianState::centered(input)?))
        .map(|out| max_abs_diff(&out.cm, &target))
        .unwrap_or(f64::INFINITY);
    SuiteReport::from_errors("worked-example", &[p_err, sim_err], 1e-10)
}

/// Closed-form GTO from the cosine-sine decomposition of a random passive `O`
/// against explicit dilation by `O`, on `n + n` modes for `n = 1, 2, 3`.
pub fn oracle_equivalence(seed: u64, per_n: usize, inputs: usize, mode: ExecMode) -> SuiteReport {
    let cases: Vec<(usize, usize)> = (1..=3).flat_map(|n| (0..per_n).map(move |k| (n, k))).collect();
    let errors = mode.map_slice(&cases, |&(n, k)| {
        let case_seed = derive_seed(seed, (n * 1_000_000 + k) as u64);
        let mut rng = seeded_rng(case_seed);
        let beta = rng.random_range(0.2..3.0);
        let omega_s = rng.random_range(0.5..2.0);
        let o = random_passive(2 * n, derive_seed(case_seed, 1));
        let result = (|| {
            let csd = cosine_sine_decompose(&passive_to_unitary(&o)?)?;
            let spec = GtoSpec {
                spectrum: FrequencySpectrum::uniform(omega_s, n),
                beta,
                sectors: vec![SectorOp { z: csd.z, thetas: csd.thetas, w: csd.w }],
            };
            let ch = gto_to_channel(&spec)?;
            let bath = vec![nu_of(beta, omega_s)?; n];
            let mut worst: f64 = 0.0;
            for j in 0..inputs {
                let sigma = random_cm(n, derive_seed(case_seed, 100 + j as u64));
                let closed = &ch.x * &sigma * ch.x.transpose() + &ch.y;
                let dilated = dilate_and_trace(&sigma, &o, &bath)?;
                worst = worst.max(max_abs_diff(&closed, &dilated));
            }
            Ok::<f64, crate::GtoError>(worst)
        })();
        result.unwrap_or(f64::INFINITY)
    });
    SuiteReport::from_errors("oracle-equivalence", &errors, 1e-8)
}

/// Williamson reconstruction on 1..=6 modes; error relative to `‖P‖_max`.
pub fn williamson_roundtrip(seed: u64, count: usize, mode: ExecMode) -> SuiteReport {
    let errors = mode.map_indexed(count, |k| {
        let n = 1 + k % 6;
        let p = random_cm(n, derive_seed(seed, k as u64));
        match williamson(&p, 1e-9) {
            Ok(w) if is_symplectic(&w.s, 1e-7).unwrap_or(false) => {
                max_abs_diff(&w.reconstruct(), &p) / max_abs(&p)
            }
            _ => f64::INFINITY,
        }
    });
    SuiteReport::from_errors("williamson-roundtrip", &errors, RECONSTRUCTION_TOL)
}

/// Cosine-sine reconstruction of Haar unitaries of size 2..=12.
pub fn csd_roundtrip(seed: u64, count: usize, mode: ExecMode) -> SuiteReport {
    let errors = mode.map_indexed(count, |k| {
        let dim = 2 * (1 + k % 6);
        let u = random_unitary(dim, derive_seed(seed, k as u64));
        match cosine_sine_decompose(&u) {
            Ok(f) => max_abs_c(&(f.reconstruct() - &u)),
            Err(_) => f64::INFINITY,
        }
    });
    SuiteReport::from_errors("csd-roundtrip", &errors, 1e-9)
}

/// Sector-wise passive maps preserve `Y = ⊕ ω_l 𝟙` and commute with `YΩ`; a
/// beam splitter joining two sectors must not (negative control).
pub fn isotropy(seed: u64, count: usize, mode: ExecMode) -> SuiteReport {
    let ok = mode.map_indexed(count, |k| {
        let mut rng = seeded_rng(derive_seed(seed, k as u64));
        let n_sectors = rng.random_range(2..=3usize);
        let mults: Vec<usize> = (0..n_sectors).map(|_| rng.random_range(1..=3usize)).collect();
        let blocks: Vec<_> = mults
            .iter()
            .enumerate()
            .map(|(l, &d)| random_unitary(d, derive_seed(seed, (k * 8 + l) as u64 + 1_000_000)))
            .collect();
        let diag: Vec<f64> = mults
            .iter()
            .enumerate()
            .flat_map(|(l, &d)| std::iter::repeat_n(1.0 + l as f64 + rng.random_range(0.0..0.5), 2 * d))
            .collect();
        let y = RMat::from_diagonal(&RVec::from_vec(diag));
        let n: usize = mults.iter().sum();
        let Ok(kk) = build_isotropy_element(&mults, &blocks) else {
            return false;
        };
        let yo = &y * omega(n);
        let preserved = max_abs_diff(&(&kk * &y * kk.transpose()), &y) <= 1e-10
            && max_abs(&(&kk * &yo - &yo * &kk)) <= 1e-10;
        // mix the last mode of sector 0 with the first mode of sector 1
        let a = mults[0] - 1;
        let theta = rng.random_range(0.2..1.3);
        let mut mixer = RMat::identity(2 * n, 2 * n);
        let bs = beam_splitter(theta);
        for i in 0..2 {
            for j in 0..2 {
                for (bi, gi) in [(0, a), (1, a + 1)] {
                    for (bj, gj) in [(0, a), (1, a + 1)] {
                        mixer[(2 * gi + i, 2 * gj + j)] = bs[(2 * bi + i, 2 * bj + j)];
                    }
                }
            }
        }
        let bad = &mixer * &kk;
        let rejected = max_abs_diff(&(&bad * &y * bad.transpose()), &y) > 1e-6;
        preserved && rejected
    });
    SuiteReport::from_flags("isotropy", &ok)
}

/// Forward-simulated targets must be judged feasible with the generating `p`;
/// targets breaking a necessary bound must be rejected.
pub fn feasibility_sweep(seed: u64, forward: usize, violating: usize, mode: ExecMode) -> SuiteReport {
    let errors = mode.map_indexed(forward, |k| {
        let mut rng = seeded_rng(derive_seed(seed, k as u64));
        let nu_i = rng.random_range(1.0..10.0);
        let z_i = rng.random_range(1.0..10.0);
        let nu_b = rng.random_range(1.0..10.0);
        let p = rng.random_range(0.0..=1.0);
        let phi = rng.random_range(0.0..std::f64::consts::PI);
        let res = (|| {
            // simulate in a rotated frame: the verdict must not depend on φ
            let input = SingleModeNormalForm { nu: nu_i, z: z_i, phi }.reconstruct();
            let ch = single_mode_gto(p, 0.0, nu_b, &RMat::identity(2, 2))?;
            let out = apply_channel(&ch, &GaussianState::centered(input)?)?;
            let nf = single_mode_decompose(&out.cm)?;
            let q = TransformQuery::new(nu_i, z_i, nf.nu, nf.z, nu_b);
            let r = single_mode_feasible(&q, FEASIBILITY_TOL)?;
            Ok::<f64, crate::GtoError>(if r.feasible { (r.p.unwrap() - p).abs() } else { f64::INFINITY })
        })();
        res.unwrap_or(f64::INFINITY)
    });
    let rejected = mode.map_indexed(violating, |k| {
        let mut rng = seeded_rng(derive_seed(seed, (forward + k) as u64 + (1 << 40)));
        let nu_i: f64 = rng.random_range(1.5..10.0);
        let z_i = rng.random_range(1.0..10.0);
        let nu_b = rng.random_range(1.5..10.0);
        let q = if k % 2 == 0 {
            let floor = nu_i.min(nu_b);
            let nu_f = 1.0 + (floor - 1.0) * rng.random_range(0.0..0.95);
            TransformQuery::new(nu_i, z_i, nu_f, rng.random_range(1.0..=z_i), nu_b)
        } else {
            let nu_f = rng.random_range(nu_i.min(nu_b)..=nu_i.max(nu_b));
            TransformQuery::new(nu_i, z_i, nu_f, z_i * rng.random_range(1.01..3.0), nu_b)
        };
        matches!(single_mode_feasible(&q, FEASIBILITY_TOL), Ok(r) if !r.feasible)
    });
    let mut report = SuiteReport::from_errors("feasibility", &errors, 1e-8);
    report.cases += rejected.len();
    report.failures += rejected.iter().filter(|b| !**b).count();
    report
}

/// For `z = 1`, feasibility iff `ν_f` lies between `ν_b` and `ν_i`, on a
/// `k × k × k` grid of `ν ∈ [1, 6]`.
pub fn unsqueezed_grid(k: usize, mode: ExecMode) -> SuiteReport {
    let grid: Vec<f64> = (0..k).map(|i| 1.0 + 5.0 * i as f64 / (k - 1).max(1) as f64).collect();
    let ok = mode.map_indexed(k * k * k, |idx| {
        let (a, b, c) = (idx / (k * k), (idx / k) % k, idx % k);
        let (nu_i, nu_f, nu_b) = (grid[a], grid[b], grid[c]);
        let expect = nu_i.min(nu_b) <= nu_f && nu_f <= nu_i.max(nu_b);
        let q = TransformQuery::new(nu_i, 1.0, nu_f, 1.0, nu_b);
        matches!(single_mode_feasible(&q, FEASIBILITY_TOL), Ok(r) if r.feasible == expect)
    });
    SuiteReport::from_flags("unsqueezed-interval", &ok)
}

/// Random and adversarial Gaussian protocols from `ν₀ = 5` against a bath at
/// `ν_b = 2`, plus the exact fixed point at `ν₀ = ν_b`. The error is how far
/// the lowest `ν` reached dips below `ν_b`.
pub fn cooling_bound(
    seed: u64,
    protocols: usize,
    steps: usize,
    adversary_rounds: usize,
    mode: ExecMode,
) -> SuiteReport {
    let (nu_0, nu_b) = (5.0, 2.0);
    let mut errors = mode.map_indexed(protocols, |k| {
        let case_seed = derive_seed(seed, k as u64);
        let mut rng = seeded_rng(case_seed);
        let frame = random_symplectic(1, derive_seed(case_seed, 1));
        let res = (|| {
            let protocol = (0..steps)
                .map(|_| {
                    StepParams {
                        squeeze: rng.random_range(-1.0..1.0),
                        rotate: rng.random_range(0.0..std::f64::consts::TAU),
                        p: rng.random_range(0.0..=1.0),
                        phi: rng.random_range(0.0..std::f64::consts::TAU),
                    }
                    .to_step()
                })
                .collect::<crate::Result<Vec<_>>>()?;
            let t = run_protocol(&GaussianState::thermal_single_mode(nu_0), &protocol, nu_b, &frame)?;
            Ok::<f64, crate::GtoError>(if t.violated { f64::INFINITY } else { (nu_b - t.min_nu()).max(0.0) })
        })();
        res.unwrap_or(f64::INFINITY)
    });
    if adversary_rounds > 0 {
        errors.push(match greedy_adversary(nu_0, nu_b, adversary_rounds, 16, mode) {
            Ok((t, _)) if !t.violated => (nu_b - t.min_nu()).max(0.0),
            _ => f64::INFINITY,
        });
    }
    let mut report = SuiteReport::from_errors("cooling-bound", &errors, 1e-6);
    // fixed point: no unitary, p < 1, start at the bath value
    let fixed = (0..steps.max(1))
        .map(|j| StepParams { squeeze: 0.0, rotate: 0.0, p: j as f64 / (steps.max(1) as f64 + 1.0), phi: 0.3 * j as f64 }.to_step())
        .collect::<crate::Result<Vec<_>>>()
        .and_then(|p| run_protocol(&GaussianState::thermal_single_mode(nu_b), &p, nu_b, &RMat::identity(2, 2)));
    let exact = matches!(&fixed, Ok(t) if t.steps.iter().all(|r| (r.nu - nu_b).abs() <= 4.0 * f64::EPSILON * nu_b));
    report.cases += 1;
    report.failures += usize::from(!exact);
    report
}

/// Sideband swap: achieved `ν` equals the ancilla's thermal value, and drops
/// below 1.001 once `βω_a ≥ 8`.
pub fn sideband(seed: u64, count: usize) -> SuiteReport {
    let mut rng = seeded_rng(seed);
    let errors: Vec<f64> = (0..count)
        .map(|k| {
            let beta = rng.random_range(0.2..3.0);
            let x = if k % 2 == 0 { rng.random_range(0.1..8.0) } else { rng.random_range(8.0..30.0) };
            let sys = GaussianState::thermal_single_mode(rng.random_range(1.0..10.0));
            match (sideband_swap(&sys, beta, x / beta), nu_of(beta, x / beta)) {
                (Ok((_, nu)), Ok(expect)) => {
                    let err = (nu - expect).abs();
                    if x >= 8.0 && nu >= 1.001 {
                        f64::INFINITY
                    } else {
                        err
                    }
                }
                _ => f64::INFINITY,
            }
        })
        .collect();
    SuiteReport::from_errors("sideband", &errors, 1e-12)
}

/// Draw `(β_i, β_f, β, E)` with `β_f` either inside the closed interval
/// between `β_i` and `β` or outside it by at least 10%.
fn thermo_case(seed: u64) -> (f64, f64, f64, f64) {
    let mut rng = seeded_rng(seed);
    let beta: f64 = rng.random_range(0.3..3.0);
    let beta_i = rng.random_range(0.3..3.0);
    let e = rng.random_range(0.5..2.0);
    let (lo, hi) = (beta.min(beta_i), beta.max(beta_i));
    let beta_f = match rng.random_range(0..4u8) {
        0 => lo + (hi - lo) * rng.random_range(0.0..=1.0),
        1 => [lo, hi, beta_i, beta][rng.random_range(0..4usize)],
        2 => lo * rng.random_range(0.3..0.9),
        _ => hi * rng.random_range(1.1..2.0),
    };
    (beta_i, beta_f, beta, e)
}

/// Thermo-majorization dominance against the Gaussian criterion, at the
/// minimal adequate cutoff and at twice that cutoff.
pub fn thermo_agreement(seed: u64, count: usize, mode: ExecMode) -> SuiteReport {
    let ok = mode.map_indexed(count, |k| {
        let (bi, bf, b, e) = thermo_case(derive_seed(seed, k as u64));
        let n = cutoff_for(bi.min(bf).min(b), e, DEFAULT_TAIL_TOL);
        match (cross_check(bi, bf, b, e, n), cross_check(bi, bf, b, e, 2 * n)) {
            (Ok(r1), Ok(r2)) => r1.agree && r2.agree && r1.thermo_verdict == r2.thermo_verdict,
            _ => false,
        }
    });
    SuiteReport::from_flags("thermo-agreement", &ok)
}

/// Grid-minimise `F(ν)` at `z = 1` and compare with `ν_b`; the error is the
/// distance in grid steps.
pub fn free_energy_minimum(seed: u64, count: usize, grid: usize, mode: ExecMode) -> SuiteReport {
    let errors = mode.map_indexed(count, |k| {
        let mut rng = seeded_rng(derive_seed(seed, k as u64));
        let beta = rng.random_range(0.2..3.0);
        let omega_s = rng.random_range(0.2..3.0);
        let Ok(nu_b) = nu_of(beta, omega_s) else {
            return f64::INFINITY;
        };
        let top = 2.0 * nu_b + 5.0;
        let step = (top - 1.0) / (grid - 1) as f64;
        let mut best = (f64::INFINITY, 1.0);
        for j in 0..grid {
            let nu = 1.0 + step * j as f64;
            if let Ok(f) = free_energy(nu, 1.0, beta, omega_s) {
                if f < best.0 {
                    best = (f, nu);
                }
            }
        }
        (best.1 - nu_b).abs() / step
    });
    SuiteReport::from_errors("free-energy-minimum", &errors, 1.0)
}

/// Sample sizes for [`run_all`].
#[derive(Debug, Clone, Copy)]
pub struct SuiteSizes {
    pub oracle_per_n: usize,
    pub oracle_inputs: usize,
    pub roundtrips: usize,
    pub isotropy: usize,
    pub feasibility_forward: usize,
    pub feasibility_violating: usize,
    pub grid: usize,
    pub cooling_protocols: usize,
    pub cooling_steps: usize,
    pub adversary_rounds: usize,
    pub sideband: usize,
    pub thermo: usize,
    pub free_energy: usize,
    pub free_energy_grid: usize,
}

impl SuiteSizes {
    pub fn full() -> Self {
        SuiteSizes {
            oracle_per_n: 100,
            oracle_inputs: 10,
            roundtrips: 100,
            isotropy: 100,
            feasibility_forward: 10_000,
            feasibility_violating: 1_000,
            grid: 50,
            cooling_protocols: 10_000,
            cooling_steps: 10,
            adversary_rounds: 10,
            sideband: 100,
            thermo: 200,
            free_energy: 20,
            free_energy_grid: 100_001,
        }
    }

    pub fn quick() -> Self {
        SuiteSizes {
            oracle_per_n: 10,
            oracle_inputs: 3,
            roundtrips: 20,
            isotropy: 20,
            feasibility_forward: 500,
            feasibility_violating: 100,
            grid: 12,
            cooling_protocols: 200,
            cooling_steps: 10,
            adversary_rounds: 3,
            sideband: 20,
            thermo: 30,
            free_energy: 5,
            free_energy_grid: 10_001,
        }
    }
}

pub fn run_all(seed: u64, sizes: SuiteSizes, mode: ExecMode) -> Vec<SuiteReport> {
    vec![
        worked_example(),
        oracle_equivalence(derive_seed(seed, 2), sizes.oracle_per_n, sizes.oracle_inputs, mode),
        williamson_roundtrip(derive_seed(seed, 3), sizes.roundtrips, mode),
        csd_roundtrip(derive_seed(seed, 4), sizes.roundtrips, mode),
        isotropy(derive_seed(seed, 5), sizes.isotropy, mode),
        feasibility_sweep(derive_seed(seed, 6), sizes.feasibility_forward, sizes.feasibility_violating, mode),
        unsqueezed_grid(sizes.grid, mode),
        cooling_bound(derive_seed(seed, 8), sizes.cooling_protocols, sizes.cooling_steps, sizes.adversary_rounds, mode),
        sideband(derive_seed(seed, 9), sizes.sideband),
        thermo_agreement(derive_seed(seed, 10), sizes.thermo, mode),
        free_energy_minimum(derive_seed(seed, 11), sizes.free_energy, sizes.free_energy_grid, mode),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        for r in run_all(1, SuiteSizes::quick(), ExecMode::default()) {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn modes_agree() {
        let a = run_all(3, SuiteSizes::quick(), ExecMode::Sequential);
        let b = run_all(3, SuiteSizes::quick(), ExecMode::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn random_cm_is_valid() {
        for seed in 0..10 {
            let st = GaussianState::centered(random_cm(2, seed)).unwrap();
            assert!(crate::states::validate_state(&st, 1e-9).unwrap());
        }
    }
}
