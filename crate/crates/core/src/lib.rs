//! Gaussian thermal operations (GTOs) on bosonic modes in the covariance-matrix
//! formalism.
//!
//! The crate is organised bottom-up:
//!
//! * [`symplectic`]: symplectic form, passive (orthosymplectic) matrices and their
//!   unitary representation, Williamson normal form, off-diagonal triangularisation
//!   and the cosine-sine decomposition.
//! * [`states`]: Gaussian states, thermal states, normal-mode spectra of quadratic
//!   Hamiltonians, single-mode normal forms, entropy and free energy.
//! * [`channels`]: Gaussian CP maps `σ ↦ XσXᵀ + Y`, the passive/loss/passive
//!   parametrisation of GTOs and a brute-force dilation oracle.
//! * [`feasibility`]: single-mode state-transformation criteria, including
//!   squeezed baths.
//! * [`cooling`]: algorithmic-cooling protocols and the entropy bound they obey.
//! * [`thermo`]: thermo-majorization curves for geometric distributions.
//! * [`sweeps`]: seeded batch checks used by the `selftest` command and benches.
//!
//! Phase-space vectors use mode-major ordering `(x₁, p₁, x₂, p₂, …)`, with
//! `ħ = k_B = 1` and the vacuum covariance matrix equal to the identity.

pub mod channels;
pub mod cooling;
pub mod error;
pub mod exec;
pub mod feasibility;
pub mod matrix;
pub mod states;
pub mod sweeps;
pub mod symplectic;
pub mod thermo;

pub use error::{GtoError, Result};
pub use matrix::{CMat, RMat, RVec};
