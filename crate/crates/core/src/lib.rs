//! Exact single-excitation dynamics of two dipole-dipole coupled two-level
//! atoms sharing a Lorentzian (non-Markovian) reservoir with unequal
//! couplings.
//!
//! Three independent solvers are provided and are expected to agree:
//!
//! * [`characteristic`]: closed form from the roots of the characteristic
//!   cubic and their residues.
//! * [`dynamics::integrate_pseudomode`]: the local-in-time pseudomode ODEs
//!   integrated with an adaptive Dormand–Prince 5(4) pair.
//! * [`dynamics::integrate_volterra`]: the original memory-kernel
//!   integro-differential equations, discretized directly.
//!
//! [`analysis`] turns amplitudes into the reduced density matrix and
//! concurrence and classifies the long-time behaviour.

pub mod analysis;
pub mod characteristic;
pub mod dynamics;
mod error;
pub mod model;

pub use analysis::{
    concurrence, concurrence_series, density_matrix, disentanglement_time, steady_state_verdict,
    AtomicDensityMatrix, Regime, SteadyStateVerdict,
};
pub use characteristic::{
    char_poly_eval, char_roots, residue_coefficients, surviving_pole, CharacteristicCubic,
    CubicRoots, ResidueSolution,
};
pub use dynamics::{
    asymptotic_t_end, integrate_pseudomode, integrate_pseudomode_at, integrate_volterra,
    integrate_volterra_extrapolated, integrate_volterra_extrapolated_with, integrate_volterra_with,
    leak_series, rhs, IntegratorConfig, KernelSign, SolverTag, Stepping, Trajectory,
    TrajectoryState,
};
pub use error::{Error, Result};
pub use model::{
    bell_state, derive, validate_initial, BellSign, DerivedParams, InitialAmplitudes, Model,
    NormalizeMode, SystemParams,
};

pub use num_complex::Complex64;
