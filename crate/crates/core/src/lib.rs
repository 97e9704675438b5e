//! Gaussian covariance dynamics of a squeeze–rotate–squeeze heat machine.
//!
//! A single mechanical mode is squeezed, left to evolve against a hot bath,
//! and unsqueezed along the rotated axis, with imperfect squeezers coupling
//! it to a cold bath. Every step is an affine map on the 2×2 covariance
//! matrix, so a full cycle is a single [`GaussChannel`] whose fixed point is
//! the periodic steady state. From that state the crate derives the
//! effective occupancy, per-cycle work and heats, and the operating phase.
//!
//! ```
//! use squeeze_core::{cycle_ledger, steady_state, MachineParams, Phase};
//!
//! let p = MachineParams::baseline(1.0);
//! let ss = steady_state(&p).unwrap();
//! assert!((ss.n_ss - p.n_h).abs() < 1e-6 * p.n_h);
//! assert_eq!(cycle_ledger(&p).unwrap().phase, Phase::Trivial);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod error;
pub mod gaussian;
mod precise;
pub mod protocol;
pub mod steadystate;
pub mod thermo;
pub mod verify;

pub use bath::{BathModel, BathSpec, ColdCoupling, OscillatorParams, TemperatureConvention};
pub use error::{Error, Result};
pub use gaussian::{apply, compose, rotation, squeeze_map, Covar2, GaussChannel, Mat2};
pub use protocol::{build_cycle, step_states, CycleChannels, CycleStates, MachineParams, ValidityWarning};
pub use steadystate::{
    effective_occupancy, mu_opt_approx, mu_opt_numeric, n_ss_approx, n_ss_rwa_approx, solve_direct, solve_doubling,
    solve_iterative, steady_state, MuOptimum, SolveMethod, SteadyStateResult,
};
pub use thermo::{
    classify_phase, cop, cycle_ledger, engine_criterion, fridge_criterion, rwa_engine_coefficients, rwa_nogo_scan,
    squeezing_proxy, CopReport, CycleLedger, NoGoScanReport, Phase, RwaCoefficients,
};
