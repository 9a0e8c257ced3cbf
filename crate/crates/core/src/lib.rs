//! Steady-state and pump-probe linear response of a nanomechanical resonator
//! capacitively coupled to a superconducting microwave cavity.
//!
//! The library computes, for a strong pump and weak probe:
//!
//! - the pump-only steady state (photon-number cubic with bistability and
//!   branch stability, intracavity field, static displacement),
//! - the probe transmission t_p, its phase dispersion, and the group delay
//!   (slow light on the red sideband, fast light on the blue sideband),
//! - detuning and power sweeps with branch continuation, emitted as CSV or
//!   JSON,
//! - an independent time-domain oracle (RK4 plus tone demodulation) that
//!   cross-validates the frequency-domain response.
//!
//! All internal math is in angular units (rad/s); external interfaces speak
//! Hz and nW.

pub mod config;
pub mod error;
pub mod linear_response;
pub mod output;
pub mod params;
pub mod steady_state;
pub mod sweep;
pub mod timedomain;

pub use error::{Error, Result};
pub use linear_response::Convention;
pub use params::{Drive, DriveParams, LambdaUnits, SystemParams};
pub use steady_state::{SteadyState, Stability};
