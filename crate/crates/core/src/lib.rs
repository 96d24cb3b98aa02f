//! Numerical laboratory for the sharp interface limit of the
//! one-dimensional stochastic Allen-Cahn equation
//!
//! ```text
//! du = (u_xx + f(u) / eps) dt + eps^gamma a(x) dW
//! ```
//!
//! with a bistable reaction `f`. The crate simulates the equation on a
//! truncated line, builds the explicit super/sub solutions that control the
//! generation of an interface, computes the coefficients of the limiting
//! interface SDE and compares interface paths extracted from the SPDE with
//! paths of that SDE.

pub mod error;
pub mod fermi;
pub mod generation;
pub mod harness;
pub mod interface_sde;
pub mod numerics;
pub mod path;
pub mod reaction;
pub mod spde;
pub mod standing_wave;

pub use error::{Error, Result};
pub use numerics::{Field, Grid1D, RngStream};
pub use reaction::{ReactionSpec, ShiftSign};
pub use standing_wave::{solve_standing_wave, StandingWaveProfile};
