//! P1 finite element schemes for a 1D chemo-attraction model with consumption:
//!
//! ```text
//! u_t - u_xx + chi (u v_x)_x = 0,   v_t - v_xx + mu u v = 0,   zero-flux boundaries
//! ```
//!
//! Five schemes are provided (see [`schemes::SchemeId`]), together with energy
//! and positivity diagnostics and the drivers of the reference experiments.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod mesh;
pub mod potentials;
pub mod schemes;

pub use error::{Error, Result};
