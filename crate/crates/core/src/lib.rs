//! Multi-beam non-orthogonal multiple access (NOMA) for hybrid mmWave systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: ULA steering vectors and Saleh-Valenzuela multipath channels.
//! - [`beam`]: beam-splitting analog precoders, user combiners and beam patterns.
//! - [`effective`]: scalar effective channels `v^H H w`, by direct product, by
//!   the Dirichlet-kernel closed form, and by the large-array approximation.
//! - [`rates`]: NOMA rates with SIC, the TDMA baseline and single-beam NOMA.
//! - [`asymptotics`]: closed-form single-RF sum rates and antenna-allocation
//!   conditions under which multi-beam NOMA beats TDMA.
//! - [`experiments`]: seeded Monte Carlo sweeps, config files and CSV output.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod beam;
pub mod channel;
pub mod effective;
mod error;
pub mod experiments;
pub mod rates;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;
