//! Bosonic Gaussian memory channels.
//!
//! A chain of attenuating (`kappa <= 1`) or amplifying (`kappa > 1`) channel
//! uses, coupled through a memory mode of strength `mu`. The crate builds the
//! exact `n`-use mode couplings, unravels them into independent single-mode
//! channels, describes the large-`n` spectrum through its Toeplitz symbol and
//! turns it into quantum and classical capacities with converging bounds.
//!
//! ```
//! use bosonic_memory::capacity::quantum_capacity;
//! use bosonic_memory::quadrature::QuadratureSpec;
//!
//! let q = quantum_capacity(0.0, 0.75, &QuadratureSpec::default()).unwrap();
//! assert!((q - 3f64.log2()).abs() < 1e-9);
//! ```
//!
//! Modules, bottom up: [`model`] (couplings and Gram matrix), [`spectra`]
//! (eigen-analysis, symbol, threshold split), [`quadrature`] (symbol
//! averages), [`capacity`], [`forgetful`] (memory-mode moment decay) and
//! [`sweep`] (grid evaluation and output formats behind the `bmc` binary).

pub mod capacity;
pub mod error;
pub mod forgetful;
pub mod model;
pub mod output;
pub mod quadrature;
pub mod spectra;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{ChannelKind, ChannelParams, Regime, Threshold};
