//! Analytical design-space exploration for microring-based photonic GEMM
//! accelerators.
//!
//! The crate is layered bottom-up:
//!
//! - [`params`]: units, physical constants, per-platform and peripheral parameters
//! - [`device`]: the ITO microring modulator, its spectra and weight levels
//! - [`linkbudget`]: bit precision vs. received power and the optimal TPC size
//! - [`funcsim`]: a bit-true model of one dot-product element
//! - [`workload`]: CNN layer descriptions and their lowering to GEMMs
//! - [`archsim`]: scheduling, latency, energy and area of a full accelerator
//! - [`cli`]: the batch commands behind the `photogemm` binary
//!
//! ```
//! use photogemm::linkbudget::{optimal_n, PrecisionQuery};
//! use photogemm::params::{load_platform, Platform};
//!
//! let sin = load_platform(Platform::Sin, None).unwrap();
//! let r = optimal_n(&PrecisionQuery::new(4, 1e9).unwrap(), &sin, 512).unwrap();
//! assert!(r.n_opt > 0);
//! ```

pub mod archsim;
pub mod cli;
pub mod device;
pub mod error;
pub mod funcsim;
pub mod linkbudget;
pub mod params;
pub mod workload;

pub use error::{Error, Result};
