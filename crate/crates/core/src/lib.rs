//! Electron in a composite quadratic well driven by a monochromatic field.
//!
//! The pipeline runs stationary states ([`well`]) → dipole basis ([`dipole`])
//! → oscillatory kernel ([`kernel`]) → propagator and reconstruction
//! ([`evolution`]). [`oracle`] holds the brute-force references every stage is
//! checked against.
//!
//! Internally everything is in natural units `ħ = m = 1` with lengths in the
//! well length `ℓ` and energies in `ħ√(ω₁ω₂)`; [`well::WellParams`] converts.

pub mod dipole;
pub mod error;
pub mod evolution;
pub mod kernel;
pub mod oracle;
pub mod quad;
pub mod roots;
pub mod special;
pub mod well;

pub use error::{Error, Result};

/// Library version, embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
