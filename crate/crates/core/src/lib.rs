//! Casimir pressure between a flat metal plate and a lamellar metallic
//! grating, with the plane–plane, proximity-force and effective-medium
//! baselines and the data-reduction tools used to compare them with
//! measurements.

pub mod analysis;
pub mod ema;
pub mod error;
pub mod lifshitz;
pub mod materials;
pub mod modal;
pub mod numerics;
pub mod pfa;
pub mod quadrature;
pub mod scattering;
pub mod units;

pub use error::{Error, Result};
pub use materials::{Environment, MaterialKind, MaterialModel};
pub use numerics::{DerivativeScheme, FrequencySum, NumericsConfig};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
