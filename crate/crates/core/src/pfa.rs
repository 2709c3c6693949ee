//! Proximity-force baselines for the grating and the sphere-to-plane
//! conversion of measured force gradients.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lifshitz::lifshitz_pressure;
use crate::materials::{Environment, MaterialModel};
use crate::modal::GratingGeometry;
use crate::numerics::NumericsConfig;

/// Default probe radius, μm.
pub const DEFAULT_SPHERE_RADIUS: f64 = 151.7;

/// PFA pressure (Pa) of the grating: f P_Lif(d) + (1 − f) P_Lif(d + h).
///
/// Depends on the profile only through f and h.
pub fn pfa_pressure(
    d: f64,
    g: &GratingGeometry,
    m: &MaterialModel,
    env: &Environment,
    num: &NumericsConfig,
) -> Result<f64> {
    let f = g.filling_factor();
    let top = if f > 0.0 { lifshitz_pressure(d, m, env, num)? } else { 0.0 };
    if f == 1.0 || g.height() == 0.0 {
        return if f == 0.0 { lifshitz_pressure(d, m, env, num) } else { Ok(top) };
    }
    let bottom = lifshitz_pressure(d + g.height(), m, env, num)?;
    Ok(f * top + (1.0 - f) * bottom)
}

/// Spherical probe of radius R (μm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereProbe {
    radius_um: f64,
}

impl SphereProbe {
    pub fn new(radius_um: f64) -> Result<Self> {
        if !(radius_um > 0.0 && radius_um.is_finite()) {
            return Err(Error::domain("probe.R", format!("radius must be positive, got {radius_um}")));
        }
        Ok(SphereProbe { radius_um })
    }

    pub fn radius_um(&self) -> f64 {
        self.radius_um
    }

    /// R in metres.
    pub fn radius_m(&self) -> f64 {
        self.radius_um * 1e-6
    }

    /// The proximity conversion needs d ≪ R; flags d/R above 5%.
    pub fn is_valid_at(&self, d_nm: f64) -> bool {
        d_nm * 1e-3 / self.radius_um <= 0.05
    }
}

impl Default for SphereProbe {
    fn default() -> Self {
        SphereProbe { radius_um: DEFAULT_SPHERE_RADIUS }
    }
}

/// Equivalent plane pressure (Pa) from a sphere force gradient ∂F/∂d (N/m):
/// P = (2πR)⁻¹ ∂F/∂d.
pub fn gradient_to_pressure(df_dd: f64, probe: &SphereProbe) -> f64 {
    df_dd / (2.0 * PI * probe.radius_m())
}

/// Inverse of [`gradient_to_pressure`].
pub fn pressure_to_gradient(pressure: f64, probe: &SphereProbe) -> f64 {
    pressure * 2.0 * PI * probe.radius_m()
}
