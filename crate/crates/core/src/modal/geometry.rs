use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Lamellar grating: ridges of width `w` and height `h` repeated with period `p`.
///
/// The degenerate profiles `w = p` (solid film) and `h = 0` (bare substrate)
/// are accepted; they reduce to a flat surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GratingGeometry {
    period: f64,
    width: f64,
    height: f64,
}

impl GratingGeometry {
    pub fn new(period: f64, width: f64, height: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::domain("geometry.p", format!("period must be positive, got {period}")));
        }
        if !(width >= 0.0 && width <= period) {
            return Err(Error::domain(
                "geometry.w",
                format!("ridge width must lie in [0, p], got {width} with p = {period}"),
            ));
        }
        if !(height >= 0.0 && height.is_finite()) {
            return Err(Error::domain("geometry.h", format!("height must be non-negative, got {height}")));
        }
        Ok(GratingGeometry { period, width, height })
    }

    /// p = 350 nm, w = 130 nm, h = 400 nm.
    pub fn sample_one() -> Self {
        GratingGeometry { period: 350.0, width: 130.0, height: 400.0 }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn groove_width(&self) -> f64 {
        self.period - self.width
    }

    /// f = w/p.
    pub fn filling_factor(&self) -> f64 {
        self.width / self.period
    }

    /// Half width of the first Brillouin zone, π/p.
    pub fn zone_edge(&self) -> f64 {
        PI / self.period
    }

    /// Reciprocal lattice spacing 2π/p.
    pub fn reciprocal(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// True when the surface is effectively flat (h = 0 or w = p).
    pub fn is_flat(&self) -> bool {
        self.height == 0.0 || self.width == self.period
    }

    pub fn scaled(&self, s: f64) -> Self {
        GratingGeometry {
            period: self.period * s,
            width: self.width * s,
            height: self.height * s,
        }
    }
}

impl Default for GratingGeometry {
    fn default() -> Self {
        Self::sample_one()
    }
}

/// A point (ξ, k_x, k_y) of the integration lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochPoint {
    pub kx: f64,
    pub ky: f64,
    pub xi: f64,
}

impl BlochPoint {
    /// Checks k_x ∈ [−π/p, π/p], k_y ≥ 0 and ξ ≥ 0.
    pub fn new(kx: f64, ky: f64, xi: f64, g: &GratingGeometry) -> Result<Self> {
        let edge = g.zone_edge() * (1.0 + 1e-12);
        if !(kx.abs() <= edge) {
            return Err(Error::domain("kx", format!("{kx} outside the first Brillouin zone ±{}", g.zone_edge())));
        }
        if !(ky >= 0.0) {
            return Err(Error::domain("ky", format!("must be non-negative, got {ky}")));
        }
        if !(xi >= 0.0) {
            return Err(Error::domain("xi", format!("must be non-negative, got {xi}")));
        }
        Ok(BlochPoint { kx, ky, xi })
    }
}

/// k_x + 2πn/p for n = −N..N.
pub fn order_wavevectors(kx: f64, period: f64, truncation_n: usize) -> Vec<f64> {
    let n = truncation_n as i64;
    (-n..=n).map(|j| kx + 2.0 * PI * j as f64 / period).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filling_factor_is_derived() {
        let g = GratingGeometry::sample_one();
        assert!((g.filling_factor() - 130.0 / 350.0).abs() < 1e-15);
        assert_eq!(g.groove_width(), 220.0);
        assert!(!g.is_flat());
    }

    #[test]
    fn rejects_invalid_profiles() {
        assert!(GratingGeometry::new(0.0, 0.0, 1.0).is_err());
        assert!(GratingGeometry::new(100.0, 120.0, 1.0).is_err());
        assert!(GratingGeometry::new(100.0, 50.0, -1.0).is_err());
        assert!(GratingGeometry::new(100.0, 100.0, 10.0).unwrap().is_flat());
    }

    #[test]
    fn bloch_point_bounds() {
        let g = GratingGeometry::sample_one();
        assert!(BlochPoint::new(g.zone_edge(), 0.0, 0.1, &g).is_ok());
        assert!(BlochPoint::new(1.1 * g.zone_edge(), 0.0, 0.1, &g).is_err());
        assert!(BlochPoint::new(0.0, -1.0, 0.1, &g).is_err());
    }

    #[test]
    fn orders_are_symmetric_about_kx() {
        let k = order_wavevectors(0.001, 350.0, 2);
        assert_eq!(k.len(), 5);
        assert!((k[2] - 0.001).abs() < 1e-18);
        assert!((k[0] + k[4] - 0.002).abs() < 1e-15);
    }
}
