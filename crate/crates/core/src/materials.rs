//! Dielectric response of metals at imaginary frequency and the Matsubara
//! frequency ladder.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::units::{wavenumber, BOLTZMANN, HBAR_C};

/// Gold plasma frequency in eV.
pub const GOLD_PLASMA_FREQUENCY: f64 = 8.39;
/// Gold Drude dissipation rate in eV.
pub const GOLD_DISSIPATION_RATE: f64 = 0.0434;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaterialKind {
    Drude,
    Plasma,
}

/// Drude or plasma-model metal, parametrised in eV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    plasma_frequency: f64,
    dissipation_rate: f64,
    kind: MaterialKind,
}

impl MaterialModel {
    pub fn new(plasma_frequency: f64, dissipation_rate: f64, kind: MaterialKind) -> Result<Self> {
        if !(plasma_frequency > 0.0 && plasma_frequency.is_finite()) {
            return Err(Error::domain(
                "plasma_frequency",
                format!("must be positive, got {plasma_frequency}"),
            ));
        }
        if !(dissipation_rate >= 0.0 && dissipation_rate.is_finite()) {
            return Err(Error::domain(
                "dissipation_rate",
                format!("must be non-negative, got {dissipation_rate}"),
            ));
        }
        if kind == MaterialKind::Plasma && dissipation_rate != 0.0 {
            return Err(Error::domain(
                "dissipation_rate",
                "plasma model requires zero dissipation",
            ));
        }
        Ok(MaterialModel {
            plasma_frequency,
            dissipation_rate,
            kind,
        })
    }

    pub fn drude(plasma_frequency: f64, dissipation_rate: f64) -> Result<Self> {
        Self::new(plasma_frequency, dissipation_rate, MaterialKind::Drude)
    }

    pub fn plasma(plasma_frequency: f64) -> Result<Self> {
        Self::new(plasma_frequency, 0.0, MaterialKind::Plasma)
    }

    /// Drude gold with the default optical parameters.
    pub fn gold() -> Self {
        Self::drude(GOLD_PLASMA_FREQUENCY, GOLD_DISSIPATION_RATE).unwrap()
    }

    /// Plasma-model gold (same Ω_p, no dissipation).
    pub fn gold_plasma() -> Self {
        Self::plasma(GOLD_PLASMA_FREQUENCY).unwrap()
    }

    pub fn plasma_frequency(&self) -> f64 {
        self.plasma_frequency
    }

    pub fn dissipation_rate(&self) -> f64 {
        self.dissipation_rate
    }

    pub fn kind(&self) -> MaterialKind {
        self.kind
    }

    /// ε(iξ) = 1 + Ω_p²/(ξ² + Γξ), defined for ξ > 0 only.
    pub fn permittivity(&self, xi: f64) -> Result<f64> {
        permittivity_imag_freq(xi, self)
    }

    /// Same model with every length scale multiplied by `s` (Ω_p and Γ divided by `s`).
    pub fn scaled(&self, s: f64) -> Self {
        MaterialModel {
            plasma_frequency: self.plasma_frequency / s,
            dissipation_rate: self.dissipation_rate / s,
            kind: self.kind,
        }
    }

    /// Static limit of ε(iξ)·ξ²/(ħc)² in 1/nm². Finite only for the
    /// plasma model, where it is the inverse penetration depth squared.
    /// A Drude metal gives zero for every Γ, Γ = 0 included as the Γ → 0⁺
    /// limit; use [`MaterialModel::plasma`] for a screening metal.
    pub fn static_screening(&self) -> f64 {
        match self.kind {
            MaterialKind::Plasma => wavenumber(self.plasma_frequency).powi(2),
            MaterialKind::Drude => 0.0,
        }
    }

    /// True when the TE reflection vanishes at zero frequency.
    pub fn te_transparent_at_zero_frequency(&self) -> bool {
        self.static_screening() == 0.0
    }
}

impl Default for MaterialModel {
    fn default() -> Self {
        Self::gold()
    }
}

/// ε(iξ) for the Drude/plasma metal.
pub fn permittivity_imag_freq(xi: f64, m: &MaterialModel) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::domain(
            "xi",
            format!("permittivity needs a positive imaginary frequency, got {xi}"),
        ));
    }
    let wp = m.plasma_frequency;
    Ok(1.0 + wp * wp / (xi * xi + m.dissipation_rate * xi))
}

/// Thermal environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    temperature: f64,
}

impl Environment {
    pub fn new(temperature: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::domain(
                "temperature",
                format!("must be positive, got {temperature}"),
            ));
        }
        Ok(Environment { temperature })
    }

    pub fn room() -> Self {
        Environment { temperature: 300.0 }
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// k_B T in eV.
    pub fn thermal_energy(&self) -> f64 {
        BOLTZMANN * self.temperature
    }
}

impl Default for Environment {
    fn default() -> Self {
        Self::room()
    }
}

/// ξ_l = 2π l k_B T in eV (ħ absorbed by the energy unit).
pub fn matsubara_frequency(l: usize, env: &Environment) -> f64 {
    2.0 * PI * l as f64 * env.thermal_energy()
}

/// The first `max_index + 1` Matsubara frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct MatsubaraGrid {
    pub max_index: usize,
    pub frequencies: Vec<f64>,
}

impl MatsubaraGrid {
    pub fn new(max_index: usize, env: &Environment) -> Self {
        let frequencies = (0..=max_index).map(|l| matsubara_frequency(l, env)).collect();
        MatsubaraGrid {
            max_index,
            frequencies,
        }
    }

    /// Weight in the primed sum: ½ for the static term, 1 otherwise.
    pub fn weight(l: usize) -> f64 {
        if l == 0 {
            0.5
        } else {
            1.0
        }
    }
}

/// Thermal wavelength ħc/(2π k_B T) in nm.
pub fn thermal_wavelength(env: &Environment) -> f64 {
    HBAR_C / (2.0 * PI * env.thermal_energy())
}
