//! Discretisation knobs shared by every pressure path, and the adaptive
//! Matsubara series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How ∂_d is applied to tr log(I − M).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DerivativeScheme {
    Analytic,
    CentralDifference { step: f64 },
}

/// Finite temperature (Matsubara series) or the T → 0 frequency integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrequencySum {
    Matsubara,
    ZeroTemperature { nodes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsConfig {
    /// Diffraction orders −N..N.
    pub truncation_n: usize,
    /// Hard cap on the Matsubara index; the remainder is replaced by its
    /// Euler–Maclaurin integral when reached.
    pub matsubara_cap: usize,
    /// Gauss–Legendre nodes per panel on the half Brillouin zone.
    pub bz_nodes: usize,
    /// Gauss–Legendre nodes for the mapped k_y half line.
    pub ky_nodes: usize,
    /// Nodes per panel for the radial integrals of the planar paths.
    pub radial_nodes: usize,
    /// Nodes for the in-plane angle of the anisotropic slab.
    pub angle_nodes: usize,
    /// Relative tail threshold of the Matsubara series.
    pub tail_tolerance: f64,
    pub derivative: DerivativeScheme,
    pub frequency_sum: FrequencySum,
    /// Imaginary frequency (eV) standing in for ξ → 0 where no closed
    /// static form is used (plasma model).
    pub static_probe: f64,
    /// Estimate the numerical error of scattering pressures (costs one extra
    /// evaluation at N + 2).
    pub estimate_error: bool,
    /// Maximum tolerated relative numerical error.
    pub error_budget: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            truncation_n: 10,
            matsubara_cap: 2000,
            bz_nodes: 10,
            ky_nodes: 20,
            radial_nodes: 48,
            angle_nodes: 16,
            tail_tolerance: 1e-4,
            derivative: DerivativeScheme::Analytic,
            frequency_sum: FrequencySum::Matsubara,
            static_probe: 1e-3,
            estimate_error: false,
            error_budget: 0.02,
        }
    }
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("truncation_n", self.truncation_n),
            ("matsubara_cap", self.matsubara_cap),
            ("bz_nodes", self.bz_nodes),
            ("ky_nodes", self.ky_nodes),
            ("radial_nodes", self.radial_nodes),
            ("angle_nodes", self.angle_nodes),
        ];
        for (name, v) in counts {
            if v < 1 {
                return Err(Error::domain(name, "must be at least 1"));
            }
        }
        if !(self.tail_tolerance > 0.0 && self.tail_tolerance < 1e-2) {
            return Err(Error::domain(
                "tail_tolerance",
                format!("must lie in (0, 1e-2), got {}", self.tail_tolerance),
            ));
        }
        if let DerivativeScheme::CentralDifference { step } = self.derivative {
            if !(step > 0.0) {
                return Err(Error::domain("derivative.step", "must be positive"));
            }
        }
        if let FrequencySum::ZeroTemperature { nodes } = self.frequency_sum {
            if nodes < 1 {
                return Err(Error::domain("frequency_sum.nodes", "must be at least 1"));
            }
        }
        if !(self.static_probe > 0.0) {
            return Err(Error::domain("static_probe", "must be positive"));
        }
        if !(self.error_budget > 0.0) {
            return Err(Error::domain("error_budget", "must be positive"));
        }
        Ok(())
    }
}

/// Outcome of an adaptive Matsubara series Σ′_l t_l.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    /// Sum with the requested tail tolerance.
    pub value: f64,
    /// Sum continued until the tail fell below half the tolerance.
    pub refined: f64,
    /// Highest index evaluated.
    pub last_index: usize,
    /// Whether the cap was reached and the continuum tail used.
    pub capped: bool,
}

/// Adaptive primed sum ½ t_0 + Σ_{l≥1} t_l.
///
/// Stops once the geometric tail estimate t_l ρ/(1 − ρ), ρ = t_l/t_{l−1},
/// drops below `tol/2` of the running sum. When `cap` is reached the
/// remainder is replaced by `continuum(cap + ½)`, the integral of the
/// term over the index from that point on.
pub fn matsubara_series<T, C>(
    zero_term: f64,
    mut term: T,
    tol: f64,
    cap: usize,
    continuum: C,
) -> Result<SeriesSum>
where
    T: FnMut(usize) -> Result<f64>,
    C: Fn(f64) -> Result<f64>,
{
    let mut sum = 0.5 * zero_term;
    let mut at_tol: Option<f64> = None;
    let mut prev: Option<f64> = None;
    for l in 1..=cap {
        let t = term(l)?;
        if !t.is_finite() {
            return Err(Error::Convergence(format!("non-finite Matsubara term at l = {l}")));
        }
        sum += t;
        if let Some(p) = prev {
            let tail = if p > 0.0 && t >= 0.0 && t < p {
                let rho = t / p;
                t * rho / (1.0 - rho)
            } else {
                f64::INFINITY
            };
            let scale = sum.abs().max(f64::MIN_POSITIVE);
            if at_tol.is_none() && tail <= tol * scale {
                at_tol = Some(sum);
            }
            if tail <= 0.5 * tol * scale {
                return Ok(SeriesSum {
                    value: at_tol.unwrap_or(sum),
                    refined: sum,
                    last_index: l,
                    capped: false,
                });
            }
        }
        if t == 0.0 {
            return Ok(SeriesSum {
                value: at_tol.unwrap_or(sum),
                refined: sum,
                last_index: l,
                capped: false,
            });
        }
        prev = Some(t);
    }
    let tail = continuum(cap as f64 + 0.5)?;
    let total = sum + tail;
    Ok(SeriesSum {
        value: at_tol.unwrap_or(total),
        refined: total,
        last_index: cap,
        capped: true,
    })
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_series_converges() {
        let r: f64 = 0.5;
        let s = matsubara_series(2.0, |l| Ok(r.powi(l as i32)), 1e-8, 1000, |_| Ok(0.0)).unwrap();
        // ½·2 + Σ_{l≥1} 2^{-l} = 2
        assert!((s.refined - 2.0).abs() < 1e-8, "{s:?}");
        assert!(!s.capped);
    }

    #[test]
    fn cap_uses_continuum_tail() {
        // t_l = e^{-l/100}; Σ_{l>10} ≈ ∫_{10.5}^∞ e^{-x/100} dx
        let a = 0.01f64;
        let s = matsubara_series(
            1.0,
            |l| Ok((-a * l as f64).exp()),
            1e-9,
            10,
            |x| Ok((-a * x).exp() / a),
        )
        .unwrap();
        let exact = 0.5 + (-a).exp() / (1.0 - (-a).exp());
        assert!(s.capped);
        assert!((s.refined / exact - 1.0).abs() < 1e-5, "{} vs {exact}", s.refined);
    }

    #[test]
    fn pairwise_is_order_fixed() {
        let v: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        assert_eq!(pairwise_sum(&v), pairwise_sum(&v.clone()));
        assert!((pairwise_sum(&v) - v.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut c = NumericsConfig::default();
        assert!(c.validate().is_ok());
        c.tail_tolerance = 0.5;
        assert!(c.validate().is_err());
        let c = NumericsConfig { bz_nodes: 0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
