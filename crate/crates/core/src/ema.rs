//! Effective-medium model of the grating: a uniaxial slab of thickness h on
//! the bulk metal, optic axis along the grating vector x.
//!
//! The slab is the zeroth-order limit of the modal layer: E_y and E_z see
//! the area average ε_yy = ε_zz = fε + (1 − f), E_x sees the series average
//! ε_xx = ε/(f + ε(1 − f)). Its reflection is built with the same boundary
//! matching as the grating, for a single plane wave of in-plane wavevector
//! k = (k cos φ, k sin φ).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lifshitz::{radial_rule, static_term};
use crate::materials::{matsubara_frequency, Environment, MaterialKind, MaterialModel};
use crate::modal::modes::LayerModes;
use crate::modal::reflection::stack_reflection;
use crate::modal::GratingGeometry;
use crate::numerics::{matsubara_series, pairwise_sum, DerivativeScheme, FrequencySum, NumericsConfig};
use crate::quadrature::GaussLegendre;
use crate::scattering::gap_density;
use crate::units::{wavenumber, EV_PER_NM3_IN_PA, HBAR_C};

/// Diagonal permittivity tensor of the homogenised grating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniaxialPermittivity {
    pub eps_xx: f64,
    pub eps_yy: f64,
    pub eps_zz: f64,
}

/// Mixing rules for ridges of permittivity `eps_d` filling a fraction `f`.
pub fn ema_tensor(f: f64, eps_d: f64) -> Result<UniaxialPermittivity> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::domain("f", format!("filling factor must lie in [0, 1], got {f}")));
    }
    if !(eps_d >= 1.0) {
        return Err(Error::domain("eps_d", format!("must be at least 1, got {eps_d}")));
    }
    let along = eps_d * f + (1.0 - f);
    Ok(UniaxialPermittivity {
        eps_xx: eps_d / (f + eps_d * (1.0 - f)),
        eps_yy: along,
        eps_zz: along,
    })
}

struct Rules {
    radial: GaussLegendre,
    angle: Vec<(f64, f64)>,
}

/// ∫₀^{π/2} dφ ∫ k dk ∂_d log det(I − M) at ξ > 0, in 1/nm³.
fn frequency_term(xi: f64, d: f64, g: &GratingGeometry, m: &MaterialModel, rules: &Rules) -> Result<f64> {
    let q = wavenumber(xi);
    let eps = m.permittivity(xi)?;
    let f = g.filling_factor();
    let slab = f < 1.0 && g.height() > 0.0;
    let t = ema_tensor(f, eps)?;
    let laurent = nalgebra::DMatrix::from_element(1, 1, t.eps_yy);
    let inverse = nalgebra::DMatrix::from_element(1, 1, 1.0 / t.eps_xx);
    let mut radial = Vec::new();
    for (u, wu) in radial_rule(&rules.radial, 2.0 * q * d) {
        let kappa = u / (2.0 * d);
        let k = (kappa * kappa - q * q).max(0.0).sqrt();
        let mut ring = Vec::with_capacity(rules.angle.len());
        for &(phi, wphi) in &rules.angle {
            let (kx, ky) = (k * phi.cos(), k * phi.sin());
            let vacuum = LayerModes::homogeneous(1.0, q, &[kx]);
            let tag = (xi, kx, ky);
            let rp = stack_reflection(&vacuum, None, eps, ky, tag, false)?;
            let rg = if slab {
                let layer = LayerModes::from_toeplitz(&laurent, &inverse, q, &[kx])?;
                stack_reflection(&vacuum, Some((&layer, g.height())), eps, ky, tag, false)?
            } else {
                rp.clone()
            };
            ring.push(wphi * gap_density(&rp, &rg, &[kappa, kappa], d, DerivativeScheme::Analytic)?);
        }
        // k dk = κ dκ = u du/(4d²)
        radial.push(wu * u / (4.0 * d * d) * pairwise_sum(&ring));
    }
    Ok(pairwise_sum(&radial))
}

/// l = 0 series term, before its half weight.
///
/// Drude: the TE part vanishes and every ε component parallel to the
/// interface diverges, so the TM potential sees an equipotential at the slab
/// top (at the substrate when f = 0). Plasma: the general path at
/// `static_probe`, except for a flat surface where the closed form is used.
fn zero_term(d: f64, g: &GratingGeometry, m: &MaterialModel, num: &NumericsConfig, rules: &Rules) -> Result<f64> {
    let f = g.filling_factor();
    let flat = f == 1.0 || g.height() == 0.0;
    if m.kind() == MaterialKind::Drude || flat {
        let depth = if f == 0.0 { d + g.height() } else { d };
        // the angular integral of 2κ·(...) is π times the plane-plane term
        return Ok(PI * static_term(depth, m, &rules.radial));
    }
    frequency_term(num.static_probe, d, g, m, rules)
}

fn rules(radial_nodes: usize, angle_nodes: usize) -> Rules {
    Rules {
        radial: GaussLegendre::new(radial_nodes),
        angle: GaussLegendre::new(angle_nodes).on_interval(0.0, PI / 2.0),
    }
}

fn pressure_with_rules(
    d: f64,
    g: &GratingGeometry,
    m: &MaterialModel,
    env: &Environment,
    num: &NumericsConfig,
    rules: &Rules,
) -> Result<f64> {
    match num.frequency_sum {
        FrequencySum::Matsubara => {
            let kt = env.thermal_energy();
            let zero = zero_term(d, g, m, num, rules)?;
            let series = matsubara_series(
                zero,
                |l| frequency_term(matsubara_frequency(l, env), d, g, m, rules),
                num.tail_tolerance.min(1e-6),
                num.matsubara_cap,
                |l_from| frequency_integral(2.0 * PI * kt * l_from, d, g, m, rules, &rules.radial).map(|v| v / (2.0 * PI * kt)),
            )?;
            Ok(-kt / (PI * PI) * series.refined * EV_PER_NM3_IN_PA)
        }
        FrequencySum::ZeroTemperature { nodes } => {
            let integral = frequency_integral(0.0, d, g, m, rules, &GaussLegendre::new(nodes))?;
            Ok(-integral / (2.0 * PI * PI * PI) * EV_PER_NM3_IN_PA)
        }
    }
}

fn frequency_integral(
    xi0: f64,
    d: f64,
    g: &GratingGeometry,
    m: &MaterialModel,
    rules: &Rules,
    xi_rule: &GaussLegendre,
) -> Result<f64> {
    let mut terms = Vec::with_capacity(xi_rule.len());
    for (x, w) in xi_rule.semi_infinite(HBAR_C / (2.0 * d)) {
        let xi = xi0 + x;
        if xi > 0.0 {
            terms.push(w * frequency_term(xi, d, g, m, rules)?);
        }
    }
    Ok(pairwise_sum(&terms))
}

/// Pressure (Pa) between the flat plate and the homogenised grating.
///
/// Evaluated with the configured radial and angular rules and with both
/// doubled; a relative change above `num.tail_tolerance` is reported as a
/// convergence failure.
pub fn ema_pressure(
    d: f64,
    g: &GratingGeometry,
    m: &MaterialModel,
    env: &Environment,
    num: &NumericsConfig,
) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::domain("d", format!("separation must be positive, got {d}")));
    }
    num.validate()?;
    let coarse = pressure_with_rules(d, g, m, env, num, &rules(num.radial_nodes, num.angle_nodes))?;
    let fine = pressure_with_rules(d, g, m, env, num, &rules(2 * num.radial_nodes, 2 * num.angle_nodes))?;
    if ((fine - coarse) / fine).abs() > num.tail_tolerance {
        return Err(Error::Convergence(format!(
            "effective-medium quadrature not converged at d = {d} nm: {coarse} vs {fine} Pa"
        )));
    }
    Ok(fine)
}
