//! Plane–plane Casimir pressure between two identical metal half-spaces.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::materials::{matsubara_frequency, Environment, MaterialModel};
use crate::numerics::{matsubara_series, FrequencySum, NumericsConfig};
use crate::quadrature::GaussLegendre;
use crate::units::{wavenumber, EV_PER_NM3_IN_PA};

/// Reflection amplitudes of a half-space at imaginary frequency.
///
/// Sign convention: `r_te = (κ − κ_m)/(κ + κ_m)` is non-positive and tends to
/// −1 for a perfect mirror, `r_tm` tends to +1. Only squares enter the
/// plane–plane pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelPair {
    pub r_te: f64,
    pub r_tm: f64,
}

/// Fresnel coefficients at (ξ, k∥) for a medium with ε(iξ) = `eps`.
///
/// At ξ = 0 the dissipative-metal limit (r_te = 0, r_tm = 1) is returned;
/// use [`fresnel_static`] for the plasma model.
pub fn fresnel(xi: f64, k_par: f64, eps: f64) -> Result<FresnelPair> {
    if !(xi >= 0.0) {
        return Err(Error::domain("xi", format!("must be non-negative, got {xi}")));
    }
    if !(k_par >= 0.0) {
        return Err(Error::domain("k_par", format!("must be non-negative, got {k_par}")));
    }
    if !(eps >= 1.0) {
        return Err(Error::domain("eps", format!("must be at least 1, got {eps}")));
    }
    if xi == 0.0 {
        return Ok(FresnelPair { r_te: 0.0, r_tm: 1.0 });
    }
    let q = wavenumber(xi);
    let kappa = (k_par * k_par + q * q).sqrt();
    Ok(fresnel_kappa(kappa, q, eps))
}

/// Fresnel pair from the vacuum decay constant κ = √(k∥² + q²).
#[inline]
pub(crate) fn fresnel_kappa(kappa: f64, q: f64, eps: f64) -> FresnelPair {
    if eps.is_infinite() {
        return FresnelPair { r_te: -1.0, r_tm: 1.0 };
    }
    let kappa_m = (kappa * kappa + (eps - 1.0) * q * q).sqrt();
    FresnelPair {
        r_te: (kappa - kappa_m) / (kappa + kappa_m),
        r_tm: (eps * kappa - kappa_m) / (eps * kappa + kappa_m),
    }
}

/// Zero-frequency reflection of the metal at wavevector k.
pub fn fresnel_static(k_par: f64, m: &MaterialModel) -> FresnelPair {
    let screening = m.static_screening();
    let r_te = if screening == 0.0 {
        0.0
    } else {
        let km = (k_par * k_par + screening).sqrt();
        (k_par - km) / (k_par + km)
    };
    FresnelPair { r_te, r_tm: 1.0 }
}

/// `x/(1 − x)` for the round-trip factor x = r² e^{−u}.
#[inline]
fn attraction(r: f64, e: f64) -> f64 {
    let x = r * r * e;
    x / (1.0 - x)
}

/// Radial Gauss–Legendre rule in u = 2κd: a panel [u0, 20] and a panel of
/// width 40 beyond, outside which the integrand is below e^{−60}.
pub(crate) fn radial_rule(rule: &GaussLegendre, u0: f64) -> Vec<(f64, f64)> {
    const SPLIT: f64 = 20.0;
    const TAIL: f64 = 40.0;
    let mut pts = Vec::with_capacity(2 * rule.len());
    let mid = u0.max(SPLIT);
    if u0 < SPLIT {
        pts.extend(rule.on_interval(u0, SPLIT));
    }
    pts.extend(rule.on_interval(mid, mid + TAIL));
    pts
}

/// ∫₀^∞ dk k κ Σ_p r_p² e^{−2κd}/(1 − r_p² e^{−2κd}) at one ξ > 0, in 1/nm³,
/// so that −(k_BT/π)·term is a pressure in eV/nm³.
pub fn frequency_term(
    xi: f64,
    d: f64,
    m: &MaterialModel,
    rule: &GaussLegendre,
) -> Result<f64> {
    let q = wavenumber(xi);
    let eps = m.permittivity(xi)?;
    let u0 = 2.0 * q * d;
    let mut acc = 0.0;
    for (u, w) in radial_rule(rule, u0) {
        let kappa = u / (2.0 * d);
        let r = fresnel_kappa(kappa, q, eps);
        let e = (-u).exp();
        acc += w * u * u * (attraction(r.r_te, e) + attraction(r.r_tm, e));
    }
    Ok(acc / (8.0 * d * d * d))
}

/// Static (ξ = 0) contribution with the material's zero-frequency limit.
pub fn static_term(d: f64, m: &MaterialModel, rule: &GaussLegendre) -> f64 {
    let mut acc = 0.0;
    for (u, w) in radial_rule(rule, 0.0) {
        if u == 0.0 {
            continue;
        }
        let k = u / (2.0 * d);
        let r = fresnel_static(k, m);
        let e = (-u).exp();
        acc += w * u * u * (attraction(r.r_te, e) + attraction(r.r_tm, e));
    }
    acc / (8.0 * d * d * d)
}

fn validate_distance(d: f64) -> Result<()> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::domain("d", format!("separation must be positive, got {d}")));
    }
    Ok(())
}

/// Plane–plane pressure in Pa (negative = attractive) for one radial rule.
fn pressure_with_rule(
    d: f64,
    m: &MaterialModel,
    env: &Environment,
    num: &NumericsConfig,
    rule: &GaussLegendre,
    cap: usize,
) -> Result<(f64, bool)> {
    match num.frequency_sum {
        FrequencySum::Matsubara => {
            let kt = env.thermal_energy();
            let tol = num.tail_tolerance.min(1e-6);
            let zero = static_term(d, m, rule);
            let series = matsubara_series(
                zero,
                |l| frequency_term(matsubara_frequency(l, env), d, m, rule),
                tol,
                cap,
                |l_from| {
                    // Σ_{l > cap} t_l ≈ ∫ t(ξ) dξ / (2π k_B T) from ξ(l_from)
                    let xi0 = 2.0 * PI * kt * l_from;
                    frequency_integral(xi0, d, m, rule, rule).map(|v| v / (2.0 * PI * kt))
                },
            )?;
            Ok((-kt / PI * series.refined * EV_PER_NM3_IN_PA, series.capped))
        }
        FrequencySum::ZeroTemperature { nodes } => {
            // k_B T Σ′ → (1/2π) ∫₀^∞ dξ
            let xi_rule = GaussLegendre::new(nodes);
            let integral = frequency_integral(0.0, d, m, rule, &xi_rule)?;
            Ok((-integral / (2.0 * PI * PI) * EV_PER_NM3_IN_PA, false))
        }
    }
}

/// ∫_{ξ0}^∞ dξ frequency_term(ξ), on the map ξ = ξ0 + ξ_c t/(1 − t)
/// with ξ_c = ħc/(2d).
fn frequency_integral(
    xi0: f64,
    d: f64,
    m: &MaterialModel,
    k_rule: &GaussLegendre,
    xi_rule: &GaussLegendre,
) -> Result<f64> {
    let scale = crate::units::HBAR_C / (2.0 * d);
    let mut acc = 0.0;
    for (x, w) in xi_rule.semi_infinite(scale) {
        let xi = xi0 + x;
        if xi <= 0.0 {
            continue;
        }
        acc += w * frequency_term(xi, d, m, k_rule)?;
    }
    Ok(acc)
}

/// Lifshitz pressure P_Lif(d) in Pa between two half-spaces of material `m`.
///
/// The radial quadrature is checked against a rule with twice the nodes, and
/// a capped Matsubara series against twice the cap; either changing the
/// result by more than `num.tail_tolerance` (relative) is reported.
pub fn lifshitz_pressure(
    d: f64,
    m: &MaterialModel,
    env: &Environment,
    num: &NumericsConfig,
) -> Result<f64> {
    validate_distance(d)?;
    num.validate()?;
    let coarse_rule = GaussLegendre::new(num.radial_nodes);
    let fine_rule = GaussLegendre::new(2 * num.radial_nodes);
    let (coarse, _) = pressure_with_rule(d, m, env, num, &coarse_rule, num.matsubara_cap)?;
    let (fine, capped) = pressure_with_rule(d, m, env, num, &fine_rule, num.matsubara_cap)?;
    let tol = num.tail_tolerance;
    if ((fine - coarse) / fine).abs() > tol {
        return Err(Error::Convergence(format!(
            "radial quadrature not converged at d = {d} nm: {coarse} vs {fine} Pa"
        )));
    }
    if capped {
        let (doubled, _) = pressure_with_rule(d, m, env, num, &coarse_rule, 2 * num.matsubara_cap)?;
        if ((doubled - fine) / fine).abs() > tol {
            return Err(Error::Convergence(format!(
                "Matsubara cap {} insufficient at d = {d} nm: {fine} vs {doubled} Pa",
                num.matsubara_cap
            )));
        }
    }
    Ok(fine)
}

/// Matsubara terms of P_Lif, term by term (index 0 carries its half weight),
/// each in Pa. Useful to check the attractive sign term by term.
pub fn lifshitz_terms(
    d: f64,
    m: &MaterialModel,
    env: &Environment,
    num: &NumericsConfig,
    count: usize,
) -> Result<Vec<f64>> {
    validate_distance(d)?;
    let rule = GaussLegendre::new(num.radial_nodes);
    let kt = env.thermal_energy();
    let norm = -kt / PI * EV_PER_NM3_IN_PA;
    let mut out = Vec::with_capacity(count);
    out.push(0.5 * norm * static_term(d, m, &rule));
    for l in 1..count {
        out.push(norm * frequency_term(matsubara_frequency(l, env), d, m, &rule)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::ideal_mirror_pressure;

    fn ideal_proxy() -> (MaterialModel, Environment) {
        (MaterialModel::plasma(1e4).unwrap(), Environment::new(1.0).unwrap())
    }

    #[test]
    fn vacuum_reflects_nothing() {
        let r = fresnel(0.3, 0.01, 1.0).unwrap();
        assert_eq!(r, FresnelPair { r_te: 0.0, r_tm: 0.0 });
    }

    #[test]
    fn static_limit_for_drude() {
        let r = fresnel(0.0, 0.01, 1e6).unwrap();
        assert_eq!(r, FresnelPair { r_te: 0.0, r_tm: 1.0 });
        let r = fresnel_static(0.01, &MaterialModel::gold());
        assert_eq!(r, FresnelPair { r_te: 0.0, r_tm: 1.0 });
    }

    #[test]
    fn perfect_mirror_limit() {
        let r = fresnel(0.5, 0.02, 1e14).unwrap();
        assert!((r.r_te + 1.0).abs() < 1e-5 && (r.r_tm - 1.0).abs() < 1e-5, "{r:?}");
    }

    #[test]
    fn fresnel_rejects_negative_inputs() {
        assert!(fresnel(-1.0, 0.0, 2.0).is_err());
        assert!(fresnel(1.0, -0.1, 2.0).is_err());
        assert!(fresnel(1.0, 0.1, 0.5).is_err());
    }

    #[test]
    fn ideal_mirror_oracle() {
        let (m, env) = ideal_proxy();
        let num = NumericsConfig::default();
        for d in [500.0, 1000.0, 2000.0] {
            let p = lifshitz_pressure(d, &m, &env, &num).unwrap();
            let oracle = ideal_mirror_pressure(d);
            assert!((p / oracle - 1.0).abs() < 5e-3, "d={d}: {p} vs {oracle}");
        }
        let p1 = lifshitz_pressure(1000.0, &m, &env, &num).unwrap();
        assert!((p1 * 1e3 + 1.300).abs() < 1.300 * 5e-3, "{p1}");
        let p05 = lifshitz_pressure(500.0, &m, &env, &num).unwrap();
        assert!((p05 / p1 / 16.0 - 1.0).abs() < 5e-3);
    }

    #[test]
    fn gold_bounded_by_ideal_mirror() {
        let p = lifshitz_pressure(300.0, &MaterialModel::gold(), &Environment::room(), &NumericsConfig::default())
            .unwrap();
        assert!(p < 0.0 && p > ideal_mirror_pressure(300.0), "{p}");
    }

    #[test]
    fn terms_are_attractive_and_total_decreases() {
        let num = NumericsConfig::default();
        let m = MaterialModel::gold();
        let env = Environment::room();
        let terms = lifshitz_terms(400.0, &m, &env, &num, 30).unwrap();
        assert!(terms.iter().all(|&t| t < 0.0));
        let mut last = f64::NEG_INFINITY;
        for d in [150.0, 200.0, 400.0, 800.0, 1600.0, 3200.0] {
            let p = lifshitz_pressure(d, &m, &env, &num).unwrap();
            assert!(p > last, "|P| must decrease: {p} at {d}");
            last = p;
        }
    }

    #[test]
    fn zero_temperature_mode_matches_cold_matsubara() {
        let (m, _) = ideal_proxy();
        let num = NumericsConfig {
            frequency_sum: FrequencySum::ZeroTemperature { nodes: 64 },
            ..Default::default()
        };
        let p = lifshitz_pressure(1000.0, &m, &Environment::room(), &num).unwrap();
        assert!((p / ideal_mirror_pressure(1000.0) - 1.0).abs() < 1e-3, "{p}");
    }
}
