//! Plane–grating pressure from the round-trip operator of the gap.
//!
//! P = −(k_BT/π²) Σ′_l ∫₀^{π/p} dk_x ∫₀^∞ dk_y ∂_d log det(I − M),
//! M = R_p K R_g K, with both half-axes folded by the mirror symmetries of
//! the grating. The density ∂_d log det(I − M) is non-negative.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::materials::{matsubara_frequency, Environment, MaterialModel};
use crate::modal::electrostatic::StaticSolver;
use crate::modal::{BlochPoint, GratingGeometry, GratingSolver};
use crate::numerics::{matsubara_series, pairwise_sum, DerivativeScheme, FrequencySum, NumericsConfig};
use crate::quadrature::{graded_panels, GaussLegendre};
use crate::units::{HBAR_C, EV_PER_NM3_IN_PA};

/// One point of a pressure curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressurePoint {
    /// Separation (nm) between the plate and the ridge tops.
    pub d: f64,
    /// Pa, negative for attraction.
    pub pressure: f64,
    /// Estimated numerical error, Pa.
    pub numeric_error: f64,
    /// Half-weighted l = 0 contribution, Pa (zero in the T → 0 mode).
    pub zero_frequency: f64,
    /// Highest Matsubara index evaluated.
    pub last_index: usize,
    pub truncation_n: usize,
}

/// M = R_p K_pg R_g K_gp for diagonal translations `k_pg`, `k_gp`.
///
/// A spectral radius of 1 or more is reported as a physics failure.
pub fn round_trip(rp: &DMatrix<f64>, rg: &DMatrix<f64>, k_pg: &[f64], k_gp: &[f64]) -> Result<DMatrix<f64>> {
    let n = rp.nrows();
    if rp.ncols() != n || rg.shape() != (n, n) || k_pg.len() != n || k_gp.len() != n {
        return Err(Error::domain("round_trip", "operator dimensions do not conform"));
    }
    let a = scale_columns(rp, k_pg);
    let b = scale_columns(rg, k_gp);
    let m = a * b;
    // ρ(M) ≤ max row sum; the eigenvalues are needed only when that bound fails
    let bound = m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    if bound < 1.0 {
        return Ok(m);
    }
    let rho = nalgebra::Schur::try_new(m.clone(), 1e-14, 100_000)
        .ok_or_else(|| Error::Convergence("Schur iteration failed on the round-trip operator".into()))?
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if !(rho < 1.0) {
        return Err(Error::Physics(format!("round-trip spectral radius {rho} is not below 1")));
    }
    Ok(m)
}

/// log det(I − M) from an LU factorisation.
pub fn log_det_one_minus(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    let det = (DMatrix::identity(n, n) - m).determinant();
    if !(det > 0.0) {
        return Err(Error::Physics(format!("det(I − M) = {det} is not positive")));
    }
    Ok(det.ln())
}

fn scale_columns(m: &DMatrix<f64>, s: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= s[j];
    }
    out
}

/// ∂_d log det(I − M(d)) for reflection operators `rp`, `rg` and vacuum decay
/// constants `kappa` (1/nm), per `scheme`.
pub fn gap_density(
    rp: &DMatrix<f64>,
    rg: &DMatrix<f64>,
    kappa: &[f64],
    d: f64,
    scheme: DerivativeScheme,
) -> Result<f64> {
    let n = kappa.len();
    match scheme {
        DerivativeScheme::Analytic => {
            let prop: Vec<f64> = kappa.iter().map(|k| (-k * d).exp()).collect();
            let dprop: Vec<f64> = kappa.iter().zip(&prop).map(|(k, e)| k * e).collect();
            let a = scale_columns(rp, &prop);
            let b = scale_columns(rg, &prop);
            let m = &a * &b;
            // −∂_d M = R_p κK R_g K + R_p K R_g κK
            let dm = scale_columns(rp, &dprop) * &b + &a * scale_columns(rg, &dprop);
            let lu = (DMatrix::identity(n, n) - m).lu();
            if !(lu.determinant() > 0.0) {
                return Err(Error::Physics("det(I − M) is not positive".into()));
            }
            let x = lu
                .solve(&dm)
                .ok_or_else(|| Error::Physics("I − M is singular".into()))?;
            Ok(x.trace())
        }
        DerivativeScheme::CentralDifference { step } => {
            let at = |dd: f64| -> Result<f64> {
                let prop: Vec<f64> = kappa.iter().map(|k| (-k * dd).exp()).collect();
                log_det_one_minus(&(scale_columns(rp, &prop) * scale_columns(rg, &prop)))
            };
            Ok((at(d + step)? - at(d - step)?) / (2.0 * step))
        }
    }
}

/// Gap density at one Bloch point for Matsubara index `l` (ξ_l, or the
/// zero-frequency treatment at l = 0), in 1/nm.
pub fn pressure_integrand(
    l: usize,
    pt: &BlochPoint,
    d: f64,
    g: &GratingGeometry,
    m: &MaterialModel,
    env: &Environment,
    num: &NumericsConfig,
) -> Result<f64> {
    validate(d, num)?;
    let xi = if l == 0 { 0.0 } else { matsubara_frequency(l, env) };
    let column = Column::new(g, m, xi, pt.kx, num.truncation_n, num.static_probe)?;
    column.density(d, pt.ky, num.derivative)
}

/// Per-(ξ, k_x) work shared by every k_y.
enum Column {
    Modal(GratingSolver),
    Static(StaticSolver),
}

impl Column {
    fn new(g: &GratingGeometry, m: &MaterialModel, xi: f64, kx: f64, n: usize, probe: f64) -> Result<Self> {
        if xi > 0.0 {
            let eps = m.permittivity(xi)?;
            return Ok(Column::Modal(GratingSolver::new(g, eps, xi, kx, n)?));
        }
        if m.te_transparent_at_zero_frequency() {
            Ok(Column::Static(StaticSolver::new(g, kx, n)))
        } else {
            // no closed static form for a screening (plasma) metal: probe
            // the general path at a small frequency
            let eps = m.permittivity(probe)?;
            Ok(Column::Modal(GratingSolver::new(g, eps, probe, kx, n)?))
        }
    }

    fn density(&self, d: f64, ky: f64, scheme: DerivativeScheme) -> Result<f64> {
        match self {
            Column::Modal(s) => {
                let rp = s.plate(ky)?;
                let rg = s.grating(ky)?;
                gap_density(&rp, &rg, &s.vacuum_decay(ky), d, scheme)
            }
            Column::Static(s) => match scheme {
                DerivativeScheme::Analytic => s.density(d, ky),
                DerivativeScheme::CentralDifference { .. } => s.density(d, ky),
            },
        }
    }
}

fn validate(d: f64, num: &NumericsConfig) -> Result<()> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::domain("d", format!("separation must be positive, got {d}")));
    }
    num.validate()
}

/// Quadrature over the folded zone: k_x graded toward 0 on [0, π/p], k_y on
/// the half line through k_y = t/(d(1 − t)).
#[derive(Debug, Clone)]
pub(crate) struct ZoneRule {
    pub kx: Vec<(f64, f64)>,
    pub ky: Vec<(f64, f64)>,
}

impl ZoneRule {
    pub(crate) fn new(g: &GratingGeometry, d: f64, num: &NumericsConfig) -> Self {
        let kx = graded_panels(&GaussLegendre::new(num.bz_nodes), 0.0, g.zone_edge(), 2.0 / d);
        let ky = GaussLegendre::new(num.ky_nodes).semi_infinite(1.0 / d);
        ZoneRule { kx, ky }
    }
}

/// ∫₀^{π/p} dk_x ∫₀^∞ dk_y of the gap density at frequency ξ (ξ = 0 selects
/// the static treatment).
fn zone_integral(
    xi: f64,
    d: f64,
    g: &GratingGeometry,
    m: &MaterialModel,
    num: &NumericsConfig,
    n: usize,
    rule: &ZoneRule,
) -> Result<f64> {
    let columns: Vec<f64> = rule
        .kx
        .par_iter()
        .map(|&(kx, wx)| -> Result<f64> {
            let column = Column::new(g, m, xi, kx, n, num.static_probe)?;
            let mut row = Vec::with_capacity(rule.ky.len());
            for &(ky, wy) in &rule.ky {
                let v = column.density(d, ky, num.derivative)?;
                if v < -1e-12 * v.abs().max(1.0) {
                    return Err(Error::Physics(format!(
                        "negative gap density {v} at xi = {xi}, kx = {kx}, ky = {ky}"
                    )));
                }
                row.push(wy * v);
            }
            Ok(wx * pairwise_sum(&row))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&columns))
}

/// −k_BT/π² in the series normalisation, converted to Pa.
fn series_norm(env: &Environment) -> f64 {
    -env.thermal_energy() / (PI * PI) * EV_PER_NM3_IN_PA
}

/// Half-weighted l = 0 contribution to P_pg, Pa.
///
/// For a dissipative Drude metal the transverse-electric part vanishes and
/// the metal acts on the TM part as an equipotential, solved with groove
/// modes. A non-dissipative (plasma) metal keeps a screened TE part; it is
/// evaluated through the general path at `num.static_probe`.
pub fn zero_frequency_term(
    d: f64,
    g: &GratingGeometry,
    m: &MaterialModel,
    env: &Environment,
    num: &NumericsConfig,
) -> Result<f64> {
    validate(d, num)?;
    let rule = ZoneRule::new(g, d, num);
    let t0 = zone_integral(0.0, d, g, m, num, num.truncation_n, &rule)?;
    Ok(0.5 * series_norm(env) * t0)
}

struct Evaluation {
    pressure: f64,
    refined: f64,
    zero: f64,
    last_index: usize,
}

fn evaluate(
    d: f64,
    g: &GratingGeometry,
    m: &MaterialModel,
    env: &Environment,
    num: &NumericsConfig,
    n: usize,
) -> Result<Evaluation> {
    let rule = ZoneRule::new(g, d, num);
    match num.frequency_sum {
        FrequencySum::Matsubara => {
            let norm = series_norm(env);
            let kt = env.thermal_energy();
            let t0 = zone_integral(0.0, d, g, m, num, n, &rule)?;
            let series = matsubara_series(
                t0,
                |l| zone_integral(matsubara_frequency(l, env), d, g, m, num, n, &rule),
                num.tail_tolerance,
                num.matsubara_cap,
                |l_from| {
                    // Σ_{l > cap} ≈ (2πk_BT)⁻¹ ∫ dξ from ξ(l_from)
                    let xi0 = 2.0 * PI * kt * l_from;
                    frequency_integral(xi0, d, g, m, num, n, &rule, &GaussLegendre::new(num.ky_nodes))
                        .map(|v| v / (2.0 * PI * kt))
                },
            )?;
            Ok(Evaluation {
                pressure: norm * series.value,
                refined: norm * series.refined,
                zero: 0.5 * norm * t0,
                last_index: series.last_index,
            })
        }
        FrequencySum::ZeroTemperature { nodes } => {
            let integral = frequency_integral(0.0, d, g, m, num, n, &rule, &GaussLegendre::new(nodes))?;
            // k_BT Σ′ → (2π)⁻¹ ∫₀^∞ dξ
            let p = -integral / (2.0 * PI * PI * PI) * EV_PER_NM3_IN_PA;
            Ok(Evaluation {
                pressure: p,
                refined: p,
                zero: 0.0,
                last_index: 0,
            })
        }
    }
}

/// ∫_{ξ0}^∞ dξ of the zone integral on ξ = ξ0 + (ħc/2d)·t/(1 − t).
#[allow(clippy::too_many_arguments)]
fn frequency_integral(
    xi0: f64,
    d: f64,
    g: &GratingGeometry,
    m: &MaterialModel,
    num: &NumericsConfig,
    n: usize,
    rule: &ZoneRule,
    xi_rule: &GaussLegendre,
) -> Result<f64> {
    let mut terms = Vec::with_capacity(xi_rule.len());
    for (x, w) in xi_rule.semi_infinite(HBAR_C / (2.0 * d)) {
        let xi = xi0 + x;
        if xi <= 0.0 {
            continue;
        }
        terms.push(w * zone_integral(xi, d, g, m, num, n, rule)?);
    }
    Ok(pairwise_sum(&terms))
}

/// Plane–grating pressure P_pg(d) in Pa at the configured truncation.
///
/// With `num.estimate_error` the error combines in quadrature the change
/// from halving the Matsubara tail tolerance and the change from N to N + 2;
/// otherwise only the tail part is reported. An error above
/// `num.error_budget·|P|` is returned as [`Error::BudgetExceeded`].
pub fn plane_grating_pressure(
    d: f64,
    g: &GratingGeometry,
    m: &MaterialModel,
    env: &Environment,
    num: &NumericsConfig,
) -> Result<PressurePoint> {
    validate(d, num)?;
    let n = num.truncation_n;
    let base = evaluate(d, g, m, env, num, n)?;
    let tail = base.refined - base.pressure;
    let trunc = if num.estimate_error {
        evaluate(d, g, m, env, num, n + 2)?.refined - base.refined
    } else {
        0.0
    };
    let numeric_error = tail.hypot(trunc);
    let pressure = base.refined;
    if !(pressure < 0.0) {
        return Err(Error::Physics(format!("non-attractive pressure {pressure} Pa at d = {d} nm")));
    }
    let relative = numeric_error / pressure.abs();
    if relative > num.error_budget {
        return Err(Error::BudgetExceeded {
            distance: d,
            relative,
            limit: num.error_budget,
        });
    }
    Ok(PressurePoint {
        d,
        pressure,
        numeric_error,
        zero_frequency: base.zero,
        last_index: base.last_index,
        truncation_n: n,
    })
}

/// [`plane_grating_pressure`] over several separations, in order.
pub fn pressure_curve(
    ds: &[f64],
    g: &GratingGeometry,
    m: &MaterialModel,
    env: &Environment,
    num: &NumericsConfig,
) -> Result<Vec<PressurePoint>> {
    ds.iter().map(|&d| plane_grating_pressure(d, g, m, env, num)).collect()
}
