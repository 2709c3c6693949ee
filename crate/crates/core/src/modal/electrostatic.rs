//! ξ → 0 limit of the TM response: the metal becomes an equipotential, and
//! the field in each vacuum groove is a sum of sine modes vanishing on the
//! walls and on the floor. Matching to the Rayleigh expansion above the
//! ridges gives the reflection operator of the potential directly.
//!
//! With φ = Σ_n e^{iK_n x}(a_n e^{κ_n z} + b_n e^{−κ_n z}), b = R a and
//! κ_n = √(K_n² + k_y²), the flat conductor has R = −I.

use nalgebra::{Complex, DMatrix};
use std::f64::consts::PI;

use super::geometry::{order_wavevectors, GratingGeometry};
use crate::error::{Error, Result};

type C = Complex<f64>;

/// Static solver of one Bloch wavevector k_x.
#[derive(Debug, Clone)]
pub struct StaticSolver {
    kxs: Vec<f64>,
    groove: f64,
    period: f64,
    height: f64,
    /// Overlaps J_{nm} = (1/p)∫ s_m e^{−iK_n x} dx over the groove.
    overlap: DMatrix<C>,
}

fn groove_overlap(k: f64, mu: f64, m: usize, g: f64, p: f64) -> C {
    let i = C::new(0.0, 1.0);
    let phase = (i * (k * g / 2.0)).exp();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let den = mu * mu - k * k;
    let integral = if den.abs() < 1e-9 * mu * mu {
        // K = ±μ
        C::new(0.0, -k.signum() * g / 2.0)
    } else {
        (C::new(1.0, 0.0) - (-i * (k * g)).exp() * sign) * (mu / den)
    };
    phase * integral / p
}

impl StaticSolver {
    /// `truncation_n` sets the Rayleigh orders; the groove gets about
    /// 2N(1 − f) sine modes, at least one.
    pub fn new(g: &GratingGeometry, kx: f64, truncation_n: usize) -> Self {
        let kxs = order_wavevectors(kx, g.period(), truncation_n);
        let groove = g.groove_width();
        let modes = ((2 * truncation_n) as f64 * groove / g.period()).round().max(1.0) as usize;
        let overlap = DMatrix::from_fn(kxs.len(), modes, |n, j| {
            let m = j + 1;
            groove_overlap(kxs[n], m as f64 * PI / groove, m, groove, g.period())
        });
        StaticSolver {
            kxs,
            groove,
            period: g.period(),
            height: g.height(),
            overlap,
        }
    }

    pub fn order_wavevectors(&self) -> &[f64] {
        &self.kxs
    }

    /// κ_n = √(K_n² + k_y²).
    pub fn decay(&self, ky: f64) -> Vec<f64> {
        self.kxs.iter().map(|k| (k * k + ky * ky).sqrt()).collect()
    }

    /// Reflection of the potential by the grating, referenced at the ridge tops.
    pub fn grating(&self, ky: f64) -> Result<DMatrix<C>> {
        let m = self.kxs.len();
        let kappa = self.decay(ky);
        if self.groove == 0.0 || self.height == 0.0 {
            return Ok(-DMatrix::<C>::identity(m, m));
        }
        if self.groove == self.period {
            // no ridges: the floor, recessed by h
            return Ok(DMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    C::new(-(-2.0 * kappa[i] * self.height).exp(), 0.0)
                } else {
                    C::new(0.0, 0.0)
                }
            }));
        }
        let g = self.groove;
        let h = self.height;
        let mut scaled = self.overlap.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            let gamma = (((j + 1) as f64 * PI / g).powi(2) + ky * ky).sqrt();
            let t = (gamma * h).tanh();
            // 1/D_j = 2p tanh(γh)/(γ g)
            col *= C::new(2.0 * self.period * t / (gamma * g), 0.0);
        }
        let mut q = scaled * self.overlap.adjoint();
        for (j, mut col) in q.column_iter_mut().enumerate() {
            col *= C::new(kappa[j], 0.0);
        }
        let id = DMatrix::<C>::identity(m, m);
        let lhs = &id + &q;
        let rhs = &q - &id;
        lhs.lu().solve(&rhs).ok_or_else(|| Error::IllConditioned {
            condition: f64::INFINITY,
            xi: 0.0,
            kx: self.kxs[m / 2],
            ky,
        })
    }

    /// ∂_d log det(I + K R K) with K = diag(e^{−κd}), the gap density of the
    /// static term against a flat conductor. Non-negative.
    pub fn density(&self, d: f64, ky: f64) -> Result<f64> {
        let r = self.grating(ky)?;
        let kappa = self.decay(ky);
        let m = kappa.len();
        let prop: Vec<f64> = kappa.iter().map(|k| (-k * d).exp()).collect();
        let b = DMatrix::from_fn(m, m, |i, j| r[(i, j)] * (prop[i] * prop[j]));
        let a = &b + DMatrix::<C>::identity(m, m);
        let x = a.lu().solve(&b).ok_or_else(|| Error::IllConditioned {
            condition: f64::INFINITY,
            xi: 0.0,
            kx: self.kxs[m / 2],
            ky,
        })?;
        let tr: f64 = (0..m).map(|i| kappa[i] * x[(i, i)].re).sum();
        Ok(-2.0 * tr)
    }
}
