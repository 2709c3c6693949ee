//! Reduction of measured pressure curves and comparison with theory.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::units::{from_millipascal, to_millipascal};

/// One measured point. Pressures and their errors in Pa, distances in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredPoint {
    pub d: f64,
    pub pressure: f64,
    pub random_error: f64,
    pub systematic_error: f64,
    pub distance_error: f64,
}

/// Points with strictly increasing d and non-negative errors.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MeasuredCurve {
    points: Vec<MeasuredPoint>,
}

impl MeasuredCurve {
    pub fn new(points: Vec<MeasuredPoint>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !(p.d.is_finite() && p.pressure.is_finite()) {
                return Err(Error::domain("curve", format!("non-finite value at row {i}")));
            }
            if !(p.random_error >= 0.0 && p.systematic_error >= 0.0 && p.distance_error >= 0.0) {
                return Err(Error::domain("curve", format!("negative error at row {i}")));
            }
            if i > 0 && !(p.d > points[i - 1].d) {
                return Err(Error::domain("curve", format!("distances not strictly increasing at row {i}")));
            }
        }
        Ok(MeasuredCurve { points })
    }

    pub fn points(&self) -> &[MeasuredPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Adds a constant offset to every distance.
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        Self::new(self.points.iter().map(|p| MeasuredPoint { d: p.d + offset, ..*p }).collect())
    }
}

/// Window length n(d): `n_short` below the breakpoint, `n_long` from
/// `d_max` on, linear in between and rounded to the nearest integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSchedule {
    pub n_short: usize,
    pub n_long: usize,
    pub d_breakpoint: f64,
    pub d_max: f64,
}

impl Default for BinSchedule {
    fn default() -> Self {
        BinSchedule { n_short: 10, n_long: 35, d_breakpoint: 300.0, d_max: 1000.0 }
    }
}

impl BinSchedule {
    /// Same window everywhere.
    pub fn constant(n: usize) -> Self {
        BinSchedule { n_short: n, n_long: n, d_breakpoint: 0.0, d_max: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_short < 1 || self.n_short > self.n_long {
            return Err(Error::domain("schedule", "need 1 ≤ n_short ≤ n_long"));
        }
        if !(self.d_max > self.d_breakpoint) {
            return Err(Error::domain("schedule", "d_max must exceed d_breakpoint"));
        }
        Ok(())
    }

    pub fn window(&self, d: f64) -> usize {
        if d < self.d_breakpoint {
            return self.n_short;
        }
        if d >= self.d_max {
            return self.n_long;
        }
        let t = (d - self.d_breakpoint) / (self.d_max - self.d_breakpoint);
        let n = self.n_short as f64 + t * (self.n_long - self.n_short) as f64;
        n.round() as usize
    }
}

/// Weighted rolling average with weights δP⁻².
///
/// A window of n(d_i) consecutive points starts at every point i while the
/// curve has enough points left. The averaged point sits at the mean
/// distance; its random error is (Σ δP⁻²)^{−1/2}, its distance error the
/// spread (population standard deviation) of the window distances and its
/// systematic error the window mean.
pub fn rolling_weighted_average(curve: &MeasuredCurve, sched: &BinSchedule) -> Result<MeasuredCurve> {
    sched.validate()?;
    let pts = curve.points();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        let n = sched.window(pts[i].d);
        if i + n > pts.len() {
            break;
        }
        let window = &pts[i..i + n];
        if let Some(bad) = window.iter().find(|p| p.random_error == 0.0) {
            return Err(Error::domain(
                "random_error",
                format!("zero random error at d = {} nm gives an infinite weight", bad.d),
            ));
        }
        let (mut sw, mut swp) = (0.0, 0.0);
        for p in window {
            let w = p.random_error.powi(-2);
            sw += w;
            swp += w * p.pressure;
        }
        let nf = n as f64;
        let d_mean = window.iter().map(|p| p.d).sum::<f64>() / nf;
        let spread = (window.iter().map(|p| (p.d - d_mean).powi(2)).sum::<f64>() / nf).sqrt();
        out.push(MeasuredPoint {
            d: d_mean,
            pressure: swp / sw,
            random_error: sw.powf(-0.5),
            systematic_error: window.iter().map(|p| p.systematic_error).sum::<f64>() / nf,
            distance_error: spread,
        });
    }
    MeasuredCurve::new(out)
}

/// How random and systematic errors are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorCombination {
    #[default]
    Linear,
    Quadrature,
}

/// Total error: plain addition of the two channels.
pub fn combine_errors(random: f64, systematic: f64) -> Result<f64> {
    combine_errors_with(random, systematic, ErrorCombination::Linear)
}

pub fn combine_errors_with(random: f64, systematic: f64, mode: ErrorCombination) -> Result<f64> {
    if !(random >= 0.0 && systematic >= 0.0) {
        return Err(Error::domain("error", "error channels must be non-negative"));
    }
    Ok(match mode {
        ErrorCombination::Linear => random + systematic,
        ErrorCombination::Quadrature => random.hypot(systematic),
    })
}

/// P/P_ref at one distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub d: f64,
    pub ratio: f64,
    pub ratio_err: f64,
}

/// Pointwise ratio to a reference pressure `reference(d)` (Pa); the total
/// error of each point, combined per `mode`, is carried over relatively.
pub fn normalize_by<F>(curve: &MeasuredCurve, mode: ErrorCombination, mut reference: F) -> Result<Vec<RatioPoint>>
where
    F: FnMut(f64) -> Result<f64>,
{
    curve
        .points()
        .iter()
        .map(|p| {
            let r = reference(p.d)?;
            if r == 0.0 {
                return Err(Error::domain("reference", format!("zero reference pressure at d = {} nm", p.d)));
            }
            let err = combine_errors_with(p.random_error, p.systematic_error, mode)?;
            Ok(RatioPoint { d: p.d, ratio: p.pressure / r, ratio_err: err / r.abs() })
        })
        .collect()
}

/// Ratio of a curve to the PFA pressure of the grating `g`.
pub fn normalize_by_pfa(
    curve: &MeasuredCurve,
    g: &crate::modal::GratingGeometry,
    m: &crate::materials::MaterialModel,
    env: &crate::materials::Environment,
    num: &crate::numerics::NumericsConfig,
    mode: ErrorCombination,
) -> Result<Vec<RatioPoint>> {
    normalize_by(curve, mode, |d| crate::pfa::pfa_pressure(d, g, m, env, num))
}

/// Maps a curve measured on a grating of period `p_from` onto the one
/// expected for period `p_to` at equal f and negligible other lengths:
/// d → d·p_to/p_from, P → P·(p_from/p_to)⁴.
///
/// For P ∝ d⁻ⁿ the image is (p_from/p_to)^{4−n} times the original law.
pub fn scaling_transform(curve: &MeasuredCurve, p_from: f64, p_to: f64) -> Result<MeasuredCurve> {
    if !(p_from > 0.0 && p_to > 0.0) {
        return Err(Error::domain("period", "periods must be positive"));
    }
    let s = p_to / p_from;
    let factor = s.powi(-4);
    MeasuredCurve::new(
        curve
            .points()
            .iter()
            .map(|p| MeasuredPoint {
                d: p.d * s,
                pressure: p.pressure * factor,
                random_error: p.random_error * factor,
                systematic_error: p.systematic_error * factor,
                distance_error: p.distance_error * s,
            })
            .collect(),
    )
}

/// Local exponent n of |P| ∝ d⁻ⁿ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawPoint {
    /// Geometric centre of the window.
    pub d: f64,
    pub exponent: f64,
}

/// Least-squares slope of log|P| against log d over every run of `window`
/// consecutive points.
pub fn local_power_law(curve: &MeasuredCurve, window: usize) -> Result<Vec<PowerLawPoint>> {
    if window < 3 {
        return Err(Error::domain("window", "needs at least 3 points"));
    }
    let pts = curve.points();
    if pts.iter().any(|p| p.pressure == 0.0 || p.d <= 0.0) {
        return Err(Error::domain("curve", "power law needs positive d and non-zero P"));
    }
    let mut out = Vec::new();
    for w in pts.windows(window) {
        let xs: Vec<f64> = w.iter().map(|p| p.d.ln()).collect();
        let ys: Vec<f64> = w.iter().map(|p| p.pressure.abs().ln()).collect();
        let nf = window as f64;
        let mx = xs.iter().sum::<f64>() / nf;
        let my = ys.iter().sum::<f64>() / nf;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        if !(sxx > 1e-24) {
            return Err(Error::domain("window", "distances in a window do not spread"));
        }
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        out.push(PowerLawPoint { d: mx.exp(), exponent: -sxy / sxx });
    }
    Ok(out)
}

const HEADER: [&str; 4] = ["d_nm", "pressure_mPa", "random_err_mPa", "systematic_err_mPa"];

/// Reads "d_nm,pressure_mPa,random_err_mPa,systematic_err_mPa" rows; the
/// header is required, extra columns are ignored.
pub fn read_curve_csv<R: Read>(reader: R) -> Result<MeasuredCurve> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::domain("csv", e.to_string()))?.clone();
    let mut idx = [0usize; 4];
    for (slot, name) in idx.iter_mut().zip(HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::domain("csv", format!("missing column {name}")))?;
    }
    let mut points = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::domain("csv", e.to_string()))?;
        let mut v = [0.0; 4];
        for (k, &i) in idx.iter().enumerate() {
            let field = rec.get(i).unwrap_or("");
            v[k] = field
                .parse()
                .map_err(|_| Error::domain("csv", format!("row {}: cannot parse {:?} as {}", row + 1, field, HEADER[k])))?;
        }
        points.push(MeasuredPoint {
            d: v[0],
            pressure: from_millipascal(v[1]),
            random_error: from_millipascal(v[2]),
            systematic_error: from_millipascal(v[3]),
            distance_error: 0.0,
        });
    }
    MeasuredCurve::new(points)
}

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::domain("output", e.to_string())
}

/// Writes a curve in the ingest schema, or with "ratio,ratio_err" appended
/// when `ratios` (one per point) are given.
pub fn write_curve_csv<W: Write>(writer: W, curve: &MeasuredCurve, ratios: Option<&[RatioPoint]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = HEADER.to_vec();
    if ratios.is_some() {
        header.extend(["ratio", "ratio_err"]);
    }
    w.write_record(&header).map_err(io_error)?;
    for (i, p) in curve.points().iter().enumerate() {
        let mut row = vec![
            p.d.to_string(),
            to_millipascal(p.pressure).to_string(),
            to_millipascal(p.random_error).to_string(),
            to_millipascal(p.systematic_error).to_string(),
        ];
        if let Some(r) = ratios {
            let r = r.get(i).ok_or_else(|| io_error("fewer ratios than points"))?;
            row.push(r.ratio.to_string());
            row.push(r.ratio_err.to_string());
        }
        w.write_record(&row).map_err(io_error)?;
    }
    w.flush().map_err(io_error)
}
