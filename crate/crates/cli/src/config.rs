//! Run configuration (TOML).
//!
//! ```toml
//! method = "scattering"            # scattering | pfa | ema | lifshitz
//!
//! [geometry]                       # required, nm
//! p = 350.0
//! w = 130.0
//! h = 400.0
//!
//! [material]                       # eV
//! plasma_frequency = 8.39
//! dissipation_rate = 0.0434
//! kind = "drude"                   # drude | plasma
//!
//! [environment]
//! temperature = 300.0              # K
//!
//! [probe]
//! radius = 151.7                   # μm
//!
//! [grid]                           # nm
//! start = 200.0
//! stop = 1000.0
//! count = 9
//! spacing = "linear"               # linear | log
//!
//! [numerics]                       # any NumericsConfig field
//! truncation_n = 10
//!
//! [analysis]
//! n_short = 10
//! n_long = 35
//! d_breakpoint = 300.0
//! d_max = 1000.0
//! errors = "linear"                # linear | quadrature
//! offset = 0.0                     # nm added to measured distances
//! ```
//!
//! Every section but `[geometry]` may be omitted, as may any of its keys.

use serde::{Deserialize, Serialize};
use std::path::Path;

use lamella_core::analysis::{BinSchedule, ErrorCombination};
use lamella_core::materials::{GOLD_DISSIPATION_RATE, GOLD_PLASMA_FREQUENCY};
use lamella_core::modal::GratingGeometry;
use lamella_core::pfa::{SphereProbe, DEFAULT_SPHERE_RADIUS};
use lamella_core::{Environment, MaterialKind, MaterialModel, NumericsConfig};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Scattering,
    Pfa,
    Ema,
    Lifshitz,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Scattering => "scattering",
            Method::Pfa => "pfa",
            Method::Ema => "ema",
            Method::Lifshitz => "lifshitz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    p: Option<f64>,
    w: Option<f64>,
    h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialSection {
    pub plasma_frequency: f64,
    pub dissipation_rate: f64,
    pub kind: MaterialKind,
}

impl Default for MaterialSection {
    fn default() -> Self {
        MaterialSection {
            plasma_frequency: GOLD_PLASMA_FREQUENCY,
            dissipation_rate: GOLD_DISSIPATION_RATE,
            kind: MaterialKind::Drude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentSection {
    pub temperature: f64,
}

impl Default for EnvironmentSection {
    fn default() -> Self {
        EnvironmentSection { temperature: 300.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub radius: f64,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection { radius: DEFAULT_SPHERE_RADIUS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { start: 200.0, stop: 1000.0, count: 9, spacing: Spacing::Linear }
    }
}

impl GridSection {
    pub fn distances(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub n_short: usize,
    pub n_long: usize,
    pub d_breakpoint: f64,
    pub d_max: f64,
    pub errors: ErrorCombination,
    pub offset: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let s = BinSchedule::default();
        AnalysisSection {
            n_short: s.n_short,
            n_long: s.n_long,
            d_breakpoint: s.d_breakpoint,
            d_max: s.d_max,
            errors: ErrorCombination::Linear,
            offset: 0.0,
        }
    }
}

impl AnalysisSection {
    pub fn schedule(&self) -> BinSchedule {
        BinSchedule {
            n_short: self.n_short,
            n_long: self.n_long,
            d_breakpoint: self.d_breakpoint,
            d_max: self.d_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    method: Method,
    geometry: Option<RawGeometry>,
    #[serde(default)]
    material: MaterialSection,
    #[serde(default)]
    environment: EnvironmentSection,
    #[serde(default)]
    probe: ProbeSection,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    numerics: NumericsConfig,
    #[serde(default)]
    analysis: AnalysisSection,
}

/// A configuration checked against every precondition of the library.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub method: Method,
    pub geometry: GratingGeometry,
    pub material: MaterialModel,
    pub environment: Environment,
    pub probe: SphereProbe,
    pub grid: GridSection,
    pub numerics: NumericsConfig,
    pub analysis: AnalysisSection,
}

fn config_err(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {reason}"))
}

fn prefixed(section: &str) -> impl Fn(lamella_core::Error) -> CliError + '_ {
    move |e| match e {
        lamella_core::Error::Domain { name, reason } => {
            let field = if name.contains('.') { name.to_string() } else { format!("{section}.{name}") };
            config_err(&field, reason)
        }
        other => config_err(section, other),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let geo = raw.geometry.ok_or_else(|| config_err("geometry", "missing section"))?;
        let p = geo.p.ok_or_else(|| config_err("geometry.p", "missing field"))?;
        let w = geo.w.ok_or_else(|| config_err("geometry.w", "missing field"))?;
        let h = geo.h.ok_or_else(|| config_err("geometry.h", "missing field"))?;
        let geometry = GratingGeometry::new(p, w, h).map_err(prefixed("geometry"))?;

        let m = &raw.material;
        let material =
            MaterialModel::new(m.plasma_frequency, m.dissipation_rate, m.kind).map_err(prefixed("material"))?;
        let environment = Environment::new(raw.environment.temperature).map_err(prefixed("environment"))?;
        let probe = SphereProbe::new(raw.probe.radius)
            .map_err(|e| config_err("probe.radius", e))?;
        raw.numerics.validate().map_err(prefixed("numerics"))?;

        let grid = raw.grid;
        if !(grid.start > 0.0 && grid.start.is_finite()) {
            return Err(config_err("grid.start", "must be positive"));
        }
        if !(grid.stop >= grid.start && grid.stop.is_finite()) {
            return Err(config_err("grid.stop", "must not be below grid.start"));
        }
        if grid.count < 1 {
            return Err(config_err("grid.count", "must be at least 1"));
        }
        if grid.count > 1 && grid.stop == grid.start {
            return Err(config_err("grid.stop", "equals grid.start with more than one point"));
        }
        if raw.method == Method::Pfa {
            if let Some(d) = grid.distances().into_iter().find(|&d| !probe.is_valid_at(d)) {
                return Err(config_err("probe.radius", format!("d = {d} nm exceeds the proximity limit d/R ≤ 0.05")));
            }
        }
        raw.analysis.schedule().validate().map_err(prefixed("analysis"))?;
        if !raw.analysis.offset.is_finite() {
            return Err(config_err("analysis.offset", "must be finite"));
        }

        Ok(RunConfig {
            method: raw.method,
            geometry,
            material,
            environment,
            probe,
            grid,
            numerics: raw.numerics,
            analysis: raw.analysis,
        })
    }

    /// SHA-256 of the canonical JSON form of the validated configuration.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(self).expect("configuration serialises");
        hex::encode(Sha256::digest(bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[geometry]\np = 350.0\nw = 130.0\nh = 400.0\n";

    #[test]
    fn defaults_fill_optional_sections() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.method, Method::Scattering);
        assert_eq!(c.material, MaterialModel::gold());
        assert_eq!(c.environment.temperature(), 300.0);
        assert_eq!(c.probe.radius_um(), 151.7);
        assert_eq!(c.grid.distances().len(), 9);
    }

    #[test]
    fn missing_height_is_named() {
        let err = RunConfig::parse("[geometry]\np = 350.0\nw = 130.0\n").unwrap_err();
        assert!(err.to_string().contains("geometry.h"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn invalid_values_are_named() {
        let err = RunConfig::parse("[geometry]\np = 350.0\nw = 400.0\nh = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("geometry.w"), "{err}");
        let err = RunConfig::parse(&format!("{MINIMAL}[numerics]\nbz_nodes = 0\n")).unwrap_err();
        assert!(err.to_string().contains("numerics.bz_nodes"), "{err}");
        let err = RunConfig::parse(&format!("{MINIMAL}[grid]\ncolor = 1\n")).unwrap_err();
        assert!(err.to_string().contains("color"), "{err}");
    }

    #[test]
    fn log_grid_hits_both_ends() {
        let g = GridSection { start: 100.0, stop: 10000.0, count: 3, spacing: Spacing::Log };
        let d = g.distances();
        assert_eq!(d[0], 100.0);
        assert!((d[1] - 1000.0).abs() < 1e-9 && (d[2] - 10000.0).abs() < 1e-9);
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::parse(MINIMAL).unwrap();
        let b = RunConfig::parse(&format!("{MINIMAL}\n# comment\n")).unwrap();
        let c = RunConfig::parse(&format!("method = \"pfa\"\n{MINIMAL}")).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }
}
