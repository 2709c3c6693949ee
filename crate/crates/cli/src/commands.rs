use std::path::Path;

use lamella_core::analysis::{self, MeasuredCurve};
use lamella_core::materials::matsubara_frequency;
use lamella_core::modal::{grating_modes, BlochPoint};
use lamella_core::units::to_millipascal;
use lamella_core::{ema, lifshitz, pfa, scattering, NumericsConfig};

use crate::config::{Method, RunConfig};
use crate::output::{Cell, Manifest, PointRecord, Table};
use crate::{CliError, Knob};

/// Pressure and numerical error (Pa) at one distance.
struct Sample {
    d: f64,
    pressure: f64,
    error: f64,
}

fn sample(c: &RunConfig, method: Method, d: f64, num: &NumericsConfig) -> Result<Sample, CliError> {
    let (g, m, env) = (&c.geometry, &c.material, &c.environment);
    // the planar paths check their quadratures to tail_tolerance
    let planar = |p: f64| Sample { d, pressure: p, error: p.abs() * num.tail_tolerance };
    Ok(match method {
        Method::Scattering => {
            let p = scattering::plane_grating_pressure(d, g, m, env, num)?;
            Sample { d, pressure: p.pressure, error: p.numeric_error }
        }
        Method::Pfa => planar(pfa::pfa_pressure(d, g, m, env, num)?),
        Method::Ema => planar(ema::ema_pressure(d, g, m, env, num)?),
        Method::Lifshitz => planar(lifshitz::lifshitz_pressure(d, m, env, num)?),
    })
}

fn record(s: &Sample) -> PointRecord {
    PointRecord {
        d_nm: s.d,
        pressure_mpa: to_millipascal(s.pressure),
        numeric_error_mpa: to_millipascal(s.error),
        relative_error: s.error / s.pressure.abs(),
    }
}

fn manifest(command: &str, configs: &[&RunConfig], points: Vec<PointRecord>) -> Result<Manifest, CliError> {
    let budget = configs.first().map_or(0.0, |c| c.numerics.error_budget);
    if let Some(bad) = points.iter().find(|p| !(p.relative_error <= budget)) {
        return Err(lamella_core::Error::BudgetExceeded {
            distance: bad.d_nm,
            relative: bad.relative_error,
            limit: budget,
        }
        .into());
    }
    Ok(Manifest {
        command: command.to_string(),
        library_version: lamella_core::VERSION,
        config_sha256: configs.iter().map(|c| c.hash()).collect(),
        error_budget: budget,
        points,
    })
}

fn samples(c: &RunConfig, method: Method) -> Result<Vec<Sample>, CliError> {
    c.grid.distances().into_iter().map(|d| sample(c, method, d, &c.numerics)).collect()
}

pub fn curve(c: &RunConfig, method: Method) -> Result<(Table, Manifest), CliError> {
    let rows = samples(c, method)?;
    let mut t = Table::new(&["d_nm", "pressure_mPa", "numeric_error_mPa"]);
    for s in &rows {
        t.push(vec![
            Some(Cell::Num(s.d)),
            Some(Cell::Num(to_millipascal(s.pressure))),
            Some(Cell::Num(to_millipascal(s.error))),
        ]);
    }
    let m = manifest(method.name(), &[c], rows.iter().map(record).collect())?;
    Ok((t, m))
}

pub fn modes(c: &RunConfig, xi: Option<f64>, kx: f64, ky: f64) -> Result<(Table, Manifest), CliError> {
    let xi = xi.unwrap_or_else(|| matsubara_frequency(1, &c.environment));
    let pt = BlochPoint::new(kx, ky, xi, &c.geometry)?;
    let eps = c.material.permittivity(xi)?;
    let set = grating_modes(&c.geometry, eps, &pt, c.numerics.truncation_n)?;
    let (ex0, hx0) = set.decay_constants();
    let mut t = Table::new(&["family", "index", "kappa_per_nm", "residual"]);
    for (family, values) in [("ex0", ex0), ("hx0", hx0)] {
        for (i, k) in values.into_iter().enumerate() {
            t.push(vec![
                Some(Cell::Text(family.into())),
                Some(Cell::Int(i)),
                Some(Cell::Num(k)),
                Some(Cell::Num(set.residual())),
            ]);
        }
    }
    Ok((t, manifest("modes", &[c], Vec::new())?))
}

fn with_knob(num: &NumericsConfig, knob: Knob, value: usize) -> NumericsConfig {
    let mut n = num.clone();
    match knob {
        Knob::N => n.truncation_n = value,
        Knob::MatsubaraCap => n.matsubara_cap = value,
        Knob::BzNodes => n.bz_nodes = value,
        Knob::KyNodes => n.ky_nodes = value,
    }
    n
}

fn knob_value(num: &NumericsConfig, knob: Knob) -> usize {
    match knob {
        Knob::N => num.truncation_n,
        Knob::MatsubaraCap => num.matsubara_cap,
        Knob::BzNodes => num.bz_nodes,
        Knob::KyNodes => num.ky_nodes,
    }
}

pub fn convergence(c: &RunConfig, knob: Knob, d: Option<f64>, steps: usize) -> Result<(Table, Manifest), CliError> {
    if steps < 1 {
        return Err(CliError::Config("--steps: must be at least 1".into()));
    }
    let d = d.unwrap_or(c.grid.start);
    let start = knob_value(&c.numerics, knob);
    let name = match knob {
        Knob::N => "N",
        Knob::MatsubaraCap => "matsubara_cap",
        Knob::BzNodes => "bz_nodes",
        Knob::KyNodes => "ky_nodes",
    };
    let mut t = Table::new(&["knob", "value", "d_nm", "pressure_mPa", "numeric_error_mPa", "relative_delta"]);
    let mut records = Vec::new();
    let mut prev: Option<f64> = None;
    for k in 0..steps {
        let value = start << k;
        let s = sample(c, c.method, d, &with_knob(&c.numerics, knob, value))?;
        let delta = prev.map(|p| ((s.pressure - p) / p).abs());
        t.push(vec![
            Some(Cell::Text(name.into())),
            Some(Cell::Int(value)),
            Some(Cell::Num(d)),
            Some(Cell::Num(to_millipascal(s.pressure))),
            Some(Cell::Num(to_millipascal(s.error))),
            delta.map(Cell::Num),
        ]);
        prev = Some(s.pressure);
        records.push(record(&s));
    }
    Ok((t, manifest("convergence", &[c], records)?))
}

pub fn compare(configs: &[RunConfig]) -> Result<(Table, Manifest), CliError> {
    let first = configs
        .first()
        .ok_or_else(|| CliError::Config("compare: at least one configuration required".into()))?;
    for (i, c) in configs.iter().enumerate().skip(1) {
        if c.geometry != first.geometry {
            return Err(CliError::Config(format!("geometry: configuration {} differs from the first", i + 1)));
        }
        if c.grid.distances() != first.grid.distances() {
            return Err(CliError::Config(format!("grid: configuration {} differs from the first", i + 1)));
        }
    }
    let mut labels: Vec<String> = Vec::new();
    for (i, c) in configs.iter().enumerate() {
        let base = c.method.name();
        let label = if labels.iter().any(|l| l == base) { format!("{base}_{}", i + 1) } else { base.to_string() };
        labels.push(label);
    }
    let curves = configs.iter().map(|c| samples(c, c.method)).collect::<Result<Vec<_>, _>>()?;

    let mut columns = vec!["d_nm".to_string()];
    columns.extend(labels.iter().map(|l| format!("{l}_mPa")));
    columns.extend(labels.iter().skip(1).map(|l| format!("ratio_{}_{l}", labels[0])));
    let mut t = Table { columns, rows: Vec::new() };
    for (i, reference) in curves[0].iter().enumerate() {
        let mut row = vec![Some(Cell::Num(reference.d))];
        row.extend(curves.iter().map(|c| Some(Cell::Num(to_millipascal(c[i].pressure)))));
        row.extend(curves.iter().skip(1).map(|c| Some(Cell::Num(reference.pressure / c[i].pressure))));
        t.push(row);
    }
    let records = curves.iter().flatten().map(record).collect();
    let refs: Vec<&RunConfig> = configs.iter().collect();
    Ok((t, manifest("compare", &refs, records)?))
}

pub fn smooth(c: &RunConfig, input: &Path, normalize: bool) -> Result<(Table, Manifest), CliError> {
    let file = std::fs::File::open(input).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    let curve: MeasuredCurve = analysis::read_curve_csv(file).map_err(|e| match e {
        lamella_core::Error::Domain { reason, .. } => CliError::Config(format!("{}: {reason}", input.display())),
        other => other.into(),
    })?;
    let curve = curve.shifted(c.analysis.offset)?;
    let avg = analysis::rolling_weighted_average(&curve, &c.analysis.schedule())?;

    let mut columns = vec!["d_nm", "pressure_mPa", "random_err_mPa", "systematic_err_mPa", "distance_err_nm"];
    let mut records = Vec::new();
    let ratios = if normalize {
        columns.extend(["ratio", "ratio_err"]);
        let mut refs = Vec::new();
        let r = analysis::normalize_by(&avg, c.analysis.errors, |d| {
            let s = sample(c, Method::Pfa, d, &c.numerics).map_err(|e| match e {
                CliError::Library(e) => e,
                other => lamella_core::Error::Physics(other.to_string()),
            })?;
            let p = s.pressure;
            refs.push(s);
            Ok(p)
        })?;
        records = refs.iter().map(record).collect();
        Some(r)
    } else {
        None
    };
    let mut t = Table::new(&columns);
    for (i, p) in avg.points().iter().enumerate() {
        let mut row = vec![
            Some(Cell::Num(p.d)),
            Some(Cell::Num(to_millipascal(p.pressure))),
            Some(Cell::Num(to_millipascal(p.random_error))),
            Some(Cell::Num(to_millipascal(p.systematic_error))),
            Some(Cell::Num(p.distance_error)),
        ];
        if let Some(r) = &ratios {
            row.push(Some(Cell::Num(r[i].ratio)));
            row.push(Some(Cell::Num(r[i].ratio_err)));
        }
        t.push(row);
    }
    Ok((t, manifest("smooth", &[c], records)?))
}
