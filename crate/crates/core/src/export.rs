//! Flat-file outputs: scenario and band CSVs, Q-Q data, coverage reports,
//! dependency-graph DOT/JSON. All numeric cells use Rust's shortest-exact
//! float formatting, so identical inputs produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::DependencyGraph;
use crate::simulate::{CoverageReport, ScenarioBand, ScenarioBatch};

fn open(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(BufWriter::new(file))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

macro_rules! emit {
    ($w:expr, $path:expr, $($arg:tt)*) => {
        writeln!($w, $($arg)*).map_err(|source| Error::Io {
            path: $path.display().to_string(),
            source,
        })?
    };
}

/// One row per (scenario, variable, lag): `scenario,kind,zone,lag,value`.
pub fn write_scenarios_csv(path: &Path, batch: &ScenarioBatch) -> Result<()> {
    let mut w = open(path)?;
    emit!(w, path, "scenario,kind,zone,lag,value");
    for i in 0..batch.m {
        for (z, var) in batch.variables.iter().enumerate() {
            for l in 0..batch.lags {
                emit!(
                    w,
                    path,
                    "{i},{},{},{l},{}",
                    var.kind,
                    var.zone,
                    batch.get(i, z, l)
                );
            }
        }
    }
    finish(w, path)
}

/// One row per coordinate: `kind,zone,lag,lower,upper`.
pub fn write_band_csv(path: &Path, band: &ScenarioBand) -> Result<()> {
    let mut w = open(path)?;
    emit!(w, path, "kind,zone,lag,lower,upper");
    for (z, var) in band.variables.iter().enumerate() {
        for l in 0..band.lags {
            emit!(
                w,
                path,
                "{},{},{l},{},{}",
                var.kind,
                var.zone,
                band.lower_at(z, l),
                band.upper_at(z, l)
            );
        }
    }
    finish(w, path)
}

/// Side-by-side bands from the heavy-tailed and Gaussian fits.
pub fn write_band_comparison_csv(
    path: &Path,
    tails_on: &ScenarioBand,
    tails_off: &ScenarioBand,
) -> Result<()> {
    if tails_on.variables != tails_off.variables || tails_on.lags != tails_off.lags {
        return Err(Error::Mismatch(
            "band comparison requires identical variable lists and lags".into(),
        ));
    }
    let mut w = open(path)?;
    emit!(
        w,
        path,
        "kind,zone,lag,lower_tails_on,upper_tails_on,lower_tails_off,upper_tails_off"
    );
    for (z, var) in tails_on.variables.iter().enumerate() {
        for l in 0..tails_on.lags {
            emit!(
                w,
                path,
                "{},{},{l},{},{},{},{}",
                var.kind,
                var.zone,
                tails_on.lower_at(z, l),
                tails_on.upper_at(z, l),
                tails_off.lower_at(z, l),
                tails_off.upper_at(z, l)
            );
        }
    }
    finish(w, path)
}

/// Sorted Q-Q pairs: `theoretical,empirical`.
pub fn write_qq_csv(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    let mut w = open(path)?;
    emit!(w, path, "theoretical,empirical");
    for (t, e) in points {
        emit!(w, path, "{t},{e}");
    }
    finish(w, path)
}

/// Per-coordinate band coverage of an actual path, plus the realized values.
pub fn write_coverage_csv(
    path: &Path,
    band: &ScenarioBand,
    actuals: &[f64],
    report: &CoverageReport,
) -> Result<()> {
    let zl = band.variables.len() * band.lags;
    if actuals.len() != zl || report.inside.len() != zl {
        return Err(Error::Mismatch(
            "coverage export requires matching band, actuals, and report sizes".into(),
        ));
    }
    let mut w = open(path)?;
    emit!(w, path, "kind,zone,lag,actual,lower,upper,inside");
    for (z, var) in band.variables.iter().enumerate() {
        for l in 0..band.lags {
            let c = z * band.lags + l;
            emit!(
                w,
                path,
                "{},{},{l},{},{},{},{}",
                var.kind,
                var.zone,
                actuals[c],
                band.lower[c],
                band.upper[c],
                report.inside[c]
            );
        }
    }
    finish(w, path)
}

/// Writes a dependency graph as DOT and JSON next to each other:
/// `<stem>.dot` and `<stem>.json` inside `dir`.
pub fn write_graph_files(dir: &Path, stem: &str, graph: &DependencyGraph) -> Result<()> {
    let dot_path = dir.join(format!("{stem}.dot"));
    let json_path = dir.join(format!("{stem}.json"));
    write_text(&dot_path, &graph.to_dot(stem))?;
    write_text(&json_path, &graph.to_json()?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
