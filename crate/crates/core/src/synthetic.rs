//! Seeded synthetic dataset generator with known ground truth.
//!
//! The generator draws forecast-deviation rows from an exactly specified
//! model: a block-diagonal spatial correlation (load zones and wind zones
//! independent of each other), an AR(1) temporal correlation across lead
//! times, a Gaussian copula, and a shared heavy-tailed marginal with a
//! normal body and generalized Pareto tails. Actual series are generated
//! first; forecasts are derived as `actual - deviation`, so the written CSV
//! files are mutually consistent and the deviation panel recovered at ingest
//! equals the drawn rows (up to optional rounding).
//!
//! Optionally one issue time's deviations are replaced by a deep
//! lower-tail path, giving a known extreme event whose realized values are
//! returned for band-coverage experiments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, SecondsFormat, TimeZone, Utc};
use nalgebra::{Cholesky, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::config::{RunConfig, SourceFile};
use crate::error::{Error, Result};
use crate::export::write_text;
use crate::glasso::SymMatrix;
use crate::normal::{norm_cdf, norm_quantile};
use crate::panel::{VariableId, VariableKind};
use crate::tails::{gpd_excess_at_survival, gpd_survival};

/// Distribution with a centered normal body and GPD tails spliced in at the
/// `tail_prob` quantiles. Defined through its quantile function, which is
/// continuous and strictly increasing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrueMarginal {
    pub body_sd: f64,
    /// Mass in each tail.
    pub tail_prob: f64,
    /// Lower-tail GPD (xi, beta).
    pub lower: (f64, f64),
    /// Upper-tail GPD (xi, beta).
    pub upper: (f64, f64),
}

impl TrueMarginal {
    pub fn quantile(&self, u: f64) -> f64 {
        assert!(u > 0.0 && u < 1.0, "u must lie in (0, 1), got {u}");
        let p = self.tail_prob;
        let threshold = self.body_sd * norm_quantile(1.0 - p);
        if u < p {
            let (xi, beta) = self.lower;
            -threshold - gpd_excess_at_survival(u / p, xi, beta)
        } else if u > 1.0 - p {
            let (xi, beta) = self.upper;
            threshold + gpd_excess_at_survival((1.0 - u) / p, xi, beta)
        } else {
            self.body_sd * norm_quantile(u)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let p = self.tail_prob;
        let threshold = self.body_sd * norm_quantile(1.0 - p);
        if x < -threshold {
            let (xi, beta) = self.lower;
            p * gpd_survival(-threshold - x, xi, beta)
        } else if x > threshold {
            let (xi, beta) = self.upper;
            1.0 - p * gpd_survival(x - threshold, xi, beta)
        } else {
            norm_cdf(x / self.body_sd)
        }
    }
}

impl Default for TrueMarginal {
    fn default() -> Self {
        TrueMarginal {
            body_sd: 1.0,
            tail_prob: 0.05,
            // Heavy lower tail, near-exponential upper tail.
            lower: (0.35, 1.0),
            upper: (0.05, 0.8),
        }
    }
}

/// Replaces one issue time's deviations with a comonotone lower-tail path:
/// every coordinate sits at marginal probability `lower_tail_u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantSpec {
    pub issue_index: usize,
    pub lower_tail_u: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub load_zones: Vec<String>,
    pub wind_zones: Vec<String>,
    pub lags: usize,
    pub n_issues: usize,
    pub seed: u64,
    /// Within-block spatial correlation (between-block is zero).
    pub spatial_rho: f64,
    /// AR(1) temporal correlation across lead times.
    pub temporal_rho: f64,
    pub marginal: TrueMarginal,
    pub plant: Option<PlantSpec>,
    /// Decimal places for CSV values; `None` writes full precision.
    pub round_decimals: Option<u32>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            load_zones: vec!["WEST".into(), "NORTH".into()],
            wind_zones: vec!["COASTAL".into()],
            lags: 24,
            n_issues: 900,
            seed: 2018,
            spatial_rho: 0.5,
            temporal_rho: 0.6,
            marginal: TrueMarginal::default(),
            plant: Some(PlantSpec {
                issue_index: 800,
                lower_tail_u: 0.004,
            }),
            round_decimals: Some(4),
        }
    }
}

/// The realized extreme path, in the same flat order simulation uses.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedPath {
    pub issue_time: DateTime<Utc>,
    /// Actual values over the forecast window, flattened `z * L + l`.
    pub actual_path: Vec<f64>,
    pub lower_tail_u: f64,
}

/// Ground truth returned alongside the written dataset.
#[derive(Clone, Debug)]
pub struct SyntheticTruth {
    pub variables: Vec<VariableId>,
    pub lags: usize,
    pub epoch: DateTime<Utc>,
    pub issue_times: Vec<DateTime<Utc>>,
    /// True spatial correlation (block-diagonal over load/wind).
    pub spatial: SymMatrix,
    /// True temporal correlation (AR(1)).
    pub temporal: SymMatrix,
    pub marginal: TrueMarginal,
    pub planted: Option<PlantedPath>,
    /// Config file written into the dataset directory.
    pub config_path: PathBuf,
    /// Same config with data paths resolved to absolute.
    pub config: RunConfig,
}

fn exchangeable_block(zones: usize, rho: f64) -> Vec<f64> {
    let mut block = vec![rho; zones * zones];
    for i in 0..zones {
        block[i * zones + i] = 1.0;
    }
    block
}

/// Block-diagonal spatial correlation: load zones first, wind zones after,
/// `rho` within each block, zero across.
pub fn block_spatial_correlation(n_load: usize, n_wind: usize, rho: f64) -> Result<SymMatrix> {
    let z = n_load + n_wind;
    let mut data = vec![0.0; z * z];
    for (offset, size) in [(0usize, n_load), (n_load, n_wind)] {
        let block = exchangeable_block(size, rho);
        for i in 0..size {
            for j in 0..size {
                data[(offset + i) * z + (offset + j)] = block[i * size + j];
            }
        }
    }
    SymMatrix::new(z, data)
}

/// AR(1) correlation: `rho^|i-j|`.
pub fn ar1_correlation(order: usize, rho: f64) -> Result<SymMatrix> {
    let mut data = vec![0.0; order * order];
    for i in 0..order {
        for j in 0..order {
            data[i * order + j] = rho.powi((i as i64 - j as i64).unsigned_abs() as i32);
        }
    }
    SymMatrix::new(order, data)
}

fn round_to(v: f64, decimals: Option<u32>) -> f64 {
    match decimals {
        None => v,
        Some(d) => {
            let f = 10f64.powi(d as i32);
            (v * f).round() / f
        }
    }
}

fn ts(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Hourly "actual" profile per variable: offset plus daily and weekly
/// harmonics, phase-shifted by zone so series are distinguishable.
fn base_profile(kind: VariableKind, zone_index: usize, h: f64) -> f64 {
    let day = 2.0 * std::f64::consts::PI * h / 24.0;
    let week = 2.0 * std::f64::consts::PI * h / 168.0;
    let phase = 0.4 * zone_index as f64;
    match kind {
        VariableKind::Load => {
            45.0 + 3.0 * zone_index as f64
                + 10.0 * (day - phase).cos()
                + 4.0 * (week + 0.2 * phase).cos()
        }
        VariableKind::Wind => {
            22.0 + 2.0 * zone_index as f64 + 7.0 * (day + 1.3 + phase).sin()
                - 3.0 * (week - phase).sin()
        }
    }
}

/// Deterministic seasonal part of the deviation for coordinate (z, l) at an
/// issue time `h` hours past the epoch. Harmonics in the target hour
/// `h + l`, so each (z, l) series is a pure daily/weekly harmonic in h.
fn seasonal_part(z: usize, l: usize, h: f64) -> f64 {
    let target = h + l as f64;
    let day = 2.0 * std::f64::consts::PI * target / 24.0;
    let week = 2.0 * std::f64::consts::PI * target / 168.0;
    let amp = 0.8 + 0.15 * z as f64;
    0.2 + amp * day.cos() + 0.3 * week.sin()
}

/// Generates the dataset into `dir`: per-kind actuals and forecasts CSVs
/// plus a `config.toml` wired to them with relative paths.
// `h` is an hour counter used for timestamps and nested indexing alike.
#[allow(clippy::needless_range_loop)]
pub fn generate_to_dir(spec: &SyntheticSpec, dir: &Path) -> Result<SyntheticTruth> {
    if spec.load_zones.is_empty() && spec.wind_zones.is_empty() {
        return Err(Error::Config("synthetic spec lists no zones".into()));
    }
    if spec.lags == 0 || spec.n_issues == 0 {
        return Err(Error::Config(
            "synthetic spec needs at least one lag and one issue time".into(),
        ));
    }
    if let Some(plant) = &spec.plant {
        if plant.issue_index >= spec.n_issues {
            return Err(Error::Config(format!(
                "planted issue index {} out of range ({} issues)",
                plant.issue_index, spec.n_issues
            )));
        }
        if !(plant.lower_tail_u > 0.0 && plant.lower_tail_u < 0.5) {
            return Err(Error::Config(
                "planted tail probability must lie in (0, 0.5)".into(),
            ));
        }
    }

    let epoch = Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap();
    let variables: Vec<VariableId> = spec
        .load_zones
        .iter()
        .map(|zn| VariableId::new(VariableKind::Load, zn.clone()))
        .chain(
            spec.wind_zones
                .iter()
                .map(|zn| VariableId::new(VariableKind::Wind, zn.clone())),
        )
        .collect();
    let z = variables.len();
    let l = spec.lags;

    let spatial = block_spatial_correlation(
        spec.load_zones.len(),
        spec.wind_zones.len(),
        spec.spatial_rho,
    )?;
    let temporal = ar1_correlation(l, spec.temporal_rho)?;
    let la = Cholesky::new(spatial.to_dmatrix())
        .ok_or_else(|| Error::NotPositiveDefinite("synthetic spatial correlation".into()))?
        .l();
    let lb = Cholesky::new(temporal.to_dmatrix())
        .ok_or_else(|| Error::NotPositiveDefinite("synthetic temporal correlation".into()))?
        .l();

    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);

    // Actuals first: base profile plus small iid noise, rounded as written.
    let horizon = spec.n_issues + l;
    let mut actuals = vec![vec![0.0f64; horizon]; z];
    for (zi, var) in variables.iter().enumerate() {
        let kind_index = match var.kind {
            VariableKind::Load => zi,
            VariableKind::Wind => zi - spec.load_zones.len(),
        };
        for (h, slot) in actuals[zi].iter_mut().enumerate() {
            let noise: f64 = rng.sample::<f64, _>(StandardNormal) * 1.5;
            *slot = round_to(
                base_profile(var.kind, kind_index, h as f64) + noise,
                spec.round_decimals,
            );
        }
    }

    // Deviation rows: scores from the matrix normal, pushed through the
    // copula and marginal, plus the deterministic seasonal part.
    let mut g = DMatrix::<f64>::zeros(z, l);
    let mut planted = None;
    let mut forecasts = vec![vec![0.0f64; spec.n_issues * l]; z];
    for t in 0..spec.n_issues {
        for zi in 0..z {
            for li in 0..l {
                g[(zi, li)] = rng.sample(StandardNormal);
            }
        }
        let planted_here = spec.plant.as_ref().filter(|p| p.issue_index == t);
        // The scores are drawn even for the planted row so the other rows
        // are identical whether or not a path is planted.
        let s = &la * &g * lb.transpose();
        for zi in 0..z {
            for li in 0..l {
                let u = match planted_here {
                    Some(p) => p.lower_tail_u,
                    None => norm_cdf(s[(zi, li)]).clamp(1e-12, 1.0 - 1e-12),
                };
                let deviation =
                    seasonal_part(zi, li, t as f64) + spec.marginal.quantile(u);
                forecasts[zi][t * l + li] = round_to(
                    actuals[zi][t + li] - deviation,
                    spec.round_decimals,
                );
            }
        }
        if let Some(p) = planted_here {
            let mut path = Vec::with_capacity(z * l);
            for row in actuals.iter() {
                path.extend_from_slice(&row[t..t + l]);
            }
            planted = Some(PlantedPath {
                issue_time: epoch + Duration::hours(t as i64),
                actual_path: path,
                lower_tail_u: p.lower_tail_u,
            });
        }
    }

    // CSV files, one actuals + one forecasts file per kind present.
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut actual_files = Vec::new();
    let mut forecast_files = Vec::new();
    for kind in [VariableKind::Load, VariableKind::Wind] {
        let members: Vec<usize> = (0..z).filter(|&zi| variables[zi].kind == kind).collect();
        if members.is_empty() {
            continue;
        }
        let mut a_text = String::from("timestamp,zone,value\n");
        for h in 0..horizon {
            for &zi in &members {
                writeln!(
                    a_text,
                    "{},{},{}",
                    ts(epoch + Duration::hours(h as i64)),
                    variables[zi].zone,
                    actuals[zi][h]
                )
                .expect("string write");
            }
        }
        let mut f_text = String::from("issue_timestamp,lag,zone,value\n");
        for t in 0..spec.n_issues {
            for &zi in &members {
                for li in 0..l {
                    writeln!(
                        f_text,
                        "{},{},{},{}",
                        ts(epoch + Duration::hours(t as i64)),
                        li,
                        variables[zi].zone,
                        forecasts[zi][t * l + li]
                    )
                    .expect("string write");
                }
            }
        }
        let a_name = format!("{kind}_actuals.csv");
        let f_name = format!("{kind}_forecasts.csv");
        write_text(&dir.join(&a_name), &a_text)?;
        write_text(&dir.join(&f_name), &f_text)?;
        actual_files.push(SourceFile {
            path: PathBuf::from(a_name),
            kind,
            schema: None,
        });
        forecast_files.push(SourceFile {
            path: PathBuf::from(f_name),
            kind,
            schema: None,
        });
    }

    let mut config = RunConfig::default();
    config.data.actuals = actual_files;
    config.data.forecasts = forecast_files;
    config.data.lags = l;
    config.variables = variables.clone();
    // The bundled span is shorter than a year; keep only periods the fit
    // can identify.
    config.seasonal.periods = vec![24.0, 168.0];
    config.validate()?;

    let config_path = dir.join("config.toml");
    write_text(&config_path, &config.to_toml_string()?)?;

    let mut resolved = config;
    for file in resolved
        .data
        .actuals
        .iter_mut()
        .chain(resolved.data.forecasts.iter_mut())
    {
        file.path = dir.join(&file.path);
    }

    Ok(SyntheticTruth {
        variables,
        lags: l,
        epoch,
        issue_times: (0..spec.n_issues)
            .map(|t| epoch + Duration::hours(t as i64))
            .collect(),
        spatial,
        temporal,
        marginal: spec.marginal,
        planted,
        config_path,
        config: resolved,
    })
}
