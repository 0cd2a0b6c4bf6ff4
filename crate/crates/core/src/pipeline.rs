//! End-to-end fit pipeline: ingest, seasonal removal, marginal fitting,
//! gaussianization, Kronecker graphical estimation. Every failure is tagged
//! with the stage it came from.

use chrono::{DateTime, Utc};

use crate::bundle::{keyed_marginals, FitDiagnostics, ModelBundle, BUNDLE_VERSION};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::gaussianize::to_gaussian;
use crate::gemini::gemini;
use crate::ingest::{
    build_deviation_panel, load_actuals, load_forecasts, ActualsSeries, ForecastPanel,
    PanelBuildReport,
};
use crate::panel::{DeviationPanel, VariableId};
use crate::seasonal::{fit_seasonal, remove_seasonal};
use crate::stats::{mean, std_dev};
use crate::tails::{fit_semiparametric, Marginal, MIN_MARGINAL_SAMPLE};

pub const STAGE_INGEST: &str = "ingest";
pub const STAGE_SEASONAL: &str = "seasonal";
pub const STAGE_TAILS: &str = "tails";
pub const STAGE_GAUSSIANIZE: &str = "gaussianize";
pub const STAGE_GLASSO: &str = "glasso";

/// Loads every actuals file named by the config.
pub fn load_actual_sources(config: &RunConfig) -> Result<Vec<ActualsSeries>> {
    let mut out = Vec::new();
    for file in &config.data.actuals {
        out.extend(
            load_actuals(&file.path, file.kind, config.data.schema_for(file))
                .map_err(|e| e.with_stage(STAGE_INGEST))?,
        );
    }
    Ok(out)
}

/// Loads every forecasts file named by the config.
pub fn load_forecast_sources(config: &RunConfig) -> Result<Vec<ForecastPanel>> {
    let mut out = Vec::new();
    for file in &config.data.forecasts {
        out.extend(
            load_forecasts(
                &file.path,
                file.kind,
                config.data.schema_for(file),
                config.data.lags,
            )
            .map_err(|e| e.with_stage(STAGE_INGEST))?,
        );
    }
    Ok(out)
}

/// Ingested and aligned training data.
pub struct PreparedData {
    pub panel: DeviationPanel,
    pub report: PanelBuildReport,
}

/// Runs the ingest stage: loads all sources and aligns them into a
/// deviation panel over the configured variables.
pub fn prepare(config: &RunConfig) -> Result<PreparedData> {
    config.validate()?;
    let actuals = load_actual_sources(config)?;
    let forecasts = load_forecast_sources(config)?;
    let (panel, report) =
        build_deviation_panel(&actuals, &forecasts, &config.variables, config.data.lags)
            .map_err(|e| e.with_stage(STAGE_INGEST))?;
    log::info!(
        "ingest: {} issue times used, {} dropped, {} variables x {} lags",
        report.rows_used,
        report.rows_dropped,
        panel.z(),
        panel.l()
    );
    Ok(PreparedData { panel, report })
}

/// Fits marginals for every flat coordinate of a remainder panel. With tails
/// disabled each marginal is the fitted normal (sample mean and sd).
fn fit_marginals(
    remainder: &crate::panel::RemainderPanel,
    config: &RunConfig,
    tails_enabled: bool,
) -> Result<Vec<Marginal>> {
    let fit_cfg = config.tails.fit_config();
    let mut out = Vec::with_capacity(remainder.flat_dim());
    for z in 0..remainder.z() {
        for l in 0..remainder.l() {
            let series = remainder.series(z, l);
            let label = || format!("{} lag {l}", remainder.variables()[z]);
            if tails_enabled {
                let dist = fit_semiparametric(&series, &fit_cfg)
                    .map_err(|e| e.with_stage(&label()))?;
                out.push(Marginal::SemiParametric(dist));
            } else {
                if series.len() < MIN_MARGINAL_SAMPLE {
                    return Err(Error::Insufficient {
                        what: format!("observations for marginal of {}", label()),
                        needed: MIN_MARGINAL_SAMPLE,
                        got: series.len(),
                    });
                }
                let sd = std_dev(&series);
                if !(sd > 0.0) {
                    return Err(Error::Degenerate(format!(
                        "remainder series {} is constant",
                        label()
                    )));
                }
                out.push(Marginal::Gaussian {
                    mean: mean(&series),
                    sd,
                });
            }
        }
    }
    Ok(out)
}

/// Fits the full model on already-prepared data. `tails_enabled` overrides
/// the config switch so one ingest can back both a heavy-tailed and a
/// Gaussian fit; the bundle's config snapshot records the value used.
pub fn fit_prepared(
    config: &RunConfig,
    prepared: &PreparedData,
    tails_enabled: bool,
) -> Result<ModelBundle> {
    let seasonal = fit_seasonal(&prepared.panel, &config.seasonal.periods)
        .map_err(|e| e.with_stage(STAGE_SEASONAL))?;
    let remainder =
        remove_seasonal(&prepared.panel, &seasonal).map_err(|e| e.with_stage(STAGE_SEASONAL))?;

    let marginals =
        fit_marginals(&remainder, config, tails_enabled).map_err(|e| e.with_stage(STAGE_TAILS))?;

    let scores =
        to_gaussian(&remainder, &marginals).map_err(|e| e.with_stage(STAGE_GAUSSIANIZE))?;

    let fit = gemini(&scores, &config.graphical.gemini_options())
        .map_err(|e| e.with_stage(STAGE_GLASSO))?;

    let mut snapshot = config.clone();
    snapshot.tails.enabled = tails_enabled;

    let bundle = ModelBundle {
        version: BUNDLE_VERSION.to_string(),
        config: snapshot,
        marginals: keyed_marginals(&seasonal.variables, seasonal.lags, marginals)?,
        diagnostics: FitDiagnostics {
            rows_used: prepared.report.rows_used,
            rows_dropped: prepared.report.rows_dropped,
            periods_used: seasonal.periods.clone(),
            spatial: fit.spatial,
            temporal: fit.temporal,
        },
        seasonal,
        graphical: fit.model,
    };
    bundle.validate()?;
    Ok(bundle)
}

/// Full fit: ingest plus model estimation per the config.
pub fn fit(config: &RunConfig) -> Result<ModelBundle> {
    let prepared = prepare(config)?;
    fit_prepared(config, &prepared, config.tails.enabled)
}

/// Point forecast at one issue time, flattened `z * L + l`. Fails when any
/// forecast cell is missing.
pub fn forecast_matrix(
    forecasts: &[ForecastPanel],
    variables: &[VariableId],
    lags: usize,
    issue_time: DateTime<Utc>,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(variables.len() * lags);
    for v in variables {
        let panel = forecasts
            .iter()
            .find(|p| &p.id == v)
            .ok_or_else(|| Error::MissingVariable(format!("{v} (forecasts)")))?;
        let idx = panel
            .issue_times
            .binary_search(&issue_time)
            .map_err(|_| Error::Data(format!("no {v} forecast issued at {issue_time}")))?;
        if panel.lags != lags {
            return Err(Error::Mismatch(format!(
                "{v} forecasts carry {} lags, expected {lags}",
                panel.lags
            )));
        }
        for l in 0..lags {
            match panel.value(idx, l) {
                Some(x) => out.push(x),
                None => {
                    return Err(Error::Data(format!(
                        "{v} forecast issued at {issue_time} is missing lag {l}"
                    )))
                }
            }
        }
    }
    Ok(out)
}

/// Latest issue time with a complete forecast row for every variable.
pub fn last_complete_issue_time(
    forecasts: &[ForecastPanel],
    variables: &[VariableId],
    lags: usize,
) -> Result<DateTime<Utc>> {
    let first = variables
        .first()
        .ok_or_else(|| Error::Config("no variables requested".into()))?;
    let base = forecasts
        .iter()
        .find(|p| &p.id == first)
        .ok_or_else(|| Error::MissingVariable(format!("{first} (forecasts)")))?;
    for &t in base.issue_times.iter().rev() {
        if forecast_matrix(forecasts, variables, lags, t).is_ok() {
            return Ok(t);
        }
    }
    Err(Error::Data(
        "no issue time has a complete forecast for every variable".into(),
    ))
}

/// Realized values over one forecast window, flattened `z * L + l`. Fails
/// when any hour is missing from the actuals.
pub fn actual_path(
    actuals: &[ActualsSeries],
    variables: &[VariableId],
    lags: usize,
    issue_time: DateTime<Utc>,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(variables.len() * lags);
    for v in variables {
        let series = actuals
            .iter()
            .find(|s| &s.id == v)
            .ok_or_else(|| Error::MissingVariable(format!("{v} (actuals)")))?;
        for l in 0..lags {
            let t = issue_time + chrono::Duration::hours(l as i64);
            let idx = series
                .timestamps
                .binary_search(&t)
                .map_err(|_| Error::Data(format!("no {v} actual at {t}")))?;
            out.push(series.values[idx]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use rand_distr::StandardNormal;
    use std::fmt::Write as _;
    use std::path::Path;

    const N_ISSUES: usize = 500;
    const LAGS: usize = 3;

    fn epoch() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap()
    }

    fn ts(h: i64) -> String {
        (epoch() + chrono::Duration::hours(h))
            .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    }

    /// Writes a small consistent load dataset: one zone, hourly actuals with
    /// a daily cycle plus skewed noise, forecasts equal to the cycle so the
    /// deviation is exactly the noise.
    fn write_dataset(dir: &Path) -> (String, String) {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let horizon = N_ISSUES as i64 + LAGS as i64 + 1;
        let cycle =
            |h: i64| 50.0 + 8.0 * (2.0 * std::f64::consts::PI * h as f64 / 24.0).cos();

        let mut actuals = String::from("timestamp,zone,value\n");
        let mut noise = Vec::new();
        for h in 0..horizon {
            let z: f64 = rng.sample(StandardNormal);
            let e = (0.6 * z).exp() - 1.0;
            noise.push(e);
            writeln!(actuals, "{},WEST,{}", ts(h), cycle(h) + e).unwrap();
        }

        let mut forecasts = String::from("issue_timestamp,lag,zone,value\n");
        for i in 0..N_ISSUES as i64 {
            for l in 0..LAGS as i64 {
                writeln!(forecasts, "{},{},WEST,{}", ts(i), l, cycle(i + l)).unwrap();
            }
        }

        let a = dir.join("actuals.csv");
        let f = dir.join("forecasts.csv");
        std::fs::write(&a, actuals).unwrap();
        std::fs::write(&f, forecasts).unwrap();
        (
            a.to_string_lossy().into_owned(),
            f.to_string_lossy().into_owned(),
        )
    }

    fn test_config(dir: &Path) -> RunConfig {
        let (a, f) = write_dataset(dir);
        RunConfig::from_toml_str(&format!(
            r#"
            [data]
            lags = {LAGS}

            [[data.actuals]]
            path = "{a}"
            kind = "load"

            [[data.forecasts]]
            path = "{f}"
            kind = "load"

            [[variables]]
            kind = "load"
            zone = "WEST"

            [seasonal]
            periods = [24.0]

            [graphical]
            lambda_spatial = 0.05
            lambda_temporal = 0.05
            "#
        ))
        .unwrap()
    }

    #[test]
    fn fit_produces_a_consistent_bundle() {
        let dir = tempfile::tempdir().unwrap();
        let config = test_config(dir.path());
        let bundle = fit(&config).unwrap();

        assert_eq!(bundle.version, BUNDLE_VERSION);
        assert_eq!(bundle.variables().len(), 1);
        assert_eq!(bundle.lags(), LAGS);
        assert_eq!(bundle.marginals.len(), LAGS);
        assert_eq!(bundle.diagnostics.rows_used, N_ISSUES);
        assert_eq!(bundle.diagnostics.rows_dropped, 0);
        assert_eq!(bundle.diagnostics.periods_used, vec![24.0]);
        assert!(bundle.diagnostics.spatial.converged);
        assert!(bundle.diagnostics.temporal.converged);
        assert!(bundle.config.tails.enabled);
        for entry in &bundle.marginals {
            assert!(matches!(entry.marginal, Marginal::SemiParametric(_)));
        }
        // The deviation panel is pure noise around a removed daily cycle, so
        // the remainder marginals should center near the noise median.
        let issue = epoch() + chrono::Duration::hours(100);
        let fc = vec![10.0; LAGS];
        let batch = bundle.simulate(&fc, issue, 400, 3).unwrap();
        let med = {
            let mut v = batch.coordinate_values(0, 0);
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            crate::stats::quantile_type7(&v, 0.5)
        };
        assert!((med - 10.0).abs() < 1.5, "median {med}");
    }

    #[test]
    fn tails_override_switches_marginal_family() {
        let dir = tempfile::tempdir().unwrap();
        let config = test_config(dir.path());
        let prepared = prepare(&config).unwrap();
        let on = fit_prepared(&config, &prepared, true).unwrap();
        let off = fit_prepared(&config, &prepared, false).unwrap();

        assert!(on.config.tails.enabled);
        assert!(!off.config.tails.enabled);
        assert!(matches!(
            off.marginals[0].marginal,
            Marginal::Gaussian { .. }
        ));
        // Same scores pipeline aside from marginals; seasonal parts agree.
        assert_eq!(on.seasonal, off.seasonal);

        // Gaussian marginal matches the remainder's sample moments.
        let seasonal = fit_seasonal(&prepared.panel, &config.seasonal.periods).unwrap();
        let remainder = remove_seasonal(&prepared.panel, &seasonal).unwrap();
        let series = remainder.series(0, 0);
        match off.marginals[0].marginal {
            Marginal::Gaussian { mean: m, sd } => {
                assert!((m - mean(&series)).abs() < 1e-12);
                assert!((sd - std_dev(&series)).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn fit_save_load_simulate_is_identical_to_in_memory() {
        let dir = tempfile::tempdir().unwrap();
        let config = test_config(dir.path());
        let bundle = fit(&config).unwrap();

        let path = dir.path().join("bundle.json");
        bundle.save(&path).unwrap();
        let reloaded = ModelBundle::load(&path).unwrap();
        assert_eq!(reloaded, bundle);

        let issue = epoch() + chrono::Duration::hours(40);
        let fc = vec![5.0; LAGS];
        let a = bundle.simulate(&fc, issue, 64, 42).unwrap();
        let b = reloaded.simulate(&fc, issue, 64, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forecast_matrix_reads_the_right_row() {
        let dir = tempfile::tempdir().unwrap();
        let config = test_config(dir.path());
        let forecasts = load_forecast_sources(&config).unwrap();
        let issue = epoch() + chrono::Duration::hours(7);
        let fc = forecast_matrix(&forecasts, &config.variables, LAGS, issue).unwrap();
        assert_eq!(fc.len(), LAGS);
        for (l, v) in fc.iter().enumerate() {
            let h = 7 + l as i64;
            let want = 50.0 + 8.0 * (2.0 * std::f64::consts::PI * h as f64 / 24.0).cos();
            assert!((v - want).abs() < 1e-9);
        }

        let absent = epoch() + chrono::Duration::hours(100_000);
        let err = forecast_matrix(&forecasts, &config.variables, LAGS, absent).unwrap_err();
        assert!(matches!(err, Error::Data(msg) if msg.contains("load/WEST")));
    }

    #[test]
    fn last_complete_issue_time_is_the_final_row() {
        let dir = tempfile::tempdir().unwrap();
        let config = test_config(dir.path());
        let forecasts = load_forecast_sources(&config).unwrap();
        let t = last_complete_issue_time(&forecasts, &config.variables, LAGS).unwrap();
        assert_eq!(t, epoch() + chrono::Duration::hours(N_ISSUES as i64 - 1));
    }

    #[test]
    fn actual_path_follows_the_forecast_window() {
        let dir = tempfile::tempdir().unwrap();
        let config = test_config(dir.path());
        let actuals = load_actual_sources(&config).unwrap();
        let issue = epoch() + chrono::Duration::hours(12);
        let path = actual_path(&actuals, &config.variables, LAGS, issue).unwrap();
        assert_eq!(path.len(), LAGS);
        // Values match the generator: cycle + noise, so they differ from the
        // pure cycle but sit within the noise range.
        for v in &path {
            assert!(v.is_finite());
        }

        let absent = epoch() - chrono::Duration::hours(5);
        assert!(actual_path(&actuals, &config.variables, LAGS, absent).is_err());
    }

    #[test]
    fn missing_data_file_errors_name_the_path_and_stage() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = test_config(dir.path());
        config.data.forecasts[0].path = dir.path().join("nope.csv");
        let err = fit(&config).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(STAGE_INGEST), "{msg}");
        assert!(msg.contains("nope.csv"), "{msg}");
        assert_eq!(err.exit_code(), 1);
    }
}
