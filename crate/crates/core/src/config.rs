//! Run configuration: a single TOML document describing data sources, the
//! modeled variables, and every fitting/simulation parameter.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gemini::{GeminiOptions, DEFAULT_FACTOR_LAMBDA};
use crate::glasso::{DEFAULT_GLASSO_MAX_ITER, DEFAULT_GLASSO_TOL};
use crate::ingest::CsvSchema;
use crate::panel::{VariableId, VariableKind};
use crate::seasonal::DEFAULT_PERIODS;
use crate::tails::{GpdFitMethod, TailFitConfig, DEFAULT_MIN_EXCEEDANCES, DEFAULT_THRESHOLD_QUANTILE};

/// One CSV source holding every zone of a single variable kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceFile {
    pub path: PathBuf,
    pub kind: VariableKind,
    /// Column mapping for this file; the global `data.schema` applies when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<CsvSchema>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub actuals: Vec<SourceFile>,
    pub forecasts: Vec<SourceFile>,
    /// Forecast horizon: lags `0..lags` hours ahead are modeled.
    pub lags: usize,
    /// Default column mapping, overridable per file.
    pub schema: CsvSchema,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            actuals: Vec::new(),
            forecasts: Vec::new(),
            lags: 24,
            schema: CsvSchema::default(),
        }
    }
}

impl DataConfig {
    pub fn schema_for<'a>(&'a self, file: &'a SourceFile) -> &'a CsvSchema {
        file.schema.as_ref().unwrap_or(&self.schema)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeasonalConfig {
    /// Harmonic periods in hours.
    pub periods: Vec<f64>,
}

impl Default for SeasonalConfig {
    fn default() -> Self {
        SeasonalConfig {
            periods: DEFAULT_PERIODS.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailsConfig {
    /// When false, marginals are plain Gaussians (sample mean and sd) and no
    /// tail fitting happens.
    pub enabled: bool,
    pub threshold_quantile: f64,
    pub min_exceedances: usize,
    pub method: GpdFitMethod,
}

impl Default for TailsConfig {
    fn default() -> Self {
        TailsConfig {
            enabled: true,
            threshold_quantile: DEFAULT_THRESHOLD_QUANTILE,
            min_exceedances: DEFAULT_MIN_EXCEEDANCES,
            method: GpdFitMethod::default(),
        }
    }
}

impl TailsConfig {
    pub fn fit_config(&self) -> TailFitConfig {
        TailFitConfig {
            threshold_quantile: self.threshold_quantile,
            min_exceedances: self.min_exceedances,
            method: self.method,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphicalConfig {
    pub lambda_spatial: f64,
    pub lambda_temporal: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Partial correlations at or below this magnitude are not drawn as
    /// graph edges.
    pub edge_threshold: f64,
}

impl Default for GraphicalConfig {
    fn default() -> Self {
        GraphicalConfig {
            lambda_spatial: DEFAULT_FACTOR_LAMBDA,
            lambda_temporal: DEFAULT_FACTOR_LAMBDA,
            tol: DEFAULT_GLASSO_TOL,
            max_iter: DEFAULT_GLASSO_MAX_ITER,
            edge_threshold: 0.01,
        }
    }
}

impl GraphicalConfig {
    pub fn gemini_options(&self) -> GeminiOptions {
        GeminiOptions {
            lambda_spatial: self.lambda_spatial,
            lambda_temporal: self.lambda_temporal,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub scenarios: usize,
    pub trim: f64,
    pub seed: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            scenarios: 1000,
            trim: 0.05,
            seed: 42,
        }
    }
}

/// Full run configuration, parsed from one TOML file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub variables: Vec<VariableId>,
    pub seasonal: SeasonalConfig,
    pub tails: TailsConfig,
    pub graphical: GraphicalConfig,
    pub simulate: SimulateConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)
            .map_err(|e| Error::Config(format!("config parse failed: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file. Relative data paths are resolved against the
    /// config file's directory, so dataset folders are relocatable.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if let Some(dir) = path.parent() {
            for file in cfg
                .data
                .actuals
                .iter_mut()
                .chain(cfg.data.forecasts.iter_mut())
            {
                if file.path.is_relative() {
                    file.path = dir.join(&file.path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("config serialization failed: {e}")))
    }

    pub fn variable_ids(&self) -> &[VariableId] {
        &self.variables
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.variables.is_empty() {
            return fail("at least one variable must be listed".into());
        }
        for (i, a) in self.variables.iter().enumerate() {
            if a.zone.trim().is_empty() {
                return fail(format!("variable {i} has an empty zone name"));
            }
            for b in &self.variables[..i] {
                if a == b {
                    return fail(format!("variable {a} listed twice"));
                }
            }
        }
        if self.data.actuals.is_empty() {
            return fail("data.actuals lists no files".into());
        }
        if self.data.forecasts.is_empty() {
            return fail("data.forecasts lists no files".into());
        }
        for kind in [VariableKind::Load, VariableKind::Wind] {
            if self.variables.iter().any(|v| v.kind == kind) {
                if !self.data.actuals.iter().any(|f| f.kind == kind) {
                    return fail(format!("no actuals file declared for kind {kind}"));
                }
                if !self.data.forecasts.iter().any(|f| f.kind == kind) {
                    return fail(format!("no forecasts file declared for kind {kind}"));
                }
            }
        }
        if self.data.lags == 0 {
            return fail("data.lags must be at least 1".into());
        }
        if self.seasonal.periods.is_empty() {
            return fail("seasonal.periods must list at least one period".into());
        }
        if self
            .seasonal
            .periods
            .iter()
            .any(|p| !(p.is_finite() && *p > 0.0))
        {
            return fail("seasonal.periods must be positive and finite".into());
        }
        if !(self.tails.threshold_quantile > 0.5 && self.tails.threshold_quantile < 1.0) {
            return fail(format!(
                "tails.threshold_quantile must lie in (0.5, 1), got {}",
                self.tails.threshold_quantile
            ));
        }
        if self.tails.min_exceedances < 2 {
            return fail("tails.min_exceedances must be at least 2".into());
        }
        for (name, lambda) in [
            ("graphical.lambda_spatial", self.graphical.lambda_spatial),
            ("graphical.lambda_temporal", self.graphical.lambda_temporal),
        ] {
            if !(lambda.is_finite() && lambda >= 0.0) {
                return fail(format!("{name} must be a finite value >= 0, got {lambda}"));
            }
        }
        if !(self.graphical.tol.is_finite() && self.graphical.tol > 0.0) {
            return fail("graphical.tol must be positive".into());
        }
        if self.graphical.max_iter == 0 {
            return fail("graphical.max_iter must be at least 1".into());
        }
        if !(self.graphical.edge_threshold.is_finite() && self.graphical.edge_threshold >= 0.0) {
            return fail("graphical.edge_threshold must be >= 0".into());
        }
        if self.simulate.scenarios == 0 {
            return fail("simulate.scenarios must be at least 1".into());
        }
        if !(self.simulate.trim > 0.0 && self.simulate.trim < 0.5) {
            return fail(format!(
                "simulate.trim must lie in (0, 0.5), got {}",
                self.simulate.trim
            ));
        }
        Ok(())
    }
}
