//! Fitted-model persistence: one JSON document holding the configuration
//! snapshot, the seasonal model, every marginal, the graphical model, and
//! fit diagnostics. Reload is value-exact: serde_json prints `f64` with the
//! shortest representation that parses back to the same bits.

use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::gemini::{FactorStats, GraphicalModel};
use crate::panel::{VariableId, VariableKind};
use crate::seasonal::SeasonalModel;
use crate::simulate::{scenarios, ScenarioBatch};
use crate::tails::Marginal;

pub const BUNDLE_VERSION: &str = "scengen-bundle/1";

/// One coordinate's marginal, keyed so the flat order is auditable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalEntry {
    pub kind: VariableKind,
    pub zone: String,
    pub lag: usize,
    pub marginal: Marginal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub rows_used: usize,
    pub rows_dropped: usize,
    /// Harmonic periods the seasonal fit kept (periods longer than the data
    /// span are dropped).
    pub periods_used: Vec<f64>,
    pub spatial: FactorStats,
    pub temporal: FactorStats,
}

/// Everything a `simulate` run needs, as written by `fit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub version: String,
    pub config: RunConfig,
    pub seasonal: SeasonalModel,
    /// Marginals in flat coordinate order: index `z * L + l` for variable
    /// `z` and lag `l`.
    pub marginals: Vec<MarginalEntry>,
    pub graphical: GraphicalModel,
    pub diagnostics: FitDiagnostics,
}

impl ModelBundle {
    /// Cross-checks variable order and dimensions across all parts.
    pub fn validate(&self) -> Result<()> {
        if self.version != BUNDLE_VERSION {
            return Err(Error::Bundle(format!(
                "unsupported bundle version {:?}, expected {BUNDLE_VERSION:?}",
                self.version
            )));
        }
        if self.seasonal.variables != self.graphical.variables {
            return Err(Error::Bundle(
                "seasonal and graphical models disagree on variable order".into(),
            ));
        }
        if self.seasonal.lags != self.graphical.lags {
            return Err(Error::Bundle(
                "seasonal and graphical models disagree on lag count".into(),
            ));
        }
        let z = self.graphical.variables.len();
        let l = self.graphical.lags;
        if self.marginals.len() != z * l {
            return Err(Error::Bundle(format!(
                "{} marginals for {z} variables x {l} lags",
                self.marginals.len()
            )));
        }
        for (c, entry) in self.marginals.iter().enumerate() {
            let var = &self.graphical.variables[c / l];
            if entry.kind != var.kind || entry.zone != var.zone || entry.lag != c % l {
                return Err(Error::Bundle(format!(
                    "marginal {c} is keyed {}/{} lag {}, expected {var} lag {}",
                    entry.kind,
                    entry.zone,
                    entry.lag,
                    c % l
                )));
            }
        }
        if self.graphical.spatial_cov.order() != z || self.graphical.temporal_cov.order() != l {
            return Err(Error::Bundle(
                "graphical factor orders disagree with the variable list".into(),
            ));
        }
        Ok(())
    }

    pub fn variables(&self) -> &[VariableId] {
        &self.graphical.variables
    }

    pub fn lags(&self) -> usize {
        self.graphical.lags
    }

    /// Marginals stripped of their keys, in flat coordinate order.
    pub fn marginal_vec(&self) -> Vec<Marginal> {
        self.marginals.iter().map(|e| e.marginal.clone()).collect()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let bundle: ModelBundle = serde_json::from_str(text)?;
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Bundle(msg) => Error::Bundle(format!("{}: {msg}", path.display())),
            Error::Json(e) => Error::Bundle(format!("{}: malformed bundle: {e}", path.display())),
            other => other,
        })
    }

    /// Generates a scenario batch from this bundle.
    pub fn simulate(
        &self,
        forecast: &[f64],
        issue_time: DateTime<Utc>,
        m: usize,
        seed: u64,
    ) -> Result<ScenarioBatch> {
        scenarios(
            &self.seasonal,
            &self.marginal_vec(),
            &self.graphical,
            forecast,
            issue_time,
            m,
            seed,
        )
    }
}

/// Builds the keyed marginal list from a flat marginal vector.
pub fn keyed_marginals(
    variables: &[VariableId],
    lags: usize,
    marginals: Vec<Marginal>,
) -> Result<Vec<MarginalEntry>> {
    if marginals.len() != variables.len() * lags {
        return Err(Error::Mismatch(format!(
            "{} marginals for {} variables x {lags} lags",
            marginals.len(),
            variables.len()
        )));
    }
    Ok(marginals
        .into_iter()
        .enumerate()
        .map(|(c, marginal)| MarginalEntry {
            kind: variables[c / lags].kind,
            zone: variables[c / lags].zone.clone(),
            lag: c % lags,
            marginal,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glasso::SymMatrix;
    use crate::seasonal::{HarmonicCoef, SeriesSeasonal};
    use chrono::TimeZone;

    fn tiny_bundle() -> ModelBundle {
        let variables = vec![
            VariableId::new(VariableKind::Load, "WEST"),
            VariableId::new(VariableKind::Wind, "COASTAL"),
        ];
        let lags = 2;
        let seasonal = SeasonalModel {
            epoch: Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap(),
            variables: variables.clone(),
            lags,
            periods: vec![24.0],
            series: (0..4)
                .map(|i| SeriesSeasonal {
                    intercept: i as f64,
                    trend_slope: 0.001 * i as f64,
                    harmonics: vec![HarmonicCoef {
                        period: 24.0,
                        cos_coef: 0.5,
                        sin_coef: -0.25,
                    }],
                })
                .collect(),
        };
        let marginals = keyed_marginals(
            &variables,
            lags,
            (0..4)
                .map(|i| Marginal::Gaussian {
                    mean: i as f64,
                    sd: 1.0 + i as f64,
                })
                .collect(),
        )
        .unwrap();
        let graphical = GraphicalModel {
            variables: variables.clone(),
            lags,
            spatial_cov: SymMatrix::identity(2),
            spatial_precision: SymMatrix::identity(2),
            temporal_cov: SymMatrix::identity(2),
            temporal_precision: SymMatrix::identity(2),
            scale: 1.5,
        };
        ModelBundle {
            version: BUNDLE_VERSION.to_string(),
            config: RunConfig::default(),
            seasonal,
            marginals,
            graphical,
            diagnostics: FitDiagnostics {
                rows_used: 100,
                rows_dropped: 3,
                periods_used: vec![24.0],
                spatial: FactorStats {
                    order: 2,
                    iterations: 5,
                    converged: true,
                    nonzero_offdiag: 0,
                },
                temporal: FactorStats {
                    order: 2,
                    iterations: 4,
                    converged: true,
                    nonzero_offdiag: 0,
                },
            },
        }
    }

    #[test]
    fn bundle_roundtrips_exactly_through_json() {
        let bundle = tiny_bundle();
        let text = bundle.to_json_string().unwrap();
        let back = ModelBundle::from_json_str(&text).unwrap();
        assert_eq!(back, bundle);
        // Serialization is deterministic, so the reserialized text matches.
        assert_eq!(back.to_json_string().unwrap(), text);
    }

    #[test]
    fn save_and_load_roundtrip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bundle.json");
        let bundle = tiny_bundle();
        bundle.save(&path).unwrap();
        let back = ModelBundle::load(&path).unwrap();
        assert_eq!(back, bundle);
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let mut bundle = tiny_bundle();
        bundle.version = "scengen-bundle/999".into();
        let err = bundle.validate().unwrap_err();
        assert!(matches!(err, Error::Bundle(msg) if msg.contains("scengen-bundle/999")));
    }

    #[test]
    fn inconsistent_marginal_keys_are_rejected() {
        let mut bundle = tiny_bundle();
        bundle.marginals.swap(0, 1);
        assert!(matches!(bundle.validate(), Err(Error::Bundle(_))));

        let mut bundle = tiny_bundle();
        bundle.marginals.pop();
        assert!(matches!(bundle.validate(), Err(Error::Bundle(_))));
    }

    #[test]
    fn variable_order_mismatch_is_rejected() {
        let mut bundle = tiny_bundle();
        bundle.seasonal.variables.reverse();
        assert!(matches!(bundle.validate(), Err(Error::Bundle(_))));
    }

    #[test]
    fn malformed_file_reports_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{not json").unwrap();
        let err = ModelBundle::load(&path).unwrap_err();
        assert!(matches!(err, Error::Bundle(msg) if msg.contains("bad.json")));
    }

    #[test]
    fn bundle_simulate_matches_direct_simulation() {
        let bundle = tiny_bundle();
        let issue = bundle.seasonal.epoch + chrono::Duration::hours(100);
        let forecast = vec![10.0, 11.0, 12.0, 13.0];
        let a = bundle.simulate(&forecast, issue, 20, 9).unwrap();
        let b = scenarios(
            &bundle.seasonal,
            &bundle.marginal_vec(),
            &bundle.graphical,
            &forecast,
            issue,
            20,
            9,
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
