//! Deterministic seasonal structure of forecast deviations.
//!
//! Each (variable, lag) series gets an OLS fit of
//!
//! ```text
//! y(t) = c + b t + sum_k [ a_k cos(2 pi t / P_k) + s_k sin(2 pi t / P_k) ]
//! ```
//!
//! with `t` in hours since the model epoch (the first fitted issue time) and
//! `P_k` the configured period set, by default daily / weekly / yearly hours.
//! All series share the same design matrix, so the normal equations are
//! factored once. The trend column is centered and scaled internally for
//! conditioning and the coefficients are mapped back to raw `t` units, which
//! keeps evaluation valid at arbitrary future times.

use chrono::{DateTime, Utc};
use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{DeviationPanel, PanelData, RemainderPanel, VariableId};

pub const DEFAULT_PERIODS: [f64; 3] = [24.0, 168.0, 8766.0];

/// Observations required per fitted coefficient.
const MIN_OBS_PER_COEF: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCoef {
    pub period: f64,
    pub cos_coef: f64,
    pub sin_coef: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesSeasonal {
    pub intercept: f64,
    pub trend_slope: f64,
    pub harmonics: Vec<HarmonicCoef>,
}

impl SeriesSeasonal {
    fn eval(&self, t: f64) -> f64 {
        let mut v = self.intercept + self.trend_slope * t;
        for h in &self.harmonics {
            let w = 2.0 * std::f64::consts::PI * t / h.period;
            v += h.cos_coef * w.cos() + h.sin_coef * w.sin();
        }
        v
    }
}

/// Fitted seasonal component for every (variable, lag) series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeasonalModel {
    pub epoch: DateTime<Utc>,
    pub variables: Vec<VariableId>,
    pub lags: usize,
    /// Periods actually used, in hours; configured periods longer than the
    /// fitted span are dropped with a warning.
    pub periods: Vec<f64>,
    /// Per-(variable, lag) coefficients, indexed `z * lags + l`.
    pub series: Vec<SeriesSeasonal>,
}

impl SeasonalModel {
    pub fn series(&self, z: usize, l: usize) -> &SeriesSeasonal {
        &self.series[z * self.lags + l]
    }

    pub fn hours_since_epoch(&self, time: DateTime<Utc>) -> f64 {
        (time - self.epoch).num_seconds() as f64 / 3600.0
    }

    /// Seasonal component of series (z, l) at an arbitrary time, valid beyond
    /// the fitted sample.
    pub fn component_at(&self, z: usize, l: usize, time: DateTime<Utc>) -> f64 {
        self.series(z, l).eval(self.hours_since_epoch(time))
    }

    /// Seasonal components for every coordinate at one time, flattened `Z*L`.
    pub fn components_at(&self, time: DateTime<Utc>) -> Vec<f64> {
        let t = self.hours_since_epoch(time);
        self.series.iter().map(|s| s.eval(t)).collect()
    }

    fn check_panel(&self, panel: &PanelData) -> Result<()> {
        if panel.variables() != self.variables.as_slice() {
            return Err(Error::Mismatch(
                "panel variables do not match the seasonal model".into(),
            ));
        }
        if panel.l() != self.lags {
            return Err(Error::Mismatch(format!(
                "panel has {} lags, seasonal model has {}",
                panel.l(),
                self.lags
            )));
        }
        Ok(())
    }

    /// Fitted seasonal values for every panel entry, row-major `[t][z][l]`.
    fn fitted_values(&self, times: &[DateTime<Utc>]) -> Vec<f64> {
        let zl = self.series.len();
        let k = self.periods.len();
        let mut out = Vec::with_capacity(times.len() * zl);
        // cos/sin of each period are shared by all series at a given time.
        let mut waves = vec![0.0f64; 2 * k];
        for &time in times {
            let t = self.hours_since_epoch(time);
            for (i, &p) in self.periods.iter().enumerate() {
                let w = 2.0 * std::f64::consts::PI * t / p;
                waves[2 * i] = w.cos();
                waves[2 * i + 1] = w.sin();
            }
            for s in &self.series {
                let mut v = s.intercept + s.trend_slope * t;
                for (i, h) in s.harmonics.iter().enumerate() {
                    v += h.cos_coef * waves[2 * i] + h.sin_coef * waves[2 * i + 1];
                }
                out.push(v);
            }
        }
        out
    }
}

/// Fits the seasonal model to a deviation panel.
pub fn fit_seasonal(panel: &DeviationPanel, periods: &[f64]) -> Result<SeasonalModel> {
    if periods.is_empty() {
        return Err(Error::Config("seasonal period set is empty".into()));
    }
    if periods.iter().any(|&p| !p.is_finite() || p <= 0.0) {
        return Err(Error::Config(
            "seasonal periods must be strictly positive".into(),
        ));
    }
    for (i, &p) in periods.iter().enumerate() {
        if periods[..i].contains(&p) {
            return Err(Error::Config(format!("duplicate seasonal period {p}")));
        }
    }

    let epoch = panel.issue_times()[0];
    let ts: Vec<f64> = panel
        .issue_times()
        .iter()
        .map(|&t| (t - epoch).num_seconds() as f64 / 3600.0)
        .collect();
    let span = ts[ts.len() - 1] - ts[0];

    let mut used: Vec<f64> = Vec::new();
    for &p in periods {
        if p <= span {
            used.push(p);
        } else {
            log::warn!(
                "seasonal period {p} h exceeds the fitted span {span:.1} h; dropping it"
            );
        }
    }

    let n = panel.n();
    let ncols = 2 + 2 * used.len();
    if n < MIN_OBS_PER_COEF * ncols {
        return Err(Error::Insufficient {
            what: format!("seasonal fit with {ncols} coefficients"),
            needed: MIN_OBS_PER_COEF * ncols,
            got: n,
        });
    }

    // Centered, scaled trend column for conditioning.
    let t_mean = ts.iter().sum::<f64>() / n as f64;
    let t_scale = (span / 2.0).max(1.0);

    let mut design = DMatrix::<f64>::zeros(n, ncols);
    for (r, &t) in ts.iter().enumerate() {
        design[(r, 0)] = 1.0;
        design[(r, 1)] = (t - t_mean) / t_scale;
        for (i, &p) in used.iter().enumerate() {
            let w = 2.0 * std::f64::consts::PI * t / p;
            design[(r, 2 + 2 * i)] = w.cos();
            design[(r, 3 + 2 * i)] = w.sin();
        }
    }

    let zl = panel.flat_dim();
    let mut y = DMatrix::<f64>::zeros(n, zl);
    for t in 0..n {
        let row = panel.observation(t);
        for (c, &v) in row.iter().enumerate() {
            y[(t, c)] = v;
        }
    }

    let xtx = design.transpose() * &design;
    let xty = design.transpose() * y;
    let chol = Cholesky::new(xtx).ok_or_else(|| {
        Error::Numerical("seasonal design matrix is rank-deficient".into())
    })?;
    let coefs = chol.solve(&xty);

    let mut series = Vec::with_capacity(zl);
    for c in 0..zl {
        let a = coefs[(0, c)];
        let b = coefs[(1, c)];
        let harmonics = used
            .iter()
            .enumerate()
            .map(|(i, &p)| HarmonicCoef {
                period: p,
                cos_coef: coefs[(2 + 2 * i, c)],
                sin_coef: coefs[(3 + 2 * i, c)],
            })
            .collect();
        series.push(SeriesSeasonal {
            intercept: a - b * t_mean / t_scale,
            trend_slope: b / t_scale,
            harmonics,
        });
    }

    Ok(SeasonalModel {
        epoch,
        variables: panel.variables().to_vec(),
        lags: panel.l(),
        periods: used,
        series,
    })
}

/// Subtracts the seasonal component from a deviation panel.
pub fn remove_seasonal(
    panel: &DeviationPanel,
    model: &SeasonalModel,
) -> Result<RemainderPanel> {
    model.check_panel(panel)?;
    let fitted = model.fitted_values(panel.issue_times());
    let zl = panel.flat_dim();
    let out = panel.map(|t, z, l, v| v - fitted[t * zl + z * model.lags + l])?;
    Ok(RemainderPanel::new(out))
}

/// Adds the seasonal component back onto a remainder panel.
pub fn restore_seasonal(
    panel: &RemainderPanel,
    model: &SeasonalModel,
) -> Result<DeviationPanel> {
    model.check_panel(panel)?;
    let fitted = model.fitted_values(panel.issue_times());
    let zl = panel.flat_dim();
    let out = panel.map(|t, z, l, v| v + fitted[t * zl + z * model.lags + l])?;
    Ok(DeviationPanel::new(out))
}
