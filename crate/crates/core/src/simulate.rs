//! Monte Carlo scenario generation from a fitted model.
//!
//! Scores are drawn from the matrix normal `sqrt(scale) * La G Lb'` with
//! `La La' = A` (spatial covariance), `Lb Lb' = B` (temporal covariance) and
//! `G` iid standard normal filled row by row, which realizes the joint
//! covariance `scale * (A kron B)` on coordinates flattened `z * L + l`.
//!
//! Reproducibility contract: scenario `i` uses a ChaCha20 generator seeded
//! with the batch seed on stream `i`, so batches are deterministic for a
//! given (model, seed, M) and individual scenarios can be regenerated in
//! isolation.

use chrono::{DateTime, Utc};
use nalgebra::{Cholesky, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gemini::GraphicalModel;
use crate::normal::{norm_cdf, CDF_CLAMP};
use crate::panel::VariableId;
use crate::seasonal::SeasonalModel;
use crate::stats::quantile_type7;
use crate::tails::Marginal;

/// `M x Z x L` tensor of sampled standard-normal-scale scores.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTensor {
    pub m: usize,
    pub z: usize,
    pub l: usize,
    data: Vec<f64>,
}

impl ScoreTensor {
    pub fn get(&self, i: usize, z: usize, l: usize) -> f64 {
        self.data[(i * self.z + z) * self.l + l]
    }

    /// One scenario's `Z x L` block, row-major by variable.
    pub fn scenario(&self, i: usize) -> &[f64] {
        let w = self.z * self.l;
        &self.data[i * w..(i + 1) * w]
    }
}

/// Draws `m` score matrices from the fitted Kronecker Gaussian model.
pub fn sample_kronecker_gaussian(
    model: &GraphicalModel,
    m: usize,
    seed: u64,
) -> Result<ScoreTensor> {
    if m == 0 {
        return Err(Error::Config("scenario count must be at least 1".into()));
    }
    if !(model.scale > 0.0 && model.scale.is_finite()) {
        return Err(Error::Numerical(format!(
            "model scale must be positive, got {}",
            model.scale
        )));
    }
    let z = model.spatial_cov.order();
    let l = model.temporal_cov.order();
    let la = Cholesky::new(model.spatial_cov.to_dmatrix())
        .ok_or_else(|| Error::NotPositiveDefinite("spatial covariance factor".into()))?
        .l();
    let lb = Cholesky::new(model.temporal_cov.to_dmatrix())
        .ok_or_else(|| Error::NotPositiveDefinite("temporal covariance factor".into()))?
        .l();
    let sq = model.scale.sqrt();

    let mut data = Vec::with_capacity(m * z * l);
    let mut g = DMatrix::<f64>::zeros(z, l);
    for i in 0..m {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        for zi in 0..z {
            for li in 0..l {
                g[(zi, li)] = rng.sample(StandardNormal);
            }
        }
        let x = &la * &g * lb.transpose();
        for zi in 0..z {
            for li in 0..l {
                data.push(sq * x[(zi, li)]);
            }
        }
    }
    Ok(ScoreTensor { m, z, l, data })
}

/// A batch of Monte Carlo scenarios in physical units (MW).
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioBatch {
    pub issue_time: DateTime<Utc>,
    pub variables: Vec<VariableId>,
    pub lags: usize,
    pub m: usize,
    pub seed: u64,
    /// Point forecast per coordinate, flattened `z * L + l`.
    pub forecast: Vec<f64>,
    /// Scenario values, row-major `[scenario][z][l]`.
    values: Vec<f64>,
}

impl ScenarioBatch {
    pub fn get(&self, i: usize, z: usize, l: usize) -> f64 {
        self.values[(i * self.variables.len() + z) * self.lags + l]
    }

    pub fn scenario(&self, i: usize) -> &[f64] {
        let w = self.variables.len() * self.lags;
        &self.values[i * w..(i + 1) * w]
    }

    /// All M values of one coordinate.
    pub fn coordinate_values(&self, z: usize, l: usize) -> Vec<f64> {
        (0..self.m).map(|i| self.get(i, z, l)).collect()
    }
}

/// Generates scenarios: score sampling, marginal inversion, seasonal and
/// forecast restoration. `forecast` and the model parts must share the
/// variable order; `marginals` is indexed `z * L + l`.
pub fn scenarios(
    seasonal: &SeasonalModel,
    marginals: &[Marginal],
    graphical: &GraphicalModel,
    forecast: &[f64],
    issue_time: DateTime<Utc>,
    m: usize,
    seed: u64,
) -> Result<ScenarioBatch> {
    if seasonal.variables != graphical.variables {
        return Err(Error::Mismatch(
            "seasonal and graphical models disagree on variable order".into(),
        ));
    }
    if seasonal.lags != graphical.lags {
        return Err(Error::Mismatch(
            "seasonal and graphical models disagree on lag count".into(),
        ));
    }
    let z = graphical.variables.len();
    let l = graphical.lags;
    let zl = z * l;
    if marginals.len() != zl {
        return Err(Error::Mismatch(format!(
            "{} marginals for {zl} coordinates",
            marginals.len()
        )));
    }
    if forecast.len() != zl {
        return Err(Error::Mismatch(format!(
            "forecast has {} coordinates, expected {zl}",
            forecast.len()
        )));
    }
    if forecast.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("forecast contains non-finite values".into()));
    }

    let scores = sample_kronecker_gaussian(graphical, m, seed)?;
    let season = seasonal.components_at(issue_time);

    let mut values = Vec::with_capacity(m * zl);
    for i in 0..m {
        let block = scores.scenario(i);
        for c in 0..zl {
            let u = norm_cdf(block[c]).clamp(CDF_CLAMP, 1.0 - CDF_CLAMP);
            let remainder = marginals[c].quantile(u);
            values.push(forecast[c] + season[c] + remainder);
        }
    }
    Ok(ScenarioBatch {
        issue_time,
        variables: graphical.variables.clone(),
        lags: l,
        m,
        seed,
        forecast: forecast.to_vec(),
        values,
    })
}

/// Per-coordinate trimmed envelope of a scenario batch.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioBand {
    pub variables: Vec<VariableId>,
    pub lags: usize,
    pub trim: f64,
    /// Lower and upper band edges, flattened `z * L + l`.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ScenarioBand {
    pub fn lower_at(&self, z: usize, l: usize) -> f64 {
        self.lower[z * self.lags + l]
    }

    pub fn upper_at(&self, z: usize, l: usize) -> f64 {
        self.upper[z * self.lags + l]
    }
}

/// Computes the `[trim, 1 - trim]` quantile band per coordinate; `trim = 0`
/// is the min/max envelope. Requires `M * trim >= 1` when `trim > 0`.
pub fn band(batch: &ScenarioBatch, trim: f64) -> Result<ScenarioBand> {
    if !(0.0..0.5).contains(&trim) {
        return Err(Error::Config(format!(
            "trim must lie in [0, 0.5), got {trim}"
        )));
    }
    if trim > 0.0 && (batch.m as f64) * trim < 1.0 {
        return Err(Error::Insufficient {
            what: format!("band at trim {trim}"),
            needed: (1.0 / trim).ceil() as usize,
            got: batch.m,
        });
    }
    let z = batch.variables.len();
    let l = batch.lags;
    let mut lower = Vec::with_capacity(z * l);
    let mut upper = Vec::with_capacity(z * l);
    for zi in 0..z {
        for li in 0..l {
            let mut col = batch.coordinate_values(zi, li);
            col.sort_by(|a, b| a.partial_cmp(b).unwrap());
            lower.push(quantile_type7(&col, trim));
            upper.push(quantile_type7(&col, 1.0 - trim));
        }
    }
    Ok(ScenarioBand {
        variables: batch.variables.clone(),
        lags: l,
        trim,
        lower,
        upper,
    })
}

/// Per-coordinate quantiles of a batch at the given probabilities, returned
/// as one row per coordinate (flattened `z * L + l`).
pub fn quantile_grid(batch: &ScenarioBatch, probs: &[f64]) -> Result<Vec<Vec<f64>>> {
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::Config("quantile probabilities must lie in [0, 1]".into()));
    }
    let z = batch.variables.len();
    let mut rows = Vec::with_capacity(z * batch.lags);
    for zi in 0..z {
        for li in 0..batch.lags {
            let mut col = batch.coordinate_values(zi, li);
            col.sort_by(|a, b| a.partial_cmp(b).unwrap());
            rows.push(probs.iter().map(|&p| quantile_type7(&col, p)).collect());
        }
    }
    Ok(rows)
}

/// Band coverage of an observed path.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageReport {
    /// Whether the actual lies inside the band, flattened `z * L + l`.
    pub inside: Vec<bool>,
    /// Fraction of coordinates covered.
    pub fraction: f64,
}

/// Checks an actual path (flattened `z * L + l`) against a band.
pub fn coverage_against_band(band: &ScenarioBand, actuals: &[f64]) -> Result<CoverageReport> {
    let zl = band.variables.len() * band.lags;
    if actuals.len() != zl {
        return Err(Error::Mismatch(format!(
            "actual path has {} coordinates, band has {zl}",
            actuals.len()
        )));
    }
    if actuals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data(
            "actual path contains missing or non-finite values".into(),
        ));
    }
    let inside: Vec<bool> = actuals
        .iter()
        .enumerate()
        .map(|(c, &a)| a >= band.lower[c] && a <= band.upper[c])
        .collect();
    let fraction = inside.iter().filter(|&&b| b).count() as f64 / zl as f64;
    Ok(CoverageReport { inside, fraction })
}

/// Builds the band at `trim` and reports coverage of the actual path.
pub fn coverage_report(
    batch: &ScenarioBatch,
    actuals: &[f64],
    trim: f64,
) -> Result<CoverageReport> {
    coverage_against_band(&band(batch, trim)?, actuals)
}
