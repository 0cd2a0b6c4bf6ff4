//! Heavy-tailed marginal distributions: generalized Pareto tail fits grafted
//! onto an empirical interior.
//!
//! The generalized Pareto density for excesses `y > 0` over a threshold is
//!
//! ```text
//! g(y; xi, beta) = (1/beta) (1 + xi y / beta)^(-1/xi - 1)      xi != 0
//! g(y; 0,  beta) = (1/beta) exp(-y / beta)
//! ```
//!
//! with support `y < -beta/xi` when `xi < 0`. Shapes are restricted to
//! `xi in [-0.5, 1]`: below -0.5 the MLE is irregular, above 1 the mean is
//! infinite. The MLE profiles the likelihood over `xi` (Newton in `beta` for
//! each `xi`, golden-section refinement in `xi`); probability-weighted
//! moments are the fallback estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{norm_cdf, norm_quantile, CDF_CLAMP};
use crate::stats::{mean, quantile_type7};

pub const DEFAULT_THRESHOLD_QUANTILE: f64 = 0.95;
pub const DEFAULT_MIN_EXCEEDANCES: usize = 30;

/// Minimum sample size for a semi-parametric marginal fit.
pub const MIN_MARGINAL_SAMPLE: usize = 200;

pub const XI_MIN: f64 = -0.5;
pub const XI_MAX: f64 = 1.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GpdFitMethod {
    #[default]
    Mle,
    Pwm,
}

#[derive(Clone, Debug)]
pub struct TailFitConfig {
    /// Upper-tail threshold quantile; the lower tail uses its mirror image.
    pub threshold_quantile: f64,
    /// Below this exceedance count a tail degrades to the exponential fallback.
    pub min_exceedances: usize,
    pub method: GpdFitMethod,
}

impl Default for TailFitConfig {
    fn default() -> Self {
        TailFitConfig {
            threshold_quantile: DEFAULT_THRESHOLD_QUANTILE,
            min_exceedances: DEFAULT_MIN_EXCEEDANCES,
            method: GpdFitMethod::Mle,
        }
    }
}

/// One fitted tail. `tail_prob` is the probability mass beyond `threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpdTail {
    pub threshold: f64,
    pub xi: f64,
    pub beta: f64,
    pub tail_prob: f64,
}

/// Which tails carry a fitted GPD shape (the others fall back to an
/// exponential tail with the observed mean excess).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailMode {
    Both,
    UpperOnly,
    LowerOnly,
    None,
}

#[derive(Clone, Copy, Debug)]
pub struct GpdFit {
    pub xi: f64,
    pub beta: f64,
    pub log_likelihood: f64,
}

/// GPD survival function for an excess `y >= 0`.
pub fn gpd_survival(y: f64, xi: f64, beta: f64) -> f64 {
    if y <= 0.0 {
        return 1.0;
    }
    if xi.abs() < 1e-12 {
        (-y / beta).exp()
    } else {
        let a = 1.0 + xi * y / beta;
        if a <= 0.0 {
            0.0
        } else {
            a.powf(-1.0 / xi)
        }
    }
}

/// Excess with survival probability `s` in (0, 1].
pub fn gpd_excess_at_survival(s: f64, xi: f64, beta: f64) -> f64 {
    if s >= 1.0 {
        return 0.0;
    }
    if xi.abs() < 1e-12 {
        -beta * s.ln()
    } else {
        beta / xi * (s.powf(-xi) - 1.0)
    }
}

/// GPD log-likelihood of positive excesses; `-inf` outside the support.
pub fn gpd_log_likelihood(excesses: &[f64], xi: f64, beta: f64) -> f64 {
    let n = excesses.len() as f64;
    if beta <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if xi.abs() < 1e-12 {
        let s: f64 = excesses.iter().sum();
        return -n * beta.ln() - s / beta;
    }
    let mut acc = 0.0;
    for &y in excesses {
        let a = xi * y / beta;
        if 1.0 + a <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += a.ln_1p();
    }
    -n * beta.ln() - (1.0 + 1.0 / xi) * acc
}

/// Profile-likelihood maximizer in `beta` for fixed `xi`: the unique root of
/// `h(beta) = (xi + 1) sum(y / (beta + xi y)) - n`, which is strictly
/// decreasing on `beta > max(0, -xi max(y))`.
fn profile_beta(xi: f64, y: &[f64], y_max: f64, y_mean: f64) -> f64 {
    if xi.abs() < 1e-12 {
        return y_mean;
    }
    let n = y.len() as f64;
    let h = |b: f64| -> f64 {
        let s: f64 = y.iter().map(|&v| v / (b + xi * v)).sum();
        (xi + 1.0) * s - n
    };
    let lb = if xi < 0.0 { -xi * y_max } else { 0.0 };

    let mut lo = lb + 1e-12 * (1.0 + lb);
    let mut hi = (y_mean * (1.0 - xi.min(0.9))).max(lo * 2.0).max(1e-300);
    for _ in 0..200 {
        if h(hi) < 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let hx = h(x);
        if hx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let hpx: f64 = -(xi + 1.0)
            * y.iter()
                .map(|&v| {
                    let d = x + xi * v;
                    v / (d * d)
                })
                .sum::<f64>();
        let mut next = x - hx / hpx;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-13 * x.abs() {
            x = next;
            break;
        }
        x = next;
    }
    x
}

fn fit_gpd_mle(y: &[f64]) -> GpdFit {
    let y_max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y_mean = mean(y);

    let profile = |xi: f64| -> (f64, f64) {
        let beta = profile_beta(xi, y, y_max, y_mean);
        (beta, gpd_log_likelihood(y, xi, beta))
    };

    let grid_n = 31;
    let mut best_xi = 0.0;
    let mut best_ll = f64::NEG_INFINITY;
    for i in 0..grid_n {
        let xi = XI_MIN + (XI_MAX - XI_MIN) * i as f64 / (grid_n - 1) as f64;
        let (_, ll) = profile(xi);
        if ll > best_ll {
            best_ll = ll;
            best_xi = xi;
        }
    }

    // Golden-section refinement around the best grid point.
    let step = (XI_MAX - XI_MIN) / (grid_n - 1) as f64;
    let mut a = (best_xi - step).max(XI_MIN);
    let mut b = (best_xi + step).min(XI_MAX);
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = profile(c).1;
    let mut fd = profile(d).1;
    while b - a > 1e-6 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = profile(c).1;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = profile(d).1;
        }
    }
    let xi = 0.5 * (a + b);
    let (beta, ll) = profile(xi);
    GpdFit {
        xi,
        beta,
        log_likelihood: ll,
    }
}

fn fit_gpd_pwm(y: &[f64]) -> Result<GpdFit> {
    let n = y.len();
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let b0 = mean(&sorted);
    let b1 = sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| i as f64 / (n - 1) as f64 * v)
        .sum::<f64>()
        / n as f64;
    let l2 = 2.0 * b1 - b0;
    if l2 <= 0.0 || !l2.is_finite() {
        return Err(Error::Degenerate(
            "probability-weighted moments are degenerate".into(),
        ));
    }
    let xi = (2.0 - b0 / l2).clamp(XI_MIN, XI_MAX);
    let beta = b0 * (1.0 - xi);
    if beta <= 0.0 || !beta.is_finite() {
        return Err(Error::Degenerate("nonpositive PWM scale".into()));
    }
    Ok(GpdFit {
        xi,
        beta,
        log_likelihood: gpd_log_likelihood(y, xi, beta),
    })
}

/// Fits a GPD to threshold excesses. Requires at least `min_exceedances`
/// strictly positive values; the MLE falls back to probability-weighted
/// moments if the profiled likelihood misbehaves.
pub fn fit_gpd_exceedances(
    excesses: &[f64],
    method: GpdFitMethod,
    min_exceedances: usize,
) -> Result<GpdFit> {
    if excesses.len() < min_exceedances.max(2) {
        return Err(Error::Insufficient {
            what: "GPD tail fit (exceedances)".into(),
            needed: min_exceedances.max(2),
            got: excesses.len(),
        });
    }
    if excesses.iter().any(|&v| !v.is_finite() || v <= 0.0) {
        return Err(Error::Data(
            "tail excesses must be finite and strictly positive".into(),
        ));
    }
    match method {
        GpdFitMethod::Pwm => fit_gpd_pwm(excesses),
        GpdFitMethod::Mle => {
            let fit = fit_gpd_mle(excesses);
            if fit.beta > 0.0 && fit.beta.is_finite() && fit.log_likelihood.is_finite() {
                Ok(fit)
            } else {
                fit_gpd_pwm(excesses)
            }
        }
    }
}

/// Semi-parametric marginal: piecewise-linear empirical CDF between the two
/// tail thresholds, GPD tails beyond them. The CDF is continuous, strictly
/// increasing across segments, anchored exactly at
/// `(lower.threshold, lower.tail_prob)` and
/// `(upper.threshold, 1 - upper.tail_prob)`, and clamped to
/// `[1e-12, 1 - 1e-12]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SemiParametricRecord", into = "SemiParametricRecord")]
pub struct SemiParametricDist {
    lower: GpdTail,
    upper: GpdTail,
    interior: Vec<f64>,
    tail_mode: TailMode,
    knots_x: Vec<f64>,
    knots_p: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
struct SemiParametricRecord {
    tail_mode: TailMode,
    lower: GpdTail,
    upper: GpdTail,
    interior: Vec<f64>,
}

impl TryFrom<SemiParametricRecord> for SemiParametricDist {
    type Error = Error;

    fn try_from(r: SemiParametricRecord) -> Result<Self> {
        SemiParametricDist::new(r.lower, r.upper, r.interior, r.tail_mode)
    }
}

impl From<SemiParametricDist> for SemiParametricRecord {
    fn from(d: SemiParametricDist) -> Self {
        SemiParametricRecord {
            tail_mode: d.tail_mode,
            lower: d.lower,
            upper: d.upper,
            interior: d.interior,
        }
    }
}

impl SemiParametricDist {
    /// Builds the distribution and its interior interpolation knots.
    /// `interior` must lie strictly between the two thresholds.
    pub fn new(
        lower: GpdTail,
        upper: GpdTail,
        mut interior: Vec<f64>,
        tail_mode: TailMode,
    ) -> Result<Self> {
        for (side, t) in [("lower", &lower), ("upper", &upper)] {
            if !(t.beta > 0.0 && t.beta.is_finite()) {
                return Err(Error::Data(format!("{side} tail scale must be positive")));
            }
            if !(t.tail_prob > 0.0 && t.tail_prob < 0.5) {
                return Err(Error::Data(format!(
                    "{side} tail probability must lie in (0, 0.5)"
                )));
            }
            if !t.xi.is_finite() || !t.threshold.is_finite() {
                return Err(Error::Data(format!("{side} tail has non-finite parameters")));
            }
        }
        if !(lower.threshold < upper.threshold) {
            return Err(Error::Degenerate(
                "tail thresholds must be strictly ordered".into(),
            ));
        }
        if lower.tail_prob + upper.tail_prob >= 1.0 {
            return Err(Error::Data("tail probabilities sum to at least 1".into()));
        }
        interior.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if interior
            .iter()
            .any(|&x| !x.is_finite() || x <= lower.threshold || x >= upper.threshold)
        {
            return Err(Error::Data(
                "interior values must lie strictly between the tail thresholds".into(),
            ));
        }

        let p_lo = lower.tail_prob;
        let p_hi = 1.0 - upper.tail_prob;
        let mass = p_hi - p_lo;
        let m = interior.len();

        // Plotting positions (j + 1/2)/m of the interior mass; tied values
        // collapse to one knot at their average position so the CDF stays
        // continuous and strictly increasing.
        let mut knots_x = Vec::with_capacity(m + 2);
        let mut knots_p = Vec::with_capacity(m + 2);
        knots_x.push(lower.threshold);
        knots_p.push(p_lo);
        let mut j = 0;
        while j < m {
            let mut k = j + 1;
            while k < m && interior[k] == interior[j] {
                k += 1;
            }
            let mid = (j + k - 1) as f64 / 2.0;
            knots_x.push(interior[j]);
            knots_p.push(p_lo + (mid + 0.5) / m as f64 * mass);
            j = k;
        }
        knots_x.push(upper.threshold);
        knots_p.push(p_hi);

        Ok(SemiParametricDist {
            lower,
            upper,
            interior,
            tail_mode,
            knots_x,
            knots_p,
        })
    }

    pub fn lower(&self) -> &GpdTail {
        &self.lower
    }

    pub fn upper(&self) -> &GpdTail {
        &self.upper
    }

    pub fn tail_mode(&self) -> TailMode {
        self.tail_mode
    }

    pub fn interior_len(&self) -> usize {
        self.interior.len()
    }

    /// CDF, clamped to `[1e-12, 1 - 1e-12]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let p = if x <= self.lower.threshold {
            let y = self.lower.threshold - x;
            self.lower.tail_prob * gpd_survival(y, self.lower.xi, self.lower.beta)
        } else if x >= self.upper.threshold {
            1.0 - self.upper.tail_prob * gpd_survival(x - self.upper.threshold, self.upper.xi, self.upper.beta)
        } else {
            // x strictly between the anchor knots; find its segment.
            let i = match self
                .knots_x
                .binary_search_by(|k| k.partial_cmp(&x).unwrap())
            {
                Ok(i) => return self.knots_p[i].clamp(CDF_CLAMP, 1.0 - CDF_CLAMP),
                Err(i) => i,
            };
            let (x0, x1) = (self.knots_x[i - 1], self.knots_x[i]);
            let (p0, p1) = (self.knots_p[i - 1], self.knots_p[i]);
            p0 + (x - x0) / (x1 - x0) * (p1 - p0)
        };
        p.clamp(CDF_CLAMP, 1.0 - CDF_CLAMP)
    }

    /// Quantile function, the exact inverse of `cdf` on the clamped range.
    pub fn quantile(&self, u: f64) -> f64 {
        assert!(u > 0.0 && u < 1.0, "quantile requires u in (0, 1), got {u}");
        let u = u.clamp(CDF_CLAMP, 1.0 - CDF_CLAMP);
        if u <= self.lower.tail_prob {
            let s = u / self.lower.tail_prob;
            self.lower.threshold - gpd_excess_at_survival(s, self.lower.xi, self.lower.beta)
        } else if u >= 1.0 - self.upper.tail_prob {
            let s = (1.0 - u) / self.upper.tail_prob;
            self.upper.threshold + gpd_excess_at_survival(s, self.upper.xi, self.upper.beta)
        } else {
            let i = self
                .knots_p
                .partition_point(|&p| p < u)
                .clamp(1, self.knots_p.len() - 1);
            let (x0, x1) = (self.knots_x[i - 1], self.knots_x[i]);
            let (p0, p1) = (self.knots_p[i - 1], self.knots_p[i]);
            x0 + (u - p0) / (p1 - p0) * (x1 - x0)
        }
    }
}

/// A fitted marginal: semi-parametric with GPD tails, or a plain Gaussian
/// (used when tail modeling is disabled).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Marginal {
    SemiParametric(SemiParametricDist),
    Gaussian { mean: f64, sd: f64 },
}

impl Marginal {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Marginal::SemiParametric(d) => d.cdf(x),
            Marginal::Gaussian { mean, sd } => {
                norm_cdf((x - mean) / sd).clamp(CDF_CLAMP, 1.0 - CDF_CLAMP)
            }
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Marginal::SemiParametric(d) => d.quantile(u),
            Marginal::Gaussian { mean, sd } => mean + sd * norm_quantile(u),
        }
    }
}

fn fit_one_tail(
    excesses: &[f64],
    cfg: &TailFitConfig,
    fallback_scale: f64,
    side: &str,
) -> (f64, f64, bool) {
    if excesses.len() >= cfg.min_exceedances {
        match fit_gpd_exceedances(excesses, cfg.method, cfg.min_exceedances) {
            Ok(fit) if fit.xi > XI_MIN + 1e-9 => return (fit.xi, fit.beta, true),
            Ok(fit) => {
                log::warn!(
                    "{side} tail shape {:.3} at the boundary; using exponential fallback",
                    fit.xi
                );
            }
            Err(e) => {
                log::warn!("{side} tail GPD fit failed ({e}); using exponential fallback");
            }
        }
    }
    let beta = if excesses.is_empty() {
        fallback_scale
    } else {
        mean(excesses)
    };
    (0.0, beta.max(1e-300), false)
}

/// Fits a semi-parametric marginal to a sample: empirical interior between
/// the `1 - q` and `q` threshold quantiles, GPD tails beyond them, with an
/// exponential fallback on tails that are too thin to fit.
pub fn fit_semiparametric(sample: &[f64], cfg: &TailFitConfig) -> Result<SemiParametricDist> {
    let n = sample.len();
    if n < MIN_MARGINAL_SAMPLE {
        return Err(Error::Insufficient {
            what: "semi-parametric marginal fit".into(),
            needed: MIN_MARGINAL_SAMPLE,
            got: n,
        });
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("marginal sample contains non-finite values".into()));
    }
    if !(cfg.threshold_quantile > 0.5 && cfg.threshold_quantile < 1.0) {
        return Err(Error::Config(format!(
            "threshold quantile must lie in (0.5, 1), got {}",
            cfg.threshold_quantile
        )));
    }

    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted[0] == sorted[n - 1] {
        return Err(Error::Degenerate("marginal sample is constant".into()));
    }

    let upper_th = quantile_type7(&sorted, cfg.threshold_quantile);
    let lower_th = quantile_type7(&sorted, 1.0 - cfg.threshold_quantile);
    if !(lower_th < upper_th) {
        return Err(Error::Degenerate(
            "tail thresholds coincide; the sample is nearly constant".into(),
        ));
    }

    let upper_exc: Vec<f64> = sorted
        .iter()
        .filter(|&&x| x > upper_th)
        .map(|&x| x - upper_th)
        .collect();
    let lower_exc: Vec<f64> = sorted
        .iter()
        .filter(|&&x| x < lower_th)
        .map(|&x| lower_th - x)
        .collect();

    let fallback_scale = (upper_th - lower_th) / 10.0;
    let (uxi, ubeta, ugen) = fit_one_tail(&upper_exc, cfg, fallback_scale, "upper");
    let (lxi, lbeta, lgen) = fit_one_tail(&lower_exc, cfg, fallback_scale, "lower");

    // Half an observation of mass keeps a never-exceeded tail invertible.
    let tp = |k: usize| (k as f64).max(0.5) / n as f64;
    let upper = GpdTail {
        threshold: upper_th,
        xi: uxi,
        beta: ubeta,
        tail_prob: tp(upper_exc.len()),
    };
    let lower = GpdTail {
        threshold: lower_th,
        xi: lxi,
        beta: lbeta,
        tail_prob: tp(lower_exc.len()),
    };
    let tail_mode = match (lgen, ugen) {
        (true, true) => TailMode::Both,
        (false, true) => TailMode::UpperOnly,
        (true, false) => TailMode::LowerOnly,
        (false, false) => TailMode::None,
    };
    let interior: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|&x| x > lower_th && x < upper_th)
        .collect();
    SemiParametricDist::new(lower, upper, interior, tail_mode)
}

/// Gaussian Q-Q pairs `(theoretical, empirical)` for a sample, using
/// plotting positions `(i - 1/2)/n`.
pub fn qq_gaussian(sample: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::Insufficient {
            what: "Q-Q plot".into(),
            needed: 2,
            got: n,
        });
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (norm_quantile((i as f64 + 0.5) / n as f64), x))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn uniforms(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen::<f64>()).collect()
    }

    fn gpd_sample(n: usize, xi: f64, beta: f64, seed: u64) -> Vec<f64> {
        uniforms(n, seed)
            .into_iter()
            .map(|u| gpd_excess_at_survival(1.0 - u, xi, beta))
            .collect()
    }

    #[test]
    fn mle_recovers_exponential() {
        // Exp(1) is GPD with xi = 0, beta = 1.
        let y = gpd_sample(10_000, 0.0, 1.0, 42);
        let fit = fit_gpd_exceedances(&y, GpdFitMethod::Mle, 30).unwrap();
        assert!(fit.xi.abs() < 0.05, "xi = {}", fit.xi);
        assert!((fit.beta - 1.0).abs() < 0.05, "beta = {}", fit.beta);
    }

    #[test]
    fn mle_recovers_heavy_tail() {
        let y = gpd_sample(10_000, 0.3, 2.0, 7);
        let fit = fit_gpd_exceedances(&y, GpdFitMethod::Mle, 30).unwrap();
        assert!((fit.xi - 0.3).abs() < 0.05, "xi = {}", fit.xi);
        assert!((fit.beta - 2.0).abs() < 0.1, "beta = {}", fit.beta);
    }

    #[test]
    fn mle_recovers_bounded_tail() {
        let y = gpd_sample(10_000, -0.2, 1.0, 11);
        let fit = fit_gpd_exceedances(&y, GpdFitMethod::Mle, 30).unwrap();
        assert!((fit.xi + 0.2).abs() < 0.05, "xi = {}", fit.xi);
        // Fitted support must contain the largest observation.
        let y_max = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(fit.beta + fit.xi * y_max > 0.0);
    }

    #[test]
    fn pwm_recovers_exponential_roughly() {
        let y = gpd_sample(10_000, 0.0, 1.0, 5);
        let fit = fit_gpd_exceedances(&y, GpdFitMethod::Pwm, 30).unwrap();
        assert!(fit.xi.abs() < 0.1, "xi = {}", fit.xi);
        assert!((fit.beta - 1.0).abs() < 0.1, "beta = {}", fit.beta);
    }

    #[test]
    fn too_few_exceedances_signal() {
        let y = gpd_sample(10, 0.1, 1.0, 3);
        assert!(matches!(
            fit_gpd_exceedances(&y, GpdFitMethod::Mle, 30),
            Err(Error::Insufficient { .. })
        ));
    }

    #[test]
    fn mle_dominates_a_parameter_grid() {
        // The profiled MLE must beat every point of a 50 x 50 grid over
        // xi in [-0.5, 1], beta in [beta_hat/3, 3 beta_hat].
        let y = gpd_sample(2_000, 0.25, 1.5, 19);
        let fit = fit_gpd_exceedances(&y, GpdFitMethod::Mle, 30).unwrap();
        for i in 0..50 {
            let xi = XI_MIN + (XI_MAX - XI_MIN) * i as f64 / 49.0;
            for j in 0..50 {
                let beta = fit.beta / 3.0 + (3.0 * fit.beta - fit.beta / 3.0) * j as f64 / 49.0;
                let ll = gpd_log_likelihood(&y, xi, beta);
                assert!(
                    fit.log_likelihood >= ll - 1e-6,
                    "grid point (xi={xi}, beta={beta}) beats the MLE: {ll} > {}",
                    fit.log_likelihood
                );
            }
        }
    }

    fn normal_sample(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect()
    }

    #[test]
    fn semiparametric_fit_on_gaussian_data() {
        let sample = normal_sample(17_520, 2);
        let d = fit_semiparametric(&sample, &TailFitConfig::default()).unwrap();
        assert_eq!(d.tail_mode(), TailMode::Both);
        // The Gaussian lies in the Gumbel domain; at the 0.95 threshold its
        // effective penultimate shape is mildly negative (about -0.1).
        assert!(d.upper().xi.abs() < 0.2, "upper xi = {}", d.upper().xi);
        assert!(d.lower().xi.abs() < 0.2, "lower xi = {}", d.lower().xi);
        assert!((d.upper().tail_prob - 0.05).abs() < 0.005);
        assert!((d.lower().tail_prob - 0.05).abs() < 0.005);
    }

    #[test]
    fn semiparametric_fit_on_pareto_upper_tail() {
        // X = U^(-1/2.5) is Pareto with alpha = 2.5, so the upper-tail shape
        // is 1/alpha = 0.4.
        let sample: Vec<f64> = uniforms(17_520, 23)
            .into_iter()
            .map(|u| u.powf(-1.0 / 2.5))
            .collect();
        let d = fit_semiparametric(&sample, &TailFitConfig::default()).unwrap();
        assert!(
            (d.upper().xi - 0.4).abs() < 0.1,
            "upper xi = {}",
            d.upper().xi
        );
    }

    #[test]
    fn constant_sample_is_degenerate() {
        let sample = vec![5.0; 1000];
        assert!(matches!(
            fit_semiparametric(&sample, &TailFitConfig::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn short_sample_is_insufficient() {
        let sample = normal_sample(100, 1);
        assert!(matches!(
            fit_semiparametric(&sample, &TailFitConfig::default()),
            Err(Error::Insufficient { .. })
        ));
    }

    fn manual_dist(lxi: f64, uxi: f64) -> SemiParametricDist {
        let interior: Vec<f64> = (1..100).map(|i| -2.0 + 4.0 * i as f64 / 100.0).collect();
        SemiParametricDist::new(
            GpdTail {
                threshold: -2.0,
                xi: lxi,
                beta: 1.0,
                tail_prob: 0.05,
            },
            GpdTail {
                threshold: 2.0,
                xi: uxi,
                beta: 1.0,
                tail_prob: 0.05,
            },
            interior,
            TailMode::Both,
        )
        .unwrap()
    }

    #[test]
    fn cdf_hits_threshold_anchors_exactly() {
        let d = manual_dist(0.0, 0.0);
        assert_eq!(d.cdf(2.0), 0.95);
        assert_eq!(d.cdf(-2.0), 0.05);
        // Exponential upper tail: cdf(threshold + beta) = 1 - 0.05/e.
        let want = 1.0 - 0.05 * (-1.0f64).exp();
        assert!((d.cdf(3.0) - want).abs() < 1e-12, "{} vs {want}", d.cdf(3.0));
    }

    #[test]
    fn cdf_is_continuous_at_thresholds() {
        let d = manual_dist(0.2, 0.3);
        for th in [-2.0, 2.0] {
            let below = d.cdf(th - 1e-9);
            let above = d.cdf(th + 1e-9);
            assert!((above - below).abs() < 1e-7, "jump at {th}");
        }
    }

    #[test]
    fn cdf_clamps_far_tails() {
        let d = manual_dist(0.0, 0.0);
        assert_eq!(d.cdf(-1e9), CDF_CLAMP);
        assert_eq!(d.cdf(1e9), 1.0 - CDF_CLAMP);
    }

    #[test]
    fn quantile_matches_bisection_oracle() {
        let d = manual_dist(0.1, 0.3);
        for &u in &[0.001, 0.02, 0.05, 0.2, 0.5, 0.8, 0.95, 0.99, 0.9999] {
            let q = d.quantile(u);
            // Bisection on the CDF.
            let (mut lo, mut hi) = (-1e6, 1e6);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if d.cdf(mid) < u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let oracle = 0.5 * (lo + hi);
            assert!((q - oracle).abs() < 1e-7, "u={u}: {q} vs {oracle}");
        }
    }

    #[test]
    fn quantile_cdf_roundtrip_on_fitted_distribution() {
        let sample = normal_sample(5_000, 17);
        let d = fit_semiparametric(&sample, &TailFitConfig::default()).unwrap();
        for i in 0..=400 {
            let x = -4.0 + 8.0 * i as f64 / 400.0;
            let u = d.cdf(x);
            if u <= CDF_CLAMP || u >= 1.0 - CDF_CLAMP {
                continue;
            }
            let back = d.quantile(u);
            assert!(
                (back - x).abs() < 1e-9 * x.abs().max(1.0),
                "x={x}: back={back}"
            );
        }
    }

    #[test]
    fn negative_shape_respects_finite_endpoint() {
        let d = manual_dist(0.0, -0.3);
        let endpoint = 2.0 + 1.0 / 0.3;
        let q = d.quantile(1.0 - 1e-12);
        assert!(q <= endpoint + 1e-9, "q = {q} beyond endpoint {endpoint}");
        // Beyond the endpoint the CDF saturates at the clamp.
        assert_eq!(d.cdf(endpoint + 1.0), 1.0 - CDF_CLAMP);
    }

    #[test]
    fn tail_anchor_quantiles() {
        let d = manual_dist(0.1, 0.1);
        assert!((d.quantile(0.05) - (-2.0)).abs() < 1e-12);
        assert!((d.quantile(0.95) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn serde_roundtrip_rebuilds_knots() {
        let sample = normal_sample(2_000, 29);
        let d = fit_semiparametric(&sample, &TailFitConfig::default()).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        let back: SemiParametricDist = serde_json::from_str(&json).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn gaussian_marginal_cdf_quantile() {
        let m = Marginal::Gaussian { mean: 10.0, sd: 2.0 };
        assert!((m.cdf(10.0) - 0.5).abs() < 1e-15);
        for &u in &[0.01, 0.3, 0.5, 0.9, 0.999] {
            let x = m.quantile(u);
            assert!((m.cdf(x) - u).abs() < 1e-12, "u={u}");
        }
    }

    #[test]
    fn qq_pairs_track_the_diagonal_for_gaussian_data() {
        let sample = normal_sample(10_000, 31);
        let qq = qq_gaussian(&sample).unwrap();
        assert_eq!(qq.len(), 10_000);
        for &(t, e) in qq.iter().filter(|(t, _)| t.abs() < 2.0) {
            assert!((t - e).abs() < 0.12, "theoretical {t} vs empirical {e}");
        }
        // Pairs are sorted in both coordinates.
        assert!(qq.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
    }
}
