//! Kronecker-structured joint model of gaussianized score panels.
//!
//! For scores `X_t` (`Z x L` matrices), the joint covariance is modeled as
//! `scale * (A kron B)` with `A` the `Z x Z` spatial factor and `B` the
//! `L x L` temporal factor, matching the row-major flattening `z * L + l`.
//! The factors are estimated separately: the spatial Gram
//! `S_A = (1/(nL)) sum_t X_t X_t'` and the temporal Gram
//! `S_B = (1/(nZ)) sum_t X_t' X_t` are reduced to correlation form and each
//! is fed to the graphical lasso, which keeps the factor precisions sparse.
//! The overall `scale` is the mean per-coordinate sample variance, which
//! restores the magnitude lost in the correlation normalizations.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glasso::{glasso_opts, SymMatrix, DEFAULT_GLASSO_MAX_ITER, DEFAULT_GLASSO_TOL};
use crate::panel::{GaussianPanel, VariableId};

pub const DEFAULT_FACTOR_LAMBDA: f64 = 0.1;

/// Fitted Kronecker graphical model. Both factors are in correlation form
/// (unit diagonal covariance); `scale` carries the overall variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphicalModel {
    pub variables: Vec<VariableId>,
    pub lags: usize,
    pub spatial_cov: SymMatrix,
    pub spatial_precision: SymMatrix,
    pub temporal_cov: SymMatrix,
    pub temporal_precision: SymMatrix,
    pub scale: f64,
}

/// Per-factor solver statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorStats {
    pub order: usize,
    pub iterations: usize,
    pub converged: bool,
    pub nonzero_offdiag: usize,
}

#[derive(Clone, Debug)]
pub struct GeminiFit {
    pub model: GraphicalModel,
    pub spatial: FactorStats,
    pub temporal: FactorStats,
}

#[derive(Clone, Copy, Debug)]
pub struct GeminiOptions {
    pub lambda_spatial: f64,
    pub lambda_temporal: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GeminiOptions {
    fn default() -> Self {
        GeminiOptions {
            lambda_spatial: DEFAULT_FACTOR_LAMBDA,
            lambda_temporal: DEFAULT_FACTOR_LAMBDA,
            tol: DEFAULT_GLASSO_TOL,
            max_iter: DEFAULT_GLASSO_MAX_ITER,
        }
    }
}

/// Estimates the Kronecker factor model from a gaussianized panel.
pub fn gemini(panel: &GaussianPanel, opts: &GeminiOptions) -> Result<GeminiFit> {
    let n = panel.n();
    let z = panel.z();
    let l = panel.l();
    if n < 2 {
        return Err(Error::Insufficient {
            what: "Kronecker factor estimation".into(),
            needed: 2,
            got: n,
        });
    }

    // Center each coordinate; scores are nominally mean zero, but exact
    // centering makes the Z = 1 / L = 1 degeneracies coincide with the plain
    // empirical correlation.
    let zl = z * l;
    let mut means = vec![0.0f64; zl];
    for t in 0..n {
        for (c, &v) in panel.observation(t).iter().enumerate() {
            means[c] += v;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }

    // scale = mean per-coordinate sample variance.
    let mut scale = 0.0;
    for t in 0..n {
        for (c, &v) in panel.observation(t).iter().enumerate() {
            let d = v - means[c];
            scale += d * d;
        }
    }
    scale /= ((n - 1) * zl) as f64;
    if !(scale > 0.0) {
        return Err(Error::Degenerate("score panel has zero variance".into()));
    }

    // Factor Grams of the centered scores.
    let mut s_a = DMatrix::<f64>::zeros(z, z);
    let mut s_b = DMatrix::<f64>::zeros(l, l);
    let mut xt = DMatrix::<f64>::zeros(z, l);
    for t in 0..n {
        let row = panel.observation(t);
        for zi in 0..z {
            for li in 0..l {
                xt[(zi, li)] = row[zi * l + li] - means[zi * l + li];
            }
        }
        s_a += &xt * xt.transpose();
        s_b += xt.transpose() * &xt;
    }
    s_a /= (n * l) as f64;
    s_b /= (n * z) as f64;

    let r_a = gram_to_correlation(&s_a, "spatial")?;
    let r_b = gram_to_correlation(&s_b, "temporal")?;

    let sol_a = glasso_opts(&r_a, opts.lambda_spatial, opts.tol, opts.max_iter)
        .map_err(|e| e.with_stage("spatial factor"))?;
    let sol_b = glasso_opts(&r_b, opts.lambda_temporal, opts.tol, opts.max_iter)
        .map_err(|e| e.with_stage("temporal factor"))?;

    let spatial = FactorStats {
        order: z,
        iterations: sol_a.iterations,
        converged: sol_a.converged,
        nonzero_offdiag: sol_a.theta.count_offdiag_nonzero(),
    };
    let temporal = FactorStats {
        order: l,
        iterations: sol_b.iterations,
        converged: sol_b.converged,
        nonzero_offdiag: sol_b.theta.count_offdiag_nonzero(),
    };
    let model = GraphicalModel {
        variables: panel.variables().to_vec(),
        lags: l,
        spatial_cov: sol_a.w,
        spatial_precision: sol_a.theta,
        temporal_cov: sol_b.w,
        temporal_precision: sol_b.theta,
        scale,
    };
    Ok(GeminiFit {
        model,
        spatial,
        temporal,
    })
}

fn gram_to_correlation(gram: &DMatrix<f64>, what: &str) -> Result<SymMatrix> {
    let p = gram.nrows();
    let mut data = vec![0.0f64; p * p];
    for i in 0..p {
        if gram[(i, i)] <= 0.0 {
            return Err(Error::Degenerate(format!(
                "{what} Gram has a zero diagonal at index {i}"
            )));
        }
    }
    for i in 0..p {
        data[i * p + i] = 1.0;
        for j in (i + 1)..p {
            let r = (gram[(i, j)] / (gram[(i, i)] * gram[(j, j)]).sqrt()).clamp(-1.0, 1.0);
            data[i * p + j] = r;
            data[j * p + i] = r;
        }
    }
    SymMatrix::new(p, data)
}

/// Expands the factor model into the dense joint covariance
/// `scale * (A kron B)` over coordinates flattened as `z * L + l`.
pub fn kron_covariance(model: &GraphicalModel) -> Result<SymMatrix> {
    let z = model.spatial_cov.order();
    let l = model.temporal_cov.order();
    if model.variables.len() != z || model.lags != l {
        return Err(Error::Mismatch(
            "factor orders do not match the model's variable metadata".into(),
        ));
    }
    let d = z * l;
    let mut data = vec![0.0f64; d * d];
    for z1 in 0..z {
        for l1 in 0..l {
            let row = z1 * l + l1;
            for z2 in 0..z {
                for l2 in 0..l {
                    let col = z2 * l + l2;
                    data[row * d + col] =
                        model.scale * model.spatial_cov.get(z1, z2) * model.temporal_cov.get(l1, l2);
                }
            }
        }
    }
    SymMatrix::new(d, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glasso::glasso;
    use crate::panel::{PanelData, VariableKind};
    use chrono::{TimeZone, Utc};
    use nalgebra::Cholesky;
    use crate::glasso::empirical_correlation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn score_panel(n: usize, z: usize, l: usize, data: Vec<f64>) -> GaussianPanel {
        let t0 = Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap();
        let times: Vec<_> = (0..n).map(|i| t0 + chrono::Duration::hours(i as i64)).collect();
        let vars: Vec<_> = (0..z)
            .map(|i| VariableId::new(VariableKind::Load, format!("Z{i}")))
            .collect();
        GaussianPanel::new(PanelData::new(vars, times, l, data).unwrap())
    }

    /// Draws n samples of sqrt(scale) * La G Lb' with G iid standard normal.
    fn matrix_normal_panel(
        n: usize,
        a: &DMatrix<f64>,
        b: &DMatrix<f64>,
        scale: f64,
        seed: u64,
    ) -> GaussianPanel {
        let z = a.nrows();
        let l = b.nrows();
        let la = Cholesky::new(a.clone()).unwrap().l();
        let lb = Cholesky::new(b.clone()).unwrap().l();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(n * z * l);
        for _ in 0..n {
            let g = DMatrix::<f64>::from_fn(z, l, |_, _| StandardNormal.sample(&mut rng));
            let x = &la * g * lb.transpose() * scale.sqrt();
            for zi in 0..z {
                for li in 0..l {
                    data.push(x[(zi, li)]);
                }
            }
        }
        score_panel(n, z, l, data)
    }

    fn ar1_correlation(p: usize, rho: f64) -> DMatrix<f64> {
        DMatrix::from_fn(p, p, |i, j| rho.powi((i as i32 - j as i32).abs()))
    }

    #[test]
    fn recovers_kronecker_factors_without_penalty() {
        let a = ar1_correlation(3, 0.6);
        let b = ar1_correlation(5, -0.4);
        let panel = matrix_normal_panel(4000, &a, &b, 1.7, 99);
        let opts = GeminiOptions {
            lambda_spatial: 0.0,
            lambda_temporal: 0.0,
            ..GeminiOptions::default()
        };
        let fit = gemini(&panel, &opts).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (fit.model.spatial_cov.get(i, j) - a[(i, j)]).abs() < 0.05,
                    "A[{i},{j}] = {}, want {}",
                    fit.model.spatial_cov.get(i, j),
                    a[(i, j)]
                );
            }
        }
        for i in 0..5 {
            for j in 0..5 {
                assert!(
                    (fit.model.temporal_cov.get(i, j) - b[(i, j)]).abs() < 0.05,
                    "B[{i},{j}] = {}, want {}",
                    fit.model.temporal_cov.get(i, j),
                    b[(i, j)]
                );
            }
        }
        assert!((fit.model.scale - 1.7).abs() < 0.1, "scale {}", fit.model.scale);
    }

    #[test]
    fn single_zone_degenerates_to_plain_glasso() {
        // With Z = 1 the temporal factor must equal the ordinary graphical
        // lasso on the empirical correlation of the n x L score matrix.
        let b = ar1_correlation(6, 0.5);
        let a = DMatrix::<f64>::identity(1, 1);
        let panel = matrix_normal_panel(800, &a, &b, 1.0, 5);
        let fit = gemini(&panel, &GeminiOptions::default()).unwrap();

        let n = panel.n();
        let x = DMatrix::from_fn(n, 6, |t, c| panel.get(t, 0, c));
        let r = empirical_correlation(&x).unwrap();
        let sol = glasso(&r, DEFAULT_FACTOR_LAMBDA).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!(
                    (fit.model.temporal_precision.get(i, j) - sol.theta.get(i, j)).abs() < 1e-6,
                    "({i},{j})"
                );
            }
        }
        assert_eq!(fit.model.spatial_cov.order(), 1);
        assert_eq!(fit.model.spatial_cov.get(0, 0), 1.0);
    }

    #[test]
    fn kron_covariance_matches_manual_product() {
        let a = ar1_correlation(2, 0.3);
        let b = ar1_correlation(3, 0.7);
        let panel = matrix_normal_panel(500, &a, &b, 2.0, 7);
        let fit = gemini(&panel, &GeminiOptions::default()).unwrap();
        let joint = kron_covariance(&fit.model).unwrap();
        assert_eq!(joint.order(), 6);
        for z1 in 0..2 {
            for l1 in 0..3 {
                for z2 in 0..2 {
                    for l2 in 0..3 {
                        let want = fit.model.scale
                            * fit.model.spatial_cov.get(z1, z2)
                            * fit.model.temporal_cov.get(l1, l2);
                        let got = joint.get(z1 * 3 + l1, z2 * 3 + l2);
                        assert_eq!(got, want);
                    }
                }
            }
        }
        // The joint covariance of a Kronecker model is positive definite.
        assert!(Cholesky::new(joint.to_dmatrix()).is_some());
    }

    #[test]
    fn penalty_prunes_factor_precisions() {
        let a = ar1_correlation(4, 0.5);
        let b = ar1_correlation(8, 0.6);
        let panel = matrix_normal_panel(3000, &a, &b, 1.0, 13);
        let heavy = gemini(
            &panel,
            &GeminiOptions {
                lambda_spatial: 0.4,
                lambda_temporal: 0.4,
                ..GeminiOptions::default()
            },
        )
        .unwrap();
        let light = gemini(
            &panel,
            &GeminiOptions {
                lambda_spatial: 0.01,
                lambda_temporal: 0.01,
                ..GeminiOptions::default()
            },
        )
        .unwrap();
        assert!(heavy.temporal.nonzero_offdiag < light.temporal.nonzero_offdiag);
        // AR(1) truth: the temporal precision is tridiagonal, so a moderate
        // penalty keeps near-neighbor edges while pruning distant ones.
        assert!(heavy.temporal.nonzero_offdiag >= 7);
    }

    #[test]
    fn short_panel_is_rejected() {
        let panel = score_panel(1, 2, 2, vec![0.1, 0.2, 0.3, 0.4]);
        assert!(matches!(
            gemini(&panel, &GeminiOptions::default()),
            Err(Error::Insufficient { .. })
        ));
    }
}
