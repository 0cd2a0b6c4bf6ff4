//! L1-penalized sparse precision estimation (graphical lasso).
//!
//! Minimizes, over positive definite `Theta`,
//!
//! ```text
//! f(Theta) = -log det Theta + tr(S Theta) + lambda * sum_{i != j} |Theta_ij|
//! ```
//!
//! with the diagonal unpenalized, by block coordinate descent on the
//! covariance iterate `W`: each column's off-diagonal block solves the lasso
//!
//! ```text
//! min_beta  (1/2) beta' W11 beta - s12' beta + lambda ||beta||_1
//! ```
//!
//! by cyclic coordinate descent, after which `w12 = W11 beta`. At a solution
//! the stationarity conditions read `W_ii = S_ii` and
//! `W_ij - S_ij = lambda * sign(Theta_ij)` on active off-diagonal entries,
//! `|W_ij - S_ij| <= lambda` elsewhere. The precision matrix is recovered
//! from the final column solves as `theta_jj = 1/(w_jj - w12' beta)`,
//! `theta_12 = -theta_jj * beta`, which preserves the exact zeros produced by
//! soft-thresholding. Each sweep cannot decrease the dual objective
//! `log det W`, which is recorded per sweep.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GLASSO_TOL: f64 = 1e-4;
pub const DEFAULT_GLASSO_MAX_ITER: usize = 200;

/// Extra convergence margin run silently after the nominal threshold is met,
/// so the recovered `Theta` and final `W` are mutual inverses well inside the
/// 1e-6 relative tolerance.
const POLISH_FACTOR: f64 = 1e-3;

/// Dense symmetric matrix, stored row-major and validated on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymMatrixRecord", into = "SymMatrixRecord")]
pub struct SymMatrix {
    order: usize,
    data: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
struct SymMatrixRecord {
    order: usize,
    data: Vec<f64>,
}

impl TryFrom<SymMatrixRecord> for SymMatrix {
    type Error = Error;

    fn try_from(r: SymMatrixRecord) -> Result<Self> {
        SymMatrix::new(r.order, r.data)
    }
}

impl From<SymMatrix> for SymMatrixRecord {
    fn from(m: SymMatrix) -> Self {
        SymMatrixRecord {
            order: m.order,
            data: m.data,
        }
    }
}

impl SymMatrix {
    /// Validates shape, finiteness, and symmetry (1e-12 relative to the
    /// largest entry), then symmetrizes exactly.
    pub fn new(order: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != order * order {
            return Err(Error::Mismatch(format!(
                "symmetric matrix of order {order} needs {} entries, got {}",
                order * order,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("matrix contains non-finite entries".into()));
        }
        let scale = data.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        for i in 0..order {
            for j in (i + 1)..order {
                let a = data[i * order + j];
                let b = data[j * order + i];
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::Data(format!(
                        "matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
                let avg = 0.5 * (a + b);
                data[i * order + j] = avg;
                data[j * order + i] = avg;
            }
        }
        Ok(SymMatrix { order, data })
    }

    pub fn identity(order: usize) -> Self {
        let mut data = vec![0.0; order * order];
        for i in 0..order {
            data[i * order + i] = 1.0;
        }
        SymMatrix { order, data }
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Mismatch(format!(
                "matrix is {}x{}, not square",
                m.nrows(),
                m.ncols()
            )));
        }
        SymMatrix::new(m.nrows(), m.as_slice().to_vec())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.order, self.order, &self.data)
    }

    /// Off-diagonal entries that are exactly nonzero (soft-thresholding
    /// produces exact zeros), counting each unordered pair once.
    pub fn count_offdiag_nonzero(&self) -> usize {
        let mut k = 0;
        for i in 0..self.order {
            for j in (i + 1)..self.order {
                if self.get(i, j) != 0.0 {
                    k += 1;
                }
            }
        }
        k
    }
}

/// Pearson correlation matrix of the columns of an `n x p` data matrix.
/// The diagonal is exactly 1.
pub fn empirical_correlation(x: &DMatrix<f64>) -> Result<SymMatrix> {
    let n = x.nrows();
    let p = x.ncols();
    if n < 2 {
        return Err(Error::Insufficient {
            what: "empirical correlation".into(),
            needed: 2,
            got: n,
        });
    }
    if p == 0 {
        return Err(Error::EmptyPanel("correlation of zero columns".into()));
    }
    let mut centered = x.clone();
    let mut norms = vec![0.0f64; p];
    for (j, norm) in norms.iter_mut().enumerate() {
        let mut col = centered.column_mut(j);
        let m = col.iter().sum::<f64>() / n as f64;
        for v in col.iter_mut() {
            *v -= m;
        }
        let ss = col.iter().map(|v| v * v).sum::<f64>();
        if ss <= 0.0 {
            return Err(Error::Degenerate(format!(
                "column {j} is constant; correlation is undefined"
            )));
        }
        *norm = ss.sqrt();
    }
    let gram = centered.transpose() * &centered;
    let mut data = vec![0.0f64; p * p];
    for i in 0..p {
        data[i * p + i] = 1.0;
        for j in (i + 1)..p {
            let r = (gram[(i, j)] / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            data[i * p + j] = r;
            data[j * p + i] = r;
        }
    }
    Ok(SymMatrix { order: p, data })
}

#[derive(Clone, Debug)]
pub struct GlassoSolution {
    /// Estimated precision matrix with exact zeros on pruned entries.
    pub theta: SymMatrix,
    /// Estimated covariance, the (approximate) inverse of `theta`.
    pub w: SymMatrix,
    /// Sweeps actually run (polishing included).
    pub iterations: usize,
    /// Whether the nominal convergence threshold was reached.
    pub converged: bool,
    /// Penalized negative log-likelihood at the solution.
    pub objective: f64,
    /// Dual objective `log det W` after each sweep; non-decreasing.
    pub dual_path: Vec<f64>,
}

/// Penalized objective `-log det Theta + tr(S Theta) + lambda ||offdiag||_1`.
pub fn penalized_objective(s: &SymMatrix, lambda: f64, theta: &SymMatrix) -> Result<f64> {
    if s.order() != theta.order() {
        return Err(Error::Mismatch("objective order mismatch".into()));
    }
    let p = s.order();
    let chol = Cholesky::new(theta.to_dmatrix()).ok_or_else(|| {
        Error::NotPositiveDefinite("objective requires a positive definite precision".into())
    })?;
    let logdet: f64 = chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
    let mut trace = 0.0;
    let mut l1 = 0.0;
    for i in 0..p {
        for j in 0..p {
            trace += s.get(i, j) * theta.get(j, i);
            if i != j {
                l1 += theta.get(i, j).abs();
            }
        }
    }
    Ok(-logdet + trace + lambda * l1)
}

fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Cyclic coordinate descent for the column lasso subproblem; `beta` is the
/// warm start and is updated in place. `r` tracks `V beta`.
fn lasso_cd(v: &DMatrix<f64>, s12: &DVector<f64>, lambda: f64, beta: &mut DVector<f64>) {
    let q = s12.len();
    let mut r = v * &*beta;
    for _ in 0..1000 {
        let mut max_delta = 0.0f64;
        let mut max_beta = 0.0f64;
        for k in 0..q {
            let vkk = v[(k, k)];
            let g = s12[k] - (r[k] - vkk * beta[k]);
            let new = soft(g, lambda) / vkk;
            let d = new - beta[k];
            if d != 0.0 {
                for m in 0..q {
                    r[m] += d * v[(m, k)];
                }
                beta[k] = new;
                max_delta = max_delta.max(d.abs());
            }
            max_beta = max_beta.max(beta[k].abs());
        }
        if max_delta <= 1e-10 * (1.0 + max_beta) {
            break;
        }
    }
}

fn logdet_cholesky(m: &DMatrix<f64>) -> Option<f64> {
    Cholesky::new(m.clone())
        .map(|c| c.l().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0)
}

/// Graphical lasso with default tolerance and iteration cap.
pub fn glasso(s: &SymMatrix, lambda: f64) -> Result<GlassoSolution> {
    glasso_opts(s, lambda, DEFAULT_GLASSO_TOL, DEFAULT_GLASSO_MAX_ITER)
}

/// Graphical lasso. Convergence is declared when the mean absolute change of
/// the off-diagonal `W` entries over a sweep drops below
/// `tol * mean |S_offdiag|`; iteration continues quietly to a 1000x tighter
/// threshold so the returned pair is a crisp mutual inverse. Hitting
/// `max_iter` returns the best iterate flagged `converged = false`.
pub fn glasso_opts(
    s: &SymMatrix,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<GlassoSolution> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("lambda must be nonnegative, got {lambda}")));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::Config("tol must be positive and max_iter nonzero".into()));
    }
    let p = s.order();
    let diag_mean = (0..p).map(|i| s.get(i, i)).sum::<f64>() / p as f64;
    if (0..p).any(|i| s.get(i, i) <= 0.0) {
        return Err(Error::NotPositiveDefinite(
            "sample matrix has a nonpositive diagonal entry".into(),
        ));
    }

    let mut sm = s.to_dmatrix();
    let eig_min = SymmetricEigen::new(sm.clone()).eigenvalues.min();
    if eig_min < 0.0 {
        let eps = -1.1 * eig_min;
        for i in 0..p {
            sm[(i, i)] += eps;
        }
        log::warn!(
            "sample matrix has minimum eigenvalue {eig_min:.3e}; adding {eps:.3e} to its diagonal"
        );
    } else if eig_min < 1e-12 * diag_mean && lambda > 0.0 {
        // Exactly singular PSD input: nudge so the first sweep's column
        // blocks are invertible.
        let eps = 1e-10 * diag_mean;
        for i in 0..p {
            sm[(i, i)] += eps;
        }
        log::warn!("sample matrix is singular; adding {eps:.3e} to its diagonal");
    }

    if p == 1 {
        let w = SymMatrix::new(1, vec![sm[(0, 0)]])?;
        let theta = SymMatrix::new(1, vec![1.0 / sm[(0, 0)]])?;
        let objective = penalized_objective(s, lambda, &theta)?;
        return Ok(GlassoSolution {
            theta,
            w,
            iterations: 0,
            converged: true,
            objective,
            dual_path: Vec::new(),
        });
    }

    if lambda == 0.0 {
        let chol = Cholesky::new(sm.clone()).ok_or_else(|| {
            Error::NotPositiveDefinite(
                "unpenalized precision requires a positive definite sample matrix".into(),
            )
        })?;
        let theta = SymMatrix::from_dmatrix(&chol.inverse())?;
        let w = SymMatrix::from_dmatrix(&sm)?;
        let objective = penalized_objective(s, lambda, &theta)?;
        return Ok(GlassoSolution {
            theta,
            w,
            iterations: 0,
            converged: true,
            objective,
            dual_path: Vec::new(),
        });
    }

    let off_pairs = (p * (p - 1) / 2) as f64;
    let off_mean = {
        let mut acc = 0.0;
        for i in 0..p {
            for j in (i + 1)..p {
                acc += sm[(i, j)].abs();
            }
        }
        acc / off_pairs
    };
    let nominal = tol * off_mean.max(1e-10 * diag_mean);
    let polish = nominal * POLISH_FACTOR;

    let mut w = sm.clone();
    let mut betas: Vec<DVector<f64>> = vec![DVector::zeros(p - 1); p];
    let mut v = DMatrix::<f64>::zeros(p - 1, p - 1);
    let mut s12 = DVector::<f64>::zeros(p - 1);
    let mut dual_path = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _sweep in 0..max_iter {
        iterations += 1;
        let w_prev = w.clone();
        for j in 0..p {
            // V = W with row/column j removed; s12 = column j of S.
            for (ri, i) in (0..p).filter(|&i| i != j).enumerate() {
                s12[ri] = sm[(i, j)];
                for (ci, k) in (0..p).filter(|&k| k != j).enumerate() {
                    v[(ri, ci)] = w[(i, k)];
                }
            }
            let beta = &mut betas[j];
            lasso_cd(&v, &s12, lambda, beta);
            let w12 = &v * &*beta;
            for (ri, i) in (0..p).filter(|&i| i != j).enumerate() {
                w[(i, j)] = w12[ri];
                w[(j, i)] = w12[ri];
            }
        }
        let mut change = 0.0;
        for i in 0..p {
            for j in (i + 1)..p {
                change += (w[(i, j)] - w_prev[(i, j)]).abs();
            }
        }
        let mean_change = change / off_pairs;
        if let Some(ld) = logdet_cholesky(&w) {
            dual_path.push(ld);
        }
        if mean_change <= nominal {
            converged = true;
        }
        if mean_change <= polish {
            break;
        }
    }

    // Recover Theta from the final column solves; soft-threshold zeros in
    // beta stay exactly zero here.
    let mut theta = DMatrix::<f64>::zeros(p, p);
    for j in 0..p {
        let beta = &betas[j];
        let mut dot = 0.0;
        for (ri, i) in (0..p).filter(|&i| i != j).enumerate() {
            dot += w[(i, j)] * beta[ri];
        }
        let tjj = 1.0 / (w[(j, j)] - dot);
        if !(tjj > 0.0 && tjj.is_finite()) {
            return Err(Error::Numerical(format!(
                "precision recovery failed on column {j}"
            )));
        }
        theta[(j, j)] = tjj;
        for (ri, i) in (0..p).filter(|&i| i != j).enumerate() {
            theta[(i, j)] = if beta[ri] == 0.0 { 0.0 } else { -tjj * beta[ri] };
        }
    }
    // Symmetrize pairwise without disturbing exact zeros.
    for i in 0..p {
        for j in (i + 1)..p {
            let a = theta[(i, j)];
            let b = theta[(j, i)];
            let avg = if a == 0.0 || b == 0.0 {
                0.0
            } else {
                0.5 * (a + b)
            };
            theta[(i, j)] = avg;
            theta[(j, i)] = avg;
        }
    }

    if Cholesky::new(w.clone()).is_none() {
        return Err(Error::NotPositiveDefinite(
            "covariance iterate lost positive definiteness".into(),
        ));
    }
    let theta_sym = SymMatrix::from_dmatrix(&theta)?;
    let w_sym = SymMatrix::from_dmatrix(&w)?;
    let objective = penalized_objective(s, lambda, &theta_sym)?;

    if !converged {
        log::warn!(
            "graphical lasso did not reach tolerance within {max_iter} sweeps (order {p}, lambda {lambda})"
        );
    }

    Ok(GlassoSolution {
        theta: theta_sym,
        w: w_sym,
        iterations,
        converged,
        objective,
        dual_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_correlation(p: usize, seed: u64) -> SymMatrix {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let a = DMatrix::<f64>::from_fn(p + 5, p, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        empirical_correlation(&a).unwrap()
    }

    #[test]
    fn symmetry_is_validated() {
        assert!(SymMatrix::new(2, vec![1.0, 0.5, 0.5 + 1e-6, 1.0]).is_err());
        let m = SymMatrix::new(2, vec![1.0, 0.5, 0.5, 1.0]).unwrap();
        assert_eq!(m.get(0, 1), 0.5);
        assert!(SymMatrix::new(2, vec![1.0, 0.5, 0.5, f64::NAN]).is_err());
        assert!(SymMatrix::new(2, vec![1.0]).is_err());
    }

    #[test]
    fn serde_rejects_asymmetric_payload() {
        let json = r#"{"order":2,"data":[1.0,0.5,0.4,1.0]}"#;
        assert!(serde_json::from_str::<SymMatrix>(json).is_err());
        let ok = r#"{"order":2,"data":[1.0,0.5,0.5,1.0]}"#;
        assert!(serde_json::from_str::<SymMatrix>(ok).is_ok());
    }

    #[test]
    fn correlation_of_independent_columns_is_near_identity() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let x = DMatrix::<f64>::from_fn(20_000, 4, |_, _| {
            rng.sample::<f64, _>(rand_distr::StandardNormal)
        });
        let r = empirical_correlation(&x).unwrap();
        for i in 0..4 {
            assert_eq!(r.get(i, i), 1.0);
            for j in 0..4 {
                if i != j {
                    assert!(r.get(i, j).abs() < 0.03, "r[{i},{j}] = {}", r.get(i, j));
                }
            }
        }
    }

    #[test]
    fn correlation_rejects_constant_column() {
        let mut x = DMatrix::<f64>::zeros(100, 2);
        for i in 0..100 {
            x[(i, 0)] = i as f64;
            x[(i, 1)] = 7.0;
        }
        assert!(matches!(
            empirical_correlation(&x),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn two_by_two_analytic_solution() {
        // For S = [[1, r], [r, 1]] and lambda < r the stationarity conditions
        // give W12 = r - lambda exactly.
        let r = 0.6;
        let lambda = 0.2;
        let s = SymMatrix::new(2, vec![1.0, r, r, 1.0]).unwrap();
        let sol = glasso(&s, lambda).unwrap();
        let w12 = r - lambda;
        let det = 1.0 - w12 * w12;
        assert!((sol.w.get(0, 1) - w12).abs() < 1e-8, "w12 = {}", sol.w.get(0, 1));
        assert!((sol.theta.get(0, 0) - 1.0 / det * 1.0).abs() < 1e-8);
        assert!((sol.theta.get(0, 1) + w12 / det).abs() < 1e-8);
        assert!(sol.converged);
    }

    #[test]
    fn solution_matches_a_kkt_constructed_oracle() {
        // Build the problem backwards from a known sparse precision: choose
        // Theta*, set W = inverse(Theta*), and define S so the stationarity
        // conditions hold exactly at Theta*. The solver must then return
        // Theta* itself (the objective is strictly convex).
        let lambda = 0.1;
        let theta_star = DMatrix::from_row_slice(
            3,
            3,
            &[2.0, -0.5, 0.0, -0.5, 2.0, -0.3, 0.0, -0.3, 2.0],
        );
        let w_star = theta_star.clone().try_inverse().unwrap();
        let mut s = w_star.clone();
        // Active entries: S_ij = W_ij - lambda * sign(theta_ij).
        s[(0, 1)] += lambda;
        s[(1, 0)] += lambda;
        s[(1, 2)] += lambda;
        s[(2, 1)] += lambda;
        // Inactive entry (0,2) keeps S = W (zero subgradient).
        let s = SymMatrix::from_dmatrix(&s).unwrap();
        assert!(
            SymmetricEigen::new(s.to_dmatrix()).eigenvalues.min() > 0.0,
            "constructed S must be PD"
        );

        let sol = glasso(&s, lambda).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (sol.theta.get(i, j) - theta_star[(i, j)]).abs() < 1e-5,
                    "theta[{i},{j}] = {}, want {}",
                    sol.theta.get(i, j),
                    theta_star[(i, j)]
                );
            }
        }
        // The pruned entry is exactly zero.
        assert_eq!(sol.theta.get(0, 2), 0.0);
        assert_eq!(sol.theta.count_offdiag_nonzero(), 2);
    }

    #[test]
    fn full_shrinkage_gives_diagonal_theta() {
        let s = random_correlation(6, 9);
        let max_off = (0..6)
            .flat_map(|i| (0..6).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .map(|(i, j)| s.get(i, j).abs())
            .fold(0.0f64, f64::max);
        let sol = glasso(&s, max_off + 0.01).unwrap();
        assert_eq!(sol.theta.count_offdiag_nonzero(), 0);
        for i in 0..6 {
            assert!((sol.theta.get(i, i) - 1.0 / s.get(i, i)).abs() < 1e-10);
            assert!((sol.w.get(i, i) - s.get(i, i)).abs() < 1e-12);
            for j in 0..6 {
                if i != j {
                    assert_eq!(sol.w.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn theta_and_w_are_mutual_inverses() {
        let s = random_correlation(10, 21);
        let sol = glasso(&s, 0.05).unwrap();
        let prod = sol.theta.to_dmatrix() * sol.w.to_dmatrix();
        let resid = &prod - DMatrix::<f64>::identity(10, 10);
        let spectral = resid.svd(false, false).singular_values.max();
        assert!(spectral < 1e-6, "|Theta W - I| = {spectral:.3e}");
    }

    #[test]
    fn kkt_conditions_hold_at_the_solution() {
        let s = random_correlation(8, 33);
        let lambda = 0.08;
        let sol = glasso(&s, lambda).unwrap();
        for i in 0..8 {
            assert!(
                (sol.w.get(i, i) - s.get(i, i)).abs() <= 1e-9,
                "diagonal {i}"
            );
            for j in 0..8 {
                if i == j {
                    continue;
                }
                let grad = sol.w.get(i, j) - s.get(i, j);
                let t = sol.theta.get(i, j);
                if t != 0.0 {
                    assert!(
                        (grad - lambda * t.signum()).abs() < 1e-5,
                        "active ({i},{j}): grad {grad}, sign {}",
                        t.signum()
                    );
                } else {
                    assert!(
                        grad.abs() <= lambda + 1e-5,
                        "inactive ({i},{j}): |grad| = {}",
                        grad.abs()
                    );
                }
            }
        }
    }

    #[test]
    fn dual_objective_is_monotone() {
        let s = random_correlation(12, 55);
        let sol = glasso(&s, 0.03).unwrap();
        assert!(sol.dual_path.len() >= 2);
        for w in sol.dual_path.windows(2) {
            assert!(
                w[1] >= w[0] - 1e-9,
                "dual objective decreased: {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn lambda_zero_recovers_the_plain_inverse() {
        let s = random_correlation(7, 77);
        let sol = glasso(&s, 0.0).unwrap();
        let inv = s.to_dmatrix().try_inverse().unwrap();
        for i in 0..7 {
            for j in 0..7 {
                assert!(
                    (sol.theta.get(i, j) - inv[(i, j)]).abs() < 1e-10,
                    "theta[{i},{j}]"
                );
            }
        }
        assert_eq!(sol.iterations, 0);
        assert!(sol.converged);
    }

    #[test]
    fn non_psd_input_is_repaired_with_a_warning() {
        // Symmetric but indefinite: eigenvalues 3 and -1.
        let s = SymMatrix::new(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        let sol = glasso(&s, 0.1).unwrap();
        // Repaired diagonal is 1 + 1.1, so W keeps that diagonal.
        assert!((sol.w.get(0, 0) - 2.1).abs() < 1e-9);
        assert!(Cholesky::new(sol.w.to_dmatrix()).is_some());
    }

    #[test]
    fn singular_sample_matrix_errors_when_unpenalized() {
        let s = SymMatrix::new(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            glasso(&s, 0.0),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn objective_decreases_with_lighter_penalty() {
        let s = random_correlation(6, 101);
        let dense = glasso(&s, 0.01).unwrap();
        let sparse = glasso(&s, 0.3).unwrap();
        // Evaluated at the same lambda, the optimizer for that lambda wins.
        let sparse_at_light = penalized_objective(&s, 0.01, &sparse.theta).unwrap();
        assert!(dense.objective <= sparse_at_light + 1e-9);
    }
}
