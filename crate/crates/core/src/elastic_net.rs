//! Lasso / elastic net by cyclic coordinate descent.
//!
//! Minimizes `(1/2n)‖y − Xβ‖² + λ[(1−α)/2 ‖β‖² + α‖β‖₁]`. The coordinate
//! update uses the column moments `cⱼ = (1/n)Xⱼ'Xⱼ`, which equal 1 for a
//! standardized design but not for the row-deleted designs used by
//! leave-one-out refits.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimators::{FitResult, Tuning};
use crate::model::Dataset;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_SWEEPS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnetConfig {
    pub lambda: f64,
    pub alpha: f64,
    pub max_sweeps: usize,
    pub tolerance: f64,
}

impl EnetConfig {
    pub fn new(lambda: f64, alpha: f64) -> Self {
        Self {
            lambda,
            alpha,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::param(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        check_solver_controls(self.alpha, self.tolerance, self.max_sweeps)
    }
}

pub(crate) fn check_solver_controls(alpha: f64, tolerance: f64, max_sweeps: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::param(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if !(tolerance > 0.0) {
        return Err(Error::param(format!("tolerance must be positive, got {tolerance}")));
    }
    if max_sweeps == 0 {
        return Err(Error::param("max_sweeps must be at least 1"));
    }
    Ok(())
}

/// `sign(z) · max(|z| − t, 0)`.
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Column moments and the single-coordinate update shared by the elastic
/// net and SplitReg solvers. Keeping one kernel makes SplitReg with
/// `λ_d = 0` reproduce the elastic net bit for bit.
pub(crate) struct CoordinateDesign<'a> {
    x: &'a DMatrix<f64>,
    moments: Vec<f64>,
    inv_n: f64,
}

impl<'a> CoordinateDesign<'a> {
    pub(crate) fn new(x: &'a DMatrix<f64>) -> Self {
        let inv_n = 1.0 / x.nrows() as f64;
        let moments = x.column_iter().map(|c| c.norm_squared() * inv_n).collect();
        Self { x, moments, inv_n }
    }

    pub(crate) fn d(&self) -> usize {
        self.x.ncols()
    }

    /// Exact minimizer in coordinate `j` of
    /// `(1/2n)‖r + Xⱼβⱼ − Xⱼb‖² + ridge/2 · b² + threshold · |b|`;
    /// updates `coef` and the residual, returning the absolute change.
    pub(crate) fn update(
        &self,
        j: usize,
        resid: &mut DVector<f64>,
        coef: &mut f64,
        threshold: f64,
        ridge: f64,
    ) -> f64 {
        let col = self.x.column(j);
        let c = self.moments[j];
        let z = col.dot(resid) * self.inv_n + c * *coef;
        let denom = c + ridge;
        let new = if denom > 0.0 {
            soft_threshold(z, threshold) / denom
        } else {
            0.0
        };
        let delta = new - *coef;
        if delta != 0.0 {
            resid.axpy(-delta, &col, 1.0);
            *coef = new;
        }
        delta.abs()
    }
}

/// Penalty parts reused by the SplitReg objective.
pub(crate) fn enet_penalty(beta: &DVector<f64>, lambda: f64, alpha: f64) -> f64 {
    lambda * ((1.0 - alpha) / 2.0 * beta.norm_squared() + alpha * beta.lp_norm(1))
}

/// `(1/2n)‖y − Xβ‖² + λ[(1−α)/2 ‖β‖² + α‖β‖₁]`.
pub fn enet_objective(ds: &Dataset, beta: &DVector<f64>, lambda: f64, alpha: f64) -> f64 {
    let resid = ds.y() - ds.x() * beta;
    resid.norm_squared() / (2.0 * ds.n() as f64) + enet_penalty(beta, lambda, alpha)
}

/// Largest violation of the elastic-net optimality conditions at `beta`.
pub fn kkt_violation(ds: &Dataset, beta: &DVector<f64>, lambda: f64, alpha: f64) -> f64 {
    let n = ds.n() as f64;
    let grad = ds.x().tr_mul(&(ds.y() - ds.x() * beta)) / n;
    (0..beta.len())
        .map(|j| {
            let b = beta[j];
            if b != 0.0 {
                (grad[j] - lambda * (1.0 - alpha) * b - lambda * alpha * b.signum()).abs()
            } else {
                (grad[j].abs() - lambda * alpha).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Smallest `λ` at which the all-zero vector is optimal (for `α > 0`).
pub fn lambda_max(ds: &Dataset, alpha: f64) -> f64 {
    let n = ds.n() as f64;
    ds.x().tr_mul(ds.y()).amax() / n / alpha
}

/// One full cyclic sweep; returns the largest coordinate change.
pub(crate) fn sweep(
    design: &CoordinateDesign<'_>,
    resid: &mut DVector<f64>,
    beta: &mut DVector<f64>,
    lambda: f64,
    alpha: f64,
) -> f64 {
    let threshold = lambda * alpha;
    let ridge = lambda * (1.0 - alpha);
    let mut max_change: f64 = 0.0;
    for j in 0..design.d() {
        let change = design.update(j, resid, &mut beta[j], threshold, ridge);
        max_change = max_change.max(change);
    }
    max_change
}

fn solve(ds: &Dataset, cfg: &EnetConfig, init: DVector<f64>) -> Result<DVector<f64>> {
    let design = CoordinateDesign::new(ds.x());
    let mut beta = init;
    let mut resid = ds.y() - ds.x() * &beta;
    let mut change = f64::INFINITY;
    for _ in 0..cfg.max_sweeps {
        change = sweep(&design, &mut resid, &mut beta, cfg.lambda, cfg.alpha);
        if change < cfg.tolerance {
            return Ok(beta);
        }
    }
    Err(Error::NonConvergence {
        sweeps: cfg.max_sweeps,
        change,
        last: beta.iter().copied().collect(),
    })
}

pub fn fit_elastic_net(ds: &Dataset, cfg: &EnetConfig) -> Result<FitResult> {
    fit_elastic_net_from(ds, cfg, &DVector::zeros(ds.d()))
}

/// Coordinate descent started at `init` instead of zero.
pub fn fit_elastic_net_from(ds: &Dataset, cfg: &EnetConfig, init: &DVector<f64>) -> Result<FitResult> {
    cfg.validate()?;
    if init.len() != ds.d() {
        return Err(Error::DimensionMismatch(format!(
            "initial point has length {}, expected {}",
            init.len(),
            ds.d()
        )));
    }
    let beta = solve(ds, cfg, init.clone())?;
    FitResult::new(
        beta,
        Tuning::ElasticNet {
            lambda: cfg.lambda,
            alpha: cfg.alpha,
        },
    )
}

pub fn fit_lasso(ds: &Dataset, lambda: f64) -> Result<FitResult> {
    fit_elastic_net(ds, &EnetConfig::new(lambda, 1.0))
}

/// Fits along a descending `λ` grid, each fit warm-started from the
/// previous solution (the first from zero).
pub fn elastic_net_path(
    ds: &Dataset,
    lambdas: &[f64],
    alpha: f64,
    tolerance: f64,
    max_sweeps: usize,
) -> Result<Vec<FitResult>> {
    if lambdas.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::param("lambda path must be sorted in descending order"));
    }
    let mut out = Vec::with_capacity(lambdas.len());
    let mut warm = DVector::zeros(ds.d());
    for &lambda in lambdas {
        let cfg = EnetConfig {
            lambda,
            alpha,
            max_sweeps,
            tolerance,
        };
        let fit = fit_elastic_net_from(ds, &cfg, &warm)?;
        warm = fit.coefficients().clone();
        out.push(fit);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::fit_ls;
    use crate::model::{derive_stream, standardize};

    fn random_problem(n: usize, d: usize, seed: u64) -> Dataset {
        let z = derive_stream(seed, 0, "enet").standard_normals(n * d + n);
        let x = DMatrix::from_column_slice(n, d, &z[..n * d]);
        let noise = DVector::from_column_slice(&z[n * d..]);
        let beta = DVector::from_fn(d, |j, _| if j % 2 == 0 { 1.0 } else { -0.5 });
        let (ds, _) = standardize(&x, &DVector::zeros(n)).unwrap();
        let y = ds.x() * beta + noise * 0.5;
        Dataset::from_standardized(ds.x().clone(), y).unwrap()
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(5.0, 2.0), 3.0);
        assert_eq!(soft_threshold(-5.0, 2.0), -3.0);
        assert_eq!(soft_threshold(1.0, 2.0), 0.0);
        assert_eq!(soft_threshold(-2.0, 2.0), 0.0);
    }

    #[test]
    fn unpenalized_limit_is_least_squares() {
        let ds = random_problem(30, 4, 1);
        let cfg = EnetConfig::new(0.0, 0.5);
        let en = fit_elastic_net(&ds, &cfg).unwrap();
        let ls = fit_ls(&ds).unwrap();
        assert!((en.coefficients() - ls.coefficients()).amax() < 10.0 * cfg.tolerance);
    }

    #[test]
    fn null_solution_above_lambda_max() {
        let ds = random_problem(25, 3, 2);
        for alpha in [0.3, 1.0] {
            let lmax = lambda_max(&ds, alpha);
            let fit = fit_elastic_net(&ds, &EnetConfig::new(lmax * 1.0001, alpha)).unwrap();
            assert_eq!(fit.coefficients().amax(), 0.0);
            assert!(kkt_violation(&ds, fit.coefficients(), lmax, alpha) < 1e-12);
            let below = fit_elastic_net(&ds, &EnetConfig::new(lmax * 0.9, alpha)).unwrap();
            assert!(below.coefficients().amax() > 0.0);
        }
    }

    #[test]
    fn orthonormal_design_closed_form() {
        // columns with X'X = nI
        let x = DMatrix::from_row_slice(
            4,
            2,
            &[1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0],
        );
        let y = DVector::from_vec(vec![2.0, 0.5, -1.0, 0.3]);
        let ds = Dataset::from_standardized(x.clone(), y.clone()).unwrap();
        for lambda in [0.0, 0.1, 0.4, 2.0] {
            let fit = fit_lasso(&ds, lambda).unwrap();
            for j in 0..2 {
                let want = soft_threshold(x.column(j).dot(&y) / 4.0, lambda);
                assert!((fit.coefficients()[j] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kkt_holds_at_solution() {
        for seed in 0..5 {
            let ds = random_problem(40, 6, 10 + seed);
            for (lambda, alpha) in [(0.05, 1.0), (0.2, 0.5), (0.01, 0.0)] {
                let fit = fit_elastic_net(&ds, &EnetConfig::new(lambda, alpha)).unwrap();
                assert!(kkt_violation(&ds, fit.coefficients(), lambda, alpha) < 1e-7);
            }
        }
    }

    #[test]
    fn objective_monotone_over_sweeps() {
        let ds = random_problem(20, 5, 4);
        let design = CoordinateDesign::new(ds.x());
        let mut beta = DVector::zeros(5);
        let mut resid = ds.y().clone();
        let (lambda, alpha) = (0.05, 0.7);
        let mut last = enet_objective(&ds, &beta, lambda, alpha);
        for _ in 0..200 {
            sweep(&design, &mut resid, &mut beta, lambda, alpha);
            let obj = enet_objective(&ds, &beta, lambda, alpha);
            assert!(obj <= last + 1e-12);
            last = obj;
        }
    }

    #[test]
    fn non_convergence_carries_iterate() {
        let ds = random_problem(20, 5, 6);
        let cfg = EnetConfig {
            max_sweeps: 1,
            tolerance: 1e-14,
            ..EnetConfig::new(0.01, 0.5)
        };
        match fit_elastic_net(&ds, &cfg) {
            Err(Error::NonConvergence { sweeps, last, change }) => {
                assert_eq!(sweeps, 1);
                assert_eq!(last.len(), 5);
                assert!(change > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn path_matches_cold_starts() {
        let ds = random_problem(30, 4, 8);
        let grid = [1.0, 0.3, 0.1, 0.01];
        let path = elastic_net_path(&ds, &grid, 0.5, 1e-10, DEFAULT_MAX_SWEEPS).unwrap();
        for (fit, &lambda) in path.iter().zip(&grid) {
            let cold = fit_elastic_net(
                &ds,
                &EnetConfig {
                    tolerance: 1e-10,
                    ..EnetConfig::new(lambda, 0.5)
                },
            )
            .unwrap();
            assert!((fit.coefficients() - cold.coefficients()).amax() < 1e-8);
        }
        assert!(elastic_net_path(&ds, &[0.1, 1.0], 0.5, 1e-8, 10).is_err());
    }

    #[test]
    fn invalid_config() {
        let ds = random_problem(10, 2, 1);
        assert!(fit_elastic_net(&ds, &EnetConfig::new(-1.0, 0.5)).is_err());
        assert!(fit_elastic_net(&ds, &EnetConfig::new(1.0, 1.5)).is_err());
    }
}
