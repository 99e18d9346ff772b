//! Closed-form estimators (least squares, ridge, simplified garrote and
//! split least squares over arbitrary partitions), their exact covariance
//! matrices, and the generalized / total variance functionals.
//!
//! `σ²` is always an input: every covariance here is the known-noise
//! covariance of the estimator conditional on the design.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{reciprocal_condition, smallest_eigenvalue, solve_spd, symmetrize, RCOND_MIN};
use crate::model::{Dataset, GramBlocks, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ls,
    Ridge,
    Garrote,
    Split,
    ElasticNet,
    SplitReg,
}

/// Tuning parameters that produced a fit. The variant determines the method.
#[derive(Debug, Clone, PartialEq)]
pub enum Tuning {
    Ls,
    Ridge {
        lambda: f64,
    },
    Garrote {
        omega: Vec<f64>,
    },
    Split {
        partition: Partition,
        weights: Option<Vec<f64>>,
    },
    ElasticNet {
        lambda: f64,
        alpha: f64,
    },
    SplitReg {
        lambda_s: f64,
        alpha: f64,
        lambda_d: f64,
        groups: usize,
    },
}

impl Tuning {
    pub fn method(&self) -> Method {
        match self {
            Tuning::Ls => Method::Ls,
            Tuning::Ridge { .. } => Method::Ridge,
            Tuning::Garrote { .. } => Method::Garrote,
            Tuning::Split { .. } => Method::Split,
            Tuning::ElasticNet { .. } => Method::ElasticNet,
            Tuning::SplitReg { .. } => Method::SplitReg,
        }
    }
}

pub(crate) fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(" "))
}

impl fmt::Display for Tuning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tuning::Ls => f.write_str("none"),
            Tuning::Ridge { lambda } => write!(f, "lambda={lambda}"),
            Tuning::Garrote { omega } => write!(f, "omega={}", fmt_vec(omega)),
            Tuning::Split { partition, weights } => {
                write!(f, "partition={partition}")?;
                if let Some(w) = weights {
                    write!(f, ";w={}", fmt_vec(w))?;
                }
                Ok(())
            }
            Tuning::ElasticNet { lambda, alpha } => write!(f, "lambda={lambda};alpha={alpha}"),
            Tuning::SplitReg {
                lambda_s,
                alpha,
                lambda_d,
                groups,
            } => write!(
                f,
                "lambda_s={lambda_s};alpha={alpha};lambda_d={lambda_d};groups={groups}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    coefficients: DVector<f64>,
    tuning: Tuning,
}

impl FitResult {
    pub fn new(coefficients: DVector<f64>, tuning: Tuning) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("non-finite coefficient"));
        }
        Ok(Self {
            coefficients,
            tuning,
        })
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> DVector<f64> {
        self.coefficients
    }

    pub fn tuning(&self) -> &Tuning {
        &self.tuning
    }

    pub fn method(&self) -> Method {
        self.tuning.method()
    }

    pub fn predict(&self, x0: &DVector<f64>) -> Result<f64> {
        if x0.len() != self.coefficients.len() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, fit has {}",
                x0.len(),
                self.coefficients.len()
            )));
        }
        Ok(x0.dot(&self.coefficients))
    }
}

/// Symmetric positive semidefinite covariance matrix of an estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    matrix: DMatrix<f64>,
    sigma2: f64,
}

impl CovMatrix {
    pub fn new(matrix: DMatrix<f64>, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::param(format!("sigma2 must be positive, got {sigma2}")));
        }
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("covariance must be square".into()));
        }
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        if (&matrix - matrix.transpose()).amax() > 1e-10 * scale.max(1.0) {
            return Err(Error::param("covariance is not symmetric"));
        }
        let matrix = symmetrize(&matrix);
        if matrix.nrows() > 0 && smallest_eigenvalue(&matrix) < -1e-10 * scale.max(1.0) {
            return Err(Error::NotPositiveDefinite("covariance has a negative eigenvalue".into()));
        }
        Ok(Self { matrix, sigma2 })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

fn check_rcond(a: &DMatrix<f64>) -> Result<()> {
    let rcond = reciprocal_condition(a);
    if rcond < RCOND_MIN {
        Err(Error::Singular { rcond })
    } else {
        Ok(())
    }
}

fn check_unit_interval(v: &[f64], d: usize, name: &str) -> Result<()> {
    if v.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "{name} has length {}, expected {d}",
            v.len()
        )));
    }
    if let Some((j, w)) = v.iter().enumerate().find(|(_, w)| !(0.0..=1.0).contains(*w)) {
        return Err(Error::param(format!("{name}[{j}] = {w} outside [0, 1]")));
    }
    Ok(())
}

/// `A⁻¹ X'y` from precomputed `A = X'X` and `X'y`.
pub fn ls_from_gram(a: &DMatrix<f64>, xty: &DVector<f64>) -> Result<DVector<f64>> {
    check_rcond(a)?;
    solve_spd(a, xty).ok_or(Error::Singular { rcond: 0.0 })
}

/// `(A + λI)⁻¹ X'y`.
pub fn ridge_from_gram(a: &DMatrix<f64>, xty: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::param(format!("ridge lambda must be finite and >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return ls_from_gram(a, xty);
    }
    let mut shifted = a.clone();
    for i in 0..shifted.nrows() {
        shifted[(i, i)] += lambda;
    }
    solve_spd(&shifted, xty).ok_or(Error::Singular { rcond: 0.0 })
}

/// Blockwise least squares: group `g` gets `A_gg⁻¹ X_g'y`. Requires a
/// partition covering every variable.
pub fn split_from_blocks(gb: &GramBlocks, xty: &DVector<f64>) -> Result<DVector<f64>> {
    let p = gb.partition();
    if !p.covers_all() {
        return Err(Error::param(format!(
            "split estimation needs a partition covering all {} variables, got {p}",
            p.dim()
        )));
    }
    if xty.len() != p.dim() {
        return Err(Error::DimensionMismatch("X'y length differs from partition dimension".into()));
    }
    let mut out = DVector::zeros(p.dim());
    for (idx, inv) in p.groups().iter().zip(gb.block_inverses()) {
        let rhs = DVector::from_iterator(idx.len(), idx.iter().map(|&j| xty[j]));
        let coef = inv * rhs;
        for (k, &j) in idx.iter().enumerate() {
            out[j] = coef[k];
        }
    }
    Ok(out)
}

pub fn fit_ls(ds: &Dataset) -> Result<FitResult> {
    let beta = ls_from_gram(&ds.gram(), &ds.xty())?;
    FitResult::new(beta, Tuning::Ls)
}

pub fn fit_ridge(ds: &Dataset, lambda: f64) -> Result<FitResult> {
    let beta = ridge_from_gram(&ds.gram(), &ds.xty(), lambda)?;
    FitResult::new(beta, Tuning::Ridge { lambda })
}

/// Simplified garrote: `diag(ω) β̂_LS` with every `ωⱼ ∈ [0, 1]`.
pub fn fit_garrote(ds: &Dataset, omega: &[f64]) -> Result<FitResult> {
    check_unit_interval(omega, ds.d(), "omega")?;
    let ls = ls_from_gram(&ds.gram(), &ds.xty())?;
    let beta = ls.component_mul(&DVector::from_column_slice(omega));
    FitResult::new(
        beta,
        Tuning::Garrote {
            omega: omega.to_vec(),
        },
    )
}

/// Split least squares over `p`, optionally shrunk coordinatewise by `w`.
pub fn fit_split(ds: &Dataset, p: &Partition, w: Option<&[f64]>) -> Result<FitResult> {
    if p.dim() != ds.d() {
        return Err(Error::DimensionMismatch(format!(
            "partition over d = {} but data has d = {}",
            p.dim(),
            ds.d()
        )));
    }
    if !p.covers_all() {
        return Err(Error::param(format!("partition {p} leaves variables out")));
    }
    if let Some(w) = w {
        check_unit_interval(w, ds.d(), "w")?;
    }
    let gb = GramBlocks::from_gram(ds.gram(), p.clone())?;
    let mut beta = split_from_blocks(&gb, &ds.xty())?;
    if let Some(w) = w {
        beta.component_mul_assign(&DVector::from_column_slice(w));
    }
    FitResult::new(
        beta,
        Tuning::Split {
            partition: p.clone(),
            weights: w.map(<[f64]>::to_vec),
        },
    )
}

/// `σ² A⁻¹`.
pub fn cov_ls(gb: &GramBlocks, sigma2: f64) -> Result<CovMatrix> {
    check_rcond(gb.a())?;
    let inv = crate::linalg::inverse_spd(gb.a()).ok_or(Error::Singular { rcond: 0.0 })?;
    CovMatrix::new(inv * sigma2, sigma2)
}

/// `σ² diag(A_gg⁻¹) A diag(A_gg⁻¹)` for any number of blocks.
pub fn cov_split(gb: &GramBlocks, sigma2: f64) -> Result<CovMatrix> {
    if !gb.partition().covers_all() {
        return Err(Error::param("split covariance needs a covering partition"));
    }
    let dinv = gb.block_diag_inverse();
    CovMatrix::new(&dinv * gb.a() * &dinv * sigma2, sigma2)
}

/// `σ² D A⁻¹ D` with `D = diag(ω)`.
pub fn cov_garrote(gb: &GramBlocks, sigma2: f64, omega: &[f64]) -> Result<CovMatrix> {
    check_unit_interval(omega, gb.d(), "omega")?;
    let ls = cov_ls(gb, sigma2)?;
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(omega));
    CovMatrix::new(&d * ls.matrix() * &d, sigma2)
}

/// `σ² (A + λI)⁻¹ A (A + λI)⁻¹`.
pub fn cov_ridge(gb: &GramBlocks, sigma2: f64, lambda: f64) -> Result<CovMatrix> {
    if !(lambda >= 0.0) {
        return Err(Error::param(format!("ridge lambda must be >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return cov_ls(gb, sigma2);
    }
    let mut shifted = gb.a().clone();
    for i in 0..shifted.nrows() {
        shifted[(i, i)] += lambda;
    }
    let inv = crate::linalg::inverse_spd(&shifted).ok_or(Error::Singular { rcond: 0.0 })?;
    CovMatrix::new(&inv * gb.a() * &inv * sigma2, sigma2)
}

/// Determinant of the covariance matrix.
pub fn generalized_variance(c: &CovMatrix) -> f64 {
    c.matrix().determinant()
}

/// Trace of the covariance matrix.
pub fn total_variance(c: &CovMatrix) -> f64 {
    c.matrix().trace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_stream, standardize};

    fn random_design(n: usize, d: usize, seed: u64) -> Dataset {
        let z = derive_stream(seed, 0, "design").standard_normals(n * d + n);
        let x = DMatrix::from_column_slice(n, d, &z[..n * d]);
        let y = DVector::from_column_slice(&z[n * d..]);
        standardize(&x, &y).unwrap().0
    }

    /// Inverse by cofactor expansion, independent of the Cholesky path.
    fn inverse_3x3(m: &DMatrix<f64>) -> DMatrix<f64> {
        let c = |r: usize, s: usize| {
            let rows: Vec<usize> = (0..3).filter(|&i| i != r).collect();
            let cols: Vec<usize> = (0..3).filter(|&j| j != s).collect();
            let minor = m[(rows[0], cols[0])] * m[(rows[1], cols[1])]
                - m[(rows[0], cols[1])] * m[(rows[1], cols[0])];
            if (r + s).is_multiple_of(2) {
                minor
            } else {
                -minor
            }
        };
        let det: f64 = (0..3).map(|j| m[(0, j)] * c(0, j)).sum();
        DMatrix::from_fn(3, 3, |i, j| c(j, i) / det)
    }

    #[test]
    fn ls_identity_design() {
        let ds = Dataset::new(DMatrix::identity(2, 2), DVector::from_vec(vec![1.0, 2.0])).unwrap();
        let fit = fit_ls(&ds).unwrap();
        assert_eq!(fit.coefficients().as_slice(), &[1.0, 2.0]);
        assert_eq!(fit.method(), Method::Ls);
    }

    #[test]
    fn ls_matches_explicit_inverse() {
        let ds = random_design(5, 3, 11);
        let fit = fit_ls(&ds).unwrap();
        let oracle = inverse_3x3(&ds.gram()) * ds.xty();
        assert!((fit.coefficients() - oracle).amax() < 1e-10);
    }

    #[test]
    fn ls_duplicated_columns_singular() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, -1.0, -1.0, 2.0, 2.0, 0.5, 0.5]);
        let ds = Dataset::new(x, DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0])).unwrap();
        assert!(matches!(fit_ls(&ds), Err(Error::Singular { .. })));
    }

    #[test]
    fn ridge_reductions() {
        let ds = random_design(12, 3, 5);
        let ls = fit_ls(&ds).unwrap();
        let r0 = fit_ridge(&ds, 0.0).unwrap();
        assert!((ls.coefficients() - r0.coefficients()).amax() < 1e-12);
        let big = fit_ridge(&ds, 1e9).unwrap();
        assert!(big.coefficients().norm() < 1e-3);
        assert!(matches!(fit_ridge(&ds, -1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn ridge_scalar_formula() {
        // x'x = n, x'y = s, λ = n  ->  s / (2n)
        let x = DMatrix::from_column_slice(4, 1, &[1.0, -1.0, 1.0, -1.0]);
        let y = DVector::from_vec(vec![3.0, 1.0, 2.0, -2.0]);
        let ds = Dataset::new(x, y).unwrap();
        let s = 3.0 - 1.0 + 2.0 + 2.0;
        let fit = fit_ridge(&ds, 4.0).unwrap();
        assert!((fit.coefficients()[0] - s / 8.0).abs() < 1e-15);
    }

    #[test]
    fn garrote_cases() {
        let ds = random_design(10, 2, 3);
        let ls = fit_ls(&ds).unwrap();
        let ones = fit_garrote(&ds, &[1.0, 1.0]).unwrap();
        assert_eq!(ones.coefficients(), ls.coefficients());
        let zeros = fit_garrote(&ds, &[0.0, 0.0]).unwrap();
        assert_eq!(zeros.coefficients().amax(), 0.0);
        let half = fit_garrote(&ds, &[0.5, 1.0]).unwrap();
        assert_eq!(half.coefficients()[0], 0.5 * ls.coefficients()[0]);
        assert_eq!(half.coefficients()[1], ls.coefficients()[1]);
        assert!(fit_garrote(&ds, &[1.2, 0.0]).is_err());
    }

    #[test]
    fn split_reductions() {
        let ds = random_design(15, 4, 8);
        let ls = fit_ls(&ds).unwrap();
        let single = fit_split(&ds, &Partition::single_group(4), None).unwrap();
        assert!((single.coefficients() - ls.coefficients()).amax() < 1e-12);

        // orthogonal columns: any partition reproduces LS
        let x = DMatrix::from_row_slice(
            4,
            2,
            &[1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0, -1.0],
        );
        let y = DVector::from_vec(vec![0.3, -1.0, 2.0, 0.7]);
        let ortho = Dataset::new(x, y).unwrap();
        let a = fit_split(&ortho, &Partition::singletons(2), None).unwrap();
        let b = fit_ls(&ortho).unwrap();
        assert!((a.coefficients() - b.coefficients()).amax() < 1e-15);
    }

    #[test]
    fn split_first_coefficient_is_scaled_cross_product() {
        // standardized d = 2 design with empirical correlation 0.5
        let x = DMatrix::from_column_slice(
            8,
            2,
            &[
                1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0, //
                1.0, 1.0, 1.0, -1.0, 1.0, -1.0, -1.0, -1.0,
            ],
        );
        let y = DVector::from_vec(vec![2.0, -1.0, 0.5, 3.0, 1.0, 0.0, -2.0, 0.25]);
        let ds = Dataset::from_standardized(x.clone(), y.clone()).unwrap();
        assert_eq!(ds.gram()[(0, 1)] / 8.0, 0.5);
        let fit = fit_split(&ds, &Partition::singletons(2), None).unwrap();
        let expected = x.column(0).dot(&y) / 8.0;
        assert!((fit.coefficients()[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn split_weights_and_coverage() {
        let ds = random_design(10, 3, 1);
        let p = Partition::new(vec![vec![0, 2], vec![1]], 3).unwrap();
        let raw = fit_split(&ds, &p, None).unwrap();
        let w = [0.5, 1.0, 0.0];
        let shrunk = fit_split(&ds, &p, Some(&w)).unwrap();
        for (j, wj) in w.iter().enumerate() {
            assert_eq!(shrunk.coefficients()[j], wj * raw.coefficients()[j]);
        }
        let partial = Partition::new(vec![vec![0], vec![1]], 3).unwrap();
        assert!(fit_split(&ds, &partial, None).is_err());
    }

    #[test]
    fn cov_ls_cases() {
        let n = 10.0;
        let gb = GramBlocks::from_gram(DMatrix::identity(2, 2) * n, Partition::singletons(2)).unwrap();
        let c = cov_ls(&gb, 2.0).unwrap();
        assert!((c.matrix() - DMatrix::identity(2, 2) * 0.2).amax() < 1e-15);

        let r = 0.7;
        let a = DMatrix::from_row_slice(2, 2, &[n, n * r, n * r, n]);
        let gb = GramBlocks::from_gram(a, Partition::singletons(2)).unwrap();
        let c = cov_ls(&gb, 1.0).unwrap();
        assert!((c.matrix()[(0, 0)] - 1.0 / (0.51 * n)).abs() < 1e-14);
        let s = cov_split(&gb, 1.0).unwrap();
        assert!((s.matrix()[(0, 0)] - 1.0 / n).abs() < 1e-15);
        assert!((s.matrix()[(1, 1)] - 1.0 / n).abs() < 1e-15);
    }

    #[test]
    fn cov_split_block_diagonal_equals_ls() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[4.0, 1.0, 0.0, 1.0, 3.0, 0.0, 0.0, 0.0, 2.0],
        );
        let p = Partition::new(vec![vec![0, 1], vec![2]], 3).unwrap();
        let gb = GramBlocks::from_gram(a, p).unwrap();
        let s = cov_split(&gb, 1.5).unwrap();
        let l = cov_ls(&gb, 1.5).unwrap();
        assert!((s.matrix() - l.matrix()).amax() < 1e-14);
    }

    #[test]
    fn cov_garrote_cases() {
        let a = DMatrix::from_row_slice(2, 2, &[10.0, 5.0, 5.0, 10.0]);
        let gb = GramBlocks::from_gram(a.clone(), Partition::single_group(2)).unwrap();
        let ls = cov_ls(&gb, 1.0).unwrap();
        assert_eq!(cov_garrote(&gb, 1.0, &[1.0, 1.0]).unwrap(), ls);
        assert_eq!(cov_garrote(&gb, 1.0, &[0.0, 0.0]).unwrap().matrix().amax(), 0.0);
        // A⁻¹ = [[10, -5], [-5, 10]] / 75; D = diag(0.5, 1)
        let c = cov_garrote(&gb, 1.0, &[0.5, 1.0]).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[2.5 / 75.0, -2.5 / 75.0, -2.5 / 75.0, 10.0 / 75.0]);
        assert!((c.matrix() - want).amax() < 1e-15);
    }

    #[test]
    fn variance_functionals() {
        let c = CovMatrix::new(DMatrix::identity(2, 2), 1.0).unwrap();
        assert_eq!(generalized_variance(&c), 1.0);
        assert_eq!(total_variance(&c), 2.0);
        let c = CovMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0])), 1.0).unwrap();
        assert!((generalized_variance(&c) - 6.0).abs() < 1e-14);
        assert_eq!(total_variance(&c), 5.0);
    }

    #[test]
    fn variance_functionals_match_eigenvalues() {
        let z = derive_stream(9, 0, "psd").standard_normals(16);
        let b = DMatrix::from_column_slice(4, 4, &z);
        let m = &b * b.transpose();
        let c = CovMatrix::new(m.clone(), 1.0).unwrap();
        let eig = nalgebra::SymmetricEigen::new(m).eigenvalues;
        let prod: f64 = eig.iter().product();
        let sum: f64 = eig.iter().sum();
        assert!((generalized_variance(&c) - prod).abs() < 1e-9 * prod.abs().max(1.0));
        assert!((total_variance(&c) - sum).abs() < 1e-12 * sum);
    }

    #[test]
    fn cov_matrix_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(CovMatrix::new(m, 1.0).is_err());
    }

    #[test]
    fn tuning_display() {
        let t = Tuning::Split {
            partition: Partition::singletons(2),
            weights: Some(vec![1.0, 0.25]),
        };
        assert_eq!(t.to_string(), "partition={1}{2};w=[1 0.25]");
    }
}
