//! Gaussian designs whose *empirical* covariance equals a target
//! correlation matrix `Γ_r` exactly.
//!
//! 1. Draw `n` rows from `N(0, Γ_ρ)`.
//! 2. Standardize the columns (mean 0, `1/n` variance 1) and form `S`.
//! 3. Rotate onto the eigenvectors of `S` (descending eigenvalues, largest
//!    entry of each eigenvector positive).
//! 4. Rescale the rotated columns, giving `Z` with empirical covariance `I`.
//! 5. Build the output column by column,
//!    `Yᵏ = (Σ_{j<k} cⱼ Zʲ + Zᵏ) / √(1 + Σ cⱼ²)`, with the `cⱼ` chosen so
//!    that the empirical covariance of `Yʲ` and `Yᵏ` is `[Γ_r]ⱼₖ` for
//!    every `j < k`.
//!
//! The step-5 targets are the entries `[Γ_r]ⱼₖ` themselves, not their
//! squares: with `a₀² = c²/(1 − c²)` the second column has correlation `c`
//! with the first, and the sign of `c` is carried by the solved
//! coefficient.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::sorted_symmetric_eigen;
use crate::model::{standardize, CorrelationSpec, RngStream};

/// Eigenvalues of the standardized sample covariance below this make the
/// draw degenerate.
pub const MIN_SAMPLE_EIGENVALUE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct TargetCovRequest<'a> {
    pub n: usize,
    pub spec: &'a CorrelationSpec,
    pub stream: RngStream,
}

/// Every intermediate of one generation.
#[derive(Debug, Clone)]
pub struct TargetCovDraw {
    /// Step 1 rows drawn from `N(0, Γ_ρ)`.
    pub raw: DMatrix<f64>,
    /// Step 2 standardized matrix.
    pub standardized: DMatrix<f64>,
    /// Eigenvalues of `S`, descending.
    pub eigenvalues: DVector<f64>,
    /// Eigenvector matrix `P`.
    pub rotation: DMatrix<f64>,
    /// Step 4 matrix with identity empirical covariance.
    pub decorrelated: DMatrix<f64>,
    pub factor: SequentialFactor,
    /// Step 5 output with empirical covariance `Γ_r`.
    pub output: DMatrix<f64>,
}

/// Column-construction coefficients for step 5.
///
/// Row `k` of `unit_rows` holds the weights of `Z⁰..Zᵏ` in `Yᵏ`; it is
/// lower triangular with unit-norm rows. `mixing[k]` are the unnormalized
/// `c₀..c_{k−1}` and `normalizers[k] = √(1 + Σ cⱼ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialFactor {
    pub unit_rows: DMatrix<f64>,
    pub mixing: Vec<Vec<f64>>,
    pub normalizers: Vec<f64>,
}

/// Solves the step-5 conditions one column at a time. With an orthonormal
/// `Z` the conditions for column `k` are triangular in the normalized
/// weights, so each column is a forward substitution.
pub fn sequential_factor(gamma_r: &DMatrix<f64>) -> Result<SequentialFactor> {
    let d = gamma_r.nrows();
    if !gamma_r.is_square() || d == 0 {
        return Err(Error::param("target covariance must be a nonempty square matrix"));
    }
    let mut unit_rows = DMatrix::<f64>::zeros(d, d);
    let mut mixing = Vec::with_capacity(d);
    let mut normalizers = Vec::with_capacity(d);
    for k in 0..d {
        for j in 0..k {
            let partial: f64 = (0..j).map(|l| unit_rows[(j, l)] * unit_rows[(k, l)]).sum();
            unit_rows[(k, j)] = (gamma_r[(j, k)] - partial) / unit_rows[(j, j)];
        }
        let used: f64 = (0..k).map(|l| unit_rows[(k, l)].powi(2)).sum();
        let rest = gamma_r[(k, k)] - used;
        if !(rest > 0.0) {
            return Err(Error::NotPositiveDefinite(format!(
                "target covariance fails at column {k} (residual variance {rest:e})"
            )));
        }
        let diag = rest.sqrt();
        unit_rows[(k, k)] = diag;
        mixing.push((0..k).map(|l| unit_rows[(k, l)] / diag).collect::<Vec<_>>());
        normalizers.push(1.0 / diag);
    }
    Ok(SequentialFactor {
        unit_rows,
        mixing,
        normalizers,
    })
}

/// Lower-triangular `L` with `Γ_r = L L'`. Independent of the sequential
/// construction; used to cross-check it.
pub fn triangular_factor(gamma_r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !gamma_r.is_square() {
        return Err(Error::param("matrix must be square"));
    }
    gamma_r
        .clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))
}

/// Empirical covariance with the `1/n` divisor (columns are centered first).
pub fn empirical_covariance(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows() as f64;
    let mut centered = m.clone();
    for mut col in centered.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
    }
    centered.tr_mul(&centered) / n
}

pub fn generate(req: &TargetCovRequest<'_>) -> Result<DMatrix<f64>> {
    Ok(generate_detailed(req)?.output)
}

pub fn generate_detailed(req: &TargetCovRequest<'_>) -> Result<TargetCovDraw> {
    let n = req.n;
    let d = req.spec.d();
    if n <= d {
        return Err(Error::Rank { n, d });
    }
    let factor = sequential_factor(req.spec.gamma_r())?;
    let chol_rho = triangular_factor(req.spec.gamma_rho())?;

    // step 1: row i is L_ρ zᵢ
    let z = req.stream.standard_normals(n * d);
    let white = DMatrix::from_row_slice(n, d, &z);
    let raw = white * chol_rho.transpose();

    // step 2
    let zeros = DVector::zeros(n);
    let (std_ds, _) = standardize(&raw, &zeros).map_err(|e| match e {
        Error::DegenerateColumn { moment, .. } => Error::DegenerateSample { eigenvalue: moment },
        other => other,
    })?;
    let standardized = std_ds.x().clone();
    let s = standardized.tr_mul(&standardized) / n as f64;

    // step 3
    let (eigenvalues, rotation) = sorted_symmetric_eigen(&s);
    let smallest = eigenvalues[d - 1];
    if smallest < MIN_SAMPLE_EIGENVALUE {
        return Err(Error::DegenerateSample {
            eigenvalue: smallest,
        });
    }
    let rotated = &standardized * &rotation;

    // step 4
    let (z_ds, _) = standardize(&rotated, &zeros)?;
    let decorrelated = z_ds.x().clone();

    // step 5
    let mut output = DMatrix::zeros(n, d);
    for k in 0..d {
        let norm = factor.normalizers[k];
        let mut col = decorrelated.column(k) / norm;
        for (j, c) in factor.mixing[k].iter().enumerate() {
            col += decorrelated.column(j) * (c / norm);
        }
        output.set_column(k, &col);
    }

    Ok(TargetCovDraw {
        raw,
        standardized,
        eigenvalues,
        rotation,
        decorrelated,
        factor,
        output,
    })
}
