use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::smallest_eigenvalue;

const MIN_EIGENVALUE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Structure {
    /// Unit diagonal, every off-diagonal equal to the parameter.
    Equicorrelation { rho: f64, r: f64 },
    Custom,
}

/// Population correlation `Γ_ρ` (law of new points) and target empirical
/// correlation `Γ_r` (exact sample correlation of every training design).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSpec {
    structure: Structure,
    gamma_rho: DMatrix<f64>,
    gamma_r: DMatrix<f64>,
}

pub fn equicorrelation_matrix(d: usize, param: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { param })
}

impl CorrelationSpec {
    pub fn equicorrelation(d: usize, rho: f64, r: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        for (name, v) in [("rho", rho), ("r", r)] {
            let lower = if d > 1 { -1.0 / (d as f64 - 1.0) } else { -1.0 };
            if !(v > lower && v < 1.0) {
                return Err(Error::param(format!(
                    "{name} = {v} outside ({lower}, 1) required for a d = {d} equicorrelation"
                )));
            }
        }
        let spec = Self {
            structure: Structure::Equicorrelation { rho, r },
            gamma_rho: equicorrelation_matrix(d, rho),
            gamma_r: equicorrelation_matrix(d, r),
        };
        validate_correlation(&spec.gamma_rho, "gamma_rho")?;
        validate_correlation(&spec.gamma_r, "gamma_r")?;
        Ok(spec)
    }

    pub fn from_matrices(gamma_rho: DMatrix<f64>, gamma_r: DMatrix<f64>) -> Result<Self> {
        if gamma_rho.shape() != gamma_r.shape() {
            return Err(Error::DimensionMismatch(format!(
                "gamma_rho is {:?} but gamma_r is {:?}",
                gamma_rho.shape(),
                gamma_r.shape()
            )));
        }
        validate_correlation(&gamma_rho, "gamma_rho")?;
        validate_correlation(&gamma_r, "gamma_r")?;
        Ok(Self {
            structure: Structure::Custom,
            gamma_rho,
            gamma_r,
        })
    }

    pub fn d(&self) -> usize {
        self.gamma_r.nrows()
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn gamma_rho(&self) -> &DMatrix<f64> {
        &self.gamma_rho
    }

    pub fn gamma_r(&self) -> &DMatrix<f64> {
        &self.gamma_r
    }

    pub fn rho(&self) -> Option<f64> {
        match self.structure {
            Structure::Equicorrelation { rho, .. } => Some(rho),
            Structure::Custom => None,
        }
    }

    pub fn r(&self) -> Option<f64> {
        match self.structure {
            Structure::Equicorrelation { r, .. } => Some(r),
            Structure::Custom => None,
        }
    }
}

fn validate_correlation(m: &DMatrix<f64>, name: &str) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::param(format!("{name} must be a nonempty square matrix")));
    }
    let d = m.nrows();
    for i in 0..d {
        if (m[(i, i)] - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!("{name} has diagonal entry {} at {i}", m[(i, i)])));
        }
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 {
                return Err(Error::param(format!("{name} is not symmetric at ({i}, {j})")));
            }
        }
    }
    let min = smallest_eigenvalue(m);
    if min <= MIN_EIGENVALUE {
        return Err(Error::NotPositiveDefinite(format!(
            "{name} has smallest eigenvalue {min:e}"
        )));
    }
    Ok(())
}
