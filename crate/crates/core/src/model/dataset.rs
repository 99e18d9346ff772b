use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Columns of a standardized design have mean 0 and `(1/n) Σ x²` equal to 1
/// within this tolerance.
pub const STANDARDIZED_TOL: f64 = 1e-10;

const MIN_SECOND_MOMENT: f64 = 1e-12;

/// Design matrix (rows are observations) plus response.
///
/// The variance divisor is `1/n` throughout, so a standardized column
/// satisfies `(1/n) Σᵢ xᵢⱼ² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    standardized: bool,
}

impl Dataset {
    /// Wraps raw data without touching it.
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        check_shape(&x, &y)?;
        Ok(Self {
            x,
            y,
            standardized: false,
        })
    }

    /// Wraps data that is already standardized, verifying the invariant.
    pub fn from_standardized(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        check_shape(&x, &y)?;
        let n = x.nrows() as f64;
        for (j, col) in x.column_iter().enumerate() {
            let mean = col.sum() / n;
            let moment = col.dot(&col) / n;
            if mean.abs() > STANDARDIZED_TOL || (moment - 1.0).abs() > STANDARDIZED_TOL {
                return Err(Error::param(format!(
                    "column {j} is not standardized (mean {mean:e}, second moment {moment})"
                )));
            }
        }
        Ok(Self {
            x,
            y,
            standardized: true,
        })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// `X'X`, unnormalized.
    pub fn gram(&self) -> DMatrix<f64> {
        self.x.tr_mul(&self.x)
    }

    /// `X'y`, unnormalized.
    pub fn xty(&self) -> DVector<f64> {
        self.x.tr_mul(&self.y)
    }

    /// Same data with row `row` removed. The result is no longer flagged as
    /// standardized.
    pub fn without_row(&self, row: usize) -> Result<Dataset> {
        if row >= self.n() {
            return Err(Error::param(format!("row {row} out of range for n = {}", self.n())));
        }
        Dataset::new(self.x.clone().remove_row(row), self.y.clone().remove_row(row))
    }
}

fn check_shape(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::param("design matrix must have at least one row and column"));
    }
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} rows but response has length {}",
            x.nrows(),
            y.len()
        )));
    }
    Ok(())
}

/// Per-column centering and scaling constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardization {
    /// Applies the stored transform to a new observation.
    pub fn apply(&self, x0: &[f64]) -> Result<DVector<f64>> {
        if x0.len() != self.center.len() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, expected {}",
                x0.len(),
                self.center.len()
            )));
        }
        Ok(DVector::from_iterator(
            x0.len(),
            x0.iter()
                .zip(&self.center)
                .zip(&self.scale)
                .map(|((v, c), s)| (v - c) / s),
        ))
    }
}

/// Centers every column and scales it to unit `1/n` second moment.
/// The response is left as is.
pub fn standardize(raw: &DMatrix<f64>, y: &DVector<f64>) -> Result<(Dataset, Standardization)> {
    check_shape(raw, y)?;
    let n = raw.nrows();
    if n < 2 {
        return Err(Error::param("standardization needs at least two observations"));
    }
    let nf = n as f64;
    let mut x = raw.clone();
    let mut center = Vec::with_capacity(raw.ncols());
    let mut scale = Vec::with_capacity(raw.ncols());
    for (j, mut col) in x.column_iter_mut().enumerate() {
        let mean = col.sum() / nf;
        col.add_scalar_mut(-mean);
        let moment = col.dot(&col) / nf;
        if moment <= MIN_SECOND_MOMENT {
            return Err(Error::DegenerateColumn { column: j, moment });
        }
        let s = moment.sqrt();
        col /= s;
        center.push(mean);
        scale.push(s);
    }
    let ds = Dataset {
        x,
        y: y.clone(),
        standardized: true,
    };
    Ok((ds, Standardization { center, scale }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn already_standardized_column_is_unchanged() {
        let x = DMatrix::from_column_slice(4, 1, &[1.0, -1.0, 1.0, -1.0]);
        let y = DVector::from_vec(vec![0.0; 4]);
        let (ds, t) = standardize(&x, &y).unwrap();
        assert_eq!(ds.x(), &x);
        assert_eq!(t.center, vec![0.0]);
        assert_eq!(t.scale, vec![1.0]);
    }

    #[test]
    fn hand_computed_column() {
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let y = DVector::from_vec(vec![0.0; 3]);
        let (ds, t) = standardize(&x, &y).unwrap();
        let s = (2.0_f64 / 3.0).sqrt();
        assert!((t.scale[0] - s).abs() < 1e-15);
        assert_eq!(t.center[0], 2.0);
        for (got, want) in ds.x().iter().zip([-1.0 / s, 0.0, 1.0 / s]) {
            assert!((got - want).abs() < 1e-15);
        }
        let applied = t.apply(&[3.0]).unwrap();
        assert!((applied[0] - 1.0 / s).abs() < 1e-15);
    }

    #[test]
    fn constant_column_is_rejected() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0]);
        let y = DVector::from_vec(vec![0.0; 3]);
        match standardize(&x, &y) {
            Err(Error::DegenerateColumn { column, .. }) => assert_eq!(column, 1),
            other => panic!("expected degenerate column, got {other:?}"),
        }
    }

    #[test]
    fn idempotent() {
        let x = DMatrix::from_row_slice(
            5,
            2,
            &[0.3, 1.0, -2.0, 4.5, 1.7, 0.2, 0.9, -1.1, 3.3, 0.0],
        );
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let (once, _) = standardize(&x, &y).unwrap();
        let (twice, _) = standardize(once.x(), once.y()).unwrap();
        assert!((once.x() - twice.x()).abs().max() < 1e-12);
        assert!(Dataset::from_standardized(twice.x().clone(), y).is_ok());
    }

    #[test]
    fn shape_mismatch() {
        let x = DMatrix::zeros(3, 2);
        let y = DVector::zeros(2);
        assert!(matches!(Dataset::new(x, y), Err(Error::DimensionMismatch(_))));
    }
}
