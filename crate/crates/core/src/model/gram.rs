use nalgebra::DMatrix;

use super::{Dataset, Partition};
use crate::error::{Error, Result};
use crate::linalg::{inverse_spd, reciprocal_condition, RCOND_MIN};

/// `A = X'X` (unnormalized) with the inverses of its diagonal blocks for a
/// given partition, in the partition's canonical group order.
#[derive(Debug, Clone)]
pub struct GramBlocks {
    a: DMatrix<f64>,
    partition: Partition,
    block_inverses: Vec<DMatrix<f64>>,
}

pub fn gram_blocks(ds: &Dataset, p: &Partition) -> Result<GramBlocks> {
    GramBlocks::from_gram(ds.gram(), p.clone())
}

impl GramBlocks {
    /// Builds the block structure from a precomputed `A`.
    pub fn from_gram(a: DMatrix<f64>, partition: Partition) -> Result<Self> {
        if !a.is_square() || a.nrows() != partition.dim() {
            return Err(Error::DimensionMismatch(format!(
                "Gram matrix is {:?} but partition is over d = {}",
                a.shape(),
                partition.dim()
            )));
        }
        let scale = a.amax().max(1.0);
        let asym = (&a - a.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::param(format!("Gram matrix not symmetric (max asymmetry {asym:e})")));
        }
        let block_inverses = partition
            .groups()
            .iter()
            .enumerate()
            .map(|(g, idx)| {
                let block = a.select_rows(idx.iter()).select_columns(idx.iter());
                let rcond = reciprocal_condition(&block);
                if rcond < RCOND_MIN {
                    return Err(Error::SingularBlock { group: g, rcond });
                }
                inverse_spd(&block).ok_or(Error::SingularBlock { group: g, rcond })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            a,
            partition,
            block_inverses,
        })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn d(&self) -> usize {
        self.a.nrows()
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn block_inverse(&self, group: usize) -> &DMatrix<f64> {
        &self.block_inverses[group]
    }

    pub fn block_inverses(&self) -> &[DMatrix<f64>] {
        &self.block_inverses
    }

    /// `diag(A_gg⁻¹)` embedded at the group indices; rows/columns of
    /// variables outside the partition are zero.
    pub fn block_diag_inverse(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.d(), self.d());
        for (idx, inv) in self.partition.groups().iter().zip(&self.block_inverses) {
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    out[(i, j)] = inv[(a, b)];
                }
            }
        }
        out
    }
}
