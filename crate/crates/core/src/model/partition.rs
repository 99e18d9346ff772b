use std::fmt;

use crate::error::{Error, Result};

/// Disjoint, nonempty groups of predictor indices (0-based) over `0..dim`.
///
/// Always held in canonical form: each group sorted ascending and groups
/// ordered by their smallest element. Groups need not cover every index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    groups: Vec<Vec<usize>>,
    dim: usize,
}

impl Partition {
    pub fn new(groups: Vec<Vec<usize>>, dim: usize) -> Result<Self> {
        let mut seen = vec![false; dim];
        for (g, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::param(format!("group {g} is empty")));
            }
            for &j in group {
                if j >= dim {
                    return Err(Error::param(format!("index {j} out of range for d = {dim}")));
                }
                if seen[j] {
                    return Err(Error::param(format!("index {j} appears in more than one group")));
                }
                seen[j] = true;
            }
        }
        Ok(Self { groups, dim }.canonical())
    }

    /// Builds a partition from a restricted-growth labelling: `labels[j]` is
    /// the group of variable `j`.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let count = labels.iter().map(|&l| l + 1).max().unwrap_or(0);
        let mut groups = vec![Vec::new(); count];
        for (j, &l) in labels.iter().enumerate() {
            groups[l].push(j);
        }
        Partition::new(groups, labels.len())
    }

    /// All variables in one group.
    pub fn single_group(dim: usize) -> Self {
        Self {
            groups: vec![(0..dim).collect()],
            dim,
        }
    }

    pub fn singletons(dim: usize) -> Self {
        Self {
            groups: (0..dim).map(|j| vec![j]).collect(),
            dim,
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn covers_all(&self) -> bool {
        self.groups.iter().map(Vec::len).sum::<usize>() == self.dim
    }

    /// Canonical form. Idempotent.
    pub fn canonical(mut self) -> Self {
        for g in &mut self.groups {
            g.sort_unstable();
        }
        self.groups.sort_by_key(|g| g[0]);
        self
    }

    /// True when every group of `self` lies inside a single group of `coarser`
    /// and both cover the same indices.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.dim != coarser.dim {
            return false;
        }
        let mut owner = vec![usize::MAX; self.dim];
        for (g, group) in coarser.groups.iter().enumerate() {
            for &j in group {
                owner[j] = g;
            }
        }
        let mut covered = 0;
        for group in &self.groups {
            let o = owner[group[0]];
            if o == usize::MAX || group.iter().any(|&j| owner[j] != o) {
                return false;
            }
            covered += group.len();
        }
        covered == coarser.groups.iter().map(Vec::len).sum::<usize>()
    }
}

impl fmt::Display for Partition {
    /// 1-based, e.g. `{1 2}{3}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.groups {
            f.write_str("{")?;
            for (k, j) in g.iter().enumerate() {
                if k > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", j + 1)?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}
