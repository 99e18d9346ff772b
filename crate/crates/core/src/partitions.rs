//! Counting and enumeration of splits of `p` variables into `G` groups,
//! and the candidate set searched by adaptive SPLIT.
//!
//! Counts use the sum over nondecreasing group-size sequences
//! `p₁ ≤ … ≤ p_G` of `p! / (p₁!⋯p_G!) · Π 1/hᵢ!`, where `hᵢ` counts the
//! groups of size `i` for `i = 1..⌊(p − (G − 2)) / 2⌋`, in exact integer
//! arithmetic. This equals the Stirling number of the second kind
//! `S(p, G)`; in particular it gives `a(15, 3) = 2,375,101`, which is not
//! the 6,137,951 sometimes quoted for that case.

use std::fmt;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::model::Partition;

/// Default ceiling on the number of splits an enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitCount {
    pub p: usize,
    pub groups: usize,
    pub value: BigUint,
}

impl fmt::Display for SplitCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

fn check_args(p: usize, groups: usize) -> Result<()> {
    if groups < 1 || groups > p {
        return Err(Error::param(format!(
            "need 1 <= G <= p, got p = {p}, G = {groups}"
        )));
    }
    Ok(())
}

fn factorial(k: usize) -> BigUint {
    (1..=k as u64).fold(BigUint::from(1u8), |acc, v| acc * v)
}

fn binomial(n: usize, k: usize) -> BigUint {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Visits every nondecreasing sequence of `parts` positive integers summing to `total`.
fn for_each_size_sequence(total: usize, parts: usize, mut visit: impl FnMut(&[usize])) {
    fn recurse(
        remaining: usize,
        parts_left: usize,
        min: usize,
        seq: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if parts_left == 0 {
            if remaining == 0 {
                visit(seq);
            }
            return;
        }
        // the remaining parts are all >= size
        let mut size = min;
        while size * parts_left <= remaining {
            seq.push(size);
            recurse(remaining - size, parts_left - 1, size, seq, visit);
            seq.pop();
            size += 1;
        }
    }
    recurse(total, parts, 1, &mut Vec::with_capacity(parts), &mut visit);
}

/// Number of ways to split `p` variables into `groups` nonempty unlabelled groups.
pub fn count_splits(p: usize, groups: usize) -> Result<SplitCount> {
    check_args(p, groups)?;
    let p_fact = factorial(p);
    let h_max = (p + 2 - groups) / 2;
    let mut total = BigUint::from(0u8);
    for_each_size_sequence(p, groups, |sizes| {
        let mut denom = sizes
            .iter()
            .fold(BigUint::from(1u8), |acc, &s| acc * factorial(s));
        for i in 1..=h_max {
            let h = sizes.iter().filter(|&&s| s == i).count();
            denom *= factorial(h);
        }
        let term = &p_fact / &denom;
        debug_assert_eq!(&term * &denom, p_fact, "non-integral term for sizes {sizes:?}");
        total += term;
    });
    Ok(SplitCount {
        p,
        groups,
        value: total,
    })
}

/// Splits into `groups` groups when variables may be left out:
/// `Σ_{j=G}^{p} C(p, j) · a(j, G)`.
pub fn count_splits_with_leftout(p: usize, groups: usize) -> Result<SplitCount> {
    check_args(p, groups)?;
    let mut total = BigUint::from(0u8);
    for j in groups..=p {
        total += binomial(p, j) * count_splits(j, groups)?.value;
    }
    Ok(SplitCount {
        p,
        groups,
        value: total,
    })
}

fn check_cap(count: &BigUint, cap: u64) -> Result<()> {
    if *count > BigUint::from(cap) {
        return Err(Error::TooManySplits {
            count: count.to_string(),
            cap,
        });
    }
    Ok(())
}

/// Every split of `p` variables into exactly `groups` groups, each exactly
/// once, in lexicographic order of restricted-growth labellings (which
/// coincides with canonical partition form).
pub fn enumerate_splits(p: usize, groups: usize) -> Result<Vec<Partition>> {
    enumerate_splits_capped(p, groups, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_splits_capped(p: usize, groups: usize, cap: u64) -> Result<Vec<Partition>> {
    let count = count_splits(p, groups)?;
    check_cap(&count.value, cap)?;
    let mut out = Vec::new();
    let mut labels = vec![0usize; p];
    rgs(&mut labels, 1, 0, groups, &mut out)?;
    Ok(out)
}

fn rgs(
    labels: &mut [usize],
    pos: usize,
    max_label: usize,
    groups: usize,
    out: &mut Vec<Partition>,
) -> Result<()> {
    let p = labels.len();
    if pos == p {
        if max_label + 1 == groups {
            out.push(Partition::from_labels(labels)?);
        }
        return Ok(());
    }
    let remaining = p - pos;
    let top = (max_label + 1).min(groups - 1);
    for label in 0..=top {
        let new_max = max_label.max(label);
        // enough positions left to open the missing groups
        if groups - 1 - new_max > remaining - 1 {
            continue;
        }
        labels[pos] = label;
        rgs(labels, pos + 1, new_max, groups, out)?;
    }
    Ok(())
}

/// The single-group partition followed by every split into `2..=max_groups`
/// groups, in canonical enumeration order.
pub fn adaptive_split_set(p: usize, max_groups: usize) -> Result<Vec<Partition>> {
    adaptive_split_set_capped(p, max_groups, DEFAULT_ENUMERATION_CAP)
}

/// Size of [`adaptive_split_set`] without enumerating it.
pub fn adaptive_split_count(p: usize, max_groups: usize) -> Result<BigUint> {
    check_args(p, max_groups)?;
    let mut total = BigUint::from(1u8);
    for g in 2..=max_groups {
        total += count_splits(p, g)?.value;
    }
    Ok(total)
}

/// Fails with [`Error::TooManySplits`] when the adaptive set would exceed `cap`.
pub fn check_adaptive_cap(p: usize, max_groups: usize, cap: u64) -> Result<()> {
    check_cap(&adaptive_split_count(p, max_groups)?, cap)
}

pub fn adaptive_split_set_capped(p: usize, max_groups: usize, cap: u64) -> Result<Vec<Partition>> {
    check_adaptive_cap(p, max_groups, cap)?;
    let mut out = vec![Partition::single_group(p)];
    for g in 2..=max_groups {
        out.extend(enumerate_splits_capped(p, g, cap)?);
    }
    Ok(out)
}
