//! Minimum attainable mean squared prediction error.
//!
//! [`closed`] holds exact two-variable curves. [`monte_carlo`] estimates
//! `ĝ`, the average squared error against fresh responses over `N` training
//! sets (each with exact empirical covariance `Γ_r`) and `M` test pairs, and
//! minimizes it over every method's tuning parameters. [`sweep`] runs
//! either over a grid of `β₂` values.

pub mod closed;
pub mod monte_carlo;
pub mod sweep;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::elastic_net::{DEFAULT_MAX_SWEEPS, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::logspace_desc;
use crate::model::CorrelationSpec;
use crate::partitions::DEFAULT_ENUMERATION_CAP;

pub use closed::{minimize_closed, ClosedOptimum, ClosedPoint};
pub use monte_carlo::{draw_sample, estimate_g, min_g, Estimate, McProblem, McSample, Predictor};
pub use sweep::{sweep_curve, SweepRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MspeMethod {
    Ls,
    Ridge,
    Lasso,
    ElasticNet,
    Garrote,
    /// Adaptive SPLIT: best shrunken split over all candidate partitions
    /// versus the best garrote.
    Split,
    SplitReg,
    /// SplitReg with nonnegative aggregation weights fitted to `ĝ`.
    SplitRegWeighted,
}

impl MspeMethod {
    pub const ALL: [MspeMethod; 8] = [
        MspeMethod::Ls,
        MspeMethod::Ridge,
        MspeMethod::Lasso,
        MspeMethod::ElasticNet,
        MspeMethod::Garrote,
        MspeMethod::Split,
        MspeMethod::SplitReg,
        MspeMethod::SplitRegWeighted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MspeMethod::Ls => "ls",
            MspeMethod::Ridge => "ridge",
            MspeMethod::Lasso => "lasso",
            MspeMethod::ElasticNet => "enet",
            MspeMethod::Garrote => "garrote",
            MspeMethod::Split => "split",
            MspeMethod::SplitReg => "splitreg",
            MspeMethod::SplitRegWeighted => "splitreg_weighted",
        }
    }

    /// Whether a two-variable closed form exists.
    pub fn has_closed_form(self) -> bool {
        matches!(
            self,
            MspeMethod::Ls | MspeMethod::Ridge | MspeMethod::Garrote | MspeMethod::Split
        )
    }
}

impl fmt::Display for MspeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MspeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MspeMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = MspeMethod::ALL.iter().map(|m| m.name()).collect();
                Error::param(format!("unknown method `{s}` (known: {})", known.join(", ")))
            })
    }
}

/// One point of a simulation study.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n: usize,
    pub spec: CorrelationSpec,
    pub beta1: f64,
    pub beta2: f64,
    /// The first `lead` coefficients equal `beta1`, the rest `beta2`.
    pub lead: usize,
    /// `β'Γ_ρβ / σ²`.
    pub snr: f64,
    pub replicates: usize,
    pub test_points: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn d(&self) -> usize {
        self.spec.d()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d();
        if self.n <= d {
            return Err(Error::Rank { n: self.n, d });
        }
        if !(1..d).contains(&self.lead) {
            return Err(Error::param(format!("lead must satisfy 1 <= lead < d = {d}, got {}", self.lead)));
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(Error::param(format!("snr must be positive, got {}", self.snr)));
        }
        if self.replicates == 0 || self.test_points == 0 {
            return Err(Error::param("replicates and test_points must be at least 1"));
        }
        if !(self.beta1.is_finite() && self.beta2.is_finite()) {
            return Err(Error::param("coefficients must be finite"));
        }
        if !(self.signal_variance() > 0.0) {
            return Err(Error::param("beta'Γ_ρ beta must be positive to define sigma2 from the snr"));
        }
        Ok(())
    }

    pub fn beta(&self) -> DVector<f64> {
        DVector::from_fn(self.d(), |j, _| if j < self.lead { self.beta1 } else { self.beta2 })
    }

    pub fn signal_variance(&self) -> f64 {
        let b = self.beta();
        b.dot(&(self.spec.gamma_rho() * &b))
    }

    pub fn sigma2(&self) -> f64 {
        self.signal_variance() / self.snr
    }

    pub fn with_point(&self, beta2: f64, snr: f64) -> Scenario {
        Scenario {
            beta2,
            snr,
            ..self.clone()
        }
    }
}

/// Tuning grids and solver controls shared by every method.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningGrid {
    /// Base penalty grid, descending. Ridge uses `n` times these values;
    /// lasso, elastic net and SplitReg's `λ_s` use them as they are.
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Diversity penalties; always contains 0.
    pub lambda_d: Vec<f64>,
    /// Largest number of groups in the adaptive SPLIT candidate set.
    pub max_groups: usize,
    /// Largest adaptive SPLIT candidate set that may be enumerated.
    pub enumeration_cap: u64,
    pub splitreg_groups: usize,
    pub enet_tolerance: f64,
    pub enet_max_sweeps: usize,
    pub splitreg_tolerance: f64,
    pub splitreg_max_sweeps: usize,
}

impl Default for TuningGrid {
    fn default() -> Self {
        Self::from_ranges(1e-4, 1e3, 50, vec![0.0, 0.25, 0.5, 0.75, 1.0], 1e-3, 1e2, 20)
    }
}

impl TuningGrid {
    /// Log-spaced grids; `lambda_d` gets 0 prepended.
    pub fn from_ranges(
        lambda_min: f64,
        lambda_max: f64,
        lambda_count: usize,
        alpha: Vec<f64>,
        lambda_d_min: f64,
        lambda_d_max: f64,
        lambda_d_count: usize,
    ) -> Self {
        let mut lambda_d = vec![0.0];
        lambda_d.extend(logspace_desc(lambda_d_min, lambda_d_max, lambda_d_count).into_iter().rev());
        Self {
            lambda: logspace_desc(lambda_min, lambda_max, lambda_count),
            alpha,
            lambda_d,
            max_groups: 3,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            splitreg_groups: 3,
            enet_tolerance: DEFAULT_TOLERANCE,
            enet_max_sweeps: DEFAULT_MAX_SWEEPS,
            splitreg_tolerance: DEFAULT_TOLERANCE,
            splitreg_max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda.is_empty() || self.alpha.is_empty() || self.lambda_d.is_empty() {
            return Err(Error::param("tuning grids must be nonempty"));
        }
        if self.lambda.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::param("lambda grid values must be positive and finite"));
        }
        if self.lambda.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::param("lambda grid must be strictly descending"));
        }
        if self.alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::param("alpha grid values must lie in [0, 1]"));
        }
        if !self.lambda_d.contains(&0.0) {
            return Err(Error::param("lambda_d grid must contain 0"));
        }
        if self.lambda_d.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(Error::param("lambda_d grid values must be finite and >= 0"));
        }
        if self.max_groups == 0 || self.splitreg_groups == 0 {
            return Err(Error::param("group counts must be at least 1"));
        }
        if !(self.enet_tolerance > 0.0 && self.splitreg_tolerance > 0.0) {
            return Err(Error::param("solver tolerances must be positive"));
        }
        if self.enet_max_sweeps == 0 || self.splitreg_max_sweeps == 0 {
            return Err(Error::param("max_sweeps must be at least 1"));
        }
        Ok(())
    }

    pub fn ridge_lambdas(&self, n: usize) -> Vec<f64> {
        self.lambda.iter().map(|l| l * n as f64).collect()
    }
}

/// Minimum-MSPE result for one method at one scenario point.
#[derive(Debug, Clone, PartialEq)]
pub struct MspeRecord {
    pub method: MspeMethod,
    pub beta2: f64,
    pub snr: f64,
    pub r: f64,
    pub rho: f64,
    pub sigma2: f64,
    /// Squared error against fresh responses (includes `σ²`).
    pub mspe: f64,
    pub mspe_minus_sigma2: f64,
    /// Standard error over both replicates and test points; 0 for closed forms.
    pub se: f64,
    /// Standard error over replicates only.
    pub se_replicate: f64,
    pub argmin: String,
    /// Checksum of the Monte Carlo data the value was computed on.
    pub fingerprint: Option<u64>,
}
