//! Monte Carlo estimate `ĝ` of the MSPE and its minimization over tuning
//! parameters.
//!
//! A [`McSample`] holds everything random: `N` training designs with exact
//! empirical covariance `Γ_r`, their standard-normal noise, `M` test points
//! drawn from `N(0, Γ_ρ)` and the test noise. It does not depend on `β` or
//! `σ`, so every method, tuning value and scenario point built from one
//! sample uses common random numbers.
//!
//! `ĝ(b₁..b_N) = (1/N) Σᵢ (1/M) Σⱼ (x₀ⱼ'bᵢ − y₀ⱼ)²`, evaluated per replicate
//! as `b'Sb − 2b's + s_yy` from the test-set moments.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{MspeMethod, MspeRecord, Scenario, TuningGrid};
use crate::elastic_net::{elastic_net_path, fit_elastic_net, EnetConfig};
use crate::error::{Error, Result};
use crate::estimators::{fmt_vec, ls_from_gram, ridge_from_gram, split_from_blocks, Tuning};
use crate::linalg::{fnv1a, mean, sample_variance};
use crate::model::{derive_stream, CorrelationSpec, Dataset, GramBlocks};
use crate::partitions::adaptive_split_set_capped;
use crate::qp::{minimize_box_qp, nnls_gram};
use crate::splitreg::{fit_splitreg, splitreg_path, uniform_mean, SplitRegConfig};
use crate::targetcov::{generate, triangular_factor, TargetCovRequest};

/// All random inputs of one Monte Carlo study.
#[derive(Debug, Clone, PartialEq)]
pub struct McSample {
    designs: Vec<DMatrix<f64>>,
    noise: Vec<DVector<f64>>,
    test_x: DMatrix<f64>,
    test_noise: DVector<f64>,
    fingerprint: u64,
}

/// Draws `replicates` training designs and `test_points` test pairs.
///
/// Streams are keyed by `(seed, replicate, purpose)`: `design` and `noise`
/// per replicate, `test-x` and `test-noise` once.
pub fn draw_sample(
    n: usize,
    spec: &CorrelationSpec,
    replicates: usize,
    test_points: usize,
    seed: u64,
) -> Result<McSample> {
    if replicates == 0 || test_points == 0 {
        return Err(Error::param("replicates and test_points must be at least 1"));
    }
    let d = spec.d();
    let designs = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let req = TargetCovRequest {
                n,
                spec,
                stream: derive_stream(seed, i as u64, "design"),
            };
            generate(&req).map_err(|e| Error::Replicate {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let noise = (0..replicates)
        .map(|i| DVector::from_vec(derive_stream(seed, i as u64, "noise").standard_normals(n)))
        .collect();
    let l_rho = triangular_factor(spec.gamma_rho())?;
    let z = derive_stream(seed, 0, "test-x").standard_normals(test_points * d);
    let test_x = DMatrix::from_row_slice(test_points, d, &z) * l_rho.transpose();
    let test_noise = DVector::from_vec(derive_stream(seed, 0, "test-noise").standard_normals(test_points));
    let mut sample = McSample {
        designs,
        noise,
        test_x,
        test_noise,
        fingerprint: 0,
    };
    sample.fingerprint = sample.checksum();
    Ok(sample)
}

impl McSample {
    pub fn replicates(&self) -> usize {
        self.designs.len()
    }

    pub fn test_points(&self) -> usize {
        self.test_x.nrows()
    }

    pub fn designs(&self) -> &[DMatrix<f64>] {
        &self.designs
    }

    pub fn test_x(&self) -> &DMatrix<f64> {
        &self.test_x
    }

    /// Checksum recorded when the sample was drawn.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// FNV-1a over the bit patterns of every stored number.
    pub fn checksum(&self) -> u64 {
        let mut bytes = Vec::new();
        let mut push = |v: &f64| bytes.extend_from_slice(&v.to_bits().to_le_bytes());
        self.designs.iter().flat_map(|m| m.iter()).for_each(&mut push);
        self.noise.iter().flat_map(|v| v.iter()).for_each(&mut push);
        self.test_x.iter().for_each(&mut push);
        self.test_noise.iter().for_each(&mut push);
        fnv1a(&bytes)
    }

    /// Fails if the data no longer matches the recorded fingerprint.
    pub fn verify(&self) -> Result<()> {
        let now = self.checksum();
        if now != self.fingerprint {
            return Err(Error::param(format!(
                "Monte Carlo sample changed (fingerprint {:016x}, now {now:016x})",
                self.fingerprint
            )));
        }
        Ok(())
    }
}

/// `ĝ` with its standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Accounts for both the replicate and the shared test-set variability:
    /// `√(var(row means)/N + var(column means)/M)`.
    pub se: f64,
    /// `√(var(row means)/N)`, treating the test set as fixed.
    pub se_replicate: f64,
}

/// One scenario point on a sample: training responses and test moments.
#[derive(Debug, Clone)]
pub struct McProblem<'a> {
    sample: &'a McSample,
    beta: DVector<f64>,
    sigma2: f64,
    datasets: Vec<Dataset>,
    grams: Vec<DMatrix<f64>>,
    xtys: Vec<DVector<f64>>,
    y0: DVector<f64>,
    s_mat: DMatrix<f64>,
    s_vec: DVector<f64>,
    syy: f64,
}

impl<'a> McProblem<'a> {
    pub fn new(sample: &'a McSample, scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let beta = scenario.beta();
        let d = beta.len();
        if sample.test_x.ncols() != d || sample.designs.iter().any(|x| x.shape() != (scenario.n, d)) {
            return Err(Error::DimensionMismatch("sample does not match the scenario".into()));
        }
        let sigma2 = scenario.sigma2();
        let sigma = sigma2.sqrt();
        let datasets = sample
            .designs
            .iter()
            .zip(&sample.noise)
            .enumerate()
            .map(|(i, (x, z))| {
                let y = x * &beta + z * sigma;
                Dataset::from_standardized(x.clone(), y).map_err(|e| Error::Replicate {
                    index: i,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let grams = datasets.iter().map(Dataset::gram).collect();
        let xtys = datasets.iter().map(Dataset::xty).collect();
        let m = sample.test_points() as f64;
        let y0 = &sample.test_x * &beta + &sample.test_noise * sigma;
        let s_mat = sample.test_x.tr_mul(&sample.test_x) / m;
        let s_vec = sample.test_x.tr_mul(&y0) / m;
        let syy = y0.norm_squared() / m;
        Ok(Self {
            sample,
            beta,
            sigma2,
            datasets,
            grams,
            xtys,
            y0,
            s_mat,
            s_vec,
            syy,
        })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn sample(&self) -> &McSample {
        self.sample
    }

    pub fn datasets(&self) -> &[Dataset] {
        &self.datasets
    }

    pub fn test_responses(&self) -> &DVector<f64> {
        &self.y0
    }

    /// Mean squared test error of coefficient vector `b`.
    pub fn loss(&self, b: &DVector<f64>) -> f64 {
        b.dot(&(&self.s_mat * b)) - 2.0 * b.dot(&self.s_vec) + self.syy
    }

    /// `ĝ` for per-replicate coefficients.
    pub fn value(&self, coefs: &[DVector<f64>]) -> f64 {
        let losses: Vec<f64> = coefs.iter().map(|b| self.loss(b)).collect();
        mean(&losses)
    }

    /// `ĝ` with standard errors from the full replicate-by-test-point table.
    pub fn estimate(&self, coefs: &[DVector<f64>]) -> Estimate {
        let n_rep = coefs.len();
        let m = self.sample.test_points();
        let b = DMatrix::from_fn(self.beta.len(), n_rep, |k, i| coefs[i][k]);
        let mut err = &self.sample.test_x * b;
        for i in 0..n_rep {
            for j in 0..m {
                let e = err[(j, i)] - self.y0[j];
                err[(j, i)] = e * e;
            }
        }
        let rows: Vec<f64> = (0..n_rep).map(|i| mean(err.column(i).as_slice())).collect();
        let cols: Vec<f64> = (0..m)
            .map(|j| {
                let row: Vec<f64> = err.row(j).iter().copied().collect();
                mean(&row)
            })
            .collect();
        let var_rows = sample_variance(&rows) / n_rep as f64;
        let var_cols = sample_variance(&cols) / m as f64;
        Estimate {
            value: self.value(coefs),
            se: (var_rows + var_cols).sqrt(),
            se_replicate: var_rows.sqrt(),
        }
    }

    /// Runs `f` for every replicate in parallel, preserving order.
    fn per_replicate<T: Send>(&self, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        (0..self.datasets.len())
            .into_par_iter()
            .map(|i| {
                f(i).map_err(|e| Error::Replicate {
                    index: i,
                    source: Box::new(e),
                })
            })
            .collect()
    }

    /// Coordinatewise weights `w ∈ [0, 1]^d` minimizing `ĝ(w ∘ bᵢ)`.
    fn optimal_shrinkage(&self, base: &[DVector<f64>]) -> Result<Vec<f64>> {
        let d = self.beta.len();
        let mut h = DMatrix::zeros(d, d);
        let mut g = DVector::zeros(d);
        for k in 0..d {
            let first: Vec<f64> = base.iter().map(|b| b[k]).collect();
            g[k] = -2.0 * self.s_vec[k] * mean(&first);
            for l in 0..d {
                let cross: Vec<f64> = base.iter().map(|b| b[k] * b[l]).collect();
                h[(k, l)] = 2.0 * self.s_mat[(k, l)] * mean(&cross);
            }
        }
        let sol = minimize_box_qp(&h, &g, &vec![0.0; d], &vec![1.0; d])?;
        Ok(sol.x.iter().copied().collect())
    }

    /// Nonnegative model weights minimizing `ĝ(Σ_g δ_g βᵍᵢ)`.
    fn optimal_aggregation(&self, models: &[&[DVector<f64>]]) -> Result<Vec<f64>> {
        let groups = models[0].len();
        let mut q = DMatrix::zeros(groups, groups);
        let mut c = DVector::zeros(groups);
        for g in 0..groups {
            let lin: Vec<f64> = models.iter().map(|m| m[g].dot(&self.s_vec)).collect();
            c[g] = mean(&lin);
            for h in 0..groups {
                let quad: Vec<f64> = models.iter().map(|m| m[g].dot(&(&self.s_mat * &m[h]))).collect();
                q[(g, h)] = mean(&quad);
            }
        }
        Ok(nnls_gram(&q, &c)?.iter().copied().collect())
    }
}

/// What `estimate_g` evaluates.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    /// The true coefficients.
    Oracle,
    /// Always predicts 0.
    Zero,
    /// A method at fixed tuning, refitted on every replicate.
    Fit(Tuning),
}

fn fixed_fit(problem: &McProblem<'_>, i: usize, tuning: &Tuning) -> Result<DVector<f64>> {
    let (gram, xty, ds) = (&problem.grams[i], &problem.xtys[i], &problem.datasets[i]);
    match tuning {
        Tuning::Ls => ls_from_gram(gram, xty),
        Tuning::Ridge { lambda } => ridge_from_gram(gram, xty, *lambda),
        Tuning::Garrote { omega } => {
            let ls = ls_from_gram(gram, xty)?;
            check_len(omega, ls.len())?;
            Ok(ls.component_mul(&DVector::from_column_slice(omega)))
        }
        Tuning::Split { partition, weights } => {
            let gb = GramBlocks::from_gram(gram.clone(), partition.clone())?;
            let mut b = split_from_blocks(&gb, xty)?;
            if let Some(w) = weights {
                check_len(w, b.len())?;
                b.component_mul_assign(&DVector::from_column_slice(w));
            }
            Ok(b)
        }
        Tuning::ElasticNet { lambda, alpha } => {
            Ok(fit_elastic_net(ds, &EnetConfig::new(*lambda, *alpha))?.into_coefficients())
        }
        Tuning::SplitReg {
            lambda_s,
            alpha,
            lambda_d,
            groups,
        } => {
            let cfg = SplitRegConfig::new(*groups, *lambda_s, *alpha, *lambda_d);
            Ok(uniform_mean(&fit_splitreg(ds, &cfg, None)?.betas))
        }
    }
}

fn check_len(w: &[f64], d: usize) -> Result<()> {
    if w.len() != d {
        return Err(Error::DimensionMismatch(format!("{} weights for {d} coefficients", w.len())));
    }
    Ok(())
}

/// `ĝ` for one predictor at fixed tuning.
pub fn estimate_g(problem: &McProblem<'_>, predictor: &Predictor) -> Result<Estimate> {
    problem.sample.verify()?;
    let coefs = match predictor {
        Predictor::Oracle => vec![problem.beta.clone(); problem.datasets.len()],
        Predictor::Zero => vec![DVector::zeros(problem.beta.len()); problem.datasets.len()],
        Predictor::Fit(tuning) => problem.per_replicate(|i| fixed_fit(problem, i, tuning))?,
    };
    Ok(problem.estimate(&coefs))
}

struct Best {
    value: f64,
    argmin: String,
    coefs: Vec<DVector<f64>>,
}

/// Running minimum; ties keep the earlier candidate.
#[derive(Default)]
struct Tracker {
    best: Option<Best>,
}

impl Tracker {
    fn offer(&mut self, problem: &McProblem<'_>, coefs: Vec<DVector<f64>>, argmin: impl FnOnce() -> String) {
        let value = problem.value(&coefs);
        if value.is_nan() {
            return;
        }
        if self.best.as_ref().is_none_or(|b| value < b.value) {
            self.best = Some(Best {
                value,
                argmin: argmin(),
                coefs,
            });
        }
    }

    /// The optimal coordinatewise shrinkage of `base`, then `w = 1` (which
    /// reproduces `base` exactly).
    fn offer_shrinkage(
        &mut self,
        problem: &McProblem<'_>,
        base: Vec<DVector<f64>>,
        label: impl Fn(&[f64]) -> String,
    ) -> Result<()> {
        let w = problem.optimal_shrinkage(&base)?;
        let wv = DVector::from_column_slice(&w);
        let shrunk = base.iter().map(|b| b.component_mul(&wv)).collect();
        self.offer(problem, shrunk, || label(&w));
        let ones = vec![1.0; w.len()];
        self.offer(problem, base, || label(&ones));
        Ok(())
    }
}

fn garrote_candidates(problem: &McProblem<'_>, tracker: &mut Tracker) -> Result<()> {
    let ls = problem.per_replicate(|i| ls_from_gram(&problem.grams[i], &problem.xtys[i]))?;
    tracker.offer_shrinkage(problem, ls, |w| Tuning::Garrote { omega: w.to_vec() }.to_string())
}

fn enet_candidates(problem: &McProblem<'_>, grid: &TuningGrid, alphas: &[f64], tracker: &mut Tracker) -> Result<()> {
    for &alpha in alphas {
        let paths = problem.per_replicate(|i| {
            elastic_net_path(
                &problem.datasets[i],
                &grid.lambda,
                alpha,
                grid.enet_tolerance,
                grid.enet_max_sweeps,
            )
        })?;
        for (k, &lambda) in grid.lambda.iter().enumerate() {
            let coefs = paths.iter().map(|p| p[k].coefficients().clone()).collect();
            tracker.offer(problem, coefs, || Tuning::ElasticNet { lambda, alpha }.to_string());
        }
    }
    Ok(())
}

fn splitreg_candidates(problem: &McProblem<'_>, grid: &TuningGrid, weighted: bool, tracker: &mut Tracker) -> Result<()> {
    for &alpha in &grid.alpha {
        for &lambda_d in &grid.lambda_d {
            let template = SplitRegConfig {
                groups: grid.splitreg_groups,
                lambda_s: grid.lambda[0],
                alpha,
                lambda_d,
                max_sweeps: grid.splitreg_max_sweeps,
                tolerance: grid.splitreg_tolerance,
            };
            let paths = problem.per_replicate(|i| splitreg_path(&problem.datasets[i], &grid.lambda, &template))?;
            for (k, &lambda_s) in grid.lambda.iter().enumerate() {
                let label = Tuning::SplitReg {
                    lambda_s,
                    alpha,
                    lambda_d,
                    groups: grid.splitreg_groups,
                }
                .to_string();
                let uniform: Vec<DVector<f64>> = paths.iter().map(|p| uniform_mean(&p[k].betas)).collect();
                if weighted {
                    let models: Vec<&[DVector<f64>]> = paths.iter().map(|p| p[k].betas.as_slice()).collect();
                    let delta = problem.optimal_aggregation(&models)?;
                    let combined = models
                        .iter()
                        .map(|m| {
                            let mut out = DVector::zeros(m[0].len());
                            for (b, &w) in m.iter().zip(&delta) {
                                out.axpy(w, b, 1.0);
                            }
                            out
                        })
                        .collect();
                    tracker.offer(problem, combined, || format!("{label};delta={}", fmt_vec(&delta)));
                    tracker.offer(problem, uniform, || format!("{label};delta=uniform"));
                } else {
                    tracker.offer(problem, uniform, || label);
                }
            }
        }
    }
    Ok(())
}

/// Minimum of `ĝ` over the tuning parameters of `method`.
///
/// Garrote includes `ω = 1` and adaptive SPLIT includes every garrote
/// candidate, so `LS ≥ garrote ≥ SPLIT` holds exactly on a shared sample;
/// SplitReg's `λ_d = 0` paths reproduce the elastic-net paths bit for bit,
/// so `SplitReg ≤ elastic net` on a shared `(λ, α)` grid.
pub fn min_g(problem: &McProblem<'_>, method: MspeMethod, grid: &TuningGrid, scenario: &Scenario) -> Result<MspeRecord> {
    grid.validate()?;
    problem.sample.verify()?;
    let mut tracker = Tracker::default();
    match method {
        MspeMethod::Ls => {
            let coefs = problem.per_replicate(|i| ls_from_gram(&problem.grams[i], &problem.xtys[i]))?;
            tracker.offer(problem, coefs, || Tuning::Ls.to_string());
        }
        MspeMethod::Ridge => {
            let lambdas = grid.ridge_lambdas(scenario.n);
            let fits = problem.per_replicate(|i| {
                lambdas
                    .iter()
                    .map(|&l| ridge_from_gram(&problem.grams[i], &problem.xtys[i], l))
                    .collect::<Result<Vec<_>>>()
            })?;
            for (k, &lambda) in lambdas.iter().enumerate() {
                let coefs = fits.iter().map(|f| f[k].clone()).collect();
                tracker.offer(problem, coefs, || Tuning::Ridge { lambda }.to_string());
            }
        }
        MspeMethod::Lasso => enet_candidates(problem, grid, &[1.0], &mut tracker)?,
        MspeMethod::ElasticNet => enet_candidates(problem, grid, &grid.alpha, &mut tracker)?,
        MspeMethod::Garrote => garrote_candidates(problem, &mut tracker)?,
        MspeMethod::Split => {
            garrote_candidates(problem, &mut tracker)?;
            let d = scenario.d();
            for partition in adaptive_split_set_capped(d, grid.max_groups.min(d), grid.enumeration_cap)? {
                let base = problem.per_replicate(|i| {
                    let gb = GramBlocks::from_gram(problem.grams[i].clone(), partition.clone())?;
                    split_from_blocks(&gb, &problem.xtys[i])
                })?;
                tracker.offer_shrinkage(problem, base, |w| {
                    Tuning::Split {
                        partition: partition.clone(),
                        weights: Some(w.to_vec()),
                    }
                    .to_string()
                })?;
            }
        }
        MspeMethod::SplitReg => splitreg_candidates(problem, grid, false, &mut tracker)?,
        MspeMethod::SplitRegWeighted => splitreg_candidates(problem, grid, true, &mut tracker)?,
    }
    problem.sample.verify()?;
    let best = tracker
        .best
        .ok_or_else(|| Error::param(format!("no finite ĝ value for method `{method}`")))?;
    let est = problem.estimate(&best.coefs);
    Ok(MspeRecord {
        method,
        beta2: scenario.beta2,
        snr: scenario.snr,
        r: scenario.spec.r().unwrap_or(f64::NAN),
        rho: scenario.spec.rho().unwrap_or(f64::NAN),
        sigma2: problem.sigma2,
        mspe: best.value,
        mspe_minus_sigma2: best.value - problem.sigma2,
        se: est.se,
        se_replicate: est.se_replicate,
        argmin: best.argmin,
        fingerprint: Some(problem.sample.fingerprint),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Partition;

    fn scenario(d: usize, rho: f64, r: f64, beta2: f64, reps: usize, tests: usize) -> Scenario {
        Scenario {
            n: 10,
            spec: CorrelationSpec::equicorrelation(d, rho, r).unwrap(),
            beta1: 1.0,
            beta2,
            lead: if d == 2 { 1 } else { 2 },
            snr: 3.0,
            replicates: reps,
            test_points: tests,
            seed: 42,
        }
    }

    fn sample_for(s: &Scenario) -> McSample {
        draw_sample(s.n, &s.spec, s.replicates, s.test_points, s.seed).unwrap()
    }

    fn small_grid() -> TuningGrid {
        TuningGrid::from_ranges(1e-3, 10.0, 6, vec![0.0, 1.0], 0.01, 1.0, 2)
    }

    #[test]
    fn sample_is_deterministic_and_fingerprinted() {
        let s = scenario(3, 0.2, 0.5, 0.3, 4, 10);
        let a = sample_for(&s);
        let b = sample_for(&s);
        assert_eq!(a, b);
        a.verify().unwrap();
        let other = draw_sample(10, &s.spec, 4, 10, 43).unwrap();
        assert_ne!(a.fingerprint(), other.fingerprint());
        for x in a.designs() {
            let cov = crate::targetcov::empirical_covariance(x);
            assert!((cov - s.spec.gamma_r()).amax() < 1e-10);
        }
    }

    #[test]
    fn loss_matches_direct_evaluation() {
        let s = scenario(3, 0.2, 0.5, 0.3, 3, 25);
        let sample = sample_for(&s);
        let p = McProblem::new(&sample, &s).unwrap();
        let b = DVector::from_vec(vec![0.3, -1.0, 2.0]);
        let direct: f64 = (0..25)
            .map(|j| (sample.test_x().row(j).transpose().dot(&b) - p.test_responses()[j]).powi(2))
            .sum::<f64>()
            / 25.0;
        assert!((p.loss(&b) - direct).abs() < 1e-12 * direct);
        let est = p.estimate(&vec![b.clone(); 3]);
        assert!((est.value - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn replicate_order_does_not_matter_beyond_rounding() {
        let s = scenario(2, 0.3, 0.6, 0.5, 30, 40);
        let sample = sample_for(&s);
        let p = McProblem::new(&sample, &s).unwrap();
        let coefs = p.per_replicate(|i| ls_from_gram(&p.grams[i], &p.xtys[i])).unwrap();
        let mut rev = coefs.clone();
        rev.reverse();
        assert!((p.value(&coefs) - p.value(&rev)).abs() < 1e-13);
    }

    #[test]
    fn oracle_and_zero_predictors() {
        let s = scenario(2, 0.3, 0.6, 0.5, 50, 400);
        let sample = sample_for(&s);
        let p = McProblem::new(&sample, &s).unwrap();
        let oracle = estimate_g(&p, &Predictor::Oracle).unwrap();
        assert!((oracle.value - p.sigma2()).abs() < 2.0 * oracle.se + 1e-12);
        let zero = estimate_g(&p, &Predictor::Zero).unwrap();
        let want = s.signal_variance() + p.sigma2();
        assert!((zero.value - want).abs() < 2.0 * zero.se);
    }

    #[test]
    fn fixed_tunings_reduce_consistently() {
        let s = scenario(2, 0.3, 0.6, 0.5, 5, 20);
        let sample = sample_for(&s);
        let p = McProblem::new(&sample, &s).unwrap();
        let ls = estimate_g(&p, &Predictor::Fit(Tuning::Ls)).unwrap();
        let garrote = estimate_g(&p, &Predictor::Fit(Tuning::Garrote { omega: vec![1.0, 1.0] })).unwrap();
        assert_eq!(ls.value, garrote.value);
        let ridge0 = estimate_g(&p, &Predictor::Fit(Tuning::Ridge { lambda: 0.0 })).unwrap();
        assert_eq!(ls.value, ridge0.value);
        let split = estimate_g(
            &p,
            &Predictor::Fit(Tuning::Split {
                partition: Partition::single_group(2),
                weights: None,
            }),
        )
        .unwrap();
        assert!((split.value - ls.value).abs() < 1e-12);
    }

    #[test]
    fn exact_orderings_on_shared_sample() {
        let s = scenario(4, 0.1, 0.9, 0.4, 6, 30);
        let sample = sample_for(&s);
        let p = McProblem::new(&sample, &s).unwrap();
        let grid = small_grid();
        let get = |m| min_g(&p, m, &grid, &s).unwrap();
        let ls = get(MspeMethod::Ls);
        let garrote = get(MspeMethod::Garrote);
        let split = get(MspeMethod::Split);
        assert!(garrote.mspe <= ls.mspe);
        assert!(split.mspe <= garrote.mspe);
        let enet = get(MspeMethod::ElasticNet);
        let sr = get(MspeMethod::SplitReg);
        let srw = get(MspeMethod::SplitRegWeighted);
        assert!(sr.mspe <= enet.mspe);
        assert!(srw.mspe <= sr.mspe);
        for rec in [&ls, &garrote, &split, &enet, &sr, &srw] {
            assert_eq!(rec.fingerprint, Some(sample.fingerprint()));
            assert!(rec.mspe >= 0.0 && rec.se >= rec.se_replicate);
        }
    }

    #[test]
    fn splitreg_without_diversity_equals_elastic_net() {
        let s = scenario(3, 0.2, 0.7, 0.5, 4, 20);
        let sample = sample_for(&s);
        let p = McProblem::new(&sample, &s).unwrap();
        let mut grid = small_grid();
        grid.lambda_d = vec![0.0];
        let enet = min_g(&p, MspeMethod::ElasticNet, &grid, &s).unwrap();
        let sr = min_g(&p, MspeMethod::SplitReg, &grid, &s).unwrap();
        assert_eq!(enet.mspe, sr.mspe);
    }

    #[test]
    fn garrote_weights_beat_lattice() {
        let s = scenario(2, 0.5, 0.5, 0.2, 20, 50);
        let sample = sample_for(&s);
        let p = McProblem::new(&sample, &s).unwrap();
        let rec = min_g(&p, MspeMethod::Garrote, &small_grid(), &s).unwrap();
        let ls = p.per_replicate(|i| ls_from_gram(&p.grams[i], &p.xtys[i])).unwrap();
        for a in 0..=50 {
            for b in 0..=50 {
                let w = DVector::from_vec(vec![a as f64 / 50.0, b as f64 / 50.0]);
                let coefs: Vec<_> = ls.iter().map(|c| c.component_mul(&w)).collect();
                assert!(rec.mspe <= p.value(&coefs) + 1e-12);
            }
        }
    }
}
