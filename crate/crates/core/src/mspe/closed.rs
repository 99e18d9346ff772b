//! Exact two-variable MSPE curves, as parameter-estimation error
//! `E_{x₀}(x₀'θ̂ − x₀'β)²` (the irreducible `σ²` is not included).
//!
//! `r` is the empirical correlation of the training design, `ρ` the
//! population correlation of new points.

use nalgebra::{DMatrix, DVector};

use super::{MspeMethod, Scenario};
use crate::error::{Error, Result};
use crate::estimators::Tuning;
use crate::model::Partition;
use crate::qp::minimize_box_qp;

fn check(sigma2: f64, n: f64, r: f64, rho: f64) -> Result<()> {
    if !(r.abs() < 1.0) {
        return Err(Error::param(format!("closed forms need |r| < 1, got {r}")));
    }
    if !(rho.abs() <= 1.0) {
        return Err(Error::param(format!("rho must lie in [-1, 1], got {rho}")));
    }
    if !(n > 0.0) || !(sigma2 >= 0.0) {
        return Err(Error::param("closed forms need n > 0 and sigma2 >= 0"));
    }
    Ok(())
}

fn gamma(c: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, c, c, 1.0])
}

/// `2(σ²/n)(1 − rρ)/(1 − r²)`.
pub fn mspe_ls_closed(sigma2: f64, n: f64, r: f64, rho: f64) -> Result<f64> {
    check(sigma2, n, r, rho)?;
    Ok(2.0 * (sigma2 / n) * (1.0 - r * rho) / (1.0 - r * r))
}

/// Simplified garrote with weights `w`.
pub fn mspe_garrote_closed(w: [f64; 2], beta: [f64; 2], sigma2: f64, n: f64, r: f64, rho: f64) -> Result<f64> {
    check(sigma2, n, r, rho)?;
    let [w1, w2] = w;
    let [b1, b2] = beta;
    let bias = (w1 - 1.0).powi(2) * b1 * b1
        + (w2 - 1.0).powi(2) * b2 * b2
        + 2.0 * rho * (w1 - 1.0) * (w2 - 1.0) * b1 * b2;
    let var = sigma2 / (n * (1.0 - r * r)) * (w1 * w1 + w2 * w2 - 2.0 * r * w1 * w2 * rho);
    Ok(bias + var)
}

/// Ridge with penalty `λ` on the unnormalized Gram matrix `X'X = nΓ_r`.
pub fn mspe_ridge_closed(lambda: f64, beta: [f64; 2], sigma2: f64, n: f64, r: f64, rho: f64) -> Result<f64> {
    check(sigma2, n, r, rho)?;
    if !(lambda >= 0.0) {
        return Err(Error::param(format!("ridge lambda must be >= 0, got {lambda}")));
    }
    let k = lambda / n;
    let b = DMatrix::from_row_slice(2, 2, &[1.0 + k, -r, -r, 1.0 + k]);
    let v11 = (1.0 + k).powi(2) - r * r * (1.0 + 2.0 * k);
    let v12 = r * (k * k - 1.0 + r * r);
    let v = DMatrix::from_row_slice(2, 2, &[v11, v12, v12, v11]);
    let g = gamma(rho);
    let beta = DVector::from_row_slice(&beta);
    let bb = &b * &beta;
    let quad = bb.dot(&(&g * &bb));
    let det = (1.0 + k).powi(2) - r * r;
    Ok((k * k * quad + sigma2 * (&g * v).trace() / n) / (det * det))
}

/// Split least squares over the two singletons, shrunk by `w`.
pub fn mspe_split2_closed(w: [f64; 2], beta: [f64; 2], sigma2: f64, n: f64, r: f64, rho: f64) -> Result<f64> {
    check(sigma2, n, r, rho)?;
    let [w1, w2] = w;
    let t = DMatrix::from_row_slice(2, 2, &[1.0 - w1, -w1 * r, -w2 * r, 1.0 - w2]);
    let wm = DMatrix::from_diagonal(&DVector::from_row_slice(&w));
    let g_rho = gamma(rho);
    let beta = DVector::from_row_slice(&beta);
    let tb = &t * &beta;
    let bias = tb.dot(&(&g_rho * &tb));
    let var = sigma2 / n * (&g_rho * &wm * gamma(r) * &wm).trace();
    Ok(bias + var)
}

/// Mean squared error of the joint LS estimate of `β₁` in the
/// two-variable model with standardized predictors.
pub fn example1_ls_mse(sigma2: f64, n: f64, r: f64) -> f64 {
    sigma2 / ((1.0 - r * r) * n)
}

/// Mean squared error of `(1/n) Σ xᵢ₁yᵢ`, which is biased by `rβ₂`.
pub fn example1_split_mse(beta2: f64, sigma2: f64, n: f64, r: f64) -> f64 {
    r * r * beta2 * beta2 + sigma2 / n
}

/// The `|β₂|` at which the two mean squared errors coincide, by bisection
/// on their difference.
pub fn example1_crossover(sigma2: f64, n: f64, r: f64) -> Result<f64> {
    if !(r.abs() < 1.0 && r != 0.0) || !(sigma2 > 0.0 && n > 0.0) {
        return Err(Error::param("crossover needs 0 < |r| < 1, sigma2 > 0 and n > 0"));
    }
    let diff = |b: f64| example1_split_mse(b, sigma2, n, r) - example1_ls_mse(sigma2, n, r);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while diff(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if diff(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two-variable scenario parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedPoint {
    pub beta: [f64; 2],
    pub sigma2: f64,
    pub n: f64,
    pub r: f64,
    pub rho: f64,
}

impl ClosedPoint {
    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        match (s.d(), s.spec.r(), s.spec.rho()) {
            (2, Some(r), Some(rho)) => Ok(Self {
                beta: [s.beta1, s.beta2],
                sigma2: s.sigma2(),
                n: s.n as f64,
                r,
                rho,
            }),
            _ => Err(Error::param(
                "closed forms need d = 2 with an equicorrelation specification",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedOptimum {
    pub value: f64,
    pub tuning: Tuning,
}

/// Gradient and Hessian of a quadratic `f` on `R²` recovered from its values.
fn quadratic_model(f: &dyn Fn([f64; 2]) -> Result<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let c0 = f([0.0, 0.0])?;
    let e = [f([1.0, 0.0])?, f([0.0, 1.0])?];
    let e2 = [f([2.0, 0.0])?, f([0.0, 2.0])?];
    let both = f([1.0, 1.0])?;
    let mut h = DMatrix::zeros(2, 2);
    let mut g = DVector::zeros(2);
    for i in 0..2 {
        h[(i, i)] = e2[i] - 2.0 * e[i] + c0;
        g[i] = e[i] - c0 - 0.5 * h[(i, i)];
    }
    h[(0, 1)] = both - e[0] - e[1] + c0;
    h[(1, 0)] = h[(0, 1)];
    Ok((h, g))
}

/// Minimizes a convex quadratic in `w` over `[0, 1]²`.
fn minimize_weights(f: &dyn Fn([f64; 2]) -> Result<f64>) -> Result<([f64; 2], f64)> {
    let (h, g) = quadratic_model(f)?;
    let sol = minimize_box_qp(&h, &g, &[0.0, 0.0], &[1.0, 1.0])?;
    let w = [sol.x[0], sol.x[1]];
    Ok((w, f(w)?))
}

fn golden_section(f: &dyn Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Minimum closed-form MSPE of `method` over its tuning parameters.
///
/// Ridge searches `ridge_lambdas` and refines the best point by golden
/// section in `log λ` between its grid neighbours. Garrote and split
/// weights are minimized exactly over `[0, 1]²`. Split is adaptive: the
/// better of the best shrunken split and the best garrote.
pub fn minimize_closed(method: MspeMethod, p: &ClosedPoint, ridge_lambdas: &[f64]) -> Result<ClosedOptimum> {
    let ClosedPoint {
        beta,
        sigma2,
        n,
        r,
        rho,
    } = *p;
    match method {
        MspeMethod::Ls => Ok(ClosedOptimum {
            value: mspe_ls_closed(sigma2, n, r, rho)?,
            tuning: Tuning::Ls,
        }),
        MspeMethod::Ridge => {
            if ridge_lambdas.is_empty() {
                return Err(Error::param("ridge needs a nonempty lambda grid"));
            }
            let f = |lambda: f64| mspe_ridge_closed(lambda, beta, sigma2, n, r, rho);
            let mut best = (ridge_lambdas[0], f(ridge_lambdas[0])?);
            let mut best_k = 0;
            for (k, &l) in ridge_lambdas.iter().enumerate().skip(1) {
                let v = f(l)?;
                if v < best.1 {
                    best = (l, v);
                    best_k = k;
                }
            }
            if ridge_lambdas.len() > 1 {
                let lo = ridge_lambdas[(best_k + 1).min(ridge_lambdas.len() - 1)];
                let hi = ridge_lambdas[best_k.saturating_sub(1)];
                let (lo, hi) = if lo < hi { (lo, hi) } else { (hi, lo) };
                let g = |t: f64| f(t.exp());
                let (t, v) = golden_section(&g, lo.ln(), hi.ln())?;
                if v < best.1 {
                    best = (t.exp(), v);
                }
            }
            Ok(ClosedOptimum {
                value: best.1,
                tuning: Tuning::Ridge { lambda: best.0 },
            })
        }
        MspeMethod::Garrote => {
            let f = |w: [f64; 2]| mspe_garrote_closed(w, beta, sigma2, n, r, rho);
            let (w, value) = minimize_weights(&f)?;
            Ok(ClosedOptimum {
                value,
                tuning: Tuning::Garrote { omega: w.to_vec() },
            })
        }
        MspeMethod::Split => {
            let garrote = minimize_closed(MspeMethod::Garrote, p, ridge_lambdas)?;
            let f = |w: [f64; 2]| mspe_split2_closed(w, beta, sigma2, n, r, rho);
            let (w, value) = minimize_weights(&f)?;
            if value < garrote.value {
                Ok(ClosedOptimum {
                    value,
                    tuning: Tuning::Split {
                        partition: Partition::singletons(2),
                        weights: Some(w.to_vec()),
                    },
                })
            } else {
                Ok(garrote)
            }
        }
        other => Err(Error::param(format!("no closed form for method `{other}`"))),
    }
}
