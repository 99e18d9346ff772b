//! Small convex quadratic programs: box-constrained minimization by exact
//! face enumeration, and nonnegative least squares by the Lawson–Hanson
//! active-set method.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Face enumeration visits up to `3^d` faces; beyond this it is refused.
pub const BOX_QP_MAX_DIM: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub objective: f64,
}

/// `½ x'Hx + g'x`.
pub fn quadratic_value(h: &DMatrix<f64>, g: &DVector<f64>, x: &DVector<f64>) -> f64 {
    0.5 * x.dot(&(h * x)) + g.dot(x)
}

fn solve_restricted(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(chol) = h.clone().cholesky() {
        return Some(chol.solve(rhs));
    }
    // singular restricted Hessian: accept a least-squares solution only if it
    // is actually stationary
    let x = h.clone().svd(true, true).solve(rhs, 1e-13).ok()?;
    let resid = (h * &x - rhs).amax();
    (resid <= 1e-9 * rhs.amax().max(1.0)).then_some(x)
}

/// Minimizes `½ x'Hx + g'x` over `lower ≤ x ≤ upper` for positive
/// semidefinite `H`. `upper` entries may be `+∞`.
///
/// Every face of the box (each coordinate free, at its lower bound, or at
/// its upper bound) is visited; on each face the stationarity system is
/// solved and feasible candidates are compared. Ties keep the first face in
/// enumeration order. The unconstrained minimizer is tried first and
/// returned directly when feasible.
pub fn minimize_box_qp(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    lower: &[f64],
    upper: &[f64],
) -> Result<QpSolution> {
    let d = g.len();
    if h.shape() != (d, d) || lower.len() != d || upper.len() != d {
        return Err(Error::DimensionMismatch("box QP dimensions disagree".into()));
    }
    if let Some(j) = (0..d).find(|&j| !(lower[j].is_finite() && lower[j] <= upper[j])) {
        return Err(Error::param(format!("invalid bounds at coordinate {j}")));
    }
    if d > BOX_QP_MAX_DIM {
        return Err(Error::param(format!(
            "box QP face enumeration supports at most {BOX_QP_MAX_DIM} variables, got {d}"
        )));
    }
    let feas_tol = |j: usize, v: f64| {
        let span = if upper[j].is_finite() { upper[j] - lower[j] } else { v.abs() };
        1e-12 * span.max(1.0)
    };
    let feasible = |x: &DVector<f64>| {
        (0..d).all(|j| x[j] >= lower[j] - feas_tol(j, x[j]) && x[j] <= upper[j] + feas_tol(j, x[j]))
    };
    let clamp = |mut x: DVector<f64>| {
        for j in 0..d {
            x[j] = x[j].clamp(lower[j], upper[j]);
        }
        x
    };

    if let Some(x) = solve_restricted(h, &(-g)) {
        if feasible(&x) {
            let x = clamp(x);
            let objective = quadratic_value(h, g, &x);
            return Ok(QpSolution { x, objective });
        }
    }

    let mut best: Option<QpSolution> = None;
    let mut state = vec![0u8; d]; // 0 free, 1 lower, 2 upper
    loop {
        let free: Vec<usize> = (0..d).filter(|&j| state[j] == 0).collect();
        let mut x = DVector::zeros(d);
        for j in 0..d {
            match state[j] {
                1 => x[j] = lower[j],
                2 => x[j] = upper[j],
                _ => {}
            }
        }
        let candidate = if free.is_empty() {
            Some(x)
        } else {
            let h_ff = h.select_rows(free.iter()).select_columns(free.iter());
            let mut rhs = DVector::from_iterator(free.len(), free.iter().map(|&j| -g[j]));
            for (a, &i) in free.iter().enumerate() {
                for j in 0..d {
                    if state[j] != 0 {
                        rhs[a] -= h[(i, j)] * x[j];
                    }
                }
            }
            solve_restricted(&h_ff, &rhs).and_then(|xf| {
                for (a, &j) in free.iter().enumerate() {
                    x[j] = xf[a];
                }
                feasible(&x).then_some(x)
            })
        };
        if let Some(x) = candidate {
            let x = clamp(x);
            let objective = quadratic_value(h, g, &x);
            if best.as_ref().is_none_or(|b| objective < b.objective) {
                best = Some(QpSolution { x, objective });
            }
        }
        // advance the mixed-radix counter, skipping infinite upper bounds
        let mut k = 0;
        loop {
            if k == d {
                return best.ok_or_else(|| Error::param("box QP found no feasible face"));
            }
            let max_state = if upper[k].is_finite() { 2 } else { 1 };
            if state[k] < max_state {
                state[k] += 1;
                break;
            }
            state[k] = 0;
            k += 1;
        }
    }
}

/// KKT tolerance for the active-set NNLS.
pub const NNLS_TOL: f64 = 1e-10;

/// Nonnegative least squares `min ‖b − A x‖²` subject to `x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} rows but b has length {}",
            a.nrows(),
            b.len()
        )));
    }
    nnls_gram(&a.tr_mul(a), &a.tr_mul(b))
}

/// Lawson–Hanson active set on the normal equations: minimizes
/// `½ x'Qx − c'x` subject to `x ≥ 0`, with `Q = A'A`, `c = A'b`.
/// Converged when every inactive coordinate has gradient component
/// `(c − Qx)ⱼ ≤ 1e-10` (scaled by `max(1, ‖c‖∞)`).
pub fn nnls_gram(q: &DMatrix<f64>, c: &DVector<f64>) -> Result<DVector<f64>> {
    let k = c.len();
    if q.shape() != (k, k) {
        return Err(Error::DimensionMismatch("NNLS Gram matrix shape".into()));
    }
    let tol = NNLS_TOL * c.amax().max(1.0);
    let mut x = DVector::<f64>::zeros(k);
    let mut passive = vec![false; k];
    let mut excluded = vec![false; k];
    let max_outer = 10 * k + 10;

    for _ in 0..max_outer {
        let w = c - q * &x;
        let next = (0..k)
            .filter(|&j| !passive[j] && !excluded[j])
            .max_by(|&a, &b| w[a].total_cmp(&w[b]).then(b.cmp(&a)));
        let t = match next {
            Some(t) if w[t] > tol => t,
            _ => return Ok(x),
        };
        passive[t] = true;

        let mut inner = 0;
        loop {
            inner += 1;
            let p: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
            let q_pp = q.select_rows(p.iter()).select_columns(p.iter());
            let c_p = DVector::from_iterator(p.len(), p.iter().map(|&j| c[j]));
            let s_p = match solve_restricted(&q_pp, &c_p) {
                Some(s) => s,
                None => {
                    // dependent column: drop the newcomer for good
                    passive[t] = false;
                    excluded[t] = true;
                    break;
                }
            };
            if s_p.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (a, &j) in p.iter().enumerate() {
                    x[j] = s_p[a];
                }
                break;
            }
            let mut step = f64::INFINITY;
            for (a, &j) in p.iter().enumerate() {
                if s_p[a] <= 0.0 {
                    let denom = x[j] - s_p[a];
                    if denom > 0.0 {
                        step = step.min(x[j] / denom);
                    }
                }
            }
            if !step.is_finite() {
                step = 0.0;
            }
            for (a, &j) in p.iter().enumerate() {
                x[j] += step * (s_p[a] - x[j]);
            }
            let mut dropped = false;
            for &j in &p {
                if x[j] <= 1e-15 * x.amax().max(1.0) {
                    x[j] = 0.0;
                    passive[j] = false;
                    dropped = true;
                }
            }
            if !passive[t] && step == 0.0 {
                // the newcomer cannot enter with a positive value
                excluded[t] = true;
            }
            if !dropped || inner > 3 * k + 3 {
                break;
            }
        }
    }
    Err(Error::param("NNLS did not reach the KKT conditions"))
}
