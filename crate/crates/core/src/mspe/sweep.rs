//! Minimum-MSPE curves over a grid of `β₂` values.

use super::closed::{minimize_closed, ClosedPoint};
use super::monte_carlo::{draw_sample, min_g, McProblem};
use super::{MspeMethod, MspeRecord, Scenario, TuningGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRequest {
    /// Everything but `beta2` and `snr`, which come from the grids below.
    pub template: Scenario,
    pub beta2: Vec<f64>,
    pub snr: Vec<f64>,
    pub methods: Vec<MspeMethod>,
    pub grid: TuningGrid,
    /// Use the exact two-variable curves where they exist.
    pub closed_form: bool,
}

impl SweepRequest {
    fn uses_closed_form(&self, method: MspeMethod) -> bool {
        self.closed_form && self.template.d() == 2 && method.has_closed_form()
    }
}

/// One record per `(snr, method, β₂)`, in that nesting order. All Monte
/// Carlo records share one sample, drawn once from the template's seed.
pub fn sweep_curve(req: &SweepRequest) -> Result<Vec<MspeRecord>> {
    if req.beta2.is_empty() || req.snr.is_empty() || req.methods.is_empty() {
        return Err(Error::param("beta2 grid, snr list and method list must be nonempty"));
    }
    req.grid.validate()?;
    for &snr in &req.snr {
        for &b2 in &req.beta2 {
            req.template.with_point(b2, snr).validate()?;
        }
    }
    let t = &req.template;
    let sample = if req.methods.iter().any(|&m| !req.uses_closed_form(m)) {
        Some(draw_sample(t.n, &t.spec, t.replicates, t.test_points, t.seed)?)
    } else {
        None
    };

    let mut out = Vec::with_capacity(req.snr.len() * req.methods.len() * req.beta2.len());
    for &snr in &req.snr {
        for &method in &req.methods {
            for &b2 in &req.beta2 {
                let scenario = t.with_point(b2, snr);
                let record = match &sample {
                    Some(sample) if !req.uses_closed_form(method) => {
                        let problem = McProblem::new(sample, &scenario)?;
                        min_g(&problem, method, &req.grid, &scenario)?
                    }
                    _ => closed_record(method, &scenario, &req.grid)?,
                };
                out.push(record);
            }
        }
    }
    Ok(out)
}

fn closed_record(method: MspeMethod, scenario: &Scenario, grid: &TuningGrid) -> Result<MspeRecord> {
    let point = ClosedPoint::from_scenario(scenario)?;
    let opt = minimize_closed(method, &point, &grid.ridge_lambdas(scenario.n))?;
    Ok(MspeRecord {
        method,
        beta2: scenario.beta2,
        snr: scenario.snr,
        r: point.r,
        rho: point.rho,
        sigma2: point.sigma2,
        mspe: opt.value + point.sigma2,
        mspe_minus_sigma2: opt.value,
        se: 0.0,
        se_replicate: 0.0,
        argmin: opt.tuning.to_string(),
        fingerprint: None,
    })
}
