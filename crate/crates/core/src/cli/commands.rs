use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::model::{derive_stream, standardize};
use crate::mspe::{sweep_curve, MspeRecord};
use crate::partitions::{count_splits, count_splits_with_leftout};
use crate::splitreg::{aggregate, fit_splitreg, fit_splitreg_stacked, objective, SplitRegConfig};
use crate::targetcov::{generate, TargetCovRequest};

pub const CURVE_HEADER: &str = "method,beta2,snr,r,rho,mspe,mspe_minus_sigma2,se,argmin_tuning";

/// Writes to `path` through a temporary file in the same directory, or to
/// stdout when no path is given.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    let Some(path) = path else {
        std::io::stdout().write_all(contents.as_bytes())?;
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn echo_header(out: &mut String, cfg: &RunConfig) {
    for line in cfg.echo() {
        let _ = writeln!(out, "# {line}");
    }
}

pub fn count(p: usize, groups: usize, leftout: bool) -> Result<String> {
    let c = if leftout {
        count_splits_with_leftout(p, groups)?
    } else {
        count_splits(p, groups)?
    };
    Ok(format!("{c}\n"))
}

/// One design with empirical covariance exactly `Γ_r`, drawn from the same
/// stream as replicate 0 of a Monte Carlo sample with this seed.
pub fn gen(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.spec();
    let x = generate(&TargetCovRequest {
        n: cfg.n,
        spec: &spec,
        stream: derive_stream(cfg.seed, 0, "design"),
    })?;
    let mut out = String::new();
    echo_header(&mut out, cfg);
    let names: Vec<String> = (1..=cfg.d).map(|j| format!("x{j}")).collect();
    let _ = writeln!(out, "{}", names.join(","));
    for row in x.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    Ok(out)
}

pub fn curves(cfg: &RunConfig) -> Result<Vec<MspeRecord>> {
    sweep_curve(&cfg.sweep_request())
}

pub fn format_curves(cfg: &RunConfig, records: &[MspeRecord]) -> String {
    let mut out = String::new();
    echo_header(&mut out, cfg);
    let _ = writeln!(out, "{CURVE_HEADER}");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.method, r.beta2, r.snr, r.r, r.rho, r.mspe, r.mspe_minus_sigma2, r.se, r.argmin
        );
    }
    out
}

/// Numeric CSV with the response in the last column. A leading header
/// line and `#` comment lines are skipped.
pub fn read_xy(path: &Path) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let fail = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut seen_content = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => {
                if let Some(first) = rows.first() {
                    if first.len() != v.len() {
                        return Err(fail(idx + 1, format!("expected {} fields, found {}", first.len(), v.len())));
                    }
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(fail(idx + 1, "non-finite value".into()));
                }
                rows.push(v);
            }
            Err(_) if !seen_content => {}
            Err(e) => return Err(fail(idx + 1, e.to_string())),
        }
        seen_content = true;
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols < 2 {
        return Err(fail(0, "need at least one predictor column and a response column".into()));
    }
    let d = cols - 1;
    let x = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    let y = DVector::from_fn(rows.len(), |i, _| rows[i][d]);
    Ok((x, y))
}

#[derive(Debug, Clone)]
pub struct SplitRegFitArgs {
    pub data: PathBuf,
    pub config: SplitRegConfig,
    pub stacking: bool,
}

/// Fits SplitReg on standardized predictors. Coefficients are reported on
/// the standardized scale, one row per model and one for the aggregate.
pub fn splitreg_fit(args: &SplitRegFitArgs) -> Result<String> {
    let (raw, y) = read_xy(&args.data)?;
    let (ds, _) = standardize(&raw, &y)?;
    let cfg = &args.config;
    let fit = if args.stacking {
        fit_splitreg_stacked(&ds, cfg)?
    } else {
        fit_splitreg(&ds, cfg, None)?
    };
    let weights = fit.aggregation.weights(fit.betas.len());
    let mut out = String::new();
    let _ = writeln!(out, "# groups = {}", cfg.groups);
    let _ = writeln!(out, "# lambda_s = {}", cfg.lambda_s);
    let _ = writeln!(out, "# alpha = {}", cfg.alpha);
    let _ = writeln!(out, "# lambda_d = {}", cfg.lambda_d);
    let _ = writeln!(out, "# tolerance = {}", cfg.tolerance);
    let _ = writeln!(out, "# max_sweeps = {}", cfg.max_sweeps);
    let _ = writeln!(out, "# aggregation = {}", if args.stacking { "stacking" } else { "uniform" });
    let _ = writeln!(out, "# sweeps = {}", fit.sweeps);
    let _ = writeln!(out, "# objective = {}", objective(&ds, &fit.betas, cfg));
    let names: Vec<String> = (1..=ds.d()).map(|j| format!("x{j}")).collect();
    let _ = writeln!(out, "model,weight,{}", names.join(","));
    let row = |v: &DVector<f64>| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
    for (g, (beta, w)) in fit.betas.iter().zip(&weights).enumerate() {
        let _ = writeln!(out, "{},{},{}", g + 1, w, row(beta));
    }
    let _ = writeln!(out, "aggregate,{},{}", weights.iter().sum::<f64>(), row(&aggregate(&fit)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_output() {
        assert_eq!(count(4, 2, false).unwrap(), "7\n");
        assert_eq!(count(15, 3, false).unwrap(), "2375101\n");
        assert_eq!(count(4, 2, true).unwrap(), "25\n");
        assert!(count(2, 3, false).is_err());
    }

    #[test]
    fn gen_is_exactly_correlated() {
        let cfg = RunConfig::parse("n = 12\nd = 3\nr = 0.6\nrho = 0.2\nbeta2 = 0\nseed = 4\n").unwrap();
        let text = gen(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        // append a dummy response so the reader accepts it
        let with_y: String = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| format!("{l},0\n"))
            .collect();
        std::fs::write(&path, with_y).unwrap();
        let (x, _) = read_xy(&path).unwrap();
        assert_eq!(x.shape(), (12, 3));
        let cov = crate::targetcov::empirical_covariance(&x);
        let target = crate::model::equicorrelation_matrix(3, 0.6);
        assert!((cov - target).abs().max() < 1e-10);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        std::fs::write(&path, "old").unwrap();
        write_output(Some(&path), "new\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "new\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn read_xy_rejects_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "x1,x2,y\n1,2,3\n4,5\n").unwrap();
        assert!(matches!(read_xy(&path), Err(Error::Parse { .. })));
    }
}
