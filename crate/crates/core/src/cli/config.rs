//! Run configuration: a flat `key = value` file with optional `[section]`
//! headers. `#` starts a comment. Lists are comma separated. Unknown
//! sections, unknown keys and repeated keys are errors that name the line.
//!
//! ```text
//! n = 10
//! d = 2
//! r = 0.9
//! rho = 0.1
//! beta2_range = -2, 2, 21
//! snr = 1, 3, 5
//! methods = ls, ridge, garrote, split
//!
//! [grid]
//! lambda_count = 50
//! ```

use std::collections::HashMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::linspace;
use crate::model::CorrelationSpec;
use crate::mspe::{MspeMethod, Scenario, SweepRequest, TuningGrid};
use crate::partitions::check_adaptive_cap;
use crate::qp::BOX_QP_MAX_DIM;

#[derive(Debug, Clone, PartialEq)]
pub enum Beta2Values {
    List(Vec<f64>),
    /// `min, max, count`, evenly spaced.
    Range(f64, f64, usize),
}

impl Beta2Values {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Beta2Values::List(v) => v.clone(),
            Beta2Values::Range(lo, hi, count) => linspace(*lo, *hi, *count),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub d: usize,
    pub beta1: f64,
    pub beta2: Beta2Values,
    pub lead: usize,
    pub snr: Vec<f64>,
    pub r: f64,
    pub rho: f64,
    pub replicates: usize,
    pub test_points: usize,
    pub seed: u64,
    pub methods: Vec<MspeMethod>,
    pub closed_form: bool,
    pub output: Option<PathBuf>,
    /// Worker threads; 0 uses every available core.
    pub jobs: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_count: usize,
    pub alpha: Vec<f64>,
    pub lambda_d_min: f64,
    pub lambda_d_max: f64,
    pub lambda_d_count: usize,
    pub max_groups: usize,
    pub enumeration_cap: u64,
    pub enet_tolerance: f64,
    pub enet_max_sweeps: usize,
    pub splitreg_groups: usize,
    pub splitreg_tolerance: f64,
    pub splitreg_max_sweeps: usize,
    lines: HashMap<String, usize>,
}

const TOP_KEYS: &[&str] = &[
    "n",
    "d",
    "beta1",
    "beta2",
    "beta2_range",
    "lead",
    "snr",
    "r",
    "rho",
    "replicates",
    "test_points",
    "seed",
    "methods",
    "closed_form",
    "output",
    "jobs",
];

const SECTIONS: &[(&str, &[&str])] = &[
    (
        "grid",
        &[
            "lambda_min",
            "lambda_max",
            "lambda_count",
            "alpha",
            "lambda_d_min",
            "lambda_d_max",
            "lambda_d_count",
        ],
    ),
    ("split", &["max_groups", "enumeration_cap"]),
    ("enet", &["tolerance", "max_sweeps"]),
    ("splitreg", &["groups", "tolerance", "max_sweeps"]),
];

struct Entry {
    line: usize,
    value: String,
}

fn parse_scalar<T: FromStr>(key: &str, e: &Entry) -> Result<T> {
    e.value
        .trim()
        .parse()
        .map_err(|_| Error::config(e.line, key, format!("cannot parse `{}`", e.value.trim())))
}

fn parse_list<T: FromStr>(key: &str, e: &Entry) -> Result<Vec<T>> {
    e.value
        .split(',')
        .map(|item| {
            item.trim()
                .parse()
                .map_err(|_| Error::config(e.line, key, format!("cannot parse list item `{}`", item.trim())))
        })
        .collect()
}

fn join<T: Display>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: HashMap<String, Entry> = HashMap::new();
        let mut section: Option<&str> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                section = Some(
                    SECTIONS
                        .iter()
                        .find(|(s, _)| *s == name)
                        .map(|(s, _)| *s)
                        .ok_or_else(|| Error::config(line, name, "unknown section"))?,
                );
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::config(line, content, "expected `key = value`"))?;
            let key = key.trim();
            let known = match section {
                None => TOP_KEYS.contains(&key),
                Some(s) => SECTIONS.iter().any(|(name, keys)| *name == s && keys.contains(&key)),
            };
            let full = match section {
                None => key.to_string(),
                Some(s) => format!("{s}.{key}"),
            };
            if !known {
                return Err(Error::config(line, full, "unknown key"));
            }
            if let Some(prev) = entries.get(&full) {
                return Err(Error::config(line, full, format!("already set on line {}", prev.line)));
            }
            entries.insert(
                full,
                Entry {
                    line,
                    value: value.trim().to_string(),
                },
            );
        }
        Self::from_entries(entries)
    }

    fn from_entries(entries: HashMap<String, Entry>) -> Result<Self> {
        let defaults = TuningGrid::default();
        let get = |k: &str| entries.get(k);
        macro_rules! scalar {
            ($key:expr, $default:expr) => {
                match get($key) {
                    Some(e) => parse_scalar($key, e)?,
                    None => $default,
                }
            };
        }
        macro_rules! list {
            ($key:expr, $default:expr) => {
                match get($key) {
                    Some(e) => parse_list($key, e)?,
                    None => $default,
                }
            };
        }
        let required = |k: &str| get(k).ok_or_else(|| Error::config(0, k, "required key is missing"));

        let d: usize = scalar!("d", 2);
        let beta2 = match (get("beta2"), get("beta2_range")) {
            (Some(_), Some(e)) => return Err(Error::config(e.line, "beta2_range", "conflicts with `beta2`")),
            (Some(e), None) => Beta2Values::List(parse_list("beta2", e)?),
            (None, Some(e)) => {
                let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
                let bad = || Error::config(e.line, "beta2_range", "expected `min, max, count`");
                if parts.len() != 3 {
                    return Err(bad());
                }
                Beta2Values::Range(
                    parts[0].parse().map_err(|_| bad())?,
                    parts[1].parse().map_err(|_| bad())?,
                    parts[2].parse().map_err(|_| bad())?,
                )
            }
            (None, None) => return Err(Error::config(0, "beta2", "set `beta2` or `beta2_range`")),
        };
        let methods = match get("methods") {
            Some(e) => e
                .value
                .split(',')
                .map(|m| {
                    m.trim()
                        .parse::<MspeMethod>()
                        .map_err(|err| Error::config(e.line, "methods", err.to_string()))
                })
                .collect::<Result<Vec<_>>>()?,
            None => vec![MspeMethod::Ls, MspeMethod::Ridge, MspeMethod::Garrote, MspeMethod::Split],
        };
        let cfg = RunConfig {
            n: scalar!("n", 10),
            d,
            beta1: scalar!("beta1", 1.0),
            beta2,
            lead: scalar!("lead", if d == 2 { 1 } else { 2 }),
            snr: list!("snr", vec![1.0]),
            r: parse_scalar("r", required("r")?)?,
            rho: parse_scalar("rho", required("rho")?)?,
            replicates: scalar!("replicates", 200),
            test_points: scalar!("test_points", 500),
            seed: scalar!("seed", 0),
            methods,
            closed_form: scalar!("closed_form", true),
            output: get("output").map(|e| PathBuf::from(e.value.trim())),
            jobs: scalar!("jobs", 0),
            lambda_min: scalar!("grid.lambda_min", 1e-4),
            lambda_max: scalar!("grid.lambda_max", 1e3),
            lambda_count: scalar!("grid.lambda_count", 50),
            alpha: list!("grid.alpha", defaults.alpha.clone()),
            lambda_d_min: scalar!("grid.lambda_d_min", 1e-3),
            lambda_d_max: scalar!("grid.lambda_d_max", 1e2),
            lambda_d_count: scalar!("grid.lambda_d_count", 20),
            max_groups: scalar!("split.max_groups", defaults.max_groups),
            enumeration_cap: scalar!("split.enumeration_cap", defaults.enumeration_cap),
            enet_tolerance: scalar!("enet.tolerance", defaults.enet_tolerance),
            enet_max_sweeps: scalar!("enet.max_sweeps", defaults.enet_max_sweeps),
            splitreg_groups: scalar!("splitreg.groups", defaults.splitreg_groups),
            splitreg_tolerance: scalar!("splitreg.tolerance", defaults.splitreg_tolerance),
            splitreg_max_sweeps: scalar!("splitreg.max_sweeps", defaults.splitreg_max_sweeps),
            lines: entries.iter().map(|(k, e)| (k.clone(), e.line)).collect(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn fail(&self, key: &str, message: impl Into<String>) -> Error {
        Error::config(self.lines.get(key).copied().unwrap_or(0), key, message)
    }

    /// Checks every scenario and grid invariant before any computation.
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(self.fail("d", "need at least two variables"));
        }
        if self.n <= self.d {
            return Err(self.fail("n", format!("n = {} must exceed d = {}", self.n, self.d)));
        }
        if !(1..self.d).contains(&self.lead) {
            return Err(self.fail("lead", format!("need 1 <= lead < d = {}", self.d)));
        }
        if !self.beta1.is_finite() {
            return Err(self.fail("beta1", "must be finite"));
        }
        let beta2 = self.beta2.values();
        let beta2_key = if matches!(self.beta2, Beta2Values::List(_)) { "beta2" } else { "beta2_range" };
        if beta2.is_empty() || beta2.iter().any(|b| !b.is_finite()) {
            return Err(self.fail(beta2_key, "need at least one finite value"));
        }
        if self.snr.is_empty() || self.snr.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(self.fail("snr", "values must be positive and finite"));
        }
        if let Err(e) = CorrelationSpec::equicorrelation(self.d, self.rho, self.r) {
            let key = if self.lines.contains_key("r") && e.to_string().contains("r =") { "r" } else { "rho" };
            return Err(self.fail(key, e.to_string()));
        }
        if self.replicates == 0 {
            return Err(self.fail("replicates", "must be at least 1"));
        }
        if self.test_points == 0 {
            return Err(self.fail("test_points", "must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(self.fail("methods", "need at least one method"));
        }
        if !(self.lambda_min > 0.0 && self.lambda_min < self.lambda_max && self.lambda_max.is_finite()) {
            return Err(self.fail("grid.lambda_min", "need 0 < lambda_min < lambda_max < inf"));
        }
        if self.lambda_count < 2 {
            return Err(self.fail("grid.lambda_count", "need at least 2 grid points"));
        }
        if self.alpha.is_empty() || self.alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(self.fail("grid.alpha", "values must lie in [0, 1]"));
        }
        if self.lambda_d_count > 0
            && !(self.lambda_d_min > 0.0 && self.lambda_d_min < self.lambda_d_max && self.lambda_d_max.is_finite())
        {
            return Err(self.fail("grid.lambda_d_min", "need 0 < lambda_d_min < lambda_d_max < inf"));
        }
        if self.max_groups == 0 {
            return Err(self.fail("split.max_groups", "must be at least 1"));
        }
        if self.splitreg_groups == 0 {
            return Err(self.fail("splitreg.groups", "must be at least 1"));
        }
        for (key, tol) in [("enet.tolerance", self.enet_tolerance), ("splitreg.tolerance", self.splitreg_tolerance)] {
            if !(tol > 0.0) {
                return Err(self.fail(key, "must be positive"));
            }
        }
        for (key, sweeps) in [("enet.max_sweeps", self.enet_max_sweeps), ("splitreg.max_sweeps", self.splitreg_max_sweeps)] {
            if sweeps == 0 {
                return Err(self.fail(key, "must be at least 1"));
            }
        }
        let weighted_qp = [MspeMethod::Garrote, MspeMethod::Split];
        if self.d > BOX_QP_MAX_DIM && self.methods.iter().any(|m| weighted_qp.contains(m)) {
            return Err(self.fail(
                "methods",
                format!("garrote and split weights are optimized for d <= {BOX_QP_MAX_DIM}, got d = {}", self.d),
            ));
        }
        if self.methods.contains(&MspeMethod::Split) {
            check_adaptive_cap(self.d, self.max_groups.min(self.d), self.enumeration_cap)?;
        }
        for &snr in &self.snr {
            for &b2 in &beta2 {
                let s = self.scenario().with_point(b2, snr);
                s.validate().map_err(|e| self.fail(beta2_key, e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> CorrelationSpec {
        CorrelationSpec::equicorrelation(self.d, self.rho, self.r).expect("validated")
    }

    fn scenario(&self) -> Scenario {
        Scenario {
            n: self.n,
            spec: CorrelationSpec::equicorrelation(self.d, self.rho, self.r).expect("validated"),
            beta1: self.beta1,
            beta2: 0.0,
            lead: self.lead,
            snr: self.snr[0],
            replicates: self.replicates,
            test_points: self.test_points,
            seed: self.seed,
        }
    }

    pub fn grid(&self) -> TuningGrid {
        let mut grid = TuningGrid::from_ranges(
            self.lambda_min,
            self.lambda_max,
            self.lambda_count,
            self.alpha.clone(),
            self.lambda_d_min,
            self.lambda_d_max,
            self.lambda_d_count,
        );
        grid.max_groups = self.max_groups;
        grid.enumeration_cap = self.enumeration_cap;
        grid.splitreg_groups = self.splitreg_groups;
        grid.enet_tolerance = self.enet_tolerance;
        grid.enet_max_sweeps = self.enet_max_sweeps;
        grid.splitreg_tolerance = self.splitreg_tolerance;
        grid.splitreg_max_sweeps = self.splitreg_max_sweeps;
        grid
    }

    pub fn sweep_request(&self) -> SweepRequest {
        SweepRequest {
            template: self.scenario(),
            beta2: self.beta2.values(),
            snr: self.snr.clone(),
            methods: self.methods.clone(),
            grid: self.grid(),
            closed_form: self.closed_form,
        }
    }

    /// The effective configuration in the input syntax. `output` and `jobs`
    /// are left out: neither changes the results.
    pub fn echo(&self) -> Vec<String> {
        let beta2 = match &self.beta2 {
            Beta2Values::List(v) => format!("beta2 = {}", join(v)),
            Beta2Values::Range(lo, hi, c) => format!("beta2_range = {lo}, {hi}, {c}"),
        };
        let methods: Vec<&str> = self.methods.iter().map(|m| m.name()).collect();
        vec![
            format!("n = {}", self.n),
            format!("d = {}", self.d),
            format!("beta1 = {}", self.beta1),
            beta2,
            format!("lead = {}", self.lead),
            format!("snr = {}", join(&self.snr)),
            format!("r = {}", self.r),
            format!("rho = {}", self.rho),
            format!("replicates = {}", self.replicates),
            format!("test_points = {}", self.test_points),
            format!("seed = {}", self.seed),
            format!("methods = {}", methods.join(", ")),
            format!("closed_form = {}", self.closed_form),
            "[grid]".into(),
            format!("lambda_min = {}", self.lambda_min),
            format!("lambda_max = {}", self.lambda_max),
            format!("lambda_count = {}", self.lambda_count),
            format!("alpha = {}", join(&self.alpha)),
            format!("lambda_d_min = {}", self.lambda_d_min),
            format!("lambda_d_max = {}", self.lambda_d_max),
            format!("lambda_d_count = {}", self.lambda_d_count),
            "[split]".into(),
            format!("max_groups = {}", self.max_groups),
            format!("enumeration_cap = {}", self.enumeration_cap),
            "[enet]".into(),
            format!("tolerance = {}", self.enet_tolerance),
            format!("max_sweeps = {}", self.enet_max_sweeps),
            "[splitreg]".into(),
            format!("groups = {}", self.splitreg_groups),
            format!("tolerance = {}", self.splitreg_tolerance),
            format!("max_sweeps = {}", self.splitreg_max_sweeps),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "n = 10\nr = 0.9\nrho = 0.1\nbeta2_range = -2, 2, 5\n";

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::parse(BASIC).unwrap();
        assert_eq!(cfg.d, 2);
        assert_eq!(cfg.lead, 1);
        assert_eq!(cfg.beta2.values(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(cfg.grid(), TuningGrid::default());
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = format!("{BASIC}# comment\n\nreplicats = 4\n");
        match RunConfig::parse(&text) {
            Err(Error::Config { line, key, .. }) => {
                assert_eq!(line, 7);
                assert_eq!(key, "replicats");
            }
            other => panic!("{other:?}"),
        }
        let text = format!("{BASIC}[grid]\nmax_groups = 2\n");
        assert!(matches!(RunConfig::parse(&text), Err(Error::Config { line: 6, .. })));
        assert!(matches!(RunConfig::parse("[nope]\n"), Err(Error::Config { line: 1, .. })));
    }

    #[test]
    fn duplicate_and_conflicting_keys() {
        let text = format!("{BASIC}n = 12\n");
        assert!(matches!(RunConfig::parse(&text), Err(Error::Config { line: 5, .. })));
        let text = format!("{BASIC}beta2 = 0.5\n");
        assert!(matches!(RunConfig::parse(&text), Err(Error::Config { .. })));
    }

    #[test]
    fn invalid_values() {
        let bad = [
            "n = 2\nr = 0.5\nrho = 0.1\nbeta2 = 0\n",
            "r = 1.5\nrho = 0.1\nbeta2 = 0\n",
            "r = 0.5\nrho = 0.1\nbeta2 = 0\nsnr = 0\n",
            "r = 0.5\nrho = 0.1\nbeta2 = 0\nmethods = ls, lars\n",
            "r = 0.5\nrho = 0.1\nbeta2 = 0\n[grid]\nalpha = 0, 2\n",
            "r = 0.5\nrho = 0.1\nbeta2 = x\n",
            "r = 0.5\nbeta2 = 0\n",
        ];
        for text in bad {
            let err = RunConfig::parse(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}: {err}");
        }
    }

    #[test]
    fn oversized_searches_are_rejected_up_front() {
        let big = "n = 30\nd = 13\nr = 0.5\nrho = 0.1\nbeta2 = 0.5\nmethods = garrote\n";
        assert!(matches!(RunConfig::parse(big), Err(Error::Config { .. })));
        let capped = "n = 20\nd = 8\nr = 0.5\nrho = 0.1\nbeta2 = 0.5\nmethods = split\n[split]\nenumeration_cap = 100\n";
        let err = RunConfig::parse(capped).unwrap_err();
        assert!(matches!(err, Error::TooManySplits { .. }));
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn echo_round_trips() {
        let text = format!("{BASIC}methods = ls, splitreg\nseed = 9\njobs = 3\n[splitreg]\ngroups = 2\n");
        let cfg = RunConfig::parse(&text).unwrap();
        let echoed = cfg.echo().join("\n");
        assert!(!echoed.contains("jobs"));
        let again = RunConfig::parse(&echoed).unwrap();
        assert_eq!(again.sweep_request(), cfg.sweep_request());
    }
}
