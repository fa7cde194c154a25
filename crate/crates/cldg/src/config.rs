//! Flat `key=value` run configuration.
//!
//! One pair per line; `#` starts a comment. Keys that accept several values
//! (`theta`, `k`, `n_list`, `snapshot_times`, `projection`) take a comma list.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use cldg_core::{InitialData, ProjectionKind, StepperConfig};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    InvalidValue { line: usize, key: String, message: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("`{key}` out of range: {message}")]
    Range { key: &'static str, message: String },
    #[error("{0}")]
    Conflict(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Soliton,
    DoubleSoliton,
    Gaussian,
    Converge,
    ProjectStudy,
    ConserveCheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Soliton => "soliton",
            Experiment::DoubleSoliton => "double_soliton",
            Experiment::Gaussian => "gaussian",
            Experiment::Converge => "converge",
            Experiment::ProjectStudy => "project_study",
            Experiment::ConserveCheck => "conserve_check",
        }
    }

    /// Experiments that evolve a single trajectory.
    pub fn is_trajectory(self) -> bool {
        !matches!(self, Experiment::Converge | Experiment::ProjectStudy)
    }

    fn default_domain(self) -> (f64, f64) {
        match self {
            Experiment::Soliton | Experiment::DoubleSoliton | Experiment::ConserveCheck => (-25.0, 25.0),
            Experiment::Gaussian | Experiment::Converge => (-30.0, 30.0),
            Experiment::ProjectStudy => (0.0, 1.0),
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "soliton" => Experiment::Soliton,
            "double_soliton" => Experiment::DoubleSoliton,
            "gaussian" => Experiment::Gaussian,
            "converge" => Experiment::Converge,
            "project_study" => Experiment::ProjectStudy,
            "conserve_check" => Experiment::ConserveCheck,
            other => return Err(format!("unknown experiment `{other}`")),
        })
    }
}

/// Fully resolved configuration of one `cldg` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub domain: (f64, f64),
    /// Cell counts: one entry for trajectory runs, the refinement list for
    /// studies.
    pub n_list: Vec<usize>,
    pub k: Vec<usize>,
    pub theta: Vec<f64>,
    pub lambda: f64,
    pub tau: f64,
    pub t_final: f64,
    pub x0: f64,
    pub c1: f64,
    pub c2: f64,
    pub x1: f64,
    pub x2: f64,
    pub amplitude: f64,
    pub snapshot_times: Vec<f64>,
    pub output_dir: PathBuf,
    pub fp_tolerance: f64,
    pub max_iterations: usize,
    pub volume_points: Option<usize>,
    pub error_points: Option<usize>,
    pub initial_data: InitialData,
    pub projection: Vec<ProjectionKind>,
    pub drift_tolerance: f64,
}

const KEYS: &[&str] = &[
    "experiment",
    "domain",
    "n_cells",
    "h",
    "n_list",
    "k",
    "theta",
    "lambda",
    "tau",
    "T",
    "x0",
    "c1",
    "c2",
    "x1",
    "x2",
    "A",
    "snapshot_times",
    "output_dir",
    "fp_tolerance",
    "max_iterations",
    "volume_points",
    "error_points",
    "initial_data",
    "projection",
    "drift_tolerance",
];

/// Desk-scale defaults of the convergence study.
pub const DESK_TAU: f64 = 1e-4;
pub const DESK_T: f64 = 0.5;
/// Long-run accuracy-study scale selected by `--paper-scale`.
pub const REFERENCE_TAU: f64 = 1e-5;
pub const REFERENCE_T: f64 = 1.0;

struct Entry {
    line: usize,
    value: String,
}

struct Raw(BTreeMap<String, Entry>);

impl Raw {
    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.0.remove(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| ConfigError::InvalidValue {
                line: e.line,
                key: key.to_string(),
                message: err.to_string(),
            }),
        }
    }

    fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.0.remove(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(|item| {
                    item.trim().parse::<T>().map_err(|err| ConfigError::InvalidValue {
                        line: e.line,
                        key: key.to_string(),
                        message: format!("`{}`: {err}", item.trim()),
                    })
                })
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }
}

fn parse_initial_data(s: &str) -> Result<InitialData, String> {
    match s {
        "l2" | "l2_projection" => Ok(InitialData::L2Projection),
        "generalized_p" | "P" => Ok(InitialData::GeneralizedP),
        other => Err(format!("expected l2_projection or generalized_p, got `{other}`")),
    }
}

fn parse_projection(s: &str) -> Result<ProjectionKind, String> {
    match s {
        "P" => Ok(ProjectionKind::P),
        "Q" => Ok(ProjectionKind::Q),
        "Q_unmirrored" => Ok(ProjectionKind::QUnmirrored),
        other => Err(format!("expected P, Q or Q_unmirrored, got `{other}`")),
    }
}

pub fn projection_name(kind: ProjectionKind) -> &'static str {
    match kind {
        ProjectionKind::P => "P",
        ProjectionKind::Q => "Q",
        ProjectionKind::QUnmirrored => "Q_unmirrored",
    }
}

fn initial_data_name(d: InitialData) -> &'static str {
    match d {
        InitialData::L2Projection => "l2_projection",
        InitialData::GeneralizedP => "generalized_p",
    }
}

impl RunConfig {
    /// Parse and validate. `forced` replaces (or supplies) the `experiment`
    /// key, as the `converge` and `project-study` subcommands do.
    pub fn parse(text: &str, forced: Option<Experiment>) -> Result<Self, ConfigError> {
        let mut raw = BTreeMap::new();
        for (idx, full) in text.lines().enumerate() {
            let line = idx + 1;
            let content = full.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected `key=value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey { line, key: key.to_string() });
            }
            if value.is_empty() {
                return Err(ConfigError::InvalidValue { line, key: key.to_string(), message: "empty value".into() });
            }
            if raw.insert(key.to_string(), Entry { line, value: value.to_string() }).is_some() {
                return Err(ConfigError::DuplicateKey { line, key: key.to_string() });
            }
        }
        let mut raw = Raw(raw);

        let experiment = match (forced, raw.take::<Experiment>("experiment")?) {
            (Some(f), _) => f,
            (None, Some(e)) => e,
            (None, None) => return Err(ConfigError::Missing("experiment")),
        };

        let domain = match raw.take_list::<f64>("domain")? {
            None => experiment.default_domain(),
            Some(v) if v.len() == 2 => (v[0], v[1]),
            Some(_) => return Err(ConfigError::Range { key: "domain", message: "expected `a,b`".into() }),
        };
        if !(domain.0 < domain.1) || !domain.0.is_finite() || !domain.1.is_finite() {
            return Err(ConfigError::Range { key: "domain", message: format!("need a < b, got {},{}", domain.0, domain.1) });
        }
        let length = domain.1 - domain.0;

        let n_cells = raw.take::<usize>("n_cells")?;
        let h = raw.take::<f64>("h")?;
        let n_list_key = raw.take_list::<usize>("n_list")?;
        let n_list = if experiment.is_trajectory() {
            if n_list_key.is_some() {
                return Err(ConfigError::Conflict(format!("`n_list` is only used by studies, not `{}`", experiment.name())));
            }
            match (n_cells, h) {
                (Some(_), Some(_)) => return Err(ConfigError::Conflict("give either `n_cells` or `h`, not both".into())),
                (Some(n), None) => vec![n],
                (None, Some(h)) => vec![cells_for_width(length, h)?],
                (None, None) => return Err(ConfigError::Missing("n_cells")),
            }
        } else {
            if n_cells.is_some() || h.is_some() {
                return Err(ConfigError::Conflict("studies take `n_list`, not `n_cells` or `h`".into()));
            }
            match n_list_key {
                Some(list) => list,
                None if experiment == Experiment::Converge => vec![60, 120, 240],
                None => vec![16, 32, 64],
            }
        };
        if n_list.iter().any(|&n| n < 2) {
            return Err(ConfigError::Range { key: "n_cells", message: "need at least two cells".into() });
        }
        if n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError::Range { key: "n_list", message: "must be strictly increasing".into() });
        }

        let k = raw.take_list::<usize>("k")?.unwrap_or_else(|| vec![2]);
        if k.iter().any(|&k| k == 0 || k > 10) {
            return Err(ConfigError::Range { key: "k", message: "degree must be in 1..=10".into() });
        }
        let theta = raw.take_list::<f64>("theta")?.unwrap_or_else(|| vec![1.0]);
        if let Some(t) = theta.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(ConfigError::Range { key: "theta", message: format!("{t} is outside [0, 1]") });
        }
        if experiment.is_trajectory() && (k.len() != 1 || theta.len() != 1) {
            return Err(ConfigError::Conflict("trajectory runs take a single `k` and `theta`".into()));
        }

        let lambda = raw.take::<f64>("lambda")?.unwrap_or(2.0);
        let (tau, t_final) = match experiment {
            Experiment::Converge => (raw.take("tau")?.unwrap_or(DESK_TAU), raw.take("T")?.unwrap_or(DESK_T)),
            Experiment::ProjectStudy => (raw.take("tau")?.unwrap_or(f64::NAN), raw.take("T")?.unwrap_or(f64::NAN)),
            _ => (
                raw.take::<f64>("tau")?.ok_or(ConfigError::Missing("tau"))?,
                raw.take::<f64>("T")?.ok_or(ConfigError::Missing("T"))?,
            ),
        };
        if experiment != Experiment::ProjectStudy {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(ConfigError::Range { key: "tau", message: format!("must be positive, got {tau}") });
            }
            if !(t_final > 0.0 && t_final.is_finite()) {
                return Err(ConfigError::Range { key: "T", message: format!("must be positive, got {t_final}") });
            }
        }

        let snapshot_times = raw.take_list::<f64>("snapshot_times")?.unwrap_or_default();
        if snapshot_times.iter().any(|&t| !(t >= 0.0) || t > t_final) {
            return Err(ConfigError::Range { key: "snapshot_times", message: "times must lie in [0, T]".into() });
        }
        let fp_tolerance = raw.take("fp_tolerance")?.unwrap_or(StepperConfig::DEFAULT_FP_TOLERANCE);
        if !(fp_tolerance > 0.0) {
            return Err(ConfigError::Range { key: "fp_tolerance", message: "must be positive".into() });
        }
        let max_iterations = raw.take("max_iterations")?.unwrap_or(StepperConfig::DEFAULT_MAX_ITERATIONS);
        if max_iterations == 0 {
            return Err(ConfigError::Range { key: "max_iterations", message: "must be positive".into() });
        }
        let volume_points = raw.take::<usize>("volume_points")?;
        let error_points = raw.take::<usize>("error_points")?;
        let max_k = *k.iter().max().unwrap_or(&1);
        if let Some(v) = volume_points {
            if v == 0 || v > cldg_core::basis::MAX_GAUSS_POINTS {
                return Err(ConfigError::Range { key: "volume_points", message: format!("must be in 1..=64, got {v}") });
            }
        }
        if let Some(e) = error_points {
            if e < max_k + 1 || e > cldg_core::basis::MAX_GAUSS_POINTS {
                return Err(ConfigError::Range { key: "error_points", message: format!("must be in k+1..=64, got {e}") });
            }
        }
        let initial_data = match raw.0.remove("initial_data") {
            None => InitialData::L2Projection,
            Some(e) => parse_initial_data(&e.value).map_err(|message| ConfigError::InvalidValue {
                line: e.line,
                key: "initial_data".into(),
                message,
            })?,
        };
        let projection = match raw.0.remove("projection") {
            None => vec![ProjectionKind::P, ProjectionKind::Q],
            Some(e) => e
                .value
                .split(',')
                .map(|s| parse_projection(s.trim()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|message| ConfigError::InvalidValue { line: e.line, key: "projection".into(), message })?,
        };
        let drift_tolerance = raw.take("drift_tolerance")?.unwrap_or(1e-10);

        let cfg = RunConfig {
            experiment,
            domain,
            n_list,
            k,
            theta,
            lambda,
            tau,
            t_final,
            x0: raw.take("x0")?.unwrap_or(10.0),
            c1: raw.take("c1")?.unwrap_or(1.0),
            c2: raw.take("c2")?.unwrap_or(-1.0),
            x1: raw.take("x1")?.unwrap_or(-10.0),
            x2: raw.take("x2")?.unwrap_or(10.0),
            amplitude: raw.take("A")?.unwrap_or(2.0),
            snapshot_times,
            output_dir: raw.take::<String>("output_dir")?.map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
            fp_tolerance,
            max_iterations,
            volume_points,
            error_points,
            initial_data,
            projection,
            drift_tolerance,
        };
        debug_assert!(raw.0.is_empty(), "unconsumed keys: {:?}", raw.0.keys().collect::<Vec<_>>());
        Ok(cfg)
    }

    /// Switch to the long reference scale (`tau = 1e-5`, `T = 1`) for
    /// convergence studies; for the qualitative experiments, run to `T = 5`.
    pub fn apply_paper_scale(&mut self) {
        match self.experiment {
            Experiment::Converge => {
                self.tau = REFERENCE_TAU;
                self.t_final = REFERENCE_T;
            }
            Experiment::DoubleSoliton | Experiment::Gaussian => self.t_final = self.t_final.max(5.0),
            _ => {}
        }
    }

    pub fn stepper(&self) -> StepperConfig {
        StepperConfig {
            tau: self.tau,
            fp_tolerance: self.fp_tolerance,
            max_iterations: self.max_iterations,
            initial_data: self.initial_data,
        }
    }

    /// Every resolved setting on one line, for CSV headers.
    pub fn stamp(&self) -> String {
        fn list<T: fmt::Display>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        let mut parts = vec![
            format!("experiment={}", self.experiment.name()),
            format!("domain={},{}", self.domain.0, self.domain.1),
            format!("n_list={}", list(&self.n_list)),
            format!("k={}", list(&self.k)),
            format!("theta={}", list(&self.theta)),
            format!("lambda={}", self.lambda),
        ];
        if self.experiment != Experiment::ProjectStudy {
            parts.push(format!("tau={}", self.tau));
            parts.push(format!("T={}", self.t_final));
            parts.push(format!("fp_tolerance={}", self.fp_tolerance));
            parts.push(format!("max_iterations={}", self.max_iterations));
            parts.push(format!("initial_data={}", initial_data_name(self.initial_data)));
        }
        match self.experiment {
            Experiment::Soliton | Experiment::ConserveCheck | Experiment::Converge => {
                parts.push(format!("x0={}", self.x0))
            }
            Experiment::DoubleSoliton => {
                parts.push(format!("c1={} c2={} x1={} x2={}", self.c1, self.c2, self.x1, self.x2))
            }
            Experiment::Gaussian => parts.push(format!("A={}", self.amplitude)),
            Experiment::ProjectStudy => {
                parts.push(format!("projection={}", self.projection.iter().map(|p| projection_name(*p)).collect::<Vec<_>>().join(",")))
            }
        }
        if !self.snapshot_times.is_empty() {
            parts.push(format!("snapshot_times={}", list(&self.snapshot_times)));
        }
        if let Some(v) = self.volume_points {
            parts.push(format!("volume_points={v}"));
        }
        if let Some(e) = self.error_points {
            parts.push(format!("error_points={e}"));
        }
        if self.experiment.is_trajectory() {
            parts.push(format!("drift_tolerance={}", self.drift_tolerance));
        }
        parts.join(" ")
    }
}

fn cells_for_width(length: f64, h: f64) -> Result<usize, ConfigError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(ConfigError::Range { key: "h", message: format!("must be positive, got {h}") });
    }
    let n = (length / h).round();
    if n < 1.0 || ((n * h - length).abs() > 1e-9 * length) {
        return Err(ConfigError::Range { key: "h", message: format!("{h} does not divide the domain length {length}") });
    }
    Ok(n as usize)
}
