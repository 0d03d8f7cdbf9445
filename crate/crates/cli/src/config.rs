//! Sectioned `key=value` task configuration.
//!
//! ```text
//! # comment
//! [model]  family=exp_alpha alpha=0.5 n=2
//! [minus]  family=hyperbolic n=2
//! [weight] kind=two_end
//! [task]   kind=pipeline
//! [time]   t_start=10 t_end=1000 t_steps=25 log_spaced=true
//! [output] dir=out format=csv
//! ```
//!
//! A line holds an optional `[section]` header followed by any number of
//! whitespace-separated `key=value` tokens. Keys are only valid in their
//! section; unknown keys and repeated keys are errors.

use heatlab_core::fmt_real;
use heatlab_core::profile::ProfileSpec;
use heatlab_core::solver::{BoundaryCondition, Spacing};
use std::fmt;
use std::path::Path;

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if let Some(k) = &self.key {
            write!(f, "`{k}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

fn at_line(line: usize, key: Option<&str>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: Some(line),
        key: key.map(str::to_string),
        message: message.into(),
    }
}

fn named(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: None,
        key: Some(key.to_string()),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Geometry,
    Iso,
    Fk,
    Bounds,
    Solve,
    Pipeline,
    Verify,
}

impl Task {
    pub const ALL: [Task; 7] = [
        Task::Geometry,
        Task::Iso,
        Task::Fk,
        Task::Bounds,
        Task::Solve,
        Task::Pipeline,
        Task::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Geometry => "geometry",
            Task::Iso => "iso",
            Task::Fk => "fk",
            Task::Bounds => "bounds",
            Task::Solve => "solve",
            Task::Pipeline => "pipeline",
            Task::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightKind {
    None,
    TwoEnd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridKeys {
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub nodes: Option<usize>,
    pub spacing: Spacing,
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeKeys {
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub t_steps: Option<usize>,
    pub log_spaced: bool,
}

impl TimeKeys {
    pub fn is_set(&self) -> bool {
        self.t_start.is_some()
    }

    /// The output times; a single time when only `t_start` is given.
    pub fn times(&self) -> Option<Vec<f64>> {
        let a = self.t_start?;
        let (b, n) = match (self.t_end, self.t_steps) {
            (Some(b), Some(n)) => (b, n),
            _ => return Some(vec![a]),
        };
        if n == 1 {
            return Some(vec![a]);
        }
        Some(
            (0..n)
                .map(|k| {
                    let s = k as f64 / (n - 1) as f64;
                    if k == n - 1 {
                        b
                    } else if self.log_spaced {
                        (a.ln() + (b.ln() - a.ln()) * s).exp()
                    } else {
                        a + (b - a) * s
                    }
                })
                .collect(),
        )
    }
}

/// Sample range of volumes (iso, fk).
#[derive(Clone, Debug, PartialEq)]
pub struct RangeKeys {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskConfig {
    pub model: ProfileSpec,
    /// Present for two-ended models; the join uses the model's cap radius.
    pub minus: Option<ProfileSpec>,
    /// `None` when the key is absent; the pipeline implies `two_end`.
    pub weight: Option<WeightKind>,
    pub task: Task,
    /// Initial delta position for `solve`.
    pub source: Option<f64>,
    pub boundary: Option<BoundaryCondition>,
    /// Seed of the randomized verification suites.
    pub seed: u64,
    pub grid: GridKeys,
    pub time: TimeKeys,
    pub range: RangeKeys,
    pub output_dir: String,
    pub format: Format,
    pub calibration_anchor: Option<f64>,
}

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

impl TaskConfig {
    pub fn new(model: ProfileSpec, task: Task) -> Self {
        TaskConfig {
            model,
            minus: None,
            weight: None,
            task,
            source: None,
            boundary: None,
            seed: DEFAULT_SEED,
            grid: GridKeys {
                r_min: None,
                r_max: None,
                nodes: None,
                spacing: Spacing::Uniform,
                dt: None,
            },
            time: TimeKeys {
                t_start: None,
                t_end: None,
                t_steps: None,
                log_spaced: true,
            },
            range: RangeKeys {
                min: None,
                max: None,
                points: None,
            },
            output_dir: DEFAULT_OUTPUT_DIR.to_string(),
            format: Format::Csv,
            calibration_anchor: None,
        }
    }

    pub fn weight_kind(&self) -> WeightKind {
        match (self.task, self.weight) {
            (Task::Pipeline, None) => WeightKind::TwoEnd,
            (_, w) => w.unwrap_or(WeightKind::None),
        }
    }

    pub fn is_full_line(&self) -> bool {
        self.minus.is_some() || self.task == Task::Pipeline
    }
}

const SECTIONS: [&str; 10] = [
    "model",
    "minus",
    "weight",
    "task",
    "grid",
    "time",
    "range",
    "output",
    "calibration",
    "verify",
];

fn keys_of(section: &str) -> &'static [&'static str] {
    match section {
        "model" | "minus" => &ProfileSpec::KEYS,
        "weight" => &["kind"],
        "task" => &["kind", "source", "boundary"],
        "grid" => &["r_min", "r_max", "nodes", "spacing", "grade_ratio", "dt"],
        "time" => &["t_start", "t_end", "t_steps", "log_spaced"],
        "range" => &["min", "max", "points"],
        "output" => &["dir", "format"],
        "calibration" => &["anchor"],
        "verify" => &["seed"],
        _ => &[],
    }
}

fn real(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| at_line(line, Some(key), format!("expected a real number, found `{v}`")))
}

fn count(line: usize, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse::<usize>()
        .map_err(|_| at_line(line, Some(key), format!("expected a nonnegative integer, found `{v}`")))
}

/// Parse and validate a configuration.
pub fn parse_config(text: &str) -> Result<TaskConfig, ConfigError> {
    let mut section: Option<String> = None;
    let mut seen: Vec<(String, String)> = Vec::new();
    let mut entries: Vec<(usize, String, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut rest = raw.split('#').next().unwrap_or("").trim();
        if rest.starts_with('[') {
            let close = rest
                .find(']')
                .ok_or_else(|| at_line(line, None, "unterminated section header"))?;
            let name = rest[1..close].trim();
            if !SECTIONS.contains(&name) {
                return Err(at_line(line, None, format!("unknown section `[{name}]`")));
            }
            section = Some(name.to_string());
            rest = rest[close + 1..].trim();
        }
        for tok in rest.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| at_line(line, None, format!("expected key=value, found `{tok}`")))?;
            let sec = section
                .clone()
                .ok_or_else(|| at_line(line, Some(k), "key appears before any section header"))?;
            if !keys_of(&sec).contains(&k) {
                return Err(at_line(line, Some(k), format!("unknown key in section [{sec}]")));
            }
            if v.is_empty() {
                return Err(at_line(line, Some(k), "empty value"));
            }
            if seen.iter().any(|(s, kk)| *s == sec && kk == k) {
                return Err(at_line(line, Some(k), format!("repeated key in section [{sec}]")));
            }
            seen.push((sec.clone(), k.to_string()));
            entries.push((line, sec, k.to_string(), v.to_string()));
        }
    }

    let mut model = ProfileSpec::new("");
    let mut minus: Option<ProfileSpec> = None;
    let mut task: Option<Task> = None;
    let mut cfg = TaskConfig::new(ProfileSpec::new(""), Task::Geometry);
    let mut grade_ratio: Option<f64> = None;
    let mut graded = false;
    for (line, sec, k, v) in &entries {
        let (line, k, v) = (*line, k.as_str(), v.as_str());
        match sec.as_str() {
            "model" => model.set(k, v).map_err(|e| at_line(line, Some(k), e.to_string()))?,
            "minus" => minus
                .get_or_insert_with(|| ProfileSpec::new(""))
                .set(k, v)
                .map_err(|e| at_line(line, Some(k), e.to_string()))?,
            "weight" => {
                cfg.weight = Some(match v {
                    "none" => WeightKind::None,
                    "two_end" => WeightKind::TwoEnd,
                    _ => return Err(at_line(line, Some(k), format!("expected none or two_end, found `{v}`"))),
                })
            }
            "task" => match k {
                "kind" => {
                    task = Some(
                        *Task::ALL
                            .iter()
                            .find(|t| t.name() == v)
                            .ok_or_else(|| at_line(line, Some(k), format!("unknown task `{v}`")))?,
                    )
                }
                "source" => cfg.source = Some(real(line, k, v)?),
                _ => {
                    cfg.boundary = Some(match v {
                        "neumann" => BoundaryCondition::Neumann,
                        "dirichlet" => BoundaryCondition::Dirichlet,
                        _ => {
                            return Err(at_line(
                                line,
                                Some(k),
                                format!("expected neumann or dirichlet, found `{v}`"),
                            ))
                        }
                    })
                }
            },
            "grid" => match k {
                "r_min" => cfg.grid.r_min = Some(real(line, k, v)?),
                "r_max" => cfg.grid.r_max = Some(real(line, k, v)?),
                "nodes" => cfg.grid.nodes = Some(count(line, k, v)?),
                "dt" => cfg.grid.dt = Some(real(line, k, v)?),
                "grade_ratio" => grade_ratio = Some(real(line, k, v)?),
                _ => {
                    graded = match v {
                        "uniform" => false,
                        "graded" => true,
                        _ => {
                            return Err(at_line(
                                line,
                                Some(k),
                                format!("expected uniform or graded, found `{v}`"),
                            ))
                        }
                    }
                }
            },
            "time" => match k {
                "t_start" => cfg.time.t_start = Some(real(line, k, v)?),
                "t_end" => cfg.time.t_end = Some(real(line, k, v)?),
                "t_steps" => cfg.time.t_steps = Some(count(line, k, v)?),
                _ => {
                    cfg.time.log_spaced = v
                        .parse::<bool>()
                        .map_err(|_| at_line(line, Some(k), format!("expected true or false, found `{v}`")))?
                }
            },
            "range" => match k {
                "min" => cfg.range.min = Some(real(line, k, v)?),
                "max" => cfg.range.max = Some(real(line, k, v)?),
                _ => cfg.range.points = Some(count(line, k, v)?),
            },
            "output" => match k {
                "dir" => cfg.output_dir = v.to_string(),
                _ => {
                    cfg.format = match v {
                        "csv" => Format::Csv,
                        "json" => Format::Json,
                        _ => return Err(at_line(line, Some(k), format!("expected csv or json, found `{v}`"))),
                    }
                }
            },
            "calibration" => cfg.calibration_anchor = Some(real(line, k, v)?),
            _ => {
                cfg.seed = v
                    .parse::<u64>()
                    .map_err(|_| at_line(line, Some(k), format!("expected an unsigned integer, found `{v}`")))?
            }
        }
    }
    cfg.task = task.ok_or_else(|| named("kind", "the [task] section must set `kind`"))?;
    cfg.grid.spacing = match (graded, grade_ratio) {
        (true, Some(ratio)) => Spacing::Graded { ratio },
        (true, None) => return Err(named("grade_ratio", "graded spacing needs `grade_ratio`")),
        (false, Some(_)) => return Err(named("grade_ratio", "only valid with spacing=graded")),
        (false, None) => Spacing::Uniform,
    };
    cfg.model = model;
    cfg.minus = minus;
    validate(&cfg)?;
    Ok(cfg)
}

fn check_profile(spec: &ProfileSpec, section: &str) -> Result<(), ConfigError> {
    if spec.family.is_empty() {
        return Err(named("family", format!("the [{section}] section must set `family`")));
    }
    if let Some(a) = spec.alpha {
        if !(a > 0.0 && a <= 1.0) {
            return Err(named("alpha", format!("range error: α must lie in (0, 1], got {a}")));
        }
    }
    if let Some(c) = spec.cap_radius {
        if !(c > 0.0) {
            return Err(named("cap_radius", format!("must be positive, got {c}")));
        }
    }
    // Tables are read at run time; every other family is checked now.
    if spec.family != "table" {
        spec.build(None).map_err(|e| named("family", e.to_string()))?;
    }
    Ok(())
}

fn positive(key: &str, v: Option<f64>) -> Result<(), ConfigError> {
    match v {
        Some(x) if !(x > 0.0) => Err(named(key, format!("must be positive, got {x}"))),
        _ => Ok(()),
    }
}

/// Constraint checks shared by the parser and programmatic construction.
pub fn validate(cfg: &TaskConfig) -> Result<(), ConfigError> {
    if cfg.task != Task::Verify {
        check_profile(&cfg.model, "model")?;
    }
    if let Some(m) = &cfg.minus {
        check_profile(m, "minus")?;
    }
    positive("dt", cfg.grid.dt)?;
    positive("t_start", cfg.time.t_start)?;
    positive("min", cfg.range.min)?;
    positive("anchor", cfg.calibration_anchor)?;
    if let Some(n) = cfg.grid.nodes {
        if n < 64 {
            return Err(named("nodes", format!("need at least 64 nodes, got {n}")));
        }
    }
    if let (Some(a), Some(b)) = (cfg.grid.r_min, cfg.grid.r_max) {
        if !(a < b) {
            return Err(named("r_max", format!("must exceed r_min = {a}, got {b}")));
        }
    }
    if let Spacing::Graded { ratio } = cfg.grid.spacing {
        if !(ratio > 1.0 && ratio <= 1.05) {
            return Err(named("grade_ratio", format!("must lie in (1, 1.05], got {ratio}")));
        }
    }
    if let (Some(a), Some(b)) = (cfg.range.min, cfg.range.max) {
        if !(a < b) {
            return Err(named("max", format!("must exceed min = {a}, got {b}")));
        }
    }
    if let Some(p) = cfg.range.points {
        if p < 2 {
            return Err(named("points", format!("need at least 2 points, got {p}")));
        }
    }
    let t = &cfg.time;
    if t.t_end.is_some() != t.t_steps.is_some() {
        let missing = if t.t_end.is_none() { "t_end" } else { "t_steps" };
        return Err(named(missing, "t_end and t_steps must be given together"));
    }
    if (t.t_end.is_some() || t.t_steps.is_some()) && t.t_start.is_none() {
        return Err(named("t_start", "required when t_end is given"));
    }
    if let (Some(a), Some(b)) = (t.t_start, t.t_end) {
        if !(b > a) {
            return Err(named("t_end", format!("must exceed t_start = {a}, got {b}")));
        }
    }
    if t.t_steps == Some(0) {
        return Err(named("t_steps", "must be at least 1"));
    }
    match cfg.task {
        Task::Bounds | Task::Solve if !t.is_set() => {
            return Err(named("t_start", format!("task {} requires time keys", cfg.task.name())));
        }
        Task::Solve if cfg.source.is_none() => {
            return Err(named("source", "task solve requires the initial delta position"));
        }
        _ => {}
    }
    if cfg.weight_kind() == WeightKind::TwoEnd && !cfg.is_full_line() {
        return Err(named("kind", "weight two_end needs a [minus] section"));
    }
    let two_end_alpha = cfg.is_full_line() && cfg.weight_kind() == WeightKind::TwoEnd;
    let needs_alpha = match cfg.task {
        Task::Pipeline => true,
        Task::Bounds => cfg.is_full_line(),
        _ => false,
    };
    if needs_alpha && (cfg.model.family != "exp_alpha" || !two_end_alpha) {
        return Err(named(
            "family",
            format!(
                "task {} on a two-ended model needs family=exp_alpha with weight two_end",
                cfg.task.name()
            ),
        ));
    }
    if cfg.calibration_anchor.is_some() && !matches!(cfg.task, Task::Pipeline | Task::Bounds) {
        return Err(named("anchor", "only used by the bounds and pipeline tasks"));
    }
    Ok(())
}

/// Canonical text form; `parse_config(&render(c)) == Ok(c)` for valid `c`.
pub fn render(cfg: &TaskConfig) -> String {
    let mut out = String::new();
    let mut section = |name: &str, pairs: Vec<(&str, String)>| {
        if !pairs.is_empty() {
            out.push_str(&format!("[{name}]\n"));
            for (k, v) in pairs {
                out.push_str(&format!("{k}={v}\n"));
            }
        }
    };
    let profile = |p: &ProfileSpec| -> Vec<(&'static str, String)> {
        p.render()
            .split_whitespace()
            .map(|tok| {
                let (k, v) = tok.split_once('=').unwrap();
                let key = ProfileSpec::KEYS.iter().find(|x| **x == k).unwrap();
                (*key, v.to_string())
            })
            .collect()
    };
    if !cfg.model.family.is_empty() {
        section("model", profile(&cfg.model));
    }
    if let Some(m) = &cfg.minus {
        section("minus", profile(m));
    }
    if let Some(w) = cfg.weight {
        let v = match w {
            WeightKind::None => "none",
            WeightKind::TwoEnd => "two_end",
        };
        section("weight", vec![("kind", v.to_string())]);
    }
    let mut task = vec![("kind", cfg.task.name().to_string())];
    if let Some(s) = cfg.source {
        task.push(("source", fmt_real(s)));
    }
    if let Some(b) = cfg.boundary {
        let v = match b {
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Dirichlet => "dirichlet",
        };
        task.push(("boundary", v.to_string()));
    }
    section("task", task);
    let g = &cfg.grid;
    let mut grid = Vec::new();
    if let Some(x) = g.r_min {
        grid.push(("r_min", fmt_real(x)));
    }
    if let Some(x) = g.r_max {
        grid.push(("r_max", fmt_real(x)));
    }
    if let Some(n) = g.nodes {
        grid.push(("nodes", n.to_string()));
    }
    if let Spacing::Graded { ratio } = g.spacing {
        grid.push(("spacing", "graded".to_string()));
        grid.push(("grade_ratio", fmt_real(ratio)));
    }
    if let Some(x) = g.dt {
        grid.push(("dt", fmt_real(x)));
    }
    section("grid", grid);
    let t = &cfg.time;
    let mut time = Vec::new();
    if let Some(x) = t.t_start {
        time.push(("t_start", fmt_real(x)));
    }
    if let Some(x) = t.t_end {
        time.push(("t_end", fmt_real(x)));
    }
    if let Some(n) = t.t_steps {
        time.push(("t_steps", n.to_string()));
    }
    if !t.log_spaced {
        time.push(("log_spaced", "false".to_string()));
    }
    section("time", time);
    let mut range = Vec::new();
    if let Some(x) = cfg.range.min {
        range.push(("min", fmt_real(x)));
    }
    if let Some(x) = cfg.range.max {
        range.push(("max", fmt_real(x)));
    }
    if let Some(n) = cfg.range.points {
        range.push(("points", n.to_string()));
    }
    section("range", range);
    let fmt = match cfg.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    section(
        "output",
        vec![("dir", cfg.output_dir.clone()), ("format", fmt.to_string())],
    );
    if let Some(a) = cfg.calibration_anchor {
        section("calibration", vec![("anchor", fmt_real(a))]);
    }
    if cfg.seed != DEFAULT_SEED {
        section("verify", vec![("seed", cfg.seed.to_string())]);
    }
    out
}

/// Read and parse a configuration file.
pub fn load(path: &Path) -> Result<TaskConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: None,
        key: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text)
}
