//! Dispatch of a parsed configuration to the library.

use crate::config::{render, GridKeys, Task, TaskConfig, WeightKind};
use crate::output::{write_json, Table};
use crate::verify;
use heatlab_core::geometry::{classify_parabolicity, end_resistance, volume_between, End};
use heatlab_core::htransform::{build_two_end_weight, TransformPair};
use heatlab_core::isoperimetry::{
    asymptotic_profile, profile_halfline, profile_sphere, warped_product_profile, IsoProfile,
};
use heatlab_core::pipeline::{calibration_index, default_times, split_point, two_end_pipeline_with, PipelineOptions};
use heatlab_core::profile::DEFAULT_CAP_RADIUS;
use heatlab_core::quadrature::{linspace, logspace};
use heatlab_core::solver::{kernel_diag, solve, BoundaryCondition, Discretization, GridSpec};
use heatlab_core::spectral::{
    fit_decay_exponent, fk_connected_sum, fk_from_iso, FaberKrahnFunction, GammaInverter, LambdaSource, LowerBound,
};
use heatlab_core::{Domain, Error, RadialProfile, Side, WeightedModel};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::Path;

/// Why a task did not complete; each maps to an exit code.
#[derive(Clone, Debug, PartialEq)]
pub enum Failure {
    Config(String),
    Numeric(String),
    /// Failed verification suites, with the full results table.
    Verify {
        failed: usize,
        report: Value,
    },
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numeric(_) => 2,
            Failure::Verify { .. } => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numeric(m) => write!(f, "{m}"),
            Failure::Verify { failed, .. } => write!(f, "{failed} verification suite(s) failed"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Argument(_) | Error::Range(_) | Error::Unsupported(_) => Failure::Config(e.to_string()),
            Error::NumericFailure(_) | Error::Precondition(_) => Failure::Numeric(e.to_string()),
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::Numeric(format!("cannot write output: {e}"))
}

/// Files written and the task-specific part of `report.json`.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<String>,
    pub report: Value,
}

/// SHA-256 of the canonical rendering, as lowercase hex.
pub fn config_hash(cfg: &TaskConfig) -> String {
    Sha256::digest(render(cfg).as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Run a task end to end: echo the effective config, dispatch, and write
/// `report.json`. Returns the exit code and the report.
pub fn execute(cfg: &TaskConfig, base_dir: &Path, out_dir: &Path) -> (i32, Value) {
    let mut report = json!({
        "task": cfg.task.name(),
        "config_hash": config_hash(cfg),
        "config": render(cfg),
    });
    let result = std::fs::create_dir_all(out_dir)
        .and_then(|_| std::fs::write(out_dir.join("effective.cfg"), render(cfg)))
        .map_err(io_failure)
        .and_then(|_| run_task(cfg, base_dir, out_dir));
    let code = match result {
        Ok(out) => {
            report["status"] = json!("ok");
            report["files"] = json!(out.files);
            report["result"] = out.report;
            0
        }
        Err(f) => {
            report["status"] = json!("failed");
            report["error"] = json!(f.to_string());
            if let Failure::Verify { report: r, .. } = &f {
                report["result"] = r.clone();
            }
            f.exit_code()
        }
    };
    report["exit_code"] = json!(code);
    if let Err(e) = write_json(&out_dir.join("report.json"), &report) {
        eprintln!("cannot write report.json: {e}");
        return (code.max(2), report);
    }
    (code, report)
}

pub fn run_task(cfg: &TaskConfig, base_dir: &Path, out_dir: &Path) -> Result<Outcome, Failure> {
    match cfg.task {
        Task::Geometry => geometry(cfg, base_dir, out_dir),
        Task::Iso => iso(cfg, base_dir, out_dir),
        Task::Fk => fk(cfg, base_dir, out_dir),
        Task::Bounds => bounds(cfg, base_dir, out_dir),
        Task::Solve => solve_task(cfg, base_dir, out_dir),
        Task::Pipeline => pipeline(cfg, base_dir, out_dir),
        Task::Verify => {
            let results = verify::run_suites(cfg.seed);
            verify::print_table(&results);
            let failed = results.iter().filter(|r| !r.pass).count();
            let table = verify::to_json(&results);
            if failed > 0 {
                return Err(Failure::Verify { failed, report: table });
            }
            Ok(Outcome {
                files: vec![],
                report: table,
            })
        }
    }
}

/// The configured model, and the h-transform when a two-end weight is requested.
struct Built {
    base: WeightedModel,
    pair: Option<TransformPair>,
}

impl Built {
    fn working(&self) -> &WeightedModel {
        self.pair.as_ref().map_or(&self.base, |p| &p.transformed)
    }
}

fn minus_profile(cfg: &TaskConfig, base_dir: &Path) -> Result<RadialProfile, Failure> {
    match &cfg.minus {
        Some(m) => Ok(m.build(Some(base_dir))?),
        None => Ok(RadialProfile::hyperbolic(cfg.model.n.unwrap_or(2))?),
    }
}

fn build(cfg: &TaskConfig, base_dir: &Path) -> Result<Built, Failure> {
    let plus = cfg.model.build(Some(base_dir))?;
    let profile = if cfg.is_full_line() {
        let cap = cfg.model.cap_radius.unwrap_or(DEFAULT_CAP_RADIUS);
        RadialProfile::full_line(plus, minus_profile(cfg, base_dir)?, cap)?
    } else {
        plus
    };
    let base = WeightedModel::new(profile);
    let pair = match cfg.weight_kind() {
        WeightKind::None => None,
        WeightKind::TwoEnd => Some(build_two_end_weight(&base)?),
    };
    Ok(Built { base, pair })
}

const ENVELOPE_SAMPLES: usize = 4096;

/// J_ν/v made nonincreasing when needed, with a note of where it was not.
fn monotone(j: &IsoProfile, warnings: &mut Vec<String>) -> IsoProfile {
    if j.j_over_v_nonincreasing {
        return j.clone();
    }
    if let Some((a, b)) = j.check_j_over_v(ENVELOPE_SAMPLES) {
        warnings.push(format!(
            "J/v increases between v = {a:.3e} and {b:.3e}; using its nonincreasing envelope"
        ));
    }
    j.ratio_envelope(ENVELOPE_SAMPLES)
}

/// Half-line views of the working model: the model itself, or both sides of
/// the split point of a full-line model.
fn views(m: &WeightedModel) -> Result<(Option<f64>, WeightedModel, Option<WeightedModel>), Failure> {
    if m.domain() == Domain::HalfLine {
        return Ok((None, m.clone(), None));
    }
    let s = split_point(m);
    Ok((
        Some(s),
        m.half_line_view(s, Side::Plus)?,
        Some(m.half_line_view(s, Side::Minus)?),
    ))
}

fn parabolicity(m: &WeightedModel, end: End) -> Result<Value, Failure> {
    let (lo, hi) = m.support();
    let present = match end {
        End::Plus => hi == f64::INFINITY,
        End::Minus => lo == f64::NEG_INFINITY,
    };
    if !present {
        return Ok(Value::Null);
    }
    let class = classify_parabolicity(m, end)?;
    Ok(json!(class))
}

fn geometry(cfg: &TaskConfig, base_dir: &Path, out: &Path) -> Result<Outcome, Failure> {
    let b = build(cfg, base_dir)?;
    let m = b.working();
    let (lo, _) = m.support();
    let r_min = cfg.grid.r_min.unwrap_or(if lo.is_finite() { lo } else { -10.0 });
    let r_max = cfg.grid.r_max.unwrap_or(10.0);
    if !(r_max > r_min) {
        return Err(Failure::Config(format!("r_max = {r_max} must exceed r_min = {r_min}")));
    }
    let nodes = cfg.grid.nodes.unwrap_or(101);
    let mut table = Table::new("geometry", &["r", "S", "S_tilde", "V", "h"]);
    for r in linspace(r_min, r_max, nodes) {
        m.check_radius(r, "r")?;
        let v = volume_between(m, 0.0_f64.max(lo), r)?;
        table.push(vec![r, m.area(r), m.weighted_area(r), v, m.weight_value(r)]);
    }
    let file = table.write(out, cfg.format).map_err(io_failure)?;
    let resistance = |end: End, from: f64| -> Result<Value, Failure> {
        if parabolicity(m, end)?.is_null() {
            return Ok(Value::Null);
        }
        Ok(json!(end_resistance(m, from, end, 1e-8)?))
    };
    let report = json!({
        "dimension": m.dimension(),
        "family": m.profile().family().name(),
        "parabolicity": {
            "plus": parabolicity(m, End::Plus)?,
            "minus": parabolicity(m, End::Minus)?,
        },
        "end_resistance": {
            "plus": resistance(End::Plus, lo.max(0.0) + 1.0)?,
            "minus": resistance(End::Minus, -1.0)?,
        },
        "kappa1": b.pair.as_ref().map(|p| p.kappa1),
        "kappa2": b.pair.as_ref().map(|p| p.kappa2),
    });
    Ok(Outcome {
        files: vec![file],
        report,
    })
}

fn volumes(cfg: &TaskConfig) -> Vec<f64> {
    logspace(
        cfg.range.min.unwrap_or(1e-2),
        cfg.range.max.unwrap_or(1e12),
        cfg.range.points.unwrap_or(141),
    )
}

fn iso(cfg: &TaskConfig, base_dir: &Path, out: &Path) -> Result<Outcome, Failure> {
    let b = build(cfg, base_dir)?;
    let (split, plus, _) = views(b.working())?;
    let n = plus.dimension();
    let j = profile_halfline(&plus)?;
    let mut warnings = Vec::new();
    let mono = monotone(&j, &mut warnings);
    let warped = warped_product_profile(mono, profile_sphere(n, 2.0)?, 1.0, 1.0)?;
    let asym = match (cfg.model.family.as_str(), cfg.model.alpha) {
        ("exp_alpha", Some(alpha)) => Some(asymptotic_profile(alpha, n, 1.0)?),
        _ => None,
    };
    let mut table = Table::new("iso", &["v", "J_nu", "J_warped", "J_asymptotic"]);
    for v in volumes(cfg) {
        let a = asym.as_ref().map_or(f64::NAN, |p| p.eval(v));
        table.push(vec![v, j.eval(v), warped.eval(v), a]);
    }
    let file = table.write(out, cfg.format).map_err(io_failure)?;
    let report = json!({
        "split": split,
        "j_over_v_nonincreasing": j.j_over_v_nonincreasing,
        "total_mass": finite(j.total_mass()),
        "reach": finite(j.reach()),
        "asymptotic_ratio": asym.as_ref().map(|a| heatlab_core::pipeline::ratio_range(&j, a)),
        "warnings": warnings,
    });
    Ok(Outcome {
        files: vec![file],
        report,
    })
}

fn finite(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Faber–Krahn function of the working model; the two sides of a full-line
/// model are glued with c = 1/4, Q = 2.
fn fk_of(b: &Built, warnings: &mut Vec<String>) -> Result<FaberKrahnFunction, Failure> {
    let (_, plus, minus) = views(b.working())?;
    let fp = fk_from_iso(&monotone(&profile_halfline(&plus)?, warnings))?;
    match minus {
        None => Ok(fp),
        Some(m) => {
            let fm = fk_from_iso(&monotone(&profile_halfline(&m)?, warnings))?;
            let opts = PipelineOptions::default();
            Ok(fk_connected_sum(&[fp, fm], opts.glue_c, opts.glue_q)?)
        }
    }
}

fn fk(cfg: &TaskConfig, base_dir: &Path, out: &Path) -> Result<Outcome, Failure> {
    let b = build(cfg, base_dir)?;
    let mut warnings = Vec::new();
    let f = fk_of(&b, &mut warnings)?;
    let mut lam = Table::new("fk", &["v", "Lambda"]);
    for v in volumes(cfg) {
        lam.push(vec![v, f.eval(v)]);
    }
    let times = cfg.time.times().unwrap_or_else(|| logspace(1e-2, 1e2, 41));
    let inv = GammaInverter::new(&f, *times.last().unwrap())?;
    let mut gamma = Table::new("gamma", &["t", "gamma", "upper"]);
    for &t in &times {
        gamma.push(vec![t, inv.gamma(t)?, inv.upper(t)?]);
    }
    let files = vec![
        lam.write(out, cfg.format).map_err(io_failure)?,
        gamma.write(out, cfg.format).map_err(io_failure)?,
    ];
    Ok(Outcome {
        files,
        report: json!({ "reach": finite(f.reach()), "warnings": warnings }),
    })
}

fn grid_from(keys: &GridKeys, default: GridSpec) -> GridSpec {
    let mut g = default;
    if let Some(x) = keys.r_min {
        g.r_min = x;
    }
    if let Some(x) = keys.r_max {
        g.r_max = x;
    }
    if let Some(n) = keys.nodes {
        g.nodes = n;
    }
    if let Some(dt) = keys.dt {
        g.dt = dt;
    }
    g.spacing = keys.spacing;
    g
}

fn pipeline_options(cfg: &TaskConfig) -> PipelineOptions {
    let mut opts = PipelineOptions::default();
    opts.cap_radius = cfg.model.cap_radius.unwrap_or(DEFAULT_CAP_RADIUS);
    opts.grid = grid_from(&cfg.grid, opts.grid.clone());
    opts.calibration_anchor = cfg.calibration_anchor;
    opts
}

fn bounds_table(times: &[f64], upper: &[f64], lower: &[f64], numeric: &[f64]) -> Table {
    let mut t = Table::new("bounds", &["t", "upper", "lower", "numeric"]);
    for k in 0..times.len() {
        t.push(vec![times[k], upper[k], lower[k], numeric[k]]);
    }
    t
}

fn fit_or_null(times: &[f64], values: &[f64]) -> Value {
    if times.len() < 3 {
        return Value::Null;
    }
    match fit_decay_exponent(times, values) {
        Ok(f) => json!(f),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn bounds(cfg: &TaskConfig, base_dir: &Path, out: &Path) -> Result<Outcome, Failure> {
    let times = cfg.time.times().expect("validated");
    if cfg.is_full_line() {
        let (alpha, n) = (cfg.model.alpha.expect("validated"), cfg.model.n.unwrap_or(2));
        let rep = two_end_pipeline_with(alpha, n, minus_profile(cfg, base_dir)?, &times, &pipeline_options(cfg))?;
        let file = bounds_table(&rep.times, &rep.upper, &rep.lower, &rep.numeric)
            .write(out, cfg.format)
            .map_err(io_failure)?;
        let mut report = json!(rep);
        strip_tables(&mut report);
        return Ok(Outcome {
            files: vec![file],
            report,
        });
    }
    let b = build(cfg, base_dir)?;
    let m = b.working();
    let mut warnings = Vec::new();
    let f = fk_of(&b, &mut warnings)?;
    let inv = GammaInverter::new(&f, *times.last().unwrap())?;
    let upper_raw = times.iter().map(|&t| inv.upper(t)).collect::<Result<Vec<f64>, _>>()?;
    let lb = LowerBound::new(m, LambdaSource::Rayleigh)?;
    let log_lower = times
        .iter()
        .map(|&t| Ok(lb.log_at(t)?.1))
        .collect::<Result<Vec<f64>, Error>>()?;
    let lower: Vec<f64> = log_lower.iter().map(|l| l.exp()).collect();

    let (lo, _) = m.support();
    let grid = grid_from(&cfg.grid, GridSpec::uniform(lo, lo + 200.0, 4000, 0.005));
    let window = grid.r_min + 0.05 * (grid.r_max - grid.r_min);
    let mut sources: Vec<usize> = linspace(grid.r_min, window, 21)
        .into_iter()
        .map(|r| grid.nearest_node(r))
        .collect();
    sources.dedup();
    let bc = cfg.boundary.unwrap_or(BoundaryCondition::Neumann);
    let kd = kernel_diag(m, &grid, bc, &times, &sources)?;
    let numeric: Vec<f64> = kd
        .diag
        .iter()
        .map(|row| row.iter().cloned().fold(0.0, f64::max))
        .collect();
    let (upper, calibration) = match cfg.calibration_anchor {
        None => (upper_raw.clone(), 1.0),
        Some(a) => {
            let k = calibration_index(&times, Some(a));
            let c = numeric[k] / upper_raw[k];
            (upper_raw.iter().map(|u| c * u).collect(), c)
        }
    };
    warnings.extend(kd.warnings.iter().cloned());
    let file = bounds_table(&times, &upper, &lower, &numeric)
        .write(out, cfg.format)
        .map_err(io_failure)?;
    let report = json!({
        "times": times,
        "upper_raw": upper_raw,
        "log_lower": log_lower,
        "calibration": calibration,
        "upper_fit": fit_or_null(&times, &upper),
        "numeric_fit": fit_or_null(&times, &numeric),
        "far_leakage": kd.far_leakage,
        "symmetry_error": kd.symmetry_error,
        "warnings": warnings,
    });
    Ok(Outcome {
        files: vec![file],
        report,
    })
}

/// The iso and eigen tables go to their own files.
fn strip_tables(report: &mut Value) {
    if let Some(m) = report.as_object_mut() {
        m.remove("iso");
        m.remove("eigen");
    }
}

fn solve_task(cfg: &TaskConfig, base_dir: &Path, out: &Path) -> Result<Outcome, Failure> {
    let b = build(cfg, base_dir)?;
    let m = b.working();
    let times = cfg.time.times().expect("validated");
    let (lo, _) = m.support();
    let default = if lo.is_finite() {
        GridSpec::uniform(lo, lo + 100.0, 2048, 0.01)
    } else {
        GridSpec::uniform(-50.0, 50.0, 2048, 0.01)
    };
    let grid = grid_from(&cfg.grid, default);
    let bc = cfg.boundary.unwrap_or(BoundaryCondition::Neumann);
    let source = cfg.source.expect("validated");
    if !(source >= grid.r_min && source < grid.r_max) {
        return Err(Failure::Config(format!(
            "source = {source} lies outside the grid [{}, {})",
            grid.r_min, grid.r_max
        )));
    }
    let node = grid.nearest_node(source);
    let init = Discretization::new(m, &grid, bc)?.delta(node);
    let rep = solve(m, &grid, bc, &init, &times)?;
    let mut files = Vec::new();
    for (k, snap) in rep.snapshots.iter().enumerate() {
        let mut t = Table::new(format!("field_t{k:03}"), &["r", "u"]);
        for (r, u) in rep.r.iter().zip(snap) {
            t.push(vec![*r, *u]);
        }
        files.push(t.write(out, cfg.format).map_err(io_failure)?);
    }
    let mut report = json!(rep);
    if let Some(m) = report.as_object_mut() {
        m.remove("r");
        m.insert("source_r".into(), json!(rep.r[node]));
        m.insert(
            "snapshot_tags".into(),
            json!(times
                .iter()
                .enumerate()
                .map(|(k, t)| json!({"tag": format!("{k:03}"), "t": t}))
                .collect::<Vec<_>>()),
        );
    }
    Ok(Outcome { files, report })
}

fn pipeline(cfg: &TaskConfig, base_dir: &Path, out: &Path) -> Result<Outcome, Failure> {
    let alpha = cfg.model.alpha.expect("validated");
    let n = cfg.model.n.unwrap_or(2);
    let times = cfg.time.times().unwrap_or_else(default_times);
    let rep = two_end_pipeline_with(alpha, n, minus_profile(cfg, base_dir)?, &times, &pipeline_options(cfg))?;
    let mut files = vec![bounds_table(&rep.times, &rep.upper, &rep.lower, &rep.numeric)
        .write(out, cfg.format)
        .map_err(io_failure)?];
    let mut iso = Table::new("iso", &["v", "J_nu", "J_warped", "J_asymptotic"]);
    for r in &rep.iso {
        iso.push(vec![r.v, r.j_nu, r.j_warped, r.j_asymptotic]);
    }
    files.push(iso.write(out, cfg.format).map_err(io_failure)?);
    let mut eig = Table::new("eigen", &["R", "lambda1", "rayleigh_upper"]);
    for r in &rep.eigen {
        eig.push(vec![r.r, r.lambda1, r.rayleigh_upper]);
    }
    files.push(eig.write(out, cfg.format).map_err(io_failure)?);
    let fk_lower: Vec<f64> = rep.eigen.iter().map(|r| r.fk_lower).collect();
    let mut report = json!(rep);
    strip_tables(&mut report);
    report["eigen_fk_lower"] = json!(fk_lower);
    Ok(Outcome { files, report })
}
