//! End-to-end bounds for a two-ended model: weight, profiles, Faber–Krahn
//! gluing, γ-inversion, the lower bound and the numeric sup-diagonal.

use crate::error::{Error, Result};
use crate::htransform::{build_two_end_weight, TransformPair};
use crate::isoperimetry::{asymptotic_profile, profile_halfline, profile_sphere, warped_product_profile, IsoProfile};
use crate::model::{Side, WeightedModel};
use crate::profile::RadialProfile;
use crate::quadrature::{golden_min, linspace, logspace};
use crate::solver::{kernel_diag, BoundaryCondition, GridSpec};
use crate::spectral::{
    fit_decay_exponent, fit_decay_exponent_log, fk_connected_sum, fk_from_iso, lambda1_dirichlet,
    lambda1_rayleigh_upper, DecayFit, FaberKrahnFunction, GammaInverter, LambdaSource, LowerBound,
};
use serde::Serialize;

/// Knobs of the pipeline; the defaults reproduce the reference runs.
#[derive(Clone, Debug, Serialize)]
pub struct PipelineOptions {
    /// Blend radius of the plus end and of the join.
    pub cap_radius: f64,
    /// Gluing constants c and Q.
    pub glue_c: f64,
    pub glue_q: f64,
    pub grid: GridSpec,
    /// Sources of the numeric sup-diagonal are taken from this window.
    pub source_window: (f64, f64),
    pub source_count: usize,
    /// Volumes of the iso table.
    pub iso_range: (f64, f64),
    pub iso_points: usize,
    /// Radii of the eigenvalue table, measured from the split point.
    pub eigen_range: (f64, f64),
    pub eigen_points: usize,
    /// Sphere constant of the warped profile.
    pub sphere_constant: f64,
    pub lower_lambda: LambdaSource,
    /// Time at which the upper bound is scaled to meet the numeric value;
    /// the nearest reported time (in log scale) is used. Defaults to the first.
    pub calibration_anchor: Option<f64>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            cap_radius: 1.0,
            glue_c: 0.25,
            glue_q: 2.0,
            grid: GridSpec::uniform(-30.0, 600.0, 5000, 0.1),
            source_window: (-4.0, 16.0),
            source_count: 41,
            iso_range: (1e-2, 1e12),
            iso_points: 141,
            eigen_range: (0.5, 40.0),
            eigen_points: 20,
            sphere_constant: 2.0,
            lower_lambda: LambdaSource::Rayleigh,
            calibration_anchor: None,
        }
    }
}

const ENVELOPE_SAMPLES: usize = 4096;

/// Twenty-five log-spaced times in [10, 1000].
pub fn default_times() -> Vec<f64> {
    logspace(10.0, 1000.0, 25)
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoRow {
    pub v: f64,
    pub j_nu: f64,
    pub j_warped: f64,
    pub j_asymptotic: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenRow {
    pub r: f64,
    pub lambda1: f64,
    pub rayleigh_upper: f64,
    /// ¼(J(Ṽ(R))/Ṽ(R))² for the nonincreasing envelope J of J_ν used in the
    /// Faber–Krahn function.
    pub fk_lower: f64,
    /// Same with J_ν itself; only a valid bound where J_ν/v is nonincreasing.
    pub fk_lower_raw: f64,
}

/// Bounds on the diagonal of the heat kernel of the original two-ended model.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub alpha: f64,
    pub n: u32,
    pub times: Vec<f64>,
    /// Calibrated theoretical upper bound.
    pub upper: Vec<f64>,
    /// h²(x_ref)·4/γ(t/2) before calibration.
    pub upper_raw: Vec<f64>,
    /// May underflow to zero; see `log_lower`.
    pub lower: Vec<f64>,
    pub log_lower: Vec<f64>,
    /// h²(x_ref)·sup over sources of the transformed diagonal.
    pub numeric: Vec<f64>,
    /// h²(x_ref)·q̃_t(x_ref, x_ref), i.e. the base diagonal at x_ref.
    pub numeric_at_ref: Vec<f64>,
    /// β fitted to the upper bound.
    pub fitted_exponent: f64,
    pub upper_fit: DecayFit,
    pub numeric_fit: DecayFit,
    pub lower_fit: DecayFit,
    pub target_exponent: f64,
    pub calibration: f64,
    pub calibration_time: f64,
    pub x_ref: f64,
    pub h_ref: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Split point of the transformed model (minimum of S̃).
    pub split: f64,
    /// Range of J_ν/J_asymptotic over the window with c̃ = 1.
    pub asymptotic_ratio: (f64, f64),
    /// c̃ matching J_ν at the start of the window, and the ratio range with it.
    pub asymptotic_c_tilde: f64,
    pub asymptotic_ratio_calibrated: (f64, f64),
    pub far_leakage: f64,
    pub warnings: Vec<String>,
    pub options: PipelineOptions,
    pub iso: Vec<IsoRow>,
    pub eigen: Vec<EigenRow>,
}

/// Argmin of log S̃ on the full line, located on [−10, 10].
pub fn split_point(model: &WeightedModel) -> f64 {
    let xs = linspace(-10.0, 10.0, 2001);
    let k = (0..xs.len()).fold(0, |b, i| {
        if model.log_weighted_area(xs[i]) < model.log_weighted_area(xs[b]) {
            i
        } else {
            b
        }
    });
    let a = xs[k.saturating_sub(1)];
    let b = xs[(k + 1).min(xs.len() - 1)];
    golden_min(|r| model.log_weighted_area(r), a, b, 1e-12).0
}

/// The α-end full-line model with the given minus end.
pub fn two_end_model(alpha: f64, n: u32, minus: RadialProfile, cap_radius: f64) -> Result<WeightedModel> {
    let plus = RadialProfile::exp_alpha(alpha, n, cap_radius)?;
    Ok(WeightedModel::new(RadialProfile::full_line(plus, minus, cap_radius)?))
}

/// The minus end must not have a Faber–Krahn function decaying faster than
/// the log-type floor of the α end.
fn check_minus_end(minus: &FaberKrahnFunction, alpha: f64) -> Result<()> {
    let e = (2.0 - 2.0 * alpha) / alpha;
    let vs = logspace(1e2, minus.reach().min(1e20), 64);
    let ratios: Vec<f64> = vs.iter().map(|&v| minus.eval(v) * v.ln().powf(e)).collect();
    if ratios.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Precondition("Λ of the minus end is not positive".into()));
    }
    if ratios.last().unwrap() * 1e3 < ratios[0] {
        return Err(Error::Precondition(
            "Λ of the minus end decays faster than the log-type floor of the α end".into(),
        ));
    }
    Ok(())
}

fn stage<T>(r: Result<T>, name: &str) -> Result<T> {
    r.map_err(|e| e.at_stage(name))
}

pub fn two_end_pipeline(alpha: f64, n: u32, minus: RadialProfile, times: &[f64]) -> Result<BoundsReport> {
    two_end_pipeline_with(alpha, n, minus, times, &PipelineOptions::default())
}

pub fn two_end_pipeline_with(
    alpha: f64,
    n: u32,
    minus: RadialProfile,
    times: &[f64],
    opts: &PipelineOptions,
) -> Result<BoundsReport> {
    if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) || !(times[0] > 0.0) {
        return Err(Error::Argument("times must be positive and increasing".into()));
    }
    let base = stage(two_end_model(alpha, n, minus, opts.cap_radius), "model")?;
    let pair: TransformPair = stage(build_two_end_weight(&base), "build_two_end_weight")?;
    let tr = &pair.transformed;
    let split = split_point(tr);
    let plus_view = tr.half_line_view(split, Side::Plus)?;
    let minus_view = tr.half_line_view(split, Side::Minus)?;
    let j_plus = stage(profile_halfline(&plus_view), "profile_halfline (plus end)")?;
    let j_minus = stage(profile_halfline(&minus_view), "profile_halfline (minus end)")?;
    let mut warnings = Vec::new();
    let mut monotone = |j: &IsoProfile, side: &str| {
        if j.j_over_v_nonincreasing {
            return j.clone();
        }
        if let Some((a, b)) = j.check_j_over_v(ENVELOPE_SAMPLES) {
            warnings.push(format!(
                "J/v of the {side} end increases between v = {a:.3e} and {b:.3e}; using its nonincreasing envelope"
            ));
        }
        j.ratio_envelope(ENVELOPE_SAMPLES)
    };
    let j_plus_mono = monotone(&j_plus, "plus");
    let fk_plus = stage(fk_from_iso(&j_plus_mono), "fk_from_iso (plus end)")?;
    let fk_minus = stage(fk_from_iso(&monotone(&j_minus, "minus")), "fk_from_iso (minus end)")?;
    stage(check_minus_end(&fk_minus, alpha), "minus-end Faber–Krahn hypothesis")?;
    let glued = stage(
        fk_connected_sum(&[fk_plus, fk_minus], opts.glue_c, opts.glue_q),
        "fk_connected_sum",
    )?;
    let t_max = *times.last().unwrap();
    let inverter = stage(GammaInverter::new(&glued, 0.5 * t_max), "heat_upper_bound")?;

    let x_ref = split;
    let h_ref = pair.h(x_ref);
    let h2 = h_ref * h_ref;
    let upper_raw = stage(
        times
            .iter()
            .map(|&t| Ok(h2 * inverter.upper(t)?))
            .collect::<Result<Vec<f64>>>(),
        "heat_upper_bound",
    )?;
    let lb = stage(LowerBound::new(&plus_view, opts.lower_lambda), "heat_lower_bound")?;
    let log_lower = stage(
        times
            .iter()
            .map(|&t| Ok(h2.ln() + lb.log_at(t)?.1))
            .collect::<Result<Vec<f64>>>(),
        "heat_lower_bound",
    )?;
    let lower: Vec<f64> = log_lower.iter().map(|l| l.exp()).collect();

    let grid = &opts.grid;
    let positions = grid.positions();
    let mut sources: Vec<usize> = linspace(opts.source_window.0, opts.source_window.1, opts.source_count)
        .into_iter()
        .map(|r| grid.nearest_node(r))
        .collect();
    sources.push(grid.nearest_node(x_ref));
    sources.sort_unstable();
    sources.dedup();
    let ref_col = sources.iter().position(|&s| s == grid.nearest_node(x_ref)).unwrap();
    let kd = stage(
        kernel_diag(tr, grid, BoundaryCondition::Dirichlet, times, &sources),
        "heat_solver",
    )?;
    let numeric: Vec<f64> = kd
        .diag
        .iter()
        .map(|row| h2 * row.iter().cloned().fold(0.0, f64::max))
        .collect();
    let numeric_at_ref: Vec<f64> = kd.diag.iter().map(|row| h2 * row[ref_col]).collect();

    let anchor = calibration_index(times, opts.calibration_anchor);
    let calibration = numeric[anchor] / upper_raw[anchor];
    let upper: Vec<f64> = upper_raw.iter().map(|u| calibration * u).collect();
    let upper_fit = stage(fit_decay_exponent(times, &upper), "fit_decay_exponent (upper)")?;
    let numeric_fit = stage(fit_decay_exponent(times, &numeric), "fit_decay_exponent (numeric)")?;
    let lower_fit = stage(fit_decay_exponent_log(times, &log_lower), "fit_decay_exponent (lower)")?;

    warnings.extend(kd.warnings.iter().cloned());
    if positions[0] > split - 20.0 {
        warnings.push("the grid starts close to the split point".into());
    }

    let j_asym = asymptotic_profile(alpha, n, 1.0)?;
    let c_tilde = j_plus.eval(ASYMPTOTIC_WINDOW.0) / j_asym.eval(ASYMPTOTIC_WINDOW.0);
    let asymptotic_ratio = ratio_range(&j_plus, &j_asym);
    let asymptotic_ratio_calibrated = ratio_range(&j_plus, &asymptotic_profile(alpha, n, c_tilde)?);
    let iso = stage(iso_rows(&j_plus, &j_plus_mono, &j_asym, n, opts), "iso table")?;
    let eigen = stage(eigen_rows(&plus_view, &j_plus, &j_plus_mono, opts), "eigen table")?;

    Ok(BoundsReport {
        alpha,
        n,
        times: times.to_vec(),
        upper,
        upper_raw,
        lower,
        log_lower,
        numeric,
        numeric_at_ref,
        fitted_exponent: upper_fit.beta,
        upper_fit,
        numeric_fit,
        lower_fit,
        target_exponent: alpha / (2.0 - alpha),
        calibration,
        calibration_time: times[anchor],
        x_ref,
        h_ref,
        kappa1: pair.kappa1,
        kappa2: pair.kappa2,
        split,
        asymptotic_ratio,
        asymptotic_c_tilde: c_tilde,
        asymptotic_ratio_calibrated,
        far_leakage: kd.far_leakage,
        warnings,
        options: opts.clone(),
        iso,
        eigen,
    })
}

/// Index of the reported time closest to `anchor` in log scale.
pub fn calibration_index(times: &[f64], anchor: Option<f64>) -> usize {
    match anchor {
        None => 0,
        Some(a) => (0..times.len())
            .min_by(|&i, &j| {
                let d = |k: usize| (times[k].ln() - a.ln()).abs();
                d(i).total_cmp(&d(j))
            })
            .unwrap_or(0),
    }
}

/// Volumes over which J_ν is compared with the closed form.
pub const ASYMPTOTIC_WINDOW: (f64, f64) = (1e2, 1e8);

/// min and max of a/b over the asymptotic window.
pub fn ratio_range(a: &IsoProfile, b: &IsoProfile) -> (f64, f64) {
    let rs: Vec<f64> = logspace(ASYMPTOTIC_WINDOW.0, ASYMPTOTIC_WINDOW.1, 61)
        .into_iter()
        .map(|v| a.eval(v) / b.eval(v))
        .collect();
    if rs.iter().any(|r| !r.is_finite()) {
        return (f64::NAN, f64::NAN);
    }
    (
        rs.iter().cloned().fold(f64::INFINITY, f64::min),
        rs.iter().cloned().fold(0.0, f64::max),
    )
}

fn iso_rows(
    j_plus: &IsoProfile,
    j_mono: &IsoProfile,
    j_asym: &IsoProfile,
    n: u32,
    opts: &PipelineOptions,
) -> Result<Vec<IsoRow>> {
    let sphere = profile_sphere(n.max(2), opts.sphere_constant)?;
    let warped = warped_product_profile(j_mono.clone(), sphere, 1.0, 1.0)?;
    Ok(logspace(opts.iso_range.0, opts.iso_range.1, opts.iso_points)
        .into_iter()
        .map(|v| IsoRow {
            v,
            j_nu: j_plus.eval(v),
            j_warped: warped.eval(v),
            j_asymptotic: j_asym.eval(v),
        })
        .collect())
}

fn eigen_rows(
    plus_view: &WeightedModel,
    j_plus: &IsoProfile,
    j_mono: &IsoProfile,
    opts: &PipelineOptions,
) -> Result<Vec<EigenRow>> {
    logspace(opts.eigen_range.0, opts.eigen_range.1, opts.eigen_points)
        .into_iter()
        .map(|r| {
            let lambda1 = lambda1_dirichlet(plus_view, r, BoundaryCondition::Neumann)?;
            let rayleigh_upper = lambda1_rayleigh_upper(plus_view, r)?;
            let v = crate::geometry::volume(plus_view, r)?;
            Ok(EigenRow {
                r,
                lambda1,
                rayleigh_upper,
                fk_lower: 0.25 * (j_mono.eval(v) / v).powi(2),
                fk_lower_raw: 0.25 * (j_plus.eval(v) / v).powi(2),
            })
        })
        .collect()
}
