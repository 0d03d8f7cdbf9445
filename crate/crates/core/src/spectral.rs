//! Faber–Krahn functions, first Dirichlet eigenvalues of balls, γ-inversion
//! upper bounds on the heat kernel and the matching lower bounds.

use crate::error::{arg, numeric, Error, Result};
use crate::isoperimetry::{HalfLineTable, IsoProfile};
use crate::model::WeightedModel;
use crate::profile::{Domain, Family};
use crate::quadrature::{
    golden_min, linear_fit, logspace, tail, CumulativeTable, TailDirection, TailOutcome, Tolerance,
};
use crate::solver::BoundaryCondition;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
pub enum FkKind {
    /// Λ(v) = ¼(J(v)/v)².
    FromIso(IsoProfile),
    /// Λ(v) = c·v^(−2/n).
    Power {
        c: f64,
        n: f64,
    },
    /// Λ(v) = c·min_i Λ_i(Qv).
    ConnectedSum {
        parts: Vec<FaberKrahnFunction>,
        c: f64,
        q: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for FkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FkKind::FromIso(j) => write!(f, "FromIso({:?})", j.kind()),
            FkKind::Power { c, n } => write!(f, "Power({c}·v^(-2/{n}))"),
            FkKind::ConnectedSum { parts, c, q } => write!(f, "ConnectedSum({} parts, c = {c}, Q = {q})", parts.len()),
            FkKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A positive function Λ on (0, ∞) bounding λ₁ of every set of volume v.
#[derive(Clone, Debug)]
pub struct FaberKrahnFunction {
    kind: FkKind,
    pub nonincreasing: bool,
    pub integrable_at_zero: bool,
}

const FK_SAMPLES: usize = 256;

impl FaberKrahnFunction {
    fn finish(kind: FkKind) -> Self {
        let mut fk = FaberKrahnFunction {
            kind,
            nonincreasing: false,
            integrable_at_zero: false,
        };
        fk.nonincreasing = fk.sampled_nonincreasing();
        fk.integrable_at_zero = fk.probe_integrability();
        fk
    }

    pub fn power(c: f64, n: f64) -> Result<Self> {
        if !(c > 0.0 && n > 0.0) {
            return arg("power Faber–Krahn function needs c > 0 and n > 0");
        }
        Ok(Self::finish(FkKind::Power { c, n }))
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::finish(FkKind::Custom(Arc::new(f)))
    }

    pub fn kind(&self) -> &FkKind {
        &self.kind
    }

    /// Λ(v); NaN where the underlying profile is not available.
    pub fn eval(&self, v: f64) -> f64 {
        match &self.kind {
            FkKind::FromIso(j) => {
                let q = j.eval(v) / v;
                0.25 * q * q
            }
            FkKind::Power { c, n } => c * v.powf(-2.0 / n),
            FkKind::ConnectedSum { parts, c, q } => {
                let m = parts.iter().map(|p| p.eval(q * v)).fold(f64::INFINITY, |a, b| {
                    if a.is_nan() || b.is_nan() {
                        f64::NAN
                    } else {
                        a.min(b)
                    }
                });
                c * m
            }
            FkKind::Custom(f) => f(v),
        }
    }

    /// Largest v at which Λ can be evaluated.
    pub fn reach(&self) -> f64 {
        match &self.kind {
            FkKind::FromIso(j) => {
                let m = j.total_mass();
                if m.is_finite() {
                    m * (1.0 - 1e-12)
                } else {
                    j.reach()
                }
            }
            FkKind::ConnectedSum { parts, q, .. } => parts.iter().map(|p| p.reach()).fold(f64::INFINITY, f64::min) / q,
            _ => f64::INFINITY,
        }
    }

    fn sampled_nonincreasing(&self) -> bool {
        let hi = self.reach().min(1e12);
        let mut prev = f64::INFINITY;
        for v in logspace(1e-12, hi, FK_SAMPLES) {
            let l = self.eval(v);
            if !(l > 0.0) || l > prev * (1.0 + 1e-9) {
                return false;
            }
            prev = l;
        }
        true
    }

    /// ∫₀¹ dv/(vΛ(v)) converges, probed in u = log v.
    fn probe_integrability(&self) -> bool {
        let start = self.reach().min(1.0).ln();
        let f = |u: f64| 1.0 / self.eval(u.exp());
        matches!(
            tail(f, start, TailDirection::Down, 1.0, 1e-10, 2000.0, Tolerance::default()),
            Ok(TailOutcome::Converged(_))
        )
    }
}

/// Λ(v) = ¼(J(v)/v)².
pub fn fk_from_iso(j: &IsoProfile) -> Result<FaberKrahnFunction> {
    if !j.j_over_v_nonincreasing {
        return Err(Error::Precondition("J(v)/v is not nonincreasing".into()));
    }
    let mut fk = FaberKrahnFunction::finish(FkKind::FromIso(j.clone()));
    fk.nonincreasing = true;
    Ok(fk)
}

/// Λ(v) = c·min_i Λ_i(Qv).
pub fn fk_connected_sum(parts: &[FaberKrahnFunction], c: f64, q: f64) -> Result<FaberKrahnFunction> {
    if parts.is_empty() {
        return arg("a connected sum needs at least one part");
    }
    if !(c > 0.0 && q > 1.0) {
        return arg(format!("connected sum needs c > 0 and Q > 1, got c = {c}, Q = {q}"));
    }
    let nonincreasing = parts.iter().all(|p| p.nonincreasing);
    let integrable = parts.iter().all(|p| p.integrable_at_zero);
    Ok(FaberKrahnFunction {
        kind: FkKind::ConnectedSum {
            parts: parts.to_vec(),
            c,
            q,
        },
        nonincreasing,
        integrable_at_zero: integrable,
    })
}

/// Solves t = ∫₀^γ dv/(vΛ(v)) for γ, tabulating the integral in log v.
#[derive(Clone, Debug)]
pub struct GammaInverter {
    fk: FaberKrahnFunction,
    table: CumulativeTable,
    below: f64,
}

const U_MIN: f64 = -30.0;
const U_STEP: f64 = 0.05;

impl GammaInverter {
    /// Prepare inversions for every t up to `t_max`.
    pub fn new(fk: &FaberKrahnFunction, t_max: f64) -> Result<Self> {
        if !fk.integrable_at_zero {
            return Err(Error::Precondition("∫₀ dv/(vΛ(v)) diverges; γ is undefined".into()));
        }
        if !(t_max > 0.0) {
            return arg("t_max must be positive");
        }
        let f = |u: f64| 1.0 / fk.eval(u.exp());
        let below = match tail(f, U_MIN, TailDirection::Down, 1.0, 1e-12, 2000.0, Tolerance::default())? {
            TailOutcome::Converged(s) => s,
            TailOutcome::Diverged { .. } => return Err(Error::Precondition("∫₀ dv/(vΛ(v)) diverges".into())),
        };
        let u_cap = fk.reach().ln().min(700.0);
        let mut hi = (U_MIN + 10.0).min(u_cap);
        loop {
            let steps = ((hi - U_MIN) / U_STEP).ceil() as usize;
            let knots: Vec<f64> = (0..=steps).map(|k| (U_MIN + k as f64 * U_STEP).min(hi)).collect();
            let mut knots = knots;
            knots.dedup();
            let table = CumulativeTable::build(f, knots, Tolerance::default())?;
            if !table.total().is_finite() {
                return numeric("γ integrand is not finite on the bracket");
            }
            if below + table.total() >= t_max {
                return Ok(GammaInverter {
                    fk: fk.clone(),
                    table,
                    below,
                });
            }
            if hi >= u_cap {
                return numeric(format!(
                    "γ bracket failure: ∫ dv/(vΛ) reaches only {} at v = {:.3e} < t = {t_max}",
                    below + table.total(),
                    hi.exp()
                ));
            }
            // Grow the bracket geometrically in v.
            hi = (U_MIN + 2.0 * (hi - U_MIN)).min(u_cap);
        }
    }

    /// γ(t).
    pub fn gamma(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return arg("t must be positive");
        }
        let f = |u: f64| 1.0 / self.fk.eval(u.exp());
        let target = t - self.below;
        if target <= 0.0 {
            // Deep in the tail: bisect directly on the tail integral.
            let (mut lo, mut hi) = (U_MIN - 1.0, U_MIN);
            let int_below = |u: f64| -> Result<f64> {
                Ok(
                    match tail(f, u, TailDirection::Down, 1.0, 1e-12, 2000.0, Tolerance::default())? {
                        TailOutcome::Converged(s) => s,
                        TailOutcome::Diverged { .. } => f64::INFINITY,
                    },
                )
            };
            while int_below(lo)? > t {
                lo -= 2.0 * (hi - lo);
                if lo < -1500.0 {
                    return numeric("γ bracket failure below the table");
                }
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if int_below(mid)? > t {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-10 * mid.abs().max(1.0) * 1e-2 {
                    break;
                }
            }
            return Ok((0.5 * (lo + hi)).exp());
        }
        if target > self.table.total() {
            return numeric(format!("t = {t} beyond the prepared range"));
        }
        Ok(self.table.invert(f, target)?.exp())
    }

    /// sup_x p_t(x, x) ≤ 4/γ(t/2).
    pub fn upper(&self, t: f64) -> Result<f64> {
        Ok(4.0 / self.gamma(0.5 * t)?)
    }
}

/// 4/γ(t/2).
pub fn heat_upper_bound(fk: &FaberKrahnFunction, t: f64) -> Result<f64> {
    GammaInverter::new(fk, 0.5 * t)?.upper(t)
}

/// Resolution of the coarse eigenvalue grid; the fine grid doubles it.
pub const EIGEN_INTERVALS: usize = 1024;

/// Sturm count: number of eigenvalues of the symmetric tridiagonal (a, b) below x.
fn sturm_count(a: &[f64], b: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..a.len() {
        let off = if i == 0 { 0.0 } else { b[i - 1] * b[i - 1] / d };
        d = a[i] - x - off;
        if d == 0.0 {
            d = -f64::EPSILON * (a[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn lowest_eigenvalue(a: &[f64], b: &[f64]) -> Result<f64> {
    let mut hi: f64 = 0.0;
    for i in 0..a.len() {
        let l = if i > 0 { b[i - 1].abs() } else { 0.0 };
        let r = if i < b.len() { b[i].abs() } else { 0.0 };
        hi = hi.max(a[i] + l + r);
    }
    let mut lo = 0.0;
    if !hi.is_finite() {
        return numeric("eigenvalue bracket is not finite");
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(a, b, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi {
            return Ok(0.5 * (lo + hi));
        }
    }
    numeric("Sturm bisection did not converge")
}

/// λ₁ of −(1/S̃)(S̃u')' on (0, R) with Dirichlet data at R, on `intervals` cells.
fn lambda1_on_grid(model: &WeightedModel, r: f64, left: BoundaryCondition, intervals: usize) -> Result<f64> {
    let h = r / intervals as f64;
    let ls = |x: f64| model.log_weighted_area(x);
    let log_cond: Vec<f64> = (0..intervals).map(|i| ls((i as f64 + 0.5) * h) - h.ln()).collect();
    let first = match left {
        BoundaryCondition::Neumann => 0,
        BoundaryCondition::Dirichlet => 1,
    };
    let log_mass: Vec<f64> = (first..intervals)
        .map(|i| {
            if i == 0 {
                let at0 = ls(0.0);
                if at0.is_finite() {
                    at0 + (0.5 * h).ln()
                } else {
                    ls(0.25 * h) + (0.5 * h).ln()
                }
            } else {
                ls(i as f64 * h) + h.ln()
            }
        })
        .collect();
    if log_cond.iter().chain(&log_mass).any(|x| !x.is_finite()) {
        return numeric(format!("area not finite on (0, {r})"));
    }
    let m = log_mass.len();
    let mut a = vec![0.0; m];
    let mut b = vec![0.0; m.saturating_sub(1)];
    for k in 0..m {
        let i = k + first;
        let right = (log_cond[i] - log_mass[k]).exp();
        let left_c = if i > 0 {
            (log_cond[i - 1] - log_mass[k]).exp()
        } else {
            0.0
        };
        a[k] = left_c + right;
        if k + 1 < m {
            b[k] = -(log_cond[i] - 0.5 * (log_mass[k] + log_mass[k + 1])).exp();
        }
    }
    lowest_eigenvalue(&a, &b)
}

fn check_ball(model: &WeightedModel, r: f64) -> Result<()> {
    if model.domain() != Domain::HalfLine || model.support().0 != 0.0 {
        return arg("balls Ω_R = (0, R) need a half-line model starting at 0");
    }
    if !(r > 0.0 && r < model.support().1) {
        return Err(Error::Range(format!("R = {r} outside the support")));
    }
    Ok(())
}

/// Smallest eigenvalue of the ball (0, R), Dirichlet at R and `left_bc` at 0,
/// Richardson-extrapolated from 1024 and 2048 cells.
pub fn lambda1_dirichlet(model: &WeightedModel, r: f64, left_bc: BoundaryCondition) -> Result<f64> {
    lambda1_dirichlet_with(model, r, left_bc, EIGEN_INTERVALS)
}

pub fn lambda1_dirichlet_with(
    model: &WeightedModel,
    r: f64,
    left_bc: BoundaryCondition,
    intervals: usize,
) -> Result<f64> {
    check_ball(model, r)?;
    if intervals < 512 {
        return arg("at least 512 cells are required");
    }
    let coarse = lambda1_on_grid(model, r, left_bc, intervals)?;
    let fine = lambda1_on_grid(model, r, left_bc, 2 * intervals)?;
    let l = (4.0 * fine - coarse) / 3.0;
    if !(l > 0.0) {
        return numeric(format!("extrapolated eigenvalue {l} is not positive"));
    }
    Ok(l)
}

/// 4(S̃(R)/Ṽ(R))².
pub fn lambda1_rayleigh_upper(model: &WeightedModel, r: f64) -> Result<f64> {
    check_ball(model, r)?;
    let v = crate::geometry::volume(model, r)?;
    if !(v > 0.0) {
        return arg("Ṽ(R) must be positive");
    }
    let q = model.weighted_area(r) / v;
    Ok(4.0 * q * q)
}

/// (c/ρ²)·min((V₀/μ(U))², (V₀/μ(U))^(2/n)).
pub fn lambda1_lower_locally_harnack(c: f64, rho: f64, v0: f64, n: f64, mu_u: f64) -> Result<f64> {
    if !(c > 0.0 && rho > 0.0 && v0 > 0.0 && n > 0.0 && mu_u > 0.0) {
        return arg("all arguments must be positive");
    }
    let x = v0 / mu_u;
    Ok(c / (rho * rho) * (x * x).min(x.powf(2.0 / n)))
}

/// c_x/(t log t)^(N/2), for t > e.
///
/// The general decay exponent is built from β = 2max(N+θ, (N+θ)/n);
/// only this evaluator is provided.
pub fn log_lower_bound(big_n: f64, c_x: f64, t: f64) -> Result<f64> {
    if !(t > std::f64::consts::E) {
        return Err(Error::Range(format!("t must exceed e, got {t}")));
    }
    if !(big_n > 0.0 && c_x > 0.0) {
        return arg("N and c_x must be positive");
    }
    Ok(c_x / (t * t.ln()).powf(0.5 * big_n))
}

/// Which λ₁ enters exp(−λ₁t) in the lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSource {
    /// 4(S̃/Ṽ)²; cheap and never below the true λ₁.
    Rayleigh,
    /// Neumann–Dirichlet eigenvalue of the ball.
    Eigen,
}

/// sup_x p_t(x, x) ≥ Ṽ(R)⁻¹exp(−λ₁(R)t), maximized over R.
#[derive(Clone, Debug)]
pub struct LowerBound {
    model: WeightedModel,
    table: HalfLineTable,
    r_lo: f64,
    r_hi: f64,
    alpha: Option<f64>,
    pub source: LambdaSource,
}

const LOWER_GRID: usize = 400;
/// Largest volume tabulated for the lower bound; keeps h² inside its table.
const LOWER_VOLUME_CAP: f64 = 1e200;
const EIGEN_GRID: usize = 40;

impl LowerBound {
    pub fn new(model: &WeightedModel, source: LambdaSource) -> Result<Self> {
        let table = HalfLineTable::build(model, LOWER_VOLUME_CAP, 1e5)?;
        let r_lo = table.samples().next().unwrap().0 * 1e2;
        let r_hi = table.reach().0;
        let alpha = match model.profile().family() {
            Family::ExpAlpha { alpha, .. } => Some(*alpha),
            _ => None,
        };
        Ok(LowerBound {
            model: model.clone(),
            table,
            r_lo,
            r_hi,
            alpha,
            source,
        })
    }

    fn objective(&self, r: f64, t: f64) -> f64 {
        let lv = self.table.volume(r).ln();
        let lambda = match self.source {
            LambdaSource::Rayleigh => 4.0 * (2.0 * (self.model.log_weighted_area(r) - lv)).exp(),
            LambdaSource::Eigen => {
                lambda1_dirichlet(&self.model, r, BoundaryCondition::Neumann).unwrap_or(f64::INFINITY)
            }
        };
        -lv - lambda * t
    }

    /// Best R and the bound at time t.
    pub fn at(&self, t: f64) -> Result<(f64, f64)> {
        let (r, l) = self.log_at(t)?;
        Ok((r, l.exp()))
    }

    /// Best R and the logarithm of the bound; the bound itself underflows
    /// for fast decay.
    pub fn log_at(&self, t: f64) -> Result<(f64, f64)> {
        if !(t > 0.0) {
            return arg("t must be positive");
        }
        let count = match self.source {
            LambdaSource::Rayleigh => LOWER_GRID,
            LambdaSource::Eigen => EIGEN_GRID,
        };
        let mut rs = logspace(self.r_lo, self.r_hi, count);
        if let Some(a) = self.alpha {
            let seed = t.powf(1.0 / (2.0 - a));
            if seed > self.r_lo && seed < self.r_hi {
                rs.push(seed);
                rs.sort_by(|x, y| x.partial_cmp(y).unwrap());
            }
        }
        let vals: Vec<f64> = rs.iter().map(|&r| self.objective(r, t)).collect();
        let k = (0..vals.len()).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
        if !vals[k].is_finite() {
            return numeric("lower-bound objective is not finite");
        }
        let a = rs[k.saturating_sub(1)].ln();
        let b = rs[(k + 1).min(rs.len() - 1)].ln();
        let (u, neg) = golden_min(|u| -self.objective(u.exp(), t), a, b, 1e-10);
        Ok(if -neg > vals[k] {
            (u.exp(), -neg)
        } else {
            (rs[k], vals[k])
        })
    }
}

pub fn heat_lower_bound(model: &WeightedModel, t: f64) -> Result<f64> {
    Ok(LowerBound::new(model, LambdaSource::Rayleigh)?.at(t)?.1)
}

/// Result of fitting value ≈ exp(−a − b·t^β).
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub rss: f64,
    /// −log(value) grows no faster than log t.
    pub polynomial: bool,
}

const BETA_RANGE: (f64, f64) = (0.02, 1.6);

fn fit_at(times: &[f64], y: &[f64], beta: f64) -> (f64, f64, f64) {
    let x: Vec<f64> = times.iter().map(|t| t.powf(beta)).collect();
    linear_fit(&x, y)
}

/// Exponent β of value ≍ exp(−c·t^β).
///
/// −log(value) is fitted as a + b·t^β by least squares, profiling out a and b
/// and searching β; the fit is flagged polynomial when β collapses below 0.05,
/// b is not positive, or a + b·log t explains the data at least as well.
pub fn fit_decay_exponent(times: &[f64], values: &[f64]) -> Result<DecayFit> {
    if times.len() != values.len() || times.len() < 4 {
        return arg("need at least four (t, value) pairs");
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || !(times[0] > 0.0) {
        return arg("times must be positive and increasing");
    }
    if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return arg("values must be positive");
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    fit_decay_exponent_log(times, &logs)
}

/// As [`fit_decay_exponent`], from log(value).
pub fn fit_decay_exponent_log(times: &[f64], log_values: &[f64]) -> Result<DecayFit> {
    if times.len() != log_values.len() || times.len() < 4 {
        return arg("need at least four (t, value) pairs");
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || !(times[0] > 0.0) {
        return arg("times must be positive and increasing");
    }
    if log_values.iter().any(|v| !v.is_finite()) {
        return arg("log values must be finite");
    }
    if log_values.windows(2).any(|w| w[1] > w[0]) {
        return arg("values are not monotone decreasing");
    }
    if (times[times.len() - 1] / times[0]).log10() < 1.5 {
        return arg("the series must span at least 1.5 decades of t");
    }
    let y: Vec<f64> = log_values.iter().map(|v| -v).collect();
    let grid = logspace(BETA_RANGE.0, BETA_RANGE.1, 400);
    let rss: Vec<f64> = grid.iter().map(|&b| fit_at(times, &y, b).2).collect();
    let k = (0..rss.len()).fold(0, |b, i| if rss[i] < rss[b] { i } else { b });
    let lo = grid[k.saturating_sub(1)].ln();
    let hi = grid[(k + 1).min(grid.len() - 1)].ln();
    let (u, best) = golden_min(|u| fit_at(times, &y, u.exp()).2, lo, hi, 1e-12);
    let beta = if best <= rss[k] { u.exp() } else { grid[k] };
    let (a, b, rss) = fit_at(times, &y, beta);
    let logs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let (_, _, rss_log) = linear_fit(&logs, &y);
    let scale = y.iter().map(|v| v * v).sum::<f64>().max(1e-300);
    let polynomial = beta < 0.05 || b <= 0.0 || rss_log <= rss + 1e-12 * scale;
    Ok(DecayFit {
        beta,
        a,
        b,
        rss,
        polynomial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isoperimetry::{asymptotic_profile, profile_halfline};
    use crate::profile::RadialProfile;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn flat_interval_eigenvalues() {
        let m = WeightedModel::flat();
        let dd = lambda1_dirichlet(&m, 1.0, BoundaryCondition::Dirichlet).unwrap();
        let nd = lambda1_dirichlet(&m, 1.0, BoundaryCondition::Neumann).unwrap();
        assert_relative_eq!(dd, PI * PI, max_relative = 1e-6);
        assert_relative_eq!(nd, PI * PI / 4.0, max_relative = 1e-6);
        assert_relative_eq!(lambda1_rayleigh_upper(&m, 2.0).unwrap(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn euclidean_disc() {
        // First zero of J₀.
        let j0 = 2.404_825_557_695_773;
        let m = WeightedModel::new(RadialProfile::euclidean(2).unwrap());
        let l = lambda1_dirichlet(&m, 1.0, BoundaryCondition::Neumann).unwrap();
        assert_relative_eq!(l, j0 * j0, max_relative = 1e-4);
    }

    #[test]
    fn power_gamma_closed_form() {
        for n in [1.0, 2.0, 3.0, 5.0] {
            let fk = FaberKrahnFunction::power(1.0, n).unwrap();
            assert!(fk.integrable_at_zero && fk.nonincreasing);
            let inv = GammaInverter::new(&fk, 50.0).unwrap();
            for t in [1e-3, 0.7, 10.0, 50.0] {
                let exact = (2.0 * t / n).powf(0.5 * n);
                assert_relative_eq!(inv.gamma(t).unwrap(), exact, max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn fk_formulas() {
        let j = IsoProfile::power(1.0, 0.5).unwrap();
        let fk = fk_from_iso(&j).unwrap();
        assert_relative_eq!(fk.eval(4.0), 0.25 / 4.0, max_relative = 1e-15);
        let k = IsoProfile::from_fn(|_| 3.0, f64::INFINITY);
        assert_relative_eq!(fk_from_iso(&k).unwrap().eval(2.0), 9.0 / 16.0, max_relative = 1e-15);
        let glued = fk_connected_sum(&[fk.clone(), fk.clone()], 0.5, 2.0).unwrap();
        assert_relative_eq!(glued.eval(3.0), 0.5 * fk.eval(6.0), max_relative = 1e-15);
        assert!(fk_connected_sum(&[], 1.0, 2.0).is_err());
        let bad = IsoProfile::power(1.0, 2.0).unwrap();
        assert!(matches!(fk_from_iso(&bad), Err(Error::Precondition(_))));
        let a = asymptotic_profile(0.5, 2, 1.0).unwrap();
        let la = fk_from_iso(&a).unwrap();
        let v: f64 = 1e6;
        assert_relative_eq!(la.eval(v), 0.25 / v.ln().powi(2), max_relative = 1e-12);
    }

    #[test]
    fn non_integrable_fk_is_rejected() {
        let fk = FaberKrahnFunction::custom(|_| 1.0);
        assert!(!fk.integrable_at_zero);
        assert!(matches!(heat_upper_bound(&fk, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn flat_lower_bound_decays_like_sqrt() {
        let lb = LowerBound::new(&WeightedModel::flat(), LambdaSource::Rayleigh).unwrap();
        for t in [10.0, 100.0, 1000.0] {
            let (r, v) = lb.at(t).unwrap();
            assert_relative_eq!(r, (8.0 * t).sqrt(), max_relative = 1e-4);
            assert_relative_eq!(v, (-0.5f64).exp() / (8.0 * t).sqrt(), max_relative = 1e-6);
        }
    }

    #[test]
    fn harnack_and_log_evaluators() {
        assert_relative_eq!(lambda1_lower_locally_harnack(2.0, 0.5, 3.0, 2.0, 3.0).unwrap(), 8.0);
        assert_relative_eq!(
            lambda1_lower_locally_harnack(1.0, 1.0, 8.0, 3.0, 1.0).unwrap(),
            4.0,
            max_relative = 1e-14
        );
        let e2 = std::f64::consts::E.powi(2);
        assert_relative_eq!(
            log_lower_bound(2.0, 1.0, e2).unwrap(),
            1.0 / (2.0 * e2),
            max_relative = 1e-14
        );
        assert!(log_lower_bound(2.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn decay_fits() {
        let t = logspace(10.0, 1000.0, 25);
        let v: Vec<f64> = t.iter().map(|t| (-t.powf(1.0 / 3.0)).exp()).collect();
        let f = fit_decay_exponent(&t, &v).unwrap();
        assert!((f.beta - 1.0 / 3.0).abs() < 0.02 && !f.polynomial, "{f:?}");
        let p: Vec<f64> = t.iter().map(|t| t.powi(-2)).collect();
        assert!(fit_decay_exponent(&t, &p).unwrap().polynomial);
        let mut wiggle = v.clone();
        wiggle[5] = wiggle[3];
        assert!(fit_decay_exponent(&t, &wiggle).is_err());
    }

    #[test]
    fn halfline_fk_lower_check() {
        let m = WeightedModel::new(RadialProfile::hyperbolic(2).unwrap());
        let j = profile_halfline(&m).unwrap();
        let table = match j.kind() {
            crate::isoperimetry::ProfileKind::HalfLine(t) => t.clone(),
            _ => unreachable!(),
        };
        for r in [0.5, 2.0, 6.0] {
            let l = lambda1_dirichlet(&m, r, BoundaryCondition::Neumann).unwrap();
            let v = table.volume(r);
            let fk = 0.25 * (j.eval(v) / v).powi(2);
            assert!(fk <= l && l <= lambda1_rayleigh_upper(&m, r).unwrap(), "{r}: {fk} {l}");
        }
    }
}
