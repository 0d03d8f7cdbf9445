//! Lower isoperimetric functions: weighted half-lines, spheres, warped
//! products through the functional inequality, and the closed-form profile
//! of the two-end weighted model.

use crate::error::{arg, numeric, Error, Result};
use crate::model::WeightedModel;
use crate::monotone::{Direction, Extrapolation, Interpolation, MonotoneTab};
use crate::profile::Domain;
use crate::quadrature::{golden_min, logspace, simpson, Tolerance};
use std::fmt;
use std::sync::Arc;

/// Volume and area of a half-line model sampled in x = log R, with the step
/// shrunk where log Ṽ grows faster than x.
///
/// Between knots, log Ṽ is a cubic Hermite interpolant in x = log R using the
/// exact slope R·S̃/Ṽ; below the first knot Ṽ is continued as a power of R.
#[derive(Clone, Debug)]
pub struct HalfLineTable {
    model: WeightedModel,
    x: Vec<f64>,
    log_v: Vec<f64>,
    slope: Vec<f64>,
    log_s: Vec<f64>,
    total_mass: f64,
}

const LOG_STEP: f64 = 0.01;
const FIRST_RADIUS: f64 = 1e-8;
/// Default reach of tabulated volumes.
pub const DEFAULT_VOLUME_CAP: f64 = 1e24;
pub const DEFAULT_RADIUS_LIMIT: f64 = 3e5;

fn cubic(x: f64, x0: f64, x1: f64, p0: (f64, f64), p1: (f64, f64)) -> (f64, f64) {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let (y0, m0) = p0;
    let (y1, m1) = p1;
    let s2 = s * s;
    let s3 = s2 * s;
    let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * m0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * m1;
    let d = (6.0 * s2 - 6.0 * s) / h * (y0 - y1) + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (3.0 * s2 - 2.0 * s) * m1;
    (v, d)
}

impl HalfLineTable {
    /// Tabulate until Ṽ exceeds `v_cap`, R exceeds `r_limit` or the support ends.
    pub fn build(model: &WeightedModel, v_cap: f64, r_limit: f64) -> Result<Self> {
        if model.domain() != Domain::HalfLine {
            return arg("a half-line table needs a half-line model or view");
        }
        let (lo, hi) = model.support();
        if lo != 0.0 {
            return arg("half-line models must start at r = 0");
        }
        let r_end = hi.min(r_limit);
        let f = |t: f64| model.weighted_area(t);
        let tol = Tolerance::tight();
        let mut r = FIRST_RADIUS.min(0.5 * r_end);
        let mut v = simpson(f, 0.0, r, tol)?;
        let (mut x, mut log_v, mut slope, mut log_s) = (vec![], vec![], vec![], vec![]);
        loop {
            let ls = model.log_weighted_area(r);
            let lv = v.ln();
            if !(ls.is_finite() && lv.is_finite()) {
                return numeric(format!("volume table broke down at R = {r} (log S̃ = {ls}, Ṽ = {v})"));
            }
            x.push(r.ln());
            log_v.push(lv);
            log_s.push(ls);
            slope.push((r.ln() + ls - lv).exp());
            if r >= r_end || v >= v_cap {
                break;
            }
            let step = LOG_STEP / slope.last().unwrap().max(1.0);
            let next = (r * step.exp()).min(r_end);
            v += simpson(f, r, next, tol)?;
            r = next;
        }
        if x.len() < 3 {
            return numeric("volume table has fewer than three knots");
        }
        let total_mass = if hi.is_finite() && r >= hi { v } else { f64::INFINITY };
        Ok(HalfLineTable {
            model: model.clone(),
            x,
            log_v,
            slope,
            log_s,
            total_mass,
        })
    }

    pub fn model(&self) -> &WeightedModel {
        &self.model
    }

    /// Largest tabulated radius and volume.
    pub fn reach(&self) -> (f64, f64) {
        (self.x.last().unwrap().exp(), self.log_v.last().unwrap().exp())
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Knot radii, volumes and areas.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.x.len()).map(|k| (self.x[k].exp(), self.log_v[k].exp(), self.log_s[k].exp()))
    }

    /// log S̃ is nondecreasing along the knots (ties allowed).
    pub fn area_nondecreasing(&self) -> Option<f64> {
        self.log_s
            .windows(2)
            .zip(&self.x)
            .find(|(w, _)| w[1] < w[0] - 1e-12 * w[0].abs().max(1.0))
            .map(|(_, x)| x.exp())
    }

    fn log_volume_x(&self, x: f64) -> f64 {
        if x <= self.x[0] {
            return self.log_v[0] + self.slope[0] * (x - self.x[0]);
        }
        let k = self.x.partition_point(|&p| p <= x).min(self.x.len() - 1) - 1;
        cubic(
            x,
            self.x[k],
            self.x[k + 1],
            (self.log_v[k], self.slope[k]),
            (self.log_v[k + 1], self.slope[k + 1]),
        )
        .0
    }

    /// Ṽ(R) from the table.
    pub fn volume(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.log_volume_x(r.ln()).exp()
    }

    /// R with Ṽ(R) = v; `None` beyond the table.
    pub fn radius_of(&self, v: f64) -> Option<f64> {
        if !(v > 0.0) {
            return Some(0.0);
        }
        let l = v.ln();
        let m = self.x.len() - 1;
        if l > self.log_v[m] {
            return None;
        }
        if l <= self.log_v[0] {
            return Some((self.x[0] + (l - self.log_v[0]) / self.slope[0]).exp());
        }
        let k = self.log_v.partition_point(|&p| p < l).clamp(1, m) - 1;
        let (x0, x1) = (self.x[k], self.x[k + 1]);
        let p0 = (self.log_v[k], self.slope[k]);
        let p1 = (self.log_v[k + 1], self.slope[k + 1]);
        let (mut a, mut b) = (x0, x1);
        let mut x = x0 + (x1 - x0) * (l - p0.0) / (p1.0 - p0.0);
        for _ in 0..60 {
            let (y, d) = cubic(x, x0, x1, p0, p1);
            let g = y - l;
            if g.abs() <= 1e-15 * l.abs().max(1.0) {
                break;
            }
            if g > 0.0 {
                b = x;
            } else {
                a = x;
            }
            let nx = x - g / d;
            x = if d > 0.0 && nx > a && nx < b { nx } else { 0.5 * (a + b) };
            if b - a <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        Some(x.exp())
    }
}

/// Shape of a lower isoperimetric function.
#[derive(Clone)]
pub enum ProfileKind {
    /// J_ν = S̃ ∘ Ṽ⁻¹ of a half-line model.
    HalfLine(Arc<HalfLineTable>),
    /// c_n·v^((n−2)/(n−1)) on (0, ½], mirrored on (½, 1).
    Sphere {
        n: u32,
        c_n: f64,
    },
    /// c·v^p on (0, ∞).
    Power {
        c: f64,
        p: f64,
    },
    Warped(Arc<WarpedProfile>),
    /// c̃·w/(log w)^((1−α)/α) for w ≥ 2 and c̃c'·w^((n−1)/n) below.
    Asymptotic {
        alpha: f64,
        n: u32,
        c_tilde: f64,
        c_prime: f64,
    },
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// v·min(J(v)/v, running minimum of J/v over earlier knots).
    Envelope {
        inner: Arc<IsoProfile>,
        knots: Vec<f64>,
        run_min: Vec<f64>,
    },
}

impl fmt::Debug for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileKind::HalfLine(t) => write!(f, "HalfLine(reach {:?})", t.reach()),
            ProfileKind::Sphere { n, c_n } => write!(f, "Sphere(n = {n}, c = {c_n})"),
            ProfileKind::Power { c, p } => write!(f, "Power({c}·v^{p})"),
            ProfileKind::Warped(w) => write!(f, "Warped(P = {}, c = {})", w.p, w.c),
            ProfileKind::Asymptotic { alpha, n, c_tilde, .. } => {
                write!(f, "Asymptotic(α = {alpha}, n = {n}, c̃ = {c_tilde})")
            }
            ProfileKind::Function(_) => write!(f, "Function"),
            ProfileKind::Envelope { inner, .. } => write!(f, "Envelope({:?})", inner.kind),
        }
    }
}

/// A lower isoperimetric function J on (0, total_mass).
#[derive(Clone, Debug)]
pub struct IsoProfile {
    kind: ProfileKind,
    total_mass: f64,
    /// Largest volume at which J can be evaluated.
    reach: f64,
    pub j_over_v_nonincreasing: bool,
    pub continuous: bool,
}

const FLAG_SAMPLES: usize = 256;

impl IsoProfile {
    fn finish(kind: ProfileKind, total_mass: f64, reach: f64, continuous: bool) -> Self {
        let mut p = IsoProfile {
            kind,
            total_mass,
            reach,
            j_over_v_nonincreasing: false,
            continuous,
        };
        p.j_over_v_nonincreasing = p.check_j_over_v(FLAG_SAMPLES).is_none();
        p
    }

    /// Wrap an arbitrary positive function on (0, total_mass).
    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static, total_mass: f64) -> Self {
        Self::finish(ProfileKind::Function(Arc::new(f)), total_mass, total_mass, true)
    }

    /// J(v) = c·v^p on (0, ∞).
    pub fn power(c: f64, p: f64) -> Result<Self> {
        if !(c > 0.0 && p.is_finite()) {
            return arg("power profile needs c > 0 and finite p");
        }
        Ok(Self::finish(
            ProfileKind::Power { c, p },
            f64::INFINITY,
            f64::INFINITY,
            true,
        ))
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn reach(&self) -> f64 {
        self.reach
    }

    /// Sampling window used for flags and hypothesis checks.
    pub fn sample_range(&self) -> (f64, f64) {
        let lo = match &self.kind {
            ProfileKind::HalfLine(t) => t.log_v[0].exp(),
            ProfileKind::Envelope { knots, .. } => knots[0],
            _ => 1e-8 * self.total_mass.min(1.0),
        };
        let hi = if self.total_mass.is_finite() {
            self.total_mass * (1.0 - 1e-9)
        } else if self.reach.is_finite() {
            self.reach
        } else {
            1e12
        };
        (lo, hi)
    }

    /// J(v); NaN outside the evaluable range.
    pub fn eval(&self, v: f64) -> f64 {
        if !(v > 0.0) || v > self.reach || (self.total_mass.is_finite() && v >= self.total_mass) {
            return f64::NAN;
        }
        match &self.kind {
            ProfileKind::HalfLine(t) => match t.radius_of(v) {
                Some(r) => t.model.weighted_area(r),
                None => f64::NAN,
            },
            ProfileKind::Sphere { n, c_n } => {
                let w = v.min(1.0 - v);
                c_n * w.powf((*n as f64 - 2.0) / (*n as f64 - 1.0))
            }
            ProfileKind::Power { c, p } => c * v.powf(*p),
            ProfileKind::Warped(w) => w.eval(v),
            ProfileKind::Asymptotic {
                alpha,
                n,
                c_tilde,
                c_prime,
            } => {
                if v >= 2.0 {
                    c_tilde * v / v.ln().powf((1.0 - alpha) / alpha)
                } else {
                    c_tilde * c_prime * v.powf((*n as f64 - 1.0) / *n as f64)
                }
            }
            ProfileKind::Function(f) => f(v),
            ProfileKind::Envelope { inner, knots, run_min } => {
                let q = inner.eval(v) / v;
                let k = knots.partition_point(|&x| x <= v);
                if k == 0 {
                    q * v
                } else {
                    q.min(run_min[k - 1]) * v
                }
            }
        }
    }

    /// The largest function below J with J/v nonincreasing, resolved on
    /// `samples` log-spaced volumes. Still a lower isoperimetric function.
    pub fn ratio_envelope(&self, samples: usize) -> IsoProfile {
        let (lo, hi) = self.sample_range();
        let knots = logspace(lo, hi, samples.max(2));
        let mut run_min = Vec::with_capacity(knots.len());
        let mut m = f64::INFINITY;
        for &v in &knots {
            m = m.min(self.eval(v) / v);
            run_min.push(m);
        }
        Self::finish(
            ProfileKind::Envelope {
                inner: Arc::new(self.clone()),
                knots,
                run_min,
            },
            self.total_mass,
            self.reach,
            self.continuous,
        )
    }

    /// First sampled pair violating J(v)/v nonincreasing, if any.
    pub fn check_j_over_v(&self, samples: usize) -> Option<(f64, f64)> {
        let (lo, hi) = self.sample_range();
        let vs = logspace(lo, hi, samples);
        let mut prev = f64::INFINITY;
        let mut prev_v = lo;
        for v in vs {
            let q = self.eval(v) / v;
            if !q.is_finite() || q > prev * (1.0 + 1e-9) {
                return Some((prev_v, v));
            }
            prev = q;
            prev_v = v;
        }
        None
    }
}

/// J_ν(v) = S̃(R) where v = Ṽ(R), for a half-line model with nondecreasing S̃.
pub fn profile_halfline(model: &WeightedModel) -> Result<IsoProfile> {
    profile_halfline_with(model, DEFAULT_VOLUME_CAP, DEFAULT_RADIUS_LIMIT)
}

pub fn profile_halfline_with(model: &WeightedModel, v_cap: f64, r_limit: f64) -> Result<IsoProfile> {
    let table = HalfLineTable::build(model, v_cap, r_limit)?;
    if let Some(r) = table.area_nondecreasing() {
        return Err(Error::Precondition(format!(
            "S̃ decreases near R = {r}; the half-line profile needs S̃ nondecreasing"
        )));
    }
    let total = table.total_mass;
    let reach = table.reach().1;
    Ok(IsoProfile::finish(
        ProfileKind::HalfLine(Arc::new(table)),
        total,
        reach,
        true,
    ))
}

/// J_σ(v) = c_n v^((n−2)/(n−1)) on (0, ½], symmetric about ½.
pub fn profile_sphere(n: u32, c_n: f64) -> Result<IsoProfile> {
    if n < 2 {
        return arg(format!("sphere profile needs n ≥ 2, got {n}"));
    }
    if !(c_n > 0.0) {
        return arg("sphere constant must be positive");
    }
    Ok(IsoProfile::finish(ProfileKind::Sphere { n, c_n }, 1.0, 1.0, true))
}

/// c̃·w/(log w)^((1−α)/α) for w ≥ 2, continued by c̃c'·w^((n−1)/n) below 2.
pub fn asymptotic_profile(alpha: f64, n: u32, c_tilde: f64) -> Result<IsoProfile> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Range(format!("α must lie in (0, 1], got {alpha}")));
    }
    if n < 1 || !(c_tilde > 0.0) {
        return arg("asymptotic profile needs n ≥ 1 and c̃ > 0");
    }
    let e = (1.0 - alpha) / alpha;
    let c_prime = 2f64.powf(1.0 / n as f64) / std::f64::consts::LN_2.powf(e);
    Ok(IsoProfile::finish(
        ProfileKind::Asymptotic {
            alpha,
            n,
            c_tilde,
            c_prime,
        },
        f64::INFINITY,
        f64::INFINITY,
        true,
    ))
}

const H0_GRID: usize = 512;
const Y_SPAN: f64 = 1e-12;

/// Which hypothesis of the functional inequality failed.
fn hypothesis_violation(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, name: &str) -> Option<String> {
    let xs = logspace(lo, hi, FLAG_SAMPLES);
    let mut prev: Option<(f64, f64)> = None;
    for x in xs {
        let y = f(x);
        if !(y > 0.0 && y.is_finite()) {
            return Some(format!("{name}({x}) = {y} is not positive"));
        }
        if let Some((px, py)) = prev {
            if y < py * (1.0 - 1e-9) {
                return Some(format!("{name} decreases between {px} and {x}"));
            }
            if y / x > (py / px) * (1.0 + 1e-9) {
                return Some(format!("{name}(x)/x increases between {px} and {x}"));
            }
        }
        prev = Some((x, y));
    }
    None
}

/// Check the monotonicity hypotheses of f on `[x_lo, x_hi]` and of g on
/// `(0, P/2]` by sampling.
pub fn validate_hypotheses(f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64, p: f64, x_range: (f64, f64)) -> Result<()> {
    if let Some(m) = hypothesis_violation(f, x_range.0, x_range.1, "f") {
        return Err(Error::Precondition(m));
    }
    if let Some(m) = hypothesis_violation(g, 0.5 * p * Y_SPAN, 0.5 * p, "g") {
        return Err(Error::Precondition(m));
    }
    Ok(())
}

fn h0_search(f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64, p: f64, v: f64, x_max: f64) -> Result<f64> {
    let y_hi = 0.5 * p;
    let y_lo = (y_hi * Y_SPAN).max(v / x_max);
    if !(y_lo < y_hi) {
        return Err(Error::Range(format!("volume {v} exceeds the range where f is known")));
    }
    let obj = |y: f64| f(v / y) * y + g(y) * (v / y);
    let ys = logspace(y_lo, y_hi, H0_GRID);
    let vals: Vec<f64> = ys.iter().map(|&y| obj(y)).collect();
    if let Some(k) = vals.iter().position(|o| !o.is_finite()) {
        return numeric(format!("objective not finite at y = {}", ys[k]));
    }
    let k = (0..vals.len()).fold(0, |b, i| if vals[i] < vals[b] { i } else { b });
    let a = ys[k.saturating_sub(1)].ln();
    let b = ys[(k + 1).min(ys.len() - 1)].ln();
    let (_, best) = golden_min(|u| obj(u.exp()), a, b, 1e-12);
    Ok(best.min(vals[k]))
}

/// h₀(v) = inf over xy = v, 0 < y ≤ P/2 of f(x)y + g(y)x.
pub fn h0_inf(f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64, p: f64, v: f64) -> Result<f64> {
    if !(p > 0.0 && v > 0.0) {
        return arg("h₀ needs P > 0 and v > 0");
    }
    let x_lo = 2.0 * v / p;
    validate_hypotheses(f, g, p, (x_lo, x_lo / Y_SPAN))?;
    h0_search(f, g, p, v, f64::INFINITY)
}

/// min(h₀(v)/6, f(v/P)·P/8).
pub fn functional_lower_bound(f: &dyn Fn(f64) -> f64, g: &dyn Fn(f64) -> f64, p: f64, v: f64) -> Result<f64> {
    let h0 = h0_inf(f, g, p, v)?;
    Ok((h0 / 6.0).min(f(v / p) * p / 8.0))
}

/// The warped-product profile c·min(J₀/6, J₁(v/P)P/8) with c = ½min(1, 1/C₀).
#[derive(Debug)]
pub struct WarpedProfile {
    pub j1: IsoProfile,
    pub j2: IsoProfile,
    pub p: f64,
    pub c0: f64,
    pub c: f64,
}

impl WarpedProfile {
    fn eval(&self, v: f64) -> f64 {
        let f = |x: f64| self.j1.eval(x);
        let g = |y: f64| self.j2.eval(y);
        match h0_search(&f, &g, self.p, v, self.j1.reach()) {
            Ok(h0) => self.c * (h0 / 6.0).min(f(v / self.p) * self.p / 8.0),
            Err(_) => f64::NAN,
        }
    }
}

pub fn warped_product_profile(j1: IsoProfile, j2: IsoProfile, mu2_total: f64, c0: f64) -> Result<IsoProfile> {
    if j1.total_mass().is_finite() {
        return arg("J₁ must live on a factor of infinite volume");
    }
    if !(mu2_total > 0.0 && mu2_total.is_finite()) || (j2.total_mass() - mu2_total).abs() > 1e-12 * mu2_total {
        return arg(format!(
            "J₂ total mass {} does not match μ₂(M₂) = {mu2_total}",
            j2.total_mass()
        ));
    }
    if !(c0 > 0.0) {
        return arg("C₀ must be positive");
    }
    let (lo, hi) = j1.sample_range();
    validate_hypotheses(&|x| j1.eval(x), &|y| j2.eval(y), mu2_total, (lo, hi))?;
    let c = 0.5 * (1.0f64).min(1.0 / c0);
    let reach = j1.reach() * mu2_total;
    let w = WarpedProfile {
        j1,
        j2,
        p: mu2_total,
        c0,
        c,
    };
    Ok(IsoProfile::finish(
        ProfileKind::Warped(Arc::new(w)),
        f64::INFINITY,
        reach,
        true,
    ))
}

/// A nonincreasing function together with its generalized inverse.
#[derive(Clone, Debug)]
pub struct InversePair {
    pub phi: MonotoneTab,
    pub phi_star: MonotoneTab,
    pub common_integral: f64,
}

fn check_inverse_input(phi: &MonotoneTab) -> Result<()> {
    if phi.direction() != Direction::Nonincreasing {
        return arg("generalized inverse needs a nonincreasing function");
    }
    let b = phi.breakpoints();
    let v = phi.values();
    if b[0] > 0.0 {
        return arg("φ must be tabulated from t = 0");
    }
    if v.iter().any(|&x| x < 0.0) {
        return arg("φ must be nonnegative");
    }
    if phi.extrapolation() == Extrapolation::Hold && *v.last().unwrap() != 0.0 {
        return arg("φ is not integrable: it does not vanish past the last breakpoint");
    }
    Ok(())
}

/// φ*(s) = sup{t > 0 : φ(t) > s} with sup ∅ = 0. Piecewise-constant input is
/// inverted exactly; piecewise-linear input must be strictly decreasing
/// before it drops to zero.
pub fn generalized_inverse(phi: &MonotoneTab) -> Result<InversePair> {
    check_inverse_input(phi)?;
    let b = phi.breakpoints();
    let v = phi.values();
    let m = b.len() - 1;
    let phi_star = match phi.interpolation() {
        Interpolation::PiecewiseConstant => {
            // Cell k (value v_k) is [b_k, b_{k+1}) when right continuous and
            // (b_{k-1}, b_k] otherwise; only the cell ends matter for the sup.
            let cells: Vec<(f64, f64)> = if phi.right_continuous() {
                (0..m).map(|k| (v[k], b[k + 1])).collect()
            } else {
                (1..=m).map(|k| (v[k], b[k])).collect()
            };
            let mut levels: Vec<f64> = cells.iter().map(|c| c.0).filter(|&x| x > 0.0).collect();
            levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
            levels.dedup();
            let mut bps = vec![0.0];
            let mut vals = Vec::new();
            let sup_above = |s: f64| cells.iter().filter(|c| c.0 > s).map(|c| c.1).fold(0.0, f64::max);
            vals.push(sup_above(0.0));
            for &w in &levels {
                bps.push(w);
                vals.push(sup_above(w));
            }
            if bps.len() == 1 {
                bps.push(1.0);
                vals.push(0.0);
            }
            MonotoneTab::new(
                bps,
                vals,
                Direction::Nonincreasing,
                Interpolation::PiecewiseConstant,
                true,
                Extrapolation::Zero,
            )?
        }
        Interpolation::Linear => {
            let tail = if phi.extrapolation() == Extrapolation::Zero {
                v[m]
            } else {
                0.0
            };
            if v[..m].windows(2).any(|w| w[1] >= w[0]) || (m > 0 && v[m] >= v[m - 1]) {
                return arg("piecewise-linear φ must be strictly decreasing");
            }
            let mut bps = Vec::with_capacity(m + 2);
            let mut vals = Vec::with_capacity(m + 2);
            bps.push(0.0);
            vals.push(b[m]);
            if tail > 0.0 {
                bps.push(tail);
                vals.push(b[m]);
            }
            for k in (0..m).rev() {
                bps.push(v[k]);
                vals.push(b[k].max(0.0));
            }
            MonotoneTab::new(
                bps,
                vals,
                Direction::Nonincreasing,
                Interpolation::Linear,
                true,
                Extrapolation::Zero,
            )?
        }
    };
    let a = phi.integral();
    let s = phi_star.integral();
    if !a.is_finite() || (a - s).abs() > 1e-8 * a.abs().max(1e-300) {
        return numeric(format!("∫φ = {a} and ∫φ* = {s} disagree"));
    }
    Ok(InversePair {
        phi: phi.clone(),
        phi_star,
        common_integral: a,
    })
}
