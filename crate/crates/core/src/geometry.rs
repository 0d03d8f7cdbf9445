//! Volumes, capacities, radial harmonic functions, parabolicity, curvature
//! and the spherical Harnack premise checks of a weighted model.

use crate::error::{arg, Error, Result};
use crate::model::WeightedModel;
use crate::quadrature::{linear_fit, logspace, simpson, tail, TailDirection, TailOutcome, Tolerance};
use serde::Serialize;

/// Ṽ(R) = ∫₀^R S̃(r) dr.
pub fn volume(model: &WeightedModel, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return arg(format!("radius must be nonnegative, got {r}"));
    }
    volume_between(model, 0.0, r)
}

/// ∫_a^b S̃(r) dr.
pub fn volume_between(model: &WeightedModel, a: f64, b: f64) -> Result<f64> {
    model.check_radius(a, "a")?;
    model.check_radius(b, "b")?;
    simpson(|t| model.weighted_area(t), a, b, Tolerance::default())
}

/// The condenser `(B̄_a, B_b)` with its equilibrium potential.
#[derive(Clone, Debug)]
pub struct Capacitor {
    model: WeightedModel,
    pub a: f64,
    pub b: f64,
    pub resistance: f64,
    pub capacity: f64,
}

impl Capacitor {
    /// φ(r) = (∫_r^b dt/S̃) / (∫_a^b dt/S̃): 1 on the inner sphere, 0 on the outer.
    pub fn potential(&self, r: f64) -> Result<f64> {
        if !(r >= self.a && r <= self.b) {
            return Err(Error::Range(format!("r = {r} outside [{}, {}]", self.a, self.b)));
        }
        let part = simpson(|t| self.model.inverse_weighted_area(t), r, self.b, Tolerance::tight())?;
        Ok(part / self.resistance)
    }
}

pub fn capacitor(model: &WeightedModel, a: f64, b: f64) -> Result<Capacitor> {
    if !(a < b) {
        return arg(format!("capacity needs a < b, got a = {a}, b = {b}"));
    }
    model.check_radius(a, "a")?;
    model.check_radius(b, "b")?;
    let resistance = simpson(|t| model.inverse_weighted_area(t), a, b, Tolerance::tight())?;
    if !(resistance > 0.0 && resistance.is_finite()) {
        return Err(Error::NumericFailure(format!("resistance integral is {resistance}")));
    }
    Ok(Capacitor {
        model: model.clone(),
        a,
        b,
        resistance,
        capacity: 1.0 / resistance,
    })
}

/// cap(B̄_a, B_b) = (∫_a^b dt/S̃)⁻¹.
pub fn capacity_annulus(model: &WeightedModel, a: f64, b: f64) -> Result<f64> {
    capacitor(model, a, b).map(|c| c.capacity)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parabolicity {
    Parabolic,
    Nonparabolic,
}

const TAIL_REACH: f64 = 1e7;

/// ∫ dt/S̃ from `from` towards `end`; `None` when the tail diverges under
/// doubling of the truncation radius.
pub fn end_resistance(model: &WeightedModel, from: f64, end: End, stop_rel: f64) -> Result<Option<f64>> {
    let (lo, hi) = model.support();
    let dir = match end {
        End::Plus if hi == f64::INFINITY => TailDirection::Up,
        End::Minus if lo == f64::NEG_INFINITY => TailDirection::Down,
        _ => return arg(format!("the model has no {end:?} end")),
    };
    let out = tail(
        |t| model.inverse_weighted_area(t),
        from,
        dir,
        1.0,
        stop_rel,
        TAIL_REACH,
        Tolerance::tight(),
    )?;
    Ok(match out {
        TailOutcome::Converged(v) => Some(v),
        TailOutcome::Diverged { .. } => None,
    })
}

/// Nonparabolic iff ∫^∞ dt/S̃ < ∞ toward the given end.
pub fn classify_parabolicity(model: &WeightedModel, end: End) -> Result<Parabolicity> {
    let (lo, hi) = model.support();
    let start = match end {
        End::Plus => (lo.max(0.0) + 1.0).min(hi),
        End::Minus => (hi.min(0.0) - 1.0).max(lo),
    };
    Ok(match end_resistance(model, start, end, 1e-6)? {
        Some(_) => Parabolicity::Nonparabolic,
        None => Parabolicity::Parabolic,
    })
}

/// u(r) = c₁ + c₂ ∫_{r₁}^r dt/S̃(t).
#[derive(Clone, Debug)]
pub struct RadialHarmonic {
    model: WeightedModel,
    pub c1: f64,
    pub c2: f64,
    pub r1: f64,
    anchor: f64,
    offset: f64,
}

impl RadialHarmonic {
    pub fn eval(&self, r: f64) -> Result<f64> {
        self.model.check_radius(r, "r")?;
        let i = simpson(
            |t| self.model.inverse_weighted_area(t),
            self.anchor,
            r,
            Tolerance::tight(),
        )?;
        Ok(self.c1 + self.c2 * (self.offset + i))
    }

    /// Values on an increasing grid, integrating between neighbours so that
    /// quadrature noise stays smooth along the grid.
    pub fn eval_grid(&self, nodes: &[f64]) -> Result<Vec<f64>> {
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return arg("grid must be increasing");
        }
        for &r in nodes.iter().take(1).chain(nodes.last()) {
            self.model.check_radius(r, "grid node")?;
        }
        let f = |t: f64| self.model.inverse_weighted_area(t);
        let tol = Tolerance::tight();
        let mut ints = vec![0.0; nodes.len()];
        let split = nodes.partition_point(|&x| x < self.anchor);
        let mut acc = 0.0;
        let mut prev = self.anchor;
        for k in split..nodes.len() {
            acc += simpson(f, prev, nodes[k], tol)?;
            prev = nodes[k];
            ints[k] = acc;
        }
        acc = 0.0;
        prev = self.anchor;
        for k in (0..split).rev() {
            acc += simpson(f, prev, nodes[k], tol)?;
            prev = nodes[k];
            ints[k] = acc;
        }
        Ok(ints
            .into_iter()
            .map(|i| self.c1 + self.c2 * (self.offset + i))
            .collect())
    }
}

pub fn radial_harmonic(model: &WeightedModel, c1: f64, c2: f64, r1: f64) -> Result<RadialHarmonic> {
    let (lo, hi) = model.support();
    let (anchor, offset) = if r1.is_finite() {
        model.check_radius(r1, "r1")?;
        if !model.inverse_weighted_area(r1).is_finite() {
            return arg(format!("∫ dt/S̃ diverges at r1 = {r1}"));
        }
        (r1, 0.0)
    } else if r1 == f64::INFINITY {
        let anchor = (lo.max(0.0) + 1.0).min(hi);
        match end_resistance(model, anchor, End::Plus, 1e-10) {
            Ok(Some(v)) => (anchor, -v),
            _ => return arg("∫ dt/S̃ diverges toward the plus end"),
        }
    } else if r1 == f64::NEG_INFINITY {
        let anchor = (hi.min(0.0) - 1.0).max(lo);
        match end_resistance(model, anchor, End::Minus, 1e-10) {
            Ok(Some(v)) => (anchor, v),
            _ => return arg("∫ dt/S̃ diverges toward the minus end"),
        }
    } else {
        return arg("r1 must not be NaN");
    };
    Ok(RadialHarmonic {
        model: model.clone(),
        c1,
        c2,
        r1,
        anchor,
        offset,
    })
}

/// Sup-norm of the three-point residual of u'' + (S̃'/S̃)u' on interior nodes.
pub fn laplace_residual(model: &WeightedModel, nodes: &[f64], values: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 1..nodes.len().saturating_sub(1) {
        let hm = nodes[i] - nodes[i - 1];
        let hp = nodes[i + 1] - nodes[i];
        let (u0, u1, u2) = (values[i - 1], values[i], values[i + 1]);
        let upp = 2.0 * ((u2 - u1) / hp - (u1 - u0) / hm) / (hp + hm);
        let up = (u2 - u0) / (hp + hm);
        let (_, drift) = model.log_weighted_jet(nodes[i]);
        worst = worst.max((upp + drift * up).abs());
    }
    worst
}

/// −S''(r)/S(r) for two-dimensional models.
pub fn ricci_radial(model: &WeightedModel, r: f64) -> Result<f64> {
    if model.dimension() != 2 {
        return Err(Error::Unsupported(format!(
            "curvature formula is two-dimensional, model has n = {}",
            model.dimension()
        )));
    }
    model.check_radius(r, "r")?;
    let j = model.profile().log_area_jet(model.global(r));
    Ok(-(j.d2 + j.d1 * j.d1))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HarnackReport {
    pub ratio_bound: f64,
    pub n_estimate: f64,
    pub pass: bool,
}

const HARNACK_SAMPLES: usize = 64;

/// Sampled premises of the spherical Harnack proposition for 2-d models.
pub fn check_spherical_harnack_premises(model: &WeightedModel, a: f64, r_range: (f64, f64)) -> Result<HarnackReport> {
    if model.dimension() != 2 {
        return Err(Error::Unsupported(
            "spherical Harnack premises are two-dimensional".into(),
        ));
    }
    if !(a > 1.0) {
        return arg(format!("A must exceed 1, got {a}"));
    }
    let (lo, hi) = r_range;
    if !(lo > 1.0) {
        return arg(format!("r_range must lie in (1, ∞), got lower end {lo}"));
    }
    if !(hi > lo) {
        return arg("r_range must be a nondegenerate interval");
    }
    model.check_radius(hi * a, "A·r_max")?;
    let q = |t: f64| -> (f64, f64) {
        let j = model.profile().log_area_jet(model.global(t));
        let s_pp_over_s = j.d2 + j.d1 * j.d1;
        (s_pp_over_s.max(0.0), j.value.exp())
    };
    let mut ratio_bound: f64 = 0.0;
    let mut n_estimate: f64 = 0.0;
    for r in logspace(lo, hi, HARNACK_SAMPLES) {
        let (den, s) = q(r);
        let window = logspace(r / a * (1.0 + 1e-9), r * a * (1.0 - 1e-9), HARNACK_SAMPLES);
        let num = window.iter().map(|&t| q(t).0).fold(0.0, f64::max);
        let ratio = if den > 0.0 {
            num / den
        } else if num == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        ratio_bound = ratio_bound.max(ratio);
        let n = (s / r + (den * s * s).sqrt()) / r.ln();
        n_estimate = n_estimate.max(n);
    }
    Ok(HarnackReport {
        ratio_bound,
        n_estimate,
        pass: ratio_bound.is_finite() && n_estimate.is_finite(),
    })
}

const VOLUME_FIT_SAMPLES: usize = 48;

/// Slope of log Ṽ(r) against log r over log-spaced samples.
pub fn fit_volume_exponent(model: &WeightedModel, r_range: (f64, f64)) -> Result<f64> {
    let (lo, hi) = r_range;
    if !(lo > 0.0 && hi >= 10.0 * lo) {
        return arg("r_range must be positive and span at least a decade");
    }
    model.check_radius(hi, "r_range upper end")?;
    let rs = logspace(lo, hi, VOLUME_FIT_SAMPLES);
    let mut v = volume(model, rs[0])?;
    let mut xs = Vec::with_capacity(rs.len());
    let mut ys = Vec::with_capacity(rs.len());
    for (k, &r) in rs.iter().enumerate() {
        if k > 0 {
            v += simpson(|t| model.weighted_area(t), rs[k - 1], r, Tolerance::default())?;
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NumericFailure(format!("volume at r = {r} is {v}")));
        }
        xs.push(r.ln());
        ys.push(v.ln());
    }
    Ok(linear_fit(&xs, &ys).1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Weight;
    use crate::profile::RadialProfile;
    use approx::assert_relative_eq;

    fn exp1() -> WeightedModel {
        WeightedModel::new(RadialProfile::exp_alpha(1.0, 2, 0.0).unwrap())
    }

    #[test]
    fn volume_examples() {
        let e2 = WeightedModel::new(RadialProfile::euclidean(2).unwrap());
        assert_relative_eq!(volume(&e2, 2.0).unwrap(), 2.0, max_relative = 1e-10);
        assert_relative_eq!(
            volume(&exp1(), 1.0).unwrap(),
            1.0 - (-1.0f64).exp(),
            max_relative = 1e-9
        );
        assert!(matches!(volume(&e2, -1.0), Err(Error::Argument(_))));
    }

    #[test]
    fn capacity_examples() {
        let flat = WeightedModel::flat();
        assert_relative_eq!(capacity_annulus(&flat, 1.0, 3.0).unwrap(), 0.5, max_relative = 1e-12);
        let e3 = WeightedModel::new(RadialProfile::euclidean(3).unwrap());
        assert_relative_eq!(capacity_annulus(&e3, 1.0, 2.0).unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(
            capacity_annulus(&exp1(), 0.0, 2f64.ln()).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert!(matches!(capacity_annulus(&flat, 3.0, 1.0), Err(Error::Argument(_))));
        assert!(matches!(capacity_annulus(&e3, 0.0, 1.0), Err(Error::NumericFailure(_))));
        let c = capacitor(&e3, 1.0, 2.0).unwrap();
        assert_relative_eq!(c.potential(1.0).unwrap(), 1.0, max_relative = 1e-12);
        assert_eq!(c.potential(2.0).unwrap(), 0.0);
        assert_relative_eq!(c.potential(4.0 / 3.0).unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn harmonic_examples() {
        let u = radial_harmonic(&WeightedModel::flat(), 0.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(u.eval(3.5).unwrap(), 3.5, max_relative = 1e-13);
        let u = radial_harmonic(&exp1(), 0.0, 1.0, 1.0).unwrap();
        let v = u.eval(20.0).unwrap();
        assert!((v / 20f64.exp() - 1.0).abs() < 0.01);
        assert_relative_eq!(v, 20f64.exp() - std::f64::consts::E, max_relative = 1e-12);
        assert!(radial_harmonic(&WeightedModel::flat(), 0.0, 1.0, f64::INFINITY).is_err());
        let e3 = WeightedModel::new(RadialProfile::euclidean(3).unwrap());
        let g = radial_harmonic(&e3, 0.0, -1.0, f64::INFINITY).unwrap();
        assert_relative_eq!(g.eval(2.0).unwrap(), 0.5, max_relative = 1e-9);
    }

    #[test]
    fn parabolicity_examples() {
        let half = WeightedModel::new(RadialProfile::exp_alpha(0.5, 2, 1.0).unwrap());
        assert_eq!(
            classify_parabolicity(&half, End::Plus).unwrap(),
            Parabolicity::Parabolic
        );
        assert_eq!(
            classify_parabolicity(&WeightedModel::flat(), End::Plus).unwrap(),
            Parabolicity::Parabolic
        );
        let grow = WeightedModel::with_weight(RadialProfile::flat(), Weight::Exponential { rate: 0.5 }).unwrap();
        assert_eq!(
            classify_parabolicity(&grow, End::Plus).unwrap(),
            Parabolicity::Nonparabolic
        );
        assert!(classify_parabolicity(&half, End::Minus).is_err());
        let e2 = WeightedModel::new(RadialProfile::euclidean(2).unwrap());
        let e3 = WeightedModel::new(RadialProfile::euclidean(3).unwrap());
        assert_eq!(classify_parabolicity(&e2, End::Plus).unwrap(), Parabolicity::Parabolic);
        assert_eq!(
            classify_parabolicity(&e3, End::Plus).unwrap(),
            Parabolicity::Nonparabolic
        );
    }

    #[test]
    fn ricci_examples() {
        let e2 = WeightedModel::new(RadialProfile::euclidean(2).unwrap());
        assert_eq!(ricci_radial(&e2, 1.7).unwrap(), 0.0);
        let h2 = WeightedModel::new(RadialProfile::hyperbolic(2).unwrap());
        for &r in &[0.3, 1.0, 5.0, 30.0] {
            assert_relative_eq!(ricci_radial(&h2, r).unwrap(), -1.0, max_relative = 1e-10);
        }
        let a = 0.5;
        let m = WeightedModel::new(RadialProfile::exp_alpha(a, 2, 1.0).unwrap());
        let r: f64 = 9.0;
        let expect = a * (a - 1.0) * r.powf(a - 2.0) - a * a * r.powf(2.0 * a - 2.0);
        assert_relative_eq!(ricci_radial(&m, r).unwrap(), expect, max_relative = 1e-12);
        let e3 = WeightedModel::new(RadialProfile::euclidean(3).unwrap());
        assert!(matches!(ricci_radial(&e3, 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn harnack_examples() {
        let rep =
            check_spherical_harnack_premises(&WeightedModel::new(RadialProfile::rlogr()), 2.0, (10.0, 1e4)).unwrap();
        assert!(rep.pass && rep.n_estimate <= 2.0, "{rep:?}");
        let m = WeightedModel::new(RadialProfile::exp_alpha(0.5, 2, 1.0).unwrap());
        assert!(check_spherical_harnack_premises(&m, 2.0, (10.0, 1e3)).unwrap().pass);
        let rep = check_spherical_harnack_premises(&WeightedModel::flat(), 2.0, (10.0, 100.0)).unwrap();
        assert_eq!(rep.ratio_bound, 1.0);
        assert!(rep.pass && rep.n_estimate < 0.05);
        assert!(check_spherical_harnack_premises(&WeightedModel::flat(), 2.0, (0.5, 100.0)).is_err());
    }

    #[test]
    fn volume_exponent_examples() {
        for n in [2u32, 3] {
            let m = WeightedModel::new(RadialProfile::euclidean(n).unwrap());
            assert_relative_eq!(fit_volume_exponent(&m, (1.0, 100.0)).unwrap(), n as f64, epsilon = 0.01);
        }
        assert!(fit_volume_exponent(&exp1(), (10.0, 200.0)).unwrap().abs() < 1e-3);
        assert!(fit_volume_exponent(&exp1(), (10.0, 20.0)).is_err());
    }
}
