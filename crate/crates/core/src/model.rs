//! Weighted model manifolds: a radial profile, a radial weight h and the
//! weighted area S̃ = h² S.

use crate::error::{Error, Result};
use crate::profile::{hermite, Domain, RadialProfile};
use crate::quadrature::CumulativeTable;
use std::sync::Arc;

/// Radial weight h > 0.
#[derive(Clone, Debug)]
pub enum Weight {
    Unit,
    /// h(r) = intercept + slope·r.
    Affine {
        intercept: f64,
        slope: f64,
    },
    /// h(r) = exp(rate·r).
    Exponential {
        rate: f64,
    },
    /// h(r) = κ₁ + κ₂ ∫₁^r dt/S(t) for the base profile.
    Harmonic(Arc<HarmonicWeight>),
}

/// Tabulated harmonic weight of a two-ended model.
#[derive(Clone, Debug)]
pub struct HarmonicWeight {
    pub(crate) base: RadialProfile,
    pub(crate) kappa1: f64,
    pub(crate) kappa2: f64,
    pub(crate) table: CumulativeTable,
    pub(crate) at_one: f64,
}

impl HarmonicWeight {
    fn inv_area(&self) -> impl Fn(f64) -> f64 + '_ {
        move |t| (-self.base.log_area_jet(t).value).exp()
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa2
    }

    /// Tabulated range of the underlying integral.
    pub fn table_range(&self) -> (f64, f64) {
        (self.table.start(), self.table.end())
    }

    /// (1/S, (1/S)') at r.
    fn inv_jet(&self, r: f64) -> (f64, f64) {
        let j = self.base.log_area_jet(r);
        let inv = (-j.value).exp();
        (inv, -j.d1 * inv)
    }

    /// ∫ from the first knot to r; quintic Hermite inside the table, whose
    /// cells are narrow enough that log S changes little across each.
    fn integral(&self, r: f64) -> Result<f64> {
        if r <= self.table.start() || r >= self.table.end() {
            return self.table.integral_to(self.inv_area(), r);
        }
        let k = self.table.cell(r);
        let (a, b) = (self.table.knots()[k], self.table.knots()[k + 1]);
        let cum = self.table.cumulative();
        let (fa, da) = self.inv_jet(a);
        let (fb, db) = self.inv_jet(b);
        Ok(hermite(r, a, b, (cum[k], fa, da), (cum[k + 1], fb, db)).0)
    }

    pub fn value(&self, r: f64) -> f64 {
        match self.integral(r) {
            Ok(i) => self.kappa1 + self.kappa2 * (i - self.at_one),
            Err(_) => f64::NAN,
        }
    }
}

impl Weight {
    /// `(h, h', h'')` at the global coordinate `r`.
    pub fn derivatives(&self, base: &RadialProfile, r: f64) -> (f64, f64, f64) {
        match self {
            Weight::Unit => (1.0, 0.0, 0.0),
            Weight::Affine { intercept, slope } => (intercept + slope * r, *slope, 0.0),
            Weight::Exponential { rate } => {
                let h = (rate * r).exp();
                (h, rate * h, rate * rate * h)
            }
            Weight::Harmonic(w) => {
                let h = w.value(r);
                let j = base.log_area_jet(r);
                let inv = (-j.value).exp();
                (h, w.kappa2 * inv, -w.kappa2 * j.d1 * inv)
            }
        }
    }

    /// `(log h, h'/h)` at the global coordinate `r`.
    pub fn log_jet(&self, base: &RadialProfile, r: f64) -> (f64, f64) {
        match self {
            Weight::Unit => (0.0, 0.0),
            Weight::Exponential { rate } => (rate * r, *rate),
            _ => {
                let (h, dh, _) = self.derivatives(base, r);
                (h.ln(), dh / h)
            }
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Weight::Unit)
    }
}

/// Which side of an origin a half-line view looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// A radial model with weight. Half-line views re-parametrize a full-line
/// model as `r ↦ origin ± r` for `r ≥ 0`.
#[derive(Clone, Debug)]
pub struct WeightedModel {
    profile: RadialProfile,
    weight: Weight,
    origin: f64,
    sign: f64,
    view: bool,
}

impl WeightedModel {
    pub fn new(profile: RadialProfile) -> Self {
        WeightedModel {
            profile,
            weight: Weight::Unit,
            origin: 0.0,
            sign: 1.0,
            view: false,
        }
    }

    pub fn with_weight(profile: RadialProfile, weight: Weight) -> Result<Self> {
        let m = WeightedModel {
            profile,
            weight,
            origin: 0.0,
            sign: 1.0,
            view: false,
        };
        let (lo, hi) = m.support();
        let probe = [lo, 0.5 * (lo.max(-50.0) + hi.min(50.0)), hi];
        for r in probe.into_iter().filter(|r| r.is_finite()) {
            let (h, _, _) = m.weight.derivatives(&m.profile, r);
            if !(h > 0.0) {
                return Err(Error::Argument(format!("weight h must be positive, h({r}) = {h}")));
            }
        }
        Ok(m)
    }

    /// Flat half-line, S̃ ≡ 1.
    pub fn flat() -> Self {
        Self::new(RadialProfile::flat())
    }

    /// Half-line starting at `origin` and running in direction `side`.
    pub fn half_line_view(&self, origin: f64, side: Side) -> Result<WeightedModel> {
        let (lo, hi) = self.support();
        if !(origin > lo || (origin == lo && side == Side::Plus)) || !(origin < hi || side == Side::Minus) {
            return Err(Error::Range(format!("view origin {origin} outside ({lo}, {hi})")));
        }
        let g = self.global(origin);
        let s = match side {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        };
        Ok(WeightedModel {
            profile: self.profile.clone(),
            weight: self.weight.clone(),
            origin: g,
            sign: self.sign * s,
            view: true,
        })
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn dimension(&self) -> u32 {
        self.profile.dimension()
    }

    pub fn domain(&self) -> Domain {
        if self.view {
            Domain::HalfLine
        } else {
            self.profile.domain()
        }
    }

    pub fn is_view(&self) -> bool {
        self.view
    }

    /// Local coordinate to the profile's coordinate.
    #[inline]
    pub fn global(&self, r: f64) -> f64 {
        self.origin + self.sign * r
    }

    /// Interval of admissible radii.
    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.profile.support();
        if !self.view {
            return (lo, hi);
        }
        if self.sign > 0.0 {
            (0.0, hi - self.origin)
        } else {
            (0.0, self.origin - lo)
        }
    }

    pub fn check_radius(&self, r: f64, what: &str) -> Result<()> {
        let (lo, hi) = self.support();
        if r.is_nan() || r < lo || r > hi {
            return Err(Error::Range(format!("{what} = {r} outside the domain [{lo}, {hi}]")));
        }
        Ok(())
    }

    /// Unweighted area S(r).
    pub fn area(&self, r: f64) -> f64 {
        self.profile.area(self.global(r))
    }

    /// `(S, S', S'')` in local coordinates.
    pub fn area_derivatives(&self, r: f64) -> (f64, f64, f64) {
        let (s, d1, d2) = self.profile.area_derivatives(self.global(r));
        (s, self.sign * d1, d2)
    }

    /// Weight h(r).
    pub fn weight_value(&self, r: f64) -> f64 {
        self.weight.derivatives(&self.profile, self.global(r)).0
    }

    /// `(log S̃, (log S̃)')` in local coordinates.
    pub fn log_weighted_jet(&self, r: f64) -> (f64, f64) {
        let g = self.global(r);
        let j = self.profile.log_area_jet(g);
        let (lh, dlh) = self.weight.log_jet(&self.profile, g);
        (2.0 * lh + j.value, self.sign * (2.0 * dlh + j.d1))
    }

    pub fn log_weighted_area(&self, r: f64) -> f64 {
        let g = self.global(r);
        let lh = if self.weight.is_unit() {
            0.0
        } else {
            self.weight.log_jet(&self.profile, g).0
        };
        2.0 * lh + self.profile.log_area_jet(g).value
    }

    /// Weighted area S̃(r) = h(r)² S(r).
    pub fn weighted_area(&self, r: f64) -> f64 {
        self.log_weighted_area(r).exp()
    }

    /// 1/S̃(r), computed without forming S̃.
    pub fn inverse_weighted_area(&self, r: f64) -> f64 {
        (-self.log_weighted_area(r)).exp()
    }
}
