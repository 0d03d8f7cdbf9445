//! Harmonic weights and the h-transform dμ̃ = h² dμ.

use crate::error::{arg, Error, Result};
use crate::geometry::{end_resistance, End};
use crate::model::{HarmonicWeight, Weight, WeightedModel};
use crate::profile::Domain;
use crate::quadrature::{CumulativeTable, Tolerance};
use crate::solver::{kernel_diag, BoundaryCondition, GridSpec, KernelDiag};
use serde::Serialize;
use std::sync::Arc;

/// A base model, a positive weight h and the transformed model with S̃ = h²S.
#[derive(Clone, Debug)]
pub struct TransformPair {
    pub base: WeightedModel,
    pub transformed: WeightedModel,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl TransformPair {
    /// Pair a unit-weight model with an explicit weight.
    pub fn new(base: WeightedModel, weight: Weight, kappa1: f64, kappa2: f64) -> Result<Self> {
        if !base.weight().is_unit() {
            return arg("the base model of a transform pair must carry h ≡ 1");
        }
        let transformed = WeightedModel::with_weight(base.profile().clone(), weight)?;
        Ok(TransformPair {
            base,
            transformed,
            kappa1,
            kappa2,
        })
    }

    /// The identity transform h ≡ 1.
    pub fn identity(base: WeightedModel) -> Result<Self> {
        Self::new(base, Weight::Unit, 1.0, 0.0)
    }

    pub fn h(&self, r: f64) -> f64 {
        self.transformed.weight_value(r)
    }
}

/// Where the tabulated integral of 1/S starts on the minus side.
const TABLE_START: f64 = -200.0;
/// Largest log of the weight kept in the table; beyond it h² would overflow.
const LOG_WEIGHT_CEILING: f64 = 650.0;
const TABLE_REACH: f64 = 3e5;

fn plus_table_end(base: &WeightedModel) -> f64 {
    let log_inv = |r: f64| -base.profile().log_area_jet(r).value;
    let mut hi = 1.0;
    while hi < TABLE_REACH && log_inv(hi) < LOG_WEIGHT_CEILING {
        hi *= 2.0;
    }
    if hi >= TABLE_REACH {
        return TABLE_REACH;
    }
    let mut lo = hi / 2.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if log_inv(mid) < LOG_WEIGHT_CEILING {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Graded knots, further narrowed so that log S moves by at most 0.05 per cell.
/// Blend ends and r = 1 are knots: S is only C² across a blend end, and h is
/// pinned at 1.
fn weight_knots(base: &WeightedModel, a: f64, b: f64) -> Vec<f64> {
    let p = base.profile();
    let c = p.cap_radius();
    let mut pins = vec![-c, 0.0, c, 1.0];
    if let Some(m) = p.minus() {
        pins.push(-m.cap_radius());
    }
    pins.retain(|&x| x > a && x < b);
    pins.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pins.dedup();
    let mut knots = vec![a];
    let mut x = a;
    while x < b {
        let slope = p.log_area_jet(x).d1.abs();
        let w = (x.abs() * 0.01).max(0.02).min(0.05 / slope.max(1e-300)).max(1e-3);
        let next_pin = pins.iter().copied().find(|&q| q > x).unwrap_or(b);
        x = if x + w >= next_pin - 5e-4 { next_pin } else { x + w };
        knots.push(x);
    }
    knots
}

/// h(r) = κ₁ + κ₂∫₁^r dt/S with κ₂ = 1 and κ₁ = 1 + ∫_{-∞}^1 dt/S, so that
/// h → 1 toward the minus end and h ≥ 1 everywhere.
pub fn build_two_end_weight(model: &WeightedModel) -> Result<TransformPair> {
    if model.domain() != Domain::FullLine {
        return arg("a two-end weight needs a full-line model");
    }
    if !model.weight().is_unit() {
        return arg("the base model must carry h ≡ 1");
    }
    let tail = end_resistance(model, TABLE_START, End::Minus, 1e-12)?.ok_or_else(|| {
        Error::Precondition("the minus end is parabolic: ∫_{-∞} dt/S diverges, h would be unbounded".into())
    })?;
    let base = model.profile().clone();
    let inv = |t: f64| (-base.log_area_jet(t).value).exp();
    let end = plus_table_end(model);
    let knots = weight_knots(model, TABLE_START, end);
    let table = CumulativeTable::build(inv, knots, Tolerance::tight())?;
    let at_one = table.integral_to(inv, 1.0)?;
    let kappa2 = 1.0;
    let kappa1 = 1.0 + tail + at_one;
    let weight = HarmonicWeight {
        base: base.clone(),
        kappa1,
        kappa2,
        table,
        at_one,
    };
    TransformPair::new(model.clone(), Weight::Harmonic(Arc::new(weight)), kappa1, kappa2)
}

/// Deviation of q^Ω from h(r)h(r')q̃^Ω on Ω = {r > r_min} with Dirichlet data.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub times: Vec<f64>,
    pub source_r: Vec<f64>,
    /// Largest relative error on the requested grid, per time.
    pub per_time: Vec<f64>,
    pub max_rel_err: f64,
    /// Same on the grid with halved Δr and Δt.
    pub refined_max_rel_err: f64,
    /// log₂ of the error ratio under refinement.
    pub convergence_order: f64,
    pub nodes: usize,
    pub compared_entries: usize,
}

/// Relative floor below which kernel entries are not compared.
const COMPARE_FLOOR: f64 = 1e-12;

fn identity_errors(
    pair: &TransformPair,
    grid: &GridSpec,
    times: &[f64],
    source_r: &[f64],
    stride: usize,
) -> Result<(Vec<f64>, usize)> {
    let sources: Vec<usize> = source_r.iter().map(|&r| grid.nearest_node(r)).collect();
    let base = kernel_diag(&pair.base, grid, BoundaryCondition::Dirichlet, times, &sources)?;
    let tr = kernel_diag(&pair.transformed, grid, BoundaryCondition::Dirichlet, times, &sources)?;
    let h: Vec<f64> = base.r.iter().map(|&r| pair.h(r)).collect();
    let mut per_time = vec![0.0f64; times.len()];
    let mut count = 0;
    for (j, &s) in sources.iter().enumerate() {
        for (k, err) in per_time.iter_mut().enumerate() {
            let (q, qt) = (&base.rows[j][k], &tr.rows[j][k]);
            for i in (stride..base.r.len() - 1).step_by(stride) {
                if q[i] < COMPARE_FLOOR {
                    continue;
                }
                let e = (q[i] - h[s] * h[i] * qt[i]).abs() / q[i];
                *err = err.max(e);
                count += 1;
            }
        }
    }
    Ok((per_time, count))
}

/// Solve the Dirichlet problem for both kernels on `grid` and on its
/// refinement, and compare q^Ω with h(r)h(r')q̃^Ω on interior nodes.
pub fn verify_kernel_identity(
    pair: &TransformPair,
    grid: &GridSpec,
    times: &[f64],
    source_r: &[f64],
) -> Result<IdentityReport> {
    if source_r.is_empty() {
        return arg("at least one source radius is required");
    }
    let (per_time, compared) = identity_errors(pair, grid, times, source_r, 1)?;
    let fine = grid.refined();
    // Sources must sit on the same physical nodes on both grids.
    let snapped: Vec<f64> = source_r
        .iter()
        .map(|&r| grid.positions()[grid.nearest_node(r)])
        .collect();
    let (fine_per_time, _) = identity_errors(pair, &fine, times, &snapped, 2)?;
    let max_rel_err = per_time.iter().cloned().fold(0.0, f64::max);
    let refined = fine_per_time.iter().cloned().fold(0.0, f64::max);
    let convergence_order = if max_rel_err > 0.0 && refined > 0.0 {
        (max_rel_err / refined).log2()
    } else {
        f64::NAN
    };
    Ok(IdentityReport {
        times: times.to_vec(),
        source_r: snapped,
        per_time,
        max_rel_err,
        refined_max_rel_err: refined,
        convergence_order,
        nodes: grid.nodes,
        compared_entries: compared,
    })
}

/// Diagonal form q_t(r,r) = h²(r)q̃_t(r,r) from two kernel runs on one grid.
pub fn diagonal_identity_error(pair: &TransformPair, base: &KernelDiag, transformed: &KernelDiag) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, row) in base.diag.iter().enumerate() {
        for (j, &q) in row.iter().enumerate() {
            if q < COMPARE_FLOOR {
                continue;
            }
            let h = pair.h(base.source_r[j]);
            worst = worst.max((q - h * h * transformed.diag[k][j]).abs() / q);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::laplace_residual;
    use crate::profile::RadialProfile;
    use approx::assert_relative_eq;

    fn two_end(alpha: f64) -> WeightedModel {
        let p = RadialProfile::full_line(
            RadialProfile::exp_alpha(alpha, 2, 1.0).unwrap(),
            RadialProfile::hyperbolic(2).unwrap(),
            1.0,
        )
        .unwrap();
        WeightedModel::new(p)
    }

    #[test]
    fn weight_is_positive_harmonic_and_pinned() {
        let pair = build_two_end_weight(&two_end(0.5)).unwrap();
        assert_eq!(pair.kappa2, 1.0);
        assert!(pair.kappa1 > 1.0);
        assert_relative_eq!(pair.h(1.0), pair.kappa1, max_relative = 1e-12);
        assert!((pair.h(-40.0) - 1.0).abs() < 1e-12);
        let nodes: Vec<f64> = (0..=400).map(|k| -5.0 + 0.025 * k as f64).collect();
        let h: Vec<f64> = nodes.iter().map(|&r| pair.h(r)).collect();
        assert!(h.windows(2).all(|w| w[1] > w[0]));
        let res = laplace_residual(&pair.base, &nodes, &h);
        assert!(res < 1e-3, "{res}");
        for r in [-3.0, 0.5, 7.0] {
            let lhs = pair.transformed.weighted_area(r);
            let rhs = pair.h(r).powi(2) * pair.base.area(r);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn parabolic_minus_end_is_rejected() {
        let p = RadialProfile::full_line(RadialProfile::flat(), RadialProfile::flat(), 1.0).unwrap();
        let err = build_two_end_weight(&WeightedModel::new(p)).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let half = WeightedModel::flat();
        assert!(build_two_end_weight(&half).is_err());
    }

    #[test]
    fn identity_transform_is_exact() {
        let pair = TransformPair::identity(WeightedModel::flat()).unwrap();
        let grid = GridSpec::uniform(0.0, 10.0, 257, 0.01);
        let rep = verify_kernel_identity(&pair, &grid, &[0.5, 1.0], &[1.0, 2.0]).unwrap();
        assert_eq!(rep.max_rel_err, 0.0);
    }
}
