//! Tabulated monotone functions on the positive half-line.

use crate::error::{arg, Result};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Nondecreasing,
    Nonincreasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    PiecewiseConstant,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    Hold,
    Zero,
}

/// A monotone function given by breakpoints and values.
///
/// Piecewise-constant tables take `values[k]` on `[b_k, b_{k+1})` when right
/// continuous and on `(b_{k-1}, b_k]` otherwise; linear tables interpolate
/// between breakpoints. Outside `[b_0, b_m]` the extrapolation rule applies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneTab {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    direction: Direction,
    interpolation: Interpolation,
    right_continuous: bool,
    extrapolation: Extrapolation,
}

impl MonotoneTab {
    pub fn new(
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        direction: Direction,
        interpolation: Interpolation,
        right_continuous: bool,
        extrapolation: Extrapolation,
    ) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return arg("breakpoints and values must be nonempty and of equal length");
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return arg("breakpoints and values must be finite");
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[1] <= w[0]) {
            return arg(format!("breakpoints not increasing at {} -> {}", w[0], w[1]));
        }
        let bad = values.windows(2).position(|w| match direction {
            Direction::Nondecreasing => w[1] < w[0],
            Direction::Nonincreasing => w[1] > w[0],
        });
        if let Some(k) = bad {
            return arg(format!(
                "values violate {:?} at breakpoint {}",
                direction,
                breakpoints[k + 1]
            ));
        }
        Ok(MonotoneTab {
            breakpoints,
            values,
            direction,
            interpolation,
            right_continuous,
            extrapolation,
        })
    }

    /// Right-continuous nonincreasing step function, zero past the last breakpoint.
    pub fn step_nonincreasing(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(
            breakpoints,
            values,
            Direction::Nonincreasing,
            Interpolation::PiecewiseConstant,
            true,
            Extrapolation::Zero,
        )
    }

    /// Piecewise-linear nonincreasing samples, zero past the last breakpoint.
    pub fn linear_nonincreasing(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(
            breakpoints,
            values,
            Direction::Nonincreasing,
            Interpolation::Linear,
            true,
            Extrapolation::Zero,
        )
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn right_continuous(&self) -> bool {
        self.right_continuous
    }

    pub fn extrapolation(&self) -> Extrapolation {
        self.extrapolation
    }

    fn outside(&self, end_value: f64) -> f64 {
        match self.extrapolation {
            Extrapolation::Hold => end_value,
            Extrapolation::Zero => 0.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let b = &self.breakpoints;
        let v = &self.values;
        let m = b.len() - 1;
        match self.interpolation {
            Interpolation::Linear => {
                if x < b[0] {
                    return self.outside(v[0]);
                }
                if x > b[m] {
                    return self.outside(v[m]);
                }
                if m == 0 {
                    return v[0];
                }
                let k = b.partition_point(|&p| p <= x).clamp(1, m) - 1;
                let s = (x - b[k]) / (b[k + 1] - b[k]);
                v[k] + s * (v[k + 1] - v[k])
            }
            Interpolation::PiecewiseConstant => {
                if self.right_continuous {
                    if x < b[0] {
                        return self.outside(v[0]);
                    }
                    if x >= b[m] {
                        return self.outside(v[m]);
                    }
                    v[b.partition_point(|&p| p <= x) - 1]
                } else {
                    if x <= b[0] {
                        return if x == b[0] { v[0] } else { self.outside(v[0]) };
                    }
                    if x > b[m] {
                        return self.outside(v[m]);
                    }
                    v[b.partition_point(|&p| p < x)]
                }
            }
        }
    }

    /// Integral over `(0, ∞)`; infinite when the extrapolated tail is nonzero.
    pub fn integral(&self) -> f64 {
        let b = &self.breakpoints;
        let v = &self.values;
        let m = b.len() - 1;
        let mut total = 0.0;
        if b[0] > 0.0 {
            total += self.outside(v[0]) * b[0];
        }
        for k in 0..m {
            let lo = b[k].max(0.0);
            let hi = b[k + 1];
            if hi <= lo {
                continue;
            }
            total += match self.interpolation {
                Interpolation::PiecewiseConstant => {
                    let val = if self.right_continuous { v[k] } else { v[k + 1] };
                    val * (hi - lo)
                }
                Interpolation::Linear => {
                    let at_lo = self.eval(lo);
                    0.5 * (at_lo + v[k + 1]) * (hi - lo)
                }
            };
        }
        let tail = self.outside(v[m]);
        if tail != 0.0 {
            return f64::INFINITY * tail.signum();
        }
        total
    }

    /// Smallest `x` in `[b_0, b_m]` with `eval(x) >= y` for a nondecreasing
    /// linear table (the carrier of volume functions).
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if self.direction != Direction::Nondecreasing || self.interpolation != Interpolation::Linear {
            return arg("inverse requires a nondecreasing linear table");
        }
        let b = &self.breakpoints;
        let v = &self.values;
        let m = b.len() - 1;
        if y < v[0] || y > v[m] {
            return arg(format!("value {y} outside [{}, {}]", v[0], v[m]));
        }
        let k = v.partition_point(|&p| p < y);
        if k == 0 {
            return Ok(b[0]);
        }
        let (v0, v1) = (v[k - 1], v[k]);
        if v1 == v0 {
            return Ok(b[k - 1]);
        }
        Ok(b[k - 1] + (y - v0) / (v1 - v0) * (b[k] - b[k - 1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_evaluation_is_right_continuous() {
        let t = MonotoneTab::step_nonincreasing(vec![0.0, 1.0, 3.0], vec![2.0, 1.0, 0.0]).unwrap();
        assert_eq!(t.eval(0.0), 2.0);
        assert_eq!(t.eval(0.999), 2.0);
        assert_eq!(t.eval(1.0), 1.0);
        assert_eq!(t.eval(3.0), 0.0);
        assert_eq!(t.eval(10.0), 0.0);
        assert_eq!(t.integral(), 4.0);
    }

    #[test]
    fn left_continuous_steps() {
        let t = MonotoneTab::new(
            vec![0.0, 1.0, 3.0],
            vec![2.0, 2.0, 1.0],
            Direction::Nonincreasing,
            Interpolation::PiecewiseConstant,
            false,
            Extrapolation::Zero,
        )
        .unwrap();
        assert_eq!(t.eval(1.0), 2.0);
        assert_eq!(t.eval(1.5), 1.0);
        assert_eq!(t.eval(3.0), 1.0);
        assert_eq!(t.eval(3.5), 0.0);
        assert_eq!(t.integral(), 2.0 + 2.0);
    }

    #[test]
    fn linear_integral_and_inverse() {
        let t = MonotoneTab::new(
            vec![0.0, 1.0, 2.0],
            vec![0.0, 1.0, 4.0],
            Direction::Nondecreasing,
            Interpolation::Linear,
            true,
            Extrapolation::Hold,
        )
        .unwrap();
        assert_eq!(t.eval(1.5), 2.5);
        assert_eq!(t.inverse(2.5).unwrap(), 1.5);
        assert!(t.integral().is_infinite());
        let z = MonotoneTab::linear_nonincreasing(vec![0.0, 2.0], vec![2.0, 0.0]).unwrap();
        assert_eq!(z.integral(), 2.0);
    }

    #[test]
    fn rejects_wrong_direction() {
        assert!(MonotoneTab::step_nonincreasing(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(MonotoneTab::step_nonincreasing(vec![1.0, 0.0], vec![1.0, 0.0]).is_err());
    }
}
