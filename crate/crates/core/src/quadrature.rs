//! Adaptive Simpson quadrature, improper tails and cumulative tables.

use crate::error::{numeric, Result};

/// Relative tolerance with an absolute floor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-8, abs: 1e-14 }
    }
}

impl Tolerance {
    /// Tolerance used where values feed finite differences or inversions.
    pub fn tight() -> Self {
        Tolerance {
            rel: 1e-13,
            abs: 1e-300,
        }
    }
}

const MAX_DEPTH: u32 = 52;
const PANELS: usize = 8;

/// Integrate `f` over `[a, b]` (either orientation).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return numeric(format!("finite bounds required, got [{a}, {b}]"));
    }
    if b < a {
        return simpson(f, b, a, tol).map(|v| -v);
    }
    let h = (b - a) / PANELS as f64;
    let mut pts = [0.0; 2 * PANELS + 1];
    let mut vals = [0.0; 2 * PANELS + 1];
    for (k, (p, v)) in pts.iter_mut().zip(vals.iter_mut()).enumerate() {
        *p = if k == 2 * PANELS { b } else { a + 0.5 * h * k as f64 };
        *v = f(*p);
        if !v.is_finite() {
            return numeric(format!("integrand not finite at {}", *p));
        }
    }
    let mut scale = 0.0;
    let mut wholes = [0.0; PANELS];
    for k in 0..PANELS {
        let (fa, fm, fb) = (vals[2 * k], vals[2 * k + 1], vals[2 * k + 2]);
        wholes[k] = h / 6.0 * (fa + 4.0 * fm + fb);
        scale += h / 6.0 * (fa.abs() + 4.0 * fm.abs() + fb.abs());
    }
    let eps = (tol.rel * scale).max(tol.abs) / PANELS as f64;
    let mut total = 0.0;
    for k in 0..PANELS {
        total += refine(
            &f,
            pts[2 * k],
            pts[2 * k + 2],
            vals[2 * k],
            vals[2 * k + 1],
            vals[2 * k + 2],
            wholes[k],
            eps,
            eps,
            MAX_DEPTH,
        )?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    budget: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        return numeric(format!("integrand not finite near {m}"));
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps || m <= a || m >= b {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        // Integrable endpoint singularities end here with a negligible piece.
        if delta.abs() <= 15.0 * budget {
            return Ok(left + right + delta / 15.0);
        }
        return numeric(format!(
            "adaptive Simpson did not converge on [{a}, {b}] (error estimate {:.3e})",
            delta.abs() / 15.0
        ));
    }
    let l = refine(f, a, m, fa, flm, fm, left, 0.5 * eps, budget, depth - 1)?;
    let r = refine(f, m, b, fm, frm, fb, right, 0.5 * eps, budget, depth - 1)?;
    Ok(l + r)
}

/// Direction of an improper tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailDirection {
    Up,
    Down,
}

/// Outcome of a tail probe: converged value or evidence of divergence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailOutcome {
    Converged(f64),
    Diverged { partial: f64, reach: f64 },
}

/// Integrate a nonnegative `f` from `a` to infinity in `dir` by geometric
/// truncation: panels of doubling length until the relative change of the
/// running sum drops below `stop_rel` twice in a row.
pub fn tail<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    dir: TailDirection,
    first_len: f64,
    stop_rel: f64,
    max_reach: f64,
    tol: Tolerance,
) -> Result<TailOutcome> {
    let sgn = match dir {
        TailDirection::Up => 1.0,
        TailDirection::Down => -1.0,
    };
    let mut sum = 0.0;
    let mut start = 0.0;
    let mut len = first_len;
    let mut quiet = 0;
    let mut pieces: Vec<f64> = Vec::new();
    while start < max_reach {
        let end = (start + len).min(max_reach);
        let (x0, x1) = (a + sgn * start, a + sgn * end);
        let piece = match simpson(&f, x0.min(x1), x0.max(x1), tol) {
            Ok(p) => p,
            Err(_) => {
                return Ok(TailOutcome::Diverged {
                    partial: sum,
                    reach: start,
                })
            }
        };
        sum += piece;
        if !sum.is_finite() {
            return Ok(TailOutcome::Diverged {
                partial: sum,
                reach: end,
            });
        }
        pieces.push(piece);
        if piece.abs() <= stop_rel * sum.abs() {
            quiet += 1;
            if quiet >= 2 {
                return Ok(TailOutcome::Converged(sum));
            }
        } else {
            quiet = 0;
        }
        // Algebraic tails give panel sums in exact geometric progression;
        // sum the remainder in closed form once the ratio has settled.
        if let Some(rest) = geometric_remainder(&pieces) {
            if rest <= 1e3 * stop_rel * sum.abs() || rest * 1e-6 <= stop_rel * sum.abs() {
                return Ok(TailOutcome::Converged(sum + rest));
            }
        }
        start = end;
        len *= 2.0;
    }
    Ok(TailOutcome::Diverged {
        partial: sum,
        reach: max_reach,
    })
}

fn geometric_remainder(pieces: &[f64]) -> Option<f64> {
    let n = pieces.len();
    if n < 5 || pieces[n - 4..].iter().any(|p| !(*p > 0.0)) {
        return None;
    }
    let q: Vec<f64> = (n - 3..n).map(|k| pieces[k] / pieces[k - 1]).collect();
    let settled = q.windows(2).all(|w| (w[1] - w[0]).abs() <= 1e-6 * w[1]);
    if settled && q[2] < 0.9 {
        Some(pieces[n - 1] * q[2] / (1.0 - q[2]))
    } else {
        None
    }
}

/// Running integral of a fixed integrand over a knot sequence; the integrand
/// is passed back in on every query so the table stays plain data.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulativeTable {
    knots: Vec<f64>,
    cum: Vec<f64>,
    tol: Tolerance,
}

impl CumulativeTable {
    pub fn build<F: Fn(f64) -> f64>(f: F, knots: Vec<f64>, tol: Tolerance) -> Result<Self> {
        if knots.len() < 2 || knots.windows(2).any(|w| w[1] <= w[0]) {
            return numeric("cumulative table needs at least two increasing knots");
        }
        let mut cum = Vec::with_capacity(knots.len());
        cum.push(0.0);
        let mut acc = 0.0;
        for w in knots.windows(2) {
            acc += simpson(&f, w[0], w[1], tol)?;
            cum.push(acc);
        }
        Ok(CumulativeTable { knots, cum, tol })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn start(&self) -> f64 {
        self.knots[0]
    }

    pub fn end(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Index of the cell holding `x` (clamped to the table).
    pub fn cell(&self, x: f64) -> usize {
        let k = self.knots.partition_point(|&k| k <= x);
        k.saturating_sub(1).min(self.knots.len() - 2)
    }

    /// Integral from the first knot to `x`; outside the table the integrand
    /// is integrated directly from the nearest end.
    pub fn integral_to<F: Fn(f64) -> f64>(&self, f: F, x: f64) -> Result<f64> {
        if x <= self.start() {
            return simpson(&f, self.start(), x, self.tol);
        }
        if x >= self.end() {
            return Ok(self.total() + simpson(&f, self.end(), x, self.tol)?);
        }
        let k = self.cell(x);
        let (a, b) = (self.knots[k], self.knots[k + 1]);
        if x - a <= b - x {
            Ok(self.cum[k] + simpson(&f, a, x, self.tol)?)
        } else {
            Ok(self.cum[k + 1] - simpson(&f, x, b, self.tol)?)
        }
    }

    /// Smallest `x` with integral `target`, for a positive integrand.
    pub fn invert<F: Fn(f64) -> f64>(&self, f: F, target: f64) -> Result<f64> {
        if !(target >= 0.0 && target <= self.total()) {
            return numeric(format!("target {target} outside tabulated range [0, {}]", self.total()));
        }
        let k = self.cum.partition_point(|&c| c < target).clamp(1, self.knots.len() - 1) - 1;
        let (mut lo, mut hi) = (self.knots[k], self.knots[k + 1]);
        let base = self.cum[k];
        let need = target - base;
        let a = lo;
        let mut x = lo + (hi - lo) * (need / (self.cum[k + 1] - base)).clamp(0.0, 1.0);
        for _ in 0..200 {
            let g = simpson(&f, a, x, self.tol)? - need;
            if g.abs() <= 1e-14 * target.max(1e-300) {
                return Ok(x);
            }
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
                return Ok(0.5 * (lo + hi));
            }
            let fx = f(x);
            let newton = x - g / fx;
            x = if fx > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Ok(x)
    }
}

/// Knots on `[a, b]` with widths growing like `|x| * growth`, clamped to
/// `[min_w, max_w]`.
pub fn graded_knots(a: f64, b: f64, growth: f64, min_w: f64, max_w: f64) -> Vec<f64> {
    let mut knots = vec![a];
    let mut x = a;
    while x < b {
        let w = (x.abs() * growth).clamp(min_w, max_w);
        x = if x + w >= b - 0.25 * min_w { b } else { x + w };
        knots.push(x);
    }
    knots
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, rel: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= rel * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Ordinary least-squares line `y = a + b x`; returns `(a, b, rss)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let rss = x.iter().zip(y).map(|(&xi, &yi)| (yi - a - b * xi).powi(2)).sum();
    (a, b, rss)
}

/// `count` log-spaced points from `a` to `b` inclusive.
pub fn logspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..count)
        .map(|k| {
            if k == 0 {
                a
            } else if k == count - 1 {
                b
            } else {
                (la + (lb - la) * k as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// `count` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![a];
    }
    (0..count)
        .map(|k| {
            if k == count - 1 {
                b
            } else {
                a + (b - a) * k as f64 / (count - 1) as f64
            }
        })
        .collect()
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}
