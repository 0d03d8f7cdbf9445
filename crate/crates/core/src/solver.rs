//! Finite-difference solver for the radial weighted heat equation
//! ∂ₜu = (1/S̃)(S̃u')' on a one-dimensional grid.

use crate::error::{arg, numeric, Error, Result};
use crate::model::WeightedModel;
use crate::quadrature::log_add_exp;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Uniform,
    /// Cell widths grow geometrically from `r_min` by `ratio` per cell.
    Graded {
        ratio: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    CrankNicolson,
    ImplicitEuler,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
}

/// Grid and time-stepping parameters. The node at `r_max` is always
/// absorbing (u = 0).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub spacing: Spacing,
    pub dt: f64,
    pub scheme: Scheme,
    pub rannacher_startup_steps: usize,
    /// Double `r_max` once if more than 1% of the mass leaks out.
    pub auto_extend: bool,
}

impl GridSpec {
    pub fn uniform(r_min: f64, r_max: f64, nodes: usize, dt: f64) -> Self {
        GridSpec {
            r_min,
            r_max,
            nodes,
            spacing: Spacing::Uniform,
            dt,
            scheme: Scheme::CrankNicolson,
            rannacher_startup_steps: 2,
            auto_extend: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min < self.r_max) || !self.r_min.is_finite() || !self.r_max.is_finite() {
            return arg(format!(
                "grid needs r_min < r_max, got [{}, {}]",
                self.r_min, self.r_max
            ));
        }
        if self.nodes < 64 {
            return arg(format!("grid needs at least 64 nodes, got {}", self.nodes));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return arg(format!("dt must be positive, got {}", self.dt));
        }
        if let Spacing::Graded { ratio } = self.spacing {
            if !(ratio > 1.0 && ratio <= 1.05) {
                return arg(format!("graded ratio must lie in (1, 1.05], got {ratio}"));
            }
        }
        Ok(())
    }

    /// Node positions.
    pub fn positions(&self) -> Vec<f64> {
        let n = self.nodes;
        let span = self.r_max - self.r_min;
        match self.spacing {
            Spacing::Uniform => (0..n)
                .map(|k| {
                    if k == n - 1 {
                        self.r_max
                    } else {
                        self.r_min + span * k as f64 / (n - 1) as f64
                    }
                })
                .collect(),
            Spacing::Graded { ratio } => {
                let cells = (n - 1) as i32;
                let h0 = span * (ratio - 1.0) / (ratio.powi(cells) - 1.0);
                let mut out = Vec::with_capacity(n);
                let mut x = self.r_min;
                let mut h = h0;
                out.push(x);
                for k in 1..n {
                    x = if k == n - 1 { self.r_max } else { x + h };
                    out.push(x);
                    h *= ratio;
                }
                out
            }
        }
    }

    /// Index of the node nearest to `r`.
    pub fn nearest_node(&self, r: f64) -> usize {
        let pos = self.positions();
        let k = pos.partition_point(|&x| x < r).min(pos.len() - 1);
        if k > 0 && (r - pos[k - 1]) <= (pos[k] - r) {
            k - 1
        } else {
            k
        }
    }

    /// Same grid with every cell halved and half the time step.
    pub fn refined(&self) -> GridSpec {
        let mut g = self.clone();
        g.nodes = 2 * (self.nodes - 1) + 1;
        g.dt = 0.5 * self.dt;
        if let Spacing::Graded { ratio } = self.spacing {
            g.spacing = Spacing::Graded { ratio: ratio.sqrt() };
        }
        g
    }

    fn extended(&self) -> Option<GridSpec> {
        match self.spacing {
            Spacing::Uniform => {
                let mut g = self.clone();
                g.r_max = self.r_min + 2.0 * (self.r_max - self.r_min);
                g.nodes = 2 * (self.nodes - 1) + 1;
                Some(g)
            }
            Spacing::Graded { .. } => None,
        }
    }
}

/// Discretized operator: node masses and conductances in log form.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub r: Vec<f64>,
    /// Mass of the dual cell of each node, ∫ S̃ over it.
    pub mass: Vec<f64>,
    /// c⁺ᵢ = S̃_{i+½}/(h_{i+½} Mᵢ) and c⁻ᵢ = S̃_{i-½}/(h_{i-½} Mᵢ).
    pub up: Vec<f64>,
    pub down: Vec<f64>,
    /// Conductance S̃_{i+½}/h_{i+½} of each cell, for flux bookkeeping.
    pub log_cond: Vec<f64>,
    pub log_mass: Vec<f64>,
    pub left: BoundaryCondition,
}

impl Discretization {
    pub fn new(model: &WeightedModel, grid: &GridSpec, left: BoundaryCondition) -> Result<Self> {
        grid.validate()?;
        model.check_radius(grid.r_min, "r_min")?;
        model.check_radius(grid.r_max, "r_max")?;
        let r = grid.positions();
        let n = r.len();
        let h: Vec<f64> = r.windows(2).map(|w| w[1] - w[0]).collect();
        let log_cond: Vec<f64> = (0..n - 1)
            .map(|i| model.log_weighted_area(0.5 * (r[i] + r[i + 1])) - h[i].ln())
            .collect();
        let mut log_mass = vec![0.0; n];
        for i in 0..n {
            let hl = if i > 0 { h[i - 1] } else { 0.0 };
            let hr = if i < n - 1 { h[i] } else { 0.0 };
            let width = 0.5 * (hl + hr);
            let nodal = model.log_weighted_area(r[i]);
            log_mass[i] = if nodal.is_finite() {
                nodal + width.ln()
            } else {
                // Pole of S̃ at a boundary node: integrate the half cells.
                let mut acc = f64::NEG_INFINITY;
                if hl > 0.0 {
                    acc = log_add_exp(acc, model.log_weighted_area(r[i] - 0.25 * hl) + (0.5 * hl).ln());
                }
                if hr > 0.0 {
                    acc = log_add_exp(acc, model.log_weighted_area(r[i] + 0.25 * hr) + (0.5 * hr).ln());
                }
                acc
            };
        }
        if let Some(k) = log_cond.iter().chain(&log_mass).position(|v| !v.is_finite()) {
            return numeric(format!("weighted area not finite on the grid (entry {k})"));
        }
        let mut up = vec![0.0; n];
        let mut down = vec![0.0; n];
        for i in 0..n {
            if i < n - 1 {
                up[i] = (log_cond[i] - log_mass[i]).exp();
            }
            if i > 0 {
                down[i] = (log_cond[i - 1] - log_mass[i]).exp();
            }
        }
        if up.iter().chain(&down).any(|v| !v.is_finite()) {
            return numeric("operator coefficients overflow; shrink the grid");
        }
        let mass = log_mass.iter().map(|l| l.exp()).collect();
        Ok(Discretization {
            r,
            mass,
            up,
            down,
            log_cond,
            log_mass,
            left,
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// First and last free node.
    pub fn free_range(&self) -> (usize, usize) {
        let first = match self.left {
            BoundaryCondition::Neumann => 0,
            BoundaryCondition::Dirichlet => 1,
        };
        (first, self.len() - 2)
    }

    /// Discrete delta at node `i`: e_i / M_i.
    pub fn delta(&self, i: usize) -> Vec<f64> {
        let mut u = vec![0.0; self.len()];
        u[i] = (-self.log_mass[i]).exp();
        u
    }

    pub fn total_mass(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.mass).map(|(a, m)| a * m).sum()
    }

    /// Apply the discrete operator L to `u` (zero on fixed nodes).
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let (a, b) = self.free_range();
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in a..=b {
            let left = if i > 0 { self.down[i] * (u[i - 1] - u[i]) } else { 0.0 };
            out[i] = self.up[i] * (u[i + 1] - u[i]) + left;
        }
    }
}

/// LU factors of a tridiagonal matrix, reused across right-hand sides.
#[derive(Clone, Debug)]
struct Tridiagonal {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    upper_scaled: Vec<f64>,
}

impl Tridiagonal {
    fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut inv_pivot = vec![0.0; n];
        let mut upper_scaled = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = diag[i] - if i > 0 { lower[i] * prev } else { 0.0 };
            if !(pivot.abs() > 1e-300) || !pivot.is_finite() {
                return numeric(format!("tridiagonal pivot {pivot} at row {i}"));
            }
            inv_pivot[i] = 1.0 / pivot;
            upper_scaled[i] = if i + 1 < n { upper[i] * inv_pivot[i] } else { 0.0 };
            prev = upper_scaled[i];
        }
        Ok(Tridiagonal {
            lower: lower.to_vec(),
            inv_pivot,
            upper_scaled,
        })
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_scaled[i] * rhs[i + 1];
        }
    }
}

/// One θ-scheme step of fixed size, factored once.
struct Stepper {
    theta: f64,
    dt: f64,
    lu: Tridiagonal,
}

impl Stepper {
    fn new(d: &Discretization, theta: f64, dt: f64) -> Result<Self> {
        let (a, b) = d.free_range();
        let m = b - a + 1;
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        for k in 0..m {
            let i = a + k;
            let down = if i > 0 { d.down[i] } else { 0.0 };
            diag[k] = 1.0 + theta * dt * (d.up[i] + down);
            if k > 0 {
                lower[k] = -theta * dt * down;
            }
            if k + 1 < m {
                upper[k] = -theta * dt * d.up[i];
            }
        }
        Ok(Stepper {
            theta,
            dt,
            lu: Tridiagonal::factor(&lower, &diag, &upper)?,
        })
    }

    /// Advance `u` in place; returns the mass that left through the far
    /// (right) and near (left, Dirichlet only) boundaries.
    fn step(&self, d: &Discretization, u: &mut [f64], work: &mut Vec<f64>) -> (f64, f64) {
        let (a, b) = d.free_range();
        let n = d.len();
        let explicit = 1.0 - self.theta;
        let cond_r = d.log_cond[n - 2].exp();
        let cond_l = d.log_cond[0].exp();
        let (old_r, old_l) = (u[b], if a == 1 { u[1] } else { 0.0 });
        work.clear();
        for i in a..=b {
            let mut v = u[i];
            if explicit > 0.0 {
                let left = if i > 0 { d.down[i] * (u[i - 1] - u[i]) } else { 0.0 };
                v += explicit * self.dt * (d.up[i] * (u[i + 1] - u[i]) + left);
            }
            work.push(v);
        }
        self.lu.solve(work);
        u[a..=b].copy_from_slice(work);
        let (new_r, new_l) = (u[b], if a == 1 { u[1] } else { 0.0 });
        let out_r = self.dt * cond_r * (self.theta * new_r + explicit * old_r);
        let out_l = self.dt * cond_l * (self.theta * new_l + explicit * old_l);
        (out_r, out_l)
    }
}

/// Field snapshots with mass bookkeeping.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub r: Vec<f64>,
    pub times: Vec<f64>,
    #[serde(skip)]
    pub snapshots: Vec<Vec<f64>>,
    pub mass_history: Vec<f64>,
    pub initial_mass: f64,
    /// Fraction of the initial mass absorbed at r_max by the last time.
    pub far_leakage: f64,
    /// Fraction absorbed at a Dirichlet left boundary.
    pub near_outflow: f64,
    /// Largest per-step relative mismatch of the mass balance.
    pub conservation_defect: f64,
    /// dt·max|S̃'/S̃|/min Δr.
    pub stability_diagnostic: f64,
    pub steps: usize,
    pub warnings: Vec<String>,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return arg("at least one output time is required");
    }
    if times.iter().any(|t| !(*t > 0.0 && t.is_finite())) || times.windows(2).any(|w| w[1] <= w[0]) {
        return arg("output times must be positive and increasing");
    }
    Ok(())
}

/// Negative values below this fraction of the peak indicate Crank–Nicolson
/// oscillation rather than roundoff.
const NEGATIVE_TOLERANCE: f64 = 1e-6;

fn stability_diagnostic(model: &WeightedModel, d: &Discretization, dt: f64) -> f64 {
    let mut drift: f64 = 0.0;
    let mut hmin = f64::INFINITY;
    for w in d.r.windows(2) {
        let (_, g) = model.log_weighted_jet(0.5 * (w[0] + w[1]));
        if g.is_finite() {
            drift = drift.max(g.abs());
        }
        hmin = hmin.min(w[1] - w[0]);
    }
    dt * drift / hmin
}

/// Evolve `init` and record the field at each requested time.
pub fn solve(
    model: &WeightedModel,
    grid: &GridSpec,
    left_bc: BoundaryCondition,
    init: &[f64],
    times: &[f64],
) -> Result<SolveReport> {
    let d = Discretization::new(model, grid, left_bc)?;
    evolve(model, &d, grid, init, times)
}

fn evolve(
    model: &WeightedModel,
    d: &Discretization,
    grid: &GridSpec,
    init: &[f64],
    times: &[f64],
) -> Result<SolveReport> {
    check_times(times)?;
    if init.len() != d.len() {
        return arg(format!("init has {} values for {} nodes", init.len(), d.len()));
    }
    if init.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return arg("initial data must be nonnegative and finite");
    }
    let mut u = init.to_vec();
    let n = u.len();
    u[n - 1] = 0.0;
    if d.left == BoundaryCondition::Dirichlet {
        u[0] = 0.0;
    }
    let m0 = d.total_mass(&u);
    if !(m0 > 0.0 && m0.is_finite()) {
        return arg("initial data must have positive finite mass");
    }
    let theta = match grid.scheme {
        Scheme::CrankNicolson => 0.5,
        Scheme::ImplicitEuler => 1.0,
    };
    let main = Stepper::new(d, theta, grid.dt)?;
    let startup = if grid.rannacher_startup_steps > 0 {
        Some(Stepper::new(d, 1.0, 0.5 * grid.dt)?)
    } else {
        None
    };
    let mut work = Vec::with_capacity(n);
    let mut t = 0.0;
    let mut startup_left = grid.rannacher_startup_steps;
    let mut far = 0.0;
    let mut near = 0.0;
    let mut defect: f64 = 0.0;
    let mut mass = m0;
    let mut steps = 0usize;
    let mut snapshots = Vec::with_capacity(times.len());
    let mut mass_history = Vec::with_capacity(times.len());
    for &target in times {
        loop {
            let remaining = target - t;
            if remaining <= 1e-12 * target.max(1.0) {
                break;
            }
            let (out_r, out_l, dt_taken) = if startup_left > 0 && remaining >= 0.5 * grid.dt * (1.0 - 1e-12) {
                startup_left -= 1;
                let s = startup.as_ref().unwrap();
                let (a, b) = s.step(d, &mut u, &mut work);
                (a, b, s.dt)
            } else if remaining >= grid.dt * (1.0 - 1e-12) {
                let (a, b) = main.step(d, &mut u, &mut work);
                (a, b, grid.dt)
            } else {
                let th = if startup_left > 0 { 1.0 } else { theta };
                let s = Stepper::new(d, th, remaining)?;
                let (a, b) = s.step(d, &mut u, &mut work);
                (a, b, remaining)
            };
            t += dt_taken;
            steps += 1;
            far += out_r;
            near += out_l;
            let new_mass = d.total_mass(&u);
            defect = defect.max(((mass - new_mass) - (out_r + out_l)).abs() / m0);
            mass = new_mass;
            if !mass.is_finite() {
                return numeric(format!("solution blew up at t = {t}"));
            }
        }
        t = target;
        snapshots.push(u.clone());
        mass_history.push(mass);
    }
    let mut warnings = Vec::new();
    if far / m0 > 0.01 {
        warnings.push(format!(
            "far-boundary leakage {:.3}% of the initial mass by t = {}",
            100.0 * far / m0,
            times.last().unwrap()
        ));
    }
    let stability = stability_diagnostic(model, d, grid.dt);
    let peak = snapshots.iter().flatten().fold(0.0f64, |a, &x| a.max(x));
    let low = snapshots.iter().flatten().fold(0.0f64, |a, &x| a.min(x));
    if low < -NEGATIVE_TOLERANCE * peak {
        warnings.push(format!(
            "field dips to {:.2e} of its peak: dt = {} is too coarse for this grid (stability diagnostic {stability:.1})",
            low / peak,
            grid.dt
        ));
    }
    Ok(SolveReport {
        r: d.r.clone(),
        times: times.to_vec(),
        snapshots,
        mass_history,
        initial_mass: m0,
        far_leakage: far / m0,
        near_outflow: near / m0,
        conservation_defect: defect,
        stability_diagnostic: stability,
        steps,
        warnings,
    })
}

/// On-diagonal kernel values q_t(rᵢ, rᵢ) for a set of source nodes.
#[derive(Clone, Debug, Serialize)]
pub struct KernelDiag {
    pub times: Vec<f64>,
    pub sources: Vec<usize>,
    pub source_r: Vec<f64>,
    /// `diag[k][j]`: time `k`, source `j`.
    pub diag: Vec<Vec<f64>>,
    /// Total mass per source at each time.
    pub mass_history: Vec<Vec<f64>>,
    /// Largest relative mismatch of q_t(i,j) against q_t(j,i) among sources.
    pub symmetry_error: f64,
    pub clamp_count: usize,
    pub most_negative: f64,
    pub far_leakage: f64,
    pub grid: GridSpec,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub r: Vec<f64>,
    #[serde(skip)]
    pub mass: Vec<f64>,
    /// `rows[j][k]`: field of source `j` at time `k`.
    #[serde(skip)]
    pub rows: Vec<Vec<Vec<f64>>>,
}

impl KernelDiag {
    /// q_t(source j, node i) at time index `k`.
    pub fn kernel(&self, k: usize, j: usize, i: usize) -> f64 {
        self.rows[j][k][i]
    }
}

fn run_sources(
    model: &WeightedModel,
    grid: &GridSpec,
    left_bc: BoundaryCondition,
    times: &[f64],
    sources: &[usize],
) -> Result<(Discretization, Vec<SolveReport>)> {
    let d = Discretization::new(model, grid, left_bc)?;
    let (a, b) = d.free_range();
    if let Some(&s) = sources.iter().find(|&&s| s < a || s > b) {
        return Err(Error::Range(format!("source node {s} is not a free node of the grid")));
    }
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(sources.len())
        .max(1);
    let mut results: Vec<Option<Result<SolveReport>>> = (0..sources.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<_> = results.chunks_mut(sources.len().div_ceil(threads)).collect();
        let per = sources.len().div_ceil(threads);
        for (c, chunk) in chunks.into_iter().enumerate() {
            let d = &d;
            scope.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    let s = sources[c * per + k];
                    *slot = Some(evolve(model, d, grid, &d.delta(s), times));
                }
            });
        }
    });
    let reports = results.into_iter().map(|r| r.unwrap()).collect::<Result<Vec<_>>>()?;
    Ok((d, reports))
}

/// Evolve discrete deltas from each source and collect the diagonal.
pub fn kernel_diag(
    model: &WeightedModel,
    grid: &GridSpec,
    left_bc: BoundaryCondition,
    times: &[f64],
    sources: &[usize],
) -> Result<KernelDiag> {
    check_times(times)?;
    if sources.is_empty() {
        return arg("at least one source node is required");
    }
    let (mut d, mut reports) = run_sources(model, grid, left_bc, times, sources)?;
    let mut grid = grid.clone();
    let leak = |rs: &[SolveReport]| rs.iter().map(|r| r.far_leakage).fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if grid.auto_extend && leak(&reports) > 0.01 {
        match grid.extended() {
            Some(g) if model.check_radius(g.r_max, "r_max").is_ok() => {
                warnings.push(format!("r_max doubled to {} after leakage", g.r_max));
                let (d2, r2) = run_sources(model, &g, left_bc, times, sources)?;
                d = d2;
                reports = r2;
                grid = g;
            }
            _ => warnings.push("cannot extend the grid; leakage kept".into()),
        }
    }
    for w in reports.iter().flat_map(|r| r.warnings.iter()) {
        if w.starts_with("field dips") && !warnings.iter().any(|x: &String| x.starts_with("field dips")) {
            warnings.push(w.clone());
        }
    }
    let far_leakage = leak(&reports);
    if far_leakage > 0.01 {
        warnings.push(format!("far-boundary leakage {:.3}% of the mass", 100.0 * far_leakage));
    }
    let mut diag = vec![vec![0.0; sources.len()]; times.len()];
    let mut clamp_count = 0;
    let mut most_negative: f64 = 0.0;
    for (j, rep) in reports.iter_mut().enumerate() {
        for k in 0..times.len() {
            let v = rep.snapshots[k][sources[j]];
            if v < 0.0 {
                clamp_count += 1;
                most_negative = most_negative.min(v);
            }
            diag[k][j] = v.max(0.0);
        }
    }
    let mut symmetry_error: f64 = 0.0;
    for a in 0..sources.len() {
        for b in a + 1..sources.len() {
            for k in 0..times.len() {
                let x = reports[a].snapshots[k][sources[b]];
                let y = reports[b].snapshots[k][sources[a]];
                let scale = x.abs().max(y.abs());
                if scale > 1e-12 * diag[k][a].max(diag[k][b]) && scale > 0.0 {
                    symmetry_error = symmetry_error.max((x - y).abs() / scale);
                }
            }
        }
    }
    Ok(KernelDiag {
        times: times.to_vec(),
        sources: sources.to_vec(),
        source_r: sources.iter().map(|&s| d.r[s]).collect(),
        diag,
        mass_history: reports.iter().map(|r| r.mass_history.clone()).collect(),
        symmetry_error,
        clamp_count,
        most_negative,
        far_leakage,
        grid,
        warnings,
        r: d.r.clone(),
        mass: d.mass.clone(),
        rows: reports.into_iter().map(|r| r.snapshots).collect(),
    })
}

/// Largest diagonal entry at time `t`.
pub fn sup_diag(kern: &KernelDiag, t: f64) -> Result<f64> {
    let k = kern
        .times
        .iter()
        .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
        .ok_or_else(|| Error::Argument(format!("time {t} is not among the kernel times")))?;
    Ok(kern.diag[k].iter().cloned().fold(0.0, f64::max))
}

/// Node index attaining [`sup_diag`] at time index `k`.
pub fn argmax_diag(kern: &KernelDiag, k: usize) -> usize {
    let row = &kern.diag[k];
    let mut best = 0;
    for j in 1..row.len() {
        if row[j] > row[best] {
            best = j;
        }
    }
    kern.sources[best]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::RadialProfile;
    use approx::assert_relative_eq;

    fn flat_full() -> WeightedModel {
        let p = RadialProfile::full_line(RadialProfile::flat(), RadialProfile::flat(), 1.0).unwrap();
        WeightedModel::new(p)
    }

    fn gaussian(t: f64, x: f64) -> f64 {
        (4.0 * std::f64::consts::PI * t).powf(-0.5) * (-x * x / (4.0 * t)).exp()
    }

    #[test]
    fn tridiagonal_solves() {
        let lu = Tridiagonal::factor(&[0.0, -1.0, -1.0], &[2.0, 2.0, 2.0], &[-1.0, -1.0, 0.0]).unwrap();
        let mut b = vec![1.0, 0.0, 1.0];
        lu.solve(&mut b);
        for v in b {
            assert_relative_eq!(v, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn grid_positions() {
        let g = GridSpec::uniform(-1.0, 1.0, 65, 0.1);
        let p = g.positions();
        assert_eq!(p[0], -1.0);
        assert_eq!(p[64], 1.0);
        assert_eq!(g.nearest_node(0.01), 32);
        let mut gg = g.clone();
        gg.spacing = Spacing::Graded { ratio: 1.01 };
        let q = gg.positions();
        assert_relative_eq!(q[64], 1.0, max_relative = 1e-15);
        assert_relative_eq!((q[2] - q[1]) / (q[1] - q[0]), 1.01, max_relative = 1e-9);
        assert!(GridSpec::uniform(0.0, 1.0, 10, 0.1).validate().is_err());
    }

    #[test]
    fn gaussian_small_grid() {
        let g = GridSpec::uniform(-20.0, 20.0, 1025, 0.01);
        let m = flat_full();
        let d = Discretization::new(&m, &g, BoundaryCondition::Dirichlet).unwrap();
        let s = g.nearest_node(0.0);
        let rep = solve(&m, &g, BoundaryCondition::Dirichlet, &d.delta(s), &[1.0]).unwrap();
        let u = &rep.snapshots[0];
        let peak = gaussian(1.0, 0.0);
        let err = rep
            .r
            .iter()
            .zip(u)
            .map(|(&x, &v)| (v - gaussian(1.0, x - rep.r[s])).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.01 * peak, "err {err}");
    }

    #[test]
    fn neumann_conserves_and_dirichlet_drains() {
        let m = WeightedModel::flat();
        let g = GridSpec::uniform(0.0, 40.0, 801, 0.02);
        let d = Discretization::new(&m, &g, BoundaryCondition::Neumann).unwrap();
        let rep = solve(&m, &g, BoundaryCondition::Neumann, &d.delta(100), &[0.5, 1.0, 2.0]).unwrap();
        assert!(rep.conservation_defect < 1e-10);
        for w in rep.mass_history.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-9);
        }
        let dd = Discretization::new(&m, &g, BoundaryCondition::Dirichlet).unwrap();
        let rep = solve(&m, &g, BoundaryCondition::Dirichlet, &dd.delta(20), &[0.5, 1.0, 2.0]).unwrap();
        assert!(rep.near_outflow > 0.0);
        assert!(rep.mass_history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn kernel_symmetry_and_sup() {
        let m = WeightedModel::new(RadialProfile::exp_alpha(0.5, 2, 1.0).unwrap());
        let g = GridSpec::uniform(0.0, 30.0, 601, 0.01);
        let k = kernel_diag(&m, &g, BoundaryCondition::Neumann, &[0.5, 1.0], &[10, 60, 200]).unwrap();
        assert!(k.symmetry_error < 1e-8, "{}", k.symmetry_error);
        let s = sup_diag(&k, 1.0).unwrap();
        assert_eq!(s, k.diag[1].iter().cloned().fold(0.0, f64::max));
        assert!(sup_diag(&k, 0.7).is_err());
        assert!(k.diag[1].iter().zip(&k.diag[0]).all(|(b, a)| b <= a));
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = WeightedModel::flat();
        let g = GridSpec::uniform(0.0, 10.0, 101, 0.01);
        let mut init = vec![0.0; 101];
        init[5] = -1.0;
        assert!(solve(&m, &g, BoundaryCondition::Neumann, &init, &[1.0]).is_err());
        init[5] = 1.0;
        assert!(solve(&m, &g, BoundaryCondition::Neumann, &init, &[1.0, 0.5]).is_err());
        let bad = GridSpec::uniform(-1.0, 10.0, 101, 0.01);
        assert!(matches!(
            solve(&m, &bad, BoundaryCondition::Neumann, &init, &[1.0]),
            Err(Error::Range(_))
        ));
    }
}
