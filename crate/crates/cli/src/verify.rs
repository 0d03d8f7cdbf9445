//! Invariant suites behind `heatlab verify`. Each suite draws its random
//! instances from its own seeded generator, so results depend on the seed only.

use heatlab_core::geometry::{capacity_annulus, classify_parabolicity, volume, volume_between, End, Parabolicity};
use heatlab_core::htransform::{verify_kernel_identity, TransformPair};
use heatlab_core::isoperimetry::{functional_lower_bound, generalized_inverse, profile_halfline};
use heatlab_core::monotone::MonotoneTab;
use heatlab_core::solver::{kernel_diag, BoundaryCondition, GridSpec};
use heatlab_core::spectral::{lambda1_dirichlet, lambda1_rayleigh_upper, FaberKrahnFunction, GammaInverter};
use heatlab_core::{RadialProfile, Weight, WeightedModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;
use std::f64::consts::PI;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

type Suite = fn(&mut ChaCha8Rng) -> Result<(bool, String), String>;

const SUITES: [(&str, Suite); 10] = [
    ("volume monotone and additive", volume_suite),
    ("capacity monotone", capacity_suite),
    ("parabolicity classes", parabolicity_suite),
    ("euclidean isoperimetric profile", euclidean_profile_suite),
    ("generalized inverse", inverse_suite),
    ("functional lower bound", lemma_suite),
    ("gamma closed form", gamma_suite),
    ("eigenvalue ordering", eigen_suite),
    ("gaussian kernel", gaussian_suite),
    ("h-transform identity", htransform_suite),
];

pub fn run_suites(seed: u64) -> Vec<SuiteResult> {
    SUITES
        .iter()
        .enumerate()
        .map(|(k, (name, suite))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let (pass, detail) = match suite(&mut rng) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            SuiteResult { name, pass, detail }
        })
        .collect()
}

pub fn print_table(results: &[SuiteResult]) {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in results {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        println!("{tag}  {:width$}  {}", r.name, r.detail);
    }
}

pub fn to_json(results: &[SuiteResult]) -> Value {
    serde_json::to_value(results).unwrap_or(Value::Null)
}

fn e2s(e: heatlab_core::Error) -> String {
    e.to_string()
}

fn random_model(rng: &mut ChaCha8Rng) -> Result<WeightedModel, String> {
    let n = rng.gen_range(2..=4);
    let p = match rng.gen_range(0..3) {
        0 => RadialProfile::euclidean(n),
        1 => RadialProfile::hyperbolic(n),
        _ => RadialProfile::exp_alpha(rng.gen_range(0.1..=1.0), n, 1.0),
    };
    Ok(WeightedModel::new(p.map_err(e2s)?))
}

/// Models with nondecreasing area, where λ₁ ≤ 4(S̃/Ṽ)² applies.
fn growing_model(rng: &mut ChaCha8Rng) -> Result<WeightedModel, String> {
    let n = rng.gen_range(2..=4);
    let p = match rng.gen_range(0..3) {
        0 => RadialProfile::euclidean(n),
        1 => RadialProfile::hyperbolic(n),
        _ => RadialProfile::power(rng.gen_range(0.0..2.0), n),
    };
    Ok(WeightedModel::new(p.map_err(e2s)?))
}

fn volume_suite(rng: &mut ChaCha8Rng) -> Result<(bool, String), String> {
    let mut worst_add: f64 = 0.0;
    let mut decreasing = 0;
    for _ in 0..20 {
        let m = random_model(rng)?;
        let a = rng.gen_range(0.0..3.0);
        let b = a + rng.gen_range(0.01..3.0);
        let va = volume(&m, a).map_err(e2s)?;
        let vb = volume(&m, b).map_err(e2s)?;
        let mid = volume_between(&m, a, b).map_err(e2s)?;
        if vb < va {
            decreasing += 1;
        }
        worst_add = worst_add.max((va + mid - vb).abs() / vb);
    }
    Ok((
        decreasing == 0 && worst_add <= 1e-7,
        format!("decreasing pairs {decreasing}, additivity defect {worst_add:.2e}"),
    ))
}

fn capacity_suite(rng: &mut ChaCha8Rng) -> Result<(bool, String), String> {
    let mut bad = 0;
    for _ in 0..20 {
        let m = random_model(rng)?;
        let a = rng.gen_range(0.2..2.0);
        let b = a + rng.gen_range(0.1..2.0);
        let c = b + rng.gen_range(0.1..2.0);
        // A larger outer ball lowers the capacity.
        if capacity_annulus(&m, a, c).map_err(e2s)? > capacity_annulus(&m, a, b).map_err(e2s)? {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("violations {bad} of 20")))
}

fn parabolicity_suite(_: &mut ChaCha8Rng) -> Result<(bool, String), String> {
    let class = |m: WeightedModel| classify_parabolicity(&m, End::Plus).map_err(e2s);
    let mut wrong = 0;
    for alpha in [0.2, 0.5, 1.0] {
        let m = WeightedModel::new(RadialProfile::exp_alpha(alpha, 2, 1.0).map_err(e2s)?);
        wrong += (class(m)? != Parabolicity::Parabolic) as usize;
    }
    wrong += (class(WeightedModel::flat())? != Parabolicity::Parabolic) as usize;
    wrong +=
        (class(WeightedModel::new(RadialProfile::euclidean(2).map_err(e2s)?))? != Parabolicity::Parabolic) as usize;
    wrong +=
        (class(WeightedModel::new(RadialProfile::euclidean(3).map_err(e2s)?))? != Parabolicity::Nonparabolic) as usize;
    wrong +=
        (class(WeightedModel::new(RadialProfile::hyperbolic(2).map_err(e2s)?))? != Parabolicity::Nonparabolic) as usize;
    Ok((wrong == 0, format!("misclassified {wrong} of 7")))
}

/// S = r^(n-1) gives J(v) = (nv)^((n-1)/n).
fn euclidean_profile_suite(rng: &mut ChaCha8Rng) -> Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    let mut flags = true;
    for n in 2..=4u32 {
        let j = profile_halfline(&WeightedModel::new(RadialProfile::euclidean(n).map_err(e2s)?)).map_err(e2s)?;
        flags &= j.j_over_v_nonincreasing;
        for _ in 0..20 {
            let v = 10f64.powf(rng.gen_range(-2.0..6.0));
            let exact = (n as f64 * v).powf((n - 1) as f64 / n as f64);
            worst = worst.max((j.eval(v) - exact).abs() / exact);
        }
    }
    Ok((
        worst <= 1e-6 && flags,
        format!("max rel err {worst:.2e}, J/v flags set {flags}"),
    ))
}

fn random_step(rng: &mut ChaCha8Rng, max_len: f64) -> (Vec<f64>, Vec<f64>) {
    let m = rng.gen_range(2..=10);
    let mut b: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..max_len)).collect();
    b.push(0.0);
    b.sort_by(f64::total_cmp);
    b.dedup_by(|x, y| (*x - *y).abs() < 1e-6);
    let mut v: Vec<f64> = (0..b.len() - 1).map(|_| rng.gen_range(0.05..5.0)).collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v.dedup();
    b.truncate(v.len() + 1);
    v.push(0.0);
    (b, v)
}

fn inverse_suite(rng: &mut ChaCha8Rng) -> Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    let mut mismatches = 0;
    for _ in 0..100 {
        let (b, v) = random_step(rng, 10.0);
        let phi = MonotoneTab::step_nonincreasing(b.clone(), v).map_err(e2s)?;
        let pair = generalized_inverse(&phi).map_err(e2s)?;
        let (a, s) = (pair.phi.integral(), pair.phi_star.integral());
        worst = worst.max((a - s).abs() / a);
        let back = generalized_inverse(&pair.phi_star).map_err(e2s)?.phi_star;
        for w in b.windows(2) {
            let x = 0.5 * (w[0] + w[1]);
            mismatches += (back.eval(x) != phi.eval(x)) as usize;
        }
    }
    Ok((
        worst <= 1e-10 && mismatches == 0,
        format!("integral mismatch {worst:.2e}, double-inversion mismatches {mismatches}"),
    ))
}

fn lemma_suite(rng: &mut ChaCha8Rng) -> Result<(bool, String), String> {
    let mut violations = 0;
    for _ in 0..10 {
        let (a, p_exp) = (rng.gen_range(0.2..5.0), rng.gen_range(0.0..1.0));
        let (c, cap) = (rng.gen_range(0.2..5.0), rng.gen_range(0.1..5.0));
        let f = move |x: f64| a * x.powf(p_exp);
        let g = move |y: f64| c * y.min(cap);
        let p = rng.gen_range(0.5..20.0);
        let v = 10f64.powf(rng.gen_range(-2.0..3.0));
        let bound = functional_lower_bound(&f, &g, p, v).map_err(e2s)?;
        for _ in 0..200 {
            let (b, mut vals) = random_step(rng, p);
            let mass: f64 = (0..b.len() - 1).map(|k| vals[k] * (b[k + 1] - b[k])).sum();
            vals.iter_mut().for_each(|x| *x *= v / mass);
            let gs = |y: f64| g(y.min(p - y));
            let total: f64 = (0..b.len() - 1)
                .map(|k| f(vals[k]) * (b[k + 1] - b[k]) + gs(b[k + 1]) * (vals[k] - vals[k + 1]))
                .sum();
            violations += (bound > total) as usize;
        }
    }
    Ok((violations == 0, format!("violations {violations} of 2000")))
}

fn gamma_suite(rng: &mut ChaCha8Rng) -> Result<(bool, String), String> {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=6) as f64;
        let t = 10f64.powf(rng.gen_range(-3.0..3.0));
        let fk = FaberKrahnFunction::power(1.0, n).map_err(e2s)?;
        let g = GammaInverter::new(&fk, t).and_then(|i| i.gamma(t)).map_err(e2s)?;
        let exact = (2.0 * t / n).powf(0.5 * n);
        worst = worst.max((g - exact).abs() / exact);
    }
    Ok((worst <= 1e-6, format!("max rel err {worst:.2e}")))
}

fn eigen_suite(rng: &mut ChaCha8Rng) -> Result<(bool, String), String> {
    let flat = WeightedModel::flat();
    let mut flat_err: f64 = 0.0;
    let mut above = 0;
    for _ in 0..5 {
        let r = rng.gen_range(0.5..5.0);
        let dd = lambda1_dirichlet(&flat, r, BoundaryCondition::Dirichlet).map_err(e2s)?;
        let nd = lambda1_dirichlet(&flat, r, BoundaryCondition::Neumann).map_err(e2s)?;
        flat_err = flat_err
            .max((dd * r * r / (PI * PI) - 1.0).abs())
            .max((nd * 4.0 * r * r / (PI * PI) - 1.0).abs());
        let m = growing_model(rng)?;
        let l = lambda1_dirichlet(&m, r, BoundaryCondition::Neumann).map_err(e2s)?;
        above += (l > lambda1_rayleigh_upper(&m, r).map_err(e2s)?) as usize;
    }
    Ok((
        flat_err <= 1e-3 && above == 0,
        format!("flat interval rel err {flat_err:.2e}, Rayleigh violations {above}"),
    ))
}

fn gaussian_suite(_: &mut ChaCha8Rng) -> Result<(bool, String), String> {
    let line = RadialProfile::full_line(RadialProfile::flat(), RadialProfile::flat(), 1.0).map_err(e2s)?;
    let model = WeightedModel::new(line);
    let grid = GridSpec::uniform(-20.0, 20.0, 2048, 2e-3);
    let src = grid.nearest_node(0.0);
    let kd = kernel_diag(&model, &grid, BoundaryCondition::Neumann, &[1.0], &[src]).map_err(e2s)?;
    let peak = (4.0 * PI).powf(-0.5);
    let rs = kd.source_r[0];
    let err =
        kd.r.iter()
            .zip(&kd.rows[0][0])
            .map(|(r, q)| (q - peak * (-(r - rs) * (r - rs) / 4.0).exp()).abs())
            .fold(0.0, f64::max)
            / peak;
    Ok((err <= 1e-2, format!("sup-norm rel err {err:.2e}")))
}

fn htransform_suite(_: &mut ChaCha8Rng) -> Result<(bool, String), String> {
    let affine = Weight::Affine {
        intercept: 1.0,
        slope: 1.0,
    };
    let pair = TransformPair::new(WeightedModel::flat(), affine, 1.0, 1.0).map_err(e2s)?;
    let grid = GridSpec::uniform(0.0, 20.0, 1024, 0.01);
    let rep = verify_kernel_identity(&pair, &grid, &[0.5, 1.0], &[1.0, 2.0]).map_err(e2s)?;
    let pass = rep.max_rel_err <= 1e-2 && (1.7..=2.3).contains(&rep.convergence_order);
    Ok((
        pass,
        format!(
            "max rel err {:.2e}, order {:.2}",
            rep.max_rel_err, rep.convergence_order
        ),
    ))
}
