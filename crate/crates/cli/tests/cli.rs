use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn heatlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatlab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("HEATLAB_OUT")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn geometry_of_the_plane() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "g.cfg",
        "[model] family=euclidean n=2\n[task] kind=geometry\n[grid] r_min=0 r_max=4 nodes=81\n[output] dir=geo\n",
    );
    let out = heatlab(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv(&tmp.path().join("geo/geometry.csv"));
    assert_eq!(header, "r,S,S_tilde,V,h");
    let at_two = rows.iter().find(|r| (r[0] - 2.0).abs() < 1e-12).unwrap();
    assert!((at_two[3] - 2.0).abs() < 1e-8, "V(2) = {}", at_two[3]);
    let rep = report(&tmp.path().join("geo/report.json"));
    assert_eq!(rep["exit_code"], 0);
    assert_eq!(rep["result"]["parabolicity"]["plus"], "parabolic");
    let echoed = fs::read_to_string(tmp.path().join("geo/effective.cfg")).unwrap();
    assert_eq!(
        heatlab::parse_config(&echoed).unwrap(),
        heatlab::config::load(&tmp.path().join("g.cfg")).unwrap()
    );
}

#[test]
fn configuration_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let bad_alpha = write(
        tmp.path(),
        "a.cfg",
        "[model] family=exp_alpha alpha=1.5\n[task] kind=iso\n",
    );
    let out = heatlab(&["run", &bad_alpha], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));

    let no_time = write(
        tmp.path(),
        "b.cfg",
        "[model] family=hyperbolic n=2\n[task] kind=bounds\n",
    );
    let out = heatlab(&["run", &no_time], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t_start"));

    let unknown = write(
        tmp.path(),
        "c.cfg",
        "[model] family=flat\n\n[task] kind=iso colour=red\n",
    );
    let out = heatlab(&["run", &unknown], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn numeric_failures_exit_two() {
    let tmp = TempDir::new().unwrap();
    // γ saturates on the hyperbolic plane: ∫ dv/(vΛ) stays bounded.
    let cfg = write(
        tmp.path(),
        "f.cfg",
        "[model] family=hyperbolic n=2\n[task] kind=fk\n[time] t_start=1 t_end=10000 t_steps=5\n",
    );
    let out = heatlab(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let rep = report(&tmp.path().join("out/report.json"));
    assert_eq!(rep["status"], "failed");
    assert_eq!(rep["exit_code"], 2);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let tmp = TempDir::new().unwrap();
    let text = "[model] family=exp_alpha alpha=0.5 n=2\n[minus] family=hyperbolic n=2\n[weight] kind=two_end\n[task] kind=iso\n[range] min=1 max=1e8 points=33\n";
    let cfg = write(tmp.path(), "i.cfg", &format!("{text}[output] dir=one\n"));
    let cfg2 = write(tmp.path(), "j.cfg", &format!("{text}[output] dir=two\n"));
    assert_eq!(heatlab(&["run", &cfg], tmp.path()).status.code(), Some(0));
    assert_eq!(heatlab(&["run", &cfg2], tmp.path()).status.code(), Some(0));
    let a = fs::read(tmp.path().join("one/iso.csv")).unwrap();
    let b = fs::read(tmp.path().join("two/iso.csv")).unwrap();
    assert_eq!(a, b);
    let (header, rows) = csv(&tmp.path().join("one/iso.csv"));
    assert_eq!(header, "v,J_nu,J_warped,J_asymptotic");
    assert_eq!(rows.len(), 33);
    // Seventeen significant digits per cell.
    let first = String::from_utf8(a).unwrap().lines().nth(1).unwrap().to_string();
    let mantissa = first.split(',').next().unwrap().split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
}

#[test]
fn output_directory_can_be_overridden() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "g.cfg",
        "[model] family=flat\n[task] kind=geometry\n[output] dir=ignored format=json\n",
    );
    let target = tmp.path().join("elsewhere");
    let out = Command::new(env!("CARGO_BIN_EXE_heatlab"))
        .args(["run", &cfg])
        .current_dir(tmp.path())
        .env("HEATLAB_OUT", &target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(!tmp.path().join("ignored").exists());
    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(target.join("geometry.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 101);
    assert_eq!(rows[100]["r"], 10.0);
}

#[test]
fn solve_writes_snapshots() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "s.cfg",
        "[model] family=euclidean n=3\n[task] kind=solve source=0\n[time] t_start=0.5 t_end=1 t_steps=2 log_spaced=false\n[grid] r_max=30 nodes=2000 dt=0.0005\n",
    );
    let out = heatlab(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for tag in ["000", "001"] {
        let (header, rows) = csv(&tmp.path().join(format!("out/field_t{tag}.csv")));
        assert_eq!(header, "r,u");
        assert_eq!(rows.len(), 2000);
    }
    // The pole value is the heat kernel of R³ with unit sphere measure.
    let (_, rows) = csv(&tmp.path().join("out/field_t000.csv"));
    let exact = 4.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI).powf(-1.5);
    assert!((rows[0][1] / exact - 1.0).abs() < 1e-2, "{} vs {exact}", rows[0][1]);
}

#[test]
fn bounds_on_a_half_line_are_ordered() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "b.cfg",
        "[model] family=hyperbolic n=3\n[task] kind=bounds\n[time] t_start=0.5 t_end=5 t_steps=6\n[grid] r_max=40 nodes=1600 dt=0.001\n",
    );
    let out = heatlab(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv(&tmp.path().join("out/bounds.csv"));
    assert_eq!(header, "t,upper,lower,numeric");
    for r in &rows {
        assert!(r[2] <= r[3] && r[3] <= r[1], "{r:?}");
    }
    let rep = report(&tmp.path().join("out/report.json"));
    assert!(rep["result"]["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn verify_prints_a_table() {
    let tmp = TempDir::new().unwrap();
    let out = heatlab(&["verify", "--seed", "3"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 10);
    let rep = report(&tmp.path().join("out/report.json"));
    assert_eq!(rep["result"].as_array().unwrap().len(), 10);
}

#[test]
fn sweep_records_every_child() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("configs");
    fs::create_dir(&dir).unwrap();
    write(
        &dir,
        "a_geometry.cfg",
        "[model] family=euclidean n=3\n[task] kind=geometry\n",
    );
    write(&dir, "b_bad.cfg", "[model] family=exp_alpha alpha=2\n[task] kind=iso\n");
    write(
        &dir,
        "c_iso.cfg",
        "[model] family=euclidean n=2\n[task] kind=iso\n[range] min=1 max=100 points=5\n",
    );
    write(&dir, "notes.txt", "not a config");
    let out = heatlab(&["sweep", "configs"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let merged = report(&dir.join("sweep.json"));
    let entries = merged.as_object().unwrap();
    assert_eq!(entries.len(), 3);
    let mut codes: Vec<(String, i64)> = entries
        .values()
        .map(|e| {
            (
                e["file"].as_str().unwrap().to_string(),
                e["exit_code"].as_i64().unwrap(),
            )
        })
        .collect();
    codes.sort();
    assert_eq!(
        codes,
        vec![
            ("a_geometry.cfg".into(), 0),
            ("b_bad.cfg".into(), 1),
            ("c_iso.cfg".into(), 0)
        ]
    );
    assert!(dir.join("a_geometry/geometry.csv").exists());
    assert!(dir.join("c_iso/iso.csv").exists());
    let again = heatlab(&["sweep", "configs"], tmp.path());
    assert_eq!(again.status.code(), Some(1));
    assert_eq!(report(&dir.join("sweep.json")), merged);
}

#[test]
fn empty_sweep_is_empty() {
    let tmp = TempDir::new().unwrap();
    fs::create_dir(tmp.path().join("none")).unwrap();
    let out = heatlab(&["sweep", "none"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&tmp.path().join("none/sweep.json")), serde_json::json!({}));
}

#[test]
fn pipeline_at_one_half() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "p.cfg",
        "[model] family=exp_alpha alpha=0.5 n=2\n[task] kind=pipeline\n",
    );
    let out = heatlab(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("out");
    assert_eq!(csv(&dir.join("bounds.csv")).0, "t,upper,lower,numeric");
    assert_eq!(csv(&dir.join("iso.csv")).0, "v,J_nu,J_warped,J_asymptotic");
    assert_eq!(csv(&dir.join("eigen.csv")).0, "R,lambda1,rayleigh_upper");
    let rep = report(&dir.join("report.json"));
    let beta = rep["result"]["fitted_exponent"].as_f64().unwrap();
    assert!((beta - 1.0 / 3.0).abs() <= 0.15 / 3.0, "fitted exponent {beta}");
}
