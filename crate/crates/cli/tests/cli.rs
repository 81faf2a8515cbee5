use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_willmore-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("WILLMORE_LAB_THREADS")
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) {
    let o = lab(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

/// Rows of a CSV file as maps from header to cell.
fn table(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let head = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            head.iter()
                .zip(rec.unwrap().iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn summary(path: &Path, quantity: &str) -> (f64, f64) {
    let rows = table(path);
    let r = rows
        .iter()
        .find(|r| r["quantity"] == quantity)
        .unwrap_or_else(|| panic!("{quantity}"));
    (r["value"].parse().unwrap(), r["error"].parse().unwrap())
}

#[test]
fn analyze_plane_has_unit_density() {
    let d = tempfile::tempdir().unwrap();
    ok(&["analyze", "--surface", "plane"], d.path());
    for r in table(&d.path().join("density_profile.csv")) {
        let t: f64 = r["theta"].parse().unwrap();
        assert!((t - 1.0).abs() < 1e-9, "{t}");
    }
    let (t, _) = summary(&d.path().join("summary.csv"), "theta_infinity");
    assert!((t - 1.0).abs() < 1e-6);
    assert!(d.path().join("monotonicity_inequality.csv").exists());
    assert!(fs::read_to_string(d.path().join("run_config.txt"))
        .unwrap()
        .contains("surface = plane"));
}

#[test]
fn analyze_catenoid_approaches_two() {
    let d = tempfile::tempdir().unwrap();
    ok(
        &["analyze", "--surface", "catenoid", "--r-max", "100", "--format", "json"],
        d.path(),
    );
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("analyze.json")).unwrap()).unwrap();
    let rows = v["density_profile"].as_array().unwrap();
    let last = rows.last().unwrap()["theta"].as_f64().unwrap();
    assert!((last - 2.0).abs() < 0.01, "{last}");
    let t = v["extrapolation"]["value"].as_f64().unwrap();
    assert!((t - 2.0).abs() < 0.02, "{t}");
    // minimal: the Willmore energy vanishes
    assert!(v["curvature"]["willmore"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn analyze_mesh_reports_willmore_and_genus() {
    let d = tempfile::tempdir().unwrap();
    ok(&["analyze", "--mesh", &fixture("icosphere.off")], d.path());
    let s = d.path().join("summary.csv");
    let (w, _) = summary(&s, "willmore");
    assert!((w - 16.0 * PI).abs() < 0.05 * 16.0 * PI, "{w}");
    assert_eq!(summary(&s, "genus").0, 0.0);
    assert_eq!(summary(&s, "euler_characteristic").0, 2.0);
}

#[test]
fn invert_offset_plane_gives_a_sphere() {
    let d = tempfile::tempdir().unwrap();
    ok(
        &["invert", "--surface", "plane", "--offset", "1", "--base", "0,0,0"],
        d.path(),
    );
    let s = d.path().join("inversion_summary.csv");
    assert!(summary(&s, "inverted_sphere_fit_residual").0 <= 1e-8);
    assert!((summary(&s, "inverted_sphere_fit_radius").0 - 0.5).abs() < 1e-8);
    assert!(summary(&s, "antisymmetry_max_residual").0 <= 1e-8);
    let rows = table(&d.path().join("antisymmetry.csv"));
    assert_eq!(rows.len(), 100);
}

#[test]
fn invert_catenoid_matches_the_identity() {
    let d = tempfile::tempdir().unwrap();
    ok(&["invert", "--surface", "catenoid", "--base", "0,0,0"], d.path());
    let s = d.path().join("inversion_summary.csv");
    let (rho, _) = summary(&s, "inverted_density_at_base");
    let (theta, _) = summary(&s, "theta_infinity");
    assert!((rho - theta).abs() <= 0.02 * theta);
    let (lhs, _) = summary(&s, "density_formula_lhs");
    assert!((lhs - 2.0 * PI).abs() < 0.02 * 2.0 * PI);
    let (w, _) = summary(&s, "inverted_willmore");
    assert!((w - 32.0 * PI).abs() < 0.02 * 32.0 * PI);
}

#[test]
fn base_point_on_the_neck_exits_with_input_error() {
    let d = tempfile::tempdir().unwrap();
    let o = lab(&["invert", "--surface", "catenoid", "--base", "1,0,0"], d.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("base point"));
}

#[test]
fn flatness_on_the_sphere_scales_linearly() {
    let d = tempfile::tempdir().unwrap();
    ok(
        &[
            "flatness",
            "--surface",
            "sphere",
            "--xi",
            "pole",
            "--scales",
            "0.05,0.1,0.2",
        ],
        d.path(),
    );
    let rows = table(&d.path().join("flatness.csv"));
    assert_eq!(rows.len(), 3);
    for r in rows {
        let sigma: f64 = r["sigma"].parse().unwrap();
        let eps: f64 = r["eps"].parse().unwrap();
        let bound: f64 = r["err_bound"].parse().unwrap();
        // a unit sphere leaves its tangent plane by sigma^2 / 2 at distance sigma
        assert!((eps - sigma / 2.0).abs() <= bound, "sigma {sigma}: eps {eps}");
        assert_eq!(r["ambiguous_flag"], "false");
    }
}

#[test]
fn ends_of_scherk_and_catenoid() {
    let d = tempfile::tempdir().unwrap();
    ok(&["ends", "--surface", "catenoid"], d.path());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("ends.json")).unwrap()).unwrap();
    assert_eq!(v["e"], 2);
    assert_eq!(v["hypothesis_holds"], true);
    assert_eq!(v["per_end"].as_array().unwrap().len(), 2);

    let d = tempfile::tempdir().unwrap();
    ok(&["ends", "--surface", "scherk", "--format", "csv"], d.path());
    let s = d.path().join("ends_summary.csv");
    assert_eq!(summary(&s, "e").0, 1.0);
    assert_eq!(summary(&s, "hypothesis_holds").0, 0.0);
}

#[test]
fn ends_of_a_closed_mesh() {
    let d = tempfile::tempdir().unwrap();
    ok(&["ends", "--mesh", &fixture("torus.off")], d.path());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("ends.json")).unwrap()).unwrap();
    assert_eq!(v["e"], 0);
    assert_eq!(v["topology"]["genus"], 1);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let runs: Vec<_> = ["1", "2"]
        .iter()
        .map(|t| {
            let d = tempfile::tempdir().unwrap();
            ok(
                &[
                    "analyze",
                    "--surface",
                    "enneper",
                    "--r-max",
                    "20",
                    "--n-radii",
                    "8",
                    "--threads",
                    t,
                ],
                d.path(),
            );
            d
        })
        .collect();
    for f in [
        "run_config.txt",
        "density_profile.csv",
        "summary.csv",
        "monotonicity.csv",
    ] {
        let a = fs::read(runs[0].path().join(f)).unwrap();
        let b = fs::read(runs[1].path().join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn config_file_supplies_defaults() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    fs::write(&cfg, "surface = sphere\nscales = 0.1\nxi = pole\n").unwrap();
    ok(&["flatness", "--config", cfg.to_str().unwrap()], d.path());
    assert_eq!(table(&d.path().join("flatness.csv")).len(), 1);
    // the saved config reproduces the run
    let saved = d.path().join("run_config.txt");
    let again = tempfile::tempdir().unwrap();
    ok(&["flatness", "--config", saved.to_str().unwrap()], again.path());
    assert_eq!(
        fs::read(d.path().join("flatness.csv")).unwrap(),
        fs::read(again.path().join("flatness.csv")).unwrap()
    );
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(lab(&["analyze", "--surface", "klein"], d.path()).status.code(), Some(3));
    assert_eq!(lab(&["analyze"], d.path()).status.code(), Some(3));
    assert_eq!(lab(&["bogus"], d.path()).status.code(), Some(3));
    assert_eq!(
        lab(&["analyze", "--surface", "plane", "--threads", "0"], d.path())
            .status
            .code(),
        Some(3)
    );
    let o = Command::new(env!("CARGO_BIN_EXE_willmore-lab"))
        .arg("--help")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_willmore-lab"))
        .arg("surfaces")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&o.stdout).lines().any(|l| l == "catenoid"));
}
