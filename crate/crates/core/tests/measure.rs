use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::DVector;
use proptest::prelude::*;
use willmore_core::geom::{load_mesh, sample_mesh, Registry, Surface, SurfaceParams};
use willmore_core::measure::density::extrapolate_infinity;
use willmore_core::measure::{
    area, density_at_point, density_ratio, density_rows, geometric_radii, mesh_willmore_estimate, monotonicity_check,
    willmore_energy, DensityRow, QuadOptions, Region, DEFAULT_DELTAS,
};

fn build(name: &str, p: SurfaceParams) -> Surface {
    Registry::builtin().build(name, &p).unwrap()
}

fn o() -> QuadOptions {
    QuadOptions::default()
}

#[test]
fn catenoid_ball_area_against_radial_oracle() {
    // area of the catenoid inside B_r(0): 2 * int_0^V 2 pi cosh^2(v) dv with cosh^2 V + V^2 = r^2
    let s = build("catenoid", SurfaceParams::new().with("cutoff", 100.0));
    for r in [2.0, 7.5, 30.0] {
        let v = willmore_core::geom::catalog::catenoid_height(1.0, r);
        let oracle = 2.0 * PI * (v + 0.5 * (2.0 * v).sinh());
        let q = area(&s, &Region::ball(&DVector::zeros(3), r), &o()).unwrap();
        assert_relative_eq!(q.value, oracle, max_relative = 1e-7);
    }
}

#[test]
fn sphere_density_about_an_outside_point() {
    // a ball about (0,0,1+d) of radius rho cuts a cap of height h from the unit sphere,
    // area 2 pi h with (1 + d - 1 + h)^2 + ... solved through the law of cosines
    let s = build("sphere", SurfaceParams::new());
    let d = 0.3;
    let x = DVector::from_vec(vec![0.0, 0.0, 1.0 + d]);
    for rho in [0.5, 1.0, 2.0] {
        let cos_a: f64 = ((1.0 + d) * (1.0 + d) + 1.0 - rho * rho) / (2.0 * (1.0 + d));
        let cap = 2.0 * PI * (1.0 - cos_a.clamp(-1.0, 1.0));
        let q = density_ratio(&s, &x, rho, &o()).unwrap();
        assert_relative_eq!(q.value, cap / (PI * rho * rho), max_relative = 1e-7);
    }
}

#[test]
fn graph_willmore_matches_series_oracle() {
    // z = c (x^2 - y^2) over the unit disk, |H|^2 from the graph formula on a fine polar grid
    let c = 0.1;
    let s = build("graph", SurfaceParams::new().with("c", c).with("boundary", 1.0));
    let w = willmore_energy(&s, None, &o()).unwrap();
    let (nr, nt) = (800, 800);
    let mut oracle = 0.0;
    for i in 0..nr {
        let r = (i as f64 + 0.5) / nr as f64;
        for j in 0..nt {
            let t = (j as f64 + 0.5) * 2.0 * PI / nt as f64;
            let (x, y) = (r * t.cos(), r * t.sin());
            let (p, q) = (2.0 * c * x, -2.0 * c * y);
            let (fxx, fyy) = (2.0 * c, -2.0 * c);
            let g = 1.0 + p * p + q * q;
            let h = ((1.0 + q * q) * fxx + (1.0 + p * p) * fyy) / g.powf(1.5);
            oracle += h * h * g.sqrt() * r / nr as f64 * 2.0 * PI / nt as f64;
        }
    }
    assert_relative_eq!(w.value, oracle, max_relative = 1e-4);
}

#[test]
fn extrapolation_reproduces_synthetic_tails() {
    let radii = geometric_radii(1.0, 100.0, 13);
    let rows: Vec<DensityRow> = radii
        .iter()
        .map(|&r| DensityRow {
            radius: r,
            theta: 3.0 + 0.5 / r - 2.0 * r.ln() / (r * r),
            error: 0.0,
        })
        .collect();
    let e = extrapolate_infinity(&rows).unwrap();
    assert!((e.value - 3.0).abs() < 1e-9, "{e:?}");
}

#[test]
fn smooth_points_have_unit_density() {
    for (name, p, x) in [
        ("sphere", SurfaceParams::new(), vec![0.0, 0.6, 0.8]),
        (
            "catenoid",
            SurfaceParams::new().with("cutoff", 50.0),
            vec![1.0, 0.0, 0.0],
        ),
        (
            "enneper",
            SurfaceParams::new().with("cutoff", 50.0),
            vec![0.0, 0.0, 0.0],
        ),
    ] {
        let d = density_at_point(&build(name, p), &DVector::from_vec(x), 0.04, &o()).unwrap();
        assert!((d.value - 1.0).abs() < 1e-3 + d.uncertainty, "{name}: {d:?}");
    }
}

#[test]
fn mesh_willmore_converges_to_the_sphere_value() {
    let s = build("sphere", SurfaceParams::new());
    let (mut prev, mut errs) = (f64::INFINITY, Vec::new());
    for n in [16, 32, 64] {
        let m = sample_mesh(s.charts[0].as_ref(), (n, n)).unwrap();
        let (w, _) = mesh_willmore_estimate(&m);
        let e = (w - 16.0 * PI).abs();
        assert!(e < prev);
        prev = e;
        errs.push(e);
    }
    assert!(errs[2] < 0.01 * 16.0 * PI, "{errs:?}");
}

#[test]
fn fixture_mesh_round_trips_through_off() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/torus.off");
    let m = load_mesh(path.as_ref(), None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("copy.off");
    m.write_off(&out).unwrap();
    let back = load_mesh(&out, None).unwrap();
    assert_eq!(
        (back.vertices.len(), back.faces.len()),
        (m.vertices.len(), m.faces.len())
    );
    assert_eq!(back.euler_characteristic(), m.euler_characteristic());
    assert_relative_eq!(back.area(), m.area(), max_relative = 1e-12);
}

#[test]
fn density_rows_require_increasing_radii() {
    let s = build("plane", SurfaceParams::new().with("extent", 10.0));
    assert!(density_rows(&s, &DVector::zeros(3), &[2.0, 1.0], &o()).is_err());
    assert!(density_ratio(&s, &DVector::zeros(3), 0.0, &o()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn density_is_invariant_under_scaling(a in 0.5f64..3.0, r in 1.0f64..20.0) {
        let unit = build("catenoid", SurfaceParams::new().with("cutoff", 100.0));
        let scaled = build("catenoid", SurfaceParams::new().with("a", a).with("cutoff", 100.0 * a));
        let x = DVector::zeros(3);
        let t1 = density_ratio(&unit, &x, r, &o()).unwrap();
        let t2 = density_ratio(&scaled, &x, a * r, &o()).unwrap();
        prop_assert!((t1.value - t2.value).abs() <= 1e-7 + t1.error + t2.error);
    }

    #[test]
    fn monotonicity_closes_on_offset_planes(
        offset in -1.0f64..1.0,
        cx in -2.0f64..2.0,
        cy in -2.0f64..2.0,
        sigma in 0.2f64..1.0,
        ratio in 1.5f64..5.0,
    ) {
        let s = build("plane", SurfaceParams::new().with("extent", 50.0).with("offset", offset));
        let x = DVector::from_vec(vec![cx, cy, 0.0]);
        let l = monotonicity_check(&s, &x, sigma, sigma * ratio, &DEFAULT_DELTAS, &o()).unwrap();
        prop_assert!(l.residual.abs() <= 3.0 * l.error, "{:e} vs {:e}", l.residual, l.error);
        for row in &l.inequality {
            prop_assert!(row.slack >= -row.error);
        }
    }

    #[test]
    fn geometric_radii_are_increasing_with_exact_ends(r0 in 1e-3f64..10.0, k in 1.1f64..1e3, n in 2usize..40) {
        let r = geometric_radii(r0, r0 * k, n);
        prop_assert_eq!(r.len(), n);
        prop_assert_eq!(r[n - 1], r0 * k);
        prop_assert!((r[0] - r0).abs() <= 1e-15 * r0);
        prop_assert!(r.windows(2).all(|w| w[1] > w[0]));
    }
}
