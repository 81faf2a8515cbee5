use nalgebra::DVector;

use super::quadrature::{integrate, integrate_scalar, QuadOptions, QuadratureResult, Region};
use crate::error::Result;
use crate::geom::{Surface, TriMesh};

/// `int |H|^2 dmu`, optionally restricted to a ball.
pub fn willmore_energy(surface: &Surface, region: Option<&Region>, opts: &QuadOptions) -> Result<QuadratureResult> {
    let everywhere = Region::everywhere();
    integrate_scalar(surface, region.unwrap_or(&everywhere), opts, |g| {
        g.mean_curvature_norm2()
    })
}

/// `int |A|^2` and `int K` over the same region, in one pass.
pub fn curvature_integrals(surface: &Surface, region: &Region, opts: &QuadOptions) -> Result<[QuadratureResult; 3]> {
    let q = integrate(surface, region, opts, |g| {
        [g.second_form_norm2(), g.gauss_curvature(), g.mean_curvature_norm2()]
    })?;
    Ok([q.component(0), q.component(1), q.component(2)])
}

/// Discrete Willmore energy of a mesh from the cotangent Laplacian.
///
/// `H_i = (1/2A_i) sum_j (cot a_ij + cot b_ij)(x_j - x_i)` with barycentric
/// vertex areas; boundary vertices are skipped.
pub fn mesh_willmore(mesh: &TriMesh) -> f64 {
    mesh_willmore_estimate(mesh).0
}

/// `(W, err)`: the barycentric-area energy and its distance from the same
/// Laplacian normalised by mixed Voronoi areas.
pub fn mesh_willmore_estimate(mesh: &TriMesh) -> (f64, f64) {
    let n = mesh.vertices.len();
    let d = mesh.dim();
    let mut lap = vec![DVector::<f64>::zeros(d); n];
    let mut bary = vec![0.0; n];
    let mut mixed = vec![0.0; n];
    for (fi, f) in mesh.faces.iter().enumerate() {
        let a = mesh.face_area(fi);
        let mut cots = [0.0; 3];
        for k in 0..3 {
            let (i, j, o) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
            bary[i] += a / 3.0;
            // cotangent of the angle at o, opposite edge ij
            let (u, v) = (
                &mesh.vertices[i] - &mesh.vertices[o],
                &mesh.vertices[j] - &mesh.vertices[o],
            );
            let cross = (u.norm_squared() * v.norm_squared() - u.dot(&v).powi(2))
                .max(0.0)
                .sqrt();
            if cross == 0.0 {
                continue;
            }
            let w = 0.5 * u.dot(&v) / cross;
            cots[(k + 2) % 3] = 2.0 * w;
            let e = &mesh.vertices[j] - &mesh.vertices[i];
            lap[i] += &e * w;
            lap[j] -= &e * w;
        }
        for k in 0..3 {
            let (i, j, o) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
            mixed[i] += if cots.iter().any(|&c| c < 0.0) {
                if cots[k] < 0.0 {
                    a / 2.0
                } else {
                    a / 4.0
                }
            } else {
                let eij = (&mesh.vertices[j] - &mesh.vertices[i]).norm_squared();
                let eio = (&mesh.vertices[o] - &mesh.vertices[i]).norm_squared();
                (eij * cots[(k + 2) % 3] + eio * cots[(k + 1) % 3]) / 8.0
            };
        }
    }
    let sum = |areas: &[f64]| -> f64 {
        (0..n)
            .filter(|&i| !mesh.boundary[i] && areas[i] > 0.0)
            .map(|i| lap[i].norm_squared() / areas[i])
            .sum()
    };
    let w = sum(&bary);
    (w, (w - sum(&mixed)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{sample_mesh, Registry, SurfaceParams};
    use std::f64::consts::PI;

    #[test]
    fn sphere_energy_is_scale_free() {
        for r in [0.5, 1.0, 4.0] {
            let s = Registry::builtin()
                .build("sphere", &SurfaceParams::new().with("R", r))
                .unwrap();
            let w = willmore_energy(&s, None, &QuadOptions::default()).unwrap();
            assert!((w.value / (16.0 * PI) - 1.0).abs() < 1e-3, "{w:?}");
        }
    }

    #[test]
    fn saddle_graph_matches_fixed_grid() {
        let s = Registry::builtin().build("graph", &SurfaceParams::new()).unwrap();
        let w = willmore_energy(&s, None, &QuadOptions::default()).unwrap();
        // midpoint rule in polar coordinates on the graph of 0.1 (x^2 - y^2)
        let c = 0.1;
        let (nr, nt) = (400, 400);
        let mut oracle = 0.0;
        for i in 0..nr {
            let r = (i as f64 + 0.5) / nr as f64;
            for j in 0..nt {
                let t = 2.0 * PI * (j as f64 + 0.5) / nt as f64;
                let (x, y) = (r * t.cos(), r * t.sin());
                let (px, py) = (2.0 * c * x, -2.0 * c * y);
                let (pxx, pyy) = (2.0 * c, -2.0 * c);
                let q = 1.0 + px * px + py * py;
                // scalar mean curvature (trace) of a graph with phi_xy = 0
                let h = ((1.0 + py * py) * pxx + (1.0 + px * px) * pyy) / q.powf(1.5);
                oracle += h * h * q.sqrt() * r / (nr * nt) as f64 * 2.0 * PI;
            }
        }
        assert!(w.value > 0.0);
        assert!((w.value / oracle - 1.0).abs() < 5e-3, "{} vs {oracle}", w.value);
    }

    #[test]
    fn minimal_surfaces_have_no_energy() {
        let s = Registry::builtin()
            .build("catenoid", &SurfaceParams::new().with("cutoff", 50.0))
            .unwrap();
        let w = willmore_energy(&s, None, &QuadOptions::default().truncating()).unwrap();
        assert!(w.value.abs() < 1e-9);
    }

    #[test]
    fn mesh_sphere_willmore() {
        let s = Registry::builtin().build("sphere", &SurfaceParams::new()).unwrap();
        let m = sample_mesh(s.charts[0].as_ref(), (64, 128)).unwrap();
        let w = mesh_willmore(&m);
        assert!((w / (16.0 * PI) - 1.0).abs() < 0.02, "{w}");
        let (_, err) = mesh_willmore_estimate(&m);
        assert!(err < 0.02 * w, "{err}");
    }
}
