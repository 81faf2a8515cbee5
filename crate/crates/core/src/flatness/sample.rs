use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Chart, LocalGeometry, Param, Surface, TriMesh};

const G: f64 = 0.288_675_134_594_812_9; // 1 / (2 sqrt 3)
const MAX_DEPTH: usize = 40;

/// Weighted points on a surface, a discrete stand-in for `mu` and its
/// tangent planes.
#[derive(Debug, Clone, Serialize)]
pub struct PointSample {
    pub points: Vec<DVector<f64>>,
    /// Area carried by each point.
    pub weights: Vec<f64>,
    /// Orthonormal tangent frame at each point, when known.
    pub tangents: Option<Vec<[DVector<f64>; 2]>>,
    /// Every point of the sampled piece lies within this distance of a sample point.
    pub spacing: f64,
}

impl PointSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(3, |p| p.len())
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Indices of the points in the closed ball `B_r(c)`, in sample order.
    pub fn in_ball(&self, c: &DVector<f64>, r: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| (&self.points[i] - c).norm() <= r).collect()
    }

    /// Vertices of a mesh weighted by barycentric area; no tangents.
    pub fn from_mesh(mesh: &TriMesh) -> Self {
        let mut weights = vec![0.0; mesh.vertices.len()];
        let mut spacing: f64 = 0.0;
        for (i, f) in mesh.faces.iter().enumerate() {
            let a = mesh.face_area(i) / 3.0;
            for k in 0..3 {
                weights[f[k]] += a;
                spacing = spacing.max((&mesh.vertices[f[k]] - &mesh.vertices[f[(k + 1) % 3]]).norm());
            }
        }
        let keep: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        PointSample {
            points: keep.iter().map(|&i| mesh.vertices[i].clone()).collect(),
            weights: keep.iter().map(|&i| weights[i]).collect(),
            tangents: None,
            spacing,
        }
    }

    /// The subset at `idx`, keeping the spacing.
    pub fn subset(&self, idx: &[usize]) -> Self {
        PointSample {
            points: idx.iter().map(|&i| self.points[i].clone()).collect(),
            weights: idx.iter().map(|&i| self.weights[i]).collect(),
            tangents: self
                .tangents
                .as_ref()
                .map(|t| idx.iter().map(|&i| t[i].clone()).collect()),
            spacing: self.spacing,
        }
    }
}

struct Leaf {
    point: DVector<f64>,
    weight: f64,
    frame: [DVector<f64>; 2],
}

struct Sampler<'a> {
    chart: &'a dyn Chart,
    center: &'a DVector<f64>,
    radius: f64,
    spacing: f64,
}

impl Sampler<'_> {
    fn visit(&self, u: (f64, f64), v: (f64, f64), depth: usize, out: &mut Vec<Leaf>) -> Result<()> {
        let img = |s: f64, t: f64| {
            self.chart
                .position(Param::new(u.0 + s * (u.1 - u.0), v.0 + t * (v.1 - v.0)))
        };
        let xs: Vec<DVector<f64>> = (0..9)
            .map(|k| img(0.5 * (k % 3) as f64, 0.5 * (k / 3) as f64))
            .collect();
        let c = &xs[4];
        let rad = xs.iter().map(|x| (x - c).norm()).fold(0.0, f64::max);
        if !rad.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "chart {} is not finite near ({}, {})",
                self.chart.label(),
                u.0,
                v.0
            )));
        }
        let dist = (c - self.center).norm();
        if dist - 2.0 * rad > self.radius {
            return Ok(());
        }
        if 2.0 * rad < self.spacing || depth >= MAX_DEPTH {
            if dist <= self.radius {
                out.push(self.leaf(u, v)?);
            }
            return Ok(());
        }
        // image extent along each parameter direction, from the three rows and columns
        let ext_u = (0..3).map(|r| (&xs[3 * r + 2] - &xs[3 * r]).norm()).fold(0.0, f64::max);
        let ext_v = (0..3).map(|k| (&xs[6 + k] - &xs[k]).norm()).fold(0.0, f64::max);
        let (um, vm) = (0.5 * (u.0 + u.1), 0.5 * (v.0 + v.1));
        if ext_u > 2.0 * ext_v {
            self.visit((u.0, um), v, depth + 1, out)?;
            self.visit((um, u.1), v, depth + 1, out)
        } else if ext_v > 2.0 * ext_u {
            self.visit(u, (v.0, vm), depth + 1, out)?;
            self.visit(u, (vm, v.1), depth + 1, out)
        } else {
            for (a, b) in [
                ((u.0, um), (v.0, vm)),
                ((um, u.1), (v.0, vm)),
                ((u.0, um), (vm, v.1)),
                ((um, u.1), (vm, v.1)),
            ] {
                self.visit(a, b, depth + 1, out)?;
            }
            Ok(())
        }
    }

    fn leaf(&self, u: (f64, f64), v: (f64, f64)) -> Result<Leaf> {
        let (uc, vc) = (0.5 * (u.0 + u.1), 0.5 * (v.0 + v.1));
        let (du, dv) = (u.1 - u.0, v.1 - v.0);
        let mut weight = 0.0;
        for (a, b) in [(-G, -G), (G, -G), (-G, G), (G, G)] {
            weight +=
                0.25 * du * dv * LocalGeometry::at(self.chart, Param::new(uc + a * du, vc + b * dv))?.area_density;
        }
        let g = LocalGeometry::at(self.chart, Param::new(uc, vc))?;
        Ok(Leaf {
            point: g.position,
            weight,
            frame: [g.e1, g.e2],
        })
    }
}

/// Sample `surface ∩ B_radius(center)` with one point per parameter cell
/// whose image has diameter below `spacing`.
///
/// Weights are the cell areas, tangents come from the chart. The order is
/// fixed by the chart and cell order, independent of thread count.
pub fn sample_surface(surface: &Surface, center: &DVector<f64>, radius: f64, spacing: f64) -> Result<PointSample> {
    if !(radius > 0.0 && spacing > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need positive radius and spacing, got {radius}, {spacing}"
        )));
    }
    let mut leaves = Vec::new();
    for chart in &surface.charts {
        let sampler = Sampler {
            chart: chart.as_ref(),
            center,
            radius,
            spacing,
        };
        let d = chart.domain();
        let (nu, nv) = d.grid;
        let cells: Vec<(usize, usize)> = (0..nv).flat_map(|j| (0..nu).map(move |i| (i, j))).collect();
        let parts: Vec<Result<Vec<Leaf>>> = cells
            .par_iter()
            .map(|&(i, j)| {
                let p0 = d.lerp(i as f64 / nu as f64, j as f64 / nv as f64);
                let p1 = d.lerp((i + 1) as f64 / nu as f64, (j + 1) as f64 / nv as f64);
                let mut out = Vec::new();
                sampler.visit((p0.u, p1.u), (p0.v, p1.v), 0, &mut out)?;
                Ok(out)
            })
            .collect();
        for p in parts {
            leaves.extend(p?);
        }
    }
    let mut sample = PointSample {
        points: Vec::with_capacity(leaves.len()),
        weights: Vec::with_capacity(leaves.len()),
        tangents: Some(Vec::with_capacity(leaves.len())),
        spacing,
    };
    for l in leaves {
        sample.points.push(l.point);
        sample.weights.push(l.weight);
        sample.tangents.as_mut().unwrap().push(l.frame);
    }
    Ok(sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Registry, SurfaceParams};
    use std::f64::consts::PI;

    #[test]
    fn weights_add_up_to_the_disk() {
        let s = Registry::builtin()
            .build("plane", &SurfaceParams::new().with("extent", 50.0))
            .unwrap();
        let x = DVector::zeros(3);
        let smp = sample_surface(&s, &x, 1.0, 0.02).unwrap();
        assert!((smp.total_weight() / PI - 1.0).abs() < 0.01, "{}", smp.total_weight());
        assert!(smp.points.iter().all(|p| p.norm() <= 1.0));
    }

    #[test]
    fn sphere_cap_weights_and_frames() {
        let s = Registry::builtin().build("sphere", &SurfaceParams::new()).unwrap();
        let pole = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let r: f64 = 0.3;
        let smp = sample_surface(&s, &pole, r, 0.005).unwrap();
        // cap of chord radius r on the unit sphere has area pi r^2
        assert!((smp.total_weight() / (PI * r * r) - 1.0).abs() < 0.01);
        for (p, [a, b]) in smp.points.iter().zip(smp.tangents.as_ref().unwrap()) {
            assert!(a.dot(p).abs() < 1e-12 && b.dot(p).abs() < 1e-12 && a.dot(b).abs() < 1e-12);
        }
    }
}
