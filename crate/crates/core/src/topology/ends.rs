use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::mesh::SurfaceMesh;
use crate::error::{Error, Result};
use crate::geom::chart::Param;
use crate::geom::mesh::UnionFind;
use crate::geom::Surface;
use crate::measure::quadrature::{integrate_triangles, QuadOptions, Region};

/// Inner and outer radius of the per-end annulus, as multiples of the last
/// radius of the schedule.
pub const END_ANNULUS: (f64, f64) = (1.5, 3.0);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndCount {
    pub radius: f64,
    /// Connected components of the mesh outside the ball.
    pub components: usize,
    /// Those reaching the truncation.
    pub noncompact: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndDensity {
    pub index: usize,
    pub faces: usize,
    pub r_inner: f64,
    pub r_outer: f64,
    /// `mu(end ∩ annulus) / (pi (r_outer^2 - r_inner^2))`.
    pub theta: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndDecomposition {
    pub radius_schedule: Vec<f64>,
    pub counts: Vec<EndCount>,
    pub ends: usize,
    pub per_end: Vec<EndDensity>,
}

/// Face labels of the components outside `B_r(center)`, keyed by a face's
/// centroid, with `noncompact[label]` set when a component touches the
/// truncation.
fn components_outside(sm: &SurfaceMesh, center: &DVector<f64>, r: f64) -> (Vec<Option<usize>>, Vec<bool>) {
    let m = &sm.mesh;
    let keep: Vec<bool> = (0..m.faces.len())
        .map(|i| (m.face_centroid(i) - center).norm() > r)
        .collect();
    let mut used = vec![false; m.vertices.len()];
    let mut uf = UnionFind::new(m.vertices.len());
    for (f, _) in m.faces.iter().zip(&keep).filter(|(_, &k)| k) {
        uf.union(f[0], f[1]);
        uf.union(f[1], f[2]);
        for &v in f {
            used[v] = true;
        }
    }
    for &(a, b) in &sm.links {
        if used[a] && used[b] {
            uf.union(a, b);
        }
    }
    let labels = crate::geom::mesh::label_faces(m, &keep, &mut uf);
    let n = labels.iter().flatten().max().map_or(0, |&k| k + 1);
    let mut noncompact = vec![false; n];
    for (f, l) in m.faces.iter().zip(&labels) {
        if let Some(l) = l {
            if f.iter().any(|&v| m.cutoff[v]) {
                noncompact[*l] = true;
            }
        }
    }
    (labels, noncompact)
}

/// Count noncompact components outside each ball `B_r(center)`.
///
/// Components are built from faces whose centroid lies outside the ball,
/// joined through shared vertices and glued-edge links; a component is an
/// end when it reaches the truncation. `e` is the count shared by the last
/// three radii. Per-end densities come from mesh face areas over the annulus
/// `[1.5 r, 3 r]` at the last radius `r`.
pub fn count_ends(sm: &SurfaceMesh, center: &DVector<f64>, radii: &[f64]) -> Result<EndDecomposition> {
    if radii.len() < 3 {
        return Err(Error::InvalidParameter(
            "need at least 3 radii to judge stability".into(),
        ));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidParameter("radii must be positive".into()));
    }
    let counts: Vec<EndCount> = radii
        .par_iter()
        .map(|&r| {
            let (_, noncompact) = components_outside(sm, center, r);
            EndCount {
                radius: r,
                components: noncompact.len(),
                noncompact: noncompact.iter().filter(|&&n| n).count(),
            }
        })
        .collect();
    let tail: Vec<usize> = counts[counts.len() - 3..].iter().map(|c| c.noncompact).collect();
    if tail.iter().any(|&c| c != tail[0]) {
        return Err(Error::Unstable {
            counts: counts.iter().map(|c| c.noncompact).collect(),
        });
    }

    let r = *radii.last().unwrap();
    let (r0, r1) = (END_ANNULUS.0 * r, END_ANNULUS.1 * r);
    let m = &sm.mesh;
    let per_end = end_faces(sm, center, r)
        .into_iter()
        .enumerate()
        .map(|(index, faces)| {
            let (mut mu, mut straddle) = (0.0, 0.0);
            for &i in &faces {
                let d = (m.face_centroid(i) - center).norm();
                if d >= r0 && d < r1 {
                    mu += m.face_area(i);
                }
                let ds = m.faces[i].map(|v| (&m.vertices[v] - center).norm());
                let (lo, hi) = (
                    ds.iter().copied().fold(f64::INFINITY, f64::min),
                    ds.iter().copied().fold(0.0, f64::max),
                );
                if (lo < r0 && hi >= r0) || (lo < r1 && hi >= r1) {
                    straddle += m.face_area(i);
                }
            }
            let norm = PI * (r1 * r1 - r0 * r0);
            EndDensity {
                index,
                faces: faces.len(),
                r_inner: r0,
                r_outer: r1,
                theta: mu / norm,
                // centroid selection can only misplace faces crossing a circle
                error: straddle / norm,
            }
        })
        .collect();
    Ok(EndDecomposition {
        radius_schedule: radii.to_vec(),
        ends: tail[0],
        counts,
        per_end,
    })
}

/// Faces of each noncompact component outside `B_r`, components ordered by
/// their first face.
fn end_faces(sm: &SurfaceMesh, center: &DVector<f64>, r: f64) -> Vec<Vec<usize>> {
    let (labels, noncompact) = components_outside(sm, center, r);
    let mut ends: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        if let Some(l) = l {
            if noncompact[*l] {
                ends.entry(*l).or_default().push(i);
            }
        }
    }
    ends.into_values().collect()
}

/// End count with per-end densities integrated exactly on the surface over
/// the parameter triangles of each end.
pub fn end_decomposition(
    surface: &Surface,
    sm: &SurfaceMesh,
    center: &DVector<f64>,
    radii: &[f64],
    opts: &QuadOptions,
) -> Result<EndDecomposition> {
    if let Some(rc) = surface.cutoff {
        let r_max = radii.iter().copied().fold(0.0, f64::max);
        if rc < 4.0 * r_max * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "cutoff {rc} must be at least 4x the largest radius {r_max}"
            )));
        }
    }
    let mut dec = count_ends(sm, center, radii)?;
    let origins = sm
        .mesh
        .origins
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("mesh was not sampled from this surface".into()))?;
    let r = *radii.last().unwrap();
    let region = Region::annulus(center, END_ANNULUS.0 * r, END_ANNULUS.1 * r);
    for (d, faces) in dec.per_end.iter_mut().zip(end_faces(sm, center, r)) {
        let mut by_chart: BTreeMap<usize, Vec<[Param; 3]>> = BTreeMap::new();
        for i in faces {
            by_chart.entry(origins[i].chart).or_default().push(origins[i].params);
        }
        let (mut mu, mut err) = (0.0, 0.0);
        for (c, tris) in by_chart {
            let q = integrate_triangles(surface.charts[c].as_ref(), &tris, &region, opts, |_| [1.0])?;
            mu += q.value[0];
            err += q.error[0];
        }
        let norm = PI * (d.r_outer.powi(2) - d.r_inner.powi(2));
        d.theta = mu / norm;
        d.error = err / norm;
    }
    Ok(dec)
}
