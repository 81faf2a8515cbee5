use std::collections::HashMap;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geom::chart::{EdgeKind, Param, ParamDomain};
use crate::geom::mesh::sample_mesh_tagged;
use crate::geom::{Surface, TriMesh};

/// All charts of a surface meshed side by side. Charts keep their own
/// vertices; `links` pairs vertices of different charts that sit on a shared
/// glued edge, so connectivity queries can cross chart boundaries.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub mesh: TriMesh,
    pub links: Vec<(usize, usize)>,
}

impl SurfaceMesh {
    /// Wrap a loaded mesh. Without truncation marks its boundary is taken as
    /// the truncation.
    pub fn from_mesh(mut mesh: TriMesh) -> Self {
        if !mesh.cutoff.iter().any(|&c| c) {
            mesh.cutoff = mesh.boundary.clone();
        }
        SurfaceMesh {
            mesh,
            links: Vec::new(),
        }
    }
}

fn on_glued_side(dom: &ParamDomain, p: Param) -> bool {
    let tu = 1e-12 * (dom.u.1 - dom.u.0).abs();
    let tv = 1e-12 * (dom.v.1 - dom.v.0).abs();
    let hits = [
        (p.u - dom.u.0).abs() <= tu,
        (p.u - dom.u.1).abs() <= tu,
        (p.v - dom.v.0).abs() <= tv,
        (p.v - dom.v.1).abs() <= tv,
    ];
    hits.iter().zip(dom.edges).any(|(&h, e)| h && e == EdgeKind::Glued)
}

/// Mesh every chart at `refine` times its domain grid and link glued edges.
pub fn surface_mesh(surface: &Surface, refine: usize) -> Result<SurfaceMesh> {
    if refine == 0 {
        return Err(Error::InvalidParameter("mesh refinement must be at least 1".into()));
    }
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut origins = Vec::new();
    let mut cutoff = Vec::new();
    let mut chart_of = Vec::new();
    for (ci, chart) in surface.charts.iter().enumerate() {
        let (gu, gv) = chart.domain().grid;
        let m = sample_mesh_tagged(chart.as_ref(), (gu * refine + 1, gv * refine + 1), ci)?;
        let off = vertices.len();
        chart_of.extend(std::iter::repeat_n(ci, m.vertices.len()));
        vertices.extend(m.vertices);
        cutoff.extend(m.cutoff);
        faces.extend(m.faces.iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
        origins.extend(m.origins.unwrap_or_default());
    }

    let mut glued = vec![false; vertices.len()];
    for (f, o) in faces.iter().zip(&origins) {
        let dom = surface.charts[o.chart].domain();
        for k in 0..3 {
            if on_glued_side(dom, o.params[k]) {
                glued[f[k]] = true;
            }
        }
    }
    let mut tol: f64 = 0.0;
    for f in &faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            if glued[a] && glued[b] {
                tol = tol.max((&vertices[a] - &vertices[b]).norm());
            }
        }
    }
    let links = if tol > 0.0 {
        link_glued(&vertices, &glued, &chart_of, tol)
    } else {
        Vec::new()
    };

    let mut mesh = TriMesh::new(vertices, faces)?;
    mesh.cutoff = cutoff;
    mesh.origins = Some(origins);
    Ok(SurfaceMesh { mesh, links })
}

/// Pairs of glued vertices on different charts closer than `tol`, by a hash
/// grid on the first three coordinates.
fn link_glued(vertices: &[DVector<f64>], glued: &[bool], chart_of: &[usize], tol: f64) -> Vec<(usize, usize)> {
    let key = |x: &DVector<f64>| -> [i64; 3] {
        let mut k = [0i64; 3];
        for (i, c) in x.iter().take(3).enumerate() {
            k[i] = (c / tol).floor() as i64;
        }
        k
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, x) in vertices.iter().enumerate() {
        if glued[i] {
            grid.entry(key(x)).or_default().push(i);
        }
    }
    let mut links = Vec::new();
    for (i, x) in vertices.iter().enumerate() {
        if !glued[i] {
            continue;
        }
        let k = key(x);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(cell) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) else {
                        continue;
                    };
                    for &j in cell {
                        if j > i && chart_of[j] != chart_of[i] && (&vertices[j] - x).norm() <= tol {
                            links.push((i, j));
                        }
                    }
                }
            }
        }
    }
    links.sort_unstable();
    links
}

/// Faces of `mesh` selected by `keep`, with unused vertices dropped.
pub(crate) fn submesh(mesh: &TriMesh, keep: &[bool]) -> Result<TriMesh> {
    let mut map = vec![usize::MAX; mesh.vertices.len()];
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (f, _) in mesh.faces.iter().zip(keep).filter(|(_, &k)| k) {
        let mut g = [0; 3];
        for k in 0..3 {
            if map[f[k]] == usize::MAX {
                map[f[k]] = vertices.len();
                vertices.push(mesh.vertices[f[k]].clone());
            }
            g[k] = map[f[k]];
        }
        faces.push(g);
    }
    if faces.is_empty() {
        return Err(Error::InvalidParameter("no faces selected".into()));
    }
    TriMesh::new(vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Registry, SurfaceParams};

    #[test]
    fn scherk_wings_link_to_the_column() {
        let s = Registry::builtin()
            .build("scherk", &SurfaceParams::new().with("cutoff", 8.0))
            .unwrap();
        let sm = surface_mesh(&s, 2).unwrap();
        assert!(!sm.links.is_empty());
        let mut uf = crate::geom::mesh::UnionFind::new(sm.mesh.vertices.len());
        for f in &sm.mesh.faces {
            uf.union(f[0], f[1]);
            uf.union(f[1], f[2]);
        }
        for &(a, b) in &sm.links {
            uf.union(a, b);
        }
        let root = uf.find(0);
        assert!((0..sm.mesh.vertices.len()).all(|v| uf.find(v) == root));
    }

    #[test]
    fn single_chart_has_no_links() {
        let s = Registry::builtin()
            .build("catenoid", &SurfaceParams::new().with("cutoff", 50.0))
            .unwrap();
        let sm = surface_mesh(&s, 2).unwrap();
        assert!(sm.links.is_empty());
        assert_eq!(sm.mesh.euler_characteristic(), 0);
    }
}
