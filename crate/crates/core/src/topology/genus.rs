use nalgebra::DVector;
use serde::Serialize;

use super::mesh::{submesh, surface_mesh};
use crate::error::{Error, Result};
use crate::geom::{Surface, TriMesh};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EulerGenus {
    /// `V - E + F` of the mesh as given.
    pub euler_characteristic: i64,
    pub boundary_loops: usize,
    pub components: usize,
    /// After filling each boundary loop with a fan (`chi + loops`).
    pub capped_euler_characteristic: Option<i64>,
    /// Total genus over components; present for closed or capped meshes.
    pub genus: Option<usize>,
}

/// Euler characteristic and genus. Capping a loop with a fan to a new
/// centroid vertex adds one vertex, `n` edges and `n` faces, so it raises
/// `chi` by one; the genus is then `(2c - chi) / 2` over `c` components.
pub fn euler_genus(mesh: &TriMesh, cap_boundaries: bool) -> Result<EulerGenus> {
    let chi = mesh.euler_characteristic();
    let loops = mesh.boundary_loops()?.len();
    let labels = mesh.face_components(&vec![true; mesh.faces.len()]);
    let components = labels.iter().flatten().max().map_or(0, |&k| k + 1);
    let capped = (cap_boundaries || loops == 0).then_some(chi + loops as i64);
    let genus = match capped {
        Some(c) => {
            let twice = 2 * components as i64 - c;
            if twice < 0 || twice % 2 != 0 {
                return Err(Error::NonManifold(format!(
                    "capped Euler characteristic {c} over {components} components is not that of an orientable closed surface"
                )));
            }
            Some((twice / 2) as usize)
        }
        None => None,
    };
    Ok(EulerGenus {
        euler_characteristic: chi,
        boundary_loops: loops,
        components,
        capped_euler_characteristic: capped,
        genus,
    })
}

/// Genus of `surface ∩ B_s(center)` after capping.
///
/// A genus-zero surface has only genus-zero pieces, so the catalog value is
/// used when it is zero; otherwise single-chart surfaces are meshed and the
/// faces with centroid inside the ball are capped.
pub fn local_genus(surface: &Surface, center: &DVector<f64>, s: f64, refine: usize) -> Result<usize> {
    if surface.known.genus == Some(0) {
        return Ok(0);
    }
    if surface.charts.len() != 1 {
        return Err(Error::InvalidParameter(format!(
            "local genus of the multi-chart surface '{}' is not computable from its mesh",
            surface.name
        )));
    }
    let sm = surface_mesh(surface, refine)?;
    let m = &sm.mesh;
    let keep: Vec<bool> = (0..m.faces.len())
        .map(|i| (m.face_centroid(i) - center).norm() < s)
        .collect();
    if !keep.iter().any(|&k| k) {
        return Ok(0);
    }
    euler_genus(&submesh(m, &keep)?, true)?
        .genus
        .ok_or_else(|| Error::NonManifold("capped genus unavailable".into()))
}

/// Genus of the whole surface from its capped mesh, or the catalog value
/// for multi-chart surfaces.
pub fn surface_genus(surface: &Surface, refine: usize) -> Result<Option<usize>> {
    if surface.charts.len() != 1 {
        return Ok(surface.known.genus);
    }
    let sm = surface_mesh(surface, refine)?;
    Ok(euler_genus(&sm.mesh, true)?.genus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::mesh::{parse_off, sample_mesh};
    use crate::geom::{Registry, SurfaceParams};

    fn build(name: &str, p: SurfaceParams) -> Surface {
        Registry::builtin().build(name, &p).unwrap()
    }

    /// Octahedron: `6 - 12 + 8 = 2`.
    const OCTAHEDRON: &str = "OFF\n6 8 0\n1 0 0\n-1 0 0\n0 1 0\n0 -1 0\n0 0 1\n0 0 -1\n\
        3 0 2 4\n3 2 1 4\n3 1 3 4\n3 3 0 4\n3 2 0 5\n3 1 2 5\n3 3 1 5\n3 0 3 5\n";

    #[test]
    fn octahedron_is_a_sphere() {
        let g = euler_genus(&parse_off(OCTAHEDRON).unwrap(), false).unwrap();
        assert_eq!((g.euler_characteristic, g.genus, g.boundary_loops), (2, Some(0), 0));
    }

    #[test]
    fn capped_catenoid_annulus_is_a_sphere() {
        let s = build("catenoid", SurfaceParams::new().with("cutoff", 30.0));
        let m = sample_mesh(s.charts[0].as_ref(), (33, 41)).unwrap();
        let g = euler_genus(&m, true).unwrap();
        assert_eq!(g.euler_characteristic, 0);
        assert_eq!(g.boundary_loops, 2);
        assert_eq!((g.capped_euler_characteristic, g.genus), (Some(2), Some(0)));
        assert_eq!(euler_genus(&m, false).unwrap().genus, None);
    }

    #[test]
    fn torus_has_genus_one() {
        let s = build("torus", SurfaceParams::new());
        assert_eq!(surface_genus(&s, 2).unwrap(), Some(1));
        assert_eq!(local_genus(&s, &DVector::zeros(4), 10.0, 2).unwrap(), 1);
        // a ball missing the torus holds nothing
        assert_eq!(local_genus(&s, &DVector::zeros(4), 0.5, 2).unwrap(), 0);
    }

    #[test]
    fn disk_and_sphere_are_genus_zero() {
        let s = build("sphere", SurfaceParams::new());
        assert_eq!(surface_genus(&s, 2).unwrap(), Some(0));
        let s = build("scherk", SurfaceParams::new().with("cutoff", 8.0));
        assert_eq!(surface_genus(&s, 1).unwrap(), None);
        assert!(local_genus(&s, &DVector::zeros(3), 5.0, 1).is_err());
    }
}
