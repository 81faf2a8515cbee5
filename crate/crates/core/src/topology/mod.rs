//! Ends, genus, total curvature and the finite topology criterion.

pub mod curvature;
pub mod ends;
pub mod genus;
pub mod mesh;
pub mod verdict;

pub use curvature::{
    ilmanen_global_check, ilmanen_local_check, total_curvature, IlmanenGlobal, IlmanenLocal, TotalCurvature,
};
pub use ends::{count_ends, end_decomposition, EndCount, EndDecomposition, EndDensity};
pub use genus::{euler_genus, local_genus, surface_genus, EulerGenus};
pub use mesh::{surface_mesh, SurfaceMesh};
pub use verdict::{finite_topology_verdict, Conclusions, FiniteTopologyReport, Ilmanen, VerdictOptions};
