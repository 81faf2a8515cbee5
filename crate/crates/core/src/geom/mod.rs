//! Surface representations and pointwise differential geometry.

pub mod catalog;
pub mod chart;
pub mod local;
pub mod mesh;
pub mod plane2;

pub use catalog::{GraphFn, KnownValues, Registry, Surface, SurfaceFactory, SurfaceParams};
pub use chart::{AnalyticChart, AnalyticMap, Chart, ChartJet, ChartRef, EdgeKind, FdChart, Param, ParamDomain, Side};
pub use local::{first_fundamental_form, mean_curvature_vector, second_fundamental_form_norm2, LocalGeometry};
pub use mesh::{load_mesh, sample_mesh, MeshFormat, TriMesh};
pub use plane2::Plane2;
