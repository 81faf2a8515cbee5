//! Tilt-excess, best-fit planes, Reifenberg flatness and Lipschitz graph
//! decompositions on point samples of surfaces.

pub mod band;
pub mod constants;
pub mod fit;
mod index;
pub mod lipschitz;
pub mod reifenberg;
pub mod sample;
pub mod tilt;

pub use band::{band_lemma_check, BandLemmaCheck};
pub use constants::{constants_table, ConstantsTable, TheoremConstant};
pub use fit::{best_fit_plane, PlaneFit};
pub use lipschitz::{cone_violations, lipschitz_decompose, GraphPoint, LipschitzDecomposition};
pub use reifenberg::{flatness_report, reifenberg_scan, write_flatness_csv, FlatnessReport, DEFAULT_SPACING_RATIO};
pub use sample::{sample_surface, PointSample};
pub use tilt::{
    gradient_identity, gradient_identity_check, integral_gradient_estimate_check, tilt_excess, tilt_excess_quadrature,
    GradientEstimate, TiltExcess,
};
