//! Integration over surface pieces, densities, and monotonicity bookkeeping.

pub mod density;
pub mod monotonicity;
pub mod quadrature;
pub mod willmore;

pub use density::{
    density_at_infinity, density_at_point, density_ratio, density_rows, geometric_radii, DensityProfile, DensityRow,
    Extrapolation, SmallRadiusDensity,
};
pub use monotonicity::{
    monotonicity_check, radial_deviation_energy, MonotonicityLedger, RadialDeviation, DEFAULT_DELTAS,
};
pub use quadrature::{
    area, integrate, integrate_scalar, Constraint, QuadOptions, QuadratureResult, Region, VecQuadrature,
};
pub use willmore::{curvature_integrals, mesh_willmore, mesh_willmore_estimate, willmore_energy};
