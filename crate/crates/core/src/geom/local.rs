use nalgebra::{DMatrix, DVector, Matrix2};

use super::chart::{Chart, ChartJet, Param};
use crate::error::{Error, Result};

/// Relative threshold on `det g / (g11 g22)` below which a point is degenerate.
pub const DET_REL_TOL: f64 = 1e-14;

/// Everything a pointwise integrand may need at one parameter point.
///
/// The second fundamental form is stored in the orthonormal frame `(e1, e2)`
/// obtained by Gram-Schmidt from `(f_u, f_v)`. Mean curvature is the full
/// trace `H = A(e1,e1) + A(e2,e2)`, so a round sphere of radius `R` has
/// `|H| = 2/R`.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    pub param: Param,
    pub position: DVector<f64>,
    pub e1: DVector<f64>,
    pub e2: DVector<f64>,
    pub metric: Matrix2<f64>,
    /// `sqrt(det g)`, the density of `dmu` against `du dv`.
    pub area_density: f64,
    pub a11: DVector<f64>,
    pub a12: DVector<f64>,
    pub a22: DVector<f64>,
    pub mean_curvature: DVector<f64>,
}

impl LocalGeometry {
    pub fn at(chart: &dyn Chart, p: Param) -> Result<Self> {
        Self::from_jet(p, &chart.jet(p))
    }

    pub fn from_jet(p: Param, j: &ChartJet) -> Result<Self> {
        let g11 = j.fu.dot(&j.fu);
        let g12 = j.fu.dot(&j.fv);
        let g22 = j.fv.dot(&j.fv);
        let det = g11 * g22 - g12 * g12;
        if !(det > DET_REL_TOL * g11 * g22) || !det.is_finite() {
            return Err(Error::DegenerateImmersion { u: p.u, v: p.v, det });
        }
        let a = g11.sqrt();
        let c = g12 / g11;
        let w = &j.fv - &j.fu * c;
        let b = w.norm();
        let e1 = &j.fu / a;
        let e2 = w / b;

        let normal = |x: &DVector<f64>| -> DVector<f64> { x - &e1 * e1.dot(x) - &e2 * e2.dot(x) };
        let buu = normal(&j.fuu);
        let buv = normal(&j.fuv);
        let bvv = normal(&j.fvv);

        let a11 = &buu / (a * a);
        let a12 = (&buv - &buu * c) / (a * b);
        let a22 = (&bvv - &buv * (2.0 * c) + &buu * (c * c)) / (b * b);
        let mean_curvature = &a11 + &a22;

        Ok(LocalGeometry {
            param: p,
            position: j.f.clone(),
            e1,
            e2,
            metric: Matrix2::new(g11, g12, g12, g22),
            area_density: a * b,
            a11,
            a12,
            a22,
            mean_curvature,
        })
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    /// `|A|^2 = sum_ab |A(e_a, e_b)|^2`.
    pub fn second_form_norm2(&self) -> f64 {
        self.a11.norm_squared() + 2.0 * self.a12.norm_squared() + self.a22.norm_squared()
    }

    pub fn mean_curvature_norm2(&self) -> f64 {
        self.mean_curvature.norm_squared()
    }

    /// Gauss curvature from the Gauss equation.
    pub fn gauss_curvature(&self) -> f64 {
        self.a11.dot(&self.a22) - self.a12.norm_squared()
    }

    /// Orthogonal projection onto the tangent plane, as an ambient matrix.
    pub fn tangent_projector(&self) -> DMatrix<f64> {
        &self.e1 * self.e1.transpose() + &self.e2 * self.e2.transpose()
    }

    pub fn normal_part(&self, x: &DVector<f64>) -> DVector<f64> {
        x - &self.e1 * self.e1.dot(x) - &self.e2 * self.e2.dot(x)
    }

    /// Normal part of the radial vector `position - center`.
    pub fn radial_normal(&self, center: &DVector<f64>) -> DVector<f64> {
        self.normal_part(&(&self.position - center))
    }

    /// `grad^perp r / r = (x - c)^perp / |x - c|^2`.
    pub fn radial_deviation(&self, center: &DVector<f64>) -> DVector<f64> {
        let d = &self.position - center;
        let r2 = d.norm_squared();
        self.normal_part(&d) / r2
    }
}

/// `g_ij = <f_i, f_j>` at an interior parameter point.
pub fn first_fundamental_form(chart: &dyn Chart, p: Param) -> Result<Matrix2<f64>> {
    Ok(LocalGeometry::at(chart, p)?.metric)
}

pub fn mean_curvature_vector(chart: &dyn Chart, p: Param) -> Result<DVector<f64>> {
    Ok(LocalGeometry::at(chart, p)?.mean_curvature)
}

pub fn second_fundamental_form_norm2(chart: &dyn Chart, p: Param) -> Result<f64> {
    Ok(LocalGeometry::at(chart, p)?.second_form_norm2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::chart::{EdgeKind, FdChart, ParamDomain};

    fn flat() -> FdChart {
        let d = ParamDomain::new((0.0, 1.0), (0.0, 1.0), [EdgeKind::Boundary; 4]);
        FdChart::new("flat", 3, d, |u, v| DVector::from_vec(vec![u, v, 0.0]))
    }

    #[test]
    fn flat_chart_has_identity_metric() {
        let g = first_fundamental_form(&flat(), Param::new(0.3, 0.6)).unwrap();
        assert!((g - Matrix2::identity()).norm() < 1e-9);
        assert!(mean_curvature_vector(&flat(), Param::new(0.3, 0.6)).unwrap().norm() < 1e-4);
    }

    #[test]
    fn collapsed_point_is_degenerate() {
        let d = ParamDomain::new((0.0, 1.0), (0.0, 1.0), [EdgeKind::Boundary; 4]);
        let c = FdChart::new("cone", 3, d, |u, v| DVector::from_vec(vec![u * v, u * v, 0.0]));
        assert!(matches!(
            LocalGeometry::at(&c, Param::new(0.5, 0.5)),
            Err(Error::DegenerateImmersion { .. })
        ));
    }
}
