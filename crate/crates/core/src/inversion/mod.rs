//! Sphere inversion `x -> (x - x0)/|x - x0|^2 + x0` of immersions and the
//! identities it satisfies.

pub mod checks;

use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Chart, ChartJet, ChartRef, EdgeKind, LocalGeometry, Param, ParamDomain, Side, Surface};
use crate::jet::Jet2;

pub use checks::{
    antisymmetry_check, density_formula_check, density_identity_check, fit_sphere, inverted_points,
    punctured_density_identity_check, sample_params, AntisymmetryLedger, AntisymmetryRow, DensityFormulaReport,
    DensityIdentityReport, PuncturedReport, SphereFit,
};

/// Below this distance from `x0` a sample counts as lying on the base point.
pub const ON_SURFACE_TOL: f64 = 1e-9;

/// A chart side declared to map to the base point, and the fraction of the
/// parameter range trimmed off next to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Puncture {
    pub side: Side,
    pub eps: f64,
}

impl Puncture {
    pub fn new(side: Side, eps: f64) -> Self {
        Puncture { side, eps }
    }
}

/// `h = (f - x0) / |f - x0|^2 + x0` with derivatives by jet arithmetic.
#[derive(Debug, Clone)]
pub struct InvertedChart {
    label: String,
    source: ChartRef,
    base: DVector<f64>,
    domain: ParamDomain,
}

impl InvertedChart {
    pub fn source(&self) -> &ChartRef {
        &self.source
    }

    pub fn base_point(&self) -> &DVector<f64> {
        &self.base
    }
}

fn invert_point(f: &DVector<f64>, x0: &DVector<f64>) -> DVector<f64> {
    let d = f - x0;
    &d / d.norm_squared() + x0
}

impl Chart for InvertedChart {
    fn label(&self) -> &str {
        &self.label
    }
    fn ambient_dim(&self) -> usize {
        self.source.ambient_dim()
    }
    fn domain(&self) -> &ParamDomain {
        &self.domain
    }
    fn derivative_order(&self) -> u8 {
        self.source.derivative_order()
    }
    fn fd_step(&self) -> Option<f64> {
        self.source.fd_step()
    }
    fn position(&self, p: Param) -> DVector<f64> {
        invert_point(&self.source.position(p), &self.base)
    }
    fn jet(&self, p: Param) -> ChartJet {
        let c = self.source.jet(p).components();
        let d: Vec<Jet2> = c.iter().zip(self.base.iter()).map(|(&x, &b)| x - b).collect();
        let s = d.iter().fold(Jet2::constant(0.0), |acc, &x| acc + x * x);
        let h: Vec<Jet2> = d.iter().zip(self.base.iter()).map(|(&x, &b)| x / s + b).collect();
        ChartJet::from_components(&h)
    }
}

/// Closest sampled distance from `x0` to the chart image, polished by
/// Gauss-Newton from the best grid points.
pub fn distance_to_chart(chart: &dyn Chart, x0: &DVector<f64>) -> (f64, Param) {
    let dom = chart.domain();
    let n = 48;
    let mut cands: Vec<(f64, Param)> = Vec::with_capacity((n + 1) * (n + 1));
    for i in 0..=n {
        for j in 0..=n {
            let p = dom.lerp(i as f64 / n as f64, j as f64 / n as f64);
            cands.push(((chart.position(p) - x0).norm(), p));
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = cands[0];
    for &(_, p0) in cands.iter().take(4) {
        let mut p = p0;
        for _ in 0..40 {
            let j = chart.jet(p);
            let r = &j.f - x0;
            let (a, b, c) = (j.fu.dot(&j.fu), j.fu.dot(&j.fv), j.fv.dot(&j.fv));
            let (gu, gv) = (j.fu.dot(&r), j.fv.dot(&r));
            let det = a * c - b * b;
            if !(det > 0.0) {
                break;
            }
            let du = -(c * gu - b * gv) / det;
            let dv = -(a * gv - b * gu) / det;
            let q = Param::new((p.u + du).clamp(dom.u.0, dom.u.1), (p.v + dv).clamp(dom.v.0, dom.v.1));
            if (q.u - p.u).abs() + (q.v - p.v).abs() < 1e-15 * (1.0 + dom.diameter()) {
                break;
            }
            p = q;
        }
        let d = (chart.position(p) - x0).norm();
        if d < best.0 {
            best = (d, p);
        }
    }
    best
}

/// Invert `chart` in the unit sphere about `x0`.
///
/// With a declared puncture, a strip of relative width `eps` next to that side
/// is trimmed so the image stays bounded, and the side becomes a cutoff edge.
pub fn invert(chart: ChartRef, x0: &DVector<f64>, puncture: Option<Puncture>) -> Result<InvertedChart> {
    if x0.len() != chart.ambient_dim() {
        return Err(Error::InvalidParameter(format!(
            "base point has dimension {}, surface lives in R^{}",
            x0.len(),
            chart.ambient_dim()
        )));
    }
    let mut domain = chart.domain().clone();
    if let Some(pc) = puncture {
        if !(pc.eps > 0.0 && pc.eps < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "puncture eps must lie in (0, 0.5), got {}",
                pc.eps
            )));
        }
        let (du, dv) = (domain.u.1 - domain.u.0, domain.v.1 - domain.v.0);
        match pc.side {
            Side::UMin => domain.u.0 += pc.eps * du,
            Side::UMax => domain.u.1 -= pc.eps * du,
            Side::VMin => domain.v.0 += pc.eps * dv,
            Side::VMax => domain.v.1 -= pc.eps * dv,
        }
        domain.edges[pc.side as usize] = EdgeKind::Cutoff;
    }
    let trimmed: ChartRef = Arc::new(Trimmed {
        inner: chart.clone(),
        domain: domain.clone(),
    });
    let (d, _) = distance_to_chart(trimmed.as_ref(), x0);
    if d < ON_SURFACE_TOL {
        return Err(Error::BasePointOnSurface { distance: d });
    }
    Ok(InvertedChart {
        label: format!("inverted {}", chart.label()),
        source: chart,
        base: x0.clone(),
        domain,
    })
}

/// Same map on a smaller domain.
#[derive(Debug)]
struct Trimmed {
    inner: ChartRef,
    domain: ParamDomain,
}

impl Chart for Trimmed {
    fn label(&self) -> &str {
        self.inner.label()
    }
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }
    fn domain(&self) -> &ParamDomain {
        &self.domain
    }
    fn derivative_order(&self) -> u8 {
        self.inner.derivative_order()
    }
    fn position(&self, p: Param) -> DVector<f64> {
        self.inner.position(p)
    }
    fn jet(&self, p: Param) -> ChartJet {
        self.inner.jet(p)
    }
}

/// Invert every chart of `surface` about `x0`.
pub fn invert_surface(surface: &Surface, x0: &DVector<f64>, puncture: Option<Puncture>) -> Result<Surface> {
    let charts = surface
        .charts
        .iter()
        .map(|c| invert(c.clone(), x0, puncture).map(|ic| Arc::new(ic) as ChartRef))
        .collect::<Result<Vec<_>>>()?;
    let mut s = Surface::new(format!("inverted-{}", surface.name), charts);
    s.params = surface.params.clone();
    Ok(s)
}

/// Mean curvature of the inverted immersion from the source geometry:
/// `|f|^2 H - 2<H,f> f + 4 f^perp - 8 (|f^perp|^2/|f|^2) f` with `f` recentred at `x0`.
pub fn pushforward_mean_curvature(g: &LocalGeometry, x0: &DVector<f64>) -> DVector<f64> {
    let f = &g.position - x0;
    let f2 = f.norm_squared();
    let h = &g.mean_curvature;
    let fp = g.normal_part(&f);
    h * f2 - &f * (2.0 * h.dot(&f)) + &fp * 4.0 - &f * (8.0 * fp.norm_squared() / f2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Registry, SurfaceParams};

    fn surface(name: &str, p: SurfaceParams) -> Surface {
        Registry::builtin().build(name, &p).unwrap()
    }

    fn zero() -> DVector<f64> {
        DVector::zeros(3)
    }

    #[test]
    fn inverted_plane_is_sphere_through_base() {
        let s = surface("plane", SurfaceParams::new().with("offset", 1.0).with("extent", 100.0));
        let ic = invert(s.charts[0].clone(), &zero(), None).unwrap();
        let c = DVector::from_vec(vec![0.0, 0.0, 0.5]);
        for p in sample_params(ic.domain(), 50, 3) {
            assert!(((ic.position(p) - &c).norm() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_mean_curvature_matches_jets() {
        let s = surface("catenoid", SurfaceParams::new().with("cutoff", 50.0));
        for x0 in [zero(), DVector::from_vec(vec![0.2, -0.1, 3.0])] {
            let ic = invert(s.charts[0].clone(), &x0, None).unwrap();
            for p in sample_params(ic.domain(), 50, 7) {
                let direct = LocalGeometry::at(&ic, p).unwrap();
                let src = LocalGeometry::at(s.charts[0].as_ref(), p).unwrap();
                let closed = pushforward_mean_curvature(&src, &x0);
                let scale = closed.norm().max(direct.mean_curvature.norm()).max(1e-300);
                assert!((closed - &direct.mean_curvature).norm() / scale < 1e-6);
                // metric is conformal with factor |f - x0|^-4
                let k = (&src.position - &x0).norm_squared().powi(-2);
                assert!((direct.metric - src.metric * k).norm() <= 1e-10 * direct.metric.norm());
                assert!(((ic.position(p) - &x0).norm() * (&src.position - &x0).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inversion_is_an_involution() {
        let s = surface("catenoid", SurfaceParams::new().with("cutoff", 50.0));
        let x0 = DVector::from_vec(vec![0.3, 0.0, 0.7]);
        let once: ChartRef = Arc::new(invert(s.charts[0].clone(), &x0, None).unwrap());
        let twice = invert(once, &x0, None).unwrap();
        for p in sample_params(twice.domain(), 50, 11) {
            let a = s.charts[0].position(p);
            assert!((twice.position(p) - &a).norm() <= 1e-10 * a.norm().max(1.0));
        }
    }

    #[test]
    fn base_point_on_surface_is_rejected() {
        let s = surface("catenoid", SurfaceParams::new().with("cutoff", 50.0));
        let on = DVector::from_vec(vec![(0.3f64).cosh() * 0.6, (0.3f64).cosh() * 0.8, 0.3]);
        assert!(matches!(
            invert(s.charts[0].clone(), &on, None),
            Err(Error::BasePointOnSurface { .. })
        ));
    }

    #[test]
    fn puncture_trims_the_domain() {
        let s = surface("graph", SurfaceParams::new().with("c", 0.0));
        assert!(invert(s.charts[0].clone(), &zero(), None).is_err());
        let ic = invert(s.charts[0].clone(), &zero(), Some(Puncture::new(Side::UMin, 1e-3))).unwrap();
        assert_eq!(ic.domain().edge(Side::UMin), EdgeKind::Cutoff);
    }
}
