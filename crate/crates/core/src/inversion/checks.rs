use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{invert, invert_surface, pushforward_mean_curvature, Puncture};
use crate::error::{Error, Result};
use crate::geom::{Chart, ChartRef, LocalGeometry, Param, ParamDomain, Surface};
use crate::measure::density::{density_at_infinity, density_at_point, DensityProfile, SmallRadiusDensity};
use crate::measure::quadrature::{integrate, Constraint, QuadOptions, Region};

/// `n` reproducible parameter points drawn uniformly from the inner 96% of a domain.
pub fn sample_params(dom: &ParamDomain, n: usize, seed: u64) -> Vec<Param> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| dom.lerp(rng.random_range(0.02..0.98), rng.random_range(0.02..0.98)))
        .collect()
}

/// `|H|^2/16 - |H/4 + grad^perp r / r|^2` about `x0`.
fn bracket(h: &DVector<f64>, dev: &DVector<f64>) -> (f64, f64) {
    let a = h.norm_squared() / 16.0;
    let b = (h * 0.25 + dev).norm_squared();
    (a - b, a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntisymmetryRow {
    pub u: f64,
    pub v: f64,
    /// Inverted side, per unit parameter area.
    pub left: f64,
    /// Source side, per unit parameter area.
    pub right: f64,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntisymmetryLedger {
    pub base_point: Vec<f64>,
    pub rows: Vec<AntisymmetryRow>,
    pub max_residual: f64,
    pub mean_residual: f64,
}

/// Pointwise check that the inverted integrand equals minus the source
/// integrand against the common parameter measure. Residuals are relative to
/// the size of the individual terms, so cancellation cannot hide an error.
pub fn antisymmetry_check(chart: &ChartRef, x0: &DVector<f64>, params: &[Param]) -> Result<AntisymmetryLedger> {
    let inv = invert(chart.clone(), x0, None)?;
    let rows = params
        .iter()
        .map(|&p| {
            let g = LocalGeometry::at(chart.as_ref(), p)?;
            let gi = LocalGeometry::at(&inv, p)?;
            let (r, rs) = bracket(&g.mean_curvature, &g.radial_deviation(x0));
            let (l, ls) = bracket(&gi.mean_curvature, &gi.radial_deviation(x0));
            let left = l * gi.area_density;
            let right = -r * g.area_density;
            let scale = ls * gi.area_density + rs * g.area_density;
            let rel = if scale > 0.0 {
                (left - right).abs() / scale
            } else {
                (left - right).abs()
            };
            Ok(AntisymmetryRow {
                u: p.u,
                v: p.v,
                left,
                right,
                relative_residual: rel,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_residual = rows.iter().map(|r| r.relative_residual).fold(0.0, f64::max);
    let mean_residual = rows.iter().map(|r| r.relative_residual).sum::<f64>() / rows.len().max(1) as f64;
    Ok(AntisymmetryLedger {
        base_point: x0.iter().copied().collect(),
        rows,
        max_residual,
        mean_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityFormulaReport {
    pub base_point: Vec<f64>,
    /// `int (|H~|^2/16 - |H~/4 + grad~^perp r~ / r~|^2) dmu~` over the inverted surface.
    pub lhs: f64,
    pub lhs_error: f64,
    /// Change of `lhs` when the source is cut at half its cutoff.
    pub truncation: f64,
    pub theta_infinity: f64,
    pub theta_at_base: f64,
    /// `pi (Theta(inf) - Theta(x0))`.
    pub rhs: f64,
    pub rhs_error: f64,
    pub residual: f64,
    pub tolerance: f64,
    /// `int |H~|^2` on the inverted surface.
    pub inverted_willmore: f64,
    pub inverted_willmore_error: f64,
    /// `int (|H|^2 + |grad^perp r / r|^2)` on the source.
    pub source_energy: f64,
    /// `320 * source_energy - inverted_willmore`.
    pub willmore_bound_slack: f64,
}

/// Global representation formula on the inverted surface.
///
/// `theta_infinity` is `(value, uncertainty)` from the density profile of the
/// source; `theta_at_base` is the density of the source at `x0` (0 off the surface).
pub fn density_formula_check(
    surface: &Surface,
    x0: &DVector<f64>,
    theta_infinity: (f64, f64),
    theta_at_base: f64,
    opts: &QuadOptions,
) -> Result<DensityFormulaReport> {
    let inv = invert_surface(surface, x0, None)?;
    let integrand = |g: &LocalGeometry| {
        let (b, _) = bracket(&g.mean_curvature, &g.radial_deviation(x0));
        [b, g.mean_curvature_norm2()]
    };
    let full = integrate(&inv, &Region::everywhere(), opts, integrand)?;
    let truncation = match surface.cutoff {
        Some(rc) if !surface.is_compact() => {
            let cut = Region::everywhere().and(Constraint::Outside {
                center: x0.clone(),
                radius: 2.0 / rc,
            });
            (full.value[0] - integrate(&inv, &cut, opts, integrand)?.value[0]).abs()
        }
        _ => 0.0,
    };
    let src = integrate(surface, &Region::everywhere(), &opts.clone().truncating(), |g| {
        let d = (&g.position - x0).norm();
        let dev = if d > 0.0 {
            g.radial_deviation(x0).norm_squared()
        } else {
            0.0
        };
        [g.mean_curvature_norm2() + dev]
    })?;
    let rhs = PI * (theta_infinity.0 - theta_at_base);
    let rhs_error = PI * theta_infinity.1;
    let lhs_error = full.error[0];
    Ok(DensityFormulaReport {
        base_point: x0.iter().copied().collect(),
        lhs: full.value[0],
        lhs_error,
        truncation,
        theta_infinity: theta_infinity.0,
        theta_at_base,
        rhs,
        rhs_error,
        residual: full.value[0] - rhs,
        tolerance: lhs_error + truncation + rhs_error,
        inverted_willmore: full.value[1],
        inverted_willmore_error: full.error[1],
        source_energy: src.value[0],
        willmore_bound_slack: 320.0 * src.value[0] - full.value[1],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityIdentityReport {
    pub base_point: Vec<f64>,
    pub inverted_density: SmallRadiusDensity,
    pub theta_infinity: f64,
    pub theta_infinity_error: f64,
    pub residual: f64,
    pub tolerance: f64,
}

/// `Theta(inverted surface, x0) = Theta(surface, inf)` for `x0` off a non-compact surface.
pub fn density_identity_check(
    surface: &Surface,
    x0: &DVector<f64>,
    theta_infinity: (f64, f64),
    sigma0: f64,
    opts: &QuadOptions,
) -> Result<DensityIdentityReport> {
    if surface.is_compact() {
        return Err(Error::CompactSource);
    }
    let inv = invert_surface(surface, x0, None)?;
    // the cutoff of the source becomes a small hole around x0
    let d = density_at_point(&inv, x0, sigma0, &opts.clone().truncating())?;
    let residual = d.value - theta_infinity.0;
    Ok(DensityIdentityReport {
        base_point: x0.iter().copied().collect(),
        tolerance: d.uncertainty + theta_infinity.1,
        inverted_density: d,
        theta_infinity: theta_infinity.0,
        theta_infinity_error: theta_infinity.1,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PuncturedReport {
    pub source_density: SmallRadiusDensity,
    pub inverted_profile: DensityProfile,
    pub residual: f64,
    pub tolerance: f64,
}

/// `Theta(surface, x0) = Theta(inverted surface, inf)` for a surface through
/// `x0` at the declared puncture.
///
/// The inverted profile only uses balls that stay clear of the trimmed strip
/// (enforced by the truncation check), so it does not depend on `eps`.
pub fn punctured_density_identity_check(
    surface: &Surface,
    x0: &DVector<f64>,
    puncture: Puncture,
    sigma0: f64,
    radii: &[f64],
    opts: &QuadOptions,
) -> Result<PuncturedReport> {
    let near = density_at_point(surface, x0, sigma0, &opts.clone().truncating())?;
    let inv = invert_surface(surface, x0, Some(puncture))?;
    let far = density_at_infinity(&inv, x0, radii, opts)?;
    let residual = near.value - far.extrapolation.value;
    Ok(PuncturedReport {
        tolerance: near.uncertainty + far.extrapolation.uncertainty,
        source_density: near,
        inverted_profile: far,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereFit {
    pub center: Vec<f64>,
    pub radius: f64,
    /// `max | |x - c| - R |` over the points.
    pub residual: f64,
}

/// Algebraic least-squares sphere `|x|^2 = 2 c.x + k`.
pub fn fit_sphere(points: &[DVector<f64>]) -> Result<SphereFit> {
    let n = points.first().map_or(0, |p| p.len());
    if points.len() < n + 1 {
        return Err(Error::InvalidParameter("too few points for a sphere fit".into()));
    }
    let a = DMatrix::from_fn(points.len(), n + 1, |i, j| if j < n { 2.0 * points[i][j] } else { 1.0 });
    let b = DVector::from_fn(points.len(), |i, _| points[i].norm_squared());
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidParameter(format!("sphere fit: {e}")))?;
    let c = sol.rows(0, n).into_owned();
    let radius = (sol[n] + c.norm_squared()).sqrt();
    let residual = points
        .iter()
        .map(|p| ((p - &c).norm() - radius).abs())
        .fold(0.0, f64::max);
    Ok(SphereFit {
        center: c.iter().copied().collect(),
        radius,
        residual,
    })
}

/// Points of an inverted chart at sample parameters, for fitting.
pub fn inverted_points(chart: &dyn Chart, params: &[Param]) -> Vec<DVector<f64>> {
    params.iter().map(|&p| chart.position(p)).collect()
}

/// Closed-form and jet mean curvature of the inverted chart at `p`, as
/// `(closed, direct)`.
pub fn mean_curvature_pair(chart: &ChartRef, x0: &DVector<f64>, p: Param) -> Result<(DVector<f64>, DVector<f64>)> {
    let inv = invert(chart.clone(), x0, None)?;
    let g = LocalGeometry::at(chart.as_ref(), p)?;
    Ok((
        pushforward_mean_curvature(&g, x0),
        LocalGeometry::at(&inv, p)?.mean_curvature,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Registry, Side, SurfaceParams};
    use crate::measure::geometric_radii;

    fn surface(name: &str, p: SurfaceParams) -> Surface {
        Registry::builtin().build(name, &p).unwrap()
    }

    #[test]
    fn antisymmetry_on_plane_and_catenoid() {
        let plane = surface("plane", SurfaceParams::new().with("offset", 1.0));
        let c = &plane.charts[0];
        let l = antisymmetry_check(c, &DVector::zeros(3), &sample_params(c.domain(), 100, 1)).unwrap();
        assert!(l.max_residual < 1e-8, "{}", l.max_residual);
        let cat = surface("catenoid", SurfaceParams::new().with("cutoff", 100.0));
        let c = &cat.charts[0];
        let x0 = DVector::from_vec(vec![0.0, 0.0, 5.0]);
        let l = antisymmetry_check(c, &x0, &sample_params(c.domain(), 100, 2)).unwrap();
        assert!(l.max_residual < 1e-8, "{}", l.max_residual);
    }

    #[test]
    fn shifted_sphere_inverts_to_sphere() {
        let s = surface("sphere", SurfaceParams::new().with("cx", 3.0));
        let inv = invert(s.charts[0].clone(), &DVector::zeros(3), None).unwrap();
        let fit = fit_sphere(&inverted_points(&inv, &sample_params(inv.domain(), 200, 4))).unwrap();
        assert!(fit.residual < 1e-8);
        // |x| ranges over [2, 4], so the image spans [1/4, 1/2] along the axis
        assert!((fit.radius - 0.125).abs() < 1e-9 && (fit.center[0] - 0.375).abs() < 1e-9);
    }

    #[test]
    fn plane_density_formula_and_identity() {
        let s = surface("plane", SurfaceParams::new().with("offset", 1.0));
        let x0 = DVector::zeros(3);
        let f = density_formula_check(&s, &x0, (1.0, 0.0), 0.0, &QuadOptions::default()).unwrap();
        assert!((f.lhs / PI - 1.0).abs() < 1e-2, "{f:?}");
        assert!(f.willmore_bound_slack > 0.0);
        let d = density_identity_check(&s, &x0, (1.0, 0.0), 0.04, &QuadOptions::default()).unwrap();
        assert!(d.residual.abs() < 1e-2, "{d:?}");
    }

    #[test]
    fn compact_source_is_reported() {
        let s = surface("sphere", SurfaceParams::new().with("cx", 3.0));
        assert!(matches!(
            density_identity_check(&s, &DVector::zeros(3), (0.0, 0.0), 0.04, &QuadOptions::default()),
            Err(Error::CompactSource)
        ));
    }

    #[test]
    fn punctured_flat_disk() {
        let s = surface("graph", SurfaceParams::new().with("c", 0.0).with("boundary", 1.0));
        let r = punctured_density_identity_check(
            &s,
            &DVector::zeros(3),
            Puncture::new(Side::UMin, 1e-3),
            0.1,
            &geometric_radii(2.5, 250.0, 7),
            &QuadOptions::default(),
        )
        .unwrap();
        assert!(r.residual.abs() < 1e-2, "{r:?}");
    }
}
