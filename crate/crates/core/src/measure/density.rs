use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::quadrature::{area, QuadOptions, QuadratureResult, Region};
use crate::error::{Error, Result};
use crate::geom::Surface;

/// Absolute floor on extrapolation uncertainty; below this the fits are exact.
const FIT_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityRow {
    pub radius: f64,
    pub theta: f64,
    pub error: f64,
}

/// One least-squares extrapolation model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitModel {
    pub name: &'static str,
    pub coefficients: Vec<f64>,
    /// Standard error of the constant coefficient.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    pub uncertainty: f64,
    pub models: Vec<FitModel>,
}

/// `Theta(x, r)` over a radius schedule plus its large-radius behaviour.
///
/// `theta_star_lower` and `theta_star_upper` are the running inf and sup over
/// the last decade of radii: cutoff surrogates for the lim inf and lim sup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityProfile {
    pub surface: String,
    pub center: Vec<f64>,
    pub cutoff: Option<f64>,
    pub rows: Vec<DensityRow>,
    pub extrapolation: Extrapolation,
    pub theta_star_lower: f64,
    pub theta_star_upper: f64,
}

/// `n` radii spaced geometrically from `r0` to `r1` inclusive.
pub fn geometric_radii(r0: f64, r1: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && r0 > 0.0 && r1 > r0);
    let q = (r1 / r0).ln() / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { r1 } else { r0 * (q * i as f64).exp() })
        .collect()
}

/// `Theta(x, r) = mu(B_r(x)) / (pi r^2)`.
pub fn density_ratio(surface: &Surface, x: &DVector<f64>, r: f64, opts: &QuadOptions) -> Result<QuadratureResult> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let a = area(surface, &Region::ball(x, r), opts)?;
    let s = PI * r * r;
    Ok(QuadratureResult {
        value: a.value / s,
        error: a.error / s,
        cells: a.cells,
    })
}

pub fn density_rows(surface: &Surface, x: &DVector<f64>, radii: &[f64], opts: &QuadOptions) -> Result<Vec<DensityRow>> {
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("radii must be strictly increasing".into()));
    }
    radii
        .iter()
        .map(|&r| {
            let q = density_ratio(surface, x, r, opts)?;
            Ok(DensityRow {
                radius: r,
                theta: q.value,
                error: q.error,
            })
        })
        .collect()
}

/// Weighted least squares `y ~ sum_j c_j phi_j(t)`; returns coefficients and
/// the standard error of `c_0`. With no spare degrees of freedom the
/// standard error is 0.
pub fn least_squares(ts: &[f64], ys: &[f64], basis: &[&dyn Fn(f64) -> f64]) -> Result<(Vec<f64>, f64)> {
    let (n, m) = (ts.len(), basis.len());
    if n < m {
        return Err(Error::InvalidParameter(format!(
            "{n} points cannot fit {m} coefficients"
        )));
    }
    let a = DMatrix::from_fn(n, m, |i, j| basis[j](ts[i]));
    let y = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let c = svd
        .solve(&y, 1e-13)
        .map_err(|e| Error::NonConvergent(format!("least squares: {e}")))?;
    let stderr = if n > m {
        let res = &a * &c - &y;
        let s2 = res.norm_squared() / (n - m) as f64;
        let ata = a.transpose() * &a;
        match ata.try_inverse() {
            Some(inv) => (s2 * inv[(0, 0)]).max(0.0).sqrt(),
            None => res.amax(),
        }
    } else {
        0.0
    };
    Ok((c.iter().copied().collect(), stderr))
}

/// Fit the last decade of `rows` with `a + b/r` and `a + b/r + c log r / r^2`.
///
/// The reported value is the log model. Uncertainty is the spread of the two
/// constants plus fit and quadrature noise; if the spread exceeds five times
/// the noise the schedule is declared non-convergent.
pub fn extrapolate_infinity(rows: &[DensityRow]) -> Result<Extrapolation> {
    if rows.len() < 6 {
        return Err(Error::InvalidParameter(format!(
            "need at least 6 radii, got {}",
            rows.len()
        )));
    }
    let r_max = rows.last().unwrap().radius;
    let r_min = rows[0].radius;
    if r_max / r_min < 100.0 * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter("radii must span at least two decades".into()));
    }
    let tail: Vec<&DensityRow> = rows
        .iter()
        .filter(|r| r.radius >= r_max / 10.0 * (1.0 - 1e-12))
        .collect();
    if tail.len() < 4 {
        return Err(Error::InvalidParameter(
            "need at least 4 radii in the last decade".into(),
        ));
    }
    let ts: Vec<f64> = tail.iter().map(|r| r.radius).collect();
    let ys: Vec<f64> = tail.iter().map(|r| r.theta).collect();
    let quad = tail.iter().map(|r| r.error).fold(0.0, f64::max);

    let one = |_: f64| 1.0;
    let inv = |r: f64| 1.0 / r;
    let lg = |r: f64| r.ln() / (r * r);
    let (c1, s1) = least_squares(&ts, &ys, &[&one, &inv])?;
    let (c2, s2) = least_squares(&ts, &ys, &[&one, &inv, &lg])?;
    let spread = (c1[0] - c2[0]).abs();
    let noise = s1.max(s2) + quad + FIT_FLOOR;
    if spread > 5.0 * noise {
        return Err(Error::NonConvergent(format!(
            "fit models disagree: {:.6} vs {:.6} (noise {noise:.2e})",
            c1[0], c2[0]
        )));
    }
    Ok(Extrapolation {
        value: c2[0],
        uncertainty: spread.max(noise),
        models: vec![
            FitModel {
                name: "a + b/r",
                coefficients: c1,
                stderr: s1,
            },
            FitModel {
                name: "a + b/r + c log(r)/r^2",
                coefficients: c2,
                stderr: s2,
            },
        ],
    })
}

/// Density profile over `radii` with extrapolated `Theta(Sigma, inf)`.
pub fn density_at_infinity(
    surface: &Surface,
    x: &DVector<f64>,
    radii: &[f64],
    opts: &QuadOptions,
) -> Result<DensityProfile> {
    let rows = density_rows(surface, x, radii, opts)?;
    let extrapolation = extrapolate_infinity(&rows)?;
    let r_max = rows.last().unwrap().radius;
    let tail = rows.iter().filter(|r| r.radius >= r_max / 10.0 * (1.0 - 1e-12));
    let (lo, hi) = tail.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.theta), hi.max(r.theta))
    });
    Ok(DensityProfile {
        surface: surface.name.clone(),
        center: x.iter().copied().collect(),
        cutoff: surface.cutoff,
        rows,
        extrapolation,
        theta_star_lower: lo,
        theta_star_upper: hi,
    })
}

/// `Theta(x) = lim Theta(x, s)` as `s -> 0`, from `s0, s0/2, s0/4` and a linear fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallRadiusDensity {
    pub rows: Vec<DensityRow>,
    pub value: f64,
    pub uncertainty: f64,
    pub slope: f64,
}

pub fn extrapolate_zero(rows: &[DensityRow]) -> Result<SmallRadiusDensity> {
    if rows.len() < 3 {
        return Err(Error::InvalidParameter("need three radii".into()));
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.radius).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.theta).collect();
    let (c, se) = least_squares(&ts, &ys, &[&|_| 1.0, &|s| s])?;
    // a two-point Richardson estimate on the smallest pair gauges model error
    let (a, b) = (&rows[0], &rows[1]);
    let rich = (b.radius * a.theta - a.radius * b.theta) / (b.radius - a.radius);
    let quad = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    Ok(SmallRadiusDensity {
        rows: rows.to_vec(),
        value: c[0],
        uncertainty: (c[0] - rich).abs() + se + quad + FIT_FLOOR,
        slope: c[1],
    })
}

pub fn density_at_point(
    surface: &Surface,
    x: &DVector<f64>,
    sigma0: f64,
    opts: &QuadOptions,
) -> Result<SmallRadiusDensity> {
    let radii = [sigma0 / 4.0, sigma0 / 2.0, sigma0];
    extrapolate_zero(&density_rows(surface, x, &radii, opts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Registry, SurfaceParams};

    fn build(name: &str, p: SurfaceParams) -> Surface {
        Registry::builtin().build(name, &p).unwrap()
    }

    #[test]
    fn geometric_radii_hit_endpoints() {
        let r = geometric_radii(1.0, 1000.0, 7);
        assert_eq!(r[0], 1.0);
        assert_eq!(r[6], 1000.0);
        assert!((r[3] - 1000f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn fits_recover_synthetic_limits() {
        let radii = geometric_radii(10.0, 1000.0, 9);
        let rows: Vec<DensityRow> = radii
            .iter()
            .map(|&r| DensityRow {
                radius: r,
                theta: 2.0 - 3.0 / r + 5.0 * r.ln() / (r * r),
                error: 0.0,
            })
            .collect();
        let e = extrapolate_infinity(&rows).unwrap();
        assert!((e.value - 2.0).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn offset_disk_density() {
        let s = build("plane", SurfaceParams::new().with("offset", 1.0).with("extent", 10.0));
        let q = density_ratio(&s, &DVector::zeros(3), 2.0, &QuadOptions::default()).unwrap();
        assert!((q.value - 0.75).abs() < 1e-7);
    }

    #[test]
    fn catenoid_ball_area_is_between_one_and_two_sheets() {
        let s = build("catenoid", SurfaceParams::new().with("cutoff", 200.0));
        let q = density_ratio(&s, &DVector::zeros(3), 10.0, &QuadOptions::default()).unwrap();
        // surface of revolution: 2 * int_0^h 2 pi cosh^2 z dz with cosh^2 h + h^2 = 100
        let h = crate::geom::catalog::catenoid_height(1.0, 10.0);
        let oracle = 2.0 * PI * (h + (2.0 * h).sinh() / 2.0) / (PI * 100.0);
        assert!((q.value - oracle).abs() < 1e-6, "{} vs {oracle}", q.value);
        assert!(q.value > 1.0 && q.value < 2.2);
    }

    #[test]
    fn smooth_point_has_unit_density() {
        let s = build("sphere", SurfaceParams::new());
        let mut x = DVector::zeros(3);
        x[2] = 1.0;
        let d = density_at_point(&s, &x, 0.2, &QuadOptions::default()).unwrap();
        assert!((d.value - 1.0).abs() < 1e-2, "{d:?}");
    }

    #[test]
    fn density_is_scale_invariant() {
        let x = DVector::from_vec(vec![0.3, 0.0, 0.2]);
        let base = build("sphere", SurfaceParams::new());
        let t = density_ratio(&base, &x, 0.7, &QuadOptions::default()).unwrap();
        for lam in [0.5, 3.0] {
            let s = build("sphere", SurfaceParams::new().with("R", lam));
            let q = density_ratio(&s, &(&x * lam), 0.7 * lam, &QuadOptions::default()).unwrap();
            assert!((q.value - t.value).abs() < 1e-8);
        }
    }
}
