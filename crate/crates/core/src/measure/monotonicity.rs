use std::f64::consts::PI;

use nalgebra::DVector;
use serde::Serialize;

use super::quadrature::{integrate, QuadOptions, Region};
use crate::error::{Error, Result};
use crate::geom::{LocalGeometry, Surface};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub name: &'static str,
    pub value: f64,
    pub error: f64,
}

/// The weakened inequality `mu(B_s)/s^2 <= (1+d) mu(B_r)/r^2 + (1/2d) int_{B_r} |H|^2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityRow {
    pub delta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub error: f64,
}

/// Every term of the monotonicity identity between radii `sigma < rho`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityLedger {
    pub center: Vec<f64>,
    pub sigma: f64,
    pub rho: f64,
    pub lhs: Term,
    pub rhs_terms: Vec<Term>,
    pub residual: f64,
    /// Sum of the quadrature errors of every term.
    pub error: f64,
    pub inequality: Vec<InequalityRow>,
}

pub const DEFAULT_DELTAS: [f64; 3] = [0.1, 0.5, 1.0];

/// `r <grad^perp r, H> = <(x - c)^perp, H> = <x - c, H>`.
fn radial_h(g: &LocalGeometry, c: &DVector<f64>) -> f64 {
    (&g.position - c).dot(&g.mean_curvature)
}

pub fn monotonicity_check(
    surface: &Surface,
    x: &DVector<f64>,
    sigma: f64,
    rho: f64,
    deltas: &[f64],
    opts: &QuadOptions,
) -> Result<MonotonicityLedger> {
    if !(sigma > 0.0 && rho > sigma) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < sigma < rho, got {sigma}, {rho}"
        )));
    }
    let inner = integrate(surface, &Region::ball(x, sigma), opts, |g| [1.0, radial_h(g, x)])?;
    let outer = integrate(surface, &Region::ball(x, rho), opts, |g| {
        [1.0, radial_h(g, x), g.mean_curvature_norm2()]
    })?;
    let ann = integrate(surface, &Region::annulus(x, sigma, rho), opts, |g| {
        let w = g.radial_deviation(x) + &g.mean_curvature * 0.25;
        [g.mean_curvature_norm2(), w.norm_squared()]
    })?;

    let (s2, r2) = (sigma * sigma, rho * rho);
    let term = |name, value: f64, error: f64| Term { name, value, error };
    let lhs = term("mu(B_sigma)/sigma^2", inner.value[0] / s2, inner.error[0] / s2);
    let rhs_terms = vec![
        term("mu(B_rho)/rho^2", outer.value[0] / r2, outer.error[0] / r2),
        term("1/16 int_ann |H|^2", ann.value[0] / 16.0, ann.error[0] / 16.0),
        term("-int_ann |grad^perp r/r + H/4|^2", -ann.value[1], ann.error[1]),
        term(
            "1/(2 rho^2) int_B_rho r<grad^perp r,H>",
            outer.value[1] / (2.0 * r2),
            outer.error[1] / (2.0 * r2),
        ),
        term(
            "-1/(2 sigma^2) int_B_sigma r<grad^perp r,H>",
            -inner.value[1] / (2.0 * s2),
            inner.error[1] / (2.0 * s2),
        ),
    ];
    let residual = lhs.value - rhs_terms.iter().map(|t| t.value).sum::<f64>();
    let error = lhs.error + rhs_terms.iter().map(|t| t.error).sum::<f64>();

    let willmore = (outer.value[2], outer.error[2]);
    let inequality = deltas
        .iter()
        .map(|&d| {
            let rhs = (1.0 + d) * rhs_terms[0].value + willmore.0 / (2.0 * d);
            InequalityRow {
                delta: d,
                lhs: lhs.value,
                rhs,
                slack: rhs - lhs.value,
                error: lhs.error + (1.0 + d) * rhs_terms[0].error + willmore.1 / (2.0 * d),
            }
        })
        .collect();

    Ok(MonotonicityLedger {
        center: x.iter().copied().collect(),
        sigma,
        rho,
        lhs,
        rhs_terms,
        residual,
        error,
        inequality,
    })
}

/// `int_{B_rho} |grad^perp r / r|^2` together with the density bound
/// `mu(B_rho)/(pi rho^2) <= 9 Theta_* + 59/(16 pi) int |H|^2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialDeviation {
    pub rho: f64,
    pub energy: f64,
    pub energy_error: f64,
    pub density: f64,
    pub willmore: f64,
    pub theta_lower: f64,
    pub bound: f64,
    pub slack: f64,
    pub error: f64,
}

/// The Willmore term uses the ball integral, which can only shrink the
/// right-hand side, so a nonnegative slack here certifies the global bound.
pub fn radial_deviation_energy(
    surface: &Surface,
    x: &DVector<f64>,
    rho: f64,
    theta_lower: f64,
    opts: &QuadOptions,
) -> Result<RadialDeviation> {
    let q = integrate(surface, &Region::ball(x, rho), opts, |g| {
        let d = (&g.position - x).norm();
        // the deviation is bounded near x, but undefined exactly at it
        let e = if d > 0.0 {
            g.radial_deviation(x).norm_squared()
        } else {
            0.0
        };
        [1.0, e, g.mean_curvature_norm2()]
    })?;
    let s = PI * rho * rho;
    let density = q.value[0] / s;
    let bound = 9.0 * theta_lower + 59.0 / (16.0 * PI) * q.value[2];
    Ok(RadialDeviation {
        rho,
        energy: q.value[1],
        energy_error: q.error[1],
        density,
        willmore: q.value[2],
        theta_lower,
        bound,
        slack: bound - density,
        error: q.error[0] / s + 59.0 / (16.0 * PI) * q.error[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Registry, SurfaceParams};

    fn build(name: &str, p: SurfaceParams) -> Surface {
        Registry::builtin().build(name, &p).unwrap()
    }

    fn assert_closes(l: &MonotonicityLedger) {
        assert!(
            l.residual.abs() <= 3.0 * l.error,
            "residual {:e} error {:e}: {l:#?}",
            l.residual,
            l.error
        );
        for row in &l.inequality {
            assert!(row.slack >= -row.error, "{row:?}");
        }
    }

    #[test]
    fn plane_through_center() {
        let s = build("plane", SurfaceParams::new().with("extent", 50.0));
        let l = monotonicity_check(
            &s,
            &DVector::zeros(3),
            1.0,
            3.0,
            &DEFAULT_DELTAS,
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((l.lhs.value - PI).abs() < 1e-8);
        assert!(l.residual.abs() < 1e-8);
        assert_closes(&l);
    }

    #[test]
    fn offset_plane_has_nonzero_deviation_terms() {
        let s = build("plane", SurfaceParams::new().with("extent", 50.0).with("offset", 0.5));
        let l = monotonicity_check(
            &s,
            &DVector::zeros(3),
            1.0,
            3.0,
            &DEFAULT_DELTAS,
            &QuadOptions::default(),
        )
        .unwrap();
        // int_{B_3 \ B_1} d^2 / r^4 over the plane at height d, in closed form
        let d: f64 = 0.5;
        let r = |t: f64| (t * t - d * d).sqrt();
        let oracle = PI * d * d * (1.0 / (d * d + r(1.0).powi(2)) - 1.0 / (d * d + r(3.0).powi(2)));
        assert!((-l.rhs_terms[2].value - oracle).abs() < 1e-7);
        assert_closes(&l);
    }

    #[test]
    fn sphere_swallowed_by_outer_ball() {
        let s = build("sphere", SurfaceParams::new());
        let x = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let l = monotonicity_check(&s, &x, 0.5, 3.0, &DEFAULT_DELTAS, &QuadOptions::default()).unwrap();
        assert_closes(&l);
    }

    #[test]
    fn plane_radial_deviation_slack_is_eight() {
        let s = build("plane", SurfaceParams::new().with("extent", 50.0));
        let r = radial_deviation_energy(&s, &DVector::zeros(3), 10.0, 1.0, &QuadOptions::default()).unwrap();
        assert!(r.energy.abs() < 1e-9);
        assert!((r.slack - 8.0).abs() < 1e-6);
    }
}
