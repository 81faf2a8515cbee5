use std::f64::consts::PI;

use nalgebra::DVector;
use serde::Serialize;

use super::tilt::projector_gap2;
use crate::error::{Error, Result};
use crate::geom::{Plane2, Surface};
use crate::measure::density::density_at_point;
use crate::measure::quadrature::{integrate, Constraint, QuadOptions, Region};

/// Terms of
/// `pi Theta(y) <= (1 + 24 b) mu(band ∩ B_R)/R^2 + 6/(l b)^5 R^-2 int |p_S - p_0|^2 + 2/(l b)^3 int |H|^2`
/// where the band is `|q_0(x - y)| < 2 l b R` and integrals run over `B_R(xi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandLemmaCheck {
    pub radius: f64,
    pub l: f64,
    pub beta: f64,
    pub theta_y: f64,
    pub theta_y_error: f64,
    pub lhs: f64,
    pub band_term: f64,
    pub tilt_term: f64,
    pub willmore_term: f64,
    pub rhs: f64,
    pub slack: f64,
    pub error: f64,
}

/// Check the band estimate with `Theta(y)` taken from small-radius
/// extrapolation at `sigma0`; `reference` supplies the directions of `p_0`
/// and `q_0` (its base point is ignored).
#[allow(clippy::too_many_arguments)]
pub fn band_lemma_check(
    surface: &Surface,
    xi: &DVector<f64>,
    radius: f64,
    y: &DVector<f64>,
    l: f64,
    beta: f64,
    reference: &Plane2,
    sigma0: f64,
    opts: &QuadOptions,
) -> Result<BandLemmaCheck> {
    if !(l > 0.0 && l < 1.0) || !(beta > 0.0 && beta < 0.25) {
        return Err(Error::InvalidParameter(format!(
            "need l in (0, 1) and beta in (0, 1/4), got {l}, {beta}"
        )));
    }
    if (y - xi).norm() >= beta * radius {
        return Err(Error::InvalidParameter("y must lie in B_{beta R}(xi)".into()));
    }
    let theta = density_at_point(surface, y, sigma0, opts)?;
    let band = Region::ball(xi, radius).and(Constraint::Slab {
        plane: reference.through(y.clone()),
        width: 2.0 * l * beta * radius,
    });
    let band_mu = integrate(surface, &band, opts, |_| [1.0])?;
    let ball = integrate(surface, &Region::ball(xi, radius), opts, |g| {
        [
            projector_gap2(&[g.e1.clone(), g.e2.clone()], reference),
            g.mean_curvature_norm2(),
        ]
    })?;
    let r2 = radius * radius;
    let lb = l * beta;
    let (kb, kt, kw) = ((1.0 + 24.0 * beta) / r2, 6.0 / lb.powi(5) / r2, 2.0 / lb.powi(3));
    let band_term = kb * band_mu.value[0];
    let tilt_term = kt * ball.value[0];
    let willmore_term = kw * ball.value[1];
    let lhs = PI * theta.value;
    let rhs = band_term + tilt_term + willmore_term;
    Ok(BandLemmaCheck {
        radius,
        l,
        beta,
        theta_y: theta.value,
        theta_y_error: theta.uncertainty,
        lhs,
        band_term,
        tilt_term,
        willmore_term,
        rhs,
        slack: rhs - lhs,
        error: PI * theta.uncertainty + kb * band_mu.error[0] + kt * ball.error[0] + kw * ball.error[1],
    })
}
