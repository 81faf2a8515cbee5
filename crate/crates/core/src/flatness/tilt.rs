use nalgebra::DVector;
use serde::Serialize;

use super::sample::PointSample;
use crate::error::{Error, Result};
use crate::geom::{LocalGeometry, Plane2, Surface};
use crate::measure::quadrature::{integrate, QuadOptions, QuadratureResult, Region};

/// `|p_S - p_T|_F^2 = 4 - 2 sum_ab <s_a, t_b>^2` for orthonormal frames.
pub fn projector_gap2(frame: &[DVector<f64>; 2], t: &Plane2) -> f64 {
    let mut c = 0.0;
    for s in frame {
        for b in &t.frame {
            c += s.dot(b).powi(2);
        }
    }
    (4.0 - 2.0 * c).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiltExcess {
    pub value: f64,
    /// Sample mass inside the ball.
    pub mass: f64,
    pub points: usize,
}

/// `E(xi, rho, T) = rho^-2 int_{B_rho(xi)} |p_{T_x} - p_T|^2 dmu` on a sample.
pub fn tilt_excess(sample: &PointSample, xi: &DVector<f64>, rho: f64, t: &Plane2) -> Result<TiltExcess> {
    let frames = sample.tangents.as_ref().ok_or(Error::MissingTangents)?;
    let idx = sample.in_ball(xi, rho);
    let (mut e, mut mass) = (0.0, 0.0);
    for &i in &idx {
        e += sample.weights[i] * projector_gap2(&frames[i], t);
        mass += sample.weights[i];
    }
    Ok(TiltExcess {
        value: e / (rho * rho),
        mass,
        points: idx.len(),
    })
}

/// The same excess by adaptive quadrature on the charts.
pub fn tilt_excess_quadrature(
    surface: &Surface,
    xi: &DVector<f64>,
    rho: f64,
    t: &Plane2,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let q = integrate(surface, &Region::ball(xi, rho), opts, |g| {
        [projector_gap2(&[g.e1.clone(), g.e2.clone()], t)]
    })?;
    let r2 = rho * rho;
    let mut out = q.component(0);
    out.value /= r2;
    out.error /= r2;
    Ok(out)
}

/// Both sides of `1/2 |p_S - p_T|^2 = sum_j |p_S nu_j|^2`, `nu_j` the normals of `T`.
///
/// The right side is `sum_j |grad^S x^(2+j)|^2` in coordinates adapted to `T`.
pub fn gradient_identity(frame: &[DVector<f64>; 2], t: &Plane2) -> (f64, f64) {
    let ps = &frame[0] * frame[0].transpose() + &frame[1] * frame[1].transpose();
    let lhs = 0.5 * (&ps - t.projector()).norm_squared();
    let rhs = t.coframe.iter().map(|nu| (&ps * nu).norm_squared()).sum();
    (lhs, rhs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientIdentityCheck {
    pub points: usize,
    pub max_residual: f64,
    pub max_lhs: f64,
}

pub fn gradient_identity_check(
    sample: &PointSample,
    xi: &DVector<f64>,
    rho: f64,
    t: &Plane2,
) -> Result<GradientIdentityCheck> {
    let frames = sample.tangents.as_ref().ok_or(Error::MissingTangents)?;
    let idx = sample.in_ball(xi, rho);
    let mut out = GradientIdentityCheck {
        points: idx.len(),
        max_residual: 0.0,
        max_lhs: 0.0,
    };
    for i in idx {
        let (l, r) = gradient_identity(&frames[i], t);
        out.max_residual = out.max_residual.max((l - r).abs());
        out.max_lhs = out.max_lhs.max(l);
    }
    Ok(out)
}

/// `E(xi, rho/2, T) <= 4 int_{B_rho} |H|^2 + 592 rho^-2 int_{B_rho} (d(x, T)/rho)^2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientEstimate {
    pub rho: f64,
    pub excess: f64,
    pub willmore: f64,
    pub height: f64,
    pub rhs: f64,
    pub slack: f64,
    pub error: f64,
}

pub fn integral_gradient_estimate_check(
    surface: &Surface,
    xi: &DVector<f64>,
    rho: f64,
    t: &Plane2,
    opts: &QuadOptions,
) -> Result<GradientEstimate> {
    let e = tilt_excess_quadrature(surface, xi, 0.5 * rho, t, opts)?;
    let outer = integrate(surface, &Region::ball(xi, rho), opts, |g: &LocalGeometry| {
        [g.mean_curvature_norm2(), (t.distance(&g.position) / rho).powi(2)]
    })?;
    let k = 592.0 / (rho * rho);
    let rhs = 4.0 * outer.value[0] + k * outer.value[1];
    Ok(GradientEstimate {
        rho,
        excess: e.value,
        willmore: outer.value[0],
        height: outer.value[1],
        rhs,
        slack: rhs - e.value,
        error: e.error + 4.0 * outer.error[0] + k * outer.error[1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatness::sample::sample_surface;
    use crate::geom::{Registry, SurfaceParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn e(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    fn build(name: &str, p: SurfaceParams) -> Surface {
        Registry::builtin().build(name, &p).unwrap()
    }

    #[test]
    fn plane_against_itself_and_its_orthogonal_complement() {
        let s = build("plane", SurfaceParams::new().with("extent", 10.0).with("dim", 4.0));
        let x = DVector::zeros(4);
        let smp = sample_surface(&s, &x, 1.0, 0.01).unwrap();
        let same = Plane2::horizontal(x.clone());
        assert!(tilt_excess(&smp, &x, 1.0, &same).unwrap().value < 1e-20);
        let ortho = Plane2::new(x.clone(), &e(4, 2), &e(4, 3)).unwrap();
        let t = tilt_excess(&smp, &x, 1.0, &ortho).unwrap();
        assert!((t.value / (4.0 * PI) - 1.0).abs() < 0.01, "{t:?}");
        let q = tilt_excess_quadrature(&s, &x, 1.0, &ortho, &QuadOptions::default()).unwrap();
        assert!((q.value / (4.0 * PI) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn sphere_cap_excess_matches_fine_grid() {
        let s = build("sphere", SurfaceParams::new());
        let pole = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let rho: f64 = 0.2;
        let t = Plane2::horizontal(pole.clone());
        let smp = sample_surface(&s, &pole, rho, 0.002).unwrap();
        let got = tilt_excess(&smp, &pole, rho, &t).unwrap().value;
        // polar midpoint grid: the normal at polar angle a makes angle a with
        // the vertical, so |p_S - p_T|^2 = 2 sin^2 a; the cap is a <= 2 asin(rho/2)
        let amax = 2.0 * (rho / 2.0).asin();
        let n = 20000;
        let oracle: f64 = (0..n)
            .map(|i| {
                let a = (i as f64 + 0.5) * amax / n as f64;
                2.0 * a.sin().powi(2) * 2.0 * PI * a.sin() * amax / n as f64
            })
            .sum::<f64>()
            / (rho * rho);
        assert!((got / oracle - 1.0).abs() < 0.02, "{got} vs {oracle}");
    }

    #[test]
    fn gradient_identity_on_random_planes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rand_vec = || DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
        for _ in 0..100 {
            let t = Plane2::new(DVector::zeros(4), &rand_vec(), &rand_vec()).unwrap();
            let s = Plane2::new(DVector::zeros(4), &rand_vec(), &rand_vec()).unwrap();
            let (l, r) = gradient_identity(&s.frame, &t);
            assert!((l - r).abs() <= 1e-12, "{l} {r}");
        }
    }

    #[test]
    fn gradient_identity_on_catenoid_tangents() {
        let s = build("catenoid", SurfaceParams::new().with("cutoff", 20.0));
        let x = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let smp = sample_surface(&s, &x, 2.0, 0.1).unwrap();
        let c = gradient_identity_check(&smp, &x, 2.0, &Plane2::horizontal(x.clone())).unwrap();
        assert!(c.points >= 100 && c.max_residual <= 1e-10 && c.max_lhs > 0.5);
    }

    #[test]
    fn missing_tangents_are_reported() {
        let mut smp = sample_surface(
            &build("plane", SurfaceParams::new().with("extent", 5.0)),
            &DVector::zeros(3),
            1.0,
            0.1,
        )
        .unwrap();
        smp.tangents = None;
        let t = Plane2::horizontal(DVector::zeros(3));
        assert!(matches!(
            tilt_excess(&smp, &DVector::zeros(3), 1.0, &t),
            Err(Error::MissingTangents)
        ));
    }

    #[test]
    fn integral_gradient_estimate_holds() {
        let o = QuadOptions::default();
        let x = DVector::zeros(3);
        let plane = build("plane", SurfaceParams::new().with("extent", 10.0));
        let r = integral_gradient_estimate_check(&plane, &x, 1.0, &Plane2::horizontal(x.clone()), &o).unwrap();
        assert!(r.slack.abs() < 1e-12 && r.rhs.abs() < 1e-12);

        let cat = build("catenoid", SurfaceParams::new().with("cutoff", 400.0));
        let xi = DVector::from_vec(vec![100.0, 0.0, 100.0f64.acosh()]);
        let r = integral_gradient_estimate_check(&cat, &xi, 20.0, &Plane2::horizontal(xi.clone()), &o).unwrap();
        assert!(r.slack >= -r.error, "{r:?}");

        let sph = build("sphere", SurfaceParams::new());
        let pole = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let r = integral_gradient_estimate_check(&sph, &pole, 0.5, &Plane2::horizontal(pole.clone()), &o).unwrap();
        assert!(r.slack >= -r.error && r.excess > 0.0, "{r:?}");
    }
}
