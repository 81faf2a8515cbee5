use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use serde::Serialize;

use super::sample::PointSample;
use crate::error::{Error, Result};
use crate::geom::Plane2;

/// Below this ratio `lambda2 / lambda1` the cloud counts as collinear.
pub const DEGENERATE_RATIO: f64 = 1e-12;
/// `lambda2 / lambda3` below this flags the fit as ambiguous.
pub const AMBIGUITY_RATIO: f64 = 1.0 + 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneFit {
    /// Through the center, spanned by the top two moment eigenvectors.
    pub plane: Plane2,
    /// Eigenvalues of the weighted second-moment matrix, descending.
    pub eigenvalues: Vec<f64>,
    pub ambiguous: bool,
    /// The other candidate when the second eigenvalue is repeated.
    pub alternate: Option<Plane2>,
    pub points: usize,
    pub mass: f64,
}

fn moments(sample: &PointSample, idx: &[usize], about: &DVector<f64>) -> DMatrix<f64> {
    let n = about.len();
    let mut m = DMatrix::zeros(n, n);
    for &i in idx {
        let d = &sample.points[i] - about;
        m.ger(sample.weights[i], &d, &d, 1.0);
    }
    m
}

/// Best plane through `xi` for the points of `sample` in `B_sigma(xi)`.
///
/// The frame is the top two eigenvectors of `sum w (x - xi)(x - xi)^T`, which
/// minimises the weighted squared distance among planes through `xi`. When
/// the second eigenvalue is repeated the choice inside that eigenspace is
/// made by the moment matrix about the centroid, and the orthogonal choice is
/// returned as `alternate`.
pub fn best_fit_plane(sample: &PointSample, xi: &DVector<f64>, sigma: f64) -> Result<PlaneFit> {
    let idx = sample.in_ball(xi, sigma);
    if idx.is_empty() {
        return Err(Error::EmptyBall { radius: sigma });
    }
    let n = xi.len();
    let eig = SymmetricEigen::new(moments(sample, &idx, xi));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lambda: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    if idx.len() < 3 || !(lambda[1] > DEGENERATE_RATIO * lambda[0]) {
        return Err(Error::DegenerateCloud {
            lambda1: lambda[0],
            lambda2: lambda[1],
        });
    }
    let vec = |k: usize| -> DVector<f64> { eig.eigenvectors.column(order[k]).into_owned() };
    let v1 = vec(0);
    let ambiguous = n > 2 && lambda[1] < AMBIGUITY_RATIO * lambda[2];
    if !ambiguous {
        return Ok(PlaneFit {
            plane: Plane2::new(xi.clone(), &v1, &vec(1))?,
            eigenvalues: lambda,
            ambiguous,
            alternate: None,
            points: idx.len(),
            mass: idx.iter().map(|&i| sample.weights[i]).sum(),
        });
    }

    let mass: f64 = idx.iter().map(|&i| sample.weights[i]).sum();
    let centroid = idx
        .iter()
        .fold(DVector::zeros(n), |acc, &i| acc + &sample.points[i] * sample.weights[i])
        / mass;
    let c = moments(sample, &idx, &centroid);
    let (a, b) = (vec(1), vec(2));
    let block = Matrix2::new(
        a.dot(&(&c * &a)),
        a.dot(&(&c * &b)),
        b.dot(&(&c * &a)),
        b.dot(&(&c * &b)),
    );
    let e = nalgebra::SymmetricEigen::new(block);
    let top = if e.eigenvalues[0] >= e.eigenvalues[1] { 0 } else { 1 };
    let w = e.eigenvectors.column(top);
    let first = &a * w[0] + &b * w[1];
    let second = &a * (-w[1]) + &b * w[0];
    Ok(PlaneFit {
        plane: Plane2::new(xi.clone(), &v1, &first)?,
        eigenvalues: lambda,
        ambiguous,
        alternate: Some(Plane2::new(xi.clone(), &v1, &second)?),
        points: idx.len(),
        mass,
    })
}

/// `sum w d(x, T)^2` over the points of `idx`.
pub fn weighted_square_distance(sample: &PointSample, idx: &[usize], plane: &Plane2) -> f64 {
    idx.iter()
        .map(|&i| sample.weights[i] * plane.distance(&sample.points[i]).powi(2))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatness::sample::sample_surface;
    use crate::geom::{Registry, SurfaceParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(points: Vec<DVector<f64>>) -> PointSample {
        let n = points.len();
        PointSample {
            points,
            weights: vec![1.0; n],
            tangents: None,
            spacing: 0.0,
        }
    }

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    #[test]
    fn recovers_a_plane_exactly() {
        let p = Plane2::new(
            v(&[0.1, 0.2, 0.3, 0.0]),
            &v(&[1.0, 1.0, 0.0, 0.5]),
            &v(&[0.0, 1.0, -1.0, 2.0]),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = (0..200)
            .map(|_| p.point(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let fit = best_fit_plane(&cloud(pts), &p.base, 2.0).unwrap();
        let ang = fit.plane.principal_angles(&p);
        assert!(ang[1] < 1e-9, "{ang:?}");
        assert!(!fit.ambiguous);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let pts = (0..10).map(|i| v(&[i as f64 * 0.1, 0.0, 0.0])).collect();
        assert!(matches!(
            best_fit_plane(&cloud(pts), &v(&[0.0, 0.0, 0.0]), 2.0),
            Err(Error::DegenerateCloud { .. })
        ));
        assert!(matches!(
            best_fit_plane(&cloud(vec![]), &v(&[0.0, 0.0, 0.0]), 1.0),
            Err(Error::EmptyBall { .. })
        ));
    }

    #[test]
    fn sphere_cap_fits_the_tangent_plane() {
        let s = Registry::builtin().build("sphere", &SurfaceParams::new()).unwrap();
        let pole = v(&[0.0, 0.0, 1.0]);
        let smp = sample_surface(&s, &pole, 0.2, 0.005).unwrap();
        let fit = best_fit_plane(&smp, &pole, 0.2).unwrap();
        let tangent = Plane2::horizontal(pole.clone());
        assert!(fit.plane.principal_angles(&tangent)[1] < 0.05);
    }

    #[test]
    fn orthogonal_half_planes_give_a_bisector() {
        // {y >= 0, z = 0} and {z >= 0, y = 0}, meeting along the x-axis
        let mut pts = Vec::new();
        let n = 40;
        for i in 0..=n {
            for j in 0..=n {
                let (x, t) = (-1.0 + 2.0 * i as f64 / n as f64, j as f64 / n as f64);
                pts.push(v(&[x, t, 0.0]));
                if j > 0 {
                    pts.push(v(&[x, 0.0, t]));
                }
            }
        }
        let fit = best_fit_plane(&cloud(pts), &v(&[0.0, 0.0, 0.0]), 10.0).unwrap();
        assert!(fit.ambiguous);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bisectors = [
            Plane2::new(v(&[0.0; 3]), &v(&[1.0, 0.0, 0.0]), &v(&[0.0, s, s])).unwrap(),
            Plane2::new(v(&[0.0; 3]), &v(&[1.0, 0.0, 0.0]), &v(&[0.0, s, -s])).unwrap(),
        ];
        let near = |p: &Plane2| bisectors.iter().any(|b| p.principal_angles(b)[1] < 1e-6);
        assert!(near(&fit.plane) && near(fit.alternate.as_ref().unwrap()), "{fit:?}");
    }

    #[test]
    fn fitted_plane_beats_perturbations() {
        let s = Registry::builtin()
            .build("graph", &SurfaceParams::new().with("c", 0.4))
            .unwrap();
        let xi = v(&[0.1, 0.05, 0.4 * (0.01 - 0.0025)]);
        let smp = sample_surface(&s, &xi, 0.5, 0.02).unwrap();
        let idx = smp.in_ball(&xi, 0.5);
        let fit = best_fit_plane(&smp, &xi, 0.5).unwrap();
        let best = weighted_square_distance(&smp, &idx, &fit.plane);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let mut jitter = || {
                v(&[
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.1..0.1),
                ])
            };
            let (a, b) = (&fit.plane.frame[0] + jitter(), &fit.plane.frame[1] + jitter());
            let other = Plane2::new(xi.clone(), &a, &b).unwrap();
            assert!(weighted_square_distance(&smp, &idx, &other) >= best * (1.0 - 1e-12));
        }
    }
}
