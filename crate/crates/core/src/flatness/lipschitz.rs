use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::index::PlaneIndex;
use super::sample::PointSample;
use crate::error::{Error, Result};
use crate::geom::Plane2;

/// A point of the good set written over the plane: in-plane coordinates and
/// the normal height `q(x - base)` in coframe coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphPoint {
    pub index: usize,
    pub coords: [f64; 2],
    pub height: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzDecomposition {
    pub plane: Plane2,
    pub sigma: f64,
    pub lip_parameter: f64,
    /// Sample indices satisfying the pairwise cone condition, in insertion order.
    pub good: Vec<usize>,
    pub bad: Vec<usize>,
    pub graph: Vec<GraphPoint>,
    /// `max |q(y - z)| / |p(y - z)|` over good pairs.
    pub measured_lip: f64,
    /// `l / sqrt(1 - l^2)`, implied by the cone condition.
    pub lip_bound: f64,
    pub ball_measure: f64,
    pub bad_measure: f64,
    /// Area of the disk grid over which the graph lies in the ball but no
    /// good point projects nearby.
    pub uncovered_area: f64,
    pub symmetric_difference: f64,
}

struct Split {
    p: [f64; 2],
    q: Vec<f64>,
}

fn split(plane: &Plane2, x: &DVector<f64>) -> Split {
    let d = x - &plane.base;
    Split {
        p: [plane.frame[0].dot(&d), plane.frame[1].dot(&d)],
        q: plane.coframe.iter().map(|n| n.dot(&d)).collect(),
    }
}

/// Squared in-plane and normal separations.
fn separation(a: &Split, b: &Split) -> (f64, f64) {
    let q2: f64 = a.q.iter().zip(&b.q).map(|(x, y)| (x - y).powi(2)).sum();
    let p2 = (a.p[0] - b.p[0]).powi(2) + (a.p[1] - b.p[1]).powi(2);
    (p2, q2)
}

/// `|q(y - z)| <= l |y - z|`.
fn cone_ok(a: &Split, b: &Split, l2: f64) -> bool {
    let (p2, q2) = separation(a, b);
    q2 <= l2 * (p2 + q2)
}

/// Split the sample in `B_sigma(xi)` into a Lipschitz graph over `plane` and
/// a remainder.
///
/// Points are visited by distance from `xi` (ties by index) and kept when the
/// `l`-cone condition holds against every point kept so far, so the first
/// point is the one nearest `xi` and the good set is maximal for this order.
pub fn lipschitz_decompose(
    sample: &PointSample,
    xi: &DVector<f64>,
    sigma: f64,
    plane: &Plane2,
    l: f64,
) -> Result<LipschitzDecomposition> {
    if !(l > 0.0 && l < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lipschitz parameter must lie in (0, 1), got {l}"
        )));
    }
    let plane = plane.through(xi.clone());
    let mut idx = sample.in_ball(xi, sigma);
    if idx.is_empty() {
        return Err(Error::EmptyBall { radius: sigma });
    }
    let dist: Vec<f64> = idx.iter().map(|&i| (&sample.points[i] - xi).norm()).collect();
    let mut order: Vec<usize> = (0..idx.len()).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(idx[a].cmp(&idx[b])));
    idx = order.iter().map(|&k| idx[k]).collect();

    let parts: Vec<Split> = idx.iter().map(|&i| split(&plane, &sample.points[i])).collect();
    let l2 = l * l;
    let mut good: Vec<usize> = Vec::new();
    let mut bad = Vec::new();
    for k in 0..idx.len() {
        let ok = good
            .par_chunks(512)
            .all(|c| c.iter().all(|&g| cone_ok(&parts[g], &parts[k], l2)));
        if ok {
            good.push(k);
        } else {
            bad.push(k);
        }
    }

    let measured_lip = good
        .par_iter()
        .enumerate()
        .map(|(a, &ga)| {
            good[a + 1..]
                .iter()
                .map(|&gb| {
                    let (p2, q2) = separation(&parts[ga], &parts[gb]);
                    if p2 > 0.0 {
                        (q2 / p2).sqrt()
                    } else if q2 > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);

    let h = sample.spacing;
    let good_coords: Vec<[f64; 2]> = good.iter().map(|&k| parts[k].p).collect();
    let index = PlaneIndex::new(&good_coords, h.max(1e-300));
    let n = (sigma / h).ceil() as i64;
    let mut uncovered = 0usize;
    for a in -n..=n {
        for b in -n..=n {
            let q = [a as f64 * h, b as f64 * h];
            if q[0].hypot(q[1]) > sigma {
                continue;
            }
            let near = index.nearest(q, 0.0, |j| (good_coords[j][0] - q[0]).hypot(good_coords[j][1] - q[1]));
            let Some((j, d)) = near else { continue };
            if d <= h {
                continue;
            }
            // lift with the nearest good height and keep it only inside the ball
            let height2: f64 = parts[good[j]].q.iter().map(|x| x * x).sum();
            if q[0] * q[0] + q[1] * q[1] + height2 < sigma * sigma {
                uncovered += 1;
            }
        }
    }

    let w = |k: &usize| sample.weights[idx[*k]];
    let ball_measure: f64 = (0..idx.len()).map(|k| w(&k)).sum();
    let bad_measure: f64 = bad.iter().map(w).sum();
    let uncovered_area = uncovered as f64 * h * h;
    Ok(LipschitzDecomposition {
        graph: good
            .iter()
            .map(|&k| GraphPoint {
                index: idx[k],
                coords: parts[k].p,
                height: parts[k].q.clone(),
            })
            .collect(),
        good: good.iter().map(|&k| idx[k]).collect(),
        bad: bad.iter().map(|&k| idx[k]).collect(),
        plane,
        sigma,
        lip_parameter: l,
        measured_lip,
        lip_bound: l / (1.0 - l2).sqrt(),
        ball_measure,
        bad_measure,
        uncovered_area,
        symmetric_difference: bad_measure + uncovered_area,
    })
}

/// Number of good pairs violating the cone condition, recomputed from the
/// raw points with the plane's own projections.
pub fn cone_violations(sample: &PointSample, d: &LipschitzDecomposition) -> usize {
    let l2 = d.lip_parameter.powi(2) * (1.0 + 1e-12);
    let [f0, f1] = &d.plane.frame;
    d.good
        .par_iter()
        .enumerate()
        .map(|(a, &i)| {
            let x = sample.points[i].as_slice();
            d.good[a + 1..]
                .iter()
                .filter(|&&j| {
                    let y = sample.points[j].as_slice();
                    let (mut n2, mut s0, mut s1) = (0.0, 0.0, 0.0);
                    for c in 0..x.len() {
                        let t = x[c] - y[c];
                        n2 += t * t;
                        s0 += f0[c] * t;
                        s1 += f1[c] * t;
                    }
                    // |q|^2 = |diff|^2 - |p(diff)|^2
                    n2 - s0 * s0 - s1 * s1 > l2 * n2
                })
                .count()
        })
        .sum()
}
