use std::io::Write;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::fit::best_fit_plane;
use super::index::PlaneIndex;
use super::sample::{sample_surface, PointSample};
use super::tilt::tilt_excess;
use crate::error::{Error, Result};
use crate::geom::{Plane2, Surface};

/// Largest sample spacing accepted, relative to the scale.
pub const MAX_SPACING_RATIO: f64 = 0.05;
/// Spacing used by [`reifenberg_scan`] when sampling each ball.
pub const DEFAULT_SPACING_RATIO: f64 = 0.01;

/// Flatness numbers of one ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessReport {
    pub xi: Vec<f64>,
    pub sigma: f64,
    pub plane: Plane2,
    pub ambiguous: bool,
    pub alternate: Option<Plane2>,
    /// `E(xi, sigma, T)` for the fitted plane, when tangents are known.
    pub tilt_excess: Option<f64>,
    /// `sigma^-1 sup d(x, T)` over sample points in the ball.
    pub semi_reifenberg: f64,
    /// `sigma^-1 d_H(sample ∩ B, T ∩ B)`.
    pub reifenberg_two_sided: f64,
    /// Bound on the sampling error of both numbers, in the same units.
    pub hausdorff_error_bound: f64,
    pub points: usize,
}

/// Flatness of `sample` in `B_sigma(xi)`.
///
/// The two-sided number is the larger of the sample-to-plane sup and the
/// sup over a grid on the disk `T ∩ B_sigma` of the distance to the sample.
/// A sample point stands for a patch of diameter `spacing`, so its in-plane
/// offset from a grid point is reduced by half a spacing.
pub fn flatness_report(sample: &PointSample, xi: &DVector<f64>, sigma: f64) -> Result<FlatnessReport> {
    if sample.spacing > MAX_SPACING_RATIO * sigma {
        return Err(Error::SamplingTooCoarse {
            spacing: sample.spacing,
            scale: sigma,
        });
    }
    let fit = best_fit_plane(sample, xi, sigma)?;
    let t = &fit.plane;
    let idx = sample.in_ball(xi, sigma);
    let semi = idx.iter().map(|&i| t.distance(&sample.points[i])).fold(0.0, f64::max);

    let h = sample.spacing;
    let coords: Vec<[f64; 2]> = idx.iter().map(|&i| t.coords(&sample.points[i])).collect();
    let normals: Vec<f64> = idx.iter().map(|&i| t.distance(&sample.points[i])).collect();
    let index = PlaneIndex::new(&coords, h);
    let n = (sigma / h).ceil() as i64;
    let mut grid_sup: f64 = 0.0;
    for a in -n..=n {
        for b in -n..=n {
            let q = [a as f64 * h, b as f64 * h];
            if q[0].hypot(q[1]) > sigma {
                continue;
            }
            let d = |k: usize| {
                let p = (coords[k][0] - q[0]).hypot(coords[k][1] - q[1]);
                normals[k].hypot((p - 0.5 * h).max(0.0))
            };
            if let Some((_, dk)) = index.nearest(q, 0.5 * h, d) {
                grid_sup = grid_sup.max(dk);
            }
        }
    }

    let tilt = match sample.tangents {
        Some(_) => Some(tilt_excess(sample, xi, sigma, t)?.value),
        None => None,
    };
    Ok(FlatnessReport {
        xi: xi.iter().copied().collect(),
        sigma,
        plane: fit.plane.clone(),
        ambiguous: fit.ambiguous,
        alternate: fit.alternate,
        tilt_excess: tilt,
        semi_reifenberg: semi / sigma,
        reifenberg_two_sided: semi.max(grid_sup) / sigma,
        hausdorff_error_bound: h / sigma,
        points: idx.len(),
    })
}

/// Flatness at every `(center, scale)` pair, each ball sampled at
/// `spacing_ratio * scale`. Rows come back center-major in input order.
pub fn reifenberg_scan(
    surface: &Surface,
    centers: &[DVector<f64>],
    scales: &[f64],
    spacing_ratio: f64,
) -> Result<Vec<FlatnessReport>> {
    let jobs: Vec<(&DVector<f64>, f64)> = centers
        .iter()
        .flat_map(|c| scales.iter().map(move |&s| (c, s)))
        .collect();
    jobs.par_iter()
        .map(|&(c, s)| {
            let sample = sample_surface(surface, c, s, spacing_ratio * s)?;
            flatness_report(&sample, c, s)
        })
        .collect()
}

#[derive(Serialize)]
struct CsvRow<'a> {
    xi: &'a str,
    sigma: f64,
    #[serde(rename = "E")]
    e: Option<f64>,
    semi_eps: f64,
    eps: f64,
    err_bound: f64,
    ambiguous_flag: bool,
}

/// Write reports as CSV with columns `xi, sigma, E, semi_eps, eps, err_bound, ambiguous_flag`.
pub fn write_flatness_csv<W: Write>(reports: &[FlatnessReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        let xi = r.xi.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ");
        w.serialize(CsvRow {
            xi: &xi,
            sigma: r.sigma,
            e: r.tilt_excess,
            semi_eps: r.semi_reifenberg,
            eps: r.reifenberg_two_sided,
            err_bound: r.hausdorff_error_bound,
            ambiguous_flag: r.ambiguous,
        })?;
    }
    w.flush()?;
    Ok(())
}
