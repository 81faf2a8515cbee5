//! Adaptive integration of pointwise quantities over chart images clipped to
//! extrinsic regions (balls, annuli, slabs).
//!
//! Parameter cells are classified against the region from nine sample
//! images. Cells fully inside are integrated with adaptive 2x2 Gauss rules;
//! cells straddling a region boundary are split until their image is smaller
//! than `edge_tol * scale`, then clipped as polygons in parameter space (edge
//! crossings found by root finding) and integrated with a degree-4 triangle
//! rule plus a parabolic correction for the curved part of the boundary.
//! Top-level cells are processed in parallel and summed in a fixed order, so
//! results do not depend on the number of worker threads.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::chart::{Chart, EdgeKind, Param, ParamDomain, Side};
use crate::geom::local::LocalGeometry;
use crate::geom::plane2::Plane2;
use crate::geom::Surface;

/// One smooth inequality cutting out part of space.
#[derive(Debug, Clone)]
pub enum Constraint {
    /// `|x - center| < radius`.
    Ball { center: DVector<f64>, radius: f64 },
    /// `|x - center| > radius`.
    Outside { center: DVector<f64>, radius: f64 },
    /// `|q(x - base)| < width`, `q` the normal projection of `plane`.
    Slab { plane: Plane2, width: f64 },
}

impl Constraint {
    /// Signed, 1-Lipschitz in `x`; negative inside.
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let finite = x.iter().all(|c| c.is_finite());
        match self {
            Constraint::Ball { center, radius } => {
                if finite {
                    (x - center).norm() - radius
                } else {
                    f64::INFINITY
                }
            }
            Constraint::Outside { center, radius } => {
                if finite {
                    radius - (x - center).norm()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Constraint::Slab { plane, width } => {
                if finite {
                    plane.distance(x) - width
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn scale(&self) -> f64 {
        match self {
            Constraint::Ball { radius, .. } | Constraint::Outside { radius, .. } => *radius,
            Constraint::Slab { width, .. } => *width,
        }
    }
}

/// Intersection of constraints; the empty list is all of space.
#[derive(Debug, Clone, Default)]
pub struct Region {
    pub constraints: Vec<Constraint>,
}

impl Region {
    pub fn everywhere() -> Self {
        Region::default()
    }

    pub fn ball(center: &DVector<f64>, radius: f64) -> Self {
        Region {
            constraints: vec![Constraint::Ball {
                center: center.clone(),
                radius,
            }],
        }
    }

    /// `r_in < |x - center| < r_out`.
    pub fn annulus(center: &DVector<f64>, r_in: f64, r_out: f64) -> Self {
        Region::ball(center, r_out).and(Constraint::Outside {
            center: center.clone(),
            radius: r_in,
        })
    }

    pub fn and(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.constraints.iter().all(|c| c.value(x) < 0.0)
    }

    /// Largest ball radius among the constraints.
    pub fn outer_radius(&self) -> Option<f64> {
        self.constraints
            .iter()
            .filter_map(|c| match c {
                Constraint::Ball { radius, .. } => Some(*radius),
                _ => None,
            })
            .reduce(f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadOptions {
    /// Per-cell relative tolerance of the adaptive Gauss refinement.
    pub rel_tol: f64,
    /// Straddling cells are split until their image is below `edge_tol * scale`.
    pub edge_tol: f64,
    pub max_depth: usize,
    pub max_edge_depth: usize,
    /// Absolute floor on integrand values; cells whose refinement changes the
    /// result by less than `abs_tol * mu(cell)` are accepted.
    pub abs_tol: f64,
    /// Accept regions that reach a chart cutoff.
    pub allow_truncation: bool,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            edge_tol: 1e-2,
            max_depth: 24,
            max_edge_depth: 48,
            allow_truncation: false,
        }
    }
}

impl QuadOptions {
    pub fn truncating(mut self) -> Self {
        self.allow_truncation = true;
        self
    }
}

/// Scalar integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error: f64,
    pub cells: usize,
}

/// Several integrals over the same region, computed in one pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecQuadrature<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub cells: usize,
}

impl<const N: usize> VecQuadrature<N> {
    pub fn component(&self, i: usize) -> QuadratureResult {
        QuadratureResult {
            value: self.value[i],
            error: self.error[i],
            cells: self.cells,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Acc<const N: usize> {
    value: [f64; N],
    abs: [f64; N],
    error: [f64; N],
    cells: usize,
}

impl<const N: usize> Acc<N> {
    fn zero() -> Self {
        Acc {
            value: [0.0; N],
            abs: [0.0; N],
            error: [0.0; N],
            cells: 0,
        }
    }

    fn add(&mut self, o: &Acc<N>) {
        for i in 0..N {
            self.value[i] += o.value[i];
            self.abs[i] += o.abs[i];
            self.error[i] += o.error[i];
        }
        self.cells += o.cells;
    }
}

/// Rule value, sum of absolute contributions, and the cell's area.
type Rule<const N: usize> = ([f64; N], [f64; N], f64);

/// A parameter-space cell: axis-aligned rectangle or triangle.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Cell {
    Rect { u: (f64, f64), v: (f64, f64) },
    Tri([Param; 3]),
}

const G: f64 = 0.288_675_134_594_812_9; // 1 / (2 sqrt 3)

// Dunavant degree-4 rule on the reference triangle
const DUN_A: [(f64, f64); 2] = [
    (0.223_381_589_678_011, 0.445_948_490_915_965),
    (0.109_951_743_655_322, 0.091_576_213_509_771),
];

impl Cell {
    fn samples(&self) -> Vec<Param> {
        match *self {
            Cell::Rect { u, v } => {
                let mut s = Vec::with_capacity(9);
                for j in 0..3 {
                    for i in 0..3 {
                        s.push(Param::new(
                            u.0 + 0.5 * i as f64 * (u.1 - u.0),
                            v.0 + 0.5 * j as f64 * (v.1 - v.0),
                        ));
                    }
                }
                s
            }
            Cell::Tri([a, b, c]) => {
                let m = |p: Param, q: Param| Param::new(0.5 * (p.u + q.u), 0.5 * (p.v + q.v));
                vec![
                    a,
                    b,
                    c,
                    m(a, b),
                    m(b, c),
                    m(c, a),
                    Param::new((a.u + b.u + c.u) / 3.0, (a.v + b.v + c.v) / 3.0),
                ]
            }
        }
    }

    fn split(&self) -> [Cell; 4] {
        match *self {
            Cell::Rect { u, v } => {
                let um = 0.5 * (u.0 + u.1);
                let vm = 0.5 * (v.0 + v.1);
                [
                    Cell::Rect {
                        u: (u.0, um),
                        v: (v.0, vm),
                    },
                    Cell::Rect {
                        u: (um, u.1),
                        v: (v.0, vm),
                    },
                    Cell::Rect {
                        u: (u.0, um),
                        v: (vm, v.1),
                    },
                    Cell::Rect {
                        u: (um, u.1),
                        v: (vm, v.1),
                    },
                ]
            }
            Cell::Tri([a, b, c]) => {
                let m = |p: Param, q: Param| Param::new(0.5 * (p.u + q.u), 0.5 * (p.v + q.v));
                let (ab, bc, ca) = (m(a, b), m(b, c), m(c, a));
                [
                    Cell::Tri([a, ab, ca]),
                    Cell::Tri([ab, b, bc]),
                    Cell::Tri([ca, bc, c]),
                    Cell::Tri([ab, bc, ca]),
                ]
            }
        }
    }

    /// Halve only the long direction when the image of a rectangle is
    /// strongly anisotropic; `xs` are the images of [`Cell::samples`].
    fn split_along_image(&self, xs: &[DVector<f64>]) -> Vec<Cell> {
        if let Cell::Rect { .. } = self {
            if let Some(along_u) = image_anisotropy(xs) {
                return halves(self, along_u).to_vec();
            }
        }
        self.split().to_vec()
    }

    fn polygon(&self) -> Vec<Param> {
        match *self {
            Cell::Rect { u, v } => vec![
                Param::new(u.0, v.0),
                Param::new(u.1, v.0),
                Param::new(u.1, v.1),
                Param::new(u.0, v.1),
            ],
            Cell::Tri(t) => t.to_vec(),
        }
    }

    /// Base rule: 2x2 Gauss on rectangles, Dunavant on triangles.
    fn rule<const N: usize, F>(&self, chart: &dyn Chart, f: &F) -> Result<Rule<N>>
    where
        F: Fn(&LocalGeometry) -> [f64; N],
    {
        match *self {
            Cell::Rect { u, v } => {
                let (uc, vc) = (0.5 * (u.0 + u.1), 0.5 * (v.0 + v.1));
                let (du, dv) = (u.1 - u.0, v.1 - v.0);
                let w = 0.25 * du * dv;
                let mut val = [0.0; N];
                let mut abs = [0.0; N];
                let mut mu = 0.0;
                for (a, b) in [(-G, -G), (G, -G), (-G, G), (G, G)] {
                    let p = Param::new(uc + a * du, vc + b * dv);
                    let g = LocalGeometry::at(chart, p)?;
                    let y = f(&g);
                    mu += w * g.area_density;
                    for k in 0..N {
                        let t = w * y[k] * g.area_density;
                        val[k] += t;
                        abs[k] += t.abs();
                    }
                }
                Ok((val, abs, mu))
            }
            Cell::Tri(t) => triangle_rule(chart, &t, f),
        }
    }
}

fn triangle_rule<const N: usize, F>(chart: &dyn Chart, t: &[Param; 3], f: &F) -> Result<Rule<N>>
where
    F: Fn(&LocalGeometry) -> [f64; N],
{
    let [a, b, c] = *t;
    let area = 0.5 * ((b.u - a.u) * (c.v - a.v) - (c.u - a.u) * (b.v - a.v)).abs();
    let mut val = [0.0; N];
    let mut abs = [0.0; N];
    let mut mu = 0.0;
    if area == 0.0 {
        return Ok((val, abs, mu));
    }
    for (w, s) in DUN_A {
        let r = 1.0 - 2.0 * s;
        for (l0, l1, l2) in [(r, s, s), (s, r, s), (s, s, r)] {
            let p = Param::new(l0 * a.u + l1 * b.u + l2 * c.u, l0 * a.v + l1 * b.v + l2 * c.v);
            let g = LocalGeometry::at(chart, p)?;
            let y = f(&g);
            mu += w * area * g.area_density;
            for k in 0..N {
                let t = w * area * y[k] * g.area_density;
                val[k] += t;
                abs[k] += t.abs();
            }
        }
    }
    Ok((val, abs, mu))
}

/// Classification of a cell's image against a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Status {
    Inside,
    Outside,
    Straddle,
}

/// Diameter of a point set, skipping non-finite points.
pub(crate) fn image_diameter(xs: &[DVector<f64>]) -> f64 {
    let finite: Vec<&DVector<f64>> = xs.iter().filter(|x| x.iter().all(|c| c.is_finite())).collect();
    let mut d: f64 = 0.0;
    for i in 0..finite.len() {
        for j in i + 1..finite.len() {
            d = d.max((finite[i] - finite[j]).norm());
        }
    }
    d
}

/// Status of the cell and, for straddling cells, the smallest scale among
/// the constraints whose boundary passes through it.
pub(crate) fn classify(region: &Region, xs: &[DVector<f64>]) -> (Status, f64, f64) {
    let diam = image_diameter(xs);
    let slack = 0.25 * diam;
    let mut inside = true;
    let mut scale = f64::INFINITY;
    for c in &region.constraints {
        let vals: Vec<f64> = xs.iter().map(|x| c.value(x)).collect();
        if vals.iter().all(|&v| v > slack) {
            return (Status::Outside, diam, scale);
        }
        if !vals.iter().all(|&v| v < -slack) {
            inside = false;
            scale = scale.min(c.scale());
        }
    }
    (if inside { Status::Inside } else { Status::Straddle }, diam, scale)
}

struct Engine<'a, const N: usize, F> {
    chart: &'a dyn Chart,
    region: &'a Region,
    opts: &'a QuadOptions,
    f: &'a F,
}

impl<'a, const N: usize, F> Engine<'a, N, F>
where
    F: Fn(&LocalGeometry) -> [f64; N] + Sync,
{
    fn process(&self, cell: Cell, depth: usize) -> Result<Acc<N>> {
        if self.region.constraints.is_empty() {
            let r = cell.rule(self.chart, self.f)?;
            return self.refine(cell, r, 0);
        }
        let xs: Vec<DVector<f64>> = cell.samples().iter().map(|&p| self.chart.position(p)).collect();
        let (status, diam, scale) = classify(self.region, &xs);
        match status {
            Status::Outside => Ok(Acc::zero()),
            Status::Inside => {
                let r = cell.rule(self.chart, self.f)?;
                self.refine(cell, r, 0)
            }
            Status::Straddle => {
                // a boundary through a collapsed edge leaves no crossing on it, so
                // such cells shrink along the edge too, and their clip error is
                // measured against the clip of the four children
                let collapsed = touches_collapsed(&cell, self.chart.domain());
                if diam < self.opts.edge_tol * scale || depth >= self.opts.max_edge_depth {
                    if !collapsed {
                        return self.clip_leaf(&cell);
                    }
                    let coarse = self.clip_leaf(&cell)?;
                    let mut acc = Acc::zero();
                    for c in cell.split() {
                        acc.add(&self.clip_leaf(&c)?);
                    }
                    for i in 0..N {
                        acc.error[i] += (acc.value[i] - coarse.value[i]).abs();
                    }
                    Ok(acc)
                } else {
                    let kids = if collapsed {
                        cell.split().to_vec()
                    } else {
                        cell.split_along_image(&xs)
                    };
                    let mut acc = Acc::zero();
                    for c in kids {
                        acc.add(&self.process(c, depth + 1)?);
                    }
                    Ok(acc)
                }
            }
        }
    }

    /// Compare the parent rule with the sum over children; recurse where they disagree.
    fn refine(&self, cell: Cell, parent: Rule<N>, depth: usize) -> Result<Acc<N>> {
        let (parent, parent_abs, parent_mu) = parent;
        let kids = cell.split();
        let mut kid_rules = Vec::with_capacity(4);
        let mut sum = [0.0; N];
        let mut sum_abs = [0.0; N];
        let mut mu = 0.0;
        for k in &kids {
            let r = k.rule(self.chart, self.f)?;
            for i in 0..N {
                sum[i] += r.0[i];
                sum_abs[i] += r.1[i];
            }
            mu += r.2;
            kid_rules.push(r);
        }
        let floor = self.opts.abs_tol * mu.max(parent_mu);
        let mut converged = true;
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = (sum[i] - parent[i]).abs();
            if diff[i] > self.opts.rel_tol * sum_abs[i].max(parent_abs[i]) + floor {
                converged = false;
            }
        }
        if converged || depth >= self.opts.max_depth {
            let mut error = [0.0; N];
            for i in 0..N {
                // roundoff floor keeps identity checks honest when diff is exactly 0
                error[i] = diff[i] + 4.0 * f64::EPSILON * sum_abs[i];
            }
            return Ok(Acc {
                value: sum,
                abs: sum_abs,
                error,
                cells: 4,
            });
        }
        let mut acc = Acc::zero();
        match anisotropy(&cell, self.chart) {
            Some(along_u) => {
                // halves inherit the composite rule of their two quarters
                let pairs = if along_u { [(0, 2), (1, 3)] } else { [(0, 1), (2, 3)] };
                for (half, (a, b)) in halves(&cell, along_u).into_iter().zip(pairs) {
                    let (ra, rb) = (&kid_rules[a], &kid_rules[b]);
                    let mut v = [0.0; N];
                    let mut s = [0.0; N];
                    for i in 0..N {
                        v[i] = ra.0[i] + rb.0[i];
                        s[i] = ra.1[i] + rb.1[i];
                    }
                    acc.add(&self.refine(half, (v, s, ra.2 + rb.2), depth + 1)?);
                }
            }
            None => {
                for (k, r) in kids.iter().zip(kid_rules) {
                    acc.add(&self.refine(*k, r, depth + 1)?);
                }
            }
        }
        Ok(acc)
    }

    fn phi(&self, c: &Constraint, p: Param) -> f64 {
        c.value(&self.chart.position(p))
    }

    fn clip_leaf(&self, cell: &Cell) -> Result<Acc<N>> {
        let mut poly = cell.polygon();
        let mut chords: Vec<(usize, Param, Param)> = Vec::new();
        for (ci, c) in self.region.constraints.iter().enumerate() {
            if poly.len() < 3 {
                break;
            }
            let vals: Vec<f64> = poly.iter().map(|&p| self.phi(c, p)).collect();
            let n = poly.len();
            let mut out: Vec<Param> = Vec::with_capacity(n + 2);
            // (index in `out`, is_exit)
            let mut crossings: Vec<(usize, bool)> = Vec::new();
            for i in 0..n {
                let (a, b) = (poly[i], poly[(i + 1) % n]);
                let (fa, fb) = (vals[i], vals[(i + 1) % n]);
                let ina = fa < 0.0;
                let inb = fb < 0.0;
                if ina {
                    out.push(a);
                }
                if ina != inb {
                    let p = self.crossing(c, a, b, fa, fb);
                    crossings.push((out.len(), ina));
                    out.push(p);
                }
            }
            // an exit crossing followed (cyclically) by an entry crossing bounds a chord
            for (k, &(idx, exit)) in crossings.iter().enumerate() {
                if !exit {
                    continue;
                }
                let (nidx, nexit) = crossings[(k + 1) % crossings.len()];
                if !nexit && (idx + 1) % out.len() == nidx {
                    chords.push((ci, out[idx], out[nidx]));
                }
            }
            poly = out;
        }

        let mut acc = Acc::zero();
        acc.cells = 1;
        if poly.len() < 3 {
            // the polygon vanished but a boundary arc may still bulge into the cell
        } else {
            let mut coarse = [0.0; N];
            for k in 1..poly.len() - 1 {
                let t = [poly[0], poly[k], poly[k + 1]];
                let (v, a, _) = triangle_rule(self.chart, &t, self.f)?;
                let area = tri_area(&t);
                let cen = Param::new((t[0].u + t[1].u + t[2].u) / 3.0, (t[0].v + t[1].v + t[2].v) / 3.0);
                if area > 0.0 {
                    let g = LocalGeometry::at(self.chart, cen)?;
                    let y = (self.f)(&g);
                    for i in 0..N {
                        coarse[i] += area * y[i] * g.area_density;
                    }
                }
                for i in 0..N {
                    acc.value[i] += v[i];
                    acc.abs[i] += a[i];
                }
            }
            for i in 0..N {
                acc.error[i] += (acc.value[i] - coarse[i]).abs();
            }
        }
        for (ci, p, q) in chords {
            let c = &self.region.constraints[ci];
            let (corr, unc) = self.sliver(c, p, q)?;
            for i in 0..N {
                acc.value[i] += corr[i];
                acc.abs[i] += corr[i].abs();
                acc.error[i] += unc[i];
            }
        }
        Ok(acc)
    }

    /// Root of `phi` on the segment `a -> b` (signs of `fa`, `fb` differ).
    fn crossing(&self, c: &Constraint, a: Param, b: Param, fa: f64, fb: f64) -> Param {
        let at = |t: f64| Param::new(a.u + t * (b.u - a.u), a.v + t * (b.v - a.v));
        let (mut t0, mut t1, mut f0, mut f1) = (0.0, 1.0, fa, fb);
        let mut side = 0i8;
        let mut prev = f64::NAN;
        for _ in 0..80 {
            let t = if f0.is_finite() && f1.is_finite() && f1 != f0 {
                let t = (t0 * f1 - t1 * f0) / (f1 - f0);
                if t > t0 && t < t1 {
                    t
                } else {
                    0.5 * (t0 + t1)
                }
            } else {
                0.5 * (t0 + t1)
            };
            if (t - prev).abs() < 1e-13 || t1 - t0 < 1e-13 {
                return at(t);
            }
            prev = t;
            let ft = self.phi(c, at(t));
            if ft == 0.0 {
                return at(t);
            }
            // Illinois: halve the stale endpoint when the same side repeats
            if (ft < 0.0) == (f0 < 0.0) {
                t0 = t;
                f0 = ft;
                if side == -1 {
                    f1 *= 0.5;
                }
                side = -1;
            } else {
                t1 = t;
                f1 = ft;
                if side == 1 {
                    f0 *= 0.5;
                }
                side = 1;
            }
        }
        at(0.5 * (t0 + t1))
    }

    /// Integral over the thin region between a chord and the true boundary
    /// curve, modelled as a parabolic segment.
    fn sliver(&self, c: &Constraint, p: Param, q: Param) -> Result<([f64; N], [f64; N])> {
        let zero = ([0.0; N], [0.0; N]);
        let (du, dv) = (q.u - p.u, q.v - p.v);
        let len = du.hypot(dv);
        if len == 0.0 {
            return Ok(zero);
        }
        let m = Param::new(0.5 * (p.u + q.u), 0.5 * (p.v + q.v));
        let mut n = (-dv / len, du / len);
        let eps = 0.25 * len;
        let off = |s: f64, n: (f64, f64)| Param::new(m.u + s * n.0, m.v + s * n.1);
        let fm = self.phi(c, m);
        let fp = self.phi(c, off(eps, n));
        let fq = self.phi(c, off(-eps, n));
        let mut slope = (fp - fq) / (2.0 * eps);
        if !(fm.is_finite() && slope.is_finite()) || slope == 0.0 {
            return Ok(zero);
        }
        if slope < 0.0 {
            n = (-n.0, -n.1);
            slope = -slope;
        }
        // s > 0: the inside region extends past the chord
        let sag = |base: Param| -> f64 {
            let at = |s: f64| Param::new(base.u + s * n.0, base.v + s * n.1);
            let mut s = -self.phi(c, base) / slope;
            let f1 = self.phi(c, at(s));
            if f1.is_finite() {
                s -= f1 / slope;
            }
            s
        };
        let s = sag(m);
        if !s.is_finite() || s.abs() > len {
            return Ok(zero);
        }
        let s1 = sag(Param::new(p.u + 0.25 * du, p.v + 0.25 * dv));
        let s3 = sag(Param::new(p.u + 0.75 * du, p.v + 0.75 * dv));
        let parabola = 2.0 / 3.0 * len * s;
        let (area, model_err) = if s1.is_finite() && s3.is_finite() && s1.abs() <= len && s3.abs() <= len {
            let simpson = len / 12.0 * (4.0 * s1 + 2.0 * s + 4.0 * s3);
            (simpson, (simpson - parabola).abs())
        } else {
            (parabola, 0.1 * parabola.abs())
        };
        let g = match LocalGeometry::at(self.chart, off(0.4 * s, n)) {
            Ok(g) => g,
            Err(_) => return Ok(zero),
        };
        let y = (self.f)(&g);
        let mut val = [0.0; N];
        let mut unc = [0.0; N];
        for i in 0..N {
            val[i] = area * y[i] * g.area_density;
            unc[i] = (model_err * y[i] * g.area_density).abs() + 1e-3 * val[i].abs();
        }
        Ok((val, unc))
    }
}

/// `Some(true)` when the image of a rectangle (its 3x3 sample images) is more
/// than twice as long in `u` as in `v`, `Some(false)` for the reverse.
fn image_anisotropy(xs: &[DVector<f64>]) -> Option<bool> {
    let ext = |a: usize, b: usize| (&xs[a] - &xs[b]).norm();
    let eu = (0..3).map(|j| ext(3 * j + 2, 3 * j)).fold(0.0, f64::max);
    let ev = (0..3).map(|i| ext(6 + i, i)).fold(0.0, f64::max);
    if !(eu.is_finite() && ev.is_finite()) {
        None
    } else if eu > 2.0 * ev {
        Some(true)
    } else if ev > 2.0 * eu {
        Some(false)
    } else {
        None
    }
}

fn anisotropy(cell: &Cell, chart: &dyn Chart) -> Option<bool> {
    let Cell::Rect { .. } = cell else {
        return None;
    };
    let xs: Vec<DVector<f64>> = cell.samples().iter().map(|&p| chart.position(p)).collect();
    image_anisotropy(&xs)
}

fn touches_collapsed(cell: &Cell, dom: &ParamDomain) -> bool {
    let Cell::Rect { u, v } = *cell else {
        return false;
    };
    let at = [u.0 == dom.u.0, u.1 == dom.u.1, v.0 == dom.v.0, v.1 == dom.v.1];
    at.iter()
        .zip(&dom.edges)
        .any(|(&on, &e)| on && e == EdgeKind::Collapsed)
}

fn halves(cell: &Cell, along_u: bool) -> [Cell; 2] {
    let Cell::Rect { u, v } = *cell else {
        unreachable!("only rectangles are split in halves")
    };
    if along_u {
        let m = 0.5 * (u.0 + u.1);
        [Cell::Rect { u: (u.0, m), v }, Cell::Rect { u: (m, u.1), v }]
    } else {
        let m = 0.5 * (v.0 + v.1);
        [Cell::Rect { u, v: (v.0, m) }, Cell::Rect { u, v: (m, v.1) }]
    }
}

fn tri_area(t: &[Param; 3]) -> f64 {
    let [a, b, c] = *t;
    0.5 * ((b.u - a.u) * (c.v - a.v) - (c.u - a.u) * (b.v - a.v)).abs()
}

fn top_cells(chart: &dyn Chart) -> Vec<Cell> {
    let d = chart.domain();
    let (nu, nv) = d.grid;
    let mut cells = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let p0 = d.lerp(i as f64 / nu as f64, j as f64 / nv as f64);
            let p1 = d.lerp((i + 1) as f64 / nu as f64, (j + 1) as f64 / nv as f64);
            cells.push(Cell::Rect {
                u: (p0.u, p1.u),
                v: (p0.v, p1.v),
            });
        }
    }
    cells
}

/// Reject regions that reach an artificial truncation of the surface.
pub fn check_truncation(surface: &Surface, region: &Region) -> Result<()> {
    if region.constraints.is_empty() {
        // the whole chart is requested, cutoff included by definition
        return Ok(());
    }
    for chart in &surface.charts {
        let d = chart.domain();
        for side in Side::ALL {
            if d.edge(side) != EdgeKind::Cutoff {
                continue;
            }
            let (a, b) = d.side_segment(side);
            let n = 2048;
            for k in 0..=n {
                let t = k as f64 / n as f64;
                let p = Param::new(a.u + t * (b.u - a.u), a.v + t * (b.v - a.v));
                if region.contains(&chart.position(p)) {
                    return Err(Error::TruncationUnsound {
                        radius: region.outer_radius().unwrap_or(f64::INFINITY),
                        cutoff: surface.cutoff,
                    });
                }
            }
        }
    }
    Ok(())
}

fn finish<const N: usize>(acc: Acc<N>) -> VecQuadrature<N> {
    let mut error = acc.error;
    for i in 0..N {
        error[i] += 1e-14 * acc.abs[i];
    }
    VecQuadrature {
        value: acc.value,
        error,
        cells: acc.cells,
    }
}

/// Integrate `N` pointwise quantities `f` against `dmu` over `surface ∩ region`.
pub fn integrate<const N: usize, F>(
    surface: &Surface,
    region: &Region,
    opts: &QuadOptions,
    f: F,
) -> Result<VecQuadrature<N>>
where
    F: Fn(&LocalGeometry) -> [f64; N] + Sync,
{
    if !opts.allow_truncation {
        check_truncation(surface, region)?;
    }
    let mut total = Acc::zero();
    for chart in &surface.charts {
        let engine = Engine {
            chart: chart.as_ref(),
            region,
            opts,
            f: &f,
        };
        let parts: Vec<Result<Acc<N>>> = top_cells(chart.as_ref())
            .into_par_iter()
            .map(|c| engine.process(c, 0))
            .collect();
        for p in parts {
            total.add(&p?);
        }
    }
    Ok(finish(total))
}

pub fn integrate_scalar<F>(surface: &Surface, region: &Region, opts: &QuadOptions, f: F) -> Result<QuadratureResult>
where
    F: Fn(&LocalGeometry) -> f64 + Sync,
{
    Ok(integrate(surface, region, opts, |g| [f(g)])?.component(0))
}

/// Integrate over parameter triangles of one chart (used for mesh faces).
pub fn integrate_triangles<const N: usize, F>(
    chart: &dyn Chart,
    triangles: &[[Param; 3]],
    region: &Region,
    opts: &QuadOptions,
    f: F,
) -> Result<VecQuadrature<N>>
where
    F: Fn(&LocalGeometry) -> [f64; N] + Sync,
{
    let engine = Engine {
        chart,
        region,
        opts,
        f: &f,
    };
    let parts: Vec<Result<Acc<N>>> = triangles.par_iter().map(|t| engine.process(Cell::Tri(*t), 0)).collect();
    let mut total = Acc::zero();
    for p in parts {
        total.add(&p?);
    }
    Ok(finish(total))
}

/// `mu(surface ∩ region)`.
pub fn area(surface: &Surface, region: &Region, opts: &QuadOptions) -> Result<QuadratureResult> {
    integrate_scalar(surface, region, opts, |_| 1.0)
}
