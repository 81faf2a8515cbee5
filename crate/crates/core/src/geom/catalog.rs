//! Named surfaces, each built from one or more analytic charts.
//!
//! Non-compact entries are truncated at an extrinsic radius `cutoff`; the
//! charts cover the surface completely inside the ball of that radius
//! around the origin. Factories are registered by name in a [`Registry`] so
//! front ends can pick a surface at runtime.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use serde::Serialize;

use super::chart::{AnalyticChart, AnalyticMap, ChartRef, EdgeKind, ParamDomain};
use crate::error::{Error, Result};
use crate::jet::Real;

use EdgeKind::{Boundary, Collapsed, Cutoff, Glued, Seam};

/// Analytically known values attached to a catalog entry.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct KnownValues {
    pub theta_infinity: Option<f64>,
    pub ends: Option<usize>,
    pub willmore: Option<f64>,
    pub total_curvature: Option<f64>,
    pub genus: Option<usize>,
    pub minimal: bool,
    pub compact: bool,
}

/// A surface given by charts, with the parameters it was built from.
#[derive(Debug, Clone)]
pub struct Surface {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub charts: Vec<ChartRef>,
    /// Extrinsic radius about the origin inside which the charts are complete.
    pub cutoff: Option<f64>,
    pub known: KnownValues,
}

impl Surface {
    pub fn new(name: impl Into<String>, charts: Vec<ChartRef>) -> Self {
        Surface {
            name: name.into(),
            params: BTreeMap::new(),
            charts,
            cutoff: None,
            known: KnownValues::default(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.charts.first().map_or(3, |c| c.ambient_dim())
    }

    pub fn is_compact(&self) -> bool {
        self.known.compact
    }
}

/// Numeric parameters keyed by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SurfaceParams(pub BTreeMap<String, f64>);

impl SurfaceParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.0.insert(key.to_string(), value);
    }

    /// Parse `a=1,cutoff=500`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut p = SurfaceParams::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got '{item}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("'{v}' is not a number")))?;
            p.set(k.trim(), v);
        }
        Ok(p)
    }

    fn resolve(&self, defaults: &[(&str, f64)]) -> Result<BTreeMap<String, f64>> {
        for k in self.0.keys() {
            if !defaults.iter().any(|(d, _)| d == k) {
                let known: Vec<&str> = defaults.iter().map(|(d, _)| *d).collect();
                return Err(Error::InvalidParameter(format!(
                    "unknown parameter '{k}' (accepted: {})",
                    known.join(", ")
                )));
            }
        }
        Ok(defaults
            .iter()
            .map(|(k, d)| (k.to_string(), self.0.get(*k).copied().unwrap_or(*d)))
            .collect())
    }
}

/// Builds a [`Surface`] from named parameters.
pub trait SurfaceFactory: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn defaults(&self) -> &'static [(&'static str, f64)];
    fn build(&self, p: &BTreeMap<String, f64>) -> Result<Surface>;
}

/// Name-to-factory lookup.
#[derive(Clone, Default)]
pub struct Registry {
    factories: BTreeMap<&'static str, Arc<dyn SurfaceFactory>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn builtin() -> Self {
        let mut r = Registry::empty();
        r.register(Arc::new(PlaneFactory));
        r.register(Arc::new(SphereFactory));
        r.register(Arc::new(CatenoidFactory));
        r.register(Arc::new(EnneperFactory));
        r.register(Arc::new(ScherkFactory));
        r.register(Arc::new(GraphFactory));
        r.register(Arc::new(ConeFactory));
        r.register(Arc::new(TorusFactory));
        r
    }

    pub fn register(&mut self, f: Arc<dyn SurfaceFactory>) {
        self.factories.insert(f.name(), f);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&Arc<dyn SurfaceFactory>> {
        self.factories
            .get(name)
            .ok_or_else(|| Error::UnknownSurface(name.to_string()))
    }

    pub fn build(&self, name: &str, params: &SurfaceParams) -> Result<Surface> {
        let f = self.get(name)?;
        let resolved = params.resolve(f.defaults())?;
        let mut s = f.build(&resolved)?;
        s.params = resolved;
        Ok(s)
    }
}

fn positive(p: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    let v = p[key];
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{key} must be positive, got {v}")))
    }
}

fn ambient(p: &BTreeMap<String, f64>) -> Result<usize> {
    let d = p["dim"];
    if d.fract() == 0.0 && (3.0..=8.0).contains(&d) {
        Ok(d as usize)
    } else {
        Err(Error::InvalidParameter(format!(
            "dim must be an integer in 3..=8, got {d}"
        )))
    }
}

fn flag(p: &BTreeMap<String, f64>, key: &str) -> bool {
    p[key] != 0.0
}

/// Smallest root of an increasing function on `[lo, hi]` by bisection.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------- plane

/// `(u, v cos a, d + v sin a, 0, ...)`.
#[derive(Debug, Clone)]
pub struct PlaneMap {
    pub offset: f64,
    pub tilt: f64,
    pub dim: usize,
}

impl AnalyticMap for PlaneMap {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval<S: Real>(&self, u: S, v: S, out: &mut [S]) {
        out[0] = u;
        out[1] = v * self.tilt.cos();
        out[2] = v * self.tilt.sin() + self.offset;
        for o in out.iter_mut().skip(3) {
            *o = S::cst(0.0);
        }
    }
}

struct PlaneFactory;

impl SurfaceFactory for PlaneFactory {
    fn name(&self) -> &'static str {
        "plane"
    }
    fn summary(&self) -> &'static str {
        "affine plane at height `offset`, tilted by `tilt` radians about the x-axis, on [-extent, extent]^2"
    }
    fn defaults(&self) -> &'static [(&'static str, f64)] {
        &[("offset", 0.0), ("tilt", 0.0), ("extent", 2000.0), ("dim", 3.0)]
    }
    fn build(&self, p: &BTreeMap<String, f64>) -> Result<Surface> {
        let l = positive(p, "extent")?;
        let map = PlaneMap {
            offset: p["offset"],
            tilt: p["tilt"],
            dim: ambient(p)?,
        };
        let dom = ParamDomain::new((-l, l), (-l, l), [Cutoff; 4]).with_grid(8, 8);
        let mut s = Surface::new("plane", vec![Arc::new(AnalyticChart::new("plane", map, dom))]);
        s.cutoff = Some((l - p["offset"].abs()).max(0.0));
        s.known = KnownValues {
            theta_infinity: Some(1.0),
            ends: Some(1),
            willmore: Some(0.0),
            total_curvature: Some(0.0),
            genus: Some(0),
            minimal: true,
            compact: false,
        };
        Ok(s)
    }
}

// ---------------------------------------------------------------- sphere

/// Polar chart `c + R (sin u cos v, sin u sin v, cos u)`.
#[derive(Debug, Clone)]
pub struct SphereMap {
    pub radius: f64,
    pub center: [f64; 3],
}

impl AnalyticMap for SphereMap {
    fn dim(&self) -> usize {
        3
    }
    fn eval<S: Real>(&self, u: S, v: S, out: &mut [S]) {
        let r = self.radius;
        let su = u.sin();
        out[0] = su * v.cos() * r + self.center[0];
        out[1] = su * v.sin() * r + self.center[1];
        out[2] = u.cos() * r + self.center[2];
    }
}

pub fn sphere_chart(radius: f64, center: [f64; 3]) -> ChartRef {
    let dom = ParamDomain::new((0.0, PI), (0.0, TAU), [Collapsed, Collapsed, Seam, Seam]).with_grid(16, 32);
    Arc::new(AnalyticChart::new("sphere", SphereMap { radius, center }, dom))
}

struct SphereFactory;

impl SurfaceFactory for SphereFactory {
    fn name(&self) -> &'static str {
        "sphere"
    }
    fn summary(&self) -> &'static str {
        "round sphere of radius R centered at (cx, cy, cz)"
    }
    fn defaults(&self) -> &'static [(&'static str, f64)] {
        &[("R", 1.0), ("cx", 0.0), ("cy", 0.0), ("cz", 0.0)]
    }
    fn build(&self, p: &BTreeMap<String, f64>) -> Result<Surface> {
        let r = positive(p, "R")?;
        let mut s = Surface::new("sphere", vec![sphere_chart(r, [p["cx"], p["cy"], p["cz"]])]);
        s.known = KnownValues {
            theta_infinity: Some(0.0),
            ends: Some(0),
            willmore: Some(16.0 * PI),
            total_curvature: Some(8.0 * PI),
            genus: Some(0),
            minimal: false,
            compact: true,
        };
        Ok(s)
    }
}

// ---------------------------------------------------------------- catenoid

/// `(a cosh(v/a) cos u, a cosh(v/a) sin u, v)`.
#[derive(Debug, Clone)]
pub struct CatenoidMap {
    pub neck: f64,
}

impl AnalyticMap for CatenoidMap {
    fn dim(&self) -> usize {
        3
    }
    fn eval<S: Real>(&self, u: S, v: S, out: &mut [S]) {
        let a = self.neck;
        let rho = (v / a).cosh() * a;
        out[0] = rho * u.cos();
        out[1] = rho * u.sin();
        out[2] = v;
    }
}

/// Height `V` at which the catenoid leaves the ball of radius `r`.
pub fn catenoid_height(neck: f64, r: f64) -> f64 {
    if r <= neck {
        return 0.0;
    }
    bisect(0.0, r, |v| {
        let c = neck * (v / neck).cosh();
        c * c + v * v - r * r
    })
}

pub fn catenoid_chart(neck: f64, cutoff: f64, upper_half: bool) -> ChartRef {
    let vmax = catenoid_height(neck, cutoff);
    let (v0, e0) = if upper_half { (0.0, Boundary) } else { (-vmax, Cutoff) };
    let nv = (((vmax - v0) / (0.5 * neck)).ceil() as usize).clamp(4, 64);
    let dom = ParamDomain::new((0.0, TAU), (v0, vmax), [Seam, Seam, e0, Cutoff]).with_grid(16, nv);
    Arc::new(AnalyticChart::new("catenoid", CatenoidMap { neck }, dom))
}

struct CatenoidFactory;

impl SurfaceFactory for CatenoidFactory {
    fn name(&self) -> &'static str {
        "catenoid"
    }
    fn summary(&self) -> &'static str {
        "catenoid with neck radius a, truncated at extrinsic radius cutoff; half=1 keeps the upper end only"
    }
    fn defaults(&self) -> &'static [(&'static str, f64)] {
        &[("a", 1.0), ("cutoff", 4000.0), ("half", 0.0)]
    }
    fn build(&self, p: &BTreeMap<String, f64>) -> Result<Surface> {
        let a = positive(p, "a")?;
        let rc = positive(p, "cutoff")?;
        if rc <= 2.0 * a {
            return Err(Error::InvalidParameter("cutoff must exceed twice the neck".into()));
        }
        let half = flag(p, "half");
        let mut s = Surface::new("catenoid", vec![catenoid_chart(a, rc, half)]);
        s.cutoff = Some(rc);
        s.known = KnownValues {
            theta_infinity: Some(if half { 1.0 } else { 2.0 }),
            ends: Some(if half { 1 } else { 2 }),
            willmore: Some(0.0),
            total_curvature: Some(if half { 4.0 * PI } else { 8.0 * PI }),
            genus: Some(0),
            minimal: true,
            compact: false,
        };
        Ok(s)
    }
}

// ---------------------------------------------------------------- Enneper

/// Enneper's surface in polar coordinates `z = rho e^{i theta}`:
/// `(Re(z - z^3/3), -Im(z + z^3/3), Re z^2)`.
#[derive(Debug, Clone)]
pub struct EnneperMap;

impl AnalyticMap for EnneperMap {
    fn dim(&self) -> usize {
        3
    }
    fn eval<S: Real>(&self, rho: S, th: S, out: &mut [S]) {
        let r3 = rho * rho * rho / 3.0;
        let t3 = th * 3.0;
        out[0] = rho * th.cos() - r3 * t3.cos();
        out[1] = -(rho * th.sin()) - r3 * t3.sin();
        out[2] = rho * rho * (th * 2.0).cos();
    }
}

/// Parameter radius beyond which every point of Enneper's surface lies outside `B_r(0)`.
pub fn enneper_rho(r: f64) -> f64 {
    let min_norm = |rho: f64| {
        (0..720)
            .map(|i| {
                let mut out = [0.0; 3];
                EnneperMap.eval(rho, i as f64 * TAU / 720.0, &mut out);
                (out[0] * out[0] + out[1] * out[1] + out[2] * out[2]).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    };
    // |f| >= rho^3/3 - rho, so this bracket always contains the crossing
    let hi = (3.0 * r).cbrt() + 2.0;
    bisect(0.0, hi, |rho| min_norm(rho) - r) * (1.0 + 1e-6)
}

struct EnneperFactory;

impl SurfaceFactory for EnneperFactory {
    fn name(&self) -> &'static str {
        "enneper"
    }
    fn summary(&self) -> &'static str {
        "Enneper's minimal surface truncated at extrinsic radius cutoff"
    }
    fn defaults(&self) -> &'static [(&'static str, f64)] {
        &[("cutoff", 4000.0)]
    }
    fn build(&self, p: &BTreeMap<String, f64>) -> Result<Surface> {
        let rc = positive(p, "cutoff")?;
        let pmax = enneper_rho(rc);
        let nr = ((pmax / 0.5).ceil() as usize).clamp(8, 64);
        let dom = ParamDomain::new((0.0, pmax), (0.0, TAU), [Collapsed, Cutoff, Seam, Seam]).with_grid(nr, 48);
        let mut s = Surface::new(
            "enneper",
            vec![Arc::new(AnalyticChart::new("enneper", EnneperMap, dom))],
        );
        s.cutoff = Some(rc);
        s.known = KnownValues {
            theta_infinity: Some(3.0),
            ends: Some(1),
            willmore: Some(0.0),
            total_curvature: Some(8.0 * PI),
            genus: Some(0),
            minimal: true,
            compact: false,
        };
        Ok(s)
    }
}

// ---------------------------------------------------------------- Scherk

/// `asinh(1)`: half-width of the central column of Scherk's surface.
pub fn scherk_core_half_width() -> f64 {
    1f64.asinh()
}

/// One of the four wings of `sin z = sinh x sinh y`, written as a graph over
/// the `(x, z)` or `(y, z)` half-plane: `(t, z) -> (s t, asinh(sin z / sinh(s t)), z)`.
#[derive(Debug, Clone)]
pub struct ScherkWing {
    pub sign: f64,
    /// Wing along the y-axis instead of the x-axis.
    pub along_y: bool,
}

impl AnalyticMap for ScherkWing {
    fn dim(&self) -> usize {
        3
    }
    fn eval<S: Real>(&self, t: S, z: S, out: &mut [S]) {
        let a = t * self.sign;
        let b = (z.sin() / a.sinh()).asinh();
        let (i, j) = if self.along_y { (1, 0) } else { (0, 1) };
        out[i] = a;
        out[j] = b;
        out[2] = z;
    }
}

/// Sheet of the central column over `[-asinh 1, asinh 1]^2`:
/// `z = asin(sinh x sinh y) + 2 pi k` or `pi - asin(...) + 2 pi k`.
#[derive(Debug, Clone)]
pub struct ScherkCore {
    pub upper: bool,
    pub period: i64,
}

impl AnalyticMap for ScherkCore {
    fn dim(&self) -> usize {
        3
    }
    fn eval<S: Real>(&self, x: S, y: S, out: &mut [S]) {
        let s = (x.sinh() * y.sinh()).asin();
        let shift = TAU * self.period as f64;
        out[0] = x;
        out[1] = y;
        out[2] = if self.upper { -s + (PI + shift) } else { s + shift };
    }
}

pub fn scherk_charts(cutoff: f64) -> Vec<ChartRef> {
    let a = scherk_core_half_width();
    let periods = ((cutoff + FRAC_PI_2) / TAU).ceil() as i64;
    let z0 = -FRAC_PI_2 - TAU * periods as f64;
    let z1 = -FRAC_PI_2 + TAU * periods as f64;
    let nz = (8 * periods as usize).max(8);
    let nt = (((cutoff - a) / 1.0).ceil() as usize).clamp(4, 64);
    let mut charts: Vec<ChartRef> = Vec::new();
    for (along_y, sign, label) in [
        (false, 1.0, "scherk wing +x"),
        (false, -1.0, "scherk wing -x"),
        (true, 1.0, "scherk wing +y"),
        (true, -1.0, "scherk wing -y"),
    ] {
        let dom = ParamDomain::new((a, cutoff), (z0, z1), [Glued, Cutoff, Cutoff, Cutoff]).with_grid(nt, nz);
        charts.push(Arc::new(AnalyticChart::new(label, ScherkWing { sign, along_y }, dom)));
    }
    for k in -periods..periods {
        for upper in [false, true] {
            let dom = ParamDomain::new((-a, a), (-a, a), [Glued; 4]).with_grid(4, 4);
            let label = if upper {
                "scherk core upper"
            } else {
                "scherk core lower"
            };
            charts.push(Arc::new(AnalyticChart::new(
                label,
                ScherkCore { upper, period: k },
                dom,
            )));
        }
    }
    charts
}

struct ScherkFactory;

impl SurfaceFactory for ScherkFactory {
    fn name(&self) -> &'static str {
        "scherk"
    }
    fn summary(&self) -> &'static str {
        "Scherk's singly periodic surface sin z = sinh x sinh y (wing angle pi/2), cut off by a box of half-size cutoff"
    }
    fn defaults(&self) -> &'static [(&'static str, f64)] {
        &[("theta", FRAC_PI_2), ("cutoff", 80.0)]
    }
    fn build(&self, p: &BTreeMap<String, f64>) -> Result<Surface> {
        if (p["theta"] - FRAC_PI_2).abs() > 1e-12 {
            return Err(Error::InvalidParameter(
                "only the orthogonal Scherk surface (theta = pi/2) is implemented".into(),
            ));
        }
        let rc = positive(p, "cutoff")?;
        if rc < 4.0 {
            return Err(Error::InvalidParameter("scherk cutoff must be at least 4".into()));
        }
        let mut s = Surface::new("scherk", scherk_charts(rc));
        s.cutoff = Some(rc);
        s.known = KnownValues {
            theta_infinity: Some(2.0),
            ends: Some(1),
            willmore: Some(0.0),
            total_curvature: None,
            genus: None,
            minimal: true,
            compact: false,
        };
        Ok(s)
    }
}

// ---------------------------------------------------------------- graphs

/// Height functions for graphs over a disk in `R^2 x {0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphFn {
    /// `c (x^2 - y^2)`.
    Saddle { c: f64 },
    /// `slope * x`.
    Linear { slope: f64 },
    /// `slope * (sqrt(|x|^2 + eps^2) - eps)`.
    SmoothedCone { slope: f64, eps: f64 },
    /// `amp * exp(-|x|^2 / w^2)`.
    Bump { amp: f64, width: f64 },
}

impl GraphFn {
    pub fn eval<S: Real>(&self, x: S, y: S) -> S {
        match *self {
            GraphFn::Saddle { c } => (x * x - y * y) * c,
            GraphFn::Linear { slope } => x * slope,
            GraphFn::SmoothedCone { slope, eps } => ((x * x + y * y + eps * eps).sqrt() - eps) * slope,
            GraphFn::Bump { amp, width } => (-(x * x + y * y) / (width * width)).exp() * amp,
        }
    }
}

/// Polar chart `(rho cos t, rho sin t, phi(rho cos t, rho sin t))`.
#[derive(Debug, Clone)]
pub struct GraphMap {
    pub phi: GraphFn,
}

impl AnalyticMap for GraphMap {
    fn dim(&self) -> usize {
        3
    }
    fn eval<S: Real>(&self, rho: S, t: S, out: &mut [S]) {
        let x = rho * t.cos();
        let y = rho * t.sin();
        out[0] = x;
        out[1] = y;
        out[2] = self.phi.eval(x, y);
    }
}

/// Graph over the disk of the given radius; the outer rim is a cutoff unless
/// `rim` says otherwise.
pub fn graph_chart(phi: GraphFn, radius: f64, rim: EdgeKind) -> ChartRef {
    let dom = ParamDomain::new((0.0, radius), (0.0, TAU), [Collapsed, rim, Seam, Seam]).with_grid(8, 32);
    Arc::new(AnalyticChart::new("graph", GraphMap { phi }, dom))
}

fn rim(p: &BTreeMap<String, f64>) -> EdgeKind {
    if flag(p, "boundary") {
        Boundary
    } else {
        Cutoff
    }
}

struct GraphFactory;

impl SurfaceFactory for GraphFactory {
    fn name(&self) -> &'static str {
        "graph"
    }
    fn summary(&self) -> &'static str {
        "graph of c (x^2 - y^2) over the disk of radius `radius`; boundary=1 marks the rim as a true boundary"
    }
    fn defaults(&self) -> &'static [(&'static str, f64)] {
        &[("c", 0.1), ("radius", 1.0), ("boundary", 0.0)]
    }
    fn build(&self, p: &BTreeMap<String, f64>) -> Result<Surface> {
        let r = positive(p, "radius")?;
        let mut s = Surface::new("graph", vec![graph_chart(GraphFn::Saddle { c: p["c"] }, r, rim(p))]);
        s.cutoff = Some(r);
        s.known.minimal = p["c"] == 0.0;
        Ok(s)
    }
}

struct ConeFactory;

impl SurfaceFactory for ConeFactory {
    fn name(&self) -> &'static str {
        "cone"
    }
    fn summary(&self) -> &'static str {
        "smoothed cone graph slope*(sqrt(|x|^2+eps^2)-eps) over the disk of radius `radius`"
    }
    fn defaults(&self) -> &'static [(&'static str, f64)] {
        &[("slope", 0.2), ("eps", 0.05), ("radius", 1.0), ("boundary", 0.0)]
    }
    fn build(&self, p: &BTreeMap<String, f64>) -> Result<Surface> {
        let r = positive(p, "radius")?;
        let eps = positive(p, "eps")?;
        let phi = GraphFn::SmoothedCone { slope: p["slope"], eps };
        let mut s = Surface::new("cone", vec![graph_chart(phi, r, rim(p))]);
        s.cutoff = Some(r);
        Ok(s)
    }
}

// ---------------------------------------------------------------- torus in R^4

/// `(R cos u, R sin u, r cos v, r sin v)`.
#[derive(Debug, Clone)]
pub struct TorusMap {
    pub major: f64,
    pub minor: f64,
}

impl AnalyticMap for TorusMap {
    fn dim(&self) -> usize {
        4
    }
    fn eval<S: Real>(&self, u: S, v: S, out: &mut [S]) {
        out[0] = u.cos() * self.major;
        out[1] = u.sin() * self.major;
        out[2] = v.cos() * self.minor;
        out[3] = v.sin() * self.minor;
    }
}

struct TorusFactory;

impl SurfaceFactory for TorusFactory {
    fn name(&self) -> &'static str {
        "torus"
    }
    fn summary(&self) -> &'static str {
        "flat product torus of radii R and r in R^4"
    }
    fn defaults(&self) -> &'static [(&'static str, f64)] {
        &[("R", 1.0), ("r", 1.0)]
    }
    fn build(&self, p: &BTreeMap<String, f64>) -> Result<Surface> {
        let (big, small) = (positive(p, "R")?, positive(p, "r")?);
        let dom = ParamDomain::new((0.0, TAU), (0.0, TAU), [Seam; 4]).with_grid(16, 16);
        let chart = AnalyticChart::new(
            "torus",
            TorusMap {
                major: big,
                minor: small,
            },
            dom,
        );
        let mut s = Surface::new("torus", vec![Arc::new(chart)]);
        let w = (1.0 / (big * big) + 1.0 / (small * small)) * 4.0 * PI * PI * big * small;
        s.known = KnownValues {
            theta_infinity: Some(0.0),
            ends: Some(0),
            willmore: Some(w),
            total_curvature: Some(w),
            genus: Some(1),
            minimal: false,
            compact: true,
        };
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::chart::Param;
    use crate::geom::local::{mean_curvature_vector, second_fundamental_form_norm2, LocalGeometry};

    fn reg() -> Registry {
        Registry::builtin()
    }

    #[test]
    fn unknown_names_and_parameters_are_rejected() {
        assert!(matches!(
            reg().build("klein", &SurfaceParams::new()),
            Err(Error::UnknownSurface(_))
        ));
        let p = SurfaceParams::new().with("neck", 2.0);
        assert!(matches!(reg().build("catenoid", &p), Err(Error::InvalidParameter(_))));
        let p = SurfaceParams::new().with("theta", 1.0);
        assert!(reg().build("scherk", &p).is_err());
    }

    #[test]
    fn catenoid_satisfies_its_implicit_equation() {
        let s = reg()
            .build("catenoid", &SurfaceParams::new().with("cutoff", 100.0))
            .unwrap();
        let c = &s.charts[0];
        let d = c.domain().clone();
        for i in 0..50 {
            for j in 0..50 {
                let x = c.position(d.lerp(i as f64 / 49.0, j as f64 / 49.0));
                let lhs = x[0] * x[0] + x[1] * x[1];
                let rhs = x[2].cosh().powi(2);
                assert!((lhs - rhs).abs() <= 1e-12 * rhs, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn catenoid_cutoff_height_matches_radius() {
        let v = catenoid_height(1.0, 1000.0);
        assert!((v.cosh().powi(2) + v * v - 1e6).abs() < 1e-6);
    }

    #[test]
    fn minimal_entries_have_zero_mean_curvature() {
        for (name, p) in [
            ("plane", SurfaceParams::new().with("tilt", 0.4).with("offset", 1.0)),
            ("catenoid", SurfaceParams::new().with("cutoff", 50.0)),
            ("enneper", SurfaceParams::new().with("cutoff", 50.0)),
            ("scherk", SurfaceParams::new().with("cutoff", 10.0)),
        ] {
            let s = reg().build(name, &p).unwrap();
            for c in &s.charts {
                let d = c.domain();
                for i in 1..8 {
                    for j in 1..8 {
                        let q = d.lerp(i as f64 / 8.0 + 0.01, j as f64 / 8.0 + 0.013);
                        let h = mean_curvature_vector(c.as_ref(), q).unwrap();
                        let scale = second_fundamental_form_norm2(c.as_ref(), q).unwrap().sqrt().max(1.0);
                        assert!(h.norm() <= 1e-10 * scale, "{name} {}: |H| = {}", c.label(), h.norm());
                    }
                }
            }
        }
    }

    #[test]
    fn scherk_points_lie_on_the_implicit_surface() {
        let s = reg()
            .build("scherk", &SurfaceParams::new().with("cutoff", 10.0))
            .unwrap();
        for c in &s.charts {
            let d = c.domain();
            for i in 0..=10 {
                for j in 0..=10 {
                    let x = c.position(d.lerp(i as f64 / 10.0, j as f64 / 10.0));
                    let res = x[2].sin() - x[0].sinh() * x[1].sinh();
                    assert!(res.abs() < 1e-9 * x[0].sinh().abs().max(x[1].sinh().abs()).max(1.0));
                }
            }
        }
    }

    #[test]
    fn sphere_and_torus_curvatures() {
        let s = reg().build("sphere", &SurfaceParams::new().with("R", 2.0)).unwrap();
        let g = LocalGeometry::at(s.charts[0].as_ref(), Param::new(1.0, 0.5)).unwrap();
        assert!((g.mean_curvature.norm() - 1.0).abs() < 1e-12);
        assert!((g.second_form_norm2() - 0.5).abs() < 1e-12);
        // H points to the center
        assert!(g.mean_curvature.dot(&g.position) < 0.0);

        let t = reg().build("torus", &SurfaceParams::new().with("R", 2.0)).unwrap();
        let g = LocalGeometry::at(t.charts[0].as_ref(), Param::new(0.3, 2.0)).unwrap();
        assert!((g.mean_curvature_norm2() - 1.25).abs() < 1e-12);
        assert!(g.gauss_curvature().abs() < 1e-12);
    }

    #[test]
    fn enneper_cutoff_radius_is_tight() {
        let rho = enneper_rho(100.0);
        let mut out = [0.0; 3];
        let mut min = f64::INFINITY;
        for i in 0..3600 {
            EnneperMap.eval(rho, i as f64 * TAU / 3600.0, &mut out);
            min = min.min((out[0] * out[0] + out[1] * out[1] + out[2] * out[2]).sqrt());
        }
        assert!((100.0..100.5).contains(&min), "{min}");
    }
}
