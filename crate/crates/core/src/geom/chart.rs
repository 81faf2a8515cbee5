use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use crate::jet::{Jet2, Real};

/// A point of a chart's parameter rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Param {
    pub u: f64,
    pub v: f64,
}

impl Param {
    pub const fn new(u: f64, v: f64) -> Self {
        Param { u, v }
    }
}

/// What a side of the parameter rectangle means geometrically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeKind {
    /// Artificial truncation of a non-compact surface.
    Cutoff,
    /// A genuine boundary of the surface patch.
    Boundary,
    /// Identified with the opposite side (periodic parameter).
    Seam,
    /// The whole side maps to a single point (polar pole).
    Collapsed,
    /// Shares its image with a side of another chart of the same surface.
    Glued,
}

/// Index into [`ParamDomain::edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    UMin = 0,
    UMax = 1,
    VMin = 2,
    VMax = 3,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::UMin, Side::UMax, Side::VMin, Side::VMax];
}

/// Parameter rectangle `[u0, u1] x [v0, v1]` with side semantics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamDomain {
    pub u: (f64, f64),
    pub v: (f64, f64),
    /// Sides in the order `u0, u1, v0, v1`.
    pub edges: [EdgeKind; 4],
    /// Suggested initial grid for quadrature and meshing.
    pub grid: (usize, usize),
}

impl ParamDomain {
    pub fn new(u: (f64, f64), v: (f64, f64), edges: [EdgeKind; 4]) -> Self {
        ParamDomain {
            u,
            v,
            edges,
            grid: (16, 16),
        }
    }

    pub fn with_grid(mut self, nu: usize, nv: usize) -> Self {
        self.grid = (nu.max(1), nv.max(1));
        self
    }

    pub fn edge(&self, side: Side) -> EdgeKind {
        self.edges[side as usize]
    }

    pub fn diameter(&self) -> f64 {
        (self.u.1 - self.u.0).hypot(self.v.1 - self.v.0)
    }

    pub fn contains(&self, p: Param) -> bool {
        p.u >= self.u.0 && p.u <= self.u.1 && p.v >= self.v.0 && p.v <= self.v.1
    }

    pub fn is_interior(&self, p: Param) -> bool {
        p.u > self.u.0 && p.u < self.u.1 && p.v > self.v.0 && p.v < self.v.1
    }

    /// Parameter at fractional position `(s, t)` in `[0, 1]^2`.
    pub fn lerp(&self, s: f64, t: f64) -> Param {
        Param::new(
            self.u.0 + s * (self.u.1 - self.u.0),
            self.v.0 + t * (self.v.1 - self.v.0),
        )
    }

    /// Endpoints of a side, in increasing parameter order.
    pub fn side_segment(&self, side: Side) -> (Param, Param) {
        match side {
            Side::UMin => (Param::new(self.u.0, self.v.0), Param::new(self.u.0, self.v.1)),
            Side::UMax => (Param::new(self.u.1, self.v.0), Param::new(self.u.1, self.v.1)),
            Side::VMin => (Param::new(self.u.0, self.v.0), Param::new(self.u.1, self.v.0)),
            Side::VMax => (Param::new(self.u.0, self.v.1), Param::new(self.u.1, self.v.1)),
        }
    }
}

/// Position and partial derivatives up to order two.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartJet {
    pub f: DVector<f64>,
    pub fu: DVector<f64>,
    pub fv: DVector<f64>,
    pub fuu: DVector<f64>,
    pub fuv: DVector<f64>,
    pub fvv: DVector<f64>,
}

impl ChartJet {
    pub fn from_components(c: &[Jet2]) -> Self {
        let n = c.len();
        ChartJet {
            f: DVector::from_fn(n, |i, _| c[i].v),
            fu: DVector::from_fn(n, |i, _| c[i].du),
            fv: DVector::from_fn(n, |i, _| c[i].dv),
            fuu: DVector::from_fn(n, |i, _| c[i].duu),
            fuv: DVector::from_fn(n, |i, _| c[i].duv),
            fvv: DVector::from_fn(n, |i, _| c[i].dvv),
        }
    }

    pub fn components(&self) -> Vec<Jet2> {
        (0..self.f.len())
            .map(|i| Jet2 {
                v: self.f[i],
                du: self.fu[i],
                dv: self.fv[i],
                duu: self.fuu[i],
                duv: self.fuv[i],
                dvv: self.fvv[i],
            })
            .collect()
    }
}

/// An immersion patch `f: [u0,u1] x [v0,v1] -> R^(2+k)`.
pub trait Chart: Send + Sync + fmt::Debug {
    fn label(&self) -> &str;
    fn ambient_dim(&self) -> usize;
    fn domain(&self) -> &ParamDomain;
    /// 2 when `jet` is exact, smaller when it falls back to finite differences.
    fn derivative_order(&self) -> u8;
    /// Finite-difference step used by `jet`, if any.
    fn fd_step(&self) -> Option<f64> {
        None
    }
    fn position(&self, p: Param) -> DVector<f64>;
    fn jet(&self, p: Param) -> ChartJet;
}

pub type ChartRef = Arc<dyn Chart>;

/// A map written once over [`Real`] so it can be evaluated on plain values
/// and on second-order jets.
pub trait AnalyticMap: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn eval<S: Real>(&self, u: S, v: S, out: &mut [S]);
}

/// A chart with exact derivatives obtained by jet evaluation of an [`AnalyticMap`].
#[derive(Debug, Clone)]
pub struct AnalyticChart<M> {
    label: String,
    map: M,
    domain: ParamDomain,
}

impl<M: AnalyticMap> AnalyticChart<M> {
    pub fn new(label: impl Into<String>, map: M, domain: ParamDomain) -> Self {
        AnalyticChart {
            label: label.into(),
            map,
            domain,
        }
    }

    pub fn map(&self) -> &M {
        &self.map
    }
}

impl<M: AnalyticMap + 'static> Chart for AnalyticChart<M> {
    fn label(&self) -> &str {
        &self.label
    }
    fn ambient_dim(&self) -> usize {
        self.map.dim()
    }
    fn domain(&self) -> &ParamDomain {
        &self.domain
    }
    fn derivative_order(&self) -> u8 {
        2
    }
    fn position(&self, p: Param) -> DVector<f64> {
        let mut out = vec![0.0; self.map.dim()];
        self.map.eval(p.u, p.v, &mut out);
        DVector::from_vec(out)
    }
    fn jet(&self, p: Param) -> ChartJet {
        let mut out = vec![Jet2::default(); self.map.dim()];
        self.map.eval(Jet2::var_u(p.u), Jet2::var_v(p.v), &mut out);
        ChartJet::from_components(&out)
    }
}

type PositionFn = dyn Fn(f64, f64) -> DVector<f64> + Send + Sync;

/// A user-supplied chart known only through positions; derivatives come from
/// central finite differences with step `h`.
pub struct FdChart {
    label: String,
    dim: usize,
    domain: ParamDomain,
    h: f64,
    f: Box<PositionFn>,
}

impl fmt::Debug for FdChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FdChart")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("h", &self.h)
            .finish()
    }
}

impl FdChart {
    /// Default step is `1e-5` times the parameter-domain diameter.
    pub fn new<F>(label: impl Into<String>, dim: usize, domain: ParamDomain, f: F) -> Self
    where
        F: Fn(f64, f64) -> DVector<f64> + Send + Sync + 'static,
    {
        let h = 1e-5 * domain.diameter();
        FdChart {
            label: label.into(),
            dim,
            domain,
            h,
            f: Box::new(f),
        }
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    /// Wrap an existing chart, discarding its analytic derivatives.
    pub fn from_chart(chart: ChartRef, h: f64) -> Self {
        let dim = chart.ambient_dim();
        let domain = chart.domain().clone();
        let label = format!("fd:{}", chart.label());
        FdChart {
            label,
            dim,
            domain,
            h,
            f: Box::new(move |u, v| chart.position(Param::new(u, v))),
        }
    }
}

impl Chart for FdChart {
    fn label(&self) -> &str {
        &self.label
    }
    fn ambient_dim(&self) -> usize {
        self.dim
    }
    fn domain(&self) -> &ParamDomain {
        &self.domain
    }
    fn derivative_order(&self) -> u8 {
        0
    }
    fn fd_step(&self) -> Option<f64> {
        Some(self.h)
    }
    fn position(&self, p: Param) -> DVector<f64> {
        (self.f)(p.u, p.v)
    }
    fn jet(&self, p: Param) -> ChartJet {
        let h = self.h;
        let e = |du: f64, dv: f64| (self.f)(p.u + du, p.v + dv);
        let f = e(0.0, 0.0);
        let (fup, fum, fvp, fvm) = (e(h, 0.0), e(-h, 0.0), e(0.0, h), e(0.0, -h));
        let fu = (&fup - &fum) / (2.0 * h);
        let fv = (&fvp - &fvm) / (2.0 * h);
        let fuu = (&fup - &f * 2.0 + &fum) / (h * h);
        let fvv = (&fvp - &f * 2.0 + &fvm) / (h * h);
        let fuv = (e(h, h) - e(h, -h) - e(-h, h) + e(-h, -h)) / (4.0 * h * h);
        ChartJet {
            f,
            fu,
            fv,
            fuu,
            fuv,
            fvv,
        }
    }
}
