//! Triangle meshes: construction from charts, OBJ/OFF/NDIM readers, and
//! connectivity queries.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DVector;

use super::chart::{Chart, EdgeKind, Param, Side};
use crate::error::{Error, Result};

/// Parameter triangle a face was cut from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceOrigin {
    pub chart: usize,
    pub params: [Param; 3],
}

#[derive(Debug, Clone)]
pub struct TriMesh {
    pub vertices: Vec<DVector<f64>>,
    pub faces: Vec<[usize; 3]>,
    /// Vertex lies on a boundary edge of the connectivity.
    pub boundary: Vec<bool>,
    /// Vertex lies on an artificial truncation of a non-compact surface.
    pub cutoff: Vec<bool>,
    /// Present for meshes sampled from charts.
    pub origins: Option<Vec<FaceOrigin>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Off,
    Ndim,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("off") => Ok(MeshFormat::Off),
            Some("ndim") => Ok(MeshFormat::Ndim),
            _ => Err(Error::InvalidParameter(format!(
                "cannot infer mesh format of {}",
                path.display()
            ))),
        }
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl TriMesh {
    /// Validate indices and manifold-with-boundary connectivity.
    pub fn new(vertices: Vec<DVector<f64>>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        if let Some(dim) = vertices.first().map(|v| v.len()) {
            if vertices.iter().any(|v| v.len() != dim) {
                return Err(Error::Parse {
                    line: 0,
                    msg: "vertices have mixed dimensions".into(),
                });
            }
        }
        for (i, f) in faces.iter().enumerate() {
            if f.iter().any(|&k| k >= n) {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("face {i} references a vertex out of range"),
                });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::NonManifold(format!("face {i} repeats a vertex")));
            }
        }
        // directed half-edge counts detect both fins and orientation flips
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &faces {
            for k in 0..3 {
                *directed.entry((f[k], f[(k + 1) % 3])).or_default() += 1;
            }
        }
        let mut undirected: HashMap<(usize, usize), usize> = HashMap::new();
        for (&(a, b), &c) in &directed {
            if c > 1 {
                return Err(Error::NonManifold(format!(
                    "edge ({a}, {b}) is traversed twice in the same direction"
                )));
            }
            *undirected.entry(edge_key(a, b)).or_default() += c;
        }
        let mut boundary = vec![false; n];
        for (&(a, b), &c) in &undirected {
            if c > 2 {
                return Err(Error::NonManifold(format!("edge ({a}, {b}) is shared by {c} faces")));
            }
            if c == 1 {
                boundary[a] = true;
                boundary[b] = true;
            }
        }
        let m = TriMesh {
            vertices,
            faces,
            boundary,
            cutoff: vec![false; n],
            origins: None,
        };
        if !(m.area() > 0.0) {
            return Err(Error::Parse {
                line: 0,
                msg: "mesh has zero total area".into(),
            });
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.vertices.first().map_or(3, |v| v.len())
    }

    pub fn face_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.faces[i];
        triangle_area(&self.vertices[a], &self.vertices[b], &self.vertices[c])
    }

    pub fn area(&self) -> f64 {
        (0..self.faces.len()).map(|i| self.face_area(i)).sum()
    }

    pub fn face_centroid(&self, i: usize) -> DVector<f64> {
        let [a, b, c] = self.faces[i];
        (&self.vertices[a] + &self.vertices[b] + &self.vertices[c]) / 3.0
    }

    /// Undirected edges with the faces that use them.
    pub fn edges(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut e: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, f) in self.faces.iter().enumerate() {
            for k in 0..3 {
                e.entry(edge_key(f[k], f[(k + 1) % 3])).or_default().push(i);
            }
        }
        e
    }

    /// `V - E + F`, counting only vertices used by some face.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        for f in &self.faces {
            for &k in f {
                used[k] = true;
            }
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        v - self.edges().len() as i64 + self.faces.len() as i64
    }

    /// Boundary loops as vertex cycles, each following the face orientation.
    pub fn boundary_loops(&self) -> Result<Vec<Vec<usize>>> {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                directed.insert((f[k], f[(k + 1) % 3]), 0);
            }
        }
        let mut next: HashMap<usize, usize> = HashMap::new();
        let mut starts: Vec<usize> = Vec::new();
        for &(a, b) in directed.keys() {
            if !directed.contains_key(&(b, a)) {
                if next.insert(a, b).is_some() {
                    return Err(Error::NonManifold(format!(
                        "boundary vertex {a} is pinched (not a simple loop)"
                    )));
                }
                starts.push(a);
            }
        }
        starts.sort_unstable();
        let mut seen = std::collections::HashSet::new();
        let mut loops = Vec::new();
        for s in starts {
            if seen.contains(&s) {
                continue;
            }
            let mut lp = vec![s];
            seen.insert(s);
            let mut cur = next[&s];
            while cur != s {
                if !seen.insert(cur) {
                    return Err(Error::NonManifold("boundary loop is not simple".into()));
                }
                lp.push(cur);
                cur = *next
                    .get(&cur)
                    .ok_or_else(|| Error::NonManifold("open boundary chain".into()))?;
            }
            loops.push(lp);
        }
        Ok(loops)
    }

    /// Connected components of the face graph (faces sharing a vertex).
    pub fn face_components(&self, keep: &[bool]) -> Vec<Option<usize>> {
        let mut uf = UnionFind::new(self.vertices.len());
        for (i, f) in self.faces.iter().enumerate() {
            if keep[i] {
                uf.union(f[0], f[1]);
                uf.union(f[1], f[2]);
            }
        }
        label_faces(self, keep, &mut uf)
    }

    pub fn write_off(&self, path: &Path) -> Result<()> {
        let mut out = fs::File::create(path)?;
        let d = self.dim();
        if d == 3 {
            writeln!(out, "OFF")?;
        } else {
            writeln!(out, "NDIM {d}")?;
        }
        writeln!(out, "{} {} 0", self.vertices.len(), self.faces.len())?;
        for v in &self.vertices {
            let s: Vec<String> = v.iter().map(|x| format!("{x:.17e}")).collect();
            writeln!(out, "{}", s.join(" "))?;
        }
        for f in &self.faces {
            writeln!(out, "3 {} {} {}", f[0], f[1], f[2])?;
        }
        Ok(())
    }
}

pub(crate) fn label_faces(m: &TriMesh, keep: &[bool], uf: &mut UnionFind) -> Vec<Option<usize>> {
    let mut ids: HashMap<usize, usize> = HashMap::new();
    m.faces
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if !keep[i] {
                return None;
            }
            let root = uf.find(f[0]);
            let next = ids.len();
            Some(*ids.entry(root).or_insert(next))
        })
        .collect()
}

pub fn triangle_area(a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>) -> f64 {
    let u = b - a;
    let v = c - a;
    let uu = u.dot(&u);
    let vv = v.dot(&v);
    let uv = u.dot(&v);
    0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
}

/// Disjoint sets with path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index wins so labels do not depend on union order
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

/// Regular grid triangulation with `nu x nv` vertices (before welding).
///
/// Seams are welded by index, collapsed sides become a single vertex, and
/// vertices on cutoff sides are flagged.
pub fn sample_mesh(chart: &dyn Chart, resolution: (usize, usize)) -> Result<TriMesh> {
    sample_mesh_tagged(chart, resolution, 0)
}

pub(crate) fn sample_mesh_tagged(chart: &dyn Chart, resolution: (usize, usize), tag: usize) -> Result<TriMesh> {
    let (nu, nv) = resolution;
    if nu < 2 || nv < 2 {
        return Err(Error::InvalidParameter("mesh resolution must be at least 2 x 2".into()));
    }
    let dom = chart.domain();
    let seam_u = dom.edge(Side::UMin) == EdgeKind::Seam;
    let seam_v = dom.edge(Side::VMin) == EdgeKind::Seam;
    let param = |i: usize, j: usize| dom.lerp(i as f64 / (nu - 1) as f64, j as f64 / (nv - 1) as f64);

    // canonical grid coordinates after identifications
    let canon = |mut i: usize, mut j: usize| -> (usize, usize) {
        if seam_u && i == nu - 1 {
            i = 0;
        }
        if seam_v && j == nv - 1 {
            j = 0;
        }
        if dom.edge(Side::UMin) == EdgeKind::Collapsed && i == 0 {
            j = 0;
        }
        if dom.edge(Side::UMax) == EdgeKind::Collapsed && i == nu - 1 {
            j = 0;
        }
        if dom.edge(Side::VMin) == EdgeKind::Collapsed && j == 0 {
            i = 0;
        }
        if dom.edge(Side::VMax) == EdgeKind::Collapsed && j == nv - 1 {
            i = 0;
        }
        (i, j)
    };

    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut cutoff = Vec::new();
    let mut grid = vec![0usize; nu * nv];
    for j in 0..nv {
        for i in 0..nu {
            let c = canon(i, j);
            let id = *index.entry(c).or_insert_with(|| {
                vertices.push(chart.position(param(c.0, c.1)));
                cutoff.push(false);
                vertices.len() - 1
            });
            let on = |s: Side| dom.edge(s) == EdgeKind::Cutoff;
            if (i == 0 && on(Side::UMin))
                || (i == nu - 1 && on(Side::UMax))
                || (j == 0 && on(Side::VMin))
                || (j == nv - 1 && on(Side::VMax))
            {
                cutoff[id] = true;
            }
            grid[j * nu + i] = id;
        }
    }

    let mut faces = Vec::new();
    let mut origins = Vec::new();
    for j in 0..nv - 1 {
        for i in 0..nu - 1 {
            let a = grid[j * nu + i];
            let b = grid[j * nu + i + 1];
            let c = grid[(j + 1) * nu + i + 1];
            let d = grid[(j + 1) * nu + i];
            let (pa, pb, pc, pd) = (param(i, j), param(i + 1, j), param(i + 1, j + 1), param(i, j + 1));
            for (f, p) in [([a, b, c], [pa, pb, pc]), ([a, c, d], [pa, pc, pd])] {
                if f[0] != f[1] && f[1] != f[2] && f[0] != f[2] {
                    faces.push(f);
                    origins.push(FaceOrigin { chart: tag, params: p });
                }
            }
        }
    }
    let mut m = TriMesh::new(vertices, faces)?;
    m.cutoff = cutoff;
    m.origins = Some(origins);
    Ok(m)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| parse_err(line, format!("'{tok}' is not a finite number")))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("'{tok}' is not an index")))
}

/// Fan-triangulate a polygon.
fn fan(poly: &[usize]) -> impl Iterator<Item = [usize; 3]> + '_ {
    (1..poly.len().saturating_sub(1)).map(move |k| [poly[0], poly[k], poly[k + 1]])
}

pub fn parse_obj(text: &str) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        let mut toks = body.split_whitespace();
        match toks.next() {
            Some("v") => {
                let c: Vec<f64> = toks.map(|t| parse_f64(t, line)).collect::<Result<_>>()?;
                // a fourth coordinate in OBJ is a homogeneous weight, not a dimension
                if c.len() < 3 {
                    return Err(parse_err(line, "vertex needs three coordinates"));
                }
                vertices.push(DVector::from_vec(c[..3].to_vec()));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for t in toks {
                    let head = t.split('/').next().unwrap_or("");
                    let k: i64 = head
                        .parse()
                        .map_err(|_| parse_err(line, format!("bad face index '{t}'")))?;
                    let idx = if k > 0 {
                        k as usize - 1
                    } else if k < 0 && (-k) as usize <= vertices.len() {
                        vertices.len() - (-k) as usize
                    } else {
                        return Err(parse_err(line, format!("face index {k} out of range")));
                    };
                    poly.push(idx);
                }
                if poly.len() < 3 {
                    return Err(parse_err(line, "face needs at least three vertices"));
                }
                faces.extend(fan(&poly));
            }
            _ => {}
        }
    }
    if faces.is_empty() {
        return Err(parse_err(0, "no faces"));
    }
    TriMesh::new(vertices, faces)
}

/// OFF, or the `NDIM d` variant whose vertices have `d` coordinates.
pub fn parse_off(text: &str) -> Result<TriMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(0, "empty file"))?;
    let mut htoks = header.split_whitespace();
    let dim = match htoks.next() {
        Some("OFF") => 3,
        Some("NDIM") => {
            let d = parse_usize(htoks.next().ok_or_else(|| parse_err(hl, "NDIM needs a dimension"))?, hl)?;
            if d < 3 {
                return Err(parse_err(hl, "NDIM dimension must be at least 3"));
            }
            d
        }
        _ => return Err(parse_err(hl, "expected OFF or NDIM header")),
    };
    // counts may share the header line in some writers
    let rest: Vec<&str> = htoks.collect();
    let (cl, counts): (usize, Vec<usize>) = if rest.len() >= 2 {
        (hl, rest.iter().map(|t| parse_usize(t, hl)).collect::<Result<_>>()?)
    } else {
        let (cl, l) = lines.next().ok_or_else(|| parse_err(hl, "missing counts line"))?;
        (
            cl,
            l.split_whitespace()
                .map(|t| parse_usize(t, cl))
                .collect::<Result<_>>()?,
        )
    };
    if counts.len() < 2 {
        return Err(parse_err(cl, "counts line needs vertex and face counts"));
    }
    let (nv, nf) = (counts[0], counts[1]);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(0, "unexpected end of vertex list"))?;
        let c: Vec<f64> = l.split_whitespace().map(|t| parse_f64(t, ln)).collect::<Result<_>>()?;
        if c.len() < dim {
            return Err(parse_err(ln, format!("vertex needs {dim} coordinates")));
        }
        vertices.push(DVector::from_vec(c[..dim].to_vec()));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(0, "unexpected end of face list"))?;
        let t: Vec<usize> = l
            .split_whitespace()
            .map(|t| parse_usize(t, ln))
            .collect::<Result<_>>()?;
        let k = *t.first().ok_or_else(|| parse_err(ln, "empty face"))?;
        if k < 3 || t.len() < k + 1 {
            return Err(parse_err(ln, "malformed face"));
        }
        faces.extend(fan(&t[1..=k]));
    }
    if faces.is_empty() {
        return Err(parse_err(0, "no faces"));
    }
    TriMesh::new(vertices, faces)
}

pub fn load_mesh(path: &Path, format: Option<MeshFormat>) -> Result<TriMesh> {
    let text = fs::read_to_string(path)?;
    let format = match format {
        Some(f) => f,
        None => {
            if text.trim_start().starts_with("NDIM") {
                MeshFormat::Ndim
            } else {
                MeshFormat::from_path(path)?
            }
        }
    };
    match format {
        MeshFormat::Obj => parse_obj(&text),
        MeshFormat::Off | MeshFormat::Ndim => parse_off(&text),
    }
}
