use std::collections::HashMap;

/// Bucket grid over in-plane coordinates for nearest-point queries.
pub(crate) struct PlaneIndex {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    max_ring: i64,
}

impl PlaneIndex {
    /// `coords[k]` are the in-plane coordinates of item `k`.
    pub fn new(coords: &[[f64; 2]], cell: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut extent = 0i64;
        for (k, c) in coords.iter().enumerate() {
            let key = ((c[0] / cell).floor() as i64, (c[1] / cell).floor() as i64);
            extent = extent.max(key.0.abs()).max(key.1.abs());
            buckets.entry(key).or_default().push(k);
        }
        PlaneIndex {
            cell,
            buckets,
            max_ring: 2 * extent + 2,
        }
    }

    /// Item minimising `dist`, where `dist(k) >= |coords[k] - q| - slack`.
    ///
    /// Rings of buckets are scanned outward until no unvisited bucket can
    /// beat the best distance found. Ties go to the lowest index.
    pub fn nearest(&self, q: [f64; 2], slack: f64, dist: impl Fn(usize) -> f64) -> Option<(usize, f64)> {
        let (ci, cj) = ((q[0] / self.cell).floor() as i64, (q[1] / self.cell).floor() as i64);
        let mut best: Option<(usize, f64)> = None;
        for ring in 0..=self.max_ring + ci.abs().max(cj.abs()) {
            for (i, j) in ring_cells(ci, cj, ring) {
                if let Some(items) = self.buckets.get(&(i, j)) {
                    for &k in items {
                        let d = dist(k);
                        if best.is_none_or(|(bk, bd)| d < bd || (d == bd && k < bk)) {
                            best = Some((k, d));
                        }
                    }
                }
            }
            if let Some((_, bd)) = best {
                // anything in a farther ring is at least `ring * cell` away in the plane
                if bd <= ring as f64 * self.cell - slack {
                    break;
                }
            }
        }
        best
    }
}

fn ring_cells(ci: i64, cj: i64, r: i64) -> Vec<(i64, i64)> {
    if r == 0 {
        return vec![(ci, cj)];
    }
    let mut out = Vec::with_capacity(8 * r as usize);
    for d in -r..=r {
        out.push((ci + d, cj - r));
        out.push((ci + d, cj + r));
    }
    for d in -r + 1..r {
        out.push((ci - r, cj + d));
        out.push((ci + r, cj + d));
    }
    out
}
