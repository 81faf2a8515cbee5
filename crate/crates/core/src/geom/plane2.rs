use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Affine 2-plane `base + span(frame)` in `R^n` with a completed normal coframe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plane2 {
    pub base: DVector<f64>,
    /// Two orthonormal tangent vectors.
    pub frame: [DVector<f64>; 2],
    /// `n - 2` orthonormal normal vectors.
    pub coframe: Vec<DVector<f64>>,
}

impl Plane2 {
    /// Orthonormalize `t1, t2` and complete a normal basis from the standard basis.
    pub fn new(base: DVector<f64>, t1: &DVector<f64>, t2: &DVector<f64>) -> Result<Self> {
        let n = base.len();
        if n < 3 || t1.len() != n || t2.len() != n {
            return Err(Error::InvalidParameter(format!(
                "plane in R^{n} needs two tangent vectors of length {n}"
            )));
        }
        let e1 = t1.normalize();
        let w = t2 - &e1 * e1.dot(t2);
        if !(w.norm() > 1e-12 * t2.norm()) || !e1.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("plane frame is degenerate".into()));
        }
        let e2 = w.normalize();
        let mut basis = vec![e1.clone(), e2.clone()];
        for i in 0..n {
            if basis.len() == n {
                break;
            }
            let mut c = DVector::zeros(n);
            c[i] = 1.0;
            for b in &basis {
                c -= b * b.dot(&c);
            }
            // a second pass keeps the Gram matrix at the identity to ~1e-16
            for b in &basis {
                c -= b * b.dot(&c);
            }
            if c.norm() > 1e-6 {
                basis.push(c.normalize());
            }
        }
        let coframe = basis.split_off(2);
        Ok(Plane2 {
            base,
            frame: [e1, e2],
            coframe,
        })
    }

    /// `R^2 x {0}` translated to `base`.
    pub fn horizontal(base: DVector<f64>) -> Self {
        let n = base.len();
        let mut t1 = DVector::zeros(n);
        let mut t2 = DVector::zeros(n);
        t1[0] = 1.0;
        t2[1] = 1.0;
        Plane2::new(base, &t1, &t2).expect("coordinate plane")
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// Ambient matrix of the linear projection onto the tangent directions.
    pub fn projector(&self) -> DMatrix<f64> {
        let [a, b] = &self.frame;
        a * a.transpose() + b * b.transpose()
    }

    /// In-plane coordinates of `x - base`.
    pub fn coords(&self, x: &DVector<f64>) -> [f64; 2] {
        let d = x - &self.base;
        [self.frame[0].dot(&d), self.frame[1].dot(&d)]
    }

    /// `p_T(x)`: nearest point of the plane.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        let [s, t] = self.coords(x);
        &self.base + &self.frame[0] * s + &self.frame[1] * t
    }

    /// `q(x)`: component of `x - base` normal to the plane.
    pub fn normal_component(&self, x: &DVector<f64>) -> DVector<f64> {
        let d = x - &self.base;
        &d - &self.frame[0] * self.frame[0].dot(&d) - &self.frame[1] * self.frame[1].dot(&d)
    }

    /// Normal part of a direction vector (no recentering).
    pub fn normal_of_vector(&self, v: &DVector<f64>) -> DVector<f64> {
        v - &self.frame[0] * self.frame[0].dot(v) - &self.frame[1] * self.frame[1].dot(v)
    }

    pub fn distance(&self, x: &DVector<f64>) -> f64 {
        self.normal_component(x).norm()
    }

    pub fn point(&self, s: f64, t: f64) -> DVector<f64> {
        &self.base + &self.frame[0] * s + &self.frame[1] * t
    }

    /// Same plane with a different base point.
    pub fn through(&self, base: DVector<f64>) -> Self {
        Plane2 {
            base,
            frame: self.frame.clone(),
            coframe: self.coframe.clone(),
        }
    }

    /// Gram matrix of `frame ++ coframe`.
    pub fn gram(&self) -> DMatrix<f64> {
        let all: Vec<&DVector<f64>> = self.frame.iter().chain(self.coframe.iter()).collect();
        DMatrix::from_fn(all.len(), all.len(), |i, j| all[i].dot(all[j]))
    }

    /// Principal angles to another plane, ascending.
    pub fn principal_angles(&self, other: &Plane2) -> [f64; 2] {
        // cosines from the frame overlap, sines from the normal overlap; pairing
        // them through atan2 keeps small and near-right angles accurate
        let m = nalgebra::Matrix2::from_fn(|i, j| self.frame[i].dot(&other.frame[j]));
        let mut cos: Vec<f64> = m.singular_values().iter().copied().collect();
        cos.sort_by(|a, b| b.total_cmp(a));
        let mut sin = vec![0.0; 2];
        if !self.coframe.is_empty() {
            let n = nalgebra::DMatrix::from_fn(self.coframe.len(), 2, |i, j| self.coframe[i].dot(&other.frame[j]));
            let sv = n.singular_values();
            let mut s: Vec<f64> = sv.iter().copied().collect();
            s.sort_by(f64::total_cmp);
            // a single normal direction leaves the smaller sine at zero
            if s.len() == 1 {
                s.insert(0, 0.0);
            }
            sin = s[s.len() - 2..].to_vec();
        }
        [sin[0].atan2(cos[0]), sin[1].atan2(cos[1])]
    }
}

/// `|P - Q|_F^2` for two projection matrices.
pub fn projector_distance2(p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    (p - q).norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1.0f64..1.0, n)
    }

    proptest! {
        #[test]
        fn frame_and_coframe_are_orthonormal(a in vec_strategy(4), b in vec_strategy(4), c in vec_strategy(4)) {
            let t1 = DVector::from_vec(a);
            let t2 = DVector::from_vec(b);
            prop_assume!(t1.norm() > 0.1 && (&t2 - &t1 * (t1.dot(&t2) / t1.norm_squared())).norm() > 0.1);
            let p = Plane2::new(DVector::from_vec(c), &t1, &t2).unwrap();
            let g = p.gram();
            prop_assert!((g - DMatrix::identity(4, 4)).abs().max() < 1e-12);
        }

        #[test]
        fn projection_splits_identity(a in vec_strategy(3), b in vec_strategy(3), x in vec_strategy(3)) {
            let t1 = DVector::from_vec(a);
            let t2 = DVector::from_vec(b);
            prop_assume!(t1.norm() > 0.1 && (&t2 - &t1 * (t1.dot(&t2) / t1.norm_squared())).norm() > 0.1);
            let base = DVector::from_vec(vec![0.3, -0.2, 0.5]);
            let p = Plane2::new(base.clone(), &t1, &t2).unwrap();
            let x = DVector::from_vec(x);
            let back = p.project(&x) + p.normal_component(&x);
            prop_assert!((back - x).norm() < 1e-12);
        }

        #[test]
        fn projector_distance_is_between_zero_and_four(a in vec_strategy(4), b in vec_strategy(4), c in vec_strategy(4), d in vec_strategy(4)) {
            let z = DVector::zeros(4);
            let (a, b, c, d) = (DVector::from_vec(a), DVector::from_vec(b), DVector::from_vec(c), DVector::from_vec(d));
            let ok = |s: &DVector<f64>, t: &DVector<f64>| s.norm() > 0.1 && (t - s * (s.dot(t) / s.norm_squared())).norm() > 0.1;
            prop_assume!(ok(&a, &b) && ok(&c, &d));
            let p = Plane2::new(z.clone(), &a, &b).unwrap().projector();
            let q = Plane2::new(z, &c, &d).unwrap().projector();
            let e = projector_distance2(&p, &q);
            prop_assert!((-1e-12..=4.0 + 1e-12).contains(&e));
        }
    }

    #[test]
    fn orthogonal_planes_in_r4_have_distance_four() {
        let z = DVector::zeros(4);
        let e = |i: usize| {
            let mut v = DVector::zeros(4);
            v[i] = 1.0;
            v
        };
        let p = Plane2::new(z.clone(), &e(0), &e(1)).unwrap();
        let q = Plane2::new(z, &e(2), &e(3)).unwrap();
        assert!((projector_distance2(&p.projector(), &q.projector()) - 4.0).abs() < 1e-14);
        let ang = p.principal_angles(&q);
        assert!((ang[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
