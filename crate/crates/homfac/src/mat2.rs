//! 2x2 matrices over a finite field and semilinear transformations of
//! F_q^2, used to realize the two-dimensional groups without materializing
//! all of GL(2,q) as permutations.

use crate::ffield::{FieldElem, FieldSpec};
use crate::perm::Perm;

/// A 2x2 matrix (a b / c d), entries in row-major order.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mat2 {
    pub a: FieldElem,
    pub b: FieldElem,
    pub c: FieldElem,
    pub d: FieldElem,
}

impl Mat2 {
    pub fn new(a: FieldElem, b: FieldElem, c: FieldElem, d: FieldElem) -> Mat2 {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Mat2 {
        Mat2::new(FieldElem::ONE, FieldElem::ZERO, FieldElem::ZERO, FieldElem::ONE)
    }

    pub fn scalar(x: FieldElem) -> Mat2 {
        Mat2::new(x, FieldElem::ZERO, FieldElem::ZERO, x)
    }

    pub fn det(&self, f: &FieldSpec) -> FieldElem {
        f.sub(f.mul(self.a, self.d), f.mul(self.b, self.c))
    }

    /// Matrix product self * other.
    pub fn mul(&self, f: &FieldSpec, other: &Mat2) -> Mat2 {
        Mat2::new(
            f.add(f.mul(self.a, other.a), f.mul(self.b, other.c)),
            f.add(f.mul(self.a, other.b), f.mul(self.b, other.d)),
            f.add(f.mul(self.c, other.a), f.mul(self.d, other.c)),
            f.add(f.mul(self.c, other.b), f.mul(self.d, other.d)),
        )
    }

    pub fn inverse(&self, f: &FieldSpec) -> Option<Mat2> {
        let det = self.det(f);
        if det.is_zero() {
            return None;
        }
        let di = f.inv(det).unwrap();
        Some(Mat2::new(
            f.mul(self.d, di),
            f.mul(f.neg(self.b), di),
            f.mul(f.neg(self.c), di),
            f.mul(self.a, di),
        ))
    }

    /// Column-vector action (u, v) -> (au + bv, cu + dv).
    pub fn apply(&self, f: &FieldSpec, v: (FieldElem, FieldElem)) -> (FieldElem, FieldElem) {
        (
            f.add(f.mul(self.a, v.0), f.mul(self.b, v.1)),
            f.add(f.mul(self.c, v.0), f.mul(self.d, v.1)),
        )
    }

    /// Entrywise application of x -> x^{p^j}.
    pub fn frobenius(&self, f: &FieldSpec, j: u32) -> Mat2 {
        Mat2::new(
            f.frobenius(self.a, j),
            f.frobenius(self.b, j),
            f.frobenius(self.c, j),
            f.frobenius(self.d, j),
        )
    }

    /// Multiplicative order, or None past `cap` (the matrix must be
    /// invertible for this to terminate).
    pub fn order(&self, f: &FieldSpec, cap: u64) -> Option<u64> {
        let id = Mat2::identity();
        let mut cur = *self;
        for k in 1..=cap {
            if cur == id {
                return Some(k);
            }
            cur = cur.mul(f, self);
        }
        None
    }

    /// Deterministic iteration order over all matrices: entry indices
    /// (a, b, c, d) as base-q digits, a most significant.
    pub fn from_rank(f: &FieldSpec, rank: u64) -> Mat2 {
        let q = f.q as u64;
        Mat2::new(
            FieldElem((rank / (q * q * q) % q) as u32),
            FieldElem((rank / (q * q) % q) as u32),
            FieldElem((rank / q % q) as u32),
            FieldElem((rank % q) as u32),
        )
    }
}

/// A semilinear transformation v -> M * v^{p^j} of F_q^2.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct Semilinear2 {
    pub mat: Mat2,
    pub frob: u32,
}

impl Semilinear2 {
    pub fn linear(mat: Mat2) -> Semilinear2 {
        Semilinear2 { mat, frob: 0 }
    }

    pub fn identity() -> Semilinear2 {
        Semilinear2::linear(Mat2::identity())
    }

    /// self followed by `next`, matching the right-action convention of
    /// `Perm::then`: x -> M2 (M1 x^{p^{j1}})^{p^{j2}}.
    pub fn then(&self, f: &FieldSpec, next: &Semilinear2) -> Semilinear2 {
        Semilinear2 {
            mat: next.mat.mul(f, &self.mat.frobenius(f, next.frob)),
            frob: (self.frob + next.frob) % f.r,
        }
    }

    pub fn inverse(&self, f: &FieldSpec) -> Semilinear2 {
        let jinv = (f.r - self.frob % f.r) % f.r;
        let minv = self.mat.inverse(f).expect("singular semilinear part");
        Semilinear2 {
            mat: minv.frobenius(f, jinv),
            frob: jinv,
        }
    }

    pub fn apply(&self, f: &FieldSpec, v: (FieldElem, FieldElem)) -> (FieldElem, FieldElem) {
        self.mat
            .apply(f, (f.frobenius(v.0, self.frob), f.frobenius(v.1, self.frob)))
    }

    /// Vector index q*index(u) + index(v), matching `perm::gl2_perm`.
    pub fn apply_index(&self, f: &FieldSpec, idx: usize) -> usize {
        let q = f.q as usize;
        let (u, v) = (FieldElem((idx / q) as u32), FieldElem((idx % q) as u32));
        let (x, y) = self.apply(f, (u, v));
        x.index() * q + y.index()
    }

    pub fn to_perm(&self, f: &FieldSpec) -> Perm {
        let q = f.q as usize;
        let images: Vec<u16> = (0..q * q).map(|i| self.apply_index(f, i) as u16).collect();
        Perm::from_images(images).expect("semilinear map is a bijection")
    }

    pub fn is_scalar(&self) -> bool {
        self.frob == 0 && self.mat.b.is_zero() && self.mat.c.is_zero() && self.mat.a == self.mat.d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::make_field;

    #[test]
    fn matrix_inverse_roundtrip() {
        let f = make_field(5, 1).unwrap();
        let m = Mat2::new(FieldElem(1), FieldElem(2), FieldElem(3), FieldElem(4));
        let inv = m.inverse(&f).unwrap();
        assert_eq!(m.mul(&f, &inv), Mat2::identity());
        assert_eq!(inv.mul(&f, &m), Mat2::identity());
    }

    #[test]
    fn semilinear_then_matches_perm_then() {
        let f = make_field(3, 2).unwrap();
        let m1 = Semilinear2 {
            mat: Mat2::new(FieldElem(1), FieldElem(4), FieldElem(0), FieldElem(2)),
            frob: 1,
        };
        let m2 = Semilinear2 {
            mat: Mat2::new(FieldElem(2), FieldElem(1), FieldElem(1), FieldElem(1)),
            frob: 0,
        };
        assert!(!m1.mat.det(&f).is_zero() && !m2.mat.det(&f).is_zero());
        let lhs = m1.then(&f, &m2).to_perm(&f);
        let rhs = m1.to_perm(&f).then(&m2.to_perm(&f));
        assert_eq!(lhs, rhs);
        let inv = m1.inverse(&f);
        assert_eq!(m1.then(&f, &inv), Semilinear2::identity());
    }

    #[test]
    fn matrix_order() {
        let f = make_field(5, 1).unwrap();
        let i = Mat2::new(FieldElem(0), FieldElem(4), FieldElem(1), FieldElem(0));
        assert_eq!(i.order(&f, 100), Some(4));
        assert_eq!(Mat2::identity().order(&f, 10), Some(1));
    }

    #[test]
    fn rank_iteration_is_exhaustive() {
        let f = make_field(3, 1).unwrap();
        let mut seen = std::collections::HashSet::new();
        for r in 0..81 {
            seen.insert(Mat2::from_rank(&f, r));
        }
        assert_eq!(seen.len(), 81);
    }
}
