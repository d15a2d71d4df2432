//! Dense exact matrices over a [`Ring`], with the row-reduction toolkit the
//! module layer needs (rank, nullspace, inverses, subspace arithmetic).
//!
//! Vectors are rows throughout: a right-module action is `v ↦ v·A`, so
//! `act` is an ordinary ring homomorphism into matrices.

use crate::ring::Ring;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<T>,
}

impl<T: Clone + PartialEq + Eq + std::fmt::Debug> Mat<T> {
    pub fn from_fn<R: Ring<Elem = T>>(
        _ring: &R,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> T,
    ) -> Self {
        let mut a = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                a.push(f(i, j));
            }
        }
        Mat { rows, cols, a }
    }

    pub fn zero<R: Ring<Elem = T>>(ring: &R, rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            a: vec![ring.zero(); rows * cols],
        }
    }

    pub fn ident<R: Ring<Elem = T>>(ring: &R, n: usize) -> Self {
        let mut m = Self::zero(ring, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = ring.one();
        }
        m
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.a[i * self.cols + j]
    }
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.a[i * self.cols + j]
    }
    pub fn row(&self, i: usize) -> &[T] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    pub fn add<R: Ring<Elem = T>>(&self, ring: &R, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            a: self
                .a
                .iter()
                .zip(&other.a)
                .map(|(x, y)| ring.add(x, y))
                .collect(),
        }
    }

    pub fn sub<R: Ring<Elem = T>>(&self, ring: &R, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            a: self
                .a
                .iter()
                .zip(&other.a)
                .map(|(x, y)| ring.sub(x, y))
                .collect(),
        }
    }

    pub fn scale<R: Ring<Elem = T>>(&self, ring: &R, c: &T) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            a: self.a.iter().map(|x| ring.mul(x, c)).collect(),
        }
    }

    pub fn mul<R: Ring<Elem = T>>(&self, ring: &R, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        let mut out = Self::zero(ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let x = self.at(i, k);
                if ring.is_zero(x) {
                    continue;
                }
                for j in 0..other.cols {
                    let t = ring.mul(x, other.at(k, j));
                    *out.at_mut(i, j) = ring.add(out.at(i, j), &t);
                }
            }
        }
        out
    }

    pub fn pow<R: Ring<Elem = T>>(&self, ring: &R, n: usize) -> Self {
        assert_eq!(self.rows, self.cols);
        let mut acc = Self::ident(ring, self.rows);
        for _ in 0..n {
            acc = acc.mul(ring, self);
        }
        acc
    }

    pub fn transpose(&self) -> Self {
        let mut a = Vec::with_capacity(self.a.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                a.push(self.at(i, j).clone());
            }
        }
        Mat {
            rows: self.cols,
            cols: self.rows,
            a,
        }
    }

    pub fn kron<R: Ring<Elem = T>>(&self, ring: &R, other: &Self) -> Self {
        let mut out = Self::zero(ring, self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        *out.at_mut(i * other.rows + k, j * other.cols + l) =
                            ring.mul(self.at(i, j), other.at(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut a = self.a.clone();
        a.extend_from_slice(&other.a);
        Mat {
            rows: self.rows + other.rows,
            cols: self.cols,
            a,
        }
    }

    pub fn is_zero_mat<R: Ring<Elem = T>>(&self, ring: &R) -> bool {
        self.a.iter().all(|x| ring.is_zero(x))
    }

    /// Row echelon form over a field. Returns (echelon matrix, pivot columns).
    pub fn rref<R: Ring<Elem = T>>(&self, ring: &R) -> (Self, Vec<usize>) {
        assert!(ring.is_field(), "rref needs a field");
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !ring.is_zero(m.at(i, c))) else {
                continue;
            };
            for j in 0..m.cols {
                let tmp = m.at(r, j).clone();
                *m.at_mut(r, j) = m.at(pr, j).clone();
                *m.at_mut(pr, j) = tmp;
            }
            let inv = ring.inv(m.at(r, c)).expect("field inverse");
            for j in 0..m.cols {
                *m.at_mut(r, j) = ring.mul(m.at(r, j), &inv);
            }
            for i in 0..m.rows {
                if i != r && !ring.is_zero(m.at(i, c)) {
                    let f = m.at(i, c).clone();
                    for j in 0..m.cols {
                        let t = ring.mul(&f, m.at(r, j));
                        *m.at_mut(i, j) = ring.sub(m.at(i, j), &t);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank<R: Ring<Elem = T>>(&self, ring: &R) -> usize {
        self.rref(ring).1.len()
    }

    /// Basis of the row space, as rows of the returned matrix.
    pub fn row_basis<R: Ring<Elem = T>>(&self, ring: &R) -> Self {
        let (e, piv) = self.rref(ring);
        let mut a = Vec::new();
        for i in 0..piv.len() {
            a.extend_from_slice(e.row(i));
        }
        Mat {
            rows: piv.len(),
            cols: self.cols,
            a,
        }
    }

    /// Basis of `{x : x·self^T = 0}`, i.e. the left nullspace of `self^T`;
    /// with row-vector convention this is the kernel of `x ↦ x·self^T`.
    /// More convenient: `nullspace` treats `self` as a system `self·x^T = 0`
    /// over column unknowns and returns basis rows of the solution space.
    pub fn nullspace<R: Ring<Elem = T>>(&self, ring: &R) -> Self {
        let (e, piv) = self.rref(ring);
        let free: Vec<usize> = (0..self.cols).filter(|c| !piv.contains(c)).collect();
        let mut out = Self::zero(ring, free.len(), self.cols);
        for (k, &fc) in free.iter().enumerate() {
            *out.at_mut(k, fc) = ring.one();
            for (r, &pc) in piv.iter().enumerate() {
                *out.at_mut(k, pc) = ring.neg(e.at(r, fc));
            }
        }
        out
    }

    pub fn inverse<R: Ring<Elem = T>>(&self, ring: &R) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Self::zero(ring, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                *aug.at_mut(i, j) = self.at(i, j).clone();
            }
            *aug.at_mut(i, n + i) = ring.one();
        }
        let (e, piv) = aug.rref(ring);
        if piv.len() < n || piv[n - 1] >= n {
            return None;
        }
        let mut out = Self::zero(ring, n, n);
        for i in 0..n {
            for j in 0..n {
                *out.at_mut(i, j) = e.at(i, n + j).clone();
            }
        }
        Some(out)
    }

    /// Solve `X · self = target` for `X` (row vectors mapped through `self`).
    /// Returns `None` when some row of `target` is outside the row space.
    pub fn solve_left<R: Ring<Elem = T>>(&self, ring: &R, target: &Self) -> Option<Self> {
        assert_eq!(self.cols, target.cols);
        // transpose to a standard system: self^T · X^T = target^T
        let at = self.transpose();
        let bt = target.transpose();
        let mut aug = Self::zero(ring, at.rows, at.cols + bt.cols);
        for i in 0..at.rows {
            for j in 0..at.cols {
                *aug.at_mut(i, j) = at.at(i, j).clone();
            }
            for j in 0..bt.cols {
                *aug.at_mut(i, at.cols + j) = bt.at(i, j).clone();
            }
        }
        let (e, piv) = aug.rref(ring);
        // any pivot in the augmented block means inconsistency
        if piv.iter().any(|&c| c >= at.cols) {
            return None;
        }
        let mut xt = Self::zero(ring, at.cols, bt.cols);
        for (r, &pc) in piv.iter().enumerate() {
            for j in 0..bt.cols {
                *xt.at_mut(pc, j) = e.at(r, at.cols + j).clone();
            }
        }
        Some(xt.transpose())
    }
}

/// Dimension of the intersection of two row spaces.
pub fn row_space_intersection_dim<R: Ring>(ring: &R, a: &Mat<R::Elem>, b: &Mat<R::Elem>) -> usize {
    let ra = a.rank(ring);
    let rb = b.rank(ring);
    let sum = a.vstack(b).rank(ring);
    ra + rb - sum
}

/// Row-space basis of the intersection of two row spaces.
pub fn row_space_intersection<R: Ring>(
    ring: &R,
    a: &Mat<R::Elem>,
    b: &Mat<R::Elem>,
) -> Mat<R::Elem> {
    // x in both spaces: x = u·A = v·B. Solve [u, v]·[A; -B] = 0.
    let stacked = a.vstack(&b.scale(ring, &ring.from_i64(-1)));
    // kernel of y ↦ y · stacked, i.e. nullspace of stacked^T as a system
    let ker = stacked.transpose().nullspace(ring);
    if ker.rows == 0 {
        return Mat::zero(ring, 0, a.cols);
    }
    // first block of each kernel row gives coefficients against A
    let mut rows = Mat::zero(ring, ker.rows, a.cols);
    for i in 0..ker.rows {
        for k in 0..a.rows {
            let c = ker.at(i, k);
            if ring.is_zero(c) {
                continue;
            }
            for j in 0..a.cols {
                let t = ring.mul(c, a.at(k, j));
                *rows.at_mut(i, j) = ring.add(rows.at(i, j), &t);
            }
        }
    }
    rows.row_basis(ring)
}

/// Whether two row spaces are equal.
pub fn row_space_eq<R: Ring>(ring: &R, a: &Mat<R::Elem>, b: &Mat<R::Elem>) -> bool {
    let ra = a.rank(ring);
    let rb = b.rank(ring);
    ra == rb && a.vstack(b).rank(ring) == ra
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RatField;

    #[test]
    fn inverse_and_rank() {
        let r = RatField;
        let m = Mat::from_fn(&r, 2, 2, |i, j| r.from_i64([[2, 1], [1, 1]][i][j]));
        let inv = m.inverse(&r).unwrap();
        assert_eq!(m.mul(&r, &inv), Mat::ident(&r, 2));
        assert_eq!(m.rank(&r), 2);
    }

    #[test]
    fn nullspace_dims() {
        let r = RatField;
        let m = Mat::from_fn(&r, 2, 3, |i, j| r.from_i64([[1, 2, 3], [2, 4, 6]][i][j]));
        let ns = m.nullspace(&r);
        assert_eq!(ns.rows, 2);
        // each basis row x satisfies m·x^T = 0
        let prod = m.mul(&r, &ns.transpose());
        assert!(prod.is_zero_mat(&r));
    }

    #[test]
    fn solve_left_consistent() {
        let r = RatField;
        let a = Mat::from_fn(&r, 2, 3, |i, j| r.from_i64([[1, 0, 1], [0, 1, 1]][i][j]));
        let x = Mat::from_fn(&r, 1, 2, |_, j| r.from_i64([3, 4][j]));
        let target = x.mul(&r, &a);
        let sol = a.solve_left(&r, &target).unwrap();
        assert_eq!(sol.mul(&r, &a), target);
    }

    #[test]
    fn intersection_of_planes() {
        let r = RatField;
        let a = Mat::from_fn(&r, 2, 3, |i, j| r.from_i64([[1, 0, 0], [0, 1, 0]][i][j]));
        let b = Mat::from_fn(&r, 2, 3, |i, j| r.from_i64([[0, 1, 0], [0, 0, 1]][i][j]));
        assert_eq!(row_space_intersection_dim(&r, &a, &b), 1);
        let int = row_space_intersection(&r, &a, &b);
        assert_eq!(int.rows, 1);
        assert!(!r.is_zero(int.at(0, 1)));
        assert!(r.is_zero(int.at(0, 0)) && r.is_zero(int.at(0, 2)));
    }
}
