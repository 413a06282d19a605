//! Dense matrices over exact fields and fraction-free echelon reduction.

use crate::scalar::Field;
use std::ops::{Index, IndexMut};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Field> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn from_cols(cols: &[Vec<T>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, o.rows, "dimension mismatch in product");
        let mut out = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let cur = std::mem::replace(&mut out[(i, j)], T::zero());
                    out[(i, j)] = cur + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (k, x) in v.iter().enumerate() {
                    let a = &self[(i, k)];
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc + a.clone() * x.clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: &T) -> Mat<T> {
        let data = self.data.iter().map(|a| a.clone() * s.clone()).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Mat<T> {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn adjoint(&self) -> Mat<T> {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.rows.min(self.cols) {
            acc = acc + self[(i, i)].clone();
        }
        acc
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn rank(&self) -> usize {
        rref(self).1.len()
    }

    pub fn nullspace(&self) -> Vec<Vec<T>> {
        nullspace(self)
    }

    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut sign = T::one();
        let mut prev = T::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a[(i, k)].is_zero()) else {
                return T::zero();
            };
            if p != k {
                a.swap_rows(p, k);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a[(k, k)].clone() * a[(i, j)].clone()
                        - a[(i, k)].clone() * a[(k, j)].clone())
                        / prev.clone();
                    a[(i, j)] = v;
                }
                a[(i, k)] = T::zero();
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }

    /// Inverse via reduction of `[A | I]`; `None` when singular.
    pub fn inverse(&self) -> Option<Mat<T>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Mat::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = T::one();
        }
        let (r, piv) = rref(&aug);
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = r[(i, n + j)].clone();
            }
        }
        Some(out)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Kronecker product, `self` as the most significant factor.
    pub fn kron(&self, o: &Mat<T>) -> Mat<T> {
        let mut out = Mat::zeros(self.rows * o.rows, self.cols * o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = &self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        out[(i * o.rows + k, j * o.cols + l)] = a.clone() * o[(k, l)].clone();
                    }
                }
            }
        }
        out
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Reduced row echelon form and pivot columns.
///
/// The forward pass is Bareiss' fraction-free elimination; pivot rows are then
/// normalized and cleared upwards, which makes the result canonical.
pub fn rref<T: Field>(m: &Mat<T>) -> (Mat<T>, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut pivots = Vec::new();
    let mut prev = T::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        a.swap_rows(p, r);
        for i in r + 1..rows {
            if a[(i, c)].is_zero() {
                for j in c + 1..cols {
                    let v = a[(r, c)].clone() * a[(i, j)].clone() / prev.clone();
                    a[(i, j)] = v;
                }
                continue;
            }
            for j in c + 1..cols {
                let v = (a[(r, c)].clone() * a[(i, j)].clone()
                    - a[(i, c)].clone() * a[(r, j)].clone())
                    / prev.clone();
                a[(i, j)] = v;
            }
            a[(i, c)] = T::zero();
        }
        prev = a[(r, c)].clone();
        pivots.push(c);
        r += 1;
    }
    for (ri, &c) in pivots.iter().enumerate().rev() {
        let pv = a[(ri, c)].clone();
        for j in c..cols {
            let v = a[(ri, j)].clone() / pv.clone();
            a[(ri, j)] = v;
        }
        for i in 0..ri {
            let f = a[(i, c)].clone();
            if f.is_zero() {
                continue;
            }
            for j in c..cols {
                let v = a[(i, j)].clone() - f.clone() * a[(ri, j)].clone();
                a[(i, j)] = v;
            }
        }
    }
    for i in pivots.len()..rows {
        for j in 0..cols {
            a[(i, j)] = T::zero();
        }
    }
    (a, pivots)
}

/// Basis of `{x : m x = 0}`, one vector per free column, read off the RREF.
pub fn nullspace<T: Field>(m: &Mat<T>) -> Vec<Vec<T>> {
    let (r, piv) = rref(m);
    let free: Vec<usize> = (0..m.cols).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); m.cols];
            v[f] = T::one();
            for (ri, &pc) in piv.iter().enumerate() {
                v[pc] = -r[(ri, f)].clone();
            }
            v
        })
        .collect()
}

/// Solves `m x = b` exactly, returning one solution if consistent.
pub fn solve<T: Field>(m: &Mat<T>, b: &[T]) -> Option<Vec<T>> {
    let mut aug = Mat::zeros(m.rows, m.cols + 1);
    for i in 0..m.rows {
        for j in 0..m.cols {
            aug[(i, j)] = m[(i, j)].clone();
        }
        aug[(i, m.cols)] = b[i].clone();
    }
    let (r, piv) = rref(&aug);
    if piv.last() == Some(&m.cols) {
        return None;
    }
    let mut x = vec![T::zero(); m.cols];
    for (ri, &c) in piv.iter().enumerate() {
        x[c] = r[(ri, m.cols)].clone();
    }
    Some(x)
}

/// Rank of a set of vectors given as columns.
pub fn rank_of_vectors<T: Field>(vs: &[Vec<T>]) -> usize {
    if vs.is_empty() {
        return 0;
    }
    Mat::from_cols(vs).rank()
}

pub fn dot<T: Field>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc = acc + x.clone() * y.clone();
        }
    }
    acc
}

/// `sum eps_i a_i b_i`.
pub fn eps_dot<T: Field>(eps: &[i8], a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for ((x, y), &e) in a.iter().zip(b).zip(eps) {
        if x.is_zero() || y.is_zero() {
            continue;
        }
        let t = x.clone() * y.clone();
        acc = if e < 0 { acc - t } else { acc + t };
    }
    acc
}

/// Floating-point rank and nullspace by singular value decomposition.
pub mod float {
    use nalgebra::DMatrix;

    pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Vec::new();
        }
        let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
        singular_values(m).iter().filter(|&&s| s > tol).count()
    }

    /// Orthonormal basis of the right nullspace, columns of the result.
    pub fn nullspace(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
        let n = m.ncols();
        // pad so that the SVD returns a full V
        let rows = m.nrows().max(n);
        let mut a = DMatrix::zeros(rows, n);
        a.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        let svd = a.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let mut cols = Vec::new();
        for (i, s) in svd.singular_values.iter().enumerate() {
            if *s <= tol {
                cols.push(vt.row(i).transpose());
            }
        }
        if cols.is_empty() {
            return DMatrix::zeros(n, 0);
        }
        DMatrix::from_columns(&cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Q};
    use proptest::prelude::*;

    fn qm(rows: &[&[i64]]) -> Mat<Q> {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())
    }

    #[test]
    fn rref_of_known_matrix() {
        let m = qm(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        let (r, piv) = rref(&m);
        assert_eq!(piv, vec![0, 1]);
        assert_eq!(r, qm(&[&[1, 0, 1], &[0, 1, 1], &[0, 0, 0]]));
    }

    #[test]
    fn nullspace_is_annihilated() {
        let m = qm(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, -1, 2]]);
        let ns = nullspace(&m);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(m.mul_vec(&v).iter().all(|x| x == &q(0)));
        }
    }

    #[test]
    fn det_and_inverse_agree() {
        let m = qm(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(m.det(), q(18));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(3));
        assert!(qm(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn float_nullspace_of_rank_one() {
        let m = nalgebra::DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0]);
        assert_eq!(float::rank(&m, 1e-10), 1);
        let ns = float::nullspace(&m, 1e-10);
        assert_eq!(ns.ncols(), 2);
        assert!((&m * &ns).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn rank_nullity(entries in proptest::collection::vec(-3i64..=3, 12)) {
            let m = Mat::from_rows(entries.chunks(4).map(|r| r.iter().map(|&x| q(x)).collect()).collect());
            let ns = nullspace(&m);
            prop_assert_eq!(m.rank() + ns.len(), 4);
            for v in &ns {
                prop_assert!(m.mul_vec(v).iter().all(|x| *x == q(0)));
            }
        }

        #[test]
        fn det_multiplicative(a in proptest::collection::vec(-4i64..=4, 9), b in proptest::collection::vec(-4i64..=4, 9)) {
            let ma = Mat::from_rows(a.chunks(3).map(|r| r.iter().map(|&x| q(x)).collect()).collect());
            let mb = Mat::from_rows(b.chunks(3).map(|r| r.iter().map(|&x| q(x)).collect()).collect());
            prop_assert_eq!(ma.mul(&mb).det(), ma.det() * mb.det());
        }
    }
}
