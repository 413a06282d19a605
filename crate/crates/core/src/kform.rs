//! Exterior forms stored sparsely in the basis `e_{i1}^flat ∧ … ∧ e_{ik}^flat`.
//!
//! Indices are 0-based internally. Because `e_i^flat` is the metric dual of
//! `e_i`, a vector `l` has `l^flat` with the same coefficient vector, and a
//! linear map acts on coefficients exactly as on multivectors.

use crate::linalg::Mat;
use crate::scalar::Field;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct KForm<T> {
    pub dim: usize,
    pub degree: usize,
    pub coeffs: BTreeMap<Vec<usize>, T>,
}

/// Sorts `idx` in place; returns the permutation sign, or `None` on a repeated index.
pub fn sort_with_sign(idx: &mut [usize]) -> Option<i8> {
    let mut sign = 1i8;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && idx[j - 1] == idx[j] {
            return None;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(sign)
}

/// All strictly increasing `k`-tuples from `0..n`, in lexicographic order.
pub fn index_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

impl<T: Field> KForm<T> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        KForm { dim, degree, coeffs: BTreeMap::new() }
    }

    pub fn scalar(dim: usize, c: T) -> Self {
        let mut f = Self::zero(dim, 0);
        f.add_term(&[], c);
        f
    }

    /// The 1-form `x^flat`.
    pub fn from_vector(x: &[T]) -> Self {
        let mut f = Self::zero(x.len(), 1);
        for (i, c) in x.iter().enumerate() {
            f.add_term(&[i], c.clone());
        }
        f
    }

    pub fn basis(dim: usize, idx: &[usize]) -> Self {
        let mut f = Self::zero(dim, idx.len());
        f.add_term(idx, T::one());
        f
    }

    /// Adds `c · e_idx`, reordering `idx` with sign; repeated indices vanish.
    pub fn add_term(&mut self, idx: &[usize], c: T) {
        assert_eq!(idx.len(), self.degree, "term degree mismatch");
        assert!(idx.iter().all(|&i| i < self.dim), "index out of range");
        if c.is_zero() {
            return;
        }
        let mut key = idx.to_vec();
        let Some(sign) = sort_with_sign(&mut key) else {
            return;
        };
        let c = if sign < 0 { -c } else { c };
        let entry = self.coeffs.remove(&key).unwrap_or_else(T::zero) + c;
        if !entry.is_zero() {
            self.coeffs.insert(key, entry);
        }
    }

    pub fn coeff(&self, idx: &[usize]) -> T {
        let mut key = idx.to_vec();
        match sort_with_sign(&mut key) {
            None => T::zero(),
            Some(s) => {
                let c = self.coeffs.get(&key).cloned().unwrap_or_else(T::zero);
                if s < 0 {
                    -c
                } else {
                    c
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, o: &KForm<T>) -> KForm<T> {
        assert_eq!((self.dim, self.degree), (o.dim, o.degree), "form shape mismatch");
        let mut out = self.clone();
        for (k, v) in &o.coeffs {
            out.add_term(k, v.clone());
        }
        out
    }

    pub fn sub(&self, o: &KForm<T>) -> KForm<T> {
        self.add(&o.scale(&-T::one()))
    }

    pub fn scale(&self, s: &T) -> KForm<T> {
        let mut out = Self::zero(self.dim, self.degree);
        for (k, v) in &self.coeffs {
            out.add_term(k, v.clone() * s.clone());
        }
        out
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> KForm<U> {
        let mut out = KForm::zero(self.dim, self.degree);
        for (k, v) in &self.coeffs {
            out.add_term(k, f(v));
        }
        out
    }

    pub fn wedge(&self, o: &KForm<T>) -> KForm<T> {
        assert_eq!(self.dim, o.dim, "form dimension mismatch");
        let mut out = Self::zero(self.dim, self.degree + o.degree);
        if self.degree + o.degree > self.dim {
            return out;
        }
        for (a, x) in &self.coeffs {
            for (b, y) in &o.coeffs {
                if a.iter().any(|i| b.contains(i)) {
                    continue;
                }
                let mut idx = a.clone();
                idx.extend(b);
                out.add_term(&idx, x.clone() * y.clone());
            }
        }
        out
    }

    /// `x ⌟ self` with `e_i^flat(x) = eps_i x_i`.
    pub fn interior(&self, x: &[T], eps: &[i8]) -> KForm<T> {
        assert_eq!(x.len(), self.dim);
        assert!(self.degree > 0, "interior product of a 0-form");
        let mut out = Self::zero(self.dim, self.degree - 1);
        for (idx, c) in &self.coeffs {
            for (pos, &i) in idx.iter().enumerate() {
                if x[i].is_zero() {
                    continue;
                }
                let mut v = c.clone() * x[i].clone();
                if eps[i] < 0 {
                    v = -v;
                }
                if pos % 2 == 1 {
                    v = -v;
                }
                let rest: Vec<usize> = idx.iter().enumerate().filter(|(p, _)| *p != pos).map(|(_, &j)| j).collect();
                out.add_term(&rest, v);
            }
        }
        out
    }

    /// Push-forward along `a`: `e_i^flat ↦ Σ_j a[j][i] e_j^flat`.
    pub fn apply_linear(&self, a: &Mat<T>) -> KForm<T> {
        assert_eq!((a.rows, a.cols), (self.dim, self.dim));
        let mut out = Self::zero(self.dim, self.degree);
        let images: Vec<KForm<T>> = (0..self.dim).map(|i| KForm::from_vector(&a.col(i))).collect();
        for (idx, c) in &self.coeffs {
            let mut acc = KForm::scalar(self.dim, c.clone());
            for &i in idx {
                acc = acc.wedge(&images[i]);
            }
            out = out.add(&acc);
        }
        out
    }

    /// Push-forward along a map that is the identity outside the `(i, j)` plane,
    /// with `e_i ↦ b00 e_i + b10 e_j`, `e_j ↦ b01 e_i + b11 e_j`.
    pub fn apply_plane(&self, i: usize, j: usize, b: [[T; 2]; 2]) -> KForm<T> {
        let mut out = Self::zero(self.dim, self.degree);
        let det = b[0][0].clone() * b[1][1].clone() - b[0][1].clone() * b[1][0].clone();
        for (idx, c) in &self.coeffs {
            let has_i = idx.contains(&i);
            let has_j = idx.contains(&j);
            match (has_i, has_j) {
                (false, false) => out.add_term(idx, c.clone()),
                (true, true) => out.add_term(idx, c.clone() * det.clone()),
                (true, false) | (false, true) => {
                    let (src, col) = if has_i { (i, 0) } else { (j, 1) };
                    for (tgt, row) in [(i, 0), (j, 1)] {
                        let f = b[row][col].clone();
                        if f.is_zero() {
                            continue;
                        }
                        let new: Vec<usize> = idx.iter().map(|&k| if k == src { tgt } else { k }).collect();
                        out.add_term(&new, c.clone() * f);
                    }
                }
            }
        }
        out
    }

    /// Coefficient vector in the ordering of [`index_tuples`].
    pub fn dense(&self) -> Vec<T> {
        index_tuples(self.dim, self.degree).iter().map(|k| self.coeff(k)).collect()
    }

    /// Restricts to the index range `lo..hi`, reindexed from 0.
    pub fn restrict(&self, lo: usize, hi: usize) -> KForm<T> {
        let mut out = Self::zero(hi - lo, self.degree);
        for (idx, c) in &self.coeffs {
            if idx.iter().all(|&i| i >= lo && i < hi) {
                let k: Vec<usize> = idx.iter().map(|i| i - lo).collect();
                out.add_term(&k, c.clone());
            }
        }
        out
    }

    /// Embeds into dimension `dim` shifting indices by `offset`.
    pub fn embed(&self, dim: usize, offset: usize) -> KForm<T> {
        let mut out = Self::zero(dim, self.degree);
        for (idx, c) in &self.coeffs {
            let k: Vec<usize> = idx.iter().map(|i| i + offset).collect();
            out.add_term(&k, c.clone());
        }
        out
    }

    /// Evaluates the form on `k` vectors: `Σ_I c_I det[e_{I_a}^flat(v_b)]`.
    pub fn evaluate(&self, vs: &[Vec<T>], eps: &[i8]) -> T {
        assert_eq!(vs.len(), self.degree);
        let mut acc = T::zero();
        for (idx, c) in &self.coeffs {
            let mut m = Mat::zeros(self.degree, self.degree);
            for (a, &i) in idx.iter().enumerate() {
                for (b, v) in vs.iter().enumerate() {
                    let x = v[i].clone();
                    m[(a, b)] = if eps[i] < 0 { -x } else { x };
                }
            }
            acc = acc + c.clone() * if self.degree == 0 { T::one() } else { m.det() };
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Q};
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn sort_sign() {
        let mut a = vec![2, 0, 1];
        assert_eq!(sort_with_sign(&mut a), Some(1));
        let mut b = vec![1, 0];
        assert_eq!(sort_with_sign(&mut b), Some(-1));
        let mut c = vec![1, 0, 1];
        assert_eq!(sort_with_sign(&mut c), None);
    }

    #[test]
    fn wedge_anticommutes_for_one_forms() {
        let a = KForm::from_vector(&v(&[1, 2, 0, -1]));
        let b = KForm::from_vector(&v(&[0, 1, 3, 1]));
        assert_eq!(a.wedge(&b), b.wedge(&a).scale(&q(-1)));
        assert!(a.wedge(&a).is_zero());
    }

    #[test]
    fn interior_is_antiderivation() {
        let eps = [-1i8, 1, -1, 1];
        let a = KForm::from_vector(&v(&[1, 2, 0, -1]));
        let b = KForm::from_vector(&v(&[0, 1, 3, 1]));
        let x = v(&[2, -1, 1, 1]);
        let lhs = a.wedge(&b).interior(&x, &eps);
        let ax = a.interior(&x, &eps).coeff(&[]);
        let bx = b.interior(&x, &eps).coeff(&[]);
        let rhs = b.scale(&ax).sub(&a.scale(&bx));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn plane_action_matches_general() {
        let mut f = KForm::<Q>::zero(4, 2);
        f.add_term(&[0, 1], q(3));
        f.add_term(&[1, 3], q(-2));
        f.add_term(&[0, 2], q(5));
        let b = [[q(3), q(-4)], [q(4), q(3)]];
        let mut a = Mat::identity(4);
        a[(1, 1)] = q(3);
        a[(1, 2)] = q(-4);
        a[(2, 1)] = q(4);
        a[(2, 2)] = q(3);
        assert_eq!(f.apply_plane(1, 2, b), f.apply_linear(&a));
    }

    #[test]
    fn evaluate_recovers_coefficients() {
        let eps = [-1i8, 1, 1];
        let mut f = KForm::<Q>::zero(3, 2);
        f.add_term(&[0, 2], q(7));
        let e0 = v(&[1, 0, 0]);
        let e2 = v(&[0, 0, 1]);
        assert_eq!(f.evaluate(&[e0, e2], &eps), q(-7));
    }

    proptest! {
        #[test]
        fn linear_action_is_functorial(a in proptest::collection::vec(-3i64..=3, 9), b in proptest::collection::vec(-3i64..=3, 9), c in proptest::collection::vec(-3i64..=3, 3)) {
            let ma = Mat::from_rows(a.chunks(3).map(|r| r.iter().map(|&x| q(x)).collect()).collect());
            let mb = Mat::from_rows(b.chunks(3).map(|r| r.iter().map(|&x| q(x)).collect()).collect());
            let mut f = KForm::<Q>::zero(3, 2);
            f.add_term(&[0, 1], q(c[0]));
            f.add_term(&[0, 2], q(c[1]));
            f.add_term(&[1, 2], q(c[2]));
            prop_assert_eq!(f.apply_linear(&mb).apply_linear(&ma), f.apply_linear(&ma.mul(&mb)));
            let top = KForm::<Q>::basis(3, &[0, 1, 2]);
            prop_assert_eq!(top.apply_linear(&ma), top.scale(&ma.det()));
        }
    }
}
