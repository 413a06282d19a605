//! Explicit complex representations of `Cl_{p,q}` built from Kronecker products
//! of 2x2 matrices, spin group elements and the double cover `lambda`.
//!
//! Every generator is a signed permutation matrix with entries in `{±1, ±i}`,
//! so generators are stored as [`Mono`] and all Clifford relations are checked
//! without any arithmetic. Basis index `b` of `C^{2^m}` corresponds to the
//! tensor `u(eps_1, ..., eps_m)`, with bit `j-1` of `b` set iff `eps_j = -1`.

use crate::error::{Error, Result};
use crate::kform::KForm;
use crate::linalg::{self, Mat};
use crate::random::{self, Rng64};
use crate::scalar::{i_pow, Cq, Field, Q};
use num_complex::Complex;
use num_traits::{Num, One, Zero};
use serde::{Deserialize, Serialize};

/// Real base field of a complex spinor coefficient.
pub trait Base: Field + Num {}
impl<T: Field + Num> Base for T {}

pub type C<T> = Complex<T>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
    pub eps: Vec<i8>,
}

impl Signature {
    pub fn from_eps(eps: Vec<i8>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::InvalidSignature("n = 0".into()));
        }
        if eps.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::InvalidSignature("eps entries must be ±1".into()));
        }
        let p = eps.iter().filter(|&&e| e < 0).count();
        Ok(Signature { p, q: eps.len() - p, eps })
    }

    /// `eps = (-1, ..., -1, +1, ..., +1)`.
    pub fn standard(p: usize, q: usize) -> Result<Self> {
        let mut eps = vec![-1i8; p];
        eps.extend(std::iter::repeat_n(1i8, q));
        Self::from_eps(eps)
    }

    /// `eps_j = (-1)^j` (1-based), which makes the representation real.
    /// Gives `(m, m)` for `n = 2m` and `(m+1, m)` for `n = 2m+1`.
    pub fn alternating(n: usize) -> Result<Self> {
        Self::from_eps((1..=n).map(|j| if j % 2 == 1 { -1 } else { 1 }).collect())
    }

    /// `eps_i = (-1)^i` for `i <= 2p`, `+1` afterwards. Requires `2p <= n`.
    pub fn adapted(p: usize, q: usize) -> Result<Self> {
        if p > q {
            return Err(Error::InvalidSignature(format!("adapted convention needs p <= q, got ({p},{q})")));
        }
        let n = p + q;
        Self::from_eps((1..=n).map(|i| if i <= 2 * p && i % 2 == 1 { -1 } else { 1 }).collect())
    }

    pub fn n(&self) -> usize {
        self.eps.len()
    }

    /// `m = floor(n/2)`, so the spinor module has dimension `2^m`.
    pub fn m(&self) -> usize {
        self.n() / 2
    }

    pub fn is_split(&self) -> bool {
        self.p == self.q || self.p == self.q + 1
    }

    pub fn timelike(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.eps[i] < 0).collect()
    }

    pub fn dot<T: Field>(&self, a: &[T], b: &[T]) -> T {
        linalg::eps_dot(&self.eps, a, b)
    }
}

/// Monomial matrix: `M e_j = i^{ph[j]} e_{col[j]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mono {
    pub col: Vec<usize>,
    pub ph: Vec<u8>,
}

/// `i^k · c`.
pub fn rot<T: Base>(c: &C<T>, k: u8) -> C<T> {
    match k % 4 {
        0 => c.clone(),
        1 => C::new(-c.im.clone(), c.re.clone()),
        2 => C::new(-c.re.clone(), -c.im.clone()),
        _ => C::new(c.im.clone(), -c.re.clone()),
    }
}

impl Mono {
    pub fn identity(n: usize) -> Self {
        Mono { col: (0..n).collect(), ph: vec![0; n] }
    }

    pub fn dim(&self) -> usize {
        self.col.len()
    }

    /// `self ∘ o`.
    pub fn mul(&self, o: &Mono) -> Mono {
        let col = o.col.iter().map(|&k| self.col[k]).collect();
        let ph = o.col.iter().zip(&o.ph).map(|(&k, &p)| (p + self.ph[k]) % 4).collect();
        Mono { col, ph }
    }

    pub fn with_phase(&self, k: i64) -> Mono {
        let k = k.rem_euclid(4) as u8;
        Mono { col: self.col.clone(), ph: self.ph.iter().map(|p| (p + k) % 4).collect() }
    }

    pub fn apply<T: Base>(&self, v: &[C<T>]) -> Vec<C<T>> {
        let mut out = vec![C::zero(); v.len()];
        for (j, x) in v.iter().enumerate() {
            if !x.is_zero() {
                out[self.col[j]] = rot(x, self.ph[j]);
            }
        }
        out
    }

    pub fn dense<T: Base>(&self) -> Mat<C<T>> {
        let n = self.dim();
        let mut m = Mat::zeros(n, n);
        for j in 0..n {
            m[(self.col[j], j)] = i_pow::<T>(self.ph[j] as i64);
        }
        m
    }

    pub fn is_identity(&self) -> bool {
        self.col.iter().enumerate().all(|(j, &c)| c == j) && self.ph.iter().all(|&p| p == 0)
    }

    pub fn is_neg_identity(&self) -> bool {
        self.col.iter().enumerate().all(|(j, &c)| c == j) && self.ph.iter().all(|&p| p == 2)
    }

    pub fn is_real(&self) -> bool {
        self.ph.iter().all(|p| p % 2 == 0)
    }

    /// Diagonal with `i^ph` entries, if diagonal.
    pub fn diagonal(&self) -> Option<Vec<u8>> {
        if self.col.iter().enumerate().all(|(j, &c)| c == j) {
            Some(self.ph.clone())
        } else {
            None
        }
    }

    pub fn trace<T: Base>(&self) -> C<T> {
        let mut t = C::zero();
        for j in 0..self.dim() {
            if self.col[j] == j {
                t = t + i_pow::<T>(self.ph[j] as i64);
            }
        }
        t
    }
}

/// A 2x2 factor acting on one tensor slot.
const G1: ([usize; 2], [u8; 2]) = ([1, 0], [1, 1]);
const G2: ([usize; 2], [u8; 2]) = ([1, 0], [0, 2]);

#[derive(Clone, Debug)]
pub struct CliffordRep {
    pub sig: Signature,
    pub dim: usize,
    pub gens: Vec<Mono>,
    /// `rho(omega_C)` where `omega_C = (-i)^volume_exponent e_1 ··· e_n`.
    pub volume: Mono,
    pub volume_exponent: i64,
}

fn tau_phase(e: i8) -> u8 {
    if e < 0 {
        1
    } else {
        0
    }
}

impl CliffordRep {
    pub fn new(sig: Signature) -> Result<Self> {
        let n = sig.n();
        if n == 0 {
            return Err(Error::InvalidSignature("n = 0".into()));
        }
        let m = sig.m();
        let dim = 1usize << m;
        let mut gens = Vec::with_capacity(n);
        for j in 0..m {
            for (k, f) in [G1, G2].iter().enumerate() {
                let e = sig.eps[2 * j + k];
                gens.push(slot_generator(dim, j, f, tau_phase(e)));
            }
        }
        if n % 2 == 1 {
            // tau · i · T ⊗ ... ⊗ T: T = diag(-1, 1) on every slot.
            let base = tau_phase(sig.eps[n - 1]) + 1;
            let ph = (0..dim).map(|b| (base + 2 * (m as u32 - (b as u32).count_ones()) as u8) % 4).collect();
            gens.push(Mono { col: (0..dim).collect(), ph });
        }
        let product = |gens: &[Mono]| gens.iter().fold(Mono::identity(dim), |acc, g| acc.mul(g));
        // omega_C = (-i)^e · e_1 ··· e_n = i^{-e} · e_1 ··· e_n
        let exponent = n.div_ceil(2) as i64 - sig.p as i64;
        let mut volume = product(&gens).with_phase(-exponent);
        if n % 2 == 1 && volume.is_neg_identity() {
            // The first projection sends omega_C to -Id here; use the second one.
            let last = gens.last_mut().expect("n >= 1");
            *last = last.with_phase(2);
            volume = product(&gens).with_phase(-exponent);
        }
        if n % 2 == 1 && !volume.is_identity() {
            return Err(Error::InvalidSignature("volume element is not mapped to Id".into()));
        }
        Ok(CliffordRep { sig, dim, gens, volume, volume_exponent: exponent })
    }

    pub fn n(&self) -> usize {
        self.sig.n()
    }

    pub fn is_real_backed(&self) -> bool {
        self.gens.iter().all(Mono::is_real)
    }

    /// `rho(e_{i_1}) ··· rho(e_{i_k})`.
    pub fn product(&self, idx: &[usize]) -> Mono {
        let mut out = Mono::identity(self.dim);
        for &i in idx {
            out = out.mul(&self.gens[i]);
        }
        out
    }

    /// Checks `rho(e_i) rho(e_j) + rho(e_j) rho(e_i) = -2 eps_i delta_ij`.
    pub fn check_relations(&self) -> bool {
        let n = self.n();
        for i in 0..n {
            let sq = self.gens[i].mul(&self.gens[i]);
            let ok = if self.sig.eps[i] > 0 { sq.is_neg_identity() } else { sq.is_identity() };
            if !ok {
                return false;
            }
            for j in (i + 1)..n {
                let a = self.gens[i].mul(&self.gens[j]);
                let b = self.gens[j].mul(&self.gens[i]);
                if a.col != b.col || a.ph.iter().zip(&b.ph).any(|(x, y)| (x + 2) % 4 != *y) {
                    return false;
                }
            }
        }
        true
    }

    /// For even `n`: `omega^2 = Id` and `omega` anticommutes with each generator.
    /// For odd `n`: `omega = Id`.
    pub fn check_volume(&self) -> bool {
        if self.n() % 2 == 1 {
            return self.volume.is_identity();
        }
        if !self.volume.mul(&self.volume).is_identity() {
            return false;
        }
        self.gens.iter().all(|g| {
            let a = self.volume.mul(g);
            let b = g.mul(&self.volume);
            a.col == b.col && a.ph.iter().zip(&b.ph).all(|(x, y)| (x + 2) % 4 == *y)
        })
    }

    /// Basis index of `u(eps_1, ..., eps_m)`.
    pub fn u_index(&self, eps: &[i8]) -> usize {
        assert_eq!(eps.len(), self.sig.m());
        eps.iter().enumerate().map(|(j, &e)| if e < 0 { 1 << j } else { 0 }).sum()
    }

    /// `(eps_1, ..., eps_m)` of basis index `b`.
    pub fn u_label(&self, b: usize) -> Vec<i8> {
        (0..self.sig.m()).map(|j| if b >> j & 1 == 1 { -1 } else { 1 }).collect()
    }

    pub fn basis<T: Base>(&self, b: usize) -> Vec<C<T>> {
        let mut v = vec![C::zero(); self.dim];
        v[b] = C::one();
        v
    }

    /// Basis indices spanning the `sign` eigenspace of `omega_C` (even `n`).
    pub fn half_spinor_indices(&self, sign: i8) -> Vec<usize> {
        let diag = self.volume.diagonal().expect("volume element is diagonal");
        let want = if sign > 0 { 0 } else { 2 };
        (0..self.dim).filter(|&b| diag[b] == want).collect()
    }

    /// Sign `s` such that `Delta^± = span{u(eps) : prod eps = ±s}`.
    pub fn half_spinor_product_sign(&self) -> Option<i8> {
        let plus = self.half_spinor_indices(1);
        let prod = |b: usize| self.u_label(b).iter().product::<i8>();
        let s = prod(*plus.first()?);
        if plus.iter().all(|&b| prod(b) == s) && plus.len() * 2 == self.dim {
            Some(s)
        } else {
            None
        }
    }

    pub fn act<T: Base>(&self, i: usize, s: &[C<T>]) -> Vec<C<T>> {
        self.gens[i].apply(s)
    }

    /// `x · s = sum_i x_i rho(e_i) s`, complex bilinear in `x`.
    pub fn vec_mul<T: Base>(&self, x: &[C<T>], s: &[C<T>]) -> Result<Vec<C<T>>> {
        self.check_dims(x.len(), s.len())?;
        let mut out = vec![C::zero(); self.dim];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            let g = &self.gens[i];
            for (j, sj) in s.iter().enumerate() {
                if !sj.is_zero() {
                    let k = g.col[j];
                    out[k] = out[k].clone() + rot(sj, g.ph[j]) * xi.clone();
                }
            }
        }
        Ok(out)
    }

    /// `x · s` for a real vector.
    pub fn real_vec_mul<T: Base>(&self, x: &[T], s: &[C<T>]) -> Result<Vec<C<T>>> {
        let xc: Vec<C<T>> = x.iter().map(|a| C::new(a.clone(), T::zero())).collect();
        self.vec_mul(&xc, s)
    }

    /// `omega · s = sum_I omega_I e_{i_1} ··· e_{i_k} s`.
    pub fn form_mul<T: Base>(&self, w: &KForm<C<T>>, s: &[C<T>]) -> Result<Vec<C<T>>> {
        self.check_dims(w.dim, s.len())?;
        let mut out = vec![C::zero(); self.dim];
        for (idx, c) in &w.coeffs {
            let img = self.product(idx).apply(s);
            for (o, v) in out.iter_mut().zip(img) {
                *o = o.clone() + v * c.clone();
            }
        }
        Ok(out)
    }

    /// Same as [`Self::form_mul`] for a real form.
    pub fn real_form_mul<T: Base>(&self, w: &KForm<T>, s: &[C<T>]) -> Result<Vec<C<T>>> {
        self.form_mul(&w.map(|c| C::new(c.clone(), T::zero())), s)
    }

    fn check_dims(&self, n: usize, d: usize) -> Result<()> {
        if n != self.n() {
            return Err(Error::Dimension { expected: self.n(), got: n });
        }
        if d != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: d });
        }
        Ok(())
    }

    /// `[rho(e_1) s | ... | rho(e_n) s]`.
    pub fn kernel_matrix<T: Base>(&self, s: &[C<T>]) -> Mat<C<T>> {
        let cols: Vec<Vec<C<T>>> = (0..self.n()).map(|i| self.act(i, s)).collect();
        Mat::from_cols(&cols)
    }

    /// `ker_C s` as an echelon basis of `C^n`.
    pub fn kernel_complex<T: Base>(&self, s: &[C<T>]) -> Result<Vec<Vec<C<T>>>> {
        nonzero(s)?;
        Ok(self.kernel_matrix(s).nullspace())
    }

    /// `ker s ⊂ R^n` as an echelon basis.
    pub fn kernel_real<T: Base>(&self, s: &[C<T>]) -> Result<Vec<Vec<T>>> {
        nonzero(s)?;
        Ok(real_stack(&self.kernel_matrix(s)).nullspace())
    }

    pub fn purity<T: Base>(&self, s: &[C<T>]) -> Result<Purity> {
        let complex_dim = self.kernel_complex(s)?.len();
        let real_index = self.kernel_real(s)?.len();
        let n = self.n();
        let is_real = s.iter().all(|c| c.im.is_zero());
        let real_pure = if self.is_real_backed() && is_real && self.sig.is_split() {
            Some(real_index == self.sig.m())
        } else {
            None
        };
        // Maximal isotropic subspaces of C^n have dimension floor(n/2).
        Ok(Purity { complex_dim, real_index, pure: complex_dim == n / 2, real_pure })
    }

    /// Antilinear `J = C ∘ conj` commuting with every generator and with `J^2 = Id`,
    /// returned as the matrix `C`; `None` when no such real structure exists.
    pub fn real_structure(&self) -> Option<Mat<Cq>> {
        let d = self.dim;
        if self.is_real_backed() {
            // plain conjugation commutes with real generators; unique up to scale by Schur
            return Some(Mat::identity(d));
        }
        let mut rows: Vec<Vec<Cq>> = Vec::new();
        // unknown c_{ab} at position a*d + b
        for g in &self.gens {
            let r: Mat<Cq> = g.dense();
            let rc = r.map(|z| z.conj());
            for a in 0..d {
                for b in 0..d {
                    let mut row = vec![Cq::zero(); d * d];
                    for k in 0..d {
                        row[a * d + k] = row[a * d + k].clone() + rc[(k, b)].clone();
                        row[k * d + b] = row[k * d + b].clone() - r[(a, k)].clone();
                    }
                    if row.iter().any(|z| !z.is_zero()) {
                        rows.push(row);
                    }
                }
            }
        }
        let ns = Mat::from_rows(rows).nullspace();
        if ns.len() != 1 {
            return None;
        }
        let c = Mat::from_rows(ns[0].chunks(d).map(|r| r.to_vec()).collect());
        let sq = c.mul(&c.map(|z| z.conj()));
        let lam = sq[(0, 0)].clone();
        if lam.im != Q::zero() || lam.re <= Q::zero() || sq != Mat::identity(d).scale(&lam) {
            return None;
        }
        let root = rational_sqrt(&lam.re)?;
        Some(c.scale(&Cq::new(Q::one() / root, Q::zero())))
    }
}

/// Exact square root of a nonnegative rational, when rational.
pub fn rational_sqrt(x: &Q) -> Option<Q> {
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    let r = Q::new(n, d);
    if &(r.clone() * r.clone()) == x {
        Some(r)
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Purity {
    pub complex_dim: usize,
    pub real_index: usize,
    pub pure: bool,
    /// Real purity; only defined for real spinors of real-backed split reps.
    pub real_pure: Option<bool>,
}

fn nonzero<T: Base>(s: &[C<T>]) -> Result<()> {
    if s.iter().all(|c| c.is_zero()) {
        Err(Error::ZeroSpinor)
    } else {
        Ok(())
    }
}

/// Real-linear system `[Re M; Im M]` whose kernel is `{x real : M x = 0}`.
pub fn real_stack<T: Base>(m: &Mat<C<T>>) -> Mat<T> {
    let mut out = Mat::zeros(2 * m.rows, m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            out[(i, j)] = m[(i, j)].re.clone();
            out[(m.rows + i, j)] = m[(i, j)].im.clone();
        }
    }
    out
}

fn slot_generator(dim: usize, slot: usize, f: &([usize; 2], [u8; 2]), tau: u8) -> Mono {
    let mut col = vec![0; dim];
    let mut ph = vec![0; dim];
    let low_mask = (1usize << slot) - 1;
    for b in 0..dim {
        let bit = (b >> slot) & 1;
        let nb = (b & !(1 << slot)) | (f.0[bit] << slot);
        let zeros_below = slot as u32 - (b & low_mask).count_ones();
        col[b] = nb;
        ph[b] = ((tau as u32 + f.1[bit] as u32 + 2 * zeros_below) % 4) as u8;
    }
    Mono { col, ph }
}

pub fn to_complex<T: Base>(x: &[T]) -> Vec<C<T>> {
    x.iter().map(|a| C::new(a.clone(), T::zero())).collect()
}

/// One factor `c + s e_i e_j` of a spin element.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinFactor<T> {
    pub i: usize,
    pub j: usize,
    pub c: T,
    pub s: T,
}

/// Element `u = f_1 f_2 ··· f_r` of `Spin^+(p,q)` with its image `lambda(u) ∈ SO^+(p,q)`.
#[derive(Clone, Debug)]
pub struct SpinElement<T> {
    pub factors: Vec<SpinFactor<T>>,
    pub so: Mat<T>,
}

impl<T: Base> SpinElement<T> {
    pub fn from_factors(rep: &CliffordRep, factors: Vec<SpinFactor<T>>) -> Result<Self> {
        let n = rep.n();
        let mut so = Mat::identity(n);
        for f in &factors {
            if f.i == f.j || f.i >= n || f.j >= n {
                return Err(Error::InvalidFactor(format!("plane ({}, {})", f.i + 1, f.j + 1)));
            }
            let ee = rep.sig.eps[f.i] * rep.sig.eps[f.j];
            let c2 = f.c.clone() * f.c.clone();
            let s2 = f.s.clone() * f.s.clone();
            let unit = if ee > 0 { c2 + s2 } else { c2 - s2 };
            if !unit.is_one() {
                return Err(Error::InvalidFactor(format!("(c, s) off the unit {}", if ee > 0 { "circle" } else { "hyperbola" })));
            }
            let plane = factor_plane(&rep.sig, f);
            so = so.mul(&plane);
        }
        Ok(SpinElement { factors, so })
    }

    pub fn identity(rep: &CliffordRep) -> Self {
        SpinElement { factors: vec![], so: Mat::identity(rep.n()) }
    }

    /// `u · s`.
    pub fn apply(&self, rep: &CliffordRep, s: &[C<T>]) -> Vec<C<T>> {
        let mut v = s.to_vec();
        for f in self.factors.iter().rev() {
            let b = rep.gens[f.i].mul(&rep.gens[f.j]).apply(&v);
            v = v.iter().zip(b).map(|(x, y)| x.clone() * C::new(f.c.clone(), T::zero()) + y * C::new(f.s.clone(), T::zero())).collect();
        }
        v
    }

    /// `u^{-1} · s`.
    pub fn apply_inverse(&self, rep: &CliffordRep, s: &[C<T>]) -> Vec<C<T>> {
        let mut v = s.to_vec();
        for f in &self.factors {
            let b = rep.gens[f.i].mul(&rep.gens[f.j]).apply(&v);
            v = v.iter().zip(b).map(|(x, y)| x.clone() * C::new(f.c.clone(), T::zero()) - y * C::new(f.s.clone(), T::zero())).collect();
        }
        v
    }

    /// Dense matrix of `u` on the spinor module.
    pub fn matrix(&self, rep: &CliffordRep) -> Mat<C<T>> {
        let cols: Vec<Vec<C<T>>> = (0..rep.dim).map(|b| self.apply(rep, &rep.basis(b))).collect();
        Mat::from_cols(&cols)
    }

    /// `lambda(u)` acting on a vector.
    pub fn act_vector(&self, x: &[T]) -> Vec<T> {
        self.so.mul_vec(x)
    }

    /// `lambda(u)` acting on a form, one plane at a time.
    pub fn act_form(&self, sig: &Signature, w: &KForm<T>) -> KForm<T> {
        let mut out = w.clone();
        for f in self.factors.iter().rev() {
            let a = factor_plane(sig, f);
            let b = [[a[(f.i, f.i)].clone(), a[(f.i, f.j)].clone()], [a[(f.j, f.i)].clone(), a[(f.j, f.j)].clone()]];
            out = out.apply_plane(f.i, f.j, b);
        }
        out
    }

    /// Independent check of `so`: `u rho(e_k) u^{-1} = sum_l so[l][k] rho(e_l)` exactly.
    pub fn verify_lambda(&self, rep: &CliffordRep) -> bool {
        let u = self.matrix(rep);
        let uinv_cols: Vec<Vec<C<T>>> = (0..rep.dim).map(|b| self.apply_inverse(rep, &rep.basis(b))).collect();
        let uinv = Mat::from_cols(&uinv_cols);
        if u.mul(&uinv) != Mat::identity(rep.dim) {
            return false;
        }
        let gens: Vec<Mat<C<T>>> = rep.gens.iter().map(|g| g.dense()).collect();
        for k in 0..rep.n() {
            let conj = u.mul(&gens[k]).mul(&uinv);
            let mut rhs = Mat::zeros(rep.dim, rep.dim);
            for (l, g) in gens.iter().enumerate() {
                let a = &self.so[(l, k)];
                if !a.is_zero() {
                    rhs = rhs.add(&g.scale(&C::new(a.clone(), T::zero())));
                }
            }
            if conj != rhs {
                return false;
            }
        }
        true
    }

    /// `so` preserves `<·,·>_{p,q}` and has determinant one.
    pub fn so_is_orthogonal(&self, sig: &Signature) -> bool {
        let n = sig.n();
        let mut eta = Mat::zeros(n, n);
        for i in 0..n {
            eta[(i, i)] = T::from_i64(sig.eps[i] as i64);
        }
        self.so.transpose().mul(&eta).mul(&self.so) == eta && self.so.det().is_one()
    }
}

/// `lambda(c + s e_i e_j)`: rotation or boost in the `(i, j)` plane.
fn factor_plane<T: Base>(sig: &Signature, f: &SpinFactor<T>) -> Mat<T> {
    let n = sig.n();
    let ei = T::from_i64(sig.eps[f.i] as i64);
    let ej = T::from_i64(sig.eps[f.j] as i64);
    let cs2 = T::from_i64(2) * f.c.clone() * f.s.clone();
    let diag = f.c.clone() * f.c.clone() - ei.clone() * ej.clone() * f.s.clone() * f.s.clone();
    let mut a = Mat::identity(n);
    a[(f.i, f.i)] = diag.clone();
    a[(f.j, f.j)] = diag;
    a[(f.j, f.i)] = cs2.clone() * ei;
    a[(f.i, f.j)] = -(cs2 * ej);
    a
}

/// Rational point on the unit circle (`euclid`) or the right branch of the unit hyperbola.
pub fn unit_point(t: &Q, euclid: bool) -> (Q, Q) {
    let one = Q::one();
    let t2 = t.clone() * t.clone();
    let two_t = t.clone() * Q::from_integer(2.into());
    if euclid {
        let d = one.clone() + t2.clone();
        ((one - t2) / d.clone(), two_t / d)
    } else {
        let d = one.clone() - t2.clone();
        ((one + t2) / d.clone(), two_t / d)
    }
}

/// Random product of `count` exact plane factors.
pub fn random_spin_element(rep: &CliffordRep, r: &mut Rng64, count: usize) -> SpinElement<Q> {
    use rand::Rng;
    let n = rep.n();
    let mut factors = Vec::with_capacity(count);
    if n >= 2 {
        for _ in 0..count {
            let i = r.gen_range(0..n);
            let mut j = r.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let t = random::unit_param(r);
            let (c, s) = unit_point(&t, rep.sig.eps[i] == rep.sig.eps[j]);
            factors.push(SpinFactor { i, j, c, s });
        }
    }
    SpinElement::from_factors(rep, factors).expect("sampled factors are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{complex_spinor, int_vec, rng};
    use crate::scalar::{cq, q, qf};
    use proptest::prelude::*;

    #[test]
    fn two_dimensional_example() {
        let rep = CliffordRep::new(Signature::from_eps(vec![-1, 1]).unwrap()).unwrap();
        let e1: Mat<Cq> = rep.gens[0].dense();
        let e2: Mat<Cq> = rep.gens[1].dense();
        assert_eq!(e1, Mat::from_rows(vec![vec![cq(0, 0), cq(-1, 0)], vec![cq(-1, 0), cq(0, 0)]]));
        assert_eq!(e2, Mat::from_rows(vec![vec![cq(0, 0), cq(-1, 0)], vec![cq(1, 0), cq(0, 0)]]));
    }

    #[test]
    fn relations_and_volume_all_small_signatures() {
        for n in 1..=10 {
            for p in 0..=n {
                let rep = CliffordRep::new(Signature::standard(p, n - p).unwrap()).unwrap();
                assert!(rep.check_relations(), "({p},{})", n - p);
                assert!(rep.check_volume(), "({p},{})", n - p);
            }
            let alt = CliffordRep::new(Signature::alternating(n).unwrap()).unwrap();
            assert!(alt.check_relations() && alt.check_volume());
            assert!(alt.is_real_backed());
        }
    }

    #[test]
    fn odd_volume_uses_floor_exponent() {
        let rep = CliffordRep::new(Signature::standard(1, 2).unwrap()).unwrap();
        assert!(rep.volume.is_identity());
        for n in [1usize, 3, 5, 7, 9] {
            let m = n / 2;
            for p in 0..=n {
                let rep = CliffordRep::new(Signature::standard(p, n - p).unwrap()).unwrap();
                assert_eq!(rep.volume_exponent, n.div_ceil(2) as i64 - p as i64);
                // The last generator is tau · (±i) T ⊗ ... ⊗ T, with the minus sign iff p - m is odd.
                let sign_flipped = rep.gens[n - 1].ph[dim_last(&rep)] != expected_first_projection(&rep);
                assert_eq!(sign_flipped, (p + m) % 2 == 1, "({p},{})", n - p);
            }
        }
    }

    fn dim_last(rep: &CliffordRep) -> usize {
        rep.dim - 1
    }

    /// Phase of `tau · i · T ⊗ ... ⊗ T` at the basis vector `u(-1, ..., -1)`.
    fn expected_first_projection(rep: &CliffordRep) -> u8 {
        tau_phase(*rep.sig.eps.last().unwrap()) + 1
    }

    #[test]
    fn half_spinors_match_eps_products() {
        for n in [2usize, 4, 6, 8] {
            for p in 0..=n {
                let rep = CliffordRep::new(Signature::standard(p, n - p).unwrap()).unwrap();
                assert_eq!(rep.half_spinor_indices(1).len(), rep.dim / 2);
                assert!(rep.half_spinor_product_sign().is_some());
            }
        }
    }

    #[test]
    fn vector_multiplication_example() {
        let rep = CliffordRep::new(Signature::from_eps(vec![-1, 1]).unwrap()).unwrap();
        let x = vec![q(1), q(1)];
        let s = rep.basis::<Q>(1);
        assert_eq!(rep.real_vec_mul(&x, &s).unwrap(), vec![cq(-2, 0), cq(0, 0)]);
        let zero = vec![q(0), q(0)];
        assert!(rep.real_vec_mul(&zero, &s).unwrap().iter().all(|c| c.is_zero()));
    }

    #[test]
    fn form_mul_matches_two_vector_products() {
        let rep = CliffordRep::new(Signature::standard(2, 3).unwrap()).unwrap();
        let s = complex_spinor(&mut rng(3), rep.dim);
        let w = KForm::<Q>::basis(5, &[0, 1]);
        let lhs = rep.real_form_mul(&w, &s).unwrap();
        let rhs = rep.act(0, &rep.act(1, &s));
        assert_eq!(lhs, rhs);
        let c = KForm::scalar(5, q(3));
        assert_eq!(rep.real_form_mul(&c, &s).unwrap(), s.iter().map(|z| z * cq(3, 0)).collect::<Vec<_>>());
    }

    #[test]
    fn euclidean_factor_rotates_by_double_angle() {
        let rep = CliffordRep::new(Signature::standard(0, 3).unwrap()).unwrap();
        let u = SpinElement::from_factors(&rep, vec![SpinFactor { i: 0, j: 1, c: qf(3, 5), s: qf(4, 5) }]).unwrap();
        let cos2 = qf(-7, 25);
        let sin2 = qf(24, 25);
        assert_eq!(u.so[(0, 0)], cos2);
        assert_eq!(u.so[(1, 1)], cos2);
        assert_eq!(u.so[(1, 0)].clone() * u.so[(1, 0)].clone(), sin2.clone() * sin2);
        assert_eq!(u.so[(2, 2)], q(1));
        assert!(u.verify_lambda(&rep));
        let id = SpinElement::<Q>::from_factors(&rep, vec![]).unwrap();
        assert_eq!(id.so, Mat::identity(3));
    }

    #[test]
    fn invalid_factors_rejected() {
        let rep = CliffordRep::new(Signature::standard(1, 2).unwrap()).unwrap();
        let bad = SpinElement::from_factors(&rep, vec![SpinFactor { i: 0, j: 1, c: qf(3, 5), s: qf(4, 5) }]);
        assert!(bad.is_err());
        let same = SpinElement::from_factors(&rep, vec![SpinFactor { i: 1, j: 1, c: q(1), s: q(0) }]);
        assert!(same.is_err());
    }

    #[test]
    fn spin_elements_cover_so_plus() {
        for sig in [Signature::standard(1, 3).unwrap(), Signature::alternating(5).unwrap()] {
            let rep = CliffordRep::new(sig.clone()).unwrap();
            let mut r = rng(11);
            for _ in 0..5 {
                let u = random_spin_element(&rep, &mut r, 4);
                assert!(u.verify_lambda(&rep));
                assert!(u.so_is_orthogonal(&sig));
            }
        }
    }

    #[test]
    fn pure_basis_spinor_in_alternating_convention() {
        for n in 2..=8 {
            let rep = CliffordRep::new(Signature::alternating(n).unwrap()).unwrap();
            let s = rep.basis::<Q>(0);
            let pur = rep.purity(&s).unwrap();
            assert!(pur.pure, "n = {n}");
            assert_eq!(pur.real_pure, Some(true));
        }
    }

    #[test]
    fn zero_spinor_rejected() {
        let rep = CliffordRep::new(Signature::standard(1, 2).unwrap()).unwrap();
        let z = vec![Cq::zero(); rep.dim];
        assert_eq!(rep.kernel_real(&z), Err(Error::ZeroSpinor));
    }

    #[test]
    fn kernels_are_isotropic_and_equivariant() {
        let sig = Signature::alternating(6).unwrap();
        let rep = CliffordRep::new(sig.clone()).unwrap();
        let mut r = rng(5);
        for _ in 0..6 {
            // A pure spinor moved by a random spin element.
            let u = random_spin_element(&rep, &mut r, 5);
            let s = u.apply(&rep, &rep.basis(3));
            let ker = rep.kernel_real(&s).unwrap();
            assert_eq!(ker.len(), 3);
            for a in &ker {
                for b in &ker {
                    assert!(sig.dot(a, b).is_zero());
                }
            }
            let moved: Vec<Vec<Q>> = rep.kernel_real(&rep.basis(3)).unwrap().iter().map(|x| u.act_vector(x)).collect();
            let mut both = ker.clone();
            both.extend(moved);
            assert_eq!(linalg::rank_of_vectors(&both), 3);
        }
    }

    #[test]
    fn real_structures_commute_with_generators() {
        for sig in [Signature::alternating(4).unwrap(), Signature::standard(4, 2).unwrap()] {
            let rep = CliffordRep::new(sig).unwrap();
            let c = rep.real_structure().unwrap();
            assert_eq!(c.mul(&c.map(|z| z.conj())), Mat::identity(rep.dim));
            for g in &rep.gens {
                let r: Mat<Cq> = g.dense();
                assert_eq!(c.mul(&r.map(|z| z.conj())), r.mul(&c));
            }
        }
        let lorentz = CliffordRep::new(Signature::standard(1, 3).unwrap()).unwrap();
        assert!(!lorentz.is_real_backed());
    }

    proptest! {
        #[test]
        fn clifford_identity(x in proptest::collection::vec(-5i64..=5, 5), seed in 0u64..1000) {
            let sig = Signature::standard(2, 3).unwrap();
            let rep = CliffordRep::new(sig.clone()).unwrap();
            let xq: Vec<Q> = x.iter().map(|&a| q(a)).collect();
            let s = complex_spinor(&mut rng(seed), rep.dim);
            let xxs = rep.real_vec_mul(&xq, &rep.real_vec_mul(&xq, &s).unwrap()).unwrap();
            let norm = sig.dot(&xq, &xq);
            let expect: Vec<Cq> = s.iter().map(|z| z * Cq::new(-norm.clone(), q(0))).collect();
            prop_assert_eq!(xxs, expect);
        }

        #[test]
        fn so_image_preserves_metric(seed in 0u64..500) {
            let sig = Signature::standard(2, 2).unwrap();
            let rep = CliffordRep::new(sig.clone()).unwrap();
            let mut r = rng(seed);
            let u = random_spin_element(&rep, &mut r, 3);
            let x = int_vec(&mut r, 4);
            let y = int_vec(&mut r, 4);
            prop_assert_eq!(sig.dot(&u.act_vector(&x), &u.act_vector(&y)), sig.dot(&x, &y));
            prop_assert!(u.so.det().is_one());
        }
    }
}
