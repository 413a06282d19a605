//! Pointwise conformal tractor calculus in a fixed metric of the conformal class.
//!
//! Standard tractors are triples `(alpha, Y, beta) = alpha e_- + Y + beta e_+`.
//! Tractor forms live in the null coframe `(e_-^flat, e_1^flat, …, e_n^flat, e_+^flat)`
//! stored at indices `0, 1..=n, n+1`. Here `e_∓^flat` is the coframe dual to the
//! null frame, i.e. `e_-^flat(s) = alpha = <e_+, s>` and `e_+^flat(s) = beta = <e_-, s>`,
//! and `e_i^flat = eps_i dY^i` on the middle slot.

use crate::clifford::{Base, CliffordRep, Mono, Signature, C};
use crate::error::{Error, Result};
use crate::kform::KForm;
use crate::linalg::Mat;
use crate::scalar::{embed_cq, i_pow, Cq, EmbedQ, Field, RealEmbed, Q};
use crate::spinor_forms::{divisor_space, InnerProduct};
use num_traits::{Num, One, Zero};
use std::collections::VecDeque;

/// Metric `g = scale · eta` at a point, `eta = diag(eps)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gauge<T> {
    pub scale: T,
    pub eps: Vec<i8>,
}

impl<T: Field> Gauge<T> {
    pub fn flat(eps: &[i8]) -> Self {
        Gauge { scale: T::one(), eps: eps.to_vec() }
    }

    pub fn n(&self) -> usize {
        self.eps.len()
    }

    pub fn metric(&self, a: &[T], b: &[T]) -> T {
        self.scale.clone() * crate::linalg::eps_dot(&self.eps, a, b)
    }

    /// `g^{-1}` applied to a covector given by its `dx^i` components.
    pub fn raise(&self, w: &[T]) -> Vec<T> {
        w.iter().zip(&self.eps).map(|(x, &e)| signed(x.clone(), e) / self.scale.clone()).collect()
    }

    /// Gauge `e^{2 sigma} g`.
    pub fn rescaled(&self, exp_sigma: &T) -> Self {
        Gauge { scale: self.scale.clone() * exp_sigma.clone() * exp_sigma.clone(), eps: self.eps.clone() }
    }
}

fn signed<T: Field>(x: T, e: i8) -> T {
    if e < 0 {
        -x
    } else {
        x
    }
}

fn pow<T: Field>(x: &T, k: i64) -> T {
    let mut acc = T::one();
    for _ in 0..k.unsigned_abs() {
        acc = acc * x.clone();
    }
    if k < 0 {
        T::one() / acc
    } else {
        acc
    }
}

/// First jet of `sigma` at a point, with `e^sigma` carried instead of `sigma`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaJet<T> {
    pub exp_sigma: T,
    /// Components `d sigma_i` in `dx^i`.
    pub d_sigma: Vec<T>,
    /// `grad^g sigma`.
    pub grad: Vec<T>,
}

impl<T: Field> SigmaJet<T> {
    pub fn new(gauge: &Gauge<T>, exp_sigma: T, d_sigma: Vec<T>) -> Self {
        let grad = gauge.raise(&d_sigma);
        SigmaJet { exp_sigma, d_sigma, grad }
    }

    pub fn zero(n: usize) -> Self {
        SigmaJet { exp_sigma: T::one(), d_sigma: vec![T::zero(); n], grad: vec![T::zero(); n] }
    }

    pub fn check(&self, gauge: &Gauge<T>) -> Result<()> {
        if self.d_sigma.len() != gauge.n() || self.grad.len() != gauge.n() {
            return Err(Error::Dimension { expected: gauge.n(), got: self.d_sigma.len() });
        }
        if self.exp_sigma.is_zero() || gauge.raise(&self.d_sigma) != self.grad {
            return Err(Error::InconsistentJet("grad is not the g-raise of d sigma".into()));
        }
        Ok(())
    }

    /// Jet of `-sigma` relative to `e^{2 sigma} g`.
    pub fn inverse(&self, gauge: &Gauge<T>) -> Self {
        let g2 = gauge.rescaled(&self.exp_sigma);
        let d: Vec<T> = self.d_sigma.iter().map(|x| -x.clone()).collect();
        SigmaJet::new(&g2, T::one() / self.exp_sigma.clone(), d)
    }

    /// `|d sigma|_g^2`.
    pub fn norm2(&self) -> T {
        self.d_sigma.iter().zip(&self.grad).fold(T::zero(), |a, (x, y)| a + x.clone() * y.clone())
    }

    /// `d sigma` as a 1-form in the `e^flat` coframe.
    pub fn d_sigma_form(&self, eps: &[i8]) -> KForm<T> {
        let v: Vec<T> = self.d_sigma.iter().zip(eps).map(|(x, &e)| signed(x.clone(), e)).collect();
        KForm::from_vector(&v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TractorVector<T> {
    pub alpha: T,
    pub y: Vec<T>,
    pub beta: T,
    pub gauge: Gauge<T>,
}

impl<T: Field> TractorVector<T> {
    pub fn new(alpha: T, y: Vec<T>, beta: T, gauge: Gauge<T>) -> Result<Self> {
        if y.len() != gauge.n() {
            return Err(Error::Dimension { expected: gauge.n(), got: y.len() });
        }
        Ok(TractorVector { alpha, y, beta, gauge })
    }

    /// Coordinates `(alpha, Y, beta)` as one vector.
    pub fn coords(&self) -> Vec<T> {
        let mut v = vec![self.alpha.clone()];
        v.extend(self.y.iter().cloned());
        v.push(self.beta.clone());
        v
    }
}

pub fn tractor_metric<T: Field>(s: &TractorVector<T>, t: &TractorVector<T>) -> Result<T> {
    if s.gauge != t.gauge {
        return Err(Error::GaugeMismatch);
    }
    Ok(s.alpha.clone() * t.beta.clone() + t.alpha.clone() * s.beta.clone() + s.gauge.metric(&s.y, &t.y))
}

/// Change of metric representation under `g ↦ e^{2 sigma} g`.
pub fn conformal_transform_vector<T: Field>(s: &TractorVector<T>, jet: &SigmaJet<T>) -> Result<TractorVector<T>> {
    jet.check(&s.gauge)?;
    let m = transform_matrix(&s.gauge, jet);
    let c = m.mul_vec(&s.coords());
    let n = s.y.len();
    Ok(TractorVector { alpha: c[0].clone(), y: c[1..=n].to_vec(), beta: c[n + 1].clone(), gauge: s.gauge.rescaled(&jet.exp_sigma) })
}

/// Matrix of the change of coordinates `(alpha, Y, beta) ↦ (alpha~, Y~, beta~)`.
pub fn transform_matrix<T: Field>(gauge: &Gauge<T>, jet: &SigmaJet<T>) -> Mat<T> {
    let n = gauge.n();
    let e = jet.exp_sigma.clone();
    let ei = T::one() / e.clone();
    let half = T::one() / T::from_i64(2);
    let mut m = Mat::zeros(n + 2, n + 2);
    m[(0, 0)] = ei.clone();
    for i in 0..n {
        m[(0, i + 1)] = -(ei.clone() * jet.d_sigma[i].clone());
        m[(i + 1, i + 1)] = ei.clone();
        m[(i + 1, n + 1)] = ei.clone() * jet.grad[i].clone();
    }
    m[(0, n + 1)] = -(ei * half * jet.norm2());
    m[(n + 1, n + 1)] = e;
    m
}

/// Components of a tractor `(k+1)`-form:
/// `e_-^flat ∧ minus + zero + e_-^flat ∧ e_+^flat ∧ mp + e_+^flat ∧ plus`.
#[derive(Clone, Debug, PartialEq)]
pub struct TractorFormSplit<T> {
    pub k: usize,
    pub minus: KForm<T>,
    pub zero: KForm<T>,
    /// Degree `k - 1`; identically zero when `k = 0`.
    pub mp: KForm<T>,
    pub plus: KForm<T>,
    pub gauge: Gauge<T>,
}

/// Splits a form given in the null coframe.
pub fn split_tractor_form<T: Field>(form: &KForm<T>, gauge: &Gauge<T>) -> Result<TractorFormSplit<T>> {
    let n = gauge.n();
    if form.dim != n + 2 {
        return Err(Error::Dimension { expected: n + 2, got: form.dim });
    }
    if form.degree == 0 {
        return Err(Error::Input("tractor form of degree 0".into()));
    }
    let k = form.degree - 1;
    let mut minus = KForm::zero(n, k);
    let mut zero = KForm::zero(n, k + 1);
    let mut mp = KForm::zero(n, k.saturating_sub(1));
    let mut plus = KForm::zero(n, k);
    for (idx, c) in &form.coeffs {
        let has_m = idx.first() == Some(&0);
        let has_p = idx.last() == Some(&(n + 1));
        let mid: Vec<usize> = idx.iter().filter(|&&i| i != 0 && i != n + 1).map(|i| i - 1).collect();
        let odd = mid.len() % 2 == 1;
        match (has_m, has_p) {
            (false, false) => zero.add_term(&mid, c.clone()),
            (true, false) => minus.add_term(&mid, c.clone()),
            // e_J ∧ e_+ = (-1)^|J| e_+ ∧ e_J
            (false, true) => plus.add_term(&mid, if odd { -c.clone() } else { c.clone() }),
            // e_- ∧ e_J ∧ e_+ = (-1)^|J| e_- ∧ e_+ ∧ e_J
            (true, true) => mp.add_term(&mid, if odd { -c.clone() } else { c.clone() }),
        }
    }
    Ok(TractorFormSplit { k, minus, zero, mp, plus, gauge: gauge.clone() })
}

pub fn reassemble<T: Field>(s: &TractorFormSplit<T>) -> KForm<T> {
    let n = s.gauge.n();
    let em = KForm::<T>::basis(n + 2, &[0]);
    let ep = KForm::<T>::basis(n + 2, &[n + 1]);
    let lift = |f: &KForm<T>| f.embed(n + 2, 1);
    let mut out = em.wedge(&lift(&s.minus)).add(&lift(&s.zero)).add(&ep.wedge(&lift(&s.plus)));
    if s.k >= 1 {
        out = out.add(&em.wedge(&ep).wedge(&lift(&s.mp)));
    }
    out
}

/// Which law to use for the `alpha_+` component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlusLaw {
    /// The four displayed laws exactly as printed.
    Printed,
    /// Laws obtained from the frame change of the null coframe.
    FrameChange,
}

fn interior_or_zero<T: Field>(f: &KForm<T>, x: &[T], eps: &[i8]) -> KForm<T> {
    if f.degree == 0 {
        KForm::zero(f.dim, 0)
    } else {
        f.interior(x, eps)
    }
}

fn wedge_or_zero<T: Field>(a: &KForm<T>, f: &KForm<T>, active: bool, degree: usize) -> KForm<T> {
    if active {
        a.wedge(f)
    } else {
        KForm::zero(f.dim, degree)
    }
}

/// Component laws under `g ↦ e^{2 sigma} g`.
pub fn conformal_transform_form_components<T: Field>(s: &TractorFormSplit<T>, jet: &SigmaJet<T>, law: PlusLaw) -> Result<TractorFormSplit<T>> {
    jet.check(&s.gauge)?;
    let eps = &s.gauge.eps;
    let k = s.k as i64;
    let e = &jet.exp_sigma;
    let ds = jet.d_sigma_form(eps);
    let grad = &jet.grad;
    let norm2 = jet.norm2();
    let up = pow(e, k + 1);
    let down = pow(e, k - 1);
    let has_mp = s.k >= 1;
    // grad ⌟ alpha_- has degree k-1 (only meaningful for k >= 1).
    let g_minus = interior_or_zero(&s.minus, grad, eps);
    let g_zero = s.zero.interior(grad, eps);
    let minus = s.minus.scale(&up);
    let (zero, mp, plus) = match law {
        PlusLaw::Printed => {
            let zero = s.zero.sub(&ds.wedge(&s.minus)).scale(&up);
            let mp = if has_mp { g_minus.add(&s.mp).scale(&down) } else { s.mp.clone() };
            let c = T::one() + e.clone() * e.clone() / T::from_i64(2);
            let plus = wedge_or_zero(&ds, &g_minus, has_mp, s.k)
                .add(&s.minus.scale(&(c * norm2)))
                .sub(&g_zero)
                .add(&wedge_or_zero(&ds, &s.mp, has_mp, s.k))
                .add(&s.plus)
                .scale(&down);
            (zero, mp, plus)
        }
        PlusLaw::FrameChange => {
            let zero = s.zero.add(&ds.wedge(&s.minus)).scale(&up);
            let mp = if has_mp { s.mp.sub(&g_minus).scale(&down) } else { s.mp.clone() };
            let half = T::one() / T::from_i64(2);
            let plus = wedge_or_zero(&ds, &g_minus, has_mp, s.k)
                .sub(&s.minus.scale(&(half * norm2)))
                .sub(&g_zero)
                .sub(&wedge_or_zero(&ds, &s.mp, has_mp, s.k))
                .add(&s.plus)
                .scale(&down);
            (zero, mp, plus)
        }
    };
    Ok(TractorFormSplit { k: s.k, minus, zero, mp, plus, gauge: s.gauge.rescaled(e) })
}

/// Re-expresses the reassembled form in the coordinates of the new gauge and splits again.
pub fn frame_change_oracle<T: Field>(s: &TractorFormSplit<T>, jet: &SigmaJet<T>) -> Result<TractorFormSplit<T>> {
    jet.check(&s.gauge)?;
    let n = s.gauge.n();
    let new_gauge = s.gauge.rescaled(&jet.exp_sigma);
    // Coordinates on the old frame in terms of the new one.
    let back = transform_matrix(&new_gauge, &jet.inverse(&s.gauge));
    // Coframe rows: e_-^flat = d alpha, e_i^flat = eps_i dY^i, e_+^flat = d beta.
    let r: Vec<i8> = std::iter::once(1).chain(s.gauge.eps.iter().copied()).chain(std::iter::once(1)).collect();
    let mut a = Mat::zeros(n + 2, n + 2);
    for i in 0..n + 2 {
        for j in 0..n + 2 {
            // coefficient of new coframe element j in old coframe element i
            a[(j, i)] = signed(signed(back[(i, j)].clone(), r[i]), r[j]);
        }
    }
    let moved = reassemble(s).apply_linear(&a);
    split_tractor_form(&moved, &new_gauge)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawCheck {
    pub minus: bool,
    pub zero: bool,
    pub mp: bool,
    pub plus: bool,
}

impl LawCheck {
    pub fn all(&self) -> bool {
        self.minus && self.zero && self.mp && self.plus
    }
}

/// Compares a law against the frame-change oracle, component by component.
pub fn compare_with_oracle<T: Field>(s: &TractorFormSplit<T>, jet: &SigmaJet<T>, law: PlusLaw) -> Result<LawCheck> {
    let a = conformal_transform_form_components(s, jet, law)?;
    let b = frame_change_oracle(s, jet)?;
    Ok(LawCheck { minus: a.minus == b.minus, zero: a.zero == b.zero, mp: a.mp == b.mp, plus: a.plus == b.plus })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecomposableType {
    /// `s_- ⌟ (s_+ ⌟ alpha) = 0`.
    Type1,
    Type2,
}

/// Labels a decomposable tractor form by its pointwise normal form.
pub fn classify_decomposable_tractor_form<T: Field>(s: &TractorFormSplit<T>) -> Result<DecomposableType> {
    let form = reassemble(s);
    if form.is_zero() || (form.degree > 1 && divisor_space(&form).len() != form.degree) {
        return Err(Error::NotDecomposable);
    }
    let n = s.gauge.n();
    let ones = vec![1i8; n + 2];
    let mut sp = vec![T::zero(); n + 2];
    sp[n + 1] = T::one();
    let mut sm = vec![T::zero(); n + 2];
    sm[0] = T::one();
    if form.degree < 2 {
        return Ok(DecomposableType::Type1);
    }
    let dd = form.interior(&sp, &ones).interior(&sm, &ones);
    Ok(if dd.is_zero() { DecomposableType::Type1 } else { DecomposableType::Type2 })
}

/// Curvature quantities at a point, in coordinates.
/// `weyl[c][d][b][a]` is the `a`-component of `W(e_c, e_d) e_b`;
/// `cotton[c][d][b]` is `C(e_c, e_d)(e_b)` with `C(X, Y) = (nabla_X K)(Y) - (nabla_Y K)(X)`.
#[derive(Clone, Debug)]
pub struct CurvatureData<T> {
    pub metric: Mat<T>,
    pub schouten: Mat<T>,
    pub weyl: Option<Vec<Vec<Vec<Vec<T>>>>>,
    pub cotton: Option<Vec<Vec<Vec<T>>>>,
}

/// Tractor field with the first derivatives of its components along `X`.
#[derive(Clone, Debug)]
pub struct TractorJet<T> {
    pub alpha: T,
    pub y: Vec<T>,
    pub beta: T,
    /// `X(alpha)`.
    pub d_alpha: T,
    /// `nabla^g_X Y`.
    pub nabla_y: Vec<T>,
    /// `X(beta)`.
    pub d_beta: T,
}

fn bilinear<T: Field>(m: &Mat<T>, a: &[T], b: &[T]) -> T {
    let mb = m.mul_vec(b);
    crate::linalg::dot(a, &mb)
}

/// `nabla^nc_X s` in the splitting of `g`. Returns `(alpha, Y, beta)`.
pub fn tractor_connection_apply<T: Field>(x: &[T], s: &TractorJet<T>, curv: &CurvatureData<T>) -> Result<(T, Vec<T>, T)> {
    let n = x.len();
    if s.y.len() != n || s.nabla_y.len() != n || curv.metric.rows != n {
        return Err(Error::Dimension { expected: n, got: s.y.len() });
    }
    let ginv = curv.metric.inverse().ok_or(Error::DegenerateMetric)?;
    let kx: Vec<T> = curv.schouten.transpose().mul_vec(x);
    let kx_sharp = ginv.mul_vec(&kx);
    let a = s.d_alpha.clone() + bilinear(&curv.schouten, x, &s.y);
    let y: Vec<T> = (0..n).map(|i| s.nabla_y[i].clone() + s.alpha.clone() * x[i].clone() - s.beta.clone() * kx_sharp[i].clone()).collect();
    let b = s.d_beta.clone() - bilinear(&curv.metric, x, &s.y);
    Ok((a, y, b))
}

/// `R^nc(X1, X2) s` in the splitting of `g`.
pub fn tractor_curvature_apply<T: Field>(x1: &[T], x2: &[T], s: &TractorVector<T>, curv: &CurvatureData<T>) -> Result<(T, Vec<T>, T)> {
    let n = x1.len();
    let (w, c) = match (&curv.weyl, &curv.cotton) {
        (Some(w), Some(c)) => (w, c),
        _ => return Err(Error::Input("curvature data needs Weyl and Cotton tensors".into())),
    };
    let ginv = curv.metric.inverse().ok_or(Error::DegenerateMetric)?;
    // C(X1, X2) as a covector.
    let mut cov = vec![T::zero(); n];
    let mut wy = vec![T::zero(); n];
    for a in 0..n {
        for b in 0..n {
            let xx = x1[a].clone() * x2[b].clone();
            if xx.is_zero() {
                continue;
            }
            for e in 0..n {
                cov[e] = cov[e].clone() + xx.clone() * c[a][b][e].clone();
                for f in 0..n {
                    wy[f] = wy[f].clone() + xx.clone() * s.y[e].clone() * w[a][b][e][f].clone();
                }
            }
        }
    }
    let top = crate::linalg::dot(&cov, &s.y);
    let sharp = ginv.mul_vec(&cov);
    let mid: Vec<T> = (0..n).map(|i| wy[i].clone() - s.beta.clone() * sharp[i].clone()).collect();
    Ok((top, mid, T::zero()))
}

/// Placement of `e_0`, `e_{n+1}` and the base basis inside the ambient basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// `(e_0, e_1, …, e_n, e_{n+1})` with `eps_0 = -1`, `eps_{n+1} = +1`.
    Bracket,
    /// `(e_0, e_{n+1}, e_1, …, e_n)`; with an alternating base this is the
    /// alternating convention in dimension `n + 2`, keeping real split reps real.
    Leading,
}

#[derive(Clone, Debug)]
pub struct TractorLayout {
    pub layout: Layout,
    pub base: Signature,
    pub ambient: Signature,
    pub e0: usize,
    pub en1: usize,
    pub base_idx: Vec<usize>,
}

impl TractorLayout {
    pub fn new(base: &Signature, layout: Layout) -> Result<Self> {
        let n = base.n();
        match layout {
            Layout::Bracket => {
                let mut eps = vec![-1i8];
                eps.extend(&base.eps);
                eps.push(1);
                Ok(TractorLayout { layout, base: base.clone(), ambient: Signature::from_eps(eps)?, e0: 0, en1: n + 1, base_idx: (1..=n).collect() })
            }
            Layout::Leading => {
                let mut eps = vec![-1i8, 1];
                eps.extend(&base.eps);
                Ok(TractorLayout { layout, base: base.clone(), ambient: Signature::from_eps(eps)?, e0: 0, en1: 1, base_idx: (2..n + 2).collect() })
            }
        }
    }

    /// Rewrites a form in the ambient orthonormal coframe in the null coframe, using
    /// `e_0^flat = (e_-^flat - e_+^flat)/sqrt 2` and `e_{n+1}^flat = (e_-^flat + e_+^flat)/sqrt 2`.
    pub fn to_null_coframe<T: RealEmbed>(&self, form: &KForm<T>) -> KForm<T> {
        let n = self.base.n();
        let r = T::inv_sqrt2();
        let mut a = Mat::zeros(n + 2, n + 2);
        a[(0, self.e0)] = r.clone();
        a[(n + 1, self.e0)] = -r.clone();
        a[(0, self.en1)] = r.clone();
        a[(n + 1, self.en1)] = r;
        for (i, &j) in self.base_idx.iter().enumerate() {
            a[(i + 1, j)] = T::one();
        }
        form.apply_linear(&a)
    }

    /// Ambient coordinates of `alpha e_- + Y + beta e_+`.
    pub fn ambient_vector<T: RealEmbed>(&self, alpha: &T, y: &[T], beta: &T) -> Vec<T> {
        let r = T::inv_sqrt2();
        let mut v = vec![T::zero(); self.base.n() + 2];
        v[self.en1] = (alpha.clone() + beta.clone()) * r.clone();
        v[self.e0] = (beta.clone() - alpha.clone()) * r;
        for (i, &j) in self.base_idx.iter().enumerate() {
            v[j] = y[i].clone();
        }
        v
    }
}

/// Basis vector `u_lead + i^ph u_other` of an annihilator space.
#[derive(Clone, Debug)]
struct AnnVec {
    lead: usize,
    other: Option<(usize, u8)>,
}

fn ann_basis(p: &Mono, sign: u8) -> Vec<AnnVec> {
    // Fixed vectors of the involution P (sign 0) or its -1 eigenvectors (sign 2).
    let mut out = Vec::new();
    for a in 0..p.dim() {
        let b = p.col[a];
        if b == a {
            if p.ph[a] % 4 == sign {
                out.push(AnnVec { lead: a, other: None });
            }
        } else if a < b {
            // P(u_a + c u_b) = i^{ph_a} u_b + c i^{ph_b} u_a = λ (u_a + c u_b), c = λ i^{-ph_b}
            let c = (sign + 4 - p.ph[b] % 4) % 4;
            out.push(AnnVec { lead: a, other: Some((b, c)) });
        }
    }
    out
}

/// Spin-tractor decomposition `Delta_{p+1,q+1} = Ann(e_-) ⊕ Ann(e_+) ≅ Delta_{p,q} ⊕ Delta_{p,q}`.
#[derive(Clone, Debug)]
pub struct SpinTractor {
    pub layout: TractorLayout,
    pub ambient: CliffordRep,
    pub base: CliffordRep,
    ann_minus: Vec<AnnVec>,
    /// Intertwiner `Ann(e_-) → Delta_{p,q}` in the annihilator basis, first nonzero entry 1.
    pub intertwiner: Mat<Cq>,
    pub intertwiner_inv: Mat<Cq>,
    /// `rho_{p,q}(e_i) ∘ alpha = sign · alpha ∘ e_i` on `Ann(e_-)`.
    pub clifford_sign: i8,
}

impl SpinTractor {
    pub fn new(base_sig: &Signature, layout: Layout) -> Result<Self> {
        let lay = TractorLayout::new(base_sig, layout)?;
        let ambient = CliffordRep::new(lay.ambient.clone())?;
        let base = CliffordRep::new(base_sig.clone())?;
        let p = ambient.gens[lay.e0].mul(&ambient.gens[lay.en1]);
        let ann_minus = ann_basis(&p, 0);
        let d = base.dim;
        if ann_minus.len() != d {
            return Err(Error::Intertwiner(format!("Ann(e_-) has dimension {} instead of {}", ann_minus.len(), d)));
        }
        let lead_pos: std::collections::HashMap<usize, usize> = ann_minus.iter().enumerate().map(|(j, w)| (w.lead, j)).collect();
        // Action of base generators on the annihilator basis: e_i w_b = i^{phi} w_{r(b)}.
        let mut action: Vec<Vec<(usize, u8)>> = Vec::new();
        for &ai in &lay.base_idx {
            let g = &ambient.gens[ai];
            let mut row = Vec::with_capacity(d);
            for w in &ann_minus {
                let mut hit = None;
                for (src, ph) in std::iter::once((w.lead, 0u8)).chain(w.other) {
                    let tgt = g.col[src];
                    if let Some(&j) = lead_pos.get(&tgt) {
                        hit = Some((j, (g.ph[src] + ph) % 4));
                    }
                }
                row.push(hit.ok_or_else(|| Error::Intertwiner("generator leaves Ann(e_-)".into()))?);
            }
            action.push(row);
        }
        for sign in [1i8, -1] {
            for seed in 0..d {
                if let Some(x) = solve_intertwiner(&base, &action, sign, seed) {
                    let inv = x.inverse().ok_or_else(|| Error::Intertwiner("singular intertwiner".into()))?;
                    let st = SpinTractor { layout: lay, ambient, base, ann_minus, intertwiner: x, intertwiner_inv: inv, clifford_sign: sign };
                    if !st.verify_intertwiner() {
                        return Err(Error::Intertwiner("verification failed".into()));
                    }
                    return Ok(st);
                }
            }
        }
        Err(Error::Intertwiner("no solution to the commuting-action system".into()))
    }

    fn verify_intertwiner(&self) -> bool {
        for (k, &ai) in self.layout.base_idx.iter().enumerate() {
            for b in 0..self.base.dim {
                let w = self.ann_vector::<Q>(b);
                let lhs = self.base.act(k, &self.apply_alpha(&w));
                let rhs = self.apply_alpha(&self.ambient.act(ai, &w));
                let rhs: Vec<Cq> = if self.clifford_sign < 0 { rhs.into_iter().map(|z| -z).collect() } else { rhs };
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }

    fn ann_vector<T: Base>(&self, j: usize) -> Vec<C<T>> {
        let w = &self.ann_minus[j];
        let mut v = vec![C::<T>::zero(); self.ambient.dim];
        v[w.lead] = C::one();
        if let Some((b, ph)) = w.other {
            v[b] = i_pow(ph as i64);
        }
        v
    }

    fn e_pm<T: Base>(&self, sign: i8, v: &[C<T>]) -> Vec<C<T>> {
        let a = self.ambient.act(self.layout.en1, v);
        let b = self.ambient.act(self.layout.e0, v);
        a.into_iter().zip(b).map(|(x, y)| if sign > 0 { x + y } else { x - y }).collect()
    }

    /// `alpha` applied to an element of `Ann(e_-)` given in ambient coordinates.
    fn apply_alpha<T: Base + EmbedQ>(&self, v: &[C<T>]) -> Vec<C<T>> {
        let coords: Vec<C<T>> = self.ann_minus.iter().map(|w| v[w.lead].clone()).collect();
        let d = self.base.dim;
        (0..d)
            .map(|a| (0..d).fold(C::<T>::zero(), |acc, b| acc + embed_cq::<T>(&self.intertwiner[(a, b)]) * coords[b].clone()))
            .collect()
    }

    fn apply_alpha_inv<T: Base + EmbedQ>(&self, t: &[C<T>]) -> Vec<C<T>> {
        let d = self.base.dim;
        let coords: Vec<C<T>> = (0..d).map(|a| (0..d).fold(C::<T>::zero(), |acc, b| acc + embed_cq::<T>(&self.intertwiner_inv[(a, b)]) * t[b].clone())).collect();
        let mut v = vec![C::<T>::zero(); self.ambient.dim];
        for (j, w) in self.ann_minus.iter().enumerate() {
            v[w.lead] = v[w.lead].clone() + coords[j].clone();
            if let Some((b, ph)) = w.other {
                v[b] = v[b].clone() + crate::clifford::rot(&coords[j], ph);
            }
        }
        v
    }

    /// Projection onto `Ann(e_-)` along `Ann(e_+)`: `-(1/4) E_- E_+ v` with `E_± = sqrt 2 e_±`.
    pub fn project_minus<T: Base>(&self, v: &[C<T>]) -> Vec<C<T>> {
        let quarter = C::new(-(T::one() / T::from_i64(4)), T::zero());
        self.e_pm(-1, &self.e_pm(1, v)).into_iter().map(|z| z * quarter.clone()).collect()
    }

    /// `v ↦ (alpha(e_- w), alpha(e_- e_+ w))` for `v = e_- w + e_+ w`.
    pub fn split<T: Base + RealEmbed>(&self, v: &[C<T>]) -> (Vec<C<T>>, Vec<C<T>>) {
        let vm = self.project_minus(v);
        let vp: Vec<C<T>> = v.iter().zip(&vm).map(|(a, b)| a.clone() - b.clone()).collect();
        let first = self.apply_alpha(&vm);
        let r = C::new(T::inv_sqrt2(), T::zero());
        let second = self.apply_alpha(&self.e_pm(-1, &vp)).into_iter().map(|z| z * r.clone()).collect();
        (first, second)
    }

    /// Inverse of [`SpinTractor::split`].
    pub fn assemble<T: Base + RealEmbed>(&self, first: &[C<T>], second: &[C<T>]) -> Vec<C<T>> {
        let vm = self.apply_alpha_inv(first);
        let s2 = C::new(T::one() / T::inv_sqrt2(), T::zero());
        let scaled: Vec<C<T>> = second.iter().map(|z| z.clone() * s2.clone()).collect();
        let u = self.apply_alpha_inv(&scaled);
        let quarter = C::new(-(T::one() / T::from_i64(4)), T::zero());
        let vp: Vec<C<T>> = self.e_pm(1, &u).into_iter().map(|z| z * quarter.clone()).collect();
        vm.into_iter().zip(vp).map(|(a, b)| a + b).collect()
    }

    /// Action of `x = a e_- + y + b e_+` in split coordinates:
    /// `(s y·tau + a chi, -s y·chi - 2 b tau)` with `s` the Clifford sign of the intertwiner.
    pub fn act_split<T: Base + RealEmbed>(&self, a: &T, y: &[T], b: &T, tau: &[C<T>], chi: &[C<T>]) -> Result<(Vec<C<T>>, Vec<C<T>>)> {
        let yt = self.base.real_vec_mul(y, tau)?;
        let yc = self.base.real_vec_mul(y, chi)?;
        let s = C::new(T::from_i64(self.clifford_sign as i64), T::zero());
        let a = C::new(a.clone(), T::zero());
        let b2 = C::new(b.clone() * T::from_i64(2), T::zero());
        let first = yt.into_iter().zip(chi).map(|(u, c)| s.clone() * u + a.clone() * c.clone()).collect();
        let second = yc.into_iter().zip(tau).map(|(u, t)| -(s.clone() * u) - b2.clone() * t.clone()).collect();
        Ok((first, second))
    }

    /// Fits `<v1, v2>_ambient = c (<v1', w2> + (-1)^p <w1, v2'>)` on all pairs of ambient basis
    /// spinors and returns `c` when a single constant works for every pair.
    pub fn pairing_constant<T: Base + RealEmbed>(&self, bilinear: bool) -> Result<C<T>> {
        let amb = InnerProduct::new(&self.ambient)?;
        let base = InnerProduct::new(&self.base)?;
        let pair = |ip: &InnerProduct, u: &[C<T>], v: &[C<T>]| if bilinear { ip.bilinear(u, v) } else { ip.hermitian(u, v) };
        let splits: Vec<_> = (0..self.ambient.dim).map(|a| self.split(&self.ambient.basis::<T>(a))).collect();
        let mut c: Option<C<T>> = None;
        for a in 0..self.ambient.dim {
            for b in 0..self.ambient.dim {
                let lhs = pair(&amb, &self.ambient.basis(a), &self.ambient.basis(b));
                let (v1, w1) = &splits[a];
                let (v2, w2) = &splits[b];
                let x = pair(&base, v1, w2);
                let y = pair(&base, w1, v2);
                let rhs = if self.base.sig.p.is_multiple_of(2) { x + y } else { x - y };
                if rhs.is_zero() {
                    if !lhs.is_zero() {
                        return Err(Error::Intertwiner("pairing is not anti-diagonal".into()));
                    }
                    continue;
                }
                let r = lhs / rhs;
                match &c {
                    None => c = Some(r),
                    Some(c0) if *c0 == r => {}
                    Some(_) => return Err(Error::Intertwiner("pairing constant varies".into())),
                }
            }
        }
        c.ok_or_else(|| Error::Intertwiner("pairing vanishes".into()))
    }
}

fn solve_intertwiner(base: &CliffordRep, action: &[Vec<(usize, u8)>], sign: i8, seed: usize) -> Option<Mat<Cq>> {
    let d = base.dim;
    // Node (row c, column b) holds X_{c,b} = i^{ph}; X_{col_i[c], r_i(b)} = s i^{ph_i[c] - phi_i(b)} X_{c,b}.
    let mut val: Vec<Option<u8>> = vec![None; d * d];
    val[seed] = Some(0);
    let mut queue = VecDeque::from([seed]);
    let s2 = if sign < 0 { 2 } else { 0 };
    while let Some(node) = queue.pop_front() {
        let (c, b) = (node / d, node % d);
        let x = val[node].unwrap();
        for (i, g) in base.gens.iter().enumerate() {
            let (r, phi) = action[i][b];
            let tgt = g.col[c] * d + r;
            let v = (x + s2 + g.ph[c] + 4 - phi) % 4;
            match val[tgt] {
                None => {
                    val[tgt] = Some(v);
                    queue.push_back(tgt);
                }
                Some(w) if w == v => {}
                Some(_) => return None,
            }
        }
    }
    let mut x = Mat::zeros(d, d);
    for (node, v) in val.iter().enumerate() {
        if let Some(ph) = v {
            x[(node / d, node % d)] = i_pow(*ph as i64);
        }
    }
    if x.rank() != d {
        return None;
    }
    Some(x)
}

/// Checks `x e_± = -e_± x` for every base vector `x`, exactly.
pub fn base_anticommutes_with_null(st: &SpinTractor) -> bool {
    let amb = &st.ambient;
    st.layout.base_idx.iter().all(|&i| {
        (0..amb.dim).all(|b| {
            let u = amb.basis::<Q>(b);
            [1i8, -1].iter().all(|&s| {
                let lhs = st.e_pm(s, &amb.act(i, &u));
                let rhs = amb.act(i, &st.e_pm(s, &u));
                lhs.iter().zip(&rhs).all(|(a, b)| (a.clone() + b.clone()).is_zero())
            })
        })
    })
}

pub fn field_num<T: Field + Num>(x: i64) -> T {
    T::from_i64(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{rng, small_int, unit_param};
    use crate::scalar::{cq_to_qi2, q, qf, Qi2, R2};
    use num_traits::Signed;
    use proptest::prelude::*;

    fn qv(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| q(x)).collect()
    }

    fn random_jet(g: &Gauge<Q>, seed: u64) -> SigmaJet<Q> {
        let mut r = rng(seed);
        let e = q(1) + unit_param(&mut r).abs();
        let d: Vec<Q> = (0..g.n()).map(|_| qf(small_int(&mut r), 3)).collect();
        SigmaJet::new(g, e, d)
    }

    fn random_form(n: usize, degree: usize, seed: u64) -> KForm<Q> {
        let mut r = rng(seed);
        let mut f = KForm::zero(n + 2, degree);
        for idx in crate::kform::index_tuples(n + 2, degree) {
            f.add_term(&idx, q(small_int(&mut r)));
        }
        f
    }

    #[test]
    fn metric_examples() {
        let g = Gauge::<Q>::flat(&[-1, 1, 1]);
        let a = TractorVector::new(q(1), qv(&[0, 0, 0]), q(0), g.clone()).unwrap();
        let b = TractorVector::new(q(0), qv(&[0, 0, 0]), q(1), g.clone()).unwrap();
        assert_eq!(tractor_metric(&a, &b).unwrap(), q(1));
        assert_eq!(tractor_metric(&a, &a).unwrap(), q(0));
        let other = TractorVector::new(q(0), qv(&[0, 0, 0]), q(1), g.rescaled(&q(2))).unwrap();
        assert!(matches!(tractor_metric(&a, &other), Err(Error::GaugeMismatch)));
    }

    #[test]
    fn transform_identity_and_beta_zero_row() {
        let g = Gauge::<Q>::flat(&[-1, 1, 1, 1]);
        let s = TractorVector::new(q(2), qv(&[1, -3, 4, 0]), q(0), g.clone()).unwrap();
        assert_eq!(conformal_transform_vector(&s, &SigmaJet::zero(4)).unwrap(), s);
        let jet = random_jet(&g, 3);
        let t = conformal_transform_vector(&s, &jet).unwrap();
        let ei = q(1) / jet.exp_sigma.clone();
        let ys = crate::linalg::dot(&jet.d_sigma, &s.y);
        assert_eq!(t.alpha, ei.clone() * (s.alpha.clone() - ys));
        assert_eq!(t.y, s.y.iter().map(|x| x * &ei).collect::<Vec<_>>());
        assert_eq!(t.beta, q(0));
    }

    #[test]
    fn inconsistent_jet_rejected() {
        let g = Gauge::<Q>::flat(&[-1, 1]);
        let mut jet = random_jet(&g, 5);
        jet.grad[0] = jet.grad[0].clone() + q(1);
        let s = TractorVector::new(q(1), qv(&[1, 1]), q(1), g).unwrap();
        assert!(conformal_transform_vector(&s, &jet).is_err());
    }

    #[test]
    fn split_examples() {
        let n = 3;
        let g = Gauge::<Q>::flat(&[-1, 1, 1]);
        let f = KForm::<Q>::basis(n + 2, &[0, 1]);
        let s = split_tractor_form(&f, &g).unwrap();
        assert_eq!(s.minus, KForm::basis(n, &[0]));
        assert!(s.zero.is_zero() && s.mp.is_zero() && s.plus.is_zero());
        let f = KForm::<Q>::basis(n + 2, &[0, n + 1]);
        let s = split_tractor_form(&f, &g).unwrap();
        assert_eq!(s.mp, KForm::scalar(n, q(1)));
        assert!(s.zero.is_zero() && s.minus.is_zero() && s.plus.is_zero());
    }

    #[test]
    fn split_round_trip_all_degrees() {
        let g = Gauge::<Q>::flat(&[-1, 1, -1, 1]);
        for deg in 1..=6 {
            let f = random_form(4, deg, deg as u64);
            let s = split_tractor_form(&f, &g).unwrap();
            assert_eq!(reassemble(&s), f);
        }
    }

    #[test]
    fn frame_change_law_matches_oracle() {
        let g = Gauge::<Q>::flat(&[-1, 1, 1, 1]);
        for deg in 1..=5 {
            for seed in 0..4 {
                let s = split_tractor_form(&random_form(4, deg, 100 + seed), &g).unwrap();
                let jet = random_jet(&g, seed);
                let c = compare_with_oracle(&s, &jet, PlusLaw::FrameChange).unwrap();
                assert!(c.all(), "degree {deg}: {c:?}");
            }
        }
    }

    #[test]
    fn printed_first_law_matches_oracle() {
        let g = Gauge::<Q>::flat(&[-1, 1, 1]);
        let s = split_tractor_form(&random_form(3, 3, 7), &g).unwrap();
        let c = compare_with_oracle(&s, &random_jet(&g, 1), PlusLaw::Printed).unwrap();
        assert!(c.minus);
    }

    #[test]
    fn decomposable_types() {
        let n = 4;
        let g = Gauge::<Q>::flat(&[-1, 1, 1, 1]);
        // e_- ∧ t1 ∧ t2
        let f = KForm::<Q>::basis(n + 2, &[0, 1, 2]);
        let s = split_tractor_form(&f, &g).unwrap();
        assert_eq!(classify_decomposable_tractor_form(&s).unwrap(), DecomposableType::Type1);
        // (a e_- + b t) ∧ (d e_+ + t') with d != 0
        let mut a = vec![q(0); n + 2];
        a[0] = q(2);
        a[3] = q(1);
        let mut b = vec![q(0); n + 2];
        b[n + 1] = q(3);
        b[4] = q(1);
        let f = KForm::from_vector(&a).wedge(&KForm::from_vector(&b));
        let s = split_tractor_form(&f, &g).unwrap();
        assert_eq!(classify_decomposable_tractor_form(&s).unwrap(), DecomposableType::Type2);
        let mut bad = KForm::<Q>::zero(n + 2, 2);
        bad.add_term(&[1, 2], q(1));
        bad.add_term(&[3, 4], q(1));
        let s = split_tractor_form(&bad, &g).unwrap();
        assert!(classify_decomposable_tractor_form(&s).is_err());
    }

    #[test]
    fn flat_connection_and_curvature() {
        let n = 3;
        let curv = CurvatureData::<Q> {
            metric: Mat::from_rows(vec![qv(&[-1, 0, 0]), qv(&[0, 1, 0]), qv(&[0, 0, 1])]),
            schouten: Mat::zeros(n, n),
            weyl: Some(vec![vec![vec![vec![q(0); n]; n]; n]; n]),
            cotton: Some(vec![vec![vec![q(0); n]; n]; n]),
        };
        let x = qv(&[1, 2, -1]);
        let y = qv(&[3, 0, 1]);
        let jet = TractorJet { alpha: q(0), y: y.clone(), beta: q(0), d_alpha: q(0), nabla_y: qv(&[1, 1, 1]), d_beta: q(0) };
        let (a, v, b) = tractor_connection_apply(&x, &jet, &curv).unwrap();
        assert_eq!(a, q(0));
        assert_eq!(v, qv(&[1, 1, 1]));
        assert_eq!(b, -(q(-3) + q(0) - q(1)));
        let s = TractorVector::new(q(1), y, q(2), Gauge::flat(&[-1, 1, 1])).unwrap();
        let (a, v, b) = tractor_curvature_apply(&x, &qv(&[0, 1, 0]), &s, &curv).unwrap();
        assert!(a.is_zero() && v.iter().all(|z| z.is_zero()) && b.is_zero());
    }

    #[test]
    fn spin_tractor_round_trip_and_anticommutation() {
        for (p, q_) in [(0usize, 3usize), (1, 3), (2, 2), (1, 2)] {
            let sig = Signature::standard(p, q_).unwrap();
            let st = SpinTractor::new(&sig, Layout::Bracket).unwrap();
            assert!(base_anticommutes_with_null(&st));
            let v: Vec<Qi2> = crate::random::complex_spinor(&mut rng(p as u64), st.ambient.dim).iter().map(cq_to_qi2).collect();
            let (a, b) = st.split(&v);
            assert_eq!(st.assemble(&a, &b), v);
        }
    }

    #[test]
    fn spin_tractor_split_is_equivariant() {
        let sig = Signature::standard(1, 3).unwrap();
        let st = SpinTractor::new(&sig, Layout::Bracket).unwrap();
        let v: Vec<Qi2> = crate::random::complex_spinor(&mut rng(2), st.ambient.dim).iter().map(cq_to_qi2).collect();
        let (a, b) = st.split(&v);
        // e_1 e_2 (base) acting on the ambient spinor acts diagonally on the two slots.
        let (i, j) = (st.layout.base_idx[0], st.layout.base_idx[1]);
        let moved = st.ambient.act(i, &st.ambient.act(j, &v));
        let (ma, mb) = st.split(&moved);
        assert_eq!(ma, st.base.act(0, &st.base.act(1, &a)));
        assert_eq!(mb, st.base.act(0, &st.base.act(1, &b)));
    }

    #[test]
    fn clifford_action_in_split_coordinates() {
        for (sig, lay) in [(Signature::standard(1, 2).unwrap(), Layout::Bracket), (Signature::standard(2, 2).unwrap(), Layout::Bracket), (Signature::alternating(7).unwrap(), Layout::Leading)] {
            let st = SpinTractor::new(&sig, lay).unwrap();
            let n = sig.n();
            let mut r = rng(11);
            let v: Vec<Qi2> = crate::random::complex_spinor(&mut r, st.ambient.dim).iter().map(cq_to_qi2).collect();
            let (tau, chi) = st.split(&v);
            let a = R2::from_i64(small_int(&mut r));
            let b = R2::from_i64(small_int(&mut r));
            let y: Vec<R2> = (0..n).map(|_| R2::from_i64(small_int(&mut r))).collect();
            let x = st.layout.ambient_vector(&a, &y, &b);
            let direct = st.split(&st.ambient.real_vec_mul(&x, &v).unwrap());
            assert_eq!(direct, st.act_split(&a, &y, &b, &tau, &chi).unwrap());
        }
    }

    #[test]
    fn pairing_is_anti_diagonal_with_one_constant() {
        for (p, q_) in [(0usize, 3usize), (1, 2), (2, 2), (1, 4)] {
            let sig = Signature::standard(p, q_).unwrap();
            let st = SpinTractor::new(&sig, Layout::Bracket).unwrap();
            let c: Qi2 = st.pairing_constant::<R2>(false).unwrap();
            assert!(!c.is_zero());
        }
    }

    #[test]
    fn leading_layout_keeps_real_split_reps_real() {
        let sig = Signature::alternating(7).unwrap();
        let st = SpinTractor::new(&sig, Layout::Leading).unwrap();
        assert!(st.ambient.is_real_backed() && st.base.is_real_backed());
        assert!(st.intertwiner.data.iter().all(|z| z.im.is_zero()));
        let c: Qi2 = st.pairing_constant::<R2>(true).unwrap();
        assert!(c.im.is_zero());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn metric_is_gauge_invariant(seed in 0u64..100_000) {
            let g = Gauge::<Q>::flat(&[-1, -1, 1, 1, 1]);
            let mut r = rng(seed);
            let s = TractorVector::new(q(small_int(&mut r)), crate::random::int_vec(&mut r, 5), q(small_int(&mut r)), g.clone()).unwrap();
            let t = TractorVector::new(q(small_int(&mut r)), crate::random::int_vec(&mut r, 5), q(small_int(&mut r)), g.clone()).unwrap();
            let jet = random_jet(&g, seed ^ 0xabc);
            let before = tractor_metric(&s, &t).unwrap();
            let s2 = conformal_transform_vector(&s, &jet).unwrap();
            let t2 = conformal_transform_vector(&t, &jet).unwrap();
            prop_assert_eq!(tractor_metric(&s2, &t2).unwrap(), before);
            let back = conformal_transform_vector(&s2, &jet.inverse(&g)).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
