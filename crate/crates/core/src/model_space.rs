//! Twistor spinors on the conformally flat model `S^p x S^q ⊂ R^{p+1,q+1}` with
//! `g_St = -g_{S^p} + g_{S^q}`.
//!
//! A point is `x = (x1, x2)` with `|x1| = |x2| = 1`; the first `p + 1` ambient
//! coordinates are timelike. Spinors of the model are sections of `Ann(x)`, the
//! spin connection is the ambient derivative plus
//! `½ (-(X1, 0)·zeta_0 + (0, X2)·zeta_{n+1})`, and the spinor product on `Ann(x)` is
//! `(u, w) ↦ <u, xbar·w>` with `xbar = ½(-x1, x2)` the null partner of `x`.

use crate::clifford::{CliffordRep, Signature};
use crate::error::{Error, Result};
use crate::kform::{index_tuples, sort_with_sign, KForm};
use crate::linalg::{float, Mat};
use crate::numeric;
use crate::random::{self, Rng64};
use crate::scalar::Field;
use crate::spinor_forms::{DiracFamily, InnerProduct};
use crate::tractor::{split_tractor_form, tractor_connection_apply, CurvatureData, Gauge, TractorFormSplit, TractorJet};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::Zero;

pub type C64 = Complex<f64>;

/// Default tolerance on `|phi|` for zero detection.
pub const ZERO_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn spinor_norm(s: &[C64]) -> f64 {
    s.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(a: C64, x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(u, v)| a * u + v).collect()
}

fn scale(a: f64, x: &[C64]) -> Vec<C64> {
    x.iter().map(|u| u * a).collect()
}

/// Orthonormal basis of `x^⊥ ⊂ R^{k+1}` for a unit vector `x`, via the Householder
/// reflection that sends `±e_j` to `x`.
fn perp_basis(x: &[f64]) -> Vec<Vec<f64>> {
    let k = x.len();
    let j = (0..k).max_by(|&a, &b| x[a].abs().partial_cmp(&x[b].abs()).unwrap()).unwrap_or(0);
    let s = if x[j] < 0.0 { -1.0 } else { 1.0 };
    let mut u: Vec<f64> = x.iter().map(|v| -v).collect();
    u[j] += s;
    let uu = dot(&u, &u);
    (0..k)
        .filter(|&i| i != j)
        .map(|i| {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            if uu > 1e-28 {
                for (a, ua) in e.iter_mut().zip(&u) {
                    *a -= 2.0 * u[i] * ua / uu;
                }
            }
            e
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelPoint {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

impl ModelPoint {
    pub fn new(x1: Vec<f64>, x2: Vec<f64>) -> Result<Self> {
        for x in [&x1, &x2] {
            if x.is_empty() || (norm(x) - 1.0).abs() > 1e-12 {
                return Err(Error::Input(format!("model point factor {x:?} is not a unit vector")));
            }
        }
        Ok(ModelPoint { x1, x2 })
    }

    pub fn normalized(x1: &[f64], x2: &[f64]) -> Result<Self> {
        let (n1, n2) = (norm(x1), norm(x2));
        if n1 < 1e-300 || n2 < 1e-300 {
            return Err(Error::Input("cannot normalize a zero factor".into()));
        }
        Ok(ModelPoint { x1: x1.iter().map(|v| v / n1).collect(), x2: x2.iter().map(|v| v / n2).collect() })
    }

    pub fn random(p: usize, q: usize, r: &mut Rng64) -> Self {
        loop {
            let a = random::gaussian_vec(r, p + 1);
            let b = random::gaussian_vec(r, q + 1);
            if let Ok(x) = Self::normalized(&a, &b) {
                return x;
            }
        }
    }

    pub fn p(&self) -> usize {
        self.x1.len() - 1
    }

    pub fn q(&self) -> usize {
        self.x2.len() - 1
    }

    pub fn ambient(&self) -> Vec<f64> {
        self.x1.iter().chain(&self.x2).copied().collect()
    }

    pub fn zeta0(&self) -> Vec<f64> {
        self.x1.iter().copied().chain(std::iter::repeat_n(0.0, self.x2.len())).collect()
    }

    pub fn zeta_n1(&self) -> Vec<f64> {
        std::iter::repeat_n(0.0, self.x1.len()).chain(self.x2.iter().copied()).collect()
    }

    /// The null vector `½(-x1, x2)` with `<x, xbar> = 1`, orthogonal to `T_x`.
    pub fn xbar(&self) -> Vec<f64> {
        self.x1.iter().map(|v| -0.5 * v).chain(self.x2.iter().map(|v| 0.5 * v)).collect()
    }

    pub fn antipode(&self) -> Self {
        ModelPoint { x1: self.x1.iter().map(|v| -v).collect(), x2: self.x2.iter().map(|v| -v).collect() }
    }

    /// `<x, x>_{p+1,q+1}`; zero up to rounding on the model.
    pub fn null_defect(&self) -> f64 {
        dot(&self.x2, &self.x2) - dot(&self.x1, &self.x1)
    }

    fn split<'a>(&self, w: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        w.split_at(self.x1.len())
    }

    pub fn project_tangent(&self, w: &[f64]) -> Vec<f64> {
        let (w1, w2) = self.split(w);
        let (c1, c2) = (dot(w1, &self.x1), dot(w2, &self.x2));
        w1.iter().zip(&self.x1).map(|(a, b)| a - c1 * b).chain(w2.iter().zip(&self.x2).map(|(a, b)| a - c2 * b)).collect()
    }

    pub fn is_tangent(&self, b: &[f64], tol: f64) -> bool {
        let (b1, b2) = self.split(b);
        b.len() == self.x1.len() + self.x2.len() && dot(b1, &self.x1).abs() <= tol && dot(b2, &self.x2).abs() <= tol
    }

    /// Orthonormal frame of `T_x`: `p` timelike vectors followed by `q` spacelike ones.
    pub fn tangent_frame(&self) -> Vec<Vec<f64>> {
        let (a, b) = (self.x1.len(), self.x2.len());
        let mut out: Vec<Vec<f64>> = perp_basis(&self.x1).into_iter().map(|v| v.into_iter().chain(std::iter::repeat_n(0.0, b)).collect()).collect();
        out.extend(perp_basis(&self.x2).into_iter().map(|v| std::iter::repeat_n(0.0, a).chain(v).collect()));
        out
    }

    pub fn distance(&self, o: &ModelPoint) -> f64 {
        let d: Vec<f64> = self.ambient().iter().zip(o.ambient()).map(|(a, b)| a - b).collect();
        norm(&d)
    }
}

/// Value of `phi_v(x) = x·v` with its `Ann(zeta_0 + zeta_{n+1})` component.
#[derive(Clone, Debug)]
pub struct SpinorValue {
    pub value: Vec<C64>,
    pub ann: Vec<C64>,
    pub norm: f64,
    pub zero: bool,
}

/// Stereographic chart of `S^k` from the pole `sign · e_axis`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereChart {
    pub dim: usize,
    pub axis: usize,
    pub sign: f64,
}

impl SphereChart {
    /// Projects from the pole farthest from `x`, so that `|u| <= 1` at `x`.
    pub fn for_point(x: &[f64]) -> Self {
        let axis = (0..x.len()).max_by(|&a, &b| x[a].abs().partial_cmp(&x[b].abs()).unwrap()).unwrap_or(0);
        SphereChart { dim: x.len() - 1, axis, sign: if x[axis] > 0.0 { -1.0 } else { 1.0 } }
    }

    pub fn coords(&self, x: &[f64]) -> Result<Vec<f64>> {
        let den = 1.0 - self.sign * x[self.axis];
        if den < 1e-8 {
            return Err(Error::ChartSingularity);
        }
        Ok((0..=self.dim).filter(|&i| i != self.axis).map(|i| x[i] / den).collect())
    }

    pub fn point(&self, u: &[f64]) -> Vec<f64> {
        if self.dim == 0 {
            return vec![-self.sign];
        }
        let r2 = dot(u, u);
        let den = 1.0 + r2;
        let mut x = vec![0.0; self.dim + 1];
        let mut it = u.iter();
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = if i == self.axis { self.sign * (r2 - 1.0) / den } else { 2.0 * it.next().unwrap() / den };
        }
        x
    }

    /// Columns `∂x/∂u_i`.
    pub fn jacobian(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let r2 = dot(u, u);
        let den2 = (1.0 + r2) * (1.0 + r2);
        (0..self.dim)
            .map(|i| {
                let mut col = vec![0.0; self.dim + 1];
                let mut k = 0;
                for (j, c) in col.iter_mut().enumerate() {
                    if j == self.axis {
                        *c = self.sign * 4.0 * u[i] / den2;
                    } else {
                        let d = if k == i { 1.0 + r2 } else { 0.0 };
                        *c = 2.0 * (d - 2.0 * u[k] * u[i]) / den2;
                        k += 1;
                    }
                }
                col
            })
            .collect()
    }
}

/// Product chart `u = (u1, u2)` of `S^p x S^q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelChart {
    pub first: SphereChart,
    pub second: SphereChart,
}

impl ModelChart {
    pub fn for_point(x: &ModelPoint) -> Self {
        ModelChart { first: SphereChart::for_point(&x.x1), second: SphereChart::for_point(&x.x2) }
    }

    pub fn coords(&self, x: &ModelPoint) -> Result<Vec<f64>> {
        let mut u = self.first.coords(&x.x1)?;
        u.extend(self.second.coords(&x.x2)?);
        Ok(u)
    }

    pub fn point(&self, u: &[f64]) -> ModelPoint {
        let (u1, u2) = u.split_at(self.first.dim);
        ModelPoint { x1: self.first.point(u1), x2: self.second.point(u2) }
    }

    /// Coordinate vectors `∂_{u_i}` as ambient vectors.
    pub fn coordinate_vectors(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let (u1, u2) = u.split_at(self.first.dim);
        let (a, b) = (self.first.dim + 1, self.second.dim + 1);
        let mut out: Vec<Vec<f64>> = self.first.jacobian(u1).into_iter().map(|c| c.into_iter().chain(std::iter::repeat_n(0.0, b)).collect()).collect();
        out.extend(self.second.jacobian(u2).into_iter().map(|c| std::iter::repeat_n(0.0, a).chain(c).collect()));
        out
    }

    pub fn metric(&self, u: &[f64]) -> DMatrix<f64> {
        let t = chart_tensors::<f64>(self.first.dim, u, false);
        DMatrix::from_fn(u.len(), u.len(), |a, b| t.metric[a][b])
    }
}

/// Chart tensors of `g_St`, generic so that they can be evaluated at complex
/// coordinates for complex-step derivatives.
struct ChartTensors<T> {
    metric: Vec<Vec<T>>,
    gamma: Vec<Vec<Vec<T>>>,
    riemann: Vec<Vec<Vec<Vec<T>>>>,
    ricci: Vec<Vec<T>>,
    scal: T,
    schouten: Vec<Vec<T>>,
}

fn chart_tensors<T: Field>(p: usize, u: &[T], curvature: bool) -> ChartTensors<T> {
    let n = u.len();
    let block = |i: usize| usize::from(i >= p);
    let two = T::from_i64(2);
    let mut r2 = [T::zero(), T::zero()];
    for (i, x) in u.iter().enumerate() {
        r2[block(i)] = r2[block(i)].clone() + x.clone() * x.clone();
    }
    let lam: Vec<T> = r2.iter().map(|r| two.clone() / (T::one() + r.clone())).collect();
    // round-sphere metric factor and d(log lambda) per block
    let big_g: Vec<T> = lam.iter().map(|l| l.clone() * l.clone()).collect();
    let f: Vec<T> = (0..n).map(|c| -(two.clone() * u[c].clone()) / (T::one() + r2[block(c)].clone())).collect();
    let sig = |i: usize| if block(i) == 0 { -T::one() } else { T::one() };
    let mut metric = vec![vec![T::zero(); n]; n];
    for a in 0..n {
        metric[a][a] = sig(a) * big_g[block(a)].clone();
    }
    let mut gamma = vec![vec![vec![T::zero(); n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut acc = T::zero();
                if a == b && block(c) == block(a) {
                    acc = acc + f[c].clone();
                }
                if a == c && block(b) == block(a) {
                    acc = acc + f[b].clone();
                }
                if b == c && block(b) == block(a) {
                    acc = acc - f[a].clone();
                }
                gamma[a][b][c] = acc;
            }
        }
    }
    let mut riemann = vec![vec![vec![vec![T::zero(); n]; n]; n]; n];
    let mut ricci = vec![vec![T::zero(); n]; n];
    let mut scal = T::zero();
    let mut schouten = vec![vec![T::zero(); n]; n];
    if curvature {
        // R^a_{bcd} = delta^a_c G_{db} - delta^a_d G_{cb} inside each sphere factor, where G is the
        // round metric; the Levi-Civita connection of -g_{S^p} equals that of g_{S^p}.
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        if !(block(a) == block(b) && block(b) == block(c) && block(c) == block(d)) {
                            continue;
                        }
                        let g = big_g[block(a)].clone();
                        let mut acc = T::zero();
                        if a == c && d == b {
                            acc = acc + g.clone();
                        }
                        if a == d && c == b {
                            acc = acc - g;
                        }
                        riemann[a][b][c][d] = acc;
                    }
                }
            }
        }
        for b in 0..n {
            for d in 0..n {
                let mut acc = T::zero();
                for a in 0..n {
                    acc = acc + riemann[a][b][a][d].clone();
                }
                ricci[b][d] = acc;
            }
        }
        for a in 0..n {
            scal = scal + ricci[a][a].clone() / metric[a][a].clone();
        }
        let nn = T::from_i64(n as i64);
        let j = scal.clone() / (two.clone() * (nn.clone() - T::one()));
        for a in 0..n {
            for b in 0..n {
                schouten[a][b] = (j.clone() * metric[a][b].clone() - ricci[a][b].clone()) / (nn.clone() - two.clone());
            }
        }
    }
    ChartTensors { metric, gamma, riemann, ricci, scal, schouten }
}

/// Curvature of `g_St` at a point, in a stereographic chart.
#[derive(Clone, Debug)]
pub struct ChartGeometry {
    pub chart: ModelChart,
    pub u: Vec<f64>,
    pub metric: Vec<Vec<f64>>,
    /// `christoffel[a][b][c] = Γ^a_{bc}`.
    pub christoffel: Vec<Vec<Vec<f64>>>,
    /// `riemann[a][b][c][d] = R^a_{bcd}`, `R(∂_c, ∂_d) ∂_b = R^a_{bcd} ∂_a`.
    pub riemann: Vec<Vec<Vec<Vec<f64>>>>,
    pub ricci: Vec<Vec<f64>>,
    pub scal: f64,
    /// `K = (scal/(2(n-1)) g - Ric)/(n-2)`.
    pub schouten: Vec<Vec<f64>>,
    /// `weyl[a][b][c][d] = W^a_{bcd}`.
    pub weyl: Vec<Vec<Vec<Vec<f64>>>>,
    /// `cotton[a][b][e] = (∇_a K)_{be} - (∇_b K)_{ae}`.
    pub cotton: Vec<Vec<Vec<f64>>>,
}

impl ChartGeometry {
    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn weyl_max(&self) -> f64 {
        self.weyl.iter().flatten().flatten().flatten().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn cotton_max(&self) -> f64 {
        self.cotton.iter().flatten().flatten().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// Repackaged for [`crate::tractor`]: `weyl[c][d][b][a] = W^a_{bcd}`.
    pub fn curvature_data(&self) -> CurvatureData<f64> {
        let n = self.n();
        let mat = |m: &Vec<Vec<f64>>| Mat::from_rows(m.clone());
        let mut w = vec![vec![vec![vec![0.0; n]; n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        w[c][d][b][a] = self.weyl[a][b][c][d];
                    }
                }
            }
        }
        CurvatureData { metric: mat(&self.metric), schouten: mat(&self.schouten), weyl: Some(w), cotton: Some(self.cotton.clone()) }
    }

    /// `∇_X Y` for a vector field with values `y` and directional derivative `dy = X(Y)`.
    pub fn covariant(&self, x: &[f64], y: &[f64], dy: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|a| dy[a] + (0..n).map(|c| (0..n).map(|b| self.christoffel[a][c][b] * x[c] * y[b]).sum::<f64>()).sum::<f64>()).collect()
    }
}

/// The homogeneous model with its ambient spinor module.
#[derive(Clone, Debug)]
pub struct Model {
    pub p: usize,
    pub q: usize,
    pub rep: CliffordRep,
    pub inner: InnerProduct,
    pub family: DiracFamily,
}

/// Result of [`Model::zero_set_verify`].
#[derive(Clone, Debug)]
pub struct ZeroSetReport {
    pub ker_dim: usize,
    /// `max |phi(exp_x(w))|` over sampled kernel vectors.
    pub kernel_max: f64,
    /// `min |phi(exp_x(w'))| / |w'|` over small transverse vectors.
    pub transverse_min_ratio: f64,
    /// Zeros found by multi-start Gauss-Newton.
    pub found: Vec<ModelPoint>,
    /// Found zeros not on `exp_x(ker) ∪ {-x}`.
    pub off_prediction: usize,
    /// `dim ker D^g phi` at every zero inspected.
    pub ker_dims: Vec<usize>,
    /// `max |g(gamma', gamma')| / |w|^2` along kernel geodesics.
    pub null_tangency: f64,
}

impl ZeroSetReport {
    pub fn passed(&self) -> bool {
        self.kernel_max < 1e-8
            && self.transverse_min_ratio > 1e-4
            && self.off_prediction == 0
            && self.ker_dims.iter().all(|&d| d == self.ker_dim)
            && self.null_tangency < 1e-8
    }
}

/// Proportionality constant of one tractor-form slot against an intrinsic Dirac form.
#[derive(Clone, Debug)]
pub struct SlotFit {
    /// `None` when both sides vanish.
    pub constant: Option<C64>,
    /// `|a - c b| / |a|`, or 1 when exactly one side vanishes.
    pub deviation: f64,
}

/// Split of `alpha^{k+1}_v` at one point compared with `alpha^k_phi` and `alpha^k_{D phi}`.
#[derive(Clone, Debug)]
pub struct TractorFormSample {
    pub k: usize,
    pub minus: SlotFit,
    pub plus: SlotFit,
    /// Norms of the `alpha_0` and `alpha_∓` slots.
    pub zero_norm: f64,
    pub mp_norm: f64,
}

/// Constants `d_1`, `d_2` of one degree over many points.
#[derive(Clone, Debug)]
pub struct DegreeConstants {
    pub k: usize,
    pub d1: Option<C64>,
    pub d2: Option<C64>,
    /// Largest relative spread of the constants over the points.
    pub spread: f64,
    /// Largest proportionality defect at a single point.
    pub deviation: f64,
}

impl DegreeConstants {
    pub fn passed(&self, tol: f64) -> bool {
        self.spread < tol && self.deviation < tol
    }
}

fn dense_norm(f: &KForm<C64>) -> f64 {
    f.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn fit_slot(a: &KForm<C64>, b: &KForm<C64>, tol: f64) -> SlotFit {
    let da = a.dense();
    let db = b.dense();
    let na = dense_norm(a);
    let nb = dense_norm(b);
    match (na < tol, nb < tol) {
        (true, true) => SlotFit { constant: None, deviation: 0.0 },
        (false, false) => {
            let num: C64 = db.iter().zip(&da).map(|(x, y)| x.conj() * y).sum();
            let c = num / (nb * nb);
            let res: f64 = da.iter().zip(&db).map(|(x, y)| (x - c * y).norm_sqr()).sum::<f64>().sqrt();
            SlotFit { constant: Some(c), deviation: res / na }
        }
        _ => SlotFit { constant: None, deviation: 1.0 },
    }
}

impl Model {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p + q < 2 {
            return Err(Error::UnsupportedSignature { p, q, what: "the model S^p x S^q (needs n >= 2)".into() });
        }
        let rep = CliffordRep::new(Signature::standard(p + 1, q + 1)?)?;
        let inner = InnerProduct::new(&rep)?;
        let family = DiracFamily::new(&rep)?;
        Ok(Model { p, q, rep, inner, family })
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    pub fn spinor_dim(&self) -> usize {
        self.rep.dim
    }

    pub fn random_point(&self, r: &mut Rng64) -> ModelPoint {
        ModelPoint::random(self.p, self.q, r)
    }

    pub fn random_spinor(&self, r: &mut Rng64) -> Vec<C64> {
        let v = random::complex_gaussian(r, self.rep.dim);
        let s = spinor_norm(&v);
        scale(1.0 / s, &v)
    }

    fn check_point(&self, x: &ModelPoint) -> Result<()> {
        if x.p() != self.p || x.q() != self.q {
            return Err(Error::Dimension { expected: self.n() + 2, got: x.x1.len() + x.x2.len() });
        }
        Ok(())
    }

    /// Clifford multiplication by an ambient vector.
    pub fn mul(&self, x: &[f64], s: &[C64]) -> Vec<C64> {
        self.rep.real_vec_mul(x, s).expect("ambient vector and spinor sizes match the representation")
    }

    /// Ambient metric `<a, b>_{p+1,q+1}`.
    pub fn metric(&self, a: &[f64], b: &[f64]) -> f64 {
        self.rep.sig.dot(a, b)
    }

    pub fn phi(&self, v: &[C64], x: &ModelPoint) -> Vec<C64> {
        self.mul(&x.ambient(), v)
    }

    pub fn evaluate(&self, v: &[C64], x: &ModelPoint, tol: f64) -> Result<SpinorValue> {
        self.check_point(x)?;
        let value = self.phi(v, x);
        // projection onto Ann(x) along Ann(x~), x~ = zeta_0 - zeta_{n+1}: x x~ / <x, x~>·(-2)
        let xt: Vec<f64> = x.x1.iter().copied().chain(x.x2.iter().map(|v| -v)).collect();
        let ann = scale(0.25, &self.mul(&x.ambient(), &self.mul(&xt, &value)));
        let nrm = spinor_norm(&value);
        Ok(SpinorValue { value, ann, norm: nrm, zero: nrm < tol })
    }

    /// `D^g phi_{v,1}(y) = n(-v + ½ zeta_0·y·v)`.
    pub fn dirac(&self, v: &[C64], y: &ModelPoint) -> Vec<C64> {
        let zyv = self.mul(&y.zeta0(), &self.phi(v, y));
        let n = self.n() as f64;
        v.iter().zip(&zyv).map(|(a, b)| (b * 0.5 - a) * n).collect()
    }

    /// `½ (-(X1, 0)·zeta_0 + (0, X2)·zeta_{n+1}) psi`.
    pub fn connection_term(&self, x: &ModelPoint, big_x: &[f64], psi: &[C64]) -> Vec<C64> {
        let a = x.x1.len();
        let x1: Vec<f64> = big_x.iter().enumerate().map(|(i, v)| if i < a { *v } else { 0.0 }).collect();
        let x2: Vec<f64> = big_x.iter().enumerate().map(|(i, v)| if i < a { 0.0 } else { *v }).collect();
        let t1 = self.mul(&x1, &self.mul(&x.zeta0(), psi));
        let t2 = self.mul(&x2, &self.mul(&x.zeta_n1(), psi));
        t1.iter().zip(&t2).map(|(u, w)| (w - u) * 0.5).collect()
    }

    /// `∇_X psi` by a centered difference along the geodesic `exp_x(tX)` plus the connection term.
    pub fn covariant_derivative(&self, field: &dyn Fn(&ModelPoint) -> Vec<C64>, x: &ModelPoint, big_x: &[f64], h: f64) -> Result<Vec<C64>> {
        let fwd = field(&self.geodesic(x, big_x, h)?);
        let bwd = field(&self.geodesic(x, big_x, -h)?);
        let d: Vec<C64> = fwd.iter().zip(&bwd).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let t = self.connection_term(x, big_x, &field(x));
        Ok(d.iter().zip(&t).map(|(a, b)| a + b).collect())
    }

    /// `|∇_X phi + (1/n) X·D^g phi|` with the derivative taken by finite differences (step `h`).
    pub fn twistor_residual(&self, v: &[C64], y: &ModelPoint, big_x: &[f64], h: f64) -> Result<f64> {
        self.check_point(y)?;
        let nab = self.covariant_derivative(&|z| self.phi(v, z), y, big_x, h)?;
        let xd = self.mul(big_x, &self.dirac(v, y));
        Ok(spinor_norm(&axpy(C64::new(1.0 / self.n() as f64, 0.0), &xd, &nab)))
    }

    /// Largest twistor residual over random points and unit tangent directions.
    pub fn twistor_residual_max(&self, v: &[C64], r: &mut Rng64, points: usize, h: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for _ in 0..points {
            let y = self.random_point(r);
            let w = y.project_tangent(&random::gaussian_vec(r, self.n() + 2));
            let w: Vec<f64> = w.iter().map(|a| a / norm(&w)).collect();
            worst = worst.max(self.twistor_residual(v, &y, &w, h)?);
        }
        Ok(worst)
    }

    /// `δ_b(t)`: product of great circles with speeds `|b1|`, `|b2|`; constant for `b = 0`.
    pub fn geodesic(&self, x: &ModelPoint, b: &[f64], t: f64) -> Result<ModelPoint> {
        self.check_point(x)?;
        let scale_tol = 1e-10 * (1.0 + norm(b));
        if !x.is_tangent(b, scale_tol) {
            return Err(Error::NotTangent);
        }
        let (b1, b2) = x.split(b);
        let arc = |xi: &[f64], bi: &[f64]| -> Vec<f64> {
            let s = norm(bi);
            if s == 0.0 {
                return xi.to_vec();
            }
            let (c, sn) = ((t * s).cos(), (t * s).sin());
            xi.iter().zip(bi).map(|(a, b)| c * a + sn * b / s).collect()
        };
        ModelPoint::normalized(&arc(&x.x1, b1), &arc(&x.x2, b2))
    }

    /// `ker D^g phi(x) = {t ∈ T_x : t·v = 0}`, orthonormal for the Euclidean frame metric,
    /// returned as ambient vectors.
    pub fn dirac_kernel(&self, v: &[C64], x: &ModelPoint, tol: f64) -> Vec<Vec<f64>> {
        let frame = x.tangent_frame();
        let cols: Vec<Vec<C64>> = frame.iter().map(|t| self.mul(t, v)).collect();
        let ns = float::nullspace(&real_stack(&cols), tol);
        (0..ns.ncols())
            .map(|j| {
                let mut w = vec![0.0; self.n() + 2];
                for (i, t) in frame.iter().enumerate() {
                    for (a, ta) in w.iter_mut().zip(t) {
                        *a += ns[(i, j)] * ta;
                    }
                }
                w
            })
            .collect()
    }

    /// `min(p, q)` mutually orthogonal null tangent vectors `t_j + t_{p+j}`.
    pub fn null_directions(&self, x: &ModelPoint) -> Vec<Vec<f64>> {
        let f = x.tangent_frame();
        (0..self.p.min(self.q)).map(|j| f[j].iter().zip(&f[self.p + j]).map(|(a, b)| a + b).collect()).collect()
    }

    /// `v = x·l_1 ··· l_r·u` for random `u`: `x` is a zero and `l_1, …, l_r ∈ ker D^g phi(x)`.
    pub fn spinor_with_zero(&self, x: &ModelPoint, r: usize, rng: &mut Rng64) -> Result<Vec<C64>> {
        let nulls = self.null_directions(x);
        if r > nulls.len() {
            return Err(Error::Input(format!("at most {} null kernel directions in ({},{})", nulls.len(), self.p, self.q)));
        }
        let mut w = random::complex_gaussian(rng, self.rep.dim);
        for l in nulls.iter().take(r).rev() {
            w = self.mul(l, &w);
        }
        let v = self.phi(&w, x);
        let s = spinor_norm(&v);
        if s < 1e-12 {
            return Err(Error::ZeroSpinor);
        }
        Ok(scale(1.0 / s, &v))
    }

    /// Gauss-Newton on `x·v = 0` over `S^p x S^q` from `starts` random points; returns
    /// the distinct zeros reached (`|x·v| < ZERO_TOL · |v|`).
    pub fn find_zeros(&self, v: &[C64], starts: usize, rng: &mut Rng64) -> Vec<ModelPoint> {
        let vn = spinor_norm(v);
        let mut out: Vec<ModelPoint> = Vec::new();
        if vn == 0.0 {
            return out;
        }
        for _ in 0..starts {
            let mut x = self.random_point(rng);
            for _ in 0..60 {
                let r = self.phi(v, &x);
                if spinor_norm(&r) < 1e-14 * vn {
                    break;
                }
                let frame = x.tangent_frame();
                let cols: Vec<Vec<C64>> = frame.iter().map(|t| self.mul(t, v)).collect();
                let j = real_stack(&cols);
                let rhs = DVector::from_iterator(2 * r.len(), r.iter().map(|z| -z.re).chain(r.iter().map(|z| -z.im)));
                let step = match j.svd(true, true).solve(&rhs, 1e-12) {
                    Ok(s) => s,
                    Err(_) => break,
                };
                let mut y = x.ambient();
                for (i, t) in frame.iter().enumerate() {
                    for (a, ta) in y.iter_mut().zip(t) {
                        *a += step[i] * ta;
                    }
                }
                let (y1, y2) = y.split_at(self.p + 1);
                match ModelPoint::normalized(y1, y2) {
                    Ok(z) => x = z,
                    Err(_) => break,
                }
            }
            if spinor_norm(&self.phi(v, &x)) < ZERO_TOL * vn && out.iter().all(|z| z.distance(&x) > 1e-6) {
                out.push(x);
            }
        }
        out
    }

    /// Whether `y ∈ exp_x(ker D^g phi(x)) ∪ {-x}`, following the case analysis
    /// `y = cos(a) x + sin(a) d` with `d·v = 0`.
    pub fn on_predicted_zero_set(&self, v: &[C64], x: &ModelPoint, y: &ModelPoint, tol: f64) -> bool {
        if y.distance(x) < tol || y.distance(&x.antipode()) < tol {
            return true;
        }
        let c1 = dot(&x.x1, &y.x1);
        let c2 = dot(&x.x2, &y.x2);
        if (c1 - c2).abs() > tol {
            return false;
        }
        let s = (1.0 - c1 * c1).max(0.0).sqrt();
        if s < tol {
            return false;
        }
        let d: Vec<f64> = y.ambient().iter().zip(x.ambient()).map(|(a, b)| (a - c1 * b) / s).collect();
        spinor_norm(&self.mul(&d, v)) < tol * spinor_norm(v).max(1.0)
    }

    /// Checks `Z_phi = exp_x(ker D^g phi(x))` around a zero `x`.
    pub fn zero_set_verify(&self, v: &[C64], x: &ModelPoint, samples: usize, rng: &mut Rng64) -> Result<ZeroSetReport> {
        self.check_point(x)?;
        let vn = spinor_norm(v);
        let at_x = spinor_norm(&self.phi(v, x));
        if vn == 0.0 || at_x >= ZERO_TOL * vn {
            return Err(Error::NotAZero(at_x));
        }
        let v = scale(1.0 / vn, v);
        let ker = self.dirac_kernel(&v, x, 1e-9);
        let frame = x.tangent_frame();
        let mut kernel_max: f64 = 0.0;
        let mut ker_dims = Vec::new();
        let mut null_tangency: f64 = 0.0;
        let mut zeros_seen = vec![x.clone(), x.antipode()];
        if !ker.is_empty() {
            for _ in 0..samples {
                let c = random::gaussian_vec(rng, ker.len());
                let mut w = vec![0.0; self.n() + 2];
                for (ci, k) in c.iter().zip(&ker) {
                    for (a, b) in w.iter_mut().zip(k) {
                        *a += ci * b;
                    }
                }
                let len = 0.1 + 3.0 * rand::Rng::gen::<f64>(rng);
                let w: Vec<f64> = w.iter().map(|a| a * len / norm(&w)).collect();
                let y = self.geodesic(x, &w, 1.0)?;
                kernel_max = kernel_max.max(spinor_norm(&self.phi(&v, &y)));
                // tangent of t ↦ exp_x(t w) at t = 0.7
                let h = 1e-5;
                let a = self.geodesic(x, &w, 0.7 + h)?.ambient();
                let b = self.geodesic(x, &w, 0.7 - h)?.ambient();
                let tan: Vec<f64> = a.iter().zip(&b).map(|(p, q)| (p - q) / (2.0 * h)).collect();
                null_tangency = null_tangency.max(self.metric(&tan, &tan).abs() / dot(&w, &w));
                zeros_seen.push(y);
            }
        }
        // transverse directions: Euclidean complement of the kernel inside T_x
        let kmat = DMatrix::from_fn(ker.len().max(1), frame.len(), |i, j| if i < ker.len() { dot(&ker[i], &frame[j]) } else { 0.0 });
        let comp = float::nullspace(&kmat, 1e-9);
        let mut transverse_min_ratio = f64::INFINITY;
        for _ in 0..samples {
            if comp.ncols() == 0 {
                break;
            }
            let c = random::gaussian_vec(rng, comp.ncols());
            let mut w = vec![0.0; self.n() + 2];
            for (j, cj) in c.iter().enumerate() {
                for (i, t) in frame.iter().enumerate() {
                    for (a, b) in w.iter_mut().zip(t) {
                        *a += cj * comp[(i, j)] * b;
                    }
                }
            }
            let eps = 1e-3;
            let w: Vec<f64> = w.iter().map(|a| a * eps / norm(&w)).collect();
            let y = self.geodesic(x, &w, 1.0)?;
            transverse_min_ratio = transverse_min_ratio.min(spinor_norm(&self.phi(&v, &y)) / eps);
        }
        let found = self.find_zeros(&v, samples, rng);
        let off_prediction = found.iter().filter(|y| !self.on_predicted_zero_set(&v, x, y, 1e-7)).count();
        zeros_seen.extend(found.iter().cloned());
        for y in &zeros_seen {
            ker_dims.push(self.dirac_kernel(&v, y, 1e-9).len());
        }
        Ok(ZeroSetReport { ker_dim: ker.len(), kernel_max, transverse_min_ratio, found, off_prediction, ker_dims, null_tangency })
    }

    /// Complex rank of `v ↦ (phi_v(x_1), …, phi_v(x_K))`.
    pub fn evaluation_rank(&self, points: &[ModelPoint]) -> usize {
        let d = self.rep.dim;
        let cols: Vec<Vec<C64>> = (0..d)
            .map(|b| {
                let e: Vec<C64> = (0..d).map(|i| if i == b { C64::new(1.0, 0.0) } else { C64::zero() }).collect();
                points.iter().flat_map(|x| self.phi(&e, x)).collect()
            })
            .collect();
        float::rank(&complex_stack(&cols), 1e-9) / 2
    }

    /// Chart geometry of `g_St` at `x`, in the stereographic chart chosen for `x`.
    pub fn curvature_data_at(&self, x: &ModelPoint) -> Result<ChartGeometry> {
        self.check_point(x)?;
        let n = self.n();
        if n < 3 {
            return Err(Error::UnsupportedSignature { p: self.p, q: self.q, what: "the Schouten tensor (needs n >= 3)".into() });
        }
        let chart = ModelChart::for_point(x);
        let u = chart.coords(x)?;
        let t = chart_tensors::<f64>(self.p, &u, true);
        // P = -K in R = W + P ⊙ g
        let ginv: Vec<f64> = (0..n).map(|a| 1.0 / t.metric[a][a]).collect();
        let pmat: Vec<Vec<f64>> = t.schouten.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
        let mut weyl = t.riemann.clone();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
                        let pu = |i: usize, j: usize| ginv[i] * pmat[i][j];
                        weyl[a][b][c][d] -= pu(a, c) * t.metric[b][d] + pmat[b][d] * delta(a, c) - pu(a, d) * t.metric[b][c] - pmat[b][c] * delta(a, d);
                    }
                }
            }
        }
        // complex-step derivatives of K
        let hstep = 1e-20;
        let dk: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|c| {
                let uc: Vec<C64> = u.iter().enumerate().map(|(i, &v)| C64::new(v, if i == c { hstep } else { 0.0 })).collect();
                let tc = chart_tensors::<C64>(self.p, &uc, true);
                tc.schouten.iter().map(|r| r.iter().map(|z| z.im / hstep).collect()).collect()
            })
            .collect();
        let nabla_k = |c: usize, a: usize, b: usize| -> f64 {
            let mut acc = dk[c][a][b];
            for e in 0..n {
                acc -= t.gamma[e][c][a] * t.schouten[e][b] + t.gamma[e][c][b] * t.schouten[a][e];
            }
            acc
        };
        let mut cotton = vec![vec![vec![0.0; n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                for e in 0..n {
                    cotton[a][b][e] = nabla_k(a, b, e) - nabla_k(b, a, e);
                }
            }
        }
        Ok(ChartGeometry { chart, u, metric: t.metric, christoffel: t.gamma, riemann: t.riemann, ricci: t.ricci, scal: t.scal, schouten: t.schouten, weyl, cotton })
    }

    /// Spinor product on `Ann(x)`: `<u, xbar·w>`.
    pub fn intrinsic_product(&self, x: &ModelPoint, u: &[C64], w: &[C64]) -> C64 {
        self.inner.hermitian(u, &self.mul(&x.xbar(), w))
    }

    /// `alpha^k_psi` for `psi ∈ Ann(x)`, in the coframe `e_i^flat` of [`ModelPoint::tangent_frame`]:
    /// `alpha(t_I) = <t_I·psi, xbar·psi>`.
    pub fn intrinsic_dirac_form(&self, x: &ModelPoint, psi: &[C64], k: usize) -> KForm<C64> {
        let n = self.n();
        let frame = x.tangent_frame();
        let xb_psi = self.mul(&x.xbar(), psi);
        let mut out = KForm::zero(n, k);
        for idx in index_tuples(n, k) {
            let mut s = psi.to_vec();
            for &i in idx.iter().rev() {
                s = self.mul(&frame[i], &s);
            }
            let val = self.inner.hermitian(&s, &xb_psi);
            let neg = idx.iter().filter(|&&i| i < self.p).count() % 2 == 1;
            out.add_term(&idx, if neg { -val } else { val });
        }
        out
    }

    /// Frame components `w^i = eps_i <w, t_i>` of a tangent vector.
    pub fn frame_components(&self, x: &ModelPoint, w: &[f64]) -> Vec<f64> {
        x.tangent_frame().iter().enumerate().map(|(i, t)| if i < self.p { -self.metric(w, t) } else { self.metric(w, t) }).collect()
    }

    pub fn frame_eps(&self) -> Vec<i8> {
        (0..self.n()).map(|i| if i < self.p { -1 } else { 1 }).collect()
    }

    /// Tractor split of the ambient Dirac form `alpha^{k+1}_v` at `x`, in the null frame
    /// `e_- = x`, `e_+ = xbar`, `e_i = t_i` and the gauge `g_St`.
    pub fn tractor_split_at(&self, v: &[C64], x: &ModelPoint, k: usize) -> Result<TractorFormSplit<C64>> {
        self.check_point(x)?;
        let n = self.n();
        let amb = self.family.form_complex(&self.rep, v, k + 1);
        let eps = &self.rep.sig.eps;
        let mut frame = vec![x.ambient()];
        frame.extend(x.tangent_frame());
        frame.push(x.xbar());
        let cframe: Vec<Vec<C64>> = frame.iter().map(|f| f.iter().map(|&a| C64::new(a, 0.0)).collect()).collect();
        let mut null_form = KForm::zero(n + 2, k + 1);
        for idx in index_tuples(n + 2, k + 1) {
            let vs: Vec<Vec<C64>> = idx.iter().map(|&i| cframe[i].clone()).collect();
            let mut val = amb.evaluate(&vs, eps);
            let neg = idx.iter().filter(|&&i| (1..=self.p).contains(&i)).count() % 2 == 1;
            if neg {
                val = -val;
            }
            null_form.add_term(&idx, val);
        }
        split_tractor_form(&null_form, &Gauge::flat(&self.frame_eps()))
    }

    /// Compares the split of `alpha^{k+1}_v` at `x` with `alpha^k_phi` and `alpha^k_{D^g phi}`.
    pub fn tractor_sample(&self, v: &[C64], x: &ModelPoint, k: usize) -> Result<TractorFormSample> {
        let s = self.tractor_split_at(v, x, k)?;
        let phi = self.phi(v, x);
        let dphi = self.dirac(v, x);
        let scale_v = spinor_norm(v).powi(2).max(1e-300);
        let tol = 1e-10 * scale_v;
        let minus = fit_slot(&s.minus, &self.intrinsic_dirac_form(x, &phi, k), tol);
        let plus = fit_slot(&s.plus, &self.intrinsic_dirac_form(x, &dphi, k), tol);
        Ok(TractorFormSample { k, minus, plus, zero_norm: dense_norm(&s.zero) / scale_v, mp_norm: dense_norm(&s.mp) / scale_v })
    }

    /// Measures `d_1`, `d_2` for every degree over the given points.
    pub fn parallel_tractor_integration(&self, v: &[C64], points: &[ModelPoint]) -> Result<Vec<DegreeConstants>> {
        let mut out = Vec::new();
        for k in 0..=self.n() {
            let mut d1: Vec<Option<C64>> = Vec::new();
            let mut d2: Vec<Option<C64>> = Vec::new();
            let mut deviation: f64 = 0.0;
            for x in points {
                let s = self.tractor_sample(v, x, k)?;
                deviation = deviation.max(s.minus.deviation).max(s.plus.deviation);
                d1.push(s.minus.constant);
                d2.push(s.plus.constant);
            }
            let (c1, s1) = constant_spread(&d1);
            let (c2, s2) = constant_spread(&d2);
            out.push(DegreeConstants { k, d1: c1, d2: c2, spread: s1.max(s2), deviation });
        }
        Ok(out)
    }

    /// `max |∇_X alpha - X⌟dalpha/(k+1) + X^flat ∧ d*alpha/(n-k+1)|` for `alpha = alpha^k_phi`
    /// over `dirs` random coordinate directions, by centered differences in a chart.
    pub fn nc_killing_residual(&self, v: &[C64], k: usize, x: &ModelPoint, dirs: usize, rng: &mut Rng64) -> Result<f64> {
        self.nc_killing_residual_with(v, k, x, dirs, rng, &|_, _| C64::zero())
    }

    /// As [`Model::nc_killing_residual`] with a perturbation `noise(u, I)` added to each
    /// chart component `alpha_I`.
    pub fn nc_killing_residual_with(&self, v: &[C64], k: usize, x: &ModelPoint, dirs: usize, rng: &mut Rng64, noise: &dyn Fn(&[f64], usize) -> C64) -> Result<f64> {
        self.check_point(x)?;
        let n = self.n();
        if k > n {
            return Err(Error::Input(format!("degree {k} exceeds dimension {n}")));
        }
        let chart = ModelChart::for_point(x);
        let u0 = chart.coords(x)?;
        let tuples = index_tuples(n, k);
        let comps = |u: &[f64]| -> Vec<C64> {
            let y = chart.point(u);
            let phi = self.phi(v, &y);
            let form = self.intrinsic_dirac_form(&y, &phi, k);
            let cv: Vec<Vec<C64>> = chart.coordinate_vectors(u).iter().map(|w| self.frame_components(&y, w).into_iter().map(|a| C64::new(a, 0.0)).collect()).collect();
            let eps = self.frame_eps();
            tuples
                .iter()
                .enumerate()
                .map(|(j, idx)| {
                    let vs: Vec<Vec<C64>> = idx.iter().map(|&i| cv[i].clone()).collect();
                    form.evaluate(&vs, &eps) + noise(u, j)
                })
                .collect()
        };
        let flat = |z: Vec<C64>| -> Vec<f64> { z.iter().map(|c| c.re).chain(z.iter().map(|c| c.im)).collect() };
        let unflat = |f: Vec<f64>| -> Vec<C64> {
            let m = f.len() / 2;
            (0..m).map(|i| C64::new(f[i], f[m + i])).collect()
        };
        let a0 = comps(&u0);
        let h = 1e-3;
        let da: Vec<Vec<C64>> = (0..n).map(|c| unflat(numeric::derivative(|t| flat(comps(&numeric::shifted(&u0, c, t))), h, true))).collect();
        let geo = chart_tensors::<f64>(self.p, &u0, false);
        let pos = |idx: &[usize]| -> Option<(usize, f64)> {
            let mut s = idx.to_vec();
            let sign = sort_with_sign(&mut s)?;
            tuples.iter().position(|t| *t == s).map(|j| (j, sign as f64))
        };
        let comp = |arr: &[C64], idx: &[usize]| -> C64 { pos(idx).map(|(j, s)| arr[j] * s).unwrap_or_else(C64::zero) };
        // ∇_c alpha_J for an arbitrary k-tuple J
        let nabla = |c: usize, idx: &[usize]| -> C64 {
            let mut acc = comp(&da[c], idx);
            for s in 0..idx.len() {
                for e in 0..n {
                    let g = geo.gamma[e][c][idx[s]];
                    if g != 0.0 {
                        let mut j = idx.to_vec();
                        j[s] = e;
                        acc -= comp(&a0, &j) * g;
                    }
                }
            }
            acc
        };
        let d_alpha = |c: usize, idx: &[usize]| -> C64 {
            let mut acc = nabla(c, idx);
            for s in 0..idx.len() {
                let mut j = idx.to_vec();
                j[s] = c;
                acc -= nabla(idx[s], &j);
            }
            acc
        };
        let codiff = |idx: &[usize]| -> C64 {
            let mut acc = C64::zero();
            for a in 0..n {
                let mut j = vec![a];
                j.extend_from_slice(idx);
                acc -= nabla(a, &j) / geo.metric[a][a];
            }
            acc
        };
        let mut worst: f64 = 0.0;
        for _ in 0..dirs {
            let xv = random::gaussian_vec(rng, n);
            let xn = norm(&xv);
            let xv: Vec<f64> = xv.iter().map(|a| a / xn).collect();
            let xlow: Vec<f64> = (0..n).map(|a| geo.metric[a][a] * xv[a]).collect();
            for idx in &tuples {
                let mut r = C64::zero();
                for c in 0..n {
                    r += (nabla(c, idx) - d_alpha(c, idx) / (k as f64 + 1.0)) * xv[c];
                }
                for s in 0..idx.len() {
                    let mut rest = idx.clone();
                    rest.remove(s);
                    let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
                    r += codiff(&rest) * (sign * xlow[idx[s]] / (n as f64 - k as f64 + 1.0));
                }
                worst = worst.max(r.norm());
            }
        }
        Ok(worst)
    }

    /// Residual of `∇^nc s = 0` for the tractor of a constant ambient vector `w`,
    /// `s = (<w, xbar>, (w^T)^♯, <w, x>)`, along random chart directions at `x`.
    pub fn parallel_tractor_residual(&self, w: &[f64], x: &ModelPoint, dirs: usize, rng: &mut Rng64) -> Result<f64> {
        let geo = self.curvature_data_at(x)?;
        let curv = geo.curvature_data();
        let chart = geo.chart.clone();
        let n = self.n();
        let field = |u: &[f64]| -> Vec<f64> {
            let y = chart.point(u);
            let cv = chart.coordinate_vectors(u);
            let g = chart.metric(u);
            let low: Vec<f64> = cv.iter().map(|c| self.metric(w, c)).collect();
            let ginv = g.try_inverse().expect("g_St is nondegenerate in the chart");
            let yv = ginv * DVector::from_vec(low);
            let mut out = vec![self.metric(w, &y.xbar())];
            out.extend(yv.iter());
            out.push(self.metric(w, &y.ambient()));
            out
        };
        let mut worst: f64 = 0.0;
        for _ in 0..dirs {
            let xv = random::gaussian_vec(rng, n);
            let s = field(&geo.u);
            let ds = directional(&field, &geo.u, &xv);
            let jet = TractorJet { alpha: s[0], y: s[1..=n].to_vec(), beta: s[n + 1], d_alpha: ds[0], nabla_y: geo.covariant(&xv, &s[1..=n], &ds[1..=n]), d_beta: ds[n + 1] };
            let (a, y, b) = tractor_connection_apply(&xv, &jet, &curv)?;
            worst = worst.max(a.abs()).max(b.abs()).max(norm(&y));
        }
        Ok(worst)
    }

    /// `|X<s, s'> - <∇^nc_X s, s'> - <s, ∇^nc_X s'>|` for random polynomial tractor fields.
    pub fn tractor_metricity_residual(&self, x: &ModelPoint, dirs: usize, rng: &mut Rng64) -> Result<f64> {
        let geo = self.curvature_data_at(x)?;
        let curv = geo.curvature_data();
        let n = self.n();
        let chart = geo.chart.clone();
        let coeffs = |r: &mut Rng64| -> Vec<Vec<f64>> { (0..n + 2).map(|_| random::gaussian_vec(r, 1 + n + n * n)).collect() };
        let c1 = coeffs(rng);
        let c2 = coeffs(rng);
        let u0 = geo.u.clone();
        let poly = |c: &Vec<Vec<f64>>, u: &[f64]| -> Vec<f64> {
            c.iter()
                .map(|row| {
                    let mut acc = row[0];
                    for i in 0..n {
                        let di = u[i] - u0[i];
                        acc += row[1 + i] * di;
                        for j in 0..n {
                            acc += row[1 + n + i * n + j] * di * (u[j] - u0[j]);
                        }
                    }
                    acc
                })
                .collect()
        };
        let pairing = |u: &[f64]| -> Vec<f64> {
            let (s, t) = (poly(&c1, u), poly(&c2, u));
            let g = chart.metric(u);
            let mut acc = s[0] * t[n + 1] + s[n + 1] * t[0];
            for a in 0..n {
                for b in 0..n {
                    acc += g[(a, b)] * s[1 + a] * t[1 + b];
                }
            }
            vec![acc]
        };
        let tractor_pair = |s: &(f64, Vec<f64>, f64), t: &[f64]| -> f64 {
            let mut acc = s.0 * t[n + 1] + s.2 * t[0];
            for a in 0..n {
                acc += geo.metric[a][a] * s.1[a] * t[1 + a];
            }
            acc
        };
        let mut worst: f64 = 0.0;
        for _ in 0..dirs {
            let xv = random::gaussian_vec(rng, n);
            let lhs = directional(&pairing, &u0, &xv)[0];
            let mut rhs = 0.0;
            for (mine, other) in [(&c1, &c2), (&c2, &c1)] {
                let s = poly(mine, &u0);
                let ds = directional(&|u: &[f64]| poly(mine, u), &u0, &xv);
                let jet = TractorJet { alpha: s[0], y: s[1..=n].to_vec(), beta: s[n + 1], d_alpha: ds[0], nabla_y: geo.covariant(&xv, &s[1..=n], &ds[1..=n]), d_beta: ds[n + 1] };
                let (a, y, b) = tractor_connection_apply(&xv, &jet, &curv)?;
                rhs += tractor_pair(&(a, y, b), &poly(other, &u0));
            }
            worst = worst.max((lhs - rhs).abs());
        }
        Ok(worst)
    }
}

/// Directional derivative `X(f)` at `u` (Richardson, step 1e-3).
fn directional(f: &dyn Fn(&[f64]) -> Vec<f64>, u: &[f64], xv: &[f64]) -> Vec<f64> {
    numeric::derivative(|t| f(&u.iter().zip(xv).map(|(a, b)| a + t * b).collect::<Vec<f64>>()), 1e-3, true)
}

fn constant_spread(cs: &[Option<C64>]) -> (Option<C64>, f64) {
    let first = match cs.first() {
        Some(c) => *c,
        None => return (None, 0.0),
    };
    let mut spread: f64 = 0.0;
    for c in cs {
        match (first, c) {
            (Some(a), Some(b)) => spread = spread.max((a - b).norm() / a.norm()),
            (None, None) => {}
            _ => spread = spread.max(1.0),
        }
    }
    (first, spread)
}

/// Real `2N x m` matrix of complex columns, `[Re; Im]`.
fn real_stack(cols: &[Vec<C64>]) -> DMatrix<f64> {
    let rows = cols.first().map_or(0, |c| c.len());
    DMatrix::from_fn(2 * rows, cols.len(), |i, j| if i < rows { cols[j][i].re } else { cols[j][i - rows].im })
}

/// Real form `[[Re, -Im], [Im, Re]]` of a complex matrix given by columns.
fn complex_stack(cols: &[Vec<C64>]) -> DMatrix<f64> {
    let rows = cols.first().map_or(0, |c| c.len());
    let m = cols.len();
    DMatrix::from_fn(2 * rows, 2 * m, |i, j| {
        let (r, c) = (i % rows, j % m);
        let z = cols[c][r];
        match (i < rows, j < m) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;

    fn model(p: usize, q: usize) -> Model {
        Model::new(p, q).unwrap()
    }

    #[test]
    fn phi_lies_in_the_annihilator() {
        let m = model(1, 2);
        let mut r = rng(1);
        for _ in 0..5 {
            let v = m.random_spinor(&mut r);
            let x = m.random_point(&mut r);
            let e = m.evaluate(&v, &x, ZERO_TOL).unwrap();
            assert!(spinor_norm(&m.mul(&x.ambient(), &e.value)) < 1e-12);
            let diff: Vec<C64> = e.value.iter().zip(&e.ann).map(|(a, b)| a - b).collect();
            assert!(spinor_norm(&diff) < 1e-12);
            assert!(x.null_defect().abs() < 1e-12);
        }
        let zero = vec![C64::zero(); m.spinor_dim()];
        assert!(m.evaluate(&zero, &m.random_point(&mut r), ZERO_TOL).unwrap().zero);
    }

    #[test]
    fn connection_is_clifford_compatible() {
        // ∇_X (Y·psi) = (∇_X Y)·psi + Y·∇_X psi with Y the tangent part of a constant vector
        let m = model(2, 2);
        let mut r = rng(2);
        let x = m.random_point(&mut r);
        let w = random::gaussian_vec(&mut r, 6);
        let u = m.random_spinor(&mut r);
        let bx = x.project_tangent(&random::gaussian_vec(&mut r, 6));
        let psi = |z: &ModelPoint| m.phi(&u, z);
        let ypsi = |z: &ModelPoint| m.mul(&z.project_tangent(&w), &psi(z));
        let h = 1e-4;
        let lhs = m.covariant_derivative(&ypsi, &x, &bx, h).unwrap();
        let yf = |t: f64| m.geodesic(&x, &bx, t).map(|z| z.project_tangent(&w)).unwrap();
        let dy: Vec<f64> = yf(h).iter().zip(yf(-h)).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let nabla_y = x.project_tangent(&dy);
        let rhs1 = m.mul(&nabla_y, &psi(&x));
        let rhs2 = m.mul(&x.project_tangent(&w), &m.covariant_derivative(&psi, &x, &bx, h).unwrap());
        let res: Vec<C64> = lhs.iter().zip(rhs1.iter().zip(&rhs2)).map(|(a, (b, c))| a - b - c).collect();
        assert!(spinor_norm(&res) < 1e-5, "{}", spinor_norm(&res));
    }

    #[test]
    fn intrinsic_product_is_parallel() {
        let m = model(1, 3);
        let mut r = rng(3);
        let x = m.random_point(&mut r);
        let (a, b) = (m.random_spinor(&mut r), m.random_spinor(&mut r));
        let bx = x.project_tangent(&random::gaussian_vec(&mut r, 6));
        let h = 1e-4;
        let f = |t: f64| {
            let y = m.geodesic(&x, &bx, t).unwrap();
            m.intrinsic_product(&y, &m.phi(&a, &y), &m.phi(&b, &y))
        };
        let lhs = (f(h) - f(-h)) / (2.0 * h);
        let na = m.covariant_derivative(&|z| m.phi(&a, z), &x, &bx, h).unwrap();
        let nb = m.covariant_derivative(&|z| m.phi(&b, z), &x, &bx, h).unwrap();
        let rhs = m.intrinsic_product(&x, &na, &m.phi(&b, &x)) + m.intrinsic_product(&x, &m.phi(&a, &x), &nb);
        assert!((lhs - rhs).norm() < 1e-7);
    }

    #[test]
    fn model_spinors_are_twistor_spinors() {
        for (p, q) in [(0, 3), (1, 2), (2, 2), (1, 3)] {
            let m = model(p, q);
            let mut r = rng(4);
            for _ in 0..3 {
                let v = m.random_spinor(&mut r);
                assert!(m.twistor_residual_max(&v, &mut r, 4, 1e-4).unwrap() < 1e-6);
            }
        }
    }

    #[test]
    fn wrong_dirac_normalisation_is_detected() {
        let m = model(1, 2);
        let mut r = rng(5);
        let v = m.random_spinor(&mut r);
        let y = m.random_point(&mut r);
        let bx = y.project_tangent(&random::gaussian_vec(&mut r, 5));
        let nab = m.covariant_derivative(&|z| m.phi(&v, z), &y, &bx, 1e-4).unwrap();
        let xd = m.mul(&bx, &m.dirac(&v, &y));
        let wrong = axpy(C64::new(0.5 / m.n() as f64, 0.0), &xd, &nab);
        assert!(spinor_norm(&wrong) > 1e-3);
    }

    #[test]
    fn geodesic_starts_at_x_with_velocity_b() {
        let m = model(2, 3);
        let mut r = rng(6);
        let x = m.random_point(&mut r);
        let b = x.project_tangent(&random::gaussian_vec(&mut r, 7));
        assert!(m.geodesic(&x, &b, 0.0).unwrap().distance(&x) < 1e-15);
        let h = 1e-6;
        let a = m.geodesic(&x, &b, h).unwrap().ambient();
        let c = m.geodesic(&x, &b, -h).unwrap().ambient();
        let vel: Vec<f64> = a.iter().zip(&c).map(|(p, q)| (p - q) / (2.0 * h)).collect();
        assert!(vel.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-8));
        let zero = vec![0.0; 7];
        assert!(m.geodesic(&x, &zero, 3.0).unwrap().distance(&x) < 1e-15);
        assert!(matches!(m.geodesic(&x, &x.ambient(), 1.0), Err(Error::NotTangent)));
    }

    #[test]
    fn zero_set_along_null_kernel_geodesics() {
        let m = model(2, 2);
        let mut r = rng(7);
        let x = m.random_point(&mut r);
        for rank in [1, 2] {
            let v = m.spinor_with_zero(&x, rank, &mut r).unwrap();
            let rep = m.zero_set_verify(&v, &x, 20, &mut r).unwrap();
            assert!(rep.ker_dim >= rank);
            assert!(rep.passed(), "{rep:?}");
        }
    }

    #[test]
    fn riemannian_model_has_isolated_zero() {
        let m = model(0, 3);
        let mut r = rng(8);
        let x = m.random_point(&mut r);
        let v = m.spinor_with_zero(&x, 0, &mut r).unwrap();
        let rep = m.zero_set_verify(&v, &x, 10, &mut r).unwrap();
        assert_eq!(rep.ker_dim, 0);
        assert!(rep.passed());
        assert!(rep.found.iter().all(|y| y.distance(&x) < 1e-6 || y.distance(&x.antipode()) < 1e-6));
    }

    #[test]
    fn not_a_zero_is_rejected() {
        let m = model(1, 2);
        let mut r = rng(9);
        let v = m.random_spinor(&mut r);
        let x = m.random_point(&mut r);
        assert!(matches!(m.zero_set_verify(&v, &x, 3, &mut r), Err(Error::NotAZero(_))));
    }

    #[test]
    fn all_twistor_spinors_arise_from_ambient_spinors() {
        let m = model(1, 3);
        let mut r = rng(10);
        let pts: Vec<ModelPoint> = (0..4).map(|_| m.random_point(&mut r)).collect();
        assert_eq!(m.evaluation_rank(&pts), m.spinor_dim());
    }

    #[test]
    fn model_is_conformally_flat() {
        for (p, q) in [(0, 3), (1, 2), (2, 2), (1, 4), (3, 3)] {
            let m = model(p, q);
            let mut r = rng(11);
            let mut scal = None;
            for _ in 0..3 {
                let x = m.random_point(&mut r);
                let g = m.curvature_data_at(&x).unwrap();
                assert!(g.weyl_max() < 1e-9 && g.cotton_max() < 1e-9);
                let s = *scal.get_or_insert(g.scal);
                assert!((g.scal - s).abs() < 1e-9);
                assert!((g.scal - (q * (q.max(1) - 1)) as f64 + (p * (p.max(1) - 1)) as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ricci_matches_finite_differences() {
        let m = model(2, 3);
        let mut r = rng(12);
        let x = m.random_point(&mut r);
        let g = m.curvature_data_at(&x).unwrap();
        let chart = g.chart.clone();
        let ric = numeric::ricci(&|u: &[f64]| chart.metric(u), &g.u, 1e-3).unwrap();
        for a in 0..5 {
            for b in 0..5 {
                assert!((ric[(a, b)] - g.ricci[a][b]).abs() < 1e-6);
            }
        }
        // (p-1)(-g_{S^p}) ⊕ (q-1) g_{S^q} in terms of g_St blocks
        assert!((g.ricci[0][0] + g.metric[0][0]).abs() < 1e-12);
        assert!((g.ricci[3][3] - 2.0 * g.metric[3][3]).abs() < 1e-12);
    }

    #[test]
    fn chart_round_trip_and_metric() {
        let m = model(2, 2);
        let mut r = rng(13);
        let x = m.random_point(&mut r);
        let chart = ModelChart::for_point(&x);
        let u = chart.coords(&x).unwrap();
        assert!(chart.point(&u).distance(&x) < 1e-12);
        let cv = chart.coordinate_vectors(&u);
        let g = chart.metric(&u);
        for a in 0..4 {
            for b in 0..4 {
                assert!((m.metric(&cv[a], &cv[b]) - g[(a, b)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_ambient_vectors_are_parallel_tractors() {
        let m = model(1, 2);
        let mut r = rng(14);
        for _ in 0..3 {
            let x = m.random_point(&mut r);
            let w = random::gaussian_vec(&mut r, 5);
            assert!(m.parallel_tractor_residual(&w, &x, 3, &mut r).unwrap() < 1e-8);
            assert!(m.tractor_metricity_residual(&x, 3, &mut r).unwrap() < 1e-8);
        }
    }

    #[test]
    fn dirac_forms_are_nc_killing() {
        let m = model(1, 2);
        let mut r = rng(15);
        let v = m.random_spinor(&mut r);
        let x = m.random_point(&mut r);
        for k in 0..=3 {
            let res = m.nc_killing_residual(&v, k, &x, 3, &mut r).unwrap();
            assert!(res < 1e-5, "k={k}: {res}");
        }
        let noisy = m.nc_killing_residual_with(&v, 1, &x, 3, &mut r, &|u, j| C64::new(0.05 * (u[0] + j as f64 * u[1]).sin(), 0.0)).unwrap();
        assert!(noisy > 1e-3);
    }

    #[test]
    fn tractor_split_constants() {
        let m = model(1, 2);
        let mut r = rng(16);
        let v = m.random_spinor(&mut r);
        let pts: Vec<ModelPoint> = (0..5).map(|_| m.random_point(&mut r)).collect();
        for d in m.parallel_tractor_integration(&v, &pts).unwrap() {
            assert!(d.passed(1e-6), "{d:?}");
        }
    }

    #[test]
    fn tractor_constants_are_universal() {
        // measured: |d_1| = 1/2, |d_2| = 1/n^2, same for every v
        for (p, q) in [(0, 3), (1, 2), (2, 2), (1, 3)] {
            let m = model(p, q);
            let mut r = rng(17);
            let pts: Vec<ModelPoint> = (0..3).map(|_| m.random_point(&mut r)).collect();
            let a = m.parallel_tractor_integration(&m.random_spinor(&mut r), &pts).unwrap();
            let b = m.parallel_tractor_integration(&m.random_spinor(&mut r), &pts).unwrap();
            let n2 = (m.n() * m.n()) as f64;
            for (x, y) in a.iter().zip(&b) {
                if let (Some(d1), Some(e1)) = (x.d1, y.d1) {
                    assert!((d1 - e1).norm() < 1e-12 && (d1.norm() - 0.5).abs() < 1e-12);
                }
                if let (Some(d2), Some(e2)) = (x.d2, y.d2) {
                    assert!((d2 - e2).norm() < 1e-12 && (d2.norm() - 1.0 / n2).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zeros_kill_the_lower_slots() {
        let m = model(2, 2);
        let mut r = rng(18);
        let x = m.random_point(&mut r);
        let w = m.random_spinor(&mut r);
        let at_zero = m.phi(&w, &x);
        let dirac_zero = m.mul(&x.xbar(), &w);
        assert!(spinor_norm(&m.dirac(&dirac_zero, &x)) < 1e-12);
        for k in 0..=4 {
            let a = m.tractor_sample(&at_zero, &x, k).unwrap();
            assert!(a.minus.constant.is_none() && a.minus.deviation == 0.0);
            assert!(a.zero_norm < 1e-12 && a.mp_norm < 1e-12);
            let b = m.tractor_sample(&dirac_zero, &x, k).unwrap();
            assert!(b.plus.constant.is_none() && b.plus.deviation == 0.0);
            assert!(b.zero_norm < 1e-12 && b.mp_norm < 1e-12);
        }
    }
}
