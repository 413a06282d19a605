//! Spinor inner products, algebraic Dirac forms and their structure theory.

use crate::clifford::{real_stack, to_complex, Base, CliffordRep, Mono, Signature, C};
use crate::error::{Error, Result};
use crate::kform::{index_tuples, KForm};
use crate::linalg::{self, Mat};
use crate::random::{self, Rng64};
use crate::scalar::{i_pow, Cq, Field, Q};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

/// `<u, v> = i^d (M u, v)` with `M = rho(e_{i_1}) ··· rho(e_{i_p})` over the timelike indices.
#[derive(Clone, Debug)]
pub struct InnerProduct {
    pub p: usize,
    pub timelike: Vec<usize>,
    pub base: Mono,
    /// Exponent `d` of the phase `i^d`.
    pub phase: u8,
}

impl InnerProduct {
    pub fn new(rep: &CliffordRep) -> Result<Self> {
        let timelike = rep.sig.timelike();
        let base = rep.product(&timelike);
        let hermitian = |d: u8| {
            (0..rep.dim).all(|j| {
                let k = base.col[j];
                base.col[k] == j && (2 * d + base.ph[j] + base.ph[k]).is_multiple_of(4)
            })
        };
        let phase = (0..4u8).find(|&d| hermitian(d)).ok_or_else(|| Error::NoPhase("the spinor product Hermitian".into()))?;
        let ip = InnerProduct { p: rep.sig.p, timelike, base, phase };
        for i in 0..rep.n() {
            for a in 0..rep.dim {
                for b in 0..rep.dim {
                    let r = ip.fg_residual::<Q>(rep, i, &rep.basis(a), &rep.basis(b));
                    if !r.is_zero() {
                        return Err(Error::NoPhase(format!("property (fg) hold for e_{}", i + 1)));
                    }
                }
            }
        }
        Ok(ip)
    }

    /// Hermitian product `<u, v>`.
    pub fn hermitian<T: Base>(&self, u: &[C<T>], v: &[C<T>]) -> C<T> {
        let mut acc = C::<T>::zero();
        for (j, uj) in u.iter().enumerate() {
            if uj.is_zero() {
                continue;
            }
            let k = self.base.col[j];
            let w = crate::clifford::rot(uj, (self.base.ph[j] + self.phase) % 4);
            acc = acc + w * v[k].conj();
        }
        acc
    }

    /// Real bilinear product `(M u, v)` without conjugation, as used on real spinors.
    pub fn bilinear<T: Base>(&self, u: &[C<T>], v: &[C<T>]) -> C<T> {
        let mu = self.base.apply(u);
        mu.into_iter().zip(v).fold(C::zero(), |acc, (a, b)| acc + a * b.clone())
    }

    /// `<e_i u, v> + (-1)^p <u, e_i v>`.
    pub fn fg_residual<T: Base>(&self, rep: &CliffordRep, i: usize, u: &[C<T>], v: &[C<T>]) -> C<T> {
        let a = self.hermitian(&rep.act(i, u), v);
        let b = self.hermitian(u, &rep.act(i, v));
        if self.p.is_multiple_of(2) {
            a + b
        } else {
            a - b
        }
    }

    /// Same residual for an arbitrary real vector `x`.
    pub fn fg_residual_vec<T: Base>(&self, rep: &CliffordRep, x: &[T], u: &[C<T>], v: &[C<T>]) -> Result<C<T>> {
        let a = self.hermitian(&rep.real_vec_mul(x, u)?, v);
        let b = self.hermitian(u, &rep.real_vec_mul(x, v)?);
        Ok(if self.p.is_multiple_of(2) { a + b } else { a - b })
    }

    /// `<u(a), u(b)>` for basis indices.
    pub fn basis_pairing(&self, a: usize, b: usize) -> Cq {
        if self.base.col[a] == b {
            i_pow((self.base.ph[a] + self.phase) as i64)
        } else {
            Cq::zero()
        }
    }

    /// Hermitian conjugate-symmetry `<u,v> = conj <v,u>` on a pair.
    pub fn is_hermitian_on<T: Base>(&self, u: &[C<T>], v: &[C<T>]) -> bool {
        self.hermitian(u, v) == self.hermitian(v, u).conj()
    }

    /// `true` iff the real bilinear product is symmetric (else it is skew).
    pub fn real_symmetric(&self) -> bool {
        (0..self.base.dim()).all(|j| self.base.ph[j] == self.base.ph[self.base.col[j]])
    }

    /// Norm used for real spinors: bilinear on real-backed reps, Hermitian otherwise.
    pub fn real_norm<T: Base>(&self, rep: &CliffordRep, v: &[C<T>]) -> C<T> {
        if rep.is_real_backed() {
            self.bilinear(v, v)
        } else {
            self.hermitian(v, v)
        }
    }
}

/// Checks the basis pairing pattern: `<u(eps), u(delta)> != 0` iff the first
/// `min(p, m)` labels flip and the remaining ones agree, with a value that depends
/// only on the flipped labels.
pub fn check_spf_pattern(rep: &CliffordRep, ip: &InnerProduct) -> bool {
    let m = rep.sig.m();
    let flips = rep.sig.p.min(m);
    let mask: usize = (1 << flips) - 1;
    let mut value_by_head: std::collections::HashMap<usize, Cq> = Default::default();
    for a in 0..rep.dim {
        for b in 0..rep.dim {
            let expect = b == a ^ mask;
            let v = ip.basis_pairing(a, b);
            if expect == v.is_zero() {
                return false;
            }
            if expect {
                let head = a & mask;
                if let Some(prev) = value_by_head.get(&head) {
                    if prev != &v {
                        return false;
                    }
                } else {
                    value_by_head.insert(head, v);
                }
            }
        }
    }
    true
}

/// Phases making algebraic Dirac forms real, one per degree `0..=n`.
#[derive(Clone, Debug)]
pub struct DiracFamily {
    pub inner: InnerProduct,
    /// `d_k = i^{phases[k]}` with `phases[k] ∈ {0, 1}`.
    pub phases: Vec<u8>,
}

impl DiracFamily {
    /// Determines each `d_k` on the probe set (basis spinors plus ten seeded random spinors).
    /// The admissible phases come in pairs `±d`; the representative in `{1, i}` is kept.
    pub fn new(rep: &CliffordRep) -> Result<Self> {
        let inner = InnerProduct::new(rep)?;
        let mut probes: Vec<Vec<Cq>> = (0..rep.dim).map(|b| rep.basis(b)).collect();
        let mut r = random::rng(0x5eed_d1ac);
        for _ in 0..10 {
            probes.push(random::complex_spinor(&mut r, rep.dim));
        }
        let mut phases = Vec::with_capacity(rep.n() + 1);
        let mut fam = DiracFamily { inner, phases: vec![0; rep.n() + 1] };
        for k in 0..=rep.n() {
            let raw: Vec<KForm<Cq>> = probes.iter().map(|s| fam.raw_form(rep, s, k)).collect();
            let ok: Vec<u8> = (0..4u8)
                .filter(|&d| raw.iter().all(|f| f.coeffs.values().all(|c| crate::clifford::rot(c, d).im.is_zero())))
                .collect();
            match ok.as_slice() {
                [a, b] if (a + 2) % 4 == *b => phases.push(*a),
                _ => return Err(Error::NoPhase(format!("Dirac {k}-forms real (admissible: {ok:?})"))),
            }
        }
        fam.phases = phases;
        Ok(fam)
    }

    /// `sum_I eps_I <e_I chi, chi> e_I` without the phase `d_k`.
    fn raw_form<T: Base>(&self, rep: &CliffordRep, chi: &[C<T>], k: usize) -> KForm<C<T>> {
        let n = rep.n();
        let mut out = KForm::zero(n, k);
        if chi.iter().all(|c| c.is_zero()) {
            return out;
        }
        for idx in index_tuples(n, k) {
            let mono = self.inner.base.mul(&rep.product(&idx));
            let mut acc = C::<T>::zero();
            for (j, x) in chi.iter().enumerate() {
                if !x.is_zero() {
                    acc = acc + crate::clifford::rot(x, (mono.ph[j] + self.inner.phase) % 4) * chi[mono.col[j]].conj();
                }
            }
            let neg = idx.iter().filter(|&&i| rep.sig.eps[i] < 0).count() % 2 == 1;
            out.add_term(&idx, if neg { -acc } else { acc });
        }
        out
    }

    /// `alpha^k_chi` with complex coefficients (imaginary parts vanish).
    pub fn form_complex<T: Base>(&self, rep: &CliffordRep, chi: &[C<T>], k: usize) -> KForm<C<T>> {
        let d = self.phases[k];
        self.raw_form(rep, chi, k).map(|c| crate::clifford::rot(c, d))
    }

    /// `alpha^k_chi` over an exact field; errors if a coefficient is not real.
    pub fn form<T: Base>(&self, rep: &CliffordRep, chi: &[C<T>], k: usize) -> Result<KForm<T>> {
        let f = self.form_complex(rep, chi, k);
        if f.coeffs.values().any(|c| !c.im.is_zero()) {
            return Err(Error::NoPhase(format!("the Dirac {k}-form real")));
        }
        Ok(real_part(&f))
    }
}

pub fn real_part<T: Base>(f: &KForm<C<T>>) -> KForm<T> {
    f.map(|c| c.re.clone())
}

pub fn max_imag(f: &KForm<C<f64>>) -> f64 {
    f.coeffs.values().fold(0.0, |m, c| m.max(c.im.abs()))
}

/// `f_i^± = e_{2i-1} ± e_{2i}` (0-based `i`), null when `eps_{2i-1} = -eps_{2i}`.
pub fn f_vector(n: usize, i: usize, sign: i8) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[2 * i] = Q::one();
    v[2 * i + 1] = Q::from_integer((sign as i64).into());
    v
}

/// `sum a_nu u(delta_1, ..., delta_k, nu_{k+1}, ..., nu_m)` with random integer `a_nu`:
/// a spinor annihilated by `f_1^{delta_1}, ..., f_k^{delta_k}`.
pub fn normal_form_spinor(rep: &CliffordRep, delta: &[i8], r: &mut Rng64, real: bool) -> Vec<Cq> {
    let m = rep.sig.m();
    let k = delta.len();
    let mut v = vec![Cq::zero(); rep.dim];
    loop {
        for tail in 0..(1usize << (m - k)) {
            let mut label: Vec<i8> = delta.to_vec();
            label.extend((0..m - k).map(|j| if tail >> j & 1 == 1 { -1 } else { 1 }));
            let re = Q::from_integer(random::small_int(r).into());
            let im = if real { Q::zero() } else { Q::from_integer(random::small_int(r).into()) };
            v[rep.u_index(&label)] = Cq::new(re, im);
        }
        if v.iter().any(|c| !c.is_zero()) {
            return v;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationReport {
    pub ker_dim: usize,
    /// Every kernel vector `l` satisfies `l^flat ∧ alpha^p = 0`.
    pub kernel_divides: bool,
    pub witnesses_tested: usize,
    /// Every admissible witness `l` satisfies `l^flat ∧ alpha^p != 0`.
    pub witnesses_hold: bool,
}

/// Tests both directions of the kernel factorization of `alpha^p_chi`.
/// Candidates that are not null, not orthogonal to `ker chi`, or inside it are skipped.
pub fn check_kernel_factorization(fam: &DiracFamily, rep: &CliffordRep, chi: &[Cq], candidates: &[Vec<Q>]) -> Result<FactorizationReport> {
    let ker = rep.kernel_real(chi)?;
    let alpha = fam.form(rep, chi, rep.sig.p)?;
    let kernel_divides = ker.iter().all(|l| KForm::from_vector(l).wedge(&alpha).is_zero());
    let mut tested = 0;
    let mut hold = true;
    for l in candidates {
        if !rep.sig.dot(l, l).is_zero() || ker.iter().any(|k| !rep.sig.dot(k, l).is_zero()) {
            continue;
        }
        let mut span = ker.clone();
        span.push(l.clone());
        if linalg::rank_of_vectors(&span) == ker.len() {
            continue;
        }
        tested += 1;
        if KForm::from_vector(l).wedge(&alpha).is_zero() {
            hold = false;
        }
    }
    Ok(FactorizationReport { ker_dim: ker.len(), kernel_divides, witnesses_tested: tested, witnesses_hold: hold })
}

/// Null vectors `e_a ± e_b` (`eps_a != eps_b`) and their sums over disjoint pairs,
/// kept when orthogonal to every vector of `ker`.
pub fn null_candidates(sig: &Signature, ker: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = sig.n();
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if sig.eps[a] == sig.eps[b] {
                continue;
            }
            for s in [1i64, -1] {
                let mut v = vec![Q::zero(); n];
                v[a] = Q::one();
                v[b] = Q::from_integer(s.into());
                out.push(v);
            }
        }
    }
    let singles = out.clone();
    for (i, x) in singles.iter().enumerate() {
        for y in &singles[i + 1..] {
            if (0..n).all(|j| x[j].is_zero() || y[j].is_zero()) {
                out.push(x.iter().zip(y).map(|(a, b)| a + b).collect());
            }
        }
    }
    out.retain(|v| ker.iter().all(|k| sig.dot(k, v).is_zero()));
    out
}

/// Mutually orthogonal basis of `span(vs)` (rational Gram-Schmidt for the
/// `eps` form). Returns `(basis, radical)` where the radical vectors are null and
/// orthogonal to everything.
pub fn orthogonal_split(eps: &[i8], vs: &[Vec<Q>]) -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
    let dot = |a: &[Q], b: &[Q]| linalg::eps_dot(eps, a, b);
    // Echelon basis of the span.
    let basis: Vec<Vec<Q>> = {
        let m = Mat::from_rows(vs.to_vec());
        let (r, piv) = linalg::rref(&m);
        (0..piv.len()).map(|i| r.row(i)).collect()
    };
    let mut rest = basis;
    let mut ortho: Vec<Vec<Q>> = Vec::new();
    loop {
        // Project out the orthogonal vectors found so far.
        rest = rest
            .into_iter()
            .map(|v| {
                let mut w = v.clone();
                for o in &ortho {
                    let c = dot(&v, o) / dot(o, o);
                    w = w.iter().zip(o.iter()).map(|(a, b)| a - &c * b).collect();
                }
                w
            })
            .filter(|w: &Vec<Q>| w.iter().any(|x| !x.is_zero()))
            .collect();
        if let Some(pos) = rest.iter().position(|v| !dot(v, v).is_zero()) {
            ortho.push(rest.remove(pos));
            continue;
        }
        let mut found = None;
        'outer: for i in 0..rest.len() {
            for j in (i + 1)..rest.len() {
                if !dot(&rest[i], &rest[j]).is_zero() {
                    found = Some((i, j));
                    break 'outer;
                }
            }
        }
        match found {
            Some((i, j)) => {
                let s: Vec<Q> = rest[i].iter().zip(&rest[j]).map(|(a, b)| a + b).collect();
                rest.remove(j);
                ortho.push(s);
            }
            None => break,
        }
    }
    let radical = if rest.is_empty() {
        rest
    } else {
        let m = Mat::from_rows(rest);
        let (r, piv) = linalg::rref(&m);
        (0..piv.len()).map(|i| r.row(i)).collect()
    };
    (ortho, radical)
}

/// `{xi : xi ∧ form = 0}`, spanned by the factors when the form is decomposable.
pub fn divisor_space<T: Field>(form: &KForm<T>) -> Vec<Vec<T>> {
    let n = form.dim;
    let cols: Vec<Vec<T>> = (0..n).map(|i| KForm::basis(n, &[i]).wedge(form).dense()).collect();
    Mat::from_cols(&cols).nullspace()
}

pub fn is_decomposable<T: Field>(form: &KForm<T>) -> bool {
    !form.is_zero() && (form.degree <= 1 || divisor_space(form).len() == form.degree)
}

#[derive(Clone, Debug, Serialize)]
pub struct CausalReport {
    pub null_factors: usize,
    pub timelike_factors: usize,
    pub spacelike_factors: usize,
    /// `true` iff the non-null factors share one causal type.
    pub uniform: bool,
    /// The radical of the factor space equals the given kernel.
    pub radical_is_kernel: bool,
}

/// Causal types of a mutually orthogonal factorization of a simple form.
pub fn simple_form_causal_types(sig: &Signature, form: &KForm<Q>, kernel: &[Vec<Q>]) -> Result<CausalReport> {
    if !is_decomposable(form) {
        return Err(Error::NotSimple("form is not a wedge of 1-forms".into()));
    }
    let support = if form.degree == 1 {
        vec![form.dense()]
    } else {
        divisor_space(form)
    };
    let (ortho, radical) = orthogonal_split(&sig.eps, &support);
    let mut neg = 0;
    let mut pos = 0;
    for v in &ortho {
        if sig.dot(v, v).is_negative() {
            neg += 1;
        } else {
            pos += 1;
        }
    }
    let radical_is_kernel = {
        let mut both = radical.clone();
        both.extend(kernel.iter().cloned());
        linalg::rank_of_vectors(&both) == radical.len() && linalg::rank_of_vectors(kernel) == radical.len()
    };
    Ok(CausalReport { null_factors: radical.len(), timelike_factors: neg, spacelike_factors: pos, uniform: neg == 0 || pos == 0, radical_is_kernel })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dirac2Case {
    TotallyLightlikePlane,
    LightlikeTimelike,
    KaehlerFull,
    KaehlerDegenerate,
}

impl Dirac2Case {
    pub fn label(&self) -> &'static str {
        match self {
            Dirac2Case::TotallyLightlikePlane => "totally-lightlike-plane",
            Dirac2Case::LightlikeTimelike => "lightlike-timelike",
            Dirac2Case::KaehlerFull => "kaehler-full",
            Dirac2Case::KaehlerDegenerate => "kaehler-degenerate",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Dirac2Report {
    pub case: Dirac2Case,
    pub rank: usize,
    pub ker_dim: usize,
    /// Case agrees with `dim ker phi` (2, 1, 0, 0 for the four cases).
    pub consistent: bool,
    /// The raised endomorphism `J` satisfies `J^3 = -c J` with `c > 0`.
    /// Cases 3 and 4 are separated only by rank and radical type; this flag is
    /// the available evidence that the form is Kaehler on the radical's complement.
    pub complex_structure: bool,
}

/// Classifies `alpha^2_phi` for `phi` in signature `(2, n-2)`.
pub fn classify_dirac2(fam: &DiracFamily, rep: &CliffordRep, phi: &[Cq]) -> Result<Dirac2Report> {
    let sig = &rep.sig;
    if sig.p != 2 {
        return Err(Error::UnsupportedSignature { p: sig.p, q: sig.q, what: "Dirac 2-form classification".into() });
    }
    let n = sig.n();
    let ker_dim = rep.kernel_real(phi)?.len();
    let alpha = fam.form(rep, phi, 2)?;
    let mut f = Mat::<Q>::zeros(n, n);
    for (idx, c) in &alpha.coeffs {
        f[(idx[0], idx[1])] = c.clone();
        f[(idx[1], idx[0])] = -c.clone();
    }
    let rank = f.rank();
    let eta = Mat::from_rows((0..n).map(|i| (0..n).map(|j| if i == j { Q::from_integer((sig.eps[i] as i64).into()) } else { Q::zero() }).collect()).collect());
    let j = f.mul(&eta).scale(&-Q::one());
    let j3 = j.mul(&j).mul(&j);
    let complex_structure = {
        let pos = (0..n * n).find(|&t| !j.data[t].is_zero());
        match pos {
            Some(t) => {
                let c = -(j3.data[t].clone() / j.data[t].clone());
                c.is_positive() && j3 == j.scale(&-c)
            }
            None => false,
        }
    };
    let case = if rank == 2 {
        let rows: Vec<Vec<Q>> = (0..n).map(|i| f.row(i)).filter(|r| r.iter().any(|x| !x.is_zero())).collect();
        let m = Mat::from_rows(rows);
        let (r, piv) = linalg::rref(&m);
        let s: Vec<Vec<Q>> = (0..piv.len()).map(|i| r.row(i)).collect();
        let gram = Mat::from_rows(s.iter().map(|a| s.iter().map(|b| sig.dot(a, b)).collect()).collect());
        if gram.is_zero() {
            Dirac2Case::TotallyLightlikePlane
        } else if gram.rank() == 1 {
            let d = (0..2).map(|i| gram[(i, i)].clone()).find(|x| !x.is_zero());
            match d {
                Some(x) if x.is_negative() => Dirac2Case::LightlikeTimelike,
                _ => return Err(Error::Unclassified("rank-2 form with a spacelike factor".into())),
            }
        } else {
            return Err(Error::Unclassified("rank-2 form on a nondegenerate plane".into()));
        }
    } else if rank == 0 {
        return Err(Error::Unclassified("zero 2-form".into()));
    } else if rank == n {
        Dirac2Case::KaehlerFull
    } else {
        // Radical vectors X satisfy F (eps X) = 0.
        let rad: Vec<Vec<Q>> = f.nullspace().into_iter().map(|v| v.iter().zip(&sig.eps).map(|(x, &e)| if e < 0 { -x.clone() } else { x.clone() }).collect()).collect();
        let (ortho, radical) = orthogonal_split(&sig.eps, &rad);
        if !radical.is_empty() || ortho.iter().any(|v| sig.dot(v, v).is_negative()) {
            return Err(Error::Unclassified("radical of the 2-form is not Euclidean".into()));
        }
        Dirac2Case::KaehlerDegenerate
    };
    let consistent = match case {
        Dirac2Case::TotallyLightlikePlane => ker_dim == 2,
        Dirac2Case::LightlikeTimelike => ker_dim == 1,
        _ => ker_dim == 0,
    };
    Ok(Dirac2Report { case, rank, ker_dim, consistent, complex_structure })
}

/// Dimension of `{b ∈ span{e_i e_j} : b · chi = 0}` for a real spinor.
pub fn stabilizer_dim(rep: &CliffordRep, chi: &[Cq]) -> usize {
    let n = rep.n();
    let mut cols = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            cols.push(rep.gens[i].mul(&rep.gens[j]).apply(chi));
        }
    }
    real_stack(&Mat::from_cols(&cols)).nullspace().len()
}

/// A random real spinor: integer vector for real-backed reps, `w + J w` otherwise.
pub fn random_real_spinor(rep: &CliffordRep, real_structure: Option<&Mat<Cq>>, r: &mut Rng64) -> Vec<Cq> {
    if rep.is_real_backed() {
        return random::real_spinor(r, rep.dim);
    }
    let c = real_structure.expect("real structure required");
    loop {
        let w = random::complex_spinor(r, rep.dim);
        let jw = c.mul_vec(&w.iter().map(|z| z.conj()).collect::<Vec<_>>());
        let v: Vec<Cq> = w.iter().zip(jw).map(|(a, b)| a + b).collect();
        if v.iter().any(|z| !z.is_zero()) {
            return v;
        }
    }
}

/// Random nonzero real spinor with `<v, v> = 0` exactly (real-backed reps with a symmetric product).
/// Picks `a` with `G_aa = 0` and solves the quadratic, which is linear in `v_a`.
pub fn random_null_spinor(rep: &CliffordRep, ip: &InnerProduct, r: &mut Rng64) -> Option<Vec<Cq>> {
    let a = (0..rep.dim).find(|&a| ip.base.col[a] != a)?;
    for _ in 0..100 {
        let mut v = random::real_spinor(r, rep.dim);
        v[a] = Cq::zero();
        let rest = ip.bilinear(&v, &v).re;
        let mut e = vec![Cq::zero(); rep.dim];
        e[a] = Cq::one();
        let lin = ip.bilinear(&e, &v).re + ip.bilinear(&v, &e).re;
        if lin.is_zero() {
            continue;
        }
        v[a] = Cq::new(-rest / lin, Q::zero());
        if v.iter().any(|z| !z.is_zero()) && ip.bilinear(&v, &v).is_zero() {
            return Some(v);
        }
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitRecord {
    pub signature: (usize, usize),
    pub norm: (String, String),
    pub ker_dim: usize,
    pub pure: Option<bool>,
    pub label: String,
    /// Named per-signature facts and whether each held.
    pub facts: Vec<(String, bool)>,
}

impl OrbitRecord {
    pub fn consistent(&self) -> bool {
        self.facts.iter().all(|(_, ok)| *ok)
    }
}

pub const ORBIT_SIGNATURES: [(usize, usize); 7] = [(2, 2), (3, 2), (3, 3), (4, 3), (4, 2), (5, 4), (5, 3)];

/// Representation used for real spinors in one of [`ORBIT_SIGNATURES`]:
/// alternating convention for split signatures, standard otherwise.
pub fn orbit_rep(p: usize, q: usize) -> Result<CliffordRep> {
    if !ORBIT_SIGNATURES.contains(&(p, q)) {
        return Err(Error::UnsupportedSignature { p, q, what: "orbit predicates".into() });
    }
    let sig = if p == q || p == q + 1 { Signature::alternating(p + q)? } else { Signature::standard(p, q)? };
    CliffordRep::new(sig)
}

/// Evaluates the per-signature orbit facts for a real spinor.
pub fn low_dim_orbit_predicates(rep: &CliffordRep, ip: &InnerProduct, v: &[Cq]) -> Result<OrbitRecord> {
    let (p, q) = (rep.sig.p, rep.sig.q);
    if !ORBIT_SIGNATURES.contains(&(p, q)) {
        return Err(Error::UnsupportedSignature { p, q, what: "orbit predicates".into() });
    }
    let ker_dim = rep.kernel_real(v)?.len();
    let norm = ip.real_norm(rep, v);
    let norm_zero = norm.is_zero();
    let m = rep.sig.m();
    let real_pure = rep.is_real_backed() && rep.sig.is_split();
    let pure = if real_pure { Some(ker_dim == m) } else { None };
    let half = if rep.n().is_multiple_of(2) {
        let plus = rep.half_spinor_indices(1);
        let in_plus = (0..rep.dim).all(|b| plus.contains(&b) || v[b].is_zero());
        let in_minus = (0..rep.dim).all(|b| !plus.contains(&b) || v[b].is_zero());
        in_plus || in_minus
    } else {
        false
    };
    let mut facts = Vec::new();
    let label;
    match (p, q) {
        (2, 2) | (3, 3) => {
            if half {
                facts.push(("nonzero half-spinors are pure".into(), pure == Some(true)));
            }
            label = if pure == Some(true) { "pure" } else { "not pure" };
        }
        (3, 2) => {
            facts.push(("nonzero spinors are pure".into(), pure == Some(true)));
            label = if pure == Some(true) { "pure" } else { "not pure" };
        }
        (4, 3) => {
            facts.push(("pure iff <v,v> = 0".into(), pure == Some(norm_zero)));
            facts.push(("dim ker v in {0,3}".into(), ker_dim == 0 || ker_dim == 3));
            label = if norm_zero { "pure (M_0)" } else { "generic (M_c, c != 0)" };
        }
        (5, 4) => {
            if norm_zero {
                facts.push(("<v,v> = 0 implies ker v != 0".into(), ker_dim >= 1));
                label = "N_0";
            } else {
                facts.push(("<v,v> != 0 implies ker v = 0".into(), ker_dim == 0));
                label = "N_c, c != 0";
            }
        }
        (4, 2) => {
            facts.push(("dim ker v in {0,2}".into(), ker_dim == 0 || ker_dim == 2));
            label = if ker_dim == 2 { "pure" } else { "trivial kernel" };
        }
        _ => {
            label = if norm_zero { "null" } else { "non-null" };
        }
    }
    let re = crate::scalar::q_parts(&norm.re);
    Ok(OrbitRecord { signature: (p, q), norm: re, ker_dim, pure, label: label.into(), facts })
}

/// Converts a real vector to a complex one (helper for callers building test vectors).
pub fn complexify(x: &[Q]) -> Vec<Cq> {
    to_complex(x)
}

/// Lorentzian Dirac current check: for `p = 1`, `||V||^2 = 0` implies `V · chi = 0`.
pub fn dirac_current_null_implies_kernel(fam: &DiracFamily, rep: &CliffordRep, chi: &[Cq]) -> Result<Option<bool>> {
    if rep.sig.p != 1 {
        return Err(Error::UnsupportedSignature { p: rep.sig.p, q: rep.sig.q, what: "Dirac current".into() });
    }
    let v = fam.form(rep, chi, 1)?.dense();
    if !rep.sig.dot(&v, &v).is_zero() {
        return Ok(None);
    }
    Ok(Some(rep.real_vec_mul(&v, chi)?.iter().all(|c| c.is_zero())))
}

pub fn field_from_sign<T: Field>(e: i8) -> T {
    T::from_i64(e as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::random_spin_element;
    use crate::random::{complex_spinor, rng};
    use crate::scalar::{cq, q};
    use proptest::prelude::*;

    fn rep(sig: Signature) -> CliffordRep {
        CliffordRep::new(sig).unwrap()
    }

    #[test]
    fn riemannian_product_is_standard() {
        let r = rep(Signature::standard(0, 4).unwrap());
        let ip = InnerProduct::new(&r).unwrap();
        assert_eq!(ip.phase, 0);
        assert!(ip.base.is_identity());
        let u = complex_spinor(&mut rng(1), r.dim);
        let n: Cq = u.iter().fold(Cq::zero(), |a, z| a + z * z.conj());
        assert_eq!(ip.hermitian(&u, &u), n);
    }

    #[test]
    fn spf_pattern_split_signatures() {
        for n in 2..=8 {
            let r = rep(Signature::alternating(n).unwrap());
            let ip = InnerProduct::new(&r).unwrap();
            assert!(check_spf_pattern(&r, &ip), "n = {n}");
        }
    }

    #[test]
    fn real_product_symmetry_by_p() {
        for n in 2..=9 {
            let r = rep(Signature::alternating(n).unwrap());
            let ip = InnerProduct::new(&r).unwrap();
            assert_eq!(ip.real_symmetric(), r.sig.p % 4 <= 1, "p = {}", r.sig.p);
        }
    }

    #[test]
    fn dirac_phases_exist_and_forms_are_real() {
        for sig in [Signature::standard(1, 3).unwrap(), Signature::alternating(5).unwrap(), Signature::standard(2, 4).unwrap()] {
            let r = rep(sig);
            let fam = DiracFamily::new(&r).unwrap();
            let chi = complex_spinor(&mut rng(9), r.dim);
            for k in 0..=r.n() {
                assert!(fam.form(&r, &chi, k).is_ok());
            }
            assert!(!fam.form(&r, &chi, r.sig.p).unwrap().is_zero());
            let zero = vec![Cq::zero(); r.dim];
            assert!(fam.form(&r, &zero, 1).unwrap().is_zero());
        }
    }

    #[test]
    fn f_vectors_annihilate_matching_labels() {
        let r = rep(Signature::alternating(6).unwrap());
        for i in 0..3 {
            for b in 0..r.dim {
                let label = r.u_label(b);
                let f = f_vector(6, i, label[i]);
                assert!(r.real_vec_mul(&f, &r.basis(b)).unwrap().iter().all(|c| c.is_zero()));
                let g = f_vector(6, i, -label[i]);
                assert!(r.real_vec_mul(&g, &r.basis(b)).unwrap().iter().any(|c| !c.is_zero()));
            }
        }
    }

    #[test]
    fn pure_form_is_wedge_of_kernel() {
        let r = rep(Signature::alternating(4).unwrap());
        let fam = DiracFamily::new(&r).unwrap();
        let chi = r.basis::<Q>(0);
        let alpha = fam.form(&r, &chi, 2).unwrap();
        let ker = r.kernel_real(&chi).unwrap();
        assert_eq!(ker.len(), 2);
        let wedge = KForm::from_vector(&ker[0]).wedge(&KForm::from_vector(&ker[1]));
        // alpha is a nonzero multiple of the wedge of the kernel basis.
        let (k, c) = wedge.coeffs.iter().next().unwrap();
        let ratio = alpha.coeff(k) / c.clone();
        assert!(!ratio.is_zero());
        assert_eq!(alpha, wedge.scale(&ratio));
    }

    #[test]
    fn lorentzian_null_current_lies_in_kernel() {
        let r = rep(Signature::standard(1, 3).unwrap());
        let fam = DiracFamily::new(&r).unwrap();
        let mut seen = 0;
        for b in r.half_spinor_indices(1) {
            let mut chi = vec![Cq::zero(); r.dim];
            chi[b] = cq(2, 1);
            if let Some(ok) = dirac_current_null_implies_kernel(&fam, &r, &chi).unwrap() {
                assert!(ok);
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn causal_types_detect_mixed_factors() {
        let sig = Signature::standard(2, 3).unwrap();
        // l = e1 + e3 (null), t = e2 (timelike), s = e4 (spacelike)
        let l = vec![q(1), q(0), q(1), q(0), q(0)];
        let t = vec![q(0), q(1), q(0), q(0), q(0)];
        let s = vec![q(0), q(0), q(0), q(1), q(0)];
        let lts = KForm::from_vector(&l).wedge(&KForm::from_vector(&t)).wedge(&KForm::from_vector(&s));
        let rep = simple_form_causal_types(&sig, &lts, std::slice::from_ref(&l)).unwrap();
        assert!(!rep.uniform);
        assert_eq!(rep.null_factors, 1);
        let lt = KForm::from_vector(&l).wedge(&KForm::from_vector(&t));
        let rep2 = simple_form_causal_types(&sig, &lt, std::slice::from_ref(&l)).unwrap();
        assert!(rep2.uniform && rep2.radical_is_kernel);
        let mut bad = KForm::<Q>::zero(5, 2);
        bad.add_term(&[0, 1], q(1));
        bad.add_term(&[2, 3], q(1));
        assert!(simple_form_causal_types(&sig, &bad, &[]).is_err());
    }

    #[test]
    fn stabilizer_dimension_of_pure_spinors() {
        for n in [4usize, 5, 6, 7] {
            let r = rep(Signature::alternating(n).unwrap());
            let m = n / 2;
            let dim = stabilizer_dim(&r, &r.basis(0));
            let nil = dim - (m * m - 1);
            let expect = m * (m - 1) / 2 + if n % 2 == 1 { m } else { 0 };
            assert_eq!(nil, expect, "n = {n}");
        }
    }

    #[test]
    fn null_sampler_is_exact() {
        let r = rep(Signature::alternating(7).unwrap());
        let ip = InnerProduct::new(&r).unwrap();
        let mut g = rng(4);
        for _ in 0..5 {
            let v = random_null_spinor(&r, &ip, &mut g).unwrap();
            assert!(ip.bilinear(&v, &v).is_zero());
            let rec = low_dim_orbit_predicates(&r, &ip, &v).unwrap();
            assert!(rec.consistent(), "{rec:?}");
            assert_eq!(rec.ker_dim, 3);
        }
    }

    #[test]
    fn dirac2_cases_match_kernel_dimension() {
        let sig = Signature::adapted(2, 2).unwrap();
        let r = rep(sig);
        let fam = DiracFamily::new(&r).unwrap();
        let mut g = rng(8);
        for delta in [vec![1i8, -1], vec![1], vec![]] {
            let chi = normal_form_spinor(&r, &delta, &mut g, false);
            let u = random_spin_element(&r, &mut g, 3);
            let phi = u.apply(&r, &chi);
            let rep = classify_dirac2(&fam, &r, &phi).unwrap();
            assert!(rep.consistent, "{rep:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn fg_holds_for_random_vectors(seed in 0u64..10_000) {
            let r = rep(Signature::standard(2, 3).unwrap());
            let ip = InnerProduct::new(&r).unwrap();
            let mut g = rng(seed);
            let x = random::int_vec(&mut g, 5);
            let u = complex_spinor(&mut g, r.dim);
            let v = complex_spinor(&mut g, r.dim);
            prop_assert!(ip.fg_residual_vec(&r, &x, &u, &v).unwrap().is_zero());
            prop_assert!(ip.is_hermitian_on(&u, &v));
        }

        #[test]
        fn dirac_forms_are_equivariant(seed in 0u64..10_000) {
            let r = rep(Signature::standard(1, 3).unwrap());
            let fam = DiracFamily::new(&r).unwrap();
            let mut g = rng(seed);
            let chi = complex_spinor(&mut g, r.dim);
            let u = random_spin_element(&r, &mut g, 3);
            let moved = u.apply(&r, &chi);
            for k in 0..=4 {
                let lhs = fam.form(&r, &moved, k).unwrap();
                let rhs = u.act_form(&r.sig, &fam.form(&r, &chi, k).unwrap());
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
