//! Split-signature metrics with a real pure parallel spinor, in normal-form coordinates
//! `(x_1..x_m, y^1..y^m, z)`:
//!
//! `h = -dz^2 - 4 Σ dx_i dy^i - 4 Σ g_ij dy^i dy^j`, with `g` symmetric and
//! `Σ_i ∂g_ik/∂x_i = 0`. Without `z` the signature is `(m, m)`.

use crate::error::{Error, Result};
use crate::numeric;
use crate::random::{small_int, Rng64};
use crate::scalar::{q, q_to_f64, Q};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Sparse polynomial with rational coefficients, keyed by exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, Q::one())
    }

    pub fn monomial(exp: Vec<u32>, c: Q) -> Self {
        let mut p = Poly::zero(exp.len());
        if !c.is_zero() {
            p.terms.insert(exp, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_term(&mut self, exp: Vec<u32>, c: Q) {
        let entry = self.terms.entry(exp).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn diff(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c * q(e[i] as i64));
            }
        }
        out
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| q_to_f64(c) * e.iter().zip(point).map(|(&k, &x)| x.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn eval_q(&self, point: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (&k, x) in e.iter().zip(point) {
                for _ in 0..k {
                    t *= x;
                }
            }
            acc += t;
        }
        acc
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*v{i}")?,
                    _ => write!(f, "*v{i}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

/// The data `(m, include_z, g_ij)` of a normal-form metric.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMetric {
    pub m: usize,
    pub include_z: bool,
    pub g: Vec<Vec<Poly>>,
}

/// A nonzero `Σ_i ∂g_ik/∂x_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintViolation {
    pub k: usize,
    pub divergence: Poly,
}

/// Result of [`PolyMetric::lightlike_distribution_check`].
#[derive(Clone, Debug)]
pub struct LightlikeReport {
    /// `h(∂x_i, ∂x_j) = 0` as polynomials.
    pub lightlike_exact: bool,
    /// `max |Γ^a_{c x_i}|` over non-`x` indices `a` and sampled points.
    pub parallel_residual: f64,
}

impl LightlikeReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.lightlike_exact && self.parallel_residual < tol
    }
}

impl PolyMetric {
    pub fn new(m: usize, include_z: bool, g: Vec<Vec<Poly>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Input("m must be at least 1".into()));
        }
        let nv = 2 * m + usize::from(include_z);
        if g.len() != m || g.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension { expected: m, got: g.len() });
        }
        for i in 0..m {
            for j in 0..m {
                if g[i][j].nvars != nv {
                    return Err(Error::Dimension { expected: nv, got: g[i][j].nvars });
                }
                if g[i][j] != g[j][i] {
                    return Err(Error::Input(format!("g_{},{} != g_{},{}", i + 1, j + 1, j + 1, i + 1)));
                }
            }
        }
        Ok(PolyMetric { m, include_z, g })
    }

    /// The flat metric `g = 0`.
    pub fn flat(m: usize, include_z: bool) -> Self {
        let nv = 2 * m + usize::from(include_z);
        PolyMetric { m, include_z, g: vec![vec![Poly::zero(nv); m]; m] }
    }

    /// `m = 1`, `g_11 = (y^1)^2 + z^2`.
    pub fn fixture_m1() -> Self {
        let y = Poly::var(3, 1);
        let z = Poly::var(3, 2);
        PolyMetric { m: 1, include_z: true, g: vec![vec![y.mul(&y).add(&z.mul(&z))]] }
    }

    pub fn nvars(&self) -> usize {
        2 * self.m + usize::from(self.include_z)
    }

    pub fn x(&self, i: usize) -> usize {
        i
    }

    pub fn y(&self, i: usize) -> usize {
        self.m + i
    }

    pub fn z(&self) -> Option<usize> {
        self.include_z.then_some(2 * self.m)
    }

    /// `(p, q)` of `h`.
    pub fn signature(&self) -> (usize, usize) {
        (self.m + usize::from(self.include_z), self.m)
    }

    pub fn validate_constraints(&self) -> Vec<ConstraintViolation> {
        (0..self.m)
            .filter_map(|k| {
                let div = (0..self.m).fold(Poly::zero(self.nvars()), |acc, i| acc.add(&self.g[i][k].diff(self.x(i))));
                (!div.is_zero()).then_some(ConstraintViolation { k, divergence: div })
            })
            .collect()
    }

    /// Components of `h` as polynomials.
    pub fn metric_poly(&self) -> Vec<Vec<Poly>> {
        let nv = self.nvars();
        let mut h = vec![vec![Poly::zero(nv); nv]; nv];
        for i in 0..self.m {
            h[self.x(i)][self.y(i)] = Poly::constant(nv, q(-2));
            h[self.y(i)][self.x(i)] = Poly::constant(nv, q(-2));
            for j in 0..self.m {
                h[self.y(i)][self.y(j)] = self.g[i][j].scale(&q(-4));
            }
        }
        if let Some(z) = self.z() {
            h[z][z] = Poly::constant(nv, q(-1));
        }
        h
    }

    pub fn metric_at(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        let nv = self.nvars();
        if point.len() != nv {
            return Err(Error::Dimension { expected: nv, got: point.len() });
        }
        let h = self.metric_poly();
        Ok(DMatrix::from_fn(nv, nv, |a, b| h[a][b].eval(point)))
    }

    /// `Ric_{y^k y^l}` from the closed formula
    /// `2(-∂_z^2 g_kl - Σ_a ∂_{x_a}∂_{y^a} g_kl + Σ_{a,b}(g_ab ∂_{x_a}∂_{x_b} g_kl - ∂_{x_a} g_bl ∂_{x_b} g_ka))`;
    /// all other components vanish.
    pub fn ricci_closed_formula(&self) -> Result<Vec<Vec<Poly>>> {
        let bad = self.validate_constraints();
        if !bad.is_empty() {
            return Err(Error::Constraint(format!("divergence of column {} is {}", bad[0].k + 1, bad[0].divergence)));
        }
        let m = self.m;
        let nv = self.nvars();
        let two = q(2);
        let mut out = vec![vec![Poly::zero(nv); m]; m];
        for k in 0..m {
            for l in 0..m {
                let gkl = &self.g[k][l];
                let mut acc = Poly::zero(nv);
                if let Some(z) = self.z() {
                    acc = acc.sub(&gkl.diff(z).diff(z));
                }
                for a in 0..m {
                    acc = acc.sub(&gkl.diff(self.x(a)).diff(self.y(a)));
                    for b in 0..m {
                        acc = acc.add(&self.g[a][b].mul(&gkl.diff(self.x(a)).diff(self.x(b))));
                        acc = acc.sub(&self.g[b][l].diff(self.x(a)).mul(&self.g[k][a].diff(self.x(b))));
                    }
                }
                out[k][l] = acc.scale(&two);
            }
        }
        Ok(out)
    }

    /// The closed formula placed in the full `nvars x nvars` matrix at a point.
    pub fn ricci_formula_at(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        let r = self.ricci_closed_formula()?;
        let nv = self.nvars();
        let mut out = DMatrix::zeros(nv, nv);
        for k in 0..self.m {
            for l in 0..self.m {
                out[(self.y(k), self.y(l))] = r[k][l].eval(point);
            }
        }
        Ok(out)
    }

    /// Ricci tensor by nested centered differences of `h` (step `step`, one Richardson level).
    pub fn ricci_numeric_oracle(&self, point: &[f64], step: f64) -> Result<DMatrix<f64>> {
        let h0 = self.metric_at(point)?;
        if h0.determinant().abs() < 1e-12 {
            return Err(Error::DegenerateMetric);
        }
        let hp = self.metric_poly();
        let nv = self.nvars();
        let metric = |u: &[f64]| DMatrix::from_fn(nv, nv, |a, b| hp[a][b].eval(u));
        numeric::ricci(&metric, point, step).ok_or(Error::DegenerateMetric)
    }

    pub fn scalar_curvature_numeric(&self, point: &[f64], step: f64) -> Result<f64> {
        let ric = self.ricci_numeric_oracle(point, step)?;
        numeric::scalar_curvature(&self.metric_at(point)?, &ric).ok_or(Error::DegenerateMetric)
    }

    /// `L = span(∂_{x_i})`: exact lightlike test plus finite-difference parallelity
    /// `∇_W ∂_{x_i} ∈ L` at the given points.
    pub fn lightlike_distribution_check(&self, points: &[Vec<f64>], step: f64) -> Result<LightlikeReport> {
        let hp = self.metric_poly();
        let lightlike_exact = (0..self.m).all(|i| (0..self.m).all(|j| hp[self.x(i)][self.x(j)].is_zero()));
        let nv = self.nvars();
        let metric = |u: &[f64]| DMatrix::from_fn(nv, nv, |a, b| hp[a][b].eval(u));
        let mut worst: f64 = 0.0;
        for p in points {
            let gam = numeric::christoffel(&metric, p, step).ok_or(Error::DegenerateMetric)?;
            for a in self.m..nv {
                for c in 0..nv {
                    for i in 0..self.m {
                        worst = worst.max(gam[a][c][self.x(i)].abs());
                    }
                }
            }
        }
        Ok(LightlikeReport { lightlike_exact, parallel_residual: worst })
    }

    /// A random metric satisfying the constraints:
    /// `g = a(y, z) + δ Δ_x f - Hess_x f` with random polynomials `a_ij = a_ji` and `f`.
    /// `degree` bounds the degree of `g`.
    pub fn random_constrained(m: usize, include_z: bool, degree: u32, r: &mut Rng64) -> Self {
        let nv = 2 * m + usize::from(include_z);
        let rand_poly = |r: &mut Rng64, deg: u32, x_free: bool, terms: usize| -> Poly {
            let mut p = Poly::zero(nv);
            for _ in 0..terms {
                let mut e = vec![0u32; nv];
                let d = if x_free { r.gen_range(0..=deg) } else { r.gen_range(deg.saturating_sub(2)..=deg) };
                for _ in 0..d {
                    // favour x so that f carries the higher x-derivatives the curvature sees
                    let v = if x_free { r.gen_range(m..nv) } else if r.gen_bool(0.7) { r.gen_range(0..m) } else { r.gen_range(m..nv) };
                    e[v] += 1;
                }
                let c = Q::new(BigInt::from(small_int(r)), BigInt::from(r.gen_range(2..=6)));
                p = p.add(&Poly::monomial(e, c));
            }
            p
        };
        let mut g = vec![vec![Poly::zero(nv); m]; m];
        for i in 0..m {
            for j in i..m {
                let a = rand_poly(r, degree, true, 3);
                g[i][j] = a.clone();
                g[j][i] = a;
            }
        }
        let f = rand_poly(r, degree + 2, false, 6);
        let lap = (0..m).fold(Poly::zero(nv), |acc, a| acc.add(&f.diff(a).diff(a)));
        for i in 0..m {
            for j in 0..m {
                let mut t = f.diff(i).diff(j).scale(&q(-1));
                if i == j {
                    t = t.add(&lap);
                }
                g[i][j] = g[i][j].add(&t);
            }
        }
        PolyMetric { m, include_z, g }
    }

    pub fn to_json(&self) -> Result<PolyMetricJson> {
        let mut g = BTreeMap::new();
        for i in 0..self.m {
            for j in i..self.m {
                let terms = self.g[i][j]
                    .terms
                    .iter()
                    .map(|(e, c)| {
                        let num = c.numer().to_i64().ok_or_else(|| Error::Input("coefficient overflows i64".into()))?;
                        let den = c.denom().to_i64().ok_or_else(|| Error::Input("coefficient overflows i64".into()))?;
                        Ok(TermJson { exp: e.clone(), coeff: [num, den] })
                    })
                    .collect::<Result<Vec<_>>>()?;
                g.insert(format!("{},{}", i + 1, j + 1), terms);
            }
        }
        Ok(PolyMetricJson { m: self.m, include_z: self.include_z, g })
    }

    pub fn from_json(js: &PolyMetricJson) -> Result<Self> {
        let m = js.m;
        if m == 0 {
            return Err(Error::Input("m must be at least 1".into()));
        }
        let nv = 2 * m + usize::from(js.include_z);
        let mut g: Vec<Vec<Option<Poly>>> = vec![vec![None; m]; m];
        for (key, terms) in &js.g {
            let (i, j) = parse_key(key, m)?;
            let mut p = Poly::zero(nv);
            for t in terms {
                if t.exp.len() != nv {
                    return Err(Error::Input(format!("exponent vector {:?} for g_{key} needs {nv} entries", t.exp)));
                }
                if t.coeff[1] == 0 {
                    return Err(Error::Input(format!("zero denominator in g_{key}")));
                }
                p = p.add(&Poly::monomial(t.exp.clone(), Q::new(BigInt::from(t.coeff[0]), BigInt::from(t.coeff[1]))));
            }
            for (a, b) in [(i, j), (j, i)] {
                match &g[a][b] {
                    Some(old) if *old != p => return Err(Error::Input(format!("g_{},{} != g_{},{}", i + 1, j + 1, j + 1, i + 1))),
                    _ => g[a][b] = Some(p.clone()),
                }
            }
        }
        let g = g.into_iter().map(|r| r.into_iter().map(|p| p.unwrap_or_else(|| Poly::zero(nv))).collect()).collect();
        PolyMetric::new(m, js.include_z, g)
    }
}

fn parse_key(key: &str, m: usize) -> Result<(usize, usize)> {
    let bad = || Error::Input(format!("metric key {key:?} is not \"i,j\" with 1 <= i, j <= {m}"));
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    let i: usize = a.trim().parse().map_err(|_| bad())?;
    let j: usize = b.trim().parse().map_err(|_| bad())?;
    if i == 0 || j == 0 || i > m || j > m {
        return Err(bad());
    }
    Ok((i - 1, j - 1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coeff: [i64; 2],
}

/// JSON form `{ "m", "include_z", "g": {"i,j": [{"exp", "coeff": [num, den]}]} }`, 1-based keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyMetricJson {
    pub m: usize,
    pub include_z: bool,
    pub g: BTreeMap<String, Vec<TermJson>>,
}

/// Parses `"a,b/c,-d"` into rationals.
pub fn parse_point(s: &str) -> Result<Vec<Q>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let bad = || Error::Input(format!("bad coordinate {t:?}"));
            match t.split_once('/') {
                Some((n, d)) => {
                    let d: i64 = d.parse().map_err(|_| bad())?;
                    if d == 0 {
                        return Err(bad());
                    }
                    Ok(Q::new(BigInt::from(n.parse::<i64>().map_err(|_| bad())?), BigInt::from(d)))
                }
                None => {
                    if let Ok(n) = t.parse::<i64>() {
                        return Ok(q(n));
                    }
                    let f: f64 = t.parse().map_err(|_| bad())?;
                    Q::from_float(f).filter(|_| f.is_finite()).ok_or_else(bad)
                }
            }
        })
        .collect()
}

pub fn point_to_f64(p: &[Q]) -> Vec<f64> {
    p.iter().map(q_to_f64).collect()
}

/// `max |a_ij|` over entries outside the `dy ⊗ dy` block.
pub fn off_block_max(pm: &PolyMetric, ric: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..ric.nrows() {
        for b in 0..ric.ncols() {
            let in_y = |i: usize| (pm.m..2 * pm.m).contains(&i);
            if !(in_y(a) && in_y(b)) {
                worst = worst.max(ric[(a, b)].abs());
            }
        }
    }
    worst
}
