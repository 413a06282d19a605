//! Deterministic samplers. Every sampler takes an explicit seed or RNG.

use crate::scalar::{q, qf, Cq, Q};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer in `[-9, 9]`.
pub fn small_int(r: &mut Rng64) -> i64 {
    r.gen_range(-9..=9)
}

pub fn int_vec(r: &mut Rng64, n: usize) -> Vec<Q> {
    (0..n).map(|_| q(small_int(r))).collect()
}

/// Complex spinor with integer real and imaginary parts in `[-9, 9]`, never zero.
pub fn complex_spinor(r: &mut Rng64, n: usize) -> Vec<Cq> {
    loop {
        let v: Vec<Cq> = (0..n).map(|_| Cq::new(q(small_int(r)), q(small_int(r)))).collect();
        if v.iter().any(|c| c != &Cq::new(q(0), q(0))) {
            return v;
        }
    }
}

/// Real spinor with integer entries in `[-9, 9]`, never zero.
pub fn real_spinor(r: &mut Rng64, n: usize) -> Vec<Cq> {
    loop {
        let v: Vec<Cq> = (0..n).map(|_| Cq::new(q(small_int(r)), q(0))).collect();
        if v.iter().any(|c| c.re != q(0)) {
            return v;
        }
    }
}

/// Rational parameter `t = a/b` with `|t| < 1` and `t != 0`.
pub fn unit_param(r: &mut Rng64) -> Q {
    loop {
        let b: i64 = r.gen_range(2..=7);
        let a: i64 = r.gen_range(-(b - 1)..=(b - 1));
        if a != 0 {
            return qf(a, b);
        }
    }
}

pub fn gaussian_vec(r: &mut Rng64, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(r)).collect()
}

/// Standard normal deviate via Box-Muller.
pub fn normal(r: &mut Rng64) -> f64 {
    let u1: f64 = r.gen_range(f64::EPSILON..1.0);
    let u2: f64 = r.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn complex_gaussian(r: &mut Rng64, n: usize) -> Vec<Complex<f64>> {
    (0..n).map(|_| Complex::new(normal(r), normal(r))).collect()
}
