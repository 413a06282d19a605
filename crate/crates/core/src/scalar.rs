//! Exact scalar fields: rationals, Gaussian rationals and the biquadratic field Q(i, sqrt 2).

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

pub type Q = BigRational;
/// Complex rational `a + ib`.
pub type Cq = Complex<Q>;
/// `Q(i, sqrt 2)` as a complex number over `Q(sqrt 2)`.
pub type Qi2 = Complex<R2>;

/// Arithmetic needed by the exact linear algebra. Division must be exact.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(n: i64) -> Self;
    /// Complex conjugate (identity on real fields).
    fn conj(&self) -> Self;
}

impl Field for Q {
    fn from_i64(n: i64) -> Self {
        Q::from_integer(BigInt::from(n))
    }
    fn conj(&self) -> Self {
        self.clone()
    }
}

impl Field for R2 {
    fn from_i64(n: i64) -> Self {
        R2::from_q(q(n))
    }
    fn conj(&self) -> Self {
        self.clone()
    }
}

impl<T: Field + Num> Field for Complex<T> {
    fn from_i64(n: i64) -> Self {
        Complex::new(T::from_i64(n), T::zero())
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
}

impl Field for f64 {
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn conj(&self) -> Self {
        *self
    }
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn cq(re: i64, im: i64) -> Cq {
    Cq::new(q(re), q(im))
}

pub fn cq_real(re: Q) -> Cq {
    Cq::new(re, Q::zero())
}

/// `i^k` for `k` taken mod 4.
pub fn i_pow<T: Field + Num>(k: i64) -> Complex<T> {
    match k.rem_euclid(4) {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn cq_to_c64(x: &Cq) -> Complex<f64> {
    Complex::new(q_to_f64(&x.re), q_to_f64(&x.im))
}

/// Real quadratic field element `a + b*sqrt(2)`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct R2 {
    pub a: Q,
    pub b: Q,
}

impl R2 {
    pub fn new(a: Q, b: Q) -> Self {
        R2 { a, b }
    }

    pub fn from_q(a: Q) -> Self {
        R2 { a, b: Q::zero() }
    }

    pub fn sqrt2() -> Self {
        R2 { a: Q::zero(), b: Q::one() }
    }

    /// `1/sqrt(2) = sqrt(2)/2`.
    pub fn inv_sqrt2() -> Self {
        R2 { a: Q::zero(), b: qf(1, 2) }
    }

    /// Galois conjugate `a - b*sqrt(2)`.
    pub fn galois(&self) -> Self {
        R2 { a: self.a.clone(), b: -self.b.clone() }
    }

    pub fn norm(&self) -> Q {
        &self.a * &self.a - q(2) * &self.b * &self.b
    }

    pub fn to_f64(&self) -> f64 {
        q_to_f64(&self.a) + q_to_f64(&self.b) * std::f64::consts::SQRT_2
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn signum(&self) -> i32 {
        // sign of a + b sqrt2 without floats: compare a^2 and 2 b^2 when signs differ
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let n = self.norm();
        if n.is_positive() {
            sa
        } else {
            sb
        }
    }
}

fn sign_of(x: &Q) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

impl fmt::Debug for R2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}+{}*r2", self.a, self.b)
        }
    }
}

impl fmt::Display for R2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Add for R2 {
    type Output = R2;
    fn add(self, o: R2) -> R2 {
        R2 { a: self.a + o.a, b: self.b + o.b }
    }
}

impl Sub for R2 {
    type Output = R2;
    fn sub(self, o: R2) -> R2 {
        R2 { a: self.a - o.a, b: self.b - o.b }
    }
}

impl Mul for R2 {
    type Output = R2;
    fn mul(self, o: R2) -> R2 {
        R2 {
            a: &self.a * &o.a + q(2) * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

impl Div for R2 {
    type Output = R2;
    fn div(self, o: R2) -> R2 {
        let n = o.norm();
        let c = self * o.galois();
        R2 { a: c.a / &n, b: c.b / &n }
    }
}

impl Rem for R2 {
    type Output = R2;
    /// Exact field: every division leaves zero remainder.
    fn rem(self, _o: R2) -> R2 {
        R2::zero()
    }
}

impl Neg for R2 {
    type Output = R2;
    fn neg(self) -> R2 {
        R2 { a: -self.a, b: -self.b }
    }
}

impl Zero for R2 {
    fn zero() -> Self {
        R2 { a: Q::zero(), b: Q::zero() }
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for R2 {
    fn one() -> Self {
        R2 { a: Q::one(), b: Q::zero() }
    }
}

impl Num for R2 {
    type FromStrRadixErr = <Q as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        Q::from_str_radix(s, radix).map(R2::from_q)
    }
}

pub fn cq_to_qi2(x: &Cq) -> Qi2 {
    Qi2::new(R2::from_q(x.re.clone()), R2::from_q(x.im.clone()))
}

/// Converts back when the element lies in `Q(i)`.
pub fn qi2_to_cq(x: &Qi2) -> Option<Cq> {
    if x.re.is_rational() && x.im.is_rational() {
        Some(Cq::new(x.re.a.clone(), x.im.a.clone()))
    } else {
        None
    }
}

pub fn qi2_to_c64(x: &Qi2) -> Complex<f64> {
    Complex::new(x.re.to_f64(), x.im.to_f64())
}

/// Fields containing `Q`.
pub trait EmbedQ: Field {
    fn from_q(x: &Q) -> Self;
}

/// Real fields containing `Q` and `1/sqrt(2)`.
pub trait RealEmbed: EmbedQ {
    fn inv_sqrt2() -> Self;
}

impl EmbedQ for Q {
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
}

impl EmbedQ for R2 {
    fn from_q(x: &Q) -> Self {
        R2::from_q(x.clone())
    }
}

impl RealEmbed for R2 {
    fn inv_sqrt2() -> Self {
        R2::inv_sqrt2()
    }
}

impl EmbedQ for f64 {
    fn from_q(x: &Q) -> Self {
        q_to_f64(x)
    }
}

impl RealEmbed for f64 {
    fn inv_sqrt2() -> Self {
        std::f64::consts::FRAC_1_SQRT_2
    }
}

pub fn embed_cq<T: EmbedQ + Num>(x: &Cq) -> Complex<T> {
    Complex::new(T::from_q(&x.re), T::from_q(&x.im))
}

/// Rational `num/den` pair as serialized in reports.
pub fn q_parts(x: &Q) -> (String, String) {
    (x.numer().to_string(), x.denom().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r2_inverse_roundtrip() {
        let x = R2::new(qf(3, 2), qf(-5, 7));
        let y = R2::one() / x.clone();
        assert_eq!(x * y, R2::one());
    }

    #[test]
    fn sqrt2_squares_to_two() {
        assert_eq!(R2::sqrt2() * R2::sqrt2(), R2::from_i64(2));
        assert_eq!(R2::inv_sqrt2() * R2::sqrt2(), R2::one());
    }

    #[test]
    fn r2_sign_matches_float() {
        for (a, b) in [(1, 1), (1, -1), (-3, 2), (3, -2), (-1, 1), (0, -1), (2, 0)] {
            let x = R2::new(q(a), q(b));
            let f = x.to_f64();
            assert_eq!(x.signum(), if f > 0.0 { 1 } else if f < 0.0 { -1 } else { 0 });
        }
    }

    #[test]
    fn i_powers_cycle() {
        let i: Cq = i_pow(1);
        assert_eq!(i.clone() * i, i_pow::<Q>(2));
        assert_eq!(i_pow::<Q>(-1), i_pow::<Q>(3));
    }

    #[test]
    fn qi2_division_is_exact() {
        let x = Qi2::new(R2::new(q(1), q(2)), R2::new(qf(1, 3), q(-1)));
        let y = Qi2::new(R2::new(q(-2), q(1)), R2::new(q(5), qf(2, 9)));
        assert_eq!((x.clone() / y.clone()) * y, x);
    }
}
