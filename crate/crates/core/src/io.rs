//! JSON interchange for signatures, spinors and forms.
//!
//! Exact coefficients are `[re_num, re_den, im_num, im_den]`; float coefficients are
//! `[re, im]`. Integers that do not fit in `i64` are written as decimal strings.
//! Form indices are 1-based.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::clifford::Signature;
use crate::error::{Error, Result};
use crate::kform::KForm;
use crate::scalar::{Cq, Q};

pub type C64 = Complex<f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    pub fn from_bigint(x: &BigInt) -> Self {
        match x.to_i64() {
            Some(v) => Number::Int(v),
            None => Number::Text(x.to_string()),
        }
    }

    fn as_bigint(&self) -> Result<BigInt> {
        match self {
            Number::Int(v) => Ok(BigInt::from(*v)),
            Number::Text(s) => s.trim().parse().map_err(|_| Error::Input(format!("{s:?} is not an integer"))),
            Number::Float(f) => Err(Error::Input(format!("{f} is not an integer"))),
        }
    }

    fn as_f64(&self) -> Result<f64> {
        match self {
            Number::Int(v) => Ok(*v as f64),
            Number::Float(f) => Ok(*f),
            Number::Text(s) => s.trim().parse().map_err(|_| Error::Input(format!("{s:?} is not a number"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignatureJson {
    pub p: usize,
    pub q: usize,
    pub eps: Vec<i8>,
}

impl SignatureJson {
    pub fn from_signature(s: &Signature) -> Self {
        SignatureJson { p: s.p, q: s.q, eps: s.eps.clone() }
    }

    pub fn to_signature(&self) -> Result<Signature> {
        let sig = Signature::from_eps(self.eps.clone())?;
        if sig.p != self.p || sig.q != self.q {
            return Err(Error::InvalidSignature(format!("eps has signature ({},{}), header says ({},{})", sig.p, sig.q, self.p, self.q)));
        }
        Ok(sig)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinorJson {
    pub signature: SignatureJson,
    pub coeffs: Vec<Vec<Number>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpinorCoeffs {
    Exact(Vec<Cq>),
    Float(Vec<C64>),
}

impl SpinorCoeffs {
    pub fn len(&self) -> usize {
        match self {
            SpinorCoeffs::Exact(v) => v.len(),
            SpinorCoeffs::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SpinorCoeffs::Exact(v) => v.iter().all(|c| c.is_zero()),
            SpinorCoeffs::Float(v) => v.iter().all(|c| c.norm() == 0.0),
        }
    }

    pub fn to_c64(&self) -> Vec<C64> {
        match self {
            SpinorCoeffs::Exact(v) => v.iter().map(crate::scalar::cq_to_c64).collect(),
            SpinorCoeffs::Float(v) => v.clone(),
        }
    }
}

pub fn q_from_parts(num: &Number, den: &Number) -> Result<Q> {
    let d = den.as_bigint()?;
    if d.is_zero() {
        return Err(Error::Input("zero denominator".into()));
    }
    Ok(Q::new(num.as_bigint()?, d))
}

pub fn q_to_parts(x: &Q) -> [Number; 2] {
    [Number::from_bigint(x.numer()), Number::from_bigint(x.denom())]
}

impl SpinorJson {
    pub fn exact(sig: &Signature, v: &[Cq]) -> Self {
        let coeffs = v
            .iter()
            .map(|c| {
                let [a, b] = q_to_parts(&c.re);
                let [e, f] = q_to_parts(&c.im);
                vec![a, b, e, f]
            })
            .collect();
        SpinorJson { signature: SignatureJson::from_signature(sig), coeffs }
    }

    pub fn float(sig: &Signature, v: &[C64]) -> Self {
        let coeffs = v.iter().map(|c| vec![Number::Float(c.re), Number::Float(c.im)]).collect();
        SpinorJson { signature: SignatureJson::from_signature(sig), coeffs }
    }

    /// Parses coefficients; all entries must use the same (exact or float) layout.
    pub fn parse(&self) -> Result<(Signature, SpinorCoeffs)> {
        let sig = self.signature.to_signature()?;
        let dim = 1usize << (sig.n() / 2);
        if self.coeffs.len() != dim {
            return Err(Error::Dimension { expected: dim, got: self.coeffs.len() });
        }
        let width = self.coeffs.first().map_or(4, |c| c.len());
        if self.coeffs.iter().any(|c| c.len() != width) {
            return Err(Error::Input("mixed coefficient layouts".into()));
        }
        let coeffs = match width {
            4 => SpinorCoeffs::Exact(
                self.coeffs
                    .iter()
                    .map(|c| Ok(Cq::new(q_from_parts(&c[0], &c[1])?, q_from_parts(&c[2], &c[3])?)))
                    .collect::<Result<_>>()?,
            ),
            2 => SpinorCoeffs::Float(self.coeffs.iter().map(|c| Ok(C64::new(c[0].as_f64()?, c[1].as_f64()?))).collect::<Result<_>>()?),
            w => return Err(Error::Input(format!("coefficient entries need 4 (exact) or 2 (float) numbers, got {w}"))),
        };
        Ok((sig, coeffs))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub idx: Vec<usize>,
    pub coeff: Vec<Number>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KFormJson {
    pub degree: usize,
    pub terms: Vec<TermJson>,
}

impl KFormJson {
    pub fn exact(f: &KForm<Q>) -> Self {
        let terms = f
            .coeffs
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(idx, c)| TermJson { idx: idx.iter().map(|i| i + 1).collect(), coeff: q_to_parts(c).to_vec() })
            .collect();
        KFormJson { degree: f.degree, terms }
    }

    pub fn float(f: &KForm<C64>, tol: f64) -> Self {
        let terms = f
            .coeffs
            .iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(idx, c)| TermJson { idx: idx.iter().map(|i| i + 1).collect(), coeff: vec![Number::Float(c.re), Number::Float(c.im)] })
            .collect();
        KFormJson { degree: f.degree, terms }
    }

    /// Reads an exact real form `[num, den]` per term.
    pub fn to_exact(&self, dim: usize) -> Result<KForm<Q>> {
        let mut f = KForm::zero(dim, self.degree);
        let mut seen = BTreeMap::new();
        for t in &self.terms {
            if t.idx.len() != self.degree {
                return Err(Error::Input(format!("index {:?} in a {}-form", t.idx, self.degree)));
            }
            if t.idx.iter().any(|&i| i == 0 || i > dim) || t.idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Input(format!("index {:?} must be strictly increasing in 1..={dim}", t.idx)));
            }
            if t.coeff.len() != 2 {
                return Err(Error::Input("form coefficients are [num, den]".into()));
            }
            if seen.insert(t.idx.clone(), ()).is_some() {
                return Err(Error::Input(format!("repeated index {:?}", t.idx)));
            }
            let idx: Vec<usize> = t.idx.iter().map(|i| i - 1).collect();
            f.add_term(&idx, q_from_parts(&t.coeff[0], &t.coeff[1])?);
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cq, qf};

    #[test]
    fn exact_spinor_round_trip() {
        let sig = Signature::standard(1, 2).unwrap();
        let v = vec![Cq::new(qf(3, 7), qf(-1, 2)), cq(0, 5)];
        let js = SpinorJson::exact(&sig, &v);
        let text = serde_json::to_string(&js).unwrap();
        let back: SpinorJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.parse().unwrap(), (sig, SpinorCoeffs::Exact(v)));
    }

    #[test]
    fn big_integers_survive_as_strings() {
        let big = Q::from_integer(BigInt::from(u64::MAX) * BigInt::from(3));
        let [n, _] = q_to_parts(&big);
        assert!(matches!(n, Number::Text(_)));
        let sig = Signature::standard(0, 2).unwrap();
        let js = SpinorJson::exact(&sig, &[Cq::new(big.clone(), Q::zero()), cq(1, 0)]);
        let back: SpinorJson = serde_json::from_str(&serde_json::to_string(&js).unwrap()).unwrap();
        match back.parse().unwrap().1 {
            SpinorCoeffs::Exact(v) => assert_eq!(v[0].re, big),
            _ => panic!("expected exact"),
        }
    }

    #[test]
    fn malformed_spinors_are_rejected() {
        let text = r#"{"signature":{"p":1,"q":1,"eps":[1,1]},"coeffs":[[1,1,0,1],[0,1,0,1]]}"#;
        let js: SpinorJson = serde_json::from_str(text).unwrap();
        assert!(js.parse().is_err());
        let text = r#"{"signature":{"p":1,"q":1,"eps":[-1,1]},"coeffs":[[1,0,0,1],[0,1,0,1]]}"#;
        let js: SpinorJson = serde_json::from_str(text).unwrap();
        assert!(js.parse().is_err());
        let text = r#"{"signature":{"p":1,"q":1,"eps":[-1,1]},"coeffs":[[1,1,0,1]]}"#;
        let js: SpinorJson = serde_json::from_str(text).unwrap();
        assert!(matches!(js.parse(), Err(Error::Dimension { .. })));
        let text = r#"{"signature":{"p":1,"q":1,"eps":[-1,1]},"coeffs":[[0.5,0.25],[0,1]]}"#;
        let js: SpinorJson = serde_json::from_str(text).unwrap();
        assert_eq!(js.parse().unwrap().1, SpinorCoeffs::Float(vec![C64::new(0.5, 0.25), C64::new(0.0, 1.0)]));
    }

    #[test]
    fn forms_use_one_based_indices() {
        let mut f = KForm::zero(3, 2);
        f.add_term(&[0, 2], qf(1, 3));
        let js = KFormJson::exact(&f);
        assert_eq!(js.terms[0].idx, vec![1, 3]);
        assert_eq!(js.to_exact(3).unwrap(), f);
        let bad = KFormJson { degree: 2, terms: vec![TermJson { idx: vec![2, 1], coeff: vec![Number::Int(1), Number::Int(1)] }] };
        assert!(bad.to_exact(3).is_err());
    }
}
